//! Levenberg-Marquardt fit of a sum of Voigt peaks plus baseline.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::voigt::voigt_with_gradient;
use super::{AxisUnit, Spectrum, VoigtPeak};
use crate::error::{Error, Result};
use crate::modes::QFactor;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Gaussian FWHM held fixed (instrument resolution); free per peak when `None`.
    pub fixed_gauss_fwhm: Option<f64>,
    /// Initial Gaussian FWHM for free-width fits.
    pub initial_gauss_fwhm: Option<f64>,
    pub linear_baseline: bool,
    pub max_iterations: usize,
    /// Relative cost change that counts as converged.
    pub tolerance: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            fixed_gauss_fwhm: None,
            initial_gauss_fwhm: None,
            linear_baseline: false,
            max_iterations: 500,
            tolerance: 1e-10,
        }
    }
}

impl FitOptions {
    pub fn fixed_gauss(fwhm: f64) -> Self {
        FitOptions { fixed_gauss_fwhm: Some(fwhm), ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    /// Peaks sorted by centre (energy axis).
    pub peaks: Vec<VoigtPeak>,
    pub baseline: f64,
    /// Slope of the optional linear baseline, per axis unit, about `baseline_pivot`.
    pub baseline_slope: Option<f64>,
    pub baseline_pivot: f64,
    pub residual_rms: f64,
    /// Parameter order: per peak `center, lorentz_fwhm, area[, gauss_fwhm]`, then baseline terms.
    pub parameter_names: Vec<String>,
    pub covariance: Option<Vec<Vec<f64>>>,
    pub std_errors: Option<Vec<f64>>,
    pub iterations: usize,
    pub converged: bool,
    pub axis_unit: AxisUnit,
    pub warnings: Vec<String>,
}

impl FitResult {
    pub fn model(&self, x: f64) -> f64 {
        let mut y = self.baseline + self.baseline_slope.map_or(0.0, |s| s * (x - self.baseline_pivot));
        for p in &self.peaks {
            y += voigt_with_gradient(x, p).0;
        }
        y
    }
}

/// Quality factor `E_center / lorentz_fwhm` of one fitted peak.
///
/// The Gaussian (instrument) part does not enter. A zero Lorentzian width
/// yields [`QFactor::ExceedsMeasurable`].
pub fn q_from_fit(fit: &FitResult, which: usize) -> Result<QFactor> {
    let p = fit
        .peaks
        .get(which)
        .ok_or_else(|| Error::param(format!("fit has {} peaks, no index {which}", fit.peaks.len())))?;
    if fit.axis_unit != AxisUnit::MicroEv {
        return Err(Error::param("Q needs an energy-axis fit"));
    }
    if p.lorentz_fwhm <= 0.0 {
        return Ok(QFactor::ExceedsMeasurable);
    }
    Ok(QFactor::Finite(p.center / p.lorentz_fwhm))
}

struct Layout {
    n_peaks: usize,
    free_gauss: bool,
    linear: bool,
}

impl Layout {
    fn per_peak(&self) -> usize {
        if self.free_gauss {
            4
        } else {
            3
        }
    }

    fn len(&self) -> usize {
        self.n_peaks * self.per_peak() + 1 + usize::from(self.linear)
    }
}

struct Fit {
    p: Vec<f64>,
    jac: DMatrix<f64>,
    cost: f64,
    iterations: usize,
    converged: bool,
}

struct Problem<'a> {
    x: &'a [f64],
    y: &'a [f64],
    layout: Layout,
    fixed_gauss: f64,
    pivot: f64,
    min_width: f64,
    lo: f64,
    hi: f64,
}

impl Problem<'_> {
    fn peaks(&self, p: &[f64]) -> Vec<VoigtPeak> {
        let k = self.layout.per_peak();
        (0..self.layout.n_peaks)
            .map(|i| VoigtPeak {
                center: p[i * k],
                lorentz_fwhm: p[i * k + 1],
                area: p[i * k + 2],
                gauss_fwhm: if self.layout.free_gauss { p[i * k + 3] } else { self.fixed_gauss },
            })
            .collect()
    }

    fn clamp(&self, p: &mut [f64]) {
        let k = self.layout.per_peak();
        for i in 0..self.layout.n_peaks {
            p[i * k] = p[i * k].clamp(self.lo, self.hi);
            p[i * k + 1] = p[i * k + 1].max(self.min_width);
            p[i * k + 2] = p[i * k + 2].max(0.0);
            if self.layout.free_gauss {
                p[i * k + 3] = p[i * k + 3].max(self.min_width);
            }
        }
    }

    fn minimize(&self, mut p: Vec<f64>, opts: &FitOptions) -> Fit {
        let np = p.len();
        let mut jac = DMatrix::zeros(self.x.len(), np);
        let mut r = self.eval(&p, Some(&mut jac));
        let mut cost = 0.5 * r.norm_squared();
        let mut lambda = 1e-3;
        let mut converged = false;
        let mut iterations = 0;
        while iterations < opts.max_iterations {
            iterations += 1;
            let jtj = jac.transpose() * &jac;
            let grad = jac.transpose() * &r;
            let mut accepted = false;
            while lambda < 1e16 {
                let mut a = jtj.clone();
                for d in 0..np {
                    a[(d, d)] += lambda * jtj[(d, d)].max(1e-300);
                }
                let Some(chol) = a.cholesky() else {
                    lambda *= 10.0;
                    continue;
                };
                let delta = chol.solve(&(-&grad));
                let mut trial: Vec<f64> = p.iter().zip(delta.iter()).map(|(a, b)| a + b).collect();
                self.clamp(&mut trial);
                let r_new = self.eval(&trial, None);
                let c_new = 0.5 * r_new.norm_squared();
                if c_new.is_finite() && c_new <= cost {
                    let rel = (cost - c_new) / cost.max(f64::MIN_POSITIVE);
                    p = trial;
                    r = self.eval(&p, Some(&mut jac));
                    cost = c_new;
                    lambda = (lambda / 10.0).max(1e-12);
                    accepted = true;
                    if rel < opts.tolerance {
                        converged = true;
                    }
                    break;
                }
                lambda *= 10.0;
            }
            // no downhill step at any damping counts as a minimum
            if !accepted || converged || cost == 0.0 {
                converged = true;
                break;
            }
        }
        Fit { p, jac, cost, iterations, converged }
    }

    /// Residuals (model - data) and optionally the Jacobian.
    fn eval(&self, p: &[f64], jac: Option<&mut DMatrix<f64>>) -> DVector<f64> {
        let peaks = self.peaks(p);
        let k = self.layout.per_peak();
        let nb = self.layout.n_peaks * k;
        let mut r = DVector::zeros(self.x.len());
        let mut jac = jac;
        for (row, (&x, &y)) in self.x.iter().zip(self.y).enumerate() {
            let mut m = p[nb];
            if self.layout.linear {
                m += p[nb + 1] * (x - self.pivot);
            }
            for (i, pk) in peaks.iter().enumerate() {
                let (v, g) = voigt_with_gradient(x, pk);
                m += v;
                if let Some(j) = jac.as_deref_mut() {
                    for c in 0..k {
                        j[(row, i * k + c)] = g[c];
                    }
                }
            }
            if let Some(j) = jac.as_deref_mut() {
                j[(row, nb)] = 1.0;
                if self.layout.linear {
                    j[(row, nb + 1)] = x - self.pivot;
                }
            }
            r[row] = m - y;
        }
        r
    }
}

/// Half-maximum width of the feature at index `i` above `base`.
fn width_at(x: &[f64], y: &[f64], i: usize, base: f64) -> f64 {
    let half = base + 0.5 * (y[i] - base);
    let mut l = i;
    while l > 0 && y[l] > half && !(y[l - 1] > y[l]) {
        l -= 1;
    }
    let mut r = i;
    while r + 1 < y.len() && y[r] > half && !(y[r + 1] > y[r]) {
        r += 1;
    }
    (x[r] - x[l]).abs().max((x[1] - x[0]).abs())
}

fn smooth(y: &[f64]) -> Vec<f64> {
    let mut s = y.to_vec();
    for _ in 0..2 {
        let prev = s.clone();
        for i in 1..s.len() - 1 {
            s[i] = 0.25 * prev[i - 1] + 0.5 * prev[i] + 0.25 * prev[i + 1];
        }
    }
    s
}

fn auto_init(x: &[f64], y: &[f64], n_peaks: usize, gauss: f64, base: f64, warnings: &mut Vec<String>) -> Vec<VoigtPeak> {
    let s = smooth(y);
    let mut maxima: Vec<usize> = (1..s.len() - 1).filter(|&i| s[i] > s[i - 1] && s[i] >= s[i + 1]).collect();
    // tallest first, ties toward lower energy (ascending axis)
    maxima.sort_by(|&a, &b| s[b].total_cmp(&s[a]).then(a.cmp(&b)));
    let mut seeds: Vec<VoigtPeak> = Vec::new();
    let make = |i: usize, resid: &[f64]| {
        let fwhm = width_at(x, resid, i, 0.0);
        let lor = (fwhm - 0.5 * gauss).max(0.3 * fwhm);
        let height = resid[i].max(0.0);
        VoigtPeak { center: x[i], lorentz_fwhm: lor, gauss_fwhm: gauss, area: height * fwhm * 1.2 }
    };
    let above: Vec<f64> = s.iter().map(|v| v - base).collect();
    for &i in maxima.iter().take(n_peaks) {
        seeds.push(make(i, &above));
    }
    if seeds.len() < n_peaks {
        warnings.push(format!(
            "requested {n_peaks} peaks but only {} local maxima found; extra peaks seeded at the largest residual",
            seeds.len()
        ));
        while seeds.len() < n_peaks {
            let resid: Vec<f64> = x
                .iter()
                .zip(&above)
                .map(|(&xv, &yv)| yv - seeds.iter().map(|p| voigt_with_gradient(xv, p).0).sum::<f64>())
                .collect();
            let i = (0..resid.len()).max_by(|&a, &b| resid[a].total_cmp(&resid[b]).then(b.cmp(&a))).unwrap();
            let mut p = make(i, &resid);
            p.area = p.area.max(1e-12);
            seeds.push(p);
        }
    }
    seeds
}

/// Fits `n_peaks` Voigt lines plus a constant (optionally linear) baseline.
///
/// Wavelength spectra are converted to an energy axis first, so centres and
/// widths are always returned in ueV. Without `init`, peaks are seeded at the
/// largest local maxima.
pub fn fit_spectrum(s: &Spectrum, n_peaks: usize, init: Option<&[VoigtPeak]>, opts: &FitOptions) -> Result<FitResult> {
    if n_peaks == 0 {
        return Err(Error::param("need at least one peak"));
    }
    let e = s.to_energy()?;
    let (x, y) = (&e.axis[..], &e.intensity[..]);
    let layout = Layout { n_peaks, free_gauss: opts.fixed_gauss_fwhm.is_none(), linear: opts.linear_baseline };
    let np = layout.len();
    if x.len() < 5 * np {
        return Err(Error::param(format!("{} samples are too few for {np} free parameters (need {})", x.len(), 5 * np)));
    }
    if let Some(g) = opts.fixed_gauss_fwhm {
        if !(g >= 0.0 && g.is_finite()) {
            return Err(Error::param("fixed Gaussian FWHM must be non-negative"));
        }
    }
    let ymax = y.iter().cloned().fold(f64::MIN, f64::max);
    let ymin = y.iter().cloned().fold(f64::MAX, f64::min);
    if !(ymax > ymin) {
        return Err(Error::Degenerate("spectrum is flat; there is nothing to fit".into()));
    }
    let span = x[x.len() - 1] - x[0];
    let step = span / (x.len() - 1) as f64;
    let gauss0 = opts.fixed_gauss_fwhm.or(opts.initial_gauss_fwhm).unwrap_or(2.0 * step);
    let mut warnings = Vec::new();
    let base0 = {
        let mut sorted = y.to_vec();
        sorted.sort_by(f64::total_cmp);
        sorted[sorted.len() / 10]
    };
    let seeds: Vec<VoigtPeak> = match init {
        Some(p) if p.len() == n_peaks => p.to_vec(),
        Some(p) => return Err(Error::param(format!("{} initial peaks given for {n_peaks} requested", p.len()))),
        None => auto_init(x, y, n_peaks, gauss0, base0, &mut warnings),
    };
    let k = layout.per_peak();
    let mut p = vec![0.0; np];
    for (i, pk) in seeds.iter().enumerate() {
        p[i * k] = pk.center;
        p[i * k + 1] = pk.lorentz_fwhm;
        p[i * k + 2] = pk.area;
        if layout.free_gauss {
            p[i * k + 3] = if pk.gauss_fwhm > 0.0 { pk.gauss_fwhm } else { gauss0 };
        }
    }
    p[n_peaks * k] = base0;
    let prob = Problem {
        x,
        y,
        layout,
        fixed_gauss: opts.fixed_gauss_fwhm.unwrap_or(0.0),
        pivot: 0.5 * (x[0] + x[x.len() - 1]),
        min_width: 1e-9 * span.max(step),
        lo: x[0],
        hi: x[x.len() - 1],
    };
    prob.clamp(&mut p);
    let m = x.len();
    let mut run = prob.minimize(p, opts);
    // a Gaussian width stuck at its floor has zero gradient; reseed and retry
    if prob.layout.free_gauss {
        for _ in 0..3 {
            let floor = 1e3 * prob.min_width;
            let stuck: Vec<usize> = (0..n_peaks).filter(|&i| run.p[i * k + 3] < floor).collect();
            if stuck.is_empty() {
                break;
            }
            // split each stuck line's width between the two profiles in a few ratios
            let mut best: Option<Fit> = None;
            for frac in [0.25, 0.5, 0.75] {
                let mut q = run.p.clone();
                for &i in &stuck {
                    let w = q[i * k + 1];
                    q[i * k + 1] = w * (1.0 - 0.5 * frac);
                    q[i * k + 3] = w * frac;
                }
                let retry = prob.minimize(q, opts);
                if best.as_ref().is_none_or(|b| retry.cost < b.cost) {
                    best = Some(retry);
                }
            }
            let best = best.expect("at least one retry");
            if best.cost < run.cost * (1.0 - 1e-9) {
                run = Fit { iterations: run.iterations + best.iterations, ..best };
            } else {
                break;
            }
        }
    }
    let Fit { p, jac, cost, iterations, converged, .. } = run;
    if !converged {
        warnings.push(format!("no convergence within {} iterations", opts.max_iterations));
    }

    let dof = m.saturating_sub(np).max(1) as f64;
    let s2 = 2.0 * cost / dof;
    let jtj = jac.transpose() * &jac;
    let (covariance, std_errors) = match jtj.try_inverse() {
        Some(inv) => {
            let cov = inv * s2;
            let rows: Vec<Vec<f64>> = (0..np).map(|i| (0..np).map(|j| cov[(i, j)]).collect()).collect();
            let errs = (0..np).map(|i| cov[(i, i)].max(0.0).sqrt()).collect();
            (Some(rows), Some(errs))
        }
        None => {
            warnings.push("Jacobian is rank deficient; covariance unavailable".into());
            (None, None)
        }
    };
    let mut peaks = prob.peaks(&p);
    for (i, pk) in peaks.iter().enumerate() {
        if pk.area <= 0.0 {
            warnings.push(format!("peak {i} converged to zero area"));
        }
    }
    let mut names = Vec::new();
    for i in 0..n_peaks {
        names.extend([format!("center_{i}"), format!("lorentz_fwhm_{i}"), format!("area_{i}")]);
        if prob.layout.free_gauss {
            names.push(format!("gauss_fwhm_{i}"));
        }
    }
    names.push("baseline".into());
    if prob.layout.linear {
        names.push("baseline_slope".into());
    }
    // report peaks in ascending centre order; permute covariance accordingly
    let mut order: Vec<usize> = (0..n_peaks).collect();
    order.sort_by(|&a, &b| peaks[a].center.total_cmp(&peaks[b].center));
    let perm: Vec<usize> = order
        .iter()
        .flat_map(|&i| (0..k).map(move |c| i * k + c))
        .chain(n_peaks * k..np)
        .collect();
    peaks = order.iter().map(|&i| peaks[i]).collect();
    let names = perm.iter().map(|&i| names[i].clone()).collect::<Vec<_>>();
    let names = rename_sorted(names, k, n_peaks);
    let covariance = covariance.map(|c| perm.iter().map(|&i| perm.iter().map(|&j| c[i][j]).collect()).collect());
    let std_errors = std_errors.map(|e: Vec<f64>| perm.iter().map(|&i| e[i]).collect());
    let nb = n_peaks * k;
    Ok(FitResult {
        peaks,
        baseline: p[nb],
        baseline_slope: prob.layout.linear.then(|| p[nb + 1]),
        baseline_pivot: prob.pivot,
        residual_rms: (2.0 * cost / m as f64).sqrt(),
        parameter_names: names,
        covariance,
        std_errors,
        iterations,
        converged,
        axis_unit: AxisUnit::MicroEv,
        warnings,
    })
}

fn rename_sorted(mut names: Vec<String>, k: usize, n_peaks: usize) -> Vec<String> {
    for i in 0..n_peaks {
        for c in 0..k {
            let base = names[i * k + c].rsplit_once('_').map(|(b, _)| b.to_string()).unwrap_or_default();
            names[i * k + c] = format!("{base}_{i}");
        }
    }
    names
}
