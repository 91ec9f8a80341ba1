//! Quantum dot coupled to a single cavity mode.
//!
//! Energies and rates are in ueV. `kappa` and `gamma` are full widths (energy
//! decay rates), so the bare complex energies are `E - i kappa / 2` and
//! `E_QD - i gamma / 2`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfit::{voigt_with_gradient, AxisUnit, Spectrum, VoigtPeak};

/// Spectrometer resolution (Gaussian FWHM) used by default in synthetic spectra.
pub const DEFAULT_RESOLUTION_UEV: f64 = 21.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JCParams {
    pub g: f64,
    pub kappa: f64,
    #[serde(default)]
    pub gamma: f64,
    /// Bare cavity energy; zero means detuning coordinates.
    #[serde(default)]
    pub e_cavity: f64,
    /// `E_QD - E_cavity`.
    #[serde(default)]
    pub detuning: f64,
}

impl JCParams {
    pub fn new(g: f64, kappa: f64) -> Self {
        JCParams { g, kappa, gamma: 0.0, e_cavity: 0.0, detuning: 0.0 }
    }

    pub fn with_detuning(self, detuning: f64) -> Self {
        JCParams { detuning, ..self }
    }

    pub fn e_qd(&self) -> f64 {
        self.e_cavity + self.detuning
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.g, self.kappa, self.gamma, self.e_cavity, self.detuning];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("coupling parameters must be finite"));
        }
        if self.g < 0.0 || self.kappa < 0.0 || self.gamma < 0.0 {
            return Err(Error::param(format!(
                "need g >= 0, kappa >= 0, gamma >= 0 (got g={}, kappa={}, gamma={})",
                self.g, self.kappa, self.gamma
            )));
        }
        Ok(())
    }
}

/// Complex polariton energies; `-2 Im` is the linewidth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolaritonPair {
    pub lower: Complex64,
    pub upper: Complex64,
}

impl PolaritonPair {
    pub fn splitting(&self) -> f64 {
        self.upper.re - self.lower.re
    }
}

/// Eigenvalues of `[[E_QD - i gamma/2, g], [g, E_c - i kappa/2]]`, ordered by real part.
pub fn polariton_eigenvalues(p: &JCParams) -> Result<PolaritonPair> {
    p.validate()?;
    let mean = Complex64::new(p.e_cavity + 0.5 * p.detuning, -(p.gamma + p.kappa) / 4.0);
    let inner = Complex64::new(0.5 * p.detuning, -(p.gamma - p.kappa) / 4.0);
    let root = (p.g * p.g + inner * inner).sqrt();
    let (a, b) = (mean + root, mean - root);
    let (lower, upper) = if a.re <= b.re { (a, b) } else { (b, a) };
    Ok(PolaritonPair { lower, upper })
}

/// `g = sqrt((VRS/2)^2 + (kappa/4)^2)` with the emitter linewidth neglected.
pub fn g_from_vrs(vrs: f64, kappa: f64) -> Result<f64> {
    if !(vrs >= 0.0 && kappa >= 0.0 && vrs.is_finite() && kappa.is_finite()) {
        return Err(Error::param("VRS and kappa must be non-negative"));
    }
    Ok((0.25 * vrs * vrs + kappa * kappa / 16.0).sqrt())
}

/// Inverse of [`g_from_vrs`]: `2 sqrt(g^2 - (kappa/4)^2)`.
pub fn vrs_from_g(g: f64, kappa: f64) -> Result<f64> {
    if !(g >= 0.0 && kappa >= 0.0 && g.is_finite() && kappa.is_finite()) {
        return Err(Error::param("g and kappa must be non-negative"));
    }
    let q = 0.25 * kappa;
    if g <= q {
        return Err(Error::NoSplitting { g, quarter_kappa: q });
    }
    Ok(2.0 * (g * g - q * q).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingRegime {
    pub strong: bool,
    pub g_over_kappa: f64,
}

/// Strict `g > kappa / 4`.
pub fn strong_coupling(g: f64, kappa: f64) -> Result<CouplingRegime> {
    if !(g >= 0.0 && kappa > 0.0) {
        return Err(Error::param("need g >= 0 and kappa > 0"));
    }
    Ok(CouplingRegime { strong: g > 0.25 * kappa, g_over_kappa: g / kappa })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmissionOptions {
    pub include_bare_cavity: bool,
    /// Gaussian FWHM of the instrument response; 0 gives Lorentzian lines.
    pub resolution_fwhm: f64,
    /// Areas of `[lower, upper, bare cavity]`.
    pub weights: [f64; 3],
}

impl Default for EmissionOptions {
    fn default() -> Self {
        EmissionOptions { include_bare_cavity: true, resolution_fwhm: DEFAULT_RESOLUTION_UEV, weights: [1.0; 3] }
    }
}

/// Line components of the synthetic spectrum.
pub fn emission_lines(p: &JCParams, opts: &EmissionOptions) -> Result<Vec<VoigtPeak>> {
    if !(opts.resolution_fwhm >= 0.0 && opts.resolution_fwhm.is_finite()) {
        return Err(Error::param("resolution must be non-negative"));
    }
    if opts.weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
        return Err(Error::param("peak weights must be non-negative"));
    }
    let pair = polariton_eigenvalues(p)?;
    let mut lines = vec![
        VoigtPeak { center: pair.lower.re, lorentz_fwhm: -2.0 * pair.lower.im, gauss_fwhm: opts.resolution_fwhm, area: opts.weights[0] },
        VoigtPeak { center: pair.upper.re, lorentz_fwhm: -2.0 * pair.upper.im, gauss_fwhm: opts.resolution_fwhm, area: opts.weights[1] },
    ];
    if opts.include_bare_cavity {
        lines.push(VoigtPeak { center: p.e_cavity, lorentz_fwhm: p.kappa, gauss_fwhm: opts.resolution_fwhm, area: opts.weights[2] });
    }
    for l in &lines {
        l.validate()?;
    }
    Ok(lines)
}

/// Two polariton lines (plus optionally the bare cavity) on `energy_axis`.
pub fn emission_spectrum(p: &JCParams, opts: &EmissionOptions, energy_axis: &[f64]) -> Result<Spectrum> {
    let lines = emission_lines(p, opts)?;
    let intensity = energy_axis.iter().map(|&x| lines.iter().map(|l| voigt_with_gradient(x, l).0).sum()).collect();
    Spectrum::new(energy_axis.to_vec(), intensity, AxisUnit::MicroEv)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub detuning: f64,
    pub lower: Complex64,
    pub upper: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    pub min_gap: f64,
    pub min_gap_detuning: f64,
    /// Spectra per detuning (rows) on `map_axis`, when requested.
    pub map: Option<Vec<Vec<f64>>>,
    pub map_axis: Option<Vec<f64>>,
}

/// Polariton branches over an inclusive detuning grid of `steps` points.
pub fn detuning_sweep(
    p: &JCParams,
    range: (f64, f64),
    steps: usize,
    spectra: Option<(&EmissionOptions, &[f64])>,
) -> Result<SweepResult> {
    if steps < 2 {
        return Err(Error::param("a sweep needs at least 2 steps"));
    }
    if !(range.0.is_finite() && range.1.is_finite() && range.1 > range.0) {
        return Err(Error::param("detuning range must be increasing"));
    }
    let mut points = Vec::with_capacity(steps);
    let mut map = spectra.map(|_| Vec::with_capacity(steps));
    let (mut min_gap, mut min_at) = (f64::INFINITY, range.0);
    for k in 0..steps {
        let d = range.0 + (range.1 - range.0) * k as f64 / (steps - 1) as f64;
        let q = p.with_detuning(d);
        let pair = polariton_eigenvalues(&q)?;
        let gap = pair.splitting();
        if gap < min_gap - 1e-12 * gap.abs().max(1.0) || (gap <= min_gap && d.abs() < min_at.abs()) {
            min_gap = gap;
            min_at = d;
        }
        points.push(SweepPoint { detuning: d, lower: pair.lower, upper: pair.upper });
        if let (Some(m), Some((opts, axis))) = (map.as_mut(), spectra) {
            m.push(emission_spectrum(&q, opts, axis)?.intensity);
        }
    }
    Ok(SweepResult {
        points,
        min_gap,
        min_gap_detuning: min_at,
        map,
        map_axis: spectra.map(|(_, a)| a.to_vec()),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CavityRecord {
    pub name: String,
    pub v_norm: f64,
    #[serde(default)]
    pub q_design: Option<f64>,
    #[serde(default = "unit_fraction")]
    pub field_fraction: f64,
}

fn unit_fraction() -> f64 {
    1.0
}

impl CavityRecord {
    pub fn new(name: &str, v_norm: f64, q_design: Option<f64>) -> Self {
        CavityRecord { name: name.into(), v_norm, q_design, field_fraction: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmaxRow {
    pub name: String,
    pub v_norm: f64,
    pub q_design: Option<f64>,
    pub field_fraction: f64,
    pub g_max: f64,
}

/// `g_max = field_fraction * sqrt(V_ref / V)`, relative to the named reference.
pub fn gmax_table(records: &[CavityRecord], reference: &str) -> Result<Vec<GmaxRow>> {
    for r in records {
        if !(r.v_norm > 0.0 && r.v_norm.is_finite()) {
            return Err(Error::param(format!("{}: mode volume must be positive", r.name)));
        }
        if !(r.field_fraction > 0.0 && r.field_fraction <= 1.0) {
            return Err(Error::param(format!("{}: field fraction must lie in (0, 1]", r.name)));
        }
    }
    let rf = records
        .iter()
        .find(|r| r.name == reference)
        .ok_or_else(|| Error::param(format!("reference cavity '{reference}' not in the table")))?;
    let g_ref = rf.field_fraction / rf.v_norm.sqrt();
    Ok(records
        .iter()
        .map(|r| GmaxRow {
            name: r.name.clone(),
            v_norm: r.v_norm,
            q_design: r.q_design,
            field_fraction: r.field_fraction,
            g_max: r.field_fraction / r.v_norm.sqrt() / g_ref,
        })
        .collect())
}

/// Theoretical comparison of slab cavities (V in `(lambda/n)^3`, designed Q).
///
/// The two extra H0 rows place the emitter where the field intensity is 90 %
/// of its maximum, once reading 0.9 as the field ratio and once as the
/// intensity ratio (field ratio `sqrt(0.9)`).
pub fn reference_cavities() -> Vec<CavityRecord> {
    vec![
        CavityRecord::new("L4/3", 0.32, Some(8e6)),
        CavityRecord::new("H0", 0.25, Some(1e6)),
        CavityRecord { field_fraction: 0.9, ..CavityRecord::new("H0 (90% field)", 0.25, Some(1e6)) },
        CavityRecord { field_fraction: 0.9f64.sqrt(), ..CavityRecord::new("H0 (90% intensity)", 0.25, Some(1e6)) },
        CavityRecord::new("L3", 0.95, Some(4.2e6)),
        CavityRecord::new("Heterostructure", 1.5, Some(1.58e9)),
    ]
}

/// Scales a known coupling to another cavity:
/// `g_ref * (f_target / f_ref) * sqrt(V_ref / V_target) * polarization_factor`.
pub fn project_g(
    g_ref: f64,
    v_ref: f64,
    field_fraction_ref: f64,
    v_target: f64,
    field_fraction_target: f64,
    polarization_factor: f64,
) -> Result<f64> {
    let positive = [g_ref, v_ref, v_target, polarization_factor].iter().all(|v| *v > 0.0 && v.is_finite());
    let fractions = [field_fraction_ref, field_fraction_target].iter().all(|f| *f > 0.0 && *f <= 1.0);
    if !positive || !fractions {
        return Err(Error::param("project_g needs positive inputs and field fractions in (0, 1]"));
    }
    Ok(g_ref * (field_fraction_target / field_fraction_ref) * (v_ref / v_target).sqrt() * polarization_factor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Matrix2;
    use proptest::prelude::*;

    fn matrix_eigs(p: &JCParams) -> (Complex64, Complex64) {
        let m = Matrix2::new(
            Complex64::new(p.e_qd(), -p.gamma / 2.0),
            Complex64::new(p.g, 0.0),
            Complex64::new(p.g, 0.0),
            Complex64::new(p.e_cavity, -p.kappa / 2.0),
        );
        let ev = m.schur().eigenvalues().unwrap();
        if ev[0].re <= ev[1].re {
            (ev[0], ev[1])
        } else {
            (ev[1], ev[0])
        }
    }

    #[test]
    fn decoupled_limit() {
        let p = JCParams { g: 0.0, kappa: 40.0, gamma: 2.0, e_cavity: 1000.0, detuning: 30.0 };
        let e = polariton_eigenvalues(&p).unwrap();
        assert!((e.lower - Complex64::new(1000.0, -20.0)).norm() < 1e-12);
        assert!((e.upper - Complex64::new(1030.0, -1.0)).norm() < 1e-12);
    }

    #[test]
    fn resonant_splitting_and_widths() {
        let e = polariton_eigenvalues(&JCParams::new(40.26, 40.0)).unwrap();
        assert!((e.splitting() - 2.0 * (40.26f64.powi(2) - 100.0).sqrt()).abs() < 1e-12);
        assert!((e.splitting() - 78.0).abs() < 0.05);
        assert!((-2.0 * e.lower.im - 20.0).abs() < 1e-12);
        assert!((-2.0 * e.upper.im - 20.0).abs() < 1e-12);
    }

    #[test]
    fn dispersive_limit() {
        let p = JCParams::new(40.0, 40.0).with_detuning(500.0);
        let e = polariton_eigenvalues(&p).unwrap();
        let (_, up) = matrix_eigs(&p);
        assert!((e.upper - up).norm() < 1e-9);
        assert!((e.upper.re - 500.0).abs() < 40.0 * 40.0 / 500.0);
    }

    #[test]
    fn vrs_relations() {
        assert!((g_from_vrs(78.0, 40.0).unwrap() - 40.3).abs() < 0.05);
        assert_eq!(g_from_vrs(30.0, 0.0).unwrap(), 15.0);
        let g = g_from_vrs(78.0, 40.0).unwrap();
        assert!((vrs_from_g(g, 40.0).unwrap() / 78.0 - 1.0).abs() < 1e-12);
        assert!((vrs_from_g(40.26, 40.0).unwrap() - 78.0).abs() < 0.05);
        assert!(matches!(vrs_from_g(10.0, 40.0), Err(Error::NoSplitting { .. })));
        assert_eq!(vrs_from_g(12.5, 0.0).unwrap(), 25.0);
    }

    #[test]
    fn coupling_regimes() {
        let r = strong_coupling(40.0, 40.0).unwrap();
        assert!(r.strong);
        assert_eq!(r.g_over_kappa, 1.0);
        let r = strong_coupling(160.0, 25.0).unwrap();
        assert!(r.strong && (r.g_over_kappa - 6.4).abs() < 1e-12);
        assert!(!strong_coupling(10.0, 40.0).unwrap().strong);
    }

    #[test]
    fn decoupled_spectrum_is_bare_lorentzians() {
        let p = JCParams { g: 0.0, kappa: 40.0, gamma: 4.0, e_cavity: 0.0, detuning: 100.0 };
        let opts = EmissionOptions { include_bare_cavity: false, resolution_fwhm: 0.0, weights: [1.0; 3] };
        let axis: Vec<f64> = (0..2001).map(|i| -500.0 + 0.5 * i as f64).collect();
        let s = emission_spectrum(&p, &opts, &axis).unwrap();
        for (x, y) in axis.iter().zip(&s.intensity) {
            let lc = 20.0 / (std::f64::consts::PI * (x * x + 400.0));
            let lq = 2.0 / (std::f64::consts::PI * ((x - 100.0).powi(2) + 4.0));
            assert!((y - lc - lq).abs() < 1e-14);
        }
    }

    #[test]
    fn resonant_spectrum_outer_peaks() {
        let p = JCParams::new(40.26, 40.0);
        let axis: Vec<f64> = (0..8001).map(|i| -200.0 + 0.05 * i as f64).collect();
        let maxima = |opts: &EmissionOptions| -> Vec<f64> {
            let s = emission_spectrum(&p, opts, &axis).unwrap();
            (1..axis.len() - 1)
                .filter(|&i| s.intensity[i] > s.intensity[i - 1] && s.intensity[i] >= s.intensity[i + 1])
                .map(|i| axis[i])
                .collect()
        };
        let two = maxima(&EmissionOptions { include_bare_cavity: false, ..Default::default() });
        assert_eq!(two.len(), 2);
        assert!(((two[1] - two[0]) - 78.0).abs() < 2.0, "{two:?}");
        let three = maxima(&EmissionOptions::default());
        assert_eq!(three.len(), 3);
        assert!(three[1].abs() < 0.05 && three[2] - three[0] < 78.0, "{three:?}");
    }

    #[test]
    fn spectrum_area_is_sum_of_weights() {
        let p = JCParams::new(40.26, 40.0);
        let axis: Vec<f64> = (0..400_001).map(|i| -40_000.0 + 0.2 * i as f64).collect();
        for res in [0.0, 21.0, 60.0] {
            let opts = EmissionOptions { include_bare_cavity: true, resolution_fwhm: res, weights: [1.0, 0.5, 2.0] };
            let s = emission_spectrum(&p, &opts, &axis).unwrap();
            let area: f64 = s.intensity.windows(2).map(|w| 0.1 * (w[0] + w[1])).sum();
            assert!((area / 3.5 - 1.0).abs() < 1e-3, "{res}: {area}");
        }
    }

    #[test]
    fn sweep_minimum_at_resonance() {
        let r = detuning_sweep(&JCParams::new(40.26, 40.0), (-300.0, 300.0), 601, None).unwrap();
        assert!((r.min_gap - 78.0).abs() < 0.05);
        assert_eq!(r.min_gap_detuning, 0.0);
        let edge = &r.points[0];
        assert!((edge.upper.re - 0.0).abs() < 6.0);
        assert!((edge.lower.re + 300.0).abs() < 6.0);
        let crossing = detuning_sweep(&JCParams::new(0.0, 40.0), (-300.0, 300.0), 601, None).unwrap();
        assert!(crossing.min_gap.abs() < 1e-12);
        assert_eq!(crossing.min_gap_detuning, 0.0);
    }

    #[test]
    fn sweep_with_map() {
        let axis: Vec<f64> = (0..201).map(|i| -400.0 + 4.0 * i as f64).collect();
        let opts = EmissionOptions::default();
        let r = detuning_sweep(&JCParams::new(40.0, 40.0), (-100.0, 100.0), 5, Some((&opts, &axis))).unwrap();
        let map = r.map.unwrap();
        assert_eq!(map.len(), 5);
        assert_eq!(map[0].len(), 201);
        assert!(detuning_sweep(&JCParams::new(40.0, 40.0), (-1.0, 1.0), 1, None).is_err());
    }

    #[test]
    fn table_values() {
        let rows = gmax_table(&reference_cavities(), "Heterostructure").unwrap();
        let g = |n: &str| rows.iter().find(|r| r.name == n).unwrap().g_max;
        assert!((g("L4/3") - (1.5f64 / 0.32).sqrt()).abs() < 1e-12);
        assert!((g("L4/3") - 2.165).abs() < 0.001);
        assert!((g("H0") - 2.449).abs() < 0.001);
        assert!((g("L3") - 1.257).abs() < 0.001);
        assert_eq!(g("Heterostructure"), 1.0);
        assert!((g("H0 (90% field)") - 2.205).abs() < 0.001);
        assert!((g("H0 (90% intensity)") - 2.324).abs() < 0.001);
        assert!(gmax_table(&reference_cavities(), "H1").is_err());
    }

    #[test]
    fn projected_couplings() {
        let g = project_g(110.0, 0.75, 0.93, 0.32, 1.0, 1.0).unwrap();
        assert!((g - 181.0).abs() < 0.5, "{g}");
        let g2 = project_g(110.0, 0.75, 0.93, 0.32, 1.0, 2f64.sqrt()).unwrap();
        assert!((g2 - 256.0).abs() < 0.5, "{g2}");
        assert_eq!(project_g(7.0, 1.0, 1.0, 1.0, 1.0, 1.0).unwrap(), 7.0);
    }

    proptest! {
        #[test]
        fn matches_matrix_eigenvalues(g in 0.0f64..200.0, kappa in 0.0f64..100.0, gamma in 0.0f64..20.0, d in -500.0f64..500.0) {
            let p = JCParams { g, kappa, gamma, e_cavity: 1.3e6, detuning: d };
            let e = polariton_eigenvalues(&p).unwrap();
            let (lo, up) = matrix_eigs(&p);
            prop_assert!((e.lower - lo).norm() < 1e-6 && (e.upper - up).norm() < 1e-6);
            prop_assert!(e.upper.re >= e.lower.re && e.lower.im <= 0.0 && e.upper.im <= 0.0);
        }

        #[test]
        fn trace_is_conserved(g in 0.0f64..200.0, kappa in 0.0f64..100.0, gamma in 0.0f64..20.0, d in -500.0f64..500.0) {
            let p = JCParams { g, kappa, gamma, e_cavity: 0.0, detuning: d };
            let e = polariton_eigenvalues(&p).unwrap();
            let trace = Complex64::new(d, -gamma / 2.0) + Complex64::new(0.0, -kappa / 2.0);
            prop_assert!((e.lower + e.upper - trace).norm() < 1e-9 * (1.0 + trace.norm()));
        }

        #[test]
        fn vrs_inverse(kappa in 0.1f64..100.0, extra in 0.01f64..200.0) {
            let g = kappa / 4.0 + extra;
            let v = vrs_from_g(g, kappa).unwrap();
            prop_assert!((g_from_vrs(v, kappa).unwrap() / g - 1.0).abs() < 1e-12);
        }

        #[test]
        fn anticrossing_gap(kappa in 1.0f64..100.0, frac in 0.0f64..0.9, extra in 0.5f64..100.0) {
            let gamma = frac * kappa;
            let g = (kappa - gamma) / 4.0 + extra;
            let p = JCParams { g, kappa, gamma, e_cavity: 0.0, detuning: 0.0 };
            let r = detuning_sweep(&p, (-400.0, 400.0), 801, None).unwrap();
            prop_assert!(r.min_gap_detuning.abs() < 1e-9);
            let want = 2.0 * (g * g - ((kappa - gamma) / 4.0).powi(2)).sqrt();
            prop_assert!((r.min_gap - want).abs() < 1e-9 * want.max(1.0));
        }

        #[test]
        fn table_scale_invariant(s in 0.01f64..100.0) {
            let base = gmax_table(&reference_cavities(), "Heterostructure").unwrap();
            let scaled: Vec<CavityRecord> = reference_cavities().into_iter().map(|r| CavityRecord { v_norm: r.v_norm * s, ..r }).collect();
            let rows = gmax_table(&scaled, "Heterostructure").unwrap();
            for (a, b) in base.iter().zip(&rows) {
                prop_assert!((a.g_max - b.g_max).abs() < 1e-12);
            }
        }
    }
}
