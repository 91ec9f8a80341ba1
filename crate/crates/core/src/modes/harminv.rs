//! Harmonic inversion by the matrix-pencil method.
//!
//! The real probe signal is demodulated to the centre of the requested band,
//! low-pass filtered with a Kaiser-windowed sinc, decimated, and fitted with
//! a sum of damped complex exponentials `A exp(-i omega t)`. Each pole gives
//! `Q = Re(omega) / (2 |Im(omega)|)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{QFactor, ResonantMode};
use crate::error::{Error, Result};
use crate::fdtd::TimeSeries;

/// Poles below this Q are dropped.
pub const Q_MIN: f64 = 1.0;
/// Poles above this Q are reported as [`QFactor::ExceedsMeasurable`].
pub const Q_MAX: f64 = 1e9;

const MIN_SAMPLES: usize = 200;
const MAX_DECIMATED: usize = 600;
const MIN_DECIMATED: usize = 24;
const TARGET_DECIMATED: usize = 300;
const KAISER_BETA: f64 = 10.0;
const KAISER_ATTEN_DB: f64 = 99.4;
const SV_CUTOFF: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pole {
    /// Complex angular frequency; decaying poles have `Im < 0`.
    pub omega: Complex64,
    pub amplitude: Complex64,
}

/// Sum of damped exponentials `sum A_k exp(-i omega_k (t - t0))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoleModel {
    pub t0: f64,
    pub poles: Vec<Pole>,
}

impl PoleModel {
    pub fn evaluate(&self, t: f64) -> Complex64 {
        self.poles
            .iter()
            .map(|p| p.amplitude * (-Complex64::i() * p.omega * (t - self.t0)).exp())
            .sum()
    }
}

#[derive(Debug, Clone)]
pub struct HarminvOutput {
    /// In-band modes sorted by decreasing `|amplitude|`.
    pub modes: Vec<ResonantMode>,
    /// All in-band poles that passed the Q filter.
    pub model: PoleModel,
    pub notices: Vec<String>,
}

fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let q = x * x / 4.0;
    for k in 1..200 {
        term *= q / (k as f64 * k as f64);
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}

/// Kaiser-windowed sinc low-pass with cutoff `fc` (cycles per sample).
fn lowpass(fc: f64, transition: f64) -> Vec<f64> {
    let dw = 2.0 * std::f64::consts::PI * transition;
    let n = (((KAISER_ATTEN_DB - 8.0) / (2.285 * dw)).ceil() as usize + 1) | 1;
    let mid = (n - 1) as f64 / 2.0;
    let norm = bessel_i0(KAISER_BETA);
    let mut h: Vec<f64> = (0..n)
        .map(|m| {
            let x = m as f64 - mid;
            let sinc = if x == 0.0 {
                2.0 * fc
            } else {
                (2.0 * std::f64::consts::PI * fc * x).sin() / (std::f64::consts::PI * x)
            };
            let r = x / mid.max(1.0);
            sinc * bessel_i0(KAISER_BETA * (1.0 - r * r).max(0.0).sqrt()) / norm
        })
        .collect();
    let dc: f64 = h.iter().sum();
    h.iter_mut().for_each(|v| *v /= dc);
    h
}

/// Filter response `sum h[m] z^-m`.
fn response(h: &[f64], z: Complex64) -> Complex64 {
    let zi = z.inv();
    let mut acc = Complex64::new(0.0, 0.0);
    for &c in h.iter().rev() {
        acc = acc * zi + c;
    }
    acc
}

/// Matrix-pencil poles and amplitudes of `u[q] = sum B w^q`.
fn matrix_pencil(u: &[Complex64], notices: &mut Vec<String>) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let n = u.len();
    let l = n / 3;
    let rows = n - l;
    let y = DMatrix::from_fn(rows, l + 1, |r, c| u[r + c]);
    let svd = y.svd(false, true);
    let sv = &svd.singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return Err(Error::Degenerate("signal is identically zero in the band".into()));
    }
    // a rank near the pencil width leaves the shift-invariance equations underdetermined
    let m = sv.iter().filter(|&&s| s > SV_CUTOFF * smax).count().min((l / 2).max(1));
    let vt = svd.v_t.as_ref().expect("right singular vectors requested");
    // rows of V^H spanning the signal subspace, as columns
    let w = vt.rows(0, m).transpose();
    let w1 = w.rows(0, l).into_owned();
    let w2 = w.rows(1, l).into_owned();
    let f = w1
        .svd(true, true)
        .solve(&w2, 1e-14)
        .map_err(|e| Error::Degenerate(format!("pencil solve failed: {e}")))?;
    let z: Vec<Complex64> = f.schur().eigenvalues().map(|v| v.iter().cloned().collect()).unwrap_or_default();
    if z.len() != m {
        notices.push("pencil eigenvalue extraction incomplete".into());
    }
    // amplitudes by linear least squares on the full record
    let vand = DMatrix::from_fn(n, z.len(), |q, k| z[k].powu(q as u32));
    let rhs = DVector::from_column_slice(u);
    let b = vand
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::Degenerate(format!("amplitude solve failed: {e}")))?;
    Ok((z, b.iter().cloned().collect()))
}

/// Extracts resonances of `ts` with real frequency inside `band` (c/a).
///
/// At most `max_poles` modes are returned. Fewer in-band poles than requested
/// and discarded poles are reported in `notices`.
pub fn harmonic_inversion(ts: &TimeSeries, band: (f64, f64), max_poles: usize) -> Result<HarminvOutput> {
    let (lo, hi) = band;
    let dt = ts.dt;
    let n = ts.values.len();
    if n < MIN_SAMPLES {
        return Err(Error::param(format!("harmonic inversion needs at least {MIN_SAMPLES} samples, got {n}")));
    }
    if !(dt > 0.0) {
        return Err(Error::param("time step must be positive"));
    }
    let nyquist = 0.5 / dt;
    if !(lo >= 0.0 && hi > lo && hi < nyquist) {
        return Err(Error::param(format!("band [{lo}, {hi}] must satisfy 0 <= lo < hi < Nyquist = {nyquist}")));
    }
    if max_poles == 0 {
        return Err(Error::param("max_poles must be at least 1"));
    }
    if ts.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::param("time series contains non-finite samples"));
    }

    let width = hi - lo;
    let fc = 0.5 * (lo + hi);
    // decimated sample rate: at least ~8 band widths, raised so short records still give
    // TARGET_DECIMATED samples and lowered so long ones fit in MAX_DECIMATED
    let d_pref = ((1.0 / (dt * 8.0 * width)).floor() as usize).max(1);
    let d_max = ((1.0 / (dt * 3.0 * width)).floor() as usize).max(1);
    let mut d = d_pref;
    let mut taps;
    for _ in 0..8 {
        let fs = 1.0 / d as f64; // cycles per input sample
        let wn = width * dt;
        taps = if d == 1 { vec![1.0] } else { lowpass(0.5 * fs, fs - wn) };
        let usable = n.saturating_sub(taps.len() - 1);
        let count = usable.div_ceil(d);
        let next = if count > MAX_DECIMATED && d < d_max {
            usable.div_ceil(MAX_DECIMATED).min(d_max)
        } else if count < TARGET_DECIMATED && d > 1 {
            (usable / TARGET_DECIMATED).clamp(1, d)
        } else {
            d
        };
        if next == d {
            break;
        }
        d = next;
    }
    let fs = 1.0 / d as f64;
    taps = if d == 1 { vec![1.0] } else { lowpass(0.5 * fs, fs - width * dt) };
    let first = taps.len() - 1;
    if n <= first {
        return Err(Error::param(format!(
            "signal of {n} samples is shorter than the {}-tap anti-alias filter for this band",
            taps.len()
        )));
    }
    let t_first = ts.first_step as f64 * dt;
    let wc = 2.0 * std::f64::consts::PI * fc;
    let demod: Vec<Complex64> = ts
        .values
        .iter()
        .enumerate()
        .map(|(k, &v)| v * Complex64::from_polar(1.0, wc * (k as f64) * dt))
        .collect();
    let mut u = Vec::new();
    let mut pos = first;
    while pos < n && u.len() < MAX_DECIMATED {
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, &c) in taps.iter().enumerate() {
            acc += demod[pos - m] * c;
        }
        u.push(acc);
        pos += d;
    }
    if u.len() < MIN_DECIMATED {
        return Err(Error::param(format!(
            "only {} decimated samples available; record too short for a band of width {width}",
            u.len()
        )));
    }

    let mut notices = Vec::new();
    let (w, b) = matrix_pencil(&u, &mut notices)?;
    let step = d as f64 * dt;
    let mut poles = Vec::new();
    let mut discarded_low = 0usize;
    for (wk, bk) in w.iter().zip(&b) {
        if wk.norm() == 0.0 {
            continue;
        }
        // w = exp(-i omega' step) with omega' = omega - wc
        let omega_shift = Complex64::i() * wk.ln() / step;
        let omega = omega_shift + wc;
        let f = omega.re / (2.0 * std::f64::consts::PI);
        if f < lo || f > hi {
            continue;
        }
        // undo filter gain and delay, refer the residue to the first sample
        let z = (-Complex64::i() * omega_shift * dt).exp();
        let at_output = bk / response(&taps, z);
        let amp = at_output / z.powu(first as u32);
        let q = omega.re / (2.0 * omega.im.abs());
        if q < Q_MIN {
            discarded_low += 1;
            continue;
        }
        // rank by the amplitude actually seen in the filtered record: back
        // extrapolation over the filter delay inflates strongly damped poles
        poles.push((at_output.norm(), Pole { omega, amplitude: amp }));
    }
    if discarded_low > 0 {
        notices.push(format!("{discarded_low} in-band pole(s) with Q < {Q_MIN} discarded"));
    }
    poles.sort_by(|a, b| b.0.total_cmp(&a.0));
    // below the stopband leakage a pole cannot be told apart from an aliased image
    let floor = poles.first().map_or(0.0, |p| p.0) * 10f64.powf(-KAISER_ATTEN_DB / 20.0);
    let before = poles.len();
    poles.retain(|p| p.0 >= floor);
    if poles.len() < before {
        notices.push(format!("{} in-band pole(s) below the anti-alias stopband level discarded", before - poles.len()));
    }
    let poles: Vec<Pole> = poles.into_iter().map(|(_, p)| p).collect();
    let growing = poles.iter().filter(|p| p.omega.im > 0.0 && p.omega.re / (2.0 * p.omega.im) < Q_MAX).count();
    if growing > 0 {
        notices.push(format!("{growing} in-band pole(s) grow in time"));
    }
    if poles.len() < max_poles {
        notices.push(format!("fewer poles than requested: found {} of {max_poles} in band", poles.len()));
    }
    let modes = poles
        .iter()
        .take(max_poles)
        .map(|p| {
            let q = p.omega.re / (2.0 * p.omega.im.abs());
            ResonantMode {
                frequency: p.omega.re / (2.0 * std::f64::consts::PI),
                wavelength_nm: None,
                q: if q > Q_MAX { QFactor::ExceedsMeasurable } else { QFactor::Finite(q) },
                amplitude: p.amplitude,
                v_norm: None,
            }
        })
        .collect();
    Ok(HarminvOutput { modes, model: PoleModel { t0: t_first, poles }, notices })
}
