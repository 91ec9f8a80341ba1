use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fdtd::TimeSeries;
use crate::specfit::{AxisUnit, Spectrum};

const MIN_SAMPLES: usize = 64;
/// Local maxima below this fraction of the strongest bin are not reported.
const PEAK_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPeak {
    /// Refined frequency in c/a.
    pub frequency: f64,
    pub power: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FftSpectrum {
    /// One-sided power versus frequency (c/a).
    pub spectrum: Spectrum,
    /// Local maxima, strongest first.
    pub peaks: Vec<SpectralPeak>,
}

/// Hann-windowed periodogram with log-parabolic peak refinement.
pub fn fft_spectrum(ts: &TimeSeries) -> Result<FftSpectrum> {
    let n = ts.values.len();
    if n < MIN_SAMPLES {
        return Err(Error::param(format!("periodogram needs at least {MIN_SAMPLES} samples, got {n}")));
    }
    let mean = ts.values.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex<f64>> = ts
        .values
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let w = 0.5 - 0.5 * (2.0 * std::f64::consts::PI * k as f64 / n as f64).cos();
            Complex::new((v - mean) * w, 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let half = n / 2 + 1;
    let df = 1.0 / (n as f64 * ts.dt);
    let power: Vec<f64> = buf[..half].iter().map(|c| c.norm_sqr()).collect();
    let axis: Vec<f64> = (0..half).map(|k| k as f64 * df).collect();
    let pmax = power.iter().cloned().fold(0.0, f64::max);
    let mut peaks = Vec::new();
    if pmax > 0.0 {
        for k in 1..half - 1 {
            let (a, b, c) = (power[k - 1], power[k], power[k + 1]);
            if b > a && b >= c && b > PEAK_FLOOR * pmax {
                let (la, lb, lc) = (a.max(1e-300).ln(), b.ln(), c.max(1e-300).ln());
                let denom = la - 2.0 * lb + lc;
                let delta = if denom < 0.0 { (0.5 * (la - lc) / denom).clamp(-0.5, 0.5) } else { 0.0 };
                let peak_log = lb - 0.25 * (la - lc) * delta;
                peaks.push(SpectralPeak { frequency: (k as f64 + delta) * df, power: peak_log.exp() });
            }
        }
    }
    peaks.sort_by(|x, y| y.power.total_cmp(&x.power));
    Ok(FftSpectrum { spectrum: Spectrum::new(axis, power, AxisUnit::Normalized)?, peaks })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tone(n: usize, dt: f64, f: &[(f64, f64)]) -> TimeSeries {
        let v = (0..n)
            .map(|k| f.iter().map(|(fr, a)| a * (2.0 * std::f64::consts::PI * fr * k as f64 * dt).sin()).sum())
            .collect();
        TimeSeries::from_samples("t", dt, v)
    }

    #[test]
    fn bin_centred_tone() {
        let (n, dt) = (1024, 0.05);
        let f = 100.0 / (n as f64 * dt);
        let s = fft_spectrum(&tone(n, dt, &[(f, 1.0)])).unwrap();
        assert!((s.peaks[0].frequency - f).abs() < 1e-12);
    }

    #[test]
    fn off_bin_tone_refined() {
        let (n, dt) = (1024, 0.05);
        let df = 1.0 / (n as f64 * dt);
        for frac in [0.1, 0.25, 0.37, 0.5, 0.81] {
            let f = (80.0 + frac) * df;
            let s = fft_spectrum(&tone(n, dt, &[(f, 1.0)])).unwrap();
            assert!((s.peaks[0].frequency - f).abs() < 0.1 * df, "{frac}: {}", (s.peaks[0].frequency - f) / df);
        }
    }

    #[test]
    fn two_tones_two_peaks() {
        let s = fft_spectrum(&tone(2048, 0.05, &[(2.0, 1.0), (3.1, 0.5)])).unwrap();
        let big: Vec<_> = s.peaks.iter().filter(|p| p.power > 1e-3 * s.peaks[0].power).collect();
        assert_eq!(big.len(), 2, "{:?}", s.peaks);
        assert!((big[0].frequency - 2.0).abs() < 0.01);
        assert!((big[1].frequency - 3.1).abs() < 0.01);
    }

    #[test]
    fn short_series_rejected() {
        assert!(fft_spectrum(&tone(63, 0.05, &[(1.0, 1.0)])).is_err());
    }
}
