//! Voigt profile through the Faddeeva function `w(z) = exp(-z^2) erfc(-iz)`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// FWHM of a unit-sigma Gaussian, `2 sqrt(2 ln 2)`.
pub(crate) const GAUSS_FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949_3;

/// Terms of the rational approximation.
const WEIDEMAN_N: usize = 40;

/// Area-normalized Voigt line: Lorentzian (FWHM `lorentz_fwhm`) convolved
/// with a Gaussian (FWHM `gauss_fwhm`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VoigtPeak {
    pub center: f64,
    pub lorentz_fwhm: f64,
    pub gauss_fwhm: f64,
    pub area: f64,
}

impl VoigtPeak {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.center, self.lorentz_fwhm, self.gauss_fwhm, self.area].iter().all(|v| v.is_finite());
        if !finite || self.lorentz_fwhm < 0.0 || self.gauss_fwhm < 0.0 {
            return Err(Error::param(format!("invalid Voigt peak {self:?}")));
        }
        if self.lorentz_fwhm == 0.0 && self.gauss_fwhm == 0.0 {
            return Err(Error::Degenerate("Voigt peak with both widths zero".into()));
        }
        Ok(())
    }
}

struct Weideman {
    l: f64,
    coeffs: [f64; WEIDEMAN_N],
}

fn weideman() -> &'static Weideman {
    static TABLE: OnceLock<Weideman> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = WEIDEMAN_N;
        let m = 2 * n;
        let l = (n as f64 / 2f64.sqrt()).sqrt();
        let f: Vec<(f64, f64)> = (1..m)
            .flat_map(|k| [k as i64, -(k as i64)])
            .chain(std::iter::once(0))
            .map(|k| {
                let t = l * (k as f64 * PI / (2 * m) as f64).tan();
                (k as f64, (-t * t).exp() * (l * l + t * t))
            })
            .collect();
        let mut coeffs = [0.0; WEIDEMAN_N];
        for (j, c) in coeffs.iter_mut().enumerate() {
            let mm = (j + 1) as f64;
            let s: f64 = f.iter().map(|(k, fk)| fk * (PI * k * mm / m as f64).cos()).sum();
            *c = s / (2 * m) as f64;
        }
        Weideman { l, coeffs }
    })
}

/// Faddeeva function, Weideman's rational approximation (upper half plane,
/// extended below the real axis by `w(z) = 2 exp(-z^2) - w(-z)`).
pub fn faddeeva(z: Complex64) -> Complex64 {
    if z.im < 0.0 {
        return 2.0 * (-z * z).exp() - faddeeva(-z);
    }
    let t = weideman();
    let i = Complex64::i();
    let lz = t.l - i * z;
    let big_z = (t.l + i * z) / lz;
    let mut p = Complex64::new(0.0, 0.0);
    for &c in t.coeffs.iter().rev() {
        p = p * big_z + c;
    }
    2.0 * p / (lz * lz) + 1.0 / (PI.sqrt() * lz)
}

/// Value of the profile at `x`.
pub fn voigt_eval(x: f64, peak: &VoigtPeak) -> Result<f64> {
    peak.validate()?;
    Ok(voigt_with_gradient(x, peak).0)
}

/// Value and derivatives with respect to `(center, lorentz_fwhm, area, gauss_fwhm)`.
///
/// The peak is assumed valid.
pub fn voigt_with_gradient(x: f64, peak: &VoigtPeak) -> (f64, [f64; 4]) {
    let u = x - peak.center;
    let gamma = 0.5 * peak.lorentz_fwhm;
    let sigma = peak.gauss_fwhm / GAUSS_FWHM_PER_SIGMA;
    let a = peak.area;
    if sigma == 0.0 {
        let d = u * u + gamma * gamma;
        let v = a * gamma / (PI * d);
        let dc = a * gamma * 2.0 * u / (PI * d * d);
        let dgamma = a * (u * u - gamma * gamma) / (PI * d * d);
        let da = gamma / (PI * d);
        return (v, [dc, 0.5 * dgamma, da, 0.0]);
    }
    let s2 = sigma * 2f64.sqrt();
    let norm = 1.0 / (sigma * (2.0 * PI).sqrt());
    let z = Complex64::new(u, gamma) / s2;
    let w = faddeeva(z);
    let dw = -2.0 * z * w + Complex64::new(0.0, 2.0 / PI.sqrt());
    let shape = if gamma == 0.0 { (-u * u / (2.0 * sigma * sigma)).exp() } else { w.re };
    let v = a * norm * shape;
    let dc = a * norm * (dw * (-1.0 / s2)).re;
    let dgamma = a * norm * (dw * Complex64::new(0.0, 1.0 / s2)).re;
    let dsigma = -v / sigma + a * norm * (dw * (-z / sigma)).re;
    (v, [dc, 0.5 * dgamma, norm * shape, dsigma / GAUSS_FWHM_PER_SIGMA])
}
