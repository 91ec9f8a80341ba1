//! Resonances from probe signals and fields: frequency, Q, mode volume.

mod harminv;
mod spectrum;
mod volume;

pub use harminv::{harmonic_inversion, HarminvOutput, Pole, PoleModel, Q_MAX, Q_MIN};
pub use spectrum::{fft_spectrum, FftSpectrum, SpectralPeak};
pub use volume::{mode_volume, purcell_volume, ModeVolume, N_REF_DEFAULT};

pub use crate::units::{kappa_to_q, q_to_kappa};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::units::{normalized_to_wavelength, HC_UEV_NM};

/// Quality factor, or a marker for decay too slow to resolve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QFactor {
    Finite(f64),
    ExceedsMeasurable,
}

impl QFactor {
    pub fn value(self) -> Option<f64> {
        match self {
            QFactor::Finite(q) => Some(q),
            QFactor::ExceedsMeasurable => None,
        }
    }

    /// Finite Q, or `f64::INFINITY` for the sentinel.
    pub fn or_infinite(self) -> f64 {
        self.value().unwrap_or(f64::INFINITY)
    }
}

const EXCEEDS: &str = "exceeds-measurable";

impl Serialize for QFactor {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            QFactor::Finite(q) => s.serialize_f64(*q),
            QFactor::ExceedsMeasurable => s.serialize_str(EXCEEDS),
        }
    }
}

impl<'de> Deserialize<'de> for QFactor {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(q) => Ok(QFactor::Finite(q)),
            Raw::Text(t) if t == EXCEEDS => Ok(QFactor::ExceedsMeasurable),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("unknown Q value '{t}'"))),
        }
    }
}

/// One resonance extracted from a time signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonantMode {
    /// Real frequency in c/a.
    pub frequency: f64,
    pub wavelength_nm: Option<f64>,
    pub q: QFactor,
    /// Complex residue of the pole, referenced to the first sample.
    pub amplitude: Complex64,
    pub v_norm: Option<f64>,
}

impl ResonantMode {
    pub fn phase(&self) -> f64 {
        self.amplitude.arg()
    }

    /// Fills in the wavelength for lattice constant `a_nm`.
    pub fn with_lattice(mut self, a_nm: f64) -> Self {
        self.wavelength_nm = Some(normalized_to_wavelength(self.frequency, a_nm));
        self
    }

    /// Cavity linewidth in micro-eV (requires a wavelength and a finite Q).
    pub fn kappa_uev(&self) -> Option<f64> {
        let lambda = self.wavelength_nm?;
        let q = self.q.value()?;
        Some(HC_UEV_NM / lambda / q)
    }
}
