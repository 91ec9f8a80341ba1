//! Voigt line shapes and multi-peak spectrum fitting.

mod fit;
mod voigt;

pub use fit::{fit_spectrum, q_from_fit, FitOptions, FitResult};
pub use voigt::{faddeeva, voigt_eval, voigt_with_gradient, VoigtPeak};

use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::HC_UEV_NM;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AxisUnit {
    /// Photon energy in micro-eV.
    #[serde(rename = "ueV")]
    MicroEv,
    /// Vacuum wavelength in nm.
    #[serde(rename = "nm")]
    Nanometer,
    /// Normalized frequency c/a.
    #[serde(rename = "c/a")]
    Normalized,
}

impl AxisUnit {
    pub fn tag(self) -> &'static str {
        match self {
            AxisUnit::MicroEv => "ueV",
            AxisUnit::Nanometer => "nm",
            AxisUnit::Normalized => "c/a",
        }
    }
}

impl std::str::FromStr for AxisUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "ueV" | "uev" | "μeV" => Ok(AxisUnit::MicroEv),
            "nm" => Ok(AxisUnit::Nanometer),
            "c/a" => Ok(AxisUnit::Normalized),
            other => Err(Error::param(format!("unknown axis unit '{other}' (expected ueV, nm or c/a)"))),
        }
    }
}

/// Sampled intensity on a strictly monotone axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub axis: Vec<f64>,
    pub intensity: Vec<f64>,
    pub axis_unit: AxisUnit,
}

impl Spectrum {
    pub fn new(axis: Vec<f64>, intensity: Vec<f64>, axis_unit: AxisUnit) -> Result<Self> {
        if axis.len() != intensity.len() {
            return Err(Error::param(format!(
                "axis has {} samples but intensity has {}",
                axis.len(),
                intensity.len()
            )));
        }
        if axis.len() < 2 {
            return Err(Error::param("spectrum needs at least two samples"));
        }
        if axis.iter().chain(&intensity).any(|v| !v.is_finite()) {
            return Err(Error::param("spectrum contains non-finite values"));
        }
        let up = axis[1] > axis[0];
        if !axis.windows(2).all(|w| if up { w[1] > w[0] } else { w[1] < w[0] }) {
            return Err(Error::param("spectrum axis must be strictly monotone"));
        }
        Ok(Spectrum { axis, intensity, axis_unit })
    }

    pub fn len(&self) -> usize {
        self.axis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axis.is_empty()
    }

    /// Same data on an ascending energy axis (ueV); wavelengths use E = hc / lambda.
    pub fn to_energy(&self) -> Result<Spectrum> {
        let mut pairs: Vec<(f64, f64)> = match self.axis_unit {
            AxisUnit::MicroEv => self.axis.iter().cloned().zip(self.intensity.iter().cloned()).collect(),
            AxisUnit::Nanometer => {
                if self.axis.iter().any(|&l| l <= 0.0) {
                    return Err(Error::param("wavelengths must be positive"));
                }
                self.axis.iter().map(|l| HC_UEV_NM / l).zip(self.intensity.iter().cloned()).collect()
            }
            AxisUnit::Normalized => return Err(Error::param("a c/a axis cannot be converted to energy without a lattice constant")),
        };
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (axis, intensity) = pairs.into_iter().unzip();
        Spectrum::new(axis, intensity, AxisUnit::MicroEv)
    }

    /// Writes `# axis_unit=<unit>`, the `axis,intensity` header, then one row per sample.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "# axis_unit={}", self.axis_unit.tag())?;
        writeln!(w, "axis,intensity")?;
        for (x, y) in self.axis.iter().zip(&self.intensity) {
            writeln!(w, "{x:.12e},{y:.12e}")?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the format of [`Spectrum::write_csv`]; without a unit line the axis is taken as ueV.
    pub fn read_csv(path: &Path) -> Result<Spectrum> {
        let r = std::io::BufReader::new(std::fs::File::open(path)?);
        let mut unit = AxisUnit::MicroEv;
        let (mut axis, mut intensity) = (Vec::new(), Vec::new());
        for (ln, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(c) = line.strip_prefix('#') {
                if let Some(u) = c.trim().strip_prefix("axis_unit=") {
                    unit = u.parse()?;
                }
                continue;
            }
            if line.starts_with("axis") {
                continue;
            }
            let mut f = line.split(',').map(str::trim);
            let parse = |s: Option<&str>| -> Result<f64> {
                s.and_then(|v| v.parse().ok()).ok_or_else(|| Error::param(format!("line {}: expected two numbers", ln + 1)))
            };
            axis.push(parse(f.next())?);
            intensity.push(parse(f.next())?);
        }
        Spectrum::new(axis, intensity, unit)
    }
}
