//! Running single-frequency DFT of the electric field.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Symmetry;
use crate::error::{Error, Result};
use crate::geometry::raster::{file_name, read_f64_le, write_f64_le};
use crate::geometry::PermittivityGrid;

/// Accumulates `sum_n E(t_n) exp(i 2 pi f t_n)` for the three E components.
#[derive(Debug, Clone)]
pub struct DftAccumulator {
    pub frequency: f64,
    pub samples: u64,
    re: [Vec<f64>; 3],
    im: [Vec<f64>; 3],
}

impl DftAccumulator {
    pub fn new(len: usize, frequency: f64) -> Self {
        DftAccumulator {
            frequency,
            samples: 0,
            re: std::array::from_fn(|_| vec![0.0; len]),
            im: std::array::from_fn(|_| vec![0.0; len]),
        }
    }

    pub fn accumulate(&mut self, e: &[Vec<f64>; 3], t: f64) {
        let (s, c) = (2.0 * std::f64::consts::PI * self.frequency * t).sin_cos();
        for ((re, im), f) in self.re.iter_mut().zip(self.im.iter_mut()).zip(e) {
            re.par_chunks_mut(4096)
                .zip(im.par_chunks_mut(4096))
                .zip(f.par_chunks(4096))
                .for_each(|((r, i), v)| {
                    for n in 0..v.len() {
                        r[n] += c * v[n];
                        i[n] += s * v[n];
                    }
                });
        }
        self.samples += 1;
    }

    /// Complex amplitudes `(2 / N) sum E exp(i omega t)`.
    pub fn amplitudes(&self) -> [Vec<Complex64>; 3] {
        let norm = if self.samples > 0 { 2.0 / self.samples as f64 } else { 0.0 };
        std::array::from_fn(|c| {
            self.re[c].iter().zip(&self.im[c]).map(|(r, i)| Complex64::new(r * norm, i * norm)).collect()
        })
    }
}

/// DFT of a sampled signal at one frequency, normalized like [`DftAccumulator`].
pub fn snapshot_dft(values: &[f64], dt: f64, first_step: u64, frequency: f64) -> Result<Complex64> {
    let period_steps = 1.0 / (frequency * dt);
    if (values.len() as f64) < period_steps {
        return Err(Error::param(format!(
            "DFT window of {} samples is shorter than one period ({period_steps:.1} samples)",
            values.len()
        )));
    }
    let w = 2.0 * std::f64::consts::PI * frequency;
    let sum: Complex64 = values
        .iter()
        .enumerate()
        .map(|(n, v)| v * Complex64::from_polar(1.0, w * (first_step + n as u64) as f64 * dt))
        .sum();
    Ok(sum * (2.0 / values.len() as f64))
}

/// Complex E field at one frequency on the Yee positions of a grid.
#[derive(Debug, Clone)]
pub struct FieldSnapshot {
    pub dims: [usize; 3],
    pub spacing_nm: f64,
    pub origin_nm: [f64; 3],
    pub a_nm: f64,
    /// Normalized frequency (c/a).
    pub frequency: f64,
    /// Mirror parity of E about the low face of each axis.
    pub symmetries: [Symmetry; 3],
    pub e: [Vec<Complex64>; 3],
    /// Node permittivity.
    pub eps: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SnapshotSidecar {
    pub dims: [usize; 3],
    pub spacing_nm: f64,
    pub origin_nm: [f64; 3],
    pub a_nm: f64,
    pub frequency: f64,
    pub symmetries: [Symmetry; 3],
    pub staggering: String,
    /// Data files for Ex, Ey, Ez (interleaved re/im little-endian f64).
    pub components: [String; 3],
    pub eps: String,
}

impl FieldSnapshot {
    pub fn from_accumulator(acc: DftAccumulator, grid: &PermittivityGrid, symmetries: [Symmetry; 3]) -> Self {
        FieldSnapshot {
            dims: grid.dims,
            spacing_nm: grid.spacing_nm,
            origin_nm: grid.origin_nm,
            a_nm: grid.a_nm,
            frequency: acc.frequency,
            symmetries,
            e: acc.amplitudes(),
            eps: grid.eps.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing_a(&self) -> f64 {
        self.spacing_nm / self.a_nm
    }

    /// Writes `<stem>_ex.bin`, `_ey.bin`, `_ez.bin`, `_eps.bin` and `<stem>.json`.
    pub fn write(&self, stem: &Path) -> Result<PathBuf> {
        let suffixed = |s: &str| {
            let mut name = stem.file_name().map(|n| n.to_os_string()).unwrap_or_default();
            name.push(s);
            stem.with_file_name(name)
        };
        let names = ["_ex.bin", "_ey.bin", "_ez.bin"];
        let mut components: [String; 3] = Default::default();
        for c in 0..3 {
            let p = suffixed(names[c]);
            let flat: Vec<f64> = self.e[c].iter().flat_map(|z| [z.re, z.im]).collect();
            write_f64_le(&p, &flat)?;
            components[c] = file_name(&p);
        }
        let eps_path = suffixed("_eps.bin");
        write_f64_le(&eps_path, &self.eps)?;
        let side = SnapshotSidecar {
            dims: self.dims,
            spacing_nm: self.spacing_nm,
            origin_nm: self.origin_nm,
            a_nm: self.a_nm,
            frequency: self.frequency,
            symmetries: self.symmetries,
            staggering: "yee".into(),
            components,
            eps: file_name(&eps_path),
        };
        let json_path = suffixed(".json");
        std::fs::write(&json_path, serde_json::to_string_pretty(&side)? + "\n")?;
        Ok(json_path)
    }

    pub fn read(sidecar_path: &Path) -> Result<Self> {
        let side: SnapshotSidecar = serde_json::from_str(&std::fs::read_to_string(sidecar_path)?)?;
        let dir = sidecar_path.parent().unwrap_or(Path::new("."));
        let n: usize = side.dims.iter().product();
        let mut e: [Vec<Complex64>; 3] = Default::default();
        for c in 0..3 {
            let flat = read_f64_le(&dir.join(&side.components[c]))?;
            if flat.len() != 2 * n {
                return Err(Error::param(format!("{}: expected {} values, found {}", side.components[c], 2 * n, flat.len())));
            }
            e[c] = flat.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect();
        }
        let eps = read_f64_le(&dir.join(&side.eps))?;
        if eps.len() != n {
            return Err(Error::param(format!("{}: expected {n} values, found {}", side.eps, eps.len())));
        }
        Ok(FieldSnapshot {
            dims: side.dims,
            spacing_nm: side.spacing_nm,
            origin_nm: side.origin_nm,
            a_nm: side.a_nm,
            frequency: side.frequency,
            symmetries: side.symmetries,
            e,
            eps,
        })
    }
}
