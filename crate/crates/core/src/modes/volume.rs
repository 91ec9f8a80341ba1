use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fdtd::{FieldSnapshot, Symmetry};
use crate::geometry::PermittivityGrid;

/// Refractive index used for the `(lambda / n)^3` normalization.
pub const N_REF_DEFAULT: f64 = 3.46;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeVolume {
    /// Volume in nm^3 (full structure, mirror images included).
    pub v_nm3: f64,
    /// Volume in units of `(lambda / n_ref)^3`.
    pub v_norm: f64,
    /// Node holding the maximum of `eps |E|^2`.
    pub peak_node: [usize; 3],
    pub peak_eps: f64,
}

/// `sum w eps|E|^2 dV / max(eps|E|^2)` for node-sampled energy density.
pub fn purcell_volume(density: &[f64], weights: &[f64], cell_volume: f64) -> Result<(f64, usize)> {
    if density.len() != weights.len() {
        return Err(Error::param("density and weights differ in length"));
    }
    let (imax, &dmax) = density
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| Error::Degenerate("empty field".into()))?;
    if !(dmax > 0.0) || !dmax.is_finite() {
        return Err(Error::Degenerate("field is identically zero".into()));
    }
    let total: f64 = density.iter().zip(weights).map(|(d, w)| d * w).sum();
    Ok((total * cell_volume / dmax, imax))
}

/// Node value of a component staggered half a cell along `axis`.
///
/// Below index 0 the mirror image is used on a symmetry plane (the normal
/// component is odd under an even-E mirror), otherwise the field is taken as zero.
fn staggered_at_node(f: &[Complex64], idx: usize, pos: usize, stride: usize, low: Symmetry) -> Complex64 {
    let here = f[idx];
    let below = if pos > 0 {
        f[idx - stride]
    } else {
        match low {
            Symmetry::Even => -here,
            Symmetry::Odd => here,
            Symmetry::None => Complex64::new(0.0, 0.0),
        }
    };
    0.5 * (here + below)
}

/// Purcell mode volume of a DFT snapshot normalized by `(lambda / n_ref)^3`.
///
/// Yee components are interpolated to the permittivity nodes before forming
/// `eps |E|^2`. On axes with a mirror symmetry, off-plane nodes count twice so
/// the result refers to the full structure.
pub fn mode_volume(snap: &FieldSnapshot, eps: &PermittivityGrid, wavelength_nm: f64, n_ref: f64) -> Result<ModeVolume> {
    if snap.dims != eps.dims || eps.eps.len() != snap.len() {
        return Err(Error::param(format!("snapshot grid {:?} differs from permittivity grid {:?}", snap.dims, eps.dims)));
    }
    if (snap.spacing_nm - eps.spacing_nm).abs() > 1e-9 * eps.spacing_nm {
        return Err(Error::param("snapshot and permittivity grids have different spacing"));
    }
    if !(wavelength_nm > 0.0 && n_ref > 0.0) {
        return Err(Error::param("wavelength and n_ref must be positive"));
    }
    let [nx, ny, _] = snap.dims;
    let strides = [1, nx, nx * ny];
    let sym = snap.symmetries;
    let mut density = vec![0.0; snap.len()];
    let mut weights = vec![0.0; snap.len()];
    density
        .par_chunks_mut(nx * ny)
        .zip(weights.par_chunks_mut(nx * ny))
        .enumerate()
        .for_each(|(k, (dens, wts))| {
            for j in 0..ny {
                for i in 0..nx {
                    let pos = [i, j, k];
                    let idx = i + nx * (j + ny * k);
                    let mut e2 = 0.0;
                    for c in 0..3 {
                        let v = staggered_at_node(&snap.e[c], idx, pos[c], strides[c], sym[c]);
                        e2 += v.norm_sqr();
                    }
                    dens[i + nx * j] = eps.eps[idx] * e2;
                    let mut w = 1.0;
                    for ax in 0..3 {
                        if sym[ax] != Symmetry::None && pos[ax] > 0 {
                            w *= 2.0;
                        }
                    }
                    wts[i + nx * j] = w;
                }
            }
        });
    let (v_nm3, imax) = purcell_volume(&density, &weights, snap.spacing_nm.powi(3))?;
    let peak_node = [imax % nx, (imax / nx) % ny, imax / (nx * ny)];
    Ok(ModeVolume {
        v_nm3,
        v_norm: v_nm3 / (wavelength_nm / n_ref).powi(3),
        peak_node,
        peak_eps: eps.eps[imax],
    })
}
