use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::CavityDesign;
use crate::error::{Error, Result};

/// Subsamples per axis used to estimate the fill fraction of a boundary cell.
pub const SUBSAMPLES: usize = 8;

/// Computational box in units of `a`, centred on the cavity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    /// Half-extents along x, y, z.
    pub half_extent: [f64; 3],
    /// Keep only the non-negative half along an axis (mirror-symmetric runs).
    pub mirror: [bool; 3],
}

impl DomainSpec {
    /// Box enclosing the hole pattern and the slab plus padding (units of a).
    pub fn around(design: &CavityDesign, pad_xy: f64, pad_z: f64, mirror: [bool; 3]) -> Self {
        let a = design.lattice.a_nm;
        let (ex, ey) = design.hole_extent_nm();
        DomainSpec {
            half_extent: [ex / a + pad_xy, ey / a + pad_xy, design.lattice.d_nm / (2.0 * a) + pad_z],
            mirror,
        }
    }
}

/// Scalar permittivity sampled on the nodes of a uniform cubic grid.
///
/// Node `(i, j, k)` sits at `origin + (i, j, k) * spacing`; its value is the
/// average permittivity of the cube of side `spacing` centred on it. Data are
/// stored x-fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct PermittivityGrid {
    pub dims: [usize; 3],
    pub spacing_nm: f64,
    pub origin_nm: [f64; 3],
    /// Lattice constant used to convert to FDTD units.
    pub a_nm: f64,
    /// Axes whose low face is a mirror plane through the cavity centre.
    pub mirror: [bool; 3],
    pub eps: Vec<f64>,
}

/// JSON sidecar accompanying the raw little-endian `f64` data file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSidecar {
    pub dims: [usize; 3],
    pub spacing_nm: f64,
    pub origin_nm: [f64; 3],
    #[serde(default)]
    pub a_nm: Option<f64>,
    #[serde(default)]
    pub mirror: [bool; 3],
    /// Data file name, relative to the sidecar.
    pub data: String,
}

impl PermittivityGrid {
    /// Homogeneous grid.
    pub fn uniform(dims: [usize; 3], spacing_nm: f64, a_nm: f64, eps: f64) -> Self {
        PermittivityGrid {
            dims,
            spacing_nm,
            origin_nm: [0.0; 3],
            a_nm,
            mirror: [false; 3],
            eps: vec![eps; dims[0] * dims[1] * dims[2]],
        }
    }

    pub fn len(&self) -> usize {
        self.eps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eps.is_empty()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.eps[self.index(i, j, k)]
    }

    /// Grid spacing in units of `a`.
    pub fn spacing_a(&self) -> f64 {
        self.spacing_nm / self.a_nm
    }

    pub fn node_nm(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        [
            self.origin_nm[0] + i as f64 * self.spacing_nm,
            self.origin_nm[1] + j as f64 * self.spacing_nm,
            self.origin_nm[2] + k as f64 * self.spacing_nm,
        ]
    }

    /// Node index closest to the physical origin.
    pub fn center_index(&self) -> [usize; 3] {
        let mut c = [0; 3];
        for ax in 0..3 {
            c[ax] = (-self.origin_nm[ax] / self.spacing_nm).round().max(0.0) as usize;
        }
        c
    }

    /// Writes `<stem>.bin` and the sidecar `<stem>.json`; returns the sidecar path.
    pub fn write(&self, stem: &Path) -> Result<PathBuf> {
        let bin = stem.with_extension("bin");
        write_f64_le(&bin, &self.eps)?;
        let sidecar = GridSidecar {
            dims: self.dims,
            spacing_nm: self.spacing_nm,
            origin_nm: self.origin_nm,
            a_nm: Some(self.a_nm),
            mirror: self.mirror,
            data: file_name(&bin),
        };
        let json = stem.with_extension("json");
        fs::write(&json, serde_json::to_string_pretty(&sidecar)? + "\n")?;
        Ok(json)
    }

    /// Reads a grid from its sidecar path.
    pub fn read(sidecar_path: &Path) -> Result<Self> {
        let sidecar: GridSidecar = serde_json::from_str(&fs::read_to_string(sidecar_path)?)?;
        let data_path = sidecar_path.parent().unwrap_or(Path::new(".")).join(&sidecar.data);
        let eps = read_f64_le(&data_path)?;
        let n = sidecar.dims.iter().product::<usize>();
        if eps.len() != n {
            return Err(Error::param(format!(
                "{} holds {} values but dims {:?} need {n}",
                data_path.display(),
                eps.len(),
                sidecar.dims
            )));
        }
        Ok(PermittivityGrid {
            dims: sidecar.dims,
            spacing_nm: sidecar.spacing_nm,
            origin_nm: sidecar.origin_nm,
            a_nm: sidecar.a_nm.unwrap_or(sidecar.spacing_nm * (sidecar.dims[0].max(2) - 1) as f64),
            mirror: sidecar.mirror,
            eps,
        })
    }
}

pub(crate) fn file_name(p: &Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

pub(crate) fn write_f64_le(path: &Path, values: &[f64]) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    for v in values {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn read_f64_le(path: &Path) -> Result<Vec<f64>> {
    let bytes = fs::read(path)?;
    if bytes.len() % 8 != 0 {
        return Err(Error::param(format!("{}: length is not a multiple of 8 bytes", path.display())));
    }
    Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
}

/// Node coordinates along one axis (units of a) for a half-extent.
fn axis_nodes(half: f64, h: f64, mirror: bool) -> Vec<f64> {
    let n = (half / h - 1e-9).ceil().max(1.0) as i64;
    let lo = if mirror { 0 } else { -n };
    (lo..=n).map(|i| i as f64 * h).collect()
}

/// Rasterises a design onto a grid with `resolution` cells per lattice constant.
///
/// Cells straddling a hole edge or the slab surface get the fill-fraction
/// average of the two permittivities, estimated from `SUBSAMPLES` points per
/// axis. Air holes are extruded through the whole slab, so the 3D fill
/// fraction factorises into an in-plane and a vertical part.
pub fn rasterize(design: &CavityDesign, resolution: usize, domain: &DomainSpec) -> Result<PermittivityGrid> {
    design.lattice.validate()?;
    if resolution < 8 {
        return Err(Error::param(format!("resolution must be at least 8 cells per a, got {resolution}")));
    }
    let a = design.lattice.a_nm;
    let (ex, ey) = design.hole_extent_nm();
    let need = [ex / a, ey / a, design.lattice.d_nm / (2.0 * a)];
    for ax in 0..3 {
        let half = domain.half_extent[ax];
        if !half.is_finite() || half + 1e-9 < need[ax] {
            return Err(Error::param(format!(
                "domain half-extent {half} a along axis {ax} is smaller than the structure ({} a)",
                need[ax]
            )));
        }
    }

    let h = 1.0 / resolution as f64;
    let xs = axis_nodes(domain.half_extent[0], h, domain.mirror[0]);
    let ys = axis_nodes(domain.half_extent[1], h, domain.mirror[1]);
    let zs = axis_nodes(domain.half_extent[2], h, domain.mirror[2]);
    let (nx, ny, nz) = (xs.len(), ys.len(), zs.len());

    let covered = hole_coverage(design, &xs, &ys, h);
    let half_d = design.lattice.d_nm / (2.0 * a);
    let eps_slab = design.lattice.eps_slab();
    let eps_bg = design.lattice.eps_bg();
    let full = (SUBSAMPLES * SUBSAMPLES * SUBSAMPLES) as f64;

    let mut eps = vec![0.0; nx * ny * nz];
    eps.par_chunks_mut(nx * ny).zip(zs.par_iter()).for_each(|(plane, &z)| {
        let in_slab = slab_count(z, h, half_d);
        for (e, &c) in plane.iter_mut().zip(&covered) {
            let dielectric = (SUBSAMPLES * SUBSAMPLES - c as usize) * in_slab;
            *e = eps_bg + (eps_slab - eps_bg) * (dielectric as f64 / full);
        }
    });

    Ok(PermittivityGrid {
        dims: [nx, ny, nz],
        spacing_nm: h * a,
        origin_nm: [xs[0] * a, ys[0] * a, zs[0] * a],
        a_nm: a,
        mirror: domain.mirror,
        eps,
    })
}

#[inline]
fn sub_offset(s: usize, h: f64) -> f64 {
    ((s as f64 + 0.5) / SUBSAMPLES as f64 - 0.5) * h
}

/// Number of vertical subsamples of the cell at `z` that lie inside the slab.
fn slab_count(z: f64, h: f64, half_d: f64) -> usize {
    if (z.abs() + h / 2.0) < half_d {
        return SUBSAMPLES;
    }
    if (z.abs() - h / 2.0) > half_d {
        return 0;
    }
    (0..SUBSAMPLES).filter(|&s| (z + sub_offset(s, h)).abs() < half_d).count()
}

/// Per in-plane node, the number of the `SUBSAMPLES^2` subsamples lying in a hole.
fn hole_coverage(design: &CavityDesign, xs: &[f64], ys: &[f64], h: f64) -> Vec<u32> {
    let a = design.lattice.a_nm;
    let (nx, ny) = (xs.len(), ys.len());
    let (x0, y0) = (xs[0], ys[0]);
    let mut covered = vec![0u32; nx * ny];
    let half_diag = h * std::f64::consts::FRAC_1_SQRT_2;
    for hole in &design.holes {
        let (cx, cy, r) = (hole.x / a, hole.y / a, hole.radius / a);
        let i_lo = (((cx - r - h) - x0) / h).floor().max(0.0) as usize;
        let i_hi = ((((cx + r + h) - x0) / h).ceil().max(0.0) as usize).min(nx.saturating_sub(1));
        let j_lo = (((cy - r - h) - y0) / h).floor().max(0.0) as usize;
        let j_hi = ((((cy + r + h) - y0) / h).ceil().max(0.0) as usize).min(ny.saturating_sub(1));
        if i_lo > i_hi || j_lo > j_hi || i_lo >= nx || j_lo >= ny {
            continue;
        }
        for j in j_lo..=j_hi {
            for i in i_lo..=i_hi {
                let (x, y) = (xs[i], ys[j]);
                let d = (x - cx).hypot(y - cy);
                let count = if d + half_diag <= r {
                    (SUBSAMPLES * SUBSAMPLES) as u32
                } else if d - half_diag >= r {
                    0
                } else {
                    let mut c = 0;
                    for sj in 0..SUBSAMPLES {
                        let py = y + sub_offset(sj, h) - cy;
                        for si in 0..SUBSAMPLES {
                            let px = x + sub_offset(si, h) - cx;
                            if px * px + py * py < r * r {
                                c += 1;
                            }
                        }
                    }
                    c
                };
                covered[i + nx * j] += count;
            }
        }
    }
    covered
}
