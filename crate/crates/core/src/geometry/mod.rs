//! Hexagonal-lattice photonic-crystal slab cavities.
//!
//! Coordinates are in nanometres with the cavity centre at the origin and the
//! defect row along `y = 0`. Rasterisation switches to FDTD units (`a = 1`).

mod design;
mod lattice;
pub(crate) mod raster;

pub use design::{
    apply_modulation, make_l3, make_l4_3, CavityDesign, DesignFile, DesignMeta, DEFAULT_L4_3_DESIGN,
};
pub use lattice::build_bulk_lattice;
pub use raster::{rasterize, DomainSpec, GridSidecar, PermittivityGrid, SUBSAMPLES};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lattice constant, hole radius, slab thickness and lateral extent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub a_nm: f64,
    pub r_nm: f64,
    pub d_nm: f64,
    pub n_slab: f64,
    #[serde(default = "default_n_bg")]
    pub n_bg: f64,
    /// Half-extent along x, in lattice periods.
    pub nx: u32,
    /// Half-extent along y, in hole rows.
    pub ny: u32,
}

fn default_n_bg() -> f64 {
    1.0
}

impl LatticeSpec {
    /// GaAs membrane with a = 260 nm, r = 61 nm, d = 130 nm.
    pub fn gaas_l4_3() -> Self {
        LatticeSpec { a_nm: 260.0, r_nm: 61.0, d_nm: 130.0, n_slab: 3.46, n_bg: 1.0, nx: 10, ny: 7 }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.a_nm, self.r_nm, self.d_nm, self.n_slab, self.n_bg].iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::param("lattice parameters must be finite"));
        }
        if self.a_nm <= 0.0 {
            return Err(Error::param(format!("lattice constant must be positive, got {}", self.a_nm)));
        }
        if !(self.r_nm > 0.0 && self.r_nm < self.a_nm / 2.0) {
            return Err(Error::param(format!("hole radius {} nm must lie in (0, a/2)", self.r_nm)));
        }
        if self.d_nm <= 0.0 {
            return Err(Error::param(format!("slab thickness must be positive, got {}", self.d_nm)));
        }
        if !(self.n_bg >= 1.0 && self.n_slab > self.n_bg) {
            return Err(Error::param(format!(
                "need n_slab > n_bg >= 1, got n_slab = {}, n_bg = {}",
                self.n_slab, self.n_bg
            )));
        }
        if self.nx == 0 || self.ny == 0 {
            return Err(Error::param("lattice extent must be at least one period"));
        }
        Ok(())
    }

    pub fn eps_slab(&self) -> f64 {
        self.n_slab * self.n_slab
    }

    pub fn eps_bg(&self) -> f64 {
        self.n_bg * self.n_bg
    }

    /// Row pitch `a * sqrt(3) / 2`.
    pub fn row_pitch_nm(&self) -> f64 {
        self.a_nm * 3f64.sqrt() / 2.0
    }
}

/// Hole displacements in units of `a`, positive pointing away from the
/// mirror plane they are measured against.
///
/// The x shifts `sx[0..7]` act on, in order: the inner and outer inserted
/// holes of the L4/3 defect, the row-0 lattice holes at 2a, 3a, 4a, and the
/// row-1 holes at a/2 and 3a/2. The y shifts `sy[0..4]` act on the row-1
/// holes at a/2, 3a/2, 5a/2 and 7a/2. Every shift is replicated to all four
/// mirror images.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ShiftSet {
    pub sx: [f64; 7],
    pub sy: [f64; 4],
}

impl ShiftSet {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<()> {
        for (name, vals) in [("sx", &self.sx[..]), ("sy", &self.sy[..])] {
            for (i, v) in vals.iter().enumerate() {
                if !v.is_finite() || v.abs() >= 0.5 {
                    return Err(Error::param(format!(
                        "shift {name}{} = {v} must satisfy |shift| < 0.5 (units of a)",
                        i + 1
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModulationPattern {
    /// Signs alternate from hole to hole along x (period 2a), even in x and y.
    #[default]
    DoublePeriodic,
}

/// Radius modulation `r -> r (1 +- delta_r_frac)` around the cavity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulationSpec {
    pub delta_r_frac: f64,
    pub region_rings: u32,
    #[serde(default)]
    pub pattern: ModulationPattern,
}

impl ModulationSpec {
    pub fn new(delta_r_frac: f64) -> Self {
        ModulationSpec { delta_r_frac, region_rings: 5, pattern: ModulationPattern::DoublePeriodic }
    }

    /// Negative fractions are accepted so that a modulation can be undone.
    pub fn validate(&self) -> Result<()> {
        if !self.delta_r_frac.is_finite() || self.delta_r_frac.abs() >= 0.5 {
            return Err(Error::param(format!(
                "radius modulation {} must satisfy |delta_r_frac| < 0.5",
                self.delta_r_frac
            )));
        }
        Ok(())
    }
}

/// Nominal (pre-shift) lattice site a hole came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) enum Site {
    /// Triangular-lattice site: x = col2 * a/2, y = row * a sqrt(3)/2.
    Lattice { row: i32, col2: i32 },
    /// Hole inserted into the L4/3 defect: x = slot * 3a/8, y = 0.
    Inserted { slot: i32 },
}

impl Site {
    /// Nominal x, y in units of `a`.
    pub(crate) fn nominal(&self) -> (f64, f64) {
        match *self {
            Site::Lattice { row, col2 } => (col2 as f64 / 2.0, row as f64 * 3f64.sqrt() / 2.0),
            Site::Inserted { slot } => (slot as f64 * 3.0 / 8.0, 0.0),
        }
    }

    pub(crate) fn row(&self) -> i32 {
        match *self {
            Site::Lattice { row, .. } => row,
            Site::Inserted { .. } => 0,
        }
    }
}

/// A circular air hole.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Hole {
    pub x: f64,
    pub y: f64,
    pub radius: f64,
    #[serde(skip)]
    pub(crate) site: Site,
    /// Accumulated signed radius modulation, as a fraction of the nominal radius.
    #[serde(skip)]
    pub(crate) dr_frac: f64,
}

impl Hole {
    pub(crate) fn at_site(site: Site, a_nm: f64, radius: f64) -> Self {
        let (x, y) = site.nominal();
        Hole { x: x * a_nm, y: y * a_nm, radius, site, dr_frac: 0.0 }
    }

    pub fn distance_to(&self, other: &Hole) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CavityKind {
    L3,
    #[serde(rename = "L4/3")]
    L4_3,
    Bulk,
}

impl std::str::FromStr for CavityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l3" => Ok(CavityKind::L3),
            "l4-3" | "l4/3" | "l4_3" => Ok(CavityKind::L4_3),
            "bulk" => Ok(CavityKind::Bulk),
            other => Err(Error::param(format!("unknown cavity kind '{other}'"))),
        }
    }
}
