use serde::{Deserialize, Serialize};

use super::lattice::build_bulk_lattice;
use super::{CavityKind, Hole, LatticeSpec, ModulationSpec, ShiftSet, Site};
use crate::error::{Error, Result};

/// Shipped default L4/3 design (`designs/l4_3_minkov.json`).
pub const DEFAULT_L4_3_DESIGN: &str = include_str!("../../../../designs/l4_3_minkov.json");

/// Mirror-symmetry tolerance on hole coordinates, nm.
const SYMMETRY_TOL_NM: f64 = 1e-9;

/// Holes farther than this from the centre (units of a) are not shifted and
/// cannot collide, so the overlap check ignores them.
const CAVITY_REGION_A: f64 = 6.0;

/// Full geometric description of a slab cavity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CavityDesign {
    pub lattice: LatticeSpec,
    pub holes: Vec<Hole>,
    pub kind: CavityKind,
    pub shifts: ShiftSet,
    pub modulation: Option<ModulationSpec>,
}

impl CavityDesign {
    pub fn bulk(lattice: LatticeSpec) -> Result<Self> {
        let holes = build_bulk_lattice(&lattice)?;
        Ok(CavityDesign { lattice, holes, kind: CavityKind::Bulk, shifts: ShiftSet::zero(), modulation: None })
    }

    /// The shipped L4/3 design.
    pub fn default_l4_3() -> Result<Self> {
        DesignFile::from_json(DEFAULT_L4_3_DESIGN)?.build()
    }

    /// Every hole has its three mirror images (about x = 0, y = 0 and both).
    pub fn check_mirror_symmetry(&self) -> Result<()> {
        let find = |x: f64, y: f64, r: f64| {
            self.holes.iter().any(|h| {
                (h.x - x).abs() <= SYMMETRY_TOL_NM
                    && (h.y - y).abs() <= SYMMETRY_TOL_NM
                    && (h.radius - r).abs() <= SYMMETRY_TOL_NM
            })
        };
        for (i, h) in self.holes.iter().enumerate() {
            for (sx, sy) in [(-1.0, 1.0), (1.0, -1.0), (-1.0, -1.0)] {
                if !find(sx * h.x, sy * h.y, h.radius) {
                    return Err(Error::Invariant(format!(
                        "hole {i} at ({:.6}, {:.6}) nm has no mirror image at ({:.6}, {:.6})",
                        h.x,
                        h.y,
                        sx * h.x,
                        sy * h.y
                    )));
                }
            }
        }
        Ok(())
    }

    /// No two holes near the cavity intersect.
    pub fn check_overlaps(&self) -> Result<()> {
        let reach = CAVITY_REGION_A * self.lattice.a_nm;
        let near: Vec<usize> =
            (0..self.holes.len()).filter(|&i| self.holes[i].x.hypot(self.holes[i].y) <= reach).collect();
        for (n, &i) in near.iter().enumerate() {
            for &j in &near[n + 1..] {
                let (p, q) = (&self.holes[i], &self.holes[j]);
                let d = p.distance_to(q);
                if d <= p.radius + q.radius {
                    return Err(Error::HoleOverlap {
                        first: i,
                        second: j,
                        distance_nm: d,
                        radius_sum_nm: p.radius + q.radius,
                    });
                }
            }
        }
        Ok(())
    }

    /// Narrowest dielectric bridge between two holes whose centres lie within
    /// `radius_a` lattice constants of the cavity centre, in nm.
    pub fn min_dielectric_gap_nm(&self, radius_a: f64) -> Option<f64> {
        let reach = radius_a * self.lattice.a_nm;
        let near: Vec<&Hole> = self.holes.iter().filter(|h| h.x.hypot(h.y) <= reach).collect();
        let mut best: Option<f64> = None;
        for (n, p) in near.iter().enumerate() {
            for q in &near[n + 1..] {
                let gap = p.distance_to(q) - p.radius - q.radius;
                best = Some(best.map_or(gap, |b: f64| b.min(gap)));
            }
        }
        best
    }

    /// Lateral extent of the hole pattern (max |x| + r, max |y| + r), nm.
    pub fn hole_extent_nm(&self) -> (f64, f64) {
        self.holes.iter().fold((0.0f64, 0.0f64), |(ex, ey), h| {
            (ex.max(h.x.abs() + h.radius), ey.max(h.y.abs() + h.radius))
        })
    }

    pub fn to_file(&self, meta: DesignMeta) -> DesignFile {
        DesignFile {
            lattice: self.lattice,
            kind: self.kind,
            shifts: self.shifts,
            modulation: self.modulation,
            meta,
        }
    }

    fn sort_holes(&mut self) {
        self.holes.sort_by(|p, q| {
            let (px, _) = p.site.nominal();
            let (qx, _) = q.site.nominal();
            p.site.row().cmp(&q.site.row()).then(px.total_cmp(&qx))
        });
    }
}

/// L3 cavity: the holes at x = -a, 0, +a of row 0 removed.
///
/// The lattice-hole shifts of `shifts` apply as for L4/3; `sx1` and `sx2`
/// address the inserted L4/3 holes and must be zero here.
pub fn make_l3(spec: LatticeSpec, shifts: ShiftSet) -> Result<CavityDesign> {
    shifts.validate()?;
    if shifts.sx[0] != 0.0 || shifts.sx[1] != 0.0 {
        return Err(Error::param("sx1 and sx2 shift the inserted L4/3 holes and must be zero for an L3 cavity"));
    }
    let mut holes = build_bulk_lattice(&spec)?;
    holes.retain(|h| !is_removed_site(h.site));
    finish(spec, holes, CavityKind::L3, shifts)
}

/// L4/3 cavity: the L3 defect refilled with four holes at equal spacing 3a/4
/// (x = +-3a/8, +-9a/8), then shifted by `shifts`.
pub fn make_l4_3(spec: LatticeSpec, shifts: ShiftSet) -> Result<CavityDesign> {
    shifts.validate()?;
    let mut holes = build_bulk_lattice(&spec)?;
    holes.retain(|h| !is_removed_site(h.site));
    for slot in [-3, -1, 1, 3] {
        holes.push(Hole::at_site(Site::Inserted { slot }, spec.a_nm, spec.r_nm));
    }
    finish(spec, holes, CavityKind::L4_3, shifts)
}

fn is_removed_site(site: Site) -> bool {
    matches!(site, Site::Lattice { row: 0, col2 } if col2.abs() <= 2)
}

fn finish(spec: LatticeSpec, mut holes: Vec<Hole>, kind: CavityKind, shifts: ShiftSet) -> Result<CavityDesign> {
    for h in &mut holes {
        let (dx, dy) = shift_of(h.site, &shifts);
        let (nx, ny) = h.site.nominal();
        h.x += nx.signum() * dx * spec.a_nm * f64::from(nx != 0.0);
        h.y += ny.signum() * dy * spec.a_nm * f64::from(ny != 0.0);
    }
    let mut design = CavityDesign { lattice: spec, holes, kind, shifts, modulation: None };
    design.sort_holes();
    design.check_overlaps()?;
    design.check_mirror_symmetry()?;
    Ok(design)
}

/// Outward (x, y) displacement of a site, in units of a.
fn shift_of(site: Site, s: &ShiftSet) -> (f64, f64) {
    match site {
        Site::Inserted { slot } => match slot.abs() {
            1 => (s.sx[0], 0.0),
            3 => (s.sx[1], 0.0),
            _ => (0.0, 0.0),
        },
        Site::Lattice { row: 0, col2 } => match col2.abs() {
            4 => (s.sx[2], 0.0),
            6 => (s.sx[3], 0.0),
            8 => (s.sx[4], 0.0),
            _ => (0.0, 0.0),
        },
        Site::Lattice { row, col2 } if row.abs() == 1 => match col2.abs() {
            1 => (s.sx[5], s.sy[0]),
            3 => (s.sx[6], s.sy[1]),
            5 => (0.0, s.sy[2]),
            7 => (0.0, s.sy[3]),
            _ => (0.0, 0.0),
        },
        Site::Lattice { .. } => (0.0, 0.0),
    }
}

/// Sign of the double-periodic modulation at a site: alternates from hole to
/// hole along x with period 2a and is even about both mirror planes.
fn modulation_sign(site: Site) -> f64 {
    let (x, _) = site.nominal();
    let m = (x.abs() + 1e-9).floor() as i64;
    if m % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Double-periodic radius modulation of the holes within `region_rings * a`
/// of the centre.
///
/// Radii are recomputed from the nominal radius and an accumulated fraction,
/// so applying `+delta` and then `-delta` restores the original radii exactly.
pub fn apply_modulation(design: &CavityDesign, modulation: &ModulationSpec) -> Result<CavityDesign> {
    modulation.validate()?;
    let mut out = design.clone();
    let reach = modulation.region_rings as f64 + 1e-9;
    let r0 = out.lattice.r_nm;
    for h in &mut out.holes {
        let (x, y) = h.site.nominal();
        if x.hypot(y) <= reach {
            h.dr_frac += modulation_sign(h.site) * modulation.delta_r_frac;
            h.radius = r0 * (1.0 + h.dr_frac);
        }
    }
    let combined = design.modulation.map_or(modulation.delta_r_frac, |m| m.delta_r_frac + modulation.delta_r_frac);
    out.modulation = (combined != 0.0).then_some(ModulationSpec { delta_r_frac: combined, ..*modulation });
    out.check_mirror_symmetry()?;
    out.check_overlaps()?;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignMeta {
    pub source: String,
    #[serde(flatten)]
    pub extra: serde_json::Map<String, serde_json::Value>,
}

/// On-disk design description; holes are regenerated from the parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignFile {
    pub lattice: LatticeSpec,
    pub kind: CavityKind,
    pub shifts: ShiftSet,
    pub modulation: Option<ModulationSpec>,
    pub meta: DesignMeta,
}

impl DesignFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn build(&self) -> Result<CavityDesign> {
        let base = match self.kind {
            CavityKind::L4_3 => make_l4_3(self.lattice, self.shifts)?,
            CavityKind::L3 => make_l3(self.lattice, self.shifts)?,
            CavityKind::Bulk => CavityDesign::bulk(self.lattice)?,
        };
        match &self.modulation {
            Some(m) => apply_modulation(&base, m),
            None => Ok(base),
        }
    }
}
