//! Yee-grid FDTD solver in normalized units (`c = 1`, `a = 1`, `eps0 = mu0 = 1`).
//!
//! Field components live on the usual staggered positions relative to the
//! nodes of the [`PermittivityGrid`](crate::geometry::PermittivityGrid):
//! `Ex` at `(i+1/2, j, k)`, `Ey` at `(i, j+1/2, k)`, `Ez` at `(i, j, k+1/2)`,
//! `Hx` at `(i, j+1/2, k+1/2)` and so on. All six arrays share the node
//! layout (x fastest); entries past the last staggered position are unused.
//!
//! Each face of the box is a PEC wall, a PMC wall, or a convolutional PML
//! backed by PEC. Mirror symmetry about a low face is expressed as a PMC
//! (E even) or PEC (E odd) wall through the symmetry plane.

mod dft;
mod engine;
mod pml;
mod series;

pub use dft::{snapshot_dft, DftAccumulator, FieldSnapshot, SnapshotSidecar};
pub use engine::{RunOutput, Simulation};
pub use series::TimeSeries;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Courant factor used unless configured otherwise.
pub const DEFAULT_COURANT: f64 = 0.5;

/// Time step for cubic cells of side `spacing` (units of a):
/// `dt = courant_factor * spacing / sqrt(3)`.
///
/// The 3D Yee bound is `dt <= spacing / sqrt(3)`, so the factor must lie in `(0, 1]`.
pub fn stable_dt(spacing: f64, courant_factor: f64) -> Result<f64> {
    if !(spacing.is_finite() && spacing > 0.0) {
        return Err(Error::param(format!("grid spacing must be positive, got {spacing}")));
    }
    if !(courant_factor.is_finite() && courant_factor > 0.0) {
        return Err(Error::Stability(format!("Courant factor must be positive, got {courant_factor}")));
    }
    if courant_factor > 1.0 {
        return Err(Error::Stability(format!(
            "Courant factor {courant_factor} exceeds the normalized 3D bound of 1 (dt <= h / sqrt(3))"
        )));
    }
    Ok(courant_factor * spacing / 3f64.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Component {
    Ex,
    Ey,
    Ez,
    Hx,
    Hy,
    Hz,
}

impl Component {
    pub fn is_electric(self) -> bool {
        matches!(self, Component::Ex | Component::Ey | Component::Ez)
    }

    /// Axis 0..3 the component points along.
    pub fn axis(self) -> usize {
        match self {
            Component::Ex | Component::Hx => 0,
            Component::Ey | Component::Hy => 1,
            Component::Ez | Component::Hz => 2,
        }
    }
}

/// Parity of the electric field under a mirror through the low face of an axis.
///
/// `Even` keeps the tangential E components even (and the normal one odd),
/// which is a PMC wall; `Odd` is a PEC wall.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Symmetry {
    #[default]
    None,
    Even,
    Odd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Wall {
    Pec,
    Pmc,
    /// Absorbing layer terminated by PEC.
    Pml,
}

/// Walls `[low, high]` per axis.
pub type Walls = [[Wall; 2]; 3];

/// Open box: PML everywhere except on low faces that carry a mirror symmetry.
pub fn open_walls(symmetries: [Symmetry; 3]) -> Walls {
    let mut w = [[Wall::Pml; 2]; 3];
    for ax in 0..3 {
        w[ax][0] = match symmetries[ax] {
            Symmetry::None => Wall::Pml,
            Symmetry::Even => Wall::Pmc,
            Symmetry::Odd => Wall::Pec,
        };
    }
    w
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PmlProfile {
    /// Polynomial grading order of the conductivity.
    pub order: f64,
    /// Peak conductivity; `None` picks `0.8 (order + 1) / h`.
    pub sigma_max: Option<f64>,
    /// Complex-frequency shift at the inner PML interface (c/a units).
    pub alpha_max: f64,
}

impl Default for PmlProfile {
    fn default() -> Self {
        PmlProfile { order: 4.0, sigma_max: None, alpha_max: 0.0 }
    }
}

/// Gaussian-pulsed point current.
///
/// The pulse is `amplitude * exp(-(t - t0)^2 / (2 tau^2)) * sin(2 pi f (t - t0))`
/// with `tau = 1 / (2 pi bandwidth)` (so `bandwidth` is the spectral standard
/// deviation). It is switched off at the first step boundary after `6 tau`
/// unless `turn_off_step` says otherwise, and `t0` is the middle of that
/// default on-window (about `3 tau`). The samples taken at half steps are then
/// odd about `t0`, so the pulse leaves no static charge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DipoleSource {
    pub position: [usize; 3],
    #[serde(default = "default_component")]
    pub component: Component,
    pub center_frequency: f64,
    pub bandwidth: f64,
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default)]
    pub turn_off_step: Option<u64>,
}

fn default_component() -> Component {
    Component::Ey
}

fn one() -> f64 {
    1.0
}

impl DipoleSource {
    pub fn tau(&self) -> f64 {
        1.0 / (2.0 * std::f64::consts::PI * self.bandwidth)
    }

    pub fn off_step(&self, dt: f64) -> u64 {
        self.turn_off_step.unwrap_or_else(|| self.natural_off_step(dt))
    }

    fn natural_off_step(&self, dt: f64) -> u64 {
        (6.0 * self.tau() / dt).ceil() as u64
    }

    /// Pulse centre.
    pub fn t0(&self, dt: f64) -> f64 {
        0.5 * self.natural_off_step(dt) as f64 * dt
    }

    /// Source waveform at time `t`.
    pub fn waveform(&self, t: f64, dt: f64) -> f64 {
        if t >= self.off_step(dt) as f64 * dt {
            return 0.0;
        }
        let tau = self.tau();
        let s = t - self.t0(dt);
        self.amplitude * (-s * s / (2.0 * tau * tau)).exp() * (2.0 * std::f64::consts::PI * self.center_frequency * s).sin()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbePoint {
    pub name: String,
    pub position: [usize; 3],
    pub component: Component,
}

/// Running-DFT snapshot of E over the last `window_steps` steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnapshotSpec {
    pub frequency: f64,
    pub window_steps: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    #[serde(default = "default_courant")]
    pub courant_factor: f64,
    #[serde(default = "default_pml_cells")]
    pub pml_cells: usize,
    #[serde(default)]
    pub pml_profile: PmlProfile,
    #[serde(default)]
    pub symmetries: [Symmetry; 3],
    /// Explicit walls; derived from `symmetries` when absent.
    #[serde(default)]
    pub walls: Option<Walls>,
    pub total_steps: u64,
    #[serde(default)]
    pub sources: Vec<DipoleSource>,
    #[serde(default)]
    pub probes: Vec<ProbePoint>,
    /// First step recorded by the probes; defaults to the last source turn-off.
    #[serde(default)]
    pub record_from_step: Option<u64>,
    #[serde(default)]
    pub snapshot: Option<SnapshotSpec>,
    /// Worker threads for the stepping loop (`None` uses the global pool).
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default = "default_memory_limit")]
    pub max_memory_bytes: u64,
}

fn default_courant() -> f64 {
    DEFAULT_COURANT
}

fn default_pml_cells() -> usize {
    12
}

fn default_memory_limit() -> u64 {
    4 << 30
}

impl SimConfig {
    pub fn new(total_steps: u64) -> Self {
        SimConfig {
            courant_factor: DEFAULT_COURANT,
            pml_cells: default_pml_cells(),
            pml_profile: PmlProfile::default(),
            symmetries: [Symmetry::None; 3],
            walls: None,
            total_steps,
            sources: Vec::new(),
            probes: Vec::new(),
            record_from_step: None,
            snapshot: None,
            threads: None,
            max_memory_bytes: default_memory_limit(),
        }
    }

    pub fn resolved_walls(&self) -> Walls {
        self.walls.unwrap_or_else(|| open_walls(self.symmetries))
    }

    /// Parity per axis actually realised by the walls (for mode-volume weighting).
    pub fn mirror_parities(&self) -> [Symmetry; 3] {
        self.symmetries
    }

    pub(crate) fn validate(&self, dims: [usize; 3]) -> Result<()> {
        stable_dt(1.0, self.courant_factor)?;
        let walls = self.resolved_walls();
        let any_pml = walls.iter().flatten().any(|w| *w == Wall::Pml);
        if any_pml && self.pml_cells < 8 {
            return Err(Error::param(format!("PML needs at least 8 cells, got {}", self.pml_cells)));
        }
        for ax in 0..3 {
            if dims[ax] < 2 {
                return Err(Error::param(format!("grid needs at least 2 nodes along axis {ax}")));
            }
            let pml_nodes = walls[ax].iter().filter(|w| **w == Wall::Pml).count() * (self.pml_cells + 1);
            if pml_nodes >= dims[ax] {
                return Err(Error::param(format!(
                    "axis {ax}: {} nodes cannot hold {} PML layers of {} cells",
                    dims[ax],
                    pml_nodes / (self.pml_cells + 1),
                    self.pml_cells
                )));
            }
            match (self.symmetries[ax], walls[ax][0]) {
                (Symmetry::Even, Wall::Pmc) | (Symmetry::Odd, Wall::Pec) | (Symmetry::None, _) => {}
                (s, w) => {
                    return Err(Error::param(format!("axis {ax}: symmetry {s:?} conflicts with low wall {w:?}")))
                }
            }
        }
        let inside = |p: [usize; 3]| {
            (0..3).all(|ax| {
                let lo = if walls[ax][0] == Wall::Pml { self.pml_cells } else { 0 };
                let hi = if walls[ax][1] == Wall::Pml { dims[ax] - 1 - self.pml_cells } else { dims[ax] - 1 };
                p[ax] >= lo && p[ax] <= hi
            })
        };
        for s in &self.sources {
            if !(s.bandwidth.is_finite() && s.bandwidth > 0.0) {
                return Err(Error::param(format!("source bandwidth must be positive, got {}", s.bandwidth)));
            }
            if !s.component.is_electric() {
                return Err(Error::param("dipole sources drive electric components only"));
            }
            if !inside(s.position) {
                return Err(Error::param(format!("source at {:?} lies outside the non-PML region", s.position)));
            }
        }
        for p in &self.probes {
            if (0..3).any(|ax| p.position[ax] >= dims[ax]) {
                return Err(Error::param(format!("probe '{}' at {:?} lies outside the grid", p.name, p.position)));
            }
        }
        if let Some(snap) = &self.snapshot {
            if !(snap.frequency.is_finite() && snap.frequency > 0.0) {
                return Err(Error::param("snapshot frequency must be positive"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dt_formula() {
        let dt = stable_dt(1.0 / 20.0, 0.5).unwrap();
        assert!((dt - 0.5 / (20.0 * 3f64.sqrt())).abs() < 1e-15);
        assert!((dt - 0.014434).abs() < 1e-6);
    }

    #[test]
    fn dt_rejects_degenerate_and_unstable_factors() {
        assert!(matches!(stable_dt(0.05, 0.0), Err(Error::Stability(_))));
        assert!(matches!(stable_dt(0.05, 1.01), Err(Error::Stability(_))));
        assert!(stable_dt(0.0, 0.5).is_err());
    }

    #[test]
    fn dt_halves_with_doubled_resolution() {
        let a = stable_dt(1.0 / 20.0, 0.5).unwrap();
        let b = stable_dt(1.0 / 40.0, 0.5).unwrap();
        assert!((a / b - 2.0).abs() < 1e-14);
    }

    #[test]
    fn walls_follow_symmetries() {
        let w = open_walls([Symmetry::Even, Symmetry::Odd, Symmetry::None]);
        assert_eq!(w[0], [Wall::Pmc, Wall::Pml]);
        assert_eq!(w[1], [Wall::Pec, Wall::Pml]);
        assert_eq!(w[2], [Wall::Pml, Wall::Pml]);
    }

    #[test]
    fn source_waveform_switches_off() {
        let s = DipoleSource {
            position: [0; 3],
            component: Component::Ey,
            center_frequency: 0.268,
            bandwidth: 0.0268,
            amplitude: 2.0,
            turn_off_step: None,
        };
        let dt = 0.01;
        let t0 = s.t0(dt);
        assert!((t0 - 3.0 * s.tau()).abs() <= dt);
        assert_eq!(s.waveform(t0, dt), 0.0);
        let quarter = 0.25 / 0.268;
        let env = (-quarter * quarter / (2.0 * s.tau() * s.tau())).exp();
        assert!((s.waveform(t0 + quarter, dt) - 2.0 * env).abs() < 1e-12);
        assert_eq!(s.waveform(6.0 * s.tau() + dt, dt), 0.0);
        // half-step samples cancel
        let n = s.off_step(dt);
        let net: f64 = (0..n).map(|k| s.waveform((k as f64 + 0.5) * dt, dt)).sum();
        assert!(net.abs() < 1e-12, "{net}");
    }
}
