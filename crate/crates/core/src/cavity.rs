//! Resonance, Q and mode volume of a slab cavity design from two FDTD runs.
//!
//! The first run rings the cavity down and feeds the probe record to harmonic
//! inversion. The second run repeats the excitation and accumulates a DFT of E
//! at the dominant frequency, from which the mode volume follows.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fdtd::{Component, DipoleSource, PmlProfile, ProbePoint, SimConfig, Simulation, SnapshotSpec, Symmetry, TimeSeries};
use crate::geometry::{rasterize, CavityDesign, DomainSpec, PermittivityGrid};
use crate::modes::{harmonic_inversion, mode_volume, ModeVolume, ResonantMode, N_REF_DEFAULT};

/// Mirror parities of E for the Ey-dominant fundamental mode.
pub const FUNDAMENTAL_SYMMETRIES: [Symmetry; 3] = [Symmetry::Even, Symmetry::Odd, Symmetry::Even];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CavityRunOptions {
    /// Grid cells per lattice constant.
    pub resolution: usize,
    /// Air beyond the outermost hole centres, in units of a.
    pub air_xy: f64,
    /// Air above the slab surface, in units of a.
    pub air_z: f64,
    pub pml_cells: usize,
    pub pml_profile: PmlProfile,
    pub courant_factor: f64,
    /// Source centre frequency (c/a).
    pub center_frequency: f64,
    /// Source bandwidth as a fraction of `center_frequency`.
    pub fractional_bandwidth: f64,
    /// Harmonic-inversion band (c/a).
    pub band: (f64, f64),
    pub max_poles: usize,
    /// Ring-down record length after the source turns off, in source periods.
    pub ringdown_periods: f64,
    /// Settling time between source turn-off and the DFT window, in periods.
    pub snapshot_delay_periods: f64,
    /// DFT window length in periods of the resonance.
    pub snapshot_periods: f64,
    /// Skip the second run (no mode volume).
    pub skip_volume: bool,
    pub n_ref: f64,
    pub threads: Option<usize>,
}

impl Default for CavityRunOptions {
    fn default() -> Self {
        CavityRunOptions {
            resolution: 20,
            air_xy: 0.5,
            air_z: 0.75,
            pml_cells: 12,
            pml_profile: PmlProfile::default(),
            courant_factor: 0.9,
            center_frequency: 0.268,
            fractional_bandwidth: 0.1,
            band: (0.23, 0.31),
            max_poles: 8,
            ringdown_periods: 250.0,
            snapshot_delay_periods: 20.0,
            snapshot_periods: 40.0,
            skip_volume: false,
            n_ref: N_REF_DEFAULT,
            threads: None,
        }
    }
}

impl CavityRunOptions {
    pub fn validate(&self) -> Result<()> {
        if self.resolution < 4 {
            return Err(Error::param("resolution must be at least 4 cells per a"));
        }
        let positive = [self.center_frequency, self.fractional_bandwidth, self.ringdown_periods, self.snapshot_periods, self.n_ref];
        if positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::param("frequencies, record lengths and n_ref must be positive"));
        }
        if !(self.air_xy >= 0.0 && self.air_z >= 0.0 && self.snapshot_delay_periods >= 0.0) {
            return Err(Error::param("air padding and delays must be non-negative"));
        }
        if !(self.band.0 < self.band.1) {
            return Err(Error::param("band must be increasing"));
        }
        if self.max_poles == 0 {
            return Err(Error::param("max_poles must be positive"));
        }
        Ok(())
    }

    /// Symmetry-reduced computational domain, PML placed outside the air padding.
    pub fn domain(&self, design: &CavityDesign) -> DomainSpec {
        let pml = self.pml_cells as f64 / self.resolution as f64;
        DomainSpec::around(design, self.air_xy + pml, self.air_z + pml, [true; 3])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CavityReport {
    pub resolution: usize,
    pub dims: [usize; 3],
    pub dt: f64,
    pub ringdown_steps: u64,
    /// Dominant in-band mode (largest amplitude), with wavelength and V when known.
    pub mode: ResonantMode,
    pub modes: Vec<ResonantMode>,
    pub notices: Vec<String>,
    pub volume: Option<ModeVolume>,
    /// Node of the largest `|Ey|` in the snapshot.
    pub ey_peak_node: Option<[usize; 3]>,
    pub ey_peak_eps: Option<f64>,
    pub probe: TimeSeries,
}

impl CavityReport {
    /// True when the `|Ey|` maximum sits within one cell of the cavity centre in dielectric.
    pub fn ey_peak_at_center(&self, eps_slab: f64) -> bool {
        match (self.ey_peak_node, self.ey_peak_eps) {
            (Some(p), Some(e)) => p.iter().all(|&i| i <= 1) && (e - eps_slab).abs() < 1e-9 * eps_slab,
            _ => false,
        }
    }
}

fn source(opts: &CavityRunOptions) -> DipoleSource {
    DipoleSource {
        // one cell off the centre along x
        position: [1, 0, 0],
        component: Component::Ey,
        center_frequency: opts.center_frequency,
        bandwidth: opts.fractional_bandwidth * opts.center_frequency,
        amplitude: 1.0,
        turn_off_step: None,
    }
}

fn config(opts: &CavityRunOptions, total_steps: u64) -> SimConfig {
    let mut cfg = SimConfig::new(total_steps);
    cfg.courant_factor = opts.courant_factor;
    cfg.pml_cells = opts.pml_cells;
    cfg.pml_profile = opts.pml_profile;
    cfg.symmetries = FUNDAMENTAL_SYMMETRIES;
    cfg.sources = vec![source(opts)];
    cfg.threads = opts.threads;
    cfg
}

/// Rasterises the symmetry-reduced domain of `design`.
pub fn cavity_grid(design: &CavityDesign, opts: &CavityRunOptions) -> Result<PermittivityGrid> {
    opts.validate()?;
    rasterize(design, opts.resolution, &opts.domain(design))
}

/// Ring-down run plus harmonic inversion; returns the probe record and the extracted modes.
pub fn ringdown(grid: &PermittivityGrid, opts: &CavityRunOptions) -> Result<(TimeSeries, Vec<ResonantMode>, Vec<String>)> {
    let h = 1.0 / opts.resolution as f64;
    let dt = crate::fdtd::stable_dt(h, opts.courant_factor)?;
    let off = source(opts).off_step(dt);
    let steps = off + (opts.ringdown_periods / (opts.center_frequency * dt)).ceil() as u64;
    let mut cfg = config(opts, steps);
    cfg.probes = vec![
        ProbePoint { name: "ey_center".into(), position: [1, 0, 0], component: Component::Ey },
        ProbePoint { name: "ey_offset".into(), position: [3, 2, 0], component: Component::Ey },
    ];
    let out = Simulation::new(grid, cfg)?.run()?;
    let probe = out.series.into_iter().next().ok_or_else(|| Error::Invariant("ring-down run recorded no probe".into()))?;
    let inv = harmonic_inversion(&probe, opts.band, opts.max_poles)?;
    let modes = inv.modes.into_iter().map(|m| m.with_lattice(grid.a_nm)).collect();
    Ok((probe, modes, inv.notices))
}

/// Full characterisation: resonance and Q from the ring-down, V from a DFT snapshot.
pub fn characterize(design: &CavityDesign, opts: &CavityRunOptions) -> Result<CavityReport> {
    let grid = cavity_grid(design, opts)?;
    let (probe, modes, mut notices) = ringdown(&grid, opts)?;
    let mut mode = modes
        .first()
        .cloned()
        .ok_or_else(|| Error::Degenerate(format!("no resonance found in band {:?}", opts.band)))?;
    let dt = probe.dt;
    let ringdown_steps = probe.first_step + probe.values.len() as u64 - 1;

    let (mut volume, mut ey_peak_node, mut ey_peak_eps) = (None, None, None);
    if !opts.skip_volume {
        let off = source(opts).off_step(dt);
        let per_step = mode.frequency * dt;
        let delay = (opts.snapshot_delay_periods / per_step).ceil() as u64;
        let window = (opts.snapshot_periods / per_step).round() as u64;
        let mut cfg = config(opts, off + delay + window);
        cfg.snapshot = Some(SnapshotSpec { frequency: mode.frequency, window_steps: window });
        let snap = Simulation::new(&grid, cfg)?
            .run()?
            .snapshot
            .ok_or_else(|| Error::Invariant("snapshot run returned no snapshot".into()))?;
        let wl = mode.wavelength_nm.ok_or_else(|| Error::Invariant("mode without wavelength".into()))?;
        let v = mode_volume(&snap, &grid, wl, opts.n_ref)?;
        let (imax, _) = snap.e[1]
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
            .ok_or_else(|| Error::Degenerate("empty snapshot".into()))?;
        let [nx, ny, _] = grid.dims;
        ey_peak_node = Some([imax % nx, (imax / nx) % ny, imax / (nx * ny)]);
        ey_peak_eps = Some(grid.eps[imax]);
        mode.v_norm = Some(v.v_norm);
        volume = Some(v);
    } else {
        notices.push("mode volume skipped".into());
    }
    Ok(CavityReport {
        resolution: opts.resolution,
        dims: grid.dims,
        dt,
        ringdown_steps,
        mode,
        modes,
        notices,
        volume,
        ey_peak_node,
        ey_peak_eps,
        probe,
    })
}
