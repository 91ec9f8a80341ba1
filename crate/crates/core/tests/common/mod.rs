//! Solver measurements shared by the acceptance and validation suites.
#![allow(dead_code)]

use num_complex::Complex64;
use phc_core::fdtd::*;
use phc_core::geometry::PermittivityGrid;
use phc_core::modes::harmonic_inversion;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn vacuum(dims: [usize; 3], resolution: usize) -> PermittivityGrid {
    PermittivityGrid::uniform(dims, 260.0 / resolution as f64, 260.0, 1.0)
}

pub fn pulse(position: [usize; 3], component: Component, f: f64, bw: f64) -> DipoleSource {
    DipoleSource { position, component, center_frequency: f, bandwidth: bw, amplitude: 1.0, turn_off_step: None }
}

/// Lowest resonance of a PEC vacuum cube of side 1 at `resolution` cells per unit.
pub fn pec_cube_frequency(resolution: usize) -> f64 {
    let n = resolution + 1;
    let g = vacuum([n, n, n], resolution);
    let mut cfg = SimConfig::new(0);
    cfg.walls = Some([[Wall::Pec; 2]; 3]);
    // off-centre so every low-order mode is excited
    let p = [n * 3 / 10, n * 2 / 5, n / 2];
    cfg.sources = vec![pulse(p, Component::Ez, 0.7, 0.15)];
    cfg.probes = vec![ProbePoint { name: "ez".into(), position: [n * 3 / 5, n / 3, n / 2], component: Component::Ez }];
    let dt = stable_dt(1.0 / resolution as f64, cfg.courant_factor).unwrap();
    // 150 periods after the source turns off
    cfg.total_steps = cfg.sources[0].off_step(dt) + (150.0 / (0.7071 * dt)) as u64;
    let out = Simulation::new(&g, cfg).unwrap().run().unwrap();
    let inv = harmonic_inversion(&out.series[0], (0.6, 0.8), 4).unwrap();
    inv.modes.iter().max_by(|a, b| a.amplitude.norm().total_cmp(&b.amplitude.norm())).unwrap().frequency
}

/// Yee dispersion relation for the (1,1,0) mode of the unit cube.
pub fn pec_cube_discrete_frequency(resolution: usize, courant: f64) -> f64 {
    let h = 1.0 / resolution as f64;
    let dt = stable_dt(h, courant).unwrap();
    let k = (std::f64::consts::PI * h / 2.0).sin() / h;
    let s = dt * (2.0 * k * k).sqrt();
    s.asin() / (std::f64::consts::PI * dt)
}

/// Worst relative drift of the conserved energy over `steps` steps in a closed
/// PEC box with random permittivity and random initial H.
pub fn pec_energy_drift(steps: usize) -> f64 {
    let mut g = vacuum([11, 12, 13], 20);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for e in g.eps.iter_mut() {
        *e = rng.random_range(1.0..12.0);
    }
    let mut cfg = SimConfig::new(0);
    cfg.walls = Some([[Wall::Pec; 2]; 3]);
    let mut sim = Simulation::new(&g, cfg).unwrap();
    let [nx, ny, nz] = sim.dims();
    for c in [Component::Hx, Component::Hy, Component::Hz] {
        for k in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    sim.set_field(c, [i, j, k], rng.random_range(-1.0..1.0));
                }
            }
        }
    }
    sim.step().unwrap();
    let mut prev = sim.e_fields();
    sim.step().unwrap();
    let e0 = sim.conserved_energy(&prev);
    let mut worst: f64 = 0.0;
    for _ in 0..steps {
        prev = sim.e_fields();
        sim.step().unwrap();
        worst = worst.max(((sim.conserved_energy(&prev) - e0) / e0).abs());
    }
    worst
}

/// Probe record of a normally incident plane pulse in a waveguide of PEC (y)
/// and PMC (z) walls; the x extent is `nx` with PML on the high x face.
fn plane_pulse_probe(nx: usize, pml_cells: usize, profile: PmlProfile, probe_x: usize, steps: u64, f: f64) -> TimeSeries {
    let (ny, nz) = (3, 3);
    let g = vacuum([nx, ny, nz], 20);
    let mut cfg = SimConfig::new(steps);
    cfg.pml_cells = pml_cells;
    cfg.pml_profile = profile;
    cfg.walls = Some([[Wall::Pec, Wall::Pml], [Wall::Pec, Wall::Pec], [Wall::Pmc, Wall::Pmc]]);
    let src_x = 4;
    cfg.sources = (0..ny - 1)
        .flat_map(|j| (0..nz).map(move |k| [src_x, j, k]))
        .map(|p| pulse(p, Component::Ey, f, PLANE_BW * f))
        .collect();
    cfg.probes = vec![ProbePoint { name: "ey".into(), position: [probe_x, 0, 1], component: Component::Ey }];
    cfg.record_from_step = Some(0);
    Simulation::new(&g, cfg).unwrap().run().unwrap().series.remove(0)
}

fn dft(values: &[f64], dt: f64, f: f64) -> Complex64 {
    values
        .iter()
        .enumerate()
        .map(|(n, v)| v * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * f * n as f64 * dt))
        .sum()
}

/// Fractional bandwidth of the plane pulse.
const PLANE_BW: f64 = 0.1;

pub struct Reflection {
    /// `|DFT(reflected)| / |DFT(incident)|` at the centre frequency.
    pub at_center: f64,
    /// Peak reflected sample over peak incident sample.
    pub peak_ratio: f64,
}

/// Reflection of the default PML at normal incidence, measured against a
/// domain long enough that its own reflection never returns to the probe.
pub fn pml_reflection(pml_cells: usize) -> Reflection {
    pml_reflection_with(pml_cells, PmlProfile::default())
}

pub fn pml_reflection_with(pml_cells: usize, profile: PmlProfile) -> Reflection {
    let f = 0.268;
    let (nx, probe_x) = (120, 60);
    let dt = stable_dt(1.0 / 20.0, DEFAULT_COURANT).unwrap();
    // the reflected pulse has to pass the probe completely
    let steps = (2.0 * (nx - probe_x) as f64 / 20.0 / dt + 12.0 / (2.0 * std::f64::consts::PI * PLANE_BW * f) / dt) as u64 + 400;
    let short = plane_pulse_probe(nx, pml_cells, profile, probe_x, steps, f);
    let long = plane_pulse_probe(nx + 2 * (steps as f64 * dt * 20.0) as usize, pml_cells, profile, probe_x, steps, f);
    let refl: Vec<f64> = short.values.iter().zip(&long.values).map(|(a, b)| a - b).collect();
    let peak = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    Reflection {
        at_center: dft(&refl, dt, f).norm() / dft(&long.values, dt, f).norm(),
        peak_ratio: peak(&refl) / peak(&long.values),
    }
}
