mod common;

use common::{pulse, vacuum};
use phc_core::fdtd::*;
use phc_core::geometry::PermittivityGrid;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_medium(dims: [usize; 3], seed: u64) -> PermittivityGrid {
    let mut g = vacuum(dims, 20);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for e in g.eps.iter_mut() {
        *e = rng.random_range(1.0..12.0);
    }
    g
}

fn open_box_config(steps: u64) -> SimConfig {
    let mut cfg = SimConfig::new(steps);
    cfg.pml_cells = 8;
    cfg.sources = vec![pulse([12, 11, 10], Component::Ey, 0.3, 0.05)];
    cfg.probes = vec![
        ProbePoint { name: "a".into(), position: [14, 12, 10], component: Component::Ey },
        ProbePoint { name: "b".into(), position: [10, 9, 12], component: Component::Ex },
    ];
    cfg.record_from_step = Some(0);
    cfg
}

#[test]
fn zero_amplitude_source_gives_zero_series() {
    let g = random_medium([26, 24, 22], 1);
    let mut cfg = open_box_config(300);
    cfg.sources[0].amplitude = 0.0;
    let out = Simulation::new(&g, cfg).unwrap().run().unwrap();
    for s in &out.series {
        assert!(s.values.iter().all(|v| *v == 0.0));
    }
}

#[test]
fn doubling_the_source_doubles_every_sample() {
    let g = random_medium([26, 24, 22], 2);
    let base = Simulation::new(&g, open_box_config(400)).unwrap().run().unwrap();
    let mut cfg = open_box_config(400);
    cfg.sources[0].amplitude = 2.0;
    let twice = Simulation::new(&g, cfg).unwrap().run().unwrap();
    for (a, b) in base.series.iter().zip(&twice.series) {
        assert!(a.values.iter().any(|v| *v != 0.0));
        for (x, y) in a.values.iter().zip(&b.values) {
            assert_eq!(2.0 * x, *y);
        }
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let g = random_medium([26, 24, 22], 3);
    let run = |threads: usize| {
        let mut cfg = open_box_config(250);
        cfg.threads = Some(threads);
        let mut sim = Simulation::new(&g, cfg).unwrap();
        sim.advance(250).unwrap();
        [Component::Ex, Component::Ey, Component::Ez, Component::Hx, Component::Hy, Component::Hz]
            .map(|c| sim.field(c).to_vec())
    };
    let one = run(1);
    for t in [2, 3, 5] {
        assert!(one == run(t), "{t} threads differ from 1");
    }
}

#[test]
fn leading_edge_respects_the_speed_of_light() {
    // Ey dipole in vacuum, probe L cells away along x
    let res = 20;
    let g = vacuum([90, 24, 24], res);
    let src = [12, 11, 12];
    let distances = [20usize, 40, 60];
    let mut cfg = SimConfig::new(0);
    cfg.pml_cells = 8;
    cfg.sources = vec![pulse(src, Component::Ey, 1.0, 0.3)];
    cfg.probes = distances
        .iter()
        .map(|&d| ProbePoint { name: format!("d{d}"), position: [src[0] + d, src[1], src[2]], component: Component::Ey })
        .collect();
    cfg.record_from_step = Some(0);
    let h = 1.0 / res as f64;
    let dt = stable_dt(h, cfg.courant_factor).unwrap();
    cfg.total_steps = (4.0 / dt) as u64;
    let out = Simulation::new(&g, cfg).unwrap().run().unwrap();
    // the pulse switches on with a ~1 % step at t = 0; the front is where the probe reaches that level
    let source_peak = 1.0;
    for (s, &d) in out.series.iter().zip(&distances) {
        let peak = s.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(peak > 0.0 && peak < source_peak);
        let first = s.values.iter().position(|v| v.abs() > 1e-2 * peak).unwrap();
        let arrival = s.time(first);
        let light = d as f64 * h;
        assert!(arrival >= light - h, "distance {d}: arrival {arrival} before {light}");
        assert!(arrival <= light + 0.2 * light, "distance {d}: front at {arrival}, expected near {light}");
    }
}

#[test]
fn bounded_for_1e5_steps_at_high_courant() {
    // random dielectric block in open space, vacuum margin before the absorbing layers
    let mut g = vacuum([28, 26, 24], 20);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let [nx, ny, nz] = g.dims;
    let m = 10;
    for k in 0..nz - m {
        for j in m..ny - m {
            for i in m..nx - m {
                let idx = g.index(i, j, k);
                g.eps[idx] = rng.random_range(1.0..12.0);
            }
        }
    }
    let mut cfg = SimConfig::new(0);
    cfg.courant_factor = 0.99;
    cfg.pml_cells = 8;
    cfg.symmetries = [Symmetry::None, Symmetry::None, Symmetry::Even];
    cfg.sources = vec![pulse([14, 12, 0], Component::Ey, 0.4, 0.1)];
    let mut sim = Simulation::new(&g, cfg).unwrap();
    let off = sim.config().sources[0].off_step(sim.dt());
    sim.advance(off).unwrap();
    let e_off = sim.field_energy();
    assert!(e_off > 0.0);
    let mut worst: f64 = 0.0;
    let total = 100_000u64;
    for _ in 0..total / 1000 {
        sim.advance(1000).unwrap();
        worst = worst.max(sim.field_energy() / e_off);
    }
    assert!(worst.is_finite() && worst < 1.5, "energy grew to {worst} x its turn-off value");
}
