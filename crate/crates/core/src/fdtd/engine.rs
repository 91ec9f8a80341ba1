//! Leapfrog stepping kernels.

use rayon::prelude::*;

use super::dft::{DftAccumulator, FieldSnapshot};
use super::pml::AxisPml;
use super::{stable_dt, Component, SimConfig, TimeSeries, Wall, Walls};
use crate::error::{Error, Result};
use crate::geometry::PermittivityGrid;

/// How often (in steps) all E arrays are scanned for non-finite values.
const SCAN_INTERVAL: u64 = 256;

#[derive(Debug, Clone, Copy)]
struct Faces {
    pec: [[bool; 2]; 3],
    pmc: [[bool; 2]; 3],
}

impl Faces {
    fn new(w: &Walls) -> Self {
        let mut f = Faces { pec: [[false; 2]; 3], pmc: [[false; 2]; 3] };
        for ax in 0..3 {
            for s in 0..2 {
                f.pmc[ax][s] = w[ax][s] == Wall::Pmc;
                f.pec[ax][s] = !f.pmc[ax][s];
            }
        }
        f
    }

    #[inline]
    fn is_pec(&self, ax: usize, idx: usize, n: usize) -> bool {
        (idx == 0 && self.pec[ax][0]) || (idx == n - 1 && self.pec[ax][1])
    }

    /// Neighbour pair for a backward difference at integer position `idx`:
    /// `(up, s_up, dn, s_dn)` so the difference is `s_up * f[up] - s_dn * f[dn]`.
    #[inline]
    fn pair(&self, ax: usize, idx: usize, n: usize) -> (usize, f64, usize, f64) {
        if idx == 0 {
            debug_assert!(self.pmc[ax][0]);
            (0, 1.0, 0, -1.0)
        } else if idx == n - 1 {
            debug_assert!(self.pmc[ax][1]);
            (n - 2, -1.0, n - 2, 1.0)
        } else {
            (idx, 1.0, idx - 1, 1.0)
        }
    }
}

#[derive(Debug, Clone)]
struct Psi {
    /// Derivative along x: Hy, Hz (half positions) and Ey, Ez (integer positions).
    x: [Vec<f64>; 4],
    /// Derivative along y: Hx, Hz, Ex, Ez.
    y: [Vec<f64>; 4],
    /// Derivative along z: Hx, Hy, Ex, Ey.
    z: [Vec<f64>; 4],
}

/// Result of [`Simulation::run`].
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub series: Vec<TimeSeries>,
    pub snapshot: Option<FieldSnapshot>,
    pub steps: u64,
    pub dt: f64,
}

/// Time-domain solver state.
pub struct Simulation {
    dims: [usize; 3],
    h: f64,
    dt: f64,
    config: SimConfig,
    faces: Faces,
    e: [Vec<f64>; 3],
    hf: [Vec<f64>; 3],
    /// `dt / (eps h)` at each E component position.
    ce: [Vec<f64>; 3],
    pml: [AxisPml; 3],
    psi: Psi,
    step: u64,
    pool: Option<rayon::ThreadPool>,
    grid: PermittivityGrid,
    series: Vec<TimeSeries>,
    record_from: u64,
    dft: Option<(u64, DftAccumulator)>,
}

#[inline]
fn plane(a: &[f64], k: usize, p: usize) -> &[f64] {
    &a[k * p..k * p + p]
}

fn planes(v: &mut [f64], size: usize, n: usize) -> Vec<&mut [f64]> {
    if size == 0 {
        (0..n).map(|_| <&mut [f64]>::default()).collect()
    } else {
        v.chunks_mut(size).collect()
    }
}

fn z_slots<'a>(a: &'a mut [f64], b: &'a mut [f64], p: usize, pml: &AxisPml, nz: usize) -> Vec<Option<(&'a mut [f64], &'a mut [f64])>> {
    let mut out: Vec<Option<(&mut [f64], &mut [f64])>> = (0..nz).map(|_| None).collect();
    for (s, (ca, cb)) in a.chunks_mut(p).zip(b.chunks_mut(p)).enumerate() {
        out[pml.node_of[s]] = Some((ca, cb));
    }
    out
}

impl Simulation {
    /// Estimated working-set size in bytes.
    pub fn memory_estimate(dims: [usize; 3], config: &SimConfig) -> u64 {
        let n = (dims[0] * dims[1] * dims[2]) as u64;
        let walls = config.resolved_walls();
        let mut psi = 0u64;
        let p = config.pml_cells as u64 + 2;
        for ax in 0..3 {
            let layers = walls[ax].iter().filter(|w| **w == Wall::Pml).count() as u64;
            psi += 4 * layers * p * n / dims[ax] as u64;
        }
        let arrays = 10 + if config.snapshot.is_some() { 6 } else { 0 };
        8 * (arrays * n + psi)
    }

    pub fn new(grid: &PermittivityGrid, config: SimConfig) -> Result<Self> {
        let dims = grid.dims;
        config.validate(dims)?;
        let need = Self::memory_estimate(dims, &config);
        if need > config.max_memory_bytes {
            return Err(Error::Memory { required_bytes: need, limit_bytes: config.max_memory_bytes });
        }
        let h = grid.spacing_a();
        let dt = stable_dt(h, config.courant_factor)?;
        let walls = config.resolved_walls();
        let faces = Faces::new(&walls);
        let [nx, ny, nz] = dims;
        let n = nx * ny * nz;
        let mut ce: [Vec<f64>; 3] = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        let strides = [1, nx, nx * ny];
        for (ax, c) in ce.iter_mut().enumerate() {
            c.par_chunks_mut(nx * ny).enumerate().for_each(|(k, plane)| {
                for j in 0..ny {
                    for i in 0..nx {
                        let idx = i + nx * (j + ny * k);
                        let pos = [i, j, k];
                        let eps = if pos[ax] + 1 < dims[ax] {
                            0.5 * (grid.eps[idx] + grid.eps[idx + strides[ax]])
                        } else {
                            grid.eps[idx]
                        };
                        plane[i + nx * j] = dt / (eps * h);
                    }
                }
            });
        }
        let pml: [AxisPml; 3] = std::array::from_fn(|ax| {
            AxisPml::new(dims[ax], walls[ax], config.pml_cells, &config.pml_profile, h, dt)
        });
        let psi = Psi {
            x: std::array::from_fn(|_| vec![0.0; pml[0].slots() * ny * nz]),
            y: std::array::from_fn(|_| vec![0.0; nx * pml[1].slots() * nz]),
            z: std::array::from_fn(|_| vec![0.0; nx * ny * pml[2].slots()]),
        };
        let pool = match config.threads {
            Some(t) => Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(t.max(1))
                    .build()
                    .map_err(|e| Error::param(format!("thread pool: {e}")))?,
            ),
            None => None,
        };
        let record_from = config
            .record_from_step
            .unwrap_or_else(|| config.sources.iter().map(|s| s.off_step(dt)).max().unwrap_or(0));
        let series = config
            .probes
            .iter()
            .map(|p| TimeSeries {
                name: p.name.clone(),
                component: p.component,
                position: p.position,
                dt,
                first_step: record_from.max(1),
                values: Vec::new(),
            })
            .collect();
        let dft = match &config.snapshot {
            Some(s) => {
                let period_steps = 1.0 / (s.frequency * dt);
                if (s.window_steps as f64) < period_steps {
                    return Err(Error::param(format!(
                        "DFT window of {} steps is shorter than one period ({:.1} steps)",
                        s.window_steps, period_steps
                    )));
                }
                let start = config.total_steps.saturating_sub(s.window_steps);
                Some((start, DftAccumulator::new(n, s.frequency)))
            }
            None => None,
        };
        Ok(Simulation {
            dims,
            h,
            dt,
            config,
            faces,
            e: [vec![0.0; n], vec![0.0; n], vec![0.0; n]],
            hf: [vec![0.0; n], vec![0.0; n], vec![0.0; n]],
            ce,
            pml,
            psi,
            step: 0,
            pool,
            grid: grid.clone(),
            series,
            record_from,
            dft,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn steps_done(&self) -> u64 {
        self.step
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn field(&self, c: Component) -> &[f64] {
        match c {
            Component::Ex => &self.e[0],
            Component::Ey => &self.e[1],
            Component::Ez => &self.e[2],
            Component::Hx => &self.hf[0],
            Component::Hy => &self.hf[1],
            Component::Hz => &self.hf[2],
        }
    }

    pub fn e_fields(&self) -> [Vec<f64>; 3] {
        self.e.clone()
    }

    pub fn index(&self, p: [usize; 3]) -> usize {
        p[0] + self.dims[0] * (p[1] + self.dims[1] * p[2])
    }

    /// Sets one field value (for seeding initial conditions).
    pub fn set_field(&mut self, c: Component, p: [usize; 3], v: f64) {
        let i = self.index(p);
        match c {
            Component::Ex => self.e[0][i] = v,
            Component::Ey => self.e[1][i] = v,
            Component::Ez => self.e[2][i] = v,
            Component::Hx => self.hf[0][i] = v,
            Component::Hy => self.hf[1][i] = v,
            Component::Hz => self.hf[2][i] = v,
        }
    }

    fn weight(&self, comp: usize, electric: bool, idx: usize) -> f64 {
        let [nx, ny, _] = self.dims;
        let pos = [idx % nx, (idx / nx) % ny, idx / (nx * ny)];
        let mut w = 1.0;
        for ax in 0..3 {
            // integer along ax: E components other than ax, H component along ax
            let integer = if electric { comp != ax } else { comp == ax };
            if integer && (pos[ax] == 0 || pos[ax] == self.dims[ax] - 1) {
                w *= 0.5;
            }
        }
        w
    }

    /// Discrete energy `1/2 sum eps E^n . E^(n+1) + 1/2 sum |H^(n+1/2)|^2`
    /// given the E field before the last step; face nodes carry half weight.
    ///
    /// Without sources or absorbers this is an exact invariant of the scheme.
    pub fn conserved_energy(&self, e_prev: &[Vec<f64>; 3]) -> f64 {
        let vol = self.h.powi(3);
        let mut sum = 0.0;
        for c in 0..3 {
            for idx in 0..self.e[c].len() {
                let eps = self.dt / (self.ce[c][idx] * self.h);
                sum += 0.5 * self.weight(c, true, idx) * eps * e_prev[c][idx] * self.e[c][idx];
                sum += 0.5 * self.weight(c, false, idx) * self.hf[c][idx] * self.hf[c][idx];
            }
        }
        sum * vol
    }

    /// Instantaneous `1/2 sum (eps |E|^2 + |H|^2) dV` (E and H half a step apart).
    pub fn field_energy(&self) -> f64 {
        let vol = self.h.powi(3);
        let mut sum = 0.0;
        for c in 0..3 {
            for idx in 0..self.e[c].len() {
                let eps = self.dt / (self.ce[c][idx] * self.h);
                sum += 0.5 * (eps * self.e[c][idx].powi(2) + self.hf[c][idx].powi(2));
            }
        }
        sum * vol
    }

    /// Advances one full step (H then E).
    pub fn step(&mut self) -> Result<()> {
        match self.pool.take() {
            Some(pool) => {
                pool.install(|| self.step_inner());
                self.pool = Some(pool);
            }
            None => self.step_inner(),
        }
        self.after_step()
    }

    pub fn advance(&mut self, steps: u64) -> Result<()> {
        for _ in 0..steps {
            self.step()?;
        }
        Ok(())
    }

    /// Runs to `total_steps` and returns probe records and the snapshot.
    pub fn run(mut self) -> Result<RunOutput> {
        while self.step < self.config.total_steps {
            self.step()?;
        }
        Ok(self.finish())
    }

    pub fn finish(self) -> RunOutput {
        let snapshot = self.dft.map(|(_, acc)| {
            FieldSnapshot::from_accumulator(acc, &self.grid, self.config.mirror_parities())
        });
        RunOutput { series: self.series, snapshot, steps: self.step, dt: self.dt }
    }

    fn step_inner(&mut self) {
        self.update_h();
        self.update_e();
        let t_src = (self.step as f64 + 0.5) * self.dt;
        for s in &self.config.sources {
            let idx = s.position[0] + self.dims[0] * (s.position[1] + self.dims[1] * s.position[2]);
            let c = s.component.axis();
            self.e[c][idx] -= self.ce[c][idx] * self.h * s.waveform(t_src, self.dt);
        }
    }

    fn after_step(&mut self) -> Result<()> {
        self.step += 1;
        let n = self.step;
        if n >= self.record_from {
            for ts in self.series.iter_mut() {
                let p = ts.position;
                let idx = p[0] + self.dims[0] * (p[1] + self.dims[1] * p[2]);
                let v = match ts.component {
                    Component::Ex => self.e[0][idx],
                    Component::Ey => self.e[1][idx],
                    Component::Ez => self.e[2][idx],
                    Component::Hx => self.hf[0][idx],
                    Component::Hy => self.hf[1][idx],
                    Component::Hz => self.hf[2][idx],
                };
                if !v.is_finite() {
                    return Err(Error::Divergence { step: n });
                }
                ts.values.push(v);
            }
        }
        if n % SCAN_INTERVAL == 0 && self.e.iter().any(|a| a.par_iter().any(|v| !v.is_finite())) {
            return Err(Error::Divergence { step: n });
        }
        if let Some((start, acc)) = self.dft.as_mut() {
            if n > *start {
                let t = n as f64 * self.dt;
                match &self.pool {
                    Some(pool) => pool.install(|| acc.accumulate(&self.e, t)),
                    None => acc.accumulate(&self.e, t),
                }
            }
        }
        Ok(())
    }

    fn update_h(&mut self) {
        let [nx, ny, nz] = self.dims;
        let p = nx * ny;
        let ch = self.dt / self.h;
        let [ex, ey, ez] = &self.e;
        let (ex, ey, ez) = (&ex[..], &ey[..], &ez[..]);
        let [hx, hy, hz] = &mut self.hf;
        let [pml_x, pml_y, pml_z] = &self.pml;
        let nsx = pml_x.slots();
        let nsy = pml_y.slots();
        let [px0, px1, _, _] = &mut self.psi.x;
        let [py0, py1, _, _] = &mut self.psi.y;
        let [pz0, pz1, _, _] = &mut self.psi.z;
        let tasks: Vec<_> = hx
            .chunks_mut(p)
            .zip(hy.chunks_mut(p))
            .zip(hz.chunks_mut(p))
            .zip(planes(px0, nsx * ny, nz).into_iter().zip(planes(px1, nsx * ny, nz)))
            .zip(planes(py0, nx * nsy, nz).into_iter().zip(planes(py1, nx * nsy, nz)))
            .zip(z_slots(pz0, pz1, p, pml_z, nz))
            .enumerate()
            .collect();
        tasks.into_par_iter().for_each(|(k, (((((hx, hy), hz), (pxy, pxz)), (pyx, pyz)), pz))| {
            let o = k * p;
            let exk = &ex[o..o + p];
            let eyk = &ey[o..o + p];
            let ezk = &ez[o..o + p];
            let up = k + 1 < nz;
            if up {
                let ex1 = &ex[o + p..o + 2 * p];
                let ey1 = &ey[o + p..o + 2 * p];
                for j in 0..ny - 1 {
                    let r = j * nx;
                    let hrow = &mut hx[r..r + nx];
                    let ez0 = &ezk[r..r + nx];
                    let ezj = &ezk[r + nx..r + 2 * nx];
                    let ey0 = &eyk[r..r + nx];
                    let eyu = &ey1[r..r + nx];
                    for i in 0..nx {
                        hrow[i] -= ch * ((ezj[i] - ez0[i]) - (eyu[i] - ey0[i]));
                    }
                }
                for j in 0..ny {
                    let r = j * nx;
                    let hrow = &mut hy[r..r + nx - 1];
                    let ex0 = &exk[r..r + nx - 1];
                    let exu = &ex1[r..r + nx - 1];
                    let ez0 = &ezk[r..r + nx];
                    for i in 0..nx - 1 {
                        hrow[i] -= ch * ((exu[i] - ex0[i]) - (ez0[i + 1] - ez0[i]));
                    }
                }
            }
            for j in 0..ny - 1 {
                let r = j * nx;
                let hrow = &mut hz[r..r + nx - 1];
                let ey0 = &eyk[r..r + nx];
                let ex0 = &exk[r..r + nx - 1];
                let exj = &exk[r + nx..r + 2 * nx - 1];
                for i in 0..nx - 1 {
                    hrow[i] -= ch * ((ey0[i + 1] - ey0[i]) - (exj[i] - ex0[i]));
                }
            }
            // x-directed PML
            for (s, &i) in pml_x.node_of.iter().enumerate() {
                if i + 1 >= nx {
                    continue;
                }
                let (b, c) = (pml_x.b_half[s], pml_x.c_half[s]);
                for j in 0..ny {
                    let r = j * nx + i;
                    let q = s + nsx * j;
                    if up {
                        pxy[q] = b * pxy[q] + c * (ezk[r + 1] - ezk[r]);
                        hy[r] += ch * pxy[q];
                    }
                    if j + 1 < ny {
                        pxz[q] = b * pxz[q] + c * (eyk[r + 1] - eyk[r]);
                        hz[r] -= ch * pxz[q];
                    }
                }
            }
            // y-directed PML
            for (s, &j) in pml_y.node_of.iter().enumerate() {
                if j + 1 >= ny {
                    continue;
                }
                let (b, c) = (pml_y.b_half[s], pml_y.c_half[s]);
                let r = j * nx;
                let q = s * nx;
                if up {
                    for i in 0..nx {
                        pyx[q + i] = b * pyx[q + i] + c * (ezk[r + nx + i] - ezk[r + i]);
                        hx[r + i] -= ch * pyx[q + i];
                    }
                }
                for i in 0..nx - 1 {
                    pyz[q + i] = b * pyz[q + i] + c * (exk[r + nx + i] - exk[r + i]);
                    hz[r + i] += ch * pyz[q + i];
                }
            }
            // z-directed PML
            if let (Some((pzx, pzy)), true) = (pz, up) {
                let s = pml_z.node_of.iter().position(|&n| n == k).unwrap();
                let (b, c) = (pml_z.b_half[s], pml_z.c_half[s]);
                let ex1 = &ex[o + p..o + 2 * p];
                let ey1 = &ey[o + p..o + 2 * p];
                for j in 0..ny {
                    for i in 0..nx {
                        let r = j * nx + i;
                        if j + 1 < ny {
                            pzx[r] = b * pzx[r] + c * (ey1[r] - eyk[r]);
                            hx[r] += ch * pzx[r];
                        }
                        if i + 1 < nx {
                            pzy[r] = b * pzy[r] + c * (ex1[r] - exk[r]);
                            hy[r] -= ch * pzy[r];
                        }
                    }
                }
            }
        });
    }

    fn update_e(&mut self) {
        let [nx, ny, nz] = self.dims;
        let p = nx * ny;
        let faces = self.faces;
        let [hx, hy, hz] = &self.hf;
        let (hx, hy, hz) = (&hx[..], &hy[..], &hz[..]);
        let [cx, cy, cz] = &self.ce;
        let (cx, cy, cz) = (&cx[..], &cy[..], &cz[..]);
        let [ex, ey, ez] = &mut self.e;
        let [pml_x, pml_y, pml_z] = &self.pml;
        let nsx = pml_x.slots();
        let nsy = pml_y.slots();
        let [_, _, px2, px3] = &mut self.psi.x;
        let [_, _, py2, py3] = &mut self.psi.y;
        let [_, _, pz2, pz3] = &mut self.psi.z;
        let tasks: Vec<_> = ex
            .chunks_mut(p)
            .zip(ey.chunks_mut(p))
            .zip(ez.chunks_mut(p))
            .zip(planes(px2, nsx * ny, nz).into_iter().zip(planes(px3, nsx * ny, nz)))
            .zip(planes(py2, nx * nsy, nz).into_iter().zip(planes(py3, nx * nsy, nz)))
            .zip(z_slots(pz2, pz3, p, pml_z, nz))
            .enumerate()
            .collect();
        tasks.into_par_iter().for_each(|(k, (((((ex, ey), ez), (pxy, pxz)), (pyx, pyz)), pz))| {
            let hzk = plane(hz, k, p);
            let cxk = plane(cx, k, p);
            let cyk = plane(cy, k, p);
            let czk = plane(cz, k, p);
            let z_pec = faces.is_pec(2, k, nz);
            let x_lo_pmc = faces.pmc[0][0];
            let x_hi_pmc = faces.pmc[0][1];
            if !z_pec {
                let (ku, tu, kd, td) = faces.pair(2, k, nz);
                let hyu = plane(hy, ku, p);
                let hyd = plane(hy, kd, p);
                let hxu = plane(hx, ku, p);
                let hxd = plane(hx, kd, p);
                // Ex
                for j in 0..ny {
                    if faces.is_pec(1, j, ny) {
                        continue;
                    }
                    let (ju, su, jd, sd) = faces.pair(1, j, ny);
                    let r = j * nx;
                    let m = nx - 1;
                    let erow = &mut ex[r..r + m];
                    let c = &cxk[r..r + m];
                    let a_u = &hzk[ju * nx..ju * nx + m];
                    let a_d = &hzk[jd * nx..jd * nx + m];
                    let b_u = &hyu[r..r + m];
                    let b_d = &hyd[r..r + m];
                    for i in 0..m {
                        erow[i] += c[i] * ((su * a_u[i] - sd * a_d[i]) - (tu * b_u[i] - td * b_d[i]));
                    }
                }
                // Ey
                for j in 0..ny - 1 {
                    let r = j * nx;
                    let erow = &mut ey[r..r + nx];
                    let c = &cyk[r..r + nx];
                    let a_u = &hxu[r..r + nx];
                    let a_d = &hxd[r..r + nx];
                    let hzr = &hzk[r..r + nx];
                    for i in 1..nx - 1 {
                        erow[i] += c[i] * ((tu * a_u[i] - td * a_d[i]) - (hzr[i] - hzr[i - 1]));
                    }
                    if x_lo_pmc {
                        erow[0] += c[0] * ((tu * a_u[0] - td * a_d[0]) - 2.0 * hzr[0]);
                    }
                    if x_hi_pmc {
                        let l = nx - 1;
                        erow[l] += c[l] * ((tu * a_u[l] - td * a_d[l]) + 2.0 * hzr[l - 1]);
                    }
                }
            }
            // Ez
            if k + 1 < nz {
                let hyk = plane(hy, k, p);
                let hxk = plane(hx, k, p);
                for j in 0..ny {
                    if faces.is_pec(1, j, ny) {
                        continue;
                    }
                    let (ju, su, jd, sd) = faces.pair(1, j, ny);
                    let r = j * nx;
                    let erow = &mut ez[r..r + nx];
                    let c = &czk[r..r + nx];
                    let hyr = &hyk[r..r + nx];
                    let a_u = &hxk[ju * nx..ju * nx + nx];
                    let a_d = &hxk[jd * nx..jd * nx + nx];
                    for i in 1..nx - 1 {
                        erow[i] += c[i] * ((hyr[i] - hyr[i - 1]) - (su * a_u[i] - sd * a_d[i]));
                    }
                    if x_lo_pmc {
                        erow[0] += c[0] * (2.0 * hyr[0] - (su * a_u[0] - sd * a_d[0]));
                    }
                    if x_hi_pmc {
                        let l = nx - 1;
                        erow[l] += c[l] * (-2.0 * hyr[l - 1] - (su * a_u[l] - sd * a_d[l]));
                    }
                }
            }
            // x-directed PML (integer x positions)
            if nsx > 0 {
                let hyk = plane(hy, k, p);
                for (s, &i) in pml_x.node_of.iter().enumerate() {
                    if i == 0 || i + 1 >= nx {
                        continue;
                    }
                    let (b, c) = (pml_x.b_int[s], pml_x.c_int[s]);
                    for j in 0..ny {
                        let r = j * nx + i;
                        let q = s + nsx * j;
                        if !z_pec && j + 1 < ny {
                            pxy[q] = b * pxy[q] + c * (hzk[r] - hzk[r - 1]);
                            ey[r] -= cyk[r] * pxy[q];
                        }
                        if k + 1 < nz && !faces.is_pec(1, j, ny) {
                            pxz[q] = b * pxz[q] + c * (hyk[r] - hyk[r - 1]);
                            ez[r] += czk[r] * pxz[q];
                        }
                    }
                }
            }
            // y-directed PML
            if nsy > 0 {
                let hxk = plane(hx, k, p);
                for (s, &j) in pml_y.node_of.iter().enumerate() {
                    if j == 0 || j + 1 >= ny {
                        continue;
                    }
                    let (b, c) = (pml_y.b_int[s], pml_y.c_int[s]);
                    let r = j * nx;
                    let q = s * nx;
                    if !z_pec {
                        for i in 0..nx - 1 {
                            pyx[q + i] = b * pyx[q + i] + c * (hzk[r + i] - hzk[r - nx + i]);
                            ex[r + i] += cxk[r + i] * pyx[q + i];
                        }
                    }
                    if k + 1 < nz {
                        for i in 0..nx {
                            if faces.is_pec(0, i, nx) {
                                continue;
                            }
                            pyz[q + i] = b * pyz[q + i] + c * (hxk[r + i] - hxk[r - nx + i]);
                            ez[r + i] -= czk[r + i] * pyz[q + i];
                        }
                    }
                }
            }
            // z-directed PML
            if let Some((pzx, pzy)) = pz {
                if k > 0 && k + 1 < nz {
                    let s = pml_z.node_of.iter().position(|&n| n == k).unwrap();
                    let (b, c) = (pml_z.b_int[s], pml_z.c_int[s]);
                    let hy0 = plane(hy, k, p);
                    let hy1 = plane(hy, k - 1, p);
                    let hx0 = plane(hx, k, p);
                    let hx1 = plane(hx, k - 1, p);
                    for j in 0..ny {
                        let y_pec = faces.is_pec(1, j, ny);
                        for i in 0..nx {
                            let r = j * nx + i;
                            if i + 1 < nx && !y_pec {
                                pzx[r] = b * pzx[r] + c * (hy0[r] - hy1[r]);
                                ex[r] -= cxk[r] * pzx[r];
                            }
                            if j + 1 < ny && !faces.is_pec(0, i, nx) {
                                pzy[r] = b * pzy[r] + c * (hx0[r] - hx1[r]);
                                ey[r] += cyk[r] * pzy[r];
                            }
                        }
                    }
                }
            }
        });
    }
}
