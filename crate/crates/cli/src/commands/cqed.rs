use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{Context, Result};
use phc_core::cqed::{
    detuning_sweep, emission_spectrum, gmax_table, polariton_eigenvalues, project_g, reference_cavities, strong_coupling,
    CavityRecord, EmissionOptions, JCParams, SweepResult, DEFAULT_RESOLUTION_UEV,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::output::{emit_json, linspace, parse_pair, write_atomic, Ctx};
use crate::svg;

#[derive(Debug, Clone, clap::Args)]
pub struct Coupling {
    /// Coupling constant g (ueV).
    #[arg(long)]
    pub g: f64,
    /// Cavity linewidth kappa (ueV, FWHM).
    #[arg(long)]
    pub kappa: f64,
    /// Emitter linewidth gamma (ueV).
    #[arg(long, default_value_t = 0.0)]
    pub gamma: f64,
}

impl Coupling {
    fn params(&self, detuning: f64) -> JCParams {
        JCParams { gamma: self.gamma, ..JCParams::new(self.g, self.kappa) }.with_detuning(detuning)
    }
}

#[derive(Debug, clap::Subcommand)]
pub enum Cmd {
    /// Polariton energies and linewidths at one detuning.
    Eig {
        #[command(flatten)]
        coupling: Coupling,
        /// E_QD - E_cavity (ueV).
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        detuning: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Branch energies over a detuning range (anti-crossing).
    Sweep {
        #[command(flatten)]
        coupling: Coupling,
        /// Detuning range `lo,hi` (ueV).
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        range: (f64, f64),
        #[arg(long, default_value_t = 201)]
        steps: usize,
        #[arg(long, default_value = "sweep.csv")]
        out: PathBuf,
        /// Also write the emission map (long format) to this CSV.
        #[arg(long)]
        map: Option<PathBuf>,
        /// Energy window `lo,hi` of the map, relative to the cavity (ueV).
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true, default_value = "-200,200")]
        energy_range: (f64, f64),
        #[arg(long, default_value_t = 161)]
        energy_points: usize,
        #[arg(long = "resolution-ueV", default_value_t = DEFAULT_RESOLUTION_UEV)]
        resolution: f64,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Synthetic emission spectrum (two polaritons plus bare-cavity line).
    Spectrum {
        #[command(flatten)]
        coupling: Coupling,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        detuning: f64,
        /// Energy window `lo,hi` relative to the cavity (ueV).
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true, default_value = "-200,200")]
        range: (f64, f64),
        #[arg(long, default_value_t = 801)]
        points: usize,
        #[arg(long = "resolution-ueV", default_value_t = DEFAULT_RESOLUTION_UEV)]
        resolution: f64,
        /// Leave out the uncoupled cavity line.
        #[arg(long)]
        no_bare_cavity: bool,
        /// Gaussian noise, as a fraction of the peak intensity (uses --seed).
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value = "spectrum.csv")]
        out: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Normalised maximum coupling g_max of a set of cavities.
    Table {
        /// JSON list of {name, v_norm, q_design?, field_fraction?}; built-in set when absent.
        designs: Option<PathBuf>,
        #[arg(long, default_value = "Heterostructure")]
        reference: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scale a measured g to another mode volume and field fraction.
    Project {
        #[arg(long)]
        g_ref: f64,
        #[arg(long)]
        v_ref: f64,
        #[arg(long, default_value_t = 1.0)]
        field_fraction_ref: f64,
        #[arg(long)]
        v_target: f64,
        #[arg(long, default_value_t = 1.0)]
        field_fraction_target: f64,
        #[arg(long, default_value_t = 1.0)]
        polarization_factor: f64,
        /// Report g/kappa for this cavity linewidth (ueV).
        #[arg(long)]
        kappa: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Serialize)]
struct Eigen {
    params: JCParams,
    lower_energy: f64,
    upper_energy: f64,
    lower_linewidth: f64,
    upper_linewidth: f64,
    splitting: f64,
    strong_coupling: bool,
    g_over_kappa: f64,
}

#[derive(Debug, Serialize)]
struct Projection {
    g: f64,
    g_over_kappa: Option<f64>,
}

#[derive(Debug, Serialize)]
struct Table {
    reference: String,
    rows: Vec<phc_core::cqed::GmaxRow>,
}

fn sweep_csv(ctx: &Ctx, r: &SweepResult) -> String {
    let mut s = ctx.csv_comment("cqed sweep");
    s.push_str("detuning,E_lower,E_upper,width_lower,width_upper\n");
    for p in &r.points {
        let _ = writeln!(
            s,
            "{:.9e},{:.9e},{:.9e},{:.9e},{:.9e}",
            p.detuning,
            p.lower.re,
            p.upper.re,
            -2.0 * p.lower.im,
            -2.0 * p.upper.im
        );
    }
    s
}

fn map_csv(ctx: &Ctx, r: &SweepResult) -> String {
    let mut s = ctx.csv_comment("cqed sweep map");
    s.push_str("detuning,energy,intensity\n");
    if let (Some(map), Some(axis)) = (&r.map, &r.map_axis) {
        for (p, row) in r.points.iter().zip(map) {
            for (e, v) in axis.iter().zip(row) {
                let _ = writeln!(s, "{:.9e},{:.9e},{:.9e}", p.detuning, e, v);
            }
        }
    }
    s
}

pub fn run(ctx: &Ctx, cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::Eig { coupling, detuning, out } => {
            let p = coupling.params(detuning);
            let pair = polariton_eigenvalues(&p)?;
            let regime = strong_coupling(p.g, p.kappa)?;
            let e = Eigen {
                params: p,
                lower_energy: pair.lower.re,
                upper_energy: pair.upper.re,
                lower_linewidth: -2.0 * pair.lower.im,
                upper_linewidth: -2.0 * pair.upper.im,
                splitting: pair.splitting(),
                strong_coupling: regime.strong,
                g_over_kappa: regime.g_over_kappa,
            };
            emit_json(ctx, out.as_deref(), "cqed eig", &e)
        }
        Cmd::Sweep { coupling, range, steps, out, map, energy_range, energy_points, resolution, svg: svg_out } => {
            let p = coupling.params(0.0);
            let opts = EmissionOptions { resolution_fwhm: resolution, ..Default::default() };
            let axis = linspace(energy_range.0, energy_range.1, energy_points);
            let spectra = map.as_ref().map(|_| (&opts, axis.as_slice()));
            let r = detuning_sweep(&p, range, steps, spectra)?;
            write_atomic(&ctx.path(&out), sweep_csv(ctx, &r).as_bytes())?;
            if let Some(m) = &map {
                write_atomic(&ctx.path(m), map_csv(ctx, &r).as_bytes())?;
            }
            if let Some(path) = svg_out {
                let image = match (&r.map, &r.map_axis) {
                    (Some(z), Some(e)) => {
                        let d: Vec<f64> = r.points.iter().map(|p| p.detuning).collect();
                        svg::heatmap("Emission map", "detuning (ueV)", "energy (ueV)", &d, e, z)
                    }
                    _ => svg::sweep_plot(&r),
                };
                write_atomic(&ctx.path(path), image.as_bytes())?;
            }
            println!("minimum splitting {:.4} ueV at detuning {:.4} ueV", r.min_gap, r.min_gap_detuning);
            Ok(())
        }
        Cmd::Spectrum { coupling, detuning, range, points, resolution, no_bare_cavity, noise, out, svg: svg_out } => {
            anyhow::ensure!(noise >= 0.0, phc_core::Error::Parameter("--noise must be non-negative".into()));
            let p = coupling.params(detuning);
            let opts = EmissionOptions { include_bare_cavity: !no_bare_cavity, resolution_fwhm: resolution, ..Default::default() };
            let axis = linspace(range.0, range.1, points);
            let mut spec = emission_spectrum(&p, &opts, &axis)?;
            if noise > 0.0 {
                let peak = spec.intensity.iter().cloned().fold(0.0, f64::max);
                let dist = Normal::new(0.0, noise * peak).map_err(|e| phc_core::Error::Parameter(e.to_string()))?;
                let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
                spec.intensity.iter_mut().for_each(|v| *v += dist.sample(&mut rng));
            }
            let path = ctx.path(&out);
            spec.write_csv(&path)?;
            // seed line after the unit line keeps the file readable by Spectrum::read_csv
            let text = std::fs::read_to_string(&path)?;
            let (unit, rest) = text.split_once('\n').unwrap_or((&text, ""));
            write_atomic(&path, format!("{unit}\n{}{rest}", ctx.csv_comment("cqed spectrum")).as_bytes())?;
            if let Some(s) = svg_out {
                let image = svg::line_plot("Emission spectrum", "energy (ueV)", "intensity", &[("spectrum", &spec.axis, &spec.intensity)]);
                write_atomic(&ctx.path(s), image.as_bytes())?;
            }
            println!("wrote {}", path.display());
            Ok(())
        }
        Cmd::Table { designs, reference, out } => {
            let records: Vec<CavityRecord> = match designs {
                Some(p) => {
                    let p = ctx.path(p);
                    let text = std::fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
                    serde_json::from_str(&text).map_err(phc_core::Error::from)?
                }
                None => reference_cavities(),
            };
            let rows = gmax_table(&records, &reference)?;
            for r in &rows {
                println!("{:<24} V = {:>5.2}  g_max = {:.3}", r.name, r.v_norm, r.g_max);
            }
            emit_json(ctx, out.as_deref(), "cqed table", &Table { reference, rows })
        }
        Cmd::Project { g_ref, v_ref, field_fraction_ref, v_target, field_fraction_target, polarization_factor, kappa, out } => {
            let g = project_g(g_ref, v_ref, field_fraction_ref, v_target, field_fraction_target, polarization_factor)?;
            let g_over_kappa = match kappa {
                Some(k) => Some(strong_coupling(g, k)?.g_over_kappa),
                None => None,
            };
            emit_json(ctx, out.as_deref(), "cqed project", &Projection { g, g_over_kappa })
        }
    }
}
