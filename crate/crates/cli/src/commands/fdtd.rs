use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use phc_core::cavity::{characterize, CavityRunOptions};
use phc_core::fdtd::{SimConfig, Simulation};
use phc_core::geometry::DesignFile;
use phc_core::PermittivityGrid;
use serde::{Deserialize, Serialize};

use crate::output::Ctx;

#[derive(Debug, clap::Subcommand)]
pub enum Cmd {
    /// Run a simulation described by a JSON config.
    Run {
        config: PathBuf,
        /// Directory for probe CSVs, the snapshot and run.json.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Ring-down, Q and mode volume of a design file.
    Cavity {
        design: PathBuf,
        #[arg(long, default_value_t = 20)]
        resolution: usize,
        /// JSON file overriding any field of the run options.
        #[arg(long)]
        options: Option<PathBuf>,
        #[arg(long)]
        skip_volume: bool,
        #[arg(long, default_value = "cavity.json")]
        out: PathBuf,
        /// Probe record of the ring-down run.
        #[arg(long, default_value = "ringdown.csv")]
        probe_out: PathBuf,
    },
}

/// `fdtd run` input: the permittivity sidecar plus every [`SimConfig`] field.
#[derive(Debug, Deserialize)]
pub struct RunFile {
    /// Grid sidecar, relative to the config file.
    pub grid: PathBuf,
    #[serde(flatten)]
    pub sim: SimConfig,
    /// Stem for the snapshot files when a snapshot is configured.
    #[serde(default = "default_stem")]
    pub snapshot_stem: String,
}

fn default_stem() -> String {
    "snapshot".into()
}

#[derive(Debug, Serialize)]
struct RunSummary {
    dims: [usize; 3],
    dt: f64,
    steps: u64,
    probes: Vec<String>,
    snapshot: Option<String>,
}

fn relative_to(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.parent().unwrap_or(Path::new(".")).join(p)
    }
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

pub fn run(ctx: &Ctx, cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::Run { config, out_dir } => {
            let config = ctx.path(config);
            let text = std::fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
            let mut rf: RunFile = serde_json::from_str(&text).map_err(phc_core::Error::from)?;
            if rf.sim.threads.is_none() {
                rf.sim.threads = ctx.threads;
            }
            let grid = PermittivityGrid::read(&relative_to(&config, &rf.grid))?;
            let out_dir = ctx.path(out_dir);
            std::fs::create_dir_all(&out_dir)?;
            let out = Simulation::new(&grid, rf.sim)?.run()?;
            let mut probes = Vec::new();
            for s in &out.series {
                let p = out_dir.join(format!("{}.csv", s.name));
                s.write_csv(&p)?;
                probes.push(file_name(&p));
            }
            let snapshot = match &out.snapshot {
                Some(snap) => Some(file_name(&snap.write(&out_dir.join(&rf.snapshot_stem))?)),
                None => None,
            };
            let summary = RunSummary { dims: grid.dims, dt: out.dt, steps: out.steps, probes, snapshot };
            ctx.write_json(&out_dir.join("run.json"), "fdtd run", &summary)?;
            println!("wrote {}", out_dir.join("run.json").display());
            Ok(())
        }
        Cmd::Cavity { design, resolution, options, skip_volume, out, probe_out } => {
            let path = ctx.path(design);
            let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            let design = DesignFile::from_json(&text)?.build()?;
            let mut opts: CavityRunOptions = match options {
                Some(p) => serde_json::from_str(&std::fs::read_to_string(ctx.path(p))?).map_err(phc_core::Error::from)?,
                None => CavityRunOptions::default(),
            };
            opts.resolution = resolution;
            opts.skip_volume |= skip_volume;
            if opts.threads.is_none() {
                opts.threads = ctx.threads;
            }
            let report = characterize(&design, &opts)?;
            report.probe.write_csv(&ctx.path(&probe_out))?;
            ctx.write_json(&ctx.path(&out), "fdtd cavity", &report)?;
            println!(
                "a/lambda = {:.5}, Q = {:?}, V = {:?}",
                report.mode.frequency,
                report.mode.q,
                report.volume.map(|v| v.v_norm)
            );
            Ok(())
        }
    }
}
