use std::path::PathBuf;

use anyhow::Result;
use phc_core::fdtd::{FieldSnapshot, TimeSeries};
use phc_core::modes::{harmonic_inversion, mode_volume, N_REF_DEFAULT};
use phc_core::{PermittivityGrid, QFactor};
use serde::Serialize;

use crate::output::{emit_json, parse_pair, Ctx};

#[derive(Debug, clap::Subcommand)]
pub enum Cmd {
    /// Harmonic inversion of a `step,t,value` probe record.
    Analyze {
        timeseries: PathBuf,
        /// Frequency band `lo,hi` in c/a.
        #[arg(long, value_parser = parse_pair)]
        band: (f64, f64),
        /// Lattice constant for wavelengths and linewidths.
        #[arg(long, default_value_t = 260.0)]
        a_nm: f64,
        #[arg(long, default_value_t = 8)]
        max_poles: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Purcell mode volume of a field snapshot.
    Volume {
        /// Snapshot sidecar JSON.
        snapshot: PathBuf,
        /// Permittivity grid sidecar JSON.
        eps: PathBuf,
        #[arg(long)]
        wavelength_nm: f64,
        #[arg(long = "n", default_value_t = N_REF_DEFAULT)]
        n_ref: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Serialize)]
struct ModeRow {
    freq_c_over_a: f64,
    wavelength_nm: f64,
    #[serde(rename = "Q")]
    q: QFactor,
    #[serde(rename = "kappa_ueV")]
    kappa_uev: Option<f64>,
    amplitude: f64,
    phase: f64,
}

#[derive(Debug, Serialize)]
struct Analysis {
    modes: Vec<ModeRow>,
    notices: Vec<String>,
}

#[derive(Debug, Serialize)]
struct Volume {
    #[serde(rename = "V_norm")]
    v_norm: f64,
    v_nm3: f64,
    peak_node: [usize; 3],
    peak_eps: f64,
}

pub fn run(ctx: &Ctx, cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::Analyze { timeseries, band, a_nm, max_poles, out } => {
            let ts = TimeSeries::read_csv(&ctx.path(timeseries))?;
            let inv = harmonic_inversion(&ts, band, max_poles)?;
            let modes = inv
                .modes
                .into_iter()
                .map(|m| {
                    let m = m.with_lattice(a_nm);
                    ModeRow {
                        freq_c_over_a: m.frequency,
                        wavelength_nm: m.wavelength_nm.unwrap_or(f64::NAN),
                        q: m.q,
                        kappa_uev: m.kappa_uev(),
                        amplitude: m.amplitude.norm(),
                        phase: m.phase(),
                    }
                })
                .collect();
            emit_json(ctx, out.as_deref(), "modes analyze", &Analysis { modes, notices: inv.notices })
        }
        Cmd::Volume { snapshot, eps, wavelength_nm, n_ref, out } => {
            let snap = FieldSnapshot::read(&ctx.path(snapshot))?;
            let grid = PermittivityGrid::read(&ctx.path(eps))?;
            let v = mode_volume(&snap, &grid, wavelength_nm, n_ref)?;
            let row = Volume { v_norm: v.v_norm, v_nm3: v.v_nm3, peak_node: v.peak_node, peak_eps: v.peak_eps };
            emit_json(ctx, out.as_deref(), "modes volume", &row)
        }
    }
}
