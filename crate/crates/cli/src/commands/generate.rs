use std::path::PathBuf;

use anyhow::{Context, Result};
use phc_core::cavity::{cavity_grid, CavityRunOptions};
use phc_core::geometry::{DesignFile, DesignMeta, DEFAULT_L4_3_DESIGN};
use phc_core::{CavityKind, LatticeSpec, ModulationSpec, ShiftSet};

use crate::output::{write_atomic, Ctx};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Preset design: l4-3, l3 or bulk.
    #[arg(long, default_value = "l4-3", conflicts_with = "input")]
    pub design: String,
    /// Start from an existing design file instead of a preset.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Double-periodic radius modulation as a fraction of r (e.g. 0.01).
    #[arg(long, allow_negative_numbers = true)]
    pub delta_r: Option<f64>,
    /// Hole rings around the centre that carry the modulation.
    #[arg(long, default_value_t = 5)]
    pub region_rings: u32,
    /// Seven x shifts in units of a, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub sx: Option<Vec<f64>>,
    /// Four y shifts in units of a, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub sy: Option<Vec<f64>>,
    /// Lateral half-extent in lattice periods.
    #[arg(long)]
    pub nx: Option<u32>,
    /// Lateral half-extent in hole rows.
    #[arg(long)]
    pub ny: Option<u32>,
    #[arg(long, default_value = "design.json")]
    pub out: PathBuf,
    /// Also rasterise the symmetry-reduced simulation domain at this many cells per a.
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Stem of the permittivity grid files.
    #[arg(long, default_value = "eps")]
    pub grid_stem: PathBuf,
}

fn preset(name: &str) -> Result<DesignFile> {
    let default = DesignFile::from_json(DEFAULT_L4_3_DESIGN)?;
    let kind: CavityKind = name.parse()?;
    Ok(match kind {
        CavityKind::L4_3 => default,
        other => DesignFile {
            lattice: LatticeSpec::gaas_l4_3(),
            kind: other,
            shifts: ShiftSet::zero(),
            modulation: None,
            meta: DesignMeta { source: "phc generate".into(), extra: Default::default() },
        },
    })
}

fn fixed<const N: usize>(name: &str, v: &[f64]) -> Result<[f64; N]> {
    v.try_into().map_err(|_| phc_core::Error::Parameter(format!("--{name} needs {N} values, got {}", v.len())).into())
}

pub fn run(ctx: &Ctx, a: Args) -> Result<()> {
    let untouched = a.input.is_none()
        && a.delta_r.is_none()
        && a.sx.is_none()
        && a.sy.is_none()
        && a.nx.is_none()
        && a.ny.is_none();
    let mut file = match &a.input {
        Some(p) => {
            let p = ctx.path(p);
            let text = std::fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
            DesignFile::from_json(&text)?
        }
        None => preset(&a.design)?,
    };
    if let Some(v) = &a.sx {
        file.shifts.sx = fixed("sx", v)?;
    }
    if let Some(v) = &a.sy {
        file.shifts.sy = fixed("sy", v)?;
    }
    if let Some(nx) = a.nx {
        file.lattice.nx = nx;
    }
    if let Some(ny) = a.ny {
        file.lattice.ny = ny;
    }
    if let Some(d) = a.delta_r {
        file.modulation = (d != 0.0).then_some(ModulationSpec { region_rings: a.region_rings, ..ModulationSpec::new(d) });
    }
    file.shifts.validate()?;
    let design = file.build()?;

    let text = if untouched && file.kind == CavityKind::L4_3 { DEFAULT_L4_3_DESIGN.to_string() } else { file.to_json()? };
    let out = ctx.path(&a.out);
    write_atomic(&out, text.as_bytes())?;
    // reload and re-check what was written
    let reloaded = DesignFile::from_json(&std::fs::read_to_string(&out)?)?.build()?;
    reloaded.check_mirror_symmetry()?;
    reloaded.check_overlaps()?;
    println!("wrote {} ({} holes)", out.display(), design.holes.len());

    if let Some(res) = a.resolution {
        let opts = CavityRunOptions { resolution: res, ..Default::default() };
        let grid = cavity_grid(&design, &opts)?;
        let sidecar = grid.write(&ctx.path(&a.grid_stem))?;
        println!("wrote {} (dims {:?})", sidecar.display(), grid.dims);
    }
    Ok(())
}
