use std::path::PathBuf;

use anyhow::{Context, Result};
use phc_core::Error;

use crate::output::{write_atomic, Ctx};
use crate::svg;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Kind {
    Sweep,
    Spectrum,
    Map,
    Timeseries,
    Columns,
}

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Any CSV written by phc.
    pub csv: PathBuf,
    /// Plot type; guessed from the header when absent.
    #[arg(long, value_enum)]
    pub kind: Option<Kind>,
    #[arg(long)]
    pub title: Option<String>,
    #[arg(long, default_value = "plot.svg")]
    pub out: PathBuf,
}

struct Table {
    header: Vec<String>,
    columns: Vec<Vec<f64>>,
    unit: Option<String>,
}

fn read_table(text: &str) -> Result<Table> {
    let mut unit = None;
    let mut header: Option<Vec<String>> = None;
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(c) = line.strip_prefix('#') {
            if let Some(u) = c.trim().strip_prefix("axis_unit=") {
                unit = Some(u.trim().to_string());
            }
            continue;
        }
        match &header {
            None => {
                let h: Vec<String> = line.split(',').map(|s| s.trim().to_string()).collect();
                columns = vec![Vec::new(); h.len()];
                header = Some(h);
            }
            Some(h) => {
                let cells: Vec<&str> = line.split(',').collect();
                if cells.len() != h.len() {
                    return Err(Error::Parameter(format!("line {}: expected {} columns", ln + 1, h.len())).into());
                }
                for (col, c) in columns.iter_mut().zip(cells) {
                    let v = c.trim().parse().map_err(|_| Error::Parameter(format!("line {}: bad number '{c}'", ln + 1)))?;
                    col.push(v);
                }
            }
        }
    }
    let header = header.ok_or_else(|| Error::Parameter("CSV has no header".into()))?;
    if columns.first().is_none_or(|c| c.is_empty()) {
        return Err(Error::Parameter("CSV has no data rows".into()).into());
    }
    Ok(Table { header, columns, unit })
}

fn guess(t: &Table) -> Kind {
    let h: Vec<&str> = t.header.iter().map(String::as_str).collect();
    match h.as_slice() {
        ["detuning", "E_lower", "E_upper", ..] => Kind::Sweep,
        ["detuning", "energy", "intensity"] => Kind::Map,
        ["step", "t", "value"] => Kind::Timeseries,
        ["axis", "intensity"] => Kind::Spectrum,
        _ => Kind::Columns,
    }
}

fn unique_in_order(v: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for &x in v {
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

pub fn run(ctx: &Ctx, a: Args) -> Result<()> {
    let path = ctx.path(&a.csv);
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let t = read_table(&text)?;
    let kind = a.kind.unwrap_or_else(|| guess(&t));
    let col = |i: usize| -> Result<&[f64]> {
        t.columns.get(i).map(Vec::as_slice).ok_or_else(|| Error::Parameter(format!("CSV lacks column {}", i + 1)).into())
    };
    let title = |d: &str| a.title.clone().unwrap_or_else(|| d.to_string());
    let image = match kind {
        Kind::Sweep => {
            let x = col(0)?;
            svg::line_plot(
                &title("Polariton branches"),
                "detuning (ueV)",
                "energy (ueV)",
                &[("lower", x, col(1)?), ("upper", x, col(2)?)],
            )
        }
        Kind::Spectrum => {
            let unit = t.unit.as_deref().unwrap_or("axis");
            svg::line_plot(&title("Spectrum"), unit, "intensity", &[("intensity", col(0)?, col(1)?)])
        }
        Kind::Timeseries => svg::line_plot(&title("Probe record"), "t (a/c)", "field", &[("value", col(1)?, col(2)?)]),
        Kind::Map => {
            let (d, e, z) = (col(0)?, col(1)?, col(2)?);
            let xs = unique_in_order(d);
            let ys = unique_in_order(e);
            if xs.len() * ys.len() != z.len() {
                return Err(Error::Parameter("map CSV is not a full detuning x energy grid".into()).into());
            }
            let grid: Vec<Vec<f64>> = z.chunks(ys.len()).map(<[f64]>::to_vec).collect();
            svg::heatmap(&title("Emission map"), "detuning (ueV)", "energy (ueV)", &xs, &ys, &grid)
        }
        Kind::Columns => {
            let x = col(0)?;
            let series: Vec<svg::Series> =
                t.header.iter().zip(&t.columns).skip(1).map(|(h, c)| (h.as_str(), x, c.as_slice())).collect();
            svg::line_plot(&title("Data"), &t.header[0], "value", &series)
        }
    };
    let out = ctx.path(&a.out);
    write_atomic(&out, image.as_bytes())?;
    println!("wrote {}", out.display());
    Ok(())
}
