use std::path::PathBuf;

use anyhow::Result;
use phc_core::specfit::{fit_spectrum, q_from_fit, FitOptions};
use phc_core::{FitResult, QFactor, Spectrum, VoigtPeak};
use serde::Serialize;

use crate::output::{write_atomic, Ctx};
use crate::svg;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Spectrum CSV (`# axis_unit=` line, `axis,intensity` columns).
    pub spectrum: PathBuf,
    #[arg(long, default_value_t = 3)]
    pub peaks: usize,
    /// Instrument resolution (Gaussian FWHM, axis units).
    #[arg(long = "resolution-ueV", default_value_t = phc_core::cqed::DEFAULT_RESOLUTION_UEV)]
    pub resolution: f64,
    /// Hold the Gaussian width at the instrument resolution.
    #[arg(long)]
    pub fix_gauss: bool,
    #[arg(long)]
    pub linear_baseline: bool,
    /// Starting centres, comma separated; automatic when absent.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub centers: Option<Vec<f64>>,
    #[arg(long, default_value = "fit.json")]
    pub out: PathBuf,
    /// Data and fitted model as SVG.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct FitReport {
    #[serde(flatten)]
    fit: FitResult,
    #[serde(rename = "Q")]
    q: Vec<QFactor>,
}

fn initial_peaks(s: &Spectrum, centers: &[f64], width: f64) -> Vec<VoigtPeak> {
    centers
        .iter()
        .map(|&c| {
            let i = s
                .axis
                .iter()
                .enumerate()
                .min_by(|a, b| (a.1 - c).abs().total_cmp(&(b.1 - c).abs()))
                .map_or(0, |(i, _)| i);
            let height = s.intensity.get(i).copied().unwrap_or(0.0).max(0.0);
            VoigtPeak { center: c, lorentz_fwhm: width, gauss_fwhm: width, area: height * width * 1.5 }
        })
        .collect()
}

pub fn run(ctx: &Ctx, a: Args) -> Result<()> {
    let s = Spectrum::read_csv(&ctx.path(&a.spectrum))?;
    let opts = FitOptions {
        fixed_gauss_fwhm: a.fix_gauss.then_some(a.resolution),
        initial_gauss_fwhm: Some(a.resolution),
        linear_baseline: a.linear_baseline,
        ..Default::default()
    };
    let init = match &a.centers {
        Some(c) => {
            anyhow::ensure!(
                c.len() == a.peaks,
                phc_core::Error::Parameter(format!("--centers has {} values for {} peaks", c.len(), a.peaks))
            );
            Some(initial_peaks(&s, c, a.resolution))
        }
        None => None,
    };
    let fit = fit_spectrum(&s, a.peaks, init.as_deref(), &opts)?;
    let q = (0..fit.peaks.len()).map(|i| q_from_fit(&fit, i)).collect::<phc_core::Result<Vec<_>>>()?;
    for (p, q) in fit.peaks.iter().zip(&q) {
        println!(
            "center {:>12.4}  lorentz {:>9.4}  gauss {:>9.4}  area {:>11.4e}  Q {:?}",
            p.center, p.lorentz_fwhm, p.gauss_fwhm, p.area, q
        );
    }
    if let Some(path) = &a.svg {
        let model: Vec<f64> = s.axis.iter().map(|&x| fit.model(x)).collect();
        let x_label = format!("axis ({})", s.axis_unit.tag());
        let image =
            svg::line_plot("Spectrum fit", &x_label, "intensity", &[("data", &s.axis, &s.intensity), ("fit", &s.axis, &model)]);
        write_atomic(&ctx.path(path), image.as_bytes())?;
    }
    ctx.write_json(&ctx.path(&a.out), "fit", &FitReport { fit, q })
}
