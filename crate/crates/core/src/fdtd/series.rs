use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Component;
use crate::error::{Error, Result};

/// Uniformly sampled probe record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub name: String,
    pub component: Component,
    pub position: [usize; 3],
    pub dt: f64,
    /// Step index of the first sample.
    pub first_step: u64,
    pub values: Vec<f64>,
}

impl TimeSeries {
    pub fn from_samples(name: impl Into<String>, dt: f64, values: Vec<f64>) -> Self {
        TimeSeries {
            name: name.into(),
            component: Component::Ey,
            position: [0; 3],
            dt,
            first_step: 0,
            values,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, n: usize) -> f64 {
        (self.first_step + n as u64) as f64 * self.dt
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "step,t,value")?;
        for (n, v) in self.values.iter().enumerate() {
            writeln!(w, "{},{:e},{:e}", self.first_step + n as u64, self.time(n), v)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a `step,t,value` CSV; the step spacing must be uniform.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let r = std::io::BufReader::new(std::fs::File::open(path)?);
        let mut steps = Vec::new();
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (ln, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || (ln == 0 && line.starts_with("step")) {
                continue;
            }
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != 3 {
                return Err(Error::param(format!("line {}: expected 3 columns", ln + 1)));
            }
            let bad = |_| Error::param(format!("line {}: unparsable number", ln + 1));
            steps.push(f[0].parse::<u64>().map_err(|_| Error::param(format!("line {}: bad step", ln + 1)))?);
            times.push(f[1].parse::<f64>().map_err(bad)?);
            values.push(f[2].parse::<f64>().map_err(bad)?);
        }
        if values.len() < 2 {
            return Err(Error::param("time series needs at least two samples"));
        }
        for w in steps.windows(2) {
            if w[1] != w[0] + 1 {
                return Err(Error::param("time series steps must be consecutive"));
            }
        }
        let n = values.len();
        let dt = (times[n - 1] - times[0]) / (n - 1) as f64;
        if !(dt > 0.0) {
            return Err(Error::param("time series must have increasing time"));
        }
        let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        Ok(TimeSeries { name, component: Component::Ey, position: [0; 3], dt, first_step: steps[0], values })
    }
}
