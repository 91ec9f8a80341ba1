//! Workspace paths, stamped JSON/CSV writers and hashing.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Settings shared by all commands.
#[derive(Debug, Clone)]
pub struct Ctx {
    pub workspace: PathBuf,
    pub seed: u64,
    pub threads: Option<usize>,
}

impl Ctx {
    pub fn new(workspace: PathBuf, seed: u64, threads: Option<usize>) -> Result<Self> {
        if let Some(t) = threads {
            anyhow::ensure!(t > 0, "--threads must be at least 1");
            // a second call (pipelines) finds the pool already built
            let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
        }
        std::fs::create_dir_all(&workspace).with_context(|| format!("creating workspace {}", workspace.display()))?;
        Ok(Ctx { workspace, seed, threads })
    }

    pub fn path(&self, p: impl AsRef<Path>) -> PathBuf {
        let p = p.as_ref();
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.workspace.join(p)
        }
    }

    pub fn meta(&self, command: &str) -> Meta {
        Meta { tool: "phc".into(), version: phc_core::VERSION.into(), command: command.into(), seed: self.seed }
    }

    /// Writes `value` as pretty JSON with a `meta` block.
    pub fn write_json<T: Serialize>(&self, path: &Path, command: &str, value: &T) -> Result<()> {
        let stamped = Stamped { meta: self.meta(command), data: value };
        write_atomic(path, (serde_json::to_string_pretty(&stamped)? + "\n").as_bytes())
    }

    /// First line of every CSV the CLI writes itself.
    pub fn csv_comment(&self, command: &str) -> String {
        format!("# phc {} {command} seed={}\n", phc_core::VERSION, self.seed)
    }
}

#[derive(Debug, Clone, Serialize, serde::Deserialize, PartialEq)]
pub struct Meta {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
}

#[derive(Serialize)]
struct Stamped<'a, T: Serialize> {
    meta: Meta,
    #[serde(flatten)]
    data: &'a T,
}

/// Writes to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    {
        let mut f = std::fs::File::create(&tmp).with_context(|| format!("writing {}", tmp.display()))?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path).with_context(|| format!("moving {} into place", path.display()))?;
    Ok(())
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Parses `lo,hi`.
pub fn parse_pair(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected two comma-separated numbers, got '{s}'"))?;
    let lo: f64 = a.trim().parse().map_err(|_| format!("'{a}' is not a number"))?;
    let hi: f64 = b.trim().parse().map_err(|_| format!("'{b}' is not a number"))?;
    Ok((lo, hi))
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Prints JSON to stdout when no output path is given.
pub fn emit_json<T: Serialize>(ctx: &Ctx, out: Option<&Path>, command: &str, value: &T) -> Result<()> {
    match out {
        Some(p) => ctx.write_json(&ctx.path(p), command, value),
        None => {
            let stamped = Stamped { meta: ctx.meta(command), data: value };
            println!("{}", serde_json::to_string_pretty(&stamped)?);
            Ok(())
        }
    }
}
