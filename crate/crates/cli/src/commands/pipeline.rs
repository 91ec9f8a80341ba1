use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use clap::Parser;
use phc_core::Error;
use serde::{Deserialize, Serialize};

use crate::output::{sha256_file, write_atomic, Ctx, Meta};
use crate::{dispatch, Cli, Command, NumericalFailure};

#[derive(Debug, clap::Subcommand)]
pub enum Cmd {
    /// Run every stage of a pipeline config in order and write a manifest.
    Run {
        config: PathBuf,
        #[arg(long, default_value = "manifest.json")]
        manifest: PathBuf,
    },
    /// Re-hash the inputs and outputs listed in a manifest.
    Check { manifest: PathBuf },
}

/// Pipeline description. Each stage is a `phc` argument list without the
/// global flags, e.g. `["cqed", "sweep", "--g", "40", ...]`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    /// Stage working directory, relative to the global workspace.
    #[serde(default)]
    pub workspace: Option<PathBuf>,
    #[serde(default)]
    pub seed: Option<u64>,
    pub stages: Vec<StageConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageConfig {
    pub name: String,
    pub args: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageRecord {
    pub name: String,
    pub args: Vec<String>,
    pub wall_time_s: f64,
    /// Files created or changed by the stage, relative to the workspace.
    pub outputs: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub meta: Meta,
    pub tool_version: String,
    pub workspace: PathBuf,
    pub seed: u64,
    /// SHA-256 of the config and of every pre-existing file a stage names,
    /// keyed relative to `workspace` (absolute when outside it).
    pub inputs: BTreeMap<String, String>,
    pub stages: Vec<StageRecord>,
    /// SHA-256 of every stage output, relative to the workspace.
    pub outputs: BTreeMap<String, String>,
}

/// Hashes of all regular files under `root`, keyed by relative path.
fn snapshot(root: &Path, skip: &Path) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).with_context(|| format!("listing {}", dir.display()))? {
            let path = entry?.path();
            if path.is_dir() {
                stack.push(path);
            } else if path != skip && path.extension().is_none_or(|e| e != "partial") {
                let rel = path.strip_prefix(root).unwrap_or(&path).to_string_lossy().replace('\\', "/");
                out.insert(rel, sha256_file(&path)?);
            }
        }
    }
    Ok(out)
}

fn usage(msg: String) -> anyhow::Error {
    Error::Parameter(msg).into()
}

fn run_pipeline(ctx: &Ctx, config: &Path, manifest: &Path) -> Result<()> {
    let text = std::fs::read_to_string(config).with_context(|| format!("reading {}", config.display()))?;
    let cfg: PipelineConfig = serde_json::from_str(&text).map_err(Error::from)?;
    if cfg.stages.is_empty() {
        return Err(usage("pipeline has no stages".into()));
    }
    let seed = cfg.seed.unwrap_or(ctx.seed);
    let workspace = match &cfg.workspace {
        Some(w) => ctx.path(w),
        None => ctx.workspace.clone(),
    };
    let stage_ctx = Ctx::new(workspace.clone(), seed, ctx.threads)?;
    let workspace = workspace.canonicalize()?;
    let manifest = if manifest.is_absolute() { manifest.to_path_buf() } else { workspace.join(manifest) };

    let mut inputs = BTreeMap::new();
    let config_abs = config.canonicalize()?;
    let config_key = match config_abs.strip_prefix(&workspace) {
        Ok(rel) => rel.to_string_lossy().replace('\\', "/"),
        Err(_) => config_abs.to_string_lossy().into_owned(),
    };
    inputs.insert(config_key, sha256_file(config)?);
    let mut produced: BTreeMap<String, String> = BTreeMap::new();
    let mut records = Vec::new();
    let mut before = snapshot(&workspace, &manifest)?;

    for stage in &cfg.stages {
        let mut argv = vec!["phc".to_string()];
        argv.extend(stage.args.iter().cloned());
        let cli = Cli::try_parse_from(&argv).map_err(|e| usage(format!("stage '{}': {e}", stage.name)))?;
        if matches!(cli.command, Command::Pipeline(_)) {
            return Err(usage(format!("stage '{}': pipelines cannot nest", stage.name)));
        }
        if cli.workspace != Path::new(".") || cli.seed != 0 || cli.threads.is_some_and(|t| Some(t) != ctx.threads) {
            return Err(usage(format!("stage '{}': global flags belong to the pipeline, not its stages", stage.name)));
        }
        // files a stage names that already exist and were not made by this pipeline
        for arg in &stage.args {
            let rel = arg.trim_start_matches("./");
            if let Some(hash) = before.get(rel) {
                if !produced.contains_key(rel) {
                    inputs.insert(rel.to_string(), hash.clone());
                }
            }
        }
        let start = Instant::now();
        dispatch(&stage_ctx, cli.command).with_context(|| format!("stage '{}' failed", stage.name))?;
        let wall_time_s = start.elapsed().as_secs_f64();
        let after = snapshot(&workspace, &manifest)?;
        let outputs: Vec<String> =
            after.iter().filter(|(k, v)| before.get(*k) != Some(*v)).map(|(k, _)| k.clone()).collect();
        for o in &outputs {
            produced.insert(o.clone(), after[o].clone());
        }
        records.push(StageRecord { name: stage.name.clone(), args: stage.args.clone(), wall_time_s, outputs });
        before = after;
    }

    let m = RunManifest {
        meta: stage_ctx.meta("pipeline run"),
        tool_version: phc_core::VERSION.into(),
        workspace,
        seed,
        inputs,
        stages: records,
        outputs: produced,
    };
    write_atomic(&manifest, (serde_json::to_string_pretty(&m)? + "\n").as_bytes())?;
    println!("wrote {}", manifest.display());
    Ok(())
}

fn check(manifest: &Path) -> Result<()> {
    let text = std::fs::read_to_string(manifest).with_context(|| format!("reading {}", manifest.display()))?;
    let m: RunManifest = serde_json::from_str(&text).map_err(Error::from)?;
    let mut drift = Vec::new();
    let inputs = m.inputs.iter().map(|(p, h)| (p, h, "input"));
    let outputs = m.outputs.iter().map(|(p, h)| (p, h, "output"));
    for (rel, hash, kind) in inputs.chain(outputs) {
        let path = m.workspace.join(rel);
        match sha256_file(&path) {
            Ok(h) if &h == hash => {}
            Ok(_) => drift.push(format!("{kind} changed: {}", path.display())),
            Err(_) => drift.push(format!("{kind} missing: {}", path.display())),
        }
    }
    if m.tool_version != phc_core::VERSION {
        drift.push(format!("tool version {} differs from {}", m.tool_version, phc_core::VERSION));
    }
    for d in &drift {
        println!("{d}");
    }
    if drift.is_empty() {
        println!("manifest up to date ({} inputs, {} outputs)", m.inputs.len(), m.outputs.len());
        Ok(())
    } else {
        Err(NumericalFailure(format!("{} file(s) drifted from the manifest", drift.len())).into())
    }
}

pub fn run(ctx: &Ctx, cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::Run { config, manifest } => run_pipeline(ctx, &ctx.path(config), &manifest),
        Cmd::Check { manifest } => check(&ctx.path(manifest)),
    }
}
