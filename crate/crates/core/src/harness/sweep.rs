//! Batch runs from a line-oriented config file.
//!
//! ```text
//! # noise sweep
//! label=n05
//! prior=half-laplace
//! beta=0.1
//! noise=0.05
//!
//! label=n10
//! prior=half-laplace
//! beta=0.1
//! noise=0.10
//! ```
//!
//! Blocks are separated by blank lines; keys not given keep their defaults.

use std::fs;
use std::path::{Path, PathBuf};

use super::experiment::{run_experiment, write_metrics_csv, ExperimentConfig, ImageSource, MetricsRecord};
use crate::error::{EbfError, Result};
use crate::hyperprior::{Hyperprior, PriorKind};

pub const SWEEP_KEYS: &[&str] = &[
    "label",
    "image",
    "synthetic",
    "threshold",
    "sigma_ker",
    "noise",
    "noise_ref",
    "seed",
    "prior",
    "alpha",
    "beta",
    "zeta",
    "theta",
    "tau",
    "omega",
    "max_iter",
    "tol",
    "surrogate",
    "out_dir",
];

#[derive(Default)]
struct PriorParts {
    kind: Option<PriorKind>,
    alpha: Option<f64>,
    beta: Option<f64>,
    zeta: Option<f64>,
    theta: Option<f64>,
}

struct Block {
    start: usize,
    cfg: ExperimentConfig,
    prior: PriorParts,
}

impl Block {
    fn new(start: usize) -> Self {
        Self { start, cfg: ExperimentConfig::default(), prior: PriorParts::default() }
    }

    fn finish(mut self, path: &Path) -> Result<ExperimentConfig> {
        let p = self.prior;
        if p.kind.is_some() || p.alpha.is_some() || p.beta.is_some() || p.zeta.is_some() || p.theta.is_some() {
            let kind = p.kind.unwrap_or(self.cfg.prior.kind());
            self.cfg.prior = Hyperprior::from_parts(kind, p.alpha, p.beta, p.zeta, p.theta)
                .map_err(|e| EbfError::Parse { path: path.to_path_buf(), line: self.start, message: e.to_string() })?;
        }
        Ok(self.cfg)
    }
}

/// Parses sweep text; `path` is used only in error messages.
pub fn parse_sweep(text: &str, path: &Path) -> Result<Vec<ExperimentConfig>> {
    let mut configs = Vec::new();
    let mut block: Option<Block> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            if let Some(b) = block.take() {
                configs.push(b.finish(path)?);
            }
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let err = |message: String| EbfError::Parse { path: path.to_path_buf(), line: line_no, message };
        let (key, value) = line.split_once('=').ok_or_else(|| err(format!("expected key=value, got '{line}'")))?;
        let (key, value) = (key.trim(), value.trim());
        let b = block.get_or_insert_with(|| Block::new(line_no));
        let num = |v: &str| v.parse::<f64>().map_err(|e| err(format!("{key}: {e}")));
        let cfg = &mut b.cfg;
        match key {
            "label" => cfg.label = value.to_string(),
            "image" => cfg.image = ImageSource::Pgm(PathBuf::from(value)),
            "synthetic" => cfg.image = ImageSource::Synthetic(value.parse().map_err(|e| err(format!("{key}: {e}")))?),
            "threshold" => cfg.truncation_threshold = num(value)?,
            "sigma_ker" => cfg.sigma_ker = num(value)?,
            "noise" => cfg.noise_level = num(value)?,
            "noise_ref" => cfg.noise_ref = value.parse().map_err(|e: EbfError| err(e.to_string()))?,
            "seed" => cfg.seed = value.parse().map_err(|e| err(format!("{key}: {e}")))?,
            "prior" => b.prior.kind = Some(value.parse().map_err(|e: EbfError| err(e.to_string()))?),
            "alpha" => b.prior.alpha = Some(num(value)?),
            "beta" => b.prior.beta = Some(num(value)?),
            "zeta" => b.prior.zeta = Some(num(value)?),
            "theta" => b.prior.theta = Some(num(value)?),
            "tau" => cfg.solver.tau = num(value)?,
            "omega" => cfg.solver.omega = num(value)?,
            "max_iter" => cfg.solver.max_iter = value.parse().map_err(|e| err(format!("{key}: {e}")))?,
            "tol" => cfg.solver.rel_tol = num(value)?,
            "surrogate" => cfg.solver.surrogate = value.parse().map_err(|e: EbfError| err(e.to_string()))?,
            "out_dir" => cfg.out_dir = Some(PathBuf::from(value)),
            other => {
                return Err(err(format!("unknown key '{other}' (known: {})", SWEEP_KEYS.join(", "))));
            }
        }
    }
    if let Some(b) = block.take() {
        configs.push(b.finish(path)?);
    }
    Ok(configs)
}

/// Runs every block in `config_file`; writes the aggregated CSV to `out_csv` when given.
pub fn run_sweep(config_file: &Path, out_csv: Option<&Path>) -> Result<Vec<MetricsRecord>> {
    let text = fs::read_to_string(config_file)?;
    let configs = parse_sweep(&text, config_file)?;
    let mut records = Vec::with_capacity(configs.len());
    for cfg in &configs {
        let rec = run_experiment(cfg).inspect_err(|_| log::error!("run '{}' failed: {cfg:?}", cfg.label))?;
        records.push(rec);
    }
    if let Some(p) = out_csv {
        write_metrics_csv(&records, fs::File::create(p)?)?;
    }
    Ok(records)
}
