//! One deblurring experiment: compress, degrade, solve, measure, write.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::pgm::write_pgm;
use super::synthetic::pseudo_cameraman;
use crate::error::{EbfError, Result};
use crate::hyperprior::Hyperprior;
use crate::palm::{palm_solve_model, PalmResult, SolverConfig};
use crate::spectral::{blur_image, dct2_forward, dct2_inverse, ImageGrid, SpectralModel, SpectralOperator};

#[derive(Debug, Clone, PartialEq)]
pub enum ImageSource {
    Pgm(PathBuf),
    /// Built-in pseudo-cameraman of the given side length.
    Synthetic(usize),
}

impl fmt::Display for ImageSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ImageSource::Pgm(p) => write!(f, "{}", p.display()),
            ImageSource::Synthetic(n) => write!(f, "synthetic:{n}"),
        }
    }
}

impl ImageSource {
    pub fn load(&self) -> Result<ImageGrid> {
        match self {
            ImageSource::Pgm(p) => super::pgm::read_pgm(p),
            ImageSource::Synthetic(0) => Err(EbfError::InvalidParameter("synthetic size must be positive".into())),
            ImageSource::Synthetic(n) => Ok(pseudo_cameraman(*n)),
        }
    }
}

/// Reference amplitude the noise level is relative to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseRef {
    /// ‖Kz‖/√m.
    #[default]
    Rms,
    /// max|Kz|.
    Max,
}

impl NoiseRef {
    pub fn name(self) -> &'static str {
        match self {
            NoiseRef::Rms => "rms",
            NoiseRef::Max => "max",
        }
    }
}

impl fmt::Display for NoiseRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NoiseRef {
    type Err = EbfError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rms" => Ok(NoiseRef::Rms),
            "max" => Ok(NoiseRef::Max),
            other => Err(EbfError::InvalidParameter(format!("unknown noise reference '{other}' (rms or max)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub label: String,
    pub image: ImageSource,
    /// DCT coefficients with magnitude below this are zeroed in the ground truth.
    pub truncation_threshold: f64,
    pub sigma_ker: f64,
    /// Noise standard deviation as a fraction of the reference amplitude.
    pub noise_level: f64,
    pub noise_ref: NoiseRef,
    pub seed: u64,
    pub prior: Hyperprior,
    pub solver: SolverConfig,
    /// Where per-run files go; nothing is written when absent.
    pub out_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            label: "run".into(),
            image: ImageSource::Synthetic(64),
            truncation_threshold: 0.025,
            sigma_ker: 1.0,
            noise_level: 0.1,
            noise_ref: NoiseRef::Rms,
            seed: 0,
            prior: Hyperprior::half_laplace(0.1).expect("valid default"),
            solver: SolverConfig::default(),
            out_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.truncation_threshold.is_finite() && self.truncation_threshold >= 0.0) {
            return Err(EbfError::InvalidParameter(format!(
                "truncation threshold must be >= 0, got {}",
                self.truncation_threshold
            )));
        }
        if !(self.sigma_ker.is_finite() && self.sigma_ker > 0.0) {
            return Err(EbfError::InvalidParameter(format!("sigma_ker must be > 0, got {}", self.sigma_ker)));
        }
        if !(self.noise_level > 0.0 && self.noise_level < 1.0) {
            return Err(EbfError::InvalidParameter(format!(
                "noise level must lie in (0, 1) for solver runs, got {}",
                self.noise_level
            )));
        }
        self.solver.validate()
    }
}

/// Hard-thresholds the DCT coefficients of `img`; returns the compressed image
/// and its coefficients.
pub fn prepare_ground_truth(img: &ImageGrid, threshold: f64) -> Result<(ImageGrid, Vec<f64>)> {
    if !(threshold >= 0.0) {
        return Err(EbfError::InvalidParameter(format!("threshold must be >= 0, got {threshold}")));
    }
    let mut coeffs = dct2_forward(img);
    if threshold == 0.0 {
        return Ok((img.clone(), coeffs));
    }
    for c in coeffs.iter_mut() {
        if c.abs() < threshold {
            *c = 0.0;
        }
    }
    let compressed = dct2_inverse(&coeffs, img.height(), img.width())?;
    Ok((compressed, coeffs))
}

/// Blurs `truth` and adds seeded Gaussian noise. Returns the observation and
/// the noise precision σ = 1/s².
pub fn degrade(
    truth: &ImageGrid,
    sigma_ker: f64,
    noise_level: f64,
    seed: u64,
    noise_ref: NoiseRef,
) -> Result<(ImageGrid, f64)> {
    if !(noise_level > 0.0 && noise_level.is_finite()) {
        return Err(EbfError::InvalidParameter(format!(
            "noise level must be > 0 (zero noise means infinite precision), got {noise_level}"
        )));
    }
    let blurred = blur_image(truth, sigma_ker)?;
    let reference = match noise_ref {
        NoiseRef::Rms => blurred.norm() / (blurred.len() as f64).sqrt(),
        NoiseRef::Max => blurred.pixels().iter().fold(0.0f64, |m, v| m.max(v.abs())),
    };
    let s = noise_level * reference;
    if !(s > 0.0) {
        return Err(EbfError::InvalidParameter("blurred image is identically zero".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pixels = blurred
        .pixels()
        .iter()
        .map(|v| {
            let z: f64 = StandardNormal.sample(&mut rng);
            v + s * z
        })
        .collect();
    Ok((ImageGrid::new(truth.height(), truth.width(), pixels)?, 1.0 / (s * s)))
}

/// `(‖restored − truth‖/‖truth‖, fraction of exact zeros in x)`.
pub fn compute_metrics(restored: &ImageGrid, truth: &ImageGrid, x: &[f64]) -> Result<(f64, f64)> {
    if restored.shape() != truth.shape() {
        return Err(EbfError::ShapeMismatch { expected: truth.len(), got: restored.len() });
    }
    let norm = truth.norm();
    if norm == 0.0 {
        return Err(EbfError::ZeroNormTruth);
    }
    let diff: f64 = restored.pixels().iter().zip(truth.pixels()).map(|(a, b)| (a - b) * (a - b)).sum();
    let zeros = x.iter().filter(|&&v| v == 0.0).count();
    let sparsity = if x.is_empty() { 0.0 } else { zeros as f64 / x.len() as f64 };
    Ok((diff.sqrt() / norm, sparsity))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    pub label: String,
    pub prior: String,
    pub image: String,
    pub sigma_ker: f64,
    pub noise_level: f64,
    pub noise_ref: NoiseRef,
    pub seed: u64,
    pub relative_error: f64,
    pub sparsity_rate: f64,
    pub iterations: usize,
    pub final_objective: f64,
    pub termination: &'static str,
    /// Seconds spent in the solver. Not written to CSV so files stay reproducible.
    pub wall_time: f64,
}

pub const METRICS_HEADER: [&str; 12] = [
    "label",
    "prior",
    "image",
    "sigma_ker",
    "noise",
    "noise_ref",
    "seed",
    "relative_error",
    "sparsity_rate",
    "iterations",
    "final_J",
    "termination",
];

impl MetricsRecord {
    fn csv_fields(&self) -> [String; 12] {
        [
            self.label.clone(),
            self.prior.clone(),
            self.image.clone(),
            self.sigma_ker.to_string(),
            self.noise_level.to_string(),
            self.noise_ref.to_string(),
            self.seed.to_string(),
            format!("{:.10}", self.relative_error),
            format!("{:.10}", self.sparsity_rate),
            self.iterations.to_string(),
            format!("{:.10e}", self.final_objective),
            self.termination.to_string(),
        ]
    }
}

/// Writes a header and one row per record.
pub fn write_metrics_csv<W: Write>(records: &[MetricsRecord], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let io = |e: csv::Error| EbfError::Io(e.into());
    out.write_record(METRICS_HEADER).map_err(io)?;
    for r in records {
        out.write_record(r.csv_fields()).map_err(io)?;
    }
    out.flush()?;
    Ok(())
}

/// Everything an experiment produces.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub metrics: MetricsRecord,
    /// Compressed ground truth.
    pub truth: ImageGrid,
    pub observed: ImageGrid,
    pub restored: ImageGrid,
    pub solver: PalmResult,
    /// Noise precision handed to the solver.
    pub sigma: f64,
}

/// Runs the full pipeline in memory.
pub fn execute(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let original = cfg.image.load()?;
    let (truth, _) = prepare_ground_truth(&original, cfg.truncation_threshold)?;
    let (observed, sigma) = degrade(&truth, cfg.sigma_ker, cfg.noise_level, cfg.seed, cfg.noise_ref)?;
    let (h, w) = truth.shape();
    let op = SpectralOperator::gaussian_blur(cfg.sigma_ker, sigma, h, w)?;
    let model = SpectralModel::new(op, &observed)?;
    let lift = cfg.solver.omega.max(f64::MIN_POSITIVE);
    let gamma0: Vec<f64> = model.y_hat().iter().map(|v| if *v == 0.0 { lift } else { v.abs() }).collect();

    let start = Instant::now();
    let solver = palm_solve_model(&model, &cfg.prior, &cfg.solver, &gamma0)?;
    let wall_time = start.elapsed().as_secs_f64();

    let restored = dct2_inverse(&solver.x_final, h, w)?;
    let (relative_error, sparsity_rate) = compute_metrics(&restored, &truth, &solver.x_final)?;
    let metrics = MetricsRecord {
        label: cfg.label.clone(),
        prior: cfg.prior.describe(),
        image: cfg.image.to_string(),
        sigma_ker: cfg.sigma_ker,
        noise_level: cfg.noise_level,
        noise_ref: cfg.noise_ref,
        seed: cfg.seed,
        relative_error,
        sparsity_rate,
        iterations: solver.iterations(),
        final_objective: solver.final_objective(),
        termination: solver.termination.name(),
        wall_time,
    };
    Ok(ExperimentOutput { metrics, truth, observed, restored, solver, sigma })
}

/// `log(1 + 255·|x|/max|x|)`, rescaled to [0, 1] and laid out as an image.
pub fn coefficient_map(x: &[f64], height: usize, width: usize) -> Result<ImageGrid> {
    let max = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let denom = 256f64.ln();
    let pixels = x.iter().map(|v| if max == 0.0 { 0.0 } else { (255.0 * v.abs() / max).ln_1p() / denom }).collect();
    ImageGrid::new(height, width, pixels)
}

/// Writes restored.pgm, coeff_map.pgm, coeffs.csv, trace.csv, and metrics.csv.
pub fn write_outputs(dir: &Path, out: &ExperimentOutput) -> Result<()> {
    fs::create_dir_all(dir)?;
    let (h, w) = out.restored.shape();
    write_pgm(&dir.join("restored.pgm"), &out.restored)?;
    write_pgm(&dir.join("coeff_map.pgm"), &coefficient_map(&out.solver.x_final, h, w)?)?;
    let mut coeffs = std::io::BufWriter::new(fs::File::create(dir.join("coeffs.csv"))?);
    writeln!(coeffs, "index,value")?;
    for (i, v) in out.solver.x_final.iter().enumerate() {
        writeln!(coeffs, "{i},{v:.17e}")?;
    }
    coeffs.flush()?;
    out.solver.trace.write_csv(std::io::BufWriter::new(fs::File::create(dir.join("trace.csv"))?))?;
    write_metrics_csv(std::slice::from_ref(&out.metrics), fs::File::create(dir.join("metrics.csv"))?)
}

/// Runs one experiment and writes its files when `out_dir` is set.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<MetricsRecord> {
    let out = execute(cfg)?;
    log::info!(
        "{}: {} rel_err={:.4} sparsity={:.4} iters={} ({:.2}s)",
        cfg.label,
        out.metrics.prior,
        out.metrics.relative_error,
        out.metrics.sparsity_rate,
        out.metrics.iterations,
        out.metrics.wall_time
    );
    if let Some(dir) = &cfg.out_dir {
        write_outputs(dir, &out)?;
    }
    Ok(out.metrics)
}
