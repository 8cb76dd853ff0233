use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use ebf::harness::{run_experiment, run_sweep, ExperimentConfig, ImageSource, NoiseRef};
use ebf::kkt::{certify_local_min, gamma_family_kkt_points, global_kkt_minimizer, grid_oracle, ScalarProblem};
use ebf::palm::{SolverConfig, SurrogateMode};
use ebf::{Hyperprior, PriorKind, Result};

#[derive(Debug, Parser)]
#[command(name = "ebf", version, about = "Empirical-Bayes sparse hyperparameter estimation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Deblur one image and write restored.pgm, coeff_map.pgm, coeffs.csv, trace.csv, metrics.csv.
    Run(RunArgs),
    /// Run every block of a key=value config file and aggregate the metrics.
    Sweep(SweepArgs),
    /// KKT analysis of the scalar problem L(γ) for given p², q.
    Kkt(KktArgs),
}

#[derive(Debug, Args)]
pub struct PriorArgs {
    /// none, gamma, inv-gamma, half-gaussian, half-laplace, half-gg
    #[arg(long, default_value = "half-laplace")]
    pub prior: PriorKind,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub zeta: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
}

impl PriorArgs {
    pub fn build(&self) -> Result<Hyperprior> {
        // The half-Laplace default needs a scale when none is given.
        let beta = match (self.prior, self.beta) {
            (PriorKind::HalfLaplace, None) => Some(0.1),
            (_, b) => b,
        };
        Hyperprior::from_parts(self.prior, self.alpha, beta, self.zeta, self.theta)
    }
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    #[arg(long, default_value_t = 1e-4)]
    pub tau: f64,
    #[arg(long, default_value_t = 1e-16)]
    pub omega: f64,
    #[arg(long, default_value_t = 200)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// auto, logdet-only, or full-linear
    #[arg(long, default_value = "auto")]
    pub surrogate: SurrogateMode,
}

impl SolverArgs {
    pub fn build(&self) -> SolverConfig {
        SolverConfig {
            tau: self.tau,
            omega: self.omega,
            max_iter: self.max_iter,
            rel_tol: self.tol,
            surrogate: self.surrogate,
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// 8-bit PGM input image.
    #[arg(long, conflicts_with = "synthetic")]
    pub image: Option<PathBuf>,
    /// Use the built-in synthetic scene of this size instead of an image file.
    #[arg(long)]
    pub synthetic: Option<usize>,
    #[command(flatten)]
    pub prior: PriorArgs,
    #[arg(long, default_value_t = 1.0)]
    pub sigma_ker: f64,
    /// Noise standard deviation relative to the blurred image.
    #[arg(long, default_value_t = 0.1)]
    pub noise: f64,
    /// rms or max
    #[arg(long, default_value = "rms")]
    pub noise_ref: NoiseRef,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// DCT truncation threshold for the ground truth.
    #[arg(long, default_value_t = 0.025)]
    pub threshold: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, default_value = "ebf-out")]
    pub out_dir: PathBuf,
    #[arg(long, default_value = "run")]
    pub label: String,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Aggregated metrics CSV; printed to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct KktArgs {
    #[arg(long)]
    pub p2: f64,
    #[arg(long)]
    pub q: f64,
    #[command(flatten)]
    pub prior: PriorArgs,
    /// Grid points for the brute-force cross-check.
    #[arg(long, default_value_t = 20000)]
    pub resolution: usize,
    /// Print a CSV header and row instead of the table.
    #[arg(long)]
    pub csv: bool,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Kkt(args) => cmd_kkt(args),
    }
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let image = match (args.image, args.synthetic) {
        (Some(p), _) => ImageSource::Pgm(p),
        (None, Some(n)) => ImageSource::Synthetic(n),
        (None, None) => ImageSource::Synthetic(64),
    };
    let cfg = ExperimentConfig {
        label: args.label,
        image,
        truncation_threshold: args.threshold,
        sigma_ker: args.sigma_ker,
        noise_level: args.noise,
        noise_ref: args.noise_ref,
        seed: args.seed,
        prior: args.prior.build()?,
        solver: args.solver.build(),
        out_dir: Some(args.out_dir.clone()),
    };
    let m = run_experiment(&cfg)?;
    println!("prior           {}", m.prior);
    println!("noise           {} ({} reference)", m.noise_level, m.noise_ref);
    println!("relative_error  {:.6}", m.relative_error);
    println!("sparsity_rate   {:.6}", m.sparsity_rate);
    println!("iterations      {} ({})", m.iterations, m.termination);
    println!("final_J         {:.10e}", m.final_objective);
    println!("wall_time       {:.3}s", m.wall_time);
    println!("output          {}", args.out_dir.display());
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    match &args.out {
        Some(p) => {
            let records = run_sweep(&args.config, Some(p))?;
            println!("{} runs written to {}", records.len(), p.display());
        }
        None => {
            let records = run_sweep(&args.config, None)?;
            ebf::harness::experiment::write_metrics_csv(&records, std::io::stdout().lock())?;
        }
    }
    Ok(())
}

fn cmd_kkt(args: KktArgs) -> Result<()> {
    let prob = ScalarProblem::new(args.p2, args.q, args.prior.build()?)?;
    let points = gamma_family_kkt_points(&prob)?;
    let best = global_kkt_minimizer(&prob)?;
    let oracle = grid_oracle(&prob, args.resolution)?;
    let gap = (best.gamma - oracle).abs();
    let agree = gap <= 1e-6 * oracle.max(1.0);

    if args.csv {
        println!("p2,q,prior,num_points,global_gamma,global_L,oracle_gamma,agree");
        println!(
            "{},{},\"{}\",{},{:.12e},{:.12e},{:.12e},{}",
            args.p2,
            args.q,
            prob.prior.describe(),
            points.len(),
            best.gamma,
            prob.scalar_objective(best.gamma),
            oracle,
            agree
        );
        return Ok(());
    }
    println!("p2 = {}, q = {}, prior = {}", args.p2, args.q, prob.prior.describe());
    println!("{:>20} {:>20} {:>20} {:>20} {:>12}", "gamma", "multiplier", "L(gamma)", "class", "2nd order");
    for p in &points {
        let cert = match certify_local_min(&prob, p) {
            ebf::kkt::Certification::CertifiedLocalMin => "local-min",
            ebf::kkt::Certification::NotLocalMin => "not-min",
            ebf::kkt::Certification::Inconclusive => "?",
        };
        println!(
            "{:>20.12e} {:>20.12e} {:>20.12e} {:>20} {:>12}",
            p.gamma,
            p.multiplier,
            prob.scalar_objective(p.gamma),
            p.classification.name(),
            cert
        );
    }
    println!("global minimizer   {:.12e}", best.gamma);
    println!("grid oracle        {:.12e} ({})", oracle, if agree { "agrees" } else { "MISMATCH" });
    Ok(())
}
