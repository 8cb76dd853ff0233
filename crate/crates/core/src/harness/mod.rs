//! Deblurring experiments: ground truth, degradation, solver runs, metrics,
//! and file output.

pub mod experiment;
pub mod pgm;
pub mod sweep;
pub mod synthetic;

pub use experiment::{
    compute_metrics, degrade, execute, prepare_ground_truth, run_experiment, ExperimentConfig, ExperimentOutput,
    ImageSource, MetricsRecord, NoiseRef,
};
pub use pgm::{read_pgm, write_pgm};
pub use sweep::{parse_sweep, run_sweep};
pub use synthetic::pseudo_cameraman;
