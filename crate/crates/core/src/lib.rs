//! Empirical-Bayes hyperparameter estimation for sparse linear inverse
//! problems.
//!
//! * [`hyperprior`]: generalized-Gamma hyperpriors and their derivatives.
//! * [`polyroots`]: real roots of quadratics, cubics, and quartics.
//! * [`kkt`]: univariate KKT analysis of a single hyperparameter.
//! * [`spectral`]: DCT-diagonalized deblurring model and a dense oracle.
//! * [`palm`]: the proximal alternating linearized minimization solver.
//! * [`harness`]: deblurring experiments, metrics, and file output.

pub mod error;
pub mod harness;
pub mod hyperprior;
pub mod kkt;
pub mod palm;
pub mod polyroots;
pub mod spectral;

pub use error::{EbfError, Result};
pub use hyperprior::{Curvature, Hyperprior, PriorKind};
