//! Locally D- and A-optimal approximate designs for gamma regression models
//! without intercept.
//!
//! The model has linear predictor `η = f(x)ᵀβ` with canonical reciprocal
//! link, giving the intensity `u(x, β) = η⁻²` and the information matrix
//! `M(ξ, β) = Σ ω_i u(x_i, β) f(x_i) f(x_i)ᵀ`.

pub mod analytic;
pub mod cli;
pub mod efficiency;
pub mod equivalence;
pub mod error;
pub mod linalg;
pub mod model;
pub mod solver;
pub mod transforms;

pub use analytic::{Classification, RegionLabel, ThreeFactorScenario};
pub use equivalence::{Criterion, VerificationReport};
pub use error::{DesignError, Result};
pub use model::{Design, ExperimentalRegion, GammaModel, LocalModel, ParameterPoint};
pub use solver::{SolverParams, SolverTrace};
