//! Stochastic simulation of well-stirred chemical reaction networks.
//!
//! The crate provides the exact stochastic simulation algorithm, the explicit
//! tau-leap, implicit and trapezoidal tau-leap baselines and the stabilized
//! second-kind Chebyshev tau-leap scheme (SK-τ-ROCK) together with its
//! invariant-measure postprocessor (PSK-τ-ROCK). Around the integrators sit an
//! analytical stability engine for the linear test problem, a matrix-free
//! spectral-radius estimator and a reproducible Monte-Carlo harness.
//!
//! Module map:
//!
//! - [`network`]: species, mass-action reactions, drift and compensated
//!   Poisson noise, built-in benchmark models and the model file format.
//! - [`chebyshev`]: Chebyshev polynomials and stage coefficients.
//! - [`stability`]: amplification polynomials and stage selection.
//! - [`spectral`]: nonlinear power method and analytic Jacobian.
//! - [`steppers`]: time integrators and the trajectory driver.
//! - [`analysis`]: ensembles, empirical pdfs, DDA and table reproduction.

pub mod analysis;
pub mod chebyshev;
mod error;
pub mod network;
pub mod rng;
pub mod spectral;
pub mod stability;
pub mod steppers;

pub use analysis::{EmpiricalPdf, EnsembleStats, Report, TableId};
pub use chebyshev::ChebyshevCoefficients;
pub use error::{Error, Result};
pub use network::{builtin_model, load_model, BuiltinModel, Model, ModelParams, ReactionNetwork};
pub use rng::RngStream;
pub use spectral::SpectralEstimate;
pub use stability::{StabilityCurve, StabilityFunctions, TestProblem};
pub use steppers::{Method, MethodConfig, StageRule, StepperState};
