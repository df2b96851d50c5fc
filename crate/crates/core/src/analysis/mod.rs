//! Monte-Carlo ensembles, empirical distributions and comparisons against
//! analytical and published reference values.

mod cme;
mod ensemble;
mod gof;
mod pdf;
mod stats;
mod tables;
mod variance;

pub use cme::cme_transient_1d;
pub use ensemble::{
    run_ensemble, run_ensemble_at, EnsembleOptions, EnsembleResult, MAX_FAILURE_FRACTION,
};
pub use gof::{chi_squared_binomial, ChiSquaredTest};
pub use pdf::{dda, EmpiricalPdf};
pub use stats::{EnsembleStats, MomentAccumulator};
pub use tables::{
    reference, reproduce_table, schlogl_reference, Check, Report, ReportRow, TableId, TableOptions,
    DDA_NOISE, SCHLOGL_MAX_STATE,
};
pub use variance::{burn_in_steps, variance_ratio_check, VarianceCheck};
