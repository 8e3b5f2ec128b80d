//! Numerics for the Prabhakar discrete-time counting process (PDTP) and
//! random walks on graphs subordinated to it.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]
#![cfg_attr(test, allow(clippy::needless_range_loop))]

pub mod counting;
pub mod csv;
pub mod error;
pub mod extended;
pub mod graphwalk;
pub mod laplace;
pub mod montecarlo;
pub mod powerseries;
pub mod specfun;

pub use counting::{CtParams, Evaluator, PdtpParams, Route, StateDistribution};
pub use error::{Error, Result};
pub use graphwalk::{Graph, StochasticMatrix};
pub use montecarlo::{SamplerTable, WalkPath};
pub use powerseries::TruncatedSeries;
pub use specfun::SeriesEval;
