//! Gap filling of gridded data with a planar rotator Gibbs random field whose
//! pair interaction is a tunable nonlinear function of the cosine of spin
//! angle differences.

// `!(x > 0.0)` style checks reject NaN on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bias;
pub mod energy;
pub mod error;
pub mod grid;
pub mod harness;
pub mod io;
pub mod metrics;
pub mod numeric;
pub mod potential;
pub mod sampler;
pub mod synthdata;
pub mod transform;

pub use error::{GprError, Result};
