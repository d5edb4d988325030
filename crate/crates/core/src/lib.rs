//! Vehicle-bridge interaction (VBI) simulation and drive-by identification of
//! vehicle parameters, bridge flexural rigidity and road unevenness from two
//! body-mounted accelerometers.

// `!(a > b)` is used deliberately so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bridge;
pub mod error;
pub mod estimator;
pub mod experiment;
pub mod measurement;
pub mod newmark;
pub mod pso;
pub mod road;
pub mod sim;
pub mod stats;
pub mod vehicle;

pub use error::{Error, Result};
