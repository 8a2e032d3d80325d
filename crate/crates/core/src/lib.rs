//! Invariant affine connections on frame algebras, their cone lifts, and
//! the chart-level tools used to test them.

pub mod clifford;
pub mod chart;
pub mod cone_lift;
pub mod connection;
pub mod error;
pub mod io;
pub mod lie;
pub mod metric;
pub mod ode;
pub mod report;
pub mod tensor;

pub use error::{Error, Result};
pub use tensor::DenseTensor;
