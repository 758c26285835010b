//! Numeric kernels: special functions, quadrature, root finding,
//! optimization and basic sample statistics.

pub mod optimize;
// published coefficient tables are kept digit for digit
#[allow(clippy::excessive_precision)]
pub mod quadrature;
pub mod roots;
pub mod seed;
#[allow(clippy::excessive_precision)]
pub mod special;
pub mod stats;
