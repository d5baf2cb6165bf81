//! Independent reference implementations used by the test suites. Nothing
//! here depends on the synthesis crates, so an oracle cannot inherit a bug
//! from the code it checks.

pub mod demod;
pub mod linalg;
pub mod spectrum;
pub mod stats;

/// Sample rate all oracles assume.
pub const FS: f64 = 6000.0;
