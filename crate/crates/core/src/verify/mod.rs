//! Monte Carlo harness, statistics and the named verification suites.

mod mc;
mod report;
pub mod scan;
mod stats;
mod suites;

pub use mc::MCConfig;
pub use report::{Check, CheckKind, SuiteReport};
pub use stats::*;
pub use suites::*;
