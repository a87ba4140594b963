pub mod checks;
pub mod ergodicity;
pub mod error;
pub mod expfun;
pub mod harness;
pub mod levy;
pub mod mellin;
pub mod numdiff;
pub mod path;
pub mod report;
pub mod rng;
pub mod special;
pub mod stats;

pub use error::{Error, Result};
pub use levy::{Cumulants, FamilyKind, Interval, LevyFamily};
