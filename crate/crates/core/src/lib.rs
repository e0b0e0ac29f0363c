//! Numerical toolkit for the trade-off between how much a measurement
//! learns about an unknown pure state and how much it disturbs it.

pub mod apps;
pub mod channels;
pub mod error;
pub mod haar;
pub mod matcore;
pub mod metrics;
pub mod optim;
pub mod povm;
pub mod tolerance;
pub mod tradeoff;
pub mod verify;

pub use error::{Error, Result};
pub use tolerance::Tolerances;
