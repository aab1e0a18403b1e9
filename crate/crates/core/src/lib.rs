pub mod baseline;
pub mod error;
pub mod family;
pub mod inference;
pub mod properties;
pub mod quadrature;
pub mod simulation;

pub use baseline::{Baseline, BaselineSpec};
pub use error::{Error, Result};
pub use family::GmopgParams;
