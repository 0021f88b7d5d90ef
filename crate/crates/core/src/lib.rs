pub mod catalog;
pub mod classifier;
pub mod dsl;
pub mod error;
pub mod jet;
pub mod representation;
pub mod solver;
pub mod variational;

pub use error::{Error, Result};
