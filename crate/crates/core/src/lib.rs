pub mod cli;
pub mod data;
pub mod error;
pub mod nn;
pub mod relevance;
pub mod rng;
pub mod shapley;

pub use error::{Error, Result};
