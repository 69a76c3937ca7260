//! Value preference extraction from short- and long-form model outputs,
//! generation-attribute metrics, and consistency statistics.

pub mod attributes;
pub mod consistency;
pub mod error;
pub mod export;
pub mod gaussian;
pub mod io;
pub mod longform;
pub mod manifest;
pub mod model;
pub mod synth;
pub mod trueskill;
pub mod validate;
pub mod values;

pub use error::{Error, Result};
pub use model::*;
pub use values::ValueSystem;
