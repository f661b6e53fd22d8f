//! List-decoding laboratory for linear codes over small finite fields.

pub mod bounds;
pub mod chaining;
pub mod config;
pub mod error;
pub mod galois;
pub mod harness;
pub mod linear_code;
pub mod oracle;
pub mod plurality;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
