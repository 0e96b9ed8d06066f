//! Comatrix corings built from split direct systems of firm bimodules over prime fields.

pub mod algebra;
pub mod bimodule;
pub mod comatrix;
pub mod coring;
pub mod descent;
pub mod error;
pub mod galois;
pub mod instances;
pub mod linalg;
pub mod par;
pub mod poset;
pub mod report;
pub mod system;

pub use error::{Error, Result};
