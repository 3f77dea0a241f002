//! Formal theory of linear systems of partial differential equations.

pub mod error;
pub mod exactalg;
pub mod jetspace;
pub mod system;
pub mod deltacohomology;
pub mod catalog;
pub mod sequence;
pub mod checks;

pub use error::{Error, Result};
