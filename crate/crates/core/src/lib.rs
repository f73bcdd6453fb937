pub mod analysis;
pub mod circuit;
pub mod cli;
pub mod error;
pub mod numkernel;
pub mod polysys;
pub mod solver;
pub mod tolerances;

pub use error::{Error, Result};
pub use tolerances::Tolerances;
