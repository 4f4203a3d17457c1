pub mod algebra;
pub mod cli;
pub mod error;
mod fft;
pub mod finite;
pub mod sqt;
pub mod solvers;
pub mod symbol;
pub mod verify;

pub use error::{Error, Result};
pub use fft::max_grid;
