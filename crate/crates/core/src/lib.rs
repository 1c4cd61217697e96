pub mod cli;
pub mod deviating;
pub mod error;
pub mod jacobi;
pub mod operator;
pub mod oracle;
pub mod quadrature;
mod roots;
pub mod solver;

pub use error::{Error, Result};
