pub mod asymptotics;
pub mod cli;
pub mod error;
pub mod field;
pub mod fingerprint;
pub mod monotonicity;
pub mod ode1d;
pub mod segregation;
pub mod solver;
pub mod verify;

pub use error::{PslabError, Result};
