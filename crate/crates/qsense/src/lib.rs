pub mod ensemble;
pub mod error;
pub mod estimation;
pub mod filter;
pub mod io;
pub mod numerics;
pub mod protocols;
pub mod qubit;
pub mod runner;
pub mod signal;

pub use error::{Error, Result};
