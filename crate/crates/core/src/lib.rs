pub mod analysis;
pub mod bessel;
pub mod error;
pub mod io;
pub mod microcanonical;
pub mod overlap;
pub mod rng;
pub mod spectral;
pub mod statekit;
pub mod wigner;

pub use error::{Error, Result};
