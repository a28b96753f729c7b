pub mod constants;
pub mod distributions;
pub mod error;
pub mod eta;
pub mod hadamard;
pub mod index;
pub mod io;
pub mod models;
pub mod propagator;
pub mod series;
pub mod special;
pub mod spectral;

pub use error::{Error, Result};
