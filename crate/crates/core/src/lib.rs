//! Prefractal snowflakes, filled Julia sets and their Laplacian spectra.

pub mod boxdim;
pub mod cli;
pub mod error;
pub mod fem;
pub mod geometry;
pub mod io;
pub mod julia;
pub mod mesh;
pub mod raster;
pub mod spectral;

pub use error::{Error, Result};
