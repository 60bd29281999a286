//! Dirichlet eigenvalues along a real slice of parameters, written as CSV.
//!
//!     cargo run --release --example parameter_slice > slice.csv

use fractal_spectra::cli::parse_range;
use fractal_spectra::fem::BoundaryCondition;
use fractal_spectra::spectral::{self, JuliaSettings};
use num_complex::Complex64;

fn main() -> fractal_spectra::Result<()> {
    let settings = JuliaSettings { resolution: 64.0, ..JuliaSettings::default() };
    let cs: Vec<Complex64> = parse_range("-0.5:0.05:0.2")?.into_iter().map(|re| Complex64::new(re, 0.0)).collect();
    let table = spectral::parameter_slice(&cs, 10, BoundaryCondition::Dirichlet, &settings)?;
    table.write_csv(std::io::stdout().lock())?;
    Ok(())
}
