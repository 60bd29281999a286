//! Weyl counting function of the c = 0.2 Julia set.
//!
//!     cargo run --release --example julia_counting > counting.csv

use fractal_spectra::fem::BoundaryCondition;
use fractal_spectra::julia::{self, JuliaSpec};
use fractal_spectra::spectral::{self, JuliaSettings};
use num_complex::Complex64;

fn main() -> fractal_spectra::Result<()> {
    let c = Complex64::new(0.2, 0.0);
    let settings = JuliaSettings { resolution: 128.0, ..JuliaSettings::default() };
    let area = julia::pixel_area(&julia::rasterize_filled(&JuliaSpec::new(c).max_iter(500).resolution(512.0))?);
    let s = spectral::julia_spectrum(c, 100, 60, BoundaryCondition::Dirichlet, &settings)?;
    let cs = spectral::counting_series(&s, area, 1.0351, f64::INFINITY)?;
    eprintln!("area {area:.4}, {} eigenvalues, truncated grid: {}", s.len(), cs.truncated);
    cs.write_csv(std::io::stdout().lock())?;
    Ok(())
}
