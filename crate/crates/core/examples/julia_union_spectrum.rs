//! Basilica and Rabbit spectra: the iteration domains and the union of the
//! quasicircle spectra.
//!
//!     cargo run --release --example julia_union_spectrum [resolution]

use fractal_spectra::fem::BoundaryCondition;
use fractal_spectra::julia::params;
use fractal_spectra::spectral::{self, JuliaSettings, BASILICA_MULTIPLICITIES, RABBIT_MULTIPLICITIES};

fn main() -> fractal_spectra::Result<()> {
    let res: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(192.0);
    let settings = JuliaSettings { resolution: res, ..JuliaSettings::default() };
    for (name, c, mult) in [
        ("basilica", params::BASILICA, &BASILICA_MULTIPLICITIES[..]),
        ("rabbit", params::RABBIT, &RABBIT_MULTIPLICITIES[..]),
    ] {
        let table = spectral::iteration_comparison(c, &[10, 20], 5, BoundaryCondition::Dirichlet, &settings)?;
        for (n, col) in table.iterations.iter().zip(&table.columns) {
            println!("{name} {n:>3} iterations: {col:.2?}");
        }
        let (union, _) = spectral::quasicircle_union(c, mult, 5, &settings)?;
        let head: Vec<String> = union.entries.iter().take(7).map(|(v, l)| format!("{v:.2}({l})")).collect();
        println!("{name} union: {}", head.join(" "));
    }
    Ok(())
}
