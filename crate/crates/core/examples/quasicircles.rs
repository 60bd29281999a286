//! Interior components of the Basilica and the Rabbit and their mirror pairs.
//!
//!     cargo run --release --example quasicircles

use fractal_spectra::julia::params;
use fractal_spectra::spectral::{self, BASILICA_MULTIPLICITIES, QUASICIRCLE_ITERATIONS, RABBIT_MULTIPLICITIES};

fn main() -> fractal_spectra::Result<()> {
    for (name, c, mult) in [
        ("basilica", params::BASILICA, &BASILICA_MULTIPLICITIES[..]),
        ("rabbit", params::RABBIT, &RABBIT_MULTIPLICITIES[..]),
    ] {
        let qcs = spectral::quasicircles(c, mult, 256.0, QUASICIRCLE_ITERATIONS)?;
        println!("{name}");
        for q in &qcs {
            let px = q.grid.pixel_size;
            println!(
                "  QC{} x{}: component {} (partner {:?}), area {:.4}",
                q.label,
                q.multiplicity,
                q.component,
                q.partner,
                q.grid.filled_count() as f64 * px * px
            );
        }
    }
    Ok(())
}
