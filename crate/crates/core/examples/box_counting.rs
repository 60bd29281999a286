//! Box-counting dimension of snowflake and Julia set boundaries.
//!
//!     cargo run --release --example box_counting

use fractal_spectra::boxdim;
use fractal_spectra::geometry::{self, SnowflakeSpec};
use num_complex::Complex64;

fn main() -> fractal_spectra::Result<()> {
    let seg = boxdim::segment_self_test()?;
    println!("segment: {:.4}", seg.dimension);

    for spec in [SnowflakeSpec::classic(6)?, SnowflakeSpec::quadratic(0.2, 8)?] {
        let (series, fit) = boxdim::snowflake_dimension(&spec)?;
        println!(
            "{}: estimate {:.4} (fit error {:.4}, {} sizes), exact {:.4}",
            spec.label(),
            fit.dimension,
            fit.fit_error,
            series.len(),
            geometry::boxdim_closed_form(&spec)?
        );
    }

    let widths = boxdim::default_image_widths();
    for re in [0.2, -0.5] {
        let (_, fit) = boxdim::julia_dimension_images(Complex64::new(re, 0.0), 500, &widths)?;
        println!("julia c = {re}: {:.4} (fit error {:.4})", fit.dimension, fit.fit_error);
    }
    Ok(())
}
