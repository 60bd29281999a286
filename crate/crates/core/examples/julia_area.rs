//! Filled Julia set areas by pixel counting, and Mandelbrot membership.
//!
//!     cargo run --release --example julia_area [resolution]

use fractal_spectra::julia::{self, params, JuliaSpec};
use num_complex::Complex64;

fn main() -> fractal_spectra::Result<()> {
    let res: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(512.0);
    let cases = [
        ("disk", Complex64::new(0.0, 0.0)),
        ("c = 0.2", Complex64::new(0.2, 0.0)),
        ("basilica", params::BASILICA),
        ("rabbit", params::RABBIT),
    ];
    for (name, c) in cases {
        let spec = JuliaSpec::new(c).max_iter(500).resolution(res);
        let grid = julia::rasterize_filled(&spec)?;
        println!(
            "{name:>9}: area {:.5} ({} px), in Mandelbrot set: {}",
            julia::pixel_area(&grid),
            grid.filled_count(),
            julia::mandelbrot_member(c, 500)
        );
    }
    println!("pi = {:.5}", std::f64::consts::PI);
    Ok(())
}
