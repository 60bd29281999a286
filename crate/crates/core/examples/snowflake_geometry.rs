//! Prefractal polygons, their areas and the closed-form limits.
//!
//!     cargo run --release --example snowflake_geometry

use fractal_spectra::geometry::{self, SnowflakeSpec};

fn main() -> fractal_spectra::Result<()> {
    let specs = [
        SnowflakeSpec::classic(0)?,
        SnowflakeSpec::quadratic(0.1, 0)?,
        SnowflakeSpec::quadratic(0.2, 0)?,
        SnowflakeSpec::quadratic(geometry::lattice_b(), 0)?,
    ];
    for base in specs {
        println!("{}", base.label());
        for level in 0..=5 {
            let spec = base.with_level(level)?;
            let poly = geometry::snowflake_polygon(&spec)?;
            println!(
                "  level {level}: {:6} vertices, shoelace {:.10}, formula {:.10}",
                poly.len(),
                poly.area(),
                geometry::area_at_level(&spec)?
            );
        }
        println!(
            "  limit area {:.5}, boundary dimension {:.5}",
            geometry::area_limit(&base)?,
            geometry::boxdim_closed_form(&base)?
        );
    }
    Ok(())
}
