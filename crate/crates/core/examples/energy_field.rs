//! Eigenfunction and energy images of a degenerate pair on the snowflake.
//!
//!     cargo run --release --example energy_field [out_dir]

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use fractal_spectra::fem::{self, energy_combination, energy_distribution, BoundaryCondition, EnergyVariant, SolverOptions};
use fractal_spectra::geometry::SnowflakeSpec;
use fractal_spectra::io::{render_field, write_pgm};
use fractal_spectra::mesh;

fn main() -> fractal_spectra::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "energy_out".into()));
    std::fs::create_dir_all(&dir)?;
    let m = mesh::mesh_snowflake(&SnowflakeSpec::classic(4)?, 0)?;
    let s = fem::compute_spectrum(&m, BoundaryCondition::Dirichlet, 6, &SolverOptions::default(), "classic L4")?;
    let vecs = s.eigenvectors.as_ref().expect("vectors kept");
    // lambda_4 and lambda_5 form a degenerate pair
    let e4 = energy_distribution(&m, &vecs[3], EnergyVariant::Gradient);
    let e5 = energy_distribution(&m, &vecs[4], EnergyVariant::Gradient);
    let sum = energy_combination(&e4, &e5, (1.0, 1.0))?;
    println!("lambda_4 = {:.3}, lambda_5 = {:.3}", s.eigenvalues[3], s.eigenvalues[4]);
    println!("energies {:.3} {:.3} (sum {:.3})", e4.total(), e5.total(), sum.total());

    let save = |name: &str, vals: &[f64], per_vertex: bool| -> std::io::Result<()> {
        let (w, h, img) = render_field(&m, vals, per_vertex, 400);
        write_pgm(BufWriter::new(File::create(dir.join(name))?), w, h, &img)
    };
    save("u4.pgm", &vecs[3], true)?;
    save("u5.pgm", &vecs[4], true)?;
    save("energy_4.pgm", &e4.values, false)?;
    save("energy_4_plus_5.pgm", &sum.values, false)?;
    let edge = energy_distribution(&m, &vecs[3], EnergyVariant::EdgeNormal);
    save("edge_energy_4.pgm", &edge.values, false)?;
    println!("images in {}", dir.display());
    Ok(())
}
