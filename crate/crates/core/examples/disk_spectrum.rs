//! Dirichlet and Neumann eigenvalues of the unit disk (c = 0) and the unit
//! square against their analytic values.
//!
//!     cargo run --release --example disk_spectrum [resolution]

use fractal_spectra::fem::{self, BoundaryCondition, SolverOptions};
use fractal_spectra::mesh::TriMesh;
use fractal_spectra::spectral::{self, JuliaSettings};
use num_complex::Complex64;

// squares of the first zeros of J0, J1 (twice), J2 (twice)
const DISK_DIRICHLET: [f64; 5] = [5.783186, 14.681971, 14.681971, 26.374616, 26.374616];

fn main() -> fractal_spectra::Result<()> {
    let res: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(128.0);
    let settings = JuliaSettings { resolution: res, ..JuliaSettings::default() };
    let s = spectral::julia_spectrum(Complex64::new(0.0, 0.0), 100, 5, BoundaryCondition::Dirichlet, &settings)?;
    for (got, want) in s.eigenvalues.iter().zip(DISK_DIRICHLET) {
        println!("disk  {got:10.5}  exact {want:10.5}  rel {:+.4}", got / want - 1.0);
    }
    let n = spectral::julia_spectrum(Complex64::new(0.0, 0.0), 100, 3, BoundaryCondition::Neumann, &settings)?;
    println!("disk Neumann: {:?}", n.eigenvalues);

    let sq = TriMesh::unit_square(64);
    let opts = SolverOptions::default().without_vectors();
    let s = fem::compute_spectrum(&sq, BoundaryCondition::Dirichlet, 3, &opts, "unit square")?;
    let pi2 = std::f64::consts::PI.powi(2);
    println!("square {:?}  exact {:.5} {:.5}", s.eigenvalues, 2.0 * pi2, 5.0 * pi2);
    Ok(())
}
