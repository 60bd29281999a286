//! Snowflake spectra with both boundary conditions and their counting
//! functions.
//!
//!     cargo run --release --example snowflake_spectrum [level] [refine]

use fractal_spectra::fem::{self, BoundaryCondition, SolverOptions};
use fractal_spectra::geometry::{self, SnowflakeSpec};
use fractal_spectra::{mesh, spectral};

fn main() -> fractal_spectra::Result<()> {
    let mut args = std::env::args().skip(1).map(|s| s.parse::<u32>().ok());
    let level = args.next().flatten().unwrap_or(4);
    let refine = args.next().flatten().unwrap_or(1);
    let opts = SolverOptions::default().without_vectors();
    // quadratic meshes are pixel based and grow as b^-2level
    let runs = [(SnowflakeSpec::classic(level)?, refine), (SnowflakeSpec::quadratic(0.2, level.min(3))?, 0)];
    for (spec, refine) in runs {
        let m = mesh::mesh_snowflake(&spec, refine)?;
        let area = geometry::area_at_level(&spec)?;
        let dim = geometry::boxdim_closed_form(&spec)?;
        println!("{} ({} vertices)", spec.label(), m.num_vertices());
        for bc in [BoundaryCondition::Dirichlet, BoundaryCondition::Neumann] {
            let s = fem::compute_spectrum(&m, bc, 12, &opts, &spec.label())?;
            let first = bc.first_index();
            let shown: Vec<String> = s
                .eigenvalues
                .iter()
                .enumerate()
                .map(|(i, v)| format!("l{}={v:.2}", i + first))
                .collect();
            println!("  {bc}: {}", shown.join(" "));
            let cs = spectral::counting_series(&s, area, dim, f64::INFINITY)?;
            let last = cs.len() - 1;
            println!("  N({:.1}) = {}, D1 = {:.3}, D2 = {:.4}", cs.t[last], cs.n[last], cs.d1[last], cs.d2[last]);
        }
    }
    Ok(())
}
