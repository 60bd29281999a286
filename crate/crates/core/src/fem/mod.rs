//! Piecewise-linear finite elements for `-Δu = λu`.

pub mod cholesky;
pub mod eigen;
pub mod energy;
pub mod sparse;

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, Point};
use crate::mesh::TriMesh;

pub use eigen::{EigenProblem, Eigenpairs, SolverOptions};
pub use energy::{energy_combination, energy_distribution, EnergyField, EnergyVariant};
pub use sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    Dirichlet,
    Neumann,
}

impl BoundaryCondition {
    /// Index of the first eigenvalue in the published numbering:
    /// Dirichlet spectra start at `λ_1`, Neumann spectra at `λ_0 = 0`.
    pub fn first_index(self) -> usize {
        match self {
            BoundaryCondition::Dirichlet => 1,
            BoundaryCondition::Neumann => 0,
        }
    }
}

impl std::fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BoundaryCondition::Dirichlet => "dirichlet",
            BoundaryCondition::Neumann => "neumann",
        })
    }
}

impl std::str::FromStr for BoundaryCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dirichlet" | "d" => Ok(BoundaryCondition::Dirichlet),
            "neumann" | "n" => Ok(BoundaryCondition::Neumann),
            other => Err(Error::invalid(format!("unknown boundary condition '{other}'"))),
        }
    }
}

/// P1 stiffness and mass matrices of a single triangle.
pub fn local_matrices(p: [Point; 3]) -> ([[f64; 3]; 3], [[f64; 3]; 3]) {
    let area = crate::mesh::signed_area(p);
    let mut b = [0.0; 3];
    let mut c = [0.0; 3];
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        b[i] = p[j][1] - p[k][1];
        c[i] = p[k][0] - p[j][0];
    }
    let mut stiff = [[0.0; 3]; 3];
    let mut mass = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            stiff[i][j] = (b[i] * b[j] + c[i] * c[j]) / (4.0 * area);
            mass[i][j] = if i == j { area / 6.0 } else { area / 12.0 };
        }
    }
    (stiff, mass)
}

/// Global stiffness and mass matrices.
pub fn assemble(mesh: &TriMesh) -> Result<(CsrMatrix, CsrMatrix)> {
    let n = mesh.num_vertices();
    let (lo, hi) = geometry::bounding_box(&mesh.vertices);
    let scale2 = (hi[0] - lo[0]).powi(2) + (hi[1] - lo[1]).powi(2);
    for t in 0..mesh.num_triangles() {
        let a = mesh.signed_area(t);
        if !(a > 1e-14 * scale2) {
            return Err(Error::Degenerate(format!(
                "triangle {t} has area {a:e} (orientation or degeneracy)"
            )));
        }
    }
    let mut rows: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    for ((a, b), _) in mesh.edges() {
        rows[a].push(b);
        rows[b].push(a);
    }
    for r in &mut rows {
        r.sort_unstable();
    }
    let mut k = CsrMatrix::from_pattern(&rows);
    drop(rows);
    let mut m = k.clone();
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let (ks, ms) = local_matrices(mesh.corners(t));
        for i in 0..3 {
            for j in 0..3 {
                let pos = k.find(tri[i], tri[j]).expect("pattern covers triangle");
                k.values[pos] += ks[i][j];
                m.values[pos] += ms[i][j];
            }
        }
    }
    Ok((k, m))
}

/// Matrices with boundary conditions applied.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub stiffness: CsrMatrix,
    pub mass: CsrMatrix,
    /// `dofs[r]` is the mesh vertex of reduced unknown `r`.
    pub dofs: Vec<usize>,
    pub num_vertices: usize,
    pub bc: BoundaryCondition,
}

impl ReducedSystem {
    /// Re-insert boundary zeros to get a per-vertex field.
    pub fn expand(&self, reduced: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.num_vertices];
        for (&v, &x) in self.dofs.iter().zip(reduced) {
            full[v] = x;
        }
        full
    }

    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.dofs.iter().map(|&v| full[v]).collect()
    }
}

/// Dirichlet eliminates boundary vertices; Neumann is natural and leaves
/// the matrices unchanged.
pub fn apply_bc(k: &CsrMatrix, m: &CsrMatrix, mesh: &TriMesh, bc: BoundaryCondition) -> Result<ReducedSystem> {
    if k.n != mesh.num_vertices() || m.n != k.n {
        return Err(Error::Internal("assembled matrices do not match mesh".into()));
    }
    match bc {
        BoundaryCondition::Neumann => Ok(ReducedSystem {
            stiffness: k.clone(),
            mass: m.clone(),
            dofs: (0..k.n).collect(),
            num_vertices: k.n,
            bc,
        }),
        BoundaryCondition::Dirichlet => {
            let dofs: Vec<usize> = (0..k.n).filter(|&v| !mesh.is_boundary[v]).collect();
            if dofs.is_empty() {
                return Err(Error::Degenerate(
                    "Dirichlet problem has no interior vertices".into(),
                ));
            }
            Ok(ReducedSystem {
                stiffness: k.principal_submatrix(&dofs),
                mass: m.principal_submatrix(&dofs),
                dofs,
                num_vertices: k.n,
                bc,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumMeta {
    pub domain: String,
    pub bc: BoundaryCondition,
    /// Element size of the mesh the spectrum was computed on.
    pub mesh_size: f64,
    pub tol: f64,
    pub dofs: usize,
}

/// Ascending eigenvalues with optional mass-orthonormal eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Per-vertex eigenvectors (boundary zeros included for Dirichlet).
    pub eigenvectors: Option<Vec<Vec<f64>>>,
    /// `‖Ku − λMu‖ / ‖Mu‖` per pair.
    pub residuals: Vec<f64>,
    pub converged: bool,
    pub meta: SpectrumMeta,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Eigenvalue by its conventional index (see [`BoundaryCondition::first_index`]).
    pub fn lambda(&self, index: usize) -> f64 {
        self.eigenvalues[index - self.meta.bc.first_index()]
    }

    /// CSV `index,eigenvalue` using the conventional numbering.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "index,eigenvalue")?;
        let first = self.meta.bc.first_index();
        for (i, v) in self.eigenvalues.iter().enumerate() {
            writeln!(w, "{},{}", i + first, v)?;
        }
        Ok(())
    }
}

/// Smallest `k` eigenpairs of an assembled pencil. Non-convergence is an
/// error carrying the partial result.
pub fn solve_smallest(stiffness: &CsrMatrix, mass: &CsrMatrix, k: usize, opts: &SolverOptions) -> Result<Eigenpairs> {
    let problem = EigenProblem {
        stiffness,
        mass,
        coords: None,
        shift: 0.0,
    };
    let pairs = eigen::solve(&problem, k, opts)?;
    if !pairs.converged {
        return Err(not_converged(&pairs, k, None));
    }
    Ok(pairs)
}

fn not_converged(pairs: &Eigenpairs, k: usize, meta: Option<SpectrumMeta>) -> Error {
    let meta = meta.unwrap_or(SpectrumMeta {
        domain: String::new(),
        bc: BoundaryCondition::Dirichlet,
        mesh_size: f64::NAN,
        tol: f64::NAN,
        dofs: pairs.vectors.first().map_or(0, Vec::len),
    });
    Error::NotConverged {
        requested: k,
        converged: pairs.num_converged,
        restarts: pairs.restarts,
        partial: Box::new(Spectrum {
            eigenvalues: pairs.values.clone(),
            eigenvectors: None,
            residuals: pairs.residuals.clone(),
            converged: false,
            meta,
        }),
    }
}

/// Neumann pencils are singular; factor `K + εM` with `ε` tiny relative to
/// the spectral scale `trace(K) / trace(M)`.
pub fn default_shift(system: &ReducedSystem) -> f64 {
    match system.bc {
        BoundaryCondition::Dirichlet => 0.0,
        BoundaryCondition::Neumann => -1e-8 * system.stiffness.trace() / system.mass.trace(),
    }
}

/// Assemble, apply boundary conditions and solve for the `k` smallest pairs.
pub fn compute_spectrum(
    mesh: &TriMesh,
    bc: BoundaryCondition,
    k: usize,
    opts: &SolverOptions,
    domain: &str,
) -> Result<Spectrum> {
    let (stiff, mass) = assemble(mesh)?;
    let system = apply_bc(&stiff, &mass, mesh, bc)?;
    drop((stiff, mass));
    let k = k.min(system.dofs.len());
    let coords: Vec<Point> = system.dofs.iter().map(|&v| mesh.vertices[v]).collect();
    let problem = EigenProblem {
        stiffness: &system.stiffness,
        mass: &system.mass,
        coords: Some(&coords),
        shift: default_shift(&system),
    };
    let pairs = eigen::solve(&problem, k, opts)?;
    let meta = SpectrumMeta {
        domain: domain.to_string(),
        bc,
        mesh_size: mesh.h,
        tol: opts.tol,
        dofs: system.dofs.len(),
    };
    if !pairs.converged {
        return Err(not_converged(&pairs, k, Some(meta)));
    }
    let eigenvectors = opts
        .keep_vectors
        .then(|| pairs.vectors.iter().map(|v| system.expand(v)).collect());
    Ok(Spectrum {
        eigenvalues: pairs.values,
        eigenvectors,
        residuals: pairs.residuals,
        converged: true,
        meta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_right_triangle_local_matrices() {
        let (k, m) = local_matrices([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        let kw = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        let mw = [[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((k[i][j] - kw[i][j]).abs() < 1e-15);
                assert!((m[i][j] - mw[i][j] / 24.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn stiffness_rows_sum_to_zero() {
        let mesh = crate::mesh::mesh_snowflake(&geometry::SnowflakeSpec::classic(2).unwrap(), 1).unwrap();
        let (k, m) = assemble(&mesh).unwrap();
        assert!(k.row_sums().iter().all(|s| s.abs() < 1e-12));
        assert!(k.is_symmetric(1e-12) && m.is_symmetric(1e-12));
        // total mass equals area
        let ones = vec![1.0; m.n];
        assert!((m.bilinear(&ones, &ones) - mesh.area()).abs() < 1e-12);
    }

    #[test]
    fn dirichlet_on_two_by_two_pixels_is_one_by_one() {
        let mesh = TriMesh::unit_square(2);
        let (k, m) = assemble(&mesh).unwrap();
        let sys = apply_bc(&k, &m, &mesh, BoundaryCondition::Dirichlet).unwrap();
        assert_eq!(sys.stiffness.n, 1);
        // 5-point stencil: the diagonal couplings cancel
        assert!((sys.stiffness.get(0, 0) - 4.0).abs() < 1e-14);
        let neu = apply_bc(&k, &m, &mesh, BoundaryCondition::Neumann).unwrap();
        assert_eq!(neu.dofs, (0..9).collect::<Vec<_>>());
    }

    #[test]
    fn dirichlet_without_interior_is_an_error() {
        let mesh = TriMesh::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]], 1.0);
        let (k, m) = assemble(&mesh).unwrap();
        assert!(apply_bc(&k, &m, &mesh, BoundaryCondition::Dirichlet).is_err());
    }

    #[test]
    fn rejects_clockwise_triangle() {
        let mesh = TriMesh::new(vec![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]], vec![[0, 1, 2]], 1.0);
        assert!(matches!(assemble(&mesh), Err(Error::Degenerate(_))));
    }

    #[test]
    fn bc_parsing() {
        assert_eq!("Dirichlet".parse::<BoundaryCondition>().unwrap(), BoundaryCondition::Dirichlet);
        assert_eq!("neumann".parse::<BoundaryCondition>().unwrap(), BoundaryCondition::Neumann);
        assert!("robin".parse::<BoundaryCondition>().is_err());
    }
}
