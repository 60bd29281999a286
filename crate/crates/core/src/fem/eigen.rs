//! Smallest eigenpairs of `K u = λ M u` for sparse symmetric pencils.
//!
//! Shift-invert block Krylov iteration with full mass-orthogonalization,
//! Rayleigh-Ritz on the pencil and thick restarts. Small problems go
//! through a dense solver.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::cholesky::Cholesky;
use super::sparse::CsrMatrix;
use crate::error::{Error, Result};
use crate::geometry::Point;

/// Below this many unknowns the pencil is solved densely.
pub const DENSE_LIMIT: usize = 300;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SolverOptions {
    /// Residual bound `‖Ku − λMu‖ ≤ tol·‖Mu‖`.
    pub tol: f64,
    pub max_restarts: usize,
    pub seed: u64,
    pub block_size: usize,
    pub keep_vectors: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_restarts: 500,
            seed: 0,
            block_size: 4,
            keep_vectors: true,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn without_vectors(mut self) -> Self {
        self.keep_vectors = false;
        self
    }
}

pub struct EigenProblem<'a> {
    pub stiffness: &'a CsrMatrix,
    pub mass: &'a CsrMatrix,
    /// Unknown positions, used for a nested-dissection ordering.
    pub coords: Option<&'a [Point]>,
    /// Factor `K − shift·M`; must make it positive definite.
    pub shift: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpairs {
    pub values: Vec<f64>,
    /// Mass-orthonormal eigenvectors.
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub converged: bool,
    /// Leading pairs meeting the tolerance.
    pub num_converged: usize,
    pub restarts: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn relative_residual(k: &CsrMatrix, m: &CsrMatrix, lambda: f64, u: &[f64]) -> f64 {
    let ku = k.mul_vec(u);
    let mu = m.mul_vec(u);
    let r: f64 = ku.iter().zip(&mu).map(|(a, b)| (a - lambda * b).powi(2)).sum::<f64>().sqrt();
    r / norm(&mu).max(f64::MIN_POSITIVE)
}

fn check_inputs(p: &EigenProblem, nev: usize) -> Result<()> {
    let n = p.stiffness.n;
    if p.mass.n != n {
        return Err(Error::Internal("stiffness and mass differ in size".into()));
    }
    if let Some(c) = p.coords {
        if c.len() != n {
            return Err(Error::Internal("coordinate count does not match matrix".into()));
        }
    }
    if nev > n {
        return Err(Error::invalid(format!(
            "requested {nev} eigenpairs but the problem has only {n} unknowns"
        )));
    }
    Ok(())
}

/// The `nev` smallest eigenpairs. A result with `converged == false` is
/// returned rather than an error so callers can report partial spectra.
pub fn solve(p: &EigenProblem, nev: usize, opts: &SolverOptions) -> Result<Eigenpairs> {
    check_inputs(p, nev)?;
    if !(opts.tol > 0.0) {
        return Err(Error::invalid("solver tolerance must be positive"));
    }
    if nev == 0 {
        return Ok(Eigenpairs {
            values: vec![],
            vectors: vec![],
            residuals: vec![],
            converged: true,
            num_converged: 0,
            restarts: 0,
        });
    }
    if p.stiffness.n <= DENSE_LIMIT {
        solve_dense(p, nev, opts)
    } else {
        solve_krylov(p, nev, opts)
    }
}

fn finish(p: &EigenProblem, values: Vec<f64>, vectors: Vec<Vec<f64>>, restarts: usize, tol: f64) -> Eigenpairs {
    let residuals: Vec<f64> = values
        .iter()
        .zip(&vectors)
        .map(|(&l, u)| relative_residual(p.stiffness, p.mass, l, u))
        .collect();
    let num_converged = residuals.iter().take_while(|&&r| r <= tol).count();
    Eigenpairs {
        converged: num_converged == values.len(),
        values,
        vectors,
        residuals,
        num_converged,
        restarts,
    }
}

/// Fix the arbitrary sign of each vector: the largest-magnitude entry is positive.
fn normalize_sign(v: &mut [f64]) {
    let mut best = 0.0f64;
    for &x in v.iter() {
        if x.abs() > best.abs() {
            best = x;
        }
    }
    if best < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn solve_dense(p: &EigenProblem, nev: usize, opts: &SolverOptions) -> Result<Eigenpairs> {
    let k = p.stiffness.to_dense();
    let m = p.mass.to_dense();
    let chol = m
        .clone()
        .cholesky()
        .ok_or(Error::NotPositiveDefinite { column: 0, pivot: f64::NAN })?;
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Internal("singular mass factor".into()))?;
    let c = &linv * &k * linv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let lt_inv = linv.transpose();
    let mut values = Vec::with_capacity(nev);
    let mut vectors = Vec::with_capacity(nev);
    for &j in order.iter().take(nev) {
        values.push(eig.eigenvalues[j]);
        let x: nalgebra::DVector<f64> = &lt_inv * eig.eigenvectors.column(j);
        let mut v: Vec<f64> = x.iter().copied().collect();
        normalize_sign(&mut v);
        vectors.push(v);
    }
    Ok(finish(p, values, vectors, 0, opts.tol))
}

struct Krylov<'a> {
    k: &'a CsrMatrix,
    m: &'a CsrMatrix,
    /// The factored matrix `K − σM`.
    a: CsrMatrix,
    factor: Cholesky,
    work: Vec<f64>,
    rng: ChaCha8Rng,
    /// Mass-orthonormal basis and its images under `K`.
    basis: Vec<Vec<f64>>,
    k_basis: Vec<Vec<f64>>,
}

/// Two passes of classical Gram-Schmidt in the mass inner product.
/// Returns `false` if `w` lies (numerically) in the span of `basis`.
fn m_orthonormalize(m: &CsrMatrix, basis: &[Vec<f64>], w: &mut [f64]) -> bool {
    let mut mw = m.mul_vec(w);
    let norm0 = dot(w, &mw).max(0.0).sqrt();
    if !(norm0 > 0.0) || !norm0.is_finite() {
        return false;
    }
    for _ in 0..2 {
        let coeffs: Vec<f64> = basis.iter().map(|v| dot(v, &mw)).collect();
        for (v, c) in basis.iter().zip(coeffs) {
            axpy(-c, v, w);
        }
        m.mul_vec_into(w, &mut mw);
    }
    let nrm = dot(w, &mw).max(0.0).sqrt();
    if !(nrm > 1e-10 * norm0) {
        return false;
    }
    w.iter_mut().for_each(|x| *x /= nrm);
    true
}

/// Ritz pairs of `K` on the span of `basis`, ascending. `k_basis[i] = K basis[i]`.
fn rayleigh_ritz(basis: &[Vec<f64>], k_basis: &[Vec<f64>], count: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let s = basis.len();
    let mut h = DMatrix::zeros(s, s);
    for i in 0..s {
        for j in 0..=i {
            let v = dot(&basis[i], &k_basis[j]);
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..s).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    order.truncate(count);
    let n = basis.first().map_or(0, Vec::len);
    let theta = order.iter().map(|&j| eig.eigenvalues[j]).collect();
    let vectors = order
        .iter()
        .map(|&j| {
            let mut y = vec![0.0; n];
            for (v, &c) in basis.iter().zip(eig.eigenvectors.column(j).iter()) {
                axpy(c, v, &mut y);
            }
            y
        })
        .collect();
    (theta, vectors)
}

impl Krylov<'_> {
    fn apply_op(&mut self, x: &[f64]) -> Vec<f64> {
        let mut y = self.m.mul_vec(x);
        self.factor.solve_in_place(&mut y, &mut self.work);
        y
    }

    /// `OP x` with one step of iterative refinement on the solve.
    fn apply_op_refined(&mut self, x: &[f64]) -> Vec<f64> {
        let b = self.m.mul_vec(x);
        let mut y = b.clone();
        self.factor.solve_in_place(&mut y, &mut self.work);
        let ay = self.a.mul_vec(&y);
        let mut r: Vec<f64> = b.iter().zip(&ay).map(|(p, q)| p - q).collect();
        self.factor.solve_in_place(&mut r, &mut self.work);
        axpy(1.0, &r, &mut y);
        y
    }

    fn random_vector(&mut self) -> Vec<f64> {
        (0..self.k.n).map(|_| self.rng.gen_range(-1.0..1.0)).collect()
    }

    fn push(&mut self, v: Vec<f64>) {
        self.k_basis.push(self.k.mul_vec(&v));
        self.basis.push(v);
    }

    /// Add a candidate direction; falls back to random vectors when it deflates.
    fn extend(&mut self, mut w: Vec<f64>) -> bool {
        for _ in 0..3 {
            if m_orthonormalize(self.m, &self.basis, &mut w) {
                self.push(w);
                return true;
            }
            w = self.random_vector();
        }
        false
    }

    /// Subspace iteration with refined solves on nearly converged Ritz
    /// vectors. Krylov vectors carry rounding noise in high-frequency modes
    /// that `K` amplifies by `O(h⁻²)`; one refined inverse step removes it.
    fn polish(&mut self, start: &[Vec<f64>], nev: usize, tol: f64, steps: usize) -> Option<(Vec<f64>, Vec<Vec<f64>>)> {
        let mut x = start.to_vec();
        for _ in 0..steps {
            let mut q: Vec<Vec<f64>> = Vec::with_capacity(x.len());
            for v in &x {
                let mut y = self.apply_op_refined(v);
                if m_orthonormalize(self.m, &q, &mut y) {
                    q.push(y);
                }
            }
            if q.len() < nev {
                return None;
            }
            let kq: Vec<Vec<f64>> = q.iter().map(|v| self.k.mul_vec(v)).collect();
            let (theta, ritz) = rayleigh_ritz(&q, &kq, q.len());
            let ok = (0..nev).all(|i| relative_residual(self.k, self.m, theta[i], &ritz[i]) <= tol);
            if ok {
                return Some((theta, ritz));
            }
            x = ritz;
        }
        None
    }
}

fn solve_krylov(p: &EigenProblem, nev: usize, opts: &SolverOptions) -> Result<Eigenpairs> {
    let n = p.stiffness.n;
    let a = if p.shift == 0.0 {
        p.stiffness.clone()
    } else {
        p.stiffness.add_scaled(1.0, p.mass, -p.shift)?
    };
    let factor = match p.coords {
        Some(c) => Cholesky::factor_geometric(&a, c)?,
        None => Cholesky::factor(&a, (0..n).collect())?,
    };
    let bs = opts.block_size.clamp(1, n);
    let keep = (nev + bs).min(n);
    let max_dim = (2 * (nev + bs)).max(nev + 4 * bs).max(20).min(n);

    let mut kr = Krylov {
        k: p.stiffness,
        m: p.mass,
        a,
        factor,
        work: Vec::new(),
        rng: ChaCha8Rng::seed_from_u64(opts.seed),
        basis: Vec::with_capacity(max_dim),
        k_basis: Vec::with_capacity(max_dim),
    };

    let mut block: Vec<Vec<f64>> = (0..bs).map(|_| kr.random_vector()).collect();
    let mut restarts = 0;
    let mut last_polish: Option<usize> = None;
    loop {
        // expand the basis block by block
        while kr.basis.len() < max_dim {
            let start = kr.basis.len();
            for x in &block {
                if kr.basis.len() >= max_dim {
                    break;
                }
                let w = kr.apply_op(x);
                kr.extend(w);
            }
            if kr.basis.len() == start {
                break;
            }
            block = kr.basis[start..].to_vec();
        }

        let want = keep.min(kr.basis.len());
        let (theta, ritz) = rayleigh_ritz(&kr.basis, &kr.k_basis, want);
        let residuals: Vec<f64> = (0..nev.min(want))
            .map(|i| relative_residual(p.stiffness, p.mass, theta[i], &ritz[i]))
            .collect();
        let exhausted = restarts >= opts.max_restarts || kr.basis.len() == n;
        if residuals.iter().all(|&r| r <= opts.tol) && want >= nev {
            return Ok(finalize(p, theta, ritz, nev, restarts, opts.tol));
        }
        let worst = residuals.iter().fold(0.0f64, |m, &r| m.max(r));
        let polish_due = want >= nev
            && worst <= 1e3 * opts.tol
            && last_polish.map_or(true, |r| restarts >= r + 10);
        if polish_due || (exhausted && want >= nev) {
            last_polish = Some(restarts);
            if let Some((theta, vecs)) = kr.polish(&ritz, nev, opts.tol, 3) {
                return Ok(finalize(p, theta, vecs, nev, restarts, opts.tol));
            }
        }
        if exhausted {
            return Ok(finalize(p, theta, ritz, nev, restarts, opts.tol));
        }

        // thick restart on the leading Ritz vectors
        restarts += 1;
        // expand from the worst pairs; vectors stuck at the rounding floor
        // would only feed noise into the basis
        let mut pick: Vec<usize> = (0..residuals.len()).filter(|&i| residuals[i] > opts.tol).collect();
        pick.sort_by(|&x, &y| residuals[y].total_cmp(&residuals[x]).then(x.cmp(&y)));
        pick.truncate(bs);
        pick.extend((nev..want).take(bs - pick.len()));
        block = pick.iter().map(|&i| ritz[i].clone()).collect();
        kr.basis.clear();
        kr.k_basis.clear();
        for y in ritz {
            kr.extend(y);
        }
    }
}

fn finalize(p: &EigenProblem, theta: Vec<f64>, ritz: Vec<Vec<f64>>, nev: usize, restarts: usize, tol: f64) -> Eigenpairs {
    let mut vectors: Vec<Vec<f64>> = ritz.into_iter().take(nev).collect();
    vectors.iter_mut().for_each(|v| normalize_sign(v));
    let values = theta.into_iter().take(nev).collect();
    finish(p, values, vectors, restarts, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{apply_bc, assemble, BoundaryCondition};
    use crate::mesh::TriMesh;
    use std::f64::consts::PI;

    fn square_problem(n: usize) -> (CsrMatrix, CsrMatrix, Vec<Point>) {
        let mesh = TriMesh::unit_square(n);
        let (k, m) = assemble(&mesh).unwrap();
        let sys = apply_bc(&k, &m, &mesh, BoundaryCondition::Dirichlet).unwrap();
        let coords = sys.dofs.iter().map(|&v| mesh.vertices[v]).collect();
        (sys.stiffness, sys.mass, coords)
    }

    #[test]
    fn krylov_matches_dense_on_medium_grid() {
        let (k, m, coords) = square_problem(24);
        let prob = EigenProblem { stiffness: &k, mass: &m, coords: Some(&coords), shift: 0.0 };
        let opts = SolverOptions::default();
        let sparse = solve_krylov(&prob, 6, &opts).unwrap();
        let dense = solve_dense(&prob, 6, &opts).unwrap();
        assert!(sparse.converged && dense.converged);
        for (a, b) in sparse.values.iter().zip(&dense.values) {
            assert!((a - b).abs() < 1e-8 * b, "{a} vs {b}");
        }
    }

    #[test]
    fn eigenvectors_are_mass_orthonormal() {
        let (k, m, coords) = square_problem(20);
        let prob = EigenProblem { stiffness: &k, mass: &m, coords: Some(&coords), shift: 0.0 };
        let r = solve(&prob, 5, &SolverOptions::default()).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let g = m.bilinear(&r.vectors[i], &r.vectors[j]);
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g - want).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn unit_square_dirichlet_spectrum() {
        let (k, m, coords) = square_problem(64);
        let prob = EigenProblem { stiffness: &k, mass: &m, coords: Some(&coords), shift: 0.0 };
        let r = solve(&prob, 3, &SolverOptions::default()).unwrap();
        assert!(r.converged);
        let l1 = 2.0 * PI * PI;
        let l2 = 5.0 * PI * PI;
        assert!((r.values[0] - l1).abs() < 0.01 * l1);
        assert!((r.values[1] - l2).abs() < 0.01 * l2);
        assert!((r.values[2] - l2).abs() < 0.01 * l2);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let (k, m, coords) = square_problem(20);
        let prob = EigenProblem { stiffness: &k, mass: &m, coords: Some(&coords), shift: 0.0 };
        let a = solve_krylov(&prob, 4, &SolverOptions::default()).unwrap();
        let b = solve_krylov(&prob, 4, &SolverOptions::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_too_many_pairs() {
        let (k, m, _) = square_problem(3);
        let prob = EigenProblem { stiffness: &k, mass: &m, coords: None, shift: 0.0 };
        assert!(matches!(solve(&prob, 10, &SolverOptions::default()), Err(Error::InvalidConfig(_))));
    }
}
