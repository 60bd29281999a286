//! Sparse Cholesky factorization `P A P^T = L L^T`.
//!
//! The fill-reducing ordering is a geometric nested dissection driven by the
//! vertex coordinates of the mesh. The numeric phase is the up-looking
//! row-by-row algorithm over the elimination tree.

use crate::error::{Error, Result};
use crate::fem::sparse::CsrMatrix;
use crate::geometry::Point;

const LEAF_SIZE: usize = 64;
const NONE: usize = usize::MAX;

/// Fill-reducing permutation (`perm[new] = old`) by recursive coordinate
/// bisection. Each split takes the vertices left of the median coordinate
/// that touch the right half as separator and numbers it last.
pub fn nested_dissection(a: &CsrMatrix, coords: &[Point]) -> Vec<usize> {
    assert_eq!(a.n, coords.len());
    let mut out = Vec::with_capacity(a.n);
    let mut mark = vec![0u32; a.n];
    let mut stamp = 0u32;
    dissect((0..a.n).collect(), a, coords, &mut mark, &mut stamp, &mut out);
    debug_assert_eq!(out.len(), a.n);
    out
}

fn dissect(
    set: Vec<usize>,
    a: &CsrMatrix,
    coords: &[Point],
    mark: &mut [u32],
    stamp: &mut u32,
    out: &mut Vec<usize>,
) {
    if set.len() <= LEAF_SIZE {
        out.extend(set);
        return;
    }
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for &v in &set {
        for d in 0..2 {
            lo[d] = lo[d].min(coords[v][d]);
            hi[d] = hi[d].max(coords[v][d]);
        }
    }
    let axis = if hi[0] - lo[0] >= hi[1] - lo[1] { 0 } else { 1 };
    let mut keys: Vec<f64> = set.iter().map(|&v| coords[v][axis]).collect();
    let mid = keys.len() / 2;
    let (_, &mut median, _) = keys.select_nth_unstable_by(mid, f64::total_cmp);
    let (mut left, mut right): (Vec<usize>, Vec<usize>) =
        set.iter().partition(|&&v| coords[v][axis] < median);
    if left.is_empty() {
        (left, right) = set.iter().partition(|&&v| coords[v][axis] <= median);
    }
    if left.is_empty() || right.is_empty() {
        out.extend(set);
        return;
    }
    *stamp += 1;
    for &v in &right {
        mark[v] = *stamp;
    }
    let (separator, rest): (Vec<usize>, Vec<usize>) = left.into_iter().partition(|&v| {
        let (cols, _) = a.row(v);
        cols.iter().any(|&u| mark[u] == *stamp)
    });
    dissect(rest, a, coords, mark, stamp, out);
    dissect(right, a, coords, mark, stamp, out);
    out.extend(separator);
}

/// Lower-triangular factor in compressed-column form, diagonal entry first
/// in each column.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    perm: Vec<usize>,
    col_ptr: Vec<usize>,
    row_idx: Vec<u32>,
    values: Vec<f64>,
}

impl Cholesky {
    /// Factor `A` (symmetric; only the lower triangle of the permuted
    /// matrix is read) under the ordering `perm[new] = old`.
    pub fn factor(a: &CsrMatrix, perm: Vec<usize>) -> Result<Self> {
        let n = a.n;
        if perm.len() != n {
            return Err(Error::Internal("permutation length mismatch".into()));
        }
        let mut pinv = vec![NONE; n];
        for (new, &old) in perm.iter().enumerate() {
            pinv[old] = new;
        }
        // lower triangle of P A P^T, row by row
        let mut low_ptr = Vec::with_capacity(n + 1);
        low_ptr.push(0);
        let mut low_col = Vec::with_capacity(a.nnz() / 2 + n);
        let mut low_val = Vec::with_capacity(a.nnz() / 2 + n);
        for &old in &perm {
            let k = pinv[old];
            let (cols, vals) = a.row(old);
            for (&c, &v) in cols.iter().zip(vals) {
                let j = pinv[c];
                if j <= k {
                    low_col.push(j);
                    low_val.push(v);
                }
            }
            low_ptr.push(low_col.len());
        }

        let parent = etree(n, &low_ptr, &low_col);

        let mut mark = vec![NONE; n];
        let mut stack = vec![0usize; n];
        let mut path = vec![0usize; n];
        let mut counts = vec![1usize; n];
        for k in 0..n {
            let top = ereach(k, &low_ptr, &low_col, &parent, &mut mark, &mut stack, &mut path);
            for &j in &stack[top..] {
                counts[j] += 1;
            }
        }
        let mut col_ptr = Vec::with_capacity(n + 1);
        col_ptr.push(0);
        for &c in &counts {
            col_ptr.push(col_ptr.last().unwrap() + c);
        }
        let nnz = col_ptr[n];
        let mut row_idx = vec![0u32; nnz];
        let mut values = vec![0.0; nnz];
        let mut fill: Vec<usize> = col_ptr[..n].to_vec();

        mark.fill(NONE);
        let mut x = vec![0.0; n];
        for k in 0..n {
            let top = ereach(k, &low_ptr, &low_col, &parent, &mut mark, &mut stack, &mut path);
            for p in low_ptr[k]..low_ptr[k + 1] {
                x[low_col[p]] += low_val[p];
            }
            let mut d = x[k];
            x[k] = 0.0;
            for &j in &stack[top..] {
                let lkj = x[j] / values[col_ptr[j]];
                x[j] = 0.0;
                for p in col_ptr[j] + 1..fill[j] {
                    x[row_idx[p] as usize] -= values[p] * lkj;
                }
                d -= lkj * lkj;
                row_idx[fill[j]] = k as u32;
                values[fill[j]] = lkj;
                fill[j] += 1;
            }
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::NotPositiveDefinite {
                    column: perm[k],
                    pivot: d,
                });
            }
            row_idx[col_ptr[k]] = k as u32;
            values[col_ptr[k]] = d.sqrt();
            fill[k] = col_ptr[k] + 1;
        }
        Ok(Self {
            n,
            perm,
            col_ptr,
            row_idx,
            values,
        })
    }

    /// Factor with the coordinate nested-dissection ordering.
    pub fn factor_geometric(a: &CsrMatrix, coords: &[Point]) -> Result<Self> {
        Self::factor(a, nested_dissection(a, coords))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn factor_nnz(&self) -> usize {
        self.values.len()
    }

    /// Overwrite `b` with `A^{-1} b`.
    pub fn solve_in_place(&self, b: &mut [f64], work: &mut Vec<f64>) {
        let n = self.n;
        assert_eq!(b.len(), n);
        work.clear();
        work.extend(self.perm.iter().map(|&old| b[old]));
        let y = work.as_mut_slice();
        for j in 0..n {
            let (s, e) = (self.col_ptr[j], self.col_ptr[j + 1]);
            let yj = y[j] / self.values[s];
            y[j] = yj;
            for p in s + 1..e {
                y[self.row_idx[p] as usize] -= self.values[p] * yj;
            }
        }
        for j in (0..n).rev() {
            let (s, e) = (self.col_ptr[j], self.col_ptr[j + 1]);
            let mut acc = y[j];
            for p in s + 1..e {
                acc -= self.values[p] * y[self.row_idx[p] as usize];
            }
            y[j] = acc / self.values[s];
        }
        for (k, &old) in self.perm.iter().enumerate() {
            b[old] = y[k];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x, &mut Vec::new());
        x
    }
}

/// Elimination tree of a symmetric matrix given by its lower-triangular rows.
fn etree(n: usize, ptr: &[usize], col: &[usize]) -> Vec<usize> {
    let mut parent = vec![NONE; n];
    let mut ancestor = vec![NONE; n];
    for k in 0..n {
        for &j in &col[ptr[k]..ptr[k + 1]] {
            let mut i = j;
            while i != NONE && i < k {
                let next = ancestor[i];
                ancestor[i] = k;
                if next == NONE {
                    parent[i] = k;
                }
                i = next;
            }
        }
    }
    parent
}

/// Nonzero pattern of row `k` of `L` (off-diagonal), returned in
/// `stack[top..]` in topological order.
fn ereach(
    k: usize,
    ptr: &[usize],
    col: &[usize],
    parent: &[usize],
    mark: &mut [usize],
    stack: &mut [usize],
    path: &mut [usize],
) -> usize {
    let n = stack.len();
    let mut top = n;
    mark[k] = k;
    for &j in &col[ptr[k]..ptr[k + 1]] {
        if j >= k {
            continue;
        }
        let mut len = 0;
        let mut i = j;
        while mark[i] != k {
            path[len] = i;
            len += 1;
            mark[i] = k;
            i = parent[i];
        }
        while len > 0 {
            len -= 1;
            top -= 1;
            stack[top] = path[len];
        }
    }
    top
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::TriMesh;

    fn grid_laplacian(n: usize) -> (CsrMatrix, Vec<Point>) {
        let idx = |i: usize, j: usize| j * n + i;
        let mut t = Vec::new();
        let mut coords = Vec::new();
        for j in 0..n {
            for i in 0..n {
                coords.push([i as f64, j as f64]);
                t.push((idx(i, j), idx(i, j), 4.0));
                if i + 1 < n {
                    t.push((idx(i, j), idx(i + 1, j), -1.0));
                    t.push((idx(i + 1, j), idx(i, j), -1.0));
                }
                if j + 1 < n {
                    t.push((idx(i, j), idx(i, j + 1), -1.0));
                    t.push((idx(i, j + 1), idx(i, j), -1.0));
                }
            }
        }
        (CsrMatrix::from_triplets(n * n, &t), coords)
    }

    #[test]
    fn ordering_is_a_permutation() {
        let (a, coords) = grid_laplacian(40);
        let mut p = nested_dissection(&a, &coords);
        p.sort_unstable();
        assert_eq!(p, (0..1600).collect::<Vec<_>>());
    }

    #[test]
    fn solves_grid_laplacian() {
        let (a, coords) = grid_laplacian(37);
        let chol = Cholesky::factor_geometric(&a, &coords).unwrap();
        let x_true: Vec<f64> = (0..a.n).map(|i| ((i * 7919) % 113) as f64 - 50.0).collect();
        let b = a.mul_vec(&x_true);
        let x = chol.solve(&b);
        let err = x.iter().zip(&x_true).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        assert!(err < 1e-9, "{err}");
    }

    #[test]
    fn dissection_beats_natural_order_fill() {
        let (a, coords) = grid_laplacian(60);
        let nd = Cholesky::factor_geometric(&a, &coords).unwrap();
        let natural = Cholesky::factor(&a, (0..a.n).collect()).unwrap();
        assert!(nd.factor_nnz() < natural.factor_nnz(), "{} vs {}", nd.factor_nnz(), natural.factor_nnz());
    }

    #[test]
    fn matches_dense_solution() {
        let m = TriMesh::unit_square(5);
        let (k, mm) = crate::fem::assemble(&m).unwrap();
        let a = k.add_scaled(1.0, &mm, 3.0).unwrap();
        let chol = Cholesky::factor_geometric(&a, &m.vertices).unwrap();
        let b: Vec<f64> = (0..a.n).map(|i| (i as f64).sin()).collect();
        let x = chol.solve(&b);
        let dense = a.to_dense().cholesky().unwrap().solve(&nalgebra::DVector::from_vec(b));
        for (p, q) in x.iter().zip(dense.iter()) {
            assert!((p - q).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_indefinite() {
        let a = CsrMatrix::from_triplets(2, &[(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 1.0)]);
        let err = Cholesky::factor(&a, vec![0, 1]).unwrap_err();
        assert!(matches!(err, Error::NotPositiveDefinite { .. }));
    }
}
