//! Conforming triangle meshes of snowflake and raster domains.

use std::collections::HashMap;
use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::geometry::{self, Point, SnowflakeKind, SnowflakeSpec};
use crate::raster::RasterGrid;

pub const DEFAULT_TRIANGLE_BUDGET: u64 = 5_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    pub vertices: Vec<Point>,
    /// Counterclockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    pub is_boundary: Vec<bool>,
    /// Nominal element size (edge length or pixel pitch), for reporting.
    pub h: f64,
}

impl TriMesh {
    pub fn new(vertices: Vec<Point>, triangles: Vec<[usize; 3]>, h: f64) -> Self {
        let is_boundary = boundary_flags(vertices.len(), &triangles);
        Self {
            vertices,
            triangles,
            is_boundary,
            h,
        }
    }

    /// The unit square split into `n x n` pixels, two triangles each.
    pub fn unit_square(n: usize) -> Self {
        let grid = RasterGrid::filled(n, n, [0.0, 0.0], 1.0 / n as f64);
        mesh_from_raster(&grid).expect("non-empty grid")
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_boundary(&self) -> usize {
        self.is_boundary.iter().filter(|&&b| b).count()
    }

    pub fn corners(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn signed_area(&self, t: usize) -> f64 {
        signed_area(self.corners(t))
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.signed_area(t)).sum()
    }

    pub fn centroid(&self, t: usize) -> Point {
        let [a, b, c] = self.corners(t);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    /// Unique undirected edges `(lo, hi)` with the number of incident triangles.
    pub fn edges(&self) -> Vec<((usize, usize), u32)> {
        let mut all = edge_list(&self.triangles);
        all.sort_unstable();
        let mut out: Vec<((usize, usize), u32)> = Vec::with_capacity(all.len() / 2 + 1);
        for e in all {
            match out.last_mut() {
                Some((last, n)) if *last == e => *n += 1,
                _ => out.push((e, 1)),
            }
        }
        out
    }

    /// `V - E + T`.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edges().len() as i64 + self.triangles.len() as i64
    }

    /// Vertices lying in the relative interior of some edge they do not belong to.
    pub fn hanging_vertices(&self, tol: f64) -> Vec<usize> {
        let edges = self.edges();
        let cell = edges
            .iter()
            .map(|((a, b), _)| geometry::dist(self.vertices[*a], self.vertices[*b]))
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        let key = |p: Point| ((p[0] / cell).floor() as i64, (p[1] / cell).floor() as i64);
        let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (v, p) in self.vertices.iter().enumerate() {
            buckets.entry(key(*p)).or_default().push(v);
        }
        let mut bad = Vec::new();
        for ((a, b), _) in &edges {
            let (p, q) = (self.vertices[*a], self.vertices[*b]);
            let (k0, k1) = (key(p), key(q));
            let d = [q[0] - p[0], q[1] - p[1]];
            let len2 = d[0] * d[0] + d[1] * d[1];
            for kx in k0.0.min(k1.0)..=k0.0.max(k1.0) {
                for ky in k0.1.min(k1.1)..=k0.1.max(k1.1) {
                    for &v in buckets.get(&(kx, ky)).into_iter().flatten() {
                        if v == *a || v == *b {
                            continue;
                        }
                        let r = self.vertices[v];
                        let w = [r[0] - p[0], r[1] - p[1]];
                        let t = (w[0] * d[0] + w[1] * d[1]) / len2;
                        let cross = (w[0] * d[1] - w[1] * d[0]).abs() / len2.sqrt();
                        if t > 0.0 && t < 1.0 && cross <= tol {
                            bad.push(v);
                        }
                    }
                }
            }
        }
        bad.sort_unstable();
        bad.dedup();
        bad
    }

    /// Plain-text mesh: `V T`, then `x y` per vertex, then `i j k` per triangle.
    pub fn write_off<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{} {}", self.vertices.len(), self.triangles.len())?;
        for v in &self.vertices {
            writeln!(w, "{} {}", v[0], v[1])?;
        }
        for t in &self.triangles {
            writeln!(w, "{} {} {}", t[0], t[1], t[2])?;
        }
        Ok(())
    }
}

pub(crate) fn signed_area(p: [Point; 3]) -> f64 {
    0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]))
}

fn edge_list(triangles: &[[usize; 3]]) -> Vec<(usize, usize)> {
    let mut all = Vec::with_capacity(3 * triangles.len());
    for t in triangles {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            all.push((a.min(b), a.max(b)));
        }
    }
    all
}

fn boundary_flags(nv: usize, triangles: &[[usize; 3]]) -> Vec<bool> {
    let mut all = edge_list(triangles);
    all.sort_unstable();
    let mut flags = vec![false; nv];
    let mut i = 0;
    while i < all.len() {
        let mut j = i + 1;
        while j < all.len() && all[j] == all[i] {
            j += 1;
        }
        if j - i == 1 {
            flags[all[i].0] = true;
            flags[all[i].1] = true;
        }
        i = j;
    }
    flags
}

fn check_budget(triangles: u64, budget: u64) -> Result<()> {
    if triangles > budget {
        return Err(Error::BudgetExceeded {
            what: "triangle count",
            requested: triangles,
            limit: budget,
        });
    }
    Ok(())
}

pub fn mesh_snowflake(spec: &SnowflakeSpec, refine_steps: u32) -> Result<TriMesh> {
    mesh_snowflake_with_budget(spec, refine_steps, DEFAULT_TRIANGLE_BUDGET)
}

/// Classic snowflakes are triangulated exactly by lattice triangles of side
/// `3^-level` followed by `refine_steps` midpoint subdivisions. Quadratic
/// snowflakes are rasterized at pitch `b^level / 2^refine_steps`, halved
/// when pixel centers would fall on polygon edges, and split into pixel
/// triangles with diagonals alternating about the center.
pub fn mesh_snowflake_with_budget(spec: &SnowflakeSpec, refine_steps: u32, budget: u64) -> Result<TriMesh> {
    let spec = spec.validated()?;
    let poly = geometry::snowflake_polygon(&spec)?;
    match spec.kind {
        SnowflakeKind::Classic => {
            let area = geometry::area_at_level(&spec)?;
            let s = 3f64.powi(-(spec.level as i32));
            let coarse = (area / (3f64.sqrt() / 4.0 * s * s)).round() as u64;
            check_budget(coarse.saturating_mul(4u64.saturating_pow(refine_steps)), budget)?;
            let mut mesh = lattice_mesh(&poly, s);
            for _ in 0..refine_steps {
                mesh = refine_with_budget(&mesh, budget)?;
            }
            Ok(mesh)
        }
        SnowflakeKind::Quadratic { a, b } => {
            let mut h = b.powi(spec.level as i32) / 2f64.powi(refine_steps as i32);
            let center = 0.5 * (2.0 * a + b);
            // a pixel center on a polygon edge makes inside/outside a tie that
            // breaks the symmetry; halving the pitch moves centers off edges
            let on_center_line = |h: f64| {
                poly.vertices.iter().any(|v| {
                    v.iter().any(|&x| {
                        let t = (x - center) / h - 0.5;
                        (t - t.round()).abs() < 1e-9
                    })
                })
            };
            if on_center_line(h) {
                h /= 2.0;
            }
            let area = geometry::area_at_level(&spec)?;
            check_budget((2.0 * area / (h * h)).ceil() as u64, budget)?;
            let grid = rasterize_polygon(&poly, h, [center, center]);
            // alternate diagonals about the center keep the D4 symmetry
            let kx0 = ((grid.origin[0] - center) / h).round() as i64;
            let ky0 = ((grid.origin[1] - center) / h).round() as i64;
            check_budget(2 * grid.filled_count() as u64, budget)?;
            raster_mesh(&grid, Some(kx0 + ky0))
        }
    }
}

/// Triangulate a polygon whose edges lie on the triangular lattice of side
/// `s` through the origin.
fn lattice_mesh(poly: &geometry::Polygon, s: f64) -> TriMesh {
    let row = s * 3f64.sqrt() / 2.0;
    let (lo, hi) = poly.bounding_box();
    let b0 = (lo[1] / row).floor() as i64 - 1;
    let b1 = (hi[1] / row).ceil() as i64 + 1;
    let mut index: HashMap<(i64, i64), usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    let mut vid = |a: i64, b: i64, vertices: &mut Vec<Point>| -> usize {
        *index.entry((a, b)).or_insert_with(|| {
            vertices.push([a as f64 * s + b as f64 * s / 2.0, b as f64 * row]);
            vertices.len() - 1
        })
    };
    let inside = |xs: &[f64], x: f64| xs.iter().take_while(|&&c| c < x).count() % 2 == 1;
    for b in b0..b1 {
        let up_y = (b as f64 + 1.0 / 3.0) * row;
        let down_y = (b as f64 + 2.0 / 3.0) * row;
        let up_x = poly.row_crossings(up_y);
        let down_x = poly.row_crossings(down_y);
        if up_x.is_empty() && down_x.is_empty() {
            continue;
        }
        let a0 = (lo[0] / s - b as f64 / 2.0).floor() as i64 - 2;
        let a1 = (hi[0] / s - b as f64 / 2.0).ceil() as i64 + 1;
        for a in a0..=a1 {
            let base = a as f64 + b as f64 / 2.0;
            if inside(&up_x, s * (base + 0.5)) {
                let t = [vid(a, b, &mut vertices), vid(a + 1, b, &mut vertices), vid(a, b + 1, &mut vertices)];
                triangles.push(t);
            }
            if inside(&down_x, s * (base + 1.0)) {
                let t = [
                    vid(a + 1, b, &mut vertices),
                    vid(a + 1, b + 1, &mut vertices),
                    vid(a, b + 1, &mut vertices),
                ];
                triangles.push(t);
            }
        }
    }
    TriMesh::new(vertices, triangles, s)
}

/// Pixels of pitch `h` whose centers lie inside `poly`; pixel edges sit on
/// `anchor + k h`.
pub fn rasterize_polygon(poly: &geometry::Polygon, h: f64, anchor: Point) -> RasterGrid {
    let (lo, hi) = poly.bounding_box();
    let kx0 = ((lo[0] - anchor[0]) / h).floor() as i64 - 1;
    let kx1 = ((hi[0] - anchor[0]) / h).ceil() as i64 + 1;
    let ky0 = ((lo[1] - anchor[1]) / h).floor() as i64 - 1;
    let ky1 = ((hi[1] - anchor[1]) / h).ceil() as i64 + 1;
    let (w, ht) = ((kx1 - kx0) as usize, (ky1 - ky0) as usize);
    let origin = [anchor[0] + kx0 as f64 * h, anchor[1] + ky0 as f64 * h];
    let mut grid = RasterGrid::empty(w, ht, origin, h);
    for j in 0..ht {
        let y = anchor[1] + ((ky0 + j as i64) as f64 + 0.5) * h;
        let xs = poly.row_crossings(y);
        let mut k = 0;
        for i in 0..w {
            let x = anchor[0] + ((kx0 + i as i64) as f64 + 0.5) * h;
            while k < xs.len() && xs[k] < x {
                k += 1;
            }
            if k % 2 == 1 {
                grid.set(i, j, true);
            }
        }
    }
    grid
}

pub fn mesh_from_raster(grid: &RasterGrid) -> Result<TriMesh> {
    mesh_from_raster_with_budget(grid, DEFAULT_TRIANGLE_BUDGET)
}

/// Two triangles per filled pixel, split along the lower-left to upper-right
/// diagonal; pixel corners shared between pixels are merged.
pub fn mesh_from_raster_with_budget(grid: &RasterGrid, budget: u64) -> Result<TriMesh> {
    check_budget(2 * grid.filled_count() as u64, budget)?;
    raster_mesh(grid, None)
}

/// With `alternate = Some(p)`, pixels with odd `i + j + p` use the other
/// diagonal.
fn raster_mesh(grid: &RasterGrid, alternate: Option<i64>) -> Result<TriMesh> {
    let filled = grid.filled_count();
    if filled == 0 {
        return Err(Error::Degenerate("raster has no filled pixels".into()));
    }
    let stride = grid.width + 1;
    let mut index = vec![usize::MAX; stride * (grid.height + 1)];
    let mut vertices = Vec::new();
    let mut triangles = Vec::with_capacity(2 * filled);
    let h = grid.pixel_size;
    let mut vid = |i: usize, j: usize, vertices: &mut Vec<Point>| -> usize {
        let k = j * stride + i;
        if index[k] == usize::MAX {
            index[k] = vertices.len();
            vertices.push([grid.origin[0] + i as f64 * h, grid.origin[1] + j as f64 * h]);
        }
        index[k]
    };
    for j in 0..grid.height {
        for i in 0..grid.width {
            if !grid.get(i, j) {
                continue;
            }
            let ll = vid(i, j, &mut vertices);
            let lr = vid(i + 1, j, &mut vertices);
            let ur = vid(i + 1, j + 1, &mut vertices);
            let ul = vid(i, j + 1, &mut vertices);
            let flip = alternate.is_some_and(|p| (i as i64 + j as i64 + p).rem_euclid(2) == 1);
            if flip {
                triangles.push([ll, lr, ul]);
                triangles.push([lr, ur, ul]);
            } else {
                triangles.push([ll, lr, ur]);
                triangles.push([ll, ur, ul]);
            }
        }
    }
    Ok(TriMesh::new(vertices, triangles, h))
}

pub fn refine(mesh: &TriMesh) -> Result<TriMesh> {
    refine_with_budget(mesh, DEFAULT_TRIANGLE_BUDGET)
}

/// Split every triangle into four through its edge midpoints.
pub fn refine_with_budget(mesh: &TriMesh, budget: u64) -> Result<TriMesh> {
    check_budget(4 * mesh.triangles.len() as u64, budget)?;
    let mut vertices = mesh.vertices.clone();
    let mut mids: HashMap<(usize, usize), usize> = HashMap::with_capacity(2 * mesh.triangles.len());
    let mut mid = |a: usize, b: usize, vertices: &mut Vec<Point>| -> usize {
        let key = (a.min(b), a.max(b));
        *mids.entry(key).or_insert_with(|| {
            let (p, q) = (vertices[key.0], vertices[key.1]);
            vertices.push([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
            vertices.len() - 1
        })
    };
    let mut triangles = Vec::with_capacity(4 * mesh.triangles.len());
    for &[a, b, c] in &mesh.triangles {
        let ab = mid(a, b, &mut vertices);
        let bc = mid(b, c, &mut vertices);
        let ca = mid(c, a, &mut vertices);
        triangles.push([a, ab, ca]);
        triangles.push([ab, b, bc]);
        triangles.push([ca, bc, c]);
        triangles.push([ab, bc, ca]);
    }
    Ok(TriMesh::new(vertices, triangles, mesh.h / 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classic_level_zero_is_one_triangle() {
        let m = mesh_snowflake(&SnowflakeSpec::classic(0).unwrap(), 0).unwrap();
        assert_eq!(m.num_triangles(), 1);
        assert_eq!(m.num_vertices(), 3);
        assert_eq!(m.num_boundary(), 3);
        assert!(m.signed_area(0) > 0.0);
    }

    #[test]
    fn classic_level_one_area() {
        let m = mesh_snowflake(&SnowflakeSpec::classic(1).unwrap(), 0).unwrap();
        let want = 3f64.sqrt() / 4.0 * (1.0 + 1.0 / 3.0);
        assert!((m.area() - want).abs() < 1e-14);
        assert_eq!(m.num_triangles(), 12);
        assert_eq!(m.num_vertices(), 13);
        assert_eq!(m.num_boundary(), 12);
    }

    #[test]
    fn classic_level_two_refined_matches_area() {
        let spec = SnowflakeSpec::classic(2).unwrap();
        let m = mesh_snowflake(&spec, 1).unwrap();
        assert!((m.area() - geometry::area_at_level(&spec).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn single_pixel_mesh() {
        let m = mesh_from_raster(&RasterGrid::filled(1, 1, [0.0, 0.0], 1.0)).unwrap();
        assert_eq!((m.num_triangles(), m.num_vertices(), m.num_boundary()), (2, 4, 4));
    }

    #[test]
    fn two_by_two_pixel_mesh() {
        let m = mesh_from_raster(&RasterGrid::filled(2, 2, [0.0, 0.0], 0.5)).unwrap();
        assert_eq!((m.num_triangles(), m.num_vertices(), m.num_boundary()), (8, 9, 8));
        let interior: Vec<_> = (0..9).filter(|&v| !m.is_boundary[v]).collect();
        assert_eq!(m.vertices[interior[0]], [0.5, 0.5]);
        assert_eq!(m.area(), 1.0);
    }

    #[test]
    fn empty_raster_is_rejected() {
        assert!(mesh_from_raster(&RasterGrid::empty(3, 3, [0.0, 0.0], 1.0)).is_err());
    }

    #[test]
    fn refine_counts() {
        let one = TriMesh::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]], 1.0);
        let r = refine(&one).unwrap();
        assert_eq!((r.num_triangles(), r.num_vertices()), (4, 6));
        assert!((r.area() - one.area()).abs() < 1e-14);
        let sq = refine(&refine(&TriMesh::unit_square(1)).unwrap()).unwrap();
        assert_eq!(sq.num_triangles(), 32);
        assert!(sq.hanging_vertices(1e-12).is_empty());
    }

    #[test]
    fn budget_errors() {
        let spec = SnowflakeSpec::classic(6).unwrap();
        let err = mesh_snowflake_with_budget(&spec, 2, 1000).unwrap_err();
        assert_eq!(err.exit_code(), 4);
        let grid = RasterGrid::filled(100, 100, [0.0, 0.0], 0.01);
        assert!(mesh_from_raster_with_budget(&grid, 100).is_err());
    }

    #[test]
    fn quadratic_mesh_is_raster_based() {
        let spec = SnowflakeSpec::quadratic(0.2, 2).unwrap();
        let m = mesh_snowflake(&spec, 0).unwrap();
        // b^2 = 0.04 puts pixel centers on the edges x = 0, so the pitch is halved
        assert!((m.h - 0.02).abs() < 1e-15);
        // triangle centroids are invariant under the quarter turn about (1/2, 1/2)
        let key = |p: Point| ((p[0] / m.h * 6.0).round() as i64, (p[1] / m.h * 6.0).round() as i64);
        let mut cs: Vec<_> = (0..m.num_triangles()).map(|t| key(m.centroid(t))).collect();
        let mut rot: Vec<_> = (0..m.num_triangles())
            .map(|t| {
                let c = m.centroid(t);
                key([1.0 - c[1], c[0]])
            })
            .collect();
        cs.sort_unstable();
        rot.sort_unstable();
        assert_eq!(cs, rot);
        // staircase area tracks the polygon area to within a perimeter strip
        let poly = geometry::snowflake_polygon(&spec).unwrap();
        assert!((m.area() - poly.area()).abs() < poly.perimeter() * m.h);
    }

    #[test]
    fn off_export() {
        let m = TriMesh::unit_square(1);
        let mut out = Vec::new();
        m.write_off(&mut out).unwrap();
        let s = String::from_utf8(out).unwrap();
        assert_eq!(s, "4 2\n0 0\n1 0\n1 1\n0 1\n0 1 2\n0 2 3\n");
    }
}
