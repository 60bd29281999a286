//! Snowflake prefractals generated by iterated function systems.
//!
//! Two families are supported: the classic Koch snowflake (three Koch
//! curves glued onto an equilateral triangle of side 1) and the quadratic
//! snowflake with parameters `a`, `b` satisfying `2a + b = 1` (four curves
//! glued onto the unit square).

use std::io::{self, Write};

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Deepest prefractal level the constructors accept.
pub const MAX_LEVEL: u32 = 8;

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// The `b` parameter for which `a^2 = b` and the prefractal vertices sit on a lattice.
pub fn lattice_b() -> f64 {
    3.0 - 2.0 * std::f64::consts::SQRT_2
}

/// One branch of an IFS: `x -> linear * x + offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    pub linear: [[f64; 2]; 2],
    pub offset: Point,
}

impl AffineMap {
    pub fn new(linear: [[f64; 2]; 2], offset: Point) -> Self {
        Self { linear, offset }
    }

    pub fn apply(&self, p: Point) -> Point {
        let m = &self.linear;
        [
            m[0][0] * p[0] + m[0][1] * p[1] + self.offset[0],
            m[1][0] * p[0] + m[1][1] * p[1] + self.offset[1],
        ]
    }

    /// Largest singular value of the linear part.
    pub fn operator_norm(&self) -> f64 {
        let [[a, b], [c, d]] = self.linear;
        // eigenvalues of M^T M
        let p = a * a + c * c;
        let q = a * b + c * d;
        let r = b * b + d * d;
        let mean = 0.5 * (p + r);
        let disc = (0.25 * (p - r) * (p - r) + q * q).sqrt();
        (mean + disc).sqrt()
    }

    pub fn is_contraction(&self) -> bool {
        self.operator_norm() < 1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SnowflakeKind {
    Classic,
    Quadratic { a: f64, b: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SnowflakeSpec {
    #[serde(flatten)]
    pub kind: SnowflakeKind,
    pub level: u32,
}

impl SnowflakeSpec {
    pub fn classic(level: u32) -> Result<Self> {
        Self {
            kind: SnowflakeKind::Classic,
            level,
        }
        .validated()
    }

    /// Quadratic snowflake parameterised by `b`; `a = (1 - b) / 2`.
    pub fn quadratic(b: f64, level: u32) -> Result<Self> {
        Self::quadratic_ab((1.0 - b) / 2.0, b, level)
    }

    pub fn quadratic_ab(a: f64, b: f64, level: u32) -> Result<Self> {
        Self {
            kind: SnowflakeKind::Quadratic { a, b },
            level,
        }
        .validated()
    }

    pub fn with_level(self, level: u32) -> Result<Self> {
        Self { level, ..self }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        if let SnowflakeKind::Quadratic { a, b } = self.kind {
            if !(a.is_finite() && b.is_finite()) {
                return Err(Error::invalid("quadratic snowflake parameters must be finite"));
            }
            if (2.0 * a + b - 1.0).abs() > 1e-12 {
                return Err(Error::invalid(format!(
                    "quadratic snowflake requires 2a + b = 1 (got a = {a}, b = {b})"
                )));
            }
            if !(b > 0.0 && b < 1.0) {
                return Err(Error::invalid(format!(
                    "quadratic snowflake requires 0 < b < 1 (got b = {b})"
                )));
            }
        }
        if self.level > MAX_LEVEL {
            return Err(Error::invalid(format!(
                "snowflake level {} exceeds the maximum of {MAX_LEVEL}",
                self.level
            )));
        }
        Ok(self)
    }

    /// Short identifier used in output metadata, e.g. `classic-L4`.
    pub fn label(&self) -> String {
        match self.kind {
            SnowflakeKind::Classic => format!("classic-L{}", self.level),
            SnowflakeKind::Quadratic { b, .. } => format!("quadratic-b{b}-L{}", self.level),
        }
    }
}

/// The IFS generating one side of the snowflake, acting on the unit segment
/// from `(0, 0)` to `(1, 0)`.
pub fn ifs_branches(spec: &SnowflakeSpec) -> Result<Vec<AffineMap>> {
    let spec = spec.validated()?;
    Ok(match spec.kind {
        SnowflakeKind::Classic => {
            let t = 1.0 / 3.0;
            let c = 1.0 / 6.0;
            let s = SQRT3 / 6.0;
            vec![
                AffineMap::new([[t, 0.0], [0.0, t]], [0.0, 0.0]),
                AffineMap::new([[c, -s], [s, c]], [t, 0.0]),
                AffineMap::new([[c, s], [-s, c]], [0.5, s]),
                AffineMap::new([[t, 0.0], [0.0, t]], [2.0 * t, 0.0]),
            ]
        }
        SnowflakeKind::Quadratic { a, b } => vec![
            AffineMap::new([[a, 0.0], [0.0, a]], [0.0, 0.0]),
            AffineMap::new([[0.0, -b], [b, 0.0]], [a, 0.0]),
            AffineMap::new([[b, 0.0], [0.0, b]], [a, b]),
            AffineMap::new([[0.0, b], [-b, 0.0]], [a + b, b]),
            AffineMap::new([[a, 0.0], [0.0, a]], [a + b, 0.0]),
        ],
    })
}

/// Simple closed polygon; the closing edge from the last vertex back to the
/// first is implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    pub vertices: Vec<Point>,
}

impl Polygon {
    pub fn new(vertices: Vec<Point>) -> Self {
        Self { vertices }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Shoelace area; positive for counterclockwise orientation.
    pub fn signed_area(&self) -> f64 {
        let mut acc = 0.0;
        for (p, q) in self.edges() {
            acc += p[0] * q[1] - q[0] * p[1];
        }
        0.5 * acc
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    pub fn perimeter(&self) -> f64 {
        self.edges().map(|(p, q)| dist(p, q)).sum()
    }

    pub fn edge_length_range(&self) -> (f64, f64) {
        self.edges()
            .map(|(p, q)| dist(p, q))
            .fold((f64::INFINITY, 0.0), |(lo, hi), l| (lo.min(l), hi.max(l)))
    }

    /// `(min, max)` corners of the axis-aligned bounding box.
    pub fn bounding_box(&self) -> (Point, Point) {
        bounding_box(&self.vertices)
    }

    pub fn centroid(&self) -> Point {
        let mut cx = 0.0;
        let mut cy = 0.0;
        let mut a = 0.0;
        for (p, q) in self.edges() {
            let w = p[0] * q[1] - q[0] * p[1];
            a += w;
            cx += (p[0] + q[0]) * w;
            cy += (p[1] + q[1]) * w;
        }
        [cx / (3.0 * a), cy / (3.0 * a)]
    }

    pub fn reverse(&mut self) {
        self.vertices.reverse();
    }

    /// Sorted x-coordinates where the horizontal line at `y` crosses the
    /// boundary (half-open rule on edge endpoints).
    pub fn row_crossings(&self, y: f64) -> Vec<f64> {
        let mut xs = Vec::new();
        for (p, q) in self.edges() {
            if (p[1] <= y) != (q[1] <= y) {
                let t = (y - p[1]) / (q[1] - p[1]);
                xs.push(p[0] + t * (q[0] - p[0]));
            }
        }
        xs.sort_by(f64::total_cmp);
        xs
    }

    pub fn contains(&self, p: Point) -> bool {
        self.row_crossings(p[1]).iter().filter(|&&x| x < p[0]).count() % 2 == 1
    }

    /// CSV with header `x,y`, one vertex per row, closing vertex omitted.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "x,y")?;
        for v in &self.vertices {
            writeln!(w, "{},{}", v[0], v[1])?;
        }
        Ok(())
    }
}

pub(crate) fn dist(p: Point, q: Point) -> f64 {
    (q[0] - p[0]).hypot(q[1] - p[1])
}

pub(crate) fn bounding_box(points: &[Point]) -> (Point, Point) {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in points {
        for d in 0..2 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    (lo, hi)
}

/// Base polygon in clockwise order. The IFS bump points to the left of each
/// directed edge, which is the exterior for a clockwise traversal.
fn base_polygon_cw(kind: SnowflakeKind) -> Vec<Point> {
    match kind {
        SnowflakeKind::Classic => vec![[0.0, 0.0], [0.5, SQRT3 / 2.0], [1.0, 0.0]],
        SnowflakeKind::Quadratic { a, b } => {
            let s = 2.0 * a + b;
            vec![[0.0, 0.0], [0.0, s], [s, s], [s, 0.0]]
        }
    }
}

/// Level-`m` prefractal boundary, counterclockwise.
pub fn snowflake_polygon(spec: &SnowflakeSpec) -> Result<Polygon> {
    let maps = ifs_branches(spec)?;
    let mut verts = base_polygon_cw(spec.kind);
    // start points of each sub-segment in the unit-segment frame
    let starts: Vec<Point> = maps.iter().map(|f| f.apply([0.0, 0.0])).collect();
    for _ in 0..spec.level {
        let n = verts.len();
        let mut next = Vec::with_capacity(n * maps.len());
        for i in 0..n {
            let p = verts[i];
            let q = verts[(i + 1) % n];
            let d = [q[0] - p[0], q[1] - p[1]];
            for s in &starts {
                next.push([
                    p[0] + d[0] * s[0] - d[1] * s[1],
                    p[1] + d[1] * s[0] + d[0] * s[1],
                ]);
            }
        }
        verts = next;
    }
    let mut poly = Polygon::new(verts);
    poly.reverse();
    Ok(poly)
}

/// Area enclosed by the level-`m` prefractal.
pub fn area_at_level(spec: &SnowflakeSpec) -> Result<f64> {
    let spec = spec.validated()?;
    let m = spec.level as i32;
    Ok(match spec.kind {
        SnowflakeKind::Classic => {
            let a0 = SQRT3 / 4.0;
            a0 / 5.0 * (8.0 - 3.0 * (4.0f64 / 9.0).powi(m))
        }
        SnowflakeKind::Quadratic { a, b } => {
            let ratio = 2.0 * a * a + 3.0 * b * b;
            let series: f64 = (0..m).map(|j| ratio.powi(j)).sum();
            (2.0 * a + b).powi(2) + 4.0 * b * b * series
        }
    })
}

/// Limit of [`area_at_level`] as the level tends to infinity.
pub fn area_limit(spec: &SnowflakeSpec) -> Result<f64> {
    let spec = spec.validated()?;
    match spec.kind {
        SnowflakeKind::Classic => Ok(2.0 * SQRT3 / 5.0),
        SnowflakeKind::Quadratic { a, b } => {
            let ratio = 2.0 * a * a + 3.0 * b * b;
            if ratio >= 1.0 {
                return Err(Error::invalid(format!(
                    "area series diverges: 2a^2 + 3b^2 = {ratio} >= 1"
                )));
            }
            Ok((2.0 * a + b).powi(2) + 4.0 * b * b / (1.0 - ratio))
        }
    }
}

/// Residual of the self-similarity equation `2 a^d + 3 b^d - 1`.
pub fn quadratic_dimension_residual(a: f64, b: f64, d: f64) -> f64 {
    2.0 * a.powf(d) + 3.0 * b.powf(d) - 1.0
}

/// Box-counting dimension of the limiting boundary curve.
pub fn boxdim_closed_form(spec: &SnowflakeSpec) -> Result<f64> {
    let spec = spec.validated()?;
    match spec.kind {
        SnowflakeKind::Classic => Ok(4.0f64.ln() / 3.0f64.ln()),
        SnowflakeKind::Quadratic { a, b } => {
            let f = |d: f64| quadratic_dimension_residual(a, b, d);
            let (mut lo, mut hi) = (1.0, 2.0);
            let (flo, fhi) = (f(lo), f(hi));
            // f is strictly decreasing in d
            if !(flo >= 0.0 && fhi <= 0.0) {
                return Err(Error::Internal(format!(
                    "no dimension root in [1, 2] for a = {a}, b = {b} (f(1) = {flo}, f(2) = {fhi})"
                )));
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let fm = f(mid);
                if fm == 0.0 {
                    return Ok(mid);
                }
                if fm > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= f64::EPSILON * 2.0 {
                    break;
                }
            }
            let d = 0.5 * (lo + hi);
            let res = f(d).abs();
            if res > 1e-12 {
                return Err(Error::Internal(format!(
                    "dimension bisection stalled with residual {res:e}"
                )));
            }
            Ok(d)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Point, b: Point, tol: f64) -> bool {
        (a[0] - b[0]).abs() <= tol && (a[1] - b[1]).abs() <= tol
    }

    #[test]
    fn classic_branches_match_printed_offsets() {
        let maps = ifs_branches(&SnowflakeSpec::classic(0).unwrap()).unwrap();
        assert_eq!(maps.len(), 4);
        assert!(close(maps[0].apply([1.0, 0.0]), [1.0 / 3.0, 0.0], 1e-15));
        assert!(close(maps[3].apply([0.0, 0.0]), [2.0 / 3.0, 0.0], 1e-15));
        // the middle two meet at the apex of the bump
        let apex = maps[1].apply([1.0, 0.0]);
        assert!(close(apex, maps[2].apply([0.0, 0.0]), 1e-15));
        assert!(close(apex, [0.5, SQRT3 / 6.0], 1e-15));
        assert!(close(maps[2].apply([1.0, 0.0]), [2.0 / 3.0, 0.0], 1e-15));
    }

    #[test]
    fn quadratic_branches_chain_along_unit_segment() {
        let spec = SnowflakeSpec::quadratic_ab(0.4, 0.2, 0).unwrap();
        let maps = ifs_branches(&spec).unwrap();
        assert_eq!(maps.len(), 5);
        assert!(close(maps[4].apply([0.0, 0.0]), [0.6, 0.0], 1e-15));
        for w in maps.windows(2) {
            assert!(close(w[0].apply([1.0, 0.0]), w[1].apply([0.0, 0.0]), 1e-15));
        }
        assert!(close(maps[4].apply([1.0, 0.0]), [1.0, 0.0], 1e-15));
    }

    #[test]
    fn every_branch_contracts() {
        for spec in [
            SnowflakeSpec::classic(0).unwrap(),
            SnowflakeSpec::quadratic(0.1, 0).unwrap(),
            SnowflakeSpec::quadratic(0.2, 0).unwrap(),
            SnowflakeSpec::quadratic(lattice_b(), 0).unwrap(),
        ] {
            for f in ifs_branches(&spec).unwrap() {
                assert!(f.is_contraction(), "{f:?}");
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(SnowflakeSpec::quadratic_ab(0.4, 0.3, 1).is_err());
        assert!(SnowflakeSpec::quadratic(1.2, 1).is_err());
        assert!(SnowflakeSpec::quadratic(0.0, 1).is_err());
        let err = SnowflakeSpec::classic(MAX_LEVEL + 1).unwrap_err();
        assert!(err.to_string().contains("maximum of 8"), "{err}");
    }

    #[test]
    fn classic_level_zero_is_unit_triangle() {
        let p = snowflake_polygon(&SnowflakeSpec::classic(0).unwrap()).unwrap();
        assert_eq!(p.len(), 3);
        assert!(p.signed_area() > 0.0);
        for (a, b) in p.edges() {
            assert!((dist(a, b) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn classic_edge_count_and_length() {
        for m in 0..=5 {
            let p = snowflake_polygon(&SnowflakeSpec::classic(m).unwrap()).unwrap();
            assert_eq!(p.len(), 3 * 4usize.pow(m));
            let (lo, hi) = p.edge_length_range();
            let h = 3f64.powi(-(m as i32));
            assert!((lo - h).abs() < 1e-12 && (hi - h).abs() < 1e-12);
        }
    }

    #[test]
    fn classic_level_one_is_twelve_pointed_star() {
        let p = snowflake_polygon(&SnowflakeSpec::classic(1).unwrap()).unwrap();
        assert_eq!(p.len(), 12);
        // outward bump below the base edge
        assert!(p.vertices.iter().any(|v| close(*v, [0.5, -SQRT3 / 6.0], 1e-12)));
    }

    #[test]
    fn quadratic_level_one_area() {
        let spec = SnowflakeSpec::quadratic(0.2, 1).unwrap();
        let p = snowflake_polygon(&spec).unwrap();
        assert_eq!(p.len(), 20);
        assert!((p.signed_area() - 1.16).abs() < 1e-12);
        assert!((area_at_level(&spec).unwrap() - 1.16).abs() < 1e-12);
    }

    #[test]
    fn area_values() {
        let a0 = area_at_level(&SnowflakeSpec::classic(0).unwrap()).unwrap();
        assert!((a0 - 3f64.sqrt() / 4.0).abs() < 1e-15);
        let lim = area_limit(&SnowflakeSpec::classic(0).unwrap()).unwrap();
        assert!((lim - 0.69282).abs() < 5e-6);
        let deep = area_at_level(&SnowflakeSpec::classic(8).unwrap()).unwrap();
        assert!(deep < lim && lim - deep < 0.01);

        let q = |b: f64| area_limit(&SnowflakeSpec::quadratic(b, 0).unwrap()).unwrap();
        assert!((q(0.1) - 1.07080).abs() < 5e-6);
        assert!((q(0.2) - 1.28571).abs() < 5e-6);
        assert!((q(0.2) - 9.0 / 7.0).abs() < 1e-12);
        assert!((q(lattice_b()) - 1.20711).abs() < 5e-6);
    }

    #[test]
    fn area_limit_rejects_divergent_series() {
        // 2a + b = 1 with 2a^2 + 3b^2 >= 1 needs b close to 1
        let spec = SnowflakeSpec::quadratic(0.8, 0).unwrap();
        assert!(area_limit(&spec).is_err());
    }

    #[test]
    fn dimension_values() {
        let d = boxdim_closed_form(&SnowflakeSpec::classic(0).unwrap()).unwrap();
        assert!((d - 1.26186).abs() < 1e-5);
        for (b, want, tol) in [(0.1, 1.15965, 1e-5), (0.2, 1.2811, 1e-4), (lattice_b(), 1.2465, 1e-4)] {
            let spec = SnowflakeSpec::quadratic(b, 0).unwrap();
            let d = boxdim_closed_form(&spec).unwrap();
            assert!((d - want).abs() < tol, "b = {b}: {d}");
            let a = (1.0 - b) / 2.0;
            assert!(quadratic_dimension_residual(a, b, d).abs() <= 1e-10);
        }
    }

    #[test]
    fn contains_and_crossings() {
        let sq = Polygon::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
        assert!(sq.contains([0.5, 0.5]));
        assert!(!sq.contains([1.5, 0.5]));
        assert_eq!(sq.row_crossings(0.25), vec![0.0, 1.0]);
        let mut out = Vec::new();
        sq.write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "x,y\n0,0\n1,0\n1,1\n0,1\n");
    }
}
