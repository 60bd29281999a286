//! Filled Julia sets of `z^2 + c` by escape-time iteration.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::raster::RasterGrid;

pub use crate::raster::{boundary_cells, interior_components, pixel_area, ComponentSet};

pub const DEFAULT_PIXEL_BUDGET: u64 = 100_000_000;

/// Named parameters.
pub mod params {
    use num_complex::Complex64;

    pub const BASILICA: Complex64 = Complex64::new(-1.0, 0.0);
    /// Center of the period-3 hyperbolic component (Douady rabbit).
    pub const RABBIT: Complex64 = Complex64::new(-0.122561, 0.744862);
    /// Tangency of the main cardioid with the period-2 bulb.
    pub const BASILICA_JUNCTION: Complex64 = Complex64::new(-0.75, 0.0);

    /// Tangency of the main cardioid with the period-3 bulb,
    /// `c = mu/2 - mu^2/4` at `mu = exp(2 pi i / 3)`.
    pub fn rabbit_junction() -> Complex64 {
        Complex64::new(-0.125, 3.0 * 3f64.sqrt() / 8.0)
    }
}

/// Axis-aligned rectangle in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BBox {
    pub min: Point,
    pub max: Point,
}

impl BBox {
    pub fn new(min: Point, max: Point) -> Self {
        Self { min, max }
    }

    pub fn square(half_width: f64) -> Self {
        Self::new([-half_width, -half_width], [half_width, half_width])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JuliaSpec {
    pub c: Complex64,
    pub max_iter: u32,
    pub escape_radius: f64,
    pub bbox: BBox,
    /// Pixels per unit length.
    pub resolution: f64,
}

impl JuliaSpec {
    /// Defaults: 100 iterations, escape radius 2, box `[-2, 2]^2`, 256 px/unit.
    pub fn new(c: Complex64) -> Self {
        Self {
            c,
            max_iter: 100,
            escape_radius: 2.0,
            bbox: BBox::square(2.0),
            resolution: 256.0,
        }
    }

    pub fn max_iter(mut self, n: u32) -> Self {
        self.max_iter = n;
        self
    }

    pub fn resolution(mut self, r: f64) -> Self {
        self.resolution = r;
        self
    }

    pub fn bbox(mut self, bbox: BBox) -> Self {
        self.bbox = bbox;
        self
    }

    pub fn escape_radius(mut self, r: f64) -> Self {
        self.escape_radius = r;
        self
    }

    pub fn pixel_size(&self) -> f64 {
        1.0 / self.resolution
    }

    fn validate(&self) -> Result<()> {
        if !(self.c.re.is_finite() && self.c.im.is_finite()) {
            return Err(Error::invalid("Julia parameter must be finite"));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter must be positive"));
        }
        if !(self.escape_radius >= 2.0) {
            return Err(Error::invalid(format!(
                "escape radius must be at least 2 (got {})",
                self.escape_radius
            )));
        }
        if !(self.resolution.is_finite() && self.resolution > 0.0) {
            return Err(Error::invalid("resolution must be positive"));
        }
        let b = &self.bbox;
        if !(b.max[0] > b.min[0] && b.max[1] > b.min[1]) {
            return Err(Error::invalid("bounding box is empty"));
        }
        Ok(())
    }
}

/// Smallest `n <= max_iter` with `|p_c^n(z)| > radius`, or `None` when the
/// orbit stays bounded that long.
pub fn escape_iterations(z: Complex64, c: Complex64, max_iter: u32, radius: f64) -> Option<u32> {
    let r2 = radius * radius;
    let mut z = z;
    if z.norm_sqr() > r2 {
        return Some(0);
    }
    for n in 1..=max_iter {
        z = z * z + c;
        if z.norm_sqr() > r2 {
            return Some(n);
        }
    }
    None
}

/// Whether the critical orbit stays within radius 2 for `max_iter` steps.
pub fn mandelbrot_member(c: Complex64, max_iter: u32) -> bool {
    escape_iterations(Complex64::new(0.0, 0.0), c, max_iter, 2.0).is_none()
}

pub fn rasterize_filled(spec: &JuliaSpec) -> Result<RasterGrid> {
    rasterize_filled_with_budget(spec, DEFAULT_PIXEL_BUDGET)
}

/// Rasterize `{z : |p_c^n(z)| <= R for n <= max_iter}` by testing pixel
/// centers. Pixel edges sit on integer multiples of the pixel size, so the
/// grid is exactly symmetric under `z -> -z` (and conjugation for real `c`)
/// whenever the box is.
pub fn rasterize_filled_with_budget(spec: &JuliaSpec, budget: u64) -> Result<RasterGrid> {
    spec.validate()?;
    let h = spec.pixel_size();
    let kx0 = (spec.bbox.min[0] / h).floor() as i64;
    let kx1 = (spec.bbox.max[0] / h).ceil() as i64;
    let ky0 = (spec.bbox.min[1] / h).floor() as i64;
    let ky1 = (spec.bbox.max[1] / h).ceil() as i64;
    let width = (kx1 - kx0) as u64;
    let height = (ky1 - ky0) as u64;
    let pixels = width.saturating_mul(height);
    if pixels > budget {
        return Err(Error::BudgetExceeded {
            what: "raster pixel count",
            requested: pixels,
            limit: budget,
        });
    }
    let (width, height) = (width as usize, height as usize);
    let mut grid = RasterGrid::empty(width, height, [kx0 as f64 * h, ky0 as f64 * h], h);
    grid.bits
        .par_chunks_mut(width)
        .enumerate()
        .for_each(|(j, row)| {
            let y = ((ky0 + j as i64) as f64 + 0.5) * h;
            for (i, bit) in row.iter_mut().enumerate() {
                let x = ((kx0 + i as i64) as f64 + 0.5) * h;
                let z = Complex64::new(x, y);
                *bit = escape_iterations(z, spec.c, spec.max_iter, spec.escape_radius).is_none();
            }
        });
    Ok(grid)
}

/// Rasterize and crop to the filled set plus a one-pixel margin.
pub fn filled_domain(spec: &JuliaSpec) -> Result<RasterGrid> {
    let grid = rasterize_filled(spec)?;
    if grid.is_empty() {
        return Err(Error::Degenerate(format!(
            "filled Julia set for c = {} is empty at this resolution",
            spec.c
        )));
    }
    Ok(grid.crop_to_filled(1))
}

/// Component ids of `components` grouped into point-reflection pairs
/// (`z -> -z`). Self-symmetric components appear as `(id, None)`. Pairs
/// are returned in ascending id order of their first member.
pub fn mirror_pairs(components: &ComponentSet, limit: usize) -> Vec<(u32, Option<u32>)> {
    let n = components.len().min(limit) as u32;
    let centroids: Vec<Point> = (1..=n).map(|id| components.centroid(id)).collect();
    let tol = 2.0 * components.pixel_size;
    let mut used = vec![false; n as usize + 1];
    let mut out = Vec::new();
    for id in 1..=n {
        if used[id as usize] {
            continue;
        }
        used[id as usize] = true;
        let c = centroids[id as usize - 1];
        if c[0].hypot(c[1]) <= tol {
            out.push((id, None));
            continue;
        }
        let partner = (id + 1..=n).find(|&o| {
            let d = centroids[o as usize - 1];
            !used[o as usize]
                && components.pixel_count(o) == components.pixel_count(id)
                && (c[0] + d[0]).hypot(c[1] + d[1]) <= tol
        });
        if let Some(o) = partner {
            used[o as usize] = true;
        }
        out.push((id, partner));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn escape_examples() {
        assert_eq!(escape_iterations(c(0.0, 0.0), c(0.0, 0.0), 1000, 2.0), None);
        // orbit 0, 1, 2, 5: |5| > 2 is the first exceedance
        assert_eq!(escape_iterations(c(0.0, 0.0), c(1.0, 0.0), 100, 2.0), Some(3));
        assert_eq!(escape_iterations(c(0.0, 0.0), c(1.0, 0.0), 2, 2.0), None);
        assert_eq!(escape_iterations(c(0.0, 0.0), c(-1.0, 0.0), 10_000, 2.0), None);
        assert_eq!(escape_iterations(c(3.0, 0.0), c(0.0, 0.0), 10, 2.0), Some(0));
    }

    #[test]
    fn mandelbrot_examples() {
        assert!(mandelbrot_member(c(0.0, 0.0), 500));
        assert!(mandelbrot_member(c(-1.0, 0.0), 500));
        // 0, .5, .75, 1.0625, 1.6289, 3.153
        assert!(mandelbrot_member(c(0.5, 0.0), 4));
        assert!(!mandelbrot_member(c(0.5, 0.0), 5));
        assert!(mandelbrot_member(params::RABBIT, 2000));
        assert!(mandelbrot_member(params::BASILICA_JUNCTION, 2000));
    }

    #[test]
    fn rabbit_junction_is_cardioid_tangency() {
        let mu = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
        let want = mu / 2.0 - mu * mu / 4.0;
        let got = params::rabbit_junction();
        assert!((want - got).norm() < 1e-15);
    }

    #[test]
    fn outside_parameter_center_escapes() {
        // orbit 0, 2, 6, 38
        let spec = JuliaSpec::new(c(2.0, 0.0)).max_iter(3).resolution(8.0);
        let g = rasterize_filled(&spec).unwrap();
        // pixel centers at +-1/16 around the origin
        let (i, j) = (g.width / 2, g.height / 2);
        assert!(!g.get(i, j));
        assert!(!g.get(i - 1, j - 1));
    }

    #[test]
    fn budget_is_enforced() {
        let spec = JuliaSpec::new(c(0.0, 0.0)).resolution(1000.0);
        let err = rasterize_filled_with_budget(&spec, 1000).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }));
        assert_eq!(err.exit_code(), 4);
    }

    #[test]
    fn rejects_small_escape_radius() {
        let spec = JuliaSpec::new(c(0.0, 0.0)).escape_radius(1.5);
        assert!(rasterize_filled(&spec).is_err());
    }

    #[test]
    fn grid_is_point_symmetric_for_complex_c() {
        let spec = JuliaSpec::new(params::RABBIT).max_iter(30).resolution(40.0);
        let g = rasterize_filled(&spec).unwrap();
        for j in 0..g.height {
            for i in 0..g.width {
                assert_eq!(g.get(i, j), g.get(g.width - 1 - i, g.height - 1 - j));
            }
        }
    }
}
