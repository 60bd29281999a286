//! Box-counting dimension of boundary point sets.

use std::io::{self, Write};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{self, Point, SnowflakeSpec};
use crate::julia::{self, BBox, JuliaSpec};
use crate::raster;

/// Occupied-box counts at decreasing box sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxCountSeries {
    pub sizes: Vec<f64>,
    pub counts: Vec<u64>,
}

impl BoxCountSeries {
    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "box_size,count")?;
        for (s, c) in self.sizes.iter().zip(&self.counts) {
            writeln!(w, "{s},{c}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLogFit {
    /// Slope of `ln N` against `ln(1/size)`.
    pub dimension: f64,
    pub intercept: f64,
    /// Root-mean-square residual in log-log coordinates.
    pub fit_error: f64,
}

/// Number of grid cells of pitch `size` anchored at `anchor` that contain at
/// least one point. Cells are half-open: `[anchor + k·size, anchor + (k+1)·size)`.
pub fn count_boxes(points: &[Point], size: f64, anchor: Point) -> u64 {
    assert!(size > 0.0, "box size must be positive");
    let mut cells: Vec<(i64, i64)> = points
        .iter()
        .map(|p| {
            (
                ((p[0] - anchor[0]) / size).floor() as i64,
                ((p[1] - anchor[1]) / size).floor() as i64,
            )
        })
        .collect();
    cells.sort_unstable();
    cells.dedup();
    cells.len() as u64
}

/// `largest, largest/2, ...` down to the last size `>= smallest`.
pub fn geometric_sizes(largest: f64, smallest: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut s = largest;
    while s >= smallest * (1.0 - 1e-12) && s > 0.0 {
        out.push(s);
        s *= 0.5;
    }
    out
}

pub fn box_count_series(points: &[Point], sizes: &[f64], anchor: Point) -> Result<BoxCountSeries> {
    if points.is_empty() {
        return Err(Error::Degenerate("box counting needs a nonempty point set".into()));
    }
    if sizes.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
        return Err(Error::invalid("box sizes must be positive and finite"));
    }
    let counts = sizes.par_iter().map(|&s| count_boxes(points, s, anchor)).collect();
    Ok(BoxCountSeries {
        sizes: sizes.to_vec(),
        counts,
    })
}

/// Ordinary least squares of `ln N` against `ln(1/size)`.
pub fn fit_dimension(series: &BoxCountSeries) -> Result<LogLogFit> {
    let n = series.len();
    if n < 3 {
        return Err(Error::invalid(format!("need at least 3 box sizes for a fit, got {n}")));
    }
    if series.counts.iter().any(|&c| c == 0) {
        return Err(Error::Degenerate("box count of zero".into()));
    }
    let xs: Vec<f64> = series.sizes.iter().map(|s| -s.ln()).collect();
    let ys: Vec<f64> = series.counts.iter().map(|&c| (c as f64).ln()).collect();
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if !(sxx > 1e-24 * (1.0 + mx * mx) * nf) {
        return Err(Error::Degenerate("all box sizes are equal".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    Ok(LogLogFit {
        dimension: slope,
        intercept,
        fit_error: (sse / nf).sqrt(),
    })
}

/// Count and fit with sizes from 1/8 of the bounding-box diameter down to
/// `finest`, anchored at the bounding-box corner.
pub fn estimate(points: &[Point], finest: f64) -> Result<(BoxCountSeries, LogLogFit)> {
    if points.is_empty() {
        return Err(Error::Degenerate("box counting needs a nonempty point set".into()));
    }
    let (lo, hi) = geometry::bounding_box(points);
    let diam = (hi[0] - lo[0]).hypot(hi[1] - lo[1]);
    let sizes = geometric_sizes(diam / 8.0, finest);
    let series = box_count_series(points, &sizes, lo)?;
    let fit = fit_dimension(&series)?;
    Ok((series, fit))
}

/// Points on the polygon boundary with spacing at most `spacing`.
pub fn sample_boundary(poly: &geometry::Polygon, spacing: f64) -> Vec<Point> {
    let mut out = Vec::new();
    for (p, q) in poly.edges() {
        let steps = (geometry::dist(p, q) / spacing).ceil().max(1.0) as usize;
        for k in 0..steps {
            let t = k as f64 / steps as f64;
            out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
        }
    }
    out
}

/// Dimension of the level-`m` snowflake boundary.
///
/// The level-`m` polygon is sampled densely and boxes go down to twice the
/// longest edge of the level `m + 2` polygon, so the finest scales resolve
/// the straight edges of the prefractal.
pub fn snowflake_dimension(spec: &SnowflakeSpec) -> Result<(BoxCountSeries, LogLogFit)> {
    let spec = spec.validated()?;
    let poly = geometry::snowflake_polygon(&spec)?;
    let ratio = geometry::ifs_branches(&spec)?
        .iter()
        .map(|f| f.operator_norm())
        .fold(0.0, f64::max);
    let (_, longest) = poly.edge_length_range();
    let finest = 2.0 * longest * ratio * ratio;
    estimate(&sample_boundary(&poly, finest / 8.0), finest)
}

/// Single-image estimate for a filled Julia set: boundary pixel centers,
/// boxes down to two pixel widths.
pub fn julia_dimension(spec: &JuliaSpec) -> Result<(BoxCountSeries, LogLogFit)> {
    let grid = julia::rasterize_filled(spec)?;
    let points = raster::boundary_cells(&grid).filled_centers();
    if points.is_empty() {
        return Err(Error::Degenerate(format!("filled Julia set for c = {} is empty", spec.c)));
    }
    estimate(&points, 2.0 * grid.pixel_size)
}

/// Image widths 640, 1280, ..., 5120.
pub fn default_image_widths() -> Vec<u32> {
    (1..=8).map(|k| 640 * k).collect()
}

/// Multi-image estimate: the boundary of the filled set is rendered at each
/// image width over [`sweep_window`] and its boundary pixels are the boxes,
/// so box size is the pixel width of each image.
pub fn julia_dimension_images(c: Complex64, max_iter: u32, widths: &[u32]) -> Result<(BoxCountSeries, LogLogFit)> {
    let mut widths = widths.to_vec();
    widths.sort_unstable();
    widths.dedup();
    let window = sweep_window();
    let span = window.max[0] - window.min[0];
    let mut sizes = Vec::with_capacity(widths.len());
    let mut counts = Vec::with_capacity(widths.len());
    for &w in &widths {
        if w == 0 {
            return Err(Error::invalid("image width must be positive"));
        }
        let spec = JuliaSpec::new(c).max_iter(max_iter).bbox(window).resolution(w as f64 / span);
        let grid = julia::rasterize_filled(&spec)?;
        sizes.push(grid.pixel_size);
        counts.push(raster::boundary_cells(&grid).filled_count() as u64);
    }
    if counts.iter().any(|&n| n == 0) {
        return Err(Error::Degenerate(format!("filled Julia set for c = {c} is empty")));
    }
    let series = BoxCountSeries { sizes, counts };
    let fit = fit_dimension(&series)?;
    Ok((series, fit))
}

/// Image window used by the resolution sweep; an image of width `w` pixels
/// covers it at `w / 4` pixels per unit.
pub fn sweep_window() -> BBox {
    BBox::new([-2.0, -1.5], [2.0, 1.5])
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub c: Complex64,
    /// Image width in pixels.
    pub resolution_px: u32,
    /// `None` when the estimate failed for this cell.
    pub fit: Option<LogLogFit>,
}

/// One fit per `(c, resolution)`, in input order. Failures become `None`.
pub fn dimension_sweep(c_values: &[Complex64], resolutions: &[u32], max_iter: u32) -> Result<Vec<SweepRow>> {
    if c_values.is_empty() || resolutions.is_empty() {
        return Err(Error::invalid("dimension sweep needs at least one c and one resolution"));
    }
    let window = sweep_window();
    let width = window.max[0] - window.min[0];
    let mut rows = Vec::with_capacity(c_values.len() * resolutions.len());
    for &c in c_values {
        for &px in resolutions {
            let spec = JuliaSpec::new(c)
                .max_iter(max_iter)
                .bbox(window)
                .resolution(px as f64 / width);
            let fit = julia_dimension(&spec).ok().map(|(_, f)| f);
            rows.push(SweepRow { c, resolution_px: px, fit });
        }
    }
    Ok(rows)
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut w: W) -> io::Result<()> {
    writeln!(w, "re_c,im_c,resolution_px,dimension,fit_error")?;
    for r in rows {
        match r.fit {
            Some(f) => writeln!(w, "{},{},{},{},{}", r.c.re, r.c.im, r.resolution_px, f.dimension, f.fit_error)?,
            None => writeln!(w, "{},{},{},,", r.c.re, r.c.im, r.resolution_px)?,
        }
    }
    Ok(())
}

/// Fit on a densely sampled unit segment; the dimension should be 1.
pub fn segment_self_test() -> Result<LogLogFit> {
    let n = 1 << 14;
    let points: Vec<Point> = (0..=n).map(|i| [i as f64 / n as f64, 0.3 * i as f64 / n as f64]).collect();
    let spacing = 1.0 / n as f64;
    Ok(estimate(&points, 16.0 * spacing)?.1)
}
