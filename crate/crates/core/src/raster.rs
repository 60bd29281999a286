use std::collections::VecDeque;
use std::io::{self, Write};

use crate::geometry::Point;

/// Rectangular boolean occupancy grid. Pixel `(i, j)` covers
/// `origin + [i, i+1) x [j, j+1)` in units of `pixel_size`; row `j = 0` is
/// the bottom row.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterGrid {
    pub width: usize,
    pub height: usize,
    pub origin: Point,
    pub pixel_size: f64,
    pub bits: Vec<bool>,
}

impl RasterGrid {
    pub fn empty(width: usize, height: usize, origin: Point, pixel_size: f64) -> Self {
        assert!(pixel_size > 0.0, "pixel size must be positive");
        Self {
            width,
            height,
            origin,
            pixel_size,
            bits: vec![false; width * height],
        }
    }

    pub fn filled(width: usize, height: usize, origin: Point, pixel_size: f64) -> Self {
        let mut g = Self::empty(width, height, origin, pixel_size);
        g.bits.fill(true);
        g
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.width + i
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[self.index(i, j)]
    }

    /// Out-of-grid pixels read as unfilled.
    #[inline]
    pub fn get_signed(&self, i: isize, j: isize) -> bool {
        i >= 0
            && j >= 0
            && (i as usize) < self.width
            && (j as usize) < self.height
            && self.get(i as usize, j as usize)
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        let k = self.index(i, j);
        self.bits[k] = v;
    }

    pub fn center(&self, i: usize, j: usize) -> Point {
        [
            self.origin[0] + (i as f64 + 0.5) * self.pixel_size,
            self.origin[1] + (j as f64 + 0.5) * self.pixel_size,
        ]
    }

    pub fn filled_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn filled_centers(&self) -> Vec<Point> {
        let mut out = Vec::with_capacity(self.filled_count());
        for j in 0..self.height {
            for i in 0..self.width {
                if self.get(i, j) {
                    out.push(self.center(i, j));
                }
            }
        }
        out
    }

    /// Inclusive pixel bounds `(i0, j0, i1, j1)` of the filled set.
    pub fn filled_bounds(&self) -> Option<(usize, usize, usize, usize)> {
        let mut b: Option<(usize, usize, usize, usize)> = None;
        for j in 0..self.height {
            for i in 0..self.width {
                if self.get(i, j) {
                    b = Some(match b {
                        None => (i, j, i, j),
                        Some((i0, j0, i1, j1)) => (i0.min(i), j0.min(j), i1.max(i), j1.max(j)),
                    });
                }
            }
        }
        b
    }

    /// Crop to the filled bounding box plus `margin` empty pixels on each
    /// side. The pixel lattice is preserved.
    pub fn crop_to_filled(&self, margin: usize) -> RasterGrid {
        let Some((i0, j0, i1, j1)) = self.filled_bounds() else {
            return RasterGrid::empty(0, 0, self.origin, self.pixel_size);
        };
        let w = i1 - i0 + 1 + 2 * margin;
        let h = j1 - j0 + 1 + 2 * margin;
        let ox = self.origin[0] + (i0 as f64 - margin as f64) * self.pixel_size;
        let oy = self.origin[1] + (j0 as f64 - margin as f64) * self.pixel_size;
        let mut out = RasterGrid::empty(w, h, [ox, oy], self.pixel_size);
        for j in j0..=j1 {
            for i in i0..=i1 {
                if self.get(i, j) {
                    out.set(i - i0 + margin, j - j0 + margin, true);
                }
            }
        }
        out
    }

    /// Binary PGM (P5), filled = 255, unfilled = 0, top row first.
    pub fn write_pgm<W: Write>(&self, w: W) -> io::Result<()> {
        let data: Vec<u8> = (0..self.height)
            .rev()
            .flat_map(|j| (0..self.width).map(move |i| (j, i)))
            .map(|(j, i)| if self.get(i, j) { 255 } else { 0 })
            .collect();
        crate::io::write_pgm(w, self.width, self.height, &data)
    }
}

/// Total area of the filled pixels.
pub fn pixel_area(grid: &RasterGrid) -> f64 {
    grid.filled_count() as f64 * grid.pixel_size * grid.pixel_size
}

/// Filled pixels that are 4-adjacent to an unfilled or out-of-grid pixel.
pub fn boundary_cells(grid: &RasterGrid) -> RasterGrid {
    let mut out = RasterGrid::empty(grid.width, grid.height, grid.origin, grid.pixel_size);
    for j in 0..grid.height {
        for i in 0..grid.width {
            if !grid.get(i, j) {
                continue;
            }
            let (ii, jj) = (i as isize, j as isize);
            let edge = !grid.get_signed(ii - 1, jj)
                || !grid.get_signed(ii + 1, jj)
                || !grid.get_signed(ii, jj - 1)
                || !grid.get_signed(ii, jj + 1);
            if edge {
                out.set(i, j, true);
            }
        }
    }
    out
}

/// 4-connected components of the filled pixels.
#[derive(Debug, Clone)]
pub struct ComponentSet {
    pub width: usize,
    pub height: usize,
    pub origin: Point,
    pub pixel_size: f64,
    /// Per-pixel component id; 0 marks unfilled pixels, ids start at 1.
    pub labels: Vec<u32>,
    /// `areas[id - 1]` is the pixel count of component `id`, descending.
    pub areas: Vec<usize>,
}

impl ComponentSet {
    pub fn len(&self) -> usize {
        self.areas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.areas.is_empty()
    }

    pub fn pixel_count(&self, id: u32) -> usize {
        self.areas[id as usize - 1]
    }

    pub fn area(&self, id: u32) -> f64 {
        self.pixel_count(id) as f64 * self.pixel_size * self.pixel_size
    }

    /// Raster containing only component `id`.
    pub fn component_grid(&self, id: u32) -> RasterGrid {
        let mut g = RasterGrid::empty(self.width, self.height, self.origin, self.pixel_size);
        for (b, &l) in g.bits.iter_mut().zip(&self.labels) {
            *b = l == id;
        }
        g
    }

    /// Mean pixel-center position of component `id`.
    pub fn centroid(&self, id: u32) -> Point {
        let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
        for j in 0..self.height {
            for i in 0..self.width {
                if self.labels[j * self.width + i] == id {
                    sx += i as f64 + 0.5;
                    sy += j as f64 + 0.5;
                    n += 1;
                }
            }
        }
        [
            self.origin[0] + sx / n as f64 * self.pixel_size,
            self.origin[1] + sy / n as f64 * self.pixel_size,
        ]
    }

    /// CSV `component_id,pixel_count,area`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "component_id,pixel_count,area")?;
        for (k, &n) in self.areas.iter().enumerate() {
            let id = k as u32 + 1;
            writeln!(w, "{},{},{}", id, n, self.area(id))?;
        }
        Ok(())
    }
}

/// Flood-fill labeling; components are numbered by descending pixel count,
/// ties broken by the smallest pixel index they contain.
pub fn interior_components(grid: &RasterGrid) -> ComponentSet {
    let (w, h) = (grid.width, grid.height);
    let mut raw = vec![0u32; w * h];
    // (pixel count, first pixel index) per provisional label
    let mut found: Vec<(usize, usize)> = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..w * h {
        if !grid.bits[start] || raw[start] != 0 {
            continue;
        }
        let label = found.len() as u32 + 1;
        raw[start] = label;
        queue.push_back(start);
        let mut count = 0;
        while let Some(k) = queue.pop_front() {
            count += 1;
            let (i, j) = (k % w, k / w);
            let mut visit = |n: usize| {
                if grid.bits[n] && raw[n] == 0 {
                    raw[n] = label;
                    queue.push_back(n);
                }
            };
            if i > 0 {
                visit(k - 1);
            }
            if i + 1 < w {
                visit(k + 1);
            }
            if j > 0 {
                visit(k - w);
            }
            if j + 1 < h {
                visit(k + w);
            }
        }
        found.push((count, start));
    }
    let mut order: Vec<usize> = (0..found.len()).collect();
    order.sort_by(|&a, &b| found[b].0.cmp(&found[a].0).then(found[a].1.cmp(&found[b].1)));
    let mut relabel = vec![0u32; found.len() + 1];
    for (new, &old) in order.iter().enumerate() {
        relabel[old + 1] = new as u32 + 1;
    }
    let labels = raw.into_iter().map(|l| relabel[l as usize]).collect();
    ComponentSet {
        width: w,
        height: h,
        origin: grid.origin,
        pixel_size: grid.pixel_size,
        labels,
        areas: order.iter().map(|&o| found[o].0).collect(),
    }
}

/// Components that touch only through thin necks.
///
/// The filled set is eroded `depth` times (boundary cells removed), labeled,
/// and the labels are grown back into the original filled pixels one layer
/// at a time until nothing changes. A pixel claimed by two different labels
/// in the same layer stays unlabeled, which cuts necks up to `2·depth` pixels
/// wide. Unlabeled pixels are excluded from `areas`.
pub fn separated_components(grid: &RasterGrid, depth: usize) -> ComponentSet {
    let mut core = grid.clone();
    for _ in 0..depth {
        let rim = boundary_cells(&core);
        for (b, r) in core.bits.iter_mut().zip(&rim.bits) {
            *b &= !r;
        }
    }
    let seeded = interior_components(&core);
    let (w, h) = (grid.width, grid.height);
    let mut labels = seeded.labels;
    // u32::MAX marks pixels where two labels collide
    const CUT: u32 = u32::MAX;
    loop {
        let mut next = labels.clone();
        let mut changed = false;
        for k in 0..w * h {
            if !grid.bits[k] || labels[k] != 0 {
                continue;
            }
            let (i, j) = (k % w, k / w);
            let mut claim = 0u32;
            let mut nbrs = [None; 4];
            if i > 0 {
                nbrs[0] = Some(k - 1);
            }
            if i + 1 < w {
                nbrs[1] = Some(k + 1);
            }
            if j > 0 {
                nbrs[2] = Some(k - w);
            }
            if j + 1 < h {
                nbrs[3] = Some(k + w);
            }
            for n in nbrs.into_iter().flatten() {
                let l = labels[n];
                if l == 0 || l == CUT {
                    continue;
                }
                if claim == 0 {
                    claim = l;
                } else if claim != l {
                    claim = CUT;
                }
            }
            next[k] = claim;
            changed |= claim != 0;
        }
        labels = next;
        if !changed {
            break;
        }
    }
    let n = seeded.areas.len();
    let mut count = vec![0usize; n + 1];
    let mut first = vec![usize::MAX; n + 1];
    for (k, l) in labels.iter_mut().enumerate() {
        if *l == CUT {
            *l = 0;
        }
        count[*l as usize] += 1;
        first[*l as usize] = first[*l as usize].min(k);
    }
    let mut order: Vec<usize> = (1..=n).collect();
    order.sort_by(|&a, &b| count[b].cmp(&count[a]).then(first[a].cmp(&first[b])));
    let mut relabel = vec![0u32; n + 1];
    for (new, &old) in order.iter().enumerate() {
        relabel[old] = new as u32 + 1;
    }
    ComponentSet {
        width: w,
        height: h,
        origin: grid.origin,
        pixel_size: grid.pixel_size,
        labels: labels.into_iter().map(|l| relabel[l as usize]).collect(),
        areas: order.iter().map(|&o| count[o]).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_from(rows: &[&str]) -> RasterGrid {
        // rows listed top to bottom
        let h = rows.len();
        let w = rows[0].len();
        let mut g = RasterGrid::empty(w, h, [0.0, 0.0], 1.0);
        for (r, line) in rows.iter().enumerate() {
            for (i, ch) in line.chars().enumerate() {
                g.set(i, h - 1 - r, ch == '#');
            }
        }
        g
    }

    #[test]
    fn empty_grid_has_zero_area() {
        assert_eq!(pixel_area(&RasterGrid::empty(5, 4, [0.0, 0.0], 0.5)), 0.0);
    }

    #[test]
    fn boundary_of_full_grid_is_frame() {
        let g = RasterGrid::filled(5, 4, [0.0, 0.0], 1.0);
        let b = boundary_cells(&g);
        assert_eq!(b.filled_count(), 2 * 5 + 2 * 4 - 4);
        assert!(!b.get(2, 2) && !b.get(1, 1));
        assert!(b.get(0, 0) && b.get(4, 3));
    }

    #[test]
    fn single_pixel_is_its_own_boundary() {
        let g = grid_from(&["...", ".#.", "..."]);
        let b = boundary_cells(&g);
        assert_eq!(b.filled_count(), 1);
        assert!(b.get(1, 1));
    }

    #[test]
    fn components_sorted_by_size_then_index() {
        let g = grid_from(&[
            "##..#", //
            "#...#", //
            "..#.#", //
            ".#...",
        ]);
        let cs = interior_components(&g);
        assert_eq!(cs.areas, vec![3, 3, 1, 1]);
        // bottom-left single pixel (index 1) precedes (2, 1)
        assert_eq!(cs.labels[g.index(1, 0)], 3);
        assert_eq!(cs.labels[g.index(2, 1)], 4);
        // the right column starts at lower pixel index than the top-left L
        assert_eq!(cs.labels[g.index(4, 1)], 1);
        assert_eq!(cs.labels[g.index(0, 3)], 2);
        assert_eq!(cs.areas.iter().sum::<usize>(), g.filled_count());
        let mut out = Vec::new();
        cs.write_csv(&mut out).unwrap();
        assert!(String::from_utf8(out).unwrap().starts_with("component_id,pixel_count,area\n1,3,3\n"));
    }

    #[test]
    fn diagonal_contact_does_not_connect() {
        let g = grid_from(&["#.", ".#"]);
        assert_eq!(interior_components(&g).len(), 2);
    }

    #[test]
    fn neck_is_cut() {
        let g = grid_from(&[
            ".............",
            ".#####.#####.",
            ".#####.#####.",
            ".###########.",
            ".#####.#####.",
            ".#####.#####.",
            ".............",
        ]);
        assert_eq!(interior_components(&g).len(), 1);
        let cs = separated_components(&g, 1);
        assert_eq!(cs.areas, vec![25, 25]);
        assert_eq!(cs.labels[g.index(6, 3)], 0);
        assert_eq!(cs.labels[g.index(1, 1)], 1);
        // a blob without necks is unchanged
        let square = grid_from(&["....", ".##.", ".##.", "...."]);
        assert_eq!(separated_components(&square, 0).areas, vec![4]);
    }

    #[test]
    fn crop_keeps_lattice() {
        let mut g = RasterGrid::empty(10, 10, [-1.0, -1.0], 0.25);
        g.set(3, 4, true);
        g.set(5, 6, true);
        let c = g.crop_to_filled(1);
        assert_eq!((c.width, c.height), (5, 5));
        assert_eq!(c.filled_count(), 2);
        assert_eq!(c.center(1, 1), g.center(3, 4));
        assert_eq!(c.center(3, 3), g.center(5, 6));
    }

    #[test]
    fn pgm_layout_is_top_row_first() {
        let g = grid_from(&["#.", ".."]);
        let mut out = Vec::new();
        g.write_pgm(&mut out).unwrap();
        assert_eq!(&out[..11], b"P5\n2 2\n255\n");
        assert_eq!(&out[11..], &[255, 0, 0, 0]);
    }
}
