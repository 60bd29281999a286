//! Output helpers: binary PGM, atomic file writes, and heatmap rendering.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::geometry::Point;
use crate::mesh::TriMesh;

pub fn write_pgm<W: Write>(mut w: W, width: usize, height: usize, data: &[u8]) -> io::Result<()> {
    assert_eq!(data.len(), width * height);
    write!(w, "P5\n{width} {height}\n255\n")?;
    w.write_all(data)
}

/// Write through a sibling temp file, then rename over `path`.
pub fn write_atomic<F>(path: &Path, fill: F) -> io::Result<()>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    let name = path
        .file_name()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "path has no file name"))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    {
        let file = fs::File::create(&tmp)?;
        let mut w = BufWriter::new(file);
        fill(&mut w)?;
        w.flush()?;
    }
    fs::rename(&tmp, path)
}

/// Grayscale image of a scalar field on a mesh.
///
/// Values are mapped linearly from `[min, max]` onto `1..=255`; pixels
/// outside the mesh are 0. `per_vertex` values are interpolated
/// barycentrically, otherwise `values` holds one entry per triangle.
pub fn render_field(mesh: &TriMesh, values: &[f64], per_vertex: bool, width: usize) -> (usize, usize, Vec<u8>) {
    let (lo, hi) = crate::geometry::bounding_box(&mesh.vertices);
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(f64::MIN_POSITIVE);
    let px = span / width as f64;
    let w = ((hi[0] - lo[0]) / px).ceil().max(1.0) as usize;
    let h = ((hi[1] - lo[1]) / px).ceil().max(1.0) as usize;
    let (vmin, vmax) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let scale = if vmax > vmin { 254.0 / (vmax - vmin) } else { 0.0 };
    let mut img = vec![0u8; w * h];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let p: [Point; 3] = [mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]];
        let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
        if det == 0.0 {
            continue;
        }
        let xmin = p.iter().map(|q| q[0]).fold(f64::INFINITY, f64::min);
        let xmax = p.iter().map(|q| q[0]).fold(f64::NEG_INFINITY, f64::max);
        let ymin = p.iter().map(|q| q[1]).fold(f64::INFINITY, f64::min);
        let ymax = p.iter().map(|q| q[1]).fold(f64::NEG_INFINITY, f64::max);
        let i0 = (((xmin - lo[0]) / px - 0.5).ceil().max(0.0)) as usize;
        let i1 = (((xmax - lo[0]) / px - 0.5).floor() as isize).min(w as isize - 1);
        let j0 = (((ymin - lo[1]) / px - 0.5).ceil().max(0.0)) as usize;
        let j1 = (((ymax - lo[1]) / px - 0.5).floor() as isize).min(h as isize - 1);
        if i1 < 0 || j1 < 0 {
            continue;
        }
        for j in j0..=j1 as usize {
            for i in i0..=i1 as usize {
                let x = lo[0] + (i as f64 + 0.5) * px;
                let y = lo[1] + (j as f64 + 0.5) * px;
                let l1 = ((x - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (y - p[0][1])) / det;
                let l2 = ((p[1][0] - p[0][0]) * (y - p[0][1]) - (x - p[0][0]) * (p[1][1] - p[0][1])) / det;
                let l0 = 1.0 - l1 - l2;
                if l0 < -1e-12 || l1 < -1e-12 || l2 < -1e-12 {
                    continue;
                }
                let v = if per_vertex {
                    l0 * values[tri[0]] + l1 * values[tri[1]] + l2 * values[tri[2]]
                } else {
                    values[t]
                };
                let g = 1.0 + (v - vmin) * scale;
                img[(h - 1 - j) * w + i] = g.round().clamp(1.0, 255.0) as u8;
            }
        }
    }
    (w, h, img)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_atomic(&path, |w| w.write_all(b"a\n")).unwrap();
        write_atomic(&path, |w| w.write_all(b"b\n")).unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "b\n");
        let leftovers: Vec<_> = fs::read_dir(dir.path()).unwrap().collect();
        assert_eq!(leftovers.len(), 1);
    }

    #[test]
    fn renders_linear_ramp() {
        let mesh = TriMesh::unit_square(1);
        let vals: Vec<f64> = mesh.vertices.iter().map(|v| v[0]).collect();
        let (w, h, img) = render_field(&mesh, &vals, true, 16);
        assert_eq!((w, h), (16, 16));
        assert!(img.iter().all(|&g| g >= 1));
        // left column darker than right column
        assert!(img[0] < img[15]);
    }
}
