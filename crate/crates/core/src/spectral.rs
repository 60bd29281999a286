//! Counting functions, quasicircle union spectra and Julia spectrum sweeps.

use std::f64::consts::PI;
use std::io::{self, Write};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{self, BoundaryCondition, SolverOptions, Spectrum};
use crate::julia::{self, JuliaSpec};
use crate::mesh::{self, TriMesh};
use crate::raster::{self, RasterGrid};

/// Quasicircle multiplicities in the union spectra.
pub const BASILICA_MULTIPLICITIES: [usize; 4] = [1, 2, 2, 2];
pub const RABBIT_MULTIPLICITIES: [usize; 3] = [1, 2, 2];

/// Iteration count used to extract quasicircles.
pub const QUASICIRCLE_ITERATIONS: u32 = 170;

/// `N(t)`, the Weyl term `A·t/(4π)` and the remainders `D1 = N − weyl`,
/// `D2 = D1 / t^β`, sampled at every eigenvalue and between neighbours.
#[derive(Debug, Clone, PartialEq)]
pub struct CountingSeries {
    pub t: Vec<f64>,
    pub n: Vec<usize>,
    pub weyl: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
    pub beta: f64,
    pub area: f64,
    /// The requested `t_max` was above the largest computed eigenvalue.
    pub truncated: bool,
}

impl CountingSeries {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// CSV `t,N,weyl,D1,D2`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,N,weyl,D1,D2")?;
        for i in 0..self.len() {
            writeln!(w, "{},{},{},{},{}", self.t[i], self.n[i], self.weyl[i], self.d1[i], self.d2[i])?;
        }
        Ok(())
    }
}

pub fn remainders(n: usize, t: f64, area: f64, beta: f64) -> (f64, f64, f64) {
    let weyl = area * t / (4.0 * PI);
    let d1 = n as f64 - weyl;
    (weyl, d1, d1 / t.powf(beta))
}

/// Counting function of `spectrum` on a domain of the given area and
/// boundary dimension, up to `t_max`.
///
/// Grid points are the eigenvalues and the midpoints between consecutive
/// ones (plus `λ_1/2`), so `N` is exact. Eigenvalues at or below
/// `1e-9·λ_max` count towards `N` but are not grid points.
pub fn counting_series(spectrum: &Spectrum, area: f64, dimension: f64, t_max: f64) -> Result<CountingSeries> {
    if spectrum.is_empty() {
        return Err(Error::invalid("counting function of an empty spectrum"));
    }
    if !(area.is_finite() && area > 0.0) {
        return Err(Error::invalid(format!("area must be positive (got {area})")));
    }
    if !(1.0..=2.0).contains(&dimension) {
        return Err(Error::invalid(format!("dimension must lie in [1, 2] (got {dimension})")));
    }
    if !(t_max > 0.0) {
        return Err(Error::invalid("t_max must be positive"));
    }
    let mut vals = spectrum.eigenvalues.clone();
    vals.sort_by(f64::total_cmp);
    let top = *vals.last().unwrap();
    let truncated = t_max > top;
    let limit = t_max.min(top);
    let floor = 1e-9 * top.abs();

    let mut grid = Vec::with_capacity(2 * vals.len());
    let mut prev = 0.0;
    for &v in &vals {
        if v > floor {
            grid.push(0.5 * (prev + v));
            grid.push(v);
        }
        prev = if v > floor { v } else { 0.0 };
    }
    grid.retain(|&t| t > floor && t <= limit);
    grid.dedup();

    let beta = dimension / 2.0;
    let mut out = CountingSeries {
        t: Vec::with_capacity(grid.len()),
        n: Vec::with_capacity(grid.len()),
        weyl: Vec::with_capacity(grid.len()),
        d1: Vec::with_capacity(grid.len()),
        d2: Vec::with_capacity(grid.len()),
        beta,
        area,
        truncated,
    };
    for t in grid {
        let n = vals.partition_point(|&v| v <= t);
        let (weyl, d1, d2) = remainders(n, t, area, beta);
        out.t.push(t);
        out.n.push(n);
        out.weyl.push(weyl);
        out.d1.push(d1);
        out.d2.push(d2);
    }
    Ok(out)
}

/// Sorted eigenvalues tagged with the part they came from.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LabeledSpectrum {
    pub entries: Vec<(f64, String)>,
}

impl LabeledSpectrum {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.0).collect()
    }

    /// CSV `rank,eigenvalue,source` with 1-based rank.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "rank,eigenvalue,source")?;
        for (r, (v, s)) in self.entries.iter().enumerate() {
            writeln!(w, "{},{},{}", r + 1, v, s)?;
        }
        Ok(())
    }
}

/// Multiset union of Dirichlet spectra, each repeated `multiplicity` times.
/// Ties keep the order of `parts`.
pub fn union_spectrum(parts: &[(&Spectrum, usize, &str)]) -> Result<LabeledSpectrum> {
    let mut entries = Vec::new();
    for (s, mult, label) in parts {
        if s.meta.bc != BoundaryCondition::Dirichlet {
            return Err(Error::invalid(format!("union part '{label}' is not a Dirichlet spectrum")));
        }
        for _ in 0..*mult {
            entries.extend(s.eigenvalues.iter().map(|&v| (v, label.to_string())));
        }
    }
    entries.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(LabeledSpectrum { entries })
}

/// Raster resolution and solver settings shared by the Julia pipelines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JuliaSettings {
    /// Pixels per unit length.
    pub resolution: f64,
    /// Escape-time iterations defining the domain where no count is given.
    pub max_iter: u32,
    pub solver: SolverOptions,
}

impl Default for JuliaSettings {
    fn default() -> Self {
        Self {
            resolution: 320.0,
            max_iter: 100,
            solver: SolverOptions::default().without_vectors(),
        }
    }
}

/// Cropped filled raster and its pixel mesh.
pub fn julia_mesh(c: Complex64, max_iter: u32, resolution: f64) -> Result<(RasterGrid, TriMesh)> {
    let spec = JuliaSpec::new(c).max_iter(max_iter).resolution(resolution);
    let grid = julia::filled_domain(&spec)?;
    let mesh = mesh::mesh_from_raster(&grid)?;
    Ok((grid, mesh))
}

pub fn julia_spectrum(
    c: Complex64,
    max_iter: u32,
    k: usize,
    bc: BoundaryCondition,
    settings: &JuliaSettings,
) -> Result<Spectrum> {
    let (_, mesh) = julia_mesh(c, max_iter, settings.resolution)?;
    fem::compute_spectrum(&mesh, bc, k, &settings.solver, &format!("julia c={c} iter={max_iter}"))
}

/// One column per iteration count. Failed columns carry the error message
/// and are written as empty cells.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationTable {
    pub c: Complex64,
    pub bc: BoundaryCondition,
    pub iterations: Vec<u32>,
    pub columns: Vec<std::result::Result<Vec<f64>, String>>,
}

impl IterationTable {
    /// CSV `index,iter_<n>,...` with the conventional eigenvalue index.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        write!(w, "index")?;
        for n in &self.iterations {
            write!(w, ",iter_{n}")?;
        }
        writeln!(w)?;
        let rows = self.columns.iter().filter_map(|c| c.as_ref().ok()).map(Vec::len).max().unwrap_or(0);
        for r in 0..rows {
            write!(w, "{}", r + self.bc.first_index())?;
            for col in &self.columns {
                match col.as_ref().ok().and_then(|v| v.get(r)) {
                    Some(v) => write!(w, ",{v}")?,
                    None => write!(w, ",")?,
                }
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// First `k` eigenvalues of the `n`-iteration domain for each `n`.
pub fn iteration_comparison(
    c: Complex64,
    iteration_counts: &[u32],
    k: usize,
    bc: BoundaryCondition,
    settings: &JuliaSettings,
) -> Result<IterationTable> {
    if iteration_counts.is_empty() {
        return Err(Error::invalid("no iteration counts given"));
    }
    if iteration_counts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("iteration counts must be strictly ascending"));
    }
    let columns = iteration_counts
        .par_iter()
        .map(|&n| {
            julia_spectrum(c, n, k, bc, settings)
                .map(|s| s.eigenvalues)
                .map_err(|e| e.to_string())
        })
        .collect();
    Ok(IterationTable {
        c,
        bc,
        iterations: iteration_counts.to_vec(),
        columns,
    })
}

/// One row per parameter value.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceTable {
    pub bc: BoundaryCondition,
    pub k: usize,
    pub c_values: Vec<Complex64>,
    pub rows: Vec<std::result::Result<Vec<f64>, String>>,
}

impl SliceTable {
    /// CSV `c_re,c_im,lambda_1..lambda_k` (Neumann columns start at `lambda_0`).
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        write!(w, "c_re,c_im")?;
        let first = self.bc.first_index();
        for i in 0..self.k {
            write!(w, ",lambda_{}", i + first)?;
        }
        writeln!(w)?;
        for (c, row) in self.c_values.iter().zip(&self.rows) {
            write!(w, "{},{}", c.re, c.im)?;
            for i in 0..self.k {
                match row.as_ref().ok().and_then(|v| v.get(i)) {
                    Some(v) => write!(w, ",{v}")?,
                    None => write!(w, ",")?,
                }
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// First `k` eigenvalues for each `c` at `settings.max_iter` iterations.
pub fn parameter_slice(
    c_values: &[Complex64],
    k: usize,
    bc: BoundaryCondition,
    settings: &JuliaSettings,
) -> Result<SliceTable> {
    if c_values.is_empty() {
        return Err(Error::invalid("empty parameter slice"));
    }
    let rows = c_values
        .par_iter()
        .map(|&c| {
            julia_spectrum(c, settings.max_iter, k, bc, settings)
                .map(|s| s.eigenvalues)
                .map_err(|e| e.to_string())
        })
        .collect();
    Ok(SliceTable {
        bc,
        k,
        c_values: c_values.to_vec(),
        rows,
    })
}

/// A bounded interior component of a filled Julia set.
#[derive(Debug, Clone)]
pub struct Quasicircle {
    /// 1-based position in the requested multiplicity list.
    pub label: usize,
    pub multiplicity: usize,
    /// Component id (and mirror partner) in the extracted component set.
    pub component: u32,
    pub partner: Option<u32>,
    pub grid: RasterGrid,
}

/// Largest interior components of `K_c` grouped under `z → −z`.
///
/// Components are separated at pinch points by a one-pixel erosion. Entry
/// `i` of `multiplicities` takes the next self-symmetric component when it
/// is 1 and the next mirror pair when it is 2.
pub fn quasicircles(c: Complex64, multiplicities: &[usize], resolution: f64, max_iter: u32) -> Result<Vec<Quasicircle>> {
    let spec = JuliaSpec::new(c).max_iter(max_iter).resolution(resolution);
    let grid = julia::filled_domain(&spec)?;
    let comps = raster::separated_components(&grid, 1);
    let pairs = julia::mirror_pairs(&comps, 4 * multiplicities.len() + 4);
    let mut out = Vec::with_capacity(multiplicities.len());
    let mut it = pairs.into_iter();
    for (i, &m) in multiplicities.iter().enumerate() {
        let (id, partner) = it.next().ok_or_else(|| {
            Error::Degenerate(format!("only {} quasicircles found for c = {c}", out.len()))
        })?;
        let ok = match m {
            1 => true,
            2 => partner.is_some(),
            _ => return Err(Error::invalid(format!("unsupported multiplicity {m}"))),
        };
        if !ok {
            return Err(Error::Degenerate(format!(
                "component {id} for c = {c} has no mirror partner"
            )));
        }
        out.push(Quasicircle {
            label: i + 1,
            multiplicity: m,
            component: id,
            partner,
            grid: comps.component_grid(id).crop_to_filled(1),
        });
    }
    Ok(out)
}

/// Union spectrum of the quasicircles of `K_c`, each contributing `k`
/// Dirichlet eigenvalues. Mirror partners reuse their twin's spectrum.
pub fn quasicircle_union(
    c: Complex64,
    multiplicities: &[usize],
    k: usize,
    settings: &JuliaSettings,
) -> Result<(LabeledSpectrum, Vec<Spectrum>)> {
    let qcs = quasicircles(c, multiplicities, settings.resolution, QUASICIRCLE_ITERATIONS)?;
    let spectra = qcs
        .iter()
        .map(|q| {
            let mesh = mesh::mesh_from_raster(&q.grid)?;
            fem::compute_spectrum(
                &mesh,
                BoundaryCondition::Dirichlet,
                k,
                &settings.solver,
                &format!("julia c={c} quasicircle {}", q.label),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let labels: Vec<String> = qcs.iter().map(|q| q.label.to_string()).collect();
    let parts: Vec<(&Spectrum, usize, &str)> = spectra
        .iter()
        .zip(&qcs)
        .zip(&labels)
        .map(|((s, q), l)| (s, q.multiplicity, l.as_str()))
        .collect();
    Ok((union_spectrum(&parts)?, spectra))
}
