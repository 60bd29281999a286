//! Command-line front end: `snowflake`, `julia` and `boxdim`.
//!
//! Every command writes into `--out`, one file per artifact, plus a
//! `metadata.json` sidecar holding the parsed configuration, the argument
//! list and summary numbers. Nothing time-dependent is recorded, so equal
//! arguments give byte-identical output directories.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::boxdim;
use crate::error::{Error, Result};
use crate::fem::{self, energy_distribution, BoundaryCondition, EnergyVariant, SolverOptions, Spectrum};
use crate::geometry::{self, SnowflakeSpec};
use crate::io::{render_field, write_atomic, write_pgm};
use crate::julia::{self, JuliaSpec};
use crate::mesh::{self, TriMesh};
use crate::raster;
use crate::spectral::{self, JuliaSettings};

const MAX_K: usize = 2000;
const MAX_RESOLUTION: f64 = 4096.0;
const MAX_ITERATIONS: u32 = 100_000;

#[derive(Debug, Parser)]
#[command(name = "fractal-spectra", version, about = "Laplacian spectra of snowflake and Julia set domains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Command {
    /// Mesh a snowflake prefractal and compute its spectrum.
    Snowflake(SnowflakeArgs),
    /// Rasterize a filled Julia set, measure it and compute its spectrum.
    Julia(JuliaArgs),
    /// Box-counting dimension estimates.
    Boxdim(BoxdimArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Classic,
    Quadratic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BcArg {
    Dirichlet,
    Neumann,
}

impl From<BcArg> for BoundaryCondition {
    fn from(b: BcArg) -> Self {
        match b {
            BcArg::Dirichlet => BoundaryCondition::Dirichlet,
            BcArg::Neumann => BoundaryCondition::Neumann,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SolveArgs {
    /// Number of eigenpairs.
    #[arg(short = 'k', long = "k", default_value_t = 20)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = BcArg::Dirichlet)]
    pub bc: BcArg,
    /// Relative residual bound of the eigensolver.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Upper end of the counting-function grid; defaults to the largest eigenvalue.
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Number of eigenfunction and energy images.
    #[arg(long, default_value_t = 4)]
    pub images: usize,
    /// Width of the rendered images in pixels.
    #[arg(long, default_value_t = 512)]
    pub image_width: usize,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SnowflakeArgs {
    #[arg(long, value_enum, default_value_t = Kind::Classic)]
    pub kind: Kind,
    #[arg(long, default_value_t = 4)]
    pub level: u32,
    /// Middle ratio of the quadratic curve.
    #[arg(long, default_value_t = 0.2)]
    pub b: f64,
    /// Outer ratio of the quadratic curve; defaults to `(1 - b) / 2`.
    #[arg(long)]
    pub a: Option<f64>,
    /// Midpoint refinements of the base mesh.
    #[arg(long, default_value_t = 1)]
    pub refine: u32,
    #[command(flatten)]
    pub solve: SolveArgs,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct JuliaArgs {
    /// Parameter as `re+imi`, e.g. `-1+0i`.
    #[arg(long, allow_hyphen_values = true)]
    pub c: String,
    #[arg(long, default_value_t = 100)]
    pub iterations: u32,
    /// Pixels per unit length.
    #[arg(long, default_value_t = 320.0)]
    pub resolution: f64,
    /// Only write the filled image and its area.
    #[arg(long)]
    pub area_only: bool,
    /// Boundary dimension for the counting function; estimated from the raster if absent.
    #[arg(long)]
    pub dimension: Option<f64>,
    /// Quasicircle multiplicities for a union spectrum, e.g. `1,2,2,2`.
    #[arg(long, value_delimiter = ',')]
    pub quasicircles: Vec<usize>,
    /// Iteration counts for a convergence table, e.g. `10,20`.
    #[arg(long, value_delimiter = ',')]
    pub iteration_counts: Vec<u32>,
    /// Real parts `a:step:b` of a parameter slice at the imaginary part of `--c`.
    #[arg(long, allow_hyphen_values = true)]
    pub slice_re: Option<String>,
    #[command(flatten)]
    pub solve: SolveArgs,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct BoxdimArgs {
    /// Snowflake boundary of the given kind.
    #[arg(long, value_enum)]
    pub snowflake: Option<Kind>,
    #[arg(long, default_value_t = 6)]
    pub level: u32,
    #[arg(long, default_value_t = 0.2)]
    pub b: f64,
    /// Julia set boundary, multi-image estimate.
    #[arg(long, allow_hyphen_values = true)]
    pub julia: Option<String>,
    /// Sweep over `--re` and `--im`, one single-image fit per resolution.
    #[arg(long)]
    pub julia_sweep: bool,
    #[arg(long, allow_hyphen_values = true)]
    pub re: Option<String>,
    #[arg(long, allow_hyphen_values = true, default_value = "0")]
    pub im: String,
    /// Image widths in pixels.
    #[arg(long, value_delimiter = ',', default_values_t = vec![640u32, 1280])]
    pub resolutions: Vec<u32>,
    #[arg(long, default_value_t = 500)]
    pub iterations: u32,
    /// Fit a straight segment; the estimate should be 1.
    #[arg(long)]
    pub segment: bool,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub version: String,
    pub args: Vec<String>,
    #[serde(flatten)]
    pub command: Command,
}

/// Parse `re+imi`, `re-imi`, `re` or `imi`.
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let bad = || Error::invalid(format!("cannot parse complex number '{s}' (expected re+imi)"));
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let Some(body) = t.strip_suffix('i').or_else(|| t.strip_suffix('j')) else {
        return match t.parse::<f64>() {
            Ok(re) if re.is_finite() => Ok(Complex64::new(re, 0.0)),
            _ => Err(bad()),
        };
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        other => other,
    };
    let re: f64 = re.parse().map_err(|_| bad())?;
    let im: f64 = im.trim_start_matches('+').parse().map_err(|_| bad())?;
    if !(re.is_finite() && im.is_finite()) {
        return Err(bad());
    }
    Ok(Complex64::new(re, im))
}

/// Values `a, a + step, ..., b` of `a:step:b`, rounded to 12 decimals.
pub fn parse_range(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::invalid(format!("cannot parse range '{s}' (expected a:step:b)"));
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    match parts[..] {
        [x] if x.is_finite() => Ok(vec![x]),
        [a, step, b] if a.is_finite() && b.is_finite() && step.is_finite() => {
            if step == 0.0 || (b - a) * step < 0.0 {
                return Err(Error::invalid(format!("range '{s}' has a step pointing away from its end")));
            }
            let n = ((b - a) / step + 1e-9).floor() as usize;
            if n > 100_000 {
                return Err(Error::invalid(format!("range '{s}' has too many values")));
            }
            Ok((0..=n).map(|k| ((a + k as f64 * step) * 1e12).round() / 1e12).collect())
        }
        _ => Err(bad()),
    }
}

fn check(cond: bool, msg: impl Into<String>) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::invalid(msg))
    }
}

impl SolveArgs {
    fn validate(&self) -> Result<()> {
        check((1..=MAX_K).contains(&self.k), format!("k must lie in 1..={MAX_K}"))?;
        check(self.tol > 0.0 && self.tol <= 1e-2, "tol must lie in (0, 1e-2]")?;
        check(self.t_max.map_or(true, |t| t > 0.0), "t-max must be positive")?;
        check((16..=8192).contains(&self.image_width), "image width must lie in 16..=8192")
    }

    fn solver(&self) -> SolverOptions {
        SolverOptions {
            tol: self.tol,
            seed: self.seed,
            keep_vectors: self.images > 0,
            ..SolverOptions::default()
        }
    }
}

/// Collects written files and summary values for the sidecar.
struct Outputs {
    dir: PathBuf,
    files: Vec<String>,
    results: Map<String, Value>,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
            results: Map::new(),
        })
    }

    fn write<F>(&mut self, name: &str, fill: F) -> Result<()>
    where
        F: FnOnce(&mut dyn Write) -> std::io::Result<()>,
    {
        write_atomic(&self.dir.join(name), fill)?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn result(&mut self, key: &str, v: Value) {
        self.results.insert(key.to_string(), v);
    }

    fn finish(mut self, config: &RunConfig) -> Result<()> {
        self.files.push("metadata.json".into());
        let meta = json!({
            "config": config,
            "outputs": self.files,
            "results": self.results,
        });
        let text = serde_json::to_string_pretty(&meta).map_err(|e| Error::Internal(e.to_string()))?;
        write_atomic(&self.dir.join("metadata.json"), |w| {
            w.write_all(text.as_bytes())?;
            w.write_all(b"\n")
        })?;
        Ok(())
    }
}

fn spectrum_outputs(
    out: &mut Outputs,
    spectrum: &Spectrum,
    mesh: &TriMesh,
    area: f64,
    dimension: f64,
    solve: &SolveArgs,
) -> Result<()> {
    out.write("spectrum.csv", |w| spectrum.write_csv(w))?;
    let t_max = solve.t_max.unwrap_or(*spectrum.eigenvalues.last().unwrap_or(&1.0));
    let counting = spectral::counting_series(spectrum, area, dimension.clamp(1.0, 2.0), t_max)?;
    out.write("counting.csv", |w| counting.write_csv(w))?;
    out.result("eigenvalues", json!(spectrum.eigenvalues));
    out.result("residuals", json!(spectrum.residuals));
    out.result("dofs", json!(spectrum.meta.dofs));
    out.result("area", json!(area));
    out.result("dimension", json!(dimension));
    out.result("counting_truncated", json!(counting.truncated));
    if let Some(vecs) = &spectrum.eigenvectors {
        let first = spectrum.meta.bc.first_index();
        for (i, u) in vecs.iter().take(solve.images).enumerate() {
            let idx = i + first;
            let (w, h, img) = render_field(mesh, u, true, solve.image_width);
            out.write(&format!("eigenfunction_{idx}.pgm"), |f| write_pgm(f, w, h, &img))?;
            let energy = energy_distribution(mesh, u, EnergyVariant::Gradient);
            let (w, h, img) = render_field(mesh, &energy.values, false, solve.image_width);
            out.write(&format!("energy_{idx}.pgm"), |f| write_pgm(f, w, h, &img))?;
        }
    }
    Ok(())
}

pub fn cmd_snowflake(a: &SnowflakeArgs, config: &RunConfig) -> Result<()> {
    a.solve.validate()?;
    check(a.refine <= 4, "refine must be at most 4")?;
    let spec = match a.kind {
        Kind::Classic => SnowflakeSpec::classic(a.level)?,
        Kind::Quadratic => match a.a {
            Some(x) => SnowflakeSpec::quadratic_ab(x, a.b, a.level)?,
            None => SnowflakeSpec::quadratic(a.b, a.level)?,
        },
    };
    let mut out = Outputs::new(&a.out)?;
    let poly = geometry::snowflake_polygon(&spec)?;
    out.write("polygon.csv", |w| poly.write_csv(w))?;
    let mesh = mesh::mesh_snowflake(&spec, a.refine)?;
    out.write("mesh.off", |w| mesh.write_off(w))?;
    let bc = a.solve.bc.into();
    let spectrum = fem::compute_spectrum(&mesh, bc, a.solve.k, &a.solve.solver(), &spec.label())?;
    let area = geometry::area_at_level(&spec)?;
    let dimension = geometry::boxdim_closed_form(&spec)?;
    out.result("vertices", json!(mesh.num_vertices()));
    out.result("triangles", json!(mesh.num_triangles()));
    spectrum_outputs(&mut out, &spectrum, &mesh, area, dimension, &a.solve)?;
    out.finish(config)
}

pub fn cmd_julia(a: &JuliaArgs, config: &RunConfig) -> Result<()> {
    let c = parse_complex(&a.c)?;
    check((1..=MAX_ITERATIONS).contains(&a.iterations), format!("iterations must lie in 1..={MAX_ITERATIONS}"))?;
    check(a.resolution > 0.0 && a.resolution <= MAX_RESOLUTION, format!("resolution must lie in (0, {MAX_RESOLUTION}]"))?;
    check(a.dimension.map_or(true, |d| (1.0..=2.0).contains(&d)), "dimension must lie in [1, 2]")?;
    a.solve.validate()?;
    let mut out = Outputs::new(&a.out)?;
    let spec = JuliaSpec::new(c).max_iter(a.iterations).resolution(a.resolution);
    let grid = julia::filled_domain(&spec)?;
    let area = raster::pixel_area(&grid);
    out.write("filled.pgm", |w| grid.write_pgm(w))?;
    out.write("area.csv", |w| {
        writeln!(w, "c_re,c_im,iterations,resolution,area")?;
        writeln!(w, "{},{},{},{},{}", c.re, c.im, a.iterations, a.resolution, area)
    })?;
    out.result("area", json!(area));
    println!("area {area}");
    if a.area_only {
        return out.finish(config);
    }
    let comps = raster::interior_components(&grid);
    out.write("components.csv", |w| comps.write_csv(w))?;
    let mesh = mesh::mesh_from_raster(&grid)?;
    out.write("mesh.off", |w| mesh.write_off(w))?;
    let dimension = match a.dimension {
        Some(d) => d,
        None => {
            let points = raster::boundary_cells(&grid).filled_centers();
            boxdim::estimate(&points, 2.0 * grid.pixel_size)?.1.dimension
        }
    };
    let bc: BoundaryCondition = a.solve.bc.into();
    let solver = a.solve.solver();
    let spectrum = fem::compute_spectrum(&mesh, bc, a.solve.k, &solver, &format!("julia c={c}"))?;
    spectrum_outputs(&mut out, &spectrum, &mesh, area, dimension, &a.solve)?;

    let settings = JuliaSettings {
        resolution: a.resolution,
        max_iter: a.iterations,
        solver: solver.without_vectors(),
    };
    if !a.quasicircles.is_empty() {
        let (union, parts) = spectral::quasicircle_union(c, &a.quasicircles, a.solve.k, &settings)?;
        out.write("union.csv", |w| union.write_csv(w))?;
        out.result("quasicircle_dofs", json!(parts.iter().map(|s| s.meta.dofs).collect::<Vec<_>>()));
    }
    if !a.iteration_counts.is_empty() {
        let table = spectral::iteration_comparison(c, &a.iteration_counts, a.solve.k, bc, &settings)?;
        out.write("iterations.csv", |w| table.write_csv(w))?;
        let failed: Vec<String> = table.columns.iter().filter_map(|c| c.as_ref().err().cloned()).collect();
        out.result("iteration_failures", json!(failed));
    }
    if let Some(range) = &a.slice_re {
        let cs: Vec<Complex64> = parse_range(range)?.into_iter().map(|re| Complex64::new(re, c.im)).collect();
        let table = spectral::parameter_slice(&cs, a.solve.k, bc, &settings)?;
        out.write("slice.csv", |w| table.write_csv(w))?;
        let failed: Vec<String> = table.rows.iter().filter_map(|r| r.as_ref().err().cloned()).collect();
        out.result("slice_failures", json!(failed));
    }
    out.finish(config)
}

fn fit_outputs(out: &mut Outputs, series: &boxdim::BoxCountSeries, fit: &boxdim::LogLogFit) -> Result<()> {
    out.write("loglog.csv", |w| series.write_csv(w))?;
    out.write("fit.csv", |w| {
        writeln!(w, "dimension,fit_error,intercept")?;
        writeln!(w, "{},{},{}", fit.dimension, fit.fit_error, fit.intercept)
    })?;
    out.result("dimension", json!(fit.dimension));
    out.result("fit_error", json!(fit.fit_error));
    println!("dimension {} fit_error {}", fit.dimension, fit.fit_error);
    Ok(())
}

pub fn cmd_boxdim(a: &BoxdimArgs, config: &RunConfig) -> Result<()> {
    let modes = [a.snowflake.is_some(), a.julia.is_some(), a.julia_sweep, a.segment];
    check(
        modes.iter().filter(|&&m| m).count() == 1,
        "choose exactly one of --snowflake, --julia, --julia-sweep, --segment",
    )?;
    check((1..=MAX_ITERATIONS).contains(&a.iterations), format!("iterations must lie in 1..={MAX_ITERATIONS}"))?;
    check(
        !a.resolutions.is_empty() && a.resolutions.iter().all(|&r| (16..=8192).contains(&r)),
        "resolutions must lie in 16..=8192",
    )?;
    let mut out = Outputs::new(&a.out)?;
    if let Some(kind) = a.snowflake {
        let spec = match kind {
            Kind::Classic => SnowflakeSpec::classic(a.level)?,
            Kind::Quadratic => SnowflakeSpec::quadratic(a.b, a.level)?,
        };
        let (series, fit) = boxdim::snowflake_dimension(&spec)?;
        fit_outputs(&mut out, &series, &fit)?;
    } else if let Some(c) = &a.julia {
        let c = parse_complex(c)?;
        let (series, fit) = boxdim::julia_dimension_images(c, a.iterations, &boxdim::default_image_widths())?;
        fit_outputs(&mut out, &series, &fit)?;
    } else if a.julia_sweep {
        let re = parse_range(a.re.as_deref().ok_or_else(|| Error::invalid("--julia-sweep needs --re a:step:b"))?)?;
        let im = parse_range(&a.im)?;
        let cs: Vec<Complex64> = re
            .iter()
            .flat_map(|&x| im.iter().map(move |&y| Complex64::new(x, y)))
            .collect();
        let rows = boxdim::dimension_sweep(&cs, &a.resolutions, a.iterations)?;
        out.write("sweep.csv", |w| boxdim::write_sweep_csv(&rows, w))?;
        out.result("cells", json!(rows.len()));
        out.result("failed_cells", json!(rows.iter().filter(|r| r.fit.is_none()).count()));
    } else {
        let fit = boxdim::segment_self_test()?;
        out.write("fit.csv", |w| {
            writeln!(w, "dimension,fit_error,intercept")?;
            writeln!(w, "{},{},{}", fit.dimension, fit.fit_error, fit.intercept)
        })?;
        out.result("dimension", json!(fit.dimension));
        out.result("fit_error", json!(fit.fit_error));
        println!("dimension {} fit_error {}", fit.dimension, fit.fit_error);
    }
    out.finish(config)
}

pub fn run(command: &Command, args: Vec<String>) -> Result<()> {
    let config = RunConfig {
        version: env!("CARGO_PKG_VERSION").to_string(),
        args,
        command: command.clone(),
    };
    match command {
        Command::Snowflake(a) => cmd_snowflake(a, &config),
        Command::Julia(a) => cmd_julia(a, &config),
        Command::Boxdim(a) => cmd_boxdim(a, &config),
    }
}

/// Parse `argv`, run, and return the process exit code.
pub fn main_with_args(argv: Vec<String>) -> i32 {
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
        }
    };
    match run(&cli.command, argv.into_iter().skip(1).collect()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
