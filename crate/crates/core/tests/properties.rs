use fractal_spectra::boxdim::{self, BoxCountSeries};
use fractal_spectra::fem::{self, assemble};
use fractal_spectra::geometry::{self, Point, SnowflakeSpec};
use fractal_spectra::julia::{self, JuliaSpec};
use fractal_spectra::mesh::{self, TriMesh};
use fractal_spectra::raster::{self, RasterGrid};
use num_complex::Complex64;
use proptest::prelude::*;

fn check_mesh(m: &TriMesh) -> Result<(), TestCaseError> {
    for t in 0..m.num_triangles() {
        prop_assert!(m.signed_area(t) > 0.0, "triangle {t} not counter-clockwise");
    }
    let edges = m.edges();
    prop_assert!(edges.iter().all(|(_, n)| *n <= 2), "edge shared by more than two triangles");
    // boundary flags agree with edges that have a single triangle
    let mut on_rim = vec![false; m.num_vertices()];
    for ((a, b), n) in &edges {
        if *n == 1 {
            on_rim[*a] = true;
            on_rim[*b] = true;
        }
    }
    prop_assert_eq!(&on_rim, &m.is_boundary);
    prop_assert!(m.hanging_vertices(1e-9 * m.h).is_empty(), "mesh is not conforming");
    Ok(())
}

fn grid_strategy() -> impl Strategy<Value = RasterGrid> {
    (2usize..12, 2usize..12).prop_flat_map(|(w, h)| {
        proptest::collection::vec(any::<bool>(), w * h).prop_map(move |bits| {
            let mut g = RasterGrid::empty(w, h, [-0.3, 0.7], 0.25);
            g.bits = bits;
            g
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn classic_meshes_are_disks(level in 0u32..4, refine in 0u32..3) {
        let spec = SnowflakeSpec::classic(level).unwrap();
        let m = mesh::mesh_snowflake(&spec, refine).unwrap();
        check_mesh(&m)?;
        prop_assert_eq!(m.euler_characteristic(), 1);
        let exact = geometry::area_at_level(&spec).unwrap();
        prop_assert!((m.area() - exact).abs() < 1e-12);
    }

    #[test]
    fn quadratic_meshes_are_valid(level in 0u32..3, b in 0.1f64..0.3) {
        let spec = SnowflakeSpec::quadratic(b, level).unwrap();
        let m = mesh::mesh_snowflake(&spec, 0).unwrap();
        check_mesh(&m)?;
    }

    #[test]
    fn raster_meshes_are_valid(grid in grid_strategy()) {
        prop_assume!(grid.filled_count() > 0);
        let m = mesh::mesh_from_raster(&grid).unwrap();
        check_mesh(&m)?;
        prop_assert_eq!(m.num_triangles(), 2 * grid.filled_count());
        prop_assert!((m.area() - raster::pixel_area(&grid)).abs() < 1e-12);
    }

    #[test]
    fn refinement_preserves_invariants(grid in grid_strategy()) {
        prop_assume!(grid.filled_count() > 0);
        let m = mesh::mesh_from_raster(&grid).unwrap();
        let r = mesh::refine(&m).unwrap();
        check_mesh(&r)?;
        prop_assert_eq!(r.num_triangles(), 4 * m.num_triangles());
        prop_assert_eq!(r.euler_characteristic(), m.euler_characteristic());
    }

    #[test]
    fn stiffness_rows_sum_to_zero(grid in grid_strategy()) {
        prop_assume!(grid.filled_count() > 0);
        let m = mesh::mesh_from_raster(&grid).unwrap();
        let (k, mass) = assemble(&m).unwrap();
        let scale = k.diagonal().iter().fold(0.0f64, |a, &b| a.max(b));
        prop_assert!(k.row_sums().iter().all(|s| s.abs() <= 1e-12 * scale));
        prop_assert!(k.is_symmetric(0.0) && mass.is_symmetric(0.0));
        // total mass is the area
        prop_assert!((mass.row_sums().iter().sum::<f64>() - m.area()).abs() < 1e-12);
    }

    #[test]
    fn escape_sets_nest(re in -2.0f64..1.0, im in -1.2f64..1.2, zr in -2.0f64..2.0, zi in -2.0f64..2.0,
                        n in 1u32..60, extra in 1u32..60) {
        let (c, z) = (Complex64::new(re, im), Complex64::new(zr, zi));
        let short = julia::escape_iterations(z, c, n, 2.0);
        let long = julia::escape_iterations(z, c, n + extra, 2.0);
        if let Some(k) = short {
            prop_assert_eq!(long, Some(k));
        }
        if julia::mandelbrot_member(c, n + extra) {
            prop_assert!(julia::mandelbrot_member(c, n));
        }
    }

    #[test]
    fn filled_rasters_nest(re in -1.2f64..0.3, im in -0.8f64..0.8, n in 2u32..20, extra in 1u32..20) {
        let base = JuliaSpec::new(Complex64::new(re, im)).resolution(24.0);
        let a = julia::rasterize_filled(&base.clone().max_iter(n)).unwrap();
        let b = julia::rasterize_filled(&base.max_iter(n + extra)).unwrap();
        prop_assert!(a.bits.iter().zip(&b.bits).all(|(x, y)| *x || !*y));
        // z -> -z symmetry of the square window is exact
        let (w, h) = (b.width, b.height);
        for j in 0..h {
            for i in 0..w {
                prop_assert_eq!(b.get(i, j), b.get(w - 1 - i, h - 1 - j));
            }
        }
    }

    #[test]
    fn box_counts_nest_dyadically(pts in proptest::collection::vec((0.0f64..1.0, 0.0f64..1.0), 1..200),
                                  k in 1u32..8) {
        let points: Vec<Point> = pts.into_iter().map(|(x, y)| [x, y]).collect();
        let s = 2f64.powi(-(k as i32));
        let fine = boxdim::count_boxes(&points, s, [0.0, 0.0]);
        let coarse = boxdim::count_boxes(&points, 2.0 * s, [0.0, 0.0]);
        prop_assert!(coarse <= fine && fine <= 4 * coarse);
        prop_assert!(fine as usize <= points.len());
    }

    #[test]
    fn power_law_fit_is_exact(base in 2u32..6, per in 2u32..9, levels in 3usize..9) {
        // N(r) = per^k at r = base^-k has dimension ln per / ln base
        let sizes: Vec<f64> = (0..levels).map(|k| (base as f64).powi(-(k as i32))).collect();
        let counts: Vec<u64> = (0..levels).map(|k| (per as u64).pow(k as u32)).collect();
        let fit = boxdim::fit_dimension(&BoxCountSeries { sizes, counts }).unwrap();
        let want = (per as f64).ln() / (base as f64).ln();
        prop_assert!((fit.dimension - want).abs() < 1e-12, "{} vs {}", fit.dimension, want);
        prop_assert!(fit.fit_error < 1e-12);
    }

    #[test]
    fn components_partition_filled_pixels(grid in grid_strategy()) {
        let cs = raster::interior_components(&grid);
        prop_assert_eq!(cs.areas.iter().sum::<usize>(), grid.filled_count());
        prop_assert!(cs.areas.windows(2).all(|w| w[0] >= w[1]));
        let sep = raster::separated_components(&grid, 1);
        prop_assert!(sep.areas.iter().sum::<usize>() <= grid.filled_count());
        for (l, b) in sep.labels.iter().zip(&grid.bits) {
            prop_assert!(*l == 0 || *b);
        }
    }
}

#[test]
fn mass_matrix_smallest_ritz_value_is_positive() {
    let m = mesh::mesh_snowflake(&SnowflakeSpec::classic(3).unwrap(), 1).unwrap();
    let (_, mass) = assemble(&m).unwrap();
    let n = mass.n;
    let id = fem::CsrMatrix::from_triplets(n, &(0..n).map(|i| (i, i, 1.0)).collect::<Vec<_>>());
    let p = fem::EigenProblem {
        stiffness: &mass,
        mass: &id,
        coords: Some(&m.vertices),
        shift: 0.0,
    };
    let pairs = fem::eigen::solve(&p, 1, &fem::SolverOptions::default()).unwrap();
    assert!(pairs.converged);
    assert!(pairs.values[0] > 0.0, "{}", pairs.values[0]);
}
