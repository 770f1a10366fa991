use num_complex::Complex64;
use soliton_core::scattering::{
    self, blaschke, find_eigenvalues, params_from_scattering, scatter, winding_number, NormingConvention, Scatterer,
    SearchRegion,
};
use soliton_core::stability::{perturb, PerturbationConfig, Shape};
use soliton_core::{l2_norm, n_soliton, ComplexField, Grid, SolitonParams, SpectralPoint};

fn p(xi: f64, eta: f64, x0: f64, theta: f64) -> SolitonParams {
    SolitonParams::new(xi, eta, x0, theta).unwrap()
}

fn grid() -> Grid {
    Grid::centered(80.0, 2048).unwrap()
}

fn region() -> SearchRegion {
    SearchRegion::new(-2.0, 2.0, 0.1, 2.5).unwrap()
}

#[test]
fn exact_solitons_are_reflectionless() {
    let ps = [p(0.3, 0.6, -1.0, 0.2), p(-0.4, 0.8, 1.5, -0.3)];
    let q = n_soliton(&ps, grid(), 0.0).unwrap();
    let sc = Scatterer::new(&q).unwrap();
    let zs: Vec<SpectralPoint> = ps.iter().map(|p| p.point().unwrap()).collect();
    for k in 0..=20 {
        let z = Complex64::new(-3.0 + 0.3 * k as f64, 0.0);
        let a = sc.a(z);
        assert!((a.norm() - 1.0).abs() <= 1e-6, "|a({z})| = {}", a.norm());
        assert!((a - blaschke(z, &zs)).norm() <= 1e-6);
    }
    for (re, im) in [(0.0, 0.3), (1.0, 1.0), (-0.5, 2.0), (0.3, 0.9)] {
        let z = Complex64::new(re, im);
        assert!((sc.a(z) - blaschke(z, &zs)).norm() <= 1e-6, "a({z})");
    }
}

#[test]
fn vacuum_has_unit_transmission() {
    let q = ComplexField::zeros(grid(), 0.0);
    assert!((scattering::scattering_coefficient_a(&q, Complex64::new(0.4, 0.7)).unwrap() - 1.0).norm() <= 1e-14);
    assert!(find_eigenvalues(&q, &region()).unwrap().is_empty());
    assert_eq!(winding_number(&q, &region()).unwrap(), 0);
}

#[test]
fn single_soliton_example() {
    let ps = [p(0.0, 0.5, 0.0, 0.0)];
    let q = n_soliton(&ps, grid(), 0.0).unwrap();
    // a(i) = (i − i/2)/(i + i/2) = 1/3
    let a = scattering::scattering_coefficient_a(&q, Complex64::new(0.0, 1.0)).unwrap();
    assert!((a - 1.0 / 3.0).norm() <= 1e-8, "{a}");
}

#[test]
fn winding_matches_newton_count() {
    let sets = [
        vec![p(0.3, 0.7, 0.0, 0.0)],
        vec![p(0.4, 0.6, 2.0, 0.3), p(-0.3, 0.9, -1.5, 1.2)],
        vec![p(0.5, 0.5, -4.0, 0.0), p(-0.2, 0.8, 0.0, 1.0), p(0.1, 1.1, 4.0, -0.5)],
    ];
    let regions = [region(), SearchRegion::new(-1.0, 1.0, 0.2, 1.0).unwrap(), SearchRegion::new(0.0, 1.0, 0.3, 2.0).unwrap()];
    for ps in &sets {
        let q = n_soliton(ps, grid(), 0.0).unwrap();
        let sc = Scatterer::new(&q).unwrap();
        for r in &regions {
            let found = sc.find_eigenvalues(r).unwrap();
            let expected = ps.iter().filter(|p| r.contains(p.point().unwrap().z())).count();
            assert_eq!(found.len(), expected);
            assert_eq!(sc.winding_number(r), expected as i64);
        }
    }
}

#[test]
fn round_trip_recovers_parameters() {
    for (ps, tol) in [
        (vec![p(0.3, 0.7, 1.0, 0.4)], 1e-6),
        (vec![p(0.4, 0.6, 2.0, 0.3), p(-0.3, 0.9, -1.5, 1.2)], 1e-4),
    ] {
        let q = n_soliton(&ps, grid(), 0.0).unwrap();
        let data = scatter(&q, &region(), 8).unwrap();
        assert_eq!(data.a_samples.len(), 8);
        let rec = params_from_scattering(&data).unwrap();
        for b in &ps {
            let m = rec
                .iter()
                .min_by(|x, y| (x.xi - b.xi).hypot(x.eta - b.eta).total_cmp(&(y.xi - b.xi).hypot(y.eta - b.eta)))
                .unwrap();
            let theta = scattering::nearest_branch(m.theta, b.theta);
            for d in [m.xi - b.xi, m.eta - b.eta, m.x0 - b.x0, theta - b.theta] {
                assert!(d.abs() <= tol, "{m:?} vs {b:?}");
            }
        }
    }
}

#[test]
fn round_trip_at_later_time() {
    let ps = [p(0.3, 0.7, 1.0, 0.4)];
    let q = n_soliton(&ps, grid(), 1.5).unwrap();
    let rec = params_from_scattering(&scatter(&q, &region(), 0).unwrap()).unwrap();
    assert!((rec[0].x0 - 1.0).abs() <= 1e-6 && (scattering::nearest_branch(rec[0].theta, 0.4) - 0.4).abs() <= 1e-6);
}

#[test]
fn calibration_reproduces_default_convention() {
    let conv = NormingConvention::calibrate(grid()).unwrap();
    let def = NormingConvention::default();
    assert!((conv.amplitude - def.amplitude).abs() <= 1e-6);
    assert!((conv.phase - def.phase).abs() <= 1e-6);
    assert!((conv.galilean - def.galilean).abs() <= 1e-6);
}

#[test]
fn eigenvalues_converge_under_refinement() {
    let ps = [p(0.3, 0.7, 0.0, 0.0)];
    let err = |n: usize| {
        let g = Grid::centered(40.0, n).unwrap();
        let q = n_soliton(&ps, g, 0.0).unwrap();
        let sc = Scatterer::with_substeps(&q, 1).unwrap();
        let z = sc.find_eigenvalues(&region()).unwrap();
        (z[0].z() - ps[0].point().unwrap().z()).norm()
    };
    let (coarse, fine) = (err(128), err(256));
    assert!(coarse / fine >= 1.8, "{coarse:e} -> {fine:e}");
}

#[test]
fn eigenvalues_move_linearly_with_perturbation() {
    let ps = vec![p(0.4, 0.6, 2.0, 0.3), p(-0.3, 0.9, -1.5, 1.2)];
    let qs = n_soliton(&ps, grid(), 0.0).unwrap();
    for eps in [1e-3, 1e-2] {
        let cfg = PerturbationConfig { shape: Shape::default(), epsilon: eps, seed: 0, weight: 1.0 };
        let q = perturb(&qs, &ps, &cfg).unwrap();
        let zs = find_eigenvalues(&q, &region()).unwrap();
        assert_eq!(zs.len(), 2);
        for b in &ps {
            let d = zs.iter().map(|z| (z.z() - b.point().unwrap().z()).norm()).fold(f64::INFINITY, f64::min);
            assert!(d <= 10.0 * eps, "moved {d:e} at eps {eps}");
        }
    }
}

#[test]
fn stripping_leaves_soliton_free_remainder() {
    let ps = vec![p(0.4, 0.6, 2.0, 0.3), p(-0.3, 0.9, -1.5, 1.2)];
    let q = n_soliton(&ps, grid(), 0.0).unwrap();
    let (rest, zs) = scattering::strip_solitons(&q, &region()).unwrap();
    assert_eq!(zs.len(), 2);
    assert!(l2_norm(&rest) <= 1e-6, "{}", l2_norm(&rest));
}

#[test]
fn remainder_edges_are_judged_against_the_original_field() {
    let q = n_soliton(&[p(0.4, 0.6, 2.0, 0.3)], grid(), 0.0).unwrap();
    let rest = ComplexField::from_fn(grid(), 0.0, |x| Complex64::new(1e-7 / (1.0 + (x / 20.0).powi(2)), 0.0));
    assert!(find_eigenvalues(&rest, &region()).is_err());
    assert!(scattering::residual_eigenvalues(&rest, &q, &region()).unwrap().is_empty());
}

#[test]
fn region_validation() {
    assert!(SearchRegion::new(1.0, -1.0, 0.1, 1.0).is_err());
    assert!(SearchRegion::new(-1.0, 1.0, 0.0, 1.0).is_err());
    assert!(SearchRegion::new(-1.0, 1.0, 0.5, 0.4).is_err());
}

#[test]
fn scattering_data_json_round_trip() {
    let q = n_soliton(&[p(0.3, 0.7, 0.0, 0.0)], grid(), 0.0).unwrap();
    let data = scatter(&q, &region(), 4).unwrap();
    let text = serde_json::to_string(&data).unwrap();
    let back: scattering::ScatteringData = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_string(&back).unwrap(), text);
}
