use num_complex::Complex64;
use proptest::prelude::*;
use soliton_core::lax::{self, build_chi, build_chi_adjoint, gramian, solve_r_from_s, solve_s_from_r};
use soliton_core::{Mat2, SpectralPoint, ZsVector};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn points() -> impl Strategy<Value = Vec<SpectralPoint>> {
    prop::collection::vec((-1.5f64..1.5, 0.2f64..2.0), 1..=4)
        .prop_filter("distinct points", |v| {
            v.iter().enumerate().all(|(i, a)| {
                v.iter()
                    .skip(i + 1)
                    .all(|b| (a.0 - b.0).hypot(a.1 - b.1) > 0.1)
            })
        })
        .prop_map(|v| v.into_iter().map(|(x, e)| SpectralPoint::new(x, e).unwrap()).collect())
}

fn vectors(n: usize) -> impl Strategy<Value = Vec<ZsVector>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0), n)
        .prop_filter("non-zero", |v| v.iter().all(|(a, b, c, d)| a.abs() + b.abs() + c.abs() + d.abs() > 0.1))
        .prop_map(|v| v.into_iter().map(|(a, b, cc, d)| ZsVector::new(c(a, b), c(cc, d))).collect())
}

fn data() -> impl Strategy<Value = (Vec<SpectralPoint>, Vec<ZsVector>)> {
    points().prop_flat_map(|zs| {
        let n = zs.len();
        (Just(zs), vectors(n))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn gramian_is_hermitian((zs, s) in data()) {
        let Ok(g) = gramian(&s, &zs) else { return Ok(()) };
        let scale = g.m.max_abs();
        prop_assert!(g.m.max_abs_diff(&g.m.adjoint()) <= 1e-12 * scale);
        prop_assert!(g.det.im.abs() <= 1e-12 * g.det.norm().max(g.m.diag_product_abs()));
    }

    #[test]
    fn cofactors_are_conjugate_symmetric((zs, s) in data()) {
        let Ok(g) = gramian(&s, &zs) else { return Ok(()) };
        let scale = g.cof.max_abs().max(1e-300);
        prop_assert!(g.cof.max_abs_diff(&g.cof.adjoint()) <= 1e-12 * scale);
    }

    #[test]
    fn cofactor_solution_matches_lu((zs, s) in data()) {
        let Ok(g) = gramian(&s, &zs) else { return Ok(()) };
        let by_cof = g.r_by_cofactors(&s);
        let by_lu = solve_r_from_s(&s, &zs).unwrap();
        let scale = by_lu.iter().map(|v| v.max_abs()).fold(1.0, f64::max);
        for (a, b) in by_cof.iter().zip(&by_lu) {
            prop_assert!(a.dist(b) <= 1e-9 * scale);
        }
    }

    #[test]
    fn linear_system_duality((zs, s) in data()) {
        let Ok(r) = solve_r_from_s(&s, &zs) else { return Ok(()) };
        let back = solve_s_from_r(&r, &zs).unwrap();
        for (a, b) in back.iter().zip(&s) {
            prop_assert!(a.dist(b) <= 1e-10 * (1.0 + b.max_abs()), "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn dressing_factor_is_unitary((zs, s) in data(), zr in -3.0f64..3.0, zi in -3.0f64..3.0) {
        let z = c(zr, zi);
        prop_assume!(zs.iter().all(|p| (z - p.z()).norm() > 0.05 && (z - p.zbar()).norm() > 0.05));
        let Ok(r) = solve_r_from_s(&s, &zs) else { return Ok(()) };
        let chi = build_chi(z, &r, &s, &zs).unwrap();
        let chi_p = build_chi_adjoint(z, &r, &s, &zs).unwrap();
        let scale = chi.max_abs() * chi_p.max_abs();
        prop_assert!((chi * chi_p - Mat2::IDENTITY).max_abs() <= 1e-9 * scale.max(1.0));
        prop_assert!((chi_p * chi - Mat2::IDENTITY).max_abs() <= 1e-9 * scale.max(1.0));
    }

    #[test]
    fn chi_has_unit_modulus_determinant_on_real_axis((zs, s) in data(), z in -3.0f64..3.0) {
        let Ok(r) = solve_r_from_s(&s, &zs) else { return Ok(()) };
        let chi = build_chi(c(z, 0.0), &r, &s, &zs).unwrap();
        prop_assert!((chi.det().norm() - 1.0).abs() <= 1e-9 * chi.max_abs().powi(2).max(1.0));
    }

    #[test]
    fn lax_u_anti_hermitian_on_real_axis(qr in -5.0f64..5.0, qi in -5.0f64..5.0, z in -5.0f64..5.0) {
        let u = lax::lax_u(c(qr, qi), c(z, 0.0));
        prop_assert_eq!(u.adjoint(), -u);
    }
}

#[test]
fn pauli_matrix_example() {
    let q = lax::pauli_q(c(2.0, 1.0));
    assert_eq!(q.0[0][1], c(2.0, 1.0));
    assert_eq!(q.0[1][0], -c(2.0, -1.0));
    assert_eq!(q.adjoint(), -q);
}

#[test]
fn one_point_dressing_factor_example() {
    let zs = [SpectralPoint::new(0.0, 1.0).unwrap()];
    let s = [ZsVector::new(c(1.0, 0.0), c(-1.0, 0.0))];
    let r = solve_r_from_s(&s, &zs).unwrap();
    let z = c(0.0, 2.0);
    let chi = build_chi(z, &r, &s, &zs).unwrap();
    let chi_p = build_chi_adjoint(z, &r, &s, &zs).unwrap();
    assert!((chi * chi_p - Mat2::IDENTITY).max_abs() <= 1e-9);
}

#[test]
fn singular_gramian_is_reported() {
    let zs = [SpectralPoint::new(0.0, 1.0).unwrap(), SpectralPoint::new(0.5, 1.0).unwrap()];
    let v = ZsVector::new(c(0.0, 0.0), c(0.0, 0.0));
    assert!(gramian(&[v, v], &zs).is_err());
}
