use feynman_index::distributions::{coeff_c, DistributionQuery, Family, Pairer, Strategy as EvalStrategy, TestFunction};
use feynman_index::eta::eta_zeta;
use feynman_index::hadamard::jet::SJet;
use feynman_index::hadamard::{diagonal_coefficients, FlatOperatorSpec};
use feynman_index::index::{fredholm_pair_index, spectral_flow};
use feynman_index::models::{build_circle_dirac, CircleOperatorSpec, CylinderModel};
use feynman_index::propagator::{KernelFamily, KernelKind};
use feynman_index::spectral::{complex_power, frequency_projectors, CMat, OperatorMatrix, RaySpec};
use num_complex::Complex64 as C64;
use proptest::prelude::*;

fn matrix(n: usize) -> impl Strategy<Value = CMat> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n)
        .prop_map(move |v| CMat::from_iterator(n, n, v.into_iter().map(|(a, b)| C64::new(a, b))))
}

fn sized_matrix() -> impl Strategy<Value = CMat> {
    (2usize..7).prop_flat_map(matrix)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn projectors_resolve_identity_and_commute(m in sized_matrix()) {
        let d = OperatorMatrix::new(m).unwrap();
        let n = d.dim();
        let Ok(p) = frequency_projectors(&d, RaySpec::default(), 1e-8) else {
            // near-degenerate draws are rejected by the clustering
            return Ok(());
        };
        let (gt, lt, z) = (p.p_gt.entries(), p.p_lt.entries(), p.p_0.entries());
        prop_assert!((gt + lt + z - CMat::identity(n, n)).norm() < 1e-10);
        prop_assert!((gt * lt).norm() < 1e-9);
        prop_assert!((gt * gt - gt).norm() < 1e-9);
        prop_assert!((gt * d.entries() - d.entries() * gt).norm() < 1e-9);
        let delta = OperatorMatrix::new(d.entries() * d.entries()).unwrap();
        let root = complex_power(&delta, C64::new(0.5, 0.0), RaySpec::default(), 1e-8).unwrap();
        prop_assert!((p.sign() * d.entries() - root.entries()).norm() < 1e-9);
    }

    #[test]
    fn circle_projectors_split_by_mode_sign(a in -2.0f64..2.0, k in 1usize..8) {
        prop_assume!((a - a.round()).abs() > 1e-6);
        let d = build_circle_dirac(&CircleOperatorSpec::flux_only(a, k)).unwrap();
        let p = frequency_projectors(&d, RaySpec::default(), 1e-8).unwrap();
        let labels = d.mode_labels().unwrap();
        for (i, l) in labels.iter().enumerate() {
            let want = if *l as f64 + a > 0.0 { 1.0 } else { 0.0 };
            prop_assert!((p.p_gt.entries()[(i, i)] - C64::new(want, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn feynman_kernel_is_one_sided(a in -1.5f64..1.5, t in 0.01f64..3.0) {
        prop_assume!((a - a.round()).abs() > 1e-3);
        let d = build_circle_dirac(&CircleOperatorSpec::flux_only(a, 3)).unwrap();
        let fam = KernelFamily::new(KernelKind::FeynmanDirac, d, RaySpec::default(), 1e-8).unwrap();
        let p = fam.projectors().unwrap().clone();
        prop_assert!((p.p_lt.entries() * fam.eval(t).unwrap().entries()).norm() < 1e-12);
        prop_assert!((p.p_ge() * fam.eval(-t).unwrap().entries()).norm() < 1e-12);
    }

    #[test]
    fn zeta_eta_matches_fractional_part(a in -3.0f64..3.0) {
        prop_assume!((a - a.round()).abs() > 1e-6);
        let d = build_circle_dirac(&CircleOperatorSpec::flux_only(a, 12)).unwrap();
        let r = eta_zeta(&d, RaySpec::default()).unwrap();
        let frac = a - a.floor();
        prop_assert!((r.eta - C64::new(1.0 - 2.0 * frac, 0.0)).norm() < 1e-10);
        prop_assert_eq!(r.h, 0);
    }

    #[test]
    fn structure_constant_recursion(b in -3.0f64..3.0, n in 2usize..6) {
        let beta = C64::new(b, 0.0);
        let lhs = coeff_c(beta, n);
        let rhs = coeff_c(beta + 1.0, n) * (2.0 * beta + 2.0) * (2.0 * beta + n as f64);
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + lhs.norm()));
    }

    #[test]
    fn constant_potential_diagonal_is_power(m in matrix(2)) {
        let b = m * C64::new(0.6, 0.0);
        let spec = FlatOperatorSpec::constant_potential(2, b.clone());
        let d = diagonal_coefficients(&spec, &[0.3, -0.4], 3).unwrap();
        let mut want = CMat::identity(2, 2);
        for k in 0..=3 {
            if k > 0 {
                want = &want * -&b;
            }
            prop_assert!((&d.values[k] - &want).norm() < 1e-10);
        }
    }

    #[test]
    fn jet_product_is_pointwise(x in -1.0f64..1.0, y in -1.0f64..1.0, h0 in -0.01f64..0.01, h1 in -0.01f64..0.01) {
        let u = SJet::coordinate(2, 10, 0, x);
        let v = SJet::coordinate(2, 10, 1, y);
        let f = u.mul(&v).exp();
        let want = ((x + h0) * (y + h1)).exp();
        prop_assert!((f.eval(&[h0, h1]) - C64::new(want, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn boost_composes_with_the_test_function(t in -1.0f64..1.0, s in -1.0f64..1.0, r in -0.8f64..0.8) {
        let phi = TestFunction::gaussian_poly(vec![0.1, -0.2], 0.9, &[(vec![0, 0], 1.0), (vec![1, 1], 0.3)]).unwrap();
        let boosted = phi.boosted(r).unwrap();
        let (c, sh) = (r.cosh(), r.sinh());
        let back = [c * t - sh * s, -sh * t + c * s];
        let want = phi.value(&[t, s]);
        prop_assert!((boosted.value(&back) - want).abs() < 1e-12 * (1.0 + want.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn trace_index_equals_spectral_flow(a in -1.4f64..1.4, b in -1.4f64..1.4) {
        prop_assume!((a - a.round()).abs() > 0.05 && (b - b.round()).abs() > 0.05);
        let m = CylinderModel::smoothstep(a, b, 4.0, 24);
        let idx = fredholm_pair_index(&m, RaySpec::default()).unwrap();
        let sf = spectral_flow(&m).unwrap();
        prop_assert_eq!(sf, (b.floor() - a.floor()) as i64);
        prop_assert!((idx.trace_index - C64::new(sf as f64, 0.0)).norm() < 1e-6);
    }

    #[test]
    fn f_pairing_is_linear_in_the_test_function(w in 0.6f64..1.4, lam in -2.0f64..2.0) {
        let p1 = TestFunction::gaussian_poly(vec![0.2, 0.1], w, &[]).unwrap();
        let p2 = TestFunction::gaussian_poly(vec![0.2, 0.1], w, &[(vec![0, 0], 1.0), (vec![1, 0], lam)]).unwrap();
        let p3 = TestFunction::gaussian_poly(vec![0.2, 0.1], w, &[(vec![1, 0], 1.0)]).unwrap();
        let q = DistributionQuery::new(Family::F, C64::new(0.5, 0.0), 1, 2).with_strategy(EvalStrategy::BoundaryValue);
        let mut pr = Pairer::new();
        let a = pr.pair(&q, &p1).unwrap().value;
        let b = pr.pair(&q, &p2).unwrap().value;
        let c = pr.pair(&q, &p3).unwrap().value;
        prop_assert!((b - (a + c * lam)).norm() < 1e-8 * (1.0 + b.norm()));
    }
}
