use std::f64::consts::PI;
use std::sync::Arc;

use hawklab::meanfield::MeanField;
use hawklab::rotsym::{curvature_check, normal_flow_check, sphere_data, RadialMetric};
use hawklab::sphharm::{build_grid, laplace_beltrami, random_field, rotate_about_pole, E2Vector, SphCoeffs, SphGrid};
use hawklab::surfspec::{esi_check, lambda2_meanzero, normalize_area, spectrum, ConformalMetric};
use proptest::prelude::*;

fn coeffs(band: usize) -> impl Strategy<Value = SphCoeffs> {
    prop::collection::vec(-1.0f64..1.0, (band + 1) * (band + 1))
        .prop_map(move |v| SphCoeffs::from_vec(band, v).unwrap())
}

fn grid(band: usize) -> Arc<SphGrid> {
    build_grid(band).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn parseval(c in coeffs(12)) {
        let g = grid(12);
        let f = g.synthesize(&c).unwrap();
        prop_assert!((f.l2_norm() - c.norm()).abs() <= 1e-12 * (1.0 + c.norm()));
        let back = f.analyze().unwrap();
        prop_assert!(back.max_abs_diff(&c) <= 1e-12);
    }

    #[test]
    fn laplacian_is_self_adjoint(a in coeffs(8), b in coeffs(8)) {
        let g = grid(8);
        let la = g.synthesize(&laplace_beltrami(&a)).unwrap();
        let lb = g.synthesize(&laplace_beltrami(&b)).unwrap();
        let fa = g.synthesize(&a).unwrap();
        let fb = g.synthesize(&b).unwrap();
        let lhs = la.zip_map(&fb, |x, y| x * y).unwrap().integrate();
        let rhs = fa.zip_map(&lb, |x, y| x * y).unwrap().integrate();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
    }

    #[test]
    fn products_commute(a in coeffs(4), b in coeffs(4)) {
        let g = grid(8);
        let ab = g.product_project(&a, &b, 8).unwrap();
        let ba = g.product_project(&b, &a, 8).unwrap();
        prop_assert!(ab.max_abs_diff(&ba) <= 1e-14);
    }

    #[test]
    fn gauss_bonnet(seed in 0u64..1_000_000) {
        let g = grid(16);
        let u = random_field(&g, 8, 0.5, seed, 0).unwrap();
        let m = ConformalMetric::on_grid(u, 8, g).unwrap();
        prop_assert!((m.total_curvature().unwrap() - 4.0 * PI).abs() <= 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn p2_projection_identity(v in prop::array::uniform5(-1.0f64..1.0)) {
        prop_assume!(v.iter().map(|x| x * x).sum::<f64>() > 1e-6);
        let m = MeanField::new(8).unwrap();
        let (lhs, rhs) = m.p2_norm_identity_check(&E2Vector(v)).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn spectrum_shifts_with_constant_potential(seed in 0u64..1000, c in -2.0f64..2.0) {
        let g = grid(24);
        let u = random_field(&g, 6, 0.3, seed, 0).unwrap();
        let m = ConformalMetric::on_grid(u, 12, g).unwrap();
        let q = m.curvature();
        let a = spectrum(&m, q, 9).unwrap();
        let b = spectrum(&m, &q.map(|k| k + c), 9).unwrap();
        for (x, y) in a.raw.iter().zip(&b.raw) {
            prop_assert!((y - x - c).abs() <= 1e-9);
        }
    }

    #[test]
    fn meanzero_bound_below_second_eigenvalue(seed in 0u64..1000) {
        let g = grid(24);
        let u = normalize_area(&random_field(&g, 6, 0.3, seed, 1).unwrap(), &g).unwrap();
        let m = ConformalMetric::on_grid(u, 12, g).unwrap();
        let q = m.jacobi_potential();
        let l2 = spectrum(&m, &q, 9).unwrap().lambda2;
        prop_assert!(lambda2_meanzero(&m, &q).unwrap() <= l2 + 1e-9);
        prop_assert!(esi_check(&m, &q).unwrap() >= -1e-8);
    }

    #[test]
    fn residual_commutes_with_grid_rotations(seed in 0u64..1000, k in 1usize..96) {
        let m = MeanField::new(8).unwrap();
        let u = random_field(m.grid(), 8, 0.1, seed, 0).unwrap();
        let alpha = 2.0 * PI * k as f64 / m.grid().n_phi() as f64;
        let lhs = m.residual(&rotate_about_pole(&u, alpha)).unwrap();
        let rhs = rotate_about_pole(&m.residual(&u).unwrap(), alpha);
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-13);
    }
}

fn metric_family() -> impl Strategy<Value = RadialMetric> {
    prop_oneof![
        Just(RadialMetric::flat()),
        Just(RadialMetric::hyperbolic()),
        (0.1f64..3.0).prop_map(|m| RadialMetric::schwarzschild(m).unwrap()),
        (0.1f64..3.0).prop_map(|m| RadialMetric::ads_schwarzschild(m).unwrap()),
        (0.1f64..2.0).prop_map(|m| RadialMetric::mass_profile(m, 2.0 * m).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn volume_and_area_increase(metric in metric_family(), x in 0.01f64..5.0, dx in 0.01f64..5.0) {
        let r0 = metric.r_min() + x;
        let a = sphere_data(&metric, r0).unwrap();
        let b = sphere_data(&metric, r0 + dx).unwrap();
        prop_assert!(b.volume > a.volume && b.area > a.area);
        prop_assert!(a.a0_sq == 0.0);
    }

    #[test]
    fn gauss_equation_closes(metric in metric_family(), x in 0.01f64..50.0) {
        let r = metric.r_min() + x;
        let rep = curvature_check(&metric, &[r]).unwrap();
        prop_assert!(rep.max_gauss_closure_error <= 1e-10 * (1.0 + 1.0 / (r * r)));
    }

    #[test]
    fn schwarzschild_spheres_carry_the_mass(m in 0.1f64..5.0, x in 0.01f64..100.0) {
        let s = RadialMetric::schwarzschild(m).unwrap();
        let d = sphere_data(&s, 2.0 * m + x).unwrap();
        prop_assert!((d.hawking_mass - m).abs() <= 1e-9 * m.max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn variation_identities_along_normal_flow(metric in metric_family(), x in 0.3f64..3.0) {
        let r0 = if metric.has_horizon() { metric.r_min() * (1.0 + x) } else { x };
        let res = normal_flow_check(&metric, r0, 0.5, 1e-3).unwrap();
        prop_assert!(res.max() <= 1e-8, "{}: {res:?}", metric.label());
    }
}
