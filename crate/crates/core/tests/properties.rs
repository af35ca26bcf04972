use disentangle::oracles::{
    closed_forms, mc_thermal_moments, quadrature_moments, McConfig, QuadratureSpec,
};
use disentangle::*;
use proptest::prelude::*;

const NAT: PhysicalConstants = PhysicalConstants::NATURAL;

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn params() -> impl Strategy<Value = GaussianParams> {
    (0.2f64..5.0, -0.95f64..0.95).prop_map(|(a11, r)| validate_params(a11, r * a11).unwrap())
}

fn invariants_at(p: &GaussianParams, temp: f64, t: f64, l: Option<f64>) -> DetInvariants {
    let m = evolve_moments(&thermal_moments(p, temp, &NAT).unwrap(), t, &NAT);
    let l = l.unwrap_or_else(|| default_length_scale(p));
    det_invariants(&covariance_blocks(&m, l, &NAT).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn uncertainty_bound(p in params(), temp in 0.0f64..3.0, t in -1000.0f64..1000.0) {
        let m = evolve_moments(&thermal_moments(&p, temp, &NAT).unwrap(), t, &NAT);
        prop_assert!(m.uncertainty_product() >= 0.25 - 1e-12);
    }

    #[test]
    fn evolution_composes(p in params(), temp in 0.0f64..3.0, t1 in -50.0f64..50.0, t2 in -50.0f64..50.0) {
        let m0 = thermal_moments(&p, temp, &NAT).unwrap();
        let two_step = evolve_moments(&evolve_moments(&m0, t1, &NAT), t2, &NAT);
        let one_step = evolve_moments(&m0, t1 + t2, &NAT);
        let scale = (one_step.xx() * one_step.pp()).sqrt();
        for m in Moment::ALL {
            let (a, b) = (two_step.get(m), one_step.get(m));
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(scale * 1e-3), "{:?}: {} vs {}", m, a, b);
        }
    }

    #[test]
    fn reversible(p in params(), temp in 0.0f64..3.0, t in -100.0f64..100.0) {
        let m0 = thermal_moments(&p, temp, &NAT).unwrap();
        let back = evolve_moments(&evolve_moments(&m0, t, &NAT), -t, &NAT);
        for m in Moment::ALL {
            prop_assert!((back.get(m) - m0.get(m)).abs() <= 1e-14 * m0.xx().max(m0.pp()));
        }
    }

    #[test]
    fn invariants_do_not_depend_on_time(p in params(), temp in 0.0f64..3.0, t in -1000.0f64..1000.0) {
        let a = invariants_at(&p, temp, 0.0, None);
        let b = invariants_at(&p, temp, t, None);
        prop_assert!(rel(a.det_g(), b.det_g()) < 1e-10);
        prop_assert!(rel(a.det_c(), b.det_c()) < 1e-10);
        prop_assert!(rel(a.det_m(), b.det_m()) < 1e-10);
    }

    #[test]
    fn invariants_do_not_depend_on_length_scale(p in params(), temp in 0.0f64..3.0, t in -100.0f64..100.0, l in 0.05f64..20.0) {
        let a = invariants_at(&p, temp, t, Some(l));
        let b = invariants_at(&p, temp, t, Some(10.0 * l));
        prop_assert!(rel(a.det_g(), b.det_g()) < 1e-12);
        prop_assert!(rel(a.det_c(), b.det_c()) < 1e-12);
        prop_assert!(rel(a.det_m(), b.det_m()) < 1e-12);
    }

    #[test]
    fn pure_at_zero_temperature(p in params(), t in -1000.0f64..1000.0) {
        let inv = invariants_at(&p, 0.0, t, None);
        prop_assert!((inv.det_m() - 1.0 / 16.0).abs() < 1e-12);
    }

    #[test]
    fn standard_form_matches_closed_form(p in params(), temp in prop_oneof![Just(0.0), 0.0f64..1e-6, 0.0f64..3.0], t in -100.0f64..100.0) {
        let sf = standard_form(&invariants_at(&p, temp, t, None)).unwrap();
        let cf = closed_forms(&p, temp, t, &NAT);
        prop_assert!(rel(sf.g(), cf.g) < 1e-10);
        prop_assert!(rel(sf.c(), cf.c) < 1e-10 || (sf.c() - cf.c).abs() < 1e-10 * cf.g);
        prop_assert!(rel(sf.c_prime(), cf.c_prime) < 1e-10 || (sf.c_prime() - cf.c_prime).abs() < 1e-10 * cf.g);
    }

    #[test]
    fn reconstruction(p in params(), temp in 0.0f64..3.0, t in -100.0f64..100.0) {
        let inv = invariants_at(&p, temp, t, None);
        let sf = standard_form(&inv).unwrap();
        let (g, c, cp) = (sf.g(), sf.c(), sf.c_prime());
        prop_assert!((g * g - inv.det_g()).abs() < 1e-12 * inv.det_g());
        prop_assert!((c * cp - inv.det_c()).abs() < 1e-12 * inv.det_g());
        prop_assert!(((g * g - c * c) * (g * g - cp * cp) - inv.det_m()).abs() < 1e-12 * inv.det_g().powi(2));
        prop_assert!(c >= cp.abs());
        prop_assert!(cp <= 0.0);
    }

    #[test]
    fn duan_value_reduces_to_threshold_form(p in params(), temp in 0.0f64..3.0, t in -100.0f64..100.0) {
        let sf = standard_form(&invariants_at(&p, temp, t, None)).unwrap();
        let d = duan_separable(&sf, DEFAULT_TOLERANCE);
        let (a11, a) = (p.a11(), p.a12().abs());
        let expected = 0.25 * (a11 - a + 4.0 * temp) / (a11 + a);
        prop_assert!((d.duan_value - expected).abs() < 1e-10);
    }

    #[test]
    fn decision_follows_threshold(p in params(), temp in 0.0f64..3.0, t in -100.0f64..100.0) {
        let t_star = separability_threshold(&p, &NAT);
        let a = analyze(&p, temp, t, &NAT, None, DEFAULT_TOLERANCE).unwrap();
        if (a.report.margin).abs() > 1e-9 {
            prop_assert_eq!(a.report.separable, temp >= t_star);
        }
    }

    #[test]
    fn duan_value_increases_with_temperature(p in params(), t in -10.0f64..10.0) {
        let values: Vec<f64> = (0..20)
            .map(|i| analyze(&p, 0.15 * i as f64, t, &NAT, None, DEFAULT_TOLERANCE).unwrap().report.duan_value)
            .collect();
        for w in values.windows(2) {
            prop_assert!(w[1] > w[0]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn quadrature_normalizes(p in params(), v1 in -2.0f64..2.0, v2 in -2.0f64..2.0) {
        let q = quadrature_moments(&p, VelocityPair::new(v1, v2), &NAT, &QuadratureSpec::default()).unwrap();
        prop_assert!((q.norm - 1.0).abs() < 1e-8);
    }

    #[test]
    fn monte_carlo_is_seeded(seed in any::<u64>(), batch in 1u64..50_000) {
        let p = validate_params(2.0, 1.0).unwrap();
        let base = McConfig::new(9_000, seed);
        let other = McConfig { batch_size: batch, ..base };
        prop_assert_eq!(
            mc_thermal_moments(&p, 0.5, 1.0, &NAT, &base).unwrap(),
            mc_thermal_moments(&p, 0.5, 1.0, &NAT, &other).unwrap()
        );
    }
}

#[test]
fn monte_carlo_errors_shrink_like_inverse_root_n() {
    let p = validate_params(2.0, 1.0).unwrap();
    let small = mc_thermal_moments(&p, 0.5, 2.0, &NAT, &McConfig::new(10_000, 21)).unwrap();
    let large = mc_thermal_moments(&p, 0.5, 2.0, &NAT, &McConfig::new(1_000_000, 21)).unwrap();
    for m in [Moment::Xx, Moment::Pp, Moment::XpSym] {
        let ratio = small.std_error(m) / large.std_error(m);
        assert!((ratio / 10.0 - 1.0).abs() < 0.2, "{m:?}: ratio {ratio}");
    }
}

#[test]
fn monte_carlo_concurrent_runs_agree() {
    let p = validate_params(1.1, 0.6).unwrap();
    let cfg = McConfig::new(40_000, 99);
    let reference = mc_thermal_moments(&p, 0.7, 3.0, &NAT, &cfg).unwrap();
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..4)
            .map(|_| s.spawn(|| mc_thermal_moments(&p, 0.7, 3.0, &NAT, &cfg).unwrap()))
            .collect();
        for h in handles {
            assert_eq!(h.join().unwrap(), reference);
        }
    });
}

#[test]
fn quadrature_converges_on_refinement() {
    let p = validate_params(3.0, 2.0).unwrap();
    let v = VelocityPair::new(0.4, 0.4);
    let exact = initial_moments(&p, v, &NAT).unwrap();
    let mut prev = f64::INFINITY;
    for points in [64, 128, 256] {
        let q = quadrature_moments(
            &p,
            v,
            &NAT,
            &QuadratureSpec {
                half_width: 9.0,
                points_per_axis: points,
            },
        )
        .unwrap();
        let err = Moment::ALL
            .iter()
            .map(|&m| (q.get(m) - exact.get(m)).abs() / exact.xx().max(exact.pp()))
            .fold(0.0, f64::max);
        assert!(
            err <= prev / 10.0 || err < 1e-8,
            "{points}: {err} after {prev}"
        );
        prev = err;
    }
}
