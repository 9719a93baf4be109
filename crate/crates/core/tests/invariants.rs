use fhle_core::estimates::{rho_eval, rho_r_eval, CutoffSpec, PhiModel};
use fhle_core::exponents::{classify, margin_via_lambda, stability_margin, Verdict};
use fhle_core::extension::{Analytic, HalfSpaceFunction, PoissonExtension};
use fhle_core::kernels::{kernel_K, KernelSpec};
use fhle_core::monotonicity::{dimension_conditions, rescaled, Bubble, ClosedForm};
use fhle_core::specfun::{kappa_s, lambda_alpha, sobolev_exponent, ProblemParams};
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Admissible supercritical tuple with `0 < s < 1`.
fn supercritical() -> impl Strategy<Value = ProblemParams<f64>> {
    (2u32..12, 0.05f64..0.95, 0.0f64..3.0, 0.01f64..20.0).prop_filter_map("n > 2s", |(n, s, a, excess)| {
        let ps = sobolev_exponent(n, s, a).ok()?.value()?;
        ProblemParams::new(n, s, a, ps * (1.0 + excess)).ok()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn kappa_reflection(s in 0.01f64..0.99) {
        let prod = kappa_s(s).unwrap() * kappa_s(1.0 - s).unwrap();
        prop_assert!((prod - 1.0).abs() < 1e-12, "{prod}");
    }

    #[test]
    fn kappa_single_precision_tracks_double(s in 0.05f64..0.95) {
        let d = kappa_s(s).unwrap();
        let f = kappa_s(s as f32).unwrap() as f64;
        prop_assert!(rel(f, d) < 1e-4, "{f} vs {d}");
    }

    #[test]
    fn multiplier_is_even(params in supercritical(), t in -0.95f64..0.95) {
        let alpha = t * (params.dim() - 2.0 * params.s) / 2.0;
        let l = lambda_alpha(&params, alpha).unwrap();
        let r = lambda_alpha(&params, -alpha).unwrap();
        prop_assert!(rel(l, r) < 1e-12, "{l} vs {r}");
    }

    #[test]
    fn margin_routes_agree(params in supercritical()) {
        let m = stability_margin(&params).unwrap();
        let v = margin_via_lambda(&params).unwrap();
        prop_assert!((m - v).abs() <= 1e-10 * m.abs().max(v.abs()).max(1e-12), "{m} vs {v}");
    }

    #[test]
    fn verdict_follows_margin_sign(params in supercritical()) {
        let out = classify(&params);
        let m = out.margin.unwrap();
        let expected = if m > 0.0 { Verdict::SupercriticalTheoremApplies } else { Verdict::SupercriticalTheoremSilent };
        prop_assert_eq!(out.verdict, expected);
    }

    #[test]
    fn second_dimension_condition_implies_first(n in 1u32..40, s in 1.01f64..1.99, a in 0.0f64..5.0, p in 1.01f64..50.0) {
        let d = dimension_conditions(&ProblemParams::new(n, s, a, p).unwrap());
        prop_assert!(d.implication_consistent);
        prop_assert!(!d.second_holds || d.first_holds);
    }

    #[test]
    fn kernel_symmetric_under_reflection(n in 2u32..8, s in 0.1f64..0.9, t in 0.05f64..0.95, c in -1.0f64..0.9) {
        let width = n as f64 - 2.0 * s;
        let alpha = width * t;
        let k = kernel_K(&KernelSpec::new(n, s, alpha).unwrap(), c).unwrap();
        let k2 = kernel_K(&KernelSpec::new(n, s, width - alpha).unwrap(), c).unwrap();
        prop_assert!(rel(k, k2) < 1e-8, "{k} vs {k2}");
    }

    #[test]
    fn rescaling_composes(l in 0.2f64..5.0, m in 0.2f64..5.0, r in 0.0f64..3.0, y in 0.01f64..3.0) {
        let bubble = Bubble::<f64>::new(3).unwrap();
        let params = bubble.params();
        let once = rescaled(&bubble, &params, l * m).unwrap();
        let inner = rescaled(&bubble, &params, l).unwrap();
        let twice = rescaled(&inner, &params, m).unwrap();
        let (a, b) = (once.value(r, y).unwrap(), twice.value(r, y).unwrap());
        prop_assert!(rel(a, b) < 1e-12, "{a} vs {b}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn extension_commutes_with_dilation(s in 0.2f64..0.8, scale in 0.5f64..3.0, r in 0.0f64..2.0, y in 0.1f64..2.0) {
        let u = Analytic(|x: f64| (-x * x).exp());
        let v = Analytic(move |x: f64| (-(x / scale) * (x / scale)).exp());
        let eu = PoissonExtension::new(&u, 1, s).unwrap();
        let ev = PoissonExtension::new(&v, 1, s).unwrap();
        let a = ev.value(r * scale, y * scale).unwrap();
        let b = eu.value(r, y).unwrap();
        prop_assert!((a - b).abs() < 1e-8, "{a} vs {b}");
    }

    #[test]
    fn rho_obeys_dilation(r_scale in 0.5f64..20.0, x in 0.0f64..10.0, s in 0.15f64..0.85) {
        let spec = CutoffSpec::new(1.0, r_scale, PhiModel::One).unwrap();
        let lhs = rho_r_eval(&spec, x, 1, s).unwrap();
        let rhs = r_scale.powf(-2.0 * s) * rho_eval(&spec, x / r_scale, 1, s).unwrap();
        prop_assert!(rel(lhs, rhs) < 1e-6, "{lhs} vs {rhs}");
    }
}

#[test]
fn zero_field_energy_vanishes() {
    let z = ClosedForm(|_r: f64, _y: f64| 0.0);
    let params = ProblemParams::new(3, 0.4, 0.5, 5.0).unwrap();
    let e = fhle_core::monotonicity::energy_first_order(&z, &params, 2.0).unwrap();
    assert_eq!(e, 0.0);
}
