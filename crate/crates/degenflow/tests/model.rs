mod common;

use approx::assert_abs_diff_eq;
use common::{custom_spec, tadmor_tao};
use degenflow::model::*;
use proptest::prelude::*;

fn poly(c: &[f64]) -> ScalarFn<f64> {
    ScalarFn::Poly(c.to_vec())
}

#[test]
fn tadmor_tao_is_elliptic_with_equality() {
    let spec = tadmor_tao(1, 2, [-1.0, 1.0]);
    let r = validate_ellipticity(&spec, 1001);
    assert!(r.pass);
    assert_abs_diff_eq!(r.lower_margin, 0.0, epsilon = 1e-15);
    assert_abs_diff_eq!(r.upper_margin, 0.0, epsilon = 1e-15);
}

#[test]
fn purely_hyperbolic_spec_is_elliptic() {
    let spec = custom_spec(poly(&[0.0, 0.0, 0.5]), ScalarFn::zero(), ScalarFn::zero(), ScalarFn::zero(), [0.0, 1.0]);
    assert!(validate_ellipticity(&spec, 101).pass);
}

#[test]
fn sign_changing_diffusivity_fails_ellipticity() {
    // b22'(u) = u on [-1, 1].
    let spec = custom_spec(ScalarFn::zero(), ScalarFn::zero(), poly(&[0.0, 0.0, 0.5]), ScalarFn::zero(), [-1.0, 1.0]);
    let r = validate_ellipticity(&spec, 101);
    assert!(!r.pass);
    assert!(r.worst_u < 0.0);
    assert_abs_diff_eq!(r.lower_margin, -1.0, epsilon = 1e-15);
}

#[test]
fn flux_pinning() {
    let pinned = common::constant_spec(0.5);
    let r = validate_flux_pinning(&pinned, 1e-12);
    assert!(r.pass);
    assert_eq!((r.residual_min, r.residual_max), (0.0, 0.0));

    let tt = tadmor_tao(1, 2, [0.0, 1.0]);
    let r = validate_flux_pinning(&tt, 1e-12);
    assert!(!r.pass);
    assert_eq!(r.residual_max, 0.5);

    let zero = custom_spec(ScalarFn::zero(), ScalarFn::zero(), ScalarFn::zero(), ScalarFn::zero(), [0.0, 1.0]);
    assert!(validate_flux_pinning(&zero, 1e-12).pass);
}

#[test]
fn burgers_degenerate_set_is_a_single_point() {
    let spec = custom_spec(poly(&[0.0, 0.0, 0.5]), ScalarFn::zero(), ScalarFn::zero(), ScalarFn::zero(), [0.0, 1.0]);
    let n_u = 200_000;
    let mut prev = 1.0;
    for thr in [1e-2, 1e-4, 1e-6, 1e-8] {
        // (v − 0.5)² < thr on an interval of length 2√thr.
        let frac = degenerate_fraction(&spec, [-0.5, 1.0, 0.0], n_u, thr);
        assert!((frac - 2.0 * thr.sqrt()).abs() <= 2.0 / n_u as f64, "thr {thr}: {frac}");
        assert!(frac < prev);
        prev = frac;
    }
}

#[test]
fn linear_flux_is_fully_degenerate_along_its_characteristic() {
    let c = 0.7;
    let spec = custom_spec(poly(&[0.0, c]), ScalarFn::zero(), ScalarFn::zero(), ScalarFn::zero(), [0.0, 1.0]);
    assert_eq!(degenerate_fraction(&spec, [-c, 1.0, 0.0], 10_000, 1e-10), 1.0);
}

#[test]
fn tadmor_tao_scan_stays_below_five_percent() {
    let spec = tadmor_tao(1, 2, [0.0, 1.0]);
    let r = nondegeneracy_scan(&spec, &DirectionSet::Fibonacci(128), 100_000, 1e-4);
    assert!(r.max_fraction <= 0.05, "{}", r.max_fraction);
    assert_eq!(r.fractions.len(), 128);
}

#[test]
fn direction_sets_are_unit_and_reproducible() {
    for set in [DirectionSet::Fibonacci(50), DirectionSet::Random { n: 50, seed: 3 }] {
        let d: Vec<[f64; 3]> = set.directions();
        assert_eq!(d.len(), 50);
        for v in &d {
            assert_abs_diff_eq!(v[0] * v[0] + v[1] * v[1] + v[2] * v[2], 1.0, epsilon = 1e-12);
        }
        assert_eq!(d, set.directions::<f64>());
    }
    let a: Vec<[f64; 3]> = DirectionSet::Random { n: 5, seed: 1 }.directions();
    let b: Vec<[f64; 3]> = DirectionSet::Random { n: 5, seed: 2 }.directions();
    assert_ne!(a, b);
}

#[test]
fn structure_conditions() {
    let mut spec = common::bump_spec();
    assert_eq!(check_structure(&spec).via, Some(Condition::C));
    spec.offdiagonal = true;
    assert_eq!(check_structure(&spec).via, Some(Condition::CPrime));
    spec.a0 = BoundaryDatum::Walls { lower: 0.3, upper: 0.6 };
    let r = check_structure(&spec);
    assert!(!r.pass);
    assert_eq!(r.via, None);
}

#[test]
fn square_root_diffusion() {
    let sq = custom_spec(ScalarFn::zero(), ScalarFn::zero(), ScalarFn::AbsPow { coef: 1.0, exp: 2.0 }, ScalarFn::zero(), [-1.0, 1.0]);
    assert_abs_diff_eq!(sqrt_diffusion(&sq, 0.5).unwrap(), 0.5, epsilon = 1e-15);
    assert_eq!(sqrt_diffusion(&sq, 0.0).unwrap(), 0.0);
    let four = custom_spec(ScalarFn::zero(), ScalarFn::zero(), poly(&[0.0, 4.0]), ScalarFn::zero(), [0.0, 1.0]);
    assert_eq!(sqrt_diffusion(&four, 0.3).unwrap(), 2.0);
    let neg = custom_spec(ScalarFn::zero(), ScalarFn::zero(), poly(&[0.0, -1.0]), ScalarFn::zero(), [0.0, 1.0]);
    assert!(matches!(sqrt_diffusion(&neg, 0.3), Err(ModelError::NegativeDiffusion { .. })));
}

#[test]
fn beta_primitive_of_constant_diffusivity() {
    let four = custom_spec(ScalarFn::zero(), ScalarFn::zero(), poly(&[0.0, 4.0]), ScalarFn::zero(), [0.0, 1.0]);
    assert_abs_diff_eq!(beta_primitive(&four, 0.75, 8), 1.5, epsilon = 1e-14);
    // sqrt(|s|²) = |s|, so β(u) = u|u|/2.
    let sq = custom_spec(ScalarFn::zero(), ScalarFn::zero(), ScalarFn::AbsPow { coef: 1.0, exp: 2.0 }, ScalarFn::zero(), [-1.0, 1.0]);
    assert_abs_diff_eq!(beta_primitive(&sq, 0.8, 16), 0.32, epsilon = 1e-14);
    assert_abs_diff_eq!(beta_primitive(&sq, -0.8, 16), -0.32, epsilon = 1e-14);
}

#[test]
fn family_validation() {
    assert_eq!(
        ModelFamily::<f64>::TadmorTao { ell: 2, n: 1 }.validate(),
        Err(ModelError::TadmorTaoExponents { ell: 2, n: 1 })
    );
    assert!(ModelFamily::<f64>::TadmorTao { ell: 2, n: 4 }.validate().is_ok());
    assert!(ModelFamily::Pinned { p: 0, q: 1, flux_scale: 1.0, diff_coeff: 0.1, diff_exp: 2.0 }.validate().is_err());
    assert!(ModelFamily::Pinned { p: 1, q: 1, flux_scale: 1.0, diff_coeff: -0.1, diff_exp: 2.0 }.validate().is_err());
}

#[test]
fn data_outside_the_interval_is_rejected() {
    let r = ProblemSpec::from_family(
        &common::pinned_family(1.0),
        0.0,
        [0.0, 1.0],
        1.0,
        BoundaryDatum::Constant(1.2),
        InitialDatum::Constant(0.5),
    );
    assert!(matches!(r, Err(ModelError::DataOutOfRange { what: "a0", .. })));
    let r = ProblemSpec::from_family(
        &common::pinned_family(1.0),
        0.0,
        [0.0, 1.0],
        0.5,
        BoundaryDatum::Constant(0.5),
        InitialDatum::Constant(0.5),
    );
    assert!(matches!(r, Err(ModelError::LambdaBelowOne(_))));
}

#[test]
fn family_functions() {
    let (f1, b22, b) = ModelFamily::<f64>::TadmorTao { ell: 2, n: 4 }.functions();
    assert_abs_diff_eq!(f1.eval(2.0), 8.0 / 3.0, epsilon = 1e-14);
    assert_abs_diff_eq!(b22.eval(-2.0), -32.0 / 5.0, epsilon = 1e-13);
    assert_abs_diff_eq!(b.deriv(-2.0), 4.0, epsilon = 1e-14);
    let (f1, b22, _) = common::pinned_family(2.0).functions();
    assert_abs_diff_eq!(f1.eval(0.25), 0.375, epsilon = 1e-15);
    assert_abs_diff_eq!(f1.deriv(0.25), 1.0, epsilon = 1e-15);
    assert_abs_diff_eq!(b22.deriv(0.5), 0.0125, epsilon = 1e-15);
}

#[test]
fn bump_vanishes_to_second_order() {
    assert_eq!(poly_bump(0.0), 1.0);
    assert_eq!(poly_bump(1.0), 0.0);
    assert_eq!(poly_bump_deriv(1.0), 0.0);
    let h: f64 = 1e-4;
    assert!(poly_bump(1.0 - h) < 1e-11);
    assert!(poly_bump_deriv(1.0 - h).abs() < 1e-6);
}

fn any_fn() -> impl Strategy<Value = ScalarFn<f64>> {
    prop_oneof![
        prop::collection::vec(-2.0f64..2.0, 1..5).prop_map(ScalarFn::Poly),
        (0.1f64..2.0, 0.5f64..4.0).prop_map(|(coef, exp)| ScalarFn::AbsPow { coef, exp }),
        (0.1f64..2.0, 1u32..4, 1u32..4).prop_map(|(coef, p, q)| ScalarFn::Pinned { coef, p, q }),
    ]
}

proptest! {
    #[test]
    fn derivative_matches_central_difference(f in any_fn(), u in -0.9f64..0.9) {
        let h = 1e-6;
        let fd = (f.eval(u + h) - f.eval(u - h)) / (2.0 * h);
        prop_assert!((fd - f.deriv(u)).abs() < 1e-6 * (1.0 + f.deriv(u).abs()), "fd {} vs {}", fd, f.deriv(u));
    }

    #[test]
    fn elliptic_families_have_monotone_diffusion(
        ell in 1u32..3, extra in 0u32..3, c in 0.0f64..1.0, m in 0.0f64..3.0, lo in -1.0f64..0.0, hi in 0.1f64..1.0
    ) {
        let fams = [
            ModelFamily::TadmorTao { ell, n: 2 * ell + extra },
            ModelFamily::Pinned { p: 1, q: 1, flux_scale: 1.0, diff_coeff: c, diff_exp: m },
        ];
        for fam in fams {
            let (f1, b22, b) = fam.functions();
            let spec = common::custom_spec(f1, ScalarFn::zero(), b22, b, [lo, hi]);
            if validate_ellipticity(&spec, 257).pass {
                let mut prev = spec.diff_b22.eval(lo);
                for k in 1..=200 {
                    let u = lo + (hi - lo) * k as f64 / 200.0;
                    let v = spec.diff_b22.eval(u);
                    prop_assert!(v >= prev - 1e-15);
                    prev = v;
                }
            }
        }
    }

    #[test]
    fn diagonal_reduction_bounds_the_dissipation(p0 in 0.1f64..0.9, p1 in -0.5f64..0.5, p2 in -0.5f64..0.5) {
        // b22' = 1.5u², b' = |u|, Λ = 2: b'² ≤ b22' ≤ Λb'².
        let mut spec = common::custom_spec(
            ScalarFn::zero(), ScalarFn::zero(),
            ScalarFn::AbsPow { coef: 1.5, exp: 2.0 },
            ScalarFn::AbsPow { coef: 1.0, exp: 1.0 },
            [-2.0, 2.0],
        );
        spec.lambda_cap = 2.0;
        prop_assert!(validate_ellipticity(&spec, 257).pass);
        let v = |x: f64| p0 + p1 * x + p2 * x * x;
        let h = 1e-3;
        for k in 1..20 {
            let x = k as f64 / 20.0;
            let db = (spec.b.eval(v(x + h)) - spec.b.eval(v(x - h))) / (2.0 * h);
            let dbeta = (beta_primitive(&spec, v(x + h), 64) - beta_primitive(&spec, v(x - h), 64)) / (2.0 * h);
            let slack = 1e-8 * (1.0 + db * db);
            prop_assert!(db * db <= dbeta * dbeta + slack);
            prop_assert!(dbeta * dbeta <= spec.lambda_cap * db * db + slack);
        }
    }
}
