#![allow(dead_code)]

use degenflow::domain::{build_grid, Grid, GridSpec};
use degenflow::model::{BoundaryDatum, Condition, InitialDatum, ModelFamily, ProblemSpec, ScalarFn};

pub fn unit_grid(n1: usize, n2: usize) -> Grid<f64> {
    build_grid(GridSpec::unit_square(n1, n2)).unwrap()
}

/// Spec assembled field by field, bypassing the family constructors.
pub fn custom_spec(f1: ScalarFn<f64>, f2: ScalarFn<f64>, b22: ScalarFn<f64>, b: ScalarFn<f64>, bounds: [f64; 2]) -> ProblemSpec<f64> {
    let mid = 0.5 * (bounds[0] + bounds[1]);
    ProblemSpec {
        flux_f1: f1,
        flux_f2: f2,
        diff_b22: b22,
        b,
        lambda_cap: 1.0,
        u_min: bounds[0],
        u_max: bounds[1],
        a0: BoundaryDatum::Constant(mid),
        u0: InitialDatum::Constant(mid),
        condition_flag: Condition::C,
        offdiagonal: false,
    }
}

pub fn pinned_family(flux_scale: f64) -> ModelFamily<f64> {
    ModelFamily::Pinned { p: 1, q: 1, flux_scale, diff_coeff: 0.05, diff_exp: 2.0 }
}

/// Pinned flux u(1−u), diffusion 0.05u², data in [0,1].
pub fn pinned(u0: InitialDatum<f64>, a0: BoundaryDatum<f64>) -> ProblemSpec<f64> {
    ProblemSpec::from_family(&pinned_family(1.0), 0.0, [0.0, 1.0], 1.0, a0, u0).unwrap()
}

/// The reference scenario: u₀ = 0.5 + 0.4·bump, a₀ ≡ 0.5.
pub fn bump_spec() -> ProblemSpec<f64> {
    pinned(
        InitialDatum::Bump { base: 0.5, amp: 0.4, center: [0.5, 0.5], width: 0.3 },
        BoundaryDatum::Constant(0.5),
    )
}

/// u₀ ≡ a₀ ≡ c with f₁ ≡ 0, so the zero-flux walls see no normal flux and c is steady.
pub fn constant_spec(c: f64) -> ProblemSpec<f64> {
    ProblemSpec::from_family(&pinned_family(0.0), 0.5, [0.0, 1.0], 1.0, BoundaryDatum::Constant(c), InitialDatum::Constant(c)).unwrap()
}

pub fn tadmor_tao(ell: u32, n: u32, bounds: [f64; 2]) -> ProblemSpec<f64> {
    let mid = 0.5 * (bounds[0] + bounds[1]);
    ProblemSpec::from_family(
        &ModelFamily::TadmorTao { ell, n },
        0.0,
        bounds,
        1.0,
        BoundaryDatum::Constant(mid),
        InitialDatum::Constant(mid),
    )
    .unwrap()
}
