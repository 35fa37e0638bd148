//! Problem instances as closed-form families, plus structural validators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("tadmor_tao family requires n >= 2*ell (got ell={ell}, n={n})")]
    TadmorTaoExponents { ell: u32, n: u32 },
    #[error("pinned family requires p >= 1 and q >= 1 (got p={p}, q={q})")]
    PinnedExponents { p: u32, q: u32 },
    #[error("value interval [{u_min}, {u_max}] is empty")]
    EmptyInterval { u_min: f64, u_max: f64 },
    #[error("ellipticity constant must be >= 1 (got {0})")]
    LambdaBelowOne(f64),
    #[error("{what} takes value {value} outside [{u_min}, {u_max}]")]
    DataOutOfRange { what: &'static str, value: f64, u_min: f64, u_max: f64 },
    #[error("ellipticity violation: b22'({u}) = {value} < 0")]
    NegativeDiffusion { u: f64, value: f64 },
    #[error("diffusion coefficient must be non-negative (got {0})")]
    NegativeCoefficient(f64),
}

/// Closed-form scalar function of u with exact first derivative.
#[derive(Clone, Debug, PartialEq)]
pub enum ScalarFn<T> {
    /// Σ c_k u^k.
    Poly(Vec<T>),
    /// coef·|u|^exp·u/(exp+1); derivative coef·|u|^exp.
    AbsPow { coef: T, exp: T },
    /// coef·u^p(1−u)^q.
    Pinned { coef: T, p: u32, q: u32 },
}

impl<T: Scalar> ScalarFn<T> {
    pub fn zero() -> Self {
        ScalarFn::Poly(Vec::new())
    }

    pub fn linear(c: T) -> Self {
        ScalarFn::Poly(vec![T::zero(), c])
    }

    pub fn eval(&self, u: T) -> T {
        match self {
            ScalarFn::Poly(c) => c.iter().rev().fold(T::zero(), |acc, &ck| acc * u + ck),
            ScalarFn::AbsPow { coef, exp } => *coef * u.abs().powf(*exp) * u / (*exp + T::one()),
            ScalarFn::Pinned { coef, p, q } => *coef * u.powi(*p as i32) * (T::one() - u).powi(*q as i32),
        }
    }

    pub fn deriv(&self, u: T) -> T {
        match self {
            ScalarFn::Poly(c) => c
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(T::zero(), |acc, (k, &ck)| acc * u + T::from_count(k) * ck),
            ScalarFn::AbsPow { coef, exp } => *coef * u.abs().powf(*exp),
            ScalarFn::Pinned { coef, p, q } => {
                let (p, q) = (*p as i32, *q as i32);
                let v = T::one() - u;
                *coef
                    * (T::from_count(p as usize) * u.powi(p - 1) * v.powi(q)
                        - T::from_count(q as usize) * u.powi(p) * v.powi(q - 1))
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            ScalarFn::Poly(c) => c.iter().all(|&v| v == T::zero()),
            ScalarFn::AbsPow { coef, .. } | ScalarFn::Pinned { coef, .. } => *coef == T::zero(),
        }
    }

    /// Sampled sup of |g(u)| over [lo, hi] for g = derivative.
    pub fn max_abs_deriv(&self, lo: T, hi: T) -> T {
        sampled_max(lo, hi, |u| self.deriv(u).abs())
    }
}

const SUP_SAMPLES: usize = 4096;

fn sampled_max<T: Scalar>(lo: T, hi: T, g: impl Fn(T) -> T) -> T {
    let mut m = g(lo).max(g(hi));
    let h = (hi - lo) / T::from_count(SUP_SAMPLES);
    for k in 1..SUP_SAMPLES {
        m = m.max(g(lo + T::from_count(k) * h));
    }
    m
}

/// Boundary datum on Γ'', extended constant along x''-normals.
#[derive(Clone, Debug, PartialEq)]
pub enum BoundaryDatum<T> {
    Constant(T),
    /// base + amp·4s(1−s) with s the normalized x' coordinate.
    Arch { base: T, amp: T },
    /// Different constants on the two components of Γ'' (x'' = lower / upper wall).
    Walls { lower: T, upper: T },
}

impl<T: Scalar> BoundaryDatum<T> {
    /// Value on the wall `upper` (false: x'' minimum) at normalized x' position `s ∈ [0,1]`.
    pub fn value(&self, s: T, upper: bool) -> T {
        match self {
            BoundaryDatum::Constant(c) => *c,
            BoundaryDatum::Arch { base, amp } => *base + *amp * T::lit(4.0) * s * (T::one() - s),
            BoundaryDatum::Walls { lower, upper: up } => {
                if upper {
                    *up
                } else {
                    *lower
                }
            }
        }
    }

    /// d a₀/d s, the normalized x' derivative.
    pub fn slope(&self, s: T) -> T {
        match self {
            BoundaryDatum::Arch { amp, .. } => *amp * T::lit(4.0) * (T::one() - s - s),
            _ => T::zero(),
        }
    }

    pub fn independent_of_x2(&self) -> bool {
        match self {
            BoundaryDatum::Walls { lower, upper } => lower == upper,
            _ => true,
        }
    }

    fn extremes(&self) -> [T; 2] {
        match self {
            BoundaryDatum::Constant(c) => [*c, *c],
            BoundaryDatum::Arch { base, amp } => [*base, *base + *amp],
            BoundaryDatum::Walls { lower, upper } => [*lower, *upper],
        }
    }
}

/// Polynomial bump (1−r²)³ on |r| < 1, vanishing to second order at its edge.
pub fn poly_bump<T: Scalar>(r: T) -> T {
    if r.abs() >= T::one() {
        T::zero()
    } else {
        let w = T::one() - r * r;
        w * w * w
    }
}

/// d/dr of [`poly_bump`].
pub fn poly_bump_deriv<T: Scalar>(r: T) -> T {
    if r.abs() >= T::one() {
        T::zero()
    } else {
        let w = T::one() - r * r;
        -T::lit(6.0) * r * w * w
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitialDatum<T> {
    Constant(T),
    /// base + amp·bump centered at `center` with radius `width` in both axes.
    Bump { base: T, amp: T, center: [T; 2], width: T },
    /// base + amp·bump in x'' only.
    X2Bump { base: T, amp: T, center: T, width: T },
}

impl<T: Scalar> InitialDatum<T> {
    pub fn value(&self, x1: T, x2: T) -> T {
        match self {
            InitialDatum::Constant(c) => *c,
            InitialDatum::Bump { base, amp, center, width } => {
                *base + *amp * poly_bump((x1 - center[0]) / *width) * poly_bump((x2 - center[1]) / *width)
            }
            InitialDatum::X2Bump { base, amp, center, width } => *base + *amp * poly_bump((x2 - *center) / *width),
        }
    }

    fn extremes(&self) -> [T; 2] {
        match self {
            InitialDatum::Constant(c) => [*c, *c],
            InitialDatum::Bump { base, amp, .. } | InitialDatum::X2Bump { base, amp, .. } => {
                [base.min(*base + *amp), base.max(*base + *amp)]
            }
        }
    }

    pub fn shifted(&self, by: T) -> Self {
        match self.clone() {
            InitialDatum::Constant(c) => InitialDatum::Constant(c + by),
            InitialDatum::Bump { base, amp, center, width } => InitialDatum::Bump { base: base + by, amp, center, width },
            InitialDatum::X2Bump { base, amp, center, width } => {
                InitialDatum::X2Bump { base: base + by, amp, center, width }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Condition {
    /// Diagonal diffusion matrix.
    C,
    /// Boundary datum independent of x''.
    CPrime,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ModelFamily<T> {
    /// f1 = u^{ℓ+1}/(ℓ+1), b22 = |u|ⁿu/(n+1).
    TadmorTao { ell: u32, n: u32 },
    /// f1 = flux_scale·u^p(1−u)^q, b22 = diff_coeff·|u|^m u/(m+1).
    Pinned { p: u32, q: u32, flux_scale: T, diff_coeff: T, diff_exp: T },
}

impl<T: Scalar> ModelFamily<T> {
    pub fn validate(&self) -> Result<(), ModelError> {
        match self {
            ModelFamily::TadmorTao { ell, n } if *n < 2 * *ell => Err(ModelError::TadmorTaoExponents { ell: *ell, n: *n }),
            ModelFamily::Pinned { p, q, .. } if *p < 1 || *q < 1 => Err(ModelError::PinnedExponents { p: *p, q: *q }),
            ModelFamily::Pinned { diff_coeff, .. } if *diff_coeff < T::zero() => {
                Err(ModelError::NegativeCoefficient(diff_coeff.as_f64()))
            }
            _ => Ok(()),
        }
    }

    /// (f1, b22, b) for the family.
    pub fn functions(&self) -> (ScalarFn<T>, ScalarFn<T>, ScalarFn<T>) {
        match self {
            ModelFamily::TadmorTao { ell, n } => {
                let mut c = vec![T::zero(); *ell as usize + 2];
                c[*ell as usize + 1] = T::one() / T::from_count(*ell as usize + 1);
                let n = T::from_count(*n as usize);
                (
                    ScalarFn::Poly(c),
                    ScalarFn::AbsPow { coef: T::one(), exp: n },
                    ScalarFn::AbsPow { coef: T::one(), exp: n * T::lit(0.5) },
                )
            }
            ModelFamily::Pinned { p, q, flux_scale, diff_coeff, diff_exp } => (
                ScalarFn::Pinned { coef: *flux_scale, p: *p, q: *q },
                ScalarFn::AbsPow { coef: *diff_coeff, exp: *diff_exp },
                ScalarFn::AbsPow { coef: diff_coeff.sqrt(), exp: *diff_exp * T::lit(0.5) },
            ),
        }
    }
}

/// Full problem instance: flux, diffusion, bounds and data.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec<T> {
    pub flux_f1: ScalarFn<T>,
    pub flux_f2: ScalarFn<T>,
    pub diff_b22: ScalarFn<T>,
    /// b with b'² ≤ b22' ≤ Λ b'².
    pub b: ScalarFn<T>,
    pub lambda_cap: T,
    pub u_min: T,
    pub u_max: T,
    pub a0: BoundaryDatum<T>,
    pub u0: InitialDatum<T>,
    pub condition_flag: Condition,
    /// Declares a coupled (off-diagonal) diffusion matrix; only the structure check reads it.
    pub offdiagonal: bool,
}

impl<T: Scalar> ProblemSpec<T> {
    pub fn from_family(
        family: &ModelFamily<T>,
        f2_coeff: T,
        bounds: [T; 2],
        lambda_cap: T,
        a0: BoundaryDatum<T>,
        u0: InitialDatum<T>,
    ) -> Result<Self, ModelError> {
        family.validate()?;
        let (f1, b22, b) = family.functions();
        let spec = Self {
            flux_f1: f1,
            flux_f2: ScalarFn::linear(f2_coeff),
            diff_b22: b22,
            b,
            lambda_cap,
            u_min: bounds[0],
            u_max: bounds[1],
            a0,
            u0,
            condition_flag: Condition::C,
            offdiagonal: false,
        };
        spec.validate_data()?;
        Ok(spec)
    }

    pub fn validate_data(&self) -> Result<(), ModelError> {
        if !(self.u_min < self.u_max) {
            return Err(ModelError::EmptyInterval { u_min: self.u_min.as_f64(), u_max: self.u_max.as_f64() });
        }
        if !(self.lambda_cap >= T::one()) {
            return Err(ModelError::LambdaBelowOne(self.lambda_cap.as_f64()));
        }
        let check = |what: &'static str, v: T| {
            if v < self.u_min || v > self.u_max {
                Err(ModelError::DataOutOfRange {
                    what,
                    value: v.as_f64(),
                    u_min: self.u_min.as_f64(),
                    u_max: self.u_max.as_f64(),
                })
            } else {
                Ok(())
            }
        };
        for v in self.a0.extremes() {
            check("a0", v)?;
        }
        for v in self.u0.extremes() {
            check("u0", v)?;
        }
        Ok(())
    }

    pub fn range(&self) -> T {
        self.u_max - self.u_min
    }

    /// sup |f1'| and sup |f2'| over the value interval.
    pub fn wave_speeds(&self) -> [T; 2] {
        [
            self.flux_f1.max_abs_deriv(self.u_min, self.u_max),
            self.flux_f2.max_abs_deriv(self.u_min, self.u_max),
        ]
    }

    /// sup b22' over the value interval.
    pub fn max_diffusivity(&self) -> T {
        sampled_max(self.u_min, self.u_max, |u| self.diff_b22.deriv(u))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EllipticityReport<T> {
    pub pass: bool,
    /// min over samples of b22' − b'².
    pub lower_margin: T,
    /// min over samples of Λb'² − b22'.
    pub upper_margin: T,
    pub worst_u: T,
}

/// Checks b'² ≤ b22' ≤ Λ b'² on a uniform sample of the value interval.
pub fn validate_ellipticity<T: Scalar>(spec: &ProblemSpec<T>, n_samples: usize) -> EllipticityReport<T> {
    let n = n_samples.max(2);
    let tol = T::lit(1e-12) * (T::one() + spec.max_diffusivity().abs());
    let mut lower = T::infinity();
    let mut upper = T::infinity();
    let mut worst_u = spec.u_min;
    let mut worst = T::infinity();
    for k in 0..n {
        let u = spec.u_min + spec.range() * T::from_count(k) / T::from_count(n - 1);
        let bp = spec.b.deriv(u);
        let b22p = spec.diff_b22.deriv(u);
        let lo = b22p - bp * bp;
        let hi = spec.lambda_cap * bp * bp - b22p;
        lower = lower.min(lo);
        upper = upper.min(hi);
        if lo.min(hi) < worst {
            worst = lo.min(hi);
            worst_u = u;
        }
    }
    EllipticityReport { pass: lower >= -tol && upper >= -tol, lower_margin: lower, upper_margin: upper, worst_u }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PinningReport<T> {
    pub pass: bool,
    pub residual_min: T,
    pub residual_max: T,
}

/// Checks f1(u_min) = f1(u_max) = 0.
pub fn validate_flux_pinning<T: Scalar>(spec: &ProblemSpec<T>, tol: T) -> PinningReport<T> {
    let residual_min = spec.flux_f1.eval(spec.u_min).abs();
    let residual_max = spec.flux_f1.eval(spec.u_max).abs();
    PinningReport { pass: residual_min <= tol && residual_max <= tol, residual_min, residual_max }
}

/// Directions (τ, κ1, κ2) on the unit sphere.
#[derive(Clone, Debug)]
pub enum DirectionSet {
    /// Deterministic Fibonacci lattice.
    Fibonacci(usize),
    /// Uniform random directions from a seeded generator.
    Random { n: usize, seed: u64 },
}

impl DirectionSet {
    pub fn directions<T: Scalar>(&self) -> Vec<[T; 3]> {
        match self {
            DirectionSet::Fibonacci(n) => {
                let n = (*n).max(1);
                let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
                (0..n)
                    .map(|k| {
                        let z = 1.0 - 2.0 * (k as f64 + 0.5) / n as f64;
                        let r = (1.0 - z * z).sqrt();
                        let phi = golden * k as f64;
                        [T::lit(z), T::lit(r * phi.cos()), T::lit(r * phi.sin())]
                    })
                    .collect()
            }
            DirectionSet::Random { n, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                (0..*n)
                    .map(|_| loop {
                        let v: [f64; 3] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
                        let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                        if r > 1e-3 && r <= 1.0 {
                            break [T::lit(v[0] / r), T::lit(v[1] / r), T::lit(v[2] / r)];
                        }
                    })
                    .collect()
            }
        }
    }
}

/// Fraction of midpoint samples v where (τ + a(v)·κ)² + (b22'(v)κ2²)² < threshold.
pub fn degenerate_fraction<T: Scalar>(spec: &ProblemSpec<T>, dir: [T; 3], n_u: usize, threshold: T) -> T {
    let n_u = n_u.max(1);
    let h = spec.range() / T::from_count(n_u);
    let [tau, k1, k2] = dir;
    let hits = (0..n_u)
        .filter(|&m| {
            let v = spec.u_min + (T::from_count(m) + T::lit(0.5)) * h;
            let s = tau + spec.flux_f1.deriv(v) * k1 + spec.flux_f2.deriv(v) * k2;
            let d = spec.diff_b22.deriv(v) * k2 * k2;
            s * s + d * d < threshold
        })
        .count();
    T::from_count(hits) / T::from_count(n_u)
}

#[derive(Clone, Debug, PartialEq)]
pub struct NondegeneracyReport<T> {
    pub fractions: Vec<T>,
    pub max_fraction: T,
    pub worst_direction: [T; 3],
}

pub fn nondegeneracy_scan<T: Scalar>(
    spec: &ProblemSpec<T>,
    dirs: &DirectionSet,
    n_u: usize,
    threshold: T,
) -> NondegeneracyReport<T> {
    use rayon::prelude::*;
    let dirs: Vec<[T; 3]> = dirs.directions();
    let fractions: Vec<T> = dirs.par_iter().map(|&d| degenerate_fraction(spec, d, n_u, threshold)).collect();
    let (mut max_fraction, mut worst_direction) = (T::zero(), [T::zero(); 3]);
    for (f, d) in fractions.iter().zip(&dirs) {
        if *f > max_fraction {
            max_fraction = *f;
            worst_direction = *d;
        }
    }
    NondegeneracyReport { fractions, max_fraction, worst_direction }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StructureReport {
    pub pass: bool,
    /// Which of (C) / (C') certified the instance.
    pub via: Option<Condition>,
    /// a₀ extension constant along x''-normals.
    pub normal_extension: bool,
}

/// Certifies diagonal diffusion (C) or x''-independent boundary data (C').
pub fn check_structure<T: Scalar>(spec: &ProblemSpec<T>) -> StructureReport {
    let via = if !spec.offdiagonal {
        Some(Condition::C)
    } else if spec.a0.independent_of_x2() {
        Some(Condition::CPrime)
    } else {
        None
    };
    StructureReport { pass: via.is_some(), via, normal_extension: true }
}

/// β22'(u) = sqrt(b22'(u)).
pub fn sqrt_diffusion<T: Scalar>(spec: &ProblemSpec<T>, u: T) -> Result<T, ModelError> {
    let d = spec.diff_b22.deriv(u);
    if d < T::zero() {
        return Err(ModelError::NegativeDiffusion { u: u.as_f64(), value: d.as_f64() });
    }
    Ok(d.sqrt())
}

/// β22(u) = ∫₀ᵘ sqrt(b22'(s)) ds by composite Gauss–Legendre (3 points, `panels` panels).
pub fn beta_primitive<T: Scalar>(spec: &ProblemSpec<T>, u: T, panels: usize) -> T {
    gauss3(T::zero(), u, panels, |s| spec.diff_b22.deriv(s).max(T::zero()).sqrt())
}

pub(crate) fn gauss3<T: Scalar>(a: T, b: T, panels: usize, g: impl Fn(T) -> T) -> T {
    let panels = panels.max(1);
    let h = (b - a) / T::from_count(panels);
    let r = T::lit((0.6f64).sqrt()) * T::lit(0.5);
    let (w0, w1) = (T::lit(8.0 / 18.0), T::lit(5.0 / 18.0));
    (0..panels).fold(T::zero(), |acc, k| {
        let mid = a + (T::from_count(k) + T::lit(0.5)) * h;
        acc + h * (w0 * g(mid) + w1 * (g(mid - r * h) + g(mid + r * h)))
    })
}
