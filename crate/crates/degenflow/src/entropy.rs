//! Kruzhkov entropy fluxes, the triple functions H and A, regularized signs
//! and the kinetic χ-function.

use thiserror::Error;

use crate::domain::Grid;
use crate::field::{Field, VectorField};
use crate::model::ProblemSpec;
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KineticError {
    #[error("value {u} exceeds kinetic cutoff L = {l}")]
    BeyondCutoff { u: f64, l: f64 },
    #[error("kinetic grid needs at least one cell")]
    EmptyGrid,
}

/// Sign with sgn(0) = 0.
#[inline]
pub fn sgn<T: Scalar>(v: T) -> T {
    if v > T::zero() {
        T::one()
    } else if v < T::zero() {
        -T::one()
    } else {
        T::zero()
    }
}

/// F(u,v) = sgn(u−v)(f(u)−f(v)), both components.
pub fn kru_flux_f<T: Scalar>(u: T, v: T, spec: &ProblemSpec<T>) -> [T; 2] {
    let s = sgn(u - v);
    [
        s * (spec.flux_f1.eval(u) - spec.flux_f1.eval(v)),
        s * (spec.flux_f2.eval(u) - spec.flux_f2.eval(v)),
    ]
}

/// 𝐁(u,v) = sgn(u−v)(b22(u)−b22(v)).
pub fn kru_diffusion_b<T: Scalar>(u: T, v: T, spec: &ProblemSpec<T>) -> T {
    sgn(u - v) * (spec.diff_b22.eval(u) - spec.diff_b22.eval(v))
}

/// A(u,v,w) = |u−v| + |u−w| − |w−v|.
pub fn a_fn<T: Scalar>(u: T, v: T, w: T) -> T {
    (u - v).abs() + (u - w).abs() - (w - v).abs()
}

/// ξᵀ𝐁*(u,v,w)ξ with 𝐁* = 𝐁(u,v)+𝐁(u,w)−𝐁(w,v).
pub fn bstar_quadratic<T: Scalar>(u: T, v: T, w: T, xi: T, spec: &ProblemSpec<T>) -> T {
    let bs = kru_diffusion_b(u, v, spec) + kru_diffusion_b(u, w, spec) - kru_diffusion_b(w, v, spec);
    xi * bs * xi
}

/// Odd sine-profile approximation of sgn.
pub fn sgn_delta<T: Scalar>(v: T, delta: T) -> T {
    if v > delta {
        T::one()
    } else if v < -delta {
        -T::one()
    } else {
        (T::lit(std::f64::consts::FRAC_PI_2) * v / delta).sin()
    }
}

/// d/dv of [`sgn_delta`].
pub fn sgn_delta_prime<T: Scalar>(v: T, delta: T) -> T {
    if v.abs() > delta {
        T::zero()
    } else {
        let c = T::lit(std::f64::consts::FRAC_PI_2) / delta;
        c * (c * v).cos()
    }
}

/// Antiderivative of [`sgn_delta`] with value 0 at 0.
pub fn eta_delta<T: Scalar>(v: T, delta: T) -> T {
    let c = T::lit(std::f64::consts::FRAC_PI_2) / delta;
    let a = v.abs();
    if a <= delta {
        (T::one() - (c * a).cos()) / c
    } else {
        T::one() / c + (a - delta)
    }
}

/// χ(ξ;u): 1 on 0<ξ≤u, −1 on u≤ξ<0, 0 otherwise.
pub fn chi<T: Scalar>(xi: T, u: T) -> i8 {
    if xi > T::zero() && xi <= u {
        1
    } else if xi < T::zero() && u <= xi {
        -1
    } else {
        0
    }
}

/// Kruzhkov kinetic entropy η_ξ(u) = (ξ−u)₊ − (ξ)₊.
pub fn kinetic_entropy<T: Scalar>(xi: T, u: T) -> T {
    (xi - u).max(T::zero()) - xi.max(T::zero())
}

/// χ(ξ;u) sampled on the midpoints of a uniform ξ-grid over [−L, L].
#[derive(Clone, Debug, PartialEq)]
pub struct KineticSlab<T> {
    pub xi_grid: Vec<T>,
    pub l: T,
    /// Row per cell, one entry per ξ sample.
    pub values: Vec<Vec<i8>>,
}

impl<T: Scalar> KineticSlab<T> {
    pub fn new(us: &[T], l: T, n_xi: usize) -> Result<Self, KineticError> {
        if n_xi == 0 {
            return Err(KineticError::EmptyGrid);
        }
        if let Some(&u) = us.iter().find(|u| u.abs() > l) {
            return Err(KineticError::BeyondCutoff { u: u.as_f64(), l: l.as_f64() });
        }
        let dxi = (l + l) / T::from_count(n_xi);
        let xi_grid: Vec<T> = (0..n_xi).map(|m| -l + (T::from_count(m) + T::lit(0.5)) * dxi).collect();
        let values = us.iter().map(|&u| xi_grid.iter().map(|&xi| chi(xi, u)).collect()).collect();
        Ok(Self { xi_grid, l, values })
    }

    pub fn dxi(&self) -> T {
        (self.l + self.l) / T::from_count(self.xi_grid.len())
    }

    /// Midpoint rule for ∫ η'(ξ)χ(ξ;u) dξ per cell.
    pub fn moment(&self, eta_prime: impl Fn(T) -> T) -> Vec<T> {
        let dxi = self.dxi();
        let weights: Vec<T> = self.xi_grid.iter().map(|&xi| eta_prime(xi) * dxi).collect();
        self.values
            .iter()
            .map(|row| {
                row.iter().zip(&weights).fold(T::zero(), |s, (&c, &w)| match c {
                    1 => s + w,
                    -1 => s - w,
                    _ => s,
                })
            })
            .collect()
    }
}

/// Derivative along x'' by centered differences, one-sided second order at Γ''.
pub fn d_dx2<T: Scalar>(g: &Field<T>, dx2: T) -> Field<T> {
    let (n1, n2) = (g.n1(), g.n2());
    let mut out = Field::filled(n1, n2, T::zero());
    let two = T::lit(2.0);
    for i in 0..n1 {
        for j in 0..n2 {
            let d = if n2 < 3 {
                (g.get(i, 1) - g.get(i, 0)) / dx2
            } else if j == 0 {
                (-T::lit(3.0) * g.get(i, 0) + T::lit(4.0) * g.get(i, 1) - g.get(i, 2)) / (two * dx2)
            } else if j == n2 - 1 {
                (T::lit(3.0) * g.get(i, j) - T::lit(4.0) * g.get(i, j - 1) + g.get(i, j - 2)) / (two * dx2)
            } else {
                (g.get(i, j + 1) - g.get(i, j - 1)) / (two * dx2)
            };
            out.set(i, j, d);
        }
    }
    out
}

/// K(u,v) = ∇_{x''}·𝐁(u,v) − F(u,v) for fields u, v.
pub fn k_field<T: Scalar>(u: &Field<T>, v: &Field<T>, grid: &Grid<T>, spec: &ProblemSpec<T>) -> VectorField<T> {
    let bb = u.zip_map(v, |a, b| kru_diffusion_b(a, b, spec));
    let db = d_dx2(&bb, grid.dx2());
    let c1 = u.zip_map(v, |a, b| -kru_flux_f(a, b, spec)[0]);
    let f2 = u.zip_map(v, |a, b| kru_flux_f(a, b, spec)[1]);
    let c2 = db.zip_map(&f2, |d, f| d - f);
    VectorField { c1, c2 }
}

/// K(u,k) for a constant level k.
pub fn k_field_level<T: Scalar>(u: &Field<T>, k: T, grid: &Grid<T>, spec: &ProblemSpec<T>) -> VectorField<T> {
    k_field(u, &Field::filled(u.n1(), u.n2(), k), grid, spec)
}

/// H(u,k,w) = K(u,k) + K(u,w) − K(w,k).
pub fn h_field<T: Scalar>(
    u: &Field<T>,
    k: T,
    w: &Field<T>,
    grid: &Grid<T>,
    spec: &ProblemSpec<T>,
) -> VectorField<T> {
    let kf = Field::filled(u.n1(), u.n2(), k);
    k_field(u, &kf, grid, spec).add(&k_field(u, w, grid, spec)).sub(&k_field(w, &kf, grid, spec))
}
