//! Tensor-product polynomial test functions φ(t,x) = θ(t)ψ₁(x')ψ₂(x'').

use crate::domain::Grid;
use crate::model::{poly_bump, poly_bump_deriv};
use crate::scalar::Scalar;

/// Bump (1−r²)³ with r = (x−center)/width.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bump<T> {
    pub center: T,
    pub width: T,
}

impl<T: Scalar> Bump<T> {
    pub fn new(center: T, width: T) -> Self {
        Self { center, width }
    }

    #[inline]
    pub fn value(&self, x: T) -> T {
        poly_bump((x - self.center) / self.width)
    }

    #[inline]
    pub fn deriv(&self, x: T) -> T {
        poly_bump_deriv((x - self.center) / self.width) / self.width
    }

    /// sup |d/dx|, attained at r = 1/√5.
    pub fn max_slope(&self) -> T {
        let r = T::one() / T::lit(5.0).sqrt();
        T::lit(6.0) * r * (T::one() - r * r).powi(2) / self.width
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TestFunction<T> {
    pub id: String,
    pub t: Bump<T>,
    pub x1: Bump<T>,
    pub x2: Bump<T>,
}

impl<T: Scalar> TestFunction<T> {
    pub fn value(&self, t: T, x1: T, x2: T) -> T {
        self.t.value(t) * self.x1.value(x1) * self.x2.value(x2)
    }

    pub fn grad(&self, t: T, x1: T, x2: T) -> [T; 3] {
        let (a, b, c) = (self.t.value(t), self.x1.value(x1), self.x2.value(x2));
        [self.t.deriv(t) * b * c, a * self.x1.deriv(x1) * c, a * b * self.x2.deriv(x2)]
    }

    /// |U_T|·(sup|φ| + sup|∂_tφ| + sup|∂_1φ| + sup|∂_2φ|).
    pub fn norm(&self, t_end: T, area: T) -> T {
        (T::one() + self.t.max_slope() + self.x1.max_slope() + self.x2.max_slope()) * t_end * area
    }

    /// ψ₁ at cell centers.
    pub fn x1_centers(&self, grid: &Grid<T>) -> Vec<T> {
        (0..grid.n1()).map(|i| self.x1.value(grid.x1(i))).collect()
    }

    pub fn x2_centers(&self, grid: &Grid<T>) -> Vec<T> {
        (0..grid.n2()).map(|j| self.x2.value(grid.x2(j))).collect()
    }
}

fn time_bump<T: Scalar>(t_end: T) -> Bump<T> {
    Bump::new(t_end * T::lit(0.5), t_end * T::lit(0.45))
}

const WIDTHS: [f64; 3] = [0.15, 0.2, 0.25];
const CENTERS: [f64; 3] = [0.3, 0.5, 0.7];

/// Nine bumps compactly supported inside (0,T)×Ω: three widths × three centers.
pub fn interior_family<T: Scalar>(grid: &Grid<T>, t_end: T) -> Vec<TestFunction<T>> {
    let [a1, _] = grid.extent1();
    let [a2, _] = grid.extent2();
    let (l1, l2) = (grid.length1(), grid.length2());
    let mut out = Vec::with_capacity(9);
    for (wa, &w) in WIDTHS.iter().enumerate() {
        for (cb, &c) in CENTERS.iter().enumerate() {
            let c2 = CENTERS[(wa + cb) % 3];
            out.push(TestFunction {
                id: format!("int{wa}{cb}"),
                t: time_bump(t_end),
                x1: Bump::new(a1 + T::lit(c) * l1, T::lit(w) * l1),
                x2: Bump::new(a2 + T::lit(c2) * l2, T::lit(w) * l2),
            });
        }
    }
    out
}

/// Nine functions that do not vanish on Γ' but vanish near Γ'' and near t ∈ {0,T}.
pub fn neumann_family<T: Scalar>(grid: &Grid<T>, t_end: T) -> Vec<TestFunction<T>> {
    let [a1, b1] = grid.extent1();
    let [a2, _] = grid.extent2();
    let (l1, l2) = (grid.length1(), grid.length2());
    let centers1 = [a1, a1 + T::lit(0.5) * l1, b1];
    let mut out = Vec::with_capacity(9);
    for (wa, &w) in [0.3, 0.4, 0.5].iter().enumerate() {
        for (cb, &c1) in centers1.iter().enumerate() {
            out.push(TestFunction {
                id: format!("neu{wa}{cb}"),
                t: time_bump(t_end),
                x1: Bump::new(c1, T::lit(w) * l1),
                x2: Bump::new(a2 + T::lit(CENTERS[(wa + cb) % 3]) * l2, T::lit(0.25) * l2),
            });
        }
    }
    out
}

/// Nine functions that do not vanish on Γ'' but vanish near Γ' and near t ∈ {0,T}.
pub fn dirichlet_family<T: Scalar>(grid: &Grid<T>, t_end: T) -> Vec<TestFunction<T>> {
    let [a1, _] = grid.extent1();
    let [a2, b2] = grid.extent2();
    let (l1, l2) = (grid.length1(), grid.length2());
    let mut out = Vec::with_capacity(9);
    for (wa, &w) in [0.2, 0.3, 0.4].iter().enumerate() {
        for (cb, &c1) in CENTERS.iter().enumerate() {
            let c2 = if (wa + cb) % 2 == 0 { a2 } else { b2 };
            out.push(TestFunction {
                id: format!("dir{wa}{cb}"),
                t: time_bump(t_end),
                x1: Bump::new(a1 + T::lit(c1) * l1, T::lit(0.25) * l1),
                x2: Bump::new(c2, T::lit(w) * l2),
            });
        }
    }
    out
}
