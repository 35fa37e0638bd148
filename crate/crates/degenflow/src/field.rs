use crate::domain::Grid;
use crate::scalar::Scalar;

/// Cell-centered scalar field, row index along x', column index along x''.
#[derive(Clone, Debug, PartialEq)]
pub struct Field<T> {
    n1: usize,
    n2: usize,
    data: Vec<T>,
}

impl<T: Scalar> Field<T> {
    pub fn filled(n1: usize, n2: usize, value: T) -> Self {
        Self { n1, n2, data: vec![value; n1 * n2] }
    }

    pub fn from_vec(n1: usize, n2: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), n1 * n2, "field data length mismatch");
        Self { n1, n2, data }
    }

    /// Samples `f(x1, x2)` at every cell center.
    pub fn from_fn(grid: &Grid<T>, f: impl Fn(T, T) -> T) -> Self {
        let (n1, n2) = (grid.n1(), grid.n2());
        let mut data = Vec::with_capacity(n1 * n2);
        for i in 0..n1 {
            let x1 = grid.x1(i);
            for j in 0..n2 {
                data.push(f(x1, grid.x2(j)));
            }
        }
        Self { n1, n2, data }
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n2 + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n2 + j] = v;
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n2..(i + 1) * self.n2]
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self { n1: self.n1, n2: self.n2, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        assert!(self.same_shape(other), "field shape mismatch");
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Self { n1: self.n1, n2: self.n2, data }
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.n1 == other.n1 && self.n2 == other.n2
    }

    pub fn min(&self) -> T {
        self.data.iter().fold(T::infinity(), |m, &v| m.min(v))
    }

    pub fn max(&self) -> T {
        self.data.iter().fold(T::neg_infinity(), |m, &v| m.max(v))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Sum of cell values times `cell_area`.
    pub fn integral(&self, cell_area: T) -> T {
        self.data.iter().fold(T::zero(), |s, &v| s + v) * cell_area
    }

    /// L¹ distance with cell weight `cell_area`.
    pub fn l1_distance(&self, other: &Self, cell_area: T) -> T {
        assert!(self.same_shape(other), "field shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |s, (&a, &b)| s + (a - b).abs())
            * cell_area
    }
}

/// Pair of cell-centered fields, one per coordinate axis.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField<T> {
    pub c1: Field<T>,
    pub c2: Field<T>,
}

impl<T: Scalar> VectorField<T> {
    pub fn from_fn(grid: &Grid<T>, f: impl Fn(T, T) -> [T; 2]) -> Self {
        let c1 = Field::from_fn(grid, |x1, x2| f(x1, x2)[0]);
        let c2 = Field::from_fn(grid, |x1, x2| f(x1, x2)[1]);
        Self { c1, c2 }
    }

    pub fn max_norm(&self) -> T {
        self.c1
            .as_slice()
            .iter()
            .zip(self.c2.as_slice())
            .fold(T::zero(), |m, (&a, &b)| m.max(a.hypot(b)))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            c1: self.c1.zip_map(&other.c1, |a, b| a + b),
            c2: self.c2.zip_map(&other.c2, |a, b| a + b),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            c1: self.c1.zip_map(&other.c1, |a, b| a - b),
            c2: self.c2.zip_map(&other.c2, |a, b| a - b),
        }
    }
}
