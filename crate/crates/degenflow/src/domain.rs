//! Product-domain mesh Ω = Ω'×Ω'' with tagged boundary, boundary layers and
//! deformation layers.

use thiserror::Error;

use crate::field::Field;
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("cell count along axis {axis} must be at least 2 (got {count})")]
    TooFewCells { axis: usize, count: usize },
    #[error("extent along axis {axis} has non-positive length")]
    DegenerateExtent { axis: usize },
    #[error("a product grid needs exactly two axes (got {0})")]
    AxisCount(usize),
    #[error("layer width {delta} outside (0, {limit})")]
    LayerWidth { delta: f64, limit: f64 },
    #[error("deformation depth {s} outside (0, {limit})")]
    Depth { s: f64, limit: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec<T> {
    pub n1: usize,
    pub n2: usize,
    pub extent1: [T; 2],
    pub extent2: [T; 2],
}

impl<T: Scalar> GridSpec<T> {
    pub fn unit_square(n1: usize, n2: usize) -> Self {
        Self { n1, n2, extent1: [T::zero(), T::one()], extent2: [T::zero(), T::one()] }
    }

    /// Builds a spec from per-axis lists; anything but two axes is rejected.
    pub fn from_axes(counts: &[usize], extents: &[[T; 2]]) -> Result<Self, DomainError> {
        if counts.len() != 2 || extents.len() != 2 {
            return Err(DomainError::AxisCount(counts.len().min(extents.len())));
        }
        Ok(Self { n1: counts[0], n2: counts[1], extent1: extents[0], extent2: extents[1] })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X1,
    X2,
}

/// Which factor of the product a layer or deformation refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Factor {
    /// Ω', the hyperbolic factor; its boundary gives Γ'.
    Prime,
    /// Ω'', the parabolic factor; its boundary gives Γ''.
    DoublePrime,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FaceTag {
    /// Γ' = ∂Ω'×Ω'': zero total flux.
    Neumann,
    /// Γ'' = Ω'×∂Ω'': prescribed value a₀.
    Dirichlet,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundaryFace {
    pub cell: (usize, usize),
    pub axis: Axis,
    /// Sign of the outward normal along `axis`.
    pub outward: i8,
    pub tag: FaceTag,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Grid<T> {
    spec: GridSpec<T>,
    dx1: T,
    dx2: T,
    faces: Vec<BoundaryFace>,
}

pub fn build_grid<T: Scalar>(spec: GridSpec<T>) -> Result<Grid<T>, DomainError> {
    if spec.n1 < 2 {
        return Err(DomainError::TooFewCells { axis: 1, count: spec.n1 });
    }
    if spec.n2 < 2 {
        return Err(DomainError::TooFewCells { axis: 2, count: spec.n2 });
    }
    let len1 = spec.extent1[1] - spec.extent1[0];
    let len2 = spec.extent2[1] - spec.extent2[0];
    if !(len1 > T::zero()) || !len1.is_finite() {
        return Err(DomainError::DegenerateExtent { axis: 1 });
    }
    if !(len2 > T::zero()) || !len2.is_finite() {
        return Err(DomainError::DegenerateExtent { axis: 2 });
    }
    let dx1 = len1 / T::from_count(spec.n1);
    let dx2 = len2 / T::from_count(spec.n2);
    let mut grid = Grid { spec, dx1, dx2, faces: Vec::new() };
    grid.faces = tag_faces(grid.spec.n1, grid.spec.n2);
    Ok(grid)
}

fn tag_faces(n1: usize, n2: usize) -> Vec<BoundaryFace> {
    let mut faces = Vec::with_capacity(2 * (n1 + n2));
    for j in 0..n2 {
        faces.push(BoundaryFace { cell: (0, j), axis: Axis::X1, outward: -1, tag: FaceTag::Neumann });
        faces.push(BoundaryFace { cell: (n1 - 1, j), axis: Axis::X1, outward: 1, tag: FaceTag::Neumann });
    }
    for i in 0..n1 {
        faces.push(BoundaryFace { cell: (i, 0), axis: Axis::X2, outward: -1, tag: FaceTag::Dirichlet });
        faces.push(BoundaryFace { cell: (i, n2 - 1), axis: Axis::X2, outward: 1, tag: FaceTag::Dirichlet });
    }
    faces
}

/// Boundary faces of the grid; x'-normal faces are Γ', x''-normal faces are Γ''.
pub fn classify_faces<T: Scalar>(grid: &Grid<T>) -> Vec<BoundaryFace> {
    grid.faces.clone()
}

impl<T: Scalar> Grid<T> {
    pub fn spec(&self) -> &GridSpec<T> {
        &self.spec
    }

    pub fn n1(&self) -> usize {
        self.spec.n1
    }

    pub fn n2(&self) -> usize {
        self.spec.n2
    }

    pub fn n_cells(&self) -> usize {
        self.spec.n1 * self.spec.n2
    }

    pub fn dx1(&self) -> T {
        self.dx1
    }

    pub fn dx2(&self) -> T {
        self.dx2
    }

    pub fn dx_min(&self) -> T {
        self.dx1.min(self.dx2)
    }

    pub fn cell_area(&self) -> T {
        self.dx1 * self.dx2
    }

    pub fn extent1(&self) -> [T; 2] {
        self.spec.extent1
    }

    pub fn extent2(&self) -> [T; 2] {
        self.spec.extent2
    }

    pub fn length1(&self) -> T {
        self.spec.extent1[1] - self.spec.extent1[0]
    }

    pub fn length2(&self) -> T {
        self.spec.extent2[1] - self.spec.extent2[0]
    }

    pub fn area(&self) -> T {
        self.length1() * self.length2()
    }

    #[inline]
    pub fn x1(&self, i: usize) -> T {
        self.spec.extent1[0] + (T::from_count(i) + T::lit(0.5)) * self.dx1
    }

    #[inline]
    pub fn x2(&self, j: usize) -> T {
        self.spec.extent2[0] + (T::from_count(j) + T::lit(0.5)) * self.dx2
    }

    /// Position of the x'-normal face between cells `i-1` and `i` (0 ≤ i ≤ n1).
    #[inline]
    pub fn x1_face(&self, i: usize) -> T {
        self.spec.extent1[0] + T::from_count(i) * self.dx1
    }

    #[inline]
    pub fn x2_face(&self, j: usize) -> T {
        self.spec.extent2[0] + T::from_count(j) * self.dx2
    }

    pub fn boundary_faces(&self) -> &[BoundaryFace] {
        &self.faces
    }

    /// Neighbors in the order (−x1, +x1, −x2, +x2); `None` across the boundary.
    pub fn neighbors(&self, i: usize, j: usize) -> [Option<(usize, usize)>; 4] {
        [
            (i > 0).then(|| (i - 1, j)),
            (i + 1 < self.n1()).then(|| (i + 1, j)),
            (j > 0).then(|| (i, j - 1)),
            (j + 1 < self.n2()).then(|| (i, j + 1)),
        ]
    }

    /// Distance from `(x1, x2)` to the boundary of the given factor.
    pub fn distance_to(&self, factor: Factor, x1: T, x2: T) -> T {
        match factor {
            Factor::Prime => (x1 - self.spec.extent1[0]).min(self.spec.extent1[1] - x1),
            Factor::DoublePrime => (x2 - self.spec.extent2[0]).min(self.spec.extent2[1] - x2),
        }
    }

    /// Distance to the whole boundary ∂Ω.
    pub fn distance_to_boundary(&self, x1: T, x2: T) -> T {
        self.distance_to(Factor::Prime, x1, x2).min(self.distance_to(Factor::DoublePrime, x1, x2))
    }

    fn half_length(&self, factor: Factor) -> T {
        let len = match factor {
            Factor::Prime => self.length1(),
            Factor::DoublePrime => self.length2(),
        };
        len * T::lit(0.5)
    }
}

/// Cutoff ζ_δ = min(δ, h)/δ sampled at cell centers.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerField<T> {
    pub values: Field<T>,
    pub delta: T,
    pub side: Factor,
}

pub fn boundary_layer<T: Scalar>(grid: &Grid<T>, delta: T, side: Factor) -> Result<LayerField<T>, DomainError> {
    let limit = grid.half_length(side);
    if !(delta > T::zero() && delta < limit) {
        return Err(DomainError::LayerWidth { delta: delta.as_f64(), limit: limit.as_f64() });
    }
    let values = Field::from_fn(grid, |x1, x2| {
        let h = grid.distance_to(side, x1, x2).max(T::zero());
        h.min(delta) / delta
    });
    Ok(LayerField { values, delta, side })
}

/// Cells whose centers lie on the inward offset of ∂Ω' by `s`.
#[derive(Clone, Debug, PartialEq)]
pub struct DeformationLayer<T> {
    pub s: T,
    /// Column index counted from the left wall; the right wall uses `n1 - 1 - column`.
    pub column: usize,
    /// Left-wall cells ordered by x'', then right-wall cells ordered by x''.
    pub cells: Vec<(usize, usize)>,
}

pub fn deformation_layers<T: Scalar>(grid: &Grid<T>, s_values: &[T]) -> Result<Vec<DeformationLayer<T>>, DomainError> {
    let limit = grid.half_length(Factor::Prime);
    s_values
        .iter()
        .map(|&s| {
            if !(s > T::zero() && s < limit) {
                return Err(DomainError::Depth { s: s.as_f64(), limit: limit.as_f64() });
            }
            let column = (s / grid.dx1() - T::lit(0.5))
                .round()
                .max(T::zero())
                .to_usize()
                .unwrap_or(0)
                .min(grid.n1() / 2 - 1 + grid.n1() % 2);
            let right = grid.n1() - 1 - column;
            let mut cells: Vec<(usize, usize)> = (0..grid.n2()).map(|j| (column, j)).collect();
            cells.extend((0..grid.n2()).map(|j| (right, j)));
            Ok(DeformationLayer { s, column, cells })
        })
        .collect()
}
