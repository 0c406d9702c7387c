use std::ops::{Add, Mul, Neg, Sub};

use rayon::prelude::*;

use super::{FieldError, Grid};

/// Lattice-point chunk used by data-parallel kernels and reductions. Reductions
/// sum fixed chunks in order, so results do not depend on thread scheduling.
pub(crate) const CHUNK: usize = 4096;

/// Deterministic parallel sum over a slice.
pub(crate) fn det_sum(values: &[f64]) -> f64 {
    let partial: Vec<f64> = values.par_chunks(CHUNK).map(|c| c.iter().sum::<f64>()).collect();
    partial.iter().sum()
}

/// Deterministic parallel sum of `f(idx)` over `0..len`.
pub(crate) fn det_sum_by<F>(len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let chunks = len.div_ceil(CHUNK);
    let partial: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(len);
            (lo..hi).map(&f).sum::<f64>()
        })
        .collect();
    partial.iter().sum()
}

/// Deterministic parallel sums of the `K` outputs of `f(idx)` over `0..len`.
pub(crate) fn det_sum_many<const K: usize, F>(len: usize, f: F) -> [f64; K]
where
    F: Fn(usize) -> [f64; K] + Sync,
{
    let chunks = len.div_ceil(CHUNK);
    let partial: Vec<[f64; K]> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(len);
            let mut acc = [0.0; K];
            for i in lo..hi {
                let v = f(i);
                for k in 0..K {
                    acc[k] += v[k];
                }
            }
            acc
        })
        .collect();
    let mut out = [0.0; K];
    for p in &partial {
        for k in 0..K {
            out[k] += p[k];
        }
    }
    out
}

/// Samples of a real function, one per lattice point.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    data: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid, data: Vec<f64>) -> Result<Self, FieldError> {
        if data.len() != grid.len() {
            return Err(FieldError::LengthMismatch {
                expected: grid.len(),
                found: data.len(),
            });
        }
        Ok(Self { grid, data })
    }

    pub(crate) fn from_vec_unchecked(grid: Grid, data: Vec<f64>) -> Self {
        debug_assert_eq!(grid.len(), data.len());
        Self { grid, data }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        Self { grid, data: vec![value; grid.len()] }
    }

    /// Sample `f` at every lattice position.
    pub fn from_fn<F>(grid: Grid, f: F) -> Self
    where
        F: Fn([f64; 3]) -> f64 + Sync,
    {
        Self::from_index_fn(grid, |idx| f(grid.position(idx)))
    }

    pub fn from_index_fn<F>(grid: Grid, f: F) -> Self
    where
        F: Fn(usize) -> f64 + Sync,
    {
        let data = (0..grid.len()).into_par_iter().map(&f).collect();
        Self { grid, data }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn map<F>(&self, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Sync,
    {
        let data = self.data.par_iter().map(|&v| f(v)).collect();
        Self { grid: self.grid, data }
    }

    pub fn scaled(&self, a: f64) -> Self {
        self.map(|v| a * v)
    }

    /// `a * self + b * other`.
    pub fn lin_comb(&self, a: f64, other: &ScalarField, b: f64) -> Result<Self, FieldError> {
        check_grids(self.grid, other.grid)?;
        let data = self
            .data
            .par_iter()
            .zip(other.data.par_iter())
            .map(|(&x, &y)| a * x + b * y)
            .collect();
        Ok(Self { grid: self.grid, data })
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        det_sum(&self.data) / self.data.len() as f64
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Rectangle-rule integral over the periodic box.
    pub fn integrate(&self) -> f64 {
        det_sum(&self.data) * self.grid.cell_volume()
    }

    pub fn inner(&self, other: &ScalarField) -> Result<f64, FieldError> {
        check_grids(self.grid, other.grid)?;
        Ok(det_sum_by(self.data.len(), |i| self.data[i] * other.data[i]) * self.grid.cell_volume())
    }

    pub fn l2_norm(&self) -> f64 {
        (det_sum_by(self.data.len(), |i| self.data[i] * self.data[i]) * self.grid.cell_volume()).sqrt()
    }
}

impl Add for &ScalarField {
    type Output = ScalarField;
    fn add(self, rhs: &ScalarField) -> ScalarField {
        self.lin_comb(1.0, rhs, 1.0).expect("grid mismatch in field addition")
    }
}

impl Sub for &ScalarField {
    type Output = ScalarField;
    fn sub(self, rhs: &ScalarField) -> ScalarField {
        self.lin_comb(1.0, rhs, -1.0).expect("grid mismatch in field subtraction")
    }
}

impl Mul<f64> for &ScalarField {
    type Output = ScalarField;
    fn mul(self, rhs: f64) -> ScalarField {
        self.scaled(rhs)
    }
}

impl Neg for &ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        self.scaled(-1.0)
    }
}

/// Three scalar components on a shared grid.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    comps: [ScalarField; 3],
}

impl VectorField {
    pub fn from_components(comps: [ScalarField; 3]) -> Result<Self, FieldError> {
        check_grids(comps[0].grid, comps[1].grid)?;
        check_grids(comps[0].grid, comps[2].grid)?;
        Ok(Self { comps })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, [0.0; 3])
    }

    pub fn constant(grid: Grid, v: [f64; 3]) -> Self {
        Self {
            comps: [
                ScalarField::constant(grid, v[0]),
                ScalarField::constant(grid, v[1]),
                ScalarField::constant(grid, v[2]),
            ],
        }
    }

    pub fn from_fn<F>(grid: Grid, f: F) -> Self
    where
        F: Fn([f64; 3]) -> [f64; 3] + Sync,
    {
        Self::from_index_fn(grid, |idx| f(grid.position(idx)))
    }

    /// Build from a per-point kernel evaluated in parallel.
    pub fn from_index_fn<F>(grid: Grid, f: F) -> Self
    where
        F: Fn(usize) -> [f64; 3] + Sync,
    {
        let values: Vec<[f64; 3]> = (0..grid.len()).into_par_iter().map(&f).collect();
        let comp = |c: usize| ScalarField::from_vec_unchecked(grid, values.iter().map(|v| v[c]).collect());
        Self { comps: [comp(0), comp(1), comp(2)] }
    }

    pub fn grid(&self) -> Grid {
        self.comps[0].grid
    }

    pub fn comp(&self, c: usize) -> &ScalarField {
        &self.comps[c]
    }

    pub fn comp_mut(&mut self, c: usize) -> &mut ScalarField {
        &mut self.comps[c]
    }

    pub fn comps(&self) -> &[ScalarField; 3] {
        &self.comps
    }

    pub fn into_components(self) -> [ScalarField; 3] {
        self.comps
    }

    #[inline]
    pub fn at(&self, idx: usize) -> [f64; 3] {
        [self.comps[0].data[idx], self.comps[1].data[idx], self.comps[2].data[idx]]
    }

    pub fn map_components<F>(&self, mut f: F) -> Self
    where
        F: FnMut(&ScalarField) -> ScalarField,
    {
        Self { comps: [f(&self.comps[0]), f(&self.comps[1]), f(&self.comps[2])] }
    }

    pub fn scaled(&self, a: f64) -> Self {
        self.map_components(|c| c.scaled(a))
    }

    pub fn lin_comb(&self, a: f64, other: &VectorField, b: f64) -> Result<Self, FieldError> {
        check_grids(self.grid(), other.grid())?;
        Ok(Self {
            comps: [
                self.comps[0].lin_comb(a, &other.comps[0], b)?,
                self.comps[1].lin_comb(a, &other.comps[1], b)?,
                self.comps[2].lin_comb(a, &other.comps[2], b)?,
            ],
        })
    }

    /// Pointwise Euclidean norm squared.
    pub fn norm_sq(&self) -> ScalarField {
        let g = self.grid();
        ScalarField::from_index_fn(g, |i| {
            let v = self.at(i);
            v[0] * v[0] + v[1] * v[1] + v[2] * v[2]
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.iter().map(ScalarField::max_abs).fold(0.0, f64::max)
    }

    /// Largest pointwise Euclidean length.
    pub fn max_norm(&self) -> f64 {
        (0..self.grid().len())
            .map(|i| {
                let v = self.at(i);
                (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
            })
            .fold(0.0, f64::max)
    }

    pub fn mean(&self) -> [f64; 3] {
        [self.comps[0].mean(), self.comps[1].mean(), self.comps[2].mean()]
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().all(ScalarField::is_finite)
    }

    pub fn inner(&self, other: &VectorField) -> Result<f64, FieldError> {
        let mut s = 0.0;
        for c in 0..3 {
            s += self.comps[c].inner(&other.comps[c])?;
        }
        Ok(s)
    }

    pub fn l2_norm(&self) -> f64 {
        self.inner(self).unwrap_or(0.0).sqrt()
    }
}

impl Add for &VectorField {
    type Output = VectorField;
    fn add(self, rhs: &VectorField) -> VectorField {
        self.lin_comb(1.0, rhs, 1.0).expect("grid mismatch in field addition")
    }
}

impl Sub for &VectorField {
    type Output = VectorField;
    fn sub(self, rhs: &VectorField) -> VectorField {
        self.lin_comb(1.0, rhs, -1.0).expect("grid mismatch in field subtraction")
    }
}

impl Mul<f64> for &VectorField {
    type Output = VectorField;
    fn mul(self, rhs: f64) -> VectorField {
        self.scaled(rhs)
    }
}

/// 3×3 tensor per lattice point, component `(i, j)` stored at `comps[i][j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorField {
    comps: [[ScalarField; 3]; 3],
}

impl TensorField {
    pub fn from_components(comps: [[ScalarField; 3]; 3]) -> Result<Self, FieldError> {
        let g = comps[0][0].grid;
        for row in &comps {
            for c in row {
                check_grids(g, c.grid)?;
            }
        }
        Ok(Self { comps })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, [[0.0; 3]; 3])
    }

    pub fn constant(grid: Grid, m: [[f64; 3]; 3]) -> Self {
        Self::from_index_fn(grid, |_| m)
    }

    pub fn from_index_fn<F>(grid: Grid, f: F) -> Self
    where
        F: Fn(usize) -> [[f64; 3]; 3] + Sync,
    {
        let values: Vec<[[f64; 3]; 3]> = (0..grid.len()).into_par_iter().map(&f).collect();
        let comp = |i: usize, j: usize| {
            ScalarField::from_vec_unchecked(grid, values.iter().map(|m| m[i][j]).collect())
        };
        Self {
            comps: [
                [comp(0, 0), comp(0, 1), comp(0, 2)],
                [comp(1, 0), comp(1, 1), comp(1, 2)],
                [comp(2, 0), comp(2, 1), comp(2, 2)],
            ],
        }
    }

    pub fn from_fn<F>(grid: Grid, f: F) -> Self
    where
        F: Fn([f64; 3]) -> [[f64; 3]; 3] + Sync,
    {
        Self::from_index_fn(grid, |idx| f(grid.position(idx)))
    }

    pub fn grid(&self) -> Grid {
        self.comps[0][0].grid
    }

    pub fn comp(&self, i: usize, j: usize) -> &ScalarField {
        &self.comps[i][j]
    }

    #[inline]
    pub fn at(&self, idx: usize) -> [[f64; 3]; 3] {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.comps[i][j].data[idx];
            }
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let c = |i: usize, j: usize| self.comps[j][i].clone();
        Self {
            comps: [[c(0, 0), c(0, 1), c(0, 2)], [c(1, 0), c(1, 1), c(1, 2)], [c(2, 0), c(2, 1), c(2, 2)]],
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        let c = |i: usize, j: usize| self.comps[i][j].scaled(a);
        Self {
            comps: [[c(0, 0), c(0, 1), c(0, 2)], [c(1, 0), c(1, 1), c(1, 2)], [c(2, 0), c(2, 1), c(2, 2)]],
        }
    }

    pub fn lin_comb(&self, a: f64, other: &TensorField, b: f64) -> Result<Self, FieldError> {
        check_grids(self.grid(), other.grid())?;
        let c = |i: usize, j: usize| self.comps[i][j].lin_comb(a, &other.comps[i][j], b);
        Ok(Self {
            comps: [
                [c(0, 0)?, c(0, 1)?, c(0, 2)?],
                [c(1, 0)?, c(1, 1)?, c(1, 2)?],
                [c(2, 0)?, c(2, 1)?, c(2, 2)?],
            ],
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.iter().flatten().map(ScalarField::max_abs).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().flatten().all(ScalarField::is_finite)
    }
}

/// Uniform access to the scalar components of any field kind, so componentwise
/// operators (Laplacian, mollification) are written once.
pub trait Field: Clone {
    fn grid(&self) -> Grid;
    fn components(&self) -> Vec<&ScalarField>;
    fn map_scalar<F>(&self, f: F) -> Self
    where
        F: FnMut(&ScalarField) -> ScalarField;
}

impl Field for ScalarField {
    fn grid(&self) -> Grid {
        self.grid
    }
    fn components(&self) -> Vec<&ScalarField> {
        vec![self]
    }
    fn map_scalar<F>(&self, mut f: F) -> Self
    where
        F: FnMut(&ScalarField) -> ScalarField,
    {
        f(self)
    }
}

impl Field for VectorField {
    fn grid(&self) -> Grid {
        VectorField::grid(self)
    }
    fn components(&self) -> Vec<&ScalarField> {
        self.comps.iter().collect()
    }
    fn map_scalar<F>(&self, f: F) -> Self
    where
        F: FnMut(&ScalarField) -> ScalarField,
    {
        self.map_components(f)
    }
}

impl Field for TensorField {
    fn grid(&self) -> Grid {
        TensorField::grid(self)
    }
    fn components(&self) -> Vec<&ScalarField> {
        self.comps.iter().flatten().collect()
    }
    fn map_scalar<F>(&self, mut f: F) -> Self
    where
        F: FnMut(&ScalarField) -> ScalarField,
    {
        let mut out: Vec<ScalarField> = Vec::with_capacity(9);
        for row in &self.comps {
            for c in row {
                out.push(f(c));
            }
        }
        let mut it = out.into_iter();
        let mut next = || it.next().expect("nine components");
        Self {
            comps: [[next(), next(), next()], [next(), next(), next()], [next(), next(), next()]],
        }
    }
}

pub fn check_grids(a: Grid, b: Grid) -> Result<(), FieldError> {
    if a == b {
        Ok(())
    } else {
        Err(FieldError::GridMismatch)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn unit_grid() -> Grid {
        Grid::cubic(16, 1.0).unwrap()
    }

    #[test]
    fn integrate_constant_is_exact() {
        let f = ScalarField::constant(unit_grid(), 1.0);
        assert!((f.integrate() - 1.0).abs() < 1e-14);
        let g = Grid::new([8, 4, 6], [2.0, 3.0, 0.5]).unwrap();
        assert!((ScalarField::constant(g, 2.0).integrate() - 6.0).abs() < 1e-13);
    }

    #[test]
    fn full_period_sine_integrates_to_zero() {
        let f = ScalarField::from_fn(unit_grid(), |x| (2.0 * PI * x[0]).sin());
        assert!(f.integrate().abs() < 1e-15);
    }

    #[test]
    fn inner_rejects_grid_mismatch() {
        let a = ScalarField::zeros(unit_grid());
        let b = ScalarField::zeros(Grid::cubic(8, 1.0).unwrap());
        assert_eq!(a.inner(&b), Err(FieldError::GridMismatch));
    }

    #[test]
    fn length_is_checked() {
        assert!(ScalarField::new(unit_grid(), vec![0.0; 10]).is_err());
    }

    #[test]
    fn tensor_transpose_swaps_indices() {
        let g = Grid::cubic(4, 1.0).unwrap();
        let t = TensorField::constant(g, [[1.0, 2.0, 3.0], [4.0, 5.0, 6.0], [7.0, 8.0, 9.0]]);
        assert_eq!(t.transpose().at(3)[0][1], 4.0);
    }
}
