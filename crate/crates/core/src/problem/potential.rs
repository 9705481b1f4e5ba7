use crate::grid::{self, pairwise_sum, PeriodicGrid, ScalarField};
use crate::weights::RootPair;

use super::ProblemError;

/// Pointwise tolerance on `Σ_α f_α`, relative to the largest `|f_α|` at the sample.
pub const TRACE_TOL: f64 = 1e-12;

/// `ξ = (f_1, …, f_r)` with pointwise zero sum. Also used for any
/// trace-zero stack (gradients, residuals, search directions).
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    planes: Vec<ScalarField>,
}

impl Potential {
    pub fn new(planes: Vec<ScalarField>) -> Result<Self, ProblemError> {
        check_same_grid(&planes)?;
        let p = Self { planes };
        if let Some(idx) = p.first_trace_violation() {
            let (x, y) = p.grid().coords(idx);
            return Err(ProblemError::NotTraceZero { x, y, value: p.trace_at(idx) });
        }
        Ok(p)
    }

    /// Removes the pointwise mean across planes.
    pub fn projected(planes: Vec<ScalarField>) -> Result<Self, ProblemError> {
        check_same_grid(&planes)?;
        Ok(Self::project_unchecked(planes))
    }

    pub(crate) fn project_unchecked(planes: Vec<ScalarField>) -> Self {
        let r = planes.len() as f64;
        let grid = planes[0].grid().clone();
        let mut vals: Vec<Vec<f64>> = planes.into_iter().map(ScalarField::into_values).collect();
        for idx in 0..grid.len() {
            let mean = vals.iter().map(|v| v[idx]).sum::<f64>() / r;
            for v in vals.iter_mut() {
                v[idx] -= mean;
            }
        }
        Self::from_planes(vals.into_iter().map(|v| ScalarField::from_raw(&grid, v)).collect())
    }

    pub(crate) fn from_planes(planes: Vec<ScalarField>) -> Self {
        debug_assert!(!planes.is_empty());
        Self { planes }
    }

    pub fn zeros(grid: &PeriodicGrid, r: usize) -> Self {
        Self::from_planes(vec![ScalarField::zeros(grid); r])
    }

    /// The spatially constant potential with value `w`.
    pub fn constant(grid: &PeriodicGrid, w: &[f64]) -> Result<Self, ProblemError> {
        Self::new(w.iter().map(|&c| ScalarField::constant(grid, c)).collect())
    }

    pub fn rank(&self) -> usize {
        self.planes.len()
    }

    pub fn grid(&self) -> &PeriodicGrid {
        self.planes[0].grid()
    }

    pub fn planes(&self) -> &[ScalarField] {
        &self.planes
    }

    pub fn into_planes(self) -> Vec<ScalarField> {
        self.planes
    }

    /// Plane `α` (1-based).
    pub fn plane(&self, alpha: usize) -> &ScalarField {
        &self.planes[alpha - 1]
    }

    /// `(v_{i,j}, ξ) = f_i − f_j`.
    pub fn pair_with(&self, pair: RootPair) -> ScalarField {
        self.plane(pair.i).sub(self.plane(pair.j))
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a.add(b))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a.sub(b))
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::from_planes(self.planes.iter().map(|p| p.scale(s)).collect())
    }

    /// `self + s·other`.
    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        self.zip(other, |a, b| a.zip_map(b, |x, y| x + s * y))
    }

    fn zip(&self, other: &Self, f: impl Fn(&ScalarField, &ScalarField) -> ScalarField) -> Self {
        assert_eq!(self.rank(), other.rank(), "rank mismatch");
        Self::from_planes(self.planes.iter().zip(&other.planes).map(|(a, b)| f(a, b)).collect())
    }

    /// `Σ_α ∫ f_α g_α`.
    pub fn inner(&self, other: &Self) -> f64 {
        let terms: Vec<f64> = self.planes.iter().zip(&other.planes).map(|(a, b)| grid::inner(a, b)).collect();
        pairwise_sum(&terms)
    }

    pub fn l2_norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.planes.iter().map(ScalarField::max_abs).fold(0.0, f64::max)
    }

    /// Plane integrals `(∫f_1, …, ∫f_r)`.
    pub fn means(&self) -> Vec<f64> {
        self.planes.iter().map(grid::integrate).collect()
    }

    /// Largest pointwise `|Σ_α f_α|`.
    pub fn trace_defect(&self) -> f64 {
        (0..self.grid().len()).map(|idx| self.trace_at(idx).abs()).fold(0.0, f64::max)
    }

    fn trace_at(&self, idx: usize) -> f64 {
        self.planes.iter().map(|p| p.values()[idx]).sum()
    }

    fn first_trace_violation(&self) -> Option<usize> {
        (0..self.grid().len()).find(|&idx| {
            let scale = self.planes.iter().map(|p| p.values()[idx].abs()).fold(1.0, f64::max);
            self.trace_at(idx).abs() > TRACE_TOL * scale
        })
    }
}

pub(super) fn check_same_grid(planes: &[ScalarField]) -> Result<(), ProblemError> {
    let Some(first) = planes.first() else {
        return Err(ProblemError::Shape("empty field stack".into()));
    };
    for p in planes {
        if p.grid() != first.grid() {
            return Err(grid::GridError::GridMismatch(first.grid().n(), p.grid().n()).into());
        }
    }
    Ok(())
}
