//! Real scalar fields on the unit-area flat torus `R²/Z²`, sampled on an
//! `n × n` periodic grid, and their Fourier calculus.
//!
//! Conventions used throughout the crate:
//!
//! * sample `(m, p)` sits at `x = m/n, y = p/n` and is stored at `p·n + m`;
//! * `Δ = −(∂²_x + ∂²_y)`, so mode `k = (k₁, k₂)` is multiplied by
//!   `4π²(k₁² + k₂²)` and constants are in the kernel;
//! * `∫ f` is the sample mean (the torus has unit area);
//! * complex coordinate `z = x + iy`, `ω = (i/2) dz∧dz̄`, and
//!   `Λ(i g dz∧dz̄) = 2g`, hence `iΛ∂̄∂f = ½Δf`.

pub mod io;
mod spectral;
mod sum;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

pub use spectral::Spectrum;
pub use sum::pairwise_sum;

use spectral::SpectralPlan;

/// Tolerance on `|∫g|` accepted by [`poisson_solve`].
pub const POISSON_MEAN_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("grid size {0} is not a power of two >= 8")]
    BadSize(usize),
    #[error("expected {expected} samples, got {got}")]
    Length { expected: usize, got: usize },
    #[error("non-finite sample at x = {x}, y = {y}")]
    NonFinite { x: f64, y: f64 },
    #[error("right-hand side has mean {mean:e}; Poisson problem needs zero mean")]
    NonZeroMean { mean: f64 },
    #[error("fields live on different grids ({0} vs {1})")]
    GridMismatch(usize, usize),
    #[error("malformed field file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// The `n × n` sampling of the unit torus. Cheap to clone.
#[derive(Clone)]
pub struct PeriodicGrid {
    n: usize,
    plan: Arc<SpectralPlan>,
}

impl PeriodicGrid {
    pub fn new(n: usize) -> Result<Self, GridError> {
        if n < 8 || !n.is_power_of_two() {
            return Err(GridError::BadSize(n));
        }
        Ok(Self { n, plan: SpectralPlan::shared(n) })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinates of flat sample index `idx`.
    pub fn coords(&self, idx: usize) -> (f64, f64) {
        let n = self.n as f64;
        ((idx % self.n) as f64 / n, (idx / self.n) as f64 / n)
    }

    pub(crate) fn plan(&self) -> &SpectralPlan {
        &self.plan
    }
}

impl PartialEq for PeriodicGrid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
    }
}

impl Eq for PeriodicGrid {}

impl fmt::Debug for PeriodicGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PeriodicGrid({})", self.n)
    }
}

/// Samples of a real function on a [`PeriodicGrid`]; always finite.
#[derive(Clone, PartialEq)]
pub struct ScalarField {
    grid: PeriodicGrid,
    values: Vec<f64>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarField(n={}, max|f|={:e})", self.grid.n, self.max_abs())
    }
}

impl ScalarField {
    pub fn new(grid: &PeriodicGrid, values: Vec<f64>) -> Result<Self, GridError> {
        if values.len() != grid.len() {
            return Err(GridError::Length { expected: grid.len(), got: values.len() });
        }
        if let Some(idx) = values.iter().position(|v| !v.is_finite()) {
            let (x, y) = grid.coords(idx);
            return Err(GridError::NonFinite { x, y });
        }
        Ok(Self { grid: grid.clone(), values })
    }

    /// Caller guarantees every value is finite.
    pub(crate) fn from_raw(grid: &PeriodicGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid: grid.clone(), values }
    }

    pub fn constant(grid: &PeriodicGrid, c: f64) -> Self {
        assert!(c.is_finite(), "constant field must be finite");
        Self::from_raw(grid, vec![c; grid.len()])
    }

    pub fn zeros(grid: &PeriodicGrid) -> Self {
        Self::constant(grid, 0.0)
    }

    /// Samples `f(x, y)`; fails if any sample is non-finite.
    pub fn from_fn(grid: &PeriodicGrid, f: impl Fn(f64, f64) -> f64) -> Result<Self, GridError> {
        let values = (0..grid.len())
            .map(|idx| {
                let (x, y) = grid.coords(idx);
                f(x, y)
            })
            .collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at(&self, m: usize, p: usize) -> f64 {
        self.values[p * self.grid.n + m]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    pub fn is_identically_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(&self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        Self::from_raw(
            &self.grid,
            self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| v * s)
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    fn ensure_finite(&self) -> Result<(), GridError> {
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(idx) => {
                let (x, y) = self.grid.coords(idx);
                Err(GridError::NonFinite { x, y })
            }
            None => Ok(()),
        }
    }
}

/// `Δf = −(f_xx + f_yy)`, spectrally.
pub fn laplacian(f: &ScalarField) -> Result<ScalarField, GridError> {
    f.ensure_finite()?;
    let mut spec = Spectrum::forward(f);
    spec.apply_laplacian();
    Ok(spec.inverse())
}

/// `∫ f` over the unit torus (pairwise-summed sample mean).
pub fn integrate(f: &ScalarField) -> f64 {
    pairwise_sum(&f.values) / f.values.len() as f64
}

/// `∫ f g`.
pub fn inner(f: &ScalarField, g: &ScalarField) -> f64 {
    assert_eq!(f.grid, g.grid, "grid mismatch");
    let prod: Vec<f64> = f.values.iter().zip(&g.values).map(|(a, b)| a * b).collect();
    pairwise_sum(&prod) / prod.len() as f64
}

/// `∫ |∇f|² = Σ_k 4π²|k|² |f̂_k|²`.
pub fn dirichlet(f: &ScalarField) -> f64 {
    Spectrum::forward(f).dirichlet_energy()
}

/// The zero-mean solution of `Δf = g`.
pub fn poisson_solve(g: &ScalarField) -> Result<ScalarField, GridError> {
    g.ensure_finite()?;
    let mean = integrate(g);
    if mean.abs() > POISSON_MEAN_TOL * g.max_abs().max(1.0) {
        return Err(GridError::NonZeroMean { mean });
    }
    let mut spec = Spectrum::forward(g);
    spec.apply_shifted_inverse(0.0);
    Ok(spec.inverse())
}

/// `(Δ + μ)⁻¹ g`; for `μ = 0` the mean mode is sent to zero.
pub fn shifted_inverse(g: &ScalarField, mu: f64) -> ScalarField {
    let mut spec = Spectrum::forward(g);
    spec.apply_shifted_inverse(mu);
    spec.inverse()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    const TWO_PI: f64 = 2.0 * PI;

    fn grid(n: usize) -> PeriodicGrid {
        PeriodicGrid::new(n).unwrap()
    }

    fn max_diff(a: &ScalarField, b: &ScalarField) -> f64 {
        a.sub(b).max_abs()
    }

    /// Random real trigonometric polynomial with modes |k_i| ≤ kmax.
    fn band_limited(g: &PeriodicGrid, coeffs: &[(i32, i32, f64, f64)]) -> ScalarField {
        ScalarField::from_fn(g, |x, y| {
            coeffs
                .iter()
                .map(|&(k1, k2, a, b)| {
                    let ph = TWO_PI * (k1 as f64 * x + k2 as f64 * y);
                    a * ph.cos() + b * ph.sin()
                })
                .sum()
        })
        .unwrap()
    }

    fn coeff_strategy() -> impl Strategy<Value = Vec<(i32, i32, f64, f64)>> {
        prop::collection::vec((-5i32..=5, -5i32..=5, -1.0f64..1.0, -1.0f64..1.0), 1..6)
    }

    #[test]
    fn grid_size_validation() {
        assert!(PeriodicGrid::new(4).is_err());
        assert!(PeriodicGrid::new(48).is_err());
        assert!(PeriodicGrid::new(8).is_ok());
    }

    #[test]
    fn laplacian_examples() {
        let g = grid(32);
        let f = ScalarField::from_fn(&g, |x, _| (TWO_PI * x).cos()).unwrap();
        let expected = f.scale(4.0 * PI * PI);
        assert!(max_diff(&laplacian(&f).unwrap(), &expected) < 1e-11);

        let c = ScalarField::constant(&g, 7.0);
        assert!(laplacian(&c).unwrap().max_abs() < 1e-12);

        let f = ScalarField::from_fn(&g, |x, y| (TWO_PI * x).sin() + (2.0 * TWO_PI * y).sin()).unwrap();
        let expected = ScalarField::from_fn(&g, |x, y| {
            4.0 * PI * PI * (TWO_PI * x).sin() + 16.0 * PI * PI * (2.0 * TWO_PI * y).sin()
        })
        .unwrap();
        assert!(max_diff(&laplacian(&f).unwrap(), &expected) < 1e-10);
    }

    #[test]
    fn nyquist_mode_is_cosine_only() {
        let g = grid(8);
        // cos(π n x) at n = 8 is the Nyquist mode; k = 4.
        let f = ScalarField::from_fn(&g, |x, _| (TWO_PI * 4.0 * x).cos()).unwrap();
        let lap = laplacian(&f).unwrap();
        assert!(max_diff(&lap, &f.scale(4.0 * PI * PI * 16.0)) < 1e-10);
    }

    #[test]
    fn integrate_examples() {
        let g = grid(16);
        assert_eq!(integrate(&ScalarField::constant(&g, 1.0)), 1.0);
        let s = ScalarField::from_fn(&g, |x, _| (TWO_PI * x).sin()).unwrap();
        assert!(integrate(&s).abs() < 1e-15);
        let c2 = ScalarField::from_fn(&g, |x, _| (TWO_PI * x).cos().powi(2)).unwrap();
        assert!((integrate(&c2) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn dirichlet_examples() {
        let g = grid(16);
        assert_eq!(dirichlet(&ScalarField::constant(&g, 3.0)), 0.0);
        let f = ScalarField::from_fn(&g, |x, _| (TWO_PI * x).cos()).unwrap();
        assert!((dirichlet(&f) - 2.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn poisson_examples() {
        let g = grid(32);
        let rhs = ScalarField::from_fn(&g, |x, _| 4.0 * PI * PI * (TWO_PI * x).cos()).unwrap();
        let expected = ScalarField::from_fn(&g, |x, _| (TWO_PI * x).cos()).unwrap();
        assert!(max_diff(&poisson_solve(&rhs).unwrap(), &expected) < 1e-13);
        assert!(poisson_solve(&ScalarField::zeros(&g)).unwrap().max_abs() == 0.0);
        assert!(matches!(
            poisson_solve(&ScalarField::constant(&g, 1.0)),
            Err(GridError::NonZeroMean { .. })
        ));
    }

    #[test]
    fn non_finite_samples_are_rejected() {
        let g = grid(8);
        let mut v = vec![0.0; 64];
        v[9] = f64::NAN;
        match ScalarField::new(&g, v) {
            Err(GridError::NonFinite { x, y }) => assert_eq!((x, y), (1.0 / 8.0, 1.0 / 8.0)),
            other => panic!("{other:?}"),
        }
        assert!(ScalarField::new(&g, vec![0.0; 10]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn dirichlet_matches_weak_form(c in coeff_strategy()) {
            let g = grid(32);
            let f = band_limited(&g, &c);
            let d = dirichlet(&f);
            let weak = inner(&f, &laplacian(&f).unwrap());
            prop_assert!((d - weak).abs() <= 1e-12 * d.abs().max(1e-300) + 1e-13);
        }

        #[test]
        fn laplacian_is_self_adjoint(a in coeff_strategy(), b in coeff_strategy()) {
            let g = grid(32);
            let f = band_limited(&g, &a);
            let h = band_limited(&g, &b);
            let lhs = inner(&f, &laplacian(&h).unwrap());
            let rhs = inner(&h, &laplacian(&f).unwrap());
            let scale = lhs.abs().max(rhs.abs()).max(1.0);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * scale);
        }

        #[test]
        fn laplacian_is_positive_semidefinite(a in coeff_strategy()) {
            let g = grid(16);
            let f = band_limited(&g, &a);
            prop_assert!(inner(&f, &laplacian(&f).unwrap()) >= -1e-12);
        }

        #[test]
        fn poisson_inverts_laplacian(a in coeff_strategy()) {
            let g = grid(32);
            let f = band_limited(&g, &a);
            let back = poisson_solve(&laplacian(&f).unwrap()).unwrap();
            let mean = integrate(&f);
            let expected = f.map(|v| v - mean);
            prop_assert!(max_diff(&back, &expected) < 1e-11);

            // Random zero-mean right-hand side, absolute tolerance.
            let rhs = f.map(|v| v - mean);
            let round = laplacian(&poisson_solve(&rhs).unwrap()).unwrap();
            prop_assert!(max_diff(&round, &rhs) < 1e-11);
        }
    }
}
