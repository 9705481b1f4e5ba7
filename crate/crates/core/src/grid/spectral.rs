//! 2-D FFT plumbing. Coefficients are mean-normalized: `f̂_k = n⁻² Σ f e^{−2πi k·x}`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{pairwise_sum, PeriodicGrid, ScalarField};

/// Row batches below this many samples are transformed serially.
const PARALLEL_MIN: usize = 256 * 256;

pub(crate) struct SpectralPlan {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// `4π²(k₁² + k₂²)` in storage order.
    symbol: Vec<f64>,
}

impl SpectralPlan {
    pub(crate) fn shared(n: usize) -> Arc<Self> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<SpectralPlan>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        let mut map = cache.lock().expect("plan cache poisoned");
        map.entry(n).or_insert_with(|| Arc::new(Self::new(n))).clone()
    }

    fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let freq = |i: usize| -> f64 {
            if i < n / 2 {
                i as f64
            } else {
                i as f64 - n as f64
            }
        };
        let mut symbol = Vec::with_capacity(n * n);
        for p in 0..n {
            for m in 0..n {
                let (k1, k2) = (freq(m), freq(p));
                symbol.push(4.0 * PI * PI * (k1 * k1 + k2 * k2));
            }
        }
        Self { n, forward, inverse, symbol }
    }

    fn rows(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        if data.len() >= PARALLEL_MIN {
            data.par_chunks_mut(n * 16).for_each(|chunk| fft.process(chunk));
        } else {
            fft.process(data);
        }
    }

    fn transform(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        self.rows(data, fft);
        transpose(data, self.n);
        self.rows(data, fft);
        transpose(data, self.n);
    }
}

fn transpose(data: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in i + 1..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}

/// Fourier coefficients of a [`ScalarField`].
pub struct Spectrum {
    grid: PeriodicGrid,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn forward(f: &ScalarField) -> Self {
        let grid = f.grid().clone();
        let plan = grid.plan();
        let mut coeffs: Vec<Complex64> = f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        plan.transform(&mut coeffs, &plan.forward);
        let norm = 1.0 / (grid.len() as f64);
        for c in coeffs.iter_mut() {
            *c *= norm;
        }
        Self { grid, coeffs }
    }

    pub fn inverse(mut self) -> ScalarField {
        let plan = self.grid.plan();
        plan.transform(&mut self.coeffs, &plan.inverse);
        let values = self.coeffs.iter().map(|c| c.re).collect();
        ScalarField::from_raw(&self.grid, values)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn apply_laplacian(&mut self) {
        for (c, s) in self.coeffs.iter_mut().zip(&self.grid.plan().symbol) {
            *c *= *s;
        }
    }

    /// Multiplies mode `k` by `1/(4π²|k|² + μ)`; the mean mode is zeroed when `μ = 0`.
    pub fn apply_shifted_inverse(&mut self, mu: f64) {
        for (c, s) in self.coeffs.iter_mut().zip(&self.grid.plan().symbol) {
            let d = s + mu;
            *c = if d == 0.0 { Complex64::new(0.0, 0.0) } else { *c / d };
        }
    }

    pub fn dirichlet_energy(&self) -> f64 {
        let terms: Vec<f64> = self
            .coeffs
            .iter()
            .zip(&self.grid.plan().symbol)
            .map(|(c, s)| s * c.norm_sqr())
            .collect();
        pairwise_sum(&terms)
    }
}
