//! The trace-zero space `V = {x ∈ R^r : Σ x_i = 0}`, the root vectors
//! `v_{i,j} = u_i − u_j` and degree vectors.
//!
//! Indices are 1-based everywhere in the public surface.

use std::fmt;

use num_traits::{FromPrimitive, Num, Zero};
use thiserror::Error;

use crate::exact::Rational;

/// Relative tolerance for the float trace-zero check.
pub const FLOAT_TRACE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WeightError {
    #[error("rank must be at least 2, got {0}")]
    RankTooSmall(usize),
    #[error("index ({i},{j}) out of range 1..={r}")]
    OutOfRange { i: usize, j: usize, r: usize },
    #[error("diagonal pair ({0},{0}) is not a root")]
    Diagonal(usize),
    #[error("pair ({i},{j}) listed twice")]
    Duplicate { i: usize, j: usize },
    #[error("vector has {got} entries, expected {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("entries do not sum to zero")]
    NotTraceZero,
}

/// An ordered pair `(i, j)`, `i ≠ j`, naming the root `v_{i,j}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RootPair {
    pub i: usize,
    pub j: usize,
}

impl RootPair {
    pub const fn new(i: usize, j: usize) -> Self {
        Self { i, j }
    }

    pub fn reversed(self) -> Self {
        Self { i: self.j, j: self.i }
    }

    /// `(v_{i,j}, x) = x_i − x_j` for a 1-based pair.
    #[inline]
    pub fn pair_with(self, x: &[f64]) -> f64 {
        x[self.i - 1] - x[self.j - 1]
    }
}

impl fmt::Display for RootPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.i, self.j)
    }
}

/// Rank `r` plus the ordered set of active pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightSystem {
    r: usize,
    active: Vec<RootPair>,
}

impl WeightSystem {
    pub fn new(r: usize, active: impl IntoIterator<Item = RootPair>) -> Result<Self, WeightError> {
        if r < 2 {
            return Err(WeightError::RankTooSmall(r));
        }
        let mut out: Vec<RootPair> = Vec::new();
        for p in active {
            check_pair(r, p)?;
            if out.contains(&p) {
                return Err(WeightError::Duplicate { i: p.i, j: p.j });
            }
            out.push(p);
        }
        Ok(Self { r, active: out })
    }

    /// The cyclic pattern `(2,1), (3,2), …, (r,r−1), (1,r)`.
    pub fn cyclic(r: usize) -> Result<Self, WeightError> {
        let pairs = (1..r)
            .map(|k| RootPair::new(k + 1, k))
            .chain(std::iter::once(RootPair::new(1, r)));
        Self::new(r, pairs)
    }

    pub fn rank(&self) -> usize {
        self.r
    }

    pub fn active(&self) -> &[RootPair] {
        &self.active
    }

    pub fn root_vector<T: Coefficient>(&self, i: usize, j: usize) -> Result<TraceZeroVector<T>, WeightError> {
        root_vector(self.r, i, j)
    }
}

fn check_pair(r: usize, p: RootPair) -> Result<(), WeightError> {
    if p.i == 0 || p.j == 0 || p.i > r || p.j > r {
        return Err(WeightError::OutOfRange { i: p.i, j: p.j, r });
    }
    if p.i == p.j {
        return Err(WeightError::Diagonal(p.i));
    }
    Ok(())
}

/// Scalars a [`TraceZeroVector`] may hold.
pub trait Coefficient: Num + Clone + FromPrimitive + fmt::Debug {
    fn sums_to_zero(entries: &[Self]) -> bool;
}

impl Coefficient for f64 {
    fn sums_to_zero(entries: &[Self]) -> bool {
        let scale = entries.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let sum: f64 = entries.iter().sum();
        sum.abs() <= FLOAT_TRACE_TOL * scale
    }
}

impl Coefficient for Rational {
    fn sums_to_zero(entries: &[Self]) -> bool {
        entries.iter().fold(Rational::zero(), |acc, x| acc + x).is_zero()
    }
}

/// A vector in `V`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceZeroVector<T = Rational> {
    entries: Vec<T>,
}

impl<T: Coefficient> TraceZeroVector<T> {
    pub fn new(entries: Vec<T>) -> Result<Self, WeightError> {
        if !T::sums_to_zero(&entries) {
            return Err(WeightError::NotTraceZero);
        }
        Ok(Self { entries })
    }

    pub fn zero(r: usize) -> Self {
        Self { entries: vec![T::zero(); r] }
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<T> {
        self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn dot(&self, other: &Self) -> T {
        self.entries
            .iter()
            .zip(&other.entries)
            .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
    }

    pub fn scaled(&self, s: &T) -> Self {
        Self { entries: self.entries.iter().map(|x| x.clone() * s.clone()).collect() }
    }

    pub fn neg(&self) -> Self {
        Self { entries: self.entries.iter().map(|x| T::zero() - x.clone()).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a.clone() + b.clone()).collect(),
        }
    }
}

impl TraceZeroVector<Rational> {
    pub fn to_f64(&self) -> TraceZeroVector<f64> {
        TraceZeroVector { entries: self.entries.iter().map(crate::exact::to_f64).collect() }
    }
}

impl<T: fmt::Display> fmt::Display for TraceZeroVector<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, x) in self.entries.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

/// `v_{i,j} = u_i − u_j` in `R^r`.
pub fn root_vector<T: Coefficient>(r: usize, i: usize, j: usize) -> Result<TraceZeroVector<T>, WeightError> {
    check_pair(r, RootPair::new(i, j))?;
    let mut e = vec![T::zero(); r];
    e[i - 1] = T::one();
    e[j - 1] = T::zero() - T::one();
    Ok(TraceZeroVector { entries: e })
}

/// `x − mean(x)·(1,…,1)`.
pub fn project_trace_zero<T: Coefficient>(x: &[T]) -> TraceZeroVector<T> {
    if x.is_empty() {
        return TraceZeroVector { entries: Vec::new() };
    }
    let sum = x.iter().fold(T::zero(), |acc, v| acc + v.clone());
    let mean = sum / T::from_usize(x.len()).expect("dimension fits the scalar type");
    TraceZeroVector { entries: x.iter().map(|v| v.clone() - mean.clone()).collect() }
}
