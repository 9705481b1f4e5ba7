//! The restricted energy
//!
//! ```text
//! M(ξ) = ∫ ¼|∇ξ|² + Σ_active ∫ ½c (e^{(v,ξ)} − 1) + Σ_j ∫ a_j f_j
//! ```
//!
//! with `M(0) = 0`, its L² gradient `½Δξ + Σ ½c e^{(v,ξ)} v + a` (half the
//! equation residual) and second variation
//! `Q(η) = ½∫|∇η|² + Σ ∫ ½c e^{(v,ξ)} (v,η)²`.

mod path;
mod scan;

use std::fmt;

use thiserror::Error;

pub use path::{gauss_legendre, m_path_integral, MetricPath, PolygonalPath, PowerPath, StraightPath};
pub use scan::{geodesic_scan, write_scan_csv, Asymptotics, GeodesicScan, QuadraticEnvelope, ScanPoint};

use crate::grid::{self, pairwise_sum, ScalarField};
use crate::problem::{HiggsProblem, Potential, ProblemError};
use crate::weights::RootPair;

/// Largest exponent `(v,ξ)` evaluated on the support of `c`.
pub const MAX_EXPONENT: f64 = 700.0;

#[derive(Debug, Error)]
pub enum FunctionalError {
    #[error("exponential overflow on pair {pair}: exponent reaches {max_exponent:.6e}")]
    Overflow { pair: RootPair, max_exponent: f64 },
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown {
    pub dirichlet: f64,
    pub exponential: f64,
    pub linear: f64,
    pub total: f64,
}

impl fmt::Display for EnergyBreakdown {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "total = {:.15e} (dirichlet {:.6e}, exponential {:.6e}, linear {:.6e})",
            self.total, self.dirichlet, self.exponential, self.linear
        )
    }
}

/// `c·e^{(v,ξ)}` per active pair, zero wherever `c = 0`.
pub(crate) fn weighted_exponentials(p: &HiggsProblem, xi: &Potential) -> Result<Vec<ScalarField>, FunctionalError> {
    p.check_potential(xi)?;
    p.terms()
        .map(|(pair, c)| {
            let s = xi.pair_with(pair);
            let max_exponent = c
                .values()
                .iter()
                .zip(s.values())
                .filter(|(&cv, _)| cv > 0.0)
                .map(|(_, &sv)| sv)
                .fold(f64::NEG_INFINITY, f64::max);
            if max_exponent > MAX_EXPONENT {
                return Err(FunctionalError::Overflow { pair, max_exponent });
            }
            Ok(c.zip_map(&s, |cv, sv| if cv > 0.0 { cv * sv.exp() } else { 0.0 }))
        })
        .collect()
}

pub fn m_restricted(p: &HiggsProblem, xi: &Potential) -> Result<EnergyBreakdown, FunctionalError> {
    let ce = weighted_exponentials(p, xi)?;
    Ok(energy_from(p, xi, &ce))
}

pub(crate) fn energy_from(p: &HiggsProblem, xi: &Potential, ce: &[ScalarField]) -> EnergyBreakdown {
    let dir: Vec<f64> = xi.planes().iter().map(grid::dirichlet).collect();
    let dirichlet = 0.25 * pairwise_sum(&dir);
    let exp_terms: Vec<f64> = ce
        .iter()
        .zip(p.c())
        .map(|(w, c)| 0.5 * (grid::integrate(w) - grid::integrate(c)))
        .collect();
    let exponential = pairwise_sum(&exp_terms);
    let lin: Vec<f64> = p.a().iter().zip(xi.planes()).map(|(a, f)| grid::inner(a, f)).collect();
    let linear = pairwise_sum(&lin);
    EnergyBreakdown { dirichlet, exponential, linear, total: dirichlet + exponential + linear }
}

/// `scale·(Δξ + Σ c e v) + offset`, projected to trace zero. Both the gradient
/// and the residual go through here so that `R = 2∇M` holds bit for bit.
fn combine(
    p: &HiggsProblem,
    xi: &Potential,
    ce: &[ScalarField],
    scale: f64,
    offset: &[ScalarField],
) -> Result<Potential, FunctionalError> {
    let mut planes = Vec::with_capacity(p.rank());
    for f in xi.planes() {
        planes.push(grid::laplacian(f).map_err(ProblemError::from)?.scale(scale).into_values());
    }
    for ((pair, _), w) in p.terms().zip(ce) {
        for (idx, &v) in w.values().iter().enumerate() {
            let t = scale * v;
            planes[pair.i - 1][idx] += t;
            planes[pair.j - 1][idx] -= t;
        }
    }
    let fields = planes
        .into_iter()
        .zip(offset)
        .map(|(vals, off)| ScalarField::from_raw(p.grid(), vals).add(off))
        .collect();
    Ok(Potential::project_unchecked(fields))
}

pub fn gradient(p: &HiggsProblem, xi: &Potential) -> Result<Potential, FunctionalError> {
    let ce = weighted_exponentials(p, xi)?;
    gradient_from(p, xi, &ce)
}

pub(crate) fn gradient_from(p: &HiggsProblem, xi: &Potential, ce: &[ScalarField]) -> Result<Potential, FunctionalError> {
    combine(p, xi, ce, 0.5, p.a())
}

/// `R(ξ) = Δξ + Σ c e^{(v,ξ)} v − b`.
pub fn residual_mu(p: &HiggsProblem, xi: &Potential) -> Result<Potential, FunctionalError> {
    let ce = weighted_exponentials(p, xi)?;
    let minus_b: Vec<ScalarField> = p.b().iter().map(|b| b.scale(-1.0)).collect();
    combine(p, xi, &ce, 1.0, &minus_b)
}

pub fn second_variation(p: &HiggsProblem, xi: &Potential, eta: &Potential) -> Result<f64, FunctionalError> {
    let ce = weighted_exponentials(p, xi)?;
    p.check_potential(eta)?;
    Ok(second_variation_from(p, eta, &ce))
}

pub(crate) fn second_variation_from(p: &HiggsProblem, eta: &Potential, ce: &[ScalarField]) -> f64 {
    let dir: Vec<f64> = eta.planes().iter().map(grid::dirichlet).collect();
    let exp_terms: Vec<f64> = p
        .terms()
        .zip(ce)
        .map(|((pair, _), w)| {
            let s = eta.pair_with(pair);
            0.5 * grid::inner(w, &s.mul(&s))
        })
        .collect();
    0.5 * pairwise_sum(&dir) + pairwise_sum(&exp_terms)
}

/// `H(ξ)η = ½Δη + Σ ½c e^{(v,ξ)} (v,η) v`.
pub(crate) fn hessian_apply(p: &HiggsProblem, eta: &Potential, ce: &[ScalarField]) -> Result<Potential, FunctionalError> {
    let mut planes = Vec::with_capacity(p.rank());
    for f in eta.planes() {
        planes.push(grid::laplacian(f).map_err(ProblemError::from)?.scale(0.5).into_values());
    }
    for ((pair, _), w) in p.terms().zip(ce) {
        let s = eta.pair_with(pair);
        for (idx, (&wv, &sv)) in w.values().iter().zip(s.values()).enumerate() {
            let t = 0.5 * wv * sv;
            planes[pair.i - 1][idx] += t;
            planes[pair.j - 1][idx] -= t;
        }
    }
    Ok(Potential::project_unchecked(
        planes.into_iter().map(|v| ScalarField::from_raw(p.grid(), v)).collect(),
    ))
}

/// `λ_{i,j} = (1/4π) ∫ c e^{(v,ξ)}` per active pair. At a solution
/// `Σ λ v = −γ`, so positive values witness the cone condition.
pub fn integrated_witness(p: &HiggsProblem, xi: &Potential) -> Result<Vec<(RootPair, f64)>, FunctionalError> {
    let ce = weighted_exponentials(p, xi)?;
    Ok(p.ws()
        .active()
        .iter()
        .zip(&ce)
        .map(|(&pair, w)| (pair, grid::integrate(w) / (4.0 * std::f64::consts::PI)))
        .collect())
}
