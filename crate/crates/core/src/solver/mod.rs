//! Newton–CG minimization of the restricted energy.
//!
//! Each outer step solves `H(ξ)δ = −∇M(ξ)` by preconditioned conjugate
//! gradients on the complement of the flat subspace, then backtracks on `M`.
//! Constant directions annihilated by every active root carry only the linear
//! term; a nonzero drift there means `M` is unbounded below, and the iterate is
//! marched out along it until it leaves the divergence radius.

mod flat;
mod report;

use thiserror::Error;

pub use flat::{flat_subspace, FlatSubspace};
pub use report::{IterationRecord, SolveReport, SolveStatus};

use crate::cone::DEFAULT_DENOMINATOR;
use crate::functional::{self, FunctionalError};
use crate::grid::{self, ScalarField};
use crate::problem::{HiggsProblem, Potential, ProblemError};

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Target on `‖R(ξ)‖_∞`.
    pub tol: f64,
    pub max_iter: usize,
    pub divergence_radius: f64,
    pub initial: Option<Potential>,
    pub max_cg_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 200, divergence_radius: 1e3, initial: None, max_cg_iter: 500 }
    }
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Functional(#[from] FunctionalError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("conjugate gradients broke down on the first iteration of Newton step {newton_step} (curvature {curvature:e})")]
    CgBreakdown { newton_step: usize, curvature: f64 },
    #[error("solver options are invalid: {0}")]
    Options(String),
}

const ARMIJO: f64 = 1e-4;
const LINE_SEARCH_SLACK: f64 = 1e-12;
const MIN_STEP: f64 = 1.0 / (1u64 << 40) as f64;
/// Relative size of the flat drift treated as structural rather than round-off.
const DRIFT_TOL: f64 = 1e-10;

pub fn solve(p: &HiggsProblem, opts: &SolveOptions) -> Result<(Potential, SolveReport), SolveError> {
    if !(opts.tol > 0.0) || !(opts.divergence_radius > 0.0) {
        return Err(SolveError::Options(format!(
            "tol {} and divergence_radius {} must be positive",
            opts.tol, opts.divergence_radius
        )));
    }
    let flat = flat_subspace(p);
    let mut xi = match &opts.initial {
        Some(x0) => {
            p.check_potential(x0)?;
            flat.remove(&Potential::projected(x0.planes().to_vec())?)
        }
        None => p.zero_potential(),
    };
    let mu = preconditioner_shift(p);

    let a_means: Vec<f64> = p.a().iter().map(grid::integrate).collect();
    let drift = flat.drift(&a_means);
    let drift_norm = drift.iter().map(|d| d * d).sum::<f64>().sqrt();
    let drift_scale = a_means.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);

    let mut history = Vec::new();
    let mut cg_truncations = 0;
    let mut status = SolveStatus::MaxIterations;
    let mut iterations = 0;

    if drift_norm > DRIFT_TOL * drift_scale {
        let dir: Vec<f64> = drift.iter().map(|d| -d / drift_norm).collect();
        let step_field = Potential::constant(p.grid(), &dir)?;
        let mut step = 1.0;
        loop {
            let e = functional::m_restricted(p, &xi)?;
            let g = functional::gradient(p, &xi)?;
            history.push(IterationRecord { iter: iterations, energy: e.total, grad_norm: g.l2_norm(), xi_norm: xi.l2_norm() });
            if xi.l2_norm() > opts.divergence_radius {
                status = SolveStatus::DivergenceDetected;
                break;
            }
            xi = xi.axpy(step, &step_field);
            step *= 2.0;
            iterations += 1;
        }
    } else {
        loop {
            let ce = functional::weighted_exponentials(p, &xi)?;
            let energy = functional::energy_from(p, &xi, &ce).total;
            let g_raw = functional::gradient_from(p, &xi, &ce)?;
            let res_inf = 2.0 * g_raw.max_abs();
            let g = flat.remove(&g_raw);
            history.push(IterationRecord { iter: iterations, energy, grad_norm: g.l2_norm(), xi_norm: xi.l2_norm() });
            if res_inf <= opts.tol {
                status = SolveStatus::Converged;
                break;
            }
            if iterations >= opts.max_iter {
                break;
            }
            let forcing = g.l2_norm().min(0.1);
            let (mut delta, truncated) = newton_direction(p, &flat, &ce, &g, mu, forcing, opts.max_cg_iter)
                .map_err(|curvature| SolveError::CgBreakdown { newton_step: iterations, curvature })?;
            cg_truncations += truncated as usize;
            let mut slope = g.inner(&delta);
            if !(slope < 0.0) {
                delta = precondition(&flat, &g, mu).scaled(-1.0);
                slope = g.inner(&delta);
            }
            let Some((next, next_energy)) = line_search(p, &xi, energy, &delta, slope) else {
                break;
            };
            xi = flat.remove(&next);
            iterations += 1;
            if xi.l2_norm() > opts.divergence_radius && next_energy < energy {
                let g = functional::gradient(p, &xi)?;
                history.push(IterationRecord { iter: iterations, energy: next_energy, grad_norm: g.l2_norm(), xi_norm: xi.l2_norm() });
                status = SolveStatus::DivergenceDetected;
                break;
            }
        }
    }

    let (residual_linf, residual_l2) = match functional::residual_mu(p, &xi) {
        Ok(r) => (r.max_abs(), r.l2_norm()),
        Err(FunctionalError::Overflow { .. }) => (f64::INFINITY, f64::INFINITY),
        Err(e) => return Err(e.into()),
    };
    let certificate_cross_check = p
        .cone_certificate(DEFAULT_DENOMINATOR)
        .map(|(cert, _)| cert)
        .map_err(|e| e.to_string());
    let report = SolveReport {
        status,
        iterations,
        residual_linf,
        residual_l2,
        energy_history: history,
        flat_subspace_dim: flat.dim(),
        flat_drift: drift_norm,
        cg_truncations,
        gamma: p.gamma().to_vec(),
        certificate_cross_check,
    };
    Ok((xi, report))
}

/// `μ = max(mean c, 1e-8)`.
fn preconditioner_shift(p: &HiggsProblem) -> f64 {
    if p.c().is_empty() {
        return 1e-8;
    }
    let total: f64 = p.c().iter().map(grid::integrate).sum();
    (total / p.c().len() as f64).max(1e-8)
}

/// `z = 2(Δ + μ)⁻¹ r` planewise, with the flat part removed.
fn precondition(flat: &FlatSubspace, r: &Potential, mu: f64) -> Potential {
    let planes: Vec<ScalarField> = r.planes().iter().map(|f| grid::shifted_inverse(f, mu).scale(2.0)).collect();
    flat.remove(&Potential::project_unchecked(planes))
}

/// Inexact Newton direction by PCG. `Err(curvature)` on first-step breakdown;
/// the flag reports a later breakdown that truncated the iteration.
fn newton_direction(
    p: &HiggsProblem,
    flat: &FlatSubspace,
    ce: &[ScalarField],
    g: &Potential,
    mu: f64,
    forcing: f64,
    max_iter: usize,
) -> Result<(Potential, bool), f64> {
    let g_norm = g.l2_norm();
    let mut x = p.zero_potential();
    let mut r = g.scaled(-1.0);
    let mut z = precondition(flat, &r, mu);
    let mut dir = z.clone();
    let mut rz = r.inner(&z);
    for k in 0..max_iter {
        let h_dir = match functional::hessian_apply(p, &dir, ce) {
            Ok(h) => flat.remove(&h),
            Err(_) => return if k == 0 { Err(f64::NAN) } else { Ok((x, true)) },
        };
        let curvature = dir.inner(&h_dir);
        if !(curvature > 0.0) || !curvature.is_finite() {
            return if k == 0 { Err(curvature) } else { Ok((x, true)) };
        }
        let alpha = rz / curvature;
        x = x.axpy(alpha, &dir);
        r = r.axpy(-alpha, &h_dir);
        if r.l2_norm() <= forcing * g_norm {
            break;
        }
        z = precondition(flat, &r, mu);
        let rz_next = r.inner(&z);
        dir = z.axpy(rz_next / rz, &dir);
        rz = rz_next;
    }
    Ok((x, false))
}

/// Backtracking Armijo search; `None` when no step down to `MIN_STEP` is accepted.
fn line_search(
    p: &HiggsProblem,
    xi: &Potential,
    energy: f64,
    delta: &Potential,
    slope: f64,
) -> Option<(Potential, f64)> {
    let slack = LINE_SEARCH_SLACK * energy.abs().max(1.0);
    let mut step = 1.0;
    while step >= MIN_STEP {
        let trial = xi.axpy(step, delta);
        if let Ok(e) = functional::m_restricted(p, &trial) {
            if e.total <= energy + ARMIJO * step * slope + slack {
                return Some((trial, e.total));
            }
        }
        step *= 0.5;
    }
    None
}

#[cfg(test)]
mod tests;
