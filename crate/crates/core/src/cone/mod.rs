//! Strict positive-cone membership `−γ ∈ Σ_{active} R_{>0} v_{i,j}`, decided
//! exactly, with a certificate for either answer.
//!
//! Feasibility is decided by the auxiliary program
//!
//! ```text
//! maximize t   s.t.   λ_p ≥ t,  Σ_p λ_p v_p = −γ,  0 ≤ t ≤ 1
//! ```
//!
//! solved by an exact Bland-rule simplex; strict membership holds iff the
//! optimum has `t > 0`. When it fails, a direction `w ∈ V` with
//! `(v_p, w) ≤ 0` for every active pair and `(−γ, w) ≥ 0` is produced, with
//! `(−γ, w) > 0` whenever such a separating direction exists. If `−γ` lies on
//! the boundary of the closed cone no separating direction exists; the
//! certificate then has `(−γ, w) = 0` and some `(v_p, w) < 0`, which rules out
//! every strictly positive combination just the same.

mod oracle;
pub mod simplex;

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::exact::{self, rat, Rational};
use crate::weights::{RootPair, TraceZeroVector, WeightError, WeightSystem};

pub use oracle::oracle_condition_v;
use simplex::{LpOutcome, StandardLp};

/// Denominator used when rationalizing float degree vectors.
pub const DEFAULT_DENOMINATOR: i64 = 1_000_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConeError {
    #[error("degree vector has {got} entries but rank is {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("degree vector entry {index} is not finite")]
    NonFinite { index: usize },
    #[error("oracle size bound exceeded: r = {r}, active = {active} (max r = 6, active = 12)")]
    OracleTooLarge { r: usize, active: usize },
    #[error("internal error: certificate failed exact verification")]
    UnsoundCertificate,
    #[error(transparent)]
    Weight(#[from] WeightError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeStatus {
    Feasible,
    Infeasible,
}

impl fmt::Display for ConeStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConeStatus::Feasible => "Feasible",
            ConeStatus::Infeasible => "Infeasible",
        })
    }
}

/// Which form of infeasibility witness was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FarkasKind {
    /// `(−γ, w) > 0`: `−γ` is outside the closed cone.
    Separating,
    /// `(−γ, w) = 0` with some `(v_p, w) < 0`: `−γ` is on the boundary.
    Boundary,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConeVerdict {
    Feasible { lambda: Vec<(RootPair, Rational)> },
    Infeasible { farkas_w: TraceZeroVector<Rational>, kind: FarkasKind },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeCertificate {
    pub verdict: ConeVerdict,
    /// Rank of the active roots inside `V` (`r − 1` when they span).
    pub span_rank: usize,
    /// Max-norm distance between the float degree vector and its rational
    /// stand-in; `None` for exact input.
    pub rounding_radius: Option<f64>,
}

impl ConeCertificate {
    pub fn status(&self) -> ConeStatus {
        match self.verdict {
            ConeVerdict::Feasible { .. } => ConeStatus::Feasible,
            ConeVerdict::Infeasible { .. } => ConeStatus::Infeasible,
        }
    }

    pub fn farkas_w(&self) -> Option<&TraceZeroVector<Rational>> {
        match &self.verdict {
            ConeVerdict::Infeasible { farkas_w, .. } => Some(farkas_w),
            ConeVerdict::Feasible { .. } => None,
        }
    }

    pub fn lambda(&self) -> Option<&[(RootPair, Rational)]> {
        match &self.verdict {
            ConeVerdict::Feasible { lambda } => Some(lambda),
            ConeVerdict::Infeasible { .. } => None,
        }
    }

    /// Exact post-hoc soundness check against the data it certifies.
    pub fn verify(&self, ws: &WeightSystem, gamma: &TraceZeroVector<Rational>) -> bool {
        let r = ws.rank();
        let neg_gamma: Vec<Rational> = gamma.entries().iter().map(|g| -g.clone()).collect();
        match &self.verdict {
            ConeVerdict::Feasible { lambda } => {
                if lambda.len() != ws.active().len() {
                    return false;
                }
                let mut sum = vec![Rational::zero(); r];
                for (p, l) in lambda {
                    if !l.is_positive() || !ws.active().contains(p) {
                        return false;
                    }
                    sum[p.i - 1] += l;
                    sum[p.j - 1] -= l;
                }
                sum == neg_gamma
            }
            ConeVerdict::Infeasible { farkas_w, kind } => {
                let w = farkas_w.entries();
                if w.len() != r || w.iter().fold(Rational::zero(), |a, x| a + x) != Rational::zero() {
                    return false;
                }
                let pairings: Vec<Rational> =
                    ws.active().iter().map(|p| &w[p.i - 1] - &w[p.j - 1]).collect();
                if pairings.iter().any(Signed::is_positive) {
                    return false;
                }
                let g = exact::dot(&neg_gamma, w);
                match kind {
                    FarkasKind::Separating => g.is_positive(),
                    FarkasKind::Boundary => g.is_zero() && pairings.iter().any(Signed::is_negative),
                }
            }
        }
    }

    /// Farkas direction as machine integers, when it fits.
    pub fn farkas_integers(&self) -> Option<Vec<i64>> {
        self.farkas_w().map(|w| {
            w.entries()
                .iter()
                .map(|x| i64::try_from(x.to_integer()).unwrap_or(i64::MAX))
                .collect()
        })
    }
}

impl fmt::Display for ConeCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "status: {}", self.status())?;
        match &self.verdict {
            ConeVerdict::Feasible { lambda } => {
                for (p, l) in lambda {
                    writeln!(f, "lambda{p}: {l}")?;
                }
            }
            ConeVerdict::Infeasible { farkas_w, kind } => {
                writeln!(f, "farkas_w: {farkas_w}")?;
                writeln!(
                    f,
                    "farkas_kind: {}",
                    match kind {
                        FarkasKind::Separating => "separating",
                        FarkasKind::Boundary => "boundary",
                    }
                )?;
            }
        }
        writeln!(f, "span_rank: {}", self.span_rank)?;
        if let Some(rad) = self.rounding_radius {
            writeln!(f, "rounding_radius: {rad:e}")?;
        }
        Ok(())
    }
}

pub(crate) fn check_dims(ws: &WeightSystem, gamma_len: usize) -> Result<(), ConeError> {
    if gamma_len != ws.rank() {
        return Err(ConeError::Dimension { expected: ws.rank(), got: gamma_len });
    }
    Ok(())
}

pub(crate) fn root_rows(ws: &WeightSystem) -> Vec<Vec<Rational>> {
    ws.active()
        .iter()
        .map(|p| ws.root_vector::<Rational>(p.i, p.j).expect("validated pair").into_entries())
        .collect()
}

/// Rank of the active roots.
pub fn span_rank(ws: &WeightSystem) -> usize {
    exact::rank(&root_rows(ws))
}

/// Decides strict membership with the exact simplex.
pub fn check_condition_v(
    ws: &WeightSystem,
    gamma: &TraceZeroVector<Rational>,
) -> Result<ConeCertificate, ConeError> {
    check_dims(ws, gamma.dim())?;
    let verdict = match max_uniform_weight(ws, gamma) {
        Some(lambda) => ConeVerdict::Feasible { lambda },
        None => farkas_direction(ws, gamma),
    };
    let cert = ConeCertificate { verdict, span_rank: span_rank(ws), rounding_radius: None };
    if !cert.verify(ws, gamma) {
        return Err(ConeError::UnsoundCertificate);
    }
    Ok(cert)
}

/// Rounds a float degree vector to multiples of `1/denominator` and
/// re-projects it to trace zero. Returns the rational vector and the max-norm
/// rounding radius.
pub fn rationalize_gamma(
    gamma: &[f64],
    denominator: i64,
) -> Result<(TraceZeroVector<Rational>, f64), ConeError> {
    if let Some(index) = gamma.iter().position(|g| !g.is_finite()) {
        return Err(ConeError::NonFinite { index });
    }
    let rounded: Vec<Rational> = gamma.iter().map(|&g| exact::round_to_denominator(g, denominator)).collect();
    let projected = crate::weights::project_trace_zero(&rounded);
    let radius = gamma
        .iter()
        .zip(projected.entries())
        .map(|(g, q)| (g - exact::to_f64(q)).abs())
        .fold(0.0, f64::max);
    Ok((projected, radius))
}

/// Float front end: rationalizes `gamma` and runs the exact check.
pub fn check_condition_v_float(
    ws: &WeightSystem,
    gamma: &[f64],
    denominator: i64,
) -> Result<(ConeCertificate, TraceZeroVector<Rational>), ConeError> {
    check_dims(ws, gamma.len())?;
    let (q, radius) = rationalize_gamma(gamma, denominator)?;
    let mut cert = check_condition_v(ws, &q)?;
    cert.rounding_radius = Some(radius);
    Ok((cert, q))
}

/// Solves the t-max program; `Some(λ)` iff its optimum has `t > 0`.
fn max_uniform_weight(
    ws: &WeightSystem,
    gamma: &TraceZeroVector<Rational>,
) -> Option<Vec<(RootPair, Rational)>> {
    let active = ws.active();
    if active.is_empty() {
        return gamma.entries().iter().all(Zero::is_zero).then(Vec::new);
    }
    let lp = t_program(ws, gamma);
    let m = active.len();
    match simplex::solve(&lp) {
        LpOutcome::Optimal { x, value } if value.is_positive() => Some(
            active
                .iter()
                .zip(&x[..m])
                .map(|(p, mu)| (*p, mu + &value))
                .collect(),
        ),
        _ => None,
    }
}

/// Standard form of the t-max program over `x = (μ_1..μ_m, t, s)` with
/// `λ_p = μ_p + t` and slack `s` for `t ≤ 1`. The last coordinate row is
/// implied by the others (everything is trace-zero) and is dropped.
pub(crate) fn t_program(ws: &WeightSystem, gamma: &TraceZeroVector<Rational>) -> StandardLp {
    let r = ws.rank();
    let roots = root_rows(ws);
    let m = roots.len();
    let n = m + 2;
    let mut a = Vec::with_capacity(r);
    let mut b = Vec::with_capacity(r);
    for k in 0..r - 1 {
        let mut row = vec![Rational::zero(); n];
        let mut total = Rational::zero();
        for (p, v) in roots.iter().enumerate() {
            row[p] = v[k].clone();
            total += &v[k];
        }
        row[m] = total;
        a.push(row);
        b.push(-gamma.entries()[k].clone());
    }
    let mut cap = vec![Rational::zero(); n];
    cap[m] = Rational::one();
    cap[m + 1] = Rational::one();
    a.push(cap);
    b.push(Rational::one());
    let mut c = vec![Rational::zero(); n];
    c[m] = Rational::one();
    StandardLp { a, b, c }
}

/// Farkas program over `w = w⁺ − w⁻`, slacks `σ_p = −(v_p, w)` and
/// `ρ = (−γ, w)`:
///
/// ```text
/// maximize ρ  s.t.  Σ w = 0,  (v_p, w) + σ_p = 0,  (−γ, w) − ρ = 0,  ρ + Σ σ_p = 1
/// ```
///
/// Feasible exactly when no strictly positive combination exists.
fn farkas_direction(ws: &WeightSystem, gamma: &TraceZeroVector<Rational>) -> ConeVerdict {
    let r = ws.rank();
    let roots = root_rows(ws);
    let m = roots.len();
    let n = 2 * r + m + 1;
    let rho = 2 * r + m;
    let neg_gamma: Vec<Rational> = gamma.entries().iter().map(|g| -g.clone()).collect();
    let mut a = Vec::new();
    let mut b = Vec::new();

    let mut row = vec![Rational::zero(); n];
    for k in 0..r {
        row[k] = rat(1);
        row[r + k] = rat(-1);
    }
    a.push(row);
    b.push(Rational::zero());

    for (p, v) in roots.iter().enumerate() {
        let mut row = vec![Rational::zero(); n];
        for k in 0..r {
            row[k] = v[k].clone();
            row[r + k] = -v[k].clone();
        }
        row[2 * r + p] = rat(1);
        a.push(row);
        b.push(Rational::zero());
    }

    let mut row = vec![Rational::zero(); n];
    for k in 0..r {
        row[k] = neg_gamma[k].clone();
        row[r + k] = -neg_gamma[k].clone();
    }
    row[rho] = rat(-1);
    a.push(row);
    b.push(Rational::zero());

    let mut row = vec![Rational::zero(); n];
    for x in row.iter_mut().skip(2 * r) {
        *x = rat(1);
    }
    a.push(row);
    b.push(Rational::one());

    let mut c = vec![Rational::zero(); n];
    c[rho] = rat(1);

    match simplex::solve(&StandardLp { a, b, c }) {
        LpOutcome::Optimal { x, value } => {
            let w: Vec<Rational> = (0..r).map(|k| &x[k] - &x[r + k]).collect();
            let kind = if value.is_positive() { FarkasKind::Separating } else { FarkasKind::Boundary };
            ConeVerdict::Infeasible { farkas_w: normalize_direction(&w), kind }
        }
        // Cannot happen when the t-program reported no strictly positive
        // combination (Stiemke's alternative); surfaced through `verify`.
        _ => ConeVerdict::Infeasible {
            farkas_w: TraceZeroVector::zero(r),
            kind: FarkasKind::Separating,
        },
    }
}

pub(crate) fn normalize_direction(w: &[Rational]) -> TraceZeroVector<Rational> {
    let ints = exact::primitive_integer(w);
    let entries: Vec<Rational> = ints.into_iter().map(Rational::from_integer).collect();
    TraceZeroVector::new(entries).expect("integer multiple of a trace-zero vector")
}

/// Convenience for integer degree vectors.
pub fn gamma_from_integers(g: &[i64]) -> Result<TraceZeroVector<Rational>, WeightError> {
    TraceZeroVector::new(g.iter().map(|&x| Rational::from_integer(BigInt::from(x))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ratio;

    fn ws(r: usize, pairs: &[(usize, usize)]) -> WeightSystem {
        WeightSystem::new(r, pairs.iter().map(|&(i, j)| RootPair::new(i, j))).unwrap()
    }

    #[test]
    fn single_generator_feasible() {
        let w = ws(2, &[(1, 2)]);
        let g = gamma_from_integers(&[-1, 1]).unwrap();
        let cert = check_condition_v(&w, &g).unwrap();
        assert_eq!(cert.lambda().unwrap(), &[(RootPair::new(1, 2), rat(1))]);
    }

    #[test]
    fn single_generator_wrong_side() {
        let w = ws(2, &[(1, 2)]);
        let g = gamma_from_integers(&[1, -1]).unwrap();
        let cert = check_condition_v(&w, &g).unwrap();
        assert_eq!(cert.status(), ConeStatus::Infeasible);
        assert_eq!(cert.farkas_integers().unwrap(), vec![-1, 1]);
    }

    #[test]
    fn cyclic_rank_three() {
        let w = ws(3, &[(2, 1), (3, 2), (1, 3)]);
        let g = gamma_from_integers(&[2, -1, -1]).unwrap();
        let cert = check_condition_v(&w, &g).unwrap();
        let lambda: Vec<Rational> = cert.lambda().unwrap().iter().map(|(_, l)| l.clone()).collect();
        // Solution family (t+2, t+1, t), t > 0; the t ≤ 1 cap selects t = 1.
        assert_eq!(lambda, vec![rat(3), rat(2), rat(1)]);
    }

    #[test]
    fn empty_active_set() {
        let w = ws(3, &[]);
        let zero = gamma_from_integers(&[0, 0, 0]).unwrap();
        assert_eq!(check_condition_v(&w, &zero).unwrap().status(), ConeStatus::Feasible);
        let g = gamma_from_integers(&[1, -1, 0]).unwrap();
        let cert = check_condition_v(&w, &g).unwrap();
        assert_eq!(cert.farkas_integers().unwrap(), vec![-1, 1, 0]);
    }

    #[test]
    fn boundary_case_gets_boundary_certificate() {
        // −γ = v_{1,2} is on a face of the cone spanned by v_{1,2}, v_{1,3}.
        let w = ws(3, &[(1, 2), (1, 3)]);
        let g = gamma_from_integers(&[-1, 1, 0]).unwrap();
        let cert = check_condition_v(&w, &g).unwrap();
        match cert.verdict {
            ConeVerdict::Infeasible { kind, .. } => assert_eq!(kind, FarkasKind::Boundary),
            _ => panic!("expected infeasible"),
        }
    }

    #[test]
    fn span_mismatch_is_infeasible_and_separating() {
        let w = ws(3, &[(1, 2)]);
        let g = gamma_from_integers(&[0, -1, 1]).unwrap();
        let cert = check_condition_v(&w, &g).unwrap();
        assert!(matches!(cert.verdict, ConeVerdict::Infeasible { kind: FarkasKind::Separating, .. }));
        assert_eq!(cert.span_rank, 1);
    }

    #[test]
    fn opposite_pair_contains_line() {
        let w = ws(3, &[(1, 3), (3, 1)]);
        for s in [-5i64, -1, 0, 2, 7] {
            let g = gamma_from_integers(&[-s, 0, s]).unwrap();
            assert_eq!(check_condition_v(&w, &g).unwrap().status(), ConeStatus::Feasible, "s={s}");
        }
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let w = ws(3, &[(1, 2)]);
        let g = gamma_from_integers(&[1, -1]).unwrap();
        assert!(matches!(check_condition_v(&w, &g), Err(ConeError::Dimension { .. })));
    }

    #[test]
    fn float_gamma_is_rationalized() {
        let w = ws(2, &[]);
        let (cert, q) = check_condition_v_float(&w, &[1.0 + 1e-12, -1.0], DEFAULT_DENOMINATOR).unwrap();
        assert_eq!(q.entries(), &[rat(1), rat(-1)]);
        assert!(cert.rounding_radius.unwrap() < 1e-9);
        assert_eq!(cert.farkas_integers().unwrap(), vec![-1, 1]);
        let (q, _) = rationalize_gamma(&[0.25, 0.5, -0.75], DEFAULT_DENOMINATOR).unwrap();
        assert_eq!(q.entries(), &[ratio(1, 4), ratio(1, 2), ratio(-3, 4)]);
        assert!(rationalize_gamma(&[f64::NAN, 0.0], 10).is_err());
    }

    #[test]
    fn certificate_verification_rejects_tampering() {
        let w = ws(2, &[(1, 2)]);
        let g = gamma_from_integers(&[-1, 1]).unwrap();
        let mut cert = check_condition_v(&w, &g).unwrap();
        cert.verdict = ConeVerdict::Feasible { lambda: vec![(RootPair::new(1, 2), rat(2))] };
        assert!(!cert.verify(&w, &g));
    }
}
