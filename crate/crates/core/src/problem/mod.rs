//! Equation data from geometric inputs.
//!
//! A Higgs entry `φ_{i,j}` (coefficient of `dz`), diagonal background metric
//! factors `k_j > 0` and curvature scalars `a_j` with `Σ a_j ≡ 0` give
//!
//! ```text
//! c_{i,j} = 4 |φ_{i,j}|² k_i / k_j,   b = −2a,   γ_j = (1/2π) ∫ a_j
//! ```
//!
//! and the equation `Δξ + Σ c e^{(v,ξ)} v = b` for the trace-zero unknown `ξ`.

mod potential;

use std::f64::consts::PI;
use std::fmt;

use thiserror::Error;

pub use potential::{Potential, TRACE_TOL};

use crate::cone::{self, ConeCertificate, ConeError};
use crate::exact::Rational;
use crate::fieldexpr::{EvalError, FieldExpr};
use crate::grid::{self, GridError, PeriodicGrid, ScalarField};
use crate::weights::{RootPair, TraceZeroVector, WeightError, WeightSystem};

/// Samples with `c ≤ ZERO_REL · max c` count as zeros of the Higgs entry
/// (`|φ|` below `1e-12` of its peak).
pub const ZERO_REL: f64 = 1e-24;

/// Pointwise tolerance on `Σ_j a_j`, relative to the largest `|a_j|` there.
pub const CURVATURE_TRACE_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("k_{index} is not positive at x = {x}, y = {y}")]
    NonPositiveK { index: usize, x: f64, y: f64 },
    #[error("curvature scalars do not sum to zero at x = {x}, y = {y} (sum {sum:e})")]
    CurvatureTrace { x: f64, y: f64, sum: f64 },
    #[error("stack is not trace-zero at x = {x}, y = {y} (sum {value:e})")]
    NotTraceZero { x: f64, y: f64, value: f64 },
}

/// One off-diagonal Higgs entry `φ_{i,j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct HiggsEntry {
    pub pair: RootPair,
    pub re: ScalarField,
    pub im: ScalarField,
}

impl HiggsEntry {
    pub fn real(pair: RootPair, re: ScalarField) -> Self {
        let im = ScalarField::zeros(re.grid());
        Self { pair, re, im }
    }
}

#[derive(Debug, Clone)]
pub struct HiggsProblem {
    ws: WeightSystem,
    grid: PeriodicGrid,
    phi: Vec<HiggsEntry>,
    phi_diag: Option<Vec<(ScalarField, ScalarField)>>,
    k: Vec<ScalarField>,
    a: Vec<ScalarField>,
    c: Vec<ScalarField>,
    b: Vec<ScalarField>,
    gamma: Vec<f64>,
    zero_sample_pairs: Vec<RootPair>,
}

impl HiggsProblem {
    /// `phi` must hold exactly one entry per active pair (any order).
    pub fn assemble(
        ws: WeightSystem,
        grid: &PeriodicGrid,
        phi: Vec<HiggsEntry>,
        k: Vec<ScalarField>,
        a: Vec<ScalarField>,
    ) -> Result<Self, ProblemError> {
        let r = ws.rank();
        if k.len() != r || a.len() != r {
            return Err(ProblemError::Shape(format!(
                "rank {r} needs {r} metric and curvature planes, got {} and {}",
                k.len(),
                a.len()
            )));
        }
        if phi.len() != ws.active().len() {
            return Err(ProblemError::Shape(format!(
                "{} active pairs but {} Higgs entries",
                ws.active().len(),
                phi.len()
            )));
        }
        let on_grid = |f: &ScalarField| {
            if f.grid() == grid {
                Ok(())
            } else {
                Err(ProblemError::Grid(GridError::GridMismatch(grid.n(), f.grid().n())))
            }
        };
        for f in k.iter().chain(&a).chain(phi.iter().flat_map(|e| [&e.re, &e.im])) {
            on_grid(f)?;
        }
        for (j, kj) in k.iter().enumerate() {
            if let Some(idx) = kj.values().iter().position(|&v| v <= 0.0) {
                let (x, y) = grid.coords(idx);
                return Err(ProblemError::NonPositiveK { index: j + 1, x, y });
            }
        }
        for idx in 0..grid.len() {
            let sum: f64 = a.iter().map(|f| f.values()[idx]).sum();
            let scale = a.iter().map(|f| f.values()[idx].abs()).fold(1.0, f64::max);
            if sum.abs() > CURVATURE_TRACE_TOL * scale {
                let (x, y) = grid.coords(idx);
                return Err(ProblemError::CurvatureTrace { x, y, sum });
            }
        }

        let mut ordered = Vec::with_capacity(phi.len());
        let mut pool = phi;
        for &pair in ws.active() {
            let pos = pool
                .iter()
                .position(|e| e.pair == pair)
                .ok_or_else(|| ProblemError::Shape(format!("no Higgs entry for active pair {pair}")))?;
            ordered.push(pool.swap_remove(pos));
        }

        let c: Vec<ScalarField> = ordered
            .iter()
            .map(|e| {
                let ratio = k[e.pair.i - 1].zip_map(&k[e.pair.j - 1], |ki, kj| ki / kj);
                e.re.zip_map(&e.im, |re, im| 4.0 * (re * re + im * im)).mul(&ratio)
            })
            .collect();
        for (cf, e) in c.iter().zip(&ordered) {
            if !cf.all_finite() {
                return Err(ProblemError::Shape(format!("coefficient for {} overflows", e.pair)));
            }
        }
        let b = a.iter().map(|f| f.scale(-2.0)).collect();
        let gamma = a.iter().map(|f| grid::integrate(f) / (2.0 * PI)).collect();
        let zero_sample_pairs = ws
            .active()
            .iter()
            .zip(&c)
            .filter(|(_, cf)| count_zeros(cf) > 0)
            .map(|(p, _)| *p)
            .collect();
        Ok(Self { ws, grid: grid.clone(), phi: ordered, phi_diag: None, k, a, c, b, gamma, zero_sample_pairs })
    }

    /// Attaches the diagonal part `Φ_0 = diag(φ_{1,1}, …, φ_{r,r})` as (re, im) planes.
    /// It only enters the full matrix residual.
    pub fn with_diagonal(mut self, diag: Vec<(ScalarField, ScalarField)>) -> Result<Self, ProblemError> {
        if diag.len() != self.ws.rank() {
            return Err(ProblemError::Shape(format!("{} diagonal entries for rank {}", diag.len(), self.ws.rank())));
        }
        if let Some((f, _)) = diag.iter().find(|(re, im)| re.grid() != &self.grid || im.grid() != &self.grid) {
            return Err(GridError::GridMismatch(self.grid.n(), f.grid().n()).into());
        }
        self.phi_diag = Some(diag);
        Ok(self)
    }

    pub fn ws(&self) -> &WeightSystem {
        &self.ws
    }

    pub fn rank(&self) -> usize {
        self.ws.rank()
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    /// Higgs entries in active-pair order.
    pub fn phi(&self) -> &[HiggsEntry] {
        &self.phi
    }

    pub fn phi_diag(&self) -> Option<&[(ScalarField, ScalarField)]> {
        self.phi_diag.as_deref()
    }

    pub fn k(&self) -> &[ScalarField] {
        &self.k
    }

    pub fn a(&self) -> &[ScalarField] {
        &self.a
    }

    /// Coefficients in active-pair order.
    pub fn c(&self) -> &[ScalarField] {
        &self.c
    }

    pub fn b(&self) -> &[ScalarField] {
        &self.b
    }

    /// Active pairs zipped with their coefficient fields.
    pub fn terms(&self) -> impl Iterator<Item = (RootPair, &ScalarField)> {
        self.ws.active().iter().copied().zip(&self.c)
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn zero_sample_pairs(&self) -> &[RootPair] {
        &self.zero_sample_pairs
    }

    /// Exact cone check on γ rounded to `1/denominator`.
    pub fn cone_certificate(&self, denominator: i64) -> Result<(ConeCertificate, TraceZeroVector<Rational>), ConeError> {
        cone::check_condition_v_float(&self.ws, &self.gamma, denominator)
    }

    pub fn zero_potential(&self) -> Potential {
        Potential::zeros(&self.grid, self.rank())
    }

    pub fn check_potential(&self, xi: &Potential) -> Result<(), ProblemError> {
        if xi.rank() != self.rank() {
            return Err(ProblemError::Shape(format!("potential has {} planes, problem rank is {}", xi.rank(), self.rank())));
        }
        if xi.grid() != &self.grid {
            return Err(GridError::GridMismatch(self.grid.n(), xi.grid().n()).into());
        }
        Ok(())
    }
}

/// Cyclic Higgs field: `phi[k]` sits at `(k+2, k+1)` for `k < r−1` and the
/// last one in the corner `(1, r)`. All entries real.
pub fn make_cyclic(
    r: usize,
    grid: &PeriodicGrid,
    phi: &[FieldExpr],
    k: &[FieldExpr],
    a: &[FieldExpr],
) -> Result<HiggsProblem, ProblemError> {
    let ws = WeightSystem::cyclic(r)?;
    if phi.len() != r {
        return Err(ProblemError::Shape(format!("cyclic rank {r} needs {r} Higgs entries, got {}", phi.len())));
    }
    let eval_all = |exprs: &[FieldExpr]| -> Result<Vec<ScalarField>, ProblemError> {
        exprs.iter().map(|e| e.evaluate(grid).map_err(ProblemError::from)).collect()
    };
    let entries = ws
        .active()
        .iter()
        .zip(eval_all(phi)?)
        .map(|(&pair, re)| HiggsEntry::real(pair, re))
        .collect();
    HiggsProblem::assemble(ws, grid, entries, eval_all(k)?, eval_all(a)?)
}

fn count_zeros(c: &ScalarField) -> usize {
    let threshold = ZERO_REL * c.max_abs();
    c.values().iter().filter(|&&v| v <= threshold).count()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CheckStatus {
    Ok,
    Warn,
    Fail,
}

impl fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckStatus::Ok => "OK",
            CheckStatus::Warn => "WARN",
            CheckStatus::Fail => "FAIL",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairIntegrability {
    pub pair: RootPair,
    /// Mean of `log c` over the nonzero samples; `None` if there are none.
    pub mean_log: Option<f64>,
    pub zero_fraction: f64,
    pub status: CheckStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrabilityReport {
    pub pairs: Vec<PairIntegrability>,
}

impl IntegrabilityReport {
    pub fn status(&self) -> CheckStatus {
        self.pairs.iter().map(|p| p.status).max().unwrap_or(CheckStatus::Ok)
    }
}

impl fmt::Display for IntegrabilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "integrability = {}", self.status())?;
        for p in &self.pairs {
            let mean = p.mean_log.map_or("none".to_string(), |m| format!("{m:.12e}"));
            writeln!(
                f,
                "pair {} status = {} zero_fraction = {:.6} mean_log = {}",
                p.pair, p.status, p.zero_fraction, mean
            )?;
        }
        Ok(())
    }
}

/// Discrete proxy for integrability of `log|φ_{i,j}|²`.
pub fn validate_log_integrability(p: &HiggsProblem) -> IntegrabilityReport {
    let pairs = p
        .terms()
        .map(|(pair, c)| {
            let threshold = ZERO_REL * c.max_abs();
            let logs: Vec<f64> = c.values().iter().filter(|&&v| v > threshold).map(|v| v.ln()).collect();
            let zeros = c.values().len() - logs.len();
            let status = if logs.is_empty() {
                CheckStatus::Fail
            } else if zeros > 0 {
                CheckStatus::Warn
            } else {
                CheckStatus::Ok
            };
            PairIntegrability {
                pair,
                mean_log: (!logs.is_empty()).then(|| grid::pairwise_sum(&logs) / logs.len() as f64),
                zero_fraction: zeros as f64 / c.values().len() as f64,
                status,
            }
        })
        .collect();
    IntegrabilityReport { pairs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fieldexpr::parse;

    fn exprs(src: &[&str]) -> Vec<FieldExpr> {
        src.iter().map(|s| parse(s).unwrap()).collect()
    }

    fn grid(n: usize) -> PeriodicGrid {
        PeriodicGrid::new(n).unwrap()
    }

    #[test]
    fn unit_data() {
        let g = grid(8);
        let ws = WeightSystem::new(2, [RootPair::new(1, 2)]).unwrap();
        let p = HiggsProblem::assemble(
            ws,
            &g,
            vec![HiggsEntry::real(RootPair::new(1, 2), ScalarField::constant(&g, 1.0))],
            vec![ScalarField::constant(&g, 1.0); 2],
            vec![ScalarField::zeros(&g); 2],
        )
        .unwrap();
        assert!(p.c()[0].values().iter().all(|&v| v == 4.0));
        assert!(p.b().iter().all(ScalarField::is_identically_zero));
        assert_eq!(p.gamma(), &[0.0, 0.0]);
        assert!(p.zero_sample_pairs().is_empty());
    }

    #[test]
    fn degree_is_curvature_mean() {
        let g = grid(16);
        let a1 = ScalarField::from_fn(&g, |x, _| 2.0 * PI * (2.0 * PI * x).cos() + 2.0 * PI).unwrap();
        let a = vec![a1.clone(), a1.scale(-1.0)];
        let ws = WeightSystem::new(2, []).unwrap();
        let p = HiggsProblem::assemble(ws, &g, vec![], vec![ScalarField::constant(&g, 1.0); 2], a).unwrap();
        assert!((p.gamma()[0] - 1.0).abs() < 1e-14);
        assert!((p.gamma()[1] + 1.0).abs() < 1e-14);
        let sum_b: f64 = (0..g.len()).map(|i| p.b()[0].values()[i] + p.b()[1].values()[i]).fold(0.0, |m, v| m.max(v.abs()));
        assert_eq!(sum_b, 0.0);
    }

    #[test]
    fn cyclic_examples() {
        let g = grid(8);
        let p = make_cyclic(3, &g, &exprs(&["1", "1", "1"]), &exprs(&["1"; 3]), &exprs(&["0"; 3])).unwrap();
        assert_eq!(p.ws().active(), &[RootPair::new(2, 1), RootPair::new(3, 2), RootPair::new(1, 3)]);
        assert!(p.c().iter().all(|c| c.values().iter().all(|&v| v == 4.0)));
        assert_eq!(p.gamma(), &[0.0; 3]);
        let p2 = make_cyclic(2, &g, &exprs(&["1", "1"]), &exprs(&["1"; 2]), &exprs(&["0"; 2])).unwrap();
        assert_eq!(p2.ws().active(), &[RootPair::new(2, 1), RootPair::new(1, 2)]);
        let p3 = make_cyclic(3, &g, &exprs(&["sin(2*pi*x)", "1", "1"]), &exprs(&["1"; 3]), &exprs(&["0"; 3])).unwrap();
        assert_eq!(p3.zero_sample_pairs(), &[RootPair::new(2, 1)]);
    }

    #[test]
    fn assembly_errors() {
        let g = grid(8);
        let bad_k = make_cyclic(2, &g, &exprs(&["1", "1"]), &exprs(&["1", "x - 0.5"]), &exprs(&["0"; 2]));
        assert!(matches!(bad_k, Err(ProblemError::NonPositiveK { index: 2, .. })));
        let bad_a = make_cyclic(2, &g, &exprs(&["1", "1"]), &exprs(&["1"; 2]), &exprs(&["1", "0"]));
        assert!(matches!(bad_a, Err(ProblemError::CurvatureTrace { .. })));
        let short = make_cyclic(3, &g, &exprs(&["1", "1"]), &exprs(&["1"; 3]), &exprs(&["0"; 3]));
        assert!(matches!(short, Err(ProblemError::Shape(_))));
        let other = grid(16);
        let ws = WeightSystem::new(2, []).unwrap();
        let mismatch = HiggsProblem::assemble(
            ws,
            &g,
            vec![],
            vec![ScalarField::constant(&other, 1.0); 2],
            vec![ScalarField::zeros(&g); 2],
        );
        assert!(matches!(mismatch, Err(ProblemError::Grid(_))));
    }

    #[test]
    fn common_rescaling_of_k_leaves_c_unchanged() {
        let g = grid(16);
        let phi = exprs(&["1+x", "cos(2*pi*y)", "2"]);
        let k = exprs(&["1", "2+sin(2*pi*x)", "exp(y)"]);
        let k_scaled = exprs(&["3*exp(x)", "(2+sin(2*pi*x))*3*exp(x)", "exp(y)*3*exp(x)"]);
        let zero = exprs(&["0"; 3]);
        let p = make_cyclic(3, &g, &phi, &k, &zero).unwrap();
        let q = make_cyclic(3, &g, &phi, &k_scaled, &zero).unwrap();
        for (c1, c2) in p.c().iter().zip(q.c()) {
            for (u, v) in c1.values().iter().zip(c2.values()) {
                assert!((u - v).abs() <= 1e-14 * u.abs().max(1.0));
            }
        }
    }

    #[test]
    fn integrability_report() {
        let g = grid(16);
        let ok = make_cyclic(2, &g, &exprs(&["1", "1"]), &exprs(&["1"; 2]), &exprs(&["0"; 2])).unwrap();
        let rep = validate_log_integrability(&ok);
        assert_eq!(rep.status(), CheckStatus::Ok);
        assert_eq!(rep.pairs[0].mean_log, Some(4f64.ln()));
        assert_eq!(rep.pairs[0].zero_fraction, 0.0);

        let warn = make_cyclic(2, &g, &exprs(&["sin(2*pi*x)", "1"]), &exprs(&["1"; 2]), &exprs(&["0"; 2])).unwrap();
        let rep = validate_log_integrability(&warn);
        assert_eq!(rep.status(), CheckStatus::Warn);
        // Zeros sit exactly at x = 0 and x = 1/2: two per row.
        assert_eq!(rep.pairs[0].zero_fraction, 2.0 / 16.0);
        assert!(rep.pairs[0].mean_log.unwrap().is_finite());

        let fail = make_cyclic(2, &g, &exprs(&["0", "1"]), &exprs(&["1"; 2]), &exprs(&["0"; 2])).unwrap();
        let rep = validate_log_integrability(&fail);
        assert_eq!(rep.status(), CheckStatus::Fail);
        assert!(rep.to_string().starts_with("integrability = FAIL\n"));
    }
}
