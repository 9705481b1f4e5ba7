//! The full matrix residual `iΛ(F_h + [Φ∧Φ^{*h}])` for the diagonal metric
//! `h_α = e^{f_α} k_α`.
//!
//! Adjoint convention: `(φ^{*h})_{αβ} = (h_β/h_α)·conj(φ_{βα})`. With
//! `iΛ(dz∧dz̄)` conventions of the grid module the commutator term is
//! `2(φφ^{*h} − φ^{*h}φ)` and the curvature term is `a_α + ½Δf_α` on the
//! diagonal. Off-diagonal entries are reported in the `h`-unitary frame
//! `ψ_{αβ} = φ_{αβ}·√(h_α/h_β)`, where the matrix is Hermitian; their
//! vanishing does not depend on the frame.

use std::fmt;
use std::io::Write;

use rustfft::num_complex::Complex64;
use thiserror::Error;

use crate::functional::{self, FunctionalError};
use crate::grid::{self, io::write_csv, GridError, ScalarField};
use crate::problem::{HiggsProblem, Potential, ProblemError};

/// Pointwise trace of the residual tolerated before verification refuses,
/// relative to the largest diagonal magnitude.
pub const TRACE_CHECK_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Functional(#[from] FunctionalError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("metric ratio overflows between indices {alpha} and {beta}")]
    Overflow { alpha: usize, beta: usize },
    #[error("residual has pointwise trace {trace:e} at x = {x}, y = {y}; input is not trace-free")]
    TraceDefect { trace: f64, x: f64, y: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OffDiagonalEntry {
    /// 1-based row and column, `alpha < beta`.
    pub alpha: usize,
    pub beta: usize,
    pub re: ScalarField,
    pub im: ScalarField,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualNorms {
    pub diagonal_linf: f64,
    pub diagonal_l2: f64,
    pub offdiagonal_linf: f64,
    pub offdiagonal_l2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeResidual {
    pub diagonal: Vec<ScalarField>,
    /// Upper triangle; the lower one is its conjugate.
    pub off_diagonal: Vec<OffDiagonalEntry>,
    pub norms: ResidualNorms,
    /// Largest pointwise `|M_{αβ} − conj(M_{βα})|`.
    pub hermitian_defect: f64,
    /// Largest pointwise `|tr M|`.
    pub trace_defect: f64,
}

impl HeResidual {
    /// Pointwise Frobenius norm of the off-diagonal part.
    pub fn offdiagonal_magnitude(&self) -> Option<ScalarField> {
        let first = self.off_diagonal.first()?;
        let mut acc = ScalarField::zeros(first.re.grid());
        for e in &self.off_diagonal {
            acc = acc.add(&e.re.zip_map(&e.im, |a, b| 2.0 * (a * a + b * b)));
        }
        Some(acc.map(f64::sqrt))
    }

    /// Heatmap of the off-diagonal magnitude as CSV (all zeros for rank-1 blocks).
    pub fn write_heatmap_csv<W: Write>(&self, out: W) -> Result<(), GridError> {
        let field = self
            .offdiagonal_magnitude()
            .unwrap_or_else(|| ScalarField::zeros(self.diagonal[0].grid()));
        write_csv(out, &field)
    }
}

/// The unitary-frame Higgs matrix `ψ` at one sample.
fn unitary_higgs(p: &HiggsProblem, xi: &Potential, idx: usize, out: &mut [Complex64]) -> Result<(), VerifyError> {
    let r = p.rank();
    out.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
    for e in p.phi() {
        let (i, j) = (e.pair.i, e.pair.j);
        let log_ratio = xi.plane(i).values()[idx] - xi.plane(j).values()[idx];
        let k_ratio = p.k()[i - 1].values()[idx] / p.k()[j - 1].values()[idx];
        let scale = (0.5 * log_ratio).exp() * k_ratio.sqrt();
        if !scale.is_finite() {
            return Err(VerifyError::Overflow { alpha: i, beta: j });
        }
        out[(i - 1) * r + (j - 1)] = Complex64::new(e.re.values()[idx], e.im.values()[idx]) * scale;
    }
    if let Some(diag) = p.phi_diag() {
        for (alpha, (re, im)) in diag.iter().enumerate() {
            out[alpha * r + alpha] = Complex64::new(re.values()[idx], im.values()[idx]);
        }
    }
    Ok(())
}

pub fn full_he_residual(p: &HiggsProblem, xi: &Potential) -> Result<HeResidual, VerifyError> {
    p.check_potential(xi)?;
    let r = p.rank();
    let grid = p.grid().clone();
    let n2 = grid.len();
    let half_lap: Vec<ScalarField> = xi
        .planes()
        .iter()
        .map(|f| grid::laplacian(f).map(|l| l.scale(0.5)))
        .collect::<Result<_, _>>()?;

    let mut diag = vec![vec![0.0; n2]; r];
    let mut upper = vec![vec![Complex64::new(0.0, 0.0); n2]; r * r];
    let mut hermitian_defect = 0.0f64;
    let mut trace_defect = 0.0f64;
    let mut psi = vec![Complex64::new(0.0, 0.0); r * r];
    let mut m = vec![Complex64::new(0.0, 0.0); r * r];
    for idx in 0..n2 {
        unitary_higgs(p, xi, idx, &mut psi)?;
        // m = 2(ψψ† − ψ†ψ)
        for a in 0..r {
            for b in 0..r {
                let mut s = Complex64::new(0.0, 0.0);
                for g in 0..r {
                    s += psi[a * r + g] * psi[b * r + g].conj();
                    s -= psi[g * r + a].conj() * psi[g * r + b];
                }
                m[a * r + b] = s * 2.0;
            }
        }
        let mut trace = 0.0;
        let mut scale = 0.0f64;
        for a in 0..r {
            let d = p.a()[a].values()[idx] + half_lap[a].values()[idx] + m[a * r + a].re;
            diag[a][idx] = d;
            trace += d;
            scale = scale.max(d.abs()).max(p.a()[a].values()[idx].abs());
            hermitian_defect = hermitian_defect.max(m[a * r + a].im.abs());
            for b in a + 1..r {
                upper[a * r + b][idx] = m[a * r + b];
                hermitian_defect = hermitian_defect.max((m[a * r + b] - m[b * r + a].conj()).norm());
            }
        }
        trace_defect = trace_defect.max(trace.abs());
        if trace.abs() > TRACE_CHECK_TOL * scale.max(1.0) {
            let (x, y) = grid.coords(idx);
            return Err(VerifyError::TraceDefect { trace, x, y });
        }
    }

    let diagonal: Vec<ScalarField> = diag.into_iter().map(|v| ScalarField::from_raw(&grid, v)).collect();
    let mut off_diagonal = Vec::new();
    for a in 0..r {
        for b in a + 1..r {
            let entry = &upper[a * r + b];
            off_diagonal.push(OffDiagonalEntry {
                alpha: a + 1,
                beta: b + 1,
                re: ScalarField::from_raw(&grid, entry.iter().map(|z| z.re).collect()),
                im: ScalarField::from_raw(&grid, entry.iter().map(|z| z.im).collect()),
            });
        }
    }
    let diag_stack = Potential::project_unchecked(diagonal.clone());
    let offdiagonal_linf = off_diagonal
        .iter()
        .flat_map(|e| e.re.values().iter().zip(e.im.values()).map(|(a, b)| a.hypot(*b)))
        .fold(0.0, f64::max);
    let off_sq: Vec<f64> = off_diagonal
        .iter()
        .map(|e| 2.0 * (grid::inner(&e.re, &e.re) + grid::inner(&e.im, &e.im)))
        .collect();
    let norms = ResidualNorms {
        diagonal_linf: diag_stack.max_abs(),
        diagonal_l2: diag_stack.l2_norm(),
        offdiagonal_linf,
        offdiagonal_l2: grid::pairwise_sum(&off_sq).sqrt(),
    };
    Ok(HeResidual { diagonal, off_diagonal, norms, hermitian_defect, trace_defect })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criticality {
    FullCriticalPoint,
    DiagonalOnly,
}

impl fmt::Display for Criticality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Criticality::FullCriticalPoint => "FullCriticalPoint",
            Criticality::DiagonalOnly => "DiagonalOnly",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub verdict: Criticality,
    pub tol: f64,
    pub norms: ResidualNorms,
    pub residual_mu_linf: f64,
    pub hermitian_defect: f64,
    pub trace_defect: f64,
    /// `ξ` does not solve the scalar equation to `tol`, so the verdict concerns
    /// a non-critical metric.
    pub advisory: bool,
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "verdict = {}", self.verdict)?;
        writeln!(f, "tol = {:e}", self.tol)?;
        writeln!(f, "residual_mu_linf = {:.6e}", self.residual_mu_linf)?;
        writeln!(f, "diagonal_linf = {:.6e}", self.norms.diagonal_linf)?;
        writeln!(f, "diagonal_l2 = {:.6e}", self.norms.diagonal_l2)?;
        writeln!(f, "offdiagonal_linf = {:.6e}", self.norms.offdiagonal_linf)?;
        writeln!(f, "offdiagonal_l2 = {:.6e}", self.norms.offdiagonal_l2)?;
        writeln!(f, "hermitian_defect = {:.6e}", self.hermitian_defect)?;
        writeln!(f, "trace_defect = {:.6e}", self.trace_defect)?;
        let note = if self.advisory { "scalar residual above tol" } else { "none" };
        writeln!(f, "advisory = {note}")
    }
}

/// `FullCriticalPoint` iff the off-diagonal part is below `tol` in max-norm.
pub fn criticality_check(p: &HiggsProblem, xi: &Potential, tol: f64) -> Result<VerifyReport, VerifyError> {
    let res = full_he_residual(p, xi)?;
    let residual_mu_linf = functional::residual_mu(p, xi)?.max_abs();
    let verdict = if res.norms.offdiagonal_linf < tol {
        Criticality::FullCriticalPoint
    } else {
        Criticality::DiagonalOnly
    };
    Ok(VerifyReport {
        verdict,
        tol,
        norms: res.norms,
        residual_mu_linf,
        hermitian_defect: res.hermitian_defect,
        trace_defect: res.trace_defect,
        advisory: residual_mu_linf >= tol,
    })
}
