use std::fmt;
use std::io::Write;

use rayon::prelude::*;

use super::{m_restricted, EnergyBreakdown, FunctionalError};
use crate::grid;
use crate::problem::{HiggsProblem, Potential};

/// Behaviour of `t ↦ M(ξ0 + tη)` as `t → +∞`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Asymptotics {
    DivergesUp,
    DivergesDown,
    BoundedFlat,
}

impl fmt::Display for Asymptotics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Asymptotics::DivergesUp => "DIVERGES_UP",
            Asymptotics::DivergesDown => "DIVERGES_DOWN",
            Asymptotics::BoundedFlat => "BOUNDED_FLAT",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    pub t: f64,
    pub energy: EnergyBreakdown,
    pub l2_norm: f64,
}

/// Least-squares fit `‖ξ‖ ≈ quad·M² + lin·M + constant`; diagnostic only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticEnvelope {
    pub quad: f64,
    pub lin: f64,
    pub constant: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicScan {
    pub points: Vec<ScanPoint>,
    pub classification: Asymptotics,
    /// Set when evaluation stopped early on exponential overflow.
    pub overflow_at: Option<f64>,
    /// Slope of the linear term, `∫⟨a, η⟩`.
    pub linear_slope: f64,
    pub envelope: Option<QuadraticEnvelope>,
}

/// Evaluates `M(ξ0 + tη)` over `t_list` and classifies the tail in closed form:
/// a non-constant `η` or a positive exponent `(v,η)` on the support of `c`
/// forces growth; otherwise the sign of `∫⟨a,η⟩` decides.
pub fn geodesic_scan(
    p: &HiggsProblem,
    xi0: &Potential,
    eta: &Potential,
    t_list: &[f64],
) -> Result<GeodesicScan, FunctionalError> {
    p.check_potential(xi0)?;
    p.check_potential(eta)?;
    let evaluated: Vec<Result<ScanPoint, FunctionalError>> = t_list
        .par_iter()
        .map(|&t| {
            let xi = xi0.axpy(t, eta);
            let energy = m_restricted(p, &xi)?;
            Ok(ScanPoint { t, energy, l2_norm: xi.l2_norm() })
        })
        .collect();
    let mut points = Vec::with_capacity(t_list.len());
    let mut overflow_at = None;
    for (res, &t) in evaluated.into_iter().zip(t_list) {
        match res {
            Ok(pt) => points.push(pt),
            Err(FunctionalError::Overflow { .. }) => {
                overflow_at = Some(t);
                break;
            }
            Err(e) => return Err(e),
        }
    }

    let linear_slope = grid::pairwise_sum(
        &p.a().iter().zip(eta.planes()).map(|(a, e)| grid::inner(a, e)).collect::<Vec<_>>(),
    );
    let classification = if overflow_at.is_some() {
        Asymptotics::DivergesUp
    } else {
        tail_class(p, eta, linear_slope)
    };
    let envelope = fit_envelope(&points);
    Ok(GeodesicScan { points, classification, overflow_at, linear_slope, envelope })
}

fn tail_class(p: &HiggsProblem, eta: &Potential, slope: f64) -> Asymptotics {
    let norm2 = eta.inner(eta);
    let dir: f64 = eta.planes().iter().map(grid::dirichlet).sum();
    if dir > 1e-20 * norm2.max(f64::MIN_POSITIVE) {
        return Asymptotics::DivergesUp;
    }
    let pairing_tol = 1e-12 * eta.max_abs();
    for (pair, c) in p.terms() {
        let s = eta.pair_with(pair);
        if c.values().iter().zip(s.values()).any(|(&cv, &sv)| cv > 0.0 && sv > pairing_tol) {
            return Asymptotics::DivergesUp;
        }
    }
    let a_norm = grid::pairwise_sum(&p.a().iter().map(|a| grid::inner(a, a)).collect::<Vec<_>>()).sqrt();
    let slope_tol = 1e-12 * a_norm * norm2.sqrt();
    if slope > slope_tol {
        Asymptotics::DivergesUp
    } else if slope < -slope_tol {
        Asymptotics::DivergesDown
    } else {
        Asymptotics::BoundedFlat
    }
}

fn fit_envelope(points: &[ScanPoint]) -> Option<QuadraticEnvelope> {
    if points.len() < 3 {
        return None;
    }
    // Normal equations for the basis (M², M, 1).
    let mut ata = [[0.0f64; 3]; 3];
    let mut atb = [0.0f64; 3];
    for pt in points {
        let m = pt.energy.total;
        let row = [m * m, m, 1.0];
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
            atb[i] += row[i] * pt.l2_norm;
        }
    }
    let coef = solve3(ata, atb)?;
    coef.iter()
        .all(|c| c.is_finite())
        .then(|| QuadraticEnvelope { quad: coef[0], lin: coef[1], constant: coef[2] })
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= 1e-14 * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let s: f64 = (row + 1..3).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// CSV with header `t,M,dirichlet,exponential,linear,l2_norm,classification`.
pub fn write_scan_csv<W: Write>(mut out: W, scan: &GeodesicScan) -> std::io::Result<()> {
    writeln!(out, "t,M,dirichlet,exponential,linear,l2_norm,classification")?;
    for pt in &scan.points {
        let e = &pt.energy;
        writeln!(
            out,
            "{:?},{:?},{:?},{:?},{:?},{:?},{}",
            pt.t, e.total, e.dirichlet, e.exponential, e.linear, pt.l2_norm, scan.classification
        )?;
    }
    Ok(())
}
