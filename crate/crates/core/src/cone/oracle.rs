//! Brute-force reference for [`check_condition_v`](super::check_condition_v).
//!
//! Enumerates every basic solution of the t-max program in exact arithmetic
//! instead of pivoting, and finds infeasibility witnesses by enumerating the
//! vertices of a box-bounded polytope of candidate directions. Exponential in
//! the problem size; meant for tests.

use num_traits::{Signed, Zero};

use super::{check_dims, normalize_direction, root_rows, span_rank, t_program};
use super::{ConeCertificate, ConeError, ConeVerdict, FarkasKind};
use crate::exact::{self, rat, Rational};
use crate::weights::{TraceZeroVector, WeightSystem};

const MAX_RANK: usize = 6;
const MAX_ACTIVE: usize = 12;

pub fn oracle_condition_v(
    ws: &WeightSystem,
    gamma: &TraceZeroVector<Rational>,
) -> Result<ConeCertificate, ConeError> {
    check_dims(ws, gamma.dim())?;
    if ws.rank() > MAX_RANK || ws.active().len() > MAX_ACTIVE {
        return Err(ConeError::OracleTooLarge { r: ws.rank(), active: ws.active().len() });
    }
    let verdict = match enumerate_t_program(ws, gamma) {
        Some(lambda) => ConeVerdict::Feasible { lambda },
        None => enumerate_farkas(ws, gamma),
    };
    let cert = ConeCertificate { verdict, span_rank: span_rank(ws), rounding_radius: None };
    if !cert.verify(ws, gamma) {
        return Err(ConeError::UnsoundCertificate);
    }
    Ok(cert)
}

fn enumerate_t_program(
    ws: &WeightSystem,
    gamma: &TraceZeroVector<Rational>,
) -> Option<Vec<(crate::weights::RootPair, Rational)>> {
    let m = ws.active().len();
    if m == 0 {
        return gamma.entries().iter().all(Zero::is_zero).then(Vec::new);
    }
    let lp = t_program(ws, gamma);
    let n = lp.c.len();
    // Row-reduce [A | b] to drop dependent rows and detect inconsistency.
    let mut aug: Vec<Vec<Rational>> = lp
        .a
        .iter()
        .zip(&lp.b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let pivots = exact::rref(&mut aug);
    if pivots.contains(&n) {
        return None;
    }
    let rows = pivots.len();
    let a: Vec<Vec<Rational>> = aug[..rows].iter().map(|r| r[..n].to_vec()).collect();
    let b: Vec<Rational> = aug[..rows].iter().map(|r| r[n].clone()).collect();

    let mut best: Option<Vec<Rational>> = None;
    for cols in combinations(n, rows) {
        let sub: Vec<Vec<Rational>> = a.iter().map(|r| cols.iter().map(|&c| r[c].clone()).collect()).collect();
        let Some(xb) = exact::solve_square(&sub, &b) else { continue };
        if xb.iter().any(Signed::is_negative) {
            continue;
        }
        let mut x = vec![Rational::zero(); n];
        for (&c, v) in cols.iter().zip(xb) {
            x[c] = v;
        }
        if best.as_ref().map_or(true, |bx| x[m] > bx[m]) {
            best = Some(x);
        }
    }
    let x = best?;
    let t = x[m].clone();
    if !t.is_positive() {
        return None;
    }
    Some(ws.active().iter().zip(&x[..m]).map(|(p, mu)| (*p, mu + &t)).collect())
}

/// Vertices of `{w : Σw = 0, (v_p,w) ≤ 0, (γ,w) ≤ 0, −1 ≤ w_k ≤ 1}`; picks
/// the one maximizing `(−γ,w)`, or failing that `(−γ,w) − Σ(v_p,w)`.
fn enumerate_farkas(ws: &WeightSystem, gamma: &TraceZeroVector<Rational>) -> ConeVerdict {
    let r = ws.rank();
    let roots = root_rows(ws);
    // Inequalities as (g, h) meaning (g, w) ≤ h.
    let mut ineq: Vec<(Vec<Rational>, Rational)> = Vec::new();
    for v in &roots {
        ineq.push((v.clone(), Rational::zero()));
    }
    ineq.push((gamma.entries().to_vec(), Rational::zero()));
    for k in 0..r {
        let mut e = vec![Rational::zero(); r];
        e[k] = rat(1);
        ineq.push((e.clone(), rat(1)));
        e[k] = rat(-1);
        ineq.push((e, rat(1)));
    }
    let neg_gamma: Vec<Rational> = gamma.entries().iter().map(|g| -g.clone()).collect();
    let ones = vec![rat(1); r];

    let mut best: Option<(Rational, Rational, Vec<Rational>)> = None;
    for tight in combinations(ineq.len(), r - 1) {
        let mut a: Vec<Vec<Rational>> = tight.iter().map(|&q| ineq[q].0.clone()).collect();
        let mut b: Vec<Rational> = tight.iter().map(|&q| ineq[q].1.clone()).collect();
        a.push(ones.clone());
        b.push(Rational::zero());
        let Some(w) = exact::solve_square(&a, &b) else { continue };
        if ineq.iter().any(|(g, h)| exact::dot(g, &w) > *h) {
            continue;
        }
        let sep = exact::dot(&neg_gamma, &w);
        let stiemke = roots.iter().fold(sep.clone(), |acc, v| acc - exact::dot(v, &w));
        let better = match &best {
            None => true,
            Some((bs, bst, _)) => sep > *bs || (sep == *bs && stiemke > *bst),
        };
        if better {
            best = Some((sep, stiemke, w));
        }
    }
    match best {
        Some((sep, stiemke, w)) if stiemke.is_positive() => ConeVerdict::Infeasible {
            farkas_w: normalize_direction(&w),
            kind: if sep.is_positive() { FarkasKind::Separating } else { FarkasKind::Boundary },
        },
        _ => ConeVerdict::Infeasible { farkas_w: TraceZeroVector::zero(r), kind: FarkasKind::Separating },
    }
}

/// All `k`-subsets of `0..n` in lexicographic order.
fn combinations(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut state: Option<Vec<usize>> = (k <= n).then(|| (0..k).collect());
    std::iter::from_fn(move || {
        let current = state.clone()?;
        // Advance.
        let mut next = current.clone();
        let mut i = k;
        loop {
            if i == 0 {
                state = None;
                break;
            }
            i -= 1;
            if next[i] < n - k + i {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                state = Some(next);
                break;
            }
        }
        Some(current)
    })
}

#[cfg(test)]
mod tests {
    use super::super::{check_condition_v, gamma_from_integers, ConeStatus};
    use super::*;
    use crate::weights::RootPair;

    fn ws(r: usize, pairs: &[(usize, usize)]) -> WeightSystem {
        WeightSystem::new(r, pairs.iter().map(|&(i, j)| RootPair::new(i, j))).unwrap()
    }

    #[test]
    fn combinations_count() {
        assert_eq!(combinations(5, 2).count(), 10);
        assert_eq!(combinations(4, 0).count(), 1);
        assert_eq!(combinations(3, 4).count(), 0);
        assert_eq!(combinations(4, 4).collect::<Vec<_>>(), vec![vec![0, 1, 2, 3]]);
    }

    #[test]
    fn oracle_examples() {
        let cases: &[(usize, &[(usize, usize)], &[i64], ConeStatus)] = &[
            (2, &[(1, 2)], &[-1, 1], ConeStatus::Feasible),
            (2, &[(1, 2)], &[1, -1], ConeStatus::Infeasible),
            (3, &[(2, 1), (3, 2), (1, 3)], &[2, -1, -1], ConeStatus::Feasible),
            (2, &[(1, 2), (2, 1)], &[0, 0], ConeStatus::Feasible),
            (3, &[(1, 2)], &[0, -1, 1], ConeStatus::Infeasible),
        ];
        for (r, pairs, g, expected) in cases {
            let w = ws(*r, pairs);
            let g = gamma_from_integers(g).unwrap();
            let o = oracle_condition_v(&w, &g).unwrap();
            let s = check_condition_v(&w, &g).unwrap();
            assert_eq!(o.status(), *expected);
            assert_eq!(s.status(), *expected);
        }
    }

    #[test]
    fn oracle_refuses_large_instances() {
        let w = WeightSystem::cyclic(7).unwrap();
        let g = gamma_from_integers(&[0; 7]).unwrap();
        assert!(matches!(oracle_condition_v(&w, &g), Err(ConeError::OracleTooLarge { .. })));
    }
}
