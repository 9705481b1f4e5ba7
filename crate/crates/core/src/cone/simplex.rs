//! Dense two-phase simplex over exact rationals, Bland's rule throughout.
//!
//! Solves `maximize cᵀx  s.t.  A x = b, x ≥ 0`. Only sized for the small
//! auxiliary programs the cone module builds.

use num_traits::{Signed, Zero};

use crate::exact::Rational;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<Rational>, value: Rational },
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct StandardLp {
    pub a: Vec<Vec<Rational>>,
    pub b: Vec<Rational>,
    pub c: Vec<Rational>,
}

struct Tableau {
    /// `m` rows of `ncols + 1` entries; the last entry is the right-hand side.
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> &Rational {
        &self.rows[i][self.ncols]
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let inv = self.rows[row][col].recip();
        for x in self.rows[row].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = self.rows[row].clone();
        for (i, r) in self.rows.iter_mut().enumerate() {
            if i == row || r[col].is_zero() {
                continue;
            }
            let f = r[col].clone();
            for (x, p) in r.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x -= &f * p;
                }
            }
        }
        self.basis[row] = col;
    }

    fn reduced_costs(&self, c: &[Rational]) -> Vec<Rational> {
        let mut rc: Vec<Rational> = c.to_vec();
        for (i, &bi) in self.basis.iter().enumerate() {
            let cb = &c[bi];
            if cb.is_zero() {
                continue;
            }
            for (j, x) in rc.iter_mut().enumerate() {
                let a = &self.rows[i][j];
                if !a.is_zero() {
                    *x -= cb * a;
                }
            }
        }
        rc
    }

    /// Runs primal simplex on `c`, restricted to columns `< allowed`.
    /// Returns `false` when unbounded.
    fn optimize(&mut self, c: &[Rational], allowed: usize) -> bool {
        loop {
            let rc = self.reduced_costs(c);
            let entering = (0..allowed).find(|&j| rc[j].is_positive() && !self.basis.contains(&j));
            let Some(col) = entering else {
                return true;
            };
            let mut best: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][col];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs(i) / a;
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                Some((row, _)) => self.pivot(row, col),
                None => return false,
            }
        }
    }
}

pub fn solve(lp: &StandardLp) -> LpOutcome {
    let m = lp.a.len();
    let n = lp.c.len();
    debug_assert!(lp.a.iter().all(|r| r.len() == n));
    debug_assert_eq!(lp.b.len(), m);

    // Phase I: one artificial per row, rows sign-normalized so b ≥ 0.
    let ncols = n + m;
    let mut rows = Vec::with_capacity(m);
    for (i, (arow, bi)) in lp.a.iter().zip(&lp.b).enumerate() {
        let flip = bi.is_negative();
        let mut row: Vec<Rational> = Vec::with_capacity(ncols + 1);
        for x in arow {
            row.push(if flip { -x.clone() } else { x.clone() });
        }
        for k in 0..m {
            row.push(if k == i { Rational::from_integer(1.into()) } else { Rational::zero() });
        }
        row.push(if flip { -bi.clone() } else { bi.clone() });
        rows.push(row);
    }
    let mut t = Tableau { rows, basis: (n..n + m).collect(), ncols };
    let mut phase1 = vec![Rational::zero(); ncols];
    for x in phase1.iter_mut().skip(n) {
        *x = Rational::from_integer((-1).into());
    }
    t.optimize(&phase1, ncols);
    let infeasibility: Rational = t
        .basis
        .iter()
        .enumerate()
        .filter(|(_, &b)| b >= n)
        .fold(Rational::zero(), |acc, (i, _)| acc + t.rhs(i));
    if infeasibility.is_positive() {
        return LpOutcome::Infeasible;
    }

    // Drive zero-level artificials out of the basis; drop redundant rows.
    let mut i = 0;
    while i < t.rows.len() {
        if t.basis[i] >= n {
            match (0..n).find(|&j| !t.rows[i][j].is_zero()) {
                Some(j) => {
                    t.pivot(i, j);
                    i += 1;
                }
                None => {
                    t.rows.remove(i);
                    t.basis.remove(i);
                }
            }
        } else {
            i += 1;
        }
    }

    let mut c2 = lp.c.clone();
    c2.resize(ncols, Rational::zero());
    if !t.optimize(&c2, n) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![Rational::zero(); n];
    for (i, &bi) in t.basis.iter().enumerate() {
        if bi < n {
            x[bi] = t.rhs(i).clone();
        }
    }
    let value = x.iter().zip(&lp.c).fold(Rational::zero(), |acc, (xi, ci)| acc + xi * ci);
    LpOutcome::Optimal { x, value }
}
