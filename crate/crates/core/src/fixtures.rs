//! Seeded problem generators shared by the test suites, the acceptance gate
//! and `selftest`.

use std::f64::consts::PI;

use rand::Rng;

use crate::exact::Rational;
use crate::fieldexpr::parse;
use crate::functional::{self, FunctionalError};
use crate::grid::{PeriodicGrid, ScalarField};
use crate::problem::{make_cyclic, HiggsEntry, HiggsProblem, Potential, ProblemError};
use crate::weights::{RootPair, TraceZeroVector, WeightSystem};

/// A band-limited field `Σ_{|k|∞ ≤ modes} (α cos + β sin)(2π k·x) / (1+|k|²)`
/// with coefficients uniform in `[−amplitude, amplitude]`.
pub fn random_field<R: Rng>(grid: &PeriodicGrid, rng: &mut R, modes: i32, amplitude: f64) -> ScalarField {
    let mut terms = Vec::new();
    for k1 in -modes..=modes {
        for k2 in 0..=modes {
            if k2 == 0 && k1 < 0 {
                continue;
            }
            let damp = amplitude / (1.0 + (k1 * k1 + k2 * k2) as f64);
            terms.push((k1 as f64, k2 as f64, rng.gen_range(-damp..=damp), rng.gen_range(-damp..=damp)));
        }
    }
    ScalarField::from_fn(grid, |x, y| {
        terms
            .iter()
            .map(|&(k1, k2, c, s)| {
                let th = 2.0 * PI * (k1 * x + k2 * y);
                c * th.cos() + s * th.sin()
            })
            .sum()
    })
    .expect("finite")
}

pub fn random_potential<R: Rng>(grid: &PeriodicGrid, r: usize, rng: &mut R, amplitude: f64) -> Potential {
    let planes = (0..r).map(|_| random_field(grid, rng, 3, amplitude)).collect();
    Potential::projected(planes).expect("same grid")
}

/// Random smooth data on the given active set: complex `φ`, positive `k`,
/// pointwise trace-zero `a`.
pub fn random_problem<R: Rng>(
    grid: &PeriodicGrid,
    ws: WeightSystem,
    rng: &mut R,
) -> Result<HiggsProblem, ProblemError> {
    let r = ws.rank();
    let phi = ws
        .active()
        .iter()
        .map(|&pair| {
            let offset = rng.gen_range(0.5..1.5);
            let re = random_field(grid, rng, 2, 0.3).map(|v| v + offset);
            let im = random_field(grid, rng, 2, 0.3);
            HiggsEntry { pair, re, im }
        })
        .collect();
    let k = (0..r).map(|_| random_field(grid, rng, 2, 0.5).map(f64::exp)).collect();
    let a_raw: Vec<ScalarField> = (0..r)
        .map(|_| {
            let shift = rng.gen_range(-3.0..3.0);
            random_field(grid, rng, 2, 2.0).map(|v| v + shift)
        })
        .collect();
    let a = Potential::projected(a_raw)?.into_planes();
    HiggsProblem::assemble(ws, grid, phi, k, a)
}

/// A random weight system of rank `r` with up to `max_active` distinct pairs.
pub fn random_weight_system<R: Rng>(r: usize, max_active: usize, rng: &mut R) -> WeightSystem {
    let mut all: Vec<RootPair> = (1..=r)
        .flat_map(|i| (1..=r).filter(move |&j| j != i).map(move |j| RootPair::new(i, j)))
        .collect();
    let count = rng.gen_range(0..=max_active.min(all.len()));
    let mut picked = Vec::with_capacity(count);
    for _ in 0..count {
        let idx = rng.gen_range(0..all.len());
        picked.push(all.swap_remove(idx));
    }
    WeightSystem::new(r, picked).expect("valid pairs")
}

/// A random cone instance: rank 2..=5, at most 8 active pairs, and a
/// trace-zero `γ` whose entries are `k/d` with `|k| ≤ 10`, `d ∈ {1,2,3}`.
/// Half of the draws put `−γ` in the cone on purpose.
pub fn random_cone_instance<R: Rng>(rng: &mut R) -> (WeightSystem, TraceZeroVector<Rational>) {
    let r = rng.gen_range(2..=5);
    let ws = random_weight_system(r, 8, rng);
    let d: i64 = rng.gen_range(1..=3);
    loop {
        let nums: Vec<i64> = if rng.gen_bool(0.5) && !ws.active().is_empty() {
            let mut g = vec![0i64; r];
            for p in ws.active() {
                let lam = rng.gen_range(0..=2);
                g[p.i - 1] -= lam;
                g[p.j - 1] += lam;
            }
            g
        } else {
            let mut g: Vec<i64> = (0..r - 1).map(|_| rng.gen_range(-10..=10)).collect();
            g.push(-g.iter().sum::<i64>());
            g
        };
        if nums.iter().all(|k| k.abs() <= 10) {
            let entries = nums.iter().map(|&k| Rational::new(k.into(), d.into())).collect();
            return (ws, TraceZeroVector::new(entries).expect("sums to zero"));
        }
    }
}

/// Cyclic rank-`r` problem with `φ ≡ 1`, `k ≡ 1`, `a ≡ 0`; solved by `ξ = 0`.
pub fn cyclic_unit(grid: &PeriodicGrid, r: usize) -> Result<HiggsProblem, ProblemError> {
    let one = parse("1").expect("literal");
    let zero = parse("0").expect("literal");
    make_cyclic(r, grid, &vec![one.clone(); r], &vec![one; r], &vec![zero; r])
}

/// `(sin 2πx, cos 2πy, −sin 2πx − cos 2πy)`.
pub fn manufactured_target(grid: &PeriodicGrid) -> Potential {
    let f = |g: fn(f64, f64) -> f64| ScalarField::from_fn(grid, g).expect("finite");
    Potential::projected(vec![
        f(|x, _| (2.0 * PI * x).sin()),
        f(|_, y| (2.0 * PI * y).cos()),
        f(|x, y| -(2.0 * PI * x).sin() - (2.0 * PI * y).cos()),
    ])
    .expect("same grid")
}

/// Cyclic problem with `φ ≡ 1`, `k ≡ 1` whose right-hand side is chosen so
/// that `target` solves the equation: `b = Δξ* + Σ c e^{(v,ξ*)} v`.
pub fn manufactured_cyclic(target: &Potential) -> Result<HiggsProblem, FunctionalError> {
    let grid = target.grid();
    let base = cyclic_unit(grid, target.rank())?;
    let lhs = functional::residual_mu(&base, target)?;
    // base has b = 0, so its residual is the full left-hand side.
    let a: Vec<ScalarField> = lhs.planes().iter().map(|f| f.scale(-0.5)).collect();
    let phi = base.phi().to_vec();
    Ok(HiggsProblem::assemble(base.ws().clone(), grid, phi, base.k().to_vec(), a)?)
}

const BUMP_SHIFT: f64 = 1.5;

/// `g(θ) = 1/(A − cos θ)` and the exact `Δ` of `x ↦ g(2πx)`. Its Fourier
/// coefficients decay like `(A − √(A²−1))^|k|`, so it is not band-limited.
fn bump(theta: f64) -> (f64, f64) {
    let (s, c) = theta.sin_cos();
    let d = BUMP_SHIFT - c;
    let second = -c / (d * d) + 2.0 * s * s / (d * d * d);
    (1.0 / d, -(2.0 * PI).powi(2) * second)
}

/// A cyclic rank-3 manufactured problem whose exact solution
/// `(g(x), g(y), −g(x) − g(y))` (with `g` the zero-mean bump above) is not
/// band-limited. The right-hand side uses the analytic Laplacian, so the
/// discrete error measures the spatial discretization. Returns the problem and
/// the exact solution sampled on `grid`.
pub fn smooth_manufactured(grid: &PeriodicGrid) -> Result<(HiggsProblem, Potential), FunctionalError> {
    let mean = 1.0 / (BUMP_SHIFT * BUMP_SHIFT - 1.0).sqrt();
    let gx = ScalarField::from_fn(grid, |x, _| bump(2.0 * PI * x).0 - mean).expect("finite");
    let gy = ScalarField::from_fn(grid, |_, y| bump(2.0 * PI * y).0 - mean).expect("finite");
    let lx = ScalarField::from_fn(grid, |x, _| bump(2.0 * PI * x).1).expect("finite");
    let ly = ScalarField::from_fn(grid, |_, y| bump(2.0 * PI * y).1).expect("finite");
    let exact = Potential::projected(vec![gx.clone(), gy.clone(), gx.add(&gy).scale(-1.0)]).expect("same grid");
    let lap = [lx.clone(), ly.clone(), lx.add(&ly).scale(-1.0)];

    let base = cyclic_unit(grid, 3)?;
    let mut rhs: Vec<ScalarField> = lap.to_vec();
    for (pair, c) in base.terms() {
        let w = c.zip_map(&exact.pair_with(pair), |cv, s| cv * s.exp());
        rhs[pair.i - 1] = rhs[pair.i - 1].add(&w);
        rhs[pair.j - 1] = rhs[pair.j - 1].sub(&w);
    }
    let a = Potential::projected(rhs.iter().map(|f| f.scale(-0.5)).collect())?.into_planes();
    let p = HiggsProblem::assemble(base.ws().clone(), grid, base.phi().to_vec(), base.k().to_vec(), a)?;
    Ok((p, exact))
}

/// Active set `{(1,2), (1,3)}` with constant degrees `γ = (−2, 1, 1)`, which
/// lie in the open cone (`−γ = v_{1,2} + v_{1,3}`).
pub fn two_entry(grid: &PeriodicGrid) -> Result<HiggsProblem, ProblemError> {
    let ws = WeightSystem::new(3, [RootPair::new(1, 2), RootPair::new(1, 3)])?;
    let f = |g: fn(f64, f64) -> f64| ScalarField::from_fn(grid, g).expect("finite");
    let phi = vec![
        HiggsEntry { pair: RootPair::new(1, 2), re: f(|x, _| 1.0 + 0.3 * (2.0 * PI * x).cos()), im: f(|_, y| 0.2 * (2.0 * PI * y).sin()) },
        HiggsEntry::real(RootPair::new(1, 3), f(|x, y| 1.5 + 0.4 * (2.0 * PI * (x + y)).sin())),
    ];
    let k = vec![ScalarField::constant(grid, 1.0); 3];
    let a = [-2.0, 1.0, 1.0].iter().map(|g| ScalarField::constant(grid, 2.0 * PI * g)).collect();
    HiggsProblem::assemble(ws, grid, phi, k, a)
}

/// Rank 2, no active pairs, `a = (2π d, −2π d)`, so `γ = (d, −d)`.
pub fn inactive_rank_two(grid: &PeriodicGrid, d: f64) -> Result<HiggsProblem, ProblemError> {
    let ws = WeightSystem::new(2, [])?;
    let a = vec![ScalarField::constant(grid, 2.0 * PI * d), ScalarField::constant(grid, -2.0 * PI * d)];
    HiggsProblem::assemble(ws, grid, vec![], vec![ScalarField::constant(grid, 1.0); 2], a)
}

/// Maximum pointwise difference between two stacks.
pub fn max_diff(a: &Potential, b: &Potential) -> f64 {
    a.sub(b).max_abs()
}
