//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Tolerances are pinned below.

use std::process::ExitCode;
use std::time::Instant;

use hetoda::cone::ConeVerdict;
use hetoda::functional::{gradient, integrated_witness, m_path_integral, second_variation, PolygonalPath};
use hetoda::{
    check_condition_v, criticality_check, fieldexpr, fixtures, full_he_residual, geodesic_scan, m_restricted,
    make_cyclic, oracle_condition_v, residual_mu, Asymptotics, ConeStatus, Criticality, HiggsProblem, PeriodicGrid,
    Potential, SolveOptions, SolveStatus,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const CONE_CASES: usize = 200;
const CONE_SECONDS: f64 = 5.0;
const MANUFACTURED_ERR: f64 = 1e-8;
const RESIDUAL_TOL: f64 = 1e-10;
const NEWTON_ITERS: usize = 30;
const MANUFACTURED_SECONDS: f64 = 10.0;
const REFINEMENT_RATIO: f64 = 1e2;
const DERIVATIVE_REL: f64 = 1e-6;
const TWICE_GRADIENT: f64 = 1e-13;
const CONVEXITY_FLOOR: f64 = -1e-10;
const PATH_TOL: f64 = 1e-8;
const PATH_PANELS: usize = 64;
const OFFDIAG_ZERO: f64 = 1e-10;
const OFFDIAG_NONZERO: f64 = 1e-3;
const ANCHOR_TOL: f64 = 1e-12;

struct Verdict {
    ok: bool,
    detail: String,
}

fn grid(n: usize) -> PeriodicGrid {
    PeriodicGrid::new(n).unwrap()
}

fn random_case(seed: u64, n: usize) -> (HiggsProblem, Potential, Potential) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = grid(n);
    let r = 2 + (seed as usize % 3);
    let ws = fixtures::random_weight_system(r, 5, &mut rng);
    let p = fixtures::random_problem(&g, ws, &mut rng).unwrap();
    let xi = fixtures::random_potential(&g, r, &mut rng, 0.5);
    let eta = fixtures::random_potential(&g, r, &mut rng, 0.5);
    (p, xi, eta)
}

fn cone_equivalence() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut agree, mut verified, mut feasible) = (0, 0, 0);
    for _ in 0..CONE_CASES {
        let (ws, gamma) = fixtures::random_cone_instance(&mut rng);
        let fast = check_condition_v(&ws, &gamma).unwrap();
        let slow = oracle_condition_v(&ws, &gamma).unwrap();
        agree += usize::from(fast.status() == slow.status());
        verified += usize::from(fast.verify(&ws, &gamma) && slow.verify(&ws, &gamma));
        feasible += usize::from(fast.status() == ConeStatus::Feasible);
    }
    let secs = start.elapsed().as_secs_f64();
    Verdict {
        ok: agree == CONE_CASES && verified == CONE_CASES && secs < CONE_SECONDS,
        detail: format!(
            "{agree}/{CONE_CASES} statuses agree ({feasible} feasible), {verified}/{CONE_CASES} certificates verified, {secs:.2} s (limit {CONE_SECONDS} s)"
        ),
    }
}

fn manufactured() -> Verdict {
    let start = Instant::now();
    let g = grid(64);
    let target = fixtures::manufactured_target(&g);
    let p = fixtures::manufactured_cyclic(&target).unwrap();
    let (xi, rep) = hetoda::solve(&p, &SolveOptions::default()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let err = fixtures::max_diff(&xi, &target);
    let residual = residual_mu(&p, &xi).unwrap().max_abs();

    // The trigonometric target is band-limited and exact on both grids, so
    // refinement is measured on a smooth target with full Fourier support.
    let smooth_err = |n| {
        let (p, exact) = fixtures::smooth_manufactured(&grid(n)).unwrap();
        let (xi, rep) = hetoda::solve(&p, &SolveOptions::default()).unwrap();
        assert_eq!(rep.status, SolveStatus::Converged);
        fixtures::max_diff(&xi, &exact)
    };
    let (e32, e64) = (smooth_err(32), smooth_err(64));
    let ratio = e32 / e64;
    Verdict {
        ok: rep.status == SolveStatus::Converged
            && err < MANUFACTURED_ERR
            && residual < RESIDUAL_TOL
            && rep.iterations < NEWTON_ITERS
            && secs < MANUFACTURED_SECONDS
            && ratio > REFINEMENT_RATIO,
        detail: format!(
            "{} in {} iterations, |xi-xi*| = {err:.2e} (< {MANUFACTURED_ERR:.0e}), |R| = {residual:.2e} (< {RESIDUAL_TOL:.0e}), {secs:.2} s; smooth target error N=32 {e32:.2e}, N=64 {e64:.2e}, ratio {ratio:.2e} (> {REFINEMENT_RATIO:.0e})",
            rep.status, rep.iterations
        ),
    }
}

fn derivatives() -> Verdict {
    let (mut grad, mut hess, mut twice) = (0.0f64, 0.0f64, 0.0f64);
    for seed in 0..20 {
        let (p, xi, eta) = random_case(1000 + seed, 32);
        let m = |t: f64| m_restricted(&p, &xi.axpy(t, &eta)).unwrap().total;
        let eps = 1e-4;
        let fd = (m(eps) - m(-eps)) / (2.0 * eps);
        let exact = gradient(&p, &xi).unwrap().inner(&eta);
        grad = grad.max((fd - exact).abs() / exact.abs());
        let h = 1e-3;
        let fd2 = (m(h) - 2.0 * m(0.0) + m(-h)) / (h * h);
        let q = second_variation(&p, &xi, &eta).unwrap();
        hess = hess.max((fd2 - q).abs() / q.abs());
        let r = residual_mu(&p, &xi).unwrap();
        twice = twice.max(r.sub(&gradient(&p, &xi).unwrap().scaled(2.0)).max_abs());
    }
    Verdict {
        ok: grad < DERIVATIVE_REL && hess < DERIVATIVE_REL && twice <= TWICE_GRADIENT,
        detail: format!(
            "20 cases at N=32: gradient rel err {grad:.2e}, second variation rel err {hess:.2e} (< {DERIVATIVE_REL:.0e}), |R - 2 grad| {twice:.2e} (<= {TWICE_GRADIENT:.0e})"
        ),
    }
}

fn convexity() -> Verdict {
    let mut worst = f64::INFINITY;
    for seed in 0..50 {
        let (p, xi, eta) = random_case(2000 + seed, 16);
        let ts: Vec<f64> = (0..=20).map(|k| -1.0 + 0.1 * k as f64).collect();
        let values: Vec<f64> = ts.iter().map(|&t| m_restricted(&p, &xi.axpy(t, &eta)).unwrap().total).collect();
        for w in values.windows(3) {
            worst = worst.min(w[2] - 2.0 * w[1] + w[0]);
        }
    }
    Verdict {
        ok: worst >= CONVEXITY_FLOOR,
        detail: format!("50 lines x 19 second differences, minimum {worst:.3e} (>= {CONVEXITY_FLOOR:.0e})"),
    }
}

fn positive_side() -> (Verdict, Potential, HiggsProblem) {
    let g = grid(64);
    let e = |s: &str| fieldexpr::parse(s).unwrap();
    let phi = [e("1"), e("2"), e("1+sin(2*pi*x)^2")];
    let k = [e("1"), e("1"), e("1")];
    // Zero-mean curvature, so the degrees vanish.
    let a = [e("2*pi*cos(2*pi*x)"), e("-2*pi*cos(2*pi*x) + pi*sin(2*pi*y)"), e("-pi*sin(2*pi*y)")];
    let p = make_cyclic(3, &g, &phi, &k, &a).unwrap();
    let (cert, _) = p.cone_certificate(hetoda::cone::DEFAULT_DENOMINATOR).unwrap();
    let (xi, rep) = hetoda::solve(&p, &SolveOptions::default()).unwrap();
    let crit = criticality_check(&p, &xi, OFFDIAG_ZERO).unwrap();
    let witness = integrated_witness(&p, &xi).unwrap();
    let min_witness = witness.iter().map(|w| w.1).fold(f64::INFINITY, f64::min);
    let gamma_max = p.gamma().iter().fold(0.0f64, |m, g| m.max(g.abs()));
    let ok = cert.status() == ConeStatus::Feasible
        && rep.status == SolveStatus::Converged
        && rep.residual_linf < RESIDUAL_TOL
        && crit.verdict == Criticality::FullCriticalPoint
        && crit.norms.offdiagonal_linf < OFFDIAG_ZERO
        && min_witness > 0.0;
    let lambdas: Vec<String> = witness.iter().map(|(pair, l)| format!("{pair} {l:.4}")).collect();
    let detail = format!(
        "|gamma| {gamma_max:.1e}, cone {}, solver {} with |R| = {:.2e}, verify {} with off-diagonal {:.2e}, witness [{}]",
        cert.status(),
        rep.status,
        rep.residual_linf,
        crit.verdict,
        crit.norms.offdiagonal_linf,
        lambdas.join(", ")
    );
    (Verdict { ok, detail }, xi, p)
}

fn negative_side() -> Verdict {
    let p = fixtures::inactive_rank_two(&grid(16), 1.0).unwrap();
    let (cert, _) = p.cone_certificate(hetoda::cone::DEFAULT_DENOMINATOR).unwrap();
    let farkas = cert.farkas_integers();
    let (scan_class, solve_status, cross) = match &cert.verdict {
        ConeVerdict::Infeasible { farkas_w, .. } => {
            let w: Vec<f64> = farkas_w.entries().iter().map(hetoda::exact::to_f64).collect();
            let eta = Potential::constant(p.grid(), &w).unwrap();
            let ts: Vec<f64> = (0..=10).map(f64::from).collect();
            let scan = geodesic_scan(&p, &p.zero_potential(), &eta, &ts).unwrap();
            let (_, rep) = hetoda::solve(&p, &SolveOptions::default()).unwrap();
            let cross = rep.certificate_cross_check.as_ref().ok().and_then(|c| c.farkas_integers());
            (Some(scan.classification), Some(rep.status), cross)
        }
        ConeVerdict::Feasible { .. } => (None, None, None),
    };
    let ok = cert.status() == ConeStatus::Infeasible
        && farkas == Some(vec![-1, 1])
        && scan_class == Some(Asymptotics::DivergesDown)
        && solve_status == Some(SolveStatus::DivergenceDetected)
        && cross == farkas;
    Verdict {
        ok,
        detail: format!(
            "cone {} with w = {farkas:?}, probe {}, solver {}, cross-check w = {cross:?}",
            cert.status(),
            scan_class.map_or("n/a".into(), |c| c.to_string()),
            solve_status.map_or("n/a".into(), |s| s.to_string())
        ),
    }
}

fn path_independence() -> Verdict {
    let (p, xi, eta) = random_case(77, 32);
    let closed = m_restricted(&p, &xi).unwrap().total;
    let zero = p.zero_potential();
    let first = PolygonalPath { vertices: vec![zero.clone(), eta.clone(), xi.clone()] };
    let second = PolygonalPath { vertices: vec![zero, xi.scaled(0.5).sub(&eta), xi.add(&eta.scaled(0.3)), xi.clone()] };
    let a = m_path_integral(&p, &first, PATH_PANELS, 4).unwrap();
    let b = m_path_integral(&p, &second, PATH_PANELS, 4).unwrap();
    let worst = (a - closed).abs().max((b - closed).abs());
    Verdict {
        ok: worst < PATH_TOL,
        detail: format!("closed form {closed:.12}, paths {a:.12} and {b:.12}, max deviation {worst:.2e} (< {PATH_TOL:.0e})"),
    }
}

fn off_diagonal(cyclic_xi: &Potential, cyclic: &HiggsProblem) -> Verdict {
    let p = fixtures::two_entry(&grid(32)).unwrap();
    let (xi, rep) = hetoda::solve(&p, &SolveOptions::default()).unwrap();
    let two = criticality_check(&p, &xi, OFFDIAG_ZERO).unwrap();
    let cyc = criticality_check(cyclic, cyclic_xi, OFFDIAG_ZERO).unwrap();
    let ok = rep.status == SolveStatus::Converged
        && two.verdict == Criticality::DiagonalOnly
        && two.norms.offdiagonal_linf > OFFDIAG_NONZERO
        && cyc.verdict == Criticality::FullCriticalPoint
        && cyc.norms.offdiagonal_linf < OFFDIAG_ZERO;
    Verdict {
        ok,
        detail: format!(
            "two-entry {} (|R| = {:.2e}) -> {} with off-diagonal {:.3e} (> {OFFDIAG_NONZERO:.0e}); cyclic -> {} with off-diagonal {:.2e} (< {OFFDIAG_ZERO:.0e})",
            rep.status, rep.residual_linf, two.verdict, two.norms.offdiagonal_linf, cyc.verdict, cyc.norms.offdiagonal_linf
        ),
    }
}

fn anchor() -> Verdict {
    let mut worst = 0.0f64;
    for seed in 0..20 {
        let (p, xi, _) = random_case(3000 + seed, 32);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = p.grid().clone();
        let diag = (0..p.rank())
            .map(|_| (fixtures::random_field(&g, &mut rng, 2, 1.0), fixtures::random_field(&g, &mut rng, 2, 1.0)))
            .collect();
        let p = p.with_diagonal(diag).unwrap();
        let res = full_he_residual(&p, &xi).unwrap();
        let half = residual_mu(&p, &xi).unwrap().scaled(0.5);
        let d = Potential::new(res.diagonal).unwrap();
        worst = worst.max(d.sub(&half).max_abs());
    }
    Verdict { ok: worst < ANCHOR_TOL, detail: format!("20 cases at N=32, max |diag - R/2| = {worst:.2e} (< {ANCHOR_TOL:.0e})") }
}

fn main() -> ExitCode {
    let (positive, cyclic_xi, cyclic) = positive_side();
    let results = [
        ("cone_oracle_equivalence", cone_equivalence()),
        ("manufactured_solution", manufactured()),
        ("gradient_and_hessian", derivatives()),
        ("convexity", convexity()),
        ("cone_feasible_solves", positive),
        ("cone_infeasible_diverges", negative_side()),
        ("path_independence", path_independence()),
        ("off_diagonal_criterion", off_diagonal(&cyclic_xi, &cyclic)),
        ("diagonal_matches_scalar_residual", anchor()),
    ];
    let mut failed = 0;
    for (k, (name, v)) in results.iter().enumerate() {
        println!("{} [{}] {name}: {}", if v.ok { "PASS" } else { "FAIL" }, k + 1, v.detail);
        failed += usize::from(!v.ok);
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
