//! `selftest`: seeded invariant checks on small grids.

use std::io::Write;

use anyhow::Result;
use hetoda::functional::{gradient, m_path_integral, second_variation, PolygonalPath, StraightPath};
use hetoda::grid::io::{decode_hef1, write_hef1};
use hetoda::{
    check_condition_v, fixtures, full_he_residual, m_restricted, oracle_condition_v, residual_mu, HiggsProblem,
    PeriodicGrid, Potential,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    name: &'static str,
    worst: f64,
    limit: f64,
}

fn random_case(rng: &mut ChaCha8Rng, n: usize) -> Result<(HiggsProblem, Potential, Potential)> {
    let g = PeriodicGrid::new(n)?;
    let r = rng.gen_range(2..=4);
    let ws = fixtures::random_weight_system(r, 5, rng);
    let p = fixtures::random_problem(&g, ws, rng)?;
    let xi = fixtures::random_potential(&g, r, rng, 0.5);
    let eta = fixtures::random_potential(&g, r, rng, 0.5);
    Ok((p, xi, eta))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-3)
}

fn cone_mismatches(rng: &mut ChaCha8Rng, cases: usize) -> Result<f64> {
    let mut bad = 0;
    for _ in 0..cases {
        let (ws, gamma) = fixtures::random_cone_instance(rng);
        let fast = check_condition_v(&ws, &gamma)?;
        let slow = oracle_condition_v(&ws, &gamma)?;
        if fast.status() != slow.status() || !fast.verify(&ws, &gamma) {
            bad += 1;
        }
    }
    Ok(bad as f64)
}

pub fn run(seed: u64, cases: usize, out: &mut dyn Write) -> Result<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut results = vec![Outcome { name: "cone_matches_oracle", worst: cone_mismatches(&mut rng, 10 * cases)?, limit: 0.5 }];

    let (mut grad, mut hess, mut twice, mut convex, mut anchor, mut path) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..cases {
        let (p, xi, eta) = random_case(&mut rng, 16)?;
        let m = |t: f64| m_restricted(&p, &xi.axpy(t, &eta)).map(|e| e.total);
        let eps = 1e-4;
        let fd = (m(eps)? - m(-eps)?) / (2.0 * eps);
        grad = grad.max(rel(fd, gradient(&p, &xi)?.inner(&eta)));
        let h = 1e-3;
        let second = m(h)? - 2.0 * m(0.0)? + m(-h)?;
        hess = hess.max(rel(second / (h * h), second_variation(&p, &xi, &eta)?));
        convex = convex.max(-second);
        let r = residual_mu(&p, &xi)?;
        twice = twice.max(r.sub(&gradient(&p, &xi)?.scaled(2.0)).max_abs());
        let res = full_he_residual(&p, &xi)?;
        let diag = Potential::new(res.diagonal)?;
        anchor = anchor.max(diag.sub(&r.scaled(0.5)).max_abs());
        let closed = m(0.0)?;
        let straight = m_path_integral(&p, &StraightPath(xi.clone()), 32, 4)?;
        let detour = PolygonalPath { vertices: vec![p.zero_potential(), eta.clone(), xi.clone()] };
        let bent = m_path_integral(&p, &detour, 32, 4)?;
        path = path.max((straight - closed).abs()).max((bent - closed).abs());
    }
    results.push(Outcome { name: "gradient_vs_central_difference", worst: grad, limit: 1e-6 });
    results.push(Outcome { name: "second_variation_vs_second_difference", worst: hess, limit: 1e-6 });
    results.push(Outcome { name: "residual_is_twice_gradient", worst: twice, limit: 1e-13 });
    results.push(Outcome { name: "convexity_along_lines", worst: convex, limit: 1e-10 });
    results.push(Outcome { name: "diagonal_is_half_residual", worst: anchor, limit: 1e-12 });
    results.push(Outcome { name: "path_independence", worst: path, limit: 1e-8 });

    let g = PeriodicGrid::new(8)?;
    let xi = fixtures::random_potential(&g, 3, &mut rng, 1.0);
    let mut bytes = Vec::new();
    write_hef1(&mut bytes, xi.planes())?;
    let back = Potential::new(decode_hef1(&bytes)?)?;
    results.push(Outcome { name: "hef1_round_trip", worst: back.sub(&xi).max_abs(), limit: f64::MIN_POSITIVE });

    let mut all = true;
    for o in &results {
        let ok = o.worst < o.limit;
        all &= ok;
        writeln!(out, "{} {} worst = {:.3e} limit = {:.1e}", if ok { "PASS" } else { "FAIL" }, o.name, o.worst, o.limit)?;
    }
    Ok(all)
}
