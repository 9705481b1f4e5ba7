use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::cone::ConeStatus;
use crate::fixtures;
use crate::grid::PeriodicGrid;
use crate::weights::{RootPair, WeightSystem};

fn grid(n: usize) -> PeriodicGrid {
    PeriodicGrid::new(n).unwrap()
}

#[test]
fn flat_subspace_examples() {
    let g = grid(8);
    let cyc = fixtures::cyclic_unit(&g, 3).unwrap();
    assert_eq!(flat_subspace(&cyc).dim(), 0);

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let one = fixtures::random_problem(&g, WeightSystem::new(3, [RootPair::new(1, 2)]).unwrap(), &mut rng).unwrap();
    let flat = flat_subspace(&one);
    assert_eq!(flat.dim(), 1);
    let u = &flat.orthonormal[0];
    let s = u[0] / 1.0;
    for (got, want) in u.iter().zip([1.0, 1.0, -2.0]) {
        assert!((got - s * want).abs() < 1e-15);
    }

    let none = fixtures::inactive_rank_two(&g, 0.0).unwrap();
    assert_eq!(flat_subspace(&none).dim(), 1);
    let none4 = HiggsProblem::assemble(
        WeightSystem::new(4, []).unwrap(),
        &g,
        vec![],
        vec![ScalarField::constant(&g, 1.0); 4],
        vec![ScalarField::zeros(&g); 4],
    )
    .unwrap();
    assert_eq!(flat_subspace(&none4).dim(), 3);
}

#[test]
fn cyclic_unit_converges_immediately() {
    let p = fixtures::cyclic_unit(&grid(16), 3).unwrap();
    let (xi, rep) = solve(&p, &SolveOptions::default()).unwrap();
    assert_eq!(rep.status, SolveStatus::Converged);
    assert!(rep.iterations <= 2);
    assert!(rep.residual_linf < 1e-12);
    assert_eq!(xi.max_abs(), 0.0);
    assert_eq!(rep.cross_check_status(), Some(ConeStatus::Feasible));
}

#[test]
fn recovers_manufactured_solution() {
    let g = grid(64);
    let target = fixtures::manufactured_target(&g);
    let p = fixtures::manufactured_cyclic(&target).unwrap();
    let (xi, rep) = solve(&p, &SolveOptions::default()).unwrap();
    assert_eq!(rep.status, SolveStatus::Converged, "{rep}");
    assert!(rep.iterations < 30);
    assert!(rep.residual_linf < 1e-10);
    assert!(fixtures::max_diff(&xi, &target) < 1e-8);
}

#[test]
fn smooth_manufactured_error_drops_under_refinement() {
    let err = |n| {
        let (p, exact) = fixtures::smooth_manufactured(&grid(n)).unwrap();
        let (xi, rep) = solve(&p, &SolveOptions::default()).unwrap();
        assert_eq!(rep.status, SolveStatus::Converged);
        fixtures::max_diff(&xi, &exact)
    };
    let (e32, e64) = (err(32), err(64));
    assert!(e32 > 1e2 * e64, "{e32:e} vs {e64:e}");
}

#[test]
fn infeasible_degrees_diverge_with_farkas_certificate() {
    let p = fixtures::inactive_rank_two(&grid(8), 1.0).unwrap();
    let (_, rep) = solve(&p, &SolveOptions::default()).unwrap();
    assert_eq!(rep.status, SolveStatus::DivergenceDetected);
    let cert = rep.certificate_cross_check.as_ref().unwrap();
    assert_eq!(cert.status(), ConeStatus::Infeasible);
    assert_eq!(cert.farkas_integers(), Some(vec![-1, 1]));
    assert!(rep.flat_drift > 1.0);
    let last = rep.energy_history.last().unwrap();
    assert!(last.xi_norm > 1e3);
    assert!(rep.energy_history.windows(2).all(|w| w[1].energy < w[0].energy));
}

#[test]
fn boundary_degrees_diverge_inside_the_complement() {
    let g = grid(16);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let ws = WeightSystem::new(3, [RootPair::new(1, 2)]).unwrap();
    let base = fixtures::random_problem(&g, ws.clone(), &mut rng).unwrap();
    // γ = (1, −1, 0): orthogonal to the flat direction but on the wrong side of v_{1,2}.
    let two_pi = 2.0 * std::f64::consts::PI;
    let a = [two_pi, -two_pi, 0.0].iter().map(|&v| ScalarField::constant(&g, v)).collect();
    let p = HiggsProblem::assemble(ws, &g, base.phi().to_vec(), base.k().to_vec(), a).unwrap();
    let (_, rep) = solve(&p, &SolveOptions::default()).unwrap();
    assert_eq!(rep.status, SolveStatus::DivergenceDetected, "{rep}");
    assert!(rep.flat_drift < 1e-9);
    assert_eq!(rep.cross_check_status(), Some(ConeStatus::Infeasible));
}

#[test]
fn random_cyclic_problems_converge_monotonically() {
    for seed in 0..4 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = 2 + seed as usize % 3;
        let p = fixtures::random_problem(&grid(32), WeightSystem::cyclic(r).unwrap(), &mut rng).unwrap();
        let (_, rep) = solve(&p, &SolveOptions::default()).unwrap();
        assert_eq!(rep.status, SolveStatus::Converged, "seed {seed}\n{rep}");
        assert!(rep.residual_linf <= 1e-10);
        for w in rep.energy_history.windows(2) {
            assert!(w[1].energy <= w[0].energy + 1e-12 * w[0].energy.abs().max(1.0));
        }
    }
}

#[test]
fn flat_shift_leaves_residual_unchanged() {
    let g = grid(16);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let ws = WeightSystem::new(3, [RootPair::new(1, 2), RootPair::new(2, 1)]).unwrap();
    let base = fixtures::random_problem(&g, ws.clone(), &mut rng).unwrap();
    let a = vec![ScalarField::zeros(&g); 3];
    let p = HiggsProblem::assemble(ws, &g, base.phi().to_vec(), base.k().to_vec(), a).unwrap();
    let (xi, rep) = solve(&p, &SolveOptions::default()).unwrap();
    assert_eq!(rep.status, SolveStatus::Converged);
    assert_eq!(rep.flat_subspace_dim, 1);
    let w = Potential::constant(&g, &[0.7, 0.7, -1.4]).unwrap();
    let shifted = functional::residual_mu(&p, &xi.add(&w)).unwrap();
    assert!((shifted.l2_norm() - rep.residual_l2).abs() < 1e-12);
    // The returned representative has no flat component.
    let means = xi.means();
    assert!((means[0] + means[1] - 2.0 * means[2]).abs() < 1e-12);
}

#[test]
fn report_text_is_deterministic() {
    let p = fixtures::two_entry(&grid(16)).unwrap();
    let (_, a) = solve(&p, &SolveOptions::default()).unwrap();
    let (_, b) = solve(&p, &SolveOptions::default()).unwrap();
    assert_eq!(a.to_string(), b.to_string());
    let text = a.to_string();
    assert!(text.starts_with("status = Converged\niterations = "));
    assert!(text.contains("certificate_cross_check = Feasible\n"));
}

#[test]
fn rejects_bad_options() {
    let p = fixtures::cyclic_unit(&grid(8), 3).unwrap();
    let opts = SolveOptions { tol: 0.0, ..SolveOptions::default() };
    assert!(matches!(solve(&p, &opts), Err(SolveError::Options(_))));
}
