//! `gen-cyclic`: writes a ready-to-run cyclic config.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Result};
use hetoda::grid::io::save_hef1;
use hetoda::{fixtures, PeriodicGrid, WeightSystem};

use crate::config::{Direction, Mode, PhiSlot, PhiSpec, ProbeSection, RunConfig, Source, SolverSection, DEFAULT_VERIFY_TOL};

pub const EXACT_FILE: &str = "xi_exact.hef1";

const TARGET: [&str; 3] = ["sin(2*pi*x)", "cos(2*pi*y)", "-sin(2*pi*x)-cos(2*pi*y)"];

/// `a_α = −½(4π² ξ*_α + Σ 4 e^{ξ*_i − ξ*_j} (v_{i,j})_α)` for the unit cyclic
/// rank-3 data, so that `ξ*` solves the equation exactly.
fn manufactured_curvature() -> Result<BTreeMap<usize, Source>> {
    let ws = WeightSystem::cyclic(3)?;
    let mut a = BTreeMap::new();
    for alpha in 1..=3 {
        let mut s = format!("-2*pi^2*({})", TARGET[alpha - 1]);
        for p in ws.active() {
            let e = format!("exp(({})-({}))", TARGET[p.i - 1], TARGET[p.j - 1]);
            if p.i == alpha {
                s.push_str(&format!(" - 2*{e}"));
            } else if p.j == alpha {
                s.push_str(&format!(" + 2*{e}"));
            }
        }
        a.insert(alpha, Source::Expr(s));
    }
    Ok(a)
}

pub fn gen_cyclic(rank: usize, n: usize, phi: &[String], manufactured: bool, out: &Path) -> Result<RunConfig> {
    if rank < 2 {
        bail!("rank must be at least 2");
    }
    if !phi.is_empty() && phi.len() != rank {
        bail!("give either no --phi or exactly {rank}");
    }
    if manufactured && (rank != 3 || !phi.is_empty()) {
        bail!("--manufactured needs rank 3 and unit Higgs entries");
    }
    let grid = PeriodicGrid::new(n)?;
    let phi = (1..=rank)
        .map(|k| {
            let text = phi.get(k - 1).cloned().unwrap_or_else(|| "1".into());
            hetoda::parse(&text)?;
            Ok(PhiSpec { slot: PhiSlot::Cyclic(k), re: Source::Expr(text), im: None })
        })
        .collect::<Result<Vec<_>>>()?;
    let a = if manufactured { manufactured_curvature()? } else { BTreeMap::new() };
    let mut w = vec!["0".to_string(); rank];
    w[0] = "1".into();
    w[1] = "-1".into();
    let base_dir = out.parent().map(Path::to_path_buf).unwrap_or_else(PathBuf::new);
    let cfg = RunConfig {
        base_dir: base_dir.clone(),
        rank,
        n,
        mode: Mode::Cyclic,
        phi,
        diag: BTreeMap::new(),
        k: BTreeMap::new(),
        a,
        solver: SolverSection::default(),
        probe: ProbeSection { directions: vec![("e12".into(), Direction::Planes(w))], ..ProbeSection::default() },
        verify_tol: DEFAULT_VERIFY_TOL,
        denominator: hetoda::cone::DEFAULT_DENOMINATOR,
        output_dir: "out".into(),
    };
    std::fs::write(out, cfg.dump())?;
    if manufactured {
        let exact = fixtures::manufactured_target(&grid);
        save_hef1(&base_dir.join(EXACT_FILE), exact.planes())?;
    }
    Ok(cfg)
}
