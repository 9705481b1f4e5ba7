use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use hetoda::cone::ConeVerdict;
use hetoda::functional::{geodesic_scan, integrated_witness, write_scan_csv};
use hetoda::grid::io::save_hef1;
use hetoda::problem::{validate_log_integrability, CheckStatus};
use hetoda::solver::flat_subspace;
use hetoda::verify::HeResidual;
use hetoda::{
    criticality_check, exact, full_he_residual, solve, ConeStatus, Criticality, HiggsProblem, Potential,
    SolveOptions, SolveStatus,
};

use crate::build::{build_problem, probe_directions, FieldLoader};
use crate::config::RunConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_DIVERGED: i32 = 3;
pub const EXIT_MAX_ITER: i32 = 4;
pub const EXIT_DIAGONAL_ONLY: i32 = 5;

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.12}")).collect();
    format!("({})", parts.join(", "))
}

fn active_line(p: &HiggsProblem) -> String {
    if p.ws().active().is_empty() {
        return "none".into();
    }
    p.ws().active().iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

/// Loads the problem and refuses data whose validation fails.
fn load_problem<'a>(cfg: &'a RunConfig, out: &mut dyn Write) -> Result<(HiggsProblem, FieldLoader<'a>)> {
    let mut loader = FieldLoader::new(cfg)?;
    let p = build_problem(cfg, &mut loader)?;
    let integrability = validate_log_integrability(&p);
    if integrability.status() == CheckStatus::Fail {
        write!(out, "{integrability}")?;
        bail!("validation failed: an active Higgs entry vanishes identically");
    }
    Ok((p, loader))
}

fn create_output_dir(cfg: &RunConfig) -> Result<PathBuf> {
    let dir = cfg.output_path();
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn write_heatmap(res: &HeResidual, dir: &Path) -> Result<()> {
    let mut buf = Vec::new();
    res.write_heatmap_csv(&mut buf)?;
    let path = dir.join("offdiag_heatmap.csv");
    fs::write(&path, buf).with_context(|| format!("writing {}", path.display()))
}

pub fn check_cone(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    let (p, _) = load_problem(cfg, out)?;
    let (cert, gamma_q) = p.cone_certificate(cfg.denominator)?;
    writeln!(out, "rank = {}", p.rank())?;
    writeln!(out, "active = {}", active_line(&p))?;
    writeln!(out, "gamma = {}", fmt_vec(p.gamma()))?;
    writeln!(out, "gamma_rational = {gamma_q}")?;
    writeln!(out, "flat_subspace_dim = {}", flat_subspace(&p).dim())?;
    writeln!(out, "certificate:")?;
    for line in cert.to_string().lines() {
        writeln!(out, "  {line}")?;
    }
    write!(out, "{}", validate_log_integrability(&p))?;
    Ok(match cert.status() {
        ConeStatus::Feasible => EXIT_OK,
        ConeStatus::Infeasible => EXIT_INFEASIBLE,
    })
}

pub fn solve_cmd(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    let (p, mut loader) = load_problem(cfg, out)?;
    let initial = match &cfg.solver.initial {
        Some(path) => Some(loader.potential(path)?),
        None => None,
    };
    let opts = SolveOptions {
        tol: cfg.solver.tol,
        max_iter: cfg.solver.max_iter,
        divergence_radius: cfg.solver.divergence_radius,
        initial,
        max_cg_iter: cfg.solver.max_cg_iter,
    };
    let (xi, report) = solve(&p, &opts)?;
    let dir = create_output_dir(cfg)?;
    save_hef1(&dir.join("xi.hef1"), xi.planes())?;

    let mut text = report.to_string();
    text.push_str(&validate_log_integrability(&p).to_string());
    if report.status == SolveStatus::Converged {
        let witness = integrated_witness(&p, &xi)?;
        for (pair, lam) in witness {
            text.push_str(&format!("witness{pair} = {lam:.12e}\n"));
        }
    }
    write_text(&dir.join("solve_report.txt"), &text)?;
    write!(out, "{text}")?;

    let verify_text = if report.status == SolveStatus::Converged {
        let rep = criticality_check(&p, &xi, cfg.verify_tol)?;
        let res = full_he_residual(&p, &xi)?;
        write_heatmap(&res, &dir)?;
        rep.to_string()
    } else {
        format!("verdict = skipped\nreason = solver status {}\n", report.status)
    };
    write_text(&dir.join("verify_report.txt"), &verify_text)?;
    Ok(match report.status {
        SolveStatus::Converged => EXIT_OK,
        SolveStatus::DivergenceDetected => EXIT_DIVERGED,
        SolveStatus::MaxIterations => EXIT_MAX_ITER,
    })
}

pub fn verify_cmd(cfg: &RunConfig, solution: Option<&Path>, out: &mut dyn Write) -> Result<i32> {
    let (p, mut loader) = load_problem(cfg, out)?;
    let path = match solution {
        Some(s) => std::env::current_dir()?.join(s),
        None => cfg.output_path().join("xi.hef1"),
    };
    let xi = loader.potential(path.to_str().context("solution path is not UTF-8")?)?;
    let rep = criticality_check(&p, &xi, cfg.verify_tol)?;
    let res = full_he_residual(&p, &xi)?;
    let dir = create_output_dir(cfg)?;
    write_heatmap(&res, &dir)?;
    let text = rep.to_string();
    write_text(&dir.join("verify_report.txt"), &text)?;
    write!(out, "{text}")?;
    Ok(match rep.verdict {
        Criticality::FullCriticalPoint => EXIT_OK,
        Criticality::DiagonalOnly => EXIT_DIAGONAL_ONLY,
    })
}

pub fn probe_cmd(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    let (p, mut loader) = load_problem(cfg, out)?;
    let directions = probe_directions(cfg, &mut loader)?;
    if directions.is_empty() {
        bail!("[probe] lists no direction.NAME entries");
    }
    let base = match &cfg.probe.base {
        Some(path) => loader.potential(path)?,
        None => p.zero_potential(),
    };
    let t = cfg.probe.t.values();
    let dir = create_output_dir(cfg)?;
    let mut summary = String::from("direction classification linear_slope overflow_at\n");
    for (name, eta) in directions {
        let eta = match eta {
            Some(e) => e,
            None => {
                let (cert, _) = p.cone_certificate(cfg.denominator)?;
                let ConeVerdict::Infeasible { farkas_w, .. } = &cert.verdict else {
                    bail!("direction {name} asks for the Farkas direction, but the cone condition holds");
                };
                let w: Vec<f64> = farkas_w.entries().iter().map(exact::to_f64).collect();
                Potential::constant(p.grid(), &w)?
            }
        };
        let scan = geodesic_scan(&p, &base, &eta, &t)?;
        let csv = dir.join(format!("probe_{name}.csv"));
        let mut buf = Vec::new();
        write_scan_csv(&mut buf, &scan)?;
        fs::write(&csv, buf).with_context(|| format!("writing {}", csv.display()))?;
        let overflow = scan.overflow_at.map_or("none".to_string(), |t| format!("{t:?}"));
        summary.push_str(&format!("{name} {} {:.12e} {overflow}\n", scan.classification, scan.linear_slope));
    }
    write_text(&dir.join("probe_summary.txt"), &summary)?;
    write!(out, "{summary}")?;
    Ok(EXIT_OK)
}
