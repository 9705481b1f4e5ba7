use std::fmt;

use crate::cone::{ConeCertificate, ConeStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    DivergenceDetected,
    MaxIterations,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveStatus::Converged => "Converged",
            SolveStatus::DivergenceDetected => "DivergenceDetected",
            SolveStatus::MaxIterations => "MaxIterations",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    pub energy: f64,
    /// `‖∇M‖_{L²}` on the complement of the flat subspace.
    pub grad_norm: f64,
    pub xi_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub iterations: usize,
    pub residual_linf: f64,
    pub residual_l2: f64,
    pub energy_history: Vec<IterationRecord>,
    pub flat_subspace_dim: usize,
    /// Norm of the linear term's component along the flat subspace.
    pub flat_drift: f64,
    pub cg_truncations: usize,
    pub gamma: Vec<f64>,
    pub certificate_cross_check: Result<ConeCertificate, String>,
}

impl SolveReport {
    pub fn cross_check_status(&self) -> Option<ConeStatus> {
        self.certificate_cross_check.as_ref().ok().map(ConeCertificate::status)
    }
}

impl fmt::Display for SolveReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "status = {}", self.status)?;
        writeln!(f, "iterations = {}", self.iterations)?;
        writeln!(f, "residual_linf = {:.6e}", self.residual_linf)?;
        writeln!(f, "residual_l2 = {:.6e}", self.residual_l2)?;
        let gamma: Vec<String> = self.gamma.iter().map(|g| format!("{g:.12}")).collect();
        writeln!(f, "gamma = ({})", gamma.join(", "))?;
        writeln!(f, "flat_subspace_dim = {}", self.flat_subspace_dim)?;
        writeln!(f, "flat_drift = {:.6e}", self.flat_drift)?;
        writeln!(f, "cg_truncations = {}", self.cg_truncations)?;
        match &self.certificate_cross_check {
            Ok(cert) => {
                writeln!(f, "certificate_cross_check = {}", cert.status())?;
                for line in cert.to_string().lines() {
                    writeln!(f, "  {line}")?;
                }
            }
            Err(e) => writeln!(f, "certificate_cross_check = error: {e}")?,
        }
        writeln!(f, "energy_history = iter M grad_norm xi_norm")?;
        for rec in &self.energy_history {
            writeln!(f, "  {} {:.15e} {:.6e} {:.6e}", rec.iter, rec.energy, rec.grad_norm, rec.xi_norm)?;
        }
        Ok(())
    }
}
