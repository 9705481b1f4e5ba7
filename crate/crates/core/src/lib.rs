//! Diagonal Hermitian–Einstein metrics for Higgs bundles that split as a sum
//! of line bundles over the flat torus: an exact cone test on the degrees,
//! a spectral Newton solver for the scalar system, and a full matrix
//! verification of the resulting metric.

pub mod cone;
pub mod exact;
pub mod fieldexpr;
pub mod fixtures;
pub mod functional;
pub mod grid;
pub mod problem;
pub mod solver;
pub mod verify;
pub mod weights;

pub use cone::{check_condition_v, check_condition_v_float, oracle_condition_v, ConeCertificate, ConeStatus, FarkasKind};
pub use exact::Rational;
pub use fieldexpr::{parse, FieldExpr, ParseError};
pub use functional::{geodesic_scan, m_restricted, residual_mu, Asymptotics, FunctionalError, GeodesicScan};
pub use grid::{GridError, PeriodicGrid, ScalarField};
pub use problem::{make_cyclic, HiggsEntry, HiggsProblem, Potential, ProblemError};
pub use solver::{solve, SolveError, SolveOptions, SolveReport, SolveStatus};
pub use verify::{criticality_check, full_he_residual, Criticality, VerifyError, VerifyReport};
pub use weights::{RootPair, TraceZeroVector, WeightError, WeightSystem};
