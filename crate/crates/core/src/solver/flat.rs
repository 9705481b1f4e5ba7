use crate::exact::{self, Rational};
use crate::problem::{HiggsProblem, Potential};
use crate::weights::TraceZeroVector;

/// `W_flat = {w ∈ V constant : (v, w) = 0 for every active pair}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatSubspace {
    /// Exact kernel basis.
    pub exact: Vec<TraceZeroVector<Rational>>,
    /// The same span, orthonormalized in floats.
    pub orthonormal: Vec<Vec<f64>>,
}

pub fn flat_subspace(p: &HiggsProblem) -> FlatSubspace {
    let r = p.rank();
    let mut rows: Vec<Vec<Rational>> = p
        .ws()
        .active()
        .iter()
        .map(|pair| p.ws().root_vector::<Rational>(pair.i, pair.j).expect("validated pair").into_entries())
        .collect();
    rows.push(vec![exact::rat(1); r]);
    let kernel = exact::nullspace(&rows, r);

    let mut orthonormal: Vec<Vec<f64>> = Vec::new();
    for k in &kernel {
        let mut v: Vec<f64> = k.iter().map(exact::to_f64).collect();
        // Two Gram–Schmidt passes.
        for _ in 0..2 {
            for u in &orthonormal {
                let d: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(u).for_each(|(x, ui)| *x -= d * ui);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        orthonormal.push(v.into_iter().map(|x| x / norm).collect());
    }
    let exact = kernel
        .into_iter()
        .map(|k| TraceZeroVector::new(k).expect("kernel lies in V"))
        .collect();
    FlatSubspace { exact, orthonormal }
}

impl FlatSubspace {
    pub fn dim(&self) -> usize {
        self.orthonormal.len()
    }

    /// Orthogonal projection of a vector of plane means onto `W_flat`.
    pub fn drift(&self, means: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; means.len()];
        for u in &self.orthonormal {
            let d: f64 = u.iter().zip(means).map(|(a, b)| a * b).sum();
            out.iter_mut().zip(u).for_each(|(o, ui)| *o += d * ui);
        }
        out
    }

    /// `ξ` minus its L² projection onto the constant flat directions.
    pub fn remove(&self, xi: &Potential) -> Potential {
        if self.orthonormal.is_empty() {
            return xi.clone();
        }
        let shift = self.drift(&xi.means());
        if shift.iter().all(|&s| s == 0.0) {
            return xi.clone();
        }
        let planes = xi.planes().iter().zip(&shift).map(|(f, s)| f.map(|v| v - s)).collect();
        Potential::project_unchecked(planes)
    }
}
