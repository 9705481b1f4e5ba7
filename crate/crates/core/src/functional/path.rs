use rayon::prelude::*;

use super::{gradient, FunctionalError};
use crate::grid::pairwise_sum;
use crate::problem::{HiggsProblem, Potential};

/// A piecewise smooth path `t ↦ ξ_t` on `[0, 1]`.
pub trait MetricPath: Sync {
    /// `(ξ_t, ∂_t ξ_t)`.
    fn at(&self, t: f64) -> (Potential, Potential);

    /// Interior points where the path may fail to be smooth.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// `ξ_t = t·ξ`.
pub struct StraightPath(pub Potential);

impl MetricPath for StraightPath {
    fn at(&self, t: f64) -> (Potential, Potential) {
        (self.0.scaled(t), self.0.clone())
    }
}

/// `ξ_t = t^k·ξ`.
pub struct PowerPath {
    pub end: Potential,
    pub exponent: i32,
}

impl MetricPath for PowerPath {
    fn at(&self, t: f64) -> (Potential, Potential) {
        let k = self.exponent;
        (self.end.scaled(t.powi(k)), self.end.scaled(k as f64 * t.powi(k - 1)))
    }
}

/// Straight segments through `vertices`, traversed at uniform parameter speed.
pub struct PolygonalPath {
    pub vertices: Vec<Potential>,
}

impl PolygonalPath {
    fn segments(&self) -> usize {
        self.vertices.len() - 1
    }
}

impl MetricPath for PolygonalPath {
    fn at(&self, t: f64) -> (Potential, Potential) {
        let m = self.segments();
        let s = ((t * m as f64).floor() as usize).min(m - 1);
        let local = t * m as f64 - s as f64;
        let (v0, v1) = (&self.vertices[s], &self.vertices[s + 1]);
        let dir = v1.sub(v0);
        (v0.axpy(local, &dir), dir.scaled(m as f64))
    }

    fn breakpoints(&self) -> Vec<f64> {
        let m = self.segments();
        (1..m).map(|s| s as f64 / m as f64).collect()
    }
}

/// Nodes and weights of the `order`-point Gauss–Legendre rule on `[−1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1, "quadrature order must be positive");
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// `∫₀¹ ∫⟨∇M(ξ_t), ∂_tξ_t⟩ dt` with `panels` equal panels (split further at
/// the path's breakpoints) of `order` Gauss nodes each. Equals
/// `M(ξ_1) − M(ξ_0)` up to quadrature error.
pub fn m_path_integral(
    p: &HiggsProblem,
    path: &dyn MetricPath,
    panels: usize,
    order: usize,
) -> Result<f64, FunctionalError> {
    assert!(panels >= 1, "need at least one panel");
    let mut edges: Vec<f64> = (0..=panels).map(|k| k as f64 / panels as f64).collect();
    edges.extend(path.breakpoints());
    edges.sort_by(f64::total_cmp);
    edges.dedup_by(|a, b| (*a - *b).abs() < 1e-15);

    let (nodes, weights) = gauss_legendre(order);
    let mut points = Vec::new();
    for w in edges.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        for (x, wt) in nodes.iter().zip(&weights) {
            points.push((mid + half * x, half * wt));
        }
    }
    let values: Vec<f64> = points
        .par_iter()
        .map(|&(t, wt)| {
            let (xi, dxi) = path.at(t);
            Ok(wt * gradient(p, &xi)?.inner(&dxi))
        })
        .collect::<Result<_, FunctionalError>>()?;
    Ok(pairwise_sum(&values))
}
