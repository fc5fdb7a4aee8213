//! Gauss-Legendre quadrature rules.
//!
//! Nodes are the roots of the Legendre polynomial P_m, found by Newton
//! iteration from the Chebyshev-like initial guesses; weights are
//! 2/((1-x^2) P'_m(x)^2). Base rules on [-1, 1] are cached per m and
//! affinely mapped on request, so identical inputs always give
//! bit-identical rules.

use crate::error::{Error, Result};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

/// Newton convergence tolerance for node location.
pub const NODE_NEWTON_TOL: f64 = 1e-15;

/// Relative tolerance on sum(weights) = b - a.
pub const WEIGHT_SUM_REL_TOL: f64 = 1e-13;

/// Relative tolerance for exact integration of polynomials of degree
/// <= 2m - 1.
pub const DEGREE_EXACTNESS_REL_TOL: f64 = 1e-12;

/// Largest supported node count.
pub const MAX_NODES: usize = 4096;

/// Quadrature rule on an interval (a, b): strictly increasing interior
/// nodes with positive weights summing to b - a.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    interval: (f64, f64),
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Apply the rule to an integrand.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// m-point Gauss-Legendre rule mapped to [a, b].
pub fn gauss_legendre(m: usize, a: f64, b: f64) -> Result<QuadratureRule> {
    if m == 0 {
        return Err(Error::Argument("gauss_legendre: m must be >= 1".into()));
    }
    if m > MAX_NODES {
        return Err(Error::Resource(format!(
            "gauss_legendre: m = {m} exceeds the supported maximum {MAX_NODES}"
        )));
    }
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::Argument(format!(
            "gauss_legendre: need finite a < b, got a = {a}, b = {b}"
        )));
    }
    let base = base_rule(m);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let nodes = base.0.iter().map(|&x| mid + half * x).collect();
    let weights = base.1.iter().map(|&w| half * w).collect();
    Ok(QuadratureRule {
        interval: (a, b),
        nodes,
        weights,
    })
}

type BaseRule = Arc<(Vec<f64>, Vec<f64>)>;

fn base_rule(m: usize) -> BaseRule {
    static CACHE: OnceLock<Mutex<HashMap<usize, BaseRule>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().unwrap().get(&m) {
        return Arc::clone(rule);
    }
    let rule = Arc::new(compute_base_rule(m));
    cache.lock().unwrap().entry(m).or_insert(rule).clone()
}

/// P_m(x) and P'_m(x) by the three-term recurrence.
fn legendre(m: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let kf = k as f64;
        let next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = next;
    }
    let dp = m as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

fn compute_base_rule(m: usize) -> (Vec<f64>, Vec<f64>) {
    if m == 1 {
        return (vec![0.0], vec![2.0]);
    }
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m {
        // Initial guess clusters correctly toward the interval ends.
        let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(m, x);
            let step = p / dp;
            x -= step;
            if step.abs() <= NODE_NEWTON_TOL {
                break;
            }
        }
        let (_, dp) = legendre(m, x);
        // cos() guesses run from +1 side down; store ascending.
        nodes[m - 1 - i] = x;
        weights[m - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}
