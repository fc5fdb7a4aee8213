//! Exact-solution layer: the finite-time crossover kernel, the height
//! generating function det(1 - P0 K P0), and the Tracy-Widom GUE
//! distribution as its large-time limit.
//!
//! The crossover kernel is
//!
//! ```text
//! K_{s,t}(x, y) = int_R (1 + exp(-(t/2)^{1/3} lambda + s))^{-1}
//!                       Ai(x + lambda) Ai(y + lambda) dlambda
//! ```
//!
//! evaluated by composite Gauss-Legendre panels between exponential tail
//! cuts. The Fermi weight has poles at distance pi/(t/2)^{1/3} off the real
//! axis, so panels are refined near its midpoint to keep the quadrature
//! spectral; every evaluation runs at two panel resolutions (32/64 points)
//! and the worst observed gap is tracked as the convergence diagnostic.
//! Replacing the Fermi weight by the indicator of [0, inf) gives the Airy
//! kernel and, through the same Nystrom machinery, the Tracy-Widom GUE
//! distribution F(sigma) = det(1 - K_Ai) on L^2([sigma, inf)).

use crate::error::{Error, Result};
use crate::fredholm::{fredholm_det, truncate_domain, DeterminantResult, Kernel, DEFAULT_TAIL_TOL};
use crate::special::{ai_unchecked, airy_ai, airy_ai_prime, gauss_legendre};
use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, OnceLock};

/// Two-resolution quadrature gap above which kernel values are rejected.
pub const KERNEL_GAP_TOL: f64 = 1e-8;

/// Target absolute quadrature error for kernel values.
pub const KERNEL_ABS_TOL: f64 = 1e-10;

/// Exponential-envelope cut for the lambda integral tails.
const LAMBDA_TAIL_CUT_LN: f64 = -41.45; // ln(1e-18)

/// Ai(u)^2 is below the tail cut for u beyond this point.
const AIRY_SQ_TAIL_POINT: f64 = 11.0;

/// Base panel width of the composite lambda rule.
const PANEL_WIDTH: f64 = 2.0;

/// Coarse/fine points per panel for the two-resolution check.
const PANEL_POINTS_COARSE: usize = 32;
const PANEL_POINTS_FINE: usize = 64;

/// Half-count of refined panels straddling the Fermi midpoint.
const FERMI_REFINE_PANELS: i32 = 12;

/// Generating-function argument s and KPZ time t.
#[derive(Debug, Clone, Copy)]
pub struct CrossoverParams {
    s: f64,
    t: f64,
}

impl CrossoverParams {
    pub fn new(s: f64, t: f64) -> Result<Self> {
        if !s.is_finite() {
            return Err(Error::Argument(format!("CrossoverParams: s = {s}")));
        }
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Argument(format!(
                "CrossoverParams: t must be positive and finite, got {t}"
            )));
        }
        Ok(CrossoverParams { s, t })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// The derived fluctuation scale (t/2)^{1/3}.
    pub fn cube_root_scale(&self) -> f64 {
        (self.t / 2.0).powf(1.0 / 3.0)
    }
}

/// The scalar weight lambda -> (1 + exp(-(t/2)^{1/3} lambda + s))^{-1}.
///
/// Values are strictly inside (0, 1) (up to f64 saturation far in the
/// tails), nondecreasing in lambda, and equal to 1/2 at lambda = s (t/2)^{-1/3}.
#[derive(Debug, Clone, Copy)]
pub struct FermiFactor {
    scale: f64,
    s: f64,
}

impl FermiFactor {
    pub fn new(params: &CrossoverParams) -> Self {
        FermiFactor {
            scale: params.cube_root_scale(),
            s: params.s(),
        }
    }

    pub fn eval(&self, lambda: f64) -> f64 {
        1.0 / (1.0 + (-self.scale * lambda + self.s).exp())
    }

    /// The lambda at which the factor crosses 1/2.
    pub fn midpoint(&self) -> f64 {
        self.s / self.scale
    }
}

// ---------------------------------------------------------------------------
// Composite lambda quadrature shared by the crossover and Airy kernels.
// ---------------------------------------------------------------------------

struct LambdaGrid {
    nodes_coarse: Vec<f64>,
    wf_coarse: Vec<f64>,
    nodes_fine: Vec<f64>,
    wf_fine: Vec<f64>,
}

impl LambdaGrid {
    fn empty() -> Self {
        LambdaGrid {
            nodes_coarse: Vec::new(),
            wf_coarse: Vec::new(),
            nodes_fine: Vec::new(),
            wf_fine: Vec::new(),
        }
    }

    /// Panels on [lo, hi], optionally refined around `center` with the given
    /// spacing (pole-distance scale of the Fermi weight); `weight` is folded
    /// into the quadrature weights.
    fn build(
        lo: f64,
        hi: f64,
        refine: Option<(f64, f64)>,
        weight: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        if !(lo < hi) {
            return Ok(LambdaGrid::empty());
        }
        let mut breaks = Vec::new();
        let n_base = ((hi - lo) / PANEL_WIDTH).ceil().max(1.0) as usize;
        for i in 0..=n_base {
            breaks.push(lo + (hi - lo) * i as f64 / n_base as f64);
        }
        if let Some((center, spacing)) = refine {
            if spacing < PANEL_WIDTH {
                for k in -FERMI_REFINE_PANELS..=FERMI_REFINE_PANELS {
                    let b = center + k as f64 * spacing;
                    if b > lo && b < hi {
                        breaks.push(b);
                    }
                }
            }
        }
        breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-9);

        let mut grid = LambdaGrid::empty();
        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            for (m, nodes, wf) in [
                (
                    PANEL_POINTS_COARSE,
                    &mut grid.nodes_coarse,
                    &mut grid.wf_coarse,
                ),
                (PANEL_POINTS_FINE, &mut grid.nodes_fine, &mut grid.wf_fine),
            ] {
                let rule = gauss_legendre(m, a, b)?;
                for (&x, &wq) in rule.nodes().iter().zip(rule.weights()) {
                    nodes.push(x);
                    wf.push(wq * weight(x));
                }
            }
        }
        Ok(grid)
    }
}

/// Cached Ai(x + lambda) columns for one x, on both grid resolutions.
struct AiColumns {
    coarse: Vec<f64>,
    fine: Vec<f64>,
}

/// Shared two-resolution integration core.
struct ProductIntegrator {
    grid: LambdaGrid,
    cache: Mutex<HashMap<u64, Arc<AiColumns>>>,
    worst_gap_bits: AtomicU64,
}

impl ProductIntegrator {
    fn new(grid: LambdaGrid) -> Self {
        ProductIntegrator {
            grid,
            cache: Mutex::new(HashMap::new()),
            worst_gap_bits: AtomicU64::new(0),
        }
    }

    fn columns(&self, x: f64) -> Arc<AiColumns> {
        let key = x.to_bits();
        if let Some(c) = self.cache.lock().unwrap().get(&key) {
            return Arc::clone(c);
        }
        let cols = Arc::new(AiColumns {
            coarse: self
                .grid
                .nodes_coarse
                .iter()
                .map(|&l| ai_unchecked(x + l))
                .collect(),
            fine: self
                .grid
                .nodes_fine
                .iter()
                .map(|&l| ai_unchecked(x + l))
                .collect(),
        });
        self.cache
            .lock()
            .unwrap()
            .entry(key)
            .or_insert(cols)
            .clone()
    }

    fn record_gap(&self, gap: f64) {
        let bits = gap.to_bits();
        self.worst_gap_bits
            .fetch_max(bits, Ordering::Relaxed);
    }

    fn worst_gap(&self) -> f64 {
        f64::from_bits(self.worst_gap_bits.load(Ordering::Relaxed))
    }

    /// Two-resolution integral of w(l) Ai(x+l) Ai(y+l); returns the fine
    /// value and records the coarse/fine gap.
    fn integrate(&self, x: f64, y: f64) -> f64 {
        if self.grid.nodes_fine.is_empty() {
            return 0.0;
        }
        let cx = self.columns(x);
        let cy = self.columns(y);
        let coarse: f64 = self
            .grid
            .wf_coarse
            .iter()
            .zip(cx.coarse.iter().zip(&cy.coarse))
            .map(|(&wf, (&ax, &ay))| wf * ax * ay)
            .sum();
        let fine: f64 = self
            .grid
            .wf_fine
            .iter()
            .zip(cx.fine.iter().zip(&cy.fine))
            .map(|(&wf, (&ax, &ay))| wf * ax * ay)
            .sum();
        self.record_gap((fine - coarse).abs());
        fine
    }
}

/// Decay model for the diagonal of Airy-type kernels:
/// K_Ai(u, u) ~ exp(-(4/3) u^{3/2}) / (8 pi u) on the right,
/// O(sqrt(|u|)) oscillatory on the left. Safety factor 2 on the tail.
fn airy_diag_envelope(u: f64) -> f64 {
    if u < 1.0 {
        0.5 * (1.0 + u.abs().sqrt())
    } else {
        (-(4.0 / 3.0) * u.powf(1.5)).exp() / (4.0 * std::f64::consts::PI * u)
    }
}

// ---------------------------------------------------------------------------
// Crossover kernel K_{s,t}
// ---------------------------------------------------------------------------

pub struct CrossoverKernel {
    params: CrossoverParams,
    fermi: FermiFactor,
    integrator: ProductIntegrator,
}

impl CrossoverKernel {
    pub fn new(params: CrossoverParams) -> Result<Self> {
        let fermi = FermiFactor::new(&params);
        let c = params.cube_root_scale();
        // Left cut where the Fermi envelope e^{c l - s} is < 1e-18, right
        // cut where Ai(x + l)^2 has fallen below the same level for the
        // smallest admissible x (= 0, the projection edge).
        let lo = (params.s() + LAMBDA_TAIL_CUT_LN) / c;
        let hi = AIRY_SQ_TAIL_POINT;
        let grid = LambdaGrid::build(lo, hi, Some((fermi.midpoint(), 4.0 / c)), |l| {
            fermi.eval(l)
        })?;
        let kernel = CrossoverKernel {
            params,
            fermi,
            integrator: ProductIntegrator::new(grid),
        };
        // Probe the quadrature before letting determinants loose on it.
        for (x, y) in [(0.0, 0.0), (0.0, 1.0), (1.0, 2.0), (3.0, 0.5)] {
            kernel.eval_checked(x, y)?;
        }
        Ok(kernel)
    }

    pub fn params(&self) -> CrossoverParams {
        self.params
    }

    pub fn fermi(&self) -> &FermiFactor {
        &self.fermi
    }

    /// Worst coarse/fine quadrature gap observed so far.
    pub fn worst_gap(&self) -> f64 {
        self.integrator.worst_gap()
    }

    /// Kernel value with the two-resolution convergence check enforced.
    pub fn eval_checked(&self, x: f64, y: f64) -> Result<f64> {
        if !(x >= 0.0 && y >= 0.0) || !x.is_finite() || !y.is_finite() {
            return Err(Error::Argument(format!(
                "crossover_kernel: needs x, y >= 0, got ({x}, {y})"
            )));
        }
        let v = self.integrator.integrate(x, y);
        let gap = self.worst_gap();
        if gap > KERNEL_GAP_TOL {
            return Err(Error::Numeric(format!(
                "crossover_kernel: quadrature gap {gap:.3e} exceeds {KERNEL_GAP_TOL:.1e} \
                 at (s, t) = ({}, {})",
                self.params.s(),
                self.params.t()
            )));
        }
        Ok(v)
    }
}

impl Kernel for CrossoverKernel {
    fn eval(&self, x: f64, y: f64) -> f64 {
        self.integrator.integrate(x, y)
    }

    fn diagonal_envelope(&self, x: f64) -> Option<f64> {
        let c = self.params.cube_root_scale();
        let s = self.params.s();
        // Conservative split at x/2: Airy tail beyond, Fermi envelope below.
        let xh = (x / 2.0).max(0.0);
        let fermi_tail = (-s - c * xh).exp().min(1.0);
        Some(airy_diag_envelope(xh.max(1.0)) * (1.0 + fermi_tail) + (-s - c * x).exp())
    }
}

/// Pointwise K_{s,t}(x, y) for x, y >= 0.
pub fn crossover_kernel(x: f64, y: f64, params: CrossoverParams) -> Result<f64> {
    CrossoverKernel::new(params)?.eval_checked(x, y)
}

// ---------------------------------------------------------------------------
// Airy kernel
// ---------------------------------------------------------------------------

pub struct AiryKernel {
    integrator: ProductIntegrator,
}

impl AiryKernel {
    /// Kernel usable for arguments down to `domain_min`; the lambda cut is
    /// pushed out so Ai(domain_min + lambda)^2 is negligible at the cut.
    pub fn new(domain_min: f64) -> Result<Self> {
        if !domain_min.is_finite() {
            return Err(Error::Argument("AiryKernel: non-finite domain".into()));
        }
        let hi = (AIRY_SQ_TAIL_POINT - domain_min).max(2.0);
        let grid = LambdaGrid::build(0.0, hi, None, |_| 1.0)?;
        Ok(AiryKernel {
            integrator: ProductIntegrator::new(grid),
        })
    }

    pub fn worst_gap(&self) -> f64 {
        self.integrator.worst_gap()
    }

    pub fn eval_checked(&self, x: f64, y: f64) -> Result<f64> {
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::Argument(format!(
                "airy_kernel: non-finite arguments ({x}, {y})"
            )));
        }
        let v = self.integrator.integrate(x, y);
        let gap = self.worst_gap();
        if gap > KERNEL_GAP_TOL {
            return Err(Error::Numeric(format!(
                "airy_kernel: quadrature gap {gap:.3e} exceeds {KERNEL_GAP_TOL:.1e}"
            )));
        }
        Ok(v)
    }
}

impl Kernel for AiryKernel {
    fn eval(&self, x: f64, y: f64) -> f64 {
        self.integrator.integrate(x, y)
    }

    fn diagonal_envelope(&self, x: f64) -> Option<f64> {
        Some(airy_diag_envelope(x))
    }
}

/// Pointwise Airy kernel int_0^inf Ai(x+l) Ai(y+l) dl.
pub fn airy_kernel(x: f64, y: f64) -> Result<f64> {
    AiryKernel::new(x.min(y))?.eval_checked(x, y)
}

// ---------------------------------------------------------------------------
// Generating function and Tracy-Widom GUE
// ---------------------------------------------------------------------------

/// Smallest node count accepted for determinant-level operations.
pub const MIN_DET_NODES: usize = 20;

/// det(1 - P0 K_{s,t} P0) on L^2([0, inf)), truncated by the kernel's decay
/// envelope. The value is a probability-like quantity in (0, 1].
pub fn kpz_genfun(params: CrossoverParams, m: usize) -> Result<DeterminantResult> {
    if m < MIN_DET_NODES {
        return Err(Error::Argument(format!(
            "kpz_genfun: m = {m} < {MIN_DET_NODES}"
        )));
    }
    let kernel = CrossoverKernel::new(params)?;
    let interval = truncate_domain(&kernel, 0.0, DEFAULT_TAIL_TOL)?;
    let mut det = fredholm_det(&kernel, interval, m)?;
    let gap = kernel.worst_gap();
    if gap > KERNEL_GAP_TOL {
        return Err(Error::Numeric(format!(
            "kpz_genfun: kernel quadrature gap {gap:.3e} exceeds {KERNEL_GAP_TOL:.1e}"
        )));
    }
    if det.value <= 0.0 || det.value > 1.0 + 1e-6 {
        return Err(Error::Numeric(format!(
            "kpz_genfun: determinant {} outside (0, 1] at (s, t) = ({}, {})",
            det.value,
            params.s(),
            params.t()
        )));
    }
    det.value = det.value.min(1.0);
    Ok(det)
}

/// Tracy-Widom GUE distribution function with diagnostics:
/// det(1 - K_Ai) on L^2([sigma, inf)).
pub fn tw_gue_cdf_detailed(sigma: f64, m: usize) -> Result<DeterminantResult> {
    if m < MIN_DET_NODES {
        return Err(Error::Argument(format!(
            "tw_gue_cdf: m = {m} < {MIN_DET_NODES}"
        )));
    }
    if !sigma.is_finite() {
        return Err(Error::Argument("tw_gue_cdf: non-finite sigma".into()));
    }
    let kernel = AiryKernel::new(sigma)?;
    let interval = truncate_domain(&kernel, sigma, DEFAULT_TAIL_TOL)?;
    let mut det = fredholm_det(&kernel, interval, m)?;
    let gap = kernel.worst_gap();
    if gap > KERNEL_GAP_TOL {
        return Err(Error::Numeric(format!(
            "tw_gue_cdf: kernel quadrature gap {gap:.3e} exceeds {KERNEL_GAP_TOL:.1e}"
        )));
    }
    det.value = det.value.clamp(0.0, 1.0);
    Ok(det)
}

/// F_GUE(sigma), clamped to [0, 1].
pub fn tw_gue_cdf(sigma: f64, m: usize) -> Result<f64> {
    Ok(tw_gue_cdf_detailed(sigma, m)?.value)
}

/// Locate the median of F_GUE by bisection. Each iterate is accepted only
/// if the m vs 2m determinants agree to `resolution_tol`.
pub fn tw_gue_median(m: usize, resolution_tol: f64) -> Result<f64> {
    let (mut lo, mut hi) = (-2.5, -1.0);
    let f = |sigma: f64| -> Result<f64> {
        let det = tw_gue_cdf_detailed(sigma, m)?;
        if det.doubling_gap > resolution_tol {
            return Err(Error::Numeric(format!(
                "tw_gue_median: resolutions disagree by {:.3e} at sigma = {sigma}",
                det.doubling_gap
            )));
        }
        Ok(det.value)
    };
    if !(f(lo)? < 0.5 && f(hi)? > 0.5) {
        return Err(Error::Numeric(
            "tw_gue_median: bracket [-2.5, -1] failed".into(),
        ));
    }
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if f(mid)? < 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

// ---------------------------------------------------------------------------
// Tabulated TW GUE reference for statistics
// ---------------------------------------------------------------------------

/// Dense CDF table with moments, for standardized-sample comparisons.
/// Everything here is produced by this crate's own determinant runs; no
/// external constants enter.
pub struct TwGueTable {
    sigmas: Vec<f64>,
    cdf: Vec<f64>,
    mean: f64,
    sd: f64,
    skewness: f64,
}

impl TwGueTable {
    pub fn build(m: usize) -> Result<Self> {
        use rayon::prelude::*;
        let (lo, hi, step) = (-10.0f64, 6.0f64, 0.05f64);
        let n = ((hi - lo) / step).round() as usize + 1;
        let sigmas: Vec<f64> = (0..n).map(|i| lo + step * i as f64).collect();
        let cdf: Vec<f64> = sigmas
            .par_iter()
            .map(|&s| tw_gue_cdf(s, m))
            .collect::<Result<_>>()?;
        // Stieltjes moments over the table; mass outside [-10, 6] is < 1e-8.
        let (mut m0, mut m1) = (0.0, 0.0);
        for i in 0..n - 1 {
            let df = (cdf[i + 1] - cdf[i]).max(0.0);
            let mid = 0.5 * (sigmas[i] + sigmas[i + 1]);
            m0 += df;
            m1 += mid * df;
        }
        let mean = m1 / m0;
        let (mut m2, mut m3) = (0.0, 0.0);
        for i in 0..n - 1 {
            let df = (cdf[i + 1] - cdf[i]).max(0.0);
            let mid = 0.5 * (sigmas[i] + sigmas[i + 1]) - mean;
            m2 += mid * mid * df;
            m3 += mid * mid * mid * df;
        }
        m2 /= m0;
        m3 /= m0;
        Ok(TwGueTable {
            sigmas,
            cdf,
            mean,
            sd: m2.sqrt(),
            skewness: m3 / m2.powf(1.5),
        })
    }

    /// Process-wide table at the default resolution.
    pub fn shared() -> Result<&'static TwGueTable> {
        static TABLE: OnceLock<std::result::Result<TwGueTable, Error>> = OnceLock::new();
        TABLE
            .get_or_init(|| TwGueTable::build(60))
            .as_ref()
            .map_err(|e| e.clone())
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn sd(&self) -> f64 {
        self.sd
    }

    pub fn skewness(&self) -> f64 {
        self.skewness
    }

    /// Linear interpolation of F_GUE, clamped to [0, 1] outside the table.
    pub fn cdf(&self, sigma: f64) -> f64 {
        let (lo, hi) = (self.sigmas[0], *self.sigmas.last().unwrap());
        if sigma <= lo {
            return 0.0;
        }
        if sigma >= hi {
            return 1.0;
        }
        let step = self.sigmas[1] - self.sigmas[0];
        let idx = ((sigma - lo) / step).floor() as usize;
        let idx = idx.min(self.sigmas.len() - 2);
        let frac = (sigma - self.sigmas[idx]) / step;
        self.cdf[idx] + frac * (self.cdf[idx + 1] - self.cdf[idx])
    }

    /// CDF of the affinely standardized (mean 0, variance 1) distribution.
    pub fn standardized_cdf(&self, x: f64) -> f64 {
        self.cdf(self.mean + self.sd * x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn fermi_factor_invariants() {
        let p = CrossoverParams::new(0.7, 4.0).unwrap();
        let f = FermiFactor::new(&p);
        let mut prev = 0.0;
        // Range over which 1 - f is still resolvable in f64; beyond it the
        // factor saturates to exactly 1.
        let mut l = -20.0;
        while l <= 20.0 {
            let v = f.eval(l);
            assert!(v > 0.0 && v < 1.0, "f({l}) = {v}");
            assert!(v >= prev);
            prev = v;
            l += 0.25;
        }
        assert!((f.eval(f.midpoint()) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn crossover_kernel_symmetric() {
        let p = CrossoverParams::new(0.5, 4.0).unwrap();
        let k = CrossoverKernel::new(p).unwrap();
        let mut rng = crate::rng::root_rng(11);
        for _ in 0..20 {
            let x = rng.random::<f64>() * 3.0;
            let y = rng.random::<f64>() * 3.0;
            let d = (k.eval_checked(x, y).unwrap() - k.eval_checked(y, x).unwrap()).abs();
            assert!(d < 1e-12);
        }
    }

    #[test]
    fn airy_kernel_diagonal_identity() {
        // K_Ai(x, x) = Ai'(x)^2 - x Ai(x)^2, oracle from the special module.
        for x in [-2.0, 0.0, 1.0] {
            let k = airy_kernel(x, x).unwrap();
            let oracle =
                airy_ai_prime(x).unwrap().powi(2) - x * airy_ai(x).unwrap().powi(2);
            assert!((k - oracle).abs() < 1e-8, "x = {x}: {k} vs {oracle}");
        }
    }

    #[test]
    fn airy_kernel_symmetric_and_decaying() {
        let mut rng = crate::rng::root_rng(5);
        for _ in 0..10 {
            let x = rng.random::<f64>() * 4.0 - 2.0;
            let y = rng.random::<f64>() * 4.0 - 2.0;
            let d = (airy_kernel(x, y).unwrap() - airy_kernel(y, x).unwrap()).abs();
            assert!(d < 1e-12);
        }
        assert!(airy_kernel(10.0, 10.0).unwrap().abs() < 1e-18);
    }

    #[test]
    fn crossover_limits_to_airy_kernel_at_large_t() {
        // Fermi factor -> indicator; the deviation is O((t/2)^{-2/3}).
        let airy = AiryKernel::new(0.0).unwrap();
        let mut worst_huge: f64 = 0.0;
        let mut worst_large: f64 = 0.0;
        for (t, worst) in [(1e10, &mut worst_huge), (1e6, &mut worst_large)] {
            let p = CrossoverParams::new(0.0, t).unwrap();
            let k = CrossoverKernel::new(p).unwrap();
            for x in [0.0, 0.5, 1.0, 2.0] {
                for y in [0.0, 1.0, 2.0] {
                    let d =
                        (k.eval_checked(x, y).unwrap() - airy.eval_checked(x, y).unwrap()).abs();
                    *worst = worst.max(d);
                }
            }
        }
        assert!(worst_huge < 1e-6, "t = 1e10 deviation {worst_huge}");
        assert!(worst_large < 1e-4, "t = 1e6 deviation {worst_large}");
        assert!(worst_huge < worst_large);
    }

    #[test]
    fn kernel_vanishes_for_large_s() {
        let p = CrossoverParams::new(60.0, 1.0).unwrap();
        let k = CrossoverKernel::new(p).unwrap();
        for (x, y) in [(0.0, 0.0), (1.0, 2.0), (2.0, 2.0)] {
            assert!(k.eval_checked(x, y).unwrap().abs() < 1e-20);
        }
        let det = kpz_genfun(p, 24).unwrap();
        assert!((det.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn genfun_nondecreasing_in_s() {
        let mut prev = 0.0;
        for s in [-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0] {
            let p = CrossoverParams::new(s, 4.0).unwrap();
            let v = kpz_genfun(p, 30).unwrap().value;
            assert!(v >= prev, "genfun decreased at s = {s}");
            assert!(v > 0.0 && v <= 1.0);
            prev = v;
        }
    }

    #[test]
    fn genfun_doubling_gap_small() {
        for (sigma, t) in [(-2.0, 4.0), (0.0, 4.0), (1.0, 100.0), (-1.0, 100.0)] {
            let s = sigma * (t / 2.0f64).powf(1.0 / 3.0);
            let det = kpz_genfun(CrossoverParams::new(s, t).unwrap(), 40).unwrap();
            assert!(
                det.doubling_gap < 1e-8,
                "gap {} at sigma {sigma}, t {t}",
                det.doubling_gap
            );
        }
    }

    #[test]
    fn tw_cdf_limits() {
        assert!((tw_gue_cdf(8.0, 30).unwrap() - 1.0).abs() < 1e-10);
        assert!(tw_gue_cdf(-10.0, 80).unwrap() < 1e-4);
    }

    #[test]
    fn tw_cdf_monotone_on_coarse_grid() {
        let mut prev = -1.0;
        let mut sigma = -3.0;
        while sigma <= 2.0 {
            let v = tw_gue_cdf(sigma, 40).unwrap();
            assert!(v >= prev, "not monotone at sigma = {sigma}");
            prev = v;
            sigma += 0.5;
        }
    }

    #[test]
    fn tw_median_from_double_resolution_bisection() {
        // Frozen from the double-resolution bisection oracle itself (m = 40
        // through 200 all agree); the CDF must cross 1/2 there.
        let med = tw_gue_median(40, 1e-8).unwrap();
        assert!((med + 1.804912).abs() < 1e-3, "median {med}");
        let at_med = tw_gue_cdf(med, 40).unwrap();
        assert!((at_med - 0.5).abs() < 5e-3, "F(median) = {at_med}");
    }

    #[test]
    fn genfun_approaches_tw_at_large_t() {
        let t = 1e4;
        let c = (t / 2.0f64).powf(1.0 / 3.0);
        for sigma in [-2.0, 0.0, 2.0] {
            let g = kpz_genfun(CrossoverParams::new(sigma * c, t).unwrap(), 40)
                .unwrap()
                .value;
            let f = tw_gue_cdf(sigma, 40).unwrap();
            assert!((g - f).abs() < 0.05, "sigma {sigma}: {g} vs {f}");
        }
    }

    #[test]
    fn tw_table_moments_and_shape() {
        let table = TwGueTable::build(40).unwrap();
        // Consistency with the pinned median band: mean close by, unit-scale
        // width, right tail heavier than the cubic-decay left tail.
        assert!(table.mean() > -1.9 && table.mean() < -1.6, "{}", table.mean());
        assert!(table.sd() > 0.8 && table.sd() < 1.0, "{}", table.sd());
        assert!(table.skewness() > 0.0, "skewness {}", table.skewness());
        assert!(table.standardized_cdf(0.0) > 0.4 && table.standardized_cdf(0.0) < 0.6);
        let mut prev = 0.0;
        let mut x = -9.0;
        while x <= 5.0 {
            let v = table.cdf(x);
            assert!(v >= prev);
            prev = v;
            x += 0.1;
        }
    }
}
