//! Monte Carlo solvers for multiplicative-noise heat equations and the
//! Cole-Hopf height observable.
//!
//! Two models share the splitting design:
//!
//! * semi-discrete chain: dZ_j/dt = Z_{j-1} - Z_j + (db_j/dt) Z_j with
//!   Z_j(0) = delta_{j0}, one Brownian motion per site;
//! * lattice regularization of the continuum equation
//!   dZ = (1/2) Z'' dt + Z dW with delta initial mass 1/dx at the origin.
//!
//! Noise is read in the Ito convention: the per-step multiplicative factor
//! exp(xi sqrt(v) - v/2) has mean exactly one, so E[Z] solves the
//! noise-free equation and the first-moment tests have no time-step bias.
//! The deterministic half of the splitting is the exact exponential of the
//! one-sided coupling (a Poisson-weight convolution) for the chain, and an
//! explicit nonnegativity-preserving heat step for the lattice, so Z >= 0
//! always.

use crate::error::{Error, Result};
use crate::rng::trajectory_rng;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

/// Default time step of the semi-discrete solver.
pub const SEMIDISCRETE_DEFAULT_DT: f64 = 1e-3;

/// Largest admissible semi-discrete time step.
pub const SEMIDISCRETE_MAX_DT: f64 = 0.01;

/// Fraction of total mass allowed at the window edge before a run is
/// declared uncontained.
pub const MASS_CONTAINMENT_TOL: f64 = 1e-12;

/// Nonnegative field on an integer window.
#[derive(Debug, Clone)]
pub struct PolymerState {
    window: (i64, i64),
    z: Vec<f64>,
    time: f64,
}

impl PolymerState {
    pub fn window(&self) -> (i64, i64) {
        self.window
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn values(&self) -> &[f64] {
        &self.z
    }

    /// Field value at an absolute site index; zero outside the window
    /// (outside the causal cone for the semi-discrete chain).
    pub fn value(&self, site: i64) -> f64 {
        let (lo, hi) = self.window;
        if site < lo || site > hi {
            0.0
        } else {
            self.z[(site - lo) as usize]
        }
    }

    pub fn total(&self) -> f64 {
        self.z.iter().sum()
    }
}

/// Cole-Hopf height h = log Z at a site.
pub fn cole_hopf_height(state: &PolymerState, site: i64) -> Result<f64> {
    let z = state.value(site);
    if z > 0.0 {
        Ok(z.ln())
    } else {
        Err(Error::Domain(format!(
            "cole_hopf_height: Z = {z} at site {site}; height defined only where Z > 0"
        )))
    }
}

// ---------------------------------------------------------------------------
// Semi-discrete chain
// ---------------------------------------------------------------------------

/// Window size with headroom over the bare containment bound: rare noise
/// outliers can lift the far tail by many e-folds, so a dozen extra sites
/// keep the edge below [`MASS_CONTAINMENT_TOL`] even across large farms.
pub fn semidiscrete_default_window(t_end: f64) -> usize {
    (t_end + 10.0 * t_end.sqrt()).ceil() as usize + 14
}

/// Lattice half-width with the same kind of noise headroom: the heat
/// kernel needs ~7.5 sqrt(t) for a 1e-12 tail, plus margin for
/// multiplicative-noise swings.
pub fn lattice_default_half_width(t_end: f64) -> f64 {
    (7.5 * t_end.sqrt() + 3.0).ceil()
}

fn check_semidiscrete_args(t_end: f64, window_size: usize, dt: f64) -> Result<()> {
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(Error::Argument(format!(
            "simulate_semidiscrete: t_end = {t_end} must be positive"
        )));
    }
    if !(dt > 0.0 && dt <= SEMIDISCRETE_MAX_DT) {
        return Err(Error::Argument(format!(
            "simulate_semidiscrete: dt = {dt} outside (0, {SEMIDISCRETE_MAX_DT}]"
        )));
    }
    let required = t_end + 10.0 * t_end.sqrt();
    if (window_size as f64) <= required {
        return Err(Error::Argument(format!(
            "simulate_semidiscrete: window_size {window_size} too small for t_end {t_end} \
             (mass containment needs > {required})"
        )));
    }
    Ok(())
}

/// Poisson(tau) weights e^{-tau} tau^k / k!, cut below 1e-18.
fn poisson_weights(tau: f64) -> Vec<f64> {
    let mut weights = Vec::with_capacity(8);
    let mut w = (-tau).exp();
    let mut k = 0usize;
    loop {
        weights.push(w);
        k += 1;
        w *= tau / k as f64;
        if w < 1e-18 && k > 1 {
            break;
        }
    }
    weights
}

/// Exact exponential of the one-sided coupling exp(tau (S - I)), S the down
/// shift: a Poisson-weight convolution - causal and nonnegative.
fn poisson_coupling(z: &mut [f64], scratch: &mut [f64], weights: &[f64]) {
    for (j, out) in scratch.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (k, &wk) in weights.iter().enumerate() {
            if k > j {
                break;
            }
            acc += wk * z[j - k];
        }
        *out = acc;
    }
    z.copy_from_slice(scratch);
}

fn semidiscrete_trajectory(
    t_end: f64,
    window_size: usize,
    dt: f64,
    rng: &mut ChaCha8Rng,
    noise: bool,
) -> Result<PolymerState> {
    let n = window_size + 1;
    let mut z = vec![0.0f64; n];
    let mut scratch = vec![0.0f64; n];
    z[0] = 1.0;

    let steps = (t_end / dt).ceil() as usize;
    let dt_eff = t_end / steps as f64;
    let weights = poisson_weights(0.5 * dt_eff);
    let sqrt_dt = dt_eff.sqrt();
    for _ in 0..steps {
        poisson_coupling(&mut z, &mut scratch, &weights);
        if noise {
            for zj in z.iter_mut() {
                let xi: f64 = rng.sample(StandardNormal);
                *zj *= (xi * sqrt_dt - 0.5 * dt_eff).exp();
            }
        }
        poisson_coupling(&mut z, &mut scratch, &weights);
    }

    let total = z.iter().sum::<f64>();
    if z[n - 1] > MASS_CONTAINMENT_TOL * total {
        return Err(Error::Containment(format!(
            "simulate_semidiscrete: boundary site holds {:.3e} of total mass",
            z[n - 1] / total
        )));
    }
    Ok(PolymerState {
        window: (0, window_size as i64),
        z,
        time: t_end,
    })
}

/// One trajectory of the semi-discrete chain on sites 0..=window_size.
/// Z_j(t) = 0 for j < 0 exactly (causality of the one-sided coupling).
pub fn simulate_semidiscrete(
    t_end: f64,
    window_size: usize,
    dt: f64,
    seed: u64,
) -> Result<PolymerState> {
    check_semidiscrete_args(t_end, window_size, dt)?;
    let mut rng = trajectory_rng(seed, 0);
    semidiscrete_trajectory(t_end, window_size, dt, &mut rng, true)
}

/// Noise-free run (test hook): the solution is exactly the Poisson kernel
/// e^{-t} t^j / j!.
pub fn simulate_semidiscrete_noiseless(
    t_end: f64,
    window_size: usize,
    dt: f64,
) -> Result<PolymerState> {
    check_semidiscrete_args(t_end, window_size, dt)?;
    let mut rng = trajectory_rng(0, 0);
    semidiscrete_trajectory(t_end, window_size, dt, &mut rng, false)
}

// ---------------------------------------------------------------------------
// Lattice stochastic heat equation
// ---------------------------------------------------------------------------

/// Lattice discretization parameters; noise convention is Ito.
#[derive(Debug, Clone, Copy)]
pub struct LatticeSheParams {
    dx: f64,
    dt: f64,
    half_width: f64,
}

/// Marker for the stochastic-integral reading of the noise term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ItoConvention;

impl LatticeSheParams {
    /// dx, dt with the stability constraint dt <= dx^2 / 2; the window is
    /// [-half_width, half_width].
    pub fn new(dx: f64, dt: f64, half_width: f64) -> Result<Self> {
        if !(dx > 0.0) || !dx.is_finite() {
            return Err(Error::Argument(format!("LatticeSheParams: dx = {dx}")));
        }
        if !(dt > 0.0) || dt > dx * dx / 2.0 {
            return Err(Error::Argument(format!(
                "LatticeSheParams: dt = {dt} violates dt <= dx^2/2 = {}",
                dx * dx / 2.0
            )));
        }
        if !(half_width >= 1.0) || !half_width.is_finite() {
            return Err(Error::Argument(format!(
                "LatticeSheParams: half_width = {half_width}"
            )));
        }
        Ok(LatticeSheParams {
            dx,
            dt,
            half_width,
        })
    }

    /// Default time step dx^2 / 4.
    pub fn with_default_dt(dx: f64, half_width: f64) -> Result<Self> {
        Self::new(dx, dx * dx / 4.0, half_width)
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn convention(&self) -> ItoConvention {
        ItoConvention
    }

    fn site_count(&self) -> usize {
        2 * (self.half_width / self.dx).round() as usize + 1
    }
}

fn lattice_trajectory(
    params: &LatticeSheParams,
    t_end: f64,
    rng: &mut ChaCha8Rng,
    noise: bool,
) -> Result<PolymerState> {
    let n = params.site_count();
    let half = (n - 1) / 2;
    let mut z = vec![0.0f64; n];
    let mut scratch = vec![0.0f64; n];
    z[half] = 1.0 / params.dx;

    let steps = (t_end / params.dt).ceil() as usize;
    let dt = t_end / steps as f64;
    let r = 0.5 * dt / (params.dx * params.dx);
    let noise_var = dt / params.dx;
    let noise_sd = noise_var.sqrt();
    for _ in 0..steps {
        // Explicit heat step with Dirichlet edges; r <= 1/4 keeps the
        // update a convex combination, hence nonnegative.
        for i in 0..n {
            let left = if i == 0 { 0.0 } else { z[i - 1] };
            let right = if i + 1 == n { 0.0 } else { z[i + 1] };
            scratch[i] = z[i] + r * (left - 2.0 * z[i] + right);
        }
        std::mem::swap(&mut z, &mut scratch);
        if noise {
            for zi in z.iter_mut() {
                let xi: f64 = rng.sample(StandardNormal);
                *zi *= (xi * noise_sd - 0.5 * noise_var).exp();
            }
        }
    }

    let total: f64 = z.iter().sum();
    let edge = z[0].max(z[n - 1]);
    if edge > MASS_CONTAINMENT_TOL * total {
        return Err(Error::Containment(format!(
            "simulate_lattice_she: window edge holds {:.3e} of total mass",
            edge / total
        )));
    }
    Ok(PolymerState {
        window: (-(half as i64), half as i64),
        z,
        time: t_end,
    })
}

/// One trajectory of the lattice equation; site i sits at x = i dx and the
/// delta initial mass is 1/dx at i = 0.
pub fn simulate_lattice_she(
    params: &LatticeSheParams,
    t_end: f64,
    seed: u64,
) -> Result<PolymerState> {
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(Error::Argument(format!(
            "simulate_lattice_she: t_end = {t_end}"
        )));
    }
    let mut rng = trajectory_rng(seed, 0);
    lattice_trajectory(params, t_end, &mut rng, true)
}

/// Noise-free run (test hook): converges to the heat kernel.
pub fn simulate_lattice_she_noiseless(
    params: &LatticeSheParams,
    t_end: f64,
) -> Result<PolymerState> {
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(Error::Argument(format!(
            "simulate_lattice_she: t_end = {t_end}"
        )));
    }
    let mut rng = trajectory_rng(0, 0);
    lattice_trajectory(params, t_end, &mut rng, false)
}

// ---------------------------------------------------------------------------
// Moment estimation
// ---------------------------------------------------------------------------

/// Which solver supplies Z for the moment estimator.
#[derive(Debug, Clone, Copy)]
pub enum MomentSolver {
    /// Semi-discrete chain, observable Z_site(t).
    SemiDiscrete {
        window_size: usize,
        dt: f64,
        site: i64,
    },
    /// Lattice equation, observable Z at the site nearest x = 0.
    Lattice(LatticeSheParams),
}

/// Monte Carlo moment estimate with jackknife standard error.
#[derive(Debug, Clone, Copy)]
pub struct MomentEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: u64,
    /// Set when some trajectory overflowed the floating range; the numbers
    /// are then unusable and flagged rather than silently clipped.
    pub overflowed: bool,
}

/// E[Z^n] by trajectory farming.
pub fn moment_estimator(
    n: u32,
    t: f64,
    trials: u64,
    solver: MomentSolver,
    seed: u64,
) -> Result<MomentEstimate> {
    if !(1..=3).contains(&n) {
        return Err(Error::Argument(format!(
            "moment_estimator: n = {n} outside 1..=3"
        )));
    }
    if trials < 1_000 {
        return Err(Error::Argument(format!(
            "moment_estimator: trials = {trials} < 1000"
        )));
    }
    match solver {
        MomentSolver::SemiDiscrete {
            window_size, dt, ..
        } => check_semidiscrete_args(t, window_size, dt)?,
        MomentSolver::Lattice(_) => {
            if !(t > 0.0) || !t.is_finite() {
                return Err(Error::Argument(format!("moment_estimator: t = {t}")));
            }
        }
    }

    let samples: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let mut rng = trajectory_rng(seed, i);
            let z = match solver {
                MomentSolver::SemiDiscrete {
                    window_size,
                    dt,
                    site,
                } => semidiscrete_trajectory(t, window_size, dt, &mut rng, true)?.value(site),
                MomentSolver::Lattice(p) => {
                    let state = lattice_trajectory(&p, t, &mut rng, true)?;
                    state.value(0)
                }
            };
            Ok(z.powi(n as i32))
        })
        .collect::<Result<_>>()?;

    Ok(aggregate_moment(&samples))
}

/// Mean and delete-one jackknife standard error; flags non-finite samples.
pub(crate) fn aggregate_moment(samples: &[f64]) -> MomentEstimate {
    let n = samples.len() as f64;
    let overflowed = samples.iter().any(|s| !s.is_finite());
    if overflowed {
        return MomentEstimate {
            mean: f64::NAN,
            stderr: f64::NAN,
            trials: samples.len() as u64,
            overflowed: true,
        };
    }
    let mean = samples.iter().sum::<f64>() / n;
    // Delete-one jackknife of the mean: theta_(i) = (sum - x_i)/(n-1).
    let sum: f64 = samples.iter().sum();
    let mut acc = 0.0;
    for &x in samples {
        let leave_out = (sum - x) / (n - 1.0);
        acc += (leave_out - mean) * (leave_out - mean);
    }
    let stderr = ((n - 1.0) / n * acc).sqrt();
    MomentEstimate {
        mean,
        stderr,
        trials: samples.len() as u64,
        overflowed: false,
    }
}

/// Z values (one per trajectory) at a site, for CLI emission.
pub fn run_she_trajectories(
    t: f64,
    trials: u64,
    solver: MomentSolver,
    seed: u64,
) -> Result<Vec<f64>> {
    (0..trials)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let mut rng = trajectory_rng(seed, i);
            match solver {
                MomentSolver::SemiDiscrete {
                    window_size,
                    dt,
                    site,
                } => {
                    check_semidiscrete_args(t, window_size, dt)?;
                    Ok(semidiscrete_trajectory(t, window_size, dt, &mut rng, true)?.value(site))
                }
                MomentSolver::Lattice(p) => {
                    Ok(lattice_trajectory(&p, t, &mut rng, true)?.value(0))
                }
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poisson_pmf(j: usize, t: f64) -> f64 {
        let mut v = (-t).exp();
        for k in 1..=j {
            v *= t / k as f64;
        }
        v
    }

    #[test]
    fn noiseless_chain_is_poisson_kernel() {
        let state = simulate_semidiscrete_noiseless(5.0, 28, 1e-3).unwrap();
        for j in 0..=20 {
            let exact = poisson_pmf(j, 5.0);
            let got = state.value(j as i64);
            assert!(
                (got - exact).abs() < 1e-8,
                "j = {j}: {got} vs {exact}"
            );
        }
        // Causality: nothing outside the window, nothing for j < 0.
        assert_eq!(state.value(-1), 0.0);
        assert_eq!(state.window().0, 0);
    }

    #[test]
    fn chain_mean_field_matches_poisson() {
        // E kills the Ito noise term, so E[Z_j(t)] = e^{-t} t^j / j!.
        // One farm, all sites read from the same trajectories.
        let trials = 12_000u64;
        let t = 5.0;
        let window = semidiscrete_default_window(t);
        let sites = [0i64, 3, 5, 8];
        let rows: Vec<[f64; 4]> = (0..trials)
            .into_par_iter()
            .map(|i| {
                let mut rng = trajectory_rng(31, i);
                let state = semidiscrete_trajectory(t, window, 4e-3, &mut rng, true).unwrap();
                [
                    state.value(sites[0]),
                    state.value(sites[1]),
                    state.value(sites[2]),
                    state.value(sites[3]),
                ]
            })
            .collect();
        for (c, &j) in sites.iter().enumerate() {
            let column: Vec<f64> = rows.iter().map(|r| r[c]).collect();
            let est = aggregate_moment(&column);
            assert!(!est.overflowed);
            let exact = poisson_pmf(j as usize, t);
            assert!(
                (est.mean - exact).abs() <= 3.0 * est.stderr,
                "site {j}: {} +/- {} vs {exact}",
                est.mean,
                est.stderr
            );
        }
    }

    #[test]
    fn semidiscrete_argument_checks() {
        assert!(simulate_semidiscrete(0.0, 30, 1e-3, 1).is_err());
        assert!(simulate_semidiscrete(5.0, 28, 0.02, 1).is_err());
        assert!(simulate_semidiscrete(5.0, 10, 1e-3, 1).is_err());
    }

    #[test]
    fn chain_field_nonnegative_and_reproducible() {
        let a = simulate_semidiscrete(3.0, 25, 1e-3, 77).unwrap();
        let b = simulate_semidiscrete(3.0, 25, 1e-3, 77).unwrap();
        assert_eq!(a.values(), b.values());
        assert!(a.values().iter().all(|&z| z >= 0.0));
        let c = simulate_semidiscrete(3.0, 25, 1e-3, 78).unwrap();
        assert_ne!(a.values(), c.values());
    }

    #[test]
    fn noiseless_lattice_approximates_heat_kernel() {
        let params = LatticeSheParams::with_default_dt(0.05, 8.0).unwrap();
        let state = simulate_lattice_she_noiseless(&params, 1.0).unwrap();
        let mut worst: f64 = 0.0;
        let (lo, hi) = state.window();
        for i in lo..=hi {
            let x = i as f64 * 0.05;
            let exact = (-x * x / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
            worst = worst.max((state.value(i) - exact).abs());
        }
        assert!(worst < 1e-3, "max deviation {worst}");
    }

    #[test]
    fn lattice_mean_at_origin_matches_heat_kernel() {
        let params =
            LatticeSheParams::with_default_dt(0.1, lattice_default_half_width(1.0)).unwrap();
        let est = moment_estimator(1, 1.0, 8_000, MomentSolver::Lattice(params), 5).unwrap();
        // Exact discrete mean from the noise-free run; continuum value as
        // the O(dx) bias bracket.
        let discrete = simulate_lattice_she_noiseless(&params, 1.0).unwrap().value(0);
        assert!(
            (est.mean - discrete).abs() <= 3.0 * est.stderr,
            "{} +/- {} vs discrete {discrete}",
            est.mean,
            est.stderr
        );
        let continuum = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        assert!((discrete - continuum).abs() < 5e-3);
    }

    #[test]
    fn lattice_mass_is_martingale_in_mean() {
        let params =
            LatticeSheParams::with_default_dt(0.1, lattice_default_half_width(1.0)).unwrap();
        let trials = 4_000;
        let masses: Vec<f64> = (0..trials)
            .into_par_iter()
            .map(|i| {
                let mut rng = trajectory_rng(17, i);
                let state = lattice_trajectory(&params, 1.0, &mut rng, true).unwrap();
                state.total() * params.dx()
            })
            .collect();
        let n = masses.len() as f64;
        let mean = masses.iter().sum::<f64>() / n;
        let var = masses.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let se = (var / n).sqrt();
        assert!(
            (mean - 1.0).abs() <= 3.0 * se,
            "mean mass {mean} +/- {se}"
        );
        assert!(masses.iter().all(|&m| m > 0.0));
    }

    #[test]
    fn lattice_stability_constraint_enforced() {
        assert!(LatticeSheParams::new(0.05, 0.05 * 0.05, 8.0).is_err());
        assert!(LatticeSheParams::new(0.05, 0.0005, 8.0).is_ok());
    }

    #[test]
    fn cole_hopf_height_basics() {
        let state = PolymerState {
            window: (0, 2),
            z: vec![1.0, std::f64::consts::E, 0.0],
            time: 0.0,
        };
        assert_eq!(cole_hopf_height(&state, 0).unwrap(), 0.0);
        assert!((cole_hopf_height(&state, 1).unwrap() - 1.0).abs() < 1e-15);
        assert!(cole_hopf_height(&state, 2).is_err());
        // log-monotonicity
        assert!(cole_hopf_height(&state, 1).unwrap() > cole_hopf_height(&state, 0).unwrap());
    }

    #[test]
    fn dt_refinement_within_monte_carlo_error() {
        let t = 2.0;
        let window = semidiscrete_default_window(t);
        let coarse = moment_estimator(
            1,
            t,
            4_000,
            MomentSolver::SemiDiscrete {
                window_size: window,
                dt: 2e-3,
                site: 0,
            },
            8,
        )
        .unwrap();
        let fine = moment_estimator(
            1,
            t,
            4_000,
            MomentSolver::SemiDiscrete {
                window_size: window,
                dt: 1e-3,
                site: 0,
            },
            9,
        )
        .unwrap();
        let combined = (coarse.stderr.powi(2) + fine.stderr.powi(2)).sqrt();
        assert!(
            (coarse.mean - fine.mean).abs() <= 3.0 * combined,
            "dt refinement moved the estimate: {} vs {}",
            coarse.mean,
            fine.mean
        );
    }

    #[test]
    fn overflow_flagged_not_clipped() {
        let est = aggregate_moment(&[1.0, 2.0, f64::INFINITY]);
        assert!(est.overflowed);
        assert!(est.mean.is_nan());
        let ok = aggregate_moment(&[1.0, 2.0, 3.0, 4.0]);
        assert!(!ok.overflowed);
        assert!((ok.mean - 2.5).abs() < 1e-15);
        // Jackknife SE of the mean coincides with s/sqrt(n).
        let s2 = [1.0f64, 2.0, 3.0, 4.0]
            .iter()
            .map(|x| (x - 2.5) * (x - 2.5))
            .sum::<f64>()
            / 3.0;
        assert!((ok.stderr - (s2 / 4.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn moment_estimator_argument_checks() {
        let params = LatticeSheParams::with_default_dt(0.1, 5.0).unwrap();
        assert!(moment_estimator(0, 1.0, 2_000, MomentSolver::Lattice(params), 1).is_err());
        assert!(moment_estimator(4, 1.0, 2_000, MomentSolver::Lattice(params), 1).is_err());
        assert!(moment_estimator(1, 1.0, 999, MomentSolver::Lattice(params), 1).is_err());
    }
}
