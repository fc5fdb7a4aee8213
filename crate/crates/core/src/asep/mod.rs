//! Asymmetric simple exclusion process: exact small-ring generators and a
//! continuous-time kinetic Monte Carlo simulator.
//!
//! Convention: a particle at site j jumps to j+1 with rate p and to j-1
//! with rate q, p + q = 1, provided the destination is empty. With q > p
//! and the step initial state (sites j >= 1 occupied, j <= 0 empty),
//! particles flow leftward into the empty half and the signed current
//! through the bond (0, 1) grows.

mod generator;
mod kmc;

pub use generator::{build_ring_generator, spectral_check, transition_distribution, RingGenerator};
pub use kmc::{
    run_ring_trajectories, run_step_trajectories, simulate_ring, simulate_step_ic,
    StepIcResult, TrajectoryRecord,
};

use crate::error::{Error, Result};

/// Jump rates (p right, q left) with p + q = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsepParams {
    p: f64,
    q: f64,
}

impl AsepParams {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !(p >= 0.0 && q >= 0.0) || !p.is_finite() || !q.is_finite() {
            return Err(Error::Argument(format!(
                "AsepParams: rates must be nonnegative, got p = {p}, q = {q}"
            )));
        }
        if ((p + q) - 1.0).abs() > 1e-15 {
            return Err(Error::Argument(format!(
                "AsepParams: p + q must equal 1, got {}",
                p + q
            )));
        }
        Ok(AsepParams { p, q })
    }

    /// Totally asymmetric limit with leftward drift (q = 1).
    pub fn tasep_left() -> Self {
        AsepParams { p: 0.0, q: 1.0 }
    }

    pub fn symmetric() -> Self {
        AsepParams { p: 0.5, q: 0.5 }
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }
}

/// Weak-asymmetry parameter preset: lattice spacing eps, time scale
/// eps^{-2}, asymmetry q - p = sqrt(eps).
pub fn weak_asymmetry_preset(epsilon: f64) -> Result<(AsepParams, f64)> {
    if !(epsilon > 0.0 && epsilon <= 0.25) {
        return Err(Error::Argument(format!(
            "weak_asymmetry_preset: epsilon {epsilon} outside (0, 1/4]"
        )));
    }
    let root = epsilon.sqrt();
    let params = AsepParams::new((1.0 - root) / 2.0, (1.0 + root) / 2.0)?;
    Ok((params, epsilon.powi(-2)))
}

/// Occupation state of a finite exclusion window.
#[derive(Debug, Clone)]
pub struct ExclusionState {
    window: (i64, i64),
    occupation: Vec<bool>,
    time: f64,
    bond_counter: i64,
    positions: Vec<i64>,
}

impl ExclusionState {
    pub(crate) fn new(
        window: (i64, i64),
        occupation: Vec<bool>,
        time: f64,
        bond_counter: i64,
        positions: Vec<i64>,
    ) -> Self {
        debug_assert_eq!((window.1 - window.0 + 1) as usize, occupation.len());
        ExclusionState {
            window,
            occupation,
            time,
            bond_counter,
            positions,
        }
    }

    pub fn window(&self) -> (i64, i64) {
        self.window
    }

    pub fn occupied(&self, site: i64) -> bool {
        let (lo, hi) = self.window;
        site >= lo && site <= hi && self.occupation[(site - lo) as usize]
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Net number of jumps from site 1 to site 0 minus jumps from 0 to 1.
    pub fn bond_counter(&self) -> i64 {
        self.bond_counter
    }

    /// Height observable h(0, t) = 2 N(t).
    pub fn height(&self) -> i64 {
        2 * self.bond_counter
    }

    /// Ordered particle positions x_1 < x_2 < ...
    pub fn particle_positions(&self) -> &[i64] {
        &self.positions
    }

    pub fn particle_count(&self) -> usize {
        self.positions.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_must_sum_to_one() {
        assert!(AsepParams::new(0.3, 0.7).is_ok());
        assert!(AsepParams::new(0.3, 0.6).is_err());
        assert!(AsepParams::new(-0.1, 1.1).is_err());
    }

    #[test]
    fn weak_asymmetry_preset_values() {
        assert!(weak_asymmetry_preset(0.0).is_err());
        assert!(weak_asymmetry_preset(0.3).is_err());

        let (params, scale) = weak_asymmetry_preset(0.25).unwrap();
        assert!((params.p() - 0.25).abs() < 1e-15);
        assert!((params.q() - 0.75).abs() < 1e-15);
        assert!((scale - 16.0).abs() < 1e-12);

        let (params, scale) = weak_asymmetry_preset(0.01).unwrap();
        assert!((params.q() - params.p() - 0.1).abs() < 1e-12);
        assert!((scale - 1e4).abs() < 1e-6);
    }
}
