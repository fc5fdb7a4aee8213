//! Continuous-time kinetic Monte Carlo for exclusion dynamics.
//!
//! Event selection uses a Fenwick tree over per-bond rates: O(log B) for
//! rate updates and for sampling a bond proportionally to its rate. A bond
//! carries rate p for a 10 pattern (right jump) or q for 01 (left jump),
//! zero otherwise, so exclusion is enforced by construction and each event
//! touches at most three bonds.
//!
//! The line simulator runs the step initial state on a finite window with
//! no wall dynamics: the run is invalidated (containment error) the moment
//! a particle reaches the left edge or a hole reaches the right edge, so a
//! completed run is exact.

use super::{AsepParams, ExclusionState};
use crate::error::{Error, Result};
use crate::rng::trajectory_rng;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Fenwick (binary indexed) tree over nonnegative f64 rates with
/// prefix-sum sampling.
struct RateTree {
    tree: Vec<f64>,
    rates: Vec<f64>,
    mask: usize,
}

impl RateTree {
    fn new(n: usize) -> Self {
        let mask = n.next_power_of_two();
        RateTree {
            tree: vec![0.0; n + 1],
            rates: vec![0.0; n],
            mask,
        }
    }

    fn len(&self) -> usize {
        self.rates.len()
    }

    fn get(&self, i: usize) -> f64 {
        self.rates[i]
    }

    fn set(&mut self, i: usize, rate: f64) {
        let delta = rate - self.rates[i];
        if delta == 0.0 {
            return;
        }
        self.rates[i] = rate;
        let mut idx = i + 1;
        while idx < self.tree.len() {
            self.tree[idx] += delta;
            idx += idx & idx.wrapping_neg();
        }
    }

    fn total(&self) -> f64 {
        self.prefix_sum(self.len())
    }

    /// Sum of rates[0..i].
    fn prefix_sum(&self, i: usize) -> f64 {
        let mut idx = i;
        let mut sum = 0.0;
        while idx > 0 {
            sum += self.tree[idx];
            idx -= idx & idx.wrapping_neg();
        }
        sum
    }

    /// Smallest index whose running total exceeds `target`.
    fn sample(&self, mut target: f64) -> usize {
        let mut pos = 0usize;
        let mut step = self.mask;
        while step > 0 {
            let next = pos + step;
            if next < self.tree.len() && self.tree[next] <= target {
                target -= self.tree[next];
                pos = next;
            }
            step >>= 1;
        }
        pos.min(self.len() - 1)
    }
}

/// exp(rate) waiting time from a uniform draw in [0, 1).
#[inline]
fn exp_waiting_time(rng: &mut ChaCha8Rng, rate: f64) -> f64 {
    let u: f64 = rng.random();
    -(1.0 - u).ln() / rate
}

// ---------------------------------------------------------------------------
// Step initial state on the line
// ---------------------------------------------------------------------------

/// Light per-trajectory observables from a farm run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub index: u64,
    /// N(t): net jumps from site 1 to site 0 through the bond (0, 1).
    pub bond_counter: i64,
    /// h(0, t) = 2 N(t).
    pub height: i64,
    /// Positions of the tagged particles, in tag order.
    pub tagged_positions: Vec<i64>,
    pub events: u64,
}

/// Full result of a single step-initial-state run.
#[derive(Debug, Clone)]
pub struct StepIcResult {
    pub state: ExclusionState,
    pub record: TrajectoryRecord,
}

struct LineSim {
    occ: Vec<bool>,
    site_particle: Vec<usize>,
    positions: Vec<i64>,
    tree: RateTree,
    window: i64,
    time: f64,
    bond_counter: i64,
    events: u64,
}

const NO_PARTICLE: usize = usize::MAX;

impl LineSim {
    /// Sites j in [-w, w] (index i = j + w); particles initially on 1..=w.
    fn new(params: AsepParams, w: usize) -> Self {
        let s = 2 * w + 1;
        let occ: Vec<bool> = (0..s).map(|i| i > w).collect();
        let mut site_particle = vec![NO_PARTICLE; s];
        let mut positions = Vec::with_capacity(w);
        for pid in 0..w {
            positions.push(pid as i64 + 1);
            site_particle[w + 1 + pid] = pid;
        }
        let mut tree = RateTree::new(s - 1);
        for b in 0..s - 1 {
            tree.set(b, bond_rate(&occ, b, params));
        }
        LineSim {
            occ,
            site_particle,
            positions,
            tree,
            window: w as i64,
            time: 0.0,
            bond_counter: 0,
            events: 0,
        }
    }

    fn run(&mut self, params: AsepParams, t_end: f64, rng: &mut ChaCha8Rng) -> Result<()> {
        let s = self.occ.len();
        let origin_bond = self.window as usize; // sites (0, 1)
        loop {
            let total = self.tree.total();
            if total <= 0.0 {
                self.time = t_end;
                return Ok(());
            }
            let dt = exp_waiting_time(rng, total);
            if self.time + dt > t_end {
                self.time = t_end;
                return Ok(());
            }
            self.time += dt;

            let mut bond = self.tree.sample(rng.random::<f64>() * total);
            // Floating-point dust can land on an empty slot; step to the
            // nearest active bond.
            if self.tree.get(bond) == 0.0 {
                bond = (0..s - 1)
                    .map(|d| (bond + d) % (s - 1))
                    .find(|&b| self.tree.get(b) > 0.0)
                    .expect("positive total rate but no active bond");
            }

            let (from, to) = if self.occ[bond] {
                (bond, bond + 1)
            } else {
                (bond + 1, bond)
            };
            debug_assert!(self.occ[from] && !self.occ[to], "exclusion violated");

            let pid = self.site_particle[from];
            self.occ[from] = false;
            self.occ[to] = true;
            self.site_particle[from] = NO_PARTICLE;
            self.site_particle[to] = pid;
            self.positions[pid] += to as i64 - from as i64;
            self.events += 1;

            if bond == origin_bond {
                self.bond_counter += if to < from { 1 } else { -1 };
            }

            for b in bond.saturating_sub(1)..=(bond + 1).min(s - 2) {
                self.tree.set(b, bond_rate(&self.occ, b, params));
            }

            // Containment: the run is invalid once the front touches either
            // window edge.
            if self.occ[0] {
                return Err(Error::Containment(format!(
                    "particle reached the left window edge at t = {:.3}",
                    self.time
                )));
            }
            if !self.occ[s - 1] {
                return Err(Error::Containment(format!(
                    "hole reached the right window edge at t = {:.3}",
                    self.time
                )));
            }
        }
    }
}

#[inline]
fn bond_rate(occ: &[bool], b: usize, params: AsepParams) -> f64 {
    match (occ[b], occ[b + 1]) {
        (true, false) => params.p(),
        (false, true) => params.q(),
        _ => 0.0,
    }
}

fn check_step_preconditions(window_halfwidth: usize, t_end: f64) -> Result<()> {
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(Error::Argument(format!(
            "simulate_step_ic: t_end must be nonnegative, got {t_end}"
        )));
    }
    let required = t_end.ceil() + 10.0 * t_end.sqrt();
    if (window_halfwidth as f64) <= required {
        return Err(Error::Argument(format!(
            "simulate_step_ic: window_halfwidth {window_halfwidth} too small for t_end {t_end} \
             (front containment needs > {required})"
        )));
    }
    Ok(())
}

/// One trajectory of the step initial state ({j <= 0} empty, {j >= 1}
/// occupied) on the window [-w, w].
///
/// `tags` are 1-based particle labels counted from the leftmost initial
/// particle (tag j starts at site j).
pub fn simulate_step_ic(
    params: AsepParams,
    window_halfwidth: usize,
    t_end: f64,
    seed: u64,
    tags: &[usize],
) -> Result<StepIcResult> {
    simulate_step_ic_indexed(params, window_halfwidth, t_end, seed, 0, tags)
}

fn simulate_step_ic_indexed(
    params: AsepParams,
    window_halfwidth: usize,
    t_end: f64,
    seed: u64,
    trajectory_index: u64,
    tags: &[usize],
) -> Result<StepIcResult> {
    check_step_preconditions(window_halfwidth, t_end)?;
    for &tag in tags {
        if tag == 0 || tag > window_halfwidth {
            return Err(Error::Argument(format!(
                "simulate_step_ic: tag {tag} outside 1..={window_halfwidth}"
            )));
        }
    }
    let mut sim = LineSim::new(params, window_halfwidth);
    let mut rng = trajectory_rng(seed, trajectory_index);
    if t_end > 0.0 {
        sim.run(params, t_end, &mut rng)?;
    }

    debug_assert!(sim.positions.windows(2).all(|w| w[0] < w[1]));
    let record = TrajectoryRecord {
        index: trajectory_index,
        bond_counter: sim.bond_counter,
        height: 2 * sim.bond_counter,
        tagged_positions: tags.iter().map(|&tag| sim.positions[tag - 1]).collect(),
        events: sim.events,
    };
    let w = sim.window;
    let state = ExclusionState::new(
        (-w, w),
        sim.occ,
        sim.time,
        sim.bond_counter,
        sim.positions,
    );
    Ok(StepIcResult { state, record })
}

/// Trajectory farm with one RNG substream per trajectory; results are
/// ordered by trajectory index regardless of scheduling.
pub fn run_step_trajectories(
    params: AsepParams,
    window_halfwidth: usize,
    t_end: f64,
    trajectories: u64,
    seed: u64,
    tags: &[usize],
) -> Result<Vec<TrajectoryRecord>> {
    check_step_preconditions(window_halfwidth, t_end)?;
    (0..trajectories)
        .into_par_iter()
        .map(|i| {
            simulate_step_ic_indexed(params, window_halfwidth, t_end, seed, i, tags)
                .map(|r| r.record)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Ring simulator (for generator cross-validation)
// ---------------------------------------------------------------------------

/// One KMC trajectory on a ring of `l` sites from the configuration
/// `initial` (bit j = site j occupied). Returns the final configuration.
pub fn simulate_ring(
    params: AsepParams,
    l: usize,
    initial: u16,
    t_end: f64,
    seed: u64,
) -> Result<u16> {
    simulate_ring_indexed(params, l, initial, t_end, seed, 0)
}

fn simulate_ring_indexed(
    params: AsepParams,
    l: usize,
    initial: u16,
    t_end: f64,
    seed: u64,
    trajectory_index: u64,
) -> Result<u16> {
    if !(2..=16).contains(&l) {
        return Err(Error::Argument(format!("simulate_ring: L = {l}")));
    }
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(Error::Argument(format!("simulate_ring: t_end = {t_end}")));
    }
    if initial >> l != 0 {
        return Err(Error::Argument(
            "simulate_ring: initial configuration has bits beyond the ring".into(),
        ));
    }
    let mut occ: Vec<bool> = (0..l).map(|j| initial & (1 << j) != 0).collect();
    let ring_rate = |occ: &[bool], b: usize| -> f64 {
        let next = (b + 1) % l;
        match (occ[b], occ[next]) {
            (true, false) => params.p(),
            (false, true) => params.q(),
            _ => 0.0,
        }
    };
    let mut tree = RateTree::new(l);
    for b in 0..l {
        tree.set(b, ring_rate(&occ, b));
    }
    let mut rng = trajectory_rng(seed, trajectory_index);
    let mut time = 0.0;
    loop {
        let total = tree.total();
        if total <= 0.0 {
            break;
        }
        let dt = exp_waiting_time(&mut rng, total);
        if time + dt > t_end {
            break;
        }
        time += dt;
        let mut bond = tree.sample(rng.random::<f64>() * total);
        if tree.get(bond) == 0.0 {
            bond = (0..l)
                .map(|d| (bond + d) % l)
                .find(|&b| tree.get(b) > 0.0)
                .expect("positive total rate but no active bond");
        }
        let next = (bond + 1) % l;
        let (from, to) = if occ[bond] { (bond, next) } else { (next, bond) };
        debug_assert!(occ[from] && !occ[to]);
        occ[from] = false;
        occ[to] = true;
        for d in [l - 1, 0, 1] {
            let b = (bond + d) % l;
            tree.set(b, ring_rate(&occ, b));
        }
    }
    let mut config = 0u16;
    for (j, &o) in occ.iter().enumerate() {
        if o {
            config |= 1 << j;
        }
    }
    Ok(config)
}

/// Ring trajectory farm; returns final configurations by trajectory index.
pub fn run_ring_trajectories(
    params: AsepParams,
    l: usize,
    initial: u16,
    t_end: f64,
    trajectories: u64,
    seed: u64,
) -> Result<Vec<u16>> {
    (0..trajectories)
        .into_par_iter()
        .map(|i| simulate_ring_indexed(params, l, initial, t_end, seed, i))
        .collect()
}
