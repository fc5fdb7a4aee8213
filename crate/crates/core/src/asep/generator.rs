//! Exact generator matrices for exclusion on a small ring.
//!
//! A sector (L sites, k particles) has C(L, k) configurations; the
//! generator is the dense rate matrix over that basis. Small enough for
//! full spectral analysis and matrix exponentials, which serve as the
//! exact oracle for the kinetic Monte Carlo simulator.

use super::AsepParams;
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use std::collections::HashMap;

/// Largest ring size; C(12, 6) = 924 keeps dense spectra cheap.
pub const MAX_RING_SITES: usize = 12;

/// Sector cap from the resource budget.
pub const MAX_SECTOR_CONFIGS: usize = 1_000_000;

/// Dense rate matrix of one (L, k) sector of the ring.
#[derive(Debug, Clone)]
pub struct RingGenerator {
    sites: usize,
    particles: usize,
    configs: Vec<u16>,
    index: HashMap<u16, usize>,
    matrix: Vec<f64>,
}

impl RingGenerator {
    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn dim(&self) -> usize {
        self.configs.len()
    }

    /// Configurations as site bitmasks (bit j = site j occupied), in index
    /// order.
    pub fn configs(&self) -> &[u16] {
        &self.configs
    }

    pub fn config_index(&self, config: u16) -> Option<usize> {
        self.index.get(&config).copied()
    }

    pub fn entry(&self, from: usize, to: usize) -> f64 {
        self.matrix[from * self.dim() + to]
    }

    pub fn row(&self, from: usize) -> &[f64] {
        let n = self.dim();
        &self.matrix[from * n..(from + 1) * n]
    }
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1usize;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Rate matrix of the (L, k) ring sector: entry (c -> c') is p for each
/// admissible rightward jump, q leftward; diagonal balances the row.
///
/// k = L (a frozen full ring) is admitted so the trivial sector can still
/// be passed to [`spectral_check`].
pub fn build_ring_generator(l: usize, k: usize, params: AsepParams) -> Result<RingGenerator> {
    if !(2..=MAX_RING_SITES).contains(&l) {
        return Err(Error::Argument(format!(
            "build_ring_generator: L = {l} outside [2, {MAX_RING_SITES}]"
        )));
    }
    if k == 0 || k > l {
        return Err(Error::Argument(format!(
            "build_ring_generator: k = {k} outside [1, {l}]"
        )));
    }
    if binomial(l, k) > MAX_SECTOR_CONFIGS {
        return Err(Error::Resource(format!(
            "build_ring_generator: sector has {} configurations",
            binomial(l, k)
        )));
    }

    let mut configs: Vec<u16> = (0..(1u16 << l))
        .filter(|c| c.count_ones() as usize == k)
        .collect();
    configs.sort_unstable();
    let index: HashMap<u16, usize> = configs
        .iter()
        .enumerate()
        .map(|(i, &c)| (c, i))
        .collect();

    let n = configs.len();
    let mut matrix = vec![0.0f64; n * n];
    for (ci, &c) in configs.iter().enumerate() {
        let mut out_rate = 0.0;
        for j in 0..l {
            if c & (1 << j) == 0 {
                continue;
            }
            for (target, rate) in [((j + 1) % l, params.p()), ((j + l - 1) % l, params.q())] {
                if rate == 0.0 || c & (1 << target) != 0 {
                    continue;
                }
                let moved = (c & !(1u16 << j)) | (1u16 << target);
                let cj = index[&moved];
                matrix[ci * n + cj] += rate;
                out_rate += rate;
            }
        }
        matrix[ci * n + ci] = -out_rate;
    }

    Ok(RingGenerator {
        sites: l,
        particles: k,
        configs,
        index,
        matrix,
    })
}

/// Maximum real part of the spectrum and the multiplicity of the zero
/// eigenvalue (1 for a connected sector).
pub fn spectral_check(g: &RingGenerator) -> Result<(f64, usize)> {
    let n = g.dim();
    if n > 2000 {
        return Err(Error::Resource(format!(
            "spectral_check: sector dimension {n} exceeds 2000"
        )));
    }
    let m = DMatrix::from_row_slice(n, n, &g.matrix);
    let eigs = m
        .complex_eigenvalues();
    let max_real = eigs.iter().map(|e| e.re).fold(f64::NEG_INFINITY, f64::max);
    if !max_real.is_finite() {
        return Err(Error::Numeric("spectral_check: eigensolver failure".into()));
    }
    let zero_mult = eigs
        .iter()
        .filter(|e| e.re.abs() < 1e-8 && e.im.abs() < 1e-8)
        .count();
    Ok((max_real, zero_mult))
}

/// Distribution over configurations at time t, started from one
/// configuration: e_0 exp(t G) by uniformization. Exact up to the Poisson
/// tail cut at 1e-14.
pub fn transition_distribution(
    g: &RingGenerator,
    initial: usize,
    t: f64,
) -> Result<Vec<f64>> {
    let n = g.dim();
    if initial >= n {
        return Err(Error::Argument(format!(
            "transition_distribution: index {initial} out of range"
        )));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Argument(format!(
            "transition_distribution: bad time {t}"
        )));
    }
    let lambda = (0..n)
        .map(|i| -g.entry(i, i))
        .fold(0.0f64, f64::max);
    let mut pi = vec![0.0; n];
    pi[initial] = 1.0;
    if lambda == 0.0 || t == 0.0 {
        return Ok(pi);
    }
    let lt = lambda * t;
    if lt > 600.0 {
        return Err(Error::Resource(format!(
            "transition_distribution: uniformization rate {lt} too large"
        )));
    }

    // P = I + G / lambda is row-stochastic; sum Poisson(lt) weights.
    let mut weight = (-lt).exp();
    let mut acc: Vec<f64> = pi.iter().map(|v| v * weight).collect();
    let mut total_weight = weight;
    let mut k = 1.0;
    while total_weight < 1.0 - 1e-14 {
        let mut next = vec![0.0; n];
        for (i, &pv) in pi.iter().enumerate() {
            if pv == 0.0 {
                continue;
            }
            let row = g.row(i);
            for (j, &gij) in row.iter().enumerate() {
                if gij != 0.0 {
                    next[j] += pv * gij / lambda;
                }
            }
            next[i] += pv;
        }
        pi = next;
        weight *= lt / k;
        k += 1.0;
        total_weight += weight;
        for (a, &pv) in acc.iter_mut().zip(&pi) {
            *a += weight * pv;
        }
        if k > lt + 40.0 * lt.sqrt() + 60.0 {
            break;
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::SymmetricEigen;

    #[test]
    fn tasep_three_site_ring_is_directed_cycle() {
        // One particle on 3 sites with p = 1: each config has exactly one
        // move, rate 1, cycling 001 -> 010 -> 100 -> 001.
        let g = build_ring_generator(3, 1, AsepParams::new(1.0, 0.0).unwrap()).unwrap();
        assert_eq!(g.dim(), 3);
        assert_eq!(g.configs(), &[0b001, 0b010, 0b100]);
        for i in 0..3 {
            assert_eq!(g.entry(i, i), -1.0);
            let next = g.config_index(g.configs()[i].rotate_site_left(3)).unwrap();
            assert_eq!(g.entry(i, next), 1.0);
        }
    }

    trait RotateSite {
        fn rotate_site_left(self, l: usize) -> u16;
    }
    impl RotateSite for u16 {
        fn rotate_site_left(self, l: usize) -> u16 {
            let shifted = self << 1;
            (shifted | (shifted >> l)) & ((1 << l) - 1)
        }
    }

    #[test]
    fn rows_sum_to_zero() {
        let g = build_ring_generator(8, 4, AsepParams::new(0.3, 0.7).unwrap()).unwrap();
        for i in 0..g.dim() {
            let sum: f64 = g.row(i).iter().sum();
            assert!(sum.abs() < 1e-13);
            for (j, &v) in g.row(i).iter().enumerate() {
                if i != j {
                    assert!(v >= 0.0);
                }
            }
        }
    }

    #[test]
    fn uniform_vector_is_stationary() {
        let g = build_ring_generator(8, 4, AsepParams::new(0.7, 0.3).unwrap()).unwrap();
        let n = g.dim();
        // (u G)_j = (1/n) sum_i G_ij
        for j in 0..n {
            let col: f64 = (0..n).map(|i| g.entry(i, j)).sum();
            assert!(col.abs() / n as f64 <= 1e-12, "column {j}: {col}");
        }
    }

    #[test]
    fn symmetric_rates_give_symmetric_matrix() {
        let g = build_ring_generator(6, 3, AsepParams::symmetric()).unwrap();
        for i in 0..g.dim() {
            for j in 0..g.dim() {
                assert_eq!(g.entry(i, j), g.entry(j, i));
            }
        }
    }

    #[test]
    fn spectral_check_small_rings() {
        let g = build_ring_generator(4, 2, AsepParams::new(0.8, 0.2).unwrap()).unwrap();
        let (max_re, mult) = spectral_check(&g).unwrap();
        assert!(max_re.abs() < 1e-10);
        assert_eq!(mult, 1);

        // Full ring: frozen, all rates zero, spectrum {0}.
        let g = build_ring_generator(3, 3, AsepParams::new(0.8, 0.2).unwrap()).unwrap();
        assert_eq!(g.dim(), 1);
        let (max_re, mult) = spectral_check(&g).unwrap();
        assert_eq!(max_re, 0.0);
        assert_eq!(mult, 1);
    }

    #[test]
    fn symmetric_sector_spectrum_real_nonpositive() {
        let g = build_ring_generator(6, 3, AsepParams::symmetric()).unwrap();
        let n = g.dim();
        let (max_re, mult) = spectral_check(&g).unwrap();
        assert!(max_re.abs() < 1e-10);
        assert_eq!(mult, 1);

        // Symmetric eigendecomposition as the independent oracle.
        let m = DMatrix::from_row_slice(n, n, &g.matrix);
        let sym_eigs = SymmetricEigen::new(m.clone()).eigenvalues;
        assert!(sym_eigs.iter().all(|&e| e < 1e-10));

        let mut general: Vec<f64> = m.complex_eigenvalues().iter().map(|e| e.re).collect();
        let mut oracle: Vec<f64> = sym_eigs.iter().copied().collect();
        general.sort_by(|a, b| a.partial_cmp(b).unwrap());
        oracle.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in general.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn invalid_sectors_rejected() {
        let p = AsepParams::symmetric();
        assert!(build_ring_generator(1, 1, p).is_err());
        assert!(build_ring_generator(13, 2, p).is_err());
        assert!(build_ring_generator(6, 0, p).is_err());
        assert!(build_ring_generator(6, 7, p).is_err());
    }

    #[test]
    fn transition_distribution_matches_taylor_series() {
        // Independent oracle: plain Taylor sum of e_0 exp(tG) (converges
        // fast at small t since rates are O(1)).
        let g = build_ring_generator(5, 2, AsepParams::new(0.4, 0.6).unwrap()).unwrap();
        let n = g.dim();
        let t = 0.7;
        let mut term = vec![0.0; n];
        term[3] = 1.0;
        let mut oracle = term.clone();
        for k in 1..60 {
            let mut next = vec![0.0; n];
            for i in 0..n {
                if term[i] == 0.0 {
                    continue;
                }
                for j in 0..n {
                    next[j] += term[i] * g.entry(i, j) * t / k as f64;
                }
            }
            term = next;
            for (o, &v) in oracle.iter_mut().zip(&term) {
                *o += v;
            }
        }
        let uni = transition_distribution(&g, 3, t).unwrap();
        let total: f64 = uni.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        for (a, b) in uni.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn long_time_distribution_is_uniform() {
        let g = build_ring_generator(6, 3, AsepParams::new(0.7, 0.3).unwrap()).unwrap();
        let dist = transition_distribution(&g, 0, 200.0).unwrap();
        let n = g.dim() as f64;
        for &v in &dist {
            assert!((v - 1.0 / n).abs() < 1e-9);
        }
    }
}
