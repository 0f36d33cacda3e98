//! Checkerboard Metropolis dynamics and exact enumeration for tiny boxes.
//!
//! Each (sweep, parity, plane) triple draws from its own ChaCha stream, and
//! same-parity sites never interact, so a sweep gives the same result
//! whether planes run serially or on a thread pool.

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{Spin, SpinConfig};

#[derive(Clone, Debug, PartialEq)]
pub struct ChainParams {
    pub beta: f64,
    /// Sweeps after burn-in.
    pub sweeps: usize,
    pub burn_in: usize,
    pub seed: u64,
    /// Observe every `thin` sweeps after burn-in.
    pub thin: usize,
}

impl ChainParams {
    pub fn validate(&self) -> Result<()> {
        if !self.beta.is_finite() || self.beta < 0.0 {
            return Err(Error::InvalidParams(format!(
                "beta must be finite and >= 0, got {}",
                self.beta
            )));
        }
        if self.thin == 0 {
            return Err(Error::InvalidParams("thin must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SweepStats {
    pub proposals: u64,
    pub accepted: u64,
    /// Energy change over the sweep.
    pub delta_energy: i64,
}

impl std::ops::AddAssign for SweepStats {
    fn add_assign(&mut self, o: Self) {
        self.proposals += o.proposals;
        self.accepted += o.accepted;
        self.delta_energy += o.delta_energy;
    }
}

fn stream_id(sweep: u64, parity: usize, z: usize, planes: usize) -> u64 {
    (sweep * 2 + parity as u64) * planes as u64 + z as u64
}

/// Acceptance probabilities `exp(-beta * dh)` for `dh = 0..=6`.
fn acceptance_table(beta: f64) -> [f64; 7] {
    let mut t = [1.0; 7];
    for (dh, v) in t.iter_mut().enumerate() {
        *v = (-beta * dh as f64).exp();
    }
    t
}

fn plane_moves(
    config: &SpinConfig,
    table: &[f64; 7],
    seed: u64,
    sweep: u64,
    parity: usize,
    z: usize,
) -> (Vec<(usize, Spin)>, SweepStats) {
    let spec = config.spec();
    let q = spec.q();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id(sweep, parity, z, spec.planes()));
    let mut moves = Vec::new();
    let mut stats = SweepStats::default();
    for y in 0..spec.n() {
        for x in 0..spec.n() {
            if (x + y + z) % 2 != parity {
                continue;
            }
            let old = config.get(x, y, z);
            let proposal = rng.random_range(0..q) as Spin;
            let u: f64 = rng.random();
            stats.proposals += 1;
            let before = config.ordered_neighbours(x, y, z, old) as i64;
            let after = config.ordered_neighbours(x, y, z, proposal) as i64;
            let dh = before - after;
            if dh <= 0 || u < table[dh as usize] {
                stats.accepted += 1;
                stats.delta_energy += dh;
                if proposal != old {
                    moves.push((spec.site_index(x, y, z), proposal));
                }
            }
        }
    }
    (moves, stats)
}

/// One full sweep: all even sites, then all odd sites of the free planes.
pub fn metropolis_sweep(config: &mut SpinConfig, beta: f64, seed: u64, sweep: u64, parallel: bool) -> SweepStats {
    let table = acceptance_table(beta);
    let l = config.spec().l();
    let mut total = SweepStats::default();
    for parity in 0..2 {
        let results: Vec<_> = if parallel {
            (1..=l)
                .into_par_iter()
                .map(|z| plane_moves(config, &table, seed, sweep, parity, z))
                .collect()
        } else {
            (1..=l)
                .map(|z| plane_moves(config, &table, seed, sweep, parity, z))
                .collect()
        };
        let spins = config.spins_mut();
        for (moves, stats) in results {
            for (i, v) in moves {
                spins[i] = v;
            }
            total += stats;
        }
    }
    total
}

/// Ordered bonds over all `(3L + 5) N²` bonds, boundary planes included.
pub fn ordered_fraction(config: &SpinConfig) -> Ratio<usize> {
    Ratio::new(config.ordered_bond_count(), config.spec().bond_count())
}

/// Fill the free planes with independent uniform spins.
pub fn randomize_free(config: &mut SpinConfig, seed: u64) {
    let spec = *config.spec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    let p = spec.plane_size();
    for s in &mut config.spins_mut()[p..p * (spec.l() + 1)] {
        *s = rng.random_range(0..spec.q()) as Spin;
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ChainSummary {
    pub stats: SweepStats,
    pub samples: usize,
    pub final_energy: i64,
}

impl ChainSummary {
    pub fn acceptance_rate(&self) -> f64 {
        if self.stats.proposals == 0 {
            0.0
        } else {
            self.stats.accepted as f64 / self.stats.proposals as f64
        }
    }
}

/// Run `burn_in + sweeps` sweeps from `config`, calling `observe(sweep, config)`
/// on every `thin`-th sweep after burn-in. Sweeps are numbered from 1.
pub fn run_chain<F>(
    config: &mut SpinConfig,
    params: &ChainParams,
    parallel: bool,
    mut observe: F,
) -> Result<ChainSummary>
where
    F: FnMut(usize, &SpinConfig) -> Result<()>,
{
    params.validate()?;
    let mut summary = ChainSummary::default();
    let mut energy = config.total_energy();
    for t in 1..=params.burn_in + params.sweeps {
        let stats = metropolis_sweep(config, params.beta, params.seed, t as u64, parallel);
        energy += stats.delta_energy;
        summary.stats += stats;
        if t > params.burn_in && (t - params.burn_in).is_multiple_of(params.thin) {
            observe(t, config)?;
            summary.samples += 1;
        }
    }
    summary.final_energy = energy;
    Ok(summary)
}

/// Gibbs probabilities of every free-spin assignment, in base-`q` order with
/// the first free site as the least significant digit.
#[derive(Clone, Debug)]
pub struct ExactDistribution {
    pub q: u32,
    pub free_sites: usize,
    pub probabilities: Vec<f64>,
    pub energies: Vec<i64>,
}

impl ExactDistribution {
    pub fn index_of(&self, free: &[Spin]) -> usize {
        free.iter()
            .rev()
            .fold(0usize, |acc, &s| acc * self.q as usize + s as usize)
    }

    /// Total variation distance to an empirical histogram over the same states.
    pub fn total_variation(&self, counts: &[u64]) -> f64 {
        let total: u64 = counts.iter().sum();
        0.5 * self
            .probabilities
            .iter()
            .zip(counts)
            .map(|(p, &c)| (p - c as f64 / total as f64).abs())
            .sum::<f64>()
    }
}

pub const EXACT_STATE_LIMIT: f64 = 1e7;

/// Enumerate all free configurations compatible with the boundary planes of
/// `template`.
pub fn exact_distribution(template: &SpinConfig, beta: f64) -> Result<ExactDistribution> {
    if !beta.is_finite() || beta < 0.0 {
        return Err(Error::InvalidParams(format!(
            "beta must be finite and >= 0, got {beta}"
        )));
    }
    let spec = *template.spec();
    let q = spec.q();
    let free_sites = spec.free_site_count();
    let states = (q as f64).powi(free_sites as i32);
    if states > EXACT_STATE_LIMIT {
        return Err(Error::StateSpaceTooLarge {
            states,
            limit: EXACT_STATE_LIMIT,
        });
    }
    let states = states as usize;
    let offset = spec.plane_size();
    let mut config = template.clone();
    let mut energies = Vec::with_capacity(states);
    let mut digits = vec![0 as Spin; free_sites];
    for idx in 0..states {
        if idx > 0 {
            for d in digits.iter_mut() {
                *d += 1;
                if (*d as u32) < q {
                    break;
                }
                *d = 0;
            }
        }
        config.spins_mut()[offset..offset + free_sites].copy_from_slice(&digits);
        energies.push(config.total_energy());
    }
    let e0 = *energies.iter().min().expect("at least one state");
    let weights: Vec<f64> = energies.iter().map(|&e| (-beta * (e - e0) as f64).exp()).collect();
    let z: f64 = weights.iter().sum();
    Ok(ExactDistribution {
        q,
        free_sites,
        probabilities: weights.into_iter().map(|w| w / z).collect(),
        energies,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_boundary, build_boundary_unchecked, LatticeSpec};

    fn small(q: u32) -> SpinConfig {
        let spec = LatticeSpec::new(2, 1, q).unwrap();
        SpinConfig::with_boundary(&build_boundary_unchecked(&spec, 0).unwrap(), 0).unwrap()
    }

    #[test]
    fn exact_counts_and_normalisation() {
        let d = exact_distribution(&small(5), 1.0).unwrap();
        assert_eq!(d.probabilities.len(), 625);
        assert!((d.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let flat = exact_distribution(&small(5), 0.0).unwrap();
        assert!(flat.probabilities.iter().all(|p| (p - 1.0 / 625.0).abs() < 1e-15));
    }

    #[test]
    fn exact_guard() {
        let spec = LatticeSpec::new(4, 1, 12).unwrap();
        let c = SpinConfig::with_boundary(&build_boundary(&spec, 0).unwrap(), 0).unwrap();
        assert!(matches!(
            exact_distribution(&c, 1.0),
            Err(Error::StateSpaceTooLarge { .. })
        ));
    }

    #[test]
    fn energy_tracking_is_exact() {
        let spec = LatticeSpec::new(4, 3, 12).unwrap();
        let mut c = SpinConfig::with_boundary(&build_boundary(&spec, 2).unwrap(), 0).unwrap();
        randomize_free(&mut c, 9);
        let params = ChainParams {
            beta: 0.7,
            sweeps: 50,
            burn_in: 0,
            seed: 3,
            thin: 1,
        };
        let summary = run_chain(&mut c, &params, false, |_, _| Ok(())).unwrap();
        assert_eq!(summary.final_energy, c.total_energy());
        assert_eq!(summary.samples, 50);
    }

    #[test]
    fn parallel_matches_serial() {
        let spec = LatticeSpec::new(6, 5, 16).unwrap();
        let mut a = SpinConfig::with_boundary(&build_boundary(&spec, 1).unwrap(), 0).unwrap();
        randomize_free(&mut a, 1);
        let mut b = a.clone();
        for t in 1..20 {
            metropolis_sweep(&mut a, 1.1, 77, t, false);
            metropolis_sweep(&mut b, 1.1, 77, t, true);
        }
        assert_eq!(a, b);
    }

    #[test]
    fn boundary_planes_stay_frozen() {
        let spec = LatticeSpec::new(4, 2, 8).unwrap();
        let b = build_boundary(&spec, 3).unwrap();
        let mut c = SpinConfig::with_boundary(&b, 0).unwrap();
        for t in 1..30 {
            metropolis_sweep(&mut c, 0.3, 5, t, false);
        }
        assert_eq!(c.plane(0), &b.bottom[..]);
        assert_eq!(c.plane(3), &b.top[..]);
    }

    #[test]
    fn negative_beta_rejected() {
        let params = ChainParams {
            beta: -1.0,
            sweeps: 1,
            burn_in: 0,
            seed: 0,
            thin: 1,
        };
        let mut c = small(5);
        assert!(run_chain(&mut c, &params, false, |_, _| Ok(())).is_err());
    }
}
