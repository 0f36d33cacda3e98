//! Exact check, on a small torus, that for a translation-invariant random
//! subset `X`: `P(0 ∈ X, |X| = k) = (k / R²) P(|X| = k)`.
//!
//! Subsets of the `R x R` torus are bit masks with bit `y * R + x`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const MAX_SIDE: usize = 8;

pub fn translate(mask: u64, r: usize, dx: usize, dy: usize) -> u64 {
    let mut out = 0;
    for i in 0..r * r {
        if mask >> i & 1 == 1 {
            let (x, y) = (i % r, i / r);
            out |= 1 << (((y + dy) % r) * r + (x + dx) % r);
        }
    }
    out
}

/// Distinct translates of `mask`, sorted.
pub fn orbit(mask: u64, r: usize) -> Vec<u64> {
    let mut v: Vec<u64> = (0..r)
        .flat_map(|dy| (0..r).map(move |dx| (dx, dy)))
        .map(|(dx, dy)| translate(mask, r, dx, dy))
        .collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// A probability measure on subsets of the torus with exact weights.
#[derive(Clone, Debug, PartialEq)]
pub struct ToyMeasure {
    r: usize,
    weights: BTreeMap<u64, BigRational>,
}

fn check_side(r: usize) -> Result<()> {
    if r == 0 || r > MAX_SIDE {
        return Err(Error::InvalidParams(format!(
            "torus side must be in 1..={MAX_SIDE}, got {r}"
        )));
    }
    Ok(())
}

impl ToyMeasure {
    /// Explicit weights; rejects measures that are not translation invariant
    /// or do not sum to one, naming a translation and set that witness it.
    pub fn from_weights(r: usize, weights: impl IntoIterator<Item = (u64, BigRational)>) -> Result<Self> {
        check_side(r)?;
        let mut w: BTreeMap<u64, BigRational> = BTreeMap::new();
        for (m, p) in weights {
            if r * r < 64 && m >> (r * r) != 0 {
                return Err(Error::InvalidParams(format!(
                    "set {m:#x} does not fit the {r}x{r} torus"
                )));
            }
            if p < BigRational::zero() {
                return Err(Error::InvalidParams("negative weight".into()));
            }
            *w.entry(m).or_insert_with(BigRational::zero) += p;
        }
        w.retain(|_, p| !p.is_zero());
        let total: BigRational = w.values().sum();
        if total != BigRational::one() {
            return Err(Error::InvalidParams(format!("weights sum to {total}, not 1")));
        }
        for (&m, p) in &w {
            for dy in 0..r {
                for dx in 0..r {
                    let t = translate(m, r, dx, dy);
                    if w.get(&t) != Some(p) {
                        return Err(Error::NotTranslationInvariant { dx, dy, set: m });
                    }
                }
            }
        }
        Ok(Self { r, weights: w })
    }

    /// Mixture with weights `mix[i]` of the uniform measures on the orbits of
    /// `sets[i]`.
    pub fn orbit_mixture(r: usize, sets: &[u64], mix: &[BigRational]) -> Result<Self> {
        check_side(r)?;
        if sets.len() != mix.len() || sets.is_empty() {
            return Err(Error::InvalidParams("need one mixture weight per set".into()));
        }
        let mut w = Vec::new();
        for (&s, p) in sets.iter().zip(mix) {
            let o = orbit(s, r);
            let share = p / BigRational::from_integer(BigInt::from(o.len()));
            w.extend(o.into_iter().map(|m| (m, share.clone())));
        }
        Self::from_weights(r, w)
    }

    pub fn side(&self) -> usize {
        self.r
    }

    /// `P(|X| = k)` for every `k`.
    pub fn size_law(&self) -> Vec<BigRational> {
        let mut v = vec![BigRational::zero(); self.r * self.r + 1];
        for (m, p) in &self.weights {
            v[m.count_ones() as usize] += p;
        }
        v
    }

    /// `P(0 ∈ X, |X| = k)` for every `k`.
    pub fn origin_law(&self) -> Vec<BigRational> {
        let mut v = vec![BigRational::zero(); self.r * self.r + 1];
        for (m, p) in &self.weights {
            if m & 1 == 1 {
                v[m.count_ones() as usize] += p;
            }
        }
        v
    }
}

/// Result of the identity check, one entry per subset size.
#[derive(Clone, Debug, PartialEq)]
pub struct ToyReport {
    pub lhs: Vec<BigRational>,
    pub rhs: Vec<BigRational>,
}

impl ToyReport {
    pub fn holds(&self) -> bool {
        self.lhs == self.rhs
    }
}

pub fn toy_identity_check(mu: &ToyMeasure) -> ToyReport {
    let area = BigRational::from_integer(BigInt::from(mu.r * mu.r));
    let lhs = mu.origin_law();
    let rhs = mu
        .size_law()
        .into_iter()
        .enumerate()
        .map(|(k, p)| BigRational::from_integer(BigInt::from(k)) / &area * p)
        .collect();
    ToyReport { lhs, rhs }
}

/// Is the orbit of `mask` smaller than the torus?
pub fn is_periodic(mask: u64, r: usize) -> bool {
    orbit(mask, r).len() < r * r
}

/// Random orbit mixture with small integer weights, returned with the number
/// of periodic sets in it. The first set is always periodic so that short
/// orbits are exercised.
pub fn random_mixture(r: usize, rng: &mut ChaCha8Rng) -> Result<(ToyMeasure, usize)> {
    check_side(r)?;
    if r < 2 {
        return Err(Error::InvalidParams("a 1x1 torus has no periodic subsets".into()));
    }
    let cells = r * r;
    let parts = rng.random_range(1..=4);
    let mut sets = Vec::with_capacity(parts);
    let mut periodic = 0;
    for i in 0..parts {
        let m = if i == 0 {
            periodic_set(r, rng)
        } else if cells == 64 {
            rng.random()
        } else {
            rng.random_range(0..1u64 << cells)
        };
        if is_periodic(m, r) {
            periodic += 1;
        }
        sets.push(m);
    }
    let mix_raw: Vec<u32> = (0..parts).map(|_| rng.random_range(1..=9)).collect();
    let total: u32 = mix_raw.iter().sum();
    let mix: Vec<BigRational> = mix_raw
        .iter()
        .map(|&w| BigRational::new(BigInt::from(w), BigInt::from(total)))
        .collect();
    Ok((ToyMeasure::orbit_mixture(r, &sets, &mix)?, periodic))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TrialSummary {
    pub trials: usize,
    pub exact: usize,
    pub periodic_sets: usize,
}

/// Check the identity on `trials` random mixtures on the `r x r` torus.
pub fn run_trials(r: usize, trials: usize, seed: u64) -> Result<TrialSummary> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = TrialSummary {
        trials,
        ..Default::default()
    };
    for _ in 0..trials {
        let (mu, periodic) = random_mixture(r, &mut rng)?;
        s.periodic_sets += periodic;
        s.exact += toy_identity_check(&mu).holds() as usize;
    }
    Ok(s)
}

/// A subset invariant under a non-trivial translation.
pub fn periodic_set(r: usize, rng: &mut ChaCha8Rng) -> u64 {
    // Pick a period (px, py) dividing r with px * py < r * r and fill a
    // random pattern on the fundamental cell.
    let divisors: Vec<usize> = (1..=r).filter(|d| r.is_multiple_of(*d)).collect();
    let (px, py) = loop {
        let px = divisors[rng.random_range(0..divisors.len())];
        let py = divisors[rng.random_range(0..divisors.len())];
        if px * py < r * r {
            break (px, py);
        }
    };
    let cell: u64 = rng.random_range(0..1u64 << (px * py));
    let mut m = 0u64;
    for y in 0..r {
        for x in 0..r {
            if cell >> ((y % py) * px + x % px) & 1 == 1 {
                m |= 1 << (y * r + x);
            }
        }
    }
    m
}
