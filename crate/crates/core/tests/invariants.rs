//! Cross-module invariants and sampler behaviour on small boxes.

use proptest::prelude::*;

use clocklab::defects::{glue_pair, unglue};
use clocklab::lattice::{build_boundary, build_boundary_unchecked, LatticeSpec, SpinConfig};
use clocklab::planted::random_planted_pair;
use clocklab::sampler::{exact_distribution, metropolis_sweep, randomize_free};
use clocklab::verifier::bounds::{a_q, glued_a_q, DEFAULT_ALPHA_PRIME};
use clocklab::verifier::toy::run_trials;

fn hot_box(n: usize, l: usize, q: u32, seed: u64) -> SpinConfig {
    let spec = LatticeSpec::new(n, l, q).unwrap();
    let mut c = SpinConfig::with_boundary(&build_boundary(&spec, 0).unwrap(), 0).unwrap();
    randomize_free(&mut c, seed);
    c
}

#[test]
fn infinite_temperature_accepts_everything() {
    let mut c = hot_box(4, 3, 16, 1);
    for t in 0..5 {
        let s = metropolis_sweep(&mut c, 0.0, 1, t, true);
        assert_eq!(s.accepted, s.proposals);
    }
}

#[test]
fn cold_chain_never_raises_energy() {
    // All free spins equal to the top value: every bulk bond is ordered.
    let spec = LatticeSpec::new(4, 3, 64).unwrap();
    let mut c = SpinConfig::with_boundary(&build_boundary(&spec, 0).unwrap(), 0).unwrap();
    let e0 = c.total_energy();
    for t in 0..20 {
        let s = metropolis_sweep(&mut c, 20.0, 3, t, false);
        assert!(s.delta_energy <= 0);
    }
    assert!(c.total_energy() <= e0);
}

#[test]
fn same_seed_same_chain_for_any_scheduling() {
    let mut a = hot_box(6, 4, 32, 9);
    let mut b = a.clone();
    for t in 0..10 {
        metropolis_sweep(&mut a, 1.2, 9, t, true);
        metropolis_sweep(&mut b, 1.2, 9, t, false);
    }
    assert_eq!(a, b);
}

#[test]
fn small_box_frequencies_within_three_sigma() {
    let spec = LatticeSpec::new(2, 1, 4).unwrap();
    let template = SpinConfig::with_boundary(&build_boundary_unchecked(&spec, 0).unwrap(), 0).unwrap();
    let beta = 0.7;
    let exact = exact_distribution(&template, beta).unwrap();
    let mut c = template.clone();
    let sweeps = 200_000u64;
    let mut counts = vec![0u64; exact.probabilities.len()];
    for t in 0..sweeps {
        metropolis_sweep(&mut c, beta, 4, t, false);
        if t >= 1000 {
            counts[exact.index_of(c.free_spins())] += 1;
        }
    }
    let total = (sweeps - 1000) as f64;
    // Successive sweeps are correlated: inflate the variance by a generous
    // integrated autocorrelation time.
    let tau = 9.0;
    let mut bad = 0;
    for (p, &k) in exact.probabilities.iter().zip(&counts) {
        let sigma = (tau * p * (1.0 - p) / total).sqrt();
        if (k as f64 / total - p).abs() > 3.0 * sigma + 1e-4 {
            bad += 1;
        }
    }
    assert_eq!(bad, 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sweep_energy_bookkeeping(seed in 0u64..1000, beta in 0.0f64..3.0, q in 8u32..40) {
        let mut c = hot_box(4, 3, q, seed);
        let e0 = c.total_energy();
        let s = metropolis_sweep(&mut c, beta, seed, 0, false);
        prop_assert_eq!(c.total_energy(), e0 + s.delta_energy);
    }

    #[test]
    fn gluing_is_invertible(seed in 0u64..100_000, x in 0usize..4, y in 0usize..4, l in 7usize..12) {
        let spec = LatticeSpec::new(4, l, 64).unwrap();
        let p = random_planted_pair(spec, seed).unwrap();
        let g = p.geometry(x, y);
        let o = glue_pair(&p.config, &g).unwrap();
        prop_assert!(o.energy_delta >= -4);
        prop_assert_eq!(unglue(&o.config, &g, o.rotation).unwrap(), p.config);
    }

    #[test]
    fn torus_identity_is_exact(r in 2usize..5, seed in 0u64..1000) {
        let s = run_trials(r, 3, seed).unwrap();
        prop_assert_eq!(s.exact, s.trials);
    }

    #[test]
    fn bound_constants_decrease_in_q(q in 19.0f64..1e6) {
        prop_assert!(a_q(q * 1.5, DEFAULT_ALPHA_PRIME) < a_q(q, DEFAULT_ALPHA_PRIME));
        prop_assert!(glued_a_q(q * 1.5).unwrap() < glued_a_q(q).unwrap());
    }
}
