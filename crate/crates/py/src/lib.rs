//! Python bindings for the clock-model lab.

use std::collections::BTreeMap;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use clocklab::lattice::{self, build_boundary, LatticeSpec, SpinConfig};
use clocklab::observables::{observe, Observation};
use clocklab::sampler::{self, randomize_free, run_chain, ChainParams};
use clocklab::verifier::bounds::{self, BoundCase, BoundParams, SlabCounts};
use clocklab::verifier::{toy, verify_lemmas, LemmaSummary};

fn err(e: clocklab::Error) -> PyErr {
    match e {
        clocklab::Error::Io { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

#[pyfunction]
fn circular_distance(a: u32, b: u32, q: u32) -> PyResult<u32> {
    lattice::circular_distance(a, b, q).map_err(err)
}

/// Bottom boundary values indexed by `(x % 2) + 2 (y % 2)`.
#[pyfunction]
fn tiling_values(q: u32) -> [u16; 4] {
    lattice::tiling_values(q)
}

/// Exact Gibbs probabilities of every free-spin assignment of a tiny box.
#[pyfunction]
#[pyo3(signature = (n, l, q, beta, top=0))]
fn exact_probabilities(n: usize, l: usize, q: u32, beta: f64, top: u16) -> PyResult<Vec<f64>> {
    let spec = LatticeSpec::new(n, l, q).map_err(err)?;
    let boundary = lattice::build_boundary_unchecked(&spec, top).map_err(err)?;
    let template = SpinConfig::with_boundary(&boundary, top).map_err(err)?;
    Ok(sampler::exact_distribution(&template, beta).map_err(err)?.probabilities)
}

/// Run a chain and return one dict of observables per sample.
#[pyfunction]
#[pyo3(signature = (n, l, q, beta, sweeps, burn_in=0, seed=1, thin=1, hot=true))]
#[allow(clippy::too_many_arguments)]
fn simulate(
    n: usize,
    l: usize,
    q: u32,
    beta: f64,
    sweeps: usize,
    burn_in: usize,
    seed: u64,
    thin: usize,
    hot: bool,
) -> PyResult<Vec<BTreeMap<&'static str, f64>>> {
    let spec = LatticeSpec::new(n, l, q).map_err(err)?;
    let mut config = SpinConfig::with_boundary(&build_boundary(&spec, 0).map_err(err)?, 0).map_err(err)?;
    if hot {
        randomize_free(&mut config, seed);
    }
    let params = ChainParams {
        beta,
        sweeps,
        burn_in,
        seed,
        thin,
    };
    let mut out = Vec::new();
    run_chain(&mut config, &params, false, |sweep, c| {
        let o = observe(c)?;
        let mut m: BTreeMap<&'static str, f64> = Observation::NAMES.iter().copied().zip(o.values()).collect();
        m.insert("sweep", sweep as f64);
        out.push(m);
        Ok(())
    })
    .map_err(err)?;
    Ok(out)
}

/// Summary of the lemma suite: pattern count, identity failures and
/// `(applied, violated)` per inequality.
#[pyfunction]
#[pyo3(signature = (lmax=2, n=4))]
fn lemma_summary(lmax: usize, n: usize) -> PyResult<(usize, usize, BTreeMap<&'static str, (usize, usize)>)> {
    let rows = verify_lemmas(lmax, n, (0, 1), true).map_err(err)?;
    let s = LemmaSummary::from_rows(&rows);
    Ok((s.patterns, s.identity_failures, s.checks))
}

#[pyfunction]
#[pyo3(signature = (q, alpha_prime=bounds::DEFAULT_ALPHA_PRIME))]
fn a_q(q: f64, alpha_prime: f64) -> f64 {
    bounds::a_q(q, alpha_prime)
}

#[pyfunction]
fn glued_a_q(q: f64) -> PyResult<f64> {
    bounds::glued_a_q(q).map_err(err)
}

/// Smallest integer q with glued a(q) < 1, as a decimal string.
#[pyfunction]
fn glued_threshold() -> String {
    bounds::glued_threshold().to_string()
}

/// Named bound values for one case and slab counts.
#[pyfunction]
#[pyo3(signature = (case, q, beta, n=4, l=2, frustrated=0, disordered=0, chaotic=0, free_segments=0))]
#[allow(clippy::too_many_arguments)]
fn evaluate_bounds(
    case: &str,
    q: u64,
    beta: f64,
    n: usize,
    l: usize,
    frustrated: usize,
    disordered: usize,
    chaotic: usize,
    free_segments: usize,
) -> PyResult<BTreeMap<&'static str, f64>> {
    let case: BoundCase = case.parse().map_err(err)?;
    let p = BoundParams::new(q, beta).map_err(err)?;
    let c = SlabCounts {
        n,
        l,
        frustrated,
        disordered,
        chaotic,
        free_segments,
    };
    Ok(bounds::evaluate_bounds(case, &p, &c)
        .map_err(err)?
        .into_iter()
        .map(|b| (b.name, b.value))
        .collect())
}

/// `(trials, exact, periodic_sets)` for random orbit mixtures on the torus.
#[pyfunction]
#[pyo3(signature = (r, trials=100, seed=1))]
fn toy_trials(r: usize, trials: usize, seed: u64) -> PyResult<(usize, usize, usize)> {
    let s = toy::run_trials(r, trials, seed).map_err(err)?;
    Ok((s.trials, s.exact, s.periodic_sets))
}

#[pymodule]
fn pyclocklab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(circular_distance, m)?)?;
    m.add_function(wrap_pyfunction!(tiling_values, m)?)?;
    m.add_function(wrap_pyfunction!(exact_probabilities, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(lemma_summary, m)?)?;
    m.add_function(wrap_pyfunction!(a_q, m)?)?;
    m.add_function(wrap_pyfunction!(glued_a_q, m)?)?;
    m.add_function(wrap_pyfunction!(glued_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(toy_trials, m)?)?;
    Ok(())
}
