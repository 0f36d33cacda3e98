//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `EXPECTED_FAIL` are implemented as stated and fail for
//! reasons recorded with the project notes; the run exits non-zero if they
//! start passing, so a change in behaviour gets noticed.

use std::fs;
use std::process::ExitCode;
use std::time::Instant;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use clocklab::defects::{glue_pair, unglue, DefectClass};
use clocklab::experiment::{observable_means, peierls_scan, read_results, run_experiment, ExperimentPlan};
use clocklab::lattice::{build_boundary_unchecked, LatticeSpec, SpinConfig};
use clocklab::planted::{column_defect_class, random_planted_pair};
use clocklab::sampler::{exact_distribution, metropolis_sweep};
use clocklab::verifier::bounds::{
    a_q, glued_a_below_one, glued_a_q, glued_threshold, glued_threshold_estimate, DEFAULT_ALPHA_PRIME,
};
use clocklab::verifier::checks::floor_single_cube_values;
use clocklab::verifier::glued::{
    all_overlays, check_glued_pair, line_term_threshold, sample_overlays, GluedPair, MirroredCube,
};
use clocklab::verifier::toy::run_trials;
use clocklab::verifier::{enumerate_patterns, verify_lemmas, Frac, LemmaSummary};

const EXPECTED_FAIL: [&str; 2] = ["5", "9b"];

struct Outcome {
    id: &'static str,
    pass: bool,
}

fn report(out: &mut Vec<Outcome>, id: &'static str, pass: bool, what: String, started: Instant) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("[{tag}] {id:>3}  {what}  ({:.1}s)", started.elapsed().as_secs_f64());
    out.push(Outcome { id, pass });
}

fn sampler_tv(beta: f64, sweeps: usize) -> f64 {
    let spec = LatticeSpec::new(2, 1, 5).unwrap();
    let template = SpinConfig::with_boundary(&build_boundary_unchecked(&spec, 0).unwrap(), 0).unwrap();
    let exact = exact_distribution(&template, beta).unwrap();
    let mut config = template.clone();
    let mut counts = vec![0u64; exact.probabilities.len()];
    for t in 1..=1000 {
        metropolis_sweep(&mut config, beta, 17, t, false);
    }
    for t in 1001..=1000 + sweeps as u64 {
        metropolis_sweep(&mut config, beta, 17, t, false);
        counts[exact.index_of(config.free_spins())] += 1;
    }
    exact.total_variation(&counts)
}

fn criterion_1(out: &mut Vec<Outcome>) {
    let t = Instant::now();
    let tv = sampler_tv(1.0, 1_000_000);
    let secs = t.elapsed().as_secs_f64();
    report(
        out,
        "1a",
        tv < 0.02 && secs < 120.0,
        format!("sampler vs exact, N=2 L=1 q=5 beta=1, 1e6 sweeps: TV = {tv:.4} (< 0.02, < 120 s)"),
        t,
    );
    let t = Instant::now();
    let tv = sampler_tv(0.0, 1_000_000);
    report(
        out,
        "1b",
        tv < 0.01,
        format!("sampler vs exact, beta=0, 1e6 sweeps: TV = {tv:.4} (< 0.01)"),
        t,
    );
}

fn criteria_2_3(out: &mut Vec<Outcome>) {
    let t = Instant::now();
    let rows = verify_lemmas(2, 4, (0, 1), true).unwrap();
    let s = LemmaSummary::from_rows(&rows);
    report(
        out,
        "2",
        s.identity_failures == 0 && s.patterns > 1000,
        format!(
            "counting identity over {} admissible patterns (stack <= 2, N=4): {} nonzero residuals",
            s.patterns, s.identity_failures
        ),
        t,
    );

    let t = Instant::now();
    let applied: Vec<String> = s.checks.iter().map(|(k, (a, v))| format!("{k} {v}/{a}")).collect();
    // Equality in the order-disorder bound exactly for problematic defects.
    let mut iff_ok = true;
    let mut equality_cases = 0;
    for r in &rows {
        if let Some(c) = r.report.get("od_equality") {
            let tight = c.lhs == Frac::from_integer(2);
            equality_cases += tight as usize;
            iff_ok &= tight == (r.class() == DefectClass::Problematic);
        }
    }
    let problematic = s.by_class.get("problematic").copied().unwrap_or(0);
    report(
        out,
        "3",
        s.violations() == 0 && iff_ok && equality_cases == problematic,
        format!(
            "inequalities with proof constants, violations/applied: {}; equality cases {equality_cases} = problematic {problematic}",
            applied.join(", ")
        ),
        t,
    );
}

fn criterion_4(out: &mut Vec<Outcome>) {
    let t = Instant::now();
    let n = 4;
    let mut relation_ok = true;
    let mut hits = 0;
    for p in enumerate_patterns(1, 2, true).unwrap() {
        let s = clocklab::verifier::defect_stats(&p, n).unwrap();
        let (lhs, rhs) = floor_single_cube_values(&s);
        relation_ok &= lhs == rhs
            && s.l == 1
            && s.free_segments == 0
            && s.k_norm() == s.db_norm()
            && s.d_norm() == Frac::from_integer(3) + s.db_norm()
            && s.db_norm() <= Frac::new(3, 4);
        if s.db_norm() == Frac::new(3, 4) {
            hits += 1;
            relation_ok &= lhs == Frac::new(33, 8);
        }
    }
    report(
        out,
        "4",
        relation_ok && hits > 0,
        format!("floor d=2 m=1: 2D - (9/2)K = 6 - (5/2)D^b on every pattern; D^b = 3/4 N^2 gives 4 + 1/8 exactly ({hits} patterns)"),
        t,
    );
}

fn criterion_5(out: &mut Vec<Outcome>) {
    let t = Instant::now();
    let mirrors: Vec<Option<MirroredCube>> = std::iter::once(None)
        .chain(MirroredCube::all_frustrated().map(Some))
        .collect();
    let (mut checked, mut fails, mut fails_leading, mut disconnected) = (0, 0, 0, true);
    let mut worst = Frac::from_integer(100);
    let mut worst_leading = Frac::from_integer(100);
    for n in [2usize, 4] {
        let overlays = if n == 2 {
            all_overlays(2).unwrap()
        } else {
            sample_overlays(4, 10_000, 5)
        };
        for (i, o) in overlays.iter().enumerate() {
            let ms: Vec<Option<MirroredCube>> = if n == 2 {
                mirrors.clone()
            } else {
                vec![mirrors[i % mirrors.len()]]
            };
            for m in ms {
                let r = check_glued_pair(&GluedPair::new(n, m, o.clone()).unwrap());
                checked += 1;
                fails += !r.holds as usize;
                fails_leading += !r.holds_leading as usize;
                disconnected &= r.ends_disconnected;
                worst = worst.min(r.lhs - r.rhs);
                worst_leading = worst_leading.min(r.lhs_leading - r.rhs);
            }
        }
    }
    let absorb = line_term_threshold(worst_leading, 4).unwrap_or(f64::INFINITY);
    report(
        out,
        "5",
        fails == 0 && disconnected,
        format!(
            "glued pair D - ((3L+1)/L)(K+Q+2LN) >= 9/20 N^2 over {checked} cases (N=2 all, N=4 1e4 sampled): {fails} violations, worst margin {worst}; without the 2LN term {fails_leading} violations, worst margin {worst_leading}, line term absorbed for N >= {absorb:.0}"
        ),
        t,
    );
}

fn criterion_6(out: &mut Vec<Outcome>) {
    let t = Instant::now();
    let spec = LatticeSpec::new(4, 12, 64).unwrap();
    let (mut round_trip, mut energy_ok, mut problematic) = (true, true, true);
    let mut min_delta = i64::MAX;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for seed in 0..10_000u64 {
        let p = random_planted_pair(spec, seed).unwrap();
        if seed % 100 == 0 {
            let (x, y) = (rng.random_range(0..4), rng.random_range(0..4));
            problematic &= column_defect_class(&p.config, x, y, p.a_lower) == Some(DefectClass::Problematic)
                && column_defect_class(&p.config, x, y, p.a_upper) == Some(DefectClass::Problematic);
        }
        let g = p.geometry(rng.random_range(0..4), rng.random_range(0..4));
        let o = glue_pair(&p.config, &g).unwrap();
        round_trip &= unglue(&o.config, &g, o.rotation).unwrap() == p.config;
        energy_ok &= o.energy_delta >= -4;
        min_delta = min_delta.min(o.energy_delta);
    }
    report(
        out,
        "6",
        round_trip && energy_ok && problematic,
        format!("gluing on 1e4 planted problematic pairs (N=4 L=12 q=64): inverse round-trips = {round_trip}, min H(s) - H(Phi s) = {min_delta} (>= -4)"),
        t,
    );
}

fn criterion_7(out: &mut Vec<Outcome>) {
    let t = Instant::now();
    let mut parts = Vec::new();
    let mut pass = true;
    for r in 2..=4 {
        let s = run_trials(r, 100, 70 + r as u64).unwrap();
        pass &= s.exact == 100 && s.periodic_sets >= 10;
        parts.push(format!(
            "R={r}: {}/100 exact, {} periodic sets",
            s.exact, s.periodic_sets
        ));
    }
    report(
        out,
        "7",
        pass,
        format!("torus identity, exact rationals: {}", parts.join("; ")),
        t,
    );
}

fn criterion_8(out: &mut Vec<Outcome>) {
    let t = Instant::now();
    let q_star = glued_threshold();
    let exact_ok = glued_a_below_one(&q_star) && !glued_a_below_one(&(&q_star - BigUint::from(1u32)));
    let est = glued_threshold_estimate();
    let q_f: f64 = q_star.to_string().parse().unwrap();
    let float_ok = ((q_f - est) / q_f).abs() < 1e-9;
    let mut monotone = true;
    let (mut prev_a, mut prev_g) = (f64::INFINITY, f64::INFINITY);
    for q in 32..=4096u32 {
        let a = a_q(q as f64, DEFAULT_ALPHA_PRIME);
        let g = glued_a_q(q as f64).unwrap();
        monotone &= a < prev_a && g < prev_g;
        prev_a = a;
        prev_g = g;
    }
    report(
        out,
        "8",
        exact_ok && float_ok && monotone,
        format!(
            "a(64) = {:.6}, glued a(64) = {:.4}; smallest q with glued a(q) < 1: {q_star} (~{q_f:.4e}, float root agrees to 1e-9: {float_ok}); both strictly decreasing on q in [32, 4096]: {monotone}",
            a_q(64.0, DEFAULT_ALPHA_PRIME),
            glued_a_q(64.0).unwrap()
        ),
        t,
    );
}

const GRID_PLAN: &str = "\
[grid]
n = 16
l = 16
q = 8, 64
beta = 0.5, 1, 1.5, 2, 3
[chain]
seeds = 1, 2
sweeps = 500
burn_in = 300
thin = 10
start = hot
";

const ORDERED_PLAN: &str = "\
[grid]
n = 8
l = 8
q = 64
beta = 3
[chain]
seeds = 3, 4
sweeps = 1000
burn_in = 200
thin = 10
start = hot
";

fn criterion_9(out: &mut Vec<Outcome>) {
    let dir = std::env::temp_dir().join(format!("clocklab-acceptance-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);

    let t = Instant::now();
    let plan = ExperimentPlan::parse(GRID_PLAN).unwrap();
    let r = run_experiment(&plan, &dir.join("grid")).unwrap();
    assert!(r.failures.is_empty(), "{:?}", r.failures);
    let rows = read_results(&r.results_path).unwrap();
    let comps: Vec<f64> = rows
        .iter()
        .filter(|r| r.observable == "n_interface_components")
        .map(|r| r.value)
        .collect();
    let with_interface = comps.iter().filter(|&&c| c >= 1.0).count();
    report(
        out,
        "9a",
        comps.len() >= 1000 && with_interface == comps.len(),
        format!(
            "3D interface present in {with_interface}/{} sampled configurations (100% required)",
            comps.len()
        ),
        t,
    );

    let t = Instant::now();
    let means = observable_means(&rows, "rigidity_fraction");
    let mut pass = true;
    let mut parts = Vec::new();
    for &beta in &plan.betas {
        let at = |q: u32| {
            means
                .iter()
                .find(|(k, _)| k.q == q && k.beta == beta)
                .map(|m| m.1)
                .unwrap()
        };
        let (m8, m64) = (at(8), at(64));
        pass &= m64 > m8;
        parts.push(format!("b={beta}: {m64:.3} vs {m8:.3}"));
    }
    report(
        out,
        "9b",
        pass,
        format!(
            "mean |R|/N^2 at q=64 strictly above q=8 on every beta (N=L=16): {}",
            parts.join(", ")
        ),
        t,
    );

    let t = Instant::now();
    let groups = peierls_scan(&rows, None);
    let monotone = groups.iter().all(|g| g.non_increasing && g.log_decreasing);
    let ordered = run_experiment(&ExperimentPlan::parse(ORDERED_PLAN).unwrap(), &dir.join("ordered")).unwrap();
    let og = peierls_scan(&read_results(&ordered.results_path).unwrap(), None);
    let ordered_ok = og
        .iter()
        .all(|g| g.non_increasing && g.log_decreasing && g.exceedance.get(1).copied().unwrap_or(0.0) < 0.5);
    let p1 = og.first().and_then(|g| g.exceedance.get(1).copied()).unwrap_or(0.0);
    report(
        out,
        "9c",
        monotone && ordered_ok,
        format!(
            "weight exceedance non-increasing and log-decreasing in all {} grid points; ordered side (q=64 N=L=8 beta=3) P(w >= 1) = {p1:.3} (< 0.5)",
            groups.len()
        ),
        t,
    );
    let _ = fs::remove_dir_all(&dir);
}

fn main() -> ExitCode {
    let mut out = Vec::new();
    criterion_1(&mut out);
    criteria_2_3(&mut out);
    criterion_4(&mut out);
    criterion_5(&mut out);
    criterion_6(&mut out);
    criterion_7(&mut out);
    criterion_8(&mut out);
    criterion_9(&mut out);

    let unexpected: Vec<&str> = out
        .iter()
        .filter(|o| !o.pass && !EXPECTED_FAIL.contains(&o.id))
        .map(|o| o.id)
        .collect();
    let recovered: Vec<&str> = out
        .iter()
        .filter(|o| o.pass && EXPECTED_FAIL.contains(&o.id))
        .map(|o| o.id)
        .collect();
    println!(
        "acceptance: {} passed, {} failed (expected failures: {})",
        out.iter().filter(|o| o.pass).count(),
        out.iter().filter(|o| !o.pass).count(),
        EXPECTED_FAIL.join(", ")
    );
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        return ExitCode::FAILURE;
    }
    if !recovered.is_empty() {
        eprintln!("expected failures now pass, update the notes: {recovered:?}");
        return ExitCode::FAILURE;
    }
    ExitCode::SUCCESS
}
