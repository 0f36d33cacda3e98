//! Seeded experiment grids: plan files, per-point chains with CSV output, a
//! deterministic merge, byte-exact replay, and the empirical Peierls scan.
//!
//! A plan is plain text, one `key = value` per line under `[grid]`,
//! `[chain]` and `[output]` headers; lists are comma separated and `#`
//! starts a comment:
//!
//! ```text
//! [grid]
//! n = 8, 16
//! l = 8
//! q = 8, 64
//! beta = 0.5, 1.5
//! [chain]
//! seeds = 1, 2
//! sweeps = 400
//! burn_in = 200
//! thin = 20
//! start = hot
//! [output]
//! snapshots = last
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{build_boundary, save_snapshot, LatticeSpec, Spin, SpinConfig};
use crate::observables::{observe, Observation};
use crate::sampler::{randomize_free, run_chain, ChainParams};
use crate::verifier::bounds::{a_q, DEFAULT_ALPHA_PRIME};

pub const SCHEMA_LINE: &str = "# clocklab-results v1";
pub const RESULTS_HEADER: &str = "n,l,q,beta,seed,sweep,observable,value";
pub const PLAN_FILE: &str = "plan.txt";
pub const RESULTS_FILE: &str = "results.csv";
pub const FAILURES_FILE: &str = "failures.txt";
/// Groups with fewer samples get a warning from [`peierls_scan`].
pub const MIN_PEIERLS_SAMPLES: usize = 30;

/// Top boundary value used by every chain.
const TOP_VALUE: Spin = 0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Start {
    /// Uniform random interior.
    Hot,
    /// Interior equal to the top boundary value.
    Cold,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SnapshotPolicy {
    None,
    /// Final configuration of every chain.
    Last,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentPlan {
    pub ns: Vec<usize>,
    pub ls: Vec<usize>,
    pub qs: Vec<u32>,
    pub betas: Vec<f64>,
    /// One chain per seed at every grid point.
    pub seeds: Vec<u64>,
    pub sweeps: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub start: Start,
    pub snapshots: SnapshotPolicy,
}

fn parse_list<T: FromStr>(key: &str, v: &str, line: usize) -> Result<Vec<T>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse().map_err(|_| Error::Parse {
                line,
                msg: format!("bad value {s:?} for {key}"),
            })
        })
        .collect()
}

fn parse_one<T: FromStr>(key: &str, v: &str, line: usize) -> Result<T> {
    v.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("bad value {v:?} for {key}"),
    })
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(", ")
}

impl ExperimentPlan {
    pub fn parse(text: &str) -> Result<Self> {
        let mut section = String::new();
        let mut kv: BTreeMap<(String, String), (String, usize)> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let s = raw.split('#').next().unwrap_or("").trim();
            if s.is_empty() {
                continue;
            }
            if let Some(name) = s.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
                section = name.trim().to_string();
                if !["grid", "chain", "output"].contains(&section.as_str()) {
                    return Err(Error::Parse {
                        line,
                        msg: format!("unknown section [{section}]"),
                    });
                }
                continue;
            }
            let (k, v) = s.split_once('=').ok_or_else(|| Error::Parse {
                line,
                msg: format!("expected key = value, got {s:?}"),
            })?;
            let key = (section.clone(), k.trim().to_string());
            if kv.insert(key.clone(), (v.trim().to_string(), line)).is_some() {
                return Err(Error::Parse {
                    line,
                    msg: format!("duplicate key {}", key.1),
                });
            }
        }
        let mut take = |sec: &str, key: &str| kv.remove(&(sec.to_string(), key.to_string()));
        let missing = |key: &str| Error::Parse {
            line: 0,
            msg: format!("missing key {key}"),
        };
        let (v, l) = take("grid", "n").ok_or_else(|| missing("n"))?;
        let ns = parse_list("n", &v, l)?;
        let (v, l) = take("grid", "l").ok_or_else(|| missing("l"))?;
        let ls = parse_list("l", &v, l)?;
        let (v, l) = take("grid", "q").ok_or_else(|| missing("q"))?;
        let qs = parse_list("q", &v, l)?;
        let (v, l) = take("grid", "beta").ok_or_else(|| missing("beta"))?;
        let betas = parse_list("beta", &v, l)?;
        let (v, l) = take("chain", "seeds").ok_or_else(|| missing("seeds"))?;
        let seeds = parse_list("seeds", &v, l)?;
        let (v, l) = take("chain", "sweeps").ok_or_else(|| missing("sweeps"))?;
        let sweeps = parse_one("sweeps", &v, l)?;
        let burn_in = match take("chain", "burn_in") {
            Some((v, l)) => parse_one("burn_in", &v, l)?,
            None => 0,
        };
        let thin = match take("chain", "thin") {
            Some((v, l)) => parse_one("thin", &v, l)?,
            None => 1,
        };
        let start = match take("chain", "start") {
            None => Start::Hot,
            Some((v, l)) => match v.as_str() {
                "hot" => Start::Hot,
                "cold" => Start::Cold,
                _ => {
                    return Err(Error::Parse {
                        line: l,
                        msg: format!("start must be hot or cold, got {v:?}"),
                    })
                }
            },
        };
        let snapshots = match take("output", "snapshots") {
            None => SnapshotPolicy::None,
            Some((v, l)) => match v.as_str() {
                "none" => SnapshotPolicy::None,
                "last" => SnapshotPolicy::Last,
                _ => {
                    return Err(Error::Parse {
                        line: l,
                        msg: format!("snapshots must be none or last, got {v:?}"),
                    })
                }
            },
        };
        if let Some(((sec, key), (_, line))) = kv.into_iter().next() {
            return Err(Error::Parse {
                line,
                msg: format!("unknown key {key} in [{sec}]"),
            });
        }
        let plan = Self {
            ns,
            ls,
            qs,
            betas,
            seeds,
            sweeps,
            burn_in,
            thin,
            start,
            snapshots,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ns.is_empty()
            || self.ls.is_empty()
            || self.qs.is_empty()
            || self.betas.is_empty()
            || self.seeds.is_empty()
        {
            return Err(Error::InvalidParams(
                "every grid list and the seed list must be non-empty".into(),
            ));
        }
        let mut seeds = self.seeds.clone();
        seeds.sort_unstable();
        seeds.dedup();
        if seeds.len() != self.seeds.len() {
            return Err(Error::InvalidParams("chain seeds must be distinct".into()));
        }
        if self.betas.iter().any(|b| !b.is_finite() || *b < 0.0) {
            return Err(Error::InvalidParams("betas must be finite and >= 0".into()));
        }
        if self.sweeps == 0 || self.thin == 0 {
            return Err(Error::InvalidParams("sweeps and thin must be >= 1".into()));
        }
        Ok(())
    }

    /// Canonical text form; parsing it gives back the same plan.
    pub fn to_text(&self) -> String {
        let start = match self.start {
            Start::Hot => "hot",
            Start::Cold => "cold",
        };
        let snapshots = match self.snapshots {
            SnapshotPolicy::None => "none",
            SnapshotPolicy::Last => "last",
        };
        format!(
            "[grid]\nn = {}\nl = {}\nq = {}\nbeta = {}\n[chain]\nseeds = {}\nsweeps = {}\nburn_in = {}\nthin = {}\nstart = {start}\n[output]\nsnapshots = {snapshots}\n",
            join(&self.ns),
            join(&self.ls),
            join(&self.qs),
            join(&self.betas),
            join(&self.seeds),
            self.sweeps,
            self.burn_in,
            self.thin,
        )
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    /// Every chain of the grid, in sorted order.
    pub fn points(&self) -> Vec<GridPoint> {
        let mut v = Vec::new();
        for &n in &self.ns {
            for &l in &self.ls {
                for &q in &self.qs {
                    for &beta in &self.betas {
                        for &seed in &self.seeds {
                            v.push(GridPoint { n, l, q, beta, seed });
                        }
                    }
                }
            }
        }
        v.sort_by_key(GridPoint::sort_key);
        v.dedup_by_key(|p| p.sort_key());
        v
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridPoint {
    pub n: usize,
    pub l: usize,
    pub q: u32,
    pub beta: f64,
    pub seed: u64,
}

impl GridPoint {
    /// Betas are non-negative, so their bit patterns sort numerically.
    fn sort_key(&self) -> (usize, usize, u32, u64, u64) {
        (self.n, self.l, self.q, self.beta.to_bits(), self.seed)
    }

    pub fn key(&self) -> String {
        format!("n{}-l{}-q{}-b{}-s{}", self.n, self.l, self.q, self.beta, self.seed)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub n: usize,
    pub l: usize,
    pub q: u32,
    pub beta: f64,
    pub seed: u64,
    pub sweep: usize,
    pub observable: String,
    pub value: f64,
}

impl ResultRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.n, self.l, self.q, self.beta, self.seed, self.sweep, self.observable, self.value
        )
    }

    fn parse(s: &str, line: usize) -> Result<Self> {
        let f: Vec<&str> = s.split(',').collect();
        if f.len() != 8 {
            return Err(Error::Parse {
                line,
                msg: format!("expected 8 fields, got {}", f.len()),
            });
        }
        Ok(Self {
            n: parse_one("n", f[0], line)?,
            l: parse_one("l", f[1], line)?,
            q: parse_one("q", f[2], line)?,
            beta: parse_one("beta", f[3], line)?,
            seed: parse_one("seed", f[4], line)?,
            sweep: parse_one("sweep", f[5], line)?,
            observable: f[6].to_string(),
            value: parse_one("value", f[7], line)?,
        })
    }
}

/// Rows of a results file, checking the schema line.
pub fn read_results(path: &Path) -> Result<Vec<ResultRow>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_results(&text)
}

pub fn parse_results(text: &str) -> Result<Vec<ResultRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(SCHEMA_LINE) {
        return Err(Error::Parse {
            line: 1,
            msg: format!("expected schema line {SCHEMA_LINE:?}"),
        });
    }
    if lines.next() != Some(RESULTS_HEADER) {
        return Err(Error::Parse {
            line: 2,
            msg: "unexpected header".into(),
        });
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| ResultRow::parse(l, i + 3))
        .collect()
}

fn results_text(rows: impl IntoIterator<Item = String>) -> String {
    let mut s = format!("{SCHEMA_LINE}\n{RESULTS_HEADER}\n");
    for r in rows {
        s.push_str(&r);
        s.push('\n');
    }
    s
}

/// Run one chain and return its rows.
pub fn run_point(p: &GridPoint, plan: &ExperimentPlan, snapshot_dir: Option<&Path>) -> Result<Vec<ResultRow>> {
    let spec = LatticeSpec::new(p.n, p.l, p.q)?;
    let mut config = SpinConfig::with_boundary(&build_boundary(&spec, TOP_VALUE)?, TOP_VALUE)?;
    if plan.start == Start::Hot {
        randomize_free(&mut config, p.seed);
    }
    let params = ChainParams {
        beta: p.beta,
        sweeps: plan.sweeps,
        burn_in: plan.burn_in,
        seed: p.seed,
        thin: plan.thin,
    };
    let row = |sweep: usize, observable: &str, value: f64| ResultRow {
        n: p.n,
        l: p.l,
        q: p.q,
        beta: p.beta,
        seed: p.seed,
        sweep,
        observable: observable.to_string(),
        value,
    };
    let mut rows = Vec::new();
    // Chains inside a point stay serial; parallelism is across points.
    let summary = run_chain(&mut config, &params, false, |sweep, c| {
        let o = observe(c)?;
        for (name, v) in Observation::NAMES.iter().zip(o.values()) {
            rows.push(row(sweep, name, v));
        }
        Ok(())
    })?;
    let last = plan.burn_in + plan.sweeps;
    rows.push(row(last, "acceptance_rate", summary.acceptance_rate()));
    rows.push(row(last, "final_energy", summary.final_energy as f64));
    if let Some(dir) = snapshot_dir {
        save_snapshot(&config, &dir.join(format!("{}.txt", p.key())))?;
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentReport {
    pub points: usize,
    pub rows: usize,
    /// `(point key, error)` for every failed point.
    pub failures: Vec<(String, String)>,
    pub results_path: PathBuf,
}

fn create_dir(p: &Path) -> Result<()> {
    fs::create_dir_all(p).map_err(|e| Error::io(p, e))
}

fn write_file(p: &Path, contents: &str) -> Result<()> {
    fs::write(p, contents).map_err(|e| Error::io(p, e))
}

/// Run every grid point on the current rayon pool, one file per point under
/// `out/points`, then merge them in sorted order into `out/results.csv`.
/// A failing point is recorded in `out/failures.txt` and skipped.
pub fn run_experiment(plan: &ExperimentPlan, out: &Path) -> Result<ExperimentReport> {
    plan.validate()?;
    let points_dir = out.join("points");
    create_dir(&points_dir)?;
    let snapshot_dir = match plan.snapshots {
        SnapshotPolicy::Last => {
            let d = out.join("snapshots");
            create_dir(&d)?;
            Some(d)
        }
        SnapshotPolicy::None => None,
    };
    write_file(&out.join(PLAN_FILE), &plan.to_text())?;
    let points = plan.points();
    let outcomes: Vec<Result<usize>> = points
        .par_iter()
        .map(|p| {
            let rows = run_point(p, plan, snapshot_dir.as_deref())?;
            let path = points_dir.join(format!("{}.csv", p.key()));
            write_file(&path, &results_text(rows.iter().map(ResultRow::csv_line)))?;
            Ok(rows.len())
        })
        .collect();

    let mut merged = format!("{SCHEMA_LINE}\n{RESULTS_HEADER}\n");
    let mut failures = Vec::new();
    let mut total = 0;
    for (p, outcome) in points.iter().zip(outcomes) {
        match outcome {
            Ok(n) => {
                let path = points_dir.join(format!("{}.csv", p.key()));
                let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
                for line in text.lines().skip(2) {
                    merged.push_str(line);
                    merged.push('\n');
                }
                total += n;
            }
            Err(e) => failures.push((p.key(), e.to_string())),
        }
    }
    let results_path = out.join(RESULTS_FILE);
    write_file(&results_path, &merged)?;
    let failures_path = out.join(FAILURES_FILE);
    if failures.is_empty() {
        if failures_path.exists() {
            fs::remove_file(&failures_path).map_err(|e| Error::io(&failures_path, e))?;
        }
    } else {
        let mut s = String::new();
        for (k, e) in &failures {
            let _ = writeln!(s, "{k}: {e}");
        }
        write_file(&failures_path, &s)?;
    }
    Ok(ExperimentReport {
        points: points.len(),
        rows: total,
        failures,
        results_path,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReplayReport {
    pub replay_dir: PathBuf,
    /// Files, relative to the output directory, whose bytes differ.
    pub differing: Vec<String>,
}

impl ReplayReport {
    pub fn identical(&self) -> bool {
        self.differing.is_empty()
    }
}

fn relative_files(root: &Path) -> Result<Vec<String>> {
    let mut out = vec![RESULTS_FILE.to_string()];
    for sub in ["points", "snapshots"] {
        let dir = root.join(sub);
        if !dir.exists() {
            continue;
        }
        let mut names: Vec<String> = fs::read_dir(&dir)
            .map_err(|e| Error::io(&dir, e))?
            .filter_map(|e| e.ok())
            .map(|e| format!("{sub}/{}", e.file_name().to_string_lossy()))
            .collect();
        names.sort();
        out.extend(names);
    }
    Ok(out)
}

/// Re-run the plan stored in `dir` into `dir/replay` and compare every
/// output file byte for byte.
pub fn replay(dir: &Path) -> Result<ReplayReport> {
    let plan = ExperimentPlan::load(&dir.join(PLAN_FILE))?;
    let replay_dir = dir.join("replay");
    run_experiment(&plan, &replay_dir)?;
    let mut differing = Vec::new();
    let mut names = relative_files(dir)?;
    names.extend(relative_files(&replay_dir)?);
    names.sort();
    names.dedup();
    for name in names {
        let a = fs::read(dir.join(&name)).ok();
        let b = fs::read(replay_dir.join(&name)).ok();
        if a.is_none() || a != b {
            differing.push(name);
        }
    }
    Ok(ReplayReport { replay_dir, differing })
}

/// Grid coordinates of a group of rows, ignoring the seed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroupKey {
    pub n: usize,
    pub l: usize,
    pub q: u32,
    pub beta: f64,
}

impl GroupKey {
    fn of(r: &ResultRow) -> Self {
        Self {
            n: r.n,
            l: r.l,
            q: r.q,
            beta: r.beta,
        }
    }

    fn bits(&self) -> (usize, usize, u32, u64) {
        (self.n, self.l, self.q, self.beta.to_bits())
    }
}

fn grouped(rows: &[ResultRow], observable: &str) -> Vec<(GroupKey, Vec<f64>)> {
    let mut m: BTreeMap<(usize, usize, u32, u64), (GroupKey, Vec<f64>)> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.observable == observable) {
        let k = GroupKey::of(r);
        m.entry(k.bits()).or_insert_with(|| (k, Vec::new())).1.push(r.value);
    }
    m.into_values().collect()
}

/// Mean of `observable` per grid point, pooled over seeds, in grid order.
pub fn observable_means(rows: &[ResultRow], observable: &str) -> Vec<(GroupKey, f64)> {
    grouped(rows, observable)
        .into_iter()
        .map(|(k, v)| (k, v.iter().sum::<f64>() / v.len() as f64))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct PeierlsGroup {
    pub key: GroupKey,
    pub samples: usize,
    /// Empirical `P(w(B) >= w)` for `w = 0..=w_max`.
    pub exceedance: Vec<f64>,
    /// Least-squares slope of `ln P(w(B) >= w)` over the `w` with non-zero
    /// frequency; `None` with fewer than two such points.
    pub slope: Option<f64>,
    /// `ln a(q)` for `a(q) = 9 q^{-α'}`, for comparison with the slope.
    pub ln_a: f64,
    pub non_increasing: bool,
    /// The fitted slope is negative (vacuously true without a fit).
    pub log_decreasing: bool,
    pub warning: Option<String>,
}

fn ls_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Some(sxy / sxx)
}

/// Exceedance table of the interface weight per grid point. `w_max`
/// defaults to the largest observed weight of each group.
pub fn peierls_scan(rows: &[ResultRow], w_max: Option<usize>) -> Vec<PeierlsGroup> {
    grouped(rows, "weight")
        .into_iter()
        .map(|(key, ws)| {
            let samples = ws.len();
            let top = w_max.unwrap_or_else(|| ws.iter().fold(0.0f64, |a, &b| a.max(b)) as usize);
            let exceedance: Vec<f64> = (0..=top)
                .map(|w| ws.iter().filter(|&&x| x >= w as f64).count() as f64 / samples as f64)
                .collect();
            let fit: Vec<(f64, f64)> = exceedance
                .iter()
                .enumerate()
                .filter(|(_, &p)| p > 0.0)
                .map(|(w, &p)| (w as f64, p.ln()))
                .collect();
            let slope = ls_slope(&fit);
            let warning = (samples < MIN_PEIERLS_SAMPLES)
                .then(|| format!("only {samples} samples (want at least {MIN_PEIERLS_SAMPLES})"));
            PeierlsGroup {
                key,
                samples,
                non_increasing: exceedance.windows(2).all(|w| w[1] <= w[0]),
                log_decreasing: slope.is_none_or(|s| s < 0.0),
                exceedance,
                slope,
                ln_a: a_q(key.q as f64, DEFAULT_ALPHA_PRIME).ln(),
                warning,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const PLAN: &str = "\
# small grid
[grid]
n = 4
l = 3
q = 16, 64
beta = 2, 0.5
[chain]
seeds = 5, 6
sweeps = 20
burn_in = 10
thin = 5
start = cold
[output]
snapshots = last
";

    fn tmp(name: &str) -> PathBuf {
        let d = std::env::temp_dir().join(format!("clocklab-exp-{name}-{}", std::process::id()));
        let _ = fs::remove_dir_all(&d);
        d
    }

    #[test]
    fn plan_round_trip() {
        let p = ExperimentPlan::parse(PLAN).unwrap();
        assert_eq!(p.qs, vec![16, 64]);
        assert_eq!(p.start, Start::Cold);
        assert_eq!(ExperimentPlan::parse(&p.to_text()).unwrap(), p);
        let pts = p.points();
        assert_eq!(pts.len(), 8);
        assert_eq!(pts[0].beta, 0.5);
    }

    #[test]
    fn plan_errors() {
        assert!(ExperimentPlan::parse("[grid]\nn = 4\n").is_err());
        assert!(ExperimentPlan::parse(&PLAN.replace("seeds = 5, 6", "seeds = 5, 5")).is_err());
        assert!(ExperimentPlan::parse(&PLAN.replace("thin = 5", "thin = 5\ncolour = red")).is_err());
        assert!(ExperimentPlan::parse(&PLAN.replace("[output]", "[outputs]")).is_err());
        let e = ExperimentPlan::parse(&PLAN.replace("sweeps = 20", "sweeps = many")).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 9, .. }));
    }

    #[test]
    fn run_merge_replay() {
        let dir = tmp("run");
        let plan = ExperimentPlan::parse(PLAN).unwrap();
        let r = run_experiment(&plan, &dir).unwrap();
        assert!(r.failures.is_empty());
        assert_eq!(r.points, 8);
        let rows = read_results(&r.results_path).unwrap();
        assert_eq!(rows.len(), r.rows);
        // 4 samples per chain, 12 observables each, plus 2 summary rows.
        assert_eq!(r.rows, 8 * (4 * 12 + 2));
        let rep = replay(&dir).unwrap();
        assert!(rep.identical(), "{:?}", rep.differing);
        let means = observable_means(&rows, "rigidity_fraction");
        assert_eq!(means.len(), 4);
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn failing_point_is_isolated() {
        let dir = tmp("fail");
        // q = 4 has no strongly disordered floor.
        let plan = ExperimentPlan::parse(&PLAN.replace("q = 16, 64", "q = 4, 16")).unwrap();
        let r = run_experiment(&plan, &dir).unwrap();
        assert_eq!(r.failures.len(), 4);
        assert!(r.rows > 0);
        assert!(dir.join(FAILURES_FILE).exists());
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn exceedance_table() {
        let mk = |w: f64| ResultRow {
            n: 4,
            l: 3,
            q: 64,
            beta: 1.0,
            seed: 1,
            sweep: 0,
            observable: "weight".into(),
            value: w,
        };
        let rows: Vec<ResultRow> = [0.0, 0.0, 4.0, 8.0].into_iter().map(mk).collect();
        let g = &peierls_scan(&rows, None)[0];
        assert_eq!(g.exceedance.len(), 9);
        assert_eq!(g.exceedance[0], 1.0);
        assert_eq!(g.exceedance[1], 0.5);
        assert_eq!(g.exceedance[8], 0.25);
        assert!(g.non_increasing && g.log_decreasing);
        assert!(g.warning.is_some());
    }

    #[test]
    fn results_schema_is_checked() {
        assert!(parse_results("n,l\n").is_err());
        let ok = format!("{SCHEMA_LINE}\n{RESULTS_HEADER}\n4,3,64,1,1,10,energy,-3\n");
        assert_eq!(parse_results(&ok).unwrap()[0].value, -3.0);
    }
}
