use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use clocklab::defects::{analyze_defects, Member};
use clocklab::experiment::{self, ExperimentPlan};
use clocklab::lattice::{build_boundary, load_snapshot, save_snapshot, LatticeSpec, Spin, SpinConfig};
use clocklab::observables::{analyze_surface, observe};
use clocklab::sampler::{randomize_free, run_chain, ChainParams};
use clocklab::verifier::bounds::{self, BoundCase, BoundParams, SlabCounts};
use clocklab::verifier::toy::run_trials;
use clocklab::verifier::{class_tag, verify_lemmas, LemmaRow, LemmaSummary};

/// Environment variable naming the default output directory.
const OUT_ENV: &str = "CLOCKLAB_OUT";

#[derive(Parser)]
#[command(name = "clocklab", version, about = "Interface rigidity lab for the 3D clock model")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum StartArg {
    Hot,
    Cold,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one Metropolis chain and write its observables.
    Simulate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        l: usize,
        #[arg(long)]
        q: u32,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        sweeps: usize,
        #[arg(long, default_value_t = 0)]
        burn_in: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        thin: usize,
        /// Top boundary value.
        #[arg(long, default_value_t = 0)]
        top: Spin,
        #[arg(long, value_enum, default_value = "hot")]
        start: StartArg,
        #[arg(long)]
        out: PathBuf,
        /// Save a snapshot on every observed sweep divisible by this.
        #[arg(long, requires = "snapshot_dir")]
        snapshot_every: Option<usize>,
        #[arg(long)]
        snapshot_dir: Option<PathBuf>,
    },
    /// Interface geometry of a snapshot.
    Analyze {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// N x N heights, -1 where the height is undefined.
        #[arg(long)]
        heightmap: Option<PathBuf>,
    },
    /// Per-column blobs, defects and pairings of a snapshot.
    Defects {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the counting identity and inequalities on every admissible
    /// reflected column pattern.
    VerifyLemmas {
        /// Largest stack of frustrated-or-pure interior cubes.
        #[arg(long, default_value_t = 2)]
        lmax: usize,
        #[arg(long, default_value_t = 4)]
        n: usize,
        /// Shard `i/k` of the pattern list.
        #[arg(long, default_value = "0/1")]
        shard: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Named partition-function bounds for one boundary case.
    Bounds {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        beta: f64,
        #[arg(long = "case", value_parser = parse_case)]
        case: BoundCase,
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        l: usize,
        #[arg(long, default_value_t = 0)]
        frustrated: usize,
        #[arg(long, default_value_t = 0)]
        disordered: usize,
        #[arg(long, default_value_t = 0)]
        chaotic: usize,
        #[arg(long, default_value_t = 0)]
        free_segments: usize,
        #[arg(long)]
        alpha_prime: Option<f64>,
        /// Also print the smallest q with glued a(q) < 1.
        #[arg(long)]
        threshold: bool,
    },
    /// Exact torus identity on random translation-invariant measures.
    ToyCheck {
        #[arg(long, default_value_t = 4)]
        r: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Run an experiment plan.
    Experiment {
        #[arg(long)]
        plan: PathBuf,
        #[arg(long, env = OUT_ENV)]
        out: PathBuf,
    },
    /// Empirical exceedance of the interface weight from a results file.
    PeierlsScan {
        #[arg(long)]
        results: PathBuf,
        #[arg(long)]
        w_max: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-run the plan stored in an output directory and compare bytes.
    Replay {
        #[arg(long, env = OUT_ENV)]
        dir: PathBuf,
    },
}

fn parse_case(s: &str) -> std::result::Result<BoundCase, String> {
    s.parse().map_err(|e: clocklab::Error| e.to_string())
}

fn parse_shard(s: &str) -> Result<(usize, usize)> {
    let (i, k) = s.split_once('/').context("shard must look like i/k")?;
    let (i, k): (usize, usize) = (i.trim().parse()?, k.trim().parse()?);
    if k == 0 || i >= k {
        bail!("shard {i}/{k}: need 0 <= i < k");
    }
    Ok((i, k))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn simulate(cmd: Cmd) -> Result<ExitCode> {
    let Cmd::Simulate {
        n,
        l,
        q,
        beta,
        sweeps,
        burn_in,
        seed,
        thin,
        top,
        start,
        out,
        snapshot_every,
        snapshot_dir,
    } = cmd
    else {
        unreachable!()
    };
    let spec = LatticeSpec::new(n, l, q)?;
    let mut config = SpinConfig::with_boundary(&build_boundary(&spec, top)?, top)?;
    if matches!(start, StartArg::Hot) {
        randomize_free(&mut config, seed);
    }
    if let Some(d) = &snapshot_dir {
        fs::create_dir_all(d).with_context(|| format!("creating {}", d.display()))?;
    }
    let params = ChainParams {
        beta,
        sweeps,
        burn_in,
        seed,
        thin,
    };
    let mut csv = String::from("sweep,energy,ordered_fraction,rigidity_fraction,n_interface_components,height_mode\n");
    let summary = run_chain(&mut config, &params, true, |sweep, c| {
        let o = observe(c)?;
        let mode = o.height_mode.map_or("-1".to_string(), |h| h.to_string());
        let _ = writeln!(
            csv,
            "{sweep},{},{},{},{},{mode}",
            o.energy, o.ordered_fraction, o.rigidity_fraction, o.interface_components
        );
        if let (Some(k), Some(d)) = (snapshot_every, &snapshot_dir) {
            if k > 0 && sweep % k == 0 {
                save_snapshot(c, &d.join(format!("sweep-{sweep:08}.txt")))?;
            }
        }
        Ok(())
    })?;
    write(&out, &csv)?;
    println!(
        "samples = {}\nacceptance_rate = {}\nfinal_energy = {}",
        summary.samples,
        summary.acceptance_rate(),
        summary.final_energy
    );
    Ok(ExitCode::SUCCESS)
}

fn analyze(input: &Path, out: &Path, heightmap: Option<&Path>) -> Result<ExitCode> {
    let config = load_snapshot(input)?;
    let n = config.spec().n();
    let s = analyze_surface(&config)?;
    let d = &s.decomposition;
    let hist = s
        .height_histogram()
        .iter()
        .map(|(z, c)| format!("{z}:{c}"))
        .collect::<Vec<_>>()
        .join(";");
    let winding = s
        .winding
        .iter()
        .map(|&w| (w as u8).to_string())
        .collect::<Vec<_>>()
        .join(";");
    let csv = format!(
        "surface_size,weight,n_ceilings,n_walls,rigidity_fraction,height_histogram,winding\n{},{},{},{},{},{hist},{winding}\n",
        s.interface.surface.len(),
        s.weight,
        d.ceilings.len(),
        d.walls.len(),
        d.rigidity_fraction(n),
    );
    write(out, &csv)?;
    if let Some(path) = heightmap {
        let mut text = String::new();
        for y in 0..n {
            let row: Vec<String> = (0..n)
                .map(|x| d.heights[y * n + x].map_or("-1".to_string(), |h| h.to_string()))
                .collect();
            text.push_str(&row.join(" "));
            text.push('\n');
        }
        write(path, &text)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn defects(input: &Path, out: &Path) -> Result<ExitCode> {
    let config = load_snapshot(input)?;
    let interface = clocklab::interface::extract_interface(&config)?;
    let a = analyze_defects(&config, &interface)?;
    let mut cols = a.columns;
    cols.sort_by_key(|c| (c.y, c.x));
    let mut csv = String::from("x,y,blob_count,blob_types,defect_count,classes,signs,pairing,problematic_pairs\n");
    for c in &cols {
        let classes: Vec<&str> = c.defects.iter().map(|d| class_tag(d.class)).collect();
        let signs: Vec<String> = c.defects.iter().map(|d| d.sign.to_string()).collect();
        let pairing = match &c.pairing {
            None => "rejected".to_string(),
            Some(p) => {
                let idx = |m: Member| c.resolve(m);
                let mut parts: Vec<String> = p.pairs.iter().map(|&(a, b)| format!("{}-{}", idx(a), idx(b))).collect();
                if let Some(u) = p.unpaired {
                    parts.push(format!("{}", c.resolve(Member::Signed(u))));
                }
                parts.join(";")
            }
        };
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{}",
            c.x,
            c.y,
            c.blobs.len(),
            c.blob_types(),
            c.defects.len(),
            classes.join(";"),
            signs.join(";"),
            pairing,
            c.problematic_pairs
        );
    }
    write(out, &csv)?;
    println!(
        "columns = {}\nflagged_assignments = {}",
        cols.len(),
        a.flagged_assignments
    );
    Ok(ExitCode::SUCCESS)
}

fn verify(lmax: usize, n: usize, shard: &str, out: Option<&Path>) -> Result<ExitCode> {
    let shard = parse_shard(shard)?;
    let rows = verify_lemmas(lmax, n, shard, true)?;
    if let Some(path) = out {
        let mut csv = String::from(LemmaRow::CSV_HEADER);
        csv.push('\n');
        for r in &rows {
            csv.push_str(&r.csv_line());
            csv.push('\n');
        }
        write(path, &csv)?;
    }
    let s = LemmaSummary::from_rows(&rows);
    println!("patterns = {}", s.patterns);
    println!("identity_failures = {}", s.identity_failures);
    for (class, count) in &s.by_class {
        println!("class.{class} = {count}");
    }
    for (name, (applied, violated)) in &s.checks {
        println!("check.{name} = {applied} applied, {violated} violated");
    }
    Ok(if s.identity_failures == 0 && s.violations() == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn bounds_cmd(
    q: u64,
    beta: f64,
    case: BoundCase,
    counts: SlabCounts,
    alpha_prime: Option<f64>,
    threshold: bool,
) -> Result<ExitCode> {
    let mut p = BoundParams::new(q, beta)?;
    if let Some(a) = alpha_prime {
        p.alpha_prime = a;
        p.validate()?;
    }
    for b in bounds::evaluate_bounds(case, &p, &counts)? {
        println!("{} = {}", b.name, b.value);
    }
    if threshold {
        println!("glued_a_threshold_q = {}", bounds::glued_threshold());
    }
    Ok(ExitCode::SUCCESS)
}

fn toy(r: usize, trials: usize, seed: u64) -> Result<ExitCode> {
    let s = run_trials(r, trials, seed)?;
    println!(
        "r = {r}\ntrials = {}\nexact = {}\nperiodic_sets = {}",
        s.trials, s.exact, s.periodic_sets
    );
    Ok(if s.exact == s.trials {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn experiment_cmd(plan: &Path, out: &Path) -> Result<ExitCode> {
    let plan = ExperimentPlan::load(plan)?;
    let r = experiment::run_experiment(&plan, out)?;
    println!(
        "points = {}\nrows = {}\nresults = {}",
        r.points,
        r.rows,
        r.results_path.display()
    );
    for (k, e) in &r.failures {
        eprintln!("failed {k}: {e}");
    }
    Ok(if r.failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn peierls(results: &Path, w_max: Option<usize>, out: Option<&Path>) -> Result<ExitCode> {
    let rows = experiment::read_results(results)?;
    let groups = experiment::peierls_scan(&rows, w_max);
    let mut csv = String::from("n,l,q,beta,samples,w,exceedance\n");
    for g in &groups {
        let k = g.key;
        let slope = g.slope.map_or("none".to_string(), |s| s.to_string());
        println!(
            "n={} l={} q={} beta={} samples={} slope={slope} ln_a={} non_increasing={} log_decreasing={}",
            k.n, k.l, k.q, k.beta, g.samples, g.ln_a, g.non_increasing, g.log_decreasing
        );
        if let Some(w) = &g.warning {
            eprintln!("warning: n={} l={} q={} beta={}: {w}", k.n, k.l, k.q, k.beta);
        }
        for (w, p) in g.exceedance.iter().enumerate() {
            let _ = writeln!(csv, "{},{},{},{},{},{w},{p}", k.n, k.l, k.q, k.beta, g.samples);
        }
    }
    if let Some(path) = out {
        write(path, &csv)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn replay_cmd(dir: &Path) -> Result<ExitCode> {
    let r = experiment::replay(dir)?;
    if r.identical() {
        println!("replay identical ({})", r.replay_dir.display());
        Ok(ExitCode::SUCCESS)
    } else {
        for f in &r.differing {
            eprintln!("differs: {f}");
        }
        Ok(ExitCode::FAILURE)
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match cli.cmd {
        c @ Cmd::Simulate { .. } => simulate(c),
        Cmd::Analyze { input, out, heightmap } => analyze(&input, &out, heightmap.as_deref()),
        Cmd::Defects { input, out } => defects(&input, &out),
        Cmd::VerifyLemmas { lmax, n, shard, out } => verify(lmax, n, &shard, out.as_deref()),
        Cmd::Bounds {
            q,
            beta,
            case,
            n,
            l,
            frustrated,
            disordered,
            chaotic,
            free_segments,
            alpha_prime,
            threshold,
        } => {
            let counts = SlabCounts {
                n,
                l,
                frustrated,
                disordered,
                chaotic,
                free_segments,
            };
            bounds_cmd(q, beta, case, counts, alpha_prime, threshold)
        }
        Cmd::ToyCheck { r, trials, seed } => toy(r, trials, seed),
        Cmd::Experiment { plan, out } => experiment_cmd(&plan, &out),
        Cmd::PeierlsScan { results, w_max, out } => peierls(&results, w_max, out.as_deref()),
        Cmd::Replay { dir } => replay_cmd(&dir),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
