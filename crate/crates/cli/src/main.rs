//! `commsync` command line: network generation, exact and baseline
//! solving, threshold tables, and seeded Monte Carlo experiments.
//!
//! Every randomized subcommand requires `--seed`; identical invocations
//! produce identical outputs.

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use commsync::baseline;
use commsync::experiments::{
    self, parse_grid, ExperimentConfig, RateSpec, RunManifest, Solver, Topology,
};
use commsync::group::FiniteGroup;
use commsync::metrics;
use commsync::mle;
use commsync::model::{canonical_truth, generate_network, Hypothesis, ModelParams, ObservedNetwork};
use commsync::theory::{self, ThresholdReport};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Parser)]
#[command(name = "commsync", version, about = "Joint community detection and group synchronization toolkit")]
struct Cli {
    /// Worker threads for parallel subcommands (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct RateArgs {
    /// In-cluster rate, p = a log(n)/n.
    #[arg(long, conflicts_with_all = ["p", "q"])]
    a: Option<f64>,
    /// Cross-cluster rate, q = b log(n)/n.
    #[arg(long, conflicts_with_all = ["p", "q"], requires = "a")]
    b: Option<f64>,
    /// In-cluster edge probability (direct form).
    #[arg(long)]
    p: Option<f64>,
    /// Cross-cluster edge probability (direct form).
    #[arg(long, requires = "p")]
    q: Option<f64>,
}

impl RateArgs {
    fn to_spec(&self) -> Result<RateSpec, CliError> {
        match (self.a, self.b, self.p, self.q) {
            (Some(a), Some(b), None, None) => Ok(RateSpec::LogScale { a, b }),
            (None, None, Some(p), Some(q)) => Ok(RateSpec::Direct { p, q }),
            _ => Err(CliError::Usage(
                "provide rates as --a/--b (log scale) or --p/--q (direct)".into(),
            )),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum SolverArg {
    Mle,
    Baseline,
    Both,
}

impl From<SolverArg> for Solver {
    fn from(s: SolverArg) -> Solver {
        match s {
            SolverArg::Mle => Solver::Mle,
            SolverArg::Baseline => Solver::Baseline,
            SolverArg::Both => Solver::Both,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Sample one network from the model and write it out.
    Generate {
        #[arg(long)]
        n: usize,
        /// Group order (cyclic group unless --group-table is given).
        #[arg(long = "M", default_value_t = 1)]
        m: usize,
        #[command(flatten)]
        rates: RateArgs,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
        /// Use identity group elements for the truth instead of uniform draws.
        #[arg(long)]
        identity: bool,
        /// Also write the ground truth (labels and elements) as JSON.
        #[arg(long)]
        truth_out: Option<PathBuf>,
        /// JSON file with explicit group tables.
        #[arg(long)]
        group_table: Option<PathBuf>,
    },
    /// Solve a stored network with the exact solver and/or the baseline.
    Solve {
        /// Network file (.json, or .csv with --n/--M supplied).
        #[arg(long = "in")]
        input: PathBuf,
        /// Network size; required for CSV input.
        #[arg(long)]
        n: Option<usize>,
        /// Group order; required for CSV input.
        #[arg(long = "M")]
        m: Option<usize>,
        #[command(flatten)]
        rates: RateArgs,
        #[arg(long, value_enum, default_value_t = SolverArg::Mle)]
        solver: SolverArg,
        /// Required when the baseline solver runs.
        #[arg(long)]
        seed: Option<u64>,
        /// Enumeration cap for the exact solver.
        #[arg(long, default_value_t = mle::DEFAULT_SOLVE_CAP)]
        cap: usize,
        /// Ground-truth JSON for distance reporting.
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        group_table: Option<PathBuf>,
    },
    /// Threshold table over an (a, b) grid.
    Theory {
        #[arg(long = "M", conflicts_with = "m_infinity")]
        m: Option<usize>,
        /// Use the large-order limiting threshold (a + b)/2 instead of a
        /// finite order.
        #[arg(long)]
        m_infinity: bool,
        #[arg(long)]
        a_grid: String,
        #[arg(long)]
        b_grid: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Monte Carlo success-rate estimation at one parameter point.
    Experiment {
        #[arg(long)]
        n: usize,
        #[arg(long = "M", default_value_t = 1)]
        m: usize,
        #[command(flatten)]
        rates: RateArgs,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = SolverArg::Mle)]
        solver: SolverArg,
        /// Trials CSV path (suffixed per solver when --solver both).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long, default_value_t = mle::DEFAULT_SOLVE_CAP)]
        cap: usize,
        #[arg(long)]
        group_table: Option<PathBuf>,
    },
    /// Phase diagram over an (a, b) grid with common random numbers.
    Phase {
        #[arg(long)]
        n: usize,
        #[arg(long = "M", default_value_t = 1)]
        m: usize,
        #[arg(long)]
        a_grid: String,
        #[arg(long)]
        b_grid: String,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = SolverArg::Mle)]
        solver: SolverArg,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long, default_value_t = mle::DEFAULT_SOLVE_CAP)]
        cap: usize,
    },
    /// Largest-component statistics of G(n, a log n / n).
    Giant {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Empirical connectivity probability of G(n, a log n / n).
    Connectivity {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Feasibility rate of uniform labels on a fixed shape vs. M^-cycles.
    Cycles {
        #[arg(long = "M", default_value_t = 2)]
        m: usize,
        /// Preset (tree, triangle, theta) or a JSON file {nodes, edges}.
        #[arg(long)]
        topology: String,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        group_table: Option<PathBuf>,
    },
}

enum CliError {
    Usage(String),
    Runtime(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Runtime(e.into())
    }
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            2
        }
        Err(CliError::Runtime(err)) => {
            eprintln!("error: {err:#}");
            1
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<(), CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.workers)
        .build()
        .map_err(|e| CliError::Runtime(anyhow!("thread pool: {e}")))?;
    let command = cli.command;
    pool.install(|| dispatch(command))
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Generate { n, m, rates, seed, out, format, identity, truth_out, group_table } => {
            generate_cmd(n, m, rates, seed, out, format, identity, truth_out, group_table)
        }
        Command::Solve { input, n, m, rates, solver, seed, cap, truth, out, group_table } => {
            solve_cmd(input, n, m, rates, solver, seed, cap, truth, out, group_table)
        }
        Command::Theory { m, m_infinity, a_grid, b_grid, out } => {
            theory_cmd(m, m_infinity, &a_grid, &b_grid, out)
        }
        Command::Experiment { n, m, rates, trials, seed, solver, out, manifest, cap, group_table } => {
            experiment_cmd(n, m, rates, trials, seed, solver, out, manifest, cap, group_table)
        }
        Command::Phase { n, m, a_grid, b_grid, trials, seed, solver, out, manifest, cap } => {
            phase_cmd(n, m, &a_grid, &b_grid, trials, seed, solver, out, manifest, cap)
        }
        Command::Giant { n, a, trials, seed, out } => giant_cmd(n, a, trials, seed, out),
        Command::Connectivity { n, a, trials, seed, out } => {
            connectivity_cmd(n, a, trials, seed, out)
        }
        Command::Cycles { m, topology, trials, seed, out, group_table } => {
            cycles_cmd(m, &topology, trials, seed, out, group_table)
        }
    }
}

fn check_out_parent(path: &Path) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() && !parent.exists() {
            return Err(CliError::Usage(format!(
                "output directory {} does not exist",
                parent.display()
            )));
        }
    }
    Ok(())
}

fn load_group(order: usize, table: &Option<PathBuf>) -> Result<FiniteGroup, CliError> {
    match table {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading group table {}", path.display()))?;
            let group: FiniteGroup = serde_json::from_str(&text)
                .with_context(|| format!("parsing group table {}", path.display()))?;
            Ok(group)
        }
        None => Ok(FiniteGroup::cyclic(order).map_err(anyhow::Error::from)?),
    }
}

fn strict_params(n: usize, group: &FiniteGroup, spec: RateSpec) -> Result<ModelParams, CliError> {
    let params = match spec {
        RateSpec::LogScale { a, b } => ModelParams::from_rates(n, group.order(), a, b),
        RateSpec::Direct { p, q } => ModelParams::from_probs(n, group.order(), p, q),
    }
    .map_err(|e| CliError::Usage(e.to_string()))?;
    if params.saturated() {
        return Err(CliError::Usage(format!(
            "rates give p = {} and q = {}; a probability exceeds 1 at n = {n}",
            params.p(),
            params.q()
        )));
    }
    Ok(params)
}

fn write_output(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn generate_cmd(
    n: usize,
    m: usize,
    rates: RateArgs,
    seed: u64,
    out: PathBuf,
    format: OutputFormat,
    identity: bool,
    truth_out: Option<PathBuf>,
    group_table: Option<PathBuf>,
) -> Result<(), CliError> {
    check_out_parent(&out)?;
    if let Some(t) = &truth_out {
        check_out_parent(t)?;
    }
    let group = load_group(m, &group_table)?;
    let params = strict_params(n, &group, rates.to_spec()?)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let truth = canonical_truth(&params, &group, &mut rng, identity).map_err(anyhow::Error::from)?;
    let network =
        generate_network(&params, &group, &truth, &mut rng).map_err(anyhow::Error::from)?;
    match format {
        OutputFormat::Json => write_output(&out, network.to_json_string().as_bytes())?,
        OutputFormat::Csv => {
            let mut buf = Vec::new();
            network.to_csv(&mut buf).map_err(anyhow::Error::from)?;
            write_output(&out, &buf)?;
        }
    }
    if let Some(truth_path) = truth_out {
        let text = serde_json::to_string(&truth).map_err(anyhow::Error::from)?;
        write_output(&truth_path, text.as_bytes())?;
    }
    println!(
        "generated network: n={}, M={}, edges={}, written to {}",
        network.n(),
        group.order(),
        network.edges().len(),
        out.display()
    );
    Ok(())
}

fn load_network(
    input: &Path,
    n: Option<usize>,
    m: Option<usize>,
    group_table: &Option<PathBuf>,
) -> Result<ObservedNetwork, CliError> {
    let is_csv = input.extension().map(|e| e == "csv").unwrap_or(false);
    if is_csv {
        let (n, m) = match (n, m) {
            (Some(n), Some(m)) => (n, m),
            _ => {
                return Err(CliError::Usage(
                    "CSV network input requires --n and --M".into(),
                ))
            }
        };
        let group = load_group(m, group_table)?;
        let file = fs::File::open(input).with_context(|| format!("opening {}", input.display()))?;
        Ok(ObservedNetwork::from_csv(BufReader::new(file), n, group)
            .map_err(anyhow::Error::from)?)
    } else {
        let text = fs::read_to_string(input)
            .with_context(|| format!("reading {}", input.display()))?;
        let group = match group_table {
            Some(_) => Some(load_group(0, group_table)?),
            None => None,
        };
        Ok(ObservedNetwork::from_json_str(&text, group).map_err(anyhow::Error::from)?)
    }
}

fn load_truth(path: &Path, network: &ObservedNetwork) -> Result<Hypothesis, CliError> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let truth: Hypothesis = serde_json::from_str(&text)
        .with_context(|| format!("parsing truth {}", path.display()))?;
    if truth.n() != network.n() || truth.g.len() != network.n() {
        return Err(CliError::Runtime(anyhow!(
            "truth length {} does not match network size {}",
            truth.n(),
            network.n()
        )));
    }
    if truth.g.iter().any(|g| g.index() >= network.group().order()) {
        return Err(CliError::Runtime(anyhow!("truth contains out-of-range group elements")));
    }
    Ok(truth)
}

#[derive(Serialize)]
struct BaselineSummary {
    dist_c: Option<u8>,
    dist_g: Option<usize>,
    spectral_gap: f64,
    power_converged: bool,
    sync_fallback: bool,
    wall_time_ms: u64,
}

#[allow(clippy::too_many_arguments)]
fn solve_cmd(
    input: PathBuf,
    n: Option<usize>,
    m: Option<usize>,
    rates: RateArgs,
    solver: SolverArg,
    seed: Option<u64>,
    cap: usize,
    truth: Option<PathBuf>,
    out: Option<PathBuf>,
    group_table: Option<PathBuf>,
) -> Result<(), CliError> {
    if let Some(o) = &out {
        check_out_parent(o)?;
    }
    let network = load_network(&input, n, m, &group_table)?;
    let params = strict_params(network.n(), network.group(), rates.to_spec()?)?;
    let truth = match &truth {
        Some(path) => Some(load_truth(path, &network)?),
        None => None,
    };

    let mut report = serde_json::Map::new();
    let solver: Solver = solver.into();
    for kind in solver.kinds() {
        match kind {
            experiments::SolverKind::Mle => {
                let start = Instant::now();
                let result =
                    mle::solve_exact(&network, &params, Some(cap)).map_err(anyhow::Error::from)?;
                let wall = start.elapsed().as_millis() as u64;
                let distances = match &truth {
                    Some(t) => {
                        let eval = mle::evaluate_against_truth(&network, &result, t)
                            .map_err(anyhow::Error::from)?;
                        Some((eval.dist_c, eval.dist_g))
                    }
                    None => None,
                };
                let summary = mle::SolveSummary::new(&result, distances, wall);
                report.insert("mle".into(), serde_json::to_value(&summary).map_err(anyhow::Error::from)?);
            }
            experiments::SolverKind::Baseline => {
                let seed = seed.ok_or_else(|| {
                    CliError::Usage("--seed is required when the baseline solver runs".into())
                })?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let start = Instant::now();
                let split =
                    baseline::spectral_bisection(&network, &mut rng).map_err(anyhow::Error::from)?;
                let (g, sync_fallback) = baseline::synchronize_or_fallback(&network, &split.kappa)
                    .map_err(anyhow::Error::from)?;
                let wall = start.elapsed().as_millis() as u64;
                let (dist_c, dist_g) = match &truth {
                    Some(t) => (
                        Some(metrics::dist_c(&split.kappa, &t.kappa).map_err(anyhow::Error::from)?),
                        Some(
                            metrics::dist_g(network.group(), &g, &t.g, &t.kappa)
                                .map_err(anyhow::Error::from)?,
                        ),
                    ),
                    None => (None, None),
                };
                let summary = BaselineSummary {
                    dist_c,
                    dist_g,
                    spectral_gap: split.spectral_gap,
                    power_converged: split.converged,
                    sync_fallback,
                    wall_time_ms: wall,
                };
                report.insert(
                    "baseline".into(),
                    serde_json::to_value(&summary).map_err(anyhow::Error::from)?,
                );
            }
        }
    }
    let text = serde_json::to_string_pretty(&serde_json::Value::Object(report))
        .map_err(anyhow::Error::from)?;
    println!("{text}");
    if let Some(path) = out {
        write_output(&path, text.as_bytes())?;
    }
    Ok(())
}

fn fmt_opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

fn theory_cmd(
    m: Option<usize>,
    m_infinity: bool,
    a_grid: &str,
    b_grid: &str,
    out: PathBuf,
) -> Result<(), CliError> {
    check_out_parent(&out)?;
    if m.is_none() && !m_infinity {
        return Err(CliError::Usage("provide --M or --m-infinity".into()));
    }
    let a_values = parse_grid(a_grid).map_err(|e| CliError::Usage(e.to_string()))?;
    let b_values = parse_grid(b_grid).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut buf = String::new();
    buf.push_str("a,b,M,cluster_lhs,region,sbm_lhs,sdp_lhs,gpm_ok,spectral_lhs\n");
    for &a in &a_values {
        for &b in &b_values {
            let row = if m_infinity {
                let cluster_lhs =
                    theory::infinite_order_cluster_lhs(a, b).map_err(anyhow::Error::from)?;
                let region = match (cluster_lhs > 1.0, a / 2.0 > 1.0) {
                    (true, true) => theory::Region::Both,
                    (true, false) => theory::Region::ClusterOnly,
                    (false, _) => theory::Region::Impossible,
                };
                let columns = competitor_columns(a, b)?;
                format_theory_row("inf", a, b, cluster_lhs, region, &columns)
            } else {
                let m = m.expect("checked above");
                let report = ThresholdReport::compute(a, b, m).map_err(anyhow::Error::from)?;
                format_theory_row(
                    &m.to_string(),
                    a,
                    b,
                    report.cluster_lhs,
                    report.region,
                    &(report.sbm_lhs, report.sdp_lhs, report.gpm_ok, report.spectral_lhs),
                )
            };
            buf.push_str(&row);
        }
    }
    write_output(&out, buf.as_bytes())?;
    println!("theory table: {} rows written to {}", a_values.len() * b_values.len(), out.display());
    Ok(())
}

type CompetitorColumns = (f64, Option<f64>, Option<bool>, Option<f64>);

fn competitor_columns(a: f64, b: f64) -> Result<CompetitorColumns, CliError> {
    let sbm = theory::sbm_lhs(a, b).map_err(anyhow::Error::from)?;
    if a > 0.0 {
        Ok((
            sbm,
            Some(theory::sdp_threshold_lhs(a, b).map_err(anyhow::Error::from)?),
            Some(theory::gpm_condition(a, b).map_err(anyhow::Error::from)?),
            Some(theory::spectral_condition_lhs(a, b).map_err(anyhow::Error::from)?),
        ))
    } else {
        Ok((sbm, None, None, None))
    }
}

fn format_theory_row(
    m_label: &str,
    a: f64,
    b: f64,
    cluster_lhs: f64,
    region: theory::Region,
    columns: &CompetitorColumns,
) -> String {
    let (sbm, sdp, gpm, spectral) = columns;
    format!(
        "{a},{b},{m_label},{cluster_lhs},{},{sbm},{},{},{}\n",
        region.as_str(),
        fmt_opt(sdp),
        fmt_opt(gpm),
        fmt_opt(spectral),
    )
}

fn solver_suffix(path: &Path, kind: experiments::SolverKind) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let ext = path.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    let name = match kind {
        experiments::SolverKind::Mle => format!("{stem}_mle.{ext}"),
        experiments::SolverKind::Baseline => format!("{stem}_baseline.{ext}"),
    };
    path.with_file_name(name)
}

#[allow(clippy::too_many_arguments)]
fn experiment_cmd(
    n: usize,
    m: usize,
    rates: RateArgs,
    trials: u64,
    seed: u64,
    solver: SolverArg,
    out: Option<PathBuf>,
    manifest: Option<PathBuf>,
    cap: usize,
    group_table: Option<PathBuf>,
) -> Result<(), CliError> {
    if let Some(o) = &out {
        check_out_parent(o)?;
    }
    if let Some(mf) = &manifest {
        check_out_parent(mf)?;
    }
    let group = load_group(m, &group_table)?;
    let spec = rates.to_spec()?;
    strict_params(n, &group, spec)?;
    let config = ExperimentConfig {
        n,
        group_order: group.order(),
        rates: spec,
        trials,
        master_seed: seed,
        solver: solver.into(),
        workers: rayon::current_num_threads(),
        identity_truth: false,
        mle_cap: cap,
    };
    let start = Instant::now();
    let summaries = experiments::estimate_success(&config, &group).map_err(anyhow::Error::from)?;
    let wall = start.elapsed().as_millis() as u64;

    let multi = summaries.len() > 1;
    for summary in &summaries {
        println!(
            "solver={:?} trials={} cluster_rate={:.4} [{:.4}, {:.4}] group_rate={:.4} [{:.4}, {:.4}]",
            summary.solver,
            trials,
            summary.cluster.rate,
            summary.cluster.wilson_low,
            summary.cluster.wilson_high,
            summary.group.rate,
            summary.group.wilson_low,
            summary.group.wilson_high,
        );
        if let Some(base) = &out {
            let path = if multi { solver_suffix(base, summary.solver) } else { base.clone() };
            let mut buf = Vec::new();
            experiments::write_trials_csv(&mut buf, &summary.outcomes)
                .map_err(anyhow::Error::from)?;
            write_output(&path, &buf)?;
        }
    }
    if let Some(path) = manifest {
        let manifest = RunManifest::new(&config, seed, wall, false);
        let text = serde_json::to_string_pretty(&manifest).map_err(anyhow::Error::from)?;
        write_output(&path, text.as_bytes())?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn phase_cmd(
    n: usize,
    m: usize,
    a_grid: &str,
    b_grid: &str,
    trials: u64,
    seed: u64,
    solver: SolverArg,
    out: PathBuf,
    manifest: Option<PathBuf>,
    cap: usize,
) -> Result<(), CliError> {
    check_out_parent(&out)?;
    if let Some(mf) = &manifest {
        check_out_parent(mf)?;
    }
    let a_values = parse_grid(a_grid).map_err(|e| CliError::Usage(e.to_string()))?;
    let b_values = parse_grid(b_grid).map_err(|e| CliError::Usage(e.to_string()))?;
    let group = load_group(m, &None)?;
    let base = ExperimentConfig {
        n,
        group_order: group.order(),
        rates: RateSpec::LogScale { a: 0.0, b: 0.0 },
        trials,
        master_seed: seed,
        solver: solver.into(),
        workers: rayon::current_num_threads(),
        identity_truth: false,
        mle_cap: cap,
    };
    let start = Instant::now();
    let cells =
        experiments::phase_diagram(&a_values, &b_values, &base, &group).map_err(anyhow::Error::from)?;
    let wall = start.elapsed().as_millis() as u64;
    let mut buf = Vec::new();
    experiments::write_phase_csv(&mut buf, &cells).map_err(anyhow::Error::from)?;
    write_output(&out, &buf)?;
    let skipped = cells.iter().filter(|c| c.skipped).count();
    println!(
        "phase diagram: {} cells ({skipped} skipped) written to {}",
        cells.len(),
        out.display()
    );
    if let Some(path) = manifest {
        let manifest = RunManifest::new(&base, seed, wall, true);
        let text = serde_json::to_string_pretty(&manifest).map_err(anyhow::Error::from)?;
        write_output(&path, text.as_bytes())?;
    }
    Ok(())
}

fn giant_cmd(
    n: usize,
    a: f64,
    trials: u64,
    seed: u64,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    if let Some(o) = &out {
        check_out_parent(o)?;
    }
    let stats =
        experiments::giant_component_experiment(n, a, trials, seed).map_err(anyhow::Error::from)?;
    println!(
        "giant component: n={n}, a={a}, trials={trials}, mean Z_n/n={:.4}, min={:.4}, above cutoff={:.4}",
        stats.mean_fraction, stats.min_fraction, stats.fraction_above_cutoff
    );
    if let Some(path) = out {
        let mut buf = Vec::new();
        experiments::write_giant_csv(&mut buf, &stats).map_err(anyhow::Error::from)?;
        write_output(&path, &buf)?;
    }
    Ok(())
}

fn connectivity_cmd(
    n: usize,
    a: f64,
    trials: u64,
    seed: u64,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    if let Some(o) = &out {
        check_out_parent(o)?;
    }
    let stats =
        experiments::connectivity_experiment(n, a, trials, seed).map_err(anyhow::Error::from)?;
    println!(
        "connectivity: n={n}, a={a}, trials={trials}, P(connected)={:.4}",
        stats.rate
    );
    if let Some(path) = out {
        let text = serde_json::to_string_pretty(&stats).map_err(anyhow::Error::from)?;
        write_output(&path, text.as_bytes())?;
    }
    Ok(())
}

fn cycles_cmd(
    m: usize,
    topology: &str,
    trials: u64,
    seed: u64,
    out: Option<PathBuf>,
    group_table: Option<PathBuf>,
) -> Result<(), CliError> {
    if let Some(o) = &out {
        check_out_parent(o)?;
    }
    let group = load_group(m, &group_table)?;
    let shape = match topology {
        "tree" => Topology::path(6),
        "triangle" => Topology::triangle(),
        "theta" => Topology::theta(),
        path => {
            let file = Path::new(path);
            if !file.exists() {
                return Err(CliError::Usage(format!(
                    "unknown topology '{path}' (presets: tree, triangle, theta, or a JSON file)"
                )));
            }
            let text = fs::read_to_string(file)
                .with_context(|| format!("reading topology {path}"))?;
            serde_json::from_str(&text).with_context(|| format!("parsing topology {path}"))?
        }
    };
    let stats = experiments::cycle_probability_experiment(&group, &shape, trials, seed)
        .map_err(anyhow::Error::from)?;
    println!(
        "cycles: M={}, independent cycles={}, rate={:.5}, predicted={:.5}",
        group.order(),
        stats.independent_cycles,
        stats.rate,
        stats.predicted_rate
    );
    if let Some(path) = out {
        let text = serde_json::to_string_pretty(&stats).map_err(anyhow::Error::from)?;
        write_output(&path, text.as_bytes())?;
    }
    Ok(())
}
