//! Seeded, parallel Monte Carlo harness.
//!
//! Every trial draws its randomness from a dedicated stream of a
//! counter-based generator keyed by `(master_seed, trial_index)`, so
//! results are byte-identical across runs and across worker counts.
//! Outputs are sorted by trial index before serialization.

use crate::baseline;
use crate::consistency;
use crate::error::{Error, Result};
use crate::group::FiniteGroup;
use crate::mle;
use crate::model::{canonical_truth, generate_network, ModelParams};
use crate::theory;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;
use std::time::Instant;

/// Which solver(s) a trial runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Mle,
    Baseline,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Mle,
    Baseline,
}

impl Solver {
    pub fn kinds(self) -> Vec<SolverKind> {
        match self {
            Solver::Mle => vec![SolverKind::Mle],
            Solver::Baseline => vec![SolverKind::Baseline],
            Solver::Both => vec![SolverKind::Mle, SolverKind::Baseline],
        }
    }
}

/// Rates in log-scale or direct form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum RateSpec {
    LogScale { a: f64, b: f64 },
    Direct { p: f64, q: f64 },
}

/// A full experiment description; everything needed to reproduce a run.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub n: usize,
    pub group_order: usize,
    pub rates: RateSpec,
    pub trials: u64,
    pub master_seed: u64,
    pub solver: Solver,
    /// Worker count is a performance knob only; results do not depend on it.
    pub workers: usize,
    pub identity_truth: bool,
    pub mle_cap: usize,
}

impl ExperimentConfig {
    pub fn params(&self) -> Result<ModelParams> {
        match self.rates {
            RateSpec::LogScale { a, b } => ModelParams::from_rates(self.n, self.group_order, a, b),
            RateSpec::Direct { p, q } => ModelParams::from_probs(self.n, self.group_order, p, q),
        }
    }
}

/// Per-trial, per-solver recovery record. A tie among optima counts as a
/// cluster failure, and group success additionally requires cluster
/// success, so `group_success` implies `cluster_success` on every record.
#[derive(Debug, Clone, Serialize)]
pub struct TrialOutcome {
    pub trial_index: u64,
    pub solver: SolverKind,
    pub dist_c: u8,
    pub dist_g: usize,
    pub cluster_success: bool,
    pub group_success: bool,
    pub num_optima: u64,
    pub truth_clusters_connected: (bool, bool),
    pub wall_time_ms: u64,
}

/// The dedicated RNG stream for one trial.
pub fn trial_rng(master_seed: u64, trial_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial_index);
    rng
}

/// Runs one trial: sample truth and network from the trial stream, run the
/// configured solver(s), record distances, success flags, and whether each
/// truth cluster's subgraph is connected.
pub fn run_trial(
    config: &ExperimentConfig,
    group: &FiniteGroup,
    trial_index: u64,
) -> Result<Vec<TrialOutcome>> {
    let params = config.params()?;
    let mut rng = trial_rng(config.master_seed, trial_index);
    let truth = canonical_truth(&params, group, &mut rng, config.identity_truth)?;
    let network = generate_network(&params, group, &truth, &mut rng)?;

    let half: Vec<usize> = (0..config.n / 2).collect();
    let other: Vec<usize> = (config.n / 2..config.n).collect();
    let conn1 = consistency::connected_components(&network, &half)?.len() == 1;
    let conn2 = consistency::connected_components(&network, &other)?.len() == 1;

    let mut outcomes = Vec::new();
    for kind in config.solver.kinds() {
        let start = Instant::now();
        let outcome = match kind {
            SolverKind::Mle => {
                let result = mle::solve_exact(&network, &params, Some(config.mle_cap))?;
                let eval = mle::evaluate_against_truth(&network, &result, &truth)?;
                TrialOutcome {
                    trial_index,
                    solver: kind,
                    dist_c: eval.dist_c,
                    dist_g: eval.dist_g,
                    cluster_success: eval.cluster_success,
                    group_success: eval.group_success,
                    num_optima: result.num_optima(),
                    truth_clusters_connected: (conn1, conn2),
                    wall_time_ms: start.elapsed().as_millis() as u64,
                }
            }
            SolverKind::Baseline => {
                let result = baseline::two_stage_recover(&network, &truth, &mut rng)?;
                let cluster_success = result.dist_c == 0;
                let group_success = cluster_success && result.dist_g == 0;
                TrialOutcome {
                    trial_index,
                    solver: kind,
                    dist_c: result.dist_c,
                    dist_g: result.dist_g,
                    cluster_success,
                    group_success,
                    num_optima: 1,
                    truth_clusters_connected: (conn1, conn2),
                    wall_time_ms: start.elapsed().as_millis() as u64,
                }
            }
        };
        outcomes.push(outcome);
    }
    Ok(outcomes)
}

/// Success count with its Wilson score interval at z = 1.96.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SuccessEstimate {
    pub successes: u64,
    pub trials: u64,
    pub rate: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
}

/// Wilson score interval; well-behaved at empirical rates of 0 and 1.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    assert!(trials > 0, "interval requires at least one trial");
    let z = 1.96f64;
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (phat + z2 / (2.0 * n)) / denom;
    let half = z * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

impl SuccessEstimate {
    pub fn from_counts(successes: u64, trials: u64) -> Self {
        let (wilson_low, wilson_high) = wilson_interval(successes, trials);
        SuccessEstimate {
            successes,
            trials,
            rate: successes as f64 / trials as f64,
            wilson_low,
            wilson_high,
        }
    }
}

/// Aggregated results for one solver over all trials of a config.
#[derive(Debug, Clone, Serialize)]
pub struct SolverSummary {
    pub solver: SolverKind,
    pub cluster: SuccessEstimate,
    pub group: SuccessEstimate,
    pub outcomes: Vec<TrialOutcome>,
}

/// Runs every trial (in parallel) and aggregates success rates per solver.
pub fn estimate_success(config: &ExperimentConfig, group: &FiniteGroup) -> Result<Vec<SolverSummary>> {
    if config.trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let per_trial: Vec<Vec<TrialOutcome>> = (0..config.trials)
        .into_par_iter()
        .map(|t| run_trial(config, group, t))
        .collect::<Result<_>>()?;

    let mut summaries = Vec::new();
    for (slot, kind) in config.solver.kinds().into_iter().enumerate() {
        let outcomes: Vec<TrialOutcome> =
            per_trial.iter().map(|v| v[slot].clone()).collect();
        let cluster = outcomes.iter().filter(|o| o.cluster_success).count() as u64;
        let group_ok = outcomes.iter().filter(|o| o.group_success).count() as u64;
        summaries.push(SolverSummary {
            solver: kind,
            cluster: SuccessEstimate::from_counts(cluster, config.trials),
            group: SuccessEstimate::from_counts(group_ok, config.trials),
            outcomes,
        });
    }
    Ok(summaries)
}

/// One phase-diagram grid point. Cells whose log-scale rates push a
/// probability above 1 are skipped with a marker instead of clamping.
#[derive(Debug, Clone, Serialize)]
pub struct PhaseDiagramCell {
    pub a: f64,
    pub b: f64,
    pub n: usize,
    pub group_order: usize,
    pub trials: u64,
    pub cluster: Option<SuccessEstimate>,
    pub group: Option<SuccessEstimate>,
    pub region: Option<theory::Region>,
    pub skipped: bool,
}

/// Sweeps the `(a, b)` grid with common random numbers: every cell reuses
/// the same master seed, hence the same per-trial streams, which smooths
/// the diagram.
pub fn phase_diagram(
    a_grid: &[f64],
    b_grid: &[f64],
    base: &ExperimentConfig,
    group: &FiniteGroup,
) -> Result<Vec<PhaseDiagramCell>> {
    if a_grid.is_empty() || b_grid.is_empty() {
        return Err(Error::InvalidParameter("phase grids must be non-empty".into()));
    }
    let mut cells = Vec::with_capacity(a_grid.len() * b_grid.len());
    for &a in a_grid {
        for &b in b_grid {
            let config = ExperimentConfig {
                rates: RateSpec::LogScale { a, b },
                ..base.clone()
            };
            let params = config.params()?;
            if params.saturated() {
                cells.push(PhaseDiagramCell {
                    a,
                    b,
                    n: config.n,
                    group_order: config.group_order,
                    trials: config.trials,
                    cluster: None,
                    group: None,
                    region: None,
                    skipped: true,
                });
                continue;
            }
            let summaries = estimate_success(&config, group)?;
            let lead = &summaries[0];
            cells.push(PhaseDiagramCell {
                a,
                b,
                n: config.n,
                group_order: config.group_order,
                trials: config.trials,
                cluster: Some(lead.cluster),
                group: Some(lead.group),
                region: Some(theory::classify_region(a, b, config.group_order)?),
                skipped: false,
            });
        }
    }
    Ok(cells)
}

/// Empirical connectivity probability of `G(n, a log n / n)`.
#[derive(Debug, Clone, Serialize)]
pub struct ConnectivityStats {
    pub n: usize,
    pub a: f64,
    pub trials: u64,
    pub connected: u64,
    pub rate: f64,
}

pub fn connectivity_experiment(
    n: usize,
    a: f64,
    trials: u64,
    master_seed: u64,
) -> Result<ConnectivityStats> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n = {n} must be at least 2")));
    }
    if a < 0.0 || !a.is_finite() {
        return Err(Error::InvalidParameter(format!("a = {a} must be non-negative")));
    }
    let p = (a * (n as f64).ln() / n as f64).min(1.0);
    let connected_flags: Vec<bool> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(master_seed, t);
            let graph = consistency::sample_er_graph(n, p, &mut rng)?;
            Ok(consistency::giant_component_size(&graph) == n)
        })
        .collect::<Result<_>>()?;
    let connected = connected_flags.iter().filter(|&&c| c).count() as u64;
    Ok(ConnectivityStats { n, a, trials, connected, rate: connected as f64 / trials as f64 })
}

/// Largest-component statistics of `G(n, a log n / n)` across trials.
#[derive(Debug, Clone, Serialize)]
pub struct GiantComponentStats {
    pub n: usize,
    pub a: f64,
    pub sizes: Vec<usize>,
    pub mean_fraction: f64,
    pub min_fraction: f64,
    /// Fraction of trials with `Z_n/n > 1 - 1/log(log n)`.
    pub fraction_above_cutoff: f64,
}

pub fn giant_component_experiment(
    n: usize,
    a: f64,
    trials: u64,
    master_seed: u64,
) -> Result<GiantComponentStats> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n = {n} must be at least 2")));
    }
    if a <= 0.0 || !a.is_finite() {
        return Err(Error::InvalidParameter(format!("a = {a} must be positive")));
    }
    let p = (a * (n as f64).ln() / n as f64).min(1.0);
    let sizes: Vec<usize> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(master_seed, t);
            let graph = consistency::sample_er_graph(n, p, &mut rng)?;
            Ok(consistency::giant_component_size(&graph))
        })
        .collect::<Result<_>>()?;
    let fractions: Vec<f64> = sizes.iter().map(|&z| z as f64 / n as f64).collect();
    let mean_fraction = fractions.iter().sum::<f64>() / fractions.len() as f64;
    let min_fraction = fractions.iter().cloned().fold(f64::INFINITY, f64::min);
    let cutoff = 1.0 - 1.0 / (n as f64).ln().ln();
    let above = fractions.iter().filter(|&&f| f > cutoff).count();
    Ok(GiantComponentStats {
        n,
        a,
        sizes,
        mean_fraction,
        min_fraction,
        fraction_above_cutoff: above as f64 / trials as f64,
    })
}

/// A small multigraph shape for the cycle-probability experiment.
#[derive(Debug, Clone, Serialize, serde::Deserialize)]
pub struct Topology {
    pub nodes: usize,
    pub edges: Vec<(usize, usize)>,
}

impl Topology {
    pub fn path(nodes: usize) -> Self {
        Topology { nodes, edges: (0..nodes.saturating_sub(1)).map(|i| (i, i + 1)).collect() }
    }

    pub fn triangle() -> Self {
        Topology { nodes: 3, edges: vec![(0, 1), (1, 2), (0, 2)] }
    }

    /// Two nodes joined by three internally disjoint paths; two
    /// independent cycles.
    pub fn theta() -> Self {
        Topology { nodes: 4, edges: vec![(0, 1), (0, 2), (2, 1), (0, 3), (3, 1)] }
    }

    pub fn independent_cycles(&self) -> usize {
        consistency::cycle_count_of_edges(self.nodes, &self.edges)
    }
}

/// Empirical probability that i.i.d.-uniform edge labels on a fixed shape
/// admit a consistent potential assignment, against the exact prediction
/// `M^-c` with `c` independent cycles.
#[derive(Debug, Clone, Serialize)]
pub struct CycleProbabilityStats {
    pub group_order: usize,
    pub trials: u64,
    pub feasible: u64,
    pub rate: f64,
    pub independent_cycles: usize,
    pub predicted_rate: f64,
}

pub fn cycle_probability_experiment(
    group: &FiniteGroup,
    topology: &Topology,
    trials: u64,
    master_seed: u64,
) -> Result<CycleProbabilityStats> {
    for &(u, v) in &topology.edges {
        if u >= topology.nodes || v >= topology.nodes {
            return Err(Error::InvalidParameter(format!(
                "topology edge ({u}, {v}) out of range"
            )));
        }
    }
    let cycles = topology.independent_cycles();
    let feasible_flags: Vec<bool> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(master_seed, t);
            let labeled: Vec<_> = topology
                .edges
                .iter()
                .map(|&(u, v)| (u, v, group.uniform_sample(&mut rng)))
                .collect();
            Ok(consistency::sync_feasible_edges(group, topology.nodes, &labeled)?.feasible)
        })
        .collect::<Result<_>>()?;
    let feasible = feasible_flags.iter().filter(|&&f| f).count() as u64;
    Ok(CycleProbabilityStats {
        group_order: group.order(),
        trials,
        feasible,
        rate: feasible as f64 / trials as f64,
        independent_cycles: cycles,
        predicted_rate: (group.order() as f64).powi(-(cycles as i32)),
    })
}

/// Metadata written next to experiment outputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest<C: Serialize> {
    pub tool_version: String,
    pub config: C,
    pub master_seed: u64,
    pub wall_time_ms: u64,
    pub common_random_numbers: bool,
}

impl<C: Serialize> RunManifest<C> {
    pub fn new(config: C, master_seed: u64, wall_time_ms: u64, common_random_numbers: bool) -> Self {
        RunManifest {
            tool_version: format!("commsync-v{}", env!("CARGO_PKG_VERSION")),
            config,
            master_seed,
            wall_time_ms,
            common_random_numbers,
        }
    }
}

/// Fixed-header trials CSV:
/// `trial_index,dist_c,dist_g,cluster_success,group_success,num_optima,conn1,conn2,ms`.
pub fn write_trials_csv<W: Write>(mut out: W, outcomes: &[TrialOutcome]) -> Result<()> {
    writeln!(out, "trial_index,dist_c,dist_g,cluster_success,group_success,num_optima,conn1,conn2,ms")?;
    for o in outcomes {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            o.trial_index,
            o.dist_c,
            o.dist_g,
            o.cluster_success,
            o.group_success,
            o.num_optima,
            o.truth_clusters_connected.0,
            o.truth_clusters_connected.1,
            o.wall_time_ms
        )?;
    }
    Ok(())
}

/// Fixed-header phase CSV:
/// `a,b,n,M,trials,rate_c,lo_c,hi_c,rate_g,lo_g,hi_g,region`.
/// Skipped cells carry empty rate fields and the marker region `skipped`.
pub fn write_phase_csv<W: Write>(mut out: W, cells: &[PhaseDiagramCell]) -> Result<()> {
    writeln!(out, "a,b,n,M,trials,rate_c,lo_c,hi_c,rate_g,lo_g,hi_g,region")?;
    for c in cells {
        if c.skipped {
            writeln!(out, "{},{},{},{},{},,,,,,,skipped", c.a, c.b, c.n, c.group_order, c.trials)?;
        } else {
            let cl = c.cluster.as_ref().expect("evaluated cell has cluster rates");
            let gr = c.group.as_ref().expect("evaluated cell has group rates");
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                c.a,
                c.b,
                c.n,
                c.group_order,
                c.trials,
                cl.rate,
                cl.wilson_low,
                cl.wilson_high,
                gr.rate,
                gr.wilson_low,
                gr.wilson_high,
                c.region.expect("evaluated cell has a region").as_str()
            )?;
        }
    }
    Ok(())
}

/// Fixed-header giant-component CSV: `n,a,trial,z_n`.
pub fn write_giant_csv<W: Write>(mut out: W, stats: &GiantComponentStats) -> Result<()> {
    writeln!(out, "n,a,trial,z_n")?;
    for (t, z) in stats.sizes.iter().enumerate() {
        writeln!(out, "{},{},{},{}", stats.n, stats.a, t, z)?;
    }
    Ok(())
}

/// Inclusive `start:stop:step` grid; endpoints hit within 1e-12.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Malformed(format!("grid '{spec}' is not start:stop:step")));
    }
    let parse = |s: &str| -> Result<f64> {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::Malformed(format!("bad grid number '{s}'")))
    };
    let (start, stop, step) = (parse(parts[0])?, parse(parts[1])?, parse(parts[2])?);
    if step <= 0.0 || !step.is_finite() {
        return Err(Error::Malformed(format!("grid step {step} must be positive")));
    }
    if stop < start {
        return Err(Error::Malformed(format!("grid stop {stop} precedes start {start}")));
    }
    let mut values = Vec::new();
    let mut k = 0u64;
    loop {
        let v = start + k as f64 * step;
        if v > stop + 1e-12 {
            break;
        }
        values.push(v);
        k += 1;
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(n: usize, m: usize, rates: RateSpec, trials: u64, seed: u64, solver: Solver) -> ExperimentConfig {
        ExperimentConfig {
            n,
            group_order: m,
            rates,
            trials,
            master_seed: seed,
            solver,
            workers: 1,
            identity_truth: false,
            mle_cap: mle::DEFAULT_SOLVE_CAP,
        }
    }

    #[test]
    fn trial_is_reproducible() {
        let group = FiniteGroup::cyclic(2).unwrap();
        let cfg = config(8, 2, RateSpec::Direct { p: 1.0, q: 0.0 }, 1, 7, Solver::Mle);
        let a = run_trial(&cfg, &group, 0).unwrap();
        let b = run_trial(&cfg, &group, 0).unwrap();
        assert_eq!(a[0].dist_c, b[0].dist_c);
        assert_eq!(a[0].dist_g, b[0].dist_g);
        assert_eq!(a[0].num_optima, b[0].num_optima);
        // Noiseless clique regime recovers everything.
        assert!(a[0].cluster_success && a[0].group_success);
    }

    #[test]
    fn impossible_regime_fails_often() {
        let group = FiniteGroup::cyclic(2).unwrap();
        let cfg = config(12, 2, RateSpec::LogScale { a: 0.5, b: 0.5 }, 200, 3, Solver::Mle);
        let summaries = estimate_success(&cfg, &group).unwrap();
        assert!(summaries[0].cluster.rate < 0.5, "rate {}", summaries[0].cluster.rate);
        assert!(summaries[0].group.rate < 0.5);
    }

    #[test]
    fn wilson_examples() {
        let (lo, hi) = wilson_interval(0, 10);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.2775).abs() < 5e-4, "hi {hi}");
        let (lo, hi) = wilson_interval(10, 10);
        assert!((lo - 0.7225).abs() < 5e-4, "lo {lo}");
        assert_eq!(hi, 1.0);
        // Mirror symmetry: interval for k reflects the one for n - k.
        let (lo_k, hi_k) = wilson_interval(3, 12);
        let (lo_m, hi_m) = wilson_interval(9, 12);
        assert!((lo_k - (1.0 - hi_m)).abs() < 1e-12);
        assert!((hi_k - (1.0 - lo_m)).abs() < 1e-12);
        // The point estimate always lies inside.
        for (k, n) in [(0u64, 5u64), (5, 5), (2, 7)] {
            let (lo, hi) = wilson_interval(k, n);
            let rate = k as f64 / n as f64;
            assert!(lo <= rate && rate <= hi);
        }
    }

    #[test]
    fn group_success_implies_cluster_success() {
        let group = FiniteGroup::cyclic(2).unwrap();
        for solver in [Solver::Mle, Solver::Baseline, Solver::Both] {
            let cfg = config(10, 2, RateSpec::Direct { p: 0.6, q: 0.3 }, 50, 11, solver);
            let summaries = estimate_success(&cfg, &group).unwrap();
            for s in &summaries {
                for o in &s.outcomes {
                    assert!(!o.group_success || o.cluster_success);
                    assert_eq!(o.cluster_success, o.dist_c == 0);
                    assert_eq!(o.group_success, o.dist_g == 0 && o.cluster_success);
                }
            }
        }
    }

    #[test]
    fn disconnected_truth_cluster_blocks_group_recovery() {
        let group = FiniteGroup::cyclic(3).unwrap();
        let cfg = config(10, 3, RateSpec::Direct { p: 0.3, q: 0.25 }, 80, 13, Solver::Mle);
        let summaries = estimate_success(&cfg, &group).unwrap();
        for o in &summaries[0].outcomes {
            let (c1, c2) = o.truth_clusters_connected;
            if !(c1 && c2) {
                assert!(!o.group_success, "trial {} recovered over a disconnected cluster", o.trial_index);
            }
        }
    }

    #[test]
    fn csv_outputs_are_deterministic_across_worker_counts() {
        let group = FiniteGroup::cyclic(2).unwrap();
        let cfg = config(10, 2, RateSpec::LogScale { a: 4.0, b: 1.0 }, 40, 21, Solver::Mle);
        let render = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| {
                let summaries = estimate_success(&cfg, &group).unwrap();
                let mut buf = Vec::new();
                write_trials_csv(&mut buf, &summaries[0].outcomes).unwrap();
                // The ms column is wall time and legitimately varies; strip it.
                String::from_utf8(buf)
                    .unwrap()
                    .lines()
                    .map(|l| l.rsplit_once(',').unwrap().0.to_string())
                    .collect::<Vec<_>>()
                    .join("\n")
            })
        };
        let a = render(1);
        let b = render(4);
        let c = render(8);
        assert_eq!(a, b);
        assert_eq!(b, c);
    }

    #[test]
    fn phase_diagram_marks_saturated_cells() {
        let group = FiniteGroup::cyclic(2).unwrap();
        let base = config(14, 2, RateSpec::LogScale { a: 0.0, b: 0.0 }, 5, 2, Solver::Mle);
        let cells = phase_diagram(&[1.0, 8.0], &[0.5], &base, &group).unwrap();
        assert_eq!(cells.len(), 2);
        assert!(!cells[0].skipped);
        assert!(cells[1].skipped, "a = 8 at n = 14 exceeds probability 1");
        let mut buf = Vec::new();
        write_phase_csv(&mut buf, &cells).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().last().unwrap().ends_with("skipped"));
    }

    #[test]
    fn single_cell_diagram_matches_estimate() {
        let group = FiniteGroup::cyclic(2).unwrap();
        let base = config(10, 2, RateSpec::LogScale { a: 0.0, b: 0.0 }, 30, 5, Solver::Mle);
        let cells = phase_diagram(&[4.0], &[1.0], &base, &group).unwrap();
        let direct_cfg = config(10, 2, RateSpec::LogScale { a: 4.0, b: 1.0 }, 30, 5, Solver::Mle);
        let direct = estimate_success(&direct_cfg, &group).unwrap();
        assert_eq!(cells[0].cluster.unwrap().successes, direct[0].cluster.successes);
        assert_eq!(cells[0].group.unwrap().successes, direct[0].group.successes);
    }

    #[test]
    fn connectivity_extremes() {
        let stats = connectivity_experiment(50, 0.0, 20, 1).unwrap();
        assert_eq!(stats.connected, 0);
        let stats = connectivity_experiment(200, 4.0, 30, 1).unwrap();
        assert!(stats.rate > 0.9, "rate {}", stats.rate);
    }

    #[test]
    fn giant_component_bounds() {
        let stats = giant_component_experiment(100, 3.0, 20, 2).unwrap();
        assert!(stats.sizes.iter().all(|&z| z >= 1 && z <= 100));
        assert!(stats.mean_fraction > 0.95);
    }

    #[test]
    fn cycle_probability_on_tree_is_exact() {
        let group = FiniteGroup::cyclic(3).unwrap();
        let stats =
            cycle_probability_experiment(&group, &Topology::path(5), 500, 3).unwrap();
        assert_eq!(stats.rate, 1.0);
        assert_eq!(stats.independent_cycles, 0);
    }

    #[test]
    fn cycle_probability_tracks_betti_number() {
        let group = FiniteGroup::cyclic(2).unwrap();
        let theta = Topology::theta();
        assert_eq!(theta.independent_cycles(), 2);
        let trials = 20_000u64;
        let stats = cycle_probability_experiment(&group, &theta, trials, 4).unwrap();
        let p = 0.25f64;
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((stats.rate - p).abs() <= 4.0 * sigma, "rate {}", stats.rate);
    }

    #[test]
    fn grid_parsing_inclusive_endpoints() {
        let grid = parse_grid("0:8:0.25").unwrap();
        assert_eq!(grid.len(), 33);
        assert_eq!(grid[0], 0.0);
        assert_eq!(*grid.last().unwrap(), 8.0);
        let single = parse_grid("2:2:1").unwrap();
        assert_eq!(single, vec![2.0]);
        assert!(parse_grid("1:2").is_err());
        assert!(parse_grid("1:2:0").is_err());
        assert!(parse_grid("3:1:1").is_err());
    }
}
