//! Exact maximum-likelihood solver.
//!
//! The likelihood of a hypothesis reduces to the count of in-cluster edges
//! raised to a fixed base, times an indicator that every in-cluster edge
//! transformation is realizable by per-node elements. Solving exactly
//! therefore means: enumerate balanced bipartitions, keep those whose two
//! cluster subgraphs are synchronizable, and maximize or minimize the
//! in-cluster edge count depending on the parameter regime.

use crate::consistency::{self, SyncState};
use crate::error::{Error, Result};
use crate::group::GroupElement;
use crate::metrics;
use crate::model::{cross_counts, Community, Hypothesis, ModelParams, ObservedNetwork};
use rayon::prelude::*;
use serde::Serialize;

/// Default bound on exhaustive bipartition enumeration; at `n = 20` there
/// are C(19, 9) = 92378 pinned bipartitions.
pub const DEFAULT_SOLVE_CAP: usize = 20;

/// Whether the likelihood grows or shrinks with the in-cluster edge count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    Maximize,
    Minimize,
}

/// Regime decision plus a flag marking degenerate probabilities where the
/// likelihood base is 0 or infinite (`q = 0`, `p = 1`, or `p = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RegimeInfo {
    pub regime: Regime,
    pub degenerate: bool,
}

/// Maximize iff `M p (1 - q) > q (1 - p)`; exact equality minimizes.
pub fn regime(params: &ModelParams) -> RegimeInfo {
    let (p, q, m) = (params.p(), params.q(), params.group_order() as f64);
    if q == 0.0 || p == 1.0 {
        RegimeInfo { regime: Regime::Maximize, degenerate: true }
    } else if p == 0.0 {
        RegimeInfo { regime: Regime::Minimize, degenerate: true }
    } else if m * p * (1.0 - q) > q * (1.0 - p) {
        RegimeInfo { regime: Regime::Maximize, degenerate: false }
    } else {
        RegimeInfo { regime: Regime::Minimize, degenerate: false }
    }
}

/// Natural log of the likelihood base `M p (1 - q) / (q (1 - p))`, with
/// degenerate cases mapped to ±infinity.
fn log_base(params: &ModelParams) -> f64 {
    let (p, q, m) = (params.p(), params.q(), params.group_order() as f64);
    if q == 0.0 || p == 1.0 {
        f64::INFINITY
    } else if p == 0.0 {
        f64::NEG_INFINITY
    } else {
        (m * p * (1.0 - q) / (q * (1.0 - p))).ln()
    }
}

/// One optimal hypothesis: the labeling, a representative group assignment
/// (component roots at the identity), the per-cluster component counts,
/// and how many distinct assignments complete this labeling once one
/// offset per cluster is fixed (`M^(c1 + c2 - 2)`, saturating).
#[derive(Debug, Clone)]
pub struct Optimum {
    pub kappa: Vec<Community>,
    pub g: Vec<GroupElement>,
    pub components_per_cluster: [usize; 2],
    pub completions: u128,
}

/// Output of the exact solver or the naive oracle.
#[derive(Debug, Clone)]
pub struct MleResult {
    pub regime: RegimeInfo,
    /// In-cluster edge count at the optimum; `None` when no balanced
    /// bipartition is feasible (impossible for model-generated input).
    pub optimal_value: Option<usize>,
    /// All optimal labelings (node 0 pinned to community one), sorted,
    /// one representative group assignment each.
    pub optima: Vec<Optimum>,
    pub unique_up_to_symmetry: bool,
    /// Number of bipartitions examined.
    pub explored: u64,
}

impl MleResult {
    pub fn is_infeasible_instance(&self) -> bool {
        self.optima.is_empty()
    }

    pub fn num_optima(&self) -> u64 {
        self.optima.len() as u64
    }
}

/// Flat JSON summary of a solve run.
#[derive(Debug, Clone, Serialize)]
pub struct SolveSummary {
    pub regime: Regime,
    pub degenerate_rates: bool,
    pub optimal_value: Option<usize>,
    pub num_optima: u64,
    pub unique: bool,
    pub dist_c: Option<u8>,
    pub dist_g: Option<usize>,
    pub wall_time_ms: u64,
}

impl SolveSummary {
    pub fn new(result: &MleResult, distances: Option<(u8, usize)>, wall_time_ms: u64) -> Self {
        SolveSummary {
            regime: result.regime.regime,
            degenerate_rates: result.regime.degenerate,
            optimal_value: result.optimal_value,
            num_optima: result.num_optima(),
            unique: result.unique_up_to_symmetry,
            dist_c: distances.map(|d| d.0),
            dist_g: distances.map(|d| d.1),
            wall_time_ms,
        }
    }
}

/// Balanced bipartition masks with node 0 pinned to community one (bit set
/// = community one), in lexicographic order of the chosen index sets.
fn pinned_bipartitions(n: usize) -> Vec<u32> {
    let half = n / 2;
    let k = half - 1; // nodes joining node 0
    let mut masks = Vec::new();
    if k == 0 {
        return vec![1];
    }
    let mut comb: Vec<usize> = (1..=k).collect();
    loop {
        let mut mask = 1u32;
        for &v in &comb {
            mask |= 1 << v;
        }
        masks.push(mask);
        // Next combination of k indices from 1..n.
        let mut i = k;
        loop {
            if i == 0 {
                return masks;
            }
            i -= 1;
            if comb[i] < n - (k - i) {
                comb[i] += 1;
                for t in (i + 1)..k {
                    comb[t] = comb[t - 1] + 1;
                }
                break;
            }
        }
    }
}

fn kappa_of_mask(mask: u32, n: usize) -> Vec<Community> {
    (0..n)
        .map(|i| if mask & (1 << i) != 0 { Community::One } else { Community::Two })
        .collect()
}

/// Exact solver: enumerates every balanced bipartition (node 0 pinned to
/// community one, killing the global label swap), keeps those whose
/// in-cluster subgraphs pass the synchronization feasibility check, and
/// selects the in-cluster edge count optimum for the current regime.
/// Returns every optimal labeling.
pub fn solve_exact(
    network: &ObservedNetwork,
    params: &ModelParams,
    cap: Option<usize>,
) -> Result<MleResult> {
    let n = network.n();
    let cap = cap.unwrap_or(DEFAULT_SOLVE_CAP);
    if n > cap {
        return Err(Error::SolverCap { n, cap });
    }
    if n != params.n() {
        return Err(Error::LengthMismatch { expected: params.n(), actual: n });
    }
    let info = regime(params);
    let group = network.group();
    let edges: Vec<(usize, usize, GroupElement)> =
        network.edges().iter().map(|e| (e.i as usize, e.j as usize, e.g)).collect();

    let masks = pinned_bipartitions(n);
    let explored = masks.len() as u64;

    // Candidate = best value so far plus the masks achieving it. Merging is
    // associative, so the parallel reduction is deterministic up to order;
    // the final sort fixes the order.
    #[derive(Clone)]
    struct Candidates {
        value: Option<usize>,
        masks: Vec<u32>,
    }

    let better = |regime: Regime, a: usize, b: usize| match regime {
        Regime::Maximize => a > b,
        Regime::Minimize => a < b,
    };

    let merge = |mut acc: Candidates, other: Candidates| -> Candidates {
        match (acc.value, other.value) {
            (None, _) => other,
            (_, None) => acc,
            (Some(a), Some(b)) => {
                if better(info.regime, b, a) {
                    other
                } else if a == b {
                    acc.masks.extend(other.masks);
                    acc
                } else {
                    acc
                }
            }
        }
    };

    let result = masks
        .par_chunks(2048)
        .map(|chunk| {
            let mut state = SyncState::new(group, n);
            let mut local = Candidates { value: None, masks: Vec::new() };
            for &mask in chunk {
                let mut inner = 0usize;
                let mut feasible = true;
                state.reset();
                for &(u, v, g) in &edges {
                    if (mask >> u) & 1 == (mask >> v) & 1 {
                        inner += 1;
                        if feasible && !state.add_edge(u, v, g) {
                            feasible = false;
                        }
                    }
                }
                if !feasible {
                    continue;
                }
                match local.value {
                    None => local = Candidates { value: Some(inner), masks: vec![mask] },
                    Some(best) if better(info.regime, inner, best) => {
                        local = Candidates { value: Some(inner), masks: vec![mask] };
                    }
                    Some(best) if inner == best => local.masks.push(mask),
                    _ => {}
                }
            }
            local
        })
        .reduce(|| Candidates { value: None, masks: Vec::new() }, merge);

    let mut optimal_masks = result.masks;
    optimal_masks.sort_unstable();

    let mut optima = Vec::with_capacity(optimal_masks.len());
    for mask in optimal_masks {
        let kappa = kappa_of_mask(mask, n);
        match synchronize_within_clusters(network, &kappa)? {
            ClusterSync::Feasible { g, components_per_cluster } => {
                let m = group.order() as u128;
                let free = (components_per_cluster[0] - 1 + components_per_cluster[1] - 1) as u32;
                let completions = m.saturating_pow(free);
                optima.push(Optimum { kappa, g, components_per_cluster, completions });
            }
            ClusterSync::Infeasible { .. } => {
                unreachable!("optimum passed the feasibility check")
            }
        }
    }
    optima.sort_by(|a, b| a.kappa.cmp(&b.kappa));

    Ok(MleResult {
        regime: info,
        optimal_value: result.value,
        unique_up_to_symmetry: optima.len() == 1,
        optima,
        explored,
    })
}

/// Brute-force reference solver: enumerates every balanced labeling and
/// every group assignment, checking each in-cluster edge directly against
/// the assignment. Only for validating `solve_exact`; cost is
/// `C(n, n/2) * M^n`.
pub fn naive_oracle(network: &ObservedNetwork, params: &ModelParams) -> Result<MleResult> {
    let n = network.n();
    if n > 10 {
        return Err(Error::OracleBound(format!("n = {n} exceeds oracle limit 10")));
    }
    if n != params.n() {
        return Err(Error::LengthMismatch { expected: params.n(), actual: n });
    }
    let group = network.group();
    let m = group.order();
    if (m as f64).powi(n as i32) > 1e7 {
        return Err(Error::OracleBound(format!("M^n = {m}^{n} exceeds oracle limit 1e7")));
    }
    let info = regime(params);

    let better = |a: usize, b: usize| match info.regime {
        Regime::Maximize => a > b,
        Regime::Minimize => a < b,
    };

    // All balanced labelings, unpinned: choose n/2 nodes for community one.
    let mut all_kappas: Vec<Vec<Community>> = Vec::new();
    let half = n / 2;
    let mut comb: Vec<usize> = (0..half).collect();
    loop {
        let mut kappa = vec![Community::Two; n];
        for &v in &comb {
            kappa[v] = Community::One;
        }
        all_kappas.push(kappa);
        let mut i = half;
        let mut done = true;
        while i > 0 {
            i -= 1;
            if comb[i] < n - (half - i) {
                comb[i] += 1;
                for t in (i + 1)..half {
                    comb[t] = comb[t - 1] + 1;
                }
                done = false;
                break;
            }
        }
        if done {
            break;
        }
    }

    struct FeasibleKappa {
        kappa: Vec<Community>,
        inner: usize,
        first_g: Vec<GroupElement>,
        feasible_assignments: u128,
    }

    let mut feasible: Vec<FeasibleKappa> = Vec::new();
    for kappa in &all_kappas {
        let inner_edges: Vec<(usize, usize, GroupElement)> = network
            .edges()
            .iter()
            .filter(|e| kappa[e.i as usize] == kappa[e.j as usize])
            .map(|e| (e.i as usize, e.j as usize, e.g))
            .collect();
        let inner = inner_edges.len();

        // Odometer over all M^n assignments.
        let mut assign = vec![0usize; n];
        let mut first_g: Option<Vec<GroupElement>> = None;
        let mut count: u128 = 0;
        loop {
            let consistent = inner_edges.iter().all(|&(u, v, g)| {
                let gu = GroupElement::from_index(assign[u]);
                let gv = GroupElement::from_index(assign[v]);
                group.compose(gu, group.inverse(gv)) == g
            });
            if consistent {
                count += 1;
                if first_g.is_none() {
                    first_g =
                        Some(assign.iter().map(|&i| GroupElement::from_index(i)).collect());
                }
            }
            let mut pos = 0;
            loop {
                if pos == n {
                    break;
                }
                assign[pos] += 1;
                if assign[pos] < m {
                    break;
                }
                assign[pos] = 0;
                pos += 1;
            }
            if pos == n {
                break;
            }
        }
        if let Some(g) = first_g {
            feasible.push(FeasibleKappa {
                kappa: kappa.clone(),
                inner,
                first_g: g,
                feasible_assignments: count,
            });
        }
    }

    let optimal_value = feasible.iter().map(|f| f.inner).fold(None, |acc: Option<usize>, v| {
        Some(match acc {
            None => v,
            Some(best) if better(v, best) => v,
            Some(best) => best,
        })
    });

    // Canonicalize to the pinned form (node 0 in community one) and dedupe
    // the label-swapped twins.
    let mut optima: Vec<Optimum> = Vec::new();
    if let Some(best) = optimal_value {
        for f in feasible.iter().filter(|f| f.inner == best) {
            if f.kappa[0] != Community::One {
                continue; // the swapped twin appears elsewhere in the enumeration
            }
            let components_per_cluster = cluster_component_counts(network, &f.kappa)?;
            // Every component carries a free offset; fixing one per cluster
            // leaves M^(c1 + c2 - 2) completions.
            let completions = f.feasible_assignments / (m as u128 * m as u128);
            optima.push(Optimum {
                kappa: f.kappa.clone(),
                g: f.first_g.clone(),
                components_per_cluster,
                completions,
            });
        }
    }
    optima.sort_by(|a, b| a.kappa.cmp(&b.kappa));

    Ok(MleResult {
        regime: info,
        optimal_value,
        unique_up_to_symmetry: optima.len() == 1,
        optima,
        explored: all_kappas.len() as u64,
    })
}

fn cluster_component_counts(
    network: &ObservedNetwork,
    kappa: &[Community],
) -> Result<[usize; 2]> {
    let mut counts = [0usize; 2];
    for cluster in [Community::One, Community::Two] {
        let nodes: Vec<usize> = (0..network.n()).filter(|&i| kappa[i] == cluster).collect();
        counts[cluster.side()] = consistency::connected_components(network, &nodes)?.len();
    }
    Ok(counts)
}

/// Log-likelihood ratio of `hypothesis` against `truth`:
/// `(r - r*) * log(M p (1-q) / (q (1-p)))` when the hypothesis satisfies
/// every in-cluster consistency constraint, negative infinity otherwise.
pub fn log_likelihood_ratio(
    network: &ObservedNetwork,
    params: &ModelParams,
    hypothesis: &Hypothesis,
    truth: &Hypothesis,
) -> Result<f64> {
    let n = network.n();
    if hypothesis.n() != n {
        return Err(Error::LengthMismatch { expected: n, actual: hypothesis.n() });
    }
    if !hypothesis.is_balanced() {
        return Err(Error::InvalidParameter("hypothesis labeling is not balanced".into()));
    }
    let group = network.group();
    let consistent = network.edges().iter().all(|e| {
        let (i, j) = (e.i as usize, e.j as usize);
        hypothesis.kappa[i] != hypothesis.kappa[j]
            || group.compose(hypothesis.g[i], group.inverse(hypothesis.g[j])) == e.g
    });
    if !consistent {
        return Ok(f64::NEG_INFINITY);
    }
    let counts = cross_counts(network, &hypothesis.kappa, &truth.kappa)?;
    let delta = counts.r as f64 - counts.r_star as f64;
    let base = log_base(params);
    Ok(if delta == 0.0 { 0.0 } else { delta * base })
}

/// Per-cluster synchronization outcome for a fixed labeling.
#[derive(Debug, Clone)]
pub enum ClusterSync {
    Feasible {
        /// One element per node; each component's root sits at the identity.
        g: Vec<GroupElement>,
        components_per_cluster: [usize; 2],
    },
    Infeasible {
        cluster: Community,
        witness: consistency::InconsistentCycle,
    },
}

/// Runs the synchronization feasibility check on each cluster of `kappa`
/// and returns per-node potentials, or the violated cycle.
pub fn synchronize_within_clusters(
    network: &ObservedNetwork,
    kappa: &[Community],
) -> Result<ClusterSync> {
    if kappa.len() != network.n() {
        return Err(Error::LengthMismatch { expected: network.n(), actual: kappa.len() });
    }
    let mut g = vec![network.group().identity(); network.n()];
    let mut components_per_cluster = [0usize; 2];
    for cluster in [Community::One, Community::Two] {
        let nodes: Vec<usize> = (0..network.n()).filter(|&i| kappa[i] == cluster).collect();
        let check = consistency::check_sync_feasible(network, &nodes)?;
        if !check.feasible {
            return Ok(ClusterSync::Infeasible {
                cluster,
                witness: check.witness.expect("infeasible check carries a witness"),
            });
        }
        let potentials = check.potentials.expect("feasible check carries potentials");
        for &v in &nodes {
            g[v] = potentials[v];
        }
        components_per_cluster[cluster.side()] = check.components.len();
    }
    Ok(ClusterSync::Feasible { g, components_per_cluster })
}

/// Recovery evaluation of a solver result against the truth, applying the
/// tie and alignment rules: a tie counts as a cluster failure, and group
/// elements count as recovered only when the labeling succeeded and every
/// cluster is a single component (unless `M = 1`, where there is nothing
/// to align).
#[derive(Debug, Clone, Copy)]
pub struct MleEvaluation {
    pub dist_c: u8,
    pub dist_g: usize,
    pub cluster_success: bool,
    pub group_success: bool,
}

pub fn evaluate_against_truth(
    network: &ObservedNetwork,
    result: &MleResult,
    truth: &Hypothesis,
) -> Result<MleEvaluation> {
    let group = network.group();
    let m = group.order();
    let (dist_c, dist_g) = match result.optima.first() {
        Some(first) if result.unique_up_to_symmetry => {
            let dc = metrics::dist_c(&first.kappa, &truth.kappa)?;
            let aligned =
                m == 1 || (first.components_per_cluster[0] == 1 && first.components_per_cluster[1] == 1);
            let raw_dg = metrics::dist_g(group, &first.g, &truth.g, &truth.kappa)?;
            let dg = if dc == 0 && aligned { raw_dg } else { raw_dg.max(1) };
            (dc, dg)
        }
        // Tie or infeasible instance: the estimator cannot commit.
        _ => (1u8, 1usize),
    };
    let cluster_success = dist_c == 0;
    let group_success = cluster_success && dist_g == 0;
    Ok(MleEvaluation { dist_c, dist_g, cluster_success, group_success })
}
