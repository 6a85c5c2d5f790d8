//! The naive two-stage pipeline: spectral graph clustering followed by
//! synchronization within each estimated cluster. It ignores what the
//! cross-cluster transformations say about the partition, which is exactly
//! why it trails the exact solver.

use crate::consistency;
use crate::error::{Error, Result};
use crate::group::GroupElement;
use crate::metrics;
use crate::model::{Community, Hypothesis, ObservedNetwork};
use rand::Rng;

const POWER_TOLERANCE: f64 = 1e-10;

/// Two-stage output evaluated against the truth.
#[derive(Debug, Clone)]
pub struct BaselineResult {
    pub kappa: Vec<Community>,
    pub g: Vec<GroupElement>,
    pub dist_c: u8,
    pub dist_g: usize,
    /// Gap between the two largest adjacency eigenvalues (diagnostic).
    pub spectral_gap: f64,
    pub power_converged: bool,
    /// True when some estimated cluster was not synchronizable and the
    /// spanning-tree fallback was used.
    pub sync_fallback: bool,
}

/// Clustering stage output.
#[derive(Debug, Clone)]
pub struct SpectralSplit {
    pub kappa: Vec<Community>,
    pub spectral_gap: f64,
    pub converged: bool,
}

/// Balanced spectral bisection: the eigenvector of the second-largest
/// adjacency eigenvalue is computed by deflated power iteration (shifted
/// by `n` to keep the spectrum positive), then the top `n/2` entries form
/// community one. The random start vector comes from the trial RNG and is
/// orthogonalized against the all-ones direction.
pub fn spectral_bisection<R: Rng + ?Sized>(
    network: &ObservedNetwork,
    rng: &mut R,
) -> Result<SpectralSplit> {
    let n = network.n();
    if n % 2 != 0 || n == 0 {
        return Err(Error::InvalidParameter(format!("n = {n} must be even and positive")));
    }
    let mut adjacency = vec![0.0f64; n * n];
    for e in network.edges() {
        adjacency[e.i as usize * n + e.j as usize] = 1.0;
        adjacency[e.j as usize * n + e.i as usize] = 1.0;
    }
    let shift = n as f64;
    let matvec = |x: &[f64], out: &mut [f64]| {
        for (i, o) in out.iter_mut().enumerate() {
            let row = &adjacency[i * n..(i + 1) * n];
            let mut acc = 0.0;
            for (a, xv) in row.iter().zip(x) {
                acc += a * xv;
            }
            *o = acc + shift * x[i];
        }
    };
    let max_iters = (10.0 * n as f64 * (n as f64).ln()).ceil() as usize;

    // Leading eigenvector from the all-ones start.
    let mut v1 = vec![1.0 / (n as f64).sqrt(); n];
    let mut scratch = vec![0.0; n];
    let conv1 = power_iterate(&matvec, &mut v1, &mut scratch, max_iters, &[]);

    // Second eigenvector: random start orthogonal to all-ones and v1,
    // deflated against v1 every iteration.
    let ones: Vec<f64> = vec![1.0 / (n as f64).sqrt(); n];
    let mut v2 = vec![0.0; n];
    let mut attempts = 0;
    loop {
        for x in v2.iter_mut() {
            *x = rng.random::<f64>() - 0.5;
        }
        project_out(&mut v2, &ones);
        project_out(&mut v2, &v1);
        if normalize(&mut v2) > 1e-12 {
            break;
        }
        attempts += 1;
        if attempts > 16 {
            return Err(Error::InvalidParameter(
                "could not find a start vector independent of the leading eigenvector".into(),
            ));
        }
    }
    let deflate = [v1.as_slice()];
    let conv2 = power_iterate(&matvec, &mut v2, &mut scratch, max_iters, &deflate);

    let lambda = |v: &[f64]| {
        // Rayleigh quotient of the unshifted adjacency.
        let mut acc = 0.0;
        for i in 0..n {
            let row = &adjacency[i * n..(i + 1) * n];
            let av: f64 = row.iter().zip(v).map(|(a, xv)| a * xv).sum();
            acc += v[i] * av;
        }
        acc
    };
    let spectral_gap = lambda(&v1) - lambda(&v2);

    // Median split: the n/2 largest entries of v2 form community one.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| v2[b].partial_cmp(&v2[a]).unwrap().then(a.cmp(&b)));
    let mut kappa = vec![Community::Two; n];
    for &i in order.iter().take(n / 2) {
        kappa[i] = Community::One;
    }
    Ok(SpectralSplit { kappa, spectral_gap, converged: conv1 && conv2 })
}

fn project_out(v: &mut [f64], basis: &[f64]) {
    let dot: f64 = v.iter().zip(basis).map(|(a, b)| a * b).sum();
    for (x, b) in v.iter_mut().zip(basis) {
        *x -= dot * b;
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
    norm
}

/// Shifted power iteration with optional deflation; `v` holds the start
/// and the result. Returns whether the tolerance was reached.
fn power_iterate(
    matvec: &impl Fn(&[f64], &mut [f64]),
    v: &mut Vec<f64>,
    scratch: &mut Vec<f64>,
    max_iters: usize,
    deflate: &[&[f64]],
) -> bool {
    for _ in 0..max_iters {
        matvec(v, scratch);
        for basis in deflate {
            project_out(scratch, basis);
        }
        normalize(scratch);
        let delta = v
            .iter()
            .zip(scratch.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        std::mem::swap(v, scratch);
        if delta <= POWER_TOLERANCE {
            return true;
        }
    }
    false
}

/// Synchronizes within the given clusters, falling back per cluster to
/// spanning-tree propagation (non-tree edges ignored) when the cluster
/// subgraph is not consistent. Returns the elements and the fallback flag.
pub fn synchronize_or_fallback(
    network: &ObservedNetwork,
    kappa: &[Community],
) -> Result<(Vec<GroupElement>, bool)> {
    let group = network.group();
    let mut g = vec![group.identity(); network.n()];
    let mut fallback = false;
    for cluster in [Community::One, Community::Two] {
        let nodes: Vec<usize> = (0..network.n()).filter(|&i| kappa[i] == cluster).collect();
        let check = consistency::check_sync_feasible(network, &nodes)?;
        if check.feasible {
            let potentials = check.potentials.expect("feasible check carries potentials");
            for &v in &nodes {
                g[v] = potentials[v];
            }
        } else {
            fallback = true;
            propagate_spanning_tree(network, &nodes, &mut g);
        }
    }
    Ok((g, fallback))
}

/// BFS tree propagation: each component's root takes the identity and
/// children satisfy their tree edge; inconsistent non-tree edges are
/// simply ignored.
fn propagate_spanning_tree(network: &ObservedNetwork, nodes: &[usize], g: &mut [GroupElement]) {
    let group = network.group();
    let mut in_cluster = vec![false; network.n()];
    for &v in nodes {
        in_cluster[v] = true;
    }
    let adjacency = network.adjacency();
    let mut visited = vec![false; network.n()];
    for &root in nodes {
        if visited[root] {
            continue;
        }
        visited[root] = true;
        g[root] = group.identity();
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &(v, t_uv) in &adjacency[u] {
                if in_cluster[v] && !visited[v] {
                    visited[v] = true;
                    // g_uv = φ_u ∘ φ_v^{-1}  =>  φ_v = g_uv^{-1} ∘ φ_u
                    g[v] = group.compose(group.inverse(t_uv), g[u]);
                    queue.push_back(v);
                }
            }
        }
    }
}

/// Full two-stage pipeline, evaluated against the truth.
pub fn two_stage_recover<R: Rng + ?Sized>(
    network: &ObservedNetwork,
    truth: &Hypothesis,
    rng: &mut R,
) -> Result<BaselineResult> {
    let split = spectral_bisection(network, rng)?;
    let (g, sync_fallback) = synchronize_or_fallback(network, &split.kappa)?;
    let dist_c = metrics::dist_c(&split.kappa, &truth.kappa)?;
    let dist_g = metrics::dist_g(network.group(), &g, &truth.g, &truth.kappa)?;
    Ok(BaselineResult {
        kappa: split.kappa,
        g,
        dist_c,
        dist_g,
        spectral_gap: split.spectral_gap,
        power_converged: split.converged,
        sync_fallback,
    })
}
