//! Graph machinery: synchronization feasibility via union-find with group
//! offsets, connected components, Erdős–Rényi sampling, and cycle counts.
//!
//! Feasibility asks whether per-node potentials exist realizing every edge
//! transformation, i.e. `g_ij = φ_i ∘ φ_j^{-1}` on the checked subgraph.
//! Equivalently, every cycle must compose to the identity; the union-find
//! detects a violated cycle without enumerating any.

use crate::error::{Error, Result};
use crate::group::{FiniteGroup, GroupElement};
use crate::model::{Edge, ObservedNetwork};
use rand::Rng;
use rand_distr::{Distribution, Geometric};
use std::collections::VecDeque;

/// Union-find over node potentials. Each node stores its offset to its
/// parent: `φ_node = w[node] ∘ φ_parent`. Merging two components fixes
/// their relative potential; an edge closing a cycle is checked against
/// the implied difference.
pub struct SyncState<'g> {
    group: &'g FiniteGroup,
    parent: Vec<usize>,
    size: Vec<u32>,
    to_parent: Vec<GroupElement>,
    /// Merge edges in insertion order, for witness reconstruction.
    tree_edges: Vec<(usize, usize, GroupElement)>,
}

impl<'g> SyncState<'g> {
    pub fn new(group: &'g FiniteGroup, n: usize) -> Self {
        SyncState {
            group,
            parent: (0..n).collect(),
            size: vec![1; n],
            to_parent: vec![group.identity(); n],
            tree_edges: Vec::new(),
        }
    }

    pub fn reset(&mut self) {
        for (i, p) in self.parent.iter_mut().enumerate() {
            *p = i;
        }
        self.size.fill(1);
        self.to_parent.fill(self.group.identity());
        self.tree_edges.clear();
    }

    /// Root of `u` and the offset `W` with `φ_u = W ∘ φ_root`. Compresses
    /// the path, accumulating offsets.
    pub fn find(&mut self, u: usize) -> (usize, GroupElement) {
        let mut path = Vec::new();
        let mut cur = u;
        while self.parent[cur] != cur {
            path.push(cur);
            cur = self.parent[cur];
        }
        let root = cur;
        let mut parent_offset = self.group.identity();
        for &node in path.iter().rev() {
            let combined = self.group.compose(self.to_parent[node], parent_offset);
            self.to_parent[node] = combined;
            self.parent[node] = root;
            parent_offset = combined;
        }
        let offset = if u == root { self.group.identity() } else { self.to_parent[u] };
        (root, offset)
    }

    /// Incorporates the constraint `g = φ_u ∘ φ_v^{-1}`. Returns false iff
    /// the edge closes an inconsistent cycle.
    pub fn add_edge(&mut self, u: usize, v: usize, g: GroupElement) -> bool {
        let (ru, wu) = self.find(u);
        let (rv, wv) = self.find(v);
        if ru == rv {
            return g == self.group.compose(wu, self.group.inverse(wv));
        }
        // Attach the smaller root under the larger.
        let (child, child_offset) = if self.size[ru] >= self.size[rv] {
            // φ_rv = Wv^{-1} ∘ g^{-1} ∘ Wu ∘ φ_ru
            let w = self
                .group
                .compose(self.group.inverse(wv), self.group.compose(self.group.inverse(g), wu));
            self.parent[rv] = ru;
            self.size[ru] += self.size[rv];
            (rv, w)
        } else {
            // φ_ru = Wu^{-1} ∘ g ∘ Wv ∘ φ_rv
            let w = self.group.compose(self.group.inverse(wu), self.group.compose(g, wv));
            self.parent[ru] = rv;
            self.size[rv] += self.size[ru];
            (ru, w)
        };
        self.to_parent[child] = child_offset;
        self.tree_edges.push((u, v, g));
        true
    }
}

/// One violated cycle: the closing edge followed by the tree path back,
/// each oriented along the traversal. Composing the transformations in
/// order yields `defect`, which is not the identity.
#[derive(Debug, Clone)]
pub struct InconsistentCycle {
    pub edges: Vec<(usize, usize, GroupElement)>,
    pub defect: GroupElement,
}

/// Outcome of a feasibility check on a subgraph.
#[derive(Debug, Clone)]
pub struct SyncFeasibility {
    pub feasible: bool,
    /// Per-node potentials with each component's root at the identity;
    /// full network length, identity outside the checked subset. Present
    /// iff feasible.
    pub potentials: Option<Vec<GroupElement>>,
    /// Partition of the checked subset into connected components.
    pub components: Vec<Vec<usize>>,
    pub witness: Option<InconsistentCycle>,
}

/// Feasibility over the edges internal to `node_subset`.
pub fn check_sync_feasible(
    network: &ObservedNetwork,
    node_subset: &[usize],
) -> Result<SyncFeasibility> {
    let subset = validate_subset(network.n(), node_subset)?;
    let mut in_subset = vec![false; network.n()];
    for &v in &subset {
        in_subset[v] = true;
    }
    let edges: Vec<_> = network
        .edges()
        .iter()
        .filter(|e| in_subset[e.i as usize] && in_subset[e.j as usize])
        .map(|e| (e.i as usize, e.j as usize, e.g))
        .collect();
    sync_feasibility(network.group(), network.n(), &subset, &edges)
}

/// Feasibility over an explicit edge list; parallel edges and self-loops
/// are allowed (a self-loop is consistent iff its label is the identity).
pub fn sync_feasible_edges(
    group: &FiniteGroup,
    n: usize,
    edges: &[(usize, usize, GroupElement)],
) -> Result<SyncFeasibility> {
    for &(u, v, g) in edges {
        if u >= n || v >= n {
            return Err(Error::Malformed(format!("edge ({u}, {v}) out of range for n = {n}")));
        }
        if g.index() >= group.order() {
            return Err(Error::Malformed(format!("edge label {} out of range", g.index())));
        }
    }
    let subset: Vec<usize> = (0..n).collect();
    sync_feasibility(group, n, &subset, edges)
}

fn sync_feasibility(
    group: &FiniteGroup,
    n: usize,
    subset: &[usize],
    edges: &[(usize, usize, GroupElement)],
) -> Result<SyncFeasibility> {
    let mut state = SyncState::new(group, n);
    for &(u, v, g) in edges {
        if !state.add_edge(u, v, g) {
            let witness = build_witness(group, &state.tree_edges, u, v, g);
            return Ok(SyncFeasibility {
                feasible: false,
                potentials: None,
                components: Vec::new(),
                witness: Some(witness),
            });
        }
    }
    let mut potentials = vec![group.identity(); n];
    for &v in subset {
        potentials[v] = state.find(v).1;
    }
    let components = collect_components(&mut state, subset);
    Ok(SyncFeasibility { feasible: true, potentials: Some(potentials), components, witness: None })
}

fn collect_components(state: &mut SyncState<'_>, subset: &[usize]) -> Vec<Vec<usize>> {
    let mut by_root: std::collections::HashMap<usize, Vec<usize>> = std::collections::HashMap::new();
    for &v in subset {
        let (root, _) = state.find(v);
        by_root.entry(root).or_default().push(v);
    }
    let mut components: Vec<Vec<usize>> = by_root.into_values().collect();
    for c in &mut components {
        c.sort_unstable();
    }
    components.sort_by_key(|c| c[0]);
    components
}

/// Reconstructs the fundamental cycle closed by the failing edge `(u, v, g)`
/// through the union-find spanning forest.
fn build_witness(
    group: &FiniteGroup,
    tree_edges: &[(usize, usize, GroupElement)],
    u: usize,
    v: usize,
    g: GroupElement,
) -> InconsistentCycle {
    let mut adj: std::collections::HashMap<usize, Vec<(usize, GroupElement)>> =
        std::collections::HashMap::new();
    for &(a, b, t) in tree_edges {
        adj.entry(a).or_default().push((b, t));
        adj.entry(b).or_default().push((a, group.inverse(t)));
    }
    // BFS path v -> u; it exists because the failing edge joined one component.
    let mut prev: std::collections::HashMap<usize, (usize, GroupElement)> =
        std::collections::HashMap::new();
    let mut queue = VecDeque::from([v]);
    prev.insert(v, (v, group.identity()));
    while let Some(cur) = queue.pop_front() {
        if cur == u {
            break;
        }
        if let Some(neighbors) = adj.get(&cur) {
            for &(next, t) in neighbors {
                if let std::collections::hash_map::Entry::Vacant(slot) = prev.entry(next) {
                    slot.insert((cur, t));
                    queue.push_back(next);
                }
            }
        }
    }
    let mut path = Vec::new();
    let mut cur = u;
    while cur != v {
        let (from, t) = prev[&cur];
        path.push((from, cur, t));
        cur = from;
    }
    path.reverse();
    // Cycle: u --g--> v, then the tree path v -> ... -> u.
    let mut edges = vec![(u, v, g)];
    let mut defect = g;
    for &(a, b, t) in &path {
        edges.push((a, b, t));
        defect = group.compose(defect, t);
    }
    InconsistentCycle { edges, defect }
}

/// Connected components of the subgraph induced by `node_subset`, each
/// sorted, ordered by smallest member.
pub fn connected_components(
    network: &ObservedNetwork,
    node_subset: &[usize],
) -> Result<Vec<Vec<usize>>> {
    let subset = validate_subset(network.n(), node_subset)?;
    let mut in_subset = vec![false; network.n()];
    for &v in &subset {
        in_subset[v] = true;
    }
    let mut dsu = PlainDsu::new(network.n());
    for e in network.edges() {
        let (i, j) = (e.i as usize, e.j as usize);
        if in_subset[i] && in_subset[j] {
            dsu.union(i, j);
        }
    }
    let mut by_root: std::collections::HashMap<usize, Vec<usize>> = std::collections::HashMap::new();
    for &v in &subset {
        by_root.entry(dsu.find(v)).or_default().push(v);
    }
    let mut components: Vec<Vec<usize>> = by_root.into_values().collect();
    for c in &mut components {
        c.sort_unstable();
    }
    components.sort_by_key(|c| c[0]);
    Ok(components)
}

/// Size of the largest connected component (isolated nodes count as 1).
pub fn giant_component_size(network: &ObservedNetwork) -> usize {
    if network.n() == 0 {
        return 0;
    }
    let mut dsu = PlainDsu::new(network.n());
    for e in network.edges() {
        dsu.union(e.i as usize, e.j as usize);
    }
    let mut counts = vec![0usize; network.n()];
    let mut best = 0;
    for v in 0..network.n() {
        let r = dsu.find(v);
        counts[r] += 1;
        best = best.max(counts[r]);
    }
    best
}

/// First Betti number of the induced subgraph:
/// `|edges| - |nodes| + |components|`, the number of independent cycles.
pub fn independent_cycle_count(network: &ObservedNetwork, node_subset: &[usize]) -> Result<usize> {
    let subset = validate_subset(network.n(), node_subset)?;
    let mut in_subset = vec![false; network.n()];
    for &v in &subset {
        in_subset[v] = true;
    }
    let edge_count = network
        .edges()
        .iter()
        .filter(|e| in_subset[e.i as usize] && in_subset[e.j as usize])
        .count();
    let components = connected_components(network, &subset)?.len();
    Ok(edge_count + components - subset.len())
}

/// Betti number of an explicit edge list (multigraph form).
pub fn cycle_count_of_edges(n: usize, edges: &[(usize, usize)]) -> usize {
    let mut dsu = PlainDsu::new(n);
    for &(u, v) in edges {
        dsu.union(u, v);
    }
    let roots: std::collections::HashSet<usize> = (0..n).map(|v| dsu.find(v)).collect();
    edges.len() + roots.len() - n
}

/// Samples `G(n, p)`: every pair independently connected with probability
/// `p`. Labels are all identity over the trivial group. Sparse graphs are
/// drawn by skipping geometric gaps rather than testing every pair.
pub fn sample_er_graph<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<ObservedNetwork> {
    if !(0.0..=1.0).contains(&p) || !p.is_finite() {
        return Err(Error::InvalidParameter(format!("p = {p} not in [0, 1]")));
    }
    let group = FiniteGroup::trivial();
    let identity = group.identity();
    let mut edges = Vec::new();
    if p > 0.0 {
        let total = (n as u64) * (n as u64 - 1) / 2;
        if p >= 1.0 {
            for i in 0..n as u32 {
                for j in (i + 1)..n as u32 {
                    edges.push(Edge { i, j, g: identity });
                }
            }
        } else {
            let gaps = Geometric::new(p)
                .map_err(|e| Error::InvalidParameter(format!("geometric({p}): {e}")))?;
            let mut idx: u64 = 0;
            let mut row: u64 = 0;
            let mut row_start: u64 = 0;
            loop {
                idx = match idx.checked_add(gaps.sample(rng)) {
                    Some(v) => v,
                    None => break,
                };
                if idx >= total {
                    break;
                }
                while idx >= row_start + (n as u64 - 1 - row) {
                    row_start += n as u64 - 1 - row;
                    row += 1;
                }
                let col = row + 1 + (idx - row_start);
                edges.push(Edge { i: row as u32, j: col as u32, g: identity });
                idx += 1;
            }
        }
    }
    ObservedNetwork::new(n, group, edges)
}

fn validate_subset(n: usize, node_subset: &[usize]) -> Result<Vec<usize>> {
    let mut seen = vec![false; n];
    for &v in node_subset {
        if v >= n {
            return Err(Error::InvalidParameter(format!("node {v} out of range for n = {n}")));
        }
        if seen[v] {
            return Err(Error::InvalidParameter(format!("node {v} repeated in subset")));
        }
        seen[v] = true;
    }
    Ok(node_subset.to_vec())
}

struct PlainDsu {
    parent: Vec<usize>,
    size: Vec<u32>,
}

impl PlainDsu {
    fn new(n: usize) -> Self {
        PlainDsu { parent: (0..n).collect(), size: vec![1; n] }
    }

    fn find(&mut self, mut u: usize) -> usize {
        while self.parent[u] != u {
            self.parent[u] = self.parent[self.parent[u]];
            u = self.parent[u];
        }
        u
    }

    fn union(&mut self, u: usize, v: usize) {
        let (mut ru, mut rv) = (self.find(u), self.find(v));
        if ru == rv {
            return;
        }
        if self.size[ru] < self.size[rv] {
            std::mem::swap(&mut ru, &mut rv);
        }
        self.parent[rv] = ru;
        self.size[ru] += self.size[rv];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn z(m: usize) -> FiniteGroup {
        FiniteGroup::cyclic(m).unwrap()
    }

    fn el(group: &FiniteGroup, i: usize) -> GroupElement {
        group.element(i).unwrap()
    }

    /// Exhaustive reference: does any potential assignment realize all edges?
    fn brute_force_feasible(
        group: &FiniteGroup,
        nodes: &[usize],
        edges: &[(usize, usize, GroupElement)],
    ) -> bool {
        let m = group.order();
        let k = nodes.len();
        let pos: std::collections::HashMap<usize, usize> =
            nodes.iter().enumerate().map(|(idx, &v)| (v, idx)).collect();
        let mut assign = vec![0usize; k];
        loop {
            let ok = edges.iter().all(|&(u, v, g)| {
                let gu = el(group, assign[pos[&u]]);
                let gv = el(group, assign[pos[&v]]);
                group.compose(gu, group.inverse(gv)) == g
            });
            if ok {
                return true;
            }
            let mut carry = 0;
            loop {
                if carry == k {
                    return false;
                }
                assign[carry] += 1;
                if assign[carry] < m {
                    break;
                }
                assign[carry] = 0;
                carry += 1;
            }
        }
    }

    #[test]
    fn consistent_triangle_is_feasible() {
        // g_01 = 1, g_12 = 1, g_20 = 1 in Z_3: composes to identity.
        let group = z(3);
        let edges = vec![
            (0, 1, el(&group, 1)),
            (1, 2, el(&group, 1)),
            (0, 2, group.inverse(el(&group, 1))), // stored form of g_20 = 1
        ];
        let result = sync_feasible_edges(&group, 3, &edges).unwrap();
        assert!(result.feasible);
        let phi = result.potentials.unwrap();
        for &(u, v, g) in &edges {
            assert_eq!(group.compose(phi[u], group.inverse(phi[v])), g);
        }
        assert_eq!(result.components.len(), 1);
    }

    #[test]
    fn inconsistent_triangle_yields_witness() {
        // g_01 = 1, g_12 = 0, g_20 = 0 in Z_2: cycle composes to 1.
        let group = z(2);
        let edges = vec![
            (0, 1, el(&group, 1)),
            (1, 2, el(&group, 0)),
            (0, 2, el(&group, 0)), // stored form of g_20 = 0
        ];
        let result = sync_feasible_edges(&group, 3, &edges).unwrap();
        assert!(!result.feasible);
        let witness = result.witness.unwrap();
        assert_ne!(witness.defect, group.identity());
        assert_eq!(witness.edges.len(), 3);
        let mut nodes: Vec<usize> = witness.edges.iter().map(|&(a, _, _)| a).collect();
        nodes.sort_unstable();
        assert_eq!(nodes, vec![0, 1, 2]);
    }

    #[test]
    fn forests_are_always_feasible() {
        let group = z(5);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            // Random labels on a random spanning tree of 8 nodes.
            let edges: Vec<_> = (1..8)
                .map(|v| {
                    let u = rng.random_range(0..v);
                    (u, v, group.uniform_sample(&mut rng))
                })
                .collect();
            let result = sync_feasible_edges(&group, 8, &edges).unwrap();
            assert!(result.feasible);
        }
    }

    #[test]
    fn agrees_with_brute_force_on_random_subgraphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for trial in 0..200 {
            let m = 1 + (trial % 3);
            let group = z(m);
            let n = rng.random_range(2..=8usize);
            let edge_count = rng.random_range(0..=12usize);
            let edges: Vec<_> = (0..edge_count)
                .map(|_| {
                    let u = rng.random_range(0..n);
                    let v = rng.random_range(0..n);
                    (u.min(v), u.max(v), group.uniform_sample(&mut rng))
                })
                .filter(|&(u, v, _)| u != v)
                .collect();
            let nodes: Vec<usize> = (0..n).collect();
            let fast = sync_feasible_edges(&group, n, &edges).unwrap();
            let slow = brute_force_feasible(&group, &nodes, &edges);
            assert_eq!(fast.feasible, slow, "mismatch on trial {trial}");
        }
    }

    #[test]
    fn potentials_reverify_on_feasible_results() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let group = z(4);
        for _ in 0..100 {
            let n = rng.random_range(3..=9usize);
            // Build a guaranteed-feasible labeling from hidden potentials.
            let hidden: Vec<_> = (0..n).map(|_| group.uniform_sample(&mut rng)).collect();
            let mut edges = Vec::new();
            for u in 0..n {
                for v in (u + 1)..n {
                    if rng.random::<f64>() < 0.4 {
                        edges.push((u, v, group.compose(hidden[u], group.inverse(hidden[v]))));
                    }
                }
            }
            let result = sync_feasible_edges(&group, n, &edges).unwrap();
            assert!(result.feasible);
            let phi = result.potentials.unwrap();
            for &(u, v, g) in &edges {
                assert_eq!(group.compose(phi[u], group.inverse(phi[v])), g);
            }
        }
    }

    #[test]
    fn components_and_giant_sizes() {
        let group = FiniteGroup::trivial();
        let id = group.identity();
        // Two disjoint triangles.
        let edges = vec![
            Edge { i: 0, j: 1, g: id },
            Edge { i: 1, j: 2, g: id },
            Edge { i: 0, j: 2, g: id },
            Edge { i: 3, j: 4, g: id },
            Edge { i: 4, j: 5, g: id },
            Edge { i: 3, j: 5, g: id },
        ];
        let net = ObservedNetwork::new(6, group.clone(), edges).unwrap();
        let all: Vec<usize> = (0..6).collect();
        let comps = connected_components(&net, &all).unwrap();
        assert_eq!(comps, vec![vec![0, 1, 2], vec![3, 4, 5]]);
        assert_eq!(giant_component_size(&net), 3);

        // Empty edge set: all singletons.
        let empty = ObservedNetwork::new(5, group.clone(), vec![]).unwrap();
        assert_eq!(giant_component_size(&empty), 1);

        // Path on n nodes spans everything.
        let path_edges: Vec<_> =
            (0..7u32).map(|i| Edge { i, j: i + 1, g: id }).collect();
        let path = ObservedNetwork::new(8, group, path_edges).unwrap();
        assert_eq!(giant_component_size(&path), 8);
    }

    #[test]
    fn betti_numbers() {
        let group = FiniteGroup::trivial();
        let id = group.identity();
        let tree: Vec<_> = (0..4u32).map(|i| Edge { i, j: i + 1, g: id }).collect();
        let net = ObservedNetwork::new(5, group.clone(), tree).unwrap();
        let all: Vec<usize> = (0..5).collect();
        assert_eq!(independent_cycle_count(&net, &all).unwrap(), 0);

        let triangle = vec![
            Edge { i: 0, j: 1, g: id },
            Edge { i: 1, j: 2, g: id },
            Edge { i: 0, j: 2, g: id },
        ];
        let net = ObservedNetwork::new(3, group.clone(), triangle).unwrap();
        assert_eq!(independent_cycle_count(&net, &[0, 1, 2]).unwrap(), 1);

        // Two triangles sharing an edge: 5 edges, 4 nodes, 1 component.
        let shared = vec![
            Edge { i: 0, j: 1, g: id },
            Edge { i: 1, j: 2, g: id },
            Edge { i: 0, j: 2, g: id },
            Edge { i: 1, j: 3, g: id },
            Edge { i: 2, j: 3, g: id },
        ];
        let net = ObservedNetwork::new(4, group, shared).unwrap();
        assert_eq!(independent_cycle_count(&net, &[0, 1, 2, 3]).unwrap(), 2);
    }

    #[test]
    fn er_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let empty = sample_er_graph(10, 0.0, &mut rng).unwrap();
        assert!(empty.edges().is_empty());
        let complete = sample_er_graph(10, 1.0, &mut rng).unwrap();
        assert_eq!(complete.edges().len(), 45);
    }

    #[test]
    fn er_edge_count_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 500usize;
        let p = 0.01f64;
        let samples = 200usize;
        let total_pairs = (n * (n - 1) / 2) as f64;
        let mut count = 0usize;
        for _ in 0..samples {
            count += sample_er_graph(n, p, &mut rng).unwrap().edges().len();
        }
        let mean = count as f64 / samples as f64;
        let expect = total_pairs * p;
        let sigma = (total_pairs * p * (1.0 - p) / samples as f64).sqrt();
        assert!((mean - expect).abs() <= 4.0 * sigma, "mean {mean} vs {expect}");
    }

    #[test]
    fn uniform_labels_hit_betti_probability() {
        // Single triangle: feasibility probability is exactly 1/M.
        let group = z(3);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let trials = 20_000usize;
        let mut feasible = 0usize;
        for _ in 0..trials {
            let edges: Vec<_> = [(0, 1), (1, 2), (0, 2)]
                .iter()
                .map(|&(u, v)| (u, v, group.uniform_sample(&mut rng)))
                .collect();
            if sync_feasible_edges(&group, 3, &edges).unwrap().feasible {
                feasible += 1;
            }
        }
        let rate = feasible as f64 / trials as f64;
        let p = 1.0 / 3.0;
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((rate - p).abs() <= 4.0 * sigma, "rate {rate}");
    }
}
