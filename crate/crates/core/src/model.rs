//! The generative model: two equal communities, in-cluster edges carrying
//! exact relative transformations, cross-cluster edges carrying uniform
//! noise.

use crate::error::{Error, Result};
use crate::group::{FiniteGroup, GroupElement};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

/// Community label; exactly two communities of equal size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Community {
    One,
    Two,
}

impl Community {
    pub fn swapped(self) -> Self {
        match self {
            Community::One => Community::Two,
            Community::Two => Community::One,
        }
    }

    /// 0 or 1, for array indexing.
    pub fn side(self) -> usize {
        match self {
            Community::One => 0,
            Community::Two => 1,
        }
    }
}

impl From<Community> for u8 {
    fn from(c: Community) -> u8 {
        match c {
            Community::One => 1,
            Community::Two => 2,
        }
    }
}

impl TryFrom<u8> for Community {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(Community::One),
            2 => Ok(Community::Two),
            other => Err(Error::Malformed(format!("community label {other} not in {{1, 2}}"))),
        }
    }
}

/// Model parameters. Probabilities may be given directly or in the
/// log-scale form `p = a log(n)/n`, `q = b log(n)/n` (natural log).
///
/// Rates that push a derived probability above 1 are clamped here and
/// flagged via [`ModelParams::saturated`]; callers that must reject
/// saturation (the CLI, phase-diagram grids) check the flag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    n: usize,
    group_order: usize,
    p: f64,
    q: f64,
    rates: Option<(f64, f64)>,
    saturated: bool,
}

impl ModelParams {
    pub fn from_probs(n: usize, group_order: usize, p: f64, q: f64) -> Result<Self> {
        Self::validate_shape(n, group_order)?;
        for (name, v) in [("p", p), ("q", q)] {
            if !(0.0..=1.0).contains(&v) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} = {v} not in [0, 1]")));
            }
        }
        Ok(ModelParams { n, group_order, p, q, rates: None, saturated: false })
    }

    pub fn from_rates(n: usize, group_order: usize, a: f64, b: f64) -> Result<Self> {
        Self::validate_shape(n, group_order)?;
        for (name, v) in [("a", a), ("b", b)] {
            if v < 0.0 || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} = {v} must be non-negative")));
            }
        }
        let scale = (n as f64).ln() / n as f64;
        let raw_p = a * scale;
        let raw_q = b * scale;
        let saturated = raw_p > 1.0 || raw_q > 1.0;
        Ok(ModelParams {
            n,
            group_order,
            p: raw_p.min(1.0),
            q: raw_q.min(1.0),
            rates: Some((a, b)),
            saturated,
        })
    }

    fn validate_shape(n: usize, group_order: usize) -> Result<()> {
        if n < 4 || n % 2 != 0 {
            return Err(Error::InvalidParameter(format!("n = {n} must be even and at least 4")));
        }
        if group_order == 0 {
            return Err(Error::InvalidParameter("group order must be at least 1".into()));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn group_order(&self) -> usize {
        self.group_order
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// The `(a, b)` rates when the params came from the log-scale form.
    pub fn rates(&self) -> Option<(f64, f64)> {
        self.rates
    }

    /// True when a log-scale rate was clamped to keep `p`, `q` within [0, 1].
    pub fn saturated(&self) -> bool {
        self.saturated
    }
}

/// A labeling-plus-elements pair: community assignment and one group
/// element per node. Serves both as ground truth and as solver output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub kappa: Vec<Community>,
    pub g: Vec<GroupElement>,
}

impl Hypothesis {
    pub fn n(&self) -> usize {
        self.kappa.len()
    }

    pub fn is_balanced(&self) -> bool {
        is_balanced(&self.kappa)
    }
}

pub fn is_balanced(kappa: &[Community]) -> bool {
    let ones = kappa.iter().filter(|&&k| k == Community::One).count();
    2 * ones == kappa.len()
}

/// One observed edge `i < j` carrying the transformation `g_ij`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub i: u32,
    pub j: u32,
    pub g: GroupElement,
}

/// An observed network: the edge set together with per-edge group
/// transformations. Edges are stored with `i < j` and sorted; querying the
/// reversed pair yields the inverse transformation.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedNetwork {
    n: usize,
    group: FiniteGroup,
    edges: Vec<Edge>,
}

#[derive(Serialize, Deserialize)]
struct RawNetwork {
    n: usize,
    #[serde(rename = "M")]
    order: usize,
    edges: Vec<(u32, u32, u16)>,
}

impl ObservedNetwork {
    pub fn new(n: usize, group: FiniteGroup, mut edges: Vec<Edge>) -> Result<Self> {
        for e in &edges {
            if e.i >= e.j {
                return Err(Error::Malformed(format!("edge ({}, {}) must satisfy i < j", e.i, e.j)));
            }
            if e.j as usize >= n {
                return Err(Error::Malformed(format!("edge ({}, {}) out of range for n = {n}", e.i, e.j)));
            }
            if e.g.index() >= group.order() {
                return Err(Error::Malformed(format!(
                    "edge ({}, {}) carries element {} outside group of order {}",
                    e.i,
                    e.j,
                    e.g.index(),
                    group.order()
                )));
            }
        }
        edges.sort_by_key(|e| (e.i, e.j));
        if edges.windows(2).any(|w| (w[0].i, w[0].j) == (w[1].i, w[1].j)) {
            return Err(Error::Malformed("duplicate edge pair".into()));
        }
        Ok(ObservedNetwork { n, group, edges })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Transformation observed from `i` to `j`, if the pair is connected.
    /// For `i > j` this is the inverse of the stored label.
    pub fn transform(&self, i: usize, j: usize) -> Option<GroupElement> {
        let (a, b) = (i.min(j) as u32, i.max(j) as u32);
        let idx = self.edges.binary_search_by_key(&(a, b), |e| (e.i, e.j)).ok()?;
        let g = self.edges[idx].g;
        Some(if (i as u32) == a { g } else { self.group.inverse(g) })
    }

    /// Adjacency lists with oriented transformations: for an entry
    /// `(v, g)` on node `u`, `g` is the transformation from `u` to `v`.
    pub fn adjacency(&self) -> Vec<Vec<(usize, GroupElement)>> {
        let mut adj = vec![Vec::new(); self.n];
        for e in &self.edges {
            adj[e.i as usize].push((e.j as usize, e.g));
            adj[e.j as usize].push((e.i as usize, self.group.inverse(e.g)));
        }
        adj
    }

    /// JSON form `{n, M, edges: [[i, j, g], ...]}`. The group structure
    /// itself is not embedded; loading reattaches `Z_M` by default or an
    /// explicit table group of matching order.
    pub fn to_json(&self) -> serde_json::Value {
        let raw = RawNetwork {
            n: self.n,
            order: self.group.order(),
            edges: self.edges.iter().map(|e| (e.i, e.j, e.g.index() as u16)).collect(),
        };
        serde_json::to_value(&raw).expect("network serializes")
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_json()).expect("network serializes")
    }

    pub fn from_json_str(text: &str, group: Option<FiniteGroup>) -> Result<Self> {
        let raw: RawNetwork = serde_json::from_str(text)?;
        let group = match group {
            Some(g) => {
                if g.order() != raw.order {
                    return Err(Error::Malformed(format!(
                        "network declares M = {} but supplied group has order {}",
                        raw.order,
                        g.order()
                    )));
                }
                g
            }
            None => FiniteGroup::cyclic(raw.order)?,
        };
        let edges = raw
            .edges
            .into_iter()
            .map(|(i, j, g)| Edge { i, j, g: GroupElement::from_index(g as usize) })
            .collect();
        ObservedNetwork::new(raw.n, group, edges)
    }

    /// Compact CSV with header `i,j,g`. The `(n, M)` pair is not encoded
    /// and must be supplied on load.
    pub fn to_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "i,j,g")?;
        for e in &self.edges {
            writeln!(out, "{},{},{}", e.i, e.j, e.g.index())?;
        }
        Ok(())
    }

    pub fn from_csv<R: BufRead>(reader: R, n: usize, group: FiniteGroup) -> Result<Self> {
        let mut lines = reader.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Malformed("expected CSV header i,j,g".into()))??;
        if header.trim() != "i,j,g" {
            return Err(Error::Malformed("expected CSV header i,j,g".into()));
        }
        let mut edges = Vec::new();
        for line in lines {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split(',');
            let mut field = |name: &str| -> Result<usize> {
                parts
                    .next()
                    .ok_or_else(|| Error::Malformed(format!("missing field {name} in row '{line}'")))?
                    .trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Malformed(format!("bad {name} in row '{line}'")))
            };
            let i = field("i")?;
            let j = field("j")?;
            let g = field("g")?;
            edges.push(Edge { i: i as u32, j: j as u32, g: GroupElement::from_index(g) });
        }
        ObservedNetwork::new(n, group, edges)
    }
}

/// The canonical ground truth: first half of the nodes in community one,
/// second half in community two, group elements drawn uniformly (or all
/// identity when `identity_elements` is set). Error probability does not
/// depend on the choice of truth, so the fixed labeling loses nothing.
pub fn canonical_truth<R: Rng + ?Sized>(
    params: &ModelParams,
    group: &FiniteGroup,
    rng: &mut R,
    identity_elements: bool,
) -> Result<Hypothesis> {
    check_group(params, group)?;
    let n = params.n();
    let kappa = (0..n)
        .map(|i| if i < n / 2 { Community::One } else { Community::Two })
        .collect();
    let g = (0..n)
        .map(|_| if identity_elements { group.identity() } else { group.uniform_sample(rng) })
        .collect();
    Ok(Hypothesis { kappa, g })
}

/// Samples one network: each pair `i < j` is connected with probability
/// `p` (same community) or `q` (different), in-cluster edges carry exactly
/// `g_i ∘ g_j^{-1}`, cross edges carry a uniform draw.
pub fn generate_network<R: Rng + ?Sized>(
    params: &ModelParams,
    group: &FiniteGroup,
    truth: &Hypothesis,
    rng: &mut R,
) -> Result<ObservedNetwork> {
    check_group(params, group)?;
    let n = params.n();
    if truth.n() != n {
        return Err(Error::LengthMismatch { expected: n, actual: truth.n() });
    }
    if !truth.is_balanced() {
        return Err(Error::InvalidParameter("truth labeling is not balanced".into()));
    }
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let same = truth.kappa[i] == truth.kappa[j];
            let prob = if same { params.p() } else { params.q() };
            if rng.random::<f64>() < prob {
                let g = if same {
                    group.compose(truth.g[i], group.inverse(truth.g[j]))
                } else {
                    group.uniform_sample(rng)
                };
                edges.push(Edge { i: i as u32, j: j as u32, g });
            }
        }
    }
    ObservedNetwork::new(n, group.clone(), edges)
}

fn check_group(params: &ModelParams, group: &FiniteGroup) -> Result<()> {
    if group.order() != params.group_order() {
        return Err(Error::InvalidParameter(format!(
            "params declare group order {} but group has order {}",
            params.group_order(),
            group.order()
        )));
    }
    Ok(())
}

/// Edge indices split by a labeling into in-cluster and cross-cluster sets.
#[derive(Debug, Clone)]
pub struct EdgeViews {
    pub inner: Vec<usize>,
    pub inter: Vec<usize>,
}

pub fn edge_views(network: &ObservedNetwork, kappa: &[Community]) -> Result<EdgeViews> {
    if kappa.len() != network.n() {
        return Err(Error::LengthMismatch { expected: network.n(), actual: kappa.len() });
    }
    let mut inner = Vec::new();
    let mut inter = Vec::new();
    for (idx, e) in network.edges().iter().enumerate() {
        if kappa[e.i as usize] == kappa[e.j as usize] {
            inner.push(idx);
        } else {
            inter.push(idx);
        }
    }
    Ok(EdgeViews { inner, inter })
}

/// The pair `(r, r*)`: edges in-cluster under the hypothesis but split by
/// the reference labeling, and vice versa. The in-cluster edge counts of
/// the two labelings always differ by exactly `r - r*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CrossCounts {
    pub r: usize,
    pub r_star: usize,
}

pub fn cross_counts(
    network: &ObservedNetwork,
    kappa: &[Community],
    kappa_star: &[Community],
) -> Result<CrossCounts> {
    if kappa.len() != network.n() {
        return Err(Error::LengthMismatch { expected: network.n(), actual: kappa.len() });
    }
    if kappa_star.len() != network.n() {
        return Err(Error::LengthMismatch { expected: network.n(), actual: kappa_star.len() });
    }
    let mut counts = CrossCounts { r: 0, r_star: 0 };
    for e in network.edges() {
        let (i, j) = (e.i as usize, e.j as usize);
        let same_hyp = kappa[i] == kappa[j];
        let same_ref = kappa_star[i] == kappa_star[j];
        if same_hyp && !same_ref {
            counts.r += 1;
        }
        if !same_hyp && same_ref {
            counts.r_star += 1;
        }
    }
    Ok(counts)
}
