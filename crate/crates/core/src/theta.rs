//! The theta pattern θ_{a,b}, canonical vertex labels, and pattern-to-host
//! assignments with their projections.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// The graph θ_{a,b}: two hub vertices joined by `a` internally disjoint
/// paths, each with `b` edges.
///
/// Canonical labels: hub `u` is 0, hub `v` is 1, and the i-th internal vertex
/// of the j-th path (1-based, counted from `u`) is `2 + (i-1)a + (j-1)`, so
/// each internal layer is contiguous. The hubs are never adjacent (`b >= 2`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThetaPattern {
    a: u32,
    b: u32,
    graph: Graph,
}

/// Canonical label of hub `u`.
pub const HUB_U: u32 = 0;
/// Canonical label of hub `v`.
pub const HUB_V: u32 = 1;

impl ThetaPattern {
    /// Builds θ_{a,b}. Requires `a >= 2` and `b >= 2`.
    pub fn new(a: u32, b: u32) -> Result<Self> {
        if a < 2 || b < 2 {
            return Err(Error::Domain(format!(
                "theta pattern needs a >= 2 and b >= 2, got ({a}, {b})"
            )));
        }
        let n = a * (b - 1) + 2;
        let mut graph = Graph::new(n);
        for j in 1..=a {
            let path = path_vertices_raw(a, b, j);
            for pair in path.windows(2) {
                graph.add_edge(pair[0], pair[1])?;
            }
        }
        debug_assert_eq!(graph.edge_count() as u32, a * b);
        Ok(ThetaPattern { a, b, graph })
    }

    /// Number of internally disjoint hub-to-hub paths.
    pub fn a(&self) -> u32 {
        self.a
    }

    /// Length (edge count) of each path.
    pub fn b(&self) -> u32 {
        self.b
    }

    /// Number of vertices, `a(b-1) + 2`.
    pub fn vertex_count(&self) -> u32 {
        self.a * (self.b - 1) + 2
    }

    /// Number of edges, `ab`.
    pub fn edge_count(&self) -> u32 {
        self.a * self.b
    }

    /// The pattern as a plain graph on the canonical labels.
    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    /// Label of the internal vertex `w_i^j` (both indices 1-based,
    /// `1 <= i <= b-1`, `1 <= j <= a`).
    pub fn internal(&self, i: u32, j: u32) -> u32 {
        debug_assert!((1..self.b).contains(&i) && (1..=self.a).contains(&j));
        2 + (i - 1) * self.a + (j - 1)
    }

    /// Inverse of [`internal`](Self::internal): the (layer, path) position of
    /// an internal vertex, or `None` for the hubs.
    pub fn position(&self, vid: u32) -> Option<(u32, u32)> {
        if vid < 2 || vid >= self.vertex_count() {
            return None;
        }
        let off = vid - 2;
        Some((off / self.a + 1, off % self.a + 1))
    }

    /// Human-readable label: `u`, `v`, or `w_i^j`.
    pub fn vertex_label(&self, vid: u32) -> String {
        match vid {
            HUB_U => "u".to_string(),
            HUB_V => "v".to_string(),
            _ => match self.position(vid) {
                Some((i, j)) => format!("w_{i}^{j}"),
                None => format!("<{vid}>"),
            },
        }
    }

    /// The j-th path as a vertex sequence `u, w_1^j, ..., w_{b-1}^j, v`.
    pub fn path_vertices(&self, j: u32) -> Vec<u32> {
        path_vertices_raw(self.a, self.b, j)
    }

    /// Edges of the j-th path in order from `u` to `v`.
    pub fn path_edges(&self, j: u32) -> Vec<(u32, u32)> {
        self.path_vertices(j)
            .windows(2)
            .map(|p| if p[0] < p[1] { (p[0], p[1]) } else { (p[1], p[0]) })
            .collect()
    }

    /// The layer set `{w_i^j : t <= i < b, i - t even}` used by the
    /// layer-sensitive codegree families. Requires `2 <= t <= b` (empty at
    /// `t = b`).
    pub fn layer_set(&self, t: u32) -> Result<BTreeSet<u32>> {
        if !(2..=self.b).contains(&t) {
            return Err(Error::Domain(format!(
                "layer set needs 2 <= t <= b = {}, got {t}",
                self.b
            )));
        }
        let mut set = BTreeSet::new();
        let mut i = t;
        while i < self.b {
            for j in 1..=self.a {
                set.insert(self.internal(i, j));
            }
            i += 2;
        }
        Ok(set)
    }

    /// Pattern edges with both endpoints in `nu`.
    pub fn induced_edges(&self, nu: &BTreeSet<u32>) -> Vec<(u32, u32)> {
        self.graph
            .edges()
            .iter()
            .copied()
            .filter(|&(x, y)| nu.contains(&x) && nu.contains(&y))
            .collect()
    }

    /// Whether `nu` induces a forest in the pattern.
    pub fn induces_forest(&self, nu: &BTreeSet<u32>) -> bool {
        let mut parent: Vec<u32> = (0..self.vertex_count()).collect();
        fn find(parent: &mut [u32], x: u32) -> u32 {
            let mut r = x;
            while parent[r as usize] != r {
                r = parent[r as usize];
            }
            let mut c = x;
            while parent[c as usize] != r {
                let next = parent[c as usize];
                parent[c as usize] = r;
                c = next;
            }
            r
        }
        for (x, y) in self.induced_edges(nu) {
            let rx = find(&mut parent, x);
            let ry = find(&mut parent, y);
            if rx == ry {
                return false;
            }
            parent[rx as usize] = ry;
        }
        true
    }
}

fn path_vertices_raw(a: u32, b: u32, j: u32) -> Vec<u32> {
    let mut path = Vec::with_capacity(b as usize + 1);
    path.push(HUB_U);
    for i in 1..b {
        path.push(2 + (i - 1) * a + (j - 1));
    }
    path.push(HUB_V);
    path
}

/// A set of (pattern vertex, host vertex) pairs, stored sorted and
/// duplicate-free so equal assignments compare equal.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Assignment {
    pairs: Vec<(u32, u32)>,
}

impl Assignment {
    /// The empty assignment.
    pub fn new() -> Self {
        Assignment { pairs: Vec::new() }
    }

    /// Canonicalizes a pair list (sorts, removes duplicates).
    pub fn from_pairs(mut pairs: Vec<(u32, u32)>) -> Self {
        pairs.sort_unstable();
        pairs.dedup();
        Assignment { pairs }
    }

    /// The pairs in sorted order.
    pub fn pairs(&self) -> &[(u32, u32)] {
        &self.pairs
    }

    /// Number of pairs.
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    /// Whether the assignment is empty.
    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Pattern-side projection χ_θ.
    pub fn pattern_side(&self) -> BTreeSet<u32> {
        self.pairs.iter().map(|&(w, _)| w).collect()
    }

    /// Host-side projection χ_G.
    pub fn host_side(&self) -> BTreeSet<u32> {
        self.pairs.iter().map(|&(_, z)| z).collect()
    }

    /// Host vertex paired with pattern vertex `w` (first match).
    pub fn host_of(&self, w: u32) -> Option<u32> {
        self.pairs.iter().find(|&&(p, _)| p == w).map(|&(_, z)| z)
    }

    /// Whether the exact pair is present.
    pub fn contains_pair(&self, pair: (u32, u32)) -> bool {
        self.pairs.binary_search(&pair).is_ok()
    }

    /// New assignment with one extra pair.
    pub fn with_pair(&self, pair: (u32, u32)) -> Self {
        let mut pairs = self.pairs.clone();
        if let Err(pos) = pairs.binary_search(&pair) {
            pairs.insert(pos, pair);
        }
        Assignment { pairs }
    }

    /// Union of two assignments.
    pub fn union(&self, other: &Assignment) -> Self {
        let mut pairs = self.pairs.clone();
        pairs.extend_from_slice(&other.pairs);
        Assignment::from_pairs(pairs)
    }

    /// Whether every pair of `self` appears in `other`.
    pub fn is_subset_of(&self, other: &Assignment) -> bool {
        self.pairs.iter().all(|p| other.contains_pair(*p))
    }
}

/// Outcome of [`validate_assignment`]: either valid, or the first violated
/// condition with a witnessing pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ValidityReport {
    /// Both conditions hold.
    Valid,
    /// Condition 1 fails: a pattern or host vertex appears in two pairs.
    RepeatedVertex {
        first: (u32, u32),
        second: (u32, u32),
    },
    /// Condition 2 fails: a pattern edge inside χ_θ maps to a non-edge.
    MissingHostEdge {
        pattern_edge: (u32, u32),
        host_pair: (u32, u32),
    },
}

impl ValidityReport {
    /// Whether the assignment was valid.
    pub fn is_valid(&self) -> bool {
        matches!(self, ValidityReport::Valid)
    }
}

impl std::fmt::Display for ValidityReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ValidityReport::Valid => write!(f, "valid"),
            ValidityReport::RepeatedVertex { first, second } => write!(
                f,
                "vertex repeated across pairs {first:?} and {second:?}"
            ),
            ValidityReport::MissingHostEdge {
                pattern_edge,
                host_pair,
            } => write!(
                f,
                "pattern edge {pattern_edge:?} maps to non-edge {host_pair:?}"
            ),
        }
    }
}

/// Checks the two validity conditions: no vertex on either side appears in
/// two pairs, and every pattern edge inside χ_θ maps to a host edge.
///
/// Vertices outside the pattern or host ranges are a domain error, not an
/// invalid report.
pub fn validate_assignment(
    pattern: &ThetaPattern,
    host: &Graph,
    chi: &Assignment,
) -> Result<ValidityReport> {
    for &(w, z) in chi.pairs() {
        if w >= pattern.vertex_count() {
            return Err(Error::Domain(format!(
                "pattern vertex {w} out of range (pattern has {})",
                pattern.vertex_count()
            )));
        }
        if z >= host.n() {
            return Err(Error::Domain(format!(
                "host vertex {z} out of range (host has {})",
                host.n()
            )));
        }
    }

    // Condition 1: injectivity on both sides. Pairs are sorted, so repeated
    // pattern vertices are adjacent; host repeats need a scan.
    for pair in chi.pairs().windows(2) {
        if pair[0].0 == pair[1].0 {
            return Ok(ValidityReport::RepeatedVertex {
                first: pair[0],
                second: pair[1],
            });
        }
    }
    let mut seen_hosts: std::collections::BTreeMap<u32, (u32, u32)> = Default::default();
    for &(w, z) in chi.pairs() {
        if let Some(&first) = seen_hosts.get(&z) {
            return Ok(ValidityReport::RepeatedVertex {
                first,
                second: (w, z),
            });
        }
        seen_hosts.insert(z, (w, z));
    }

    // Condition 2: pattern edges inside the pattern side map to host edges.
    let chi_theta = chi.pattern_side();
    for &(x, y) in pattern.graph().edges() {
        if chi_theta.contains(&x) && chi_theta.contains(&y) {
            let zx = chi.host_of(x).expect("x is in the pattern side");
            let zy = chi.host_of(y).expect("y is in the pattern side");
            if !host.has_edge(zx, zy) {
                return Ok(ValidityReport::MissingHostEdge {
                    pattern_edge: (x, y),
                    host_pair: (zx, zy),
                });
            }
        }
    }
    Ok(ValidityReport::Valid)
}

/// Projection of a valid assignment onto the host.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Projection {
    /// Pattern-side vertex set χ_θ.
    pub pattern_side: BTreeSet<u32>,
    /// Host-side vertex set χ_G.
    pub host_side: BTreeSet<u32>,
    /// The projection graph: vertex set χ_G (embedded in the host's vertex
    /// range), edges exactly the images of pattern edges inside χ_θ.
    pub host_graph: Graph,
    /// The image edge set, normalized.
    pub edges: BTreeSet<(u32, u32)>,
}

/// Projects a valid assignment: the host image of the induced pattern.
pub fn project(pattern: &ThetaPattern, host: &Graph, chi: &Assignment) -> Result<Projection> {
    let report = validate_assignment(pattern, host, chi)?;
    if !report.is_valid() {
        return Err(Error::Domain(format!("assignment not valid: {report}")));
    }
    let pattern_side = chi.pattern_side();
    let host_side = chi.host_side();
    let mut host_graph = Graph::new(host.n());
    let mut edges = BTreeSet::new();
    for (x, y) in pattern.induced_edges(&pattern_side) {
        let zx = chi.host_of(x).expect("x is assigned");
        let zy = chi.host_of(y).expect("y is assigned");
        let e = if zx < zy { (zx, zy) } else { (zy, zx) };
        if edges.insert(e) {
            host_graph.add_edge(e.0, e.1)?;
        }
    }
    Ok(Projection {
        pattern_side,
        host_side,
        host_graph,
        edges,
    })
}
