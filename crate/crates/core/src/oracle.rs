//! Brute-force ground truth, independent of the construction pipeline:
//! exhaustive theta-subgraph enumeration, exact extremal numbers by branch
//! and bound, container coverage audits, and the exponent bookkeeping for
//! random-host regimes.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rand_core::{RngCore, SeedableRng};

use crate::containers::ContainerSet;
use crate::error::{Error, Result};
use crate::graph::{two_density, Graph};
use crate::theta::ThetaPattern;

/// Largest host edge count representable in the bitmask searches.
const MAX_MASK_EDGES: usize = 128;
/// Seed for sampled coverage audits; fixed so audits are reproducible.
const AUDIT_SEED: u64 = 0xA0D1_7CA5;

/// All distinct theta subgraphs of a host, each recorded as its sorted edge
/// list. `truncated` marks an enumeration stopped at the cap.
#[derive(Debug, Clone)]
pub struct ThetaCopies {
    copies: Vec<Vec<(u32, u32)>>,
    truncated: bool,
}

impl ThetaCopies {
    pub fn copies(&self) -> &[Vec<(u32, u32)>] {
        &self.copies
    }

    pub fn len(&self) -> usize {
        self.copies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.copies.is_empty()
    }

    pub fn truncated(&self) -> bool {
        self.truncated
    }
}

/// Enumerates every unlabeled theta subgraph of `g` exactly once, by
/// depth-first embedding over pattern vertices in id order (hubs first, then
/// layer by layer, so each placement checks at least one host adjacency).
/// Distinct labeled embeddings of the same subgraph collapse through the
/// projected edge set. Stops with the `truncated` marker after `cap` copies.
pub fn enumerate_theta(g: &Graph, a: u32, b: u32, cap: usize) -> Result<ThetaCopies> {
    let pattern = ThetaPattern::new(a, b)?;
    let v = pattern.vertex_count() as usize;
    let mut earlier: Vec<Vec<u32>> = vec![Vec::new(); v];
    for &(x, y) in pattern.graph().edges() {
        earlier[y as usize].push(x);
    }
    let mut seen: BTreeSet<Vec<(u32, u32)>> = BTreeSet::new();
    let mut truncated = false;
    if v <= g.n() as usize {
        let mut image = vec![0u32; v];
        let mut used = vec![false; g.n() as usize];
        embed(
            g,
            &earlier,
            pattern.graph().edges(),
            0,
            &mut image,
            &mut used,
            cap,
            &mut seen,
            &mut truncated,
        );
    }
    Ok(ThetaCopies {
        copies: seen.into_iter().collect(),
        truncated,
    })
}

#[allow(clippy::too_many_arguments)]
fn embed(
    g: &Graph,
    earlier: &[Vec<u32>],
    pattern_edges: &[(u32, u32)],
    t: usize,
    image: &mut [u32],
    used: &mut [bool],
    cap: usize,
    seen: &mut BTreeSet<Vec<(u32, u32)>>,
    truncated: &mut bool,
) {
    if *truncated {
        return;
    }
    if t == image.len() {
        let mut edges: Vec<(u32, u32)> = pattern_edges
            .iter()
            .map(|&(x, y)| {
                let (hx, hy) = (image[x as usize], image[y as usize]);
                (hx.min(hy), hx.max(hy))
            })
            .collect();
        edges.sort_unstable();
        if !seen.contains(&edges) {
            if seen.len() == cap {
                *truncated = true;
                return;
            }
            seen.insert(edges);
        }
        return;
    }
    for h in 0..g.n() {
        if used[h as usize] {
            continue;
        }
        if earlier[t]
            .iter()
            .any(|&s| !g.has_edge(image[s as usize], h))
        {
            continue;
        }
        image[t] = h;
        used[h as usize] = true;
        embed(g, earlier, pattern_edges, t + 1, image, used, cap, seen, truncated);
        used[h as usize] = false;
        if *truncated {
            return;
        }
    }
}

/// Automorphism count of the theta pattern by brute force over all vertex
/// permutations, usable up to 8 pattern vertices.
pub fn automorphism_count(a: u32, b: u32) -> Result<u64> {
    let pattern = ThetaPattern::new(a, b)?;
    let v = pattern.vertex_count() as usize;
    if v > 8 {
        return Err(Error::InvalidParameter(format!(
            "automorphism brute force limited to 8 vertices, pattern has {v}"
        )));
    }
    let edges: BTreeSet<(u32, u32)> = pattern.graph().edges().iter().copied().collect();
    let mut perm: Vec<u32> = (0..v as u32).collect();
    let mut count = 0u64;
    permute(&mut perm, 0, &mut |p| {
        let ok = edges.iter().all(|&(x, y)| {
            let (ix, iy) = (p[x as usize], p[y as usize]);
            edges.contains(&(ix.min(iy), ix.max(iy)))
        });
        if ok {
            count += 1;
        }
    });
    Ok(count)
}

fn permute(perm: &mut Vec<u32>, k: usize, visit: &mut impl FnMut(&[u32])) {
    if k == perm.len() {
        visit(perm);
        return;
    }
    for i in k..perm.len() {
        perm.swap(k, i);
        permute(perm, k + 1, visit);
        perm.swap(k, i);
    }
}

fn sorted_edges(g: &Graph) -> Vec<(u32, u32)> {
    let mut edges = g.edges().to_vec();
    edges.sort_unstable();
    edges
}

fn copy_masks(g: &Graph, copies: &ThetaCopies) -> Result<(Vec<(u32, u32)>, Vec<u128>)> {
    let edges = sorted_edges(g);
    if edges.len() > MAX_MASK_EDGES {
        return Err(Error::InvalidParameter(format!(
            "host has {} edges, bitmask searches support at most {MAX_MASK_EDGES}",
            edges.len()
        )));
    }
    let index: BTreeMap<(u32, u32), usize> =
        edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let masks = copies
        .copies()
        .iter()
        .map(|copy| copy.iter().map(|e| 1u128 << index[e]).sum())
        .collect();
    Ok((edges, masks))
}

/// Maximum edge count of a theta-free subgraph, with the witness subgraph.
/// `optimal` is false when the node budget ran out first.
#[derive(Debug, Clone)]
pub struct ExtremalResult {
    pub max_edges: u64,
    pub witness: Vec<(u32, u32)>,
    pub optimal: bool,
    pub nodes: u64,
}

struct ExtremalSearch<'a> {
    copies: &'a [u128],
    edge_of: &'a [(u32, u32)],
    all: u128,
    degree_floor_caps: bool,
    path_pair_budget: u64,
    budget: u64,
    nodes: u64,
    aborted: bool,
    best: u32,
    best_mask: u128,
    kept_deg: Vec<u64>,
    avail_deg: Vec<u64>,
}

impl ExtremalSearch<'_> {
    /// Largest degree sum compatible with the per-vertex floors and caps and
    /// the path-count budget Σ_v C(d_v, 2) ≤ B, halved. Repeatedly lowering
    /// the largest degree is exchange-optimal because the marginal path cost
    /// d−1 grows with d. Returns None when the floors alone overspend.
    fn convexity_bound(&self) -> Option<u32> {
        let mut d = self.avail_deg.clone();
        let mut spent: u64 = d.iter().map(|&x| x * (x.saturating_sub(1)) / 2).sum();
        while spent > self.path_pair_budget {
            let mut pick = usize::MAX;
            for v in 0..d.len() {
                if d[v] > self.kept_deg[v] && (pick == usize::MAX || d[v] > d[pick]) {
                    pick = v;
                }
            }
            if pick == usize::MAX {
                return None;
            }
            spent -= d[pick] - 1;
            d[pick] -= 1;
        }
        Some((d.iter().sum::<u64>() / 2) as u32)
    }

    fn search(&mut self, kept: u128, dropped: u128, live: &[u32]) {
        self.nodes += 1;
        if self.nodes > self.budget {
            self.aborted = true;
            return;
        }
        let open = self.all & !kept & !dropped;
        let room = (kept | open).count_ones();
        if room <= self.best {
            return;
        }
        let mut next_live: Vec<u32> = Vec::with_capacity(live.len());
        let mut threat: Option<u128> = None;
        let mut threat_open = u32::MAX;
        let mut disjoint: u128 = 0;
        let mut disjoint_count: u32 = 0;
        for &ci in live {
            let copy = self.copies[ci as usize];
            if copy & dropped != 0 {
                continue;
            }
            next_live.push(ci);
            let open_part = copy & open;
            debug_assert!(open_part != 0, "live copy with no open edge");
            let open_in = open_part.count_ones();
            if open_in < threat_open {
                threat_open = open_in;
                threat = Some(copy);
            }
            if open_part & disjoint == 0 {
                disjoint |= open_part;
                disjoint_count += 1;
            }
        }
        let Some(copy) = threat else {
            self.best = room;
            self.best_mask = kept | open;
            return;
        };
        if room - disjoint_count <= self.best {
            return;
        }
        if self.degree_floor_caps {
            match self.convexity_bound() {
                Some(ub) if ub > self.best => {}
                _ => return,
            }
        }
        let mut branch_edges: Vec<(u32, usize)> = Vec::with_capacity(threat_open as usize);
        let mut rest = copy & open;
        while rest != 0 {
            let bit = rest & rest.wrapping_neg();
            let idx = bit.trailing_zeros() as usize;
            let kills = next_live
                .iter()
                .filter(|&&ci| self.copies[ci as usize] >> idx & 1 == 1)
                .count() as u32;
            branch_edges.push((kills, idx));
            rest &= rest - 1;
        }
        branch_edges.sort_by(|x, y| y.cmp(x));
        let mut kept_here: u128 = 0;
        let mut promoted: Vec<usize> = Vec::new();
        for &(_, idx) in &branch_edges {
            let bit = 1u128 << idx;
            let (x, y) = self.edge_of[idx];
            self.avail_deg[x as usize] -= 1;
            self.avail_deg[y as usize] -= 1;
            self.search(kept | kept_here, dropped | bit, &next_live);
            self.avail_deg[x as usize] += 1;
            self.avail_deg[y as usize] += 1;
            if self.aborted {
                break;
            }
            kept_here |= bit;
            self.kept_deg[x as usize] += 1;
            self.kept_deg[y as usize] += 1;
            promoted.push(idx);
        }
        for idx in promoted {
            let (x, y) = self.edge_of[idx];
            self.kept_deg[x as usize] -= 1;
            self.kept_deg[y as usize] -= 1;
        }
    }
}

/// Exact maximum number of edges in a theta-free subgraph of `g`, by branch
/// and bound over edge deletions: each node either satisfies every copy or
/// branches on the copy with the fewest undecided edges, partitioning on its
/// first dropped edge. Upper bounds come from an edge-disjoint copy packing
/// and, for two-layer patterns, the common-neighborhood convexity budget
/// Σ_v C(d_v, 2) ≤ (a−1)·C(n, 2). The witness is re-verified theta-free by
/// an independent enumeration before returning.
pub fn exact_ex(g: &Graph, a: u32, b: u32, budget: u64) -> Result<ExtremalResult> {
    let pattern = ThetaPattern::new(a, b)?;
    let e = g.edge_count() as u64;
    if u64::from(pattern.vertex_count()) > u64::from(g.n()) {
        return Ok(ExtremalResult {
            max_edges: e,
            witness: sorted_edges(g),
            optimal: true,
            nodes: 0,
        });
    }
    let copies = enumerate_theta(g, a, b, 2_000_000)?;
    if copies.truncated() {
        return Err(Error::Budget(format!(
            "host has more than {} theta copies",
            copies.len()
        )));
    }
    if copies.is_empty() {
        return Ok(ExtremalResult {
            max_edges: e,
            witness: sorted_edges(g),
            optimal: true,
            nodes: 0,
        });
    }
    let (edges, masks) = copy_masks(g, &copies)?;
    let all: u128 = if edges.len() == MAX_MASK_EDGES {
        u128::MAX
    } else {
        (1u128 << edges.len()) - 1
    };
    let mut greedy: u128 = 0;
    for i in 0..edges.len() {
        let candidate = greedy | (1u128 << i);
        if masks.iter().all(|&m| m & !candidate != 0) {
            greedy = candidate;
        }
    }
    let n = g.n() as u64;
    let mut search = ExtremalSearch {
        copies: &masks,
        edge_of: &edges,
        all,
        degree_floor_caps: b == 2,
        path_pair_budget: u64::from(a - 1) * (n * (n - 1) / 2),
        budget,
        nodes: 0,
        aborted: false,
        best: greedy.count_ones(),
        best_mask: greedy,
        kept_deg: vec![0; g.n() as usize],
        avail_deg: (0..g.n()).map(|v| g.degree(v) as u64).collect(),
    };
    let live: Vec<u32> = (0..masks.len() as u32).collect();
    search.search(0, 0, &live);
    let witness: Vec<(u32, u32)> = edges
        .iter()
        .enumerate()
        .filter(|(i, _)| search.best_mask >> i & 1 == 1)
        .map(|(_, &e)| e)
        .collect();
    let witness_graph = Graph::from_edges(g.n(), &witness)?;
    if !enumerate_theta(&witness_graph, a, b, 1)?.is_empty() {
        return Err(Error::Internal(
            "extremal witness contains a theta copy".into(),
        ));
    }
    Ok(ExtremalResult {
        max_edges: u64::from(search.best),
        witness,
        optimal: !search.aborted,
        nodes: search.nodes,
    })
}

/// Edge count left by the deletion heuristic: scan the enumerated copies,
/// removing the first surviving edge of each copy still fully present.
pub fn greedy_deletion_bound(g: &Graph, a: u32, b: u32) -> Result<u64> {
    let copies = enumerate_theta(g, a, b, 2_000_000)?;
    if copies.truncated() {
        return Err(Error::Budget("too many copies for the deletion scan".into()));
    }
    let (_, masks) = copy_masks(g, &copies)?;
    let mut deleted: u128 = 0;
    for &m in &masks {
        if m & deleted == 0 {
            deleted |= m & m.wrapping_neg();
        }
    }
    Ok(g.edge_count() as u64 - u64::from(deleted.count_ones()))
}

/// Edge count reached by keeping each edge in sorted order unless it
/// completes a theta copy.
pub fn greedy_keep_bound(g: &Graph, a: u32, b: u32) -> Result<u64> {
    let copies = enumerate_theta(g, a, b, 2_000_000)?;
    if copies.truncated() {
        return Err(Error::Budget("too many copies for the keep scan".into()));
    }
    let (edges, masks) = copy_masks(g, &copies)?;
    let mut kept: u128 = 0;
    for i in 0..edges.len() {
        let candidate = kept | (1u128 << i);
        if masks.iter().all(|&m| m & !candidate != 0) {
            kept = candidate;
        }
    }
    Ok(u64::from(kept.count_ones()))
}

/// Outcome of a container coverage audit over theta-free subgraphs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoverVerdict {
    Covered { checked: u64, exhaustive: bool },
    Uncovered { witness: Vec<(u32, u32)> },
}

/// Audits that every theta-free subgraph of `g` lies inside some container.
/// Container vertices are indices into the sorted edge list of `g`.
/// Exhaustive over all edge subsets when `g` has at most 20 edges; otherwise
/// `sample_budget` random subsets are pruned to theta-free and tested.
pub fn verify_cover(
    g: &Graph,
    a: u32,
    b: u32,
    containers: &ContainerSet,
    sample_budget: u64,
) -> Result<CoverVerdict> {
    if containers.universe() as usize != g.edge_count() {
        return Err(Error::InvalidParameter(format!(
            "container universe {} does not match host edge count {}",
            containers.universe(),
            g.edge_count()
        )));
    }
    let copies = enumerate_theta(g, a, b, 2_000_000)?;
    if copies.truncated() {
        return Err(Error::Budget("too many copies for a coverage audit".into()));
    }
    let (edges, masks) = copy_masks(g, &copies)?;
    let container_masks: Vec<u128> = containers
        .containers()
        .iter()
        .map(|c| c.iter().map(|&i| 1u128 << i).sum())
        .collect();
    let witness_of = |mask: u128| -> Vec<(u32, u32)> {
        edges
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &e)| e)
            .collect()
    };
    let theta_free = |mask: u128| masks.iter().all(|&m| m & !mask != 0);
    let covered = |mask: u128| container_masks.iter().any(|&c| mask & !c == 0);
    if edges.len() <= 20 {
        let mut checked = 0u64;
        for mask in 0..(1u128 << edges.len()) {
            if !theta_free(mask) {
                continue;
            }
            checked += 1;
            if !covered(mask) {
                return Ok(CoverVerdict::Uncovered {
                    witness: witness_of(mask),
                });
            }
        }
        return Ok(CoverVerdict::Covered {
            checked,
            exhaustive: true,
        });
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(AUDIT_SEED);
    for _ in 0..sample_budget {
        let mut mask: u128 = 0;
        for i in 0..edges.len() {
            if rng.next_u32() & 1 == 1 {
                mask |= 1u128 << i;
            }
        }
        while let Some(&m) = masks.iter().find(|&&m| m & !mask == 0) {
            let inside = m & mask;
            let high = 127 - inside.leading_zeros();
            mask &= !(1u128 << high);
        }
        if !covered(mask) {
            return Ok(CoverVerdict::Uncovered {
                witness: witness_of(mask),
            });
        }
    }
    Ok(CoverVerdict::Covered {
        checked: sample_budget,
        exhaustive: false,
    })
}

/// The exact exponents governing a theta pattern on random hosts: the
/// two-density and its reciprocal, the thresholds where copy counts change
/// regime, and the copy-count exponents in each regime.
#[derive(Debug, Clone)]
pub struct ExponentTable {
    pub a: u32,
    pub b: u32,
    /// max over subgraphs of (e−1)/(v−2); the full pattern attains it.
    pub m2: BigRational,
    pub inv_m2: BigRational,
    /// Exponent of n in the sparse/dense threshold p ~ n^{-1/m2}.
    pub p2_exponent: BigRational,
    /// Exponent of n in the supersaturation threshold; carries (log n)^{2b}.
    pub p1_exponent: BigRational,
    pub p1_log_power: u32,
    /// Copy count ~ p^{1/b} n^{1+1/b} above the threshold.
    pub dense_count_p_exponent: BigRational,
    pub dense_count_n_exponent: BigRational,
    /// Copy count ~ n^{2 - a(b-1)/(ab-1)} (log n)^{O(1)} below it.
    pub sparse_count_n_exponent: BigRational,
    pub sparse_count_has_log: bool,
}

fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Builds the exponent table for θ_{a,b}, cross-checking the two-density
/// against the graph-theoretic maximization whenever the pattern is small
/// enough to maximize exhaustively.
pub fn exponent_table(a: u32, b: u32) -> Result<ExponentTable> {
    if a < 2 || b < 2 {
        return Err(Error::InvalidParameter(format!(
            "exponent table needs a, b >= 2, got a={a} b={b}"
        )));
    }
    let pattern = ThetaPattern::new(a, b)?;
    let ab = i64::from(a) * i64::from(b);
    let m2 = ratio(ab - 1, i64::from(a) * i64::from(b - 1));
    if pattern.vertex_count() <= 24 {
        let checked = two_density(pattern.graph(), false)?.value;
        if checked != m2 {
            return Err(Error::Internal(format!(
                "two-density mismatch: formula {m2}, maximization {checked}"
            )));
        }
    }
    let inv_m2 = m2.recip();
    Ok(ExponentTable {
        a,
        b,
        m2,
        inv_m2,
        p2_exponent: ratio(-(i64::from(a) * i64::from(b - 1)), ab - 1),
        p1_exponent: ratio(-i64::from(b - 1), ab - 1),
        p1_log_power: 2 * b,
        dense_count_p_exponent: ratio(1, i64::from(b)),
        dense_count_n_exponent: BigRational::one() + ratio(1, i64::from(b)),
        sparse_count_n_exponent: ratio(2, 1) - ratio(i64::from(a) * i64::from(b - 1), ab - 1),
        sparse_count_has_log: true,
    })
}
