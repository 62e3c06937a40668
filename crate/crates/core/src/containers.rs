//! Desk-scale hypergraph containers: the codegree functional, a max-degree
//! fingerprint construction whose guarantees are verified per run, the
//! round iteration that thins a host graph below a target density, and the
//! union-bound evaluator for random hosts.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand_core::{RngCore, SeedableRng};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::Value;
use crate::graph::Graph;

/// Largest uniformity for which exact subset enumeration stays cheap.
const MAX_UNIFORMITY: u32 = 16;
/// Query sample size when the vertex universe is too large to enumerate.
const SAMPLED_QUERIES: usize = 192;
/// Seed for the sampled-query fallback; fixed so builds are reproducible.
const SAMPLE_SEED: u64 = 0x5EED_C0DE;

/// An `r`-uniform hypergraph over vertices `0..n`. Hyperedges are stored as
/// sorted vertex lists; duplicates collapse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniformHypergraph {
    n: u32,
    r: u32,
    hyperedges: Vec<Vec<u32>>,
}

impl UniformHypergraph {
    pub fn new(n: u32, r: u32, hyperedges: &[Vec<u32>]) -> Result<Self> {
        if r < 2 {
            return Err(Error::InvalidParameter(format!(
                "uniformity must be at least 2, got {r}"
            )));
        }
        let mut seen: BTreeSet<Vec<u32>> = BTreeSet::new();
        for edge in hyperedges {
            let set: BTreeSet<u32> = edge.iter().copied().collect();
            if edge.len() != r as usize || set.len() != r as usize {
                return Err(Error::InvalidParameter(format!(
                    "hyperedge {edge:?} is not a set of {r} distinct vertices"
                )));
            }
            if let Some(&v) = set.iter().next_back() {
                if v >= n {
                    return Err(Error::InvalidParameter(format!(
                        "hyperedge vertex {v} outside universe 0..{n}"
                    )));
                }
            }
            seen.insert(set.into_iter().collect());
        }
        Ok(Self {
            n,
            r,
            hyperedges: seen.into_iter().collect(),
        })
    }

    pub fn vertex_count(&self) -> u32 {
        self.n
    }

    pub fn uniformity(&self) -> u32 {
        self.r
    }

    pub fn hyperedges(&self) -> &[Vec<u32>] {
        &self.hyperedges
    }

    pub fn edge_count(&self) -> usize {
        self.hyperedges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hyperedges.is_empty()
    }

    /// True when `set` contains no hyperedge entirely.
    pub fn is_independent(&self, set: &BTreeSet<u32>) -> bool {
        self.hyperedges
            .iter()
            .all(|edge| !edge.iter().all(|v| set.contains(v)))
    }
}

/// Samples `count` distinct r-sets on `0..n` by seeded rejection; identical
/// seeds give identical hypergraphs.
pub fn sample_uniform_hypergraph(
    n: u32,
    r: u32,
    count: usize,
    seed: u64,
) -> Result<UniformHypergraph> {
    if r < 2 || r > n {
        return Err(Error::InvalidParameter(format!(
            "need 2 <= r <= n, got r = {r}, n = {n}"
        )));
    }
    let mut available: u128 = 1;
    for i in 0..u128::from(r) {
        available = available
            .checked_mul(u128::from(n) - i)
            .ok_or_else(|| Error::InvalidParameter("universe too large to sample".into()))?
            / (i + 1);
    }
    if count as u128 > available {
        return Err(Error::InvalidParameter(format!(
            "cannot draw {count} distinct {r}-sets from {n} vertices"
        )));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut seen: BTreeSet<Vec<u32>> = BTreeSet::new();
    while seen.len() < count {
        let mut set: BTreeSet<u32> = BTreeSet::new();
        while set.len() < r as usize {
            set.insert(rng.next_u32() % n);
        }
        seen.insert(set.into_iter().collect());
    }
    UniformHypergraph::new(n, r, &seen.into_iter().collect::<Vec<_>>())
}

/// Smallest power-of-two τ whose degree functional fits under `delta`; 1 for
/// an empty hypergraph.
pub fn fitting_tau(h: &UniformHypergraph, delta: &BigRational) -> Result<BigRational> {
    if !delta.is_positive() {
        return Err(Error::InvalidParameter(format!(
            "delta must be positive, got {delta}"
        )));
    }
    let mut tau = BigRational::one();
    if h.is_empty() {
        return Ok(tau);
    }
    while codegree_delta(h, &tau)? > *delta {
        tau *= BigRational::from_integer(2.into());
    }
    Ok(tau)
}

/// The degree functional (1/e(H)) Σ_{j=2..r} τ^{-(j-1)} Σ_v d^(j)(v), where
/// d^(j)(v) is the largest degree of a j-subset through v. Exact rational.
pub fn codegree_delta(h: &UniformHypergraph, tau: &BigRational) -> Result<BigRational> {
    if h.is_empty() {
        return Err(Error::Domain(
            "degree functional of an empty hypergraph".into(),
        ));
    }
    if !tau.is_positive() {
        return Err(Error::InvalidParameter(format!("tau must be positive, got {tau}")));
    }
    if h.r > MAX_UNIFORMITY {
        return Err(Error::InvalidParameter(format!(
            "uniformity {} exceeds exact-enumeration limit {MAX_UNIFORMITY}",
            h.r
        )));
    }
    let r = h.r as usize;
    let mut subset_degree: HashMap<Vec<u32>, u64> = HashMap::new();
    for edge in &h.hyperedges {
        for mask in 1u32..(1 << r) {
            if mask.count_ones() < 2 {
                continue;
            }
            let subset: Vec<u32> = (0..r)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| edge[i])
                .collect();
            *subset_degree.entry(subset).or_insert(0) += 1;
        }
    }
    let mut dmax = vec![vec![0u64; h.n as usize]; r + 1];
    for (subset, d) in &subset_degree {
        for &v in subset {
            let cell = &mut dmax[subset.len()][v as usize];
            *cell = (*cell).max(*d);
        }
    }
    let inv_tau = tau.recip();
    let mut weight = inv_tau.clone();
    let mut total = BigRational::zero();
    for row in dmax.iter().take(r + 1).skip(2) {
        let s: u64 = row.iter().sum();
        total += BigRational::from_integer(BigInt::from(s)) * &weight;
        weight *= &inv_tau;
    }
    Ok(total / BigRational::from_integer(BigInt::from(h.edge_count() as u64)))
}

/// Outcome of one fingerprint/container assignment.
struct ScytheRun {
    fingerprint: BTreeSet<u32>,
    container: BTreeSet<u32>,
    stalled: bool,
}

/// Max-degree fingerprint construction. Repeatedly inspect the highest-degree
/// vertex of the surviving partial hyperedges (ties to the smallest id): a
/// member goes into the fingerprint and disappears from the partial edges, a
/// non-member is excluded together with every hyperedge through it. A partial
/// edge reduced to a single vertex forces that vertex out (its other vertices
/// are all fingerprinted, so membership would complete a hyperedge). Stops
/// once at most `hyper_stop` hyperedges avoid the excluded set and at least
/// `exclude_goal` vertices are excluded.
///
/// Every step is determined by the membership answers along the way, so
/// replaying with the produced fingerprint as the membership set reproduces
/// the same container; that replay is what makes the fingerprint map
/// well-defined.
fn scythe(
    h: &UniformHypergraph,
    hyper_stop: u64,
    exclude_goal: u64,
    member: &BTreeSet<u32>,
) -> ScytheRun {
    let n = h.n as usize;
    let e0 = h.edge_count();
    let mut partial: Vec<Vec<u32>> = h.hyperedges.clone();
    let mut alive = vec![true; e0];
    let mut excluded = vec![false; n];
    let mut live = e0 as u64;
    let mut excluded_count = 0u64;
    let mut fingerprint = BTreeSet::new();
    loop {
        if live <= hyper_stop && excluded_count >= exclude_goal {
            break;
        }
        let forced = partial
            .iter()
            .zip(&alive)
            .filter(|(p, &a)| a && p.len() == 1)
            .map(|(p, _)| p[0])
            .min();
        if let Some(x) = forced {
            excluded[x as usize] = true;
            excluded_count += 1;
            for (p, a) in partial.iter().zip(alive.iter_mut()) {
                if *a && p.contains(&x) {
                    *a = false;
                    live -= 1;
                }
            }
            continue;
        }
        let mut deg = vec![0u64; n];
        for (p, &a) in partial.iter().zip(&alive) {
            if a {
                for &v in p {
                    deg[v as usize] += 1;
                }
            }
        }
        let pick = (0..n)
            .filter(|&v| deg[v] > 0)
            .max_by_key(|&v| (deg[v], std::cmp::Reverse(v)));
        let Some(u) = pick else {
            break;
        };
        let u32u = u as u32;
        if member.contains(&u32u) {
            fingerprint.insert(u32u);
            for (p, &a) in partial.iter_mut().zip(&alive) {
                if a {
                    p.retain(|&v| v != u32u);
                }
            }
        } else {
            excluded[u] = true;
            excluded_count += 1;
            for (p, a) in partial.iter().zip(alive.iter_mut()) {
                if *a && p.contains(&u32u) {
                    *a = false;
                    live -= 1;
                }
            }
        }
    }
    let stalled = !(live <= hyper_stop && excluded_count >= exclude_goal);
    let container = (0..n)
        .filter(|&v| !excluded[v])
        .map(|v| v as u32)
        .collect();
    ScytheRun {
        fingerprint,
        container,
        stalled,
    }
}

/// Containers plus the fingerprint map that routes each independent set to
/// its container. Guarantees are verified during construction: coverage and
/// the hyperedge-loss fraction exhaustively when the universe has at most 20
/// vertices, on sampled queries otherwise.
#[derive(Debug, Clone)]
pub struct ContainerSet {
    n: u32,
    tau: BigRational,
    delta: BigRational,
    containers: Vec<BTreeSet<u32>>,
    fingerprints: BTreeMap<Vec<u32>, usize>,
    codegree_ok: bool,
    fingerprint_bound_ok: bool,
    exhaustive: bool,
}

impl ContainerSet {
    pub fn universe(&self) -> u32 {
        self.n
    }

    pub fn tau(&self) -> &BigRational {
        &self.tau
    }

    pub fn delta(&self) -> &BigRational {
        &self.delta
    }

    pub fn containers(&self) -> &[BTreeSet<u32>] {
        &self.containers
    }

    pub fn len(&self) -> usize {
        self.containers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.containers.is_empty()
    }

    /// Whether the degree functional stayed within `delta` at the chosen tau.
    pub fn codegree_ok(&self) -> bool {
        self.codegree_ok
    }

    /// Whether every emitted fingerprint satisfied |T| ≤ τ·n/δ.
    pub fn fingerprint_bound_ok(&self) -> bool {
        self.fingerprint_bound_ok
    }

    /// Whether every independent set was enumerated during verification.
    pub fn exhaustive(&self) -> bool {
        self.exhaustive
    }

    pub fn covers(&self, set: &BTreeSet<u32>) -> bool {
        self.containers.iter().any(|c| set.is_subset(c))
    }

    pub fn lookup(&self, fingerprint: &BTreeSet<u32>) -> Option<&BTreeSet<u32>> {
        let key: Vec<u32> = fingerprint.iter().copied().collect();
        self.fingerprints.get(&key).map(|&i| &self.containers[i])
    }

    pub fn fingerprints(&self) -> impl Iterator<Item = (&Vec<u32>, &BTreeSet<u32>)> {
        self.fingerprints
            .iter()
            .map(|(t, &i)| (t, &self.containers[i]))
    }
}

fn independent_sets(h: &UniformHypergraph) -> Vec<BTreeSet<u32>> {
    let n = h.n as usize;
    let r = h.r as usize;
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, edge) in h.hyperedges.iter().enumerate() {
        for &v in edge {
            incident[v as usize].push(i);
        }
    }
    let mut chosen = vec![0usize; h.edge_count()];
    let mut current: Vec<u32> = Vec::new();
    let mut out = Vec::new();
    fn rec(
        v: usize,
        n: usize,
        r: usize,
        incident: &[Vec<usize>],
        chosen: &mut [usize],
        current: &mut Vec<u32>,
        out: &mut Vec<BTreeSet<u32>>,
    ) {
        if v == n {
            out.push(current.iter().copied().collect());
            return;
        }
        rec(v + 1, n, r, incident, chosen, current, out);
        if incident[v].iter().any(|&e| chosen[e] + 1 == r) {
            return;
        }
        for &e in &incident[v] {
            chosen[e] += 1;
        }
        current.push(v as u32);
        rec(v + 1, n, r, incident, chosen, current, out);
        current.pop();
        for &e in &incident[v] {
            chosen[e] -= 1;
        }
    }
    rec(0, n, r, &incident, &mut chosen, &mut current, &mut out);
    out
}

fn sampled_queries(h: &UniformHypergraph) -> Vec<BTreeSet<u32>> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(SAMPLE_SEED);
    let mut seen: BTreeSet<BTreeSet<u32>> = BTreeSet::new();
    seen.insert(BTreeSet::new());
    while seen.len() < SAMPLED_QUERIES {
        let mut set: BTreeSet<u32> = (0..h.n).filter(|_| rng.next_u32() & 1 == 1).collect();
        loop {
            let contained = h
                .hyperedges
                .iter()
                .find(|edge| edge.iter().all(|v| set.contains(v)));
            match contained {
                Some(edge) => {
                    let drop = *edge.iter().max().expect("hyperedges are non-empty");
                    set.remove(&drop);
                }
                None => break,
            }
        }
        seen.insert(set);
    }
    seen.into_iter().collect()
}

fn hyper_stop_threshold(edge_count: usize, delta: &BigRational) -> u64 {
    let e0 = BigInt::from(edge_count as u64);
    let keep = (BigRational::one() - delta) * BigRational::from_integer(e0);
    keep.floor()
        .to_integer()
        .to_u64()
        .expect("loss threshold fits u64")
}

/// Builds containers for every independent set of `h` via the max-degree
/// fingerprint construction, then verifies the advertised guarantees:
/// fingerprint-replay determinism, coverage, the fingerprint size bound
/// (recorded in a flag), and the per-container hyperedge loss (hard error).
pub fn build_containers(
    h: &UniformHypergraph,
    tau: &BigRational,
    delta: &BigRational,
) -> Result<ContainerSet> {
    if !tau.is_positive() {
        return Err(Error::InvalidParameter(format!("tau must be positive, got {tau}")));
    }
    if !delta.is_positive() || delta > &BigRational::one() {
        return Err(Error::InvalidParameter(format!(
            "delta must lie in (0, 1], got {delta}"
        )));
    }
    let codegree_ok = if h.is_empty() {
        true
    } else {
        codegree_delta(h, tau)? <= *delta
    };
    let hyper_stop = hyper_stop_threshold(h.edge_count(), delta);
    let exhaustive = h.n <= 20;
    let queries = if exhaustive {
        independent_sets(h)
    } else {
        sampled_queries(h)
    };
    let fp_cap = tau * BigRational::from_integer(BigInt::from(h.n)) / delta;
    let replay_checks = if queries.len() <= 4096 { usize::MAX } else { 512 };

    let mut containers: Vec<BTreeSet<u32>> = Vec::new();
    let mut container_index: BTreeMap<BTreeSet<u32>, usize> = BTreeMap::new();
    let mut fingerprints: BTreeMap<Vec<u32>, usize> = BTreeMap::new();
    let mut fingerprint_bound_ok = true;
    for (qi, set) in queries.iter().enumerate() {
        let run = scythe(h, hyper_stop, 0, set);
        if run.stalled {
            return Err(Error::Internal(
                "container construction stalled before reaching the loss target".into(),
            ));
        }
        if !run.fingerprint.is_subset(set) || !set.is_subset(&run.container) {
            return Err(Error::Internal(
                "fingerprint/container assignment broke containment".into(),
            ));
        }
        if qi < replay_checks {
            let replay = scythe(h, hyper_stop, 0, &run.fingerprint);
            if replay.fingerprint != run.fingerprint || replay.container != run.container {
                return Err(Error::Internal(
                    "fingerprint replay produced a different container".into(),
                ));
            }
        }
        let size = BigRational::from_integer(BigInt::from(run.fingerprint.len() as u64));
        if size > fp_cap {
            fingerprint_bound_ok = false;
        }
        let idx = match container_index.get(&run.container) {
            Some(&i) => i,
            None => {
                containers.push(run.container.clone());
                container_index.insert(run.container.clone(), containers.len() - 1);
                containers.len() - 1
            }
        };
        let key: Vec<u32> = run.fingerprint.iter().copied().collect();
        if let Some(&prev) = fingerprints.get(&key) {
            if prev != idx {
                return Err(Error::Internal(
                    "one fingerprint mapped to two containers".into(),
                ));
            }
        } else {
            fingerprints.insert(key, idx);
        }
    }
    for c in &containers {
        let inside = h
            .hyperedges
            .iter()
            .filter(|edge| edge.iter().all(|v| c.contains(v)))
            .count() as u64;
        if inside > hyper_stop {
            return Err(Error::Internal(format!(
                "container keeps {inside} hyperedges, allowed {hyper_stop}"
            )));
        }
    }
    Ok(ContainerSet {
        n: h.n,
        tau: tau.clone(),
        delta: delta.clone(),
        containers,
        fingerprints,
        codegree_ok,
        fingerprint_bound_ok,
        exhaustive,
    })
}

/// Shape constants of the forbidden graph, passed explicitly so the round
/// iteration stays generic: the density exponent α and the vertex/edge
/// counts that enter the fingerprint and tau rules.
#[derive(Debug, Clone)]
pub struct PatternDims {
    alpha: BigRational,
    vertex_count: u32,
    edge_count: u32,
}

impl PatternDims {
    pub fn new(alpha: BigRational, vertex_count: u32, edge_count: u32) -> Result<Self> {
        if alpha <= BigRational::one() || alpha >= BigRational::from_integer(BigInt::from(2)) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie strictly between 1 and 2, got {alpha}"
            )));
        }
        if vertex_count < 2 || edge_count < 2 {
            return Err(Error::InvalidParameter(format!(
                "pattern needs at least 2 vertices and 2 edges, got {vertex_count}/{edge_count}"
            )));
        }
        Ok(Self {
            alpha,
            vertex_count,
            edge_count,
        })
    }

    pub fn alpha(&self) -> &BigRational {
        &self.alpha
    }

    pub fn vertex_count(&self) -> u32 {
        self.vertex_count
    }

    pub fn edge_count(&self) -> u32 {
        self.edge_count
    }

    /// (α−1)/(2−α), the exponent trading density for fingerprint budget.
    fn density_exponent(&self) -> BigRational {
        let one = BigRational::one();
        let two = BigRational::from_integer(BigInt::from(2));
        (&self.alpha - &one) / (&two - &self.alpha)
    }

    /// α − 2 + (v−2)/(e−1), the exponent of the sparse-side threshold.
    fn threshold_exponent(&self) -> BigRational {
        let two = BigRational::from_integer(BigInt::from(2));
        let v2 = BigRational::from_integer(BigInt::from(self.vertex_count - 2));
        let e1 = BigRational::from_integer(BigInt::from(self.edge_count - 1));
        &self.alpha - &two + v2 / e1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum IterationStop {
    /// The host reached the target density.
    Completed,
    /// The hyperedge source returned an empty family mid-iteration.
    SourceExhausted { round: u32 },
    /// The fingerprint construction ran out of hyperedges before meeting
    /// both loss targets.
    Stalled { round: u32 },
}

#[derive(Debug, Clone, Serialize)]
pub struct RoundRecord {
    pub round: u32,
    pub edges_before: u64,
    pub k_approx: f64,
    pub tau: String,
    pub mu_cap: u64,
    pub codegree_ok: bool,
    pub hyperedge_count: u64,
    pub fingerprint: Vec<(u32, u32)>,
    pub container: Vec<(u32, u32)>,
    pub edges_after: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct IterationRecord {
    pub independent: Vec<(u32, u32)>,
    pub rounds: Vec<RoundRecord>,
    pub final_graph: Vec<(u32, u32)>,
    pub stop: IterationStop,
}

impl IterationRecord {
    /// The fingerprint tuple (T_1, …, T_m) identifying this record's chain.
    pub fn fingerprint_chain(&self) -> Vec<Vec<(u32, u32)>> {
        self.rounds.iter().map(|r| r.fingerprint.clone()).collect()
    }

    pub fn fingerprint_union(&self) -> BTreeSet<(u32, u32)> {
        self.rounds
            .iter()
            .flat_map(|r| r.fingerprint.iter().copied())
            .collect()
    }

    pub fn fingerprint_edges(&self) -> u64 {
        self.rounds.iter().map(|r| r.fingerprint.len() as u64).sum()
    }

    /// Union fingerprints ⊆ independent ⊆ union ∪ final graph.
    pub fn sandwich_holds(&self) -> bool {
        let union = self.fingerprint_union();
        let independent: BTreeSet<(u32, u32)> = self.independent.iter().copied().collect();
        let final_set: BTreeSet<(u32, u32)> = self.final_graph.iter().copied().collect();
        union.is_subset(&independent)
            && independent
                .iter()
                .all(|e| union.contains(e) || final_set.contains(e))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("iteration record serializes")
    }
}

#[derive(Debug, Clone)]
pub struct ContainerIteration {
    pub n: u32,
    pub epsilon: BigRational,
    pub delta: BigRational,
    pub round_cap: u32,
    pub records: Vec<IterationRecord>,
}

/// Edge statistics of one distinct fingerprint chain, the inputs to the
/// union-bound evaluator.
#[derive(Debug, Clone, Serialize)]
pub struct ChainStat {
    pub fingerprint_edges: u64,
    pub final_edges: u64,
}

impl ContainerIteration {
    /// One entry per distinct fingerprint chain.
    pub fn chain_stats(&self) -> Vec<ChainStat> {
        let mut seen: BTreeMap<Vec<Vec<(u32, u32)>>, ChainStat> = BTreeMap::new();
        for rec in &self.records {
            seen.entry(rec.fingerprint_chain()).or_insert(ChainStat {
                fingerprint_edges: rec.fingerprint_edges(),
                final_edges: rec.final_graph.len() as u64,
            });
        }
        seen.into_values().collect()
    }

    /// Equal fingerprint chains must determine equal final graphs.
    pub fn chains_consistent(&self) -> bool {
        let mut seen: BTreeMap<Vec<Vec<(u32, u32)>>, &[(u32, u32)]> = BTreeMap::new();
        for rec in &self.records {
            match seen.get(&rec.fingerprint_chain()) {
                Some(final_graph) => {
                    if *final_graph != rec.final_graph.as_slice() {
                        return false;
                    }
                }
                None => {
                    seen.insert(rec.fingerprint_chain(), &rec.final_graph);
                }
            }
        }
        true
    }
}

fn exact_fifth_root(value: &BigRational) -> Option<BigRational> {
    if !value.is_positive() {
        return None;
    }
    let num = value.numer().magnitude();
    let den = value.denom().magnitude();
    let rn = num.nth_root(5);
    let rd = den.nth_root(5);
    if rn.pow(5) == *num && rd.pow(5) == *den {
        Some(BigRational::new(
            BigInt::from(rn),
            BigInt::from(rd),
        ))
    } else {
        None
    }
}

/// Largest power of two not exceeding `v`, as an exact rational.
fn dyadic_floor(v: &Value) -> BigRational {
    let mut d = v.log2_approx().floor() as i64;
    d = d.clamp(-512, 512);
    let pow2 = |e: i64| Value::from_u64(2).expect("2 is valid").pow_i64(e);
    while pow2(d + 1).cmp_value(v) != std::cmp::Ordering::Greater {
        d += 1;
    }
    while pow2(d).cmp_value(v) == std::cmp::Ordering::Greater {
        d -= 1;
    }
    if d >= 0 {
        BigRational::from_integer(BigInt::from(2u32).pow(d as u32))
    } else {
        BigRational::new(BigInt::one(), BigInt::from(2u32).pow((-d) as u32))
    }
}

fn ceil_fraction(num: &BigRational) -> u64 {
    num.ceil()
        .to_integer()
        .to_u64()
        .expect("ceiling fits u64")
}

/// Iterated container construction on hosts over `n` vertices: starting from
/// the complete graph, each round asks `source` for a hyperedge family on the
/// current host's edges, runs the fingerprint construction with the
/// density-derived tau, and continues on container-minus-fingerprint until
/// the edge count falls to `k_target`·n^α. Each queried edge set must be
/// independent in every round's family (true for any F-free graph when the
/// source enumerates F-copies). `epsilon` must be a perfect fifth power; its
/// fifth root is the hyperedge-loss fraction per round.
pub fn iterate_containers(
    n: u32,
    source: &mut dyn FnMut(&Graph) -> Result<UniformHypergraph>,
    k_target: &BigRational,
    epsilon: &BigRational,
    dims: &PatternDims,
    queries: &[BTreeSet<(u32, u32)>],
) -> Result<ContainerIteration> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need n ≥ 2, got {n}")));
    }
    if !k_target.is_positive() {
        return Err(Error::InvalidParameter(format!(
            "k_target must be positive, got {k_target}"
        )));
    }
    if !epsilon.is_positive() || epsilon >= &BigRational::one() {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    let delta = exact_fifth_root(epsilon).ok_or_else(|| {
        Error::InvalidParameter(format!(
            "epsilon must be a perfect fifth power of a rational so the loss \
             fraction stays exact; got {epsilon}"
        ))
    })?;
    let n_alpha = Value::from_u64(n as u64)?.pow(dims.alpha());
    let threshold = Value::from_rational(k_target)?.mul(&n_alpha);
    let complete = Graph::complete(n);
    let e0 = complete.edge_count() as u64;
    let one_minus_eps = BigRational::one() - epsilon;
    let round_cap = {
        let mut cap = 1u32;
        if e0 > 0 {
            let factor = Value::from_rational(&one_minus_eps)?;
            let mut worst = Value::from_u64(e0)?;
            while threshold.cmp_value(&worst) == std::cmp::Ordering::Less {
                worst = worst.mul(&factor);
                cap += 1;
                if cap > 100_000 {
                    return Err(Error::InvalidParameter(
                        "k_target too small: round bound astronomical".into(),
                    ));
                }
            }
        }
        cap
    };
    let a1 = dims.density_exponent();
    let beta = dims.threshold_exponent();
    let delta4 = Value::from_rational(&(delta.clone() * &delta * &delta * &delta))?;
    let n_value = Value::from_u64(n as u64)?;
    let inv_eps = Value::from_rational(epsilon)?.recip();

    let mut source_cache: BTreeMap<Vec<(u32, u32)>, UniformHypergraph> = BTreeMap::new();
    let mut records = Vec::new();
    for query in queries {
        let mut sorted = query.iter().copied().collect::<Vec<_>>();
        sorted.sort_unstable();
        if sorted.iter().any(|&(x, y)| x >= n || y >= n || x == y) {
            return Err(Error::InvalidParameter(
                "queried edge set leaves the vertex range".into(),
            ));
        }
        let independent: Vec<(u32, u32)> = sorted;
        let mut current: Vec<(u32, u32)> = complete.edges().to_vec();
        current.sort_unstable();
        let mut rounds = Vec::new();
        let mut stop = IterationStop::Completed;
        loop {
            let e = current.len() as u64;
            if threshold.cmp_integer(&BigUint::from(e)) != std::cmp::Ordering::Less {
                break;
            }
            let round = rounds.len() as u32;
            if round >= round_cap {
                return Err(Error::Internal(format!(
                    "round count exceeded the shrinkage bound {round_cap}"
                )));
            }
            let h = match source_cache.get(&current) {
                Some(h) => h.clone(),
                None => {
                    let g = Graph::from_edges(n, &current)?;
                    let h = source(&g)?;
                    source_cache.insert(current.clone(), h.clone());
                    h
                }
            };
            if h.vertex_count() as usize != current.len() || h.uniformity() != dims.edge_count() {
                return Err(Error::InvalidParameter(format!(
                    "source produced a {}-uniform family on {} vertices; expected {} on {}",
                    h.uniformity(),
                    h.vertex_count(),
                    dims.edge_count(),
                    current.len()
                )));
            }
            if h.is_empty() {
                stop = IterationStop::SourceExhausted { round };
                break;
            }
            let k = Value::from_u64(e)?.div(&n_alpha);
            let min_scale = {
                let lhs = k.pow(&a1);
                let rhs = n_value.pow(&beta);
                if lhs.cmp_value(&rhs) == std::cmp::Ordering::Greater {
                    rhs
                } else {
                    lhs
                }
            };
            let tau_exact = delta4.mul(&k).mul(&min_scale).recip();
            let tau = dyadic_floor(&tau_exact);
            let codegree_ok = codegree_delta(&h, &tau)? <= delta;
            let mu = {
                let lhs = k.pow(&-a1.clone());
                let rhs = n_value.pow(&-beta.clone());
                let max = if lhs.cmp_value(&rhs) == std::cmp::Ordering::Less {
                    rhs
                } else {
                    lhs
                };
                inv_eps.mul(&max)
            };
            let mu_cap = mu
                .mul(&n_alpha)
                .floor_big()
                .to_u64()
                .unwrap_or(u64::MAX);
            let hyper_stop = hyper_stop_threshold(h.edge_count(), &delta);
            let exclude_goal = ceil_fraction(
                &(epsilon * BigRational::from_integer(BigInt::from(e))),
            );
            let index: BTreeMap<(u32, u32), u32> = current
                .iter()
                .enumerate()
                .map(|(i, &p)| (p, i as u32))
                .collect();
            let member: BTreeSet<u32> = independent
                .iter()
                .filter_map(|p| index.get(p).copied())
                .collect();
            let run = scythe(&h, hyper_stop, exclude_goal, &member);
            if run.stalled {
                stop = IterationStop::Stalled { round };
                break;
            }
            if run.fingerprint.len() as u64 > mu_cap {
                return Err(Error::Internal(format!(
                    "round {round} fingerprint has {} edges, cap {mu_cap}",
                    run.fingerprint.len()
                )));
            }
            if !run.fingerprint.is_subset(&run.container) {
                return Err(Error::Internal(
                    "fingerprint left its own container".into(),
                ));
            }
            let fingerprint: Vec<(u32, u32)> = run
                .fingerprint
                .iter()
                .map(|&i| current[i as usize])
                .collect();
            let container: Vec<(u32, u32)> = run
                .container
                .iter()
                .map(|&i| current[i as usize])
                .collect();
            let next: Vec<(u32, u32)> = run
                .container
                .difference(&run.fingerprint)
                .map(|&i| current[i as usize])
                .collect();
            let shrink_ok = BigRational::from_integer(BigInt::from(container.len() as u64))
                <= &one_minus_eps * BigRational::from_integer(BigInt::from(e));
            if !shrink_ok {
                return Err(Error::Internal(format!(
                    "round {round} container kept {} of {e} edges",
                    container.len()
                )));
            }
            rounds.push(RoundRecord {
                round,
                edges_before: e,
                k_approx: k.to_f64_approx(),
                tau: tau.to_string(),
                mu_cap,
                codegree_ok,
                hyperedge_count: h.edge_count() as u64,
                fingerprint,
                container,
                edges_after: next.len() as u64,
            });
            current = next;
        }
        records.push(IterationRecord {
            independent,
            rounds,
            final_graph: current,
            stop,
        });
    }
    Ok(ContainerIteration {
        n,
        epsilon: epsilon.clone(),
        delta,
        round_cap,
        records,
    })
}

fn binomial_biguint(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut result = BigUint::one();
    for i in 0..k {
        result = result * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    result
}

fn rational_pow(base: &BigRational, exp: u64) -> BigRational {
    let mut result = BigRational::one();
    let mut acc = base.clone();
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            result *= &acc;
        }
        acc = &acc * &acc;
        e >>= 1;
    }
    result
}

#[derive(Debug, Clone)]
pub struct GnpBound {
    pub p: BigRational,
    pub m: u64,
    pub bound: BigRational,
    pub holds: bool,
}

/// The union-bound sum Σ over chains of binom(e(final), m − e(S)) · p^m: the
/// probability that some recorded chain is consistent with an m-edge
/// forbidden-graph-free subgraph of a p-random host. Exact rational; the
/// verdict is whether the sum is below 1.
pub fn gnp_upper_bound(stats: &[ChainStat], p: &BigRational, m: u64) -> Result<GnpBound> {
    if p.is_negative() || p > &BigRational::one() {
        return Err(Error::InvalidParameter(format!(
            "p must lie in [0, 1], got {p}"
        )));
    }
    let pm = rational_pow(p, m);
    let mut total = BigRational::zero();
    for stat in stats {
        if m < stat.fingerprint_edges {
            continue;
        }
        let ways = binomial_biguint(stat.final_edges, m - stat.fingerprint_edges);
        total += BigRational::from_integer(BigInt::from(ways)) * &pm;
    }
    let holds = total < BigRational::one();
    Ok(GnpBound {
        p: p.clone(),
        m,
        bound: total,
        holds,
    })
}

/// The formula cap on the number of chains with `s` fingerprint edges:
/// (c·n^α / s)^(s/(α−1)) · exp(c · k^(−(α−1)/(2−α)) · n^α), as a floating
/// diagnostic alongside the measured counts.
pub fn chain_count_cap(n: u32, dims: &PatternDims, c: f64, k: f64, s: u64) -> f64 {
    let alpha = dims
        .alpha()
        .to_f64()
        .expect("alpha is a small rational");
    let n_alpha = (n as f64).powf(alpha);
    let a1 = (alpha - 1.0) / (2.0 - alpha);
    let tail = (c * k.powf(-a1) * n_alpha).exp();
    if s == 0 {
        return tail;
    }
    let base = c * n_alpha / s as f64;
    base.powf(s as f64 / (alpha - 1.0)) * tail
}

/// CSV rows `p,m,bound` with exact rational bounds.
pub fn gnp_csv(rows: &[GnpBound]) -> String {
    let mut out = String::from("p,m,bound\n");
    for row in rows {
        out.push_str(&format!("{},{},{}\n", row.p, row.m, row.bound));
    }
    out
}
