//! Host pruning: removal of already-saturated edges, iterated minimum-degree
//! cores (plain and weighted), and the scale parameters of the pruned host.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use num_traits::One;

use crate::error::{Error, Result};
use crate::exact::{ExtendedCount, Value};
use crate::graph::{Graph, MultiGraph};
use crate::hypergraph::{evaluate_codegree, CodegreeFamily, CodegreeParams, GHypergraph};
use crate::theta::{Assignment, HUB_U};

/// Scale parameters of a pruned host G′ inside a host on `n` vertices:
/// `m = v(G′)`, the exact degree scale `ℓ = min-degree/m^{1/b}` kept as the
/// triple (min-degree, m, b), and the dyadic level `r` with
/// `2^{-r}·n <= m < 2^{-r+1}·n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScaleParams {
    m: u64,
    min_degree: u64,
    b: u32,
    r: i64,
}

impl ScaleParams {
    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn min_degree(&self) -> u64 {
        self.min_degree
    }

    pub fn b(&self) -> u32 {
        self.b
    }

    pub fn r(&self) -> i64 {
        self.r
    }

    /// The degree scale as its defining triple (min-degree, m, b).
    pub fn ell(&self) -> (u64, u64, u32) {
        (self.min_degree, self.m, self.b)
    }

    /// The degree scale ℓ = min-degree / m^{1/b} as an exact value.
    pub fn ell_value(&self) -> Result<Value> {
        let d = Value::from_u64(self.min_degree)?;
        let m = Value::from_u64(self.m)?;
        Ok(d.div(&m.pow(&rational(1, i64::from(self.b)))))
    }

    /// Whether `ℓ >= 4^{-b}·2^r·k`, the guarantee a core of a host with
    /// k·n^{1+1/b} edges provides.
    pub fn degree_scale_holds(&self, k: &Value) -> Result<bool> {
        let ell = self.ell_value()?;
        let rhs = Value::from_u64(2)?
            .pow_i64(self.r - 2 * i64::from(self.b))
            .mul(k);
        Ok(ell.cmp_value(&rhs) != std::cmp::Ordering::Less)
    }

    /// Whether `ℓ^{b/(b-1)} <= ℓ·m^{1/b}`, i.e. the path-step budget never
    /// exceeds the neighborhood budget. Needs `b >= 2`.
    pub fn min_degree_identity_holds(&self) -> Result<bool> {
        if self.b < 2 {
            return Err(Error::Domain(format!(
                "degree identity needs b >= 2, got b = {}",
                self.b
            )));
        }
        let ell = self.ell_value()?;
        let b = i64::from(self.b);
        let lhs = ell.pow(&rational(b, b - 1));
        let rhs = ell.mul(&Value::from_u64(self.m)?.pow(&rational(1, b)));
        Ok(lhs.cmp_value(&rhs) != std::cmp::Ordering::Greater)
    }
}

fn rational(num: i64, den: i64) -> num_rational::BigRational {
    num_rational::BigRational::new(num.into(), den.into())
}

/// Drops every host edge already carrying a saturated pair: an edge zz′ is
/// removed when some pattern edge can map onto it (in either orientation)
/// with degree at least ⌈k^{ab}·n²/(δ·k·n^{1+1/b})⌉, the single-edge forest
/// threshold. Returns the kept graph and the removed edges in stored order.
pub fn remove_saturated_edges(
    g: &Graph,
    h: &GHypergraph,
    params: &CodegreeParams,
) -> Result<(Graph, Vec<(u32, u32)>)> {
    if params.family() != CodegreeFamily::Forest {
        return Err(Error::InvalidParameter(
            "edge saturation uses the forest threshold family".to_string(),
        ));
    }
    if params.n() != u64::from(g.n()) || h.host().n() != g.n() {
        return Err(Error::Domain(
            "host order mismatch between graph, hypergraph, and parameters".to_string(),
        ));
    }
    let pat = params.pattern();
    let single_edge: BTreeSet<u32> = [HUB_U, pat.internal(1, 1)].into_iter().collect();
    let threshold = match evaluate_codegree(params, &single_edge)? {
        ExtendedCount::Finite(t) => t,
        ExtendedCount::Unbounded => {
            return Err(Error::Internal("single-edge threshold is finite".to_string()))
        }
    };

    let pattern_edges: Vec<(u32, u32)> = pat.graph().edges().to_vec();
    let mut kept = Graph::new(g.n());
    let mut removed = Vec::new();
    for &(z1, z2) in g.edges() {
        let mut saturated = false;
        'scan: for &(w1, w2) in &pattern_edges {
            for (h1, h2) in [(z1, z2), (z2, z1)] {
                let chi = Assignment::from_pairs(vec![(w1, h1), (w2, h2)]);
                if BigUint::from(h.degree_unchecked(&chi)) >= threshold {
                    saturated = true;
                    break 'scan;
                }
            }
        }
        if saturated {
            removed.push((z1, z2));
        } else {
            kept.add_edge(z1, z2)?;
        }
    }
    Ok((kept, removed))
}

/// Whether (d·2^b·m)^b · n >= e^b · m, the minimum-degree guarantee
/// d >= 2^{-b}·(m/n)^{1/b}·e/m cross-multiplied into integers.
fn core_bound_holds(d: u64, m: u64, e: u64, n: u64, b: u32) -> bool {
    let lhs = (BigUint::from(d) * (BigUint::one() << b) * BigUint::from(m)).pow(b)
        * BigUint::from(n);
    let rhs = BigUint::from(e).pow(b) * BigUint::from(m);
    lhs >= rhs
}

/// Extracts an induced subgraph G′ with v(G′) > 0 and minimum degree at
/// least 2^{-b}·(v(G′)/n)^{1/b}·e(g)/v(G′), with e and n taken from the
/// input.
///
/// Runs the deletion rounds directly: round r (starting at r = 0) deletes
/// vertices of degree below 2^{(b-1)r-1}·e/n one at a time (smallest label
/// first) until none remain, then checks the guarantee on the round output.
/// The first round output meeting the bound is returned; a failed check
/// forces the vertex count below 2^{-b(r+1)}·n while at least 2^{-r-1}·e
/// edges survive, so with exact arithmetic some round must succeed.
pub fn min_degree_core(g: &MultiGraph, b: u32) -> Result<MultiGraph> {
    if b < 1 {
        return Err(Error::Domain("core extraction needs b >= 1".to_string()));
    }
    let e0 = g.edge_count();
    if e0 == 0 {
        return Err(Error::Domain(
            "core extraction needs at least one edge".to_string(),
        ));
    }
    let n0 = g.vertex_count() as u64;
    let mut current = g.clone();
    for r in 0..128u32 {
        // deg < 2^{(b-1)r-1}·e/n  <=>  2n·deg < 2^{(b-1)r}·e, exactly.
        let scaled = (BigUint::one() << ((b - 1) * r)) * BigUint::from(e0);
        loop {
            let victim = current
                .vertices()
                .iter()
                .copied()
                .find(|&v| BigUint::from(2 * n0) * BigUint::from(current.degree(v)) < scaled);
            match victim {
                Some(v) => {
                    let keep: BTreeSet<u32> =
                        current.vertices().iter().copied().filter(|&w| w != v).collect();
                    current = current.induced(&keep);
                }
                None => break,
            }
        }
        if current.vertex_count() > 0 {
            let d = current.min_degree().expect("nonempty");
            if core_bound_holds(d, current.vertex_count() as u64, e0, n0, b) {
                return Ok(current);
            }
        }
    }
    Err(Error::Internal(
        "deletion rounds exhausted the graph without meeting the degree bound".to_string(),
    ))
}

/// Weighted core: a subset B′ with min_{y in B′} f(y) >=
/// 2^{-b}·(|B′|/|B|)^{1/b}·Σf/|B′|, found by running the core extraction on
/// the multigraph with f(y) loops at each y.
pub fn weighted_core(weights: &BTreeMap<u32, u64>, b: u32) -> Result<BTreeSet<u32>> {
    if b < 2 {
        return Err(Error::Domain("weighted core needs b >= 2".to_string()));
    }
    if weights.values().all(|&w| w == 0) {
        return Err(Error::Domain("total weight is zero".to_string()));
    }
    let mut g = MultiGraph::new();
    for (&y, &w) in weights {
        g.add_vertex(y);
        g.add_loops(y, w);
    }
    Ok(min_degree_core(&g, b)?.vertices().clone())
}

/// Computes (m, ℓ, r) for a pruned host G′ inside a host on `n` vertices:
/// m = v(G′), ℓ = min-degree/m^{1/b}, and the unique r with
/// 2^{-r}·n <= m < 2^{-r+1}·n. The minimum degree must be positive.
pub fn scale_parameters(gprime: &Graph, n: u64, b: u32) -> Result<ScaleParams> {
    if b < 1 {
        return Err(Error::Domain("scale parameters need b >= 1".to_string()));
    }
    if n == 0 {
        return Err(Error::Domain("host order must be positive".to_string()));
    }
    let m = u64::from(gprime.n());
    let min_degree = gprime.min_degree() as u64;
    if m == 0 || min_degree == 0 {
        return Err(Error::Domain(
            "scale parameters need a nonempty graph with positive minimum degree".to_string(),
        ));
    }
    let r = (-64..=64)
        .find(|&r| dyadic_window_contains(n, m, r))
        .ok_or_else(|| Error::Internal("dyadic level out of range".to_string()))?;
    Ok(ScaleParams { m, min_degree, b, r })
}

/// Whether 2^{-r}·n <= m < 2^{-r+1}·n, in exact integer arithmetic.
fn dyadic_window_contains(n: u64, m: u64, r: i64) -> bool {
    let n = u128::from(n);
    let m = u128::from(m);
    let (lower, upper) = if r >= 0 {
        // n <= 2^r·m  and  2^r·m < 2n
        (n <= (m << r), (m << r) < 2 * n)
    } else {
        // 2^{-r}·n <= m  and  m < 2^{-r+1}·n
        let shift = (-r) as u32;
        ((n << shift) <= m, m < (n << (shift + 1)))
    };
    lower && upper
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::sample_gnp;
    use crate::hypergraph::host_scale;
    use crate::theta::{ThetaPattern, HUB_V};
    use num_rational::BigRational;
    use rand_core::{RngCore, SeedableRng};

    fn forest_params(a: u32, b: u32, k: Value, n: u64, delta: BigRational) -> CodegreeParams {
        CodegreeParams::new(
            ThetaPattern::new(a, b).unwrap(),
            k,
            n,
            delta,
            CodegreeFamily::Forest,
        )
        .unwrap()
    }

    fn assignment(pairs: &[(u32, u32)]) -> Assignment {
        Assignment::from_pairs(pairs.to_vec())
    }

    #[test]
    fn saturation_keeps_everything_for_empty_hypergraph() {
        let host = Graph::complete_bipartite(3, 3);
        let pat = ThetaPattern::new(3, 2).unwrap();
        let h = GHypergraph::new(pat, host.clone());
        let p = forest_params(3, 2, Value::one(), 6, BigRational::one());
        let (kept, removed) = remove_saturated_edges(&host, &h, &p).unwrap();
        assert!(removed.is_empty());
        assert_eq!(kept.edges(), host.edges());
    }

    #[test]
    fn saturation_removes_exactly_the_loaded_edge() {
        // Two copies sharing only the pair (u -> 0, w_1^1 -> 3); with
        // threshold 2 that edge is the unique removal, and the hypergraph is
        // still below every forest bound.
        let host = Graph::complete_bipartite(3, 3);
        let pat = ThetaPattern::new(3, 2).unwrap();
        let (w1, w2, w3) = (pat.internal(1, 1), pat.internal(1, 2), pat.internal(1, 3));
        let mut h = GHypergraph::new(pat.clone(), host.clone());
        h.insert(assignment(&[(HUB_U, 0), (HUB_V, 1), (w1, 3), (w2, 4), (w3, 5)]))
            .unwrap();
        h.insert(assignment(&[(HUB_U, 0), (HUB_V, 2), (w1, 3), (w2, 5), (w3, 4)]))
            .unwrap();
        let delta = BigRational::from_integer(2.into());
        let p = forest_params(3, 2, Value::one(), 6, delta.clone());
        assert!(h.is_good(&p, 5).unwrap().is_good());

        let (kept, removed) = remove_saturated_edges(&host, &h, &p).unwrap();
        assert_eq!(removed, vec![(0, 3)]);
        assert_eq!(kept.edge_count(), host.edge_count() - 1);
        assert!(!kept.has_edge(0, 3));

        // Double-count budget: at most δ²·ab·k·n^{1+1/b} removals.
        let budget = Value::from_rational(&(delta.clone() * delta))
            .unwrap()
            .mul(&Value::from_u64(6).unwrap())
            .mul(&Value::from_u64(6).unwrap().pow(&rational(3, 2)));
        assert_ne!(
            budget.cmp_integer(&BigUint::from(removed.len() as u64)),
            std::cmp::Ordering::Less
        );
    }

    #[test]
    fn saturation_can_empty_the_host() {
        let host = Graph::complete_bipartite(2, 4);
        let pat = ThetaPattern::new(3, 2).unwrap();
        let (w1, w2, w3) = (pat.internal(1, 1), pat.internal(1, 2), pat.internal(1, 3));
        let mut h = GHypergraph::new(pat.clone(), host.clone());
        let rights = [2u32, 3, 4, 5];
        for &r1 in &rights {
            for &r2 in &rights {
                for &r3 in &rights {
                    if r1 != r2 && r1 != r3 && r2 != r3 {
                        h.insert(assignment(&[
                            (HUB_U, 0),
                            (HUB_V, 1),
                            (w1, r1),
                            (w2, r2),
                            (w3, r3),
                        ]))
                        .unwrap();
                    }
                }
            }
        }
        assert_eq!(h.len(), 24);
        let p = forest_params(3, 2, Value::one(), 6, BigRational::one());
        let (kept, removed) = remove_saturated_edges(&host, &h, &p).unwrap();
        assert_eq!(kept.edge_count(), 0);
        assert_eq!(removed.len(), host.edge_count());
    }

    #[test]
    fn core_keeps_complete_graph() {
        let g = MultiGraph::from_graph(&Graph::complete(6));
        let core = min_degree_core(&g, 2).unwrap();
        assert_eq!(core.vertex_count(), 6);
        assert_eq!(core.edge_count(), 15);
    }

    #[test]
    fn core_converges_to_dense_part() {
        // K5 plus ten isolated vertices: the rounds strip the isolated
        // vertices and stop at K5.
        let mut g = Graph::complete(5);
        g = Graph::from_edges(15, g.edges()).unwrap();
        let core = min_degree_core(&MultiGraph::from_graph(&g), 2).unwrap();
        let expect: BTreeSet<u32> = (0..5).collect();
        assert_eq!(core.vertices(), &expect);
        assert_eq!(core.edge_count(), 10);
    }

    #[test]
    fn core_rejects_empty_and_bad_b() {
        let empty = MultiGraph::from_graph(&Graph::new(4));
        assert!(min_degree_core(&empty, 2).is_err());
        let g = MultiGraph::from_graph(&Graph::complete(3));
        assert!(min_degree_core(&g, 0).is_err());
    }

    #[test]
    fn core_bound_on_random_inputs() {
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(0x5eed_c0de);
        let mut checked = 0u32;
        while checked < 200 {
            let n = 5 + (rng.next_u64() % 196) as u32;
            // Density spread across [0.05, 1].
            let num = 5 + rng.next_u64() % 96;
            let p = BigRational::new((num as i64).into(), 100.into());
            let b = 1 + (checked % 4);
            let g = sample_gnp(n, &p, rng.next_u64()).unwrap();
            if g.edge_count() == 0 {
                continue;
            }
            let mg = MultiGraph::from_graph(&g);
            let e0 = mg.edge_count();
            let n0 = mg.vertex_count() as u64;
            let core = min_degree_core(&mg, b).unwrap();
            let d = core.min_degree().unwrap();
            let m = core.vertex_count() as u64;
            assert!(core_bound_holds(d, m, e0, n0, b), "core bound failed");
            assert!(core.vertices().iter().all(|v| g.n() > *v));

            if b >= 2 {
                let (compact, _labels) = core.to_compact_graph().unwrap();
                let sp = scale_parameters(&compact, u64::from(n), b).unwrap();
                assert!(dyadic_window_contains(u64::from(n), sp.m(), sp.r()));
                let k = host_scale(e0, u64::from(n), b).unwrap();
                assert!(sp.degree_scale_holds(&k).unwrap());
                assert!(sp.min_degree_identity_holds().unwrap());
            }
            checked += 1;
        }
    }

    #[test]
    fn weighted_core_examples() {
        let two: BTreeMap<u32, u64> = [(1, 0), (2, 10)].into_iter().collect();
        let out = weighted_core(&two, 2).unwrap();
        assert_eq!(out, [2].into_iter().collect());

        let constant: BTreeMap<u32, u64> = (0..7).map(|y| (y, 3)).collect();
        assert_eq!(weighted_core(&constant, 3).unwrap().len(), 7);

        let single: BTreeMap<u32, u64> = [(9, 5)].into_iter().collect();
        assert_eq!(weighted_core(&single, 2).unwrap(), [9].into_iter().collect());

        let zero: BTreeMap<u32, u64> = [(0, 0), (1, 0)].into_iter().collect();
        assert!(weighted_core(&zero, 2).is_err());
        assert!(weighted_core(&two, 1).is_err());
    }

    #[test]
    fn weighted_core_matches_loop_multigraph_core() {
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(7);
        for b in 2..=4u32 {
            for _ in 0..20 {
                let size = 2 + (rng.next_u64() % 12) as u32;
                let weights: BTreeMap<u32, u64> =
                    (0..size).map(|y| (y, rng.next_u64() % 50)).collect();
                if weights.values().all(|&w| w == 0) {
                    continue;
                }
                let mut g = MultiGraph::new();
                for (&y, &w) in &weights {
                    g.add_vertex(y);
                    g.add_loops(y, w);
                }
                let via_core = min_degree_core(&g, b).unwrap();
                let direct = weighted_core(&weights, b).unwrap();
                assert_eq!(&direct, via_core.vertices());
                // The weighted guarantee itself, cross-multiplied exactly:
                // min f·2^b·|B′| >= (|B′|/|B|)^{1/b}·Σf·... as in the core.
                let total: u64 = weights.values().sum();
                let dmin = direct.iter().map(|y| weights[y]).min().unwrap();
                assert!(core_bound_holds(
                    dmin,
                    direct.len() as u64,
                    total,
                    u64::from(size),
                    b
                ));
            }
        }
    }

    #[test]
    fn scale_parameter_examples() {
        let k16 = Graph::complete(16);
        let sp = scale_parameters(&k16, 64, 3).unwrap();
        assert_eq!(sp.r(), 2);
        assert_eq!(sp.ell(), (15, 16, 3));
        assert_eq!(sp.m(), 16);

        let same = scale_parameters(&Graph::complete(16), 16, 3).unwrap();
        assert_eq!(same.r(), 0);

        let mut lonely = Graph::new(3);
        lonely.add_edge(0, 1).unwrap();
        assert!(scale_parameters(&lonely, 64, 3).is_err());
    }

    #[test]
    fn dyadic_level_is_unique() {
        for n in [7u64, 16, 64, 100] {
            for m in 2..=n {
                let g = Graph::complete(m as u32);
                let sp = scale_parameters(&g, n, 2).unwrap();
                let hits: Vec<i64> = (-8..=8)
                    .filter(|&r| dyadic_window_contains(n, m, r))
                    .collect();
                assert_eq!(hits, vec![sp.r()], "n={n} m={m}");
            }
        }
        // m > n pushes the level negative.
        let sp = scale_parameters(&Graph::complete(16), 4, 2).unwrap();
        assert_eq!(sp.r(), -2);
    }

    #[test]
    fn degree_scale_example() {
        // K16 inside a 64-vertex host with e = k·64^{4/3} edges: the pruned
        // scale satisfies both verifier inequalities.
        let sp = scale_parameters(&Graph::complete(16), 64, 3).unwrap();
        let k = host_scale(120, 64, 3).unwrap();
        assert!(sp.degree_scale_holds(&k).unwrap());
        assert!(sp.min_degree_identity_holds().unwrap());
        // An absurdly large k breaks the degree-scale inequality.
        let huge = Value::from_u64(1_000_000).unwrap();
        assert!(!sp.degree_scale_holds(&huge).unwrap());
        // The identity checker needs b >= 2.
        let flat = scale_parameters(&Graph::complete(4), 8, 1).unwrap();
        assert!(flat.min_degree_identity_holds().is_err());
    }
}
