//! Assignment hypergraphs over V(θ_{a,b}) × V(G), the codegree threshold
//! families, goodness checking, link sets, and the asymptotic budget scan.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::Signed;

use crate::error::{Error, Result};
use crate::exact::{ceil_log2_u64, log2_approx_biguint, ExtendedCount, Value};
use crate::graph::Graph;
use crate::theta::{validate_assignment, Assignment, ThetaPattern, HUB_U, HUB_V};

/// Which codegree threshold formula to evaluate.
///
/// `Forest` is finite exactly on sets inducing a nonempty forest. The scaled
/// families (`FullLength`, `Truncated`) and the anchored family require both
/// hubs, and `Anchored` additionally a last-layer vertex; elsewhere they are
/// unbounded. `Combined` is the per-t envelope the pipeline certifies:
/// the forest value on forests, otherwise
/// min{anchored, 20·(truncated at s=0 + ⌈log₂ n⌉)}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum CodegreeFamily {
    /// Finite on sets inducing a forest with at least one edge.
    Forest,
    /// Full-length scaled family at dyadic scale `s` (paths run all b steps).
    FullLength { s: u32 },
    /// Truncated scaled family at scale `s` and truncation `2 <= t < b`.
    Truncated { s: u32, t: u32 },
    /// Anchored family at truncation `2 <= t <= b`; `t = b` is unbounded
    /// everywhere.
    Anchored { t: u32 },
    /// The envelope used for the final goodness guarantee, `2 <= t <= b`.
    Combined { t: u32 },
}

/// Parameters shared by every codegree evaluation: the pattern, the host
/// scale `k` (defined by e(G) = k·n^{1+1/b}), the host order `n`, the density
/// budget `δ`, and the threshold family.
#[derive(Clone, Debug)]
pub struct CodegreeParams {
    pattern: ThetaPattern,
    k: Value,
    n: u64,
    delta: BigRational,
    family: CodegreeFamily,
}

/// The scale factor `k` with `edge_count = k·n^{1+1/b}`, kept exact.
pub fn host_scale(edge_count: u64, n: u64, b: u32) -> Result<Value> {
    if edge_count == 0 || n == 0 {
        return Err(Error::Domain(
            "host scale needs a nonempty host".to_string(),
        ));
    }
    let exp = BigRational::new(BigInt::from(b + 1), BigInt::from(b));
    Ok(Value::from_u64(edge_count)?.div(&Value::from_u64(n)?.pow(&exp)))
}

impl CodegreeParams {
    /// Validates ranges: `δ > 0`, `n >= 1`, `s` within `0..=⌈3·log₂ n⌉`,
    /// `t` within its family's range, and `a >= 3` for the hub families.
    pub fn new(
        pattern: ThetaPattern,
        k: Value,
        n: u64,
        delta: BigRational,
        family: CodegreeFamily,
    ) -> Result<Self> {
        if !delta.is_positive() {
            return Err(Error::Domain(format!("delta must be positive, got {delta}")));
        }
        if n == 0 {
            return Err(Error::Domain("host order must be positive".to_string()));
        }
        let b = pattern.b();
        let s_max = 3 * ceil_log2_u64(n.max(1));
        let check_s = |s: u32| {
            if u64::from(s) > s_max {
                Err(Error::Domain(format!(
                    "scale s = {s} outside 0..={s_max} for n = {n}"
                )))
            } else {
                Ok(())
            }
        };
        let check_hubs = || {
            if pattern.a() < 3 {
                Err(Error::Domain(format!(
                    "hub-based families need a >= 3, got a = {}",
                    pattern.a()
                )))
            } else {
                Ok(())
            }
        };
        match family {
            CodegreeFamily::Forest => {}
            CodegreeFamily::FullLength { s } => {
                check_hubs()?;
                check_s(s)?;
            }
            CodegreeFamily::Truncated { s, t } => {
                check_hubs()?;
                check_s(s)?;
                if !(2..b).contains(&t) {
                    return Err(Error::Domain(format!(
                        "truncated family needs 2 <= t < b = {b}, got t = {t}"
                    )));
                }
            }
            CodegreeFamily::Anchored { t } | CodegreeFamily::Combined { t } => {
                check_hubs()?;
                if !(2..=b).contains(&t) {
                    return Err(Error::Domain(format!(
                        "family needs 2 <= t <= b = {b}, got t = {t}"
                    )));
                }
            }
        }
        Ok(CodegreeParams {
            pattern,
            k,
            n,
            delta,
            family,
        })
    }

    /// Same parameters with a different threshold family.
    pub fn with_family(&self, family: CodegreeFamily) -> Result<Self> {
        CodegreeParams::new(
            self.pattern.clone(),
            self.k.clone(),
            self.n,
            self.delta.clone(),
            family,
        )
    }

    pub fn pattern(&self) -> &ThetaPattern {
        &self.pattern
    }

    pub fn k(&self) -> &Value {
        &self.k
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn delta(&self) -> &BigRational {
        &self.delta
    }

    pub fn family(&self) -> CodegreeFamily {
        self.family
    }

    fn check_subset(&self, nu: &BTreeSet<u32>) -> Result<()> {
        if let Some(&max) = nu.iter().next_back() {
            if max >= self.pattern.vertex_count() {
                return Err(Error::Domain(format!(
                    "pattern vertex {max} out of range (pattern has {})",
                    self.pattern.vertex_count()
                )));
            }
        }
        Ok(())
    }
}

fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn two() -> Value {
    Value::from_u64(2).expect("2 is a valid value")
}

/// Aggregate shape of a subset ν: every quantity the threshold formulas
/// read. `f` is the layer count at the truncation carried by the target
/// family and is zero for families without one.
#[derive(Clone, Copy, Debug)]
struct SubsetShape {
    size: i64,
    edges: i64,
    hubs: bool,
    anchor: bool,
    f: i64,
    forest: bool,
}

fn shape_of(pattern: &ThetaPattern, nu: &BTreeSet<u32>, t: Option<u32>) -> Result<SubsetShape> {
    let b = pattern.b();
    let f = match t {
        Some(t) => nu.intersection(&pattern.layer_set(t)?).count() as i64,
        None => 0,
    };
    Ok(SubsetShape {
        size: nu.len() as i64,
        edges: pattern.induced_edges(nu).len() as i64,
        hubs: nu.contains(&HUB_U) && nu.contains(&HUB_V),
        anchor: (1..=pattern.a()).any(|j| nu.contains(&pattern.internal(b - 1, j))),
        f,
        forest: pattern.induces_forest(nu),
    })
}

fn family_truncation(family: CodegreeFamily) -> Option<u32> {
    match family {
        CodegreeFamily::Truncated { t, .. }
        | CodegreeFamily::Anchored { t }
        | CodegreeFamily::Combined { t } => Some(t),
        CodegreeFamily::Forest | CodegreeFamily::FullLength { .. } => None,
    }
}

/// The pre-ceiling formula value for a primitive family, `None` on an
/// unbounded branch. The combined family has no closed product form and is
/// rejected.
pub fn codegree_value(params: &CodegreeParams, nu: &BTreeSet<u32>) -> Result<Option<Value>> {
    params.check_subset(nu)?;
    let shape = shape_of(&params.pattern, nu, family_truncation(params.family))?;
    codegree_value_from_shape(params, &shape)
}

fn codegree_value_from_shape(
    params: &CodegreeParams,
    shape: &SubsetShape,
) -> Result<Option<Value>> {
    let pat = &params.pattern;
    let a = i64::from(pat.a());
    let b = i64::from(pat.b());
    let k = &params.k;
    let n = Value::from_u64(params.n)?;
    let delta = Value::from_rational(&params.delta)?;
    let size = shape.size;
    // k^{ab} n^2, the copy count the thresholds are measured against.
    let numerator = k.pow_i64(a * b).mul(&n.pow_i64(2));

    let denom = match params.family {
        CodegreeFamily::Forest => {
            if !shape.forest || shape.edges == 0 {
                return Ok(None);
            }
            // δ k n^{1+1/b} (δ k^{b/(b-1)})^{e-1}
            let base = delta.mul(k).mul(&n.pow(&ratio(b + 1, b)));
            let step = delta.mul(&k.pow(&ratio(b, b - 1)));
            base.mul(&step.pow_i64(shape.edges - 1))
        }
        CodegreeFamily::FullLength { s } => {
            if !shape.hubs {
                return Ok(None);
            }
            let s = i64::from(s);
            // 2^{-s} n^2 δ^{|ν|} (2^{2s/3} k^b)^{(|ν|-2)/(b-1)}
            let step = two().pow(&ratio(2 * s, 3)).mul(&k.pow_i64(b));
            two()
                .pow_i64(-s)
                .mul(&n.pow_i64(2))
                .mul(&delta.pow_i64(size))
                .mul(&step.pow(&ratio(size - 2, b - 1)))
        }
        CodegreeFamily::Truncated { s, t } => {
            if !shape.hubs {
                return Ok(None);
            }
            let s = i64::from(s);
            let t_i = i64::from(t);
            let f = shape.f;
            // 2^{-2s} k^{(2b-2t+1)/(b-1)} n^{(2t-1)/b} δ^{|ν|}
            //   (2^{2s/3} k n^{1/b})^f (2^{2s/3} k^{b/(b-1)})^{|ν|-f-2}
            let layer_step = two()
                .pow(&ratio(2 * s, 3))
                .mul(k)
                .mul(&n.pow(&ratio(1, b)));
            let free_step = two()
                .pow(&ratio(2 * s, 3))
                .mul(&k.pow(&ratio(b, b - 1)));
            two()
                .pow_i64(-2 * s)
                .mul(&k.pow(&ratio(2 * b - 2 * t_i + 1, b - 1)))
                .mul(&n.pow(&ratio(2 * t_i - 1, b)))
                .mul(&delta.pow_i64(size))
                .mul(&layer_step.pow_i64(f))
                .mul(&free_step.pow_i64(size - f - 2))
        }
        CodegreeFamily::Anchored { t } => {
            if t == pat.b() {
                return Ok(None);
            }
            if !shape.hubs || !shape.anchor {
                return Ok(None);
            }
            let t_i = i64::from(t);
            let f = shape.f;
            // g tracks the layer count with the last layer discounted when it
            // belongs to the layer set (b - t odd).
            let g = if (b - t_i) % 2 == 0 { f } else { f - 1 };
            debug_assert!(g >= 0, "anchor vertex guarantees f >= 1 when b - t is odd");
            // k n^{1+1/b} (k n^{1/b})^g (k^{b/(b-1)})^{|ν|-g-3} δ^{|ν|}
            let layer_step = k.mul(&n.pow(&ratio(1, b)));
            let free_step = k.pow(&ratio(b, b - 1));
            k.mul(&n.pow(&ratio(b + 1, b)))
                .mul(&layer_step.pow_i64(g))
                .mul(&free_step.pow_i64(size - g - 3))
                .mul(&delta.pow_i64(size))
        }
        CodegreeFamily::Combined { .. } => {
            return Err(Error::InvalidParameter(
                "combined family has no closed product form".to_string(),
            ));
        }
    };
    Ok(Some(numerator.div(&denom)))
}

fn ceil_count(value: Option<Value>) -> ExtendedCount {
    match value {
        None => ExtendedCount::Unbounded,
        Some(v) => ExtendedCount::Finite(v.ceil_big()),
    }
}

/// The combined envelope at truncation `t` evaluated on a shape: the forest
/// value on forests, otherwise min{anchored, 20·(base at s=0 + ⌈log₂ n⌉)}.
fn combined_count_from_shape(
    params: &CodegreeParams,
    t: u32,
    shape: &SubsetShape,
) -> Result<ExtendedCount> {
    if shape.forest {
        let forest = params.with_family(CodegreeFamily::Forest)?;
        return Ok(ceil_count(codegree_value_from_shape(&forest, shape)?));
    }
    let anchored = ceil_count(codegree_value_from_shape(
        &params.with_family(CodegreeFamily::Anchored { t })?,
        shape,
    )?);
    let base_family = if t == params.pattern.b() {
        CodegreeFamily::FullLength { s: 0 }
    } else {
        CodegreeFamily::Truncated { s: 0, t }
    };
    let base = ceil_count(codegree_value_from_shape(
        &params.with_family(base_family)?,
        shape,
    )?);
    let log_term = BigUint::from(ceil_log2_u64(params.n));
    Ok(anchored.min(base.add_biguint(&log_term).scale_u64(20)))
}

/// The exact ceiling of the selected codegree formula, `Unbounded` on each
/// formula's unbounded branch.
pub fn evaluate_codegree(params: &CodegreeParams, nu: &BTreeSet<u32>) -> Result<ExtendedCount> {
    match params.family {
        CodegreeFamily::Combined { t } => {
            params.check_subset(nu)?;
            let shape = shape_of(&params.pattern, nu, Some(t))?;
            combined_count_from_shape(params, t, &shape)
        }
        _ => Ok(ceil_count(codegree_value(params, nu)?)),
    }
}

/// Threshold memoization. The formulas read ν only through its shape
/// (induced edge count, size, hub membership, anchor membership, layer
/// count), so distinct subsets with one shape share an entry. Entries mix
/// threshold families but assume one fixed (pattern, k, n, δ) context; use
/// one cache per parameter set.
#[derive(Clone, Debug, Default)]
pub struct ThresholdCache {
    map: BTreeMap<(u8, u32, u32, u32, u32, u32), ExtendedCount>,
}

impl ThresholdCache {
    pub fn new() -> Self {
        ThresholdCache::default()
    }

    pub fn evaluate(
        &mut self,
        params: &CodegreeParams,
        nu: &BTreeSet<u32>,
    ) -> Result<ExtendedCount> {
        self.evaluate_for(params, params.family(), nu)
    }

    /// Evaluates `family` at ν using `base` for everything but the family.
    /// Parameter construction is deferred to cache misses.
    pub fn evaluate_for(
        &mut self,
        base: &CodegreeParams,
        family: CodegreeFamily,
        nu: &BTreeSet<u32>,
    ) -> Result<ExtendedCount> {
        let pat = base.pattern();
        let size = nu.len() as u32;
        let hubs = nu.contains(&HUB_U) && nu.contains(&HUB_V);
        let b = pat.b();
        let anchor = || (1..=pat.a()).any(|j| nu.contains(&pat.internal(b - 1, j)));
        let layer_count = |t: u32| -> Result<u32> {
            Ok(nu.intersection(&pat.layer_set(t)?).count() as u32)
        };
        let forest_key = |pat: &ThetaPattern| -> Option<(u8, u32, u32, u32, u32, u32)> {
            if !pat.induces_forest(nu) {
                return None;
            }
            let e = pat.induced_edges(nu).len() as u32;
            if e == 0 {
                None
            } else {
                Some((0, 0, 0, e, 0, 0))
            }
        };
        let key = match family {
            CodegreeFamily::Forest => match forest_key(pat) {
                None => return Ok(ExtendedCount::Unbounded),
                Some(key) => key,
            },
            CodegreeFamily::FullLength { s } => {
                if !hubs {
                    return Ok(ExtendedCount::Unbounded);
                }
                (1, s, 0, size, 0, 0)
            }
            CodegreeFamily::Truncated { s, t } => {
                if !hubs {
                    return Ok(ExtendedCount::Unbounded);
                }
                (2, s, t, size, layer_count(t)?, 0)
            }
            CodegreeFamily::Anchored { t } => {
                if t == b || !hubs || !anchor() {
                    return Ok(ExtendedCount::Unbounded);
                }
                (3, 0, t, size, layer_count(t)?, 1)
            }
            CodegreeFamily::Combined { t } => {
                if pat.induces_forest(nu) {
                    match forest_key(pat) {
                        None => return Ok(ExtendedCount::Unbounded),
                        Some(key) => key,
                    }
                } else {
                    (4, 0, t, size, layer_count(t)?, anchor() as u32)
                }
            }
        };
        if let Some(hit) = self.map.get(&key) {
            return Ok(hit.clone());
        }
        let value = if family == base.family() {
            evaluate_codegree(base, nu)?
        } else {
            evaluate_codegree(&base.with_family(family)?, nu)?
        };
        self.map.insert(key, value.clone());
        Ok(value)
    }
}

/// Shape summary of a pattern-vertex subset: everything the threshold
/// formulas depend on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternSubsetSignature {
    /// |ν|.
    pub size: u32,
    /// Induced edge count.
    pub edges: u32,
    pub has_u: bool,
    pub has_v: bool,
    /// Whether some last-layer vertex w_{b-1}^j is present.
    pub has_last_layer: bool,
    /// |ν ∩ F_t| for the layer set at truncation t.
    pub f: u32,
    /// f when b-t is even, f-1 when odd (clamped at 0 for sets where the
    /// anchored family is unbounded anyway).
    pub g: u32,
    /// When ν is exactly the hubs plus p >= 1 complete hub-to-hub paths, the
    /// number p of those paths; otherwise 0.
    pub paths: u32,
}

/// Computes the signature of `nu` at truncation `t` (`2 <= t <= b`).
pub fn signature_of(
    pattern: &ThetaPattern,
    nu: &BTreeSet<u32>,
    t: u32,
) -> Result<PatternSubsetSignature> {
    if let Some(&max) = nu.iter().next_back() {
        if max >= pattern.vertex_count() {
            return Err(Error::Domain(format!(
                "pattern vertex {max} out of range (pattern has {})",
                pattern.vertex_count()
            )));
        }
    }
    let b = pattern.b();
    if !(2..=b).contains(&t) {
        return Err(Error::Domain(format!(
            "signature needs 2 <= t <= b = {b}, got t = {t}"
        )));
    }
    let f = nu.intersection(&pattern.layer_set(t)?).count() as u32;
    let g = if (b - t) % 2 == 0 { f } else { f.saturating_sub(1) };
    let has_last_layer = (1..=pattern.a()).any(|j| nu.contains(&pattern.internal(b - 1, j)));

    let mut full_paths = 0u32;
    let mut covered: BTreeSet<u32> = BTreeSet::new();
    for j in 1..=pattern.a() {
        let internals: Vec<u32> = (1..b).map(|i| pattern.internal(i, j)).collect();
        if internals.iter().all(|w| nu.contains(w)) {
            full_paths += 1;
            covered.extend(internals);
        }
    }
    covered.insert(HUB_U);
    covered.insert(HUB_V);
    let path_complete = full_paths >= 1 && nu == &covered;

    Ok(PatternSubsetSignature {
        size: nu.len() as u32,
        edges: pattern.induced_edges(nu).len() as u32,
        has_u: nu.contains(&HUB_U),
        has_v: nu.contains(&HUB_V),
        has_last_layer,
        f,
        g,
        paths: if path_complete { full_paths } else { 0 },
    })
}

/// Verdict for one scan class: either certified exponent zones cover every
/// admissible host exponent γ = log_n k ∈ [0, (b-1)/b], or an open interval
/// of exponents remains on which no branch certificate applies.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScanVerdict {
    /// The zones cover the whole range: the envelope stays within a constant
    /// multiple of the per-edge budget at every admissible host scale.
    Feasible,
    /// Exponents strictly between the endpoints are uncovered.
    Infeasible {
        gap_lo: BigRational,
        gap_hi: BigRational,
    },
}

/// A certified range of host exponents γ; closed where bounded.
enum GammaZone {
    All,
    Empty,
    UpTo(BigRational),
    From(BigRational),
}

/// Coverage verdict for the cyclic classes whose 2-core is the two hubs plus
/// `p` complete paths, at truncation `t`. Stripping a leaf costs a bounded
/// factor on the envelope and on the budget alike, so every cyclic subset
/// inherits its core's verdict.
///
/// With γ = log_n k, f = p⌈(b-t)/2⌉, h = 2t + f - b - 2, and
/// g = (p-2)⌈(b-t)/2⌉ + (b-t), the envelope's branches certify the budget on
/// three zones:
///
/// - anchored branch against the k^{b/(b-1)} budget arm:
///   γ ≤ (b-1)g / (b(pb + g));
/// - truncated branch (s = 0) against the same arm:
///   γ ≤ (b-1)h / (b((p-1)b + h));
/// - truncated branch against the k·n^{(b-1)/(b(ab-1))} arm:
///   (b-1-h)·γ ≥ (b-1)X / (b(ab-1)) where X = (b-1)(pb-1) - h(ab-1).
///
/// At t = b the layer statistics vanish and the truncated branch closes the
/// whole range for every p ≤ a, so the class is always feasible there.
fn cyclic_zone_verdict(a: u32, b: u32, t: u32, p: u32) -> ScanVerdict {
    let (a, b, t, p) = (i64::from(a), i64::from(b), i64::from(t), i64::from(p));
    if t == b {
        return ScanVerdict::Feasible;
    }
    let half = (b - t + 1) / 2;
    let f = p * half;
    let h = 2 * t + f - b - 2;
    debug_assert!(h >= 0, "p, t >= 2 forces 2t + f - b - 2 >= 0");
    let g = (p - 2) * half + (b - t);

    let anchored = GammaZone::UpTo(ratio((b - 1) * g, b * (p * b + g)));
    let truncated_low = GammaZone::UpTo(ratio((b - 1) * h, b * ((p - 1) * b + h)));
    let x = (b - 1) * (p * b - 1) - h * (a * b - 1);
    let den = b - 1 - h;
    let truncated_high = if x <= 0 && den >= 0 {
        GammaZone::All
    } else if x <= 0 {
        GammaZone::UpTo(ratio((b - 1) * x, b * (a * b - 1) * den))
    } else if den > 0 {
        GammaZone::From(ratio((b - 1) * x, b * (a * b - 1) * den))
    } else {
        GammaZone::Empty
    };

    let gamma_hi = ratio(b - 1, b);
    let mut up_max: Option<BigRational> = None;
    let mut down_min: Option<BigRational> = None;
    for zone in [anchored, truncated_low, truncated_high] {
        match zone {
            GammaZone::All => return ScanVerdict::Feasible,
            GammaZone::Empty => {}
            GammaZone::UpTo(x) => {
                up_max = Some(match up_max {
                    Some(m) => m.max(x),
                    None => x,
                });
            }
            GammaZone::From(x) => {
                down_min = Some(match down_min {
                    Some(m) => m.min(x),
                    None => x,
                });
            }
        }
    }
    let up_max = up_max.expect("the first two zones are always bounded above");
    if up_max >= gamma_hi {
        return ScanVerdict::Feasible;
    }
    if let Some(down) = &down_min {
        if *down <= up_max {
            return ScanVerdict::Feasible;
        }
    }
    let gap_hi = match down_min {
        Some(d) if d < gamma_hi => d,
        _ => gamma_hi,
    };
    ScanVerdict::Infeasible {
        gap_lo: up_max,
        gap_hi,
    }
}

/// One class of subsets in the budget scan: a truncation `t` together with
/// either the forests (`complete_paths = 0`) or the cyclic subsets whose
/// 2-core keeps `complete_paths >= 2` full paths.
#[derive(Clone, Debug)]
pub struct BoundScanRow {
    pub t: u32,
    /// True for the forest class at this truncation.
    pub forest: bool,
    /// Complete hub-to-hub paths of the 2-core; 0 for the forest class.
    pub complete_paths: u32,
    /// Signature of a smallest member, as a concrete witness.
    pub representative: PatternSubsetSignature,
    /// (path-shape multiset, hub choice) profiles feeding the class.
    pub profiles: u64,
    pub verdict: ScanVerdict,
    /// Largest measured envelope/budget ratio over the finite grid.
    pub grid_cprime: f64,
}

/// Result of [`simplified_bound_check`]: per-class verdicts plus the
/// measured grid constant.
#[derive(Clone, Debug)]
pub struct BoundScanReport {
    pub a: u32,
    pub b: u32,
    pub delta: BigRational,
    /// The (k, n) grid points measured.
    pub grid: Vec<(u64, u64)>,
    /// (profile, hub choice, truncation) combinations examined.
    pub candidates: u64,
    pub rows: Vec<BoundScanRow>,
    /// True when every row's verdict is feasible.
    pub feasible: bool,
    /// Smallest constant the measured grid alone would certify.
    pub grid_cprime: f64,
}

impl BoundScanReport {
    /// The row at truncation `t`; `complete_paths = 0` selects the forest
    /// class.
    pub fn row(&self, t: u32, complete_paths: u32) -> Option<&BoundScanRow> {
        self.rows
            .iter()
            .find(|r| r.t == t && r.complete_paths == complete_paths)
    }

    /// JSON dump with verdicts and measured constants; gap endpoints and δ
    /// are rendered as exact rational strings.
    pub fn to_json(&self) -> String {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|r| {
                let verdict = match &r.verdict {
                    ScanVerdict::Feasible => serde_json::json!("feasible"),
                    ScanVerdict::Infeasible { gap_lo, gap_hi } => serde_json::json!({
                        "gap_lo": gap_lo.to_string(),
                        "gap_hi": gap_hi.to_string(),
                    }),
                };
                serde_json::json!({
                    "t": r.t,
                    "forest": r.forest,
                    "complete_paths": r.complete_paths,
                    "profiles": r.profiles,
                    "verdict": verdict,
                    "grid_cprime": r.grid_cprime,
                })
            })
            .collect();
        serde_json::json!({
            "a": self.a,
            "b": self.b,
            "delta": self.delta.to_string(),
            "grid": self.grid,
            "candidates": self.candidates,
            "feasible": self.feasible,
            "grid_cprime": self.grid_cprime,
            "rows": rows,
        })
        .to_string()
    }
}

/// Per-path trace of a subset: which internal positions 1..b-1 survive on
/// one path, reduced to the counts the threshold formulas read.
struct PathShape {
    vertices: i64,
    /// Edges between consecutive kept positions.
    within: i64,
    /// 1 when position 1 (the hub-u neighbour) is kept.
    touch_u: i64,
    /// 1 when position b-1 (the hub-v neighbour) is kept.
    touch_v: i64,
    complete: bool,
    /// layer[t-2] = |trace ∩ F_t| for 2 <= t < b.
    layer: Vec<i64>,
}

fn path_shapes(b: u32) -> Vec<PathShape> {
    let m = b - 1;
    (0u32..1 << m)
        .map(|mask| {
            let keep = |i: u32| mask >> (i - 1) & 1 == 1;
            let layer = (2..b)
                .map(|t| (t..b).step_by(2).filter(|&i| keep(i)).count() as i64)
                .collect();
            PathShape {
                vertices: i64::from(mask.count_ones()),
                within: (1..m).filter(|&i| keep(i) && keep(i + 1)).count() as i64,
                touch_u: i64::from(keep(1)),
                touch_v: i64::from(keep(m)),
                complete: mask == (1 << m) - 1,
                layer,
            }
        })
        .collect()
}

/// Running totals of one profile (a multiset of path shapes) during the
/// stars-and-bars walk.
struct ProfileTotals {
    vertices: i64,
    within: i64,
    touch_u: i64,
    touch_v: i64,
    complete: i64,
    layer: Vec<i64>,
}

impl ProfileTotals {
    fn zero(b: u32) -> Self {
        ProfileTotals {
            vertices: 0,
            within: 0,
            touch_u: 0,
            touch_v: 0,
            complete: 0,
            layer: vec![0; b.saturating_sub(2) as usize],
        }
    }

    fn apply(&mut self, shape: &PathShape, count: i64) {
        self.vertices += count * shape.vertices;
        self.within += count * shape.within;
        self.touch_u += count * shape.touch_u;
        self.touch_v += count * shape.touch_v;
        self.complete += count * i64::from(shape.complete);
        for (acc, l) in self.layer.iter_mut().zip(&shape.layer) {
            *acc += count * l;
        }
    }
}

fn walk_profiles(
    shapes: &[PathShape],
    idx: usize,
    remaining: i64,
    totals: &mut ProfileTotals,
    visit: &mut impl FnMut(&ProfileTotals),
) {
    if idx + 1 == shapes.len() {
        totals.apply(&shapes[idx], remaining);
        visit(totals);
        totals.apply(&shapes[idx], -remaining);
        return;
    }
    for count in 0..=remaining {
        totals.apply(&shapes[idx], count);
        walk_profiles(shapes, idx + 1, remaining - count, totals, visit);
        totals.apply(&shapes[idx], -count);
    }
}

#[derive(Default)]
struct RowAccum {
    profiles: u64,
    /// (|ν| << 32) | f -> largest induced edge count seen; cyclic classes
    /// only, where the envelope ignores e and the budget shrinks in it.
    tuples: HashMap<u64, i64>,
    /// Induced edge counts seen; forest classes only.
    forest_edges: BTreeSet<i64>,
}

fn binomial_u128(n: u128, k: u128) -> Option<u128> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - k + 1 + i)?;
        acc /= i + 1;
    }
    Some(acc)
}

fn dyadic_points(lo: u64, hi: u64) -> Vec<u64> {
    let mut points = Vec::new();
    let mut p = lo.max(1).next_power_of_two();
    while p <= hi {
        points.push(p);
        if p > hi / 2 {
            break;
        }
        p *= 2;
    }
    points
}

/// Cap on the stars-and-bars profile count, keeping scans interactive.
const PROFILE_CAP: u128 = 3_000_000;

/// Decides, class by class, whether the combined envelope stays within a
/// constant multiple of the per-edge budget
///
///   k^{ab} n² / (k n^{1+1/b} · min{k^{b/(b-1)}, k·n^{(b-1)/(b(ab-1))}}^{e-1})
///
/// as n → ∞ with k = n^γ, uniformly over 1 ≤ k ≤ n^{1-1/b}, and measures the
/// smallest constant the dyadic grid k ∈ k_range, n ∈ n_range would certify.
///
/// Subsets of V(θ_{a,b}) are grouped by truncation and class: forests always
/// meet the budget with a constant depending only on (a, b, δ); a cyclic
/// subset inherits the verdict of its 2-core, decided by exponent-zone
/// coverage (see [`ScanVerdict`]). Subsets inducing no edge lie outside
/// every threshold family and are skipped, as is ν = V(θ) (e = ab).
///
/// Errors: `Domain` when b < 3, a < 3, δ ≤ 0, or the grid violates
/// k ≤ n^{1-1/b}; `InvalidParameter` on empty ranges; `Budget` when the
/// profile count would exceed the scan cap.
pub fn simplified_bound_check(
    a: u32,
    b: u32,
    k_range: (u64, u64),
    n_range: (u64, u64),
    delta: &BigRational,
) -> Result<BoundScanReport> {
    if b < 3 {
        return Err(Error::Domain(format!("scan needs b >= 3, got b = {b}")));
    }
    if a < 3 {
        return Err(Error::Domain(format!("scan needs a >= 3, got a = {a}")));
    }
    if !delta.is_positive() {
        return Err(Error::Domain(format!(
            "delta must be positive, got {delta}"
        )));
    }
    if k_range.0 > k_range.1 || k_range.1 == 0 {
        return Err(Error::InvalidParameter(format!(
            "empty k range {k_range:?}"
        )));
    }
    if n_range.0 > n_range.1 || n_range.1 < 2 {
        return Err(Error::InvalidParameter(format!(
            "host range {n_range:?} needs n >= 2"
        )));
    }
    let shape_count = 1u128
        .checked_shl(b - 1)
        .filter(|&s| s <= PROFILE_CAP)
        .ok_or_else(|| Error::Budget(format!("2^{} path shapes exceed the scan cap", b - 1)))?;
    let profile_count = binomial_u128(u128::from(a) + shape_count - 1, shape_count - 1)
        .filter(|&c| c <= PROFILE_CAP)
        .ok_or_else(|| {
            Error::Budget(format!(
                "profile count C({}, {}) exceeds the scan cap {PROFILE_CAP}",
                u128::from(a) + shape_count - 1,
                shape_count - 1
            ))
        })?;
    let _ = profile_count;

    let k_points = dyadic_points(k_range.0, k_range.1);
    if k_points.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "no power of two inside k range {k_range:?}"
        )));
    }
    let n_points = dyadic_points(n_range.0.max(2), n_range.1);
    if n_points.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "no power of two inside host range {n_range:?}"
        )));
    }
    let k_hi = BigUint::from(*k_points.last().expect("nonempty")).pow(b);
    let n_lo = BigUint::from(n_points[0]).pow(b - 1);
    if k_hi > n_lo {
        return Err(Error::Domain(format!(
            "grid violates n^{{1-1/b}} >= k at k = {}, n = {}",
            k_points.last().expect("nonempty"),
            n_points[0]
        )));
    }

    let pattern = ThetaPattern::new(a, b)?;
    let ab = i64::from(a) * i64::from(b);
    let shapes = path_shapes(b);
    let mut rows: BTreeMap<(u32, u32), RowAccum> = BTreeMap::new();
    let mut candidates = 0u64;
    let mut totals = ProfileTotals::zero(b);
    walk_profiles(&shapes, 0, i64::from(a), &mut totals, &mut |totals| {
        for hub_u in 0..2i64 {
            for hub_v in 0..2i64 {
                let edges = totals.within + hub_u * totals.touch_u + hub_v * totals.touch_v;
                if edges < 1 || edges >= ab {
                    continue;
                }
                let cyclic = hub_u == 1 && hub_v == 1 && totals.complete >= 2;
                let size = hub_u + hub_v + totals.vertices;
                for t in 2..=b {
                    candidates += 1;
                    let key = (t, if cyclic { totals.complete as u32 } else { 0 });
                    let row = rows.entry(key).or_default();
                    row.profiles += 1;
                    if cyclic {
                        let f = if t < b { totals.layer[(t - 2) as usize] } else { 0 };
                        let tuple = (size as u64) << 32 | f as u64;
                        let e_max = row.tuples.entry(tuple).or_insert(edges);
                        *e_max = (*e_max).max(edges);
                    } else {
                        row.forest_edges.insert(edges);
                    }
                }
            }
        }
    });

    let b_i = i64::from(b);
    let mut grid = Vec::new();
    let mut row_ratio: BTreeMap<(u32, u32), f64> = rows.keys().map(|&k| (k, 0.0)).collect();
    for &n in &n_points {
        let n_v = Value::from_u64(n)?;
        for &k in &k_points {
            grid.push((k, n));
            let k_v = Value::from_u64(k)?;
            let arm_q = k_v.pow(&ratio(b_i, b_i - 1));
            let arm_n = k_v.mul(&n_v.pow(&ratio(b_i - 1, b_i * (ab - 1))));
            let m = if arm_q.cmp_value(&arm_n) == Ordering::Less {
                arm_q
            } else {
                arm_n
            };
            // The ceiled envelope is far outside float range, so the ratio
            // is assembled in log space.
            let m_log = m.log2_approx();
            let base_log = k_v.mul(&n_v.pow(&ratio(b_i + 1, b_i))).log2_approx()
                - k_v.pow_i64(ab).mul(&n_v.pow_i64(2)).log2_approx();
            let ratio_of = |count: ExtendedCount, e: i64| -> Result<f64> {
                let c = match count {
                    ExtendedCount::Finite(c) => c,
                    ExtendedCount::Unbounded => {
                        return Err(Error::Internal(
                            "scanned envelope must be finite on edge-bearing subsets".to_string(),
                        ))
                    }
                };
                Ok((log2_approx_biguint(&c) + base_log + m_log * (e - 1) as f64).exp2())
            };
            for t in 2..=b {
                let params = CodegreeParams::new(
                    pattern.clone(),
                    k_v.clone(),
                    n,
                    delta.clone(),
                    CodegreeFamily::Combined { t },
                )?;
                let mut memo: HashMap<u64, ExtendedCount> = HashMap::new();
                for ((rt, p), accum) in rows.range((t, 0)..=(t, u32::MAX)) {
                    debug_assert_eq!(*rt, t);
                    let slot = row_ratio.get_mut(&(*rt, *p)).expect("row exists");
                    if *p == 0 {
                        for &e in &accum.forest_edges {
                            let shape = SubsetShape {
                                size: 0,
                                edges: e,
                                hubs: false,
                                anchor: false,
                                f: 0,
                                forest: true,
                            };
                            let count = combined_count_from_shape(&params, t, &shape)?;
                            *slot = slot.max(ratio_of(count, e)?);
                        }
                    } else {
                        for (&tuple, &e_max) in &accum.tuples {
                            let count = match memo.get(&tuple) {
                                Some(c) => c.clone(),
                                None => {
                                    let shape = SubsetShape {
                                        size: (tuple >> 32) as i64,
                                        edges: e_max,
                                        hubs: true,
                                        anchor: true,
                                        f: (tuple & u64::from(u32::MAX)) as i64,
                                        forest: false,
                                    };
                                    let count = combined_count_from_shape(&params, t, &shape)?;
                                    memo.insert(tuple, count.clone());
                                    count
                                }
                            };
                            *slot = slot.max(ratio_of(count, e_max)?);
                        }
                    }
                }
            }
        }
    }

    let mut out_rows = Vec::new();
    let mut feasible = true;
    let mut grid_cprime = 0.0f64;
    for ((t, p), accum) in &rows {
        let forest = *p == 0;
        let verdict = if forest {
            ScanVerdict::Feasible
        } else {
            cyclic_zone_verdict(a, b, *t, *p)
        };
        feasible &= verdict == ScanVerdict::Feasible;
        let nu: BTreeSet<u32> = if forest {
            [HUB_U, pattern.internal(1, 1)].into_iter().collect()
        } else {
            let mut nu: BTreeSet<u32> = [HUB_U, HUB_V].into_iter().collect();
            for j in 1..=*p {
                nu.extend((1..b).map(|i| pattern.internal(i, j)));
            }
            nu
        };
        let representative = signature_of(&pattern, &nu, *t)?;
        if !forest && representative.paths != *p {
            return Err(Error::Internal(format!(
                "representative for p = {p} has signature paths {}",
                representative.paths
            )));
        }
        let ratio = row_ratio[&(*t, *p)];
        grid_cprime = grid_cprime.max(ratio);
        out_rows.push(BoundScanRow {
            t: *t,
            forest,
            complete_paths: *p,
            representative,
            profiles: accum.profiles,
            verdict,
            grid_cprime: ratio,
        });
    }

    Ok(BoundScanReport {
        a,
        b,
        delta: delta.clone(),
        grid,
        candidates,
        rows: out_rows,
        feasible,
        grid_cprime,
    })
}

/// Default size cap for the subset degree index.
pub const DEFAULT_INDEX_CAP: usize = 6;

/// A hypergraph whose hyperedges are full-size valid assignments of the
/// pattern into the host.
///
/// Degrees of assignment subsets up to the index cap are answered from a
/// precomputed index; larger queries scan the hyperedge list.
#[derive(Clone, Debug)]
pub struct GHypergraph {
    pattern: ThetaPattern,
    host: Graph,
    hyperedges: Vec<Assignment>,
    edge_set: BTreeSet<Assignment>,
    index_cap: usize,
    degree_index: BTreeMap<Assignment, u64>,
}

/// One goodness violation: a subset whose degree exceeds its threshold.
#[derive(Clone, Debug)]
pub struct GoodnessViolation {
    pub chi: Assignment,
    pub degree: u64,
    pub bound: ExtendedCount,
}

/// Result of a goodness sweep.
#[derive(Clone, Debug)]
pub struct GoodnessReport {
    /// Number of distinct subsets checked.
    pub checked: u64,
    pub violations: Vec<GoodnessViolation>,
}

impl GoodnessReport {
    pub fn is_good(&self) -> bool {
        self.violations.is_empty()
    }
}

impl GHypergraph {
    /// Empty hypergraph with the default index cap.
    pub fn new(pattern: ThetaPattern, host: Graph) -> Self {
        Self::with_index_cap(pattern, host, DEFAULT_INDEX_CAP)
    }

    /// Empty hypergraph with an explicit index cap.
    pub fn with_index_cap(pattern: ThetaPattern, host: Graph, index_cap: usize) -> Self {
        GHypergraph {
            pattern,
            host,
            hyperedges: Vec::new(),
            edge_set: BTreeSet::new(),
            index_cap,
            degree_index: BTreeMap::new(),
        }
    }

    pub fn pattern(&self) -> &ThetaPattern {
        &self.pattern
    }

    pub fn host(&self) -> &Graph {
        &self.host
    }

    pub fn len(&self) -> usize {
        self.hyperedges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hyperedges.is_empty()
    }

    /// Hyperedges in insertion order.
    pub fn hyperedges(&self) -> &[Assignment] {
        &self.hyperedges
    }

    pub fn contains(&self, h: &Assignment) -> bool {
        self.edge_set.contains(h)
    }

    /// Inserts a full-size valid assignment. Returns false when the
    /// hyperedge was already present.
    pub fn insert(&mut self, h: Assignment) -> Result<bool> {
        if h.len() != self.pattern.vertex_count() as usize {
            return Err(Error::Domain(format!(
                "hyperedge has {} pairs, pattern needs {}",
                h.len(),
                self.pattern.vertex_count()
            )));
        }
        let report = validate_assignment(&self.pattern, &self.host, &h)?;
        if !report.is_valid() {
            return Err(Error::Domain(format!("hyperedge not valid: {report}")));
        }
        if !self.edge_set.insert(h.clone()) {
            return Ok(false);
        }
        for_each_subset_up_to(h.pairs(), self.index_cap, &mut |subset| {
            *self
                .degree_index
                .entry(Assignment::from_pairs(subset.to_vec()))
                .or_insert(0) += 1;
        });
        self.hyperedges.push(h);
        Ok(true)
    }

    /// Number of hyperedges containing `chi`. The assignment must be valid.
    pub fn degree(&self, chi: &Assignment) -> Result<u64> {
        let report = validate_assignment(&self.pattern, &self.host, chi)?;
        if !report.is_valid() {
            return Err(Error::Domain(format!("assignment not valid: {report}")));
        }
        Ok(self.degree_unchecked(chi))
    }

    /// Degree lookup without re-validating `chi`.
    pub fn degree_unchecked(&self, chi: &Assignment) -> u64 {
        if chi.len() <= self.index_cap {
            self.degree_index.get(chi).copied().unwrap_or(0)
        } else {
            self.hyperedges
                .iter()
                .filter(|h| chi.is_subset_of(h))
                .count() as u64
        }
    }

    /// Checks deg(χ) <= D(χ_θ) for every distinct subset χ of a hyperedge
    /// with |χ| <= cap. Subsets of valid assignments are valid, and any χ not
    /// inside a hyperedge has degree 0, so this covers all of 𝕍.
    pub fn is_good(&self, params: &CodegreeParams, cap: usize) -> Result<GoodnessReport> {
        if cap > self.pattern.vertex_count() as usize {
            return Err(Error::Domain(format!(
                "cap {cap} exceeds pattern size {}",
                self.pattern.vertex_count()
            )));
        }
        let mut seen: BTreeSet<Assignment> = BTreeSet::new();
        for h in &self.hyperedges {
            for_each_subset_up_to(h.pairs(), cap, &mut |subset| {
                seen.insert(Assignment::from_pairs(subset.to_vec()));
            });
        }
        let mut cache = ThresholdCache::new();
        let mut violations = Vec::new();
        for chi in &seen {
            let degree = self.degree_unchecked(chi);
            let bound = cache.evaluate(params, &chi.pattern_side())?;
            if bound.exceeded_by(&BigUint::from(degree)) {
                violations.push(GoodnessViolation {
                    chi: chi.clone(),
                    degree,
                    bound,
                });
            }
        }
        Ok(GoodnessReport {
            checked: seen.len() as u64,
            violations,
        })
    }

    /// The link set of χ at ν: all γ with γ_θ = ν such that χ∪γ is valid and
    /// saturated (deg ≥ D((χ∪γ)_θ)). Empty whenever that threshold is
    /// unbounded, since degrees are finite.
    pub fn link_set(
        &self,
        params: &CodegreeParams,
        chi: &Assignment,
        nu: &BTreeSet<u32>,
    ) -> Result<Vec<Assignment>> {
        let report = validate_assignment(&self.pattern, &self.host, chi)?;
        if !report.is_valid() {
            return Err(Error::Domain(format!("assignment not valid: {report}")));
        }
        let chi_theta = chi.pattern_side();
        if nu.intersection(&chi_theta).next().is_some() {
            return Err(Error::Domain(
                "link set requires ν disjoint from the pattern side of χ".to_string(),
            ));
        }
        let full_theta: BTreeSet<u32> = chi_theta.union(nu).copied().collect();
        let bound = evaluate_codegree(params, &full_theta)?;
        let threshold = match bound {
            ExtendedCount::Unbounded => return Ok(Vec::new()),
            ExtendedCount::Finite(v) => v,
        };

        let targets: Vec<u32> = nu.iter().copied().collect();
        let mut used: BTreeSet<u32> = chi.host_side();
        let mut map: BTreeMap<u32, u32> = chi.pairs().iter().copied().collect();
        let mut current: Vec<(u32, u32)> = Vec::new();
        let mut out = Vec::new();
        self.extend_links(
            params,
            &targets,
            0,
            &mut used,
            &mut map,
            &mut current,
            chi,
            &threshold,
            &mut out,
        );
        Ok(out)
    }

    #[allow(clippy::too_many_arguments)]
    fn extend_links(
        &self,
        params: &CodegreeParams,
        targets: &[u32],
        depth: usize,
        used: &mut BTreeSet<u32>,
        map: &mut BTreeMap<u32, u32>,
        current: &mut Vec<(u32, u32)>,
        chi: &Assignment,
        threshold: &BigUint,
        out: &mut Vec<Assignment>,
    ) {
        if depth == targets.len() {
            let gamma = Assignment::from_pairs(current.clone());
            let union = chi.union(&gamma);
            if BigUint::from(self.degree_unchecked(&union)) >= *threshold {
                out.push(gamma);
            }
            return;
        }
        let w = targets[depth];
        'hosts: for z in self.host.vertices() {
            if used.contains(&z) {
                continue;
            }
            // Pattern edges from w into already-assigned vertices must map
            // onto host edges.
            for &w2 in params.pattern().graph().neighbors(w) {
                if let Some(&z2) = map.get(&w2) {
                    if !self.host.has_edge(z, z2) {
                        continue 'hosts;
                    }
                }
            }
            used.insert(z);
            map.insert(w, z);
            current.push((w, z));
            self.extend_links(params, targets, depth + 1, used, map, current, chi, threshold, out);
            current.pop();
            map.remove(&w);
            used.remove(&z);
        }
    }

    /// One hyperedge per line, as a JSON array of sorted pairs.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for h in &self.hyperedges {
            out.push_str(&serde_json::to_string(h.pairs()).expect("pairs serialize"));
            out.push('\n');
        }
        out
    }

    /// Parses [`to_json_lines`](Self::to_json_lines) output, validating every
    /// hyperedge against the pattern and host.
    pub fn from_json_lines(
        pattern: ThetaPattern,
        host: Graph,
        index_cap: usize,
        text: &str,
    ) -> Result<Self> {
        let mut hg = GHypergraph::with_index_cap(pattern, host, index_cap);
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let pairs: Vec<(u32, u32)> = serde_json::from_str(line)
                .map_err(|e| Error::Domain(format!("bad hyperedge line: {e}")))?;
            hg.insert(Assignment::from_pairs(pairs))?;
        }
        Ok(hg)
    }
}

/// Calls `f` on every subset of `items` with size at most `cap` (including
/// the empty subset), in lexicographic order of chosen indices.
fn for_each_subset_up_to<T: Clone>(items: &[T], cap: usize, f: &mut impl FnMut(&[T])) {
    fn rec<T: Clone>(
        items: &[T],
        cap: usize,
        start: usize,
        current: &mut Vec<T>,
        f: &mut impl FnMut(&[T]),
    ) {
        f(current);
        if current.len() == cap {
            return;
        }
        for i in start..items.len() {
            current.push(items[i].clone());
            rec(items, cap, i + 1, current, f);
            current.pop();
        }
    }
    let mut current = Vec::new();
    rec(items, cap, 0, &mut current, f);
}
