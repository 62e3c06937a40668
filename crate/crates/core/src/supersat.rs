//! The incremental copy-collection builder: compatibility of partial
//! assignments against the three saturation families, hub-pair extension at
//! full and truncated lengths, a driver that grows the scaled collection
//! toward a density target, and the translation of a finished collection
//! into a hypergraph on host edges.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Signed;

use crate::error::{Error, Result};
use crate::exact::{ceil_log2_u64, ExtendedCount, Value};
use crate::expansion::{
    epsilon_schedule, refine_paths, x_set, ExpansionCertificate, ForbiddenSubgraph,
    RefineOutcome, RefineStage,
};
use crate::graph::{Graph, MultiGraph};
use crate::hypergraph::{
    host_scale, CodegreeFamily, CodegreeParams, GHypergraph, ThresholdCache, DEFAULT_INDEX_CAP,
};
use crate::pruning::{
    min_degree_core, remove_saturated_edges, scale_parameters, weighted_core, ScaleParams,
};
use crate::theta::{project, validate_assignment, Assignment, ThetaPattern, HUB_U, HUB_V};

/// Which saturation family a failing subset fell in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyKind {
    /// Forest-inducing subsets measured against the whole collection.
    Forest,
    /// Hub-plus-anchor subsets measured against the truncation union.
    Anchored,
    /// Hub-pair subsets measured against the single scaled cell.
    Scaled,
}

impl std::fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            FamilyKind::Forest => "forest",
            FamilyKind::Anchored => "anchored",
            FamilyKind::Scaled => "scaled",
        };
        write!(f, "{name}")
    }
}

/// The scaled threshold family for a cell: full-length at the top truncation,
/// truncated below it.
fn scaled_family(b: u32, s: u32, t: u32) -> CodegreeFamily {
    if t == b {
        CodegreeFamily::FullLength { s }
    } else {
        CodegreeFamily::Truncated { s, t }
    }
}

/// Whether a degree has reached a threshold (membership in the saturated
/// family, as opposed to exceeding it, which would break goodness).
fn reaches(degree: u64, bound: &ExtendedCount) -> bool {
    match bound {
        ExtendedCount::Unbounded => false,
        ExtendedCount::Finite(v) => BigUint::from(degree) >= *v,
    }
}

/// One goodness sweep summary over a single hypergraph and family.
#[derive(Clone, Debug)]
pub struct GoodnessRow {
    pub s: Option<u32>,
    pub t: Option<u32>,
    pub checked: u64,
    pub violations: u64,
}

/// Goodness results for every layer of a collection: scaled cells, anchored
/// truncation unions, the forest check on the whole collection, and the
/// combined envelope per truncation.
#[derive(Clone, Debug)]
pub struct FamilyGoodness {
    pub cells: Vec<GoodnessRow>,
    pub anchored: Vec<GoodnessRow>,
    pub forest: GoodnessRow,
    pub combined: Vec<GoodnessRow>,
}

impl FamilyGoodness {
    pub fn is_good(&self) -> bool {
        self.total_violations() == 0
    }

    pub fn total_checked(&self) -> u64 {
        let sum = |rows: &[GoodnessRow]| rows.iter().map(|r| r.checked).sum::<u64>();
        sum(&self.cells) + sum(&self.anchored) + self.forest.checked + sum(&self.combined)
    }

    pub fn total_violations(&self) -> u64 {
        let sum = |rows: &[GoodnessRow]| rows.iter().map(|r| r.violations).sum::<u64>();
        sum(&self.cells) + sum(&self.anchored) + self.forest.violations + sum(&self.combined)
    }
}

/// A collection of scaled cell hypergraphs indexed by (s, t), with the
/// truncation unions and the overall union maintained incrementally so that
/// degree queries against any of the three levels stay cheap.
///
/// Every insertion is guarded by the compatibility check of the incoming
/// hyperedge at its cell: degrees rise by exactly one on subsets of the new
/// hyperedge, so "all subset degrees strictly below their thresholds before"
/// is equivalent to "all three goodness predicates hold after".
#[derive(Clone, Debug)]
pub struct CollectionFamily {
    pattern: ThetaPattern,
    host: Graph,
    base: CodegreeParams,
    index_cap: usize,
    s_max: u32,
    cells: BTreeMap<(u32, u32), GHypergraph>,
    trunc: BTreeMap<u32, GHypergraph>,
    union_all: GHypergraph,
    thresholds: RefCell<ThresholdCache>,
    min_forest: RefCell<Option<BigUint>>,
}

impl CollectionFamily {
    /// Empty collection over a host, with the scale k measured from the
    /// host's own edge count.
    pub fn new(
        pattern: ThetaPattern,
        host: Graph,
        delta: BigRational,
        index_cap: usize,
    ) -> Result<Self> {
        let n = u64::from(host.n());
        let k = host_scale(host.edge_count() as u64, n, pattern.b())?;
        let base = CodegreeParams::new(pattern.clone(), k, n, delta, CodegreeFamily::Forest)?;
        let s_max = u32::try_from(3 * ceil_log2_u64(n))
            .map_err(|_| Error::Domain("host order too large".to_string()))?;
        let union_all = GHypergraph::with_index_cap(pattern.clone(), host.clone(), index_cap);
        Ok(CollectionFamily {
            pattern,
            host,
            base,
            index_cap,
            s_max,
            cells: BTreeMap::new(),
            trunc: BTreeMap::new(),
            union_all,
            thresholds: RefCell::new(ThresholdCache::new()),
            min_forest: RefCell::new(None),
        })
    }

    pub fn pattern(&self) -> &ThetaPattern {
        &self.pattern
    }

    pub fn host(&self) -> &Graph {
        &self.host
    }

    /// Shared evaluation parameters (forest family); other families derive
    /// from these via `with_family`.
    pub fn params(&self) -> &CodegreeParams {
        &self.base
    }

    pub fn s_max(&self) -> u32 {
        self.s_max
    }

    pub fn index_cap(&self) -> usize {
        self.index_cap
    }

    /// Number of hyperedges across all cells.
    pub fn len(&self) -> usize {
        self.union_all.len()
    }

    pub fn is_empty(&self) -> bool {
        self.union_all.is_empty()
    }

    pub fn cell(&self, s: u32, t: u32) -> Option<&GHypergraph> {
        self.cells.get(&(s, t))
    }

    pub fn cells(&self) -> impl Iterator<Item = (&(u32, u32), &GHypergraph)> {
        self.cells.iter()
    }

    /// Union of all cells at one truncation.
    pub fn union_t(&self, t: u32) -> Option<&GHypergraph> {
        self.trunc.get(&t)
    }

    /// Union of every cell.
    pub fn union_all(&self) -> &GHypergraph {
        &self.union_all
    }

    fn check_ranges(&self, s: u32, t: u32) -> Result<()> {
        if s > self.s_max {
            return Err(Error::Domain(format!(
                "scale s = {s} outside 0..={} for this host",
                self.s_max
            )));
        }
        let b = self.pattern.b();
        if !(2..=b).contains(&t) {
            return Err(Error::Domain(format!(
                "truncation t = {t} outside 2..={b}"
            )));
        }
        Ok(())
    }

    /// Cached threshold evaluation for a family at a pattern subset.
    fn threshold(&self, family: CodegreeFamily, nu: &BTreeSet<u32>) -> Result<ExtendedCount> {
        self.thresholds
            .borrow_mut()
            .evaluate_for(&self.base, family, nu)
    }

    /// Degree of a subset in one cell (0 when the cell does not exist yet).
    fn cell_degree(&self, s: u32, t: u32, chi: &Assignment) -> u64 {
        self.cells
            .get(&(s, t))
            .map(|gh| gh.degree_unchecked(chi))
            .unwrap_or(0)
    }

    /// Degree of a subset in one truncation union.
    fn trunc_degree(&self, t: u32, chi: &Assignment) -> u64 {
        self.trunc
            .get(&t)
            .map(|gh| gh.degree_unchecked(chi))
            .unwrap_or(0)
    }

    /// Inserts a full-size valid hyperedge into the cell (s, t) and both
    /// unions. Returns false when the hyperedge is already present anywhere
    /// in the collection. Errors when the insertion would push some subset
    /// past its threshold in any of the three families.
    pub fn insert(&mut self, h: Assignment, s: u32, t: u32) -> Result<bool> {
        self.check_ranges(s, t)?;
        if self.union_all.contains(&h) {
            return Ok(false);
        }
        let report = compatible(self, &h, s, t, None)?;
        if !report.valid {
            return Err(Error::Domain("hyperedge is not a valid assignment".to_string()));
        }
        if let Some(w) = &report.witness {
            return Err(Error::Domain(format!(
                "insertion would break goodness: subset of size {} saturated in the {} family \
                 (degree {}, threshold {})",
                w.chi.len(),
                w.family,
                w.degree,
                w.bound
            )));
        }
        let pattern = self.pattern.clone();
        let host = self.host.clone();
        let cap = self.index_cap;
        let cell = self
            .cells
            .entry((s, t))
            .or_insert_with(|| GHypergraph::with_index_cap(pattern.clone(), host.clone(), cap));
        let a = cell.insert(h.clone())?;
        let tr = self
            .trunc
            .entry(t)
            .or_insert_with(|| GHypergraph::with_index_cap(pattern, host, cap));
        let b = tr.insert(h.clone())?;
        let c = self.union_all.insert(h)?;
        if !(a && b && c) {
            return Err(Error::Internal(
                "collection layers disagreed on hyperedge membership".to_string(),
            ));
        }
        Ok(true)
    }

    /// Full goodness sweep at a subset-size cap: every scaled cell against
    /// its own thresholds, every truncation union against the anchored
    /// family, the whole collection against the forest family, and every
    /// truncation union against the combined envelope.
    pub fn goodness_check(&self, cap: usize) -> Result<FamilyGoodness> {
        let b = self.pattern.b();
        let cap = cap.min(self.pattern.vertex_count() as usize);
        let mut cells = Vec::new();
        for (&(s, t), gh) in &self.cells {
            let params = self.base.with_family(scaled_family(b, s, t))?;
            let rep = gh.is_good(&params, cap)?;
            cells.push(GoodnessRow {
                s: Some(s),
                t: Some(t),
                checked: rep.checked,
                violations: rep.violations.len() as u64,
            });
        }
        let mut anchored = Vec::new();
        let mut combined = Vec::new();
        for (&t, gh) in &self.trunc {
            let params = self.base.with_family(CodegreeFamily::Anchored { t })?;
            let rep = gh.is_good(&params, cap)?;
            anchored.push(GoodnessRow {
                s: None,
                t: Some(t),
                checked: rep.checked,
                violations: rep.violations.len() as u64,
            });
            let params = self.base.with_family(CodegreeFamily::Combined { t })?;
            let rep = gh.is_good(&params, cap)?;
            combined.push(GoodnessRow {
                s: None,
                t: Some(t),
                checked: rep.checked,
                violations: rep.violations.len() as u64,
            });
        }
        let rep = self.union_all.is_good(&self.base, cap)?;
        let forest = GoodnessRow {
            s: None,
            t: None,
            checked: rep.checked,
            violations: rep.violations.len() as u64,
        };
        Ok(FamilyGoodness { cells, anchored, forest, combined })
    }

    /// Smallest forest threshold over all induced edge counts, used to skip
    /// the saturated-forest scan outright while the collection is small.
    fn min_forest_threshold(&self) -> Result<BigUint> {
        if let Some(v) = self.min_forest.borrow().as_ref() {
            return Ok(v.clone());
        }
        let pat = &self.pattern;
        let a = i64::from(pat.a());
        let b = i64::from(pat.b());
        let k = self.base.k();
        let n = Value::from_u64(self.base.n())?;
        let delta = Value::from_rational(self.base.delta())?;
        let numerator = k.pow_i64(a * b).mul(&n.pow_i64(2));
        let ratio = |num: i64, den: i64| BigRational::new(num.into(), den.into());
        let base = delta.mul(k).mul(&n.pow(&ratio(b + 1, b)));
        let step = delta.mul(&k.pow(&ratio(b, b - 1)));
        let mut best: Option<Value> = None;
        for e in 1..=(a * b) {
            let value = numerator.div(&base.mul(&step.pow_i64(e - 1)));
            best = Some(match best {
                None => value,
                Some(cur) => {
                    if value.cmp_value(&cur) == std::cmp::Ordering::Less {
                        value
                    } else {
                        cur
                    }
                }
            });
        }
        let min = best.expect("at least one edge count").ceil_big();
        *self.min_forest.borrow_mut() = Some(min.clone());
        Ok(min)
    }

    /// Host-side images of every forest-saturated subset of the collection:
    /// the subgraphs that refined path families must avoid. Only subsets of
    /// existing hyperedges can carry positive degree, so the scan walks
    /// those.
    pub fn forbidden_forests(&self) -> Result<Vec<ForbiddenSubgraph>> {
        if self.union_all.is_empty() {
            return Ok(Vec::new());
        }
        let count = BigUint::from(self.union_all.len() as u64);
        if count < self.min_forest_threshold()? {
            return Ok(Vec::new());
        }
        let mut seen: BTreeSet<Assignment> = BTreeSet::new();
        for h in self.union_all.hyperedges() {
            let pairs = h.pairs().to_vec();
            collect_subsets(&pairs, &mut seen);
        }
        let mut shapes: BTreeSet<(Vec<u32>, Vec<(u32, u32)>)> = BTreeSet::new();
        for chi in &seen {
            let nu = chi.pattern_side();
            let edges = self.pattern.induced_edges(&nu);
            if edges.is_empty() || !self.pattern.induces_forest(&nu) {
                continue;
            }
            let bound = self.threshold(CodegreeFamily::Forest, &nu)?;
            if !reaches(self.union_all.degree_unchecked(chi), &bound) {
                continue;
            }
            let verts: Vec<u32> = chi.host_side().into_iter().collect();
            let mut image: Vec<(u32, u32)> = Vec::new();
            for (w1, w2) in edges {
                let z1 = chi.host_of(w1).expect("assigned");
                let z2 = chi.host_of(w2).expect("assigned");
                image.push(if z1 < z2 { (z1, z2) } else { (z2, z1) });
            }
            image.sort_unstable();
            shapes.insert((verts, image));
        }
        Ok(shapes
            .into_iter()
            .map(|(verts, edges)| {
                ForbiddenSubgraph::new(verts.into_iter().collect(), edges.into_iter().collect())
            })
            .collect())
    }
}

/// Records every nonempty subset of a pair list into `out`.
fn collect_subsets(pairs: &[(u32, u32)], out: &mut BTreeSet<Assignment>) {
    fn rec(
        pairs: &[(u32, u32)],
        start: usize,
        current: &mut Vec<(u32, u32)>,
        out: &mut BTreeSet<Assignment>,
    ) {
        if !current.is_empty() {
            out.insert(Assignment::from_pairs(current.clone()));
        }
        for i in start..pairs.len() {
            current.push(pairs[i]);
            rec(pairs, i + 1, current, out);
            current.pop();
        }
    }
    let mut current = Vec::new();
    rec(pairs, 0, &mut current, out);
}

/// A subset that reached its threshold, blocking compatibility.
#[derive(Clone, Debug)]
pub struct CompatibilityWitness {
    pub chi: Assignment,
    pub family: FamilyKind,
    pub degree: u64,
    pub bound: BigUint,
}

/// Outcome of a compatibility check.
#[derive(Clone, Debug)]
pub struct CompatibilityReport {
    /// Whether the assignment itself is valid against pattern and host.
    pub valid: bool,
    /// Valid and no subset saturated in any of the three families.
    pub compatible: bool,
    /// First saturated subset in enumeration order, if any.
    pub witness: Option<CompatibilityWitness>,
    pub subsets_checked: u64,
    pub shortcut_hits: u64,
}

/// Checks whether an assignment is compatible at the cell (s, t): valid, and
/// no subset is saturated against the forest family (whole collection), the
/// anchored family (truncation union), or the scaled family (the cell).
///
/// When the pruned host survivor graph is supplied, subsets whose pattern
/// side induces exactly one edge with a surviving image are skipped in the
/// forest scan: surviving edges are strictly below the single-edge threshold
/// by construction, and subset degrees only shrink.
pub fn compatible(
    fam: &CollectionFamily,
    chi: &Assignment,
    s: u32,
    t: u32,
    g0: Option<&Graph>,
) -> Result<CompatibilityReport> {
    compatible_focus(fam, chi, s, t, g0, None)
}

/// Compatibility restricted to subsets meeting `focus`: sound as a full
/// check whenever every subset disjoint from `focus` was verified before and
/// no degree has changed since.
fn compatible_focus(
    fam: &CollectionFamily,
    chi: &Assignment,
    s: u32,
    t: u32,
    g0: Option<&Graph>,
    focus: Option<&[(u32, u32)]>,
) -> Result<CompatibilityReport> {
    fam.check_ranges(s, t)?;
    let report = validate_assignment(&fam.pattern, &fam.host, chi)?;
    if !report.is_valid() {
        return Ok(CompatibilityReport {
            valid: false,
            compatible: false,
            witness: None,
            subsets_checked: 0,
            shortcut_hits: 0,
        });
    }
    let mut checked = 0u64;
    let mut shortcuts = 0u64;
    let witness = scan_for_saturation(
        fam,
        chi.pairs(),
        s,
        t,
        g0,
        focus,
        &mut checked,
        &mut shortcuts,
    )?;
    Ok(CompatibilityReport {
        valid: true,
        compatible: witness.is_none(),
        witness,
        subsets_checked: checked,
        shortcut_hits: shortcuts,
    })
}

/// Walks the nonempty subsets of `pairs` in enumeration order and returns
/// the first one saturated in any family.
#[allow(clippy::too_many_arguments)]
fn scan_for_saturation(
    fam: &CollectionFamily,
    pairs: &[(u32, u32)],
    s: u32,
    t: u32,
    g0: Option<&Graph>,
    focus: Option<&[(u32, u32)]>,
    checked: &mut u64,
    shortcuts: &mut u64,
) -> Result<Option<CompatibilityWitness>> {
    #[allow(clippy::too_many_arguments)]
    fn rec(
        fam: &CollectionFamily,
        pairs: &[(u32, u32)],
        s: u32,
        t: u32,
        g0: Option<&Graph>,
        focus: Option<&[(u32, u32)]>,
        start: usize,
        current: &mut Vec<(u32, u32)>,
        touches_focus: bool,
        checked: &mut u64,
        shortcuts: &mut u64,
    ) -> Result<Option<CompatibilityWitness>> {
        if !current.is_empty() && (focus.is_none() || touches_focus) {
            if let Some(w) = check_subset(fam, current, s, t, g0, checked, shortcuts)? {
                return Ok(Some(w));
            }
        }
        for i in start..pairs.len() {
            let pair = pairs[i];
            let now_touches =
                touches_focus || focus.map(|f| f.contains(&pair)).unwrap_or(false);
            current.push(pair);
            let hit = rec(
                fam, pairs, s, t, g0, focus, i + 1, current, now_touches, checked, shortcuts,
            )?;
            current.pop();
            if hit.is_some() {
                return Ok(hit);
            }
        }
        Ok(None)
    }
    let mut current = Vec::new();
    rec(
        fam, pairs, s, t, g0, focus, 0, &mut current, false, checked, shortcuts,
    )
}

/// Checks one subset against the three families in order.
fn check_subset(
    fam: &CollectionFamily,
    current: &[(u32, u32)],
    s: u32,
    t: u32,
    g0: Option<&Graph>,
    checked: &mut u64,
    shortcuts: &mut u64,
) -> Result<Option<CompatibilityWitness>> {
    *checked += 1;
    let chi = Assignment::from_pairs(current.to_vec());
    let nu = chi.pattern_side();
    let b = fam.pattern.b();

    let induced = fam.pattern.induced_edges(&nu);
    let skip_forest = match (induced.len(), g0) {
        (0, _) => true,
        (1, Some(g0)) => {
            let (w1, w2) = induced[0];
            let z1 = chi.host_of(w1).expect("assigned");
            let z2 = chi.host_of(w2).expect("assigned");
            if g0.has_edge(z1, z2) {
                *shortcuts += 1;
                true
            } else {
                false
            }
        }
        _ => false,
    };
    if !skip_forest {
        let bound = fam.threshold(CodegreeFamily::Forest, &nu)?;
        if !bound.is_unbounded() {
            let degree = fam.union_all.degree_unchecked(&chi);
            if reaches(degree, &bound) {
                let value = match bound {
                    ExtendedCount::Finite(v) => v,
                    ExtendedCount::Unbounded => unreachable!(),
                };
                return Ok(Some(CompatibilityWitness {
                    chi,
                    family: FamilyKind::Forest,
                    degree,
                    bound: value,
                }));
            }
        }
    }

    let bound = fam.threshold(CodegreeFamily::Anchored { t }, &nu)?;
    if !bound.is_unbounded() {
        let degree = fam.trunc_degree(t, &chi);
        if reaches(degree, &bound) {
            let value = match bound {
                ExtendedCount::Finite(v) => v,
                ExtendedCount::Unbounded => unreachable!(),
            };
            return Ok(Some(CompatibilityWitness {
                chi,
                family: FamilyKind::Anchored,
                degree,
                bound: value,
            }));
        }
    }

    let bound = fam.threshold(scaled_family(b, s, t), &nu)?;
    if !bound.is_unbounded() {
        let degree = fam.cell_degree(s, t, &chi);
        if reaches(degree, &bound) {
            let value = match bound {
                ExtendedCount::Finite(v) => v,
                ExtendedCount::Unbounded => unreachable!(),
            };
            return Ok(Some(CompatibilityWitness {
                chi,
                family: FamilyKind::Scaled,
                degree,
                bound: value,
            }));
        }
    }
    Ok(None)
}

/// Working state for one extension attempt: the host, its pruned survivor,
/// the compact core with its label map, the measured scale, the refined
/// certificate, the chosen hubs, the growing assignment, and the search
/// budget.
#[derive(Clone, Debug)]
pub struct BuilderState {
    g: Graph,
    g0: Graph,
    gprime: Graph,
    labels: Vec<u32>,
    sp: ScaleParams,
    cert: ExpansionCertificate,
    x: u32,
    y: Option<u32>,
    chi: Assignment,
    nodes_used: u64,
    node_budget: u64,
}

impl BuilderState {
    pub fn new(
        g: Graph,
        g0: Graph,
        gprime: Graph,
        labels: Vec<u32>,
        sp: ScaleParams,
        cert: ExpansionCertificate,
        node_budget: u64,
    ) -> Result<Self> {
        if labels.len() != gprime.n() as usize {
            return Err(Error::Domain(
                "label map does not match the core order".to_string(),
            ));
        }
        if sp.m() != u64::from(gprime.n()) {
            return Err(Error::Domain(
                "scale parameters do not match the core order".to_string(),
            ));
        }
        if !cert.well_formed() || cert.x() >= gprime.n() {
            return Err(Error::Domain("certificate is malformed".to_string()));
        }
        let x = labels[cert.x() as usize];
        Ok(BuilderState {
            g,
            g0,
            gprime,
            labels,
            sp,
            cert,
            x,
            y: None,
            chi: Assignment::new(),
            nodes_used: 0,
            node_budget,
        })
    }

    pub fn g(&self) -> &Graph {
        &self.g
    }

    pub fn g0(&self) -> &Graph {
        &self.g0
    }

    pub fn gprime(&self) -> &Graph {
        &self.gprime
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn sp(&self) -> &ScaleParams {
        &self.sp
    }

    pub fn cert(&self) -> &ExpansionCertificate {
        &self.cert
    }

    /// Host label of the chosen start hub.
    pub fn x(&self) -> u32 {
        self.x
    }

    /// Host label of the second hub once chosen.
    pub fn y(&self) -> Option<u32> {
        self.y
    }

    /// The most recently completed assignment.
    pub fn chi(&self) -> &Assignment {
        &self.chi
    }

    pub fn nodes_used(&self) -> u64 {
        self.nodes_used
    }

    fn host_label(&self, local: u32) -> u32 {
        self.labels[local as usize]
    }

    /// Counts one search node; false once the budget is exceeded.
    fn spend(&mut self) -> bool {
        self.nodes_used += 1;
        self.nodes_used <= self.node_budget
    }
}

/// Result of one extension attempt.
#[derive(Clone, Debug)]
pub enum CaseOutcome {
    /// A fresh compatible hyperedge together with the cell scale it belongs
    /// to.
    Extended { h: Assignment, s: u32 },
    /// The search space or node budget ran out without a fresh hyperedge.
    Exhausted,
}

/// Degree of the single-pair assignment (u -> x) in the whole collection.
fn hub_degree(fam: &CollectionFamily, x: u32) -> u64 {
    fam.union_all
        .degree_unchecked(&Assignment::from_pairs(vec![(HUB_U, x)]))
}

/// Degree of the hub-pair assignment in the whole collection.
fn joint_degree(fam: &CollectionFamily, x: u32, y: u32) -> u64 {
    fam.union_all
        .degree_unchecked(&Assignment::from_pairs(vec![(HUB_U, x), (HUB_V, y)]))
}

/// Smallest dyadic level r with 2^{-r}·whole <= part < 2^{-r+1}·whole.
fn dyadic_level(whole: u64, part: u64) -> Result<u32> {
    if part == 0 || whole == 0 || part > whole {
        return Err(Error::Domain(format!(
            "dyadic level needs 1 <= part <= whole, got {part}/{whole}"
        )));
    }
    let whole = u128::from(whole);
    let part = u128::from(part);
    (0..=64u32)
        .find(|&r| whole <= (part << r) && (part << r) < 2 * whole)
        .ok_or_else(|| Error::Internal("dyadic level out of range".to_string()))
}

/// Verifies the hub choices minimize collection degree over their candidate
/// pools, re-deriving both minima from scratch.
fn assert_hub_minimality(
    fam: &CollectionFamily,
    state: &BuilderState,
    y_pool: &BTreeSet<u32>,
) -> Result<()> {
    let pool_min = state
        .cert
        .x_pool()
        .iter()
        .map(|&v| hub_degree(fam, state.host_label(v)))
        .min()
        .ok_or_else(|| Error::Internal("empty start pool".to_string()))?;
    if hub_degree(fam, state.x) != pool_min {
        return Err(Error::Internal(
            "start hub does not minimize collection degree".to_string(),
        ));
    }
    let y = state
        .y
        .ok_or_else(|| Error::Internal("second hub missing".to_string()))?;
    let joint_min = y_pool
        .iter()
        .map(|&v| joint_degree(fam, state.x, state.host_label(v)))
        .min()
        .ok_or_else(|| Error::Internal("empty second-hub pool".to_string()))?;
    if joint_degree(fam, state.x, y) != joint_min {
        return Err(Error::Internal(
            "second hub does not minimize joint degree".to_string(),
        ));
    }
    Ok(())
}

/// Extends at the full truncation t = b: weights the last layer by path
/// counts, extracts its weighted core, sets the cell scale from the dyadic
/// window of the core size, picks the second hub minimizing joint degree,
/// and searches for `a` internally disjoint certificate paths into it that
/// keep every prefix compatible. Returns `Exhausted` when the weighted core
/// is empty, every branch fails, or the node budget runs out.
pub fn extend_case_b(state: &mut BuilderState, fam: &CollectionFamily) -> Result<CaseOutcome> {
    let pat = fam.pattern().clone();
    let b = pat.b();
    if state.cert.t() != b {
        return Err(Error::Domain(format!(
            "full-length extension needs a certificate at t = b = {b}, got t = {}",
            state.cert.t()
        )));
    }
    if state.sp.b() != b || fam.host().n() != state.g.n() {
        return Err(Error::Domain(
            "state and collection disagree on the host or depth".to_string(),
        ));
    }
    let last_layer = &state.cert.layers()[b as usize];
    if last_layer.contains(&state.cert.x()) {
        return Err(Error::Internal(
            "start vertex survived in the last layer without ending a path".to_string(),
        ));
    }

    let by_end: BTreeMap<u32, Vec<Vec<u32>>> = state
        .cert
        .paths_by_endpoint()
        .into_iter()
        .map(|(v, paths)| (v, paths.into_iter().cloned().collect()))
        .collect();
    let mut weights: BTreeMap<u32, u64> = BTreeMap::new();
    for &v in last_layer {
        weights.insert(v, by_end.get(&v).map(|p| p.len() as u64).unwrap_or(0));
    }
    let bprime = match weighted_core(&weights, b) {
        Ok(set) => set,
        Err(Error::Domain(_)) => return Ok(CaseOutcome::Exhausted),
        Err(e) => return Err(e),
    };
    if bprime.is_empty() {
        return Ok(CaseOutcome::Exhausted);
    }

    let r = u32::try_from(state.sp.r())
        .map_err(|_| Error::Internal("negative dyadic level for a core".to_string()))?;
    let rprime = dyadic_level(state.sp.m(), bprime.len() as u64)?;
    let s = 2 * r + rprime;
    fam.check_ranges(s, b)?;

    let y_local = bprime
        .iter()
        .copied()
        .min_by_key(|&v| (joint_degree(fam, state.x, state.host_label(v)), v))
        .expect("nonempty core");
    let y = state.host_label(y_local);
    state.y = Some(y);

    let hubs = Assignment::from_pairs(vec![(HUB_U, state.x), (HUB_V, y)]);
    if !compatible(fam, &hubs, s, b, Some(&state.g0))?.compatible {
        return Ok(CaseOutcome::Exhausted);
    }

    let pool: Vec<Vec<u32>> = by_end.get(&y_local).cloned().unwrap_or_default();
    if pool.is_empty() {
        return Ok(CaseOutcome::Exhausted);
    }

    let mut used: BTreeSet<u32> = [state.cert.x(), y_local].into_iter().collect();
    let mut chi_pairs = hubs.pairs().to_vec();
    let found = search_full_paths(
        fam, state, &pool, s, 1, &mut used, &mut chi_pairs,
    )?;
    match found {
        None => Ok(CaseOutcome::Exhausted),
        Some(h) => {
            state.chi = h.clone();
            let full = compatible(fam, &h, s, b, Some(&state.g0))?;
            if !full.compatible {
                return Err(Error::Internal(
                    "assembled hyperedge failed its final compatibility check".to_string(),
                ));
            }
            assert_hub_minimality(fam, state, &bprime)?;
            Ok(CaseOutcome::Extended { h, s })
        }
    }
}

/// Depth-first choice of the j-th full-length path from the endpoint pool.
fn search_full_paths(
    fam: &CollectionFamily,
    state: &mut BuilderState,
    pool: &[Vec<u32>],
    s: u32,
    j: u32,
    used: &mut BTreeSet<u32>,
    chi_pairs: &mut Vec<(u32, u32)>,
) -> Result<Option<Assignment>> {
    let pat = fam.pattern();
    let a = pat.a();
    let b = pat.b();
    if j > a {
        let h = Assignment::from_pairs(chi_pairs.clone());
        if fam.union_all().contains(&h) {
            return Ok(None);
        }
        return Ok(Some(h));
    }
    for path in pool {
        if !state.spend() {
            return Ok(None);
        }
        let interior = &path[1..b as usize];
        if interior.iter().any(|z| used.contains(z)) {
            continue;
        }
        let new_pairs: Vec<(u32, u32)> = interior
            .iter()
            .enumerate()
            .map(|(idx, &z)| (pat.internal(idx as u32 + 1, j), state.host_label(z)))
            .collect();
        chi_pairs.extend(new_pairs.iter().copied());
        for z in interior {
            used.insert(*z);
        }
        let chi = Assignment::from_pairs(chi_pairs.clone());
        let ok = compatible_focus(fam, &chi, s, b, Some(&state.g0), Some(&new_pairs))?
            .compatible;
        if ok {
            if let Some(h) =
                search_full_paths(fam, state, pool, s, j + 1, used, chi_pairs)?
            {
                return Ok(Some(h));
            }
        }
        for z in interior {
            used.remove(z);
        }
        chi_pairs.truncate(chi_pairs.len() - new_pairs.len());
    }
    Ok(None)
}

/// One decision in the truncated extension: an inward layer pick or a path
/// completion.
#[derive(Clone, Copy, Debug)]
enum TruncatedStep {
    Layer { i: u32, j: u32 },
    Completion { j: u32 },
}

/// Extends at a truncation t < b: the second hub comes from the top layer
/// when b-t is even and from the layer below (never the start vertex) when
/// b-t is odd, inward picks alternate between those layers by the parity of
/// i-t, and each path finishes with a certificate path into its truncation
/// vertex. Every pick must keep the assignment compatible at scale r.
pub fn extend_case_lt_b(state: &mut BuilderState, fam: &CollectionFamily) -> Result<CaseOutcome> {
    let pat = fam.pattern().clone();
    let b = pat.b();
    let t = state.cert.t();
    if t >= b {
        return Err(Error::Domain(format!(
            "truncated extension needs t < b = {b}, got t = {t}"
        )));
    }
    if state.sp.b() != b || fam.host().n() != state.g.n() {
        return Err(Error::Domain(
            "state and collection disagree on the host or depth".to_string(),
        ));
    }
    let r = u32::try_from(state.sp.r())
        .map_err(|_| Error::Internal("negative dyadic level for a core".to_string()))?;
    fam.check_ranges(r, t)?;

    let x_local = state.cert.x();
    let even_gap = (b - t) % 2 == 0;
    let y_pool: BTreeSet<u32> = if even_gap {
        let top = &state.cert.layers()[t as usize];
        if top.contains(&x_local) {
            return Err(Error::Internal(
                "start vertex survived in the top layer without ending a path".to_string(),
            ));
        }
        top.clone()
    } else {
        state.cert.layers()[(t - 1) as usize]
            .iter()
            .copied()
            .filter(|&v| v != x_local)
            .collect()
    };
    if y_pool.is_empty() {
        return Ok(CaseOutcome::Exhausted);
    }
    let y_local = y_pool
        .iter()
        .copied()
        .min_by_key(|&v| (joint_degree(fam, state.x, state.host_label(v)), v))
        .expect("nonempty pool");
    let y = state.host_label(y_local);
    state.y = Some(y);

    let hubs = Assignment::from_pairs(vec![(HUB_U, state.x), (HUB_V, y)]);
    if !compatible(fam, &hubs, r, t, Some(&state.g0))?.compatible {
        return Ok(CaseOutcome::Exhausted);
    }

    let by_end: BTreeMap<u32, Vec<Vec<u32>>> = state
        .cert
        .paths_by_endpoint()
        .into_iter()
        .map(|(v, paths)| (v, paths.into_iter().cloned().collect()))
        .collect();

    let a = pat.a();
    let mut steps: Vec<TruncatedStep> = Vec::new();
    for i in (t..b).rev() {
        for j in 1..=a {
            steps.push(TruncatedStep::Layer { i, j });
        }
    }
    for j in 1..=a {
        steps.push(TruncatedStep::Completion { j });
    }

    let mut used: BTreeSet<u32> = [x_local, y_local].into_iter().collect();
    let mut chi_pairs = hubs.pairs().to_vec();
    let mut zs: BTreeMap<(u32, u32), u32> = BTreeMap::new();
    let found = search_truncated(
        fam,
        state,
        &by_end,
        &steps,
        0,
        r,
        t,
        y_local,
        &mut used,
        &mut chi_pairs,
        &mut zs,
    )?;
    match found {
        None => Ok(CaseOutcome::Exhausted),
        Some(h) => {
            state.chi = h.clone();
            let full = compatible(fam, &h, r, t, Some(&state.g0))?;
            if !full.compatible {
                return Err(Error::Internal(
                    "assembled hyperedge failed its final compatibility check".to_string(),
                ));
            }
            assert_hub_minimality(fam, state, &y_pool)?;
            Ok(CaseOutcome::Extended { h, s: r })
        }
    }
}

/// Depth-first walk over the truncated extension's decision sequence.
#[allow(clippy::too_many_arguments)]
fn search_truncated(
    fam: &CollectionFamily,
    state: &mut BuilderState,
    by_end: &BTreeMap<u32, Vec<Vec<u32>>>,
    steps: &[TruncatedStep],
    depth: usize,
    r: u32,
    t: u32,
    y_local: u32,
    used: &mut BTreeSet<u32>,
    chi_pairs: &mut Vec<(u32, u32)>,
    zs: &mut BTreeMap<(u32, u32), u32>,
) -> Result<Option<Assignment>> {
    let pat = fam.pattern();
    let b = pat.b();
    if depth == steps.len() {
        let h = Assignment::from_pairs(chi_pairs.clone());
        if fam.union_all().contains(&h) {
            return Ok(None);
        }
        return Ok(Some(h));
    }
    match steps[depth] {
        TruncatedStep::Layer { i, j } => {
            let prev = if i + 1 == b {
                y_local
            } else {
                *zs.get(&(i + 1, j)).expect("outer layer already picked")
            };
            let layer_idx = if (i - t) % 2 == 1 { t - 1 } else { t };
            let layer = &state.cert.layers()[layer_idx as usize];
            let candidates: Vec<u32> = state
                .gprime
                .neighbors(prev)
                .iter()
                .copied()
                .filter(|z| layer.contains(z) && !used.contains(z))
                .collect();
            for z in candidates {
                if !state.spend() {
                    return Ok(None);
                }
                let pair = (pat.internal(i, j), state.host_label(z));
                chi_pairs.push(pair);
                used.insert(z);
                zs.insert((i, j), z);
                let chi = Assignment::from_pairs(chi_pairs.clone());
                let ok =
                    compatible_focus(fam, &chi, r, t, Some(&state.g0), Some(&[pair]))?
                        .compatible;
                if ok {
                    if let Some(h) = search_truncated(
                        fam, state, by_end, steps, depth + 1, r, t, y_local, used, chi_pairs,
                        zs,
                    )? {
                        return Ok(Some(h));
                    }
                }
                zs.remove(&(i, j));
                used.remove(&z);
                chi_pairs.pop();
            }
            Ok(None)
        }
        TruncatedStep::Completion { j } => {
            let target = *zs.get(&(t, j)).expect("truncation vertex already picked");
            let empty = Vec::new();
            let pool = by_end.get(&target).unwrap_or(&empty);
            for path in pool {
                if !state.spend() {
                    return Ok(None);
                }
                let interior = &path[1..t as usize];
                if interior.iter().any(|z| used.contains(z)) {
                    continue;
                }
                let new_pairs: Vec<(u32, u32)> = interior
                    .iter()
                    .enumerate()
                    .map(|(idx, &z)| (pat.internal(idx as u32 + 1, j), state.host_label(z)))
                    .collect();
                chi_pairs.extend(new_pairs.iter().copied());
                for z in interior {
                    used.insert(*z);
                }
                let chi = Assignment::from_pairs(chi_pairs.clone());
                let ok =
                    compatible_focus(fam, &chi, r, t, Some(&state.g0), Some(&new_pairs))?
                        .compatible;
                if ok {
                    if let Some(h) = search_truncated(
                        fam, state, by_end, steps, depth + 1, r, t, y_local, used, chi_pairs,
                        zs,
                    )? {
                        return Ok(Some(h));
                    }
                }
                for z in interior {
                    used.remove(z);
                }
                chi_pairs.truncate(chi_pairs.len() - new_pairs.len());
            }
            Ok(None)
        }
    }
}

/// Driver configuration: pattern shape, density budget, schedule base,
/// minimum admissible scale, and search budgets.
#[derive(Clone, Debug)]
pub struct SupersatConfig {
    pub a: u32,
    pub b: u32,
    pub delta: BigRational,
    pub eps_base: BigRational,
    pub k0: BigRational,
    pub node_budget: u64,
    pub max_hyperedges: u64,
    pub max_iterations: u64,
    pub index_cap: usize,
}

impl SupersatConfig {
    /// Defaults tuned so the complete-graph desk instances make progress:
    /// density budget 3/10, schedule base 3/4, minimum scale 1.
    pub fn new(a: u32, b: u32) -> Result<Self> {
        let cfg = SupersatConfig {
            a,
            b,
            delta: BigRational::new(3.into(), 10.into()),
            eps_base: BigRational::new(3.into(), 4.into()),
            k0: BigRational::new(1.into(), 1.into()),
            node_budget: 50_000,
            max_hyperedges: 64,
            max_iterations: 256,
            index_cap: DEFAULT_INDEX_CAP,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.a < 3 || self.b < 3 {
            return Err(Error::Domain(format!(
                "the builder needs a >= 3 and b >= 3, got a = {}, b = {}",
                self.a, self.b
            )));
        }
        if !self.delta.is_positive() {
            return Err(Error::Domain("delta must be positive".to_string()));
        }
        if !self.k0.is_positive() {
            return Err(Error::Domain("k0 must be positive".to_string()));
        }
        if self.node_budget == 0 || self.max_hyperedges == 0 || self.max_iterations == 0 {
            return Err(Error::Domain("budgets must be positive".to_string()));
        }
        if self.index_cap < 2 {
            return Err(Error::Domain("index cap must be at least 2".to_string()));
        }
        Ok(())
    }
}

/// Why a run stopped.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StopReason {
    /// The collection reached the density target.
    TargetReached,
    /// The hyperedge or iteration budget ran out.
    BudgetExhausted,
    /// Both extension phases ran dry on a live certificate.
    Exhausted,
    /// Path refinement failed at the named stage in every phase.
    PipelineFailure { stage: RefineStage },
    /// Pruning left no usable core.
    PrunedOut,
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StopReason::TargetReached => write!(f, "target-reached"),
            StopReason::BudgetExhausted => write!(f, "budget-exhausted"),
            StopReason::Exhausted => write!(f, "exhausted"),
            StopReason::PipelineFailure { stage } => write!(f, "pipeline-failure:{stage}"),
            StopReason::PrunedOut => write!(f, "pruned-out"),
        }
    }
}

/// Result of a driver run: the collection, the dominant truncation, the stop
/// reason, the measured scale and target, the final goodness sweep, and a
/// JSON manifest of the run.
#[derive(Clone, Debug)]
pub struct SupersatOutcome {
    pub family: CollectionFamily,
    pub chosen_t: u32,
    pub stop: StopReason,
    pub iterations: u64,
    pub k: Value,
    pub target: Value,
    pub target_reached: bool,
    pub hypothesis_met: bool,
    pub goodness: FamilyGoodness,
    pub manifest: serde_json::Value,
}

impl SupersatOutcome {
    /// The truncation union the run is judged by.
    pub fn hprime(&self) -> Option<&GHypergraph> {
        self.family.union_t(self.chosen_t)
    }

    pub fn hprime_len(&self) -> usize {
        self.hprime().map(|gh| gh.len()).unwrap_or(0)
    }
}

/// Whether the collection size has reached the density target.
fn target_reached(target: &Value, len: usize) -> bool {
    target.cmp_integer(&BigUint::from(len as u64)) != std::cmp::Ordering::Greater
}

/// Grows a collection on the host until the density target, a budget, or the
/// pipeline stops it.
///
/// Each iteration re-prunes the host against the current collection, takes
/// the minimum-degree core of the survivor, refines a path family for the
/// start hub minimizing collection degree over the concentrated pool, and
/// dispatches the matching extension. When the pool's truncation stalls, the
/// iteration retries at the full truncation before giving up. Degenerate
/// hosts (no edges) are rejected; every pipeline event is reported as a stop
/// reason instead of an error.
pub fn supersaturate(g: &Graph, cfg: &SupersatConfig) -> Result<SupersatOutcome> {
    cfg.validate()?;
    if g.edge_count() == 0 {
        return Err(Error::Domain("the host has no edges".to_string()));
    }
    let pattern = ThetaPattern::new(cfg.a, cfg.b)?;
    let b = cfg.b;
    let n = u64::from(g.n());
    let mut fam = CollectionFamily::new(pattern.clone(), g.clone(), cfg.delta.clone(), cfg.index_cap)?;
    let k = fam.params().k().clone();
    let target = Value::from_rational(&cfg.delta)?
        .mul(&k.pow_i64(i64::from(cfg.a) * i64::from(b)))
        .mul(&Value::from_u64(n)?.pow_i64(2));
    let hypothesis_met =
        k.cmp_value(&Value::from_rational(&cfg.k0)?) != std::cmp::Ordering::Less;
    let eps = epsilon_schedule(b, &cfg.eps_base)?;

    let mut iterations = 0u64;
    let stop;
    loop {
        if target_reached(&target, fam.len()) {
            stop = StopReason::TargetReached;
            break;
        }
        if fam.len() as u64 >= cfg.max_hyperedges || iterations >= cfg.max_iterations {
            stop = StopReason::BudgetExhausted;
            break;
        }
        iterations += 1;

        let (g0, _removed) = remove_saturated_edges(g, fam.union_all(), fam.params())?;
        if g0.edge_count() == 0 {
            stop = StopReason::PrunedOut;
            break;
        }
        let core = min_degree_core(&MultiGraph::from_graph(&g0), b)?;
        let (gprime, labels) = core.to_compact_graph()?;
        if u64::from(gprime.n()) < u64::from(pattern.vertex_count()) {
            stop = StopReason::PrunedOut;
            break;
        }
        let sp = scale_parameters(&gprime, n, b)?;
        let report = x_set(&gprime, &sp, &eps)?;
        if report.x_set.is_empty() {
            stop = StopReason::Exhausted;
            break;
        }
        let forbidden = forbidden_for_core(&fam, &labels)?;
        let x_local = report
            .x_set
            .iter()
            .copied()
            .min_by_key(|&v| (hub_degree(&fam, labels[v as usize]), v))
            .expect("nonempty pool");

        let mut phases = vec![report.t];
        if report.t != b {
            phases.push(b);
        }
        let mut last_stage: Option<RefineStage> = None;
        let mut case_ran = false;
        let mut inserted = false;
        for t_try in phases {
            match refine_paths(&gprime, x_local, t_try, &sp, &eps, &forbidden, &report.x_set)? {
                RefineOutcome::Failure { stage } => {
                    last_stage = Some(stage);
                }
                RefineOutcome::Certificate(cert) => {
                    let mut st = BuilderState::new(
                        g.clone(),
                        g0.clone(),
                        gprime.clone(),
                        labels.clone(),
                        sp.clone(),
                        *cert,
                        cfg.node_budget,
                    )?;
                    case_ran = true;
                    let outcome = if t_try == b {
                        extend_case_b(&mut st, &fam)?
                    } else {
                        extend_case_lt_b(&mut st, &fam)?
                    };
                    if let CaseOutcome::Extended { h, s } = outcome {
                        if !fam.insert(h, s, t_try)? {
                            return Err(Error::Internal(
                                "extension returned a hyperedge already present".to_string(),
                            ));
                        }
                        inserted = true;
                        break;
                    }
                }
            }
        }
        if !inserted {
            stop = if case_ran {
                StopReason::Exhausted
            } else {
                StopReason::PipelineFailure {
                    stage: last_stage.unwrap_or(RefineStage::LayerConstruction),
                }
            };
            break;
        }
    }

    let chosen_t = (2..=b)
        .max_by_key(|&t| {
            (
                fam.union_t(t).map(|gh| gh.len()).unwrap_or(0),
                std::cmp::Reverse(t),
            )
        })
        .expect("b >= 2");
    let goodness = fam.goodness_check(cfg.index_cap)?;
    let reached = target_reached(&target, fam.len());
    let manifest = build_manifest(
        g, cfg, &fam, &k, &target, &stop, iterations, chosen_t, reached, hypothesis_met,
        &goodness,
    );
    Ok(SupersatOutcome {
        family: fam,
        chosen_t,
        stop,
        iterations,
        k,
        target,
        target_reached: reached,
        hypothesis_met,
        goodness,
        manifest,
    })
}

/// Forest-saturated shapes translated into core coordinates; shapes touching
/// vertices outside the core can never appear inside a core path family.
fn forbidden_for_core(fam: &CollectionFamily, labels: &[u32]) -> Result<Vec<ForbiddenSubgraph>> {
    let shapes = fam.forbidden_forests()?;
    if shapes.is_empty() {
        return Ok(Vec::new());
    }
    let index: BTreeMap<u32, u32> = labels
        .iter()
        .enumerate()
        .map(|(i, &host)| (host, i as u32))
        .collect();
    let mut out = Vec::new();
    'shapes: for shape in shapes {
        let mut verts = BTreeSet::new();
        for &v in shape.verts.iter() {
            match index.get(&v) {
                Some(&local) => {
                    verts.insert(local);
                }
                None => continue 'shapes,
            }
        }
        let edges: BTreeSet<(u32, u32)> = shape
            .edges
            .iter()
            .map(|&(z1, z2)| {
                let a = index[&z1];
                let b = index[&z2];
                if a < b {
                    (a, b)
                } else {
                    (b, a)
                }
            })
            .collect();
        out.push(ForbiddenSubgraph::new(verts, edges));
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn build_manifest(
    g: &Graph,
    cfg: &SupersatConfig,
    fam: &CollectionFamily,
    k: &Value,
    target: &Value,
    stop: &StopReason,
    iterations: u64,
    chosen_t: u32,
    target_reached: bool,
    hypothesis_met: bool,
    goodness: &FamilyGoodness,
) -> serde_json::Value {
    let cells: Vec<serde_json::Value> = fam
        .cells()
        .map(|(&(s, t), gh)| serde_json::json!({"s": s, "t": t, "count": gh.len()}))
        .collect();
    let unions: Vec<serde_json::Value> = (2..=cfg.b)
        .map(|t| {
            serde_json::json!({
                "t": t,
                "count": fam.union_t(t).map(|gh| gh.len()).unwrap_or(0),
            })
        })
        .collect();
    serde_json::json!({
        "host": {"n": g.n(), "edges": g.edge_count()},
        "pattern": {"a": cfg.a, "b": cfg.b, "vertices": fam.pattern().vertex_count(), "edges": fam.pattern().edge_count()},
        "constants": {
            "delta": cfg.delta.to_string(),
            "eps_base": cfg.eps_base.to_string(),
            "k0": cfg.k0.to_string(),
            "k": k.to_string(),
            "target": target.to_string(),
        },
        "budget": {
            "node_budget": cfg.node_budget,
            "max_hyperedges": cfg.max_hyperedges,
            "max_iterations": cfg.max_iterations,
            "index_cap": cfg.index_cap,
        },
        "stop": stop.to_string(),
        "iterations": iterations,
        "hyperedges": fam.len(),
        "target_reached": target_reached,
        "hypothesis_met": hypothesis_met,
        "cells": cells,
        "unions": unions,
        "chosen_t": chosen_t,
        "goodness": {
            "checked": goodness.total_checked(),
            "violations": goodness.total_violations(),
            "good": goodness.is_good(),
        },
    })
}

/// A hypergraph on host edges: each hyperedge is the edge set of one pattern
/// copy. Degrees of edge subsets up to the index cap come from a
/// precomputed index.
#[derive(Clone, Debug)]
pub struct EdgeHypergraph {
    host: Graph,
    hyperedges: Vec<Vec<(u32, u32)>>,
    index: BTreeMap<Vec<(u32, u32)>, u64>,
    cap: usize,
}

impl EdgeHypergraph {
    pub fn host(&self) -> &Graph {
        &self.host
    }

    pub fn len(&self) -> usize {
        self.hyperedges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hyperedges.is_empty()
    }

    /// Hyperedges as sorted edge lists, in first-seen order.
    pub fn hyperedges(&self) -> &[Vec<(u32, u32)>] {
        &self.hyperedges
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    /// Number of hyperedges containing every edge of `sigma` (normalized,
    /// sorted, deduplicated internally).
    pub fn degree(&self, sigma: &[(u32, u32)]) -> u64 {
        let key = normalize_sigma(sigma);
        if key.len() <= self.cap {
            return self.index.get(&key).copied().unwrap_or(0);
        }
        self.hyperedges
            .iter()
            .filter(|h| key.iter().all(|e| h.binary_search(e).is_ok()))
            .count() as u64
    }
}

fn normalize_sigma(sigma: &[(u32, u32)]) -> Vec<(u32, u32)> {
    let set: BTreeSet<(u32, u32)> = sigma
        .iter()
        .map(|&(a, b)| if a < b { (a, b) } else { (b, a) })
        .collect();
    set.into_iter().collect()
}

/// One scanned edge subset: its degree, the number of covering assignments
/// (and distinct pattern-side shapes), and the summed threshold bound.
#[derive(Clone, Debug)]
pub struct SigmaCheck {
    pub sigma: Vec<(u32, u32)>,
    pub degree: u64,
    pub assignments: u64,
    pub patterns: u64,
    pub bound: BigUint,
}

/// Verification summary for the vertex-to-edge translation.
#[derive(Clone, Debug)]
pub struct TranslationReport {
    /// Hyperedges in the source collection.
    pub source_count: u64,
    /// Distinct edge-set hyperedges after translation.
    pub edge_count: u64,
    /// edge_count · v(pattern)! >= source_count.
    pub loss_factor_ok: bool,
    /// Distinct edge subsets scanned.
    pub sigma_checked: u64,
    /// deg(σ) <= Σ over covering assignments of the combined threshold, for
    /// every scanned σ.
    pub codegree_ok: bool,
    /// Largest distinct pattern-shape count over all σ.
    pub max_patterns: u64,
    /// max_patterns <= 2^{v(pattern)}.
    pub pattern_bound_ok: bool,
    /// Scanned subsets that broke the summed bound.
    pub violations: Vec<SigmaCheck>,
    /// The σ attaining the closed-form constant.
    pub worst: Option<SigmaCheck>,
    /// Smallest constant making deg(σ) <= C·k^{ab}n² /
    /// (k·n^{1+1/b}·min{k^{b/(b-1)}, k·n^{(b-1)/(b(ab-1))}}^{|σ|-1}) hold for
    /// every scanned σ.
    pub minimal_c: Option<Value>,
    /// Constant C with |edge hyperedges| = C^{-1}·k^{ab}·n².
    pub count_c: Option<Value>,
}

/// Translates a collection union into a hypergraph on host edges and checks
/// the codegree budget of every edge subset up to the cap.
///
/// Each hyperedge maps to the set of host edges its pattern edges land on;
/// equal edge sets collapse. For every scanned σ the report sums the
/// combined threshold over all valid assignments whose host side is exactly
/// the vertices of σ and whose edge image covers σ, and compares the
/// degree against that sum.
pub fn edge_hypergraph(
    hprime: &GHypergraph,
    params: &CodegreeParams,
    cap: usize,
) -> Result<(EdgeHypergraph, TranslationReport)> {
    let t = match params.family() {
        CodegreeFamily::Combined { t } => t,
        other => {
            return Err(Error::InvalidParameter(format!(
                "edge translation needs the combined threshold family, got {other:?}"
            )))
        }
    };
    let pattern = hprime.pattern().clone();
    let host = hprime.host().clone();
    if params.pattern().a() != pattern.a() || params.pattern().b() != pattern.b() {
        return Err(Error::Domain(
            "parameters and collection disagree on the pattern".to_string(),
        ));
    }
    if params.n() != u64::from(host.n()) {
        return Err(Error::Domain(
            "parameters and collection disagree on the host order".to_string(),
        ));
    }
    if !(2..=pattern.b()).contains(&t) {
        return Err(Error::Domain(format!(
            "truncation {t} outside 2..={}",
            pattern.b()
        )));
    }
    if cap == 0 {
        return Err(Error::Domain("scan cap must be positive".to_string()));
    }
    let ab = (pattern.a() * pattern.b()) as usize;
    let scan_cap = cap.min(ab - 1);

    let mut hyperedges: Vec<Vec<(u32, u32)>> = Vec::new();
    let mut seen: BTreeSet<Vec<(u32, u32)>> = BTreeSet::new();
    let mut index: BTreeMap<Vec<(u32, u32)>, u64> = BTreeMap::new();
    for h in hprime.hyperedges() {
        let proj = project(&pattern, &host, h)?;
        let edges: Vec<(u32, u32)> = proj.edges.into_iter().collect();
        if edges.len() != ab {
            return Err(Error::Internal(
                "a full valid assignment must cover every pattern edge".to_string(),
            ));
        }
        if !seen.insert(edges.clone()) {
            continue;
        }
        index_subsets(&edges, cap, &mut index);
        hyperedges.push(edges);
    }

    let source_count = hprime.len() as u64;
    let edge_count = hyperedges.len() as u64;
    let loss_factor_ok =
        BigUint::from(edge_count) * factorial(pattern.vertex_count()) >= BigUint::from(source_count);

    let n_value = Value::from_u64(params.n())?;
    let b_i = i64::from(pattern.b());
    let a_i = i64::from(pattern.a());
    let ratio = |num: i64, den: i64| BigRational::new(num.into(), den.into());
    let copies = params.k().pow_i64(a_i * b_i).mul(&n_value.pow_i64(2));
    let per_edge = params.k().mul(&n_value.pow(&ratio(b_i + 1, b_i)));
    let step_a = params.k().pow(&ratio(b_i, b_i - 1));
    let step_b = params
        .k()
        .mul(&n_value.pow(&ratio(b_i - 1, b_i * (a_i * b_i - 1))));
    let step = if step_a.cmp_value(&step_b) == std::cmp::Ordering::Greater {
        step_b
    } else {
        step_a
    };

    let mut threshold_cache: BTreeMap<Vec<u32>, BigUint> = BTreeMap::new();
    let mut sigma_checked = 0u64;
    let mut violations = Vec::new();
    let mut max_patterns = 0u64;
    let mut minimal_c: Option<Value> = None;
    let mut worst: Option<SigmaCheck> = None;
    for (sigma, &degree) in &index {
        if sigma.is_empty() || sigma.len() > scan_cap {
            continue;
        }
        sigma_checked += 1;
        let covers = sigma_assignments(&pattern, &host, sigma)?;
        let mut patterns: BTreeSet<Vec<u32>> = BTreeSet::new();
        let mut bound = BigUint::from(0u32);
        for chi in &covers {
            let nu = chi.pattern_side();
            let key: Vec<u32> = nu.iter().copied().collect();
            let value = match threshold_cache.get(&key) {
                Some(v) => v.clone(),
                None => {
                    let v = match crate::hypergraph::evaluate_codegree(params, &nu)? {
                        ExtendedCount::Finite(v) => v,
                        ExtendedCount::Unbounded => {
                            return Err(Error::Internal(
                                "a covering assignment induced no edges".to_string(),
                            ))
                        }
                    };
                    threshold_cache.insert(key.clone(), v.clone());
                    v
                }
            };
            bound += value;
            patterns.insert(key);
        }
        max_patterns = max_patterns.max(patterns.len() as u64);
        let check = SigmaCheck {
            sigma: sigma.clone(),
            degree,
            assignments: covers.len() as u64,
            patterns: patterns.len() as u64,
            bound: bound.clone(),
        };
        if BigUint::from(degree) > bound {
            violations.push(check.clone());
        }
        let c_sigma = Value::from_u64(degree)?
            .mul(&per_edge)
            .mul(&step.pow_i64(sigma.len() as i64 - 1))
            .div(&copies);
        let improved = match &minimal_c {
            None => true,
            Some(cur) => c_sigma.cmp_value(cur) == std::cmp::Ordering::Greater,
        };
        if improved {
            minimal_c = Some(c_sigma);
            worst = Some(check);
        }
    }

    let count_c = if edge_count > 0 {
        Some(copies.div(&Value::from_u64(edge_count)?))
    } else {
        None
    };
    let vertex_bound = BigUint::from(1u32) << pattern.vertex_count();
    let report = TranslationReport {
        source_count,
        edge_count,
        loss_factor_ok,
        sigma_checked,
        codegree_ok: violations.is_empty(),
        max_patterns,
        pattern_bound_ok: BigUint::from(max_patterns) <= vertex_bound,
        violations,
        worst,
        minimal_c,
        count_c,
    };
    Ok((
        EdgeHypergraph {
            host,
            hyperedges,
            index,
            cap,
        },
        report,
    ))
}

/// Indexes every nonempty subset of `edges` up to `cap`.
fn index_subsets(edges: &[(u32, u32)], cap: usize, index: &mut BTreeMap<Vec<(u32, u32)>, u64>) {
    fn rec(
        edges: &[(u32, u32)],
        cap: usize,
        start: usize,
        current: &mut Vec<(u32, u32)>,
        index: &mut BTreeMap<Vec<(u32, u32)>, u64>,
    ) {
        if !current.is_empty() {
            *index.entry(current.clone()).or_insert(0) += 1;
        }
        if current.len() == cap {
            return;
        }
        for i in start..edges.len() {
            current.push(edges[i]);
            rec(edges, cap, i + 1, current, index);
            current.pop();
        }
    }
    let mut current = Vec::new();
    rec(edges, cap, 0, &mut current, index);
}

fn factorial(n: u32) -> BigUint {
    (1..=n).fold(BigUint::from(1u32), |acc, i| acc * BigUint::from(i))
}

/// All valid assignments whose host side is exactly the vertices of `sigma`
/// and whose edge image covers `sigma`.
fn sigma_assignments(
    pattern: &ThetaPattern,
    host: &Graph,
    sigma: &[(u32, u32)],
) -> Result<Vec<Assignment>> {
    let mut verts: BTreeSet<u32> = BTreeSet::new();
    for &(z1, z2) in sigma {
        verts.insert(z1);
        verts.insert(z2);
    }
    if verts.len() > pattern.vertex_count() as usize {
        return Ok(Vec::new());
    }
    let mut adj: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for &(z1, z2) in sigma {
        adj.entry(z1).or_default().push(z2);
        adj.entry(z2).or_default().push(z1);
    }
    // Order vertices so each one after a component's first is σ-adjacent to
    // an already placed vertex, letting the edge constraints bind early.
    let mut order: Vec<u32> = Vec::with_capacity(verts.len());
    let mut queued: BTreeSet<u32> = BTreeSet::new();
    for &root in &verts {
        if queued.contains(&root) {
            continue;
        }
        queued.insert(root);
        order.push(root);
        let mut head = order.len() - 1;
        while head < order.len() {
            let z = order[head];
            head += 1;
            if let Some(next) = adj.get(&z) {
                for &z2 in next {
                    if queued.insert(z2) {
                        order.push(z2);
                    }
                }
            }
        }
    }
    let verts = order;
    let mut out = Vec::new();
    let mut map: BTreeMap<u32, u32> = BTreeMap::new();
    let mut used: BTreeSet<u32> = BTreeSet::new();
    assign_sigma(pattern, host, &verts, &adj, 0, &mut map, &mut used, &mut out)?;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn assign_sigma(
    pattern: &ThetaPattern,
    host: &Graph,
    verts: &[u32],
    adj: &BTreeMap<u32, Vec<u32>>,
    depth: usize,
    map: &mut BTreeMap<u32, u32>,
    used: &mut BTreeSet<u32>,
    out: &mut Vec<Assignment>,
) -> Result<()> {
    if depth == verts.len() {
        let pairs: Vec<(u32, u32)> = map.iter().map(|(&z, &w)| (w, z)).collect();
        let chi = Assignment::from_pairs(pairs);
        if validate_assignment(pattern, host, &chi)?.is_valid() {
            out.push(chi);
        }
        return Ok(());
    }
    let z = verts[depth];
    'candidates: for w in 0..pattern.vertex_count() {
        if used.contains(&w) {
            continue;
        }
        if let Some(neighbors) = adj.get(&z) {
            for z2 in neighbors {
                if let Some(&w2) = map.get(z2) {
                    if !pattern.graph().has_edge(w, w2) {
                        continue 'candidates;
                    }
                }
            }
        }
        map.insert(z, w);
        used.insert(w);
        assign_sigma(pattern, host, verts, adj, depth + 1, map, used, out)?;
        used.remove(&w);
        map.remove(&z);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rational(num: i64, den: i64) -> BigRational {
        BigRational::new(num.into(), den.into())
    }

    /// The pattern graph itself as a host: scale k = 9/16 on 8 vertices, so
    /// the single-edge forest threshold is 1 and the hub-pair full-length
    /// threshold is 1 at s = 0 and 2 at s = 4.
    fn copy_host() -> (ThetaPattern, Graph) {
        let pattern = ThetaPattern::new(3, 3).unwrap();
        let host = Graph::from_edges(8, pattern.graph().edges()).unwrap();
        (pattern, host)
    }

    fn identity_assignment(pattern: &ThetaPattern) -> Assignment {
        Assignment::from_pairs((0..pattern.vertex_count()).map(|w| (w, w)).collect())
    }

    /// Swaps the first two paths of the identity copy; same host edges,
    /// different assignment.
    fn swapped_assignment(pattern: &ThetaPattern) -> Assignment {
        let mut pairs = Vec::new();
        pairs.push((HUB_U, HUB_U));
        pairs.push((HUB_V, HUB_V));
        for i in 1..pattern.b() {
            let w1 = pattern.internal(i, 1);
            let w2 = pattern.internal(i, 2);
            let w3 = pattern.internal(i, 3);
            pairs.push((w1, w2));
            pairs.push((w2, w1));
            pairs.push((w3, w3));
        }
        Assignment::from_pairs(pairs)
    }

    /// Rotates all three paths of the identity copy; same host edges, and no
    /// internal pair in common with the identity.
    fn cycled_assignment(pattern: &ThetaPattern) -> Assignment {
        let mut pairs = Vec::new();
        pairs.push((HUB_U, HUB_U));
        pairs.push((HUB_V, HUB_V));
        for i in 1..pattern.b() {
            for j in 1..=pattern.a() {
                let next = if j == pattern.a() { 1 } else { j + 1 };
                pairs.push((pattern.internal(i, j), pattern.internal(i, next)));
            }
        }
        Assignment::from_pairs(pairs)
    }

    #[test]
    fn empty_family_accepts_every_valid_assignment() {
        let (pattern, host) = copy_host();
        let fam =
            CollectionFamily::new(pattern.clone(), host, rational(3, 10), DEFAULT_INDEX_CAP)
                .unwrap();
        let chi = identity_assignment(&pattern);
        for t in [2, 3] {
            let report = compatible(&fam, &chi, 0, t, None).unwrap();
            assert!(report.valid && report.compatible);
            assert!(report.witness.is_none());
            assert_eq!(report.subsets_checked, 255);
        }
        let pair = Assignment::from_pairs(vec![(HUB_U, 0), (HUB_V, 1)]);
        assert!(compatible(&fam, &pair, 4, 3, None).unwrap().compatible);

        // A pattern edge mapped onto a non-edge is invalid, never compatible.
        let bad = Assignment::from_pairs(vec![(HUB_U, 0), (pattern.internal(1, 1), 1)]);
        let report = compatible(&fam, &bad, 0, 3, None).unwrap();
        assert!(!report.valid && !report.compatible && report.witness.is_none());
    }

    #[test]
    fn insertion_guard_blocks_scaled_saturation() {
        let (pattern, host) = copy_host();
        let mut fam =
            CollectionFamily::new(pattern.clone(), host, rational(3, 10), DEFAULT_INDEX_CAP)
                .unwrap();
        let h0 = identity_assignment(&pattern);
        assert!(fam.insert(h0.clone(), 0, 3).unwrap());
        assert_eq!(fam.len(), 1);
        // Same hyperedge again: already present, nothing changes.
        assert!(!fam.insert(h0.clone(), 0, 3).unwrap());
        assert!(!fam.insert(h0.clone(), 4, 3).unwrap());
        assert_eq!(fam.len(), 1);

        // The hub pair is now at the s = 0 full-length threshold.
        let pair = Assignment::from_pairs(vec![(HUB_U, 0), (HUB_V, 1)]);
        let report = compatible(&fam, &pair, 0, 3, None).unwrap();
        assert!(!report.compatible);
        let witness = report.witness.unwrap();
        assert_eq!(witness.family, FamilyKind::Scaled);
        assert_eq!(witness.degree, 1);
        assert_eq!(witness.bound, BigUint::from(1u32));
        assert_eq!(witness.chi, pair);

        // A second copy through the same hub pair would break goodness at
        // s = 0 and is rejected; the collection is untouched. The rotated
        // copy shares only the hubs with the identity, so no forest subset
        // interferes.
        let h1 = cycled_assignment(&pattern);
        let err = fam.insert(h1.clone(), 0, 3).unwrap_err();
        assert!(err.to_string().contains("scaled"));
        assert_eq!(fam.len(), 1);

        // At s = 4 the hub-pair threshold is 2, so the same copy fits.
        assert!(fam.insert(h1, 4, 3).unwrap());
        assert_eq!(fam.len(), 2);
        assert_eq!(fam.cell(0, 3).unwrap().len(), 1);
        assert_eq!(fam.cell(4, 3).unwrap().len(), 1);
        assert_eq!(fam.union_t(3).unwrap().len(), 2);
    }

    #[test]
    fn forest_witness_and_pruning_shortcut() {
        let (pattern, host) = copy_host();
        let mut fam = CollectionFamily::new(
            pattern.clone(),
            host.clone(),
            rational(3, 10),
            DEFAULT_INDEX_CAP,
        )
        .unwrap();
        let h0 = identity_assignment(&pattern);
        fam.insert(h0.clone(), 0, 3).unwrap();

        // Checked at an unsaturated cell, the first failure is the forest
        // family: the hubs plus one internal vertex induce a single edge at
        // degree 1 = threshold.
        let report = compatible(&fam, &h0, 4, 3, None).unwrap();
        assert!(!report.compatible);
        let witness = report.witness.unwrap();
        assert_eq!(witness.family, FamilyKind::Forest);
        assert_eq!(
            witness.chi,
            Assignment::from_pairs(vec![(0, 0), (1, 1), (2, 2)])
        );

        // Claiming every edge survived pruning switches the single-edge
        // subsets off; all remaining thresholds sit above degree 1.
        let report = compatible(&fam, &h0, 4, 3, Some(&host)).unwrap();
        assert!(report.compatible);
        assert!(report.shortcut_hits > 0);

        // The honest survivor graph is empty: every host edge carries a
        // saturated pattern edge.
        let (g0, removed) = remove_saturated_edges(&host, fam.union_all(), fam.params()).unwrap();
        assert_eq!(removed.len(), 9);
        assert_eq!(g0.edge_count(), 0);
        let report = compatible(&fam, &h0, 4, 3, Some(&g0)).unwrap();
        assert!(!report.compatible);
        assert_eq!(report.witness.unwrap().family, FamilyKind::Forest);

        // The saturated forest shapes are exactly what path refinement must
        // dodge; here every single edge is saturated, so shapes exist.
        assert!(!fam.forbidden_forests().unwrap().is_empty());
    }

    fn complete_state(
        n: u32,
        b: u32,
        cert: ExpansionCertificate,
        node_budget: u64,
    ) -> BuilderState {
        let g = Graph::complete(n);
        let sp = scale_parameters(&g, u64::from(n), b).unwrap();
        BuilderState::new(
            g.clone(),
            g.clone(),
            g,
            (0..n).collect(),
            sp,
            cert,
            node_budget,
        )
        .unwrap()
    }

    fn cert_from_parts(
        x: u32,
        t: u32,
        layers: Vec<BTreeSet<u32>>,
        paths: Vec<Vec<u32>>,
    ) -> ExpansionCertificate {
        let layers_json: Vec<Vec<u32>> = layers
            .iter()
            .map(|l| l.iter().copied().collect())
            .collect();
        let text = serde_json::json!({
            "x": x,
            "t": t,
            "eps_used": "1/2",
            "layers": layers_json,
            "paths": paths,
            "x_pool": [x],
        })
        .to_string();
        ExpansionCertificate::from_json(&text).unwrap()
    }

    #[test]
    fn parity_routing_matches_layer_rule() {
        // b = 4, t = 2: the pick at distance 3 from the start comes from the
        // lower layer, the pick at distance 2 from the top layer.
        let pattern = ThetaPattern::new(3, 4).unwrap();
        let fam = CollectionFamily::new(
            pattern.clone(),
            Graph::complete(20),
            rational(3, 10),
            DEFAULT_INDEX_CAP,
        )
        .unwrap();
        let layers: Vec<BTreeSet<u32>> = vec![
            [0].into_iter().collect(),
            (1..=10).collect(),
            (11..=16).collect(),
        ];
        let paths = vec![vec![0, 9, 12], vec![0, 10, 13], vec![0, 8, 14]];
        let cert = cert_from_parts(0, 2, layers.clone(), paths);
        let mut state = complete_state(20, 4, cert, 10_000);
        let outcome = extend_case_lt_b(&mut state, &fam).unwrap();
        let (h, s) = match outcome {
            CaseOutcome::Extended { h, s } => (h, s),
            CaseOutcome::Exhausted => panic!("extension should succeed"),
        };
        assert_eq!(s, 0);
        assert_eq!(state.y(), Some(11));
        let expected = Assignment::from_pairs(vec![
            (0, 0),
            (1, 11),
            (2, 9),
            (3, 10),
            (4, 8),
            (5, 12),
            (6, 13),
            (7, 14),
            (8, 1),
            (9, 2),
            (10, 3),
        ]);
        assert_eq!(h, expected);
        // Distance-3 picks landed in the lower layer, distance-2 picks in
        // the top layer.
        for j in 1..=3 {
            let z3 = h.host_of(pattern.internal(3, j)).unwrap();
            let z2 = h.host_of(pattern.internal(2, j)).unwrap();
            assert!(layers[1].contains(&z3));
            assert!(layers[2].contains(&z2));
        }
        assert!(compatible(&fam, &h, 0, 2, None).unwrap().compatible);
    }

    #[test]
    fn odd_gap_draws_second_hub_from_lower_layer() {
        // b = 5, t = 2: the gap is odd, so the second hub comes from the
        // lower layer with the start vertex excluded explicitly.
        let pattern = ThetaPattern::new(3, 5).unwrap();
        let fam = CollectionFamily::new(
            pattern.clone(),
            Graph::complete(20),
            rational(3, 10),
            DEFAULT_INDEX_CAP,
        )
        .unwrap();
        let layers: Vec<BTreeSet<u32>> = vec![
            [0].into_iter().collect(),
            (0..=10).collect(),
            (11..=16).collect(),
        ];
        let paths = vec![vec![0, 8, 14], vec![0, 9, 15], vec![0, 10, 16]];
        let cert = cert_from_parts(0, 2, layers.clone(), paths);
        let mut state = complete_state(20, 5, cert, 10_000);
        let outcome = extend_case_lt_b(&mut state, &fam).unwrap();
        let (h, s) = match outcome {
            CaseOutcome::Extended { h, s } => (h, s),
            CaseOutcome::Exhausted => panic!("extension should succeed"),
        };
        assert_eq!(s, 0);
        // The lower layer contains the start vertex, but the hub pick skips
        // it: the least remaining vertex wins.
        assert_eq!(state.y(), Some(1));
        let expected = Assignment::from_pairs(vec![
            (0, 0),
            (1, 1),
            (2, 8),
            (3, 9),
            (4, 10),
            (5, 14),
            (6, 15),
            (7, 16),
            (8, 2),
            (9, 3),
            (10, 4),
            (11, 11),
            (12, 12),
            (13, 13),
        ]);
        assert_eq!(h, expected);
        // Distance-4 picks have an even gap from the truncation and come
        // from the top layer.
        for j in 1..=3 {
            let z4 = h.host_of(pattern.internal(4, j)).unwrap();
            assert!(layers[2].contains(&z4));
        }
        assert!(compatible(&fam, &h, 0, 2, None).unwrap().compatible);
    }

    #[test]
    fn full_length_extension_on_complete_host() {
        let pattern = ThetaPattern::new(3, 3).unwrap();
        let g = Graph::complete(20);
        let fam = CollectionFamily::new(
            pattern.clone(),
            g.clone(),
            rational(3, 10),
            DEFAULT_INDEX_CAP,
        )
        .unwrap();
        let sp = scale_parameters(&g, 20, 3).unwrap();
        let eps = epsilon_schedule(3, &rational(3, 4)).unwrap();
        let report = x_set(&g, &sp, &eps).unwrap();
        assert!(report.x_set.contains(&0));
        let cert = match refine_paths(&g, 0, 3, &sp, &eps, &[], &report.x_set).unwrap() {
            RefineOutcome::Certificate(cert) => *cert,
            RefineOutcome::Failure { stage } => panic!("refinement failed at {stage}"),
        };
        // The branching cap 7 confines paths to the nine smallest labels.
        assert!(!cert.layers()[3].contains(&0));
        let mut state = BuilderState::new(
            g.clone(),
            g.clone(),
            g,
            (0..20).collect(),
            sp,
            cert,
            50_000,
        )
        .unwrap();
        let outcome = extend_case_b(&mut state, &fam).unwrap();
        let (h, s) = match outcome {
            CaseOutcome::Extended { h, s } => (h, s),
            CaseOutcome::Exhausted => panic!("extension should succeed"),
        };
        assert!(s <= fam.s_max());
        assert_eq!(h.len(), 8);
        assert_eq!(h.host_of(HUB_U), Some(0));
        assert_ne!(h.host_of(HUB_V), Some(0));
        assert!(compatible(&fam, &h, s, 3, None).unwrap().compatible);
        // The projection is a two-hub, three-path shape: two vertices of
        // degree three and six of degree two.
        let proj = project(&pattern, state.g(), &h).unwrap();
        let mut degrees: Vec<usize> = h
            .host_side()
            .iter()
            .map(|&z| proj.host_graph.degree(z))
            .collect();
        degrees.sort_unstable();
        assert_eq!(degrees, vec![2, 2, 2, 2, 2, 2, 3, 3]);
    }

    #[test]
    fn driver_builds_a_good_collection_on_k20() {
        let g = Graph::complete(20);
        let cfg = SupersatConfig::new(3, 3).unwrap();
        let outcome = supersaturate(&g, &cfg).unwrap();
        assert_eq!(outcome.stop, StopReason::BudgetExhausted);
        assert_eq!(outcome.family.len(), 64);
        assert!(outcome.family.len() >= 50);
        assert!(!outcome.target_reached);
        assert!(outcome.hypothesis_met);

        // Truncated attempts starve at the tiny schedule value, so every
        // insertion lands at the full truncation.
        assert_eq!(outcome.chosen_t, 3);
        assert_eq!(outcome.hprime_len(), 64);
        let cell_total: usize = outcome.family.cells().map(|(_, gh)| gh.len()).sum();
        assert_eq!(cell_total, 64);
        assert!(outcome.family.cells().all(|(&(_, t), _)| t == 3));

        // The full goodness sweep is clean at the index cap.
        assert!(outcome.goodness.is_good());
        assert!(outcome.goodness.total_checked() > 0);

        // Every hyperedge projects onto a two-hub, three-path shape.
        let pattern = outcome.family.pattern().clone();
        for h in outcome.family.union_all().hyperedges() {
            let proj = project(&pattern, &g, h).unwrap();
            let mut degrees: Vec<usize> = h
                .host_side()
                .iter()
                .map(|&z| proj.host_graph.degree(z))
                .collect();
            degrees.sort_unstable();
            assert_eq!(degrees, vec![2, 2, 2, 2, 2, 2, 3, 3]);
        }

        // Nothing is saturated at this scale: no host edge was pruned, and
        // single-edge link sets are empty on the live collection.
        let (g0, removed) =
            remove_saturated_edges(&g, outcome.family.union_all(), outcome.family.params())
                .unwrap();
        assert!(removed.is_empty());
        assert_eq!(g0.edge_count(), g.edge_count());
        let some_h = &outcome.family.union_all().hyperedges()[0];
        let hubs = Assignment::from_pairs(vec![
            (HUB_U, some_h.host_of(HUB_U).unwrap()),
            (HUB_V, some_h.host_of(HUB_V).unwrap()),
        ]);
        let nu: BTreeSet<u32> = [pattern.internal(1, 1)].into_iter().collect();
        let links = outcome
            .family
            .union_all()
            .link_set(outcome.family.params(), &hubs, &nu)
            .unwrap();
        assert!(links.is_empty());

        // Manifest sanity.
        let manifest = &outcome.manifest;
        assert_eq!(manifest["stop"], "budget-exhausted");
        assert_eq!(manifest["hyperedges"], 64);
        assert_eq!(manifest["chosen_t"], 3);
        assert_eq!(manifest["goodness"]["good"], true);
        assert_eq!(manifest["host"]["n"], 20);
        assert!(manifest["constants"]["k"].is_string());
    }

    #[test]
    fn edge_translation_dedups_and_bounds() {
        let (pattern, host) = copy_host();
        let mut hprime = GHypergraph::new(pattern.clone(), host.clone());
        hprime.insert(identity_assignment(&pattern)).unwrap();
        hprime.insert(swapped_assignment(&pattern)).unwrap();
        assert_eq!(hprime.len(), 2);

        let params = CodegreeParams::new(
            pattern.clone(),
            host_scale(9, 8, 3).unwrap(),
            8,
            rational(3, 10),
            CodegreeFamily::Combined { t: 3 },
        )
        .unwrap();
        let (eh, report) = edge_hypergraph(&hprime, &params, 3).unwrap();

        // Two assignments with the same edge image collapse to one edge
        // hyperedge covering all nine host edges.
        assert_eq!(eh.len(), 1);
        assert_eq!(report.source_count, 2);
        assert_eq!(report.edge_count, 1);
        assert!(report.loss_factor_ok);
        assert_eq!(eh.hyperedges()[0].len(), 9);
        assert_eq!(eh.degree(&[(0, 2)]), 1);
        assert_eq!(eh.degree(&[(0, 2), (2, 5)]), 1);
        assert_eq!(eh.degree(&[(0, 1)]), 0);

        // Subsets of nine edges at sizes one to three.
        assert_eq!(report.sigma_checked, 9 + 36 + 84);
        assert!(report.codegree_ok);
        assert!(report.violations.is_empty());
        assert!(report.pattern_bound_ok);
        assert!(report.max_patterns <= 256);

        // The closed-form constant is pinned by the single-edge rows:
        // 16^9 / (9^8 · 64), strictly between 24 and 25.
        let c = report.minimal_c.clone().unwrap();
        assert_eq!(c.cmp_integer(&BigUint::from(24u32)), std::cmp::Ordering::Greater);
        assert_eq!(c.cmp_integer(&BigUint::from(25u32)), std::cmp::Ordering::Less);
        let worst = report.worst.unwrap();
        assert_eq!(worst.sigma.len(), 1);

        // Parameter misuse is rejected.
        let wrong_family = params.with_family(CodegreeFamily::Forest).unwrap();
        assert!(matches!(
            edge_hypergraph(&hprime, &wrong_family, 3),
            Err(Error::InvalidParameter(_))
        ));
        let wrong_host = CodegreeParams::new(
            pattern.clone(),
            host_scale(9, 8, 3).unwrap(),
            9,
            rational(3, 10),
            CodegreeFamily::Combined { t: 3 },
        )
        .unwrap();
        assert!(matches!(
            edge_hypergraph(&hprime, &wrong_host, 3),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn config_rejects_out_of_range_shapes() {
        assert!(SupersatConfig::new(2, 3).is_err());
        assert!(SupersatConfig::new(3, 2).is_err());
        let mut cfg = SupersatConfig::new(3, 3).unwrap();
        cfg.delta = rational(0, 1);
        assert!(cfg.validate().is_err());
        let mut cfg = SupersatConfig::new(3, 3).unwrap();
        cfg.max_hyperedges = 0;
        assert!(cfg.validate().is_err());
        assert!(supersaturate(&Graph::new(8), &SupersatConfig::new(3, 3).unwrap()).is_err());
    }
}
