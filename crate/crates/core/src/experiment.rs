//! Random-host experiments: seed-coupled G(n, p) grids with greedy,
//! deletion-method, and exact theta-free subgraph values per trial, and the
//! deterministic CSV the reports consume.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::graph::{sample_gnp, Graph};
use crate::oracle::{exact_ex, greedy_deletion_bound, greedy_keep_bound};

/// Experiment schedule: one coupled G(n, p) sample per (p, trial), scored by
/// the greedy keep bound, the deletion-method lower bound, and — when
/// `n <= exact_cap` — the exact extremal number under `exact_budget` search
/// nodes. Trial `i` draws from seed `seed + i` at every p, so a fixed trial
/// sees nested edge sets as p grows.
#[derive(Clone, Debug)]
pub struct ExperimentPlan {
    pub a: u32,
    pub b: u32,
    pub n: u32,
    /// Probabilities to sample at, deduplicated and sorted ascending.
    pub p_grid: Vec<BigRational>,
    pub trials: u32,
    pub seed: u64,
    pub exact_cap: u32,
    pub exact_budget: u64,
}

impl ExperimentPlan {
    /// Defaults sized for desk hosts: 20 trials on the decile grid
    /// 1/10..=1, exact values up to n = 10.
    pub fn new(a: u32, b: u32, n: u32) -> Result<Self> {
        let plan = ExperimentPlan {
            a,
            b,
            n,
            p_grid: (1..=10)
                .map(|d| BigRational::new(d.into(), 10.into()))
                .collect(),
            trials: 20,
            seed: 7,
            exact_cap: 10,
            exact_budget: 50_000_000,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if self.a < 2 || self.b < 2 {
            return Err(Error::Domain(format!(
                "experiments need a >= 2 and b >= 2, got a = {}, b = {}",
                self.a, self.b
            )));
        }
        if self.n == 0 {
            return Err(Error::Domain("host order must be positive".to_string()));
        }
        if self.trials == 0 {
            return Err(Error::Domain("at least one trial required".to_string()));
        }
        if self.p_grid.is_empty() {
            return Err(Error::Domain("probability grid is empty".to_string()));
        }
        for p in &self.p_grid {
            if p.is_negative() || p > &BigRational::one() {
                return Err(Error::Domain(format!(
                    "edge probability {p} outside [0, 1]"
                )));
            }
        }
        Ok(())
    }

    /// The grid sorted ascending with duplicates removed.
    fn sorted_grid(&self) -> Vec<BigRational> {
        let mut grid = self.p_grid.clone();
        grid.sort();
        grid.dedup();
        grid
    }
}

/// One scored sample.
#[derive(Clone, Debug)]
pub struct ExperimentRow {
    pub n: u32,
    pub p: BigRational,
    pub trial: u32,
    /// Edges kept by the copy-avoiding greedy subgraph.
    pub greedy: u64,
    /// Exact extremal number, when n is within the exact cap.
    pub exact: Option<u64>,
    /// Deletion-method lower bound.
    pub deletion: u64,
    /// Edges of the sample itself.
    pub edges: u64,
}

/// All rows of a finished plan, ordered by (p, trial).
#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub plan: ExperimentPlan,
    pub rows: Vec<ExperimentRow>,
}

impl ExperimentReport {
    /// Per-p mean of a column over the trials, in grid order; `None` when
    /// the column is absent on any trial of that p.
    fn mean_of(
        &self,
        column: impl Fn(&ExperimentRow) -> Option<u64>,
    ) -> Vec<(BigRational, Option<BigRational>)> {
        let mut sums: BTreeMap<BigRational, Option<(BigRational, u32)>> = BTreeMap::new();
        for row in &self.rows {
            let slot = sums
                .entry(row.p.clone())
                .or_insert_with(|| Some((BigRational::zero(), 0)));
            match (column(row), slot.as_mut()) {
                (Some(v), Some((sum, count))) => {
                    *sum += BigRational::from_integer(v.into());
                    *count += 1;
                }
                _ => *slot = None,
            }
        }
        sums.into_iter()
            .map(|(p, acc)| {
                let mean = acc.map(|(sum, count)| sum / BigRational::from_integer(count.into()));
                (p, mean)
            })
            .collect()
    }

    /// Mean exact value per p, ascending in p.
    pub fn mean_exact(&self) -> Vec<(BigRational, Option<BigRational>)> {
        self.mean_of(|r| r.exact)
    }

    /// Mean greedy value per p, ascending in p.
    pub fn mean_greedy(&self) -> Vec<(BigRational, BigRational)> {
        self.mean_of(|r| Some(r.greedy))
            .into_iter()
            .map(|(p, m)| (p, m.expect("greedy present on every row")))
            .collect()
    }

    /// CSV with a versioned header comment; probabilities render as exact
    /// rationals and a skipped exact column is left empty. Byte-identical
    /// for identical plans.
    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# theta-free experiment v1: a={} b={} n={} trials={} seed={} exact-cap={}\n\
             n,p,trial,greedy,exact,deletion,edges\n",
            self.plan.a,
            self.plan.b,
            self.plan.n,
            self.plan.trials,
            self.plan.seed,
            self.plan.exact_cap,
        );
        for r in &self.rows {
            let exact = r.exact.map(|v| v.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.n, r.p, r.trial, r.greedy, exact, r.deletion, r.edges
            ));
        }
        out
    }
}

/// Runs the plan: samples every (p, trial) cell, scores it, and returns rows
/// sorted by (p, trial). Exact values are memoized by sample edge set, so
/// coinciding samples (p = 1, or overlapping draws on small hosts) cost one
/// search. A search that exhausts `exact_budget` before proving optimality
/// is a `Budget` error rather than a silently inexact column.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<ExperimentReport> {
    plan.validate()?;
    let grid = plan.sorted_grid();
    let mut exact_memo: BTreeMap<Vec<(u32, u32)>, u64> = BTreeMap::new();
    let mut rows = Vec::with_capacity(grid.len() * plan.trials as usize);
    for p in &grid {
        for trial in 0..plan.trials {
            let seed = plan.seed.wrapping_add(u64::from(trial));
            let sample = sample_gnp(plan.n, p, seed)?;
            let greedy = greedy_keep_bound(&sample, plan.a, plan.b)?;
            let deletion = greedy_deletion_bound(&sample, plan.a, plan.b)?;
            let exact = if plan.n <= plan.exact_cap {
                Some(exact_value(
                    &sample,
                    plan.a,
                    plan.b,
                    plan.exact_budget,
                    &mut exact_memo,
                )?)
            } else {
                None
            };
            rows.push(ExperimentRow {
                n: plan.n,
                p: p.clone(),
                trial,
                greedy,
                exact,
                deletion,
                edges: sample.edge_count() as u64,
            });
        }
    }
    Ok(ExperimentReport {
        plan: plan.clone(),
        rows,
    })
}

fn exact_value(
    sample: &Graph,
    a: u32,
    b: u32,
    budget: u64,
    memo: &mut BTreeMap<Vec<(u32, u32)>, u64>,
) -> Result<u64> {
    let mut key: Vec<(u32, u32)> = sample.edges().to_vec();
    key.sort_unstable();
    if let Some(&v) = memo.get(&key) {
        return Ok(v);
    }
    let result = exact_ex(sample, a, b, budget)?;
    if !result.optimal {
        return Err(Error::Budget(format!(
            "exact search spent {} nodes without proving optimality",
            result.nodes
        )));
    }
    memo.insert(key, result.max_edges);
    Ok(result.max_edges)
}
