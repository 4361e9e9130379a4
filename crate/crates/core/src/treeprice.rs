//! Tollbooth pricing on trees: the depth-ordered randomized rounding of the
//! path LP, the sparse set of edges its rejection analysis inspects, and the
//! end-to-end pipeline.

use num_traits::{Signed, Zero};
use rand::Rng;
use serde::Serialize;

use crate::capprofit::{run_algorithm1_with, Alg1Config, Alg1Report, Rounding};
use crate::decomp::{GapVerifier, WeightedColumn};
use crate::error::{PricingError, Result};
use crate::lpkit::{solve_restricted, CapacityVector, Column, FractionalAssignment};
use crate::model::{Allocation, Instance, InstanceKind, ItemSet, TreeShape};
use crate::num::{to_f64, Money, Numeric};
use crate::seeding::trial_rng;
use crate::swm::SwmSolver;

/// Sampling scale of the rounding.
pub const TREE_ALPHA: f64 = 0.01;
/// Lower bound on `Pr[path kept] / x` at `α = 0.01`.
pub const SURVIVAL_CONSTANT: f64 = 0.00425;
/// Upper bound on the bad-event sum over a sparse check set at `α = 0.01`.
pub const BAD_EVENT_LIMIT: f64 = 0.575;
/// Per-edge bad-event bound at unit capacity and `α = 0.01`, raised to `c`.
pub const BAD_EVENT_BASE: f64 = 0.231;
/// Survival constant quoted for uniform capacities; opt-in only.
pub const UNIFORM_CAPACITY_CONSTANT: f64 = 0.3;
/// Retries of the verifier wrapper.
pub const VERIFIER_TRIALS: usize = 256;

fn tree_of(inst: &Instance) -> Result<&TreeShape> {
    match &inst.kind {
        InstanceKind::Tree(t) => Ok(t),
        other => Err(PricingError::NotATree(format!("instance kind is {}", other.name()))),
    }
}

/// Edge and path depths with respect to the tree's root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DepthIndex {
    pub edge: Vec<usize>,
}

impl DepthIndex {
    pub fn new(tree: &TreeShape) -> Self {
        DepthIndex { edge: (0..tree.edges.len()).map(|e| tree.edge_depth(e)).collect() }
    }

    /// Minimum edge depth over `s`; `usize::MAX` for `∅`.
    pub fn path_depth(&self, s: ItemSet) -> usize {
        s.iter().map(|e| self.edge[e]).min().unwrap_or(usize::MAX)
    }
}

/// Everything one run of the rounding did.
#[derive(Clone, Debug, PartialEq)]
pub struct TreeRound {
    /// Path drawn for each customer in step one (`∅` when none).
    pub sampled: Vec<ItemSet>,
    /// Customers with a sampled path, in scan order.
    pub order: Vec<usize>,
    pub allocation: Allocation,
}

/// Scan order of step two: path depth, then customer index, then item list.
pub fn scan_order(depth: &DepthIndex, sampled: &[ItemSet]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..sampled.len()).filter(|&j| !sampled[j].is_empty()).collect();
    order.sort_by(|&a, &b| {
        depth
            .path_depth(sampled[a])
            .cmp(&depth.path_depth(sampled[b]))
            .then(a.cmp(&b))
            .then_with(|| sampled[a].to_vec().cmp(&sampled[b].to_vec()))
    });
    order
}

/// Step two: keep each sampled path, in scan order, iff every edge still has
/// residual capacity.
pub fn greedy_keep(depth: &DepthIndex, capacities: &[u32], sampled: &[ItemSet]) -> (Vec<usize>, Allocation) {
    let order = scan_order(depth, sampled);
    let mut residual = capacities.to_vec();
    let mut alloc = Allocation::empty(sampled.len());
    for &j in &order {
        let s = sampled[j];
        if s.iter().all(|e| residual[e] > 0) {
            s.iter().for_each(|e| residual[e] -= 1);
            alloc.0[j] = s;
        }
    }
    (order, alloc)
}

/// Step one: each customer independently draws path `S` with probability
/// `α x_{j,S}`.
pub fn sample_paths<R: Rng + ?Sized>(n: usize, x: &FractionalAssignment, alpha: f64, rng: &mut R) -> Vec<ItemSet> {
    let mut by_customer: Vec<Vec<&Column>> = vec![Vec::new(); n];
    for c in x.support() {
        by_customer[c.customer].push(c);
    }
    by_customer
        .iter()
        .map(|cols| {
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            for c in cols {
                acc += alpha * to_f64(&c.weight);
                if u < acc {
                    return c.set;
                }
            }
            ItemSet::EMPTY
        })
        .collect()
}

/// Two-step rounding of a feasible path-LP solution: sample at scale `α`,
/// then keep greedily by depth under the capacities `x` was solved for.
pub fn tree_round<R: Rng + ?Sized>(
    inst: &Instance,
    x: &FractionalAssignment,
    alpha: f64,
    rng: &mut R,
) -> Result<TreeRound> {
    let tree = tree_of(inst)?;
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(PricingError::InvalidInstance(format!("sampling scale {alpha} outside (0, 1]")));
    }
    let depth = DepthIndex::new(tree);
    let sampled = sample_paths(inst.n(), x, alpha, rng);
    let (order, allocation) = greedy_keep(&depth, &x.capacities.0, &sampled);
    Ok(TreeRound { sampled, order, allocation })
}

/// The edges of a path whose bad events dominate its rejection.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SparseCheckSet {
    /// Vertex of the path closest to the root.
    pub top: usize,
    /// Branches leaving `top`, each listed from `top` downwards.
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    /// Halving subsequences of the branches.
    pub left_primed: Vec<usize>,
    pub right_primed: Vec<usize>,
}

impl SparseCheckSet {
    pub fn edges(&self) -> Vec<usize> {
        self.left_primed.iter().chain(&self.right_primed).copied().collect()
    }
}

/// Positions kept by the halving rule: the first position, then repeatedly
/// the first later position whose capacity is at most half the last kept one.
pub fn halving_subsequence(caps: &[u32]) -> Vec<usize> {
    let mut out = Vec::new();
    let Some(&first) = caps.first() else { return out };
    out.push(0);
    let mut last = first;
    for (i, &c) in caps.iter().enumerate().skip(1) {
        if 2 * c <= last {
            out.push(i);
            last = c;
        }
    }
    out
}

/// Splits path `s` at its highest vertex and applies the halving rule to
/// each branch.
pub fn sparse_check_set(tree: &TreeShape, s: ItemSet, capacities: &[u32]) -> Result<SparseCheckSet> {
    if !tree.is_path(s) {
        return Err(PricingError::NotATree(format!("{s:?} is not a path")));
    }
    let top = s
        .iter()
        .flat_map(|e| [tree.edges[e].0, tree.edges[e].1])
        .min_by_key(|&v| (tree.vertex_depth[v], v))
        .expect("paths are nonempty");
    let mut branches: Vec<Vec<usize>> = Vec::new();
    for &(_, e) in tree.neighbors(top) {
        if !s.contains(e) {
            continue;
        }
        let mut branch = vec![e];
        let mut at = tree.other_end(e, top);
        let mut prev = e;
        while let Some(&(_, next)) = tree.neighbors(at).iter().find(|&&(_, f)| f != prev && s.contains(f)) {
            branch.push(next);
            at = tree.other_end(next, at);
            prev = next;
        }
        branches.push(branch);
    }
    branches.sort();
    let left = branches.first().cloned().unwrap_or_default();
    let right = branches.get(1).cloned().unwrap_or_default();
    let primed = |b: &[usize]| {
        let caps: Vec<u32> = b.iter().map(|&e| capacities[e]).collect();
        halving_subsequence(&caps).into_iter().map(|i| b[i]).collect()
    };
    Ok(SparseCheckSet { top, left_primed: primed(&left), right_primed: primed(&right), left, right })
}

/// `β(c) = ((2α)^{1/(2α)} e^{(1−2α)/(2α)})^{αc}`, evaluated in log space.
pub fn beta(c: f64, alpha: f64) -> f64 {
    (c * ((2.0 * alpha).ln() / 2.0 + (1.0 - 2.0 * alpha) / 2.0)).exp()
}

/// `Σ_{e∈S'} β(c_e)`, the bound on the rejection probability of a path.
pub fn bad_event_budget(check: &SparseCheckSet, capacities: &[u32], alpha: f64) -> f64 {
    check.edges().iter().map(|&e| beta(capacities[e] as f64, alpha)).sum()
}

/// Adds unassigned customers' columns in decreasing weight while they fit.
fn augment(alloc: &mut Allocation, k: &[u32], columns: &[WeightedColumn]) {
    let mut load = alloc.load(k.len());
    let mut order: Vec<&WeightedColumn> = columns.iter().filter(|c| c.2.is_positive()).collect();
    order.sort_by(|a, b| b.2.cmp(&a.2).then(a.0.cmp(&b.0)));
    for (j, s, _) in order {
        if alloc.0[*j].is_empty() && s.iter().all(|e| load[e] < k[e]) {
            s.iter().for_each(|e| load[e] += 1);
            alloc.0[*j] = *s;
        }
    }
}

/// Gap verifier built on the tree rounding: solve the weighted path LP,
/// return it if integral, else the best of repeated roundings (each
/// greedily topped up with unused positive-weight columns).
#[derive(Clone, Debug)]
pub struct TreeGapVerifier {
    pub alpha: f64,
    pub trials: usize,
    pub seed: u64,
    /// Declare the uniform-capacity constant when all capacities agree.
    pub uniform_remark: bool,
    calls: u64,
}

impl TreeGapVerifier {
    pub fn new(seed: u64) -> Self {
        TreeGapVerifier { alpha: TREE_ALPHA, trials: VERIFIER_TRIALS, seed, uniform_remark: false, calls: 0 }
    }

    fn uniform(&self, k: &CapacityVector) -> bool {
        k.0.windows(2).all(|w| w[0] == w[1])
    }
}

impl GapVerifier for TreeGapVerifier {
    /// `1 / 0.00425`.
    fn declared_factor(&self) -> Option<Money> {
        Some(Money::new(4000.into(), 17.into()))
    }

    fn verify(&mut self, inst: &Instance, k: &CapacityVector, columns: &[WeightedColumn]) -> Result<Allocation> {
        tree_of(inst)?;
        let lp = solve_restricted(inst.n(), k, columns, Numeric::Exact)?;
        let x = FractionalAssignment {
            columns: columns
                .iter()
                .zip(&lp.primal)
                .map(|((j, s, _), w)| Column { customer: *j, set: *s, weight: w.clone() })
                .collect(),
            capacities: k.clone(),
        };
        if x.is_integral() {
            let mut alloc = Allocation::empty(inst.n());
            for c in x.support() {
                alloc.0[c.customer] = c.set;
            }
            return Ok(alloc);
        }
        let weight = |a: &Allocation| {
            columns.iter().filter(|(j, s, _)| a.0[*j] == *s).fold(Money::zero(), |acc, c| acc + &c.2)
        };
        let call = self.calls;
        self.calls += 1;
        let mut best: Option<(Money, Allocation)> = None;
        for t in 0..self.trials.max(1) {
            let mut rng = trial_rng(self.seed ^ call.rotate_left(32), t as u64);
            let mut alloc = tree_round(inst, &x, self.alpha, &mut rng)?.allocation;
            augment(&mut alloc, &k.0, columns);
            let w = weight(&alloc);
            if best.as_ref().is_none_or(|(b, _)| w > *b) {
                best = Some((w, alloc));
            }
        }
        Ok(best.expect("at least one trial").1)
    }
}

impl TreeGapVerifier {
    /// The opt-in uniform-capacity factor `1 / 0.3`, when it applies to `k`.
    pub fn uniform_factor(&self, k: &CapacityVector) -> Option<Money> {
        (self.uniform_remark && self.uniform(k))
            .then(|| Money::new(10.into(), 3.into()))
    }
}

/// The capacity-schedule algorithm on a tree instance with the path LP, rounding `x^(u)` by the
/// tree rounding directly at scale `alpha` (best of `cfg.trials`).
pub fn tollbooth_tree(inst: &Instance, cfg: &Alg1Config, alpha: f64, swm: &dyn SwmSolver) -> Result<Alg1Report> {
    let tree = tree_of(inst)?;
    for (j, v) in inst.customers.iter().enumerate() {
        if let Some(s) = v.candidates(inst.m).into_iter().find(|s| !tree.is_path(*s)) {
            return Err(PricingError::NotATree(format!("customer {j} lists {s:?}, which is not a path")));
        }
    }
    run_algorithm1_with(inst, cfg, swm, Rounding::TreeDirect { alpha })
}
