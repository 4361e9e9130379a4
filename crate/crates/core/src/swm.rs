//! Social-welfare maximization: an exact desk-scale solver, the unit-capacity
//! allocation-plus-pricing branch, and the path-restricted tree LP.

use std::collections::HashMap;

use num_traits::Zero;

use crate::error::{PricingError, Result};
use crate::lpkit::{solve_swm_lp, CapacityVector, SwmLpSolution};
use crate::model::{Allocation, Instance, InstanceKind, ItemSet, PriceVector, PricedOutcome};
use crate::num::{Money, Numeric};

/// Default cap on the exhaustive search size.
pub const DEFAULT_SWM_BUDGET: u128 = 10_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct SwmSolution {
    pub allocation: Allocation,
    pub welfare: Money,
    pub capacities: CapacityVector,
}

/// A welfare-maximization algorithm run under a capacity vector.
pub trait SwmSolver: Sync {
    fn solve(&self, inst: &Instance, k: &CapacityVector) -> Result<SwmSolution>;

    /// Approximation factor relative to the LP optimum the solver guarantees,
    /// when it has one.
    fn factor(&self) -> Option<Money> {
        None
    }
}

/// Exhaustive search over the column universe.
#[derive(Clone, Copy, Debug)]
pub struct ExactSwm {
    pub budget: u128,
}

impl Default for ExactSwm {
    fn default() -> Self {
        ExactSwm { budget: DEFAULT_SWM_BUDGET }
    }
}

impl SwmSolver for ExactSwm {
    fn solve(&self, inst: &Instance, k: &CapacityVector) -> Result<SwmSolution> {
        swm_exact(inst, k, self.budget)
    }
}

/// Size of the search `max_weight_allocation` would perform.
///
/// The memoized search visits at most `Σ_j (options_j + 1)` edges per
/// reachable load vector; it is also bounded by the plain product of choices.
pub fn search_size(k: &[u32], n: usize, options: &[usize]) -> u128 {
    let sat = |a: u128, b: u128| a.saturating_mul(b);
    let product = options.iter().fold(1u128, |acc, &o| sat(acc, o as u128 + 1));
    let loads = k.iter().fold(1u128, |acc, &c| sat(acc, (c as u128).min(n as u128) + 1));
    let edges: u128 = options.iter().map(|&o| o as u128 + 1).sum();
    product.min(sat(loads, edges))
}

/// Mixed-radix encoding of per-item loads capped at `min(k_e, n)`.
struct LoadCodec {
    radix: Vec<u64>,
}

impl LoadCodec {
    fn new(k: &[u32], n: usize) -> Self {
        let mut radix = Vec::with_capacity(k.len());
        let mut acc = 1u64;
        for &c in k {
            radix.push(acc);
            acc = acc.saturating_mul((c as u64).min(n as u64) + 1);
        }
        LoadCodec { radix }
    }

    fn place(&self, code: u64, s: ItemSet) -> u64 {
        s.iter().fold(code, |acc, e| acc + self.radix[e])
    }
}

/// Maximum total weight over choices of at most one option per customer that
/// respect `k`. Only options with positive weight are ever chosen; ties keep
/// the earlier choice in customer order with `∅` first.
///
/// Returns the chosen option index per customer.
pub fn max_weight_allocation(
    k: &[u32],
    options: &[Vec<(ItemSet, Money)>],
    budget: u128,
) -> Result<(Vec<Option<usize>>, Money)> {
    let n = options.len();
    let opts: Vec<Vec<(usize, ItemSet, &Money)>> = options
        .iter()
        .map(|o| o.iter().enumerate().filter(|(_, (_, w))| *w > Money::zero()).map(|(i, (s, w))| (i, *s, w)).collect())
        .collect();
    let size = search_size(k, n, &opts.iter().map(Vec::len).collect::<Vec<_>>());
    if size > budget {
        return Err(PricingError::BudgetExceeded { size, budget });
    }
    let codec = LoadCodec::new(k, n);
    let mut load = vec![0u32; k.len()];
    let mut memo: HashMap<(usize, u64), (Money, Option<usize>)> = HashMap::new();
    best_from(0, 0, &mut load, k, &opts, &codec, &mut memo);
    let mut choice = vec![None; n];
    let mut code = 0u64;
    for j in 0..n {
        let (_, pick) = memo[&(j, code)].clone();
        if let Some(p) = pick {
            let (orig, s, _) = opts[j][p];
            choice[j] = Some(orig);
            code = codec.place(code, s);
        }
    }
    let total = memo.get(&(0, 0)).map(|v| v.0.clone()).unwrap_or_else(Money::zero);
    Ok((choice, total))
}

fn best_from(
    j: usize,
    code: u64,
    load: &mut [u32],
    k: &[u32],
    opts: &[Vec<(usize, ItemSet, &Money)>],
    codec: &LoadCodec,
    memo: &mut HashMap<(usize, u64), (Money, Option<usize>)>,
) -> Money {
    if j == opts.len() {
        return Money::zero();
    }
    if let Some((v, _)) = memo.get(&(j, code)) {
        return v.clone();
    }
    let mut best = (best_from(j + 1, code, load, k, opts, codec, memo), None);
    for (p, &(_, s, w)) in opts[j].iter().enumerate() {
        if s.iter().any(|e| load[e] >= k[e]) {
            continue;
        }
        s.iter().for_each(|e| load[e] += 1);
        let v = w + best_from(j + 1, codec.place(code, s), load, k, opts, codec, memo);
        s.iter().for_each(|e| load[e] -= 1);
        if v > best.0 {
            best = (v, Some(p));
        }
    }
    memo.insert((j, code), best.clone());
    best.0
}

/// Welfare-maximal allocation under `k` over each customer's candidate sets.
pub fn swm_exact(inst: &Instance, k: &CapacityVector, budget: u128) -> Result<SwmSolution> {
    let options: Vec<Vec<(ItemSet, Money)>> =
        inst.customers.iter().map(|v| v.candidates(inst.m).into_iter().map(|s| (s, v.value(s))).collect()).collect();
    let (choice, welfare) = max_weight_allocation(&k.0, &options, budget)?;
    let allocation =
        Allocation(choice.iter().zip(&options).map(|(c, o)| c.map_or(ItemSet::EMPTY, |i| o[i].0)).collect());
    Ok(SwmSolution { allocation, welfare, capacities: k.clone() })
}

/// Prices a unit-capacity welfare solution so profit equals welfare.
///
/// Each served customer's lowest-index item is priced at `v_j(S_j)` and the
/// rest of `S_j` at zero; unassigned items get the unsellable sentinel.
pub fn swm_unit_pricing(inst: &Instance, solver: &dyn SwmSolver) -> Result<PricedOutcome> {
    let sol = solver.solve(inst, &CapacityVector::ones(inst.m))?;
    let mut prices = vec![inst.unsellable_price(); inst.m];
    let mut profit = Money::zero();
    for (s, v) in sol.allocation.0.iter().zip(&inst.customers) {
        if let Some(first) = s.min_item() {
            let value = v.value(*s);
            for e in s.iter() {
                prices[e] = Money::zero();
            }
            prices[first] = value.clone();
            profit += value;
        }
    }
    Ok(PricedOutcome {
        prices: PriceVector(prices),
        allocation: sol.allocation,
        profit,
        provenance: "unit-capacity welfare pricing".into(),
    })
}

/// The LP over tree paths: every candidate of a tree instance is a path, so
/// this is the welfare LP restricted to path columns.
pub fn tree_lp(inst: &Instance, k: &CapacityVector, numeric: Numeric) -> Result<SwmLpSolution> {
    let InstanceKind::Tree(tree) = &inst.kind else {
        return Err(PricingError::NotATree(format!("instance kind is {}", inst.kind.name())));
    };
    for (j, v) in inst.customers.iter().enumerate() {
        if let Some(s) = v.candidates(inst.m).into_iter().find(|s| !tree.is_path(*s)) {
            return Err(PricingError::NotATree(format!("customer {j} lists {s:?}, which is not a path")));
        }
    }
    solve_swm_lp(inst, k, numeric)
}
