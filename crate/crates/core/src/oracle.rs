//! Brute-force ground truth for desk-scale instances.

use num_traits::{Signed, Zero};

use crate::error::{PricingError, Result};
use crate::highway::{solve_restricted_config, surplus, ChainProblem, CliqueSolution, PriceGrid};
use crate::lpkit::solve_packing_lp;
use crate::model::{Allocation, Instance, ItemSet, PriceVector, PricedOutcome};
use crate::num::{money, Money, Numeric};

/// Caps checked before any enumeration starts.
#[derive(Clone, Copy, Debug)]
pub struct OracleBudget {
    /// Allocations (or price vectors) visited by the profit and max-buy oracles.
    pub max_allocations: u128,
    /// Pricing-times-assignment combinations visited by the chain oracles.
    pub max_subsets: u128,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget { max_allocations: 2_000_000, max_subsets: 20_000_000 }
    }
}

fn check(size: u128, budget: u128) -> Result<()> {
    if size > budget {
        Err(PricingError::BudgetExceeded { size, budget })
    } else {
        Ok(())
    }
}

fn product(factors: impl IntoIterator<Item = u128>) -> u128 {
    factors.into_iter().fold(1u128, |a, b| a.saturating_mul(b))
}

/// Best item pricing for a fixed allocation, with unused items unsellable.
pub fn price_allocation(inst: &Instance, alloc: &Allocation) -> Result<(PriceVector, Money)> {
    let used: ItemSet = alloc.0.iter().fold(ItemSet::EMPTY, |a, s| a.union(*s));
    let items: Vec<usize> = used.iter().collect();
    let buyers: Vec<usize> = (0..inst.n()).filter(|&j| !alloc.0[j].is_empty()).collect();
    let a: Vec<Vec<Money>> = buyers
        .iter()
        .map(|&j| items.iter().map(|&e| if alloc.0[j].contains(e) { money(1) } else { money(0) }).collect())
        .collect();
    let b: Vec<Money> = buyers.iter().map(|&j| inst.customers[j].value(alloc.0[j])).collect();
    let load = alloc.load(inst.m);
    let w: Vec<Money> = items.iter().map(|&e| money(load[e] as i64)).collect();
    let mut prices = vec![inst.unsellable_price(); inst.m];
    if items.is_empty() {
        return Ok((PriceVector(prices), Money::zero()));
    }
    let sol = solve_packing_lp(&a, &b, &w, Numeric::Exact)?;
    for (k, &e) in items.iter().enumerate() {
        prices[e] = sol.primal[k].clone();
    }
    Ok((PriceVector(prices), sol.objective))
}

/// Maximum profit over every capacity-feasible allocation of candidate sets,
/// each priced by its own LP. Allocations whose welfare cannot beat the best
/// profit found so far are skipped, which never changes the result since
/// profit is at most welfare.
pub fn exact_profit(inst: &Instance, budget: &OracleBudget) -> Result<PricedOutcome> {
    let options: Vec<Vec<(ItemSet, Money)>> = inst
        .customers
        .iter()
        .map(|v| v.candidates(inst.m).into_iter().map(|s| (s, v.value(s))).filter(|(_, x)| x.is_positive()).collect())
        .collect();
    check(product(options.iter().map(|o| o.len() as u128 + 1)), budget.max_allocations)?;
    let mut suffix_best = vec![Money::zero(); options.len() + 1];
    for j in (0..options.len()).rev() {
        let top = options[j].iter().map(|(_, x)| x).max().cloned().unwrap_or_else(Money::zero);
        suffix_best[j] = &suffix_best[j + 1] + top;
    }
    let mut state = ProfitSearch {
        inst,
        options: &options,
        suffix_best: &suffix_best,
        current: vec![ItemSet::EMPTY; inst.n()],
        load: vec![0; inst.m],
        best: None,
    };
    state.dfs(0, Money::zero())?;
    let (prices, allocation, profit) = match state.best {
        Some(b) => b,
        None => (PriceVector(vec![inst.unsellable_price(); inst.m]), Allocation::empty(inst.n()), Money::zero()),
    };
    Ok(PricedOutcome { prices, allocation, profit, provenance: "exhaustive allocation pricing".into() })
}

struct ProfitSearch<'a> {
    inst: &'a Instance,
    options: &'a [Vec<(ItemSet, Money)>],
    suffix_best: &'a [Money],
    current: Vec<ItemSet>,
    load: Vec<u32>,
    best: Option<(PriceVector, Allocation, Money)>,
}

impl ProfitSearch<'_> {
    fn dfs(&mut self, j: usize, welfare: Money) -> Result<()> {
        let bar = self.best.as_ref().map(|b| b.2.clone());
        if let Some(bar) = &bar {
            if &welfare + &self.suffix_best[j] <= *bar {
                return Ok(());
            }
        }
        if j == self.options.len() {
            let alloc = Allocation(self.current.clone());
            let (prices, profit) = price_allocation(self.inst, &alloc)?;
            if bar.is_none_or(|b| profit > b) {
                self.best = Some((prices, alloc, profit));
            }
            return Ok(());
        }
        self.dfs(j + 1, welfare.clone())?;
        for (s, x) in &self.options[j] {
            if s.iter().any(|e| self.load[e] >= self.inst.capacities[e]) {
                continue;
            }
            s.iter().for_each(|e| self.load[e] += 1);
            self.current[j] = *s;
            self.dfs(j + 1, &welfare + x)?;
            self.current[j] = ItemSet::EMPTY;
            s.iter().for_each(|e| self.load[e] -= 1);
        }
        Ok(())
    }
}

/// Nondecreasing level vectors of length `len` over `0..=levels`, where
/// `levels` means price 0.
fn monotone_levels(len: usize, levels: usize) -> Vec<Vec<Option<usize>>> {
    fn rec(len: usize, levels: usize, from: usize, cur: &mut Vec<Option<usize>>, out: &mut Vec<Vec<Option<usize>>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for q in from..=levels {
            cur.push((q < levels).then_some(q));
            rec(len, levels, q, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(len, levels, 0, &mut Vec::with_capacity(len), &mut out);
    out
}

fn binomial(n: u128, k: u128) -> u128 {
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

fn chain_load_ok(p: &ChainProblem, load: &mut [u32], pos: usize, delta: i32) -> bool {
    let Some(caps) = &p.capacities else {
        return true;
    };
    let set = p.half.chain[pos].set();
    if delta > 0 && set.iter().any(|e| load[e] >= caps[e]) {
        return false;
    }
    for e in set.iter() {
        load[e] = (load[e] as i32 + delta) as u32;
    }
    true
}

/// Every clique solution of `p`: each monotone pricing with each feasible
/// assignment of customers to positively priced intervals they can afford.
pub fn enumerate_clique_solutions(p: &ChainProblem, grid: &PriceGrid, budget: &OracleBudget) -> Result<Vec<CliqueSolution>> {
    let (len, n) = (p.len(), p.n());
    let size = binomial((grid.len() + len) as u128, len as u128).saturating_mul(product((0..n).map(|_| len as u128 + 1)));
    check(size, budget.max_subsets)?;
    let mut out = Vec::new();
    let m = p.capacities.as_ref().map_or(0, Vec::len);
    for levels in monotone_levels(len, grid.len()) {
        let mut sol = CliqueSolution { levels, assignment: vec![None; n] };
        let mut load = vec![0u32; m];
        enumerate_assignments(p, grid, 0, &mut sol, &mut load, &mut out);
    }
    Ok(out)
}

fn enumerate_assignments(
    p: &ChainProblem,
    grid: &PriceGrid,
    j: usize,
    sol: &mut CliqueSolution,
    load: &mut [u32],
    out: &mut Vec<CliqueSolution>,
) {
    if j == p.n() {
        out.push(sol.clone());
        return;
    }
    enumerate_assignments(p, grid, j + 1, sol, load, out);
    for pos in 0..p.len() {
        let Some(q) = sol.levels[pos] else { continue };
        if grid.levels[q] > p.values[j][pos] || !chain_load_ok(p, load, pos, 1) {
            continue;
        }
        sol.assignment[j] = Some(pos);
        enumerate_assignments(p, grid, j + 1, sol, load, out);
        sol.assignment[j] = None;
        chain_load_ok(p, load, pos, -1);
    }
}

/// Best voucher value over every clique solution.
pub fn exact_voucher(p: &ChainProblem, beta: &[Money], grid: &PriceGrid, budget: &OracleBudget) -> Result<Money> {
    Ok(enumerate_clique_solutions(p, grid, budget)?
        .iter()
        .map(|s| s.voucher_value(grid, beta))
        .max()
        .unwrap_or_else(Money::zero))
}

/// Best value of the relaxation in which a customer may hold several
/// intervals as long as their prices differ.
pub fn exact_relaxed_voucher(p: &ChainProblem, beta: &[Money], grid: &PriceGrid, budget: &OracleBudget) -> Result<Money> {
    let (len, n) = (p.len(), p.n());
    let size =
        binomial((grid.len() + len) as u128, len as u128).saturating_mul(product((0..n).map(|_| 1u128 << len)));
    check(size, budget.max_subsets)?;
    let m = p.capacities.as_ref().map_or(0, Vec::len);
    let mut best = Money::zero();
    for levels in monotone_levels(len, grid.len()) {
        let mut load = vec![0u32; m];
        let v = relaxed_best(p, grid, beta, &levels, 0, 0, &mut load);
        if v > best {
            best = v;
        }
    }
    Ok(best)
}

fn relaxed_best(
    p: &ChainProblem,
    grid: &PriceGrid,
    beta: &[Money],
    levels: &[Option<usize>],
    j: usize,
    pos: usize,
    load: &mut [u32],
) -> Money {
    relaxed_rec(p, grid, beta, levels, j, pos, 0u64, load)
}

/// Best relaxed value for customers `j..`, where customer `j` still chooses
/// among positions `pos..` and `used` marks levels it already holds.
#[allow(clippy::too_many_arguments)]
fn relaxed_rec(
    p: &ChainProblem,
    grid: &PriceGrid,
    beta: &[Money],
    levels: &[Option<usize>],
    j: usize,
    pos: usize,
    used: u64,
    load: &mut [u32],
) -> Money {
    if j == p.n() {
        return Money::zero();
    }
    if pos == p.len() {
        return relaxed_rec(p, grid, beta, levels, j + 1, 0, 0, load);
    }
    let mut best = relaxed_rec(p, grid, beta, levels, j, pos + 1, used, load);
    if let Some(q) = levels[pos] {
        let fresh = used & (1 << q) == 0;
        if fresh && grid.levels[q] <= p.values[j][pos] && chain_load_ok(p, load, pos, 1) {
            let v = surplus(&grid.levels[q], &beta[j]) + relaxed_rec(p, grid, beta, levels, j, pos + 1, used | (1 << q), load);
            chain_load_ok(p, load, pos, -1);
            if v > best {
                best = v;
            }
        }
    }
    best
}

/// The configuration LP with every clique solution materialized.
pub fn exhaustive_config_lp(
    problems: &[ChainProblem],
    grid: &PriceGrid,
    numeric: Numeric,
    budget: &OracleBudget,
) -> Result<(Money, Vec<Vec<CliqueSolution>>)> {
    let n = problems.first().map_or(0, ChainProblem::n);
    let columns: Vec<Vec<CliqueSolution>> =
        problems.iter().map(|p| enumerate_clique_solutions(p, grid, budget)).collect::<Result<_>>()?;
    let (objective, ..) = solve_restricted_config(n, grid, &columns, numeric)?;
    Ok((objective, columns))
}

/// Best multi-product profit: every item takes one of its customers'
/// values as price (or is withheld), and customers are matched to at most
/// one affordable item within capacities so that revenue is maximal.
pub fn exact_maxbuy(inst: &Instance, budget: &OracleBudget) -> Result<Money> {
    let (m, n) = (inst.m, inst.n());
    let value = |j: usize, e: usize| inst.customers[j].value(ItemSet::singleton(e));
    let cands: Vec<Vec<Money>> = (0..m)
        .map(|e| {
            let mut c: Vec<Money> = (0..n).map(|j| value(j, e)).filter(|v| v.is_positive()).collect();
            c.sort();
            c.dedup();
            c
        })
        .collect();
    check(product(cands.iter().map(|c| c.len() as u128 + 1)), budget.max_allocations)?;
    let values: Vec<Vec<Money>> = (0..n).map(|j| (0..m).map(|e| value(j, e)).collect()).collect();
    let mut choice = vec![0usize; m];
    let mut best = Money::zero();
    loop {
        let prices: Vec<Option<&Money>> = (0..m).map(|e| (choice[e] > 0).then(|| &cands[e][choice[e] - 1])).collect();
        let v = matched_revenue(&prices, &values, &inst.capacities);
        if v > best {
            best = v;
        }
        let mut e = 0;
        while e < m {
            choice[e] += 1;
            if choice[e] <= cands[e].len() {
                break;
            }
            choice[e] = 0;
            e += 1;
        }
        if e == m {
            break;
        }
    }
    Ok(best)
}

/// Maximum revenue of a capacity-respecting matching of customers to items
/// they can afford: item slots are added in decreasing price order, each
/// kept when an augmenting path exists (slots form a transversal matroid).
fn matched_revenue(prices: &[Option<&Money>], values: &[Vec<Money>], caps: &[u32]) -> Money {
    let m = prices.len();
    let mut order: Vec<usize> = (0..m).filter(|&e| prices[e].is_some()).collect();
    order.sort_by(|&a, &b| prices[b].cmp(&prices[a]).then(a.cmp(&b)));
    let can = |j: usize, e: usize| prices[e].is_some_and(|p| p <= &values[j][e]);
    let mut owner: Vec<Option<usize>> = vec![None; values.len()];
    let mut revenue = Money::zero();
    for e in order {
        for _ in 0..caps[e] {
            let mut seen = vec![false; values.len()];
            if augment(e, &can, &mut owner, &mut seen) {
                revenue += prices[e].unwrap();
            } else {
                break;
            }
        }
    }
    revenue
}

/// Finds a customer for one more slot of item `e`. Every slot added so far
/// is matched, so a customer moved off item `f` must be replaced there.
fn augment(e: usize, can: &dyn Fn(usize, usize) -> bool, owner: &mut [Option<usize>], seen: &mut [bool]) -> bool {
    for j in 0..owner.len() {
        if seen[j] || !can(j, e) || owner[j] == Some(e) {
            continue;
        }
        seen[j] = true;
        let moved = match owner[j] {
            None => true,
            Some(f) => augment(f, can, owner, seen),
        };
        if moved {
            owner[j] = Some(e);
            return true;
        }
    }
    false
}
