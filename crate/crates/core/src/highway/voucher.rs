//! Pricing one half-clique against per-customer vouchers: the price grid, the
//! interval-packing subproblem, and the dynamic program over chain blocks.

use num_traits::{One, Signed, Zero};

use super::trim::HalfClique;
use crate::error::{PricingError, Result};
use crate::lpkit::{Cmp, LinearProgram, Sense};
use crate::model::Instance;
use crate::num::{money, Money, Numeric};

/// Strictly decreasing positive price levels; index `len()` stands for 0.
#[derive(Clone, Debug, PartialEq)]
pub struct PriceGrid {
    pub top: Money,
    pub levels: Vec<Money>,
}

impl PriceGrid {
    /// `d_q = top / 2^q` for every `q` with `d_q ≥ top / (m·n)`.
    pub fn geometric(top: &Money, m: usize, n: usize) -> Self {
        if !top.is_positive() {
            return PriceGrid { top: Money::zero(), levels: Vec::new() };
        }
        let floor = top / money((m * n).max(1) as i64);
        let mut levels = Vec::new();
        let mut d = top.clone();
        while d >= floor {
            levels.push(d.clone());
            d /= money(2);
        }
        PriceGrid { top: top.clone(), levels }
    }

    /// The distinct positive entries of `values`, largest first.
    pub fn from_values<'a>(values: impl IntoIterator<Item = &'a Money>) -> Self {
        let mut levels: Vec<Money> = values.into_iter().filter(|v| v.is_positive()).cloned().collect();
        levels.sort_by(|a, b| b.cmp(a));
        levels.dedup();
        PriceGrid { top: levels.first().cloned().unwrap_or_else(Money::zero), levels }
    }

    /// Number of positive levels.
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// `d_q`, with `d_len = 0`.
    pub fn price(&self, q: usize) -> Money {
        self.levels.get(q).cloned().unwrap_or_else(Money::zero)
    }

    /// Price of an optional level.
    pub fn price_of(&self, q: Option<usize>) -> Money {
        q.map_or_else(Money::zero, |q| self.price(q))
    }

    /// Highest level not above `p`.
    pub fn floor_level(&self, p: &Money) -> Option<usize> {
        self.levels.iter().position(|d| d <= p)
    }
}

/// `Σ_{q' ≥ q} max(d_{q'} − β, 0)`: what a customer could collect in the
/// relaxation by buying at every level from `q` down.
pub fn voucher_tail(grid: &PriceGrid, q: usize, beta: &Money) -> Money {
    (q..grid.len()).map(|r| surplus(&grid.levels[r], beta)).fold(Money::zero(), |a, b| a + b)
}

/// `max(p − β, 0)`.
pub fn surplus(p: &Money, beta: &Money) -> Money {
    let s = p - beta;
    if s.is_positive() {
        s
    } else {
        Money::zero()
    }
}

/// A half-clique with the customer data the DP reads.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainProblem {
    pub half: HalfClique,
    /// `values[j][i] = v_j(chain[i])`; nonincreasing in `i`.
    pub values: Vec<Vec<Money>>,
    /// Per-item capacities, or `None` when supply is unlimited.
    pub capacities: Option<Vec<u32>>,
}

impl ChainProblem {
    pub fn new(inst: &Instance, half: HalfClique, capacities: Option<&[u32]>) -> Self {
        let values =
            inst.customers.iter().map(|v| half.chain.iter().map(|t| v.value(t.set())).collect()).collect();
        ChainProblem { half, values, capacities: capacities.map(<[u32]>::to_vec) }
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn len(&self) -> usize {
        self.half.chain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.half.chain.is_empty()
    }

    /// Tightest capacity over the innermost interval; bounds the number of
    /// assignments on the chain.
    fn assignment_cap(&self) -> Option<u32> {
        let caps = self.capacities.as_ref()?;
        let inner = self.half.chain.last()?;
        Some(inner.set().iter().map(|e| caps[e]).min().unwrap_or(0))
    }
}

/// Monotone interval prices plus a budget- and capacity-feasible assignment
/// of customers to chain positions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CliqueSolution {
    /// Grid level per chain position; `None` is price 0.
    pub levels: Vec<Option<usize>>,
    /// Chain position per customer.
    pub assignment: Vec<Option<usize>>,
}

impl CliqueSolution {
    pub fn empty(len: usize, n: usize) -> Self {
        CliqueSolution { levels: vec![None; len], assignment: vec![None; n] }
    }

    pub fn prices(&self, grid: &PriceGrid) -> Vec<Money> {
        self.levels.iter().map(|q| grid.price_of(*q)).collect()
    }

    /// Level at which customer `j` buys, if it buys at a positive price.
    pub fn paid_level(&self, j: usize) -> Option<usize> {
        self.assignment[j].and_then(|i| self.levels[i])
    }

    pub fn paid(&self, j: usize, grid: &PriceGrid) -> Money {
        grid.price_of(self.paid_level(j))
    }

    /// `Σ_j max(p_j − β_j, 0)`.
    pub fn voucher_value(&self, grid: &PriceGrid, beta: &[Money]) -> Money {
        (0..self.assignment.len())
            .filter_map(|j| self.paid_level(j).map(|q| surplus(&grid.levels[q], &beta[j])))
            .fold(Money::zero(), |a, b| a + b)
    }

    /// Monotone prices, affordable assignments, capacities respected.
    pub fn is_feasible(&self, p: &ChainProblem, grid: &PriceGrid) -> bool {
        let key = |q: Option<usize>| q.unwrap_or(usize::MAX);
        if self.levels.len() != p.len() || self.assignment.len() != p.n() {
            return false;
        }
        if self.levels.windows(2).any(|w| key(w[0]) > key(w[1])) {
            return false;
        }
        let affordable =
            self.assignment.iter().enumerate().all(|(j, a)| a.is_none_or(|i| grid.price_of(self.levels[i]) <= p.values[j][i]));
        if !affordable {
            return false;
        }
        match &p.capacities {
            None => true,
            Some(caps) => {
                let mut load = vec![0u32; caps.len()];
                for i in self.assignment.iter().flatten() {
                    for e in p.half.chain[*i].set().iter() {
                        load[e] += 1;
                    }
                }
                load.iter().zip(caps).all(|(l, c)| l <= c)
            }
        }
    }
}

/// Customers eligible for the block `i..=k` at price `d`, each with the
/// deepest position it can afford there and its voucher surplus.
fn eligible(p: &ChainProblem, i: usize, k: usize, d: &Money, beta: &[Money]) -> Vec<(usize, usize, Money)> {
    (0..p.n())
        .filter(|&j| &p.values[j][i] >= d)
        .map(|j| {
            let deepest = (i..=k).rev().find(|&r| &p.values[j][r] >= d).unwrap();
            (j, deepest, surplus(d, &beta[j]))
        })
        .collect()
}

/// Bound on `#{chosen j : i_j ≤ r}` per block position `r`, from the
/// residual capacities `c_e − u` of the edges whose last block interval is `r`.
fn prefix_bounds(p: &ChainProblem, i: usize, k: usize, u: u32) -> Vec<Option<u32>> {
    let mut bounds = vec![None; k + 1 - i];
    let Some(caps) = &p.capacities else {
        return bounds;
    };
    for e in p.half.chain[i].set().iter() {
        let last = (i..=k).rev().find(|&r| p.half.chain[r].contains_edge(e)).unwrap();
        let room = caps[e].saturating_sub(u);
        let b = &mut bounds[last - i];
        *b = Some(b.map_or(room, |x: u32| x.min(room)));
    }
    bounds
}

/// Greedy picks for the block in weight order; the first `t` picks are an
/// optimal packing of size `t` (the prefix constraints form a laminar matroid).
fn pack_greedy(p: &ChainProblem, i: usize, k: usize, d: &Money, u: u32, beta: &[Money]) -> Vec<(usize, usize, Money)> {
    let mut cands = eligible(p, i, k, d, beta);
    cands.sort_by(|a, b| b.2.cmp(&a.2).then(b.1.cmp(&a.1)).then(a.0.cmp(&b.0)));
    let bounds = prefix_bounds(p, i, k, u);
    let mut count = vec![0u32; bounds.len()];
    let mut picks = Vec::new();
    for c in cands {
        let s = c.1 - i;
        let fits = (s..bounds.len()).all(|r| bounds[r].is_none_or(|b| count[r] < b));
        if fits {
            (s..bounds.len()).for_each(|r| count[r] += 1);
            picks.push(c);
        }
    }
    picks
}

/// Best packing of exactly `t` eligible customers into the block `i..=k` at
/// price `d` with `u` assignments already on the chain. `None` when no such
/// packing exists. Returns the value and `(customer, position)` pairs.
pub fn interval_pack(
    p: &ChainProblem,
    i: usize,
    k: usize,
    d: &Money,
    t: usize,
    u: u32,
    beta: &[Money],
) -> Option<(Money, Vec<(usize, usize)>)> {
    let picks = pack_greedy(p, i, k, d, u, beta);
    if picks.len() < t {
        return None;
    }
    let value = picks[..t].iter().fold(Money::zero(), |a, c| a + &c.2);
    Some((value, picks[..t].iter().map(|c| (c.0, c.1)).collect()))
}

/// `interval_pack` through its LP relaxation. The constraint matrix is an
/// interval matrix plus an all-ones row, so the optimum vertex is 0/1; a
/// fractional vertex is reported as a numeric failure.
pub fn interval_pack_lp(
    p: &ChainProblem,
    i: usize,
    k: usize,
    d: &Money,
    t: usize,
    u: u32,
    beta: &[Money],
    numeric: Numeric,
) -> Result<Option<(Money, Vec<(usize, usize)>)>> {
    let cands = eligible(p, i, k, d, beta);
    if t == 0 {
        return Ok(Some((Money::zero(), Vec::new())));
    }
    if cands.len() < t {
        return Ok(None);
    }
    let bounds = prefix_bounds(p, i, k, u);
    let mut lp = LinearProgram::new(Sense::Maximize, cands.iter().map(|c| c.2.clone()).collect());
    lp.add((0..cands.len()).map(|v| (v, Money::one())).collect(), Cmp::Eq, money(t as i64));
    for v in 0..cands.len() {
        lp.add(vec![(v, Money::one())], Cmp::Le, Money::one());
    }
    for (r, b) in bounds.iter().enumerate() {
        if let Some(b) = b {
            let terms = cands.iter().enumerate().filter(|(_, c)| c.1 - i <= r).map(|(v, _)| (v, Money::one())).collect();
            lp.add(terms, Cmp::Le, money(*b as i64));
        }
    }
    let sol = match lp.solve(numeric) {
        Ok(s) => s,
        Err(PricingError::Infeasible) => return Ok(None),
        Err(e) => return Err(e),
    };
    let tol = numeric.tolerance();
    let mut chosen = Vec::new();
    for (v, z) in sol.primal.iter().enumerate() {
        let near_one = (z - Money::one()).abs() <= tol;
        if near_one {
            chosen.push((cands[v].0, cands[v].1));
        } else if z.abs() > tol {
            return Err(PricingError::NumericFailure(format!("fractional packing vertex {z}")));
        }
    }
    Ok(Some((sol.objective, chosen)))
}

/// A solution of the relaxation: each customer may hold several intervals,
/// at pairwise distinct price levels.
#[derive(Clone, Debug, PartialEq)]
pub struct RelaxedSolution {
    pub levels: Vec<Option<usize>>,
    /// `(customer, position)` pairs.
    pub holdings: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VoucherResult {
    pub solution: CliqueSolution,
    pub value: Money,
    pub relaxed: RelaxedSolution,
    pub relaxed_value: Money,
}

#[derive(Clone, Copy, Debug)]
enum Step {
    Skip,
    Block { k: usize, t: usize },
}

/// Voucher pricing of one half-clique.
///
/// `F(q, i, U)` is the best relaxed value on positions `i..` using levels
/// `q..` with `U` assignments already placed on earlier (larger) intervals;
/// a step either skips level `q` or prices the block `i..=k` at `d_q` and
/// packs `t` customers into it. Keeping each customer's highest-priced
/// interval afterwards loses at most half of the relaxed value.
pub fn voucher_dp(p: &ChainProblem, beta: &[Money], grid: &PriceGrid) -> VoucherResult {
    let (len, levels, n) = (p.len(), grid.len(), p.n());
    let umax = p.assignment_cap().map_or(0, |c| (c as usize).min(n * levels)) as u32;
    let width = umax as usize + 1;
    let at = |q: usize, i: usize, u: u32| (q * (len + 1) + i) * width + u as usize;
    let mut f = vec![Money::zero(); (levels + 1) * (len + 1) * width];
    let mut step = vec![Step::Skip; f.len()];
    let limited = p.capacities.is_some();
    for q in (0..levels).rev() {
        let d = &grid.levels[q];
        for i in 0..len {
            for u in 0..=umax {
                let mut best = f[at(q + 1, i, u)].clone();
                let mut choice = Step::Skip;
                for k in i..len {
                    let picks = pack_greedy(p, i, k, d, u, beta);
                    let mut gain = Money::zero();
                    for t in 0..=picks.len() {
                        if t > 0 {
                            gain += &picks[t - 1].2;
                        }
                        let next_u = if limited { u + t as u32 } else { 0 };
                        if next_u > umax {
                            break;
                        }
                        let v = &gain + &f[at(q + 1, k + 1, next_u)];
                        if v > best {
                            best = v;
                            choice = Step::Block { k, t };
                        }
                    }
                }
                f[at(q, i, u)] = best;
                step[at(q, i, u)] = choice;
            }
        }
    }

    let mut relaxed = RelaxedSolution { levels: vec![None; len], holdings: Vec::new() };
    let mut held_level: Vec<Option<usize>> = vec![None; n];
    let mut solution = CliqueSolution::empty(len, n);
    let (mut q, mut i, mut u) = (0, 0, 0u32);
    while q < levels && i < len {
        match step[at(q, i, u)] {
            Step::Skip => {}
            Step::Block { k, t } => {
                let picks = pack_greedy(p, i, k, &grid.levels[q], u, beta);
                for r in i..=k {
                    relaxed.levels[r] = Some(q);
                }
                for &(j, r, _) in &picks[..t] {
                    relaxed.holdings.push((j, r));
                    // levels only increase along the walk, so the first holding is the priciest
                    if held_level[j].is_none() {
                        held_level[j] = Some(q);
                        solution.assignment[j] = Some(r);
                    }
                }
                i = k + 1;
                if limited {
                    u += t as u32;
                }
            }
        }
        q += 1;
    }
    solution.levels = relaxed.levels.clone();
    let value = solution.voucher_value(grid, beta);
    VoucherResult { solution, value, relaxed, relaxed_value: f[at(0, 0, 0)].clone() }
}
