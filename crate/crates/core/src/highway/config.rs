//! The configuration LP over clique solutions, its rounding, and the map from
//! interval prices back to item prices.

use num_traits::{One, Signed, Zero};
use rand::Rng;

use super::trim::TrimMode;
use super::voucher::{surplus, voucher_dp, ChainProblem, CliqueSolution, PriceGrid};
use crate::error::{PricingError, Result};
use crate::lpkit::{Cmp, LinearProgram, Sense};
use crate::model::PriceVector;
use crate::num::{from_f64, to_f64, Money, Numeric};

const MAX_ROUNDS: usize = 10_000;

/// Column-generation result for one group of half-cliques.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigLpSolution {
    pub grid: PriceGrid,
    /// Generated columns per clique; column 0 is the empty solution.
    pub columns: Vec<Vec<CliqueSolution>>,
    /// `x[i][r]` for `columns[i][r]`.
    pub x: Vec<Vec<Money>>,
    /// `y[j][q]`: mass of customer `j` buying at level `q`.
    pub y: Vec<Vec<Money>>,
    pub objective: Money,
    /// Duals of the per-clique convexity rows.
    pub alpha: Vec<Money>,
    /// Duals of the per-customer rows.
    pub beta: Vec<Money>,
    /// Factor by which `(factor·α, β, γ̃)` is dual feasible: 1 when every
    /// separation was exact (all chains of length 1), else 2.
    pub certified_factor: Money,
    pub oracle_calls: usize,
}

impl ConfigLpSolution {
    /// `γ̃_{jq} = max(0, d_q − β_j)`.
    pub fn gamma_tilde(&self, j: usize, q: usize) -> Money {
        surplus(&self.grid.levels[q], &self.beta[j])
    }

    /// Left side of the dual constraint for column `r` of clique `i` under
    /// `γ̃`: `Σ_j γ̃_{j, p_j(R)}`.
    pub fn dual_load(&self, sol: &CliqueSolution) -> Money {
        sol.voucher_value(&self.grid, &self.beta)
    }

    /// Whether `(factor·α, β, γ̃)` satisfies the dual constraint of `sol` in
    /// clique `i`, up to `tol`.
    pub fn certifies(&self, i: usize, sol: &CliqueSolution, tol: &Money) -> bool {
        self.dual_load(sol) <= &self.certified_factor * &self.alpha[i] + tol
    }

    /// Dual objective of the scaled certificate: an upper bound on the
    /// configuration LP optimum.
    pub fn certified_bound(&self) -> Money {
        let a = self.alpha.iter().fold(Money::zero(), |s, a| s + a);
        let b = self.beta.iter().fold(Money::zero(), |s, b| s + b);
        &self.certified_factor * a + b
    }

    /// `Σ_{j,q} d_q·y_{jq}`.
    pub fn y_mass(&self) -> Money {
        self.y
            .iter()
            .flat_map(|row| row.iter().enumerate().map(|(q, v)| v * &self.grid.levels[q]))
            .fold(Money::zero(), |a, b| a + b)
    }
}

/// Restricted master over `columns` with the usual rows: convexity per
/// clique, at most one level per customer, and each `y_{jq}` covered by the
/// columns selling to `j` at level `q`.
pub fn solve_restricted_config(
    n: usize,
    grid: &PriceGrid,
    columns: &[Vec<CliqueSolution>],
    numeric: Numeric,
) -> Result<(Money, Vec<Vec<Money>>, Vec<Vec<Money>>, Vec<Money>, Vec<Money>)> {
    let levels = grid.len();
    let xcount: usize = columns.iter().map(Vec::len).sum();
    let yvar = |j: usize, q: usize| xcount + j * levels + q;
    let mut objective = vec![Money::zero(); xcount + n * levels];
    for j in 0..n {
        for q in 0..levels {
            objective[yvar(j, q)] = grid.levels[q].clone();
        }
    }
    let mut lp = LinearProgram::new(Sense::Maximize, objective);
    let mut offsets = Vec::with_capacity(columns.len());
    let mut at = 0;
    for cols in columns {
        offsets.push(at);
        lp.add((at..at + cols.len()).map(|v| (v, Money::one())).collect(), Cmp::Eq, Money::one());
        at += cols.len();
    }
    let beta_row = lp.constraints.len();
    for j in 0..n {
        lp.add((0..levels).map(|q| (yvar(j, q), Money::one())).collect(), Cmp::Le, Money::one());
    }
    for j in 0..n {
        for q in 0..levels {
            let mut terms = vec![(yvar(j, q), Money::one())];
            for (i, cols) in columns.iter().enumerate() {
                for (r, c) in cols.iter().enumerate() {
                    if c.paid_level(j) == Some(q) {
                        terms.push((offsets[i] + r, -Money::one()));
                    }
                }
            }
            lp.add(terms, Cmp::Le, Money::zero());
        }
    }
    let sol = lp.solve(numeric)?;
    let x = columns.iter().zip(&offsets).map(|(cols, &o)| sol.primal[o..o + cols.len()].to_vec()).collect();
    let y = (0..n).map(|j| (0..levels).map(|q| sol.primal[yvar(j, q)].clone()).collect()).collect();
    let alpha = sol.dual[..columns.len()].to_vec();
    let beta = sol.dual[beta_row..beta_row + n].to_vec();
    Ok((sol.objective, x, y, alpha, beta))
}

/// Column generation with the voucher DP as pricing oracle.
///
/// A clique gets a new column whenever the DP finds a solution whose voucher
/// value under `γ̃` exceeds `α_i`. On exit no clique admits such a column,
/// so the DP's factor-2 guarantee makes `(2α, β, γ̃)` dual feasible and the
/// returned objective is at least half the LP optimum.
pub fn solve_config_lp(problems: &[ChainProblem], grid: &PriceGrid, numeric: Numeric) -> Result<ConfigLpSolution> {
    let n = problems.first().map_or(0, ChainProblem::n);
    let tol = match numeric {
        Numeric::Exact => Money::zero(),
        Numeric::Float => from_f64(1e-9),
    };
    let mut columns: Vec<Vec<CliqueSolution>> = problems.iter().map(|p| vec![CliqueSolution::empty(p.len(), n)]).collect();
    let mut calls = 0;
    for _ in 0..MAX_ROUNDS {
        let (objective, x, y, alpha, beta) = solve_restricted_config(n, grid, &columns, numeric)?;
        let mut added = false;
        for (i, p) in problems.iter().enumerate() {
            calls += 1;
            let found = voucher_dp(p, &beta, grid);
            if found.value > &alpha[i] + &tol {
                if columns[i].contains(&found.solution) {
                    if numeric == Numeric::Exact {
                        return Err(PricingError::NoProgress(format!("clique {i} regenerated an existing column")));
                    }
                    continue;
                }
                columns[i].push(found.solution);
                added = true;
            }
        }
        if !added {
            let exact_separation = problems.iter().all(|p| p.len() <= 1);
            let certified_factor = if exact_separation { Money::one() } else { Money::from_integer(2.into()) };
            return Ok(ConfigLpSolution {
                grid: grid.clone(),
                columns,
                x,
                y,
                objective,
                alpha,
                beta,
                certified_factor,
                oracle_calls: calls,
            });
        }
    }
    Err(PricingError::NoProgress(format!("no convergence after {MAX_ROUNDS} rounds")))
}

/// One rounding outcome: a column per clique and each customer's clique.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigRound {
    pub choices: Vec<usize>,
    /// `(clique, chain position)` per customer.
    pub assignment: Vec<Option<(usize, usize)>>,
    pub paid: Money,
}

/// Draws a column per clique from `x`, then keeps every customer only in
/// the clique where it pays most (ties to the lowest clique index).
pub fn round_config_once<R: Rng + ?Sized>(sol: &ConfigLpSolution, rng: &mut R) -> ConfigRound {
    let choices: Vec<usize> = sol
        .x
        .iter()
        .map(|xs| {
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            for (r, v) in xs.iter().enumerate() {
                acc += to_f64(v);
                if u < acc {
                    return r;
                }
            }
            xs.iter().rposition(|v| v.is_positive()).unwrap_or(0)
        })
        .collect();
    let n = sol.y.len();
    let mut assignment = vec![None; n];
    let mut paid = Money::zero();
    for (j, slot) in assignment.iter_mut().enumerate() {
        let mut best: Option<(usize, usize)> = None;
        let mut best_q = usize::MAX;
        for (i, &r) in choices.iter().enumerate() {
            let col = &sol.columns[i][r];
            if let Some(q) = col.paid_level(j) {
                if q < best_q {
                    best_q = q;
                    best = Some((i, col.assignment[j].unwrap()));
                }
            }
        }
        if best.is_some() {
            paid += &sol.grid.levels[best_q];
        }
        *slot = best;
    }
    ConfigRound { choices, assignment, paid }
}

/// Best of `trials` independent roundings, each drawn from `rng_for(t)`;
/// ties keep the earliest trial.
pub fn round_config<R: Rng, F: FnMut(u64) -> R>(sol: &ConfigLpSolution, trials: usize, mut rng_for: F) -> ConfigRound {
    let mut best: Option<ConfigRound> = None;
    for t in 0..trials.max(1) {
        let round = round_config_once(sol, &mut rng_for(t as u64));
        if best.as_ref().is_none_or(|b| round.paid > b.paid) {
            best = Some(round);
        }
    }
    best.unwrap()
}

/// Item prices realizing the chosen chain prices.
///
/// Within a chain `T_1 ⊋ … ⊋ T_ℓ` the difference `T_i ∖ T_{i+1}` carries
/// `p(T_i) − p(T_{i+1})` on its lowest edge and 0 elsewhere, so `p(T_i)` is
/// reproduced exactly. Items on no chain cost `off_chain`.
pub fn to_item_prices(
    m: usize,
    problems: &[ChainProblem],
    chosen: &[&CliqueSolution],
    grid: &PriceGrid,
    off_chain: &Money,
) -> Result<PriceVector> {
    let mut prices = vec![off_chain.clone(); m];
    for (p, sol) in problems.iter().zip(chosen) {
        let chain = &p.half.chain;
        let ps = sol.prices(grid);
        if let Some(r) = ps.windows(2).position(|w| w[0] < w[1]) {
            return Err(PricingError::MonotoneViolation(r + 1));
        }
        if let Some(outer) = chain.first() {
            for e in outer.set().iter() {
                prices[e] = Money::zero();
            }
        }
        for (r, t) in chain.iter().enumerate() {
            let inner = chain.get(r + 1).map_or(crate::model::ItemSet::EMPTY, |s| s.set());
            let next = ps.get(r + 1).cloned().unwrap_or_else(Money::zero);
            let diff = &ps[r] - next;
            if let Some(e) = t.set().difference(inner).min_item() {
                prices[e] = diff;
            }
        }
    }
    Ok(PriceVector(prices))
}

/// Item prices for a trimmed group under `mode`: unused items are free in
/// unlimited mode and unsellable otherwise.
pub fn group_item_prices(
    m: usize,
    problems: &[ChainProblem],
    chosen: &[&CliqueSolution],
    grid: &PriceGrid,
    mode: TrimMode,
    sentinel: &Money,
) -> Result<PriceVector> {
    let off = match mode {
        TrimMode::Unlimited => Money::zero(),
        TrimMode::Subadditive => sentinel.clone(),
    };
    to_item_prices(m, problems, chosen, grid, &off)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::highway::trim::{HalfClique, Side};
    use crate::model::Interval;
    use crate::num::{money, ratio};
    use crate::seeding::trial_rng;

    fn single(values: Vec<Money>, cap: u32) -> ChainProblem {
        let half = HalfClique::new(vec![Interval::new(0, 0)], TrimMode::Subadditive, Side::Left);
        ChainProblem { half, values: values.into_iter().map(|v| vec![v]).collect(), capacities: Some(vec![cap]) }
    }

    #[test]
    fn one_clique_one_customer() {
        let p = single(vec![money(5)], 1);
        let grid = PriceGrid::from_values([money(5)].iter());
        let sol = solve_config_lp(&[p], &grid, Numeric::Exact).unwrap();
        assert_eq!(sol.objective, money(5));
        assert_eq!(sol.certified_factor, money(1));
        assert_eq!(sol.certified_bound(), money(5));
    }

    #[test]
    fn gap_product_lp_is_one() {
        let values: Vec<Money> = (1..=4).map(|j| ratio(1, j)).collect();
        let grid = PriceGrid::from_values(values.iter());
        let sol = solve_config_lp(&[single(values, 4)], &grid, Numeric::Exact).unwrap();
        assert_eq!(sol.objective, money(1));
        let round = round_config(&sol, 8, |t| trial_rng(0, t));
        assert_eq!(round.paid, money(1));
    }

    #[test]
    fn float_matches_exact() {
        let values: Vec<Money> = vec![money(3), money(2), money(2), ratio(1, 2)];
        let grid = PriceGrid::from_values(values.iter());
        let p = single(values, 2);
        let a = solve_config_lp(std::slice::from_ref(&p), &grid, Numeric::Exact).unwrap();
        let b = solve_config_lp(&[p], &grid, Numeric::Float).unwrap();
        assert_eq!(a.objective, money(4));
        assert!((to_f64(&a.objective) - to_f64(&b.objective)).abs() < 1e-6);
    }

    #[test]
    fn two_cliques_same_customer() {
        // the customer pays 1 in either clique; x = 1/2 on each sale
        let grid = PriceGrid::from_values([money(1)].iter());
        let sale = CliqueSolution { levels: vec![Some(0)], assignment: vec![Some(0)] };
        let empty = CliqueSolution::empty(1, 1);
        let sol = ConfigLpSolution {
            grid: grid.clone(),
            columns: vec![vec![empty.clone(), sale.clone()], vec![empty, sale]],
            x: vec![vec![ratio(1, 2), ratio(1, 2)], vec![ratio(1, 2), ratio(1, 2)]],
            y: vec![vec![money(1)]],
            objective: money(1),
            alpha: vec![money(0), money(0)],
            beta: vec![money(1)],
            certified_factor: money(1),
            oracle_calls: 0,
        };
        let trials = 20_000;
        let mut total = 0.0;
        for t in 0..trials {
            total += to_f64(&round_config_once(&sol, &mut trial_rng(3, t)).paid);
        }
        let mean = total / trials as f64;
        assert!((mean - 0.75).abs() < 0.02, "mean {mean}");
        assert!(mean >= (1.0 - (-1f64).exp()) - 0.02);
    }

    #[test]
    fn telescoping_item_prices() {
        let half = HalfClique::new(
            vec![Interval::new(1, 3), Interval::new(2, 3), Interval::new(3, 3)],
            TrimMode::Unlimited,
            Side::Right,
        );
        let p = ChainProblem { half, values: vec![], capacities: None };
        let grid = PriceGrid::from_values([money(5), money(3)].iter());
        let sol = CliqueSolution { levels: vec![Some(0), Some(1), None], assignment: vec![] };
        let prices = to_item_prices(5, std::slice::from_ref(&p), &[&sol], &grid, &money(0)).unwrap();
        assert_eq!(prices.0, vec![money(0), money(2), money(3), money(0), money(0)]);
        for (t, want) in p.half.chain.iter().zip(sol.prices(&grid)) {
            assert_eq!(prices.of(t.set()), want);
        }
        let bad = CliqueSolution { levels: vec![Some(1), Some(0), None], assignment: vec![] };
        assert!(matches!(
            to_item_prices(5, &[p], &[&bad], &grid, &money(0)),
            Err(PricingError::MonotoneViolation(1))
        ));
    }
}
