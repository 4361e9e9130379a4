//! Profit maximization on a line: intervals are split into groups of
//! item-disjoint cliques, each clique is trimmed to a nested chain, a
//! configuration LP over chain pricings is solved with a voucher-pricing DP
//! as separation oracle, and the LP is rounded clique by clique.

pub mod cliques;
pub mod config;
pub mod trim;
pub mod voucher;

use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

pub use cliques::{group_bound, interval_decompose, Clique, CliqueSet};
pub use config::{
    group_item_prices, round_config, round_config_once, solve_config_lp, solve_restricted_config, to_item_prices,
    ConfigLpSolution, ConfigRound,
};
pub use trim::{check_mode, trim, trim_clique, HalfClique, Side, TrimMode};
pub use voucher::{
    interval_pack, interval_pack_lp, surplus, voucher_dp, voucher_tail, ChainProblem, CliqueSolution, PriceGrid,
    RelaxedSolution, VoucherResult,
};

use crate::error::{PricingError, Result};
use crate::model::{evaluate_with, Allocation, EvalOptions, Instance, InstanceKind, Interval, ItemSet, PriceVector, PricedOutcome};
use crate::num::{serde_money, Money, Numeric};
use crate::seeding::trial_rng;

#[derive(Clone, Copy, Debug)]
pub struct HighwayConfig {
    pub mode: TrimMode,
    pub trials: usize,
    pub seed: u64,
    pub numeric: Numeric,
}

impl Default for HighwayConfig {
    fn default() -> Self {
        HighwayConfig { mode: TrimMode::Subadditive, trials: 64, seed: 0, numeric: Numeric::Exact }
    }
}

/// Per-group stage values.
#[derive(Clone, Debug, Serialize)]
pub struct GroupReport {
    pub cliques: usize,
    #[serde(with = "serde_money")]
    pub lp_value: Money,
    /// Dual bound on the group's configuration LP optimum.
    #[serde(with = "serde_money")]
    pub lp_bound: Money,
    pub oracle_calls: usize,
    pub columns: usize,
    #[serde(with = "serde_money")]
    pub profit: Money,
}

#[derive(Clone, Debug, Serialize)]
pub struct HighwayReport {
    pub group_count: usize,
    pub groups: Vec<GroupReport>,
    pub best_group: Option<usize>,
    #[serde(with = "serde_money")]
    pub profit: Money,
    /// `16(1+1/m) · 2 · e/(e−1) · groups`: the product of every stage factor,
    /// against which the exact optimum can be compared.
    pub composite_factor: f64,
    #[serde(skip)]
    pub outcome: PricedOutcome,
}

/// Random stream for stage `t` of group `g`.
fn stream(g: usize, t: u64) -> u64 {
    ((g as u64) << 32) | t
}

fn listed_intervals(inst: &Instance) -> Vec<Interval> {
    let mut out: Vec<Interval> = inst
        .customers
        .iter()
        .flat_map(|v| {
            v.candidates(inst.m).into_iter().filter(|s| v.value(*s).is_positive()).filter_map(ItemSet::as_interval)
        })
        .collect();
    out.sort();
    out.dedup();
    out
}

struct GroupRun {
    report: GroupReport,
    outcome: PricedOutcome,
}

fn run_group(inst: &Instance, group: &[Clique], g: usize, grid: &PriceGrid, cfg: &HighwayConfig) -> Result<GroupRun> {
    let halves = trim(group, cfg.mode, &mut trial_rng(cfg.seed, stream(g, 0)));
    let caps = match cfg.mode {
        TrimMode::Subadditive => Some(inst.capacities.as_slice()),
        TrimMode::Unlimited => None,
    };
    let problems: Vec<ChainProblem> = halves.into_iter().map(|h| ChainProblem::new(inst, h, caps)).collect();
    let lp = solve_config_lp(&problems, grid, cfg.numeric)?;
    let round = round_config(&lp, cfg.trials, |t| trial_rng(cfg.seed, stream(g, t + 1)));
    let chosen: Vec<&CliqueSolution> = round.choices.iter().enumerate().map(|(i, &r)| &lp.columns[i][r]).collect();
    let prices = group_item_prices(inst.m, &problems, &chosen, grid, cfg.mode, &inst.unsellable_price())?;
    let allocation = Allocation(
        round.assignment.iter().map(|a| a.map_or(ItemSet::EMPTY, |(i, r)| problems[i].half.chain[r].set())).collect(),
    );
    let opts = EvalOptions { tolerance: Money::zero(), check_capacity: cfg.mode == TrimMode::Subadditive };
    let profit = evaluate_with(inst, &prices, &allocation, &opts)?;
    if profit != round.paid {
        return Err(PricingError::NumericFailure(format!("item prices collect {profit}, chains promised {}", round.paid)));
    }
    let report = GroupReport {
        cliques: group.len(),
        lp_value: lp.objective.clone(),
        lp_bound: lp.certified_bound(),
        oracle_calls: lp.oracle_calls,
        columns: lp.columns.iter().map(Vec::len).sum(),
        profit: profit.clone(),
    };
    let outcome = PricedOutcome { prices, allocation, profit, provenance: format!("highway group {g}") };
    Ok(GroupRun { report, outcome })
}

fn composite_factor(m: usize, groups: usize) -> f64 {
    let e = std::f64::consts::E;
    16.0 * (1.0 + 1.0 / m as f64) * 2.0 * (e / (e - 1.0)) * groups as f64
}

/// Runs every group of the clique decomposition and keeps the most
/// profitable one (ties to the lowest group index).
pub fn highway_run(inst: &Instance, cfg: &HighwayConfig) -> Result<HighwayReport> {
    if inst.kind != InstanceKind::Highway {
        return Err(PricingError::InvalidInstance(format!("highway pipeline needs a highway instance, got {}", inst.kind.name())));
    }
    check_mode(inst, cfg.mode)?;
    let intervals = listed_intervals(inst);
    let cliques = interval_decompose(&intervals);
    let top = inst.customers.iter().map(|v| v.max_value(inst.m)).max().unwrap_or_else(Money::zero);
    let grid = PriceGrid::geometric(&top, inst.m, inst.n());
    let runs: Vec<GroupRun> = cliques
        .groups
        .par_iter()
        .enumerate()
        .map(|(g, group)| run_group(inst, group, g, &grid, cfg))
        .collect::<Result<_>>()?;
    let mut best: Option<usize> = None;
    for (g, r) in runs.iter().enumerate() {
        if best.is_none_or(|b| r.outcome.profit > runs[b].outcome.profit) {
            best = Some(g);
        }
    }
    let outcome = match best {
        Some(b) => runs[b].outcome.clone(),
        None => PricedOutcome {
            prices: PriceVector(vec![inst.unsellable_price(); inst.m]),
            allocation: Allocation::empty(inst.n()),
            profit: Money::zero(),
            provenance: "highway: nothing to sell".into(),
        },
    };
    Ok(HighwayReport {
        group_count: cliques.group_count(),
        groups: runs.into_iter().map(|r| r.report).collect(),
        best_group: best,
        profit: outcome.profit.clone(),
        composite_factor: composite_factor(inst.m, cliques.group_count().max(1)),
        outcome,
    })
}

#[derive(Clone, Copy, Debug)]
pub struct MaxBuyConfig {
    pub trials: usize,
    pub seed: u64,
    pub numeric: Numeric,
}

impl Default for MaxBuyConfig {
    fn default() -> Self {
        MaxBuyConfig { trials: 64, seed: 0, numeric: Numeric::Exact }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MaxBuyReport {
    #[serde(with = "serde_money")]
    pub lp_value: Money,
    pub oracle_calls: usize,
    pub columns: usize,
    #[serde(with = "serde_money")]
    pub profit: Money,
    #[serde(skip)]
    pub outcome: PricedOutcome,
    #[serde(skip)]
    pub lp: ConfigLpSolution,
}

/// The problems and price levels of a products instance: one length-1 chain
/// per item, priced over the customers' distinct values.
pub fn product_problems(inst: &Instance) -> (Vec<ChainProblem>, PriceGrid) {
    let problems: Vec<ChainProblem> = (0..inst.m)
        .map(|e| {
            let half = HalfClique::new(vec![Interval::new(e, e)], TrimMode::Subadditive, Side::Left);
            ChainProblem::new(inst, half, Some(&inst.capacities))
        })
        .collect();
    let grid = PriceGrid::from_values(problems.iter().flat_map(|p| p.values.iter().flatten()));
    (problems, grid)
}

/// Multi-product pricing: every separation is an exact single-item voucher
/// problem, so the configuration LP is solved to optimality and only the
/// rounding loses a factor.
pub fn maxbuy_run(inst: &Instance, cfg: &MaxBuyConfig) -> Result<MaxBuyReport> {
    if inst.kind != InstanceKind::Products {
        return Err(PricingError::InvalidInstance(format!("max-buy needs a products instance, got {}", inst.kind.name())));
    }
    let (problems, grid) = product_problems(inst);
    let lp = solve_config_lp(&problems, &grid, cfg.numeric)?;
    let round = round_config(&lp, cfg.trials, |t| trial_rng(cfg.seed, t));
    let outcome = maxbuy_outcome(inst, &problems, &lp, &round)?;
    Ok(MaxBuyReport {
        lp_value: lp.objective.clone(),
        oracle_calls: lp.oracle_calls,
        columns: lp.columns.iter().map(Vec::len).sum(),
        profit: outcome.profit.clone(),
        outcome,
        lp,
    })
}

/// Item prices and allocation of one rounding of a products LP, checked by
/// `evaluate`.
pub fn maxbuy_outcome(
    inst: &Instance,
    problems: &[ChainProblem],
    lp: &ConfigLpSolution,
    round: &ConfigRound,
) -> Result<PricedOutcome> {
    let chosen: Vec<&CliqueSolution> = round.choices.iter().enumerate().map(|(i, &r)| &lp.columns[i][r]).collect();
    let prices = to_item_prices(inst.m, problems, &chosen, &lp.grid, &Money::zero())?;
    let allocation =
        Allocation(round.assignment.iter().map(|a| a.map_or(ItemSet::EMPTY, |(i, _)| ItemSet::singleton(i))).collect());
    let profit = evaluate_with(inst, &prices, &allocation, &EvalOptions::default())?;
    Ok(PricedOutcome { prices, allocation, profit, provenance: "max-buy configuration LP".into() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{evaluate, Valuation};
    use crate::num::{money, ratio};

    fn highway(m: usize, caps: Vec<u32>, customers: Vec<Vec<((usize, usize), Money)>>) -> Instance {
        let customers = customers
            .into_iter()
            .map(|l| Valuation::Interval(l.into_iter().map(|((a, b), v)| (Interval::new(a, b), v)).collect()))
            .collect();
        Instance::new(m, caps, customers, InstanceKind::Highway).unwrap()
    }

    #[test]
    fn single_customer_gets_charged_within_grid_factor() {
        let units = vec![((0, 0), money(3)), ((1, 1), money(3)), ((2, 2), money(3)), ((0, 2), money(6))];
        let inst = highway(3, vec![1, 1, 1], vec![units]);
        for mode in [TrimMode::Subadditive, TrimMode::Unlimited] {
            let cfg = HighwayConfig { mode, trials: 8, seed: 1, numeric: Numeric::Exact };
            let rep = highway_run(&inst, &cfg).unwrap();
            let opts = EvalOptions { tolerance: money(0), check_capacity: mode == TrimMode::Subadditive };
            assert_eq!(evaluate_with(&inst, &rep.outcome.prices, &rep.outcome.allocation, &opts).unwrap(), rep.profit);
            assert!(rep.profit <= money(6));
            assert!(rep.profit >= money(3) / (money(2) * (money(1) + ratio(1, 3))), "{mode:?}: {}", rep.profit);
        }
        let inst = highway(3, vec![1, 1, 1], vec![vec![((0, 2), money(6))]]);
        let cfg = HighwayConfig { mode: TrimMode::Unlimited, trials: 8, seed: 1, numeric: Numeric::Exact };
        let rep = highway_run(&inst, &cfg).unwrap();
        assert_eq!(rep.group_count, 1);
        // the extended chain keeps the whole interval
        assert_eq!(rep.profit, money(6));
    }

    #[test]
    fn non_subadditive_rejected() {
        // v([0,1]) = 5 exceeds v([0,0]) + v([1,1]) = 0
        let inst = highway(2, vec![1, 1], vec![vec![((0, 1), money(5))]]);
        let cfg = HighwayConfig { mode: TrimMode::Subadditive, ..HighwayConfig::default() };
        assert!(matches!(highway_run(&inst, &cfg), Err(PricingError::ModeMismatch(_))));
        let cfg = HighwayConfig { mode: TrimMode::Unlimited, ..HighwayConfig::default() };
        assert_eq!(highway_run(&inst, &cfg).unwrap().profit, money(5));
    }

    #[test]
    fn disjoint_units_match_products() {
        let vals = [[money(3), money(1)], [money(2), money(2)], [money(0), money(4)]];
        let hw = highway(
            3,
            vec![1, 2, 1],
            vals.iter().map(|r| vec![((0, 0), r[0].clone()), ((2, 2), r[1].clone())]).collect(),
        );
        let products = Instance::new(
            3,
            vec![1, 2, 1],
            vals.iter().map(|r| Valuation::UnitDemand(vec![r[0].clone(), money(0), r[1].clone()])).collect(),
            InstanceKind::Products,
        )
        .unwrap();
        let mb = maxbuy_run(&products, &MaxBuyConfig::default()).unwrap();
        assert_eq!(evaluate(&products, &mb.outcome.prices, &mb.outcome.allocation).unwrap(), mb.profit);
        assert_eq!(mb.profit, money(7));
        let cfg = HighwayConfig { mode: TrimMode::Subadditive, trials: 64, seed: 0, numeric: Numeric::Exact };
        let rep = highway_run(&hw, &cfg).unwrap();
        let factor = money(2) * (money(1) + ratio(1, 3));
        assert!(rep.profit.clone() * factor >= mb.profit, "{} vs {}", rep.profit, mb.profit);
    }

    #[test]
    fn gap_products() {
        let inst = Instance::new(
            1,
            vec![4],
            (1..=4).map(|j| Valuation::UnitDemand(vec![ratio(1, j)])).collect(),
            InstanceKind::Products,
        )
        .unwrap();
        let rep = maxbuy_run(&inst, &MaxBuyConfig::default()).unwrap();
        assert_eq!(rep.lp_value, money(1));
        assert_eq!(rep.profit, money(1));
    }
}
