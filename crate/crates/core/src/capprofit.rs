//! The capacity-schedule algorithm: a geometric capacity schedule, the lexicographically
//! maximal dual with the best capacity score, rounding of the matching
//! primal, and the better of that and unit-capacity welfare pricing.

use std::cmp::Ordering;

use num_traits::{One, Signed, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decomp::{decompose, ConvexDecomposition, ExactVerifier, GapVerifier};
use crate::error::{PricingError, Result};
use crate::lpkit::{solve_dual_lexi, CapacityVector, DualSolution, FractionalAssignment, SwmLpSolution};
use crate::model::{
    check_subadditive, evaluate_with, Allocation, EvalOptions, Instance, InstanceKind, ItemSet, PriceVector,
    PricedOutcome,
};
use crate::num::{harmonic, le_tol, Money, Numeric};
use crate::seeding::trial_rng;
use crate::swm::{swm_unit_pricing, ExactSwm, SwmSolver};
use crate::treeprice::{sample_paths, tree_round};

/// Capacity vectors `k^1 = 1, …, k^ℓ = c` with
/// `k^j_e = min(⌈(1+ε) k^{j−1}_e⌉, c_e)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CapacitySchedule {
    pub epsilon: Money,
    pub ks: Vec<CapacityVector>,
}

pub fn capacity_schedule(c: &[u32], epsilon: &Money) -> Result<CapacitySchedule> {
    if !epsilon.is_positive() {
        return Err(PricingError::InvalidInstance("growth parameter must be positive".into()));
    }
    if c.contains(&0) {
        return Err(PricingError::InvalidInstance("capacities must be positive".into()));
    }
    let grow = Money::one() + epsilon;
    let mut k = vec![1u32; c.len()];
    let mut ks = vec![CapacityVector(k.clone())];
    while k.as_slice() != c {
        for (ke, &ce) in k.iter_mut().zip(c) {
            let next = (&grow * Money::from_integer((*ke).into())).ceil().to_integer();
            let next = u32::try_from(next).unwrap_or(u32::MAX);
            *ke = next.min(ce);
        }
        ks.push(CapacityVector(k.clone()));
    }
    Ok(CapacitySchedule { epsilon: epsilon.clone(), ks })
}

impl CapacitySchedule {
    pub fn len(&self) -> usize {
        self.ks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ks.is_empty()
    }

    /// For `e*` of maximum capacity and every step `d = k^j − k^{j−1}`:
    /// `d_{e*}/k^j_{e*}` and `d_{e*}/k^{j−1}_{e*}` are the maxima of the
    /// same ratios over all items.
    pub fn ratio_maximality(&self, c: &[u32]) -> bool {
        let Some(star) = (0..c.len()).max_by_key(|&e| (c[e], std::cmp::Reverse(e))) else { return true };
        let frac = |a: u32, b: u32| Money::new(a.into(), b.into());
        self.ks.windows(2).all(|w| {
            let (prev, cur) = (&w[0].0, &w[1].0);
            let d: Vec<u32> = cur.iter().zip(prev).map(|(a, b)| a - b).collect();
            let best_cur = (0..c.len()).map(|e| frac(d[e], cur[e])).max().unwrap();
            let best_prev = (0..c.len()).map(|e| frac(d[e], prev[e])).max().unwrap();
            frac(d[star], cur[star]) == best_cur && frac(d[star], prev[star]) == best_prev
        })
    }
}

/// LP solutions for one schedule entry.
#[derive(Clone, Debug)]
pub struct ScheduleEntry {
    pub k: CapacityVector,
    /// Column-generated optimal primal/dual pair.
    pub lp: SwmLpSolution,
    /// Optimal dual maximizing `k·y`.
    pub lexi: DualSolution,
    /// `Σ_e k_e y_e` of `lexi`.
    pub score: Money,
}

/// Every schedule entry plus the index of the one with the largest score
/// (earliest on ties).
#[derive(Clone, Debug)]
pub struct SelectedDual {
    pub index: usize,
    pub entries: Vec<ScheduleEntry>,
}

impl SelectedDual {
    pub fn entry(&self) -> &ScheduleEntry {
        &self.entries[self.index]
    }
    pub fn u(&self) -> &CapacityVector {
        &self.entry().k
    }
    pub fn y(&self) -> PriceVector {
        self.entry().lexi.prices()
    }
    pub fn score(&self) -> &Money {
        &self.entry().score
    }
    pub fn x(&self) -> &FractionalAssignment {
        &self.entry().lp.primal
    }
    /// `OPT(1)`.
    pub fn opt_unit(&self) -> &Money {
        &self.entries[0].lp.opt
    }
    /// `OPT(c)`.
    pub fn opt_full(&self) -> &Money {
        &self.entries.last().expect("schedules are nonempty").lp.opt
    }
}

/// Solves the lexicographic dual at every schedule entry (in parallel) and
/// picks the entry maximizing `Σ_e k_e y^(k)_e`.
pub fn select_u(inst: &Instance, schedule: &CapacitySchedule, numeric: Numeric) -> Result<SelectedDual> {
    let entries: Vec<ScheduleEntry> = schedule
        .ks
        .par_iter()
        .map(|k| {
            let (lp, lexi) = solve_dual_lexi(inst, k, numeric)?;
            let score = k.dot(&lexi.y);
            Ok(ScheduleEntry { k: k.clone(), lp, lexi, score })
        })
        .collect::<Result<_>>()?;
    let mut index = 0;
    for (i, e) in entries.iter().enumerate() {
        if e.score > entries[index].score {
            index = i;
        }
    }
    Ok(SelectedDual { index, entries })
}

/// `(OPT(c) − OPT(1)) / (2(1+ε) H_{c_max})`.
pub fn score_lower_bound(opt_full: &Money, opt_unit: &Money, epsilon: &Money, c_max: u32) -> Money {
    (opt_full - opt_unit) / (Money::from_integer(2.into()) * (Money::one() + epsilon) * harmonic(c_max))
}

/// `OPT(c) / (4 α (1+ε) H_{c_max})`.
pub fn profit_lower_bound(opt_full: &Money, epsilon: &Money, c_max: u32, alpha: &Money) -> Money {
    opt_full / (Money::from_integer(4.into()) * alpha * (Money::one() + epsilon) * harmonic(c_max))
}

/// One subadditive rounding run.
#[derive(Clone, Debug, PartialEq)]
pub struct SubadditiveRound {
    /// Set drawn for each customer before cleanup.
    pub sampled: Vec<ItemSet>,
    pub allocation: Allocation,
    /// Customers whose trimmed set was replaced by an affordable candidate.
    pub repaired: Vec<usize>,
}

/// Sample one set per customer with probability `x_{j,S}`, then for every
/// item taken by more than `u_e` customers keep it only for the `u_e` takers
/// whose sampled set has the largest price under `y` (lower index first).
///
/// A trimmed set that does not fit the instance's shape or is not affordable
/// under `y` is replaced by the most expensive affordable candidate inside it.
pub fn round_subadditive<R: Rng + ?Sized>(
    inst: &Instance,
    x: &FractionalAssignment,
    u: &CapacityVector,
    y: &PriceVector,
    tol: &Money,
    rng: &mut R,
) -> SubadditiveRound {
    let n = inst.n();
    let sampled = sample_paths(n, x, 1.0, rng);
    let mut kept = sampled.clone();
    let price: Vec<Money> = sampled.iter().map(|s| y.of(*s)).collect();
    for e in 0..inst.m {
        let mut takers: Vec<usize> = (0..n).filter(|&j| sampled[j].contains(e)).collect();
        if takers.len() <= u.0[e] as usize {
            continue;
        }
        takers.sort_by(|&a, &b| price[b].cmp(&price[a]).then(a.cmp(&b)));
        for &j in &takers[u.0[e] as usize..] {
            kept[j].remove(e);
        }
    }
    let mut repaired = Vec::new();
    for j in 0..n {
        let t = kept[j];
        if t.is_empty() || t == sampled[j] {
            continue;
        }
        let v = &inst.customers[j];
        if shape_ok(inst, t) && le_tol(&y.of(t), &v.value(t), tol) {
            continue;
        }
        repaired.push(j);
        kept[j] = v
            .candidates(inst.m)
            .into_iter()
            .filter(|c| c.is_subset(t) && le_tol(&y.of(*c), &v.value(*c), tol))
            .max_by(|a, b| y.of(*a).cmp(&y.of(*b)).then_with(|| b.tie_order(*a)))
            .unwrap_or(ItemSet::EMPTY);
    }
    SubadditiveRound { sampled, allocation: Allocation(kept), repaired }
}

fn shape_ok(inst: &Instance, s: ItemSet) -> bool {
    match &inst.kind {
        InstanceKind::Tree(t) => t.is_path(s),
        InstanceKind::Highway => s.is_interval(),
        _ => true,
    }
}

/// `Σ_j y(S_j)`.
pub fn profit_under(y: &PriceVector, a: &Allocation) -> Money {
    a.0.iter().fold(Money::zero(), |acc, s| acc + y.of(*s))
}

/// Decompose `x` against `verifier` and return the term of maximum profit
/// under `y` (earliest on ties) with the decomposition.
pub fn round_general(
    inst: &Instance,
    x: &FractionalAssignment,
    u: &CapacityVector,
    y: &PriceVector,
    verifier: &mut dyn GapVerifier,
    numeric: Numeric,
) -> Result<(Allocation, ConvexDecomposition)> {
    let d = decompose(x, inst, u, verifier, numeric)?;
    let mut best = 0;
    for (r, (_, a)) in d.terms.iter().enumerate() {
        if profit_under(y, a) > profit_under(y, &d.terms[best].1) {
            best = r;
        }
    }
    Ok((d.terms[best].1.clone(), d))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Subadditive,
    General,
}

impl std::str::FromStr for Mode {
    type Err = PricingError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "subadditive" => Ok(Mode::Subadditive),
            "general" => Ok(Mode::General),
            other => Err(PricingError::Parse(format!("unknown mode {other:?}"))),
        }
    }
}

/// How step three rounds `x^(u)`.
pub enum Rounding<'a> {
    Subadditive,
    General(&'a mut dyn GapVerifier),
    /// The tree rounding at the given scale, applied directly.
    TreeDirect { alpha: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Alg1Config {
    pub epsilon: Money,
    pub mode: Mode,
    pub trials: usize,
    pub seed: u64,
    pub numeric: Numeric,
}

impl Default for Alg1Config {
    fn default() -> Self {
        Alg1Config {
            epsilon: Money::new(1.into(), 4.into()),
            mode: Mode::Subadditive,
            trials: 64,
            seed: 0,
            numeric: Numeric::Exact,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Rounding,
    UnitPricing,
}

/// Result of the capacity-schedule algorithm with every quantity its guarantees are stated in.
#[derive(Clone, Debug)]
pub struct Alg1Report {
    pub outcome: PricedOutcome,
    pub branch: Branch,
    pub schedule: CapacitySchedule,
    pub selected: SelectedDual,
    pub ratio_maximality: bool,
    pub c_max: u32,
    /// Best profit of the rounding branch and the profit of every trial.
    pub rounding_profit: Money,
    pub trial_profits: Vec<Money>,
    pub unit_profit: Money,
    /// Scale of the convex decomposition, when one was built.
    pub decomposition: Option<ConvexDecomposition>,
    /// `(OPT(c) − OPT(1)) / (2(1+ε)H_{c_max})`.
    pub score_bound: Money,
    /// `OPT(c) / (4(1+ε)H_{c_max})`.
    pub profit_bound: Money,
    /// `max(1, score / rounding profit, OPT(1) / unit profit)`: the factor
    /// this run actually achieved in both branches.
    pub alpha_effective: Money,
}

impl Alg1Report {
    /// `OPT(c) / (4 α_eff (1+ε) H_{c_max})`.
    pub fn effective_bound(&self) -> Money {
        profit_lower_bound(self.selected.opt_full(), &self.schedule.epsilon, self.c_max, &self.alpha_effective)
    }
}

/// The capacity-schedule algorithm with the exact welfare solver and, in general mode, the
/// exact verifier.
pub fn run_algorithm1(inst: &Instance, cfg: &Alg1Config) -> Result<Alg1Report> {
    let swm = ExactSwm::default();
    match cfg.mode {
        Mode::Subadditive => run_algorithm1_with(inst, cfg, &swm, Rounding::Subadditive),
        Mode::General => run_algorithm1_with(inst, cfg, &swm, Rounding::General(&mut ExactVerifier::default())),
    }
}

fn ratio_or_one(num: &Money, den: &Money) -> Money {
    if den.is_positive() {
        (num / den).max(Money::one())
    } else {
        Money::one()
    }
}

pub fn run_algorithm1_with(
    inst: &Instance,
    cfg: &Alg1Config,
    swm: &dyn SwmSolver,
    rounding: Rounding<'_>,
) -> Result<Alg1Report> {
    if matches!(rounding, Rounding::Subadditive) {
        for (j, v) in inst.customers.iter().enumerate() {
            if let Ok(false) = check_subadditive(v, inst.m) {
                return Err(PricingError::ModeMismatch(format!("customer {j} is not subadditive")));
            }
        }
    }
    let tol = cfg.numeric.tolerance();
    let opts = EvalOptions { tolerance: tol.clone(), check_capacity: true };
    let schedule = capacity_schedule(&inst.capacities, &cfg.epsilon)?;
    let selected = select_u(inst, &schedule, cfg.numeric)?;
    let (u, x, y) = (selected.u().clone(), selected.x().clone(), selected.y());

    let mut decomposition = None;
    let mut candidates: Vec<Allocation> = Vec::new();
    match rounding {
        Rounding::Subadditive => {
            for t in 0..cfg.trials.max(1) {
                let mut rng = trial_rng(cfg.seed, t as u64);
                candidates.push(round_subadditive(inst, &x, &u, &y, &tol, &mut rng).allocation);
            }
        }
        Rounding::General(verifier) => {
            let (a, d) = round_general(inst, &x, &u, &y, verifier, cfg.numeric)?;
            candidates.push(a);
            decomposition = Some(d);
        }
        Rounding::TreeDirect { alpha } => {
            for t in 0..cfg.trials.max(1) {
                let mut rng = trial_rng(cfg.seed, t as u64);
                candidates.push(tree_round(inst, &x, alpha, &mut rng)?.allocation);
            }
        }
    }
    let trial_profits = candidates.iter().map(|a| evaluate_with(inst, &y, a, &opts)).collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (t, p) in trial_profits.iter().enumerate() {
        if *p > trial_profits[best] {
            best = t;
        }
    }
    let rounding_profit = trial_profits[best].clone();
    let rounded = PricedOutcome {
        prices: y.clone(),
        allocation: candidates.swap_remove(best),
        profit: rounding_profit.clone(),
        provenance: format!("rounding of x^(u), u = schedule entry {}", selected.index + 1),
    };
    let unit = swm_unit_pricing(inst, swm)?;
    let unit_profit = evaluate_with(inst, &unit.prices, &unit.allocation, &opts)?;
    let (outcome, branch) = match rounding_profit.cmp(&unit_profit) {
        Ordering::Less => (unit, Branch::UnitPricing),
        _ => (rounded, Branch::Rounding),
    };
    let c_max = inst.c_max();
    let alpha_effective = ratio_or_one(selected.score(), &rounding_profit)
        .max(ratio_or_one(selected.opt_unit(), &unit_profit));
    Ok(Alg1Report {
        ratio_maximality: schedule.ratio_maximality(&inst.capacities),
        score_bound: score_lower_bound(selected.opt_full(), selected.opt_unit(), &cfg.epsilon, c_max),
        profit_bound: profit_lower_bound(selected.opt_full(), &cfg.epsilon, c_max, &Money::one()),
        outcome,
        branch,
        schedule,
        selected,
        c_max,
        rounding_profit,
        trial_profits,
        unit_profit,
        decomposition,
        alpha_effective,
    })
}

/// Prices after the one-sided envy-freeness adjustment.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvyFreeAdjustment {
    pub prices: PriceVector,
    /// Customers whose raise could not be placed on a private item.
    pub no_private: Vec<usize>,
}

impl EnvyFreeAdjustment {
    /// The prices, or the first customer left unadjusted.
    pub fn strict(self) -> Result<PriceVector> {
        match self.no_private.first() {
            Some(&j) => Err(PricingError::NoPrivateItem(j)),
            None => Ok(self.prices),
        }
    }
}

/// Raises `y` so every served customer pays `max(y(S_j), (1−ε) v_j(S_j))`,
/// putting each raise on the lowest-index item of `S_j` that no other
/// customer holds.
pub fn epsilon_envyfree_adjust(
    inst: &Instance,
    alloc: &Allocation,
    y: &PriceVector,
    epsilon: &Money,
) -> EnvyFreeAdjustment {
    let load = alloc.load(inst.m);
    let mut prices = y.clone();
    let mut no_private = Vec::new();
    for (j, s) in alloc.0.iter().enumerate() {
        if s.is_empty() {
            continue;
        }
        let target = (Money::one() - epsilon) * inst.customers[j].value(*s);
        let raise = target - y.of(*s);
        if !raise.is_positive() {
            continue;
        }
        match s.iter().find(|&e| load[e] == 1) {
            Some(e) => prices.0[e] += raise,
            None => no_private.push(j),
        }
    }
    EnvyFreeAdjustment { prices, no_private }
}
