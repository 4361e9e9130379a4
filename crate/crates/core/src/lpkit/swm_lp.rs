//! The welfare LP `(P_k)` and its dual `(D_k)`, solved by column generation
//! with the customers' demand oracles as the pricing step.

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{PricingError, Result};
use crate::lpkit::simplex::{Cmp, LinearProgram, LpSolution, Sense};
use crate::model::{demand, Instance, ItemSet, PriceVector};
use crate::num::{Money, Numeric};

/// Per-item capacities `k <= c` an LP is solved under.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct CapacityVector(pub Vec<u32>);

impl CapacityVector {
    pub fn ones(m: usize) -> Self {
        CapacityVector(vec![1; m])
    }

    pub fn of(inst: &Instance) -> Self {
        CapacityVector(inst.capacities.clone())
    }

    /// `Σ_e k_e y_e`.
    pub fn dot(&self, y: &[Money]) -> Money {
        self.0.iter().zip(y).fold(Money::zero(), |acc, (k, y)| acc + y * Money::from_integer((*k).into()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Column {
    pub customer: usize,
    pub set: ItemSet,
    pub weight: Money,
}

/// Sparse fractional solution `x_{j,S}` of `(P_k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FractionalAssignment {
    pub columns: Vec<Column>,
    pub capacities: CapacityVector,
}

impl FractionalAssignment {
    pub fn support(&self) -> impl Iterator<Item = &Column> {
        self.columns.iter().filter(|c| c.weight.is_positive())
    }

    /// Total weight on sets containing `e`.
    pub fn item_load(&self, e: usize) -> Money {
        self.columns.iter().filter(|c| c.set.contains(e)).fold(Money::zero(), |acc, c| acc + &c.weight)
    }

    pub fn customer_load(&self, j: usize) -> Money {
        self.columns.iter().filter(|c| c.customer == j).fold(Money::zero(), |acc, c| acc + &c.weight)
    }

    pub fn is_integral(&self) -> bool {
        self.columns.iter().all(|c| c.weight.is_zero() || c.weight == Money::from_integer(1.into()))
    }

    pub fn objective(&self, inst: &Instance) -> Money {
        self.columns
            .iter()
            .fold(Money::zero(), |acc, c| acc + &c.weight * inst.customers[c.customer].value(c.set))
    }

    /// Feasibility for `(P_k)` within `tol`.
    pub fn is_feasible(&self, inst: &Instance, tol: &Money) -> bool {
        let one = Money::from_integer(1.into());
        self.columns.iter().all(|c| !c.weight.is_negative())
            && (0..inst.n()).all(|j| self.customer_load(j) <= &one + tol)
            && (0..inst.m).all(|e| self.item_load(e) <= Money::from_integer(self.capacities.0[e].into()) + tol)
    }
}

/// Item duals `y_e` and customer duals `z_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualSolution {
    pub y: Vec<Money>,
    pub z: Vec<Money>,
}

impl DualSolution {
    pub fn objective(&self, k: &CapacityVector) -> Money {
        k.dot(&self.y) + self.z.iter().fold(Money::zero(), |acc, z| acc + z)
    }

    pub fn prices(&self) -> PriceVector {
        PriceVector(self.y.clone())
    }
}

#[derive(Clone, Debug)]
pub struct SwmLpSolution {
    pub primal: FractionalAssignment,
    pub dual: DualSolution,
    pub opt: Money,
    /// Every `(customer, set)` column the pricing loop generated.
    pub generated: Vec<(usize, ItemSet)>,
}

/// Solves `(P_k)` over a fixed column list with the given column values.
///
/// Rows: one assignment row per customer, then one capacity row per item.
pub fn solve_restricted(
    n: usize,
    k: &CapacityVector,
    columns: &[(usize, ItemSet, Money)],
    numeric: Numeric,
) -> Result<LpSolution> {
    let m = k.0.len();
    let mut lp = LinearProgram::new(Sense::Maximize, columns.iter().map(|c| c.2.clone()).collect());
    let one = Money::from_integer(1.into());
    for j in 0..n {
        let terms = columns.iter().enumerate().filter(|(_, c)| c.0 == j).map(|(i, _)| (i, one.clone())).collect();
        lp.add(terms, Cmp::Le, one.clone());
    }
    for e in 0..m {
        let terms =
            columns.iter().enumerate().filter(|(_, c)| c.1.contains(e)).map(|(i, _)| (i, one.clone())).collect();
        lp.add(terms, Cmp::Le, Money::from_integer(k.0[e].into()));
    }
    lp.solve(numeric)
}

fn internal_tolerance(numeric: Numeric) -> Money {
    match numeric {
        Numeric::Exact => Money::zero(),
        Numeric::Float => Money::new(1.into(), 1_000_000_000.into()),
    }
}

/// Optimal primal/dual pair of `(P_k)/(D_k)` over the full column universe.
///
/// Starts from the empty column set (the `∅` column is the slack of each
/// assignment row) and adds each customer's demand set under the current
/// item duals while its reduced cost `v_j(S) - y(S) - z_j` is positive.
pub fn solve_swm_lp(inst: &Instance, k: &CapacityVector, numeric: Numeric) -> Result<SwmLpSolution> {
    if k.0.len() != inst.m || k.0.contains(&0) {
        return Err(PricingError::InvalidInstance("capacity vector must be positive with one entry per item".into()));
    }
    let n = inst.n();
    let tol = internal_tolerance(numeric);
    let mut cols: Vec<(usize, ItemSet, Money)> = Vec::new();
    loop {
        let sol = solve_restricted(n, k, &cols, numeric)?;
        let dual = DualSolution { z: sol.dual[..n].to_vec(), y: sol.dual[n..].to_vec() };
        let prices = dual.prices();
        let mut added = false;
        for (j, v) in inst.customers.iter().enumerate() {
            let (s, utility) = demand(v, &prices, inst.m);
            if s.is_empty() || utility <= &dual.z[j] + &tol {
                continue;
            }
            if cols.iter().any(|c| c.0 == j && c.1 == s) {
                if numeric == Numeric::Exact {
                    return Err(PricingError::NumericFailure(format!(
                        "column ({j}, {s:?}) prices out twice"
                    )));
                }
                continue;
            }
            cols.push((j, s, v.value(s)));
            added = true;
        }
        if !added {
            let columns = cols
                .iter()
                .zip(&sol.primal)
                .map(|((j, s, _), w)| Column { customer: *j, set: *s, weight: w.clone() })
                .collect();
            return Ok(SwmLpSolution {
                primal: FractionalAssignment { columns, capacities: k.clone() },
                dual,
                opt: sol.objective,
                generated: cols.iter().map(|c| (c.0, c.1)).collect(),
            });
        }
    }
}

/// An optimal dual of `(D_k)` that maximizes `Σ_e k_e y_e` among all optimal
/// duals.
///
/// Second phase LP: maximize `k·y` subject to dual feasibility and
/// `k·y + Σ z <= OPT(k)`, with dual constraints generated lazily through the
/// demand oracles.
pub fn solve_dual_lexi(inst: &Instance, k: &CapacityVector, numeric: Numeric) -> Result<(SwmLpSolution, DualSolution)> {
    let first = solve_swm_lp(inst, k, numeric)?;
    let (m, n) = (inst.m, inst.n());
    let tol = internal_tolerance(numeric);
    let opt_bound = match numeric {
        Numeric::Exact => first.opt.clone(),
        Numeric::Float => &first.opt + &tol * (Money::from_integer(1.into()) + first.opt.abs()),
    };
    let mut rows: Vec<(usize, ItemSet)> = first.generated.clone();
    let kf: Vec<Money> = k.0.iter().map(|&x| Money::from_integer(x.into())).collect();
    loop {
        let mut objective = kf.clone();
        objective.extend(std::iter::repeat_n(Money::zero(), n));
        let mut lp = LinearProgram::new(Sense::Maximize, objective);
        let one = Money::from_integer(1.into());
        let mut budget: Vec<(usize, Money)> = kf.iter().cloned().enumerate().collect();
        budget.extend((0..n).map(|j| (m + j, one.clone())));
        lp.add(budget, Cmp::Le, opt_bound.clone());
        for &(j, s) in &rows {
            let mut terms: Vec<(usize, Money)> = s.iter().map(|e| (e, one.clone())).collect();
            terms.push((m + j, one.clone()));
            lp.add(terms, Cmp::Ge, inst.customers[j].value(s));
        }
        let sol = lp.solve(numeric)?;
        let dual = DualSolution { y: sol.primal[..m].to_vec(), z: sol.primal[m..].to_vec() };
        let prices = dual.prices();
        let mut added = false;
        for (j, v) in inst.customers.iter().enumerate() {
            let (s, utility) = demand(v, &prices, m);
            if !s.is_empty() && utility > &dual.z[j] + &tol && !rows.contains(&(j, s)) {
                rows.push((j, s));
                added = true;
            }
        }
        if !added {
            return Ok((first, dual));
        }
    }
}

/// Largest violation of each complementary-slackness property of an
/// optimal primal/dual pair (zero means the property holds exactly).
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CsReport {
    /// `x_{j,S} > 0 ⇒ y(S) <= v_j(S)`.
    #[serde(with = "crate::num::serde_money")]
    pub support_priced: Money,
    /// `x_{j,S} > 0 ⇒ y(T) <= v_j(T)` for all `T ⊆ S` (subadditive customers only).
    #[serde(with = "crate::num::serde_money")]
    pub subsets_priced: Money,
    /// `y_e > 0 ⇒ Σ_{j,S∋e} x_{j,S} = k_e`.
    #[serde(with = "crate::num::serde_money")]
    pub scarce_items_full: Money,
    /// `|primal objective - dual objective|`.
    #[serde(with = "crate::num::serde_money")]
    pub duality_gap: Money,
    /// Largest `v_j(S) - y(S) - z_j` over every demand-oracle answer.
    #[serde(with = "crate::num::serde_money")]
    pub separation: Money,
}

impl CsReport {
    pub fn max_violation(&self) -> Money {
        [&self.support_priced, &self.subsets_priced, &self.scarce_items_full, &self.duality_gap, &self.separation]
            .into_iter()
            .max()
            .cloned()
            .unwrap()
    }
}

/// Measures the complementary-slackness conditions of `(x, y, z)`.
///
/// `subadditive[j]` selects the customers the subset condition is checked
/// for.
pub fn complementary_slackness(
    inst: &Instance,
    x: &FractionalAssignment,
    dual: &DualSolution,
    subadditive: &[bool],
) -> CsReport {
    let mut rep = CsReport::default();
    let prices = dual.prices();
    let bump = |slot: &mut Money, v: Money| {
        if v > *slot {
            *slot = v;
        }
    };
    for c in x.support() {
        let v = &inst.customers[c.customer];
        bump(&mut rep.support_priced, prices.of(c.set) - v.value(c.set));
        if subadditive.get(c.customer).copied().unwrap_or(false) {
            // every nonempty subset of the column's set
            let bits = c.set.0;
            let mut sub = bits;
            while sub != 0 {
                let t = ItemSet(sub);
                bump(&mut rep.subsets_priced, prices.of(t) - v.value(t));
                sub = (sub - 1) & bits;
            }
        }
    }
    for e in 0..inst.m {
        if dual.y[e].is_positive() {
            let k = Money::from_integer(x.capacities.0[e].into());
            bump(&mut rep.scarce_items_full, (k - x.item_load(e)).abs());
        }
    }
    bump(&mut rep.duality_gap, (x.objective(inst) - dual.objective(&x.capacities)).abs());
    for (j, v) in inst.customers.iter().enumerate() {
        let (_, utility) = demand(v, &prices, inst.m);
        bump(&mut rep.separation, utility - &dual.z[j]);
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{InstanceKind, Valuation};
    use crate::num::{harmonic, money, ratio};

    fn set(items: &[usize]) -> ItemSet {
        items.iter().copied().collect()
    }

    fn gap(n: usize) -> Instance {
        let customers =
            (1..=n).map(|j| Valuation::Explicit(vec![(set(&[0]), ratio(1, j as i64))])).collect();
        Instance::new(1, vec![n as u32], customers, InstanceKind::General).unwrap()
    }

    #[test]
    fn gap_fixture_lp_is_harmonic() {
        let inst = gap(4);
        let sol = solve_swm_lp(&inst, &CapacityVector::of(&inst), Numeric::Exact).unwrap();
        assert_eq!(sol.opt, harmonic(4));
        assert_eq!(sol.opt, ratio(25, 12));
        let rep = complementary_slackness(&inst, &sol.primal, &sol.dual, &[false; 4]);
        assert_eq!(rep.max_violation(), money(0));
    }

    #[test]
    fn no_customers_means_zero() {
        let inst = Instance::new(2, vec![1, 1], vec![], InstanceKind::General).unwrap();
        let sol = solve_swm_lp(&inst, &CapacityVector::ones(2), Numeric::Exact).unwrap();
        assert_eq!(sol.opt, money(0));
    }

    #[test]
    fn lexi_dual_on_gap_fixture_unit_capacity() {
        let inst = gap(4);
        let (first, dual) = solve_dual_lexi(&inst, &CapacityVector::ones(1), Numeric::Exact).unwrap();
        assert_eq!(first.opt, money(1));
        assert_eq!(dual.y, vec![money(1)]);
        assert!(dual.z.iter().all(|z| z.is_zero()));
    }

    #[test]
    fn lexi_dual_follows_capacity() {
        // with k = 2 the optimal duals with maximal 2y have y = 1/2
        let inst = gap(4);
        let (_, dual) = solve_dual_lexi(&inst, &CapacityVector(vec![2]), Numeric::Exact).unwrap();
        assert_eq!(dual.y, vec![ratio(1, 2)]);
        assert_eq!(dual.objective(&CapacityVector(vec![2])), ratio(3, 2));
    }

    #[test]
    fn zero_value_customers_get_zero_duals() {
        let inst = Instance::new(
            2,
            vec![1, 1],
            vec![Valuation::Explicit(vec![(set(&[0, 1]), money(0))]); 2],
            InstanceKind::General,
        )
        .unwrap();
        let (first, dual) = solve_dual_lexi(&inst, &CapacityVector::ones(2), Numeric::Exact).unwrap();
        assert_eq!(first.opt, money(0));
        assert!(dual.y.iter().chain(&dual.z).all(|v| v.is_zero()));
    }

    #[test]
    fn float_mode_agrees_with_exact() {
        let inst = gap(4);
        let exact = solve_swm_lp(&inst, &CapacityVector(vec![3]), Numeric::Exact).unwrap();
        let float = solve_swm_lp(&inst, &CapacityVector(vec![3]), Numeric::Float).unwrap();
        assert!((crate::num::to_f64(&exact.opt) - crate::num::to_f64(&float.opt)).abs() < 1e-9);
    }
}
