//! Convex decomposition of a scaled fractional assignment into integral
//! allocations, driven by an integrality-gap-verifying oracle.

use num_traits::{One, Signed, Zero};
use rand::Rng;

use crate::error::{PricingError, Result};
use crate::lpkit::{solve_restricted, CapacityVector, Cmp, FractionalAssignment, LinearProgram, Sense};
use crate::model::{Allocation, Instance, ItemSet};
use crate::num::{to_f64, Money, Numeric};
use crate::swm::{max_weight_allocation, DEFAULT_SWM_BUDGET};

/// One weighted column `(customer, set, weight)` offered to a verifier.
pub type WeightedColumn = (usize, ItemSet, Money);

/// An algorithm that, for any nonnegative column weights, returns an integral
/// allocation under `k` whose weight is within its declared factor of the
/// weighted LP optimum over the same columns.
pub trait GapVerifier {
    /// `α` with `returned weight >= LP / α`, or `None` when the verifier is
    /// exact and the check is vacuous.
    fn declared_factor(&self) -> Option<Money>;

    /// Must only assign sets drawn from `columns`.
    fn verify(&mut self, inst: &Instance, k: &CapacityVector, columns: &[WeightedColumn]) -> Result<Allocation>;
}

/// Exact weighted welfare maximization over the offered columns.
#[derive(Clone, Copy, Debug)]
pub struct ExactVerifier {
    pub budget: u128,
}

impl Default for ExactVerifier {
    fn default() -> Self {
        ExactVerifier { budget: DEFAULT_SWM_BUDGET }
    }
}

/// Groups columns into per-customer option lists.
pub fn options_by_customer(n: usize, columns: &[WeightedColumn]) -> Vec<Vec<(ItemSet, Money)>> {
    let mut options = vec![Vec::new(); n];
    for (j, s, w) in columns {
        options[*j].push((*s, w.clone()));
    }
    options
}

impl GapVerifier for ExactVerifier {
    fn declared_factor(&self) -> Option<Money> {
        None
    }

    fn verify(&mut self, inst: &Instance, k: &CapacityVector, columns: &[WeightedColumn]) -> Result<Allocation> {
        let options = options_by_customer(inst.n(), columns);
        let (choice, _) = max_weight_allocation(&k.0, &options, self.budget)?;
        Ok(Allocation(choice.iter().zip(&options).map(|(c, o)| c.map_or(ItemSet::EMPTY, |i| o[i].0)).collect()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvexDecomposition {
    /// `(λ_r, x̂^r)`, with `Σ λ_r = 1`.
    pub terms: Vec<(Money, Allocation)>,
    pub alpha_used: Money,
    /// Columns of the decomposed assignment with positive weight.
    pub support: Vec<WeightedColumn>,
    pub capacities: CapacityVector,
    /// Verifier calls made by column generation.
    pub oracle_calls: usize,
}

impl ConvexDecomposition {
    /// `Σ_r λ_r [x̂^r_j = S]`.
    pub fn coverage(&self, j: usize, s: ItemSet) -> Money {
        self.terms.iter().filter(|(_, a)| a.0[j] == s).fold(Money::zero(), |acc, (l, _)| acc + l)
    }

    /// Checks every structural invariant within `tol`: weights form a
    /// distribution, every term fits `k`, terms only use support columns, and
    /// coverage dominates `x / α_used`.
    pub fn check(&self, tol: &Money) -> Result<()> {
        let broken = |msg: String| Err(PricingError::VerifierContractBroken(msg));
        let total = self.terms.iter().fold(Money::zero(), |acc, (l, _)| acc + l);
        if (total - Money::one()).abs() > *tol || self.terms.iter().any(|(l, _)| l.is_negative()) {
            return broken("term weights are not a distribution".into());
        }
        for (r, (_, a)) in self.terms.iter().enumerate() {
            if !a.fits(&self.capacities.0) {
                return broken(format!("term {r} exceeds capacity"));
            }
            for (j, s) in a.0.iter().enumerate() {
                if !s.is_empty() && !self.support.iter().any(|(cj, cs, _)| *cj == j && cs == s) {
                    return broken(format!("term {r} gives customer {j} the unsupported set {s:?}"));
                }
            }
        }
        for (j, s, x) in &self.support {
            if self.coverage(*j, *s) + tol < x / &self.alpha_used {
                return broken(format!("column ({j}, {s:?}) is under-covered"));
            }
        }
        Ok(())
    }
}

const MAX_ROUNDS: usize = 10_000;

/// Writes `x / α_used` as a convex combination of integral allocations.
///
/// Solves `min Σ μ_r` subject to `Σ_r μ_r x̂^r ≥ x` by column generation,
/// starting from one single-column allocation per support column. Pricing
/// asks the verifier for an allocation maximizing the dual-weighted value
/// and adds it while that value exceeds one. Then `α_used = max(1, Σ μ)`,
/// `λ = μ / α_used`, and any missing mass goes to the empty allocation.
pub fn decompose(
    x: &FractionalAssignment,
    inst: &Instance,
    k: &CapacityVector,
    verifier: &mut dyn GapVerifier,
    numeric: Numeric,
) -> Result<ConvexDecomposition> {
    let n = inst.n();
    let support: Vec<WeightedColumn> = x.support().map(|c| (c.customer, c.set, c.weight.clone())).collect();
    let single = |j: usize, s: ItemSet| {
        let mut a = Allocation::empty(n);
        a.0[j] = s;
        a
    };
    let mut pool: Vec<Allocation> = support.iter().map(|(j, s, _)| single(*j, *s)).collect();
    let tol = match numeric {
        Numeric::Exact => Money::zero(),
        Numeric::Float => Money::new(1.into(), 1_000_000_000.into()),
    };
    let mut oracle_calls = 0;
    for _ in 0..MAX_ROUNDS {
        let covers = |a: &Allocation, c: &WeightedColumn| a.0[c.0] == c.1;
        let mut lp = LinearProgram::new(Sense::Minimize, vec![Money::one(); pool.len()]);
        for c in &support {
            let terms = pool.iter().enumerate().filter(|(_, a)| covers(a, c)).map(|(r, _)| (r, Money::one())).collect();
            lp.add(terms, Cmp::Ge, c.2.clone());
        }
        let sol = lp.solve(numeric)?;
        let w: Vec<WeightedColumn> =
            support.iter().zip(&sol.dual).map(|((j, s, _), d)| (*j, *s, d.clone().max(Money::zero()))).collect();
        oracle_calls += 1;
        let candidate = verifier.verify(inst, k, &w)?;
        check_verifier_answer(inst, k, &w, &candidate, verifier.declared_factor(), numeric)?;
        let value = weighted_value(&candidate, &w);
        if value > Money::one() + &tol && !pool.contains(&candidate) {
            pool.push(candidate);
            continue;
        }
        let mu_total = sol.objective.clone();
        let alpha_used = if mu_total > Money::one() { mu_total.clone() } else { Money::one() };
        let mut terms: Vec<(Money, Allocation)> = pool
            .into_iter()
            .zip(sol.primal)
            .filter(|(_, mu)| mu.is_positive())
            .map(|(a, mu)| (mu / &alpha_used, a))
            .collect();
        let used = terms.iter().fold(Money::zero(), |acc, (l, _)| acc + l);
        if used < Money::one() {
            terms.push((Money::one() - used, Allocation::empty(n)));
        }
        return Ok(ConvexDecomposition { terms, alpha_used, support, capacities: k.clone(), oracle_calls });
    }
    Err(PricingError::NoProgress(format!("decomposition did not converge in {MAX_ROUNDS} rounds")))
}

fn weighted_value(a: &Allocation, w: &[WeightedColumn]) -> Money {
    w.iter().filter(|(j, s, _)| a.0[*j] == *s).fold(Money::zero(), |acc, (_, _, v)| acc + v)
}

/// Rejects answers that leave the offered columns, violate `k`, or fall below
/// the verifier's declared factor.
fn check_verifier_answer(
    inst: &Instance,
    k: &CapacityVector,
    w: &[WeightedColumn],
    a: &Allocation,
    factor: Option<Money>,
    numeric: Numeric,
) -> Result<()> {
    if a.0.len() != inst.n() || !a.fits(&k.0) {
        return Err(PricingError::VerifierContractBroken("answer is not a feasible allocation".into()));
    }
    for (j, s) in a.0.iter().enumerate() {
        if !s.is_empty() && !w.iter().any(|(cj, cs, _)| *cj == j && cs == s) {
            return Err(PricingError::VerifierContractBroken(format!("customer {j} got the unoffered set {s:?}")));
        }
    }
    if let Some(alpha) = factor {
        let lp = solve_restricted(inst.n(), k, w, numeric)?;
        let got = weighted_value(a, w);
        if got * &alpha + numeric.tolerance() < lp.objective {
            let witness: Vec<String> =
                w.iter().map(|(j, s, v)| format!("({j},{s:?})={}", crate::num::format_money(v))).collect();
            return Err(PricingError::VerifierContractBroken(format!(
                "weighted value below LP/α on weights [{}]",
                witness.join(", ")
            )));
        }
    }
    Ok(())
}

/// Draws term `r` with probability `λ_r`.
pub fn sample<'a, R: Rng + ?Sized>(d: &'a ConvexDecomposition, rng: &mut R) -> &'a Allocation {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (l, a) in &d.terms {
        acc += to_f64(l);
        if u < acc {
            return a;
        }
    }
    &d.terms.last().expect("a decomposition has at least one term").1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lpkit::{solve_swm_lp, Column};
    use crate::model::{InstanceKind, Valuation};
    use crate::num::{money, ratio};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn set(items: &[usize]) -> ItemSet {
        items.iter().copied().collect()
    }

    fn gap(n: usize) -> Instance {
        let customers =
            (1..=n).map(|j| Valuation::Explicit(vec![(set(&[0]), ratio(1, j as i64))])).collect();
        Instance::new(1, vec![n as u32], customers, InstanceKind::General).unwrap()
    }

    #[test]
    fn integral_assignment_is_one_term() {
        let inst = gap(4);
        let k = CapacityVector(vec![2]);
        let lp = solve_swm_lp(&inst, &k, Numeric::Exact).unwrap();
        assert!(lp.primal.is_integral());
        let d = decompose(&lp.primal, &inst, &k, &mut ExactVerifier::default(), Numeric::Exact).unwrap();
        d.check(&money(0)).unwrap();
        assert_eq!(d.alpha_used, money(1));
        assert_eq!(d.terms.len(), 1);
        assert_eq!(d.terms[0].1 .0, vec![set(&[0]), set(&[0]), ItemSet::EMPTY, ItemSet::EMPTY]);
    }

    #[test]
    fn odd_cycle_needs_scaling() {
        // three customers pairwise competing for three unit items: x = 1/2 each
        let pairs = [[0, 1], [1, 2], [0, 2]];
        let customers = pairs.iter().map(|p| Valuation::Explicit(vec![(set(p), money(1))])).collect();
        let inst = Instance::new(3, vec![1, 1, 1], customers, InstanceKind::General).unwrap();
        let k = CapacityVector::ones(3);
        let x = FractionalAssignment {
            columns: pairs.iter().enumerate().map(|(j, p)| Column { customer: j, set: set(p), weight: ratio(1, 2) }).collect(),
            capacities: k.clone(),
        };
        let d = decompose(&x, &inst, &k, &mut ExactVerifier::default(), Numeric::Exact).unwrap();
        d.check(&money(0)).unwrap();
        assert_eq!(d.alpha_used, ratio(3, 2));
        for j in 0..3 {
            assert_eq!(d.coverage(j, set(&pairs[j])), ratio(1, 3));
        }
    }

    #[test]
    fn sampling_is_seeded_and_matches_weights() {
        let inst = gap(2);
        let k = CapacityVector(vec![1]);
        let x = FractionalAssignment {
            columns: vec![
                Column { customer: 0, set: set(&[0]), weight: ratio(1, 2) },
                Column { customer: 1, set: set(&[0]), weight: ratio(1, 2) },
            ],
            capacities: k.clone(),
        };
        let d = decompose(&x, &inst, &k, &mut ExactVerifier::default(), Numeric::Exact).unwrap();
        d.check(&money(0)).unwrap();
        let draws = 100_000;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let first = (0..draws).filter(|_| !sample(&d, &mut rng).0[0].is_empty()).count();
        let freq = first as f64 / draws as f64;
        assert!((freq - 0.5).abs() < 0.01, "{freq}");
        let a = sample(&d, &mut ChaCha8Rng::seed_from_u64(3)).clone();
        let b = sample(&d, &mut ChaCha8Rng::seed_from_u64(3)).clone();
        assert_eq!(a, b);
    }

    struct Lazy;

    impl GapVerifier for Lazy {
        fn declared_factor(&self) -> Option<Money> {
            Some(money(1))
        }
        fn verify(&mut self, inst: &Instance, _: &CapacityVector, _: &[WeightedColumn]) -> Result<Allocation> {
            Ok(Allocation::empty(inst.n()))
        }
    }

    #[test]
    fn broken_verifier_is_reported() {
        let inst = gap(2);
        let k = CapacityVector(vec![2]);
        let lp = solve_swm_lp(&inst, &k, Numeric::Exact).unwrap();
        let err = decompose(&lp.primal, &inst, &k, &mut Lazy, Numeric::Exact).unwrap_err();
        assert!(matches!(err, PricingError::VerifierContractBroken(_)));
    }
}
