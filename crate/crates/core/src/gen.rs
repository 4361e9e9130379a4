//! Seeded instance generators.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{Instance, InstanceKind, Interval, ItemSet, TreeShape, Valuation};
use crate::num::{money, ratio, Money};

/// One item with capacity `n`; customer `j` (1-based) values it at `1/j`.
pub fn gen_gap(n: usize) -> Instance {
    let customers = (1..=n).map(|j| Valuation::Explicit(vec![(ItemSet::singleton(0), ratio(1, j as i64))])).collect();
    Instance::new(1, vec![n.max(1) as u32], customers, InstanceKind::General).expect("gap instance is valid")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueDist {
    /// Integers drawn uniformly from `lo..=hi`.
    Uniform { lo: u32, hi: u32 },
    /// `1/k` with `k` uniform in `1..=hi`.
    Harmonic { hi: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CapDist {
    Fixed(u32),
    Uniform { lo: u32, hi: u32 },
}

/// Valuation encoding for general instances.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Encoding {
    Explicit,
    /// Weighted coverage tables, subadditive by construction.
    Coverage,
    UnitDemand,
    /// A random choice among the three above per customer.
    Mixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenKind {
    General { encoding: Encoding },
    Tree,
    /// `subadditive` draws budget-additive values on every subinterval of a
    /// window; otherwise arbitrary listed intervals.
    Highway { subadditive: bool },
    Products,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenSpec {
    pub kind: GenKind,
    pub m: usize,
    pub n: usize,
    pub sets_per_customer: usize,
    pub values: ValueDist,
    pub caps: CapDist,
}

fn draw_value<R: Rng>(d: ValueDist, rng: &mut R) -> Money {
    match d {
        ValueDist::Uniform { lo, hi } => money(rng.gen_range(lo..=hi.max(lo)) as i64),
        ValueDist::Harmonic { hi } => ratio(1, rng.gen_range(1..=hi.max(1)) as i64),
    }
}

fn random_set<R: Rng>(m: usize, rng: &mut R) -> ItemSet {
    loop {
        let s = ItemSet(rng.gen_range(1u64..(1u64 << m)));
        if !s.is_empty() {
            return s;
        }
    }
}

fn coverage<R: Rng>(m: usize, d: ValueDist, rng: &mut R) -> Valuation {
    let ground = rng.gen_range(2..=4usize);
    let weights: Vec<Money> = (0..ground).map(|_| draw_value(d, rng)).collect();
    let covers: Vec<u32> = (0..m).map(|_| rng.gen_range(0..(1u32 << ground))).collect();
    let values = (0..1usize << m)
        .map(|mask| {
            let covered = (0..m).filter(|e| mask >> e & 1 == 1).fold(0u32, |a, e| a | covers[e]);
            (0..ground).filter(|g| covered >> g & 1 == 1).fold(money(0), |a, g| a + &weights[g])
        })
        .collect();
    Valuation::Table { values, subadditive: true }
}

fn explicit<R: Rng>(m: usize, k: usize, d: ValueDist, rng: &mut R) -> Valuation {
    Valuation::Explicit((0..k.max(1)).map(|_| (random_set(m, rng), draw_value(d, rng))).collect())
}

fn unit_demand<R: Rng>(m: usize, k: usize, d: ValueDist, rng: &mut R) -> Valuation {
    let mut items: Vec<usize> = (0..m).collect();
    items.shuffle(rng);
    let mut values = vec![money(0); m];
    for &e in items.iter().take(k.clamp(1, m)) {
        values[e] = draw_value(d, rng);
    }
    Valuation::UnitDemand(values)
}

fn random_interval<R: Rng>(m: usize, rng: &mut R) -> Interval {
    let a = rng.gen_range(0..m);
    let b = rng.gen_range(0..m);
    Interval::new(a.min(b), a.max(b))
}

/// `v(T) = min(cap, Σ_{e ∈ T ∩ W} w_e)` listed on every subinterval of a
/// random window `W`.
fn budget_additive_window<R: Rng>(m: usize, d: ValueDist, rng: &mut R) -> Valuation {
    let w = random_interval(m, rng);
    let weights: Vec<Money> = (0..m).map(|_| draw_value(d, rng)).collect();
    let total = (w.lo..=w.hi).fold(money(0), |a, e| a + &weights[e]);
    let cap = draw_value(d, rng) + draw_value(d, rng);
    let cap = if cap < total { cap } else { total };
    let mut list = Vec::new();
    for lo in w.lo..=w.hi {
        for hi in lo..=w.hi {
            let sum = (lo..=hi).fold(money(0), |a, e| a + &weights[e]);
            list.push((Interval::new(lo, hi), if sum < cap { sum } else { cap.clone() }));
        }
    }
    Valuation::Interval(list)
}

fn random_tree<R: Rng>(m: usize, rng: &mut R) -> TreeShape {
    let edges = (1..=m).map(|v| (rng.gen_range(0..v), v)).collect();
    TreeShape::new(edges, 0).expect("parent pointers form a tree")
}

/// Seeded random instance; identical `(spec, seed)` gives an identical instance.
pub fn gen_random(spec: &GenSpec, seed: u64) -> Result<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (m, n, k, d) = (spec.m, spec.n, spec.sets_per_customer, spec.values);
    let caps: Vec<u32> = (0..m)
        .map(|_| match spec.caps {
            CapDist::Fixed(c) => c,
            CapDist::Uniform { lo, hi } => rng.gen_range(lo..=hi.max(lo)),
        })
        .map(|c| c.clamp(1, n.max(1) as u32))
        .collect();
    let (kind, customers) = match spec.kind {
        GenKind::General { encoding } => {
            let customers = (0..n)
                .map(|_| {
                    let enc = match encoding {
                        Encoding::Mixed => [Encoding::Explicit, Encoding::Coverage, Encoding::UnitDemand][rng.gen_range(0..3)],
                        e => e,
                    };
                    match enc {
                        Encoding::Coverage => coverage(m, d, &mut rng),
                        Encoding::UnitDemand => unit_demand(m, k, d, &mut rng),
                        _ => explicit(m, k, d, &mut rng),
                    }
                })
                .collect();
            (InstanceKind::General, customers)
        }
        GenKind::Tree => {
            let tree = random_tree(m, &mut rng);
            let customers = (0..n)
                .map(|_| {
                    let list = (0..k.max(1))
                        .map(|_| {
                            let a = rng.gen_range(0..=m);
                            let mut b = rng.gen_range(0..m);
                            if b >= a {
                                b += 1;
                            }
                            (tree.path_between(a, b), draw_value(d, &mut rng))
                        })
                        .collect();
                    Valuation::Explicit(list)
                })
                .collect();
            (InstanceKind::Tree(tree), customers)
        }
        GenKind::Highway { subadditive } => {
            let customers = (0..n)
                .map(|_| {
                    if subadditive {
                        budget_additive_window(m, d, &mut rng)
                    } else {
                        Valuation::Interval((0..k.max(1)).map(|_| (random_interval(m, &mut rng), draw_value(d, &mut rng))).collect())
                    }
                })
                .collect();
            (InstanceKind::Highway, customers)
        }
        GenKind::Products => (InstanceKind::Products, (0..n).map(|_| unit_demand(m, k, d, &mut rng)).collect()),
    };
    Instance::new(m, caps, customers, kind)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::instance_to_json;
    use crate::model::check_subadditive;

    fn spec(kind: GenKind) -> GenSpec {
        GenSpec { kind, m: 4, n: 5, sets_per_customer: 3, values: ValueDist::Uniform { lo: 1, hi: 9 }, caps: CapDist::Uniform { lo: 1, hi: 9 } }
    }

    #[test]
    fn fixed_seed_is_byte_identical() {
        for kind in [
            GenKind::General { encoding: Encoding::Mixed },
            GenKind::Tree,
            GenKind::Highway { subadditive: true },
            GenKind::Products,
        ] {
            let a = instance_to_json(&gen_random(&spec(kind), 7).unwrap());
            let b = instance_to_json(&gen_random(&spec(kind), 7).unwrap());
            assert_eq!(a, b);
        }
    }

    #[test]
    fn capacities_within_customer_count() {
        let inst = gen_random(&spec(GenKind::Products), 3).unwrap();
        assert!(inst.capacities.iter().all(|&c| (1..=5).contains(&c)));
    }

    #[test]
    fn subadditive_generators() {
        for seed in 0..20 {
            let inst = gen_random(&spec(GenKind::General { encoding: Encoding::Coverage }), seed).unwrap();
            assert!(inst.customers.iter().all(|v| check_subadditive(v, inst.m).unwrap()));
            let inst = gen_random(&spec(GenKind::Highway { subadditive: true }), seed).unwrap();
            assert!(inst.customers.iter().all(|v| check_subadditive(v, inst.m).unwrap()));
        }
    }

    #[test]
    fn gap_shape() {
        let inst = gen_gap(4);
        assert_eq!(inst.capacities, vec![4]);
        assert_eq!(inst.customers[3].value(ItemSet::singleton(0)), ratio(1, 4));
    }
}
