//! Reducing a clique to a nested chain by dropping one side of its common edge.

use rand::Rng;

use super::cliques::Clique;
use crate::error::{PricingError, Result};
use crate::model::{check_subadditive, Instance, Interval, Valuation};

/// How intervals of a clique are mapped onto one side of the common edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrimMode {
    /// Cut each interval at the common edge; requires subadditive valuations.
    Subadditive,
    /// Extend each interval to the clique's far end; capacities are ignored.
    Unlimited,
}

impl std::str::FromStr for TrimMode {
    type Err = PricingError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "subadditive" => Ok(TrimMode::Subadditive),
            "unlimited" => Ok(TrimMode::Unlimited),
            other => Err(PricingError::Parse(format!("unknown highway mode {other:?}"))),
        }
    }
}

/// The side of the common edge that survives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

/// Strictly nested chain `chain[0] ⊋ chain[1] ⊋ …` sharing one endpoint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HalfClique {
    pub chain: Vec<Interval>,
    pub mode: TrimMode,
    pub side: Side,
}

impl HalfClique {
    pub fn new(mut chain: Vec<Interval>, mode: TrimMode, side: Side) -> Self {
        chain.sort_by_key(|t| (std::cmp::Reverse(t.len()), t.lo));
        chain.dedup();
        debug_assert!(chain.windows(2).all(|w| w[1].set().is_subset(w[0].set()) && w[0] != w[1]));
        HalfClique { chain, mode, side }
    }

    pub fn len(&self) -> usize {
        self.chain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chain.is_empty()
    }
}

/// Maps `clique` onto the kept `side`.
///
/// Subadditive: left keeps `S ∩ [left, edge]`, right keeps
/// `S ∩ [edge+1, right]` (intervals ending at `edge` vanish). Unlimited:
/// left keeps `S ∪ [edge+1, right]`, right keeps `S ∪ [left, edge]`.
pub fn trim_clique(clique: &Clique, mode: TrimMode, side: Side) -> HalfClique {
    let e = clique.edge;
    let chain = clique
        .intervals
        .iter()
        .filter_map(|s| match (mode, side) {
            (TrimMode::Subadditive, Side::Left) => Some(Interval::new(s.lo, e)),
            (TrimMode::Subadditive, Side::Right) => (s.hi > e).then(|| Interval::new(e + 1, s.hi)),
            (TrimMode::Unlimited, Side::Left) => Some(Interval::new(s.lo, clique.right)),
            (TrimMode::Unlimited, Side::Right) => Some(Interval::new(clique.left, s.hi)),
        })
        .collect();
    HalfClique::new(chain, mode, side)
}

/// Whether every customer of `inst` admits `mode`.
pub fn check_mode(inst: &Instance, mode: TrimMode) -> Result<()> {
    if mode == TrimMode::Unlimited {
        return Ok(());
    }
    for (j, v) in inst.customers.iter().enumerate() {
        let as_intervals = match v {
            Valuation::Explicit(list) => {
                let mut out = Vec::with_capacity(list.len());
                for (s, x) in list {
                    let t = s.as_interval().ok_or(PricingError::ModeMismatch(format!("customer {j} lists a non-interval")))?;
                    out.push((t, x.clone()));
                }
                Valuation::Interval(out)
            }
            other => other.clone(),
        };
        if !check_subadditive(&as_intervals, inst.m)? {
            return Err(PricingError::ModeMismatch(format!("customer {j} is not subadditive on intervals")));
        }
    }
    Ok(())
}

/// One fair coin per clique picks the kept side. Callers validate the
/// instance once with [`check_mode`].
pub fn trim<R: Rng + ?Sized>(group: &[Clique], mode: TrimMode, rng: &mut R) -> Vec<HalfClique> {
    group
        .iter()
        .map(|c| {
            let side = if rng.gen::<bool>() { Side::Left } else { Side::Right };
            trim_clique(c, mode, side)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clique(ivs: &[(usize, usize)]) -> Clique {
        let cs = super::super::cliques::interval_decompose(
            &ivs.iter().map(|&(a, b)| Interval::new(a, b)).collect::<Vec<_>>(),
        );
        assert_eq!(cs.groups.len(), 1);
        assert_eq!(cs.groups[0].len(), 1);
        cs.groups[0][0].clone()
    }

    #[test]
    fn subadditive_sides() {
        let c = clique(&[(1, 4), (2, 3), (2, 6)]);
        assert_eq!(c.edge, 2);
        let left = trim_clique(&c, TrimMode::Subadditive, Side::Left);
        assert_eq!(left.chain, vec![Interval::new(1, 2), Interval::new(2, 2)]);
        let right = trim_clique(&c, TrimMode::Subadditive, Side::Right);
        assert_eq!(right.chain, vec![Interval::new(3, 6), Interval::new(3, 4), Interval::new(3, 3)]);
    }

    #[test]
    fn unlimited_sides() {
        let c = clique(&[(1, 4), (2, 3), (2, 6)]);
        let left = trim_clique(&c, TrimMode::Unlimited, Side::Left);
        assert_eq!(left.chain, vec![Interval::new(1, 6), Interval::new(2, 6)]);
        let right = trim_clique(&c, TrimMode::Unlimited, Side::Right);
        assert_eq!(right.chain, vec![Interval::new(1, 6), Interval::new(1, 4), Interval::new(1, 3)]);
    }

    #[test]
    fn single_interval_chain() {
        let c = clique(&[(3, 3)]);
        for side in [Side::Left, Side::Right] {
            let h = trim_clique(&c, TrimMode::Unlimited, side);
            assert_eq!(h.chain, vec![Interval::new(3, 3)]);
        }
        assert_eq!(trim_clique(&c, TrimMode::Subadditive, Side::Left).len(), 1);
        assert!(trim_clique(&c, TrimMode::Subadditive, Side::Right).is_empty());
    }
}
