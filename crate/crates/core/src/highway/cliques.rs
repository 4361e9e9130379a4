//! Splitting a family of intervals into few groups of item-disjoint cliques.

use crate::model::Interval;

/// Intervals sharing the common edge `edge`; `left..=right` is their union.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clique {
    pub intervals: Vec<Interval>,
    pub edge: usize,
    pub left: usize,
    pub right: usize,
}

impl Clique {
    fn from_intervals(mut intervals: Vec<Interval>) -> Self {
        intervals.sort();
        let edge = intervals.iter().map(|t| t.lo).max().expect("nonempty clique");
        let left = intervals.iter().map(|t| t.lo).min().unwrap();
        let right = intervals.iter().map(|t| t.hi).max().unwrap();
        debug_assert!(intervals.iter().all(|t| t.contains_edge(edge)));
        Clique { intervals, edge, left, right }
    }
}

/// Groups of cliques; cliques within one group share no item.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliqueSet {
    pub groups: Vec<Vec<Clique>>,
}

impl CliqueSet {
    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    /// Whether the groups partition `input` (as a set), each clique is
    /// stabbed by its edge, and cliques in a group are item-disjoint.
    pub fn is_valid_for(&self, input: &[Interval]) -> bool {
        let mut want: Vec<Interval> = input.to_vec();
        want.sort();
        want.dedup();
        let mut got: Vec<Interval> =
            self.groups.iter().flatten().flat_map(|c| c.intervals.iter().copied()).collect();
        got.sort();
        if got != want {
            return false;
        }
        self.groups.iter().all(|g| {
            let stabbed = g.iter().all(|c| c.intervals.iter().all(|t| t.contains_edge(c.edge)));
            let disjoint = g.iter().enumerate().all(|(a, ca)| {
                g.iter().skip(a + 1).all(|cb| ca.intervals.iter().all(|s| cb.intervals.iter().all(|t| s.set().intersection(t.set()).is_empty())))
            });
            stabbed && disjoint
        })
    }
}

/// `⌊log₂(k+1)⌋`.
pub fn group_bound(k: usize) -> usize {
    (usize::BITS - 1 - (k + 1).leading_zeros()) as usize
}

/// Overlap components of `group`, or `None` if some component has no
/// common edge.
fn components(group: &[Interval]) -> Option<Vec<Vec<Interval>>> {
    let mut sorted = group.to_vec();
    sorted.sort();
    let mut out: Vec<Vec<Interval>> = Vec::new();
    let mut reach = 0usize;
    for t in sorted {
        match out.last_mut() {
            Some(comp) if t.lo <= reach => {
                comp.push(t);
                reach = reach.max(t.hi);
            }
            _ => {
                reach = t.hi;
                out.push(vec![t]);
            }
        }
    }
    let stabbed = out.iter().all(|c| c.iter().map(|t| t.lo).max() <= c.iter().map(|t| t.hi).min());
    stabbed.then_some(out)
}

fn stab(intervals: Vec<Interval>, depth: usize, out: &mut Vec<(usize, Vec<Interval>)>) {
    if intervals.is_empty() {
        return;
    }
    let lo = intervals.iter().map(|t| t.lo).min().unwrap();
    let hi = intervals.iter().map(|t| t.hi).max().unwrap();
    let mut best: Option<((usize, usize), usize)> = None;
    for e in lo..=hi {
        if !intervals.iter().any(|t| t.contains_edge(e)) {
            continue;
        }
        let left = intervals.iter().filter(|t| t.hi < e).count();
        let right = intervals.iter().filter(|t| t.lo > e).count();
        let key = (left.max(right), left + right);
        if best.is_none_or(|(k, _)| key < k) {
            best = Some((key, e));
        }
    }
    let (_, e) = best.expect("some edge is covered");
    let (clique, rest): (Vec<Interval>, Vec<Interval>) = intervals.into_iter().partition(|t| t.contains_edge(e));
    let (left, right): (Vec<Interval>, Vec<Interval>) = rest.into_iter().partition(|t| t.hi < e);
    out.push((depth, clique));
    stab(left, depth + 1, out);
    stab(right, depth + 1, out);
}

/// Median-stabbing recursion followed by hoisting.
///
/// Each recursion level stabs the edge that best balances the intervals
/// strictly to its left and right. The recursion alone can use
/// `⌈log₂(k+1)⌉` levels; hoisting then moves whole cliques, and afterwards
/// single intervals, into the earliest group that stays a union of
/// item-disjoint cliques, which brings the count down to `⌊log₂(k+1)⌋`.
pub fn interval_decompose(intervals: &[Interval]) -> CliqueSet {
    let mut distinct = intervals.to_vec();
    distinct.sort();
    distinct.dedup();
    let mut stabbed = Vec::new();
    stab(distinct, 0, &mut stabbed);
    stabbed.sort_by_key(|(d, _)| *d);

    let mut groups: Vec<Vec<Interval>> = Vec::new();
    for (_, clique) in stabbed {
        let slot = groups.iter().position(|g| components(&[g.as_slice(), &clique].concat()).is_some());
        match slot {
            Some(i) => groups[i].extend(clique),
            None => groups.push(clique),
        }
    }
    loop {
        let mut moved = false;
        for from in (1..groups.len()).rev() {
            let mut idx = 0;
            while idx < groups[from].len() {
                let t = groups[from][idx];
                let to = (0..from).find(|&g| {
                    let mut trial = groups[g].clone();
                    trial.push(t);
                    components(&trial).is_some()
                });
                if let Some(g) = to {
                    groups[from].remove(idx);
                    groups[g].push(t);
                    moved = true;
                } else {
                    idx += 1;
                }
            }
        }
        groups.retain(|g| !g.is_empty());
        if !moved {
            break;
        }
    }
    let groups = groups
        .into_iter()
        .map(|g| components(&g).expect("groups stay valid").into_iter().map(Clique::from_intervals).collect())
        .collect();
    CliqueSet { groups }
}
