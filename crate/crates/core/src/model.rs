//! Problem model: items with capacities, customers with valuation oracles,
//! prices, allocations and the feasibility/profit check.

use std::cmp::Ordering;
use std::collections::VecDeque;
use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{PricingError, Result};
use crate::num::{le_tol, money, Money};

/// Largest item universe a bitmask [`ItemSet`] can address.
pub const MAX_ITEMS: usize = 64;
/// Full subset tables are only accepted up to this many items.
pub const MAX_TABLE_ITEMS: usize = 12;

/// A set of items, stored as a bitmask over item indices `0..m`.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct ItemSet(pub u64);

impl ItemSet {
    pub const EMPTY: ItemSet = ItemSet(0);

    pub fn singleton(e: usize) -> Self {
        ItemSet(1 << e)
    }

    /// Inclusive range `lo..=hi`.
    pub fn range(lo: usize, hi: usize) -> Self {
        debug_assert!(lo <= hi && hi < MAX_ITEMS);
        let width = hi - lo + 1;
        let bits = if width == 64 { u64::MAX } else { ((1u64 << width) - 1) << lo };
        ItemSet(bits)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }
    pub fn contains(self, e: usize) -> bool {
        e < MAX_ITEMS && self.0 >> e & 1 == 1
    }
    pub fn union(self, o: ItemSet) -> ItemSet {
        ItemSet(self.0 | o.0)
    }
    pub fn intersection(self, o: ItemSet) -> ItemSet {
        ItemSet(self.0 & o.0)
    }
    pub fn difference(self, o: ItemSet) -> ItemSet {
        ItemSet(self.0 & !o.0)
    }
    pub fn is_subset(self, o: ItemSet) -> bool {
        self.0 & !o.0 == 0
    }
    pub fn insert(&mut self, e: usize) {
        self.0 |= 1 << e;
    }
    pub fn remove(&mut self, e: usize) {
        self.0 &= !(1 << e);
    }
    pub fn min_item(self) -> Option<usize> {
        (!self.is_empty()).then(|| self.0.trailing_zeros() as usize)
    }
    pub fn max_item(self) -> Option<usize> {
        (!self.is_empty()).then(|| 63 - self.0.leading_zeros() as usize)
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let e = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            Some(e)
        })
    }

    /// Contiguous run of items, i.e. an interval of a line.
    pub fn is_interval(self) -> bool {
        if self.is_empty() {
            return false;
        }
        let shifted = self.0 >> self.0.trailing_zeros();
        shifted & shifted.wrapping_add(1) == 0
    }

    pub fn as_interval(self) -> Option<Interval> {
        self.is_interval().then(|| Interval::new(self.min_item().unwrap(), self.max_item().unwrap()))
    }

    /// Order used for deterministic tie-breaks: smaller cardinality first,
    /// then lexicographic comparison of the sorted item lists.
    pub fn tie_order(self, o: ItemSet) -> Ordering {
        self.len().cmp(&o.len()).then_with(|| self.iter().cmp(o.iter()))
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }
}

impl FromIterator<usize> for ItemSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = ItemSet::EMPTY;
        for e in iter {
            s.insert(e);
        }
        s
    }
}

impl fmt::Debug for ItemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Inclusive interval `[lo, hi]` of edge indices on a line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Interval {
    pub lo: usize,
    pub hi: usize,
}

impl Interval {
    pub fn new(lo: usize, hi: usize) -> Self {
        assert!(lo <= hi, "empty interval [{lo}, {hi}]");
        Interval { lo, hi }
    }
    pub fn set(self) -> ItemSet {
        ItemSet::range(self.lo, self.hi)
    }
    pub fn contains_edge(self, e: usize) -> bool {
        self.lo <= e && e <= self.hi
    }
    pub fn len(self) -> usize {
        self.hi - self.lo + 1
    }
}

/// A customer's valuation, in one of the supported encodings.
///
/// Listed encodings (`Explicit`, `Interval`) induce the set function
/// `v(T) = max { v(S) : S listed, S ⊆ T }`, which is monotone and has
/// `v(∅) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub enum Valuation {
    Explicit(Vec<(ItemSet, Money)>),
    Interval(Vec<(Interval, Money)>),
    /// `values[mask]` for every subset mask of `0..m`; `values[0]` must be zero.
    Table { values: Vec<Money>, subadditive: bool },
    UnitDemand(Vec<Money>),
}

impl Valuation {
    pub fn encoding_name(&self) -> &'static str {
        match self {
            Valuation::Explicit(_) => "explicit",
            Valuation::Interval(_) => "interval",
            Valuation::Table { .. } => "table",
            Valuation::UnitDemand(_) => "unit_demand",
        }
    }

    /// `v(S)`.
    pub fn value(&self, s: ItemSet) -> Money {
        if s.is_empty() {
            return Money::zero();
        }
        match self {
            Valuation::Explicit(list) => list
                .iter()
                .filter(|(t, _)| t.is_subset(s))
                .map(|(_, v)| v)
                .max()
                .cloned()
                .unwrap_or_else(Money::zero),
            Valuation::Interval(list) => list
                .iter()
                .filter(|(t, _)| t.set().is_subset(s))
                .map(|(_, v)| v)
                .max()
                .cloned()
                .unwrap_or_else(Money::zero),
            Valuation::Table { values, .. } => {
                values.get(s.0 as usize).cloned().unwrap_or_else(Money::zero)
            }
            Valuation::UnitDemand(per_item) => s
                .iter()
                .filter_map(|e| per_item.get(e))
                .max()
                .cloned()
                .unwrap_or_else(Money::zero),
        }
    }

    /// The finite column universe for this customer (nonempty sets only).
    pub fn candidates(&self, m: usize) -> Vec<ItemSet> {
        let mut out: Vec<ItemSet> = match self {
            Valuation::Explicit(list) => list.iter().map(|(s, _)| *s).collect(),
            Valuation::Interval(list) => list.iter().map(|(t, _)| t.set()).collect(),
            Valuation::Table { .. } => (1..1u64 << m).map(ItemSet).collect(),
            Valuation::UnitDemand(per_item) => (0..per_item.len().min(m)).map(ItemSet::singleton).collect(),
        };
        let mut seen = std::collections::HashSet::new();
        out.retain(|s| !s.is_empty() && seen.insert(*s));
        out
    }

    pub fn max_value(&self, m: usize) -> Money {
        self.candidates(m).into_iter().map(|s| self.value(s)).max().unwrap_or_else(Money::zero)
    }
}

/// Utility-maximizing candidate set under `prices`, with its utility.
///
/// Candidates are the column universe plus `∅`. Ties go to the smaller set,
/// then to the lexicographically smaller item list, so `∅` wins any tie at 0.
pub fn demand(v: &Valuation, prices: &PriceVector, m: usize) -> (ItemSet, Money) {
    let mut best = (ItemSet::EMPTY, Money::zero());
    for s in v.candidates(m) {
        let u = v.value(s) - prices.of(s);
        let better = match u.cmp(&best.1) {
            Ordering::Greater => true,
            Ordering::Equal => s.tie_order(best.0) == Ordering::Less,
            Ordering::Less => false,
        };
        if better {
            best = (s, u);
        }
    }
    best
}

/// Whether `v(A) + v(B) >= v(A ∪ B)` holds over every applicable pair.
///
/// Tables are checked over all subset pairs; interval valuations over pairs of
/// intervals whose union is again an interval; unit-demand valuations are
/// subadditive by construction.
pub fn check_subadditive(v: &Valuation, m: usize) -> Result<bool> {
    match v {
        Valuation::Explicit(_) => Err(PricingError::UnsupportedEncoding("explicit")),
        Valuation::UnitDemand(_) => Ok(true),
        Valuation::Table { values, .. } => {
            let n = values.len();
            for a in 1..n {
                for b in a..n {
                    if &values[a] + &values[b] < values[a | b] {
                        return Ok(false);
                    }
                }
            }
            Ok(true)
        }
        Valuation::Interval(_) => {
            let mut vals = vec![Money::zero(); m * m];
            for lo in 0..m {
                for hi in lo..m {
                    vals[lo * m + hi] = v.value(Interval::new(lo, hi).set());
                }
            }
            let at = |lo: usize, hi: usize| &vals[lo * m + hi];
            for (alo, ahi) in (0..m).flat_map(|lo| (lo..m).map(move |hi| (lo, hi))) {
                for (blo, bhi) in (alo..m).flat_map(|lo| (lo..m).map(move |hi| (lo, hi))) {
                    // union is an interval iff they overlap or touch
                    if ahi + 1 < blo {
                        continue;
                    }
                    if at(alo, ahi) + at(blo, bhi) < *at(alo, ahi.max(bhi)) {
                        return Ok(false);
                    }
                }
            }
            Ok(true)
        }
    }
}

/// Rooted tree whose `m` edges are the items; vertices are `0..=m`.
#[derive(Clone, Debug, PartialEq)]
pub struct TreeShape {
    pub edges: Vec<(usize, usize)>,
    pub root: usize,
    adjacency: Vec<Vec<(usize, usize)>>,
    /// BFS distance of every vertex from the root.
    pub vertex_depth: Vec<usize>,
    /// Edge towards the root for every non-root vertex.
    pub parent_edge: Vec<Option<usize>>,
}

impl TreeShape {
    pub fn new(edges: Vec<(usize, usize)>, root: usize) -> Result<Self> {
        let nv = edges.len() + 1;
        if root >= nv {
            return Err(PricingError::NotATree(format!("root {root} out of range")));
        }
        let mut adjacency = vec![Vec::new(); nv];
        for (e, &(a, b)) in edges.iter().enumerate() {
            if a >= nv || b >= nv || a == b {
                return Err(PricingError::NotATree(format!("bad edge {e}: ({a}, {b})")));
            }
            adjacency[a].push((b, e));
            adjacency[b].push((a, e));
        }
        let mut vertex_depth = vec![usize::MAX; nv];
        let mut parent_edge = vec![None; nv];
        vertex_depth[root] = 0;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &(w, e) in &adjacency[u] {
                if vertex_depth[w] == usize::MAX {
                    vertex_depth[w] = vertex_depth[u] + 1;
                    parent_edge[w] = Some(e);
                    queue.push_back(w);
                }
            }
        }
        if vertex_depth.contains(&usize::MAX) {
            return Err(PricingError::NotATree("edge list is not connected".into()));
        }
        Ok(TreeShape { edges, root, adjacency, vertex_depth, parent_edge })
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[v]
    }

    /// Endpoint of `e` closer to the root, then the farther one.
    pub fn oriented(&self, e: usize) -> (usize, usize) {
        let (a, b) = self.edges[e];
        if self.vertex_depth[a] <= self.vertex_depth[b] {
            (a, b)
        } else {
            (b, a)
        }
    }

    /// Edge depth: distance of the closer endpoint to the root.
    pub fn edge_depth(&self, e: usize) -> usize {
        let (a, b) = self.edges[e];
        self.vertex_depth[a].min(self.vertex_depth[b])
    }

    pub fn is_path(&self, s: ItemSet) -> bool {
        if s.is_empty() {
            return false;
        }
        let mut degree = vec![0u8; self.vertex_count()];
        for e in s.iter() {
            if e >= self.edges.len() {
                return false;
            }
            let (a, b) = self.edges[e];
            degree[a] += 1;
            degree[b] += 1;
        }
        if degree.iter().any(|&d| d > 2) {
            return false;
        }
        let touched = degree.iter().filter(|&&d| d > 0).count();
        if touched != s.len() + 1 {
            return false;
        }
        // connectivity inside the subgraph
        let start = self.edges[s.min_item().unwrap()].0;
        let mut seen = vec![false; self.vertex_count()];
        seen[start] = true;
        let mut stack = vec![start];
        let mut reached = 1;
        while let Some(u) = stack.pop() {
            for &(w, e) in &self.adjacency[u] {
                if s.contains(e) && !seen[w] {
                    seen[w] = true;
                    reached += 1;
                    stack.push(w);
                }
            }
        }
        reached == touched
    }

    /// Edges on the tree path between two vertices.
    pub fn path_between(&self, mut a: usize, mut b: usize) -> ItemSet {
        let mut s = ItemSet::EMPTY;
        while a != b {
            if self.vertex_depth[a] >= self.vertex_depth[b] {
                let e = self.parent_edge[a].expect("non-root vertex has a parent");
                s.insert(e);
                a = self.other_end(e, a);
            } else {
                let e = self.parent_edge[b].expect("non-root vertex has a parent");
                s.insert(e);
                b = self.other_end(e, b);
            }
        }
        s
    }

    pub fn other_end(&self, e: usize, v: usize) -> usize {
        let (a, b) = self.edges[e];
        if a == v {
            b
        } else {
            a
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum InstanceKind {
    General,
    Tree(TreeShape),
    /// Items are the edges `0..m` of a line, left to right.
    Highway,
    /// `m` mutually disjoint single-edge products.
    Products,
}

impl InstanceKind {
    pub fn name(&self) -> &'static str {
        match self {
            InstanceKind::General => "general",
            InstanceKind::Tree(_) => "tree",
            InstanceKind::Highway => "highway",
            InstanceKind::Products => "products",
        }
    }
}

/// Items with capacities and customers with valuations. Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub m: usize,
    pub capacities: Vec<u32>,
    pub customers: Vec<Valuation>,
    pub kind: InstanceKind,
}

impl Instance {
    pub fn new(
        m: usize,
        capacities: Vec<u32>,
        customers: Vec<Valuation>,
        kind: InstanceKind,
    ) -> Result<Self> {
        let bad = |msg: String| Err(PricingError::InvalidInstance(msg));
        if m == 0 || m > MAX_ITEMS {
            return bad(format!("item count {m} outside 1..={MAX_ITEMS}"));
        }
        if capacities.len() != m {
            return bad(format!("{} capacities for {m} items", capacities.len()));
        }
        if let Some(e) = capacities.iter().position(|&c| c == 0) {
            return bad(format!("item {e} has capacity 0"));
        }
        if let InstanceKind::Tree(shape) = &kind {
            if shape.edges.len() != m {
                return bad(format!("tree has {} edges for {m} items", shape.edges.len()));
            }
        }
        let universe = ItemSet::range(0, m - 1);
        for (j, v) in customers.iter().enumerate() {
            let neg = |x: &Money| x.is_negative();
            match v {
                Valuation::Explicit(list) => {
                    for (s, x) in list {
                        if s.is_empty() || !s.is_subset(universe) || neg(x) {
                            return bad(format!("customer {j}: bad listed set {s:?}"));
                        }
                    }
                }
                Valuation::Interval(list) => {
                    for (t, x) in list {
                        if t.hi >= m || neg(x) {
                            return bad(format!("customer {j}: bad interval {t:?}"));
                        }
                    }
                }
                Valuation::Table { values, subadditive } => {
                    if m > MAX_TABLE_ITEMS {
                        return bad(format!("customer {j}: table encoding needs m <= {MAX_TABLE_ITEMS}"));
                    }
                    if values.len() != 1 << m {
                        return bad(format!("customer {j}: table has {} entries", values.len()));
                    }
                    if !values[0].is_zero() || values.iter().any(neg) {
                        return bad(format!("customer {j}: table needs v(∅)=0 and v >= 0"));
                    }
                    if *subadditive && !check_subadditive(v, m)? {
                        return bad(format!("customer {j}: table claims subadditivity but is not"));
                    }
                }
                Valuation::UnitDemand(per_item) => {
                    if per_item.len() != m || per_item.iter().any(neg) {
                        return bad(format!("customer {j}: unit-demand vector must have {m} nonnegative entries"));
                    }
                }
            }
            if let InstanceKind::Tree(shape) = &kind {
                for s in v.candidates(m) {
                    if !shape.is_path(s) {
                        return Err(PricingError::NotATree(format!("customer {j} lists non-path {s:?}")));
                    }
                }
            }
            if matches!(kind, InstanceKind::Highway) {
                for s in v.candidates(m) {
                    if !s.is_interval() {
                        return bad(format!("customer {j} lists non-interval {s:?}"));
                    }
                }
            }
            if matches!(kind, InstanceKind::Products) {
                for s in v.candidates(m) {
                    if s.len() != 1 {
                        return bad(format!("customer {j} lists a bundle {s:?} in a products instance"));
                    }
                }
            }
        }
        Ok(Instance { m, capacities, customers, kind })
    }

    pub fn n(&self) -> usize {
        self.customers.len()
    }

    pub fn c_max(&self) -> u32 {
        self.capacities.iter().copied().max().unwrap_or(1)
    }

    pub fn universe(&self) -> ItemSet {
        ItemSet::range(0, self.m - 1)
    }

    /// Price above every customer's largest value: `1 + Σ_j max_S v_j(S)`.
    pub fn unsellable_price(&self) -> Money {
        self.customers.iter().fold(money(1), |acc, v| acc + v.max_value(self.m))
    }

    pub fn tree(&self) -> Option<&TreeShape> {
        match &self.kind {
            InstanceKind::Tree(t) => Some(t),
            _ => None,
        }
    }
}

/// Nonnegative item prices.
#[derive(Clone, Debug, PartialEq)]
pub struct PriceVector(pub Vec<Money>);

impl PriceVector {
    pub fn zeros(m: usize) -> Self {
        PriceVector(vec![Money::zero(); m])
    }

    /// `p(S) = Σ_{e∈S} p_e`.
    pub fn of(&self, s: ItemSet) -> Money {
        s.iter().fold(Money::zero(), |acc, e| acc + &self.0[e])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Set assigned to each customer (`∅` when unserved).
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Allocation(pub Vec<ItemSet>);

impl Allocation {
    pub fn empty(n: usize) -> Self {
        Allocation(vec![ItemSet::EMPTY; n])
    }

    pub fn load(&self, m: usize) -> Vec<u32> {
        let mut load = vec![0u32; m];
        for s in &self.0 {
            for e in s.iter() {
                load[e] += 1;
            }
        }
        load
    }

    pub fn fits(&self, capacities: &[u32]) -> bool {
        self.load(capacities.len()).iter().zip(capacities).all(|(l, c)| l <= c)
    }

    pub fn welfare(&self, inst: &Instance) -> Money {
        self.0.iter().zip(&inst.customers).fold(Money::zero(), |acc, (s, v)| acc + v.value(*s))
    }
}

/// Prices plus an integral allocation: the result every algorithm returns.
#[derive(Clone, Debug, PartialEq)]
pub struct PricedOutcome {
    pub prices: PriceVector,
    pub allocation: Allocation,
    pub profit: Money,
    pub provenance: String,
}

#[derive(Clone, Debug)]
pub struct EvalOptions {
    /// Slack allowed on each budget constraint.
    pub tolerance: Money,
    pub check_capacity: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { tolerance: Money::zero(), check_capacity: true }
    }
}

/// Profit `Σ_j p(S_j)` of a feasible priced allocation.
pub fn evaluate(inst: &Instance, prices: &PriceVector, alloc: &Allocation) -> Result<Money> {
    evaluate_with(inst, prices, alloc, &EvalOptions::default())
}

pub fn evaluate_with(
    inst: &Instance,
    prices: &PriceVector,
    alloc: &Allocation,
    opts: &EvalOptions,
) -> Result<Money> {
    if prices.len() != inst.m || alloc.0.len() != inst.n() {
        return Err(PricingError::InvalidInstance("price/allocation dimensions do not match".into()));
    }
    if let Some(e) = prices.0.iter().position(|p| p.is_negative()) {
        return Err(PricingError::InvalidInstance(format!("negative price on item {e}")));
    }
    let mut profit = Money::zero();
    for (j, (s, v)) in alloc.0.iter().zip(&inst.customers).enumerate() {
        if s.is_empty() {
            continue;
        }
        let shape_ok = s.is_subset(inst.universe())
            && match &inst.kind {
                InstanceKind::Tree(t) => t.is_path(*s),
                InstanceKind::Highway => s.is_interval(),
                _ => true,
            };
        if !shape_ok {
            return Err(PricingError::ShapeViolation(j));
        }
        let paid = prices.of(*s);
        if !le_tol(&paid, &v.value(*s), &opts.tolerance) {
            return Err(PricingError::BudgetViolation(j));
        }
        profit += paid;
    }
    if opts.check_capacity {
        let load = alloc.load(inst.m);
        if let Some(e) = (0..inst.m).find(|&e| load[e] > inst.capacities[e]) {
            return Err(PricingError::CapacityViolation(e));
        }
    }
    Ok(profit)
}
