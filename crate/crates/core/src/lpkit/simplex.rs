//! Dense two-phase tableau simplex with Bland's rule.
//!
//! Generic over [`Scalar`] so the same code runs in exact rational or in
//! double precision. Problems here are small (tens of rows), so a dense
//! tableau that keeps `B⁻¹` in the initial-basis columns is plenty.

use crate::error::{PricingError, Result};
use crate::num::{Money, Numeric, Scalar};
use num_rational::BigRational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    /// Sparse `(variable, coefficient)` pairs.
    pub terms: Vec<(usize, Money)>,
    pub cmp: Cmp,
    pub rhs: Money,
}

/// `opt c·x  s.t.  rows,  x >= 0`.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<Money>,
    pub constraints: Vec<Constraint>,
}

/// Optimal primal/dual pair.
///
/// Duals follow the usual sign convention of the problem's sense: for a
/// maximization, `≤` rows have `dual >= 0` and `≥` rows `dual <= 0`; for a
/// minimization the signs flip. Strong duality: `objective = Σ rhs_i·dual_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub objective: Money,
    pub primal: Vec<Money>,
    pub dual: Vec<Money>,
}

impl LinearProgram {
    pub fn new(sense: Sense, objective: Vec<Money>) -> Self {
        LinearProgram { sense, objective, constraints: Vec::new() }
    }

    pub fn var_count(&self) -> usize {
        self.objective.len()
    }

    pub fn add(&mut self, terms: Vec<(usize, Money)>, cmp: Cmp, rhs: Money) -> usize {
        self.constraints.push(Constraint { terms, cmp, rhs });
        self.constraints.len() - 1
    }

    pub fn solve(&self, numeric: Numeric) -> Result<LpSolution> {
        match numeric {
            Numeric::Exact => solve_generic::<BigRational>(self),
            Numeric::Float => solve_generic::<f64>(self),
        }
    }
}

struct Tableau<S: Scalar> {
    rows: Vec<Vec<S>>,
    rhs: Vec<S>,
    /// Reduced-cost row: `c_B B⁻¹ A_j - c_j`; optimal when nonnegative.
    obj: Vec<S>,
    obj_value: S,
    basis: Vec<usize>,
}

impl<S: Scalar> Tableau<S> {
    fn pivot(&mut self, r: usize, col: usize) {
        let p = self.rows[r][col].clone();
        for v in self.rows[r].iter_mut() {
            *v = v.div(&p);
        }
        self.rhs[r] = self.rhs[r].div(&p);
        let pivot_row = self.rows[r].clone();
        let pivot_rhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let f = self.rows[i][col].clone();
            if f.is_zero_ish() {
                self.rows[i][col] = S::zero();
                continue;
            }
            for (v, pv) in self.rows[i].iter_mut().zip(&pivot_row) {
                *v = v.sub(&f.mul(pv));
            }
            self.rhs[i] = self.rhs[i].sub(&f.mul(&pivot_rhs));
        }
        let f = self.obj[col].clone();
        if !f.is_zero_ish() {
            for (v, pv) in self.obj.iter_mut().zip(&pivot_row) {
                *v = v.sub(&f.mul(pv));
            }
            self.obj_value = self.obj_value.sub(&f.mul(&pivot_rhs));
        }
        self.basis[r] = col;
    }

    fn set_costs(&mut self, costs: &[S]) {
        // obj_j = c_B B⁻¹ A_j - c_j, computed from the current tableau.
        let ncols = self.obj.len();
        let mut obj: Vec<S> = costs.iter().map(|c| c.neg()).collect();
        let mut value = S::zero();
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = &costs[b];
            if cb.is_zero_ish() {
                continue;
            }
            for (j, o) in obj.iter_mut().enumerate().take(ncols) {
                *o = o.add(&cb.mul(&self.rows[r][j]));
            }
            value = value.add(&cb.mul(&self.rhs[r]));
        }
        self.obj = obj;
        self.obj_value = value;
    }

    /// Maximizes with Bland's rule over the columns allowed by `enter_ok`.
    fn optimize(&mut self, enter_ok: &dyn Fn(usize) -> bool) -> Result<()> {
        let limit = 50_000usize;
        for _ in 0..limit {
            let entering = (0..self.obj.len()).find(|&j| enter_ok(j) && self.obj[j].is_neg());
            let Some(col) = entering else { return Ok(()) };
            let mut best: Option<(usize, S)> = None;
            for r in 0..self.rows.len() {
                let a = &self.rows[r][col];
                if !a.is_pos() {
                    continue;
                }
                let ratio = self.rhs[r].div(a);
                let take = match &best {
                    None => true,
                    Some((br, bratio)) => {
                        let d = ratio.sub(bratio);
                        d.is_neg() || (!d.is_pos() && self.basis[r] < self.basis[*br])
                    }
                };
                if take {
                    best = Some((r, ratio));
                }
            }
            let Some((r, _)) = best else { return Err(PricingError::Unbounded) };
            self.pivot(r, col);
        }
        Err(PricingError::NumericFailure("simplex iteration limit reached".into()))
    }
}

fn solve_generic<S: Scalar>(lp: &LinearProgram) -> Result<LpSolution> {
    let n = lp.var_count();
    let m = lp.constraints.len();
    let sign = match lp.sense {
        Sense::Maximize => S::one(),
        Sense::Minimize => S::one().neg(),
    };

    // Normalize to nonnegative right-hand sides.
    let mut flipped = vec![false; m];
    let mut cmps = Vec::with_capacity(m);
    for (i, c) in lp.constraints.iter().enumerate() {
        let neg = c.rhs < Money::from_integer(0.into());
        flipped[i] = neg;
        cmps.push(match (c.cmp, neg) {
            (Cmp::Le, true) => Cmp::Ge,
            (Cmp::Ge, true) => Cmp::Le,
            (cmp, _) => cmp,
        });
    }
    let n_slack = cmps.iter().filter(|c| **c != Cmp::Eq).count();
    let n_art = cmps.iter().filter(|c| **c != Cmp::Le).count();
    let ncols = n + n_slack + n_art;
    let art_start = n + n_slack;

    let mut rows = vec![vec![S::zero(); ncols]; m];
    let mut rhs = vec![S::zero(); m];
    let mut basis = vec![0usize; m];
    let mut init_col = vec![0usize; m];
    let (mut next_slack, mut next_art) = (n, art_start);
    for (i, c) in lp.constraints.iter().enumerate() {
        let f = if flipped[i] { S::one().neg() } else { S::one() };
        for (v, a) in &c.terms {
            if *v >= n {
                return Err(PricingError::NumericFailure(format!("constraint {i} references variable {v}")));
            }
            rows[i][*v] = rows[i][*v].add(&f.mul(&S::from_money(a)));
        }
        rhs[i] = f.mul(&S::from_money(&c.rhs));
        match cmps[i] {
            Cmp::Le => {
                rows[i][next_slack] = S::one();
                basis[i] = next_slack;
                init_col[i] = next_slack;
                next_slack += 1;
            }
            Cmp::Ge => {
                rows[i][next_slack] = S::one().neg();
                next_slack += 1;
                rows[i][next_art] = S::one();
                basis[i] = next_art;
                init_col[i] = next_art;
                next_art += 1;
            }
            Cmp::Eq => {
                rows[i][next_art] = S::one();
                basis[i] = next_art;
                init_col[i] = next_art;
                next_art += 1;
            }
        }
    }

    let mut t = Tableau { rows, rhs, obj: vec![S::zero(); ncols], obj_value: S::zero(), basis };

    if n_art > 0 {
        let mut costs = vec![S::zero(); ncols];
        for c in costs.iter_mut().skip(art_start) {
            *c = S::one().neg();
        }
        t.set_costs(&costs);
        t.optimize(&|_| true)?;
        if t.obj_value.is_neg() {
            return Err(PricingError::Infeasible);
        }
        // Drive zero-level artificials out of the basis where possible.
        for r in 0..m {
            if t.basis[r] >= art_start {
                if let Some(col) = (0..art_start).find(|&j| !t.rows[r][j].is_zero_ish()) {
                    t.pivot(r, col);
                }
            }
        }
    }

    let mut costs = vec![S::zero(); ncols];
    for (j, c) in lp.objective.iter().enumerate() {
        costs[j] = sign.mul(&S::from_money(c));
    }
    t.set_costs(&costs);
    t.optimize(&|j| j < art_start)?;

    let mut primal = vec![Money::from_integer(0.into()); n];
    for (r, &b) in t.basis.iter().enumerate() {
        if b < n {
            primal[b] = t.rhs[r].to_money();
        }
    }
    let dual = (0..m)
        .map(|i| {
            // y_i = c_B B⁻¹ e_i = obj[init] + c_init, and c_init = 0 in phase 2
            let mut y = t.obj[init_col[i]].clone();
            if flipped[i] {
                y = y.neg();
            }
            sign.mul(&y).to_money()
        })
        .collect();
    let objective = sign.mul(&t.obj_value).to_money();
    Ok(LpSolution { objective, primal, dual })
}

/// `max w·x  s.t.  A x <= b, x >= 0` with `A, b >= 0`.
pub fn solve_packing_lp(
    a: &[Vec<Money>],
    b: &[Money],
    w: &[Money],
    numeric: Numeric,
) -> Result<LpSolution> {
    let zero = Money::from_integer(0.into());
    if a.iter().flatten().chain(b).any(|v| v < &zero) {
        return Err(PricingError::NumericFailure("packing LP needs nonnegative A and b".into()));
    }
    let mut lp = LinearProgram::new(Sense::Maximize, w.to_vec());
    for (row, rhs) in a.iter().zip(b) {
        let terms = row.iter().cloned().enumerate().filter(|(_, v)| v != &zero).collect();
        lp.add(terms, Cmp::Le, rhs.clone());
    }
    lp.solve(numeric)
}
