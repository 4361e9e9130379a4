//! Batch runs over generated instances with per-run invariant checks.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capprofit::{run_algorithm1, Alg1Config, Mode};
use crate::error::{PricingError, Result};
use crate::gen::{gen_gap, gen_random, CapDist, Encoding, GenKind, GenSpec, ValueDist};
use crate::highway::{highway_run, maxbuy_run, HighwayConfig, MaxBuyConfig, TrimMode};
use crate::lpkit::{solve_swm_lp, CapacityVector};
use crate::model::{evaluate_with, EvalOptions, Instance, InstanceKind, PricedOutcome};
use crate::num::{format_money, serde_money, Money, Numeric};
use crate::oracle::{exact_profit, OracleBudget};
use crate::swm::{swm_unit_pricing, ExactSwm};
use crate::treeprice::{tollbooth_tree, TREE_ALPHA};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Alg1Subadditive,
    Alg1General,
    Tree,
    HighwaySubadditive,
    HighwayUnlimited,
    MaxBuy,
    UnitPricing,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Algorithm::Alg1Subadditive,
        Algorithm::Alg1General,
        Algorithm::Tree,
        Algorithm::HighwaySubadditive,
        Algorithm::HighwayUnlimited,
        Algorithm::MaxBuy,
        Algorithm::UnitPricing,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Alg1Subadditive => "alg1_subadditive",
            Algorithm::Alg1General => "alg1_general",
            Algorithm::Tree => "tree",
            Algorithm::HighwaySubadditive => "highway_subadditive",
            Algorithm::HighwayUnlimited => "highway_unlimited",
            Algorithm::MaxBuy => "maxbuy",
            Algorithm::UnitPricing => "unit_pricing",
        }
    }

    /// Whether the algorithm accepts `inst` at all (mode mismatches are
    /// reported by the algorithm itself).
    pub fn applies_to(self, inst: &Instance) -> bool {
        match self {
            Algorithm::Tree => matches!(inst.kind, InstanceKind::Tree(_)),
            Algorithm::HighwaySubadditive | Algorithm::HighwayUnlimited => inst.kind == InstanceKind::Highway,
            Algorithm::MaxBuy => inst.kind == InstanceKind::Products,
            _ => true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Gap { n: usize },
    Random { spec: GenSpec, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteEntry {
    pub id: String,
    pub source: Source,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    #[serde(with = "serde_money")]
    pub epsilon: Money,
    pub trials: usize,
    pub numeric: String,
    /// Compute the exhaustive optimum where the budget allows.
    pub exact: bool,
    pub algorithms: Vec<Algorithm>,
    pub entries: Vec<SuiteEntry>,
}

impl SuiteConfig {
    /// A mixed batch of `count` random instances per kind plus gap fixtures.
    pub fn standard(seed: u64, count: usize) -> Self {
        let values = ValueDist::Uniform { lo: 1, hi: 8 };
        let caps = CapDist::Uniform { lo: 1, hi: 3 };
        let kinds = [
            ("general", GenKind::General { encoding: Encoding::Mixed }, 4, 4),
            ("coverage", GenKind::General { encoding: Encoding::Coverage }, 3, 4),
            ("tree", GenKind::Tree, 4, 4),
            ("highway", GenKind::Highway { subadditive: true }, 4, 4),
            ("products", GenKind::Products, 3, 5),
        ];
        let mut entries: Vec<SuiteEntry> =
            [2, 4, 10].iter().map(|&n| SuiteEntry { id: format!("gap{n}"), source: Source::Gap { n } }).collect();
        for (name, kind, m, n) in kinds {
            for i in 0..count {
                let spec = GenSpec { kind, m, n, sets_per_customer: 2, values, caps };
                let seed = seed.wrapping_mul(1_000_003).wrapping_add(entries.len() as u64);
                entries.push(SuiteEntry { id: format!("{name}{i}"), source: Source::Random { spec, seed } });
            }
        }
        SuiteConfig {
            seed,
            epsilon: Money::new(1.into(), 4.into()),
            trials: 16,
            numeric: "exact".into(),
            exact: true,
            algorithms: Algorithm::ALL.to_vec(),
            entries,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Hard checks are guaranteed on every run; soft ones are expectation
    /// bounds that a single run may miss.
    pub hard: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub instance: String,
    pub algorithm: &'static str,
    pub seed: u64,
    pub epsilon: String,
    pub trials: usize,
    pub profit: Option<String>,
    pub opt_lp_c: String,
    pub opt_lp_1: String,
    pub exact_profit: Option<String>,
    pub bound: Option<String>,
    pub error: Option<String>,
    pub checks: Vec<Check>,
    pub wall_ms: u128,
}

impl RunReport {
    pub fn hard_failures(&self) -> usize {
        self.checks.iter().filter(|c| c.hard && !c.passed).count()
    }
}

fn build(source: &Source) -> Result<Instance> {
    match source {
        Source::Gap { n } => Ok(gen_gap(*n)),
        Source::Random { spec, seed } => gen_random(spec, *seed),
    }
}

struct Run {
    outcome: PricedOutcome,
    bound: Option<Money>,
    check_capacity: bool,
}

fn run_one(inst: &Instance, alg: Algorithm, cfg: &SuiteConfig, numeric: Numeric) -> Result<Run> {
    let alg1 = Alg1Config {
        epsilon: cfg.epsilon.clone(),
        mode: Mode::Subadditive,
        trials: cfg.trials,
        seed: cfg.seed,
        numeric,
    };
    let full = |outcome, bound| Run { outcome, bound, check_capacity: true };
    Ok(match alg {
        Algorithm::Alg1Subadditive => {
            let r = run_algorithm1(inst, &alg1)?;
            full(r.outcome.clone(), Some(r.effective_bound()))
        }
        Algorithm::Alg1General => {
            let r = run_algorithm1(inst, &Alg1Config { mode: Mode::General, ..alg1 })?;
            full(r.outcome.clone(), Some(r.effective_bound()))
        }
        Algorithm::Tree => {
            let r = tollbooth_tree(inst, &alg1, TREE_ALPHA, &ExactSwm::default())?;
            full(r.outcome.clone(), Some(r.effective_bound()))
        }
        Algorithm::HighwaySubadditive | Algorithm::HighwayUnlimited => {
            let mode = if alg == Algorithm::HighwaySubadditive { TrimMode::Subadditive } else { TrimMode::Unlimited };
            let r = highway_run(inst, &HighwayConfig { mode, trials: cfg.trials, seed: cfg.seed, numeric })?;
            Run { outcome: r.outcome, bound: None, check_capacity: mode == TrimMode::Subadditive }
        }
        Algorithm::MaxBuy => {
            let r = maxbuy_run(inst, &MaxBuyConfig { trials: cfg.trials, seed: cfg.seed, numeric })?;
            full(r.outcome, None)
        }
        Algorithm::UnitPricing => full(swm_unit_pricing(inst, &ExactSwm::default())?, None),
    })
}

fn run_entry(entry: &SuiteEntry, cfg: &SuiteConfig, numeric: Numeric) -> Result<Vec<RunReport>> {
    let inst = build(&entry.source)?;
    let lp_c = solve_swm_lp(&inst, &CapacityVector::of(&inst), Numeric::Exact)?.opt;
    let lp_1 = solve_swm_lp(&inst, &CapacityVector::ones(inst.m), Numeric::Exact)?.opt;
    let exact = if cfg.exact {
        match exact_profit(&inst, &OracleBudget::default()) {
            Ok(o) => Some(o.profit),
            Err(PricingError::BudgetExceeded { .. }) => None,
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    let mut out = Vec::new();
    for &alg in cfg.algorithms.iter().filter(|a| a.applies_to(&inst)) {
        let start = Instant::now();
        let result = run_one(&inst, alg, cfg, numeric);
        let wall_ms = start.elapsed().as_millis();
        let mut checks = Vec::new();
        if let Some(x) = &exact {
            checks.push(Check { name: "exact_le_lp", passed: x <= &lp_c, hard: true });
        }
        let (profit, bound, error) = match result {
            Ok(run) => {
                let opts = EvalOptions { tolerance: numeric.tolerance(), check_capacity: run.check_capacity };
                let evaluated = evaluate_with(&inst, &run.outcome.prices, &run.outcome.allocation, &opts);
                checks.push(Check { name: "evaluate", passed: evaluated.as_ref() == Ok(&run.outcome.profit), hard: true });
                if let (Some(x), true) = (&exact, run.check_capacity) {
                    checks.push(Check { name: "profit_le_exact", passed: run.outcome.profit <= *x, hard: true });
                }
                if let Some(b) = &run.bound {
                    checks.push(Check { name: "bound", passed: run.outcome.profit >= *b, hard: false });
                }
                (Some(format_money(&run.outcome.profit)), run.bound.as_ref().map(format_money), None)
            }
            // mode mismatches are expected on instances outside an algorithm's class
            Err(PricingError::ModeMismatch(msg)) => (None, None, Some(format!("mode mismatch: {msg}"))),
            Err(e) => {
                checks.push(Check { name: "runs", passed: false, hard: true });
                (None, None, Some(e.to_string()))
            }
        };
        out.push(RunReport {
            instance: entry.id.clone(),
            algorithm: alg.name(),
            seed: cfg.seed,
            epsilon: format_money(&cfg.epsilon),
            trials: cfg.trials,
            profit,
            opt_lp_c: format_money(&lp_c),
            opt_lp_1: format_money(&lp_1),
            exact_profit: exact.as_ref().map(format_money),
            bound,
            error,
            checks,
            wall_ms,
        });
    }
    Ok(out)
}

/// Runs every entry (concurrently) and returns reports in entry order.
pub fn run_suite(cfg: &SuiteConfig) -> Result<Vec<RunReport>> {
    let numeric: Numeric = cfg.numeric.parse()?;
    let per_entry: Vec<Vec<RunReport>> =
        cfg.entries.par_iter().map(|e| run_entry(e, cfg, numeric)).collect::<Result<_>>()?;
    Ok(per_entry.into_iter().flatten().collect())
}

/// Fixed CSV columns: `instance, algorithm, seed, epsilon, trials, profit,
/// opt_lp_c, opt_lp_1, exact_profit, bound, checks, hard_failures, error`,
/// plus `wall_ms` when `timing` is set. `checks` lists `name=pass|fail`
/// separated by `;`.
pub fn write_csv<W: Write>(w: W, reports: &[RunReport], timing: bool) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec![
        "instance", "algorithm", "seed", "epsilon", "trials", "profit", "opt_lp_c", "opt_lp_1", "exact_profit", "bound",
        "checks", "hard_failures", "error",
    ];
    if timing {
        header.push("wall_ms");
    }
    let csv_err = |e: csv::Error| PricingError::Io(e.to_string());
    out.write_record(&header).map_err(csv_err)?;
    for r in reports {
        let checks: Vec<String> =
            r.checks.iter().map(|c| format!("{}={}", c.name, if c.passed { "pass" } else { "fail" })).collect();
        let mut row = vec![
            r.instance.clone(),
            r.algorithm.to_string(),
            r.seed.to_string(),
            r.epsilon.clone(),
            r.trials.to_string(),
            r.profit.clone().unwrap_or_default(),
            r.opt_lp_c.clone(),
            r.opt_lp_1.clone(),
            r.exact_profit.clone().unwrap_or_default(),
            r.bound.clone().unwrap_or_default(),
            checks.join(";"),
            r.hard_failures().to_string(),
            r.error.clone().unwrap_or_default(),
        ];
        if timing {
            row.push(r.wall_ms.to_string());
        }
        out.write_record(&row).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// One JSON object per report; `wall_ms` is dropped unless `timing` is set.
pub fn write_jsonl<W: Write>(mut w: W, reports: &[RunReport], timing: bool) -> Result<()> {
    for r in reports {
        let mut v = serde_json::to_value(r)?;
        if !timing {
            v.as_object_mut().expect("report is an object").remove("wall_ms");
        }
        writeln!(w, "{v}")?;
    }
    Ok(())
}
