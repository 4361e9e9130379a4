//! JSON instance files.
//!
//! ```json
//! {"kind": "general|tree|highway|products", "m": 3, "capacities": [1, 2, 1],
//!  "tree_edges": [[0, 1], [1, 2], [1, 3]], "root": 0,
//!  "customers": [{"encoding": "explicit", "entries": [[[0, 1], "5/2"]]}]}
//! ```
//!
//! Entries per encoding: `explicit` lists `[items, value]`, `interval` lists
//! `[[a, b], value]` (inclusive edge indices), `table` lists all `2^m` values
//! by subset mask (with optional `"subadditive": true`), `unit_demand` lists
//! one value per item. Values are decimal or fraction strings, or numbers.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::capprofit::Alg1Report;
use crate::error::{PricingError, Result};
use crate::model::{Allocation, Instance, InstanceKind, Interval, ItemSet, PricedOutcome, TreeShape, Valuation};
use crate::num::{format_money, serde_money, Money};

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    kind: String,
    m: usize,
    capacities: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tree_edges: Option<Vec<(usize, usize)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    root: Option<usize>,
    customers: Vec<CustomerFile>,
}

#[derive(Serialize, Deserialize)]
struct CustomerFile {
    encoding: String,
    entries: Value,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    subadditive: bool,
}

#[derive(Serialize, Deserialize)]
struct M(#[serde(with = "serde_money")] Money);

fn entries<T: for<'de> Deserialize<'de>>(v: Value, what: &str) -> Result<T> {
    serde_json::from_value(v).map_err(|e| PricingError::Parse(format!("{what} entries: {e}")))
}

fn customer_from_file(c: CustomerFile) -> Result<Valuation> {
    Ok(match c.encoding.as_str() {
        "explicit" => {
            let list: Vec<(Vec<usize>, M)> = entries(c.entries, "explicit")?;
            Valuation::Explicit(list.into_iter().map(|(s, v)| (s.into_iter().collect::<ItemSet>(), v.0)).collect())
        }
        "interval" => {
            let list: Vec<((usize, usize), M)> = entries(c.entries, "interval")?;
            let mut out = Vec::with_capacity(list.len());
            for ((a, b), v) in list {
                if a > b {
                    return Err(PricingError::Parse(format!("empty interval [{a}, {b}]")));
                }
                out.push((Interval::new(a, b), v.0));
            }
            Valuation::Interval(out)
        }
        "table" => {
            let values: Vec<M> = entries(c.entries, "table")?;
            Valuation::Table { values: values.into_iter().map(|v| v.0).collect(), subadditive: c.subadditive }
        }
        "unit_demand" => {
            let values: Vec<M> = entries(c.entries, "unit_demand")?;
            Valuation::UnitDemand(values.into_iter().map(|v| v.0).collect())
        }
        other => return Err(PricingError::Parse(format!("unknown encoding {other:?}"))),
    })
}

fn money_value(x: &Money) -> Value {
    Value::String(format_money(x))
}

fn customer_to_file(v: &Valuation) -> CustomerFile {
    let (entries, subadditive) = match v {
        Valuation::Explicit(list) => {
            (list.iter().map(|(s, x)| serde_json::json!([s.to_vec(), money_value(x)])).collect(), false)
        }
        Valuation::Interval(list) => {
            (list.iter().map(|(t, x)| serde_json::json!([[t.lo, t.hi], money_value(x)])).collect(), false)
        }
        Valuation::Table { values, subadditive } => (values.iter().map(money_value).collect(), *subadditive),
        Valuation::UnitDemand(values) => (values.iter().map(money_value).collect(), false),
    };
    CustomerFile { encoding: v.encoding_name().into(), entries: Value::Array(entries), subadditive }
}

pub fn instance_from_json(text: &str) -> Result<Instance> {
    let file: InstanceFile = serde_json::from_str(text)?;
    let kind = match file.kind.as_str() {
        "general" => InstanceKind::General,
        "highway" => InstanceKind::Highway,
        "products" => InstanceKind::Products,
        "tree" => {
            let edges = file.tree_edges.ok_or_else(|| PricingError::Parse("tree instance without tree_edges".into()))?;
            InstanceKind::Tree(TreeShape::new(edges, file.root.unwrap_or(0))?)
        }
        other => return Err(PricingError::Parse(format!("unknown kind {other:?}"))),
    };
    let customers = file.customers.into_iter().map(customer_from_file).collect::<Result<_>>()?;
    Instance::new(file.m, file.capacities, customers, kind)
}

pub fn instance_to_json(inst: &Instance) -> String {
    let (tree_edges, root) = match &inst.kind {
        InstanceKind::Tree(t) => (Some(t.edges.clone()), Some(t.root)),
        _ => (None, None),
    };
    let file = InstanceFile {
        kind: inst.kind.name().into(),
        m: inst.m,
        capacities: inst.capacities.clone(),
        tree_edges,
        root,
        customers: inst.customers.iter().map(customer_to_file).collect(),
    };
    serde_json::to_string_pretty(&file).expect("instance serializes")
}

pub fn load_instance(path: &Path) -> Result<Instance> {
    instance_from_json(&std::fs::read_to_string(path)?)
}

pub fn save_instance(path: &Path, inst: &Instance) -> Result<()> {
    std::fs::write(path, instance_to_json(inst) + "\n")?;
    Ok(())
}

fn allocation_value(a: &Allocation) -> Value {
    Value::Array(a.0.iter().map(|s| serde_json::json!(s.to_vec())).collect())
}

/// Prices, allocation, profit and provenance as JSON.
pub fn outcome_to_json(out: &PricedOutcome) -> Value {
    serde_json::json!({
        "prices": out.prices.0.iter().map(money_value).collect::<Vec<_>>(),
        "allocation": allocation_value(&out.allocation),
        "profit": money_value(&out.profit),
        "provenance": out.provenance,
    })
}

/// The quantities a capacity-schedule run is judged by, alongside its outcome.
pub fn alg1_to_json(r: &Alg1Report) -> Value {
    let m = |x: &Money| money_value(x);
    serde_json::json!({
        "outcome": outcome_to_json(&r.outcome),
        "branch": r.branch,
        "schedule": r.schedule.ks.iter().map(|k| k.0.clone()).collect::<Vec<_>>(),
        "ratio_maximality": r.ratio_maximality,
        "selected_index": r.selected.index,
        "u": r.selected.u().0,
        "y": r.selected.y().0.iter().map(m).collect::<Vec<_>>(),
        "score": m(r.selected.score()),
        "opt_lp_c": m(r.selected.opt_full()),
        "opt_lp_1": m(r.selected.opt_unit()),
        "rounding_profit": m(&r.rounding_profit),
        "unit_profit": m(&r.unit_profit),
        "alpha_used": r.decomposition.as_ref().map(|d| m(&d.alpha_used)),
        "score_bound": m(&r.score_bound),
        "profit_bound": m(&r.profit_bound),
        "alpha_effective": m(&r.alpha_effective),
        "effective_bound": m(&r.effective_bound()),
    })
}
