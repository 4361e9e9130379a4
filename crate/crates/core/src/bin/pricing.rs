//! Command-line front end: instance generation, every algorithm, the exact
//! oracles, and batch suites.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use pricing_core::capprofit::{run_algorithm1, Alg1Config, Mode};
use pricing_core::gen::{gen_gap, gen_random, CapDist, Encoding, GenKind, GenSpec, ValueDist};
use pricing_core::highway::{highway_run, maxbuy_run, HighwayConfig, MaxBuyConfig, TrimMode};
use pricing_core::io::{alg1_to_json, instance_to_json, load_instance, outcome_to_json};
use pricing_core::lpkit::CapacityVector;
use pricing_core::num::{format_money, parse_money};
use pricing_core::oracle::{exact_maxbuy, exact_profit, OracleBudget};
use pricing_core::suite::{run_suite, write_csv, write_jsonl, SuiteConfig};
use pricing_core::swm::{swm_exact, ExactSwm, DEFAULT_SWM_BUDGET};
use pricing_core::treeprice::{tollbooth_tree, TREE_ALPHA};
use pricing_core::{Numeric, PricingError, Result};

#[derive(Parser)]
#[command(name = "pricing", version, about = "LP-based item pricing for limited-supply auctions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated instance as JSON.
    Gen(GenArgs),
    /// Capacity-schedule pricing on any instance.
    Alg1(Alg1Args),
    /// Capacity-schedule pricing with the tree rounding on a tree instance.
    Tree(TreeArgs),
    /// The clique-decomposition pipeline on a highway instance.
    Highway(HighwayArgs),
    /// Multi-product pricing on a products instance.
    Maxbuy(MaxBuyArgs),
    /// Exhaustive optimum.
    Oracle(OracleArgs),
    /// Batch runs with invariant checks; exits nonzero on a hard failure.
    Suite(SuiteArgs),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "exact")]
    numeric: Numeric,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Gap,
    General,
    Coverage,
    Tree,
    Highway,
    HighwayAny,
    Products,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: KindArg,
    #[arg(long, default_value_t = 4)]
    m: usize,
    #[arg(long, default_value_t = 4)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    sets: usize,
    #[arg(long, default_value_t = 1)]
    value_min: u32,
    #[arg(long, default_value_t = 8)]
    value_max: u32,
    #[arg(long, default_value_t = 3)]
    cap_max: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Alg1Args {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value = "1/4")]
    epsilon: String,
    #[arg(long, default_value = "subadditive")]
    mode: Mode,
    #[arg(long, default_value_t = 64)]
    trials: usize,
}

#[derive(Args)]
struct TreeArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value = "1/4")]
    epsilon: String,
    #[arg(long, default_value_t = TREE_ALPHA)]
    alpha: f64,
    #[arg(long, default_value_t = 64)]
    trials: usize,
}

#[derive(Args)]
struct HighwayArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value = "subadditive")]
    mode: TrimMode,
    #[arg(long, default_value_t = 64)]
    trials: usize,
}

#[derive(Args)]
struct MaxBuyArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 64)]
    trials: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Profit,
    Swm,
    Maxbuy,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "profit")]
    which: Which,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SuiteArgs {
    /// JSON suite configuration; the standard batch when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random instances per kind in the standard batch.
    #[arg(long, default_value_t = 5)]
    count: usize,
    #[arg(long)]
    numeric: Option<Numeric>,
    /// Directory receiving `report.jsonl` and `report.csv`.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Include wall-clock times (makes reports nondeterministic).
    #[arg(long)]
    timing: bool,
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, format!("{text}\n"))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            // a closed pipe (e.g. `| head`) is not an error
            match writeln!(stdout, "{text}") {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
                r => r?,
            }
        }
    }
    Ok(())
}

fn emit_json(out: Option<&Path>, v: &Value) -> Result<()> {
    emit(out, &serde_json::to_string_pretty(v)?)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Gen(a) => {
            let inst = if let KindArg::Gap = a.kind {
                gen_gap(a.n)
            } else {
                let kind = match a.kind {
                    KindArg::General => GenKind::General { encoding: Encoding::Mixed },
                    KindArg::Coverage => GenKind::General { encoding: Encoding::Coverage },
                    KindArg::Tree => GenKind::Tree,
                    KindArg::Highway => GenKind::Highway { subadditive: true },
                    KindArg::HighwayAny => GenKind::Highway { subadditive: false },
                    KindArg::Products | KindArg::Gap => GenKind::Products,
                };
                let spec = GenSpec {
                    kind,
                    m: a.m,
                    n: a.n,
                    sets_per_customer: a.sets,
                    values: ValueDist::Uniform { lo: a.value_min, hi: a.value_max },
                    caps: CapDist::Uniform { lo: 1, hi: a.cap_max },
                };
                gen_random(&spec, a.seed)?
            };
            emit(a.out.as_deref(), &instance_to_json(&inst))?;
        }
        Command::Alg1(a) => {
            let inst = load_instance(&a.common.instance)?;
            let cfg = Alg1Config {
                epsilon: parse_money(&a.epsilon)?,
                mode: a.mode,
                trials: a.trials,
                seed: a.common.seed,
                numeric: a.common.numeric,
            };
            emit_json(a.common.out.as_deref(), &alg1_to_json(&run_algorithm1(&inst, &cfg)?))?;
        }
        Command::Tree(a) => {
            let inst = load_instance(&a.common.instance)?;
            let cfg = Alg1Config {
                epsilon: parse_money(&a.epsilon)?,
                mode: Mode::Subadditive,
                trials: a.trials,
                seed: a.common.seed,
                numeric: a.common.numeric,
            };
            let report = tollbooth_tree(&inst, &cfg, a.alpha, &ExactSwm::default())?;
            emit_json(a.common.out.as_deref(), &alg1_to_json(&report))?;
        }
        Command::Highway(a) => {
            let inst = load_instance(&a.common.instance)?;
            let cfg = HighwayConfig { mode: a.mode, trials: a.trials, seed: a.common.seed, numeric: a.common.numeric };
            let report = highway_run(&inst, &cfg)?;
            let mut v = serde_json::to_value(&report)?;
            v["outcome"] = outcome_to_json(&report.outcome);
            emit_json(a.common.out.as_deref(), &v)?;
        }
        Command::Maxbuy(a) => {
            let inst = load_instance(&a.common.instance)?;
            let cfg = MaxBuyConfig { trials: a.trials, seed: a.common.seed, numeric: a.common.numeric };
            let report = maxbuy_run(&inst, &cfg)?;
            let mut v = serde_json::to_value(&report)?;
            v["outcome"] = outcome_to_json(&report.outcome);
            emit_json(a.common.out.as_deref(), &v)?;
        }
        Command::Oracle(a) => {
            let inst = load_instance(&a.instance)?;
            let budget = OracleBudget::default();
            let v = match a.which {
                Which::Profit => outcome_to_json(&exact_profit(&inst, &budget)?),
                Which::Swm => {
                    let sol = swm_exact(&inst, &CapacityVector::of(&inst), DEFAULT_SWM_BUDGET)?;
                    json!({
                        "welfare": format_money(&sol.welfare),
                        "allocation": sol.allocation.0.iter().map(|s| s.to_vec()).collect::<Vec<_>>(),
                    })
                }
                Which::Maxbuy => json!({ "profit": format_money(&exact_maxbuy(&inst, &budget)?) }),
            };
            emit_json(a.out.as_deref(), &v)?;
        }
        Command::Suite(a) => {
            let mut cfg = match &a.config {
                Some(p) => serde_json::from_str::<SuiteConfig>(&std::fs::read_to_string(p)?)?,
                None => SuiteConfig::standard(a.seed, a.count),
            };
            if let Some(n) = a.numeric {
                cfg.numeric = n.to_string();
            }
            let reports = run_suite(&cfg)?;
            std::fs::create_dir_all(&a.out)?;
            write_jsonl(std::fs::File::create(a.out.join("report.jsonl"))?, &reports, a.timing)?;
            write_csv(std::fs::File::create(a.out.join("report.csv"))?, &reports, a.timing)?;
            let failures: usize = reports.iter().map(|r| r.hard_failures()).sum();
            eprintln!("{} runs, {} hard failures", reports.len(), failures);
            if failures > 0 {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, PricingError::Parse(_) | PricingError::Io(_) | PricingError::InvalidInstance(_)) {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
