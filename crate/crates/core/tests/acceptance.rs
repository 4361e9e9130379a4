//! Acceptance matrix: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Every bound is checked at its stated tolerance.

use std::time::{Duration, Instant};

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use pricing_core::capprofit::{
    SelectedDual, capacity_schedule, profit_under, round_general, round_subadditive, run_algorithm1, score_lower_bound, select_u,
    Alg1Config, Mode,
};
use pricing_core::decomp::ExactVerifier;
use pricing_core::gen::{gen_gap, gen_random, CapDist, Encoding, GenKind, GenSpec, ValueDist};
use pricing_core::highway::{
    highway_run, interval_decompose, maxbuy_outcome, product_problems, round_config, round_config_once,
    solve_config_lp, surplus, trim_clique, voucher_dp, voucher_tail, ChainProblem, ConfigLpSolution, HighwayConfig,
    PriceGrid, Side, TrimMode,
};
use pricing_core::lpkit::{complementary_slackness, solve_swm_lp, CapacityVector};
use pricing_core::model::{check_subadditive, evaluate, evaluate_with, EvalOptions, Interval, ItemSet};
use pricing_core::num::{harmonic, money, ratio, to_f64, Money, Numeric};
use pricing_core::oracle::{exact_maxbuy, exact_profit, exact_relaxed_voucher, exact_voucher, exhaustive_config_lp, OracleBudget};
use pricing_core::seeding::trial_rng;
use pricing_core::swm::tree_lp;
use pricing_core::treeprice::{beta, tollbooth_tree, tree_round, BAD_EVENT_BASE, BAD_EVENT_LIMIT, SURVIVAL_CONSTANT, TREE_ALPHA};
use pricing_core::{Instance, InstanceKind};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    ensure(start.elapsed() < limit, || format!("took {:.1?}, limit {limit:?}", start.elapsed()))
}

fn one_minus_inv_e() -> f64 {
    1.0 - (-1.0f64).exp()
}

/// Mean and standard error of the mean.
fn mean_sem(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}

fn spec(kind: GenKind, m: usize, n: usize) -> GenSpec {
    GenSpec {
        kind,
        m,
        n,
        sets_per_customer: 3,
        values: ValueDist::Uniform { lo: 1, hi: 12 },
        caps: CapDist::Uniform { lo: 1, hi: 4 },
    }
}

/// 200 general instances with `m ≤ 6`, `n ≤ 8` and mixed encodings.
fn mixed_instances(count: u64, seed: u64) -> Vec<Instance> {
    (0..count)
        .map(|i| {
            let m = 2 + (i % 5) as usize;
            let n = 2 + (i % 7) as usize;
            gen_random(&spec(GenKind::General { encoding: Encoding::Mixed }, m, n), seed + i).unwrap()
        })
        .collect()
}

fn subadditive_flags(inst: &Instance) -> Vec<bool> {
    inst.customers.iter().map(|v| check_subadditive(v, inst.m).unwrap_or(false)).collect()
}

fn criterion_1() -> Outcome {
    for n in [2usize, 4, 10] {
        let start = Instant::now();
        let inst = gen_gap(n);
        let lp = solve_swm_lp(&inst, &CapacityVector::of(&inst), Numeric::Exact).map_err(|e| e.to_string())?;
        ensure(lp.opt == harmonic(n as u32), || format!("n={n}: LP {} != H_n", lp.opt))?;
        let exact = exact_profit(&inst, &OracleBudget::default()).map_err(|e| e.to_string())?;
        ensure(exact.profit == money(1), || format!("n={n}: exact profit {}", exact.profit))?;
        let rep = run_algorithm1(&inst, &Alg1Config::default()).map_err(|e| e.to_string())?;
        ensure(rep.outcome.profit == money(1), || format!("n={n}: algorithm profit {}", rep.outcome.profit))?;
        within(start, Duration::from_secs(1))?;
    }
    Ok("n in {2,4,10}: LP = H_n, exact = 1, algorithm = 1".into())
}

fn criterion_2(instances: &[Instance]) -> Outcome {
    let start = Instant::now();
    let float_tol = ratio(1, 1_000_000);
    let worst: Vec<(Money, Money)> = instances
        .par_iter()
        .enumerate()
        .map(|(i, inst)| {
            let flags = subadditive_flags(inst);
            let k = CapacityVector::of(inst);
            let mut out = Vec::new();
            for numeric in [Numeric::Exact, Numeric::Float] {
                let sol = solve_swm_lp(inst, &k, numeric).map_err(|e| format!("instance {i} {numeric}: {e}"))?;
                out.push(complementary_slackness(inst, &sol.primal, &sol.dual, &flags).max_violation());
            }
            Ok((out[0].clone(), out[1].clone()))
        })
        .collect::<Result<_, String>>()?;
    for (i, (exact, float)) in worst.iter().enumerate() {
        ensure(exact.is_zero() || exact.is_negative(), || format!("instance {i}: exact violation {exact}"))?;
        ensure(*float <= float_tol, || format!("instance {i}: float violation {}", to_f64(float)))?;
    }
    within(start, Duration::from_secs(120))?;
    let max_float = worst.iter().map(|w| to_f64(&w.1)).fold(0.0, f64::max);
    Ok(format!("{} instances, exact violations 0, max float violation {max_float:.2e}", instances.len()))
}

fn criterion_3(instances: &[Instance]) -> Outcome {
    let start = Instant::now();
    let checks: usize = instances
        .par_iter()
        .enumerate()
        .map(|(i, inst)| {
            let mut count = 0;
            for eps in [ratio(1, 4), money(1)] {
                let schedule = capacity_schedule(&inst.capacities, &eps).map_err(|e| e.to_string())?;
                ensure(schedule.ratio_maximality(&inst.capacities), || format!("instance {i}: schedule not ratio-maximal"))?;
                let sel = select_u(inst, &schedule, Numeric::Exact).map_err(|e| format!("instance {i}: {e}"))?;
                let bound = score_lower_bound(sel.opt_full(), sel.opt_unit(), &eps, inst.c_max());
                ensure(*sel.score() >= bound, || format!("instance {i} eps {eps}: score {} < {bound}", sel.score()))?;
                let fsel = select_u(inst, &schedule, Numeric::Float).map_err(|e| format!("instance {i} float: {e}"))?;
                let fbound = score_lower_bound(fsel.opt_full(), fsel.opt_unit(), &eps, inst.c_max());
                ensure(to_f64(fsel.score()) >= to_f64(&fbound) - 1e-6, || format!("instance {i} eps {eps}: float score below bound"))?;
                count += 2;
            }
            Ok(count)
        })
        .collect::<Result<Vec<usize>, String>>()?
        .into_iter()
        .sum();
    within(start, Duration::from_secs(120))?;
    Ok(format!("{checks} score checks over eps in {{1/4, 1}}, every schedule ratio-maximal"))
}

fn subadditive_instances() -> Vec<Instance> {
    (0..100u64)
        .map(|i| {
            let m = 2 + (i % 4) as usize;
            let n = 2 + (i % 6) as usize;
            let kind = if i % 2 == 0 {
                GenKind::General { encoding: Encoding::Coverage }
            } else {
                GenKind::Highway { subadditive: true }
            };
            gen_random(&spec(kind, m, n), 4_000 + i).unwrap()
        })
        .collect()
}

/// Subadditive instances whose selected `x^(u)` is fractional, so the
/// rounding actually has to resolve contention.
fn fractional_subadditive_fixtures(count: usize, epsilon: &Money) -> Vec<(Instance, SelectedDual)> {
    let mut out = Vec::new();
    let mut seed = 40_000u64;
    while out.len() < count {
        let kind = if seed % 2 == 0 {
            GenKind::General { encoding: Encoding::Coverage }
        } else {
            GenKind::Highway { subadditive: true }
        };
        let s = GenSpec { caps: CapDist::Uniform { lo: 1, hi: 2 }, ..spec(kind, 4, 6) };
        let inst = gen_random(&s, seed).unwrap();
        seed += 1;
        let schedule = capacity_schedule(&inst.capacities, epsilon).unwrap();
        let sel = select_u(&inst, &schedule, Numeric::Exact).unwrap();
        if !sel.x().is_integral() {
            out.push((inst, sel));
        }
    }
    out
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let instances = subadditive_instances();
    let cfg = Alg1Config { trials: 64, ..Alg1Config::default() };
    let per_run: Vec<bool> = instances
        .par_iter()
        .enumerate()
        .map(|(i, inst)| {
            let rep = run_algorithm1(inst, &cfg).map_err(|e| format!("instance {i}: {e}"))?;
            evaluate(inst, &rep.outcome.prices, &rep.outcome.allocation).map_err(|e| format!("instance {i}: {e}"))?;
            Ok(rep.outcome.profit >= rep.profit_bound)
        })
        .collect::<Result<_, String>>()?;
    let run_passes = per_run.iter().filter(|p| **p).count();

    let fixtures = fractional_subadditive_fixtures(10, &cfg.epsilon);
    let trials = 10_000u64;
    let gaps: Vec<(f64, f64, f64)> = fixtures
        .par_iter()
        .enumerate()
        .map(|(f, (inst, sel))| {
            let (u, x, y) = (sel.u().clone(), sel.x().clone(), sel.y());
            let opts = EvalOptions { tolerance: Money::zero(), check_capacity: true };
            let mut profits = Vec::with_capacity(trials as usize);
            for t in 0..trials {
                let mut rng = trial_rng(9_000 + f as u64, t);
                let round = round_subadditive(inst, &x, &u, &y, &Money::zero(), &mut rng);
                let p = evaluate_with(inst, &y, &round.allocation, &opts).map_err(|e| format!("fixture {f}: {e}"))?;
                debug_assert_eq!(p, profit_under(&y, &round.allocation));
                profits.push(to_f64(&p));
            }
            let (mean, sem) = mean_sem(&profits);
            Ok((mean, sem, one_minus_inv_e() * to_f64(sel.score())))
        })
        .collect::<Result<_, String>>()?;
    for (f, (mean, sem, target)) in gaps.iter().enumerate() {
        ensure(*mean >= target - 3.0 * sem, || format!("fixture {f}: mean {mean:.4} < {target:.4} - 3*{sem:.4}"))?;
    }
    within(start, Duration::from_secs(300))?;
    let slack = gaps.iter().map(|(m, _, t)| m / t.max(1e-12)).fold(f64::INFINITY, f64::min);
    Ok(format!(
        "per-run bound met on {run_passes}/100 runs; mean gate met on {} fixtures (min mean/target {slack:.3})",
        gaps.len()
    ))
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let cfg = Alg1Config { mode: Mode::General, ..Alg1Config::default() };
    let count = (0..50u64)
        .into_par_iter()
        .map(|i| {
            let m = 2 + (i % 4) as usize;
            let n = 2 + (i % 5) as usize;
            let inst = gen_random(&spec(GenKind::General { encoding: Encoding::Mixed }, m, n), 5_000 + i).unwrap();
            let schedule = capacity_schedule(&inst.capacities, &cfg.epsilon).unwrap();
            let sel = select_u(&inst, &schedule, Numeric::Exact).map_err(|e| format!("instance {i}: {e}"))?;
            let (u, x, y) = (sel.u().clone(), sel.x().clone(), sel.y());
            let (best, d) = round_general(&inst, &x, &u, &y, &mut ExactVerifier::default(), Numeric::Exact)
                .map_err(|e| format!("instance {i}: {e}"))?;
            d.check(&Money::zero()).map_err(|e| format!("instance {i}: {e}"))?;
            let total = d.terms.iter().fold(Money::zero(), |a, (l, _)| a + l);
            ensure(total == Money::one(), || format!("instance {i}: weights sum to {total}"))?;
            ensure(d.alpha_used >= Money::one(), || format!("instance {i}: alpha_used {}", d.alpha_used))?;
            for (r, (_, a)) in d.terms.iter().enumerate() {
                ensure(a.fits(&u.0), || format!("instance {i}: term {r} over capacity"))?;
                for (j, s) in a.0.iter().enumerate() {
                    let supported = s.is_empty() || x.support().any(|c| c.customer == j && c.set == *s);
                    ensure(supported, || format!("instance {i}: term {r} leaves the support"))?;
                }
            }
            for c in x.support() {
                let cover = d.coverage(c.customer, c.set);
                ensure(cover >= &c.weight / &d.alpha_used, || format!("instance {i}: column under-covered"))?;
            }
            let got = profit_under(&y, &best);
            let need = sel.score() / &d.alpha_used;
            ensure(got >= need, || format!("instance {i}: best term {got} < {need}"))?;
            Ok(1usize)
        })
        .collect::<Result<Vec<_>, String>>()?
        .len();
    within(start, Duration::from_secs(600))?;
    Ok(format!("{count} decompositions exact; best term >= score / alpha_used on all"))
}

fn tree_fixtures() -> Vec<Instance> {
    (0..5u64)
        .map(|i| {
            let s = GenSpec {
                kind: GenKind::Tree,
                m: 4 + (i % 3) as usize,
                n: 6 + i as usize,
                sets_per_customer: 3,
                values: ValueDist::Uniform { lo: 1, hi: 9 },
                caps: CapDist::Uniform { lo: 1, hi: 2 },
            };
            gen_random(&s, 6_000 + i).unwrap()
        })
        .collect()
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let b1 = beta(1.0, TREE_ALPHA);
    ensure(b1 <= BAD_EVENT_BASE, || format!("beta(1) = {b1}"))?;
    ensure((b1 - 0.2309).abs() < 1e-4, || format!("beta(1) = {b1}, expected about 0.2309"))?;
    let series: f64 = 2.0 * (0..64).map(|i| BAD_EVENT_BASE.powf(2f64.powi(i))).sum::<f64>();
    ensure(series <= BAD_EVENT_LIMIT, || format!("doubling series {series}"))?;

    let trials = 1_000_000u64;
    let worst: Vec<(f64, usize)> = tree_fixtures()
        .par_iter()
        .enumerate()
        .map(|(f, inst)| {
            let lp = tree_lp(inst, &CapacityVector::of(inst), Numeric::Exact).map_err(|e| e.to_string())?;
            let support: Vec<(usize, ItemSet, f64)> =
                lp.primal.support().map(|c| (c.customer, c.set, to_f64(&c.weight))).collect();
            let mut hits = vec![0u64; support.len()];
            let mut rng = trial_rng(7_000 + f as u64, 0);
            for _ in 0..trials {
                let round = tree_round(inst, &lp.primal, TREE_ALPHA, &mut rng).map_err(|e| e.to_string())?;
                for (h, (j, s, _)) in hits.iter_mut().zip(&support) {
                    if round.allocation.0[*j] == *s {
                        *h += 1;
                    }
                }
            }
            let mut min_ratio = f64::INFINITY;
            for ((j, s, x), h) in support.iter().zip(&hits) {
                let target = SURVIVAL_CONSTANT * x;
                let sigma = (target * (1.0 - target) / trials as f64).sqrt();
                let freq = *h as f64 / trials as f64;
                ensure(freq >= target - 3.0 * sigma, || {
                    format!("fixture {f}: Pr[({j}, {s:?})] = {freq:.6} < {target:.6} - 3*{sigma:.2e}")
                })?;
                min_ratio = min_ratio.min(freq / x);
            }
            Ok((min_ratio, support.len()))
        })
        .collect::<Result<_, String>>()?;
    within(start, Duration::from_secs(600))?;
    let min_ratio = worst.iter().map(|w| w.0).fold(f64::INFINITY, f64::min);
    let columns: usize = worst.iter().map(|w| w.1).sum();
    Ok(format!(
        "beta(1) = {b1:.4}, series = {series:.4}; {columns} support columns, min Pr/x = {min_ratio:.5}"
    ))
}

/// Half-cliques of random highway instances with their geometric grids.
fn half_cliques(count: usize, seed: u64, max_len: usize, subadditive: bool) -> Vec<(Instance, ChainProblem, PriceGrid)> {
    let mut out = Vec::new();
    let mut s = seed;
    while out.len() < count {
        let inst = gen_random(
            &GenSpec {
                kind: GenKind::Highway { subadditive },
                m: 5,
                n: 3,
                sets_per_customer: 3,
                values: ValueDist::Uniform { lo: 1, hi: 16 },
                caps: CapDist::Uniform { lo: 1, hi: 2 },
            },
            s,
        )
        .unwrap();
        s += 1;
        let mut intervals: Vec<Interval> = inst
            .customers
            .iter()
            .flat_map(|v| v.candidates(inst.m).into_iter().filter(|t| v.value(*t).is_positive()).filter_map(ItemSet::as_interval))
            .collect();
        intervals.sort();
        intervals.dedup();
        let top = inst.customers.iter().map(|v| v.max_value(inst.m)).max().unwrap();
        let grid = PriceGrid::geometric(&top, inst.m, inst.n());
        let mode = if subadditive { TrimMode::Subadditive } else { TrimMode::Unlimited };
        let caps = subadditive.then_some(inst.capacities.as_slice());
        for group in interval_decompose(&intervals).groups {
            for c in &group {
                for side in [Side::Left, Side::Right] {
                    let half = trim_clique(c, mode, side);
                    if !half.is_empty() && half.len() <= max_len && out.len() < count {
                        out.push((inst.clone(), ChainProblem::new(&inst, half, caps), grid.clone()));
                    }
                }
            }
        }
    }
    out
}

/// Dual prices spread over zero, grid levels and values between them.
fn betas(grid: &PriceGrid, n: usize, salt: usize) -> Vec<Money> {
    (0..n)
        .map(|j| match (j + salt) % 4 {
            0 => Money::zero(),
            1 => grid.levels.get(1).cloned().unwrap_or_else(Money::zero),
            2 => grid.levels.last().cloned().unwrap_or_else(Money::zero) / money(3),
            _ => grid.top.clone() * ratio(2, 3),
        })
        .collect()
}

/// One group of half-cliques sharing a grid, kept only when every clique
/// solution can be enumerated.
fn config_fixtures(count: usize) -> Vec<(Vec<ChainProblem>, PriceGrid)> {
    let mut out = Vec::new();
    let budget = OracleBudget { max_allocations: 0, max_subsets: 200_000 };
    let mut seed = 8_000u64;
    while out.len() < count {
        let subadditive = seed.is_multiple_of(2);
        let inst = gen_random(
            &GenSpec {
                kind: GenKind::Highway { subadditive },
                m: 5,
                n: 3,
                sets_per_customer: 2,
                values: ValueDist::Uniform { lo: 1, hi: 16 },
                caps: CapDist::Uniform { lo: 1, hi: 2 },
            },
            seed,
        )
        .unwrap();
        seed += 1;
        let cfg = HighwayConfig { mode: if subadditive { TrimMode::Subadditive } else { TrimMode::Unlimited }, ..Default::default() };
        let mut intervals: Vec<Interval> = inst
            .customers
            .iter()
            .flat_map(|v| v.candidates(inst.m).into_iter().filter(|t| v.value(*t).is_positive()).filter_map(ItemSet::as_interval))
            .collect();
        intervals.sort();
        intervals.dedup();
        let top = inst.customers.iter().map(|v| v.max_value(inst.m)).max().unwrap();
        let grid = PriceGrid::geometric(&top, inst.m, inst.n());
        let caps = subadditive.then_some(inst.capacities.as_slice());
        let Some(group) = interval_decompose(&intervals).groups.into_iter().max_by_key(Vec::len) else {
            continue;
        };
        let problems: Vec<ChainProblem> = group
            .iter()
            .enumerate()
            .map(|(i, c)| ChainProblem::new(&inst, trim_clique(c, cfg.mode, if i % 2 == 0 { Side::Left } else { Side::Right }), caps))
            .collect();
        if problems.iter().all(|p| !p.is_empty() && p.len() <= 3) && problems.iter().any(|p| p.len() >= 2) {
            let enumerable = problems.iter().all(|p| pricing_core::oracle::enumerate_clique_solutions(p, &grid, &budget).is_ok());
            if enumerable {
                out.push((problems, grid));
            }
        }
    }
    out
}

/// Configuration LP solutions with at least one fractional clique, taken
/// from the largest group of random highway instances.
fn fractional_config_groups(count: usize) -> Vec<ConfigLpSolution> {
    let mut out = Vec::new();
    let mut seed = 30_000u64;
    while out.len() < count {
        let subadditive = seed % 2 == 0;
        let inst = gen_random(
            &GenSpec {
                kind: GenKind::Highway { subadditive },
                m: 6,
                n: 5,
                sets_per_customer: 3,
                values: ValueDist::Uniform { lo: 1, hi: 16 },
                caps: CapDist::Uniform { lo: 1, hi: 2 },
            },
            seed,
        )
        .unwrap();
        seed += 1;
        let mut intervals: Vec<Interval> = inst
            .customers
            .iter()
            .flat_map(|v| v.candidates(inst.m).into_iter().filter(|t| v.value(*t).is_positive()).filter_map(ItemSet::as_interval))
            .collect();
        intervals.sort();
        intervals.dedup();
        let top = inst.customers.iter().map(|v| v.max_value(inst.m)).max().unwrap();
        let grid = PriceGrid::geometric(&top, inst.m, inst.n());
        let mode = if subadditive { TrimMode::Subadditive } else { TrimMode::Unlimited };
        let caps = subadditive.then_some(inst.capacities.as_slice());
        let Some(group) = interval_decompose(&intervals).groups.into_iter().max_by_key(Vec::len) else {
            continue;
        };
        let problems: Vec<ChainProblem> = group
            .iter()
            .enumerate()
            .map(|(i, c)| ChainProblem::new(&inst, trim_clique(c, mode, if i % 2 == 0 { Side::Left } else { Side::Right }), caps))
            .collect();
        let sol = solve_config_lp(&problems, &grid, Numeric::Exact).unwrap();
        if sol.x.iter().flatten().any(|v| v.is_positive() && *v < Money::one()) {
            out.push(sol);
        }
    }
    out
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let budget = OracleBudget::default();

    // (a) voucher DP against brute force.
    let mut fixtures = half_cliques(50, 10_000, 3, true);
    fixtures.extend(half_cliques(50, 20_000, 3, false));
    let a: Vec<f64> = fixtures
        .par_iter()
        .enumerate()
        .map(|(i, (_, p, grid))| {
            let beta = betas(grid, p.n(), i);
            let dp = voucher_dp(p, &beta, grid);
            let exact = exact_voucher(p, &beta, grid, &budget).map_err(|e| e.to_string())?;
            let relaxed = exact_relaxed_voucher(p, &beta, grid, &budget).map_err(|e| e.to_string())?;
            ensure(dp.value.clone() * money(2) >= exact, || format!("half-clique {i}: dp {} < exact {exact} / 2", dp.value))?;
            ensure(dp.relaxed_value == relaxed, || format!("half-clique {i}: relaxed dp {} != {relaxed}", dp.relaxed_value))?;
            ensure(dp.solution.is_feasible(p, grid), || format!("half-clique {i}: dp solution infeasible"))?;
            ensure(dp.solution.voucher_value(grid, &beta) == dp.value, || format!("half-clique {i}: dp value mismatch"))?;
            Ok(if exact.is_positive() { to_f64(&dp.value) / to_f64(&exact) } else { 1.0 })
        })
        .collect::<Result<_, String>>()?;
    let worst_a = a.iter().copied().fold(f64::INFINITY, f64::min);

    // (b) geometric tail is at most twice its head.
    let mut b_checks = 0;
    for top in [money(1), money(7), ratio(13, 3), money(1000)] {
        for (m, n) in [(1, 1), (2, 3), (5, 4), (10, 10)] {
            let grid = PriceGrid::geometric(&top, m, n);
            let mut bs: Vec<Money> = vec![Money::zero(), top.clone(), top.clone() * money(2)];
            for d in &grid.levels {
                bs.extend([d.clone(), d.clone() / money(3), d.clone() * ratio(3, 4)]);
            }
            for beta in &bs {
                for q in 0..grid.len() {
                    let tail = voucher_tail(&grid, q, beta);
                    let head = surplus(&grid.levels[q], beta);
                    ensure(tail <= head.clone() * money(2), || format!("top {top} q {q} beta {beta}: tail {tail} > 2*{head}"))?;
                    b_checks += 1;
                }
            }
        }
    }

    // (c) column generation against the materialized LP, with the scaled
    // dual certificate checked on every enumerated column.
    let groups = config_fixtures(20);
    let c: Vec<(f64, ConfigLpSolution)> = groups
        .par_iter()
        .enumerate()
        .map(|(g, (problems, grid))| {
            let sol = solve_config_lp(problems, grid, Numeric::Exact).map_err(|e| format!("group {g}: {e}"))?;
            let (full, columns) = exhaustive_config_lp(problems, grid, Numeric::Exact, &budget).map_err(|e| e.to_string())?;
            ensure(sol.objective.clone() * money(2) >= full, || format!("group {g}: cg {} < exhaustive {full} / 2", sol.objective))?;
            ensure(sol.objective <= full, || format!("group {g}: cg {} above exhaustive {full}", sol.objective))?;
            let two = money(2);
            for (i, cols) in columns.iter().enumerate() {
                for col in cols {
                    let load = sol.dual_load(col);
                    ensure(load <= &two * &sol.alpha[i], || format!("group {g} clique {i}: column load {load} > 2 alpha"))?;
                }
            }
            for (j, b) in sol.beta.iter().enumerate() {
                ensure(!b.is_negative(), || format!("group {g}: beta_{j} negative"))?;
                for (q, d) in grid.levels.iter().enumerate() {
                    ensure(b + sol.gamma_tilde(j, q) >= *d, || format!("group {g}: y-constraint ({j}, {q}) violated"))?;
                }
            }
            let alpha_sum = sol.alpha.iter().fold(Money::zero(), |s, a| s + a);
            let bound = two * alpha_sum + sol.beta.iter().fold(Money::zero(), |s, b| s + b);
            ensure(bound >= full, || format!("group {g}: certificate {bound} below exhaustive {full}"))?;
            Ok((to_f64(&sol.objective) / to_f64(&full).max(1e-12), sol))
        })
        .collect::<Result<_, String>>()?;
    let worst_c = c.iter().map(|x| x.0).fold(f64::INFINITY, f64::min);

    // (d) rounding mean against (1 - 1/e) of the LP's collected mass.
    let trials = 10_000u64;
    let fractional = fractional_config_groups(10);
    let d: Vec<f64> = fractional
        .par_iter()
        .enumerate()
        .map(|(g, sol)| {
            let paid: Vec<f64> =
                (0..trials).map(|t| to_f64(&round_config_once(sol, &mut trial_rng(11_000 + g as u64, t)).paid)).collect();
            let (mean, sem) = mean_sem(&paid);
            let target = one_minus_inv_e() * to_f64(&sol.y_mass());
            ensure(mean >= target - 3.0 * sem, || format!("group {g}: mean {mean:.4} < {target:.4} - 3*{sem:.4}"))?;
            Ok(if target > 0.0 { mean / target } else { f64::INFINITY })
        })
        .collect::<Result<_, String>>()?;
    let worst_d = d.iter().copied().fold(f64::INFINITY, f64::min);
    within(start, Duration::from_secs(600))?;
    Ok(format!(
        "(a) {} half-cliques, min dp/exact {worst_a:.3}; (b) {b_checks} tail checks; (c) {} groups, min cg/exhaustive {worst_c:.3}; (d) {} fractional groups, min mean/target {worst_d:.3}",
        fixtures.len(),
        groups.len(),
        fractional.len()
    ))
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let seeds = 400u64;
    let ratios: Vec<f64> = (0..100u64)
        .into_par_iter()
        .map(|i| {
            let s = GenSpec {
                kind: GenKind::Products,
                m: 2 + (i % 3) as usize,
                n: 3 + (i % 6) as usize,
                sets_per_customer: 4,
                values: ValueDist::Uniform { lo: 1, hi: 20 },
                caps: CapDist::Uniform { lo: 1, hi: 2 },
            };
            let inst = gen_random(&s, 12_000 + i).unwrap();
            let exact = to_f64(&exact_maxbuy(&inst, &OracleBudget::default()).map_err(|e| e.to_string())?);
            let (problems, grid) = product_problems(&inst);
            let lp = solve_config_lp(&problems, &grid, Numeric::Exact).map_err(|e| format!("instance {i}: {e}"))?;
            let mut profits = Vec::with_capacity(seeds as usize);
            for seed in 0..seeds {
                let round = round_config(&lp, 1, |t| trial_rng(seed, t));
                let out = maxbuy_outcome(&inst, &problems, &lp, &round).map_err(|e| format!("instance {i}: {e}"))?;
                profits.push(to_f64(&out.profit));
            }
            let (mean, _) = mean_sem(&profits);
            let target = 0.98 * one_minus_inv_e() * exact;
            ensure(mean >= target, || format!("instance {i}: mean {mean:.4} < 0.98 (1-1/e) {exact}"))?;
            Ok(if exact > 0.0 { mean / exact } else { 1.0 })
        })
        .collect::<Result<_, String>>()?;
    within(start, Duration::from_secs(180))?;
    let worst = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let below = ratios.iter().filter(|r| **r < 0.999).count();
    Ok(format!("100 product instances, {seeds} seeds each; min mean/exact {worst:.3}, {below} below exact"))
}

fn criterion_9() -> Outcome {
    let budget = OracleBudget::default();
    let mut shared: Vec<Instance> = (0..6).map(|i| gen_random(&spec(GenKind::General { encoding: Encoding::Mixed }, 4, 5), 13_000 + i).unwrap()).collect();
    shared.extend((0..4).map(|i| gen_random(&spec(GenKind::General { encoding: Encoding::Coverage }, 4, 5), 13_100 + i).unwrap()));
    shared.extend(tree_fixtures().into_iter().take(3));
    shared.extend((0..4).map(|i| gen_random(&spec(GenKind::Highway { subadditive: true }, 5, 4), 13_200 + i).unwrap()));
    shared.extend((0..4).map(|i| gen_random(&spec(GenKind::Highway { subadditive: false }, 5, 4), 13_300 + i).unwrap()));
    shared.extend((0..4).map(|i| gen_random(&spec(GenKind::Products, 3, 5), 13_400 + i).unwrap()));
    shared.push(gen_gap(5));

    let runs: Vec<usize> = shared
        .par_iter()
        .enumerate()
        .map(|(i, inst)| {
            let lp = solve_swm_lp(inst, &CapacityVector::of(inst), Numeric::Exact).map_err(|e| e.to_string())?;
            let exact = exact_profit(inst, &budget).map_err(|e| format!("instance {i}: {e}"))?;
            evaluate(inst, &exact.prices, &exact.allocation).map_err(|e| format!("instance {i} oracle: {e}"))?;
            ensure(exact.profit <= lp.opt, || format!("instance {i}: exact {} > LP {}", exact.profit, lp.opt))?;
            let mut outcomes = Vec::new();
            let subadditive = subadditive_flags(inst).iter().all(|f| *f);
            let base = Alg1Config { trials: 16, seed: i as u64, ..Alg1Config::default() };
            if subadditive {
                outcomes.push(("alg1 subadditive", run_algorithm1(inst, &base).map(|r| r.outcome)));
            }
            outcomes.push(("alg1 general", run_algorithm1(inst, &Alg1Config { mode: Mode::General, ..base.clone() }).map(|r| r.outcome)));
            if let InstanceKind::Tree(_) = inst.kind {
                let swm = pricing_core::swm::ExactSwm::default();
                outcomes.push(("tree", tollbooth_tree(inst, &base, 0.3, &swm).map(|r| r.outcome)));
            }
            if inst.kind == InstanceKind::Highway {
                let cfg = HighwayConfig { mode: TrimMode::Subadditive, trials: 16, seed: i as u64, numeric: Numeric::Exact };
                match highway_run(inst, &cfg) {
                    Err(pricing_core::PricingError::ModeMismatch(_)) => {}
                    r => outcomes.push(("highway subadditive", r.map(|r| r.outcome))),
                }
                let mut roomy = inst.clone();
                roomy.capacities = vec![inst.n() as u32; inst.m];
                let cfg = HighwayConfig { mode: TrimMode::Unlimited, ..cfg };
                let r = highway_run(&roomy, &cfg).map_err(|e| format!("instance {i} unlimited: {e}"))?;
                evaluate(&roomy, &r.outcome.prices, &r.outcome.allocation).map_err(|e| format!("instance {i} unlimited: {e}"))?;
                let roomy_exact = exact_profit(&roomy, &budget).map_err(|e| e.to_string())?;
                ensure(r.outcome.profit <= roomy_exact.profit, || format!("instance {i}: unlimited profit above exact"))?;
            }
            if inst.kind == InstanceKind::Products {
                let cfg = pricing_core::highway::MaxBuyConfig { trials: 16, seed: i as u64, numeric: Numeric::Exact };
                outcomes.push(("maxbuy", pricing_core::highway::maxbuy_run(inst, &cfg).map(|r| r.outcome)));
            }
            outcomes.push(("unit pricing", pricing_core::swm::swm_unit_pricing(inst, &pricing_core::swm::ExactSwm::default())));
            let count = outcomes.len();
            for (name, out) in outcomes {
                let out = out.map_err(|e| format!("instance {i} {name}: {e}"))?;
                let p = evaluate(inst, &out.prices, &out.allocation).map_err(|e| format!("instance {i} {name}: {e}"))?;
                ensure(p == out.profit, || format!("instance {i} {name}: reported {} but evaluates to {p}", out.profit))?;
                ensure(p <= exact.profit, || format!("instance {i} {name}: {p} > exact {}", exact.profit))?;
            }
            Ok(count)
        })
        .collect::<Result<_, String>>()?;
    Ok(format!("{} fixtures, {} algorithm runs, all evaluated and bounded", shared.len(), runs.iter().sum::<usize>()))
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    if args.iter().any(|a| a == "--list") {
        return;
    }
    let instances = mixed_instances(200, 2_000);
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + Sync>)> = vec![
        ("1 gap reproduction", Box::new(criterion_1)),
        ("2 complementary slackness", Box::new(|| criterion_2(&instances))),
        ("3 score bound and ratio maximality", Box::new(|| criterion_3(&instances))),
        ("4 subadditive rounding", Box::new(criterion_4)),
        ("5 convex decomposition", Box::new(criterion_5)),
        ("6 tree constants and survival", Box::new(criterion_6)),
        ("7 highway components", Box::new(criterion_7)),
        ("8 multi-product pricing", Box::new(criterion_8)),
        ("9 global sanity", Box::new(criterion_9)),
    ];
    let mut failed = 0;
    for (name, run) in &criteria {
        let start = Instant::now();
        let result = run();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS criterion {name} ({secs:.1}s): {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name} ({secs:.1}s): {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
