//! Acceptance suite. Runs every criterion against its time budget and prints
//! one PASS/FAIL line each; exits non-zero if any fails.
//!
//! `cargo test -p tclose --test acceptance [-- FILTER]`

use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use tclose::corpus::{case_rng, random_3dm, random_distribution, random_graph, random_table, sizes_for_case, table_with_classes};
use tclose::formats::{parse_partition, parse_table_csv, PartitionFile};
use tclose::kanon::{approx_k_anonymity, brute_force_k_anonymity, exact_k_anonymity, find_reduction_counterexample, ApproxCase};
use tclose::ldiv::{brute_force_l_diversity, build_simplex_hypergraph, decompose_2diverse_group, solve_2diversity};
use tclose::metric::{
    check_closeness, emd_equal_distance, emd_four_point, emd_general, group_emd, table_distribution,
};
use tclose::reductions::{
    verify_3dm_tclose3, verify_3dm_tclose4, verify_bisection_identity, verify_scaled_identity, Graph, ThreeDimSystem,
};
use tclose::table::{group_cost, partition_cost};
use tclose::tclose::{brute_force_tclose, build_milp, exact_tclose, export_milp, parse_lp, solve_milp_small};
use tclose::{Group, Limits, Partition, Rational, SaSpace, SolveResult, Table};

type Outcome = Result<String, String>;

struct Criterion {
    key: &'static str,
    title: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn table1() -> Table {
    parse_table_csv(include_str!("../data/table1.csv"), true).unwrap()
}

fn partition(text: &str) -> (Partition, Option<u64>) {
    match parse_partition(text).unwrap() {
        PartitionFile::Groups { partition, cost } => (partition, cost),
        PartitionFile::Infeasible => panic!("fixture records a partition"),
    }
}

fn thresholds() -> [Rational; 5] {
    [r(0, 1), r(1, 4), r(1, 2), r(3, 4), r(1, 1)]
}

fn same_cost(label: &str, got: &SolveResult, want: &SolveResult) -> Result<(), String> {
    ensure!(got.cost() == want.cost(), "{label}: cost {:?}, brute force {:?}", got.cost(), want.cost());
    Ok(())
}

/// Runs `count` seeded cases in parallel and returns the first failure.
fn corpus<T: Send>(seed: u64, count: u64, case: impl Fn(u64) -> Result<T, String> + Sync) -> Result<Vec<T>, String> {
    (0..count)
        .into_par_iter()
        .map(|i| case(i).map_err(|e| format!("seed {seed} case {i}: {e}")))
        .collect()
}

fn goldens() -> Outcome {
    let t = table1();
    let (p, stated) = partition(include_str!("../data/three_anonymous.part"));
    ensure!(p.groups().iter().all(|g| g.len() >= 3), "fixture partition is not 3-anonymous");
    let cost = partition_cost(&t, &p).map_err(|e| e.to_string())?;
    ensure!(cost == 54 && stated == Some(54), "3-anonymous partition costs {cost}");
    let opt = exact_k_anonymity(&t, 3, &Limits::default()).map_err(|e| e.to_string())?;
    ensure!(opt.cost() == Some(54), "optimal 3-anonymity costs {:?}", opt.cost());

    let first = parse_table_csv(include_str!("../data/first_three.csv"), true).unwrap();
    let c3 = group_cost(&first, &Group::new(0..3).unwrap()).map_err(|e| e.to_string())?;
    ensure!(c3 == 15, "first three rows cost {c3}");

    let space = SaSpace::equal_distance_for(&t);
    let p_t1 = table_distribution(&t, &space).map_err(|e| e.to_string())?;
    ensure!(p_t1.mass() == [r(3, 10), r(3, 10), r(4, 10)], "table distribution {p_t1}");

    let (diverse, _) = partition(include_str!("../data/two_diverse.part"));
    let d0 = group_emd(&t, &diverse.groups()[0], &space).map_err(|e| e.to_string())?;
    ensure!(d0 == r(2, 5), "first group EMD {d0}");

    let (close, _) = partition(include_str!("../data/close.part"));
    for g in close.groups() {
        ensure!(check_closeness(&t, g, &r(1, 10), &space).unwrap(), "group {:?} is not 1/10-close", g.rows());
    }
    let fails = diverse.groups().iter().any(|g| !check_closeness(&t, g, &r(3, 10), &space).unwrap());
    ensure!(fails, "the 2-diverse partition passes at t = 3/10");
    Ok("cost 54, cost 15, P = (3/10, 3/10, 2/5), EMD 2/5, 1/10 pass, 3/10 fail".into())
}

fn emd_oracles() -> Outcome {
    let hub = SaSpace::hub_four_point();
    let pairs = corpus(2, 1000, |i| {
        let mut rng = case_rng(2, i);
        let dim = rng.gen_range(1..=6);
        let (x, y) = (random_distribution(&mut rng, dim, 6), random_distribution(&mut rng, dim, 6));
        let space = SaSpace::equal_distance_numbered(dim).map_err(|e| e.to_string())?;
        let fast = emd_equal_distance(&x, &y).map_err(|e| e.to_string())?;
        let slow = emd_general(&x, &y, &space).map_err(|e| e.to_string())?;
        ensure!(fast == slow, "equal distance {fast} vs general {slow} on {x} / {y}");

        let (a, b) = (random_distribution(&mut rng, 4, 6), random_distribution(&mut rng, 4, 6));
        let fast = emd_four_point(&a, &b).map_err(|e| e.to_string())?;
        let slow = emd_general(&a, &b, &hub).map_err(|e| e.to_string())?;
        ensure!(fast == slow, "four point {fast} vs general {slow} on {a} / {b}");
        Ok(())
    })?;
    Ok(format!("{} equal-distance and {0} four-point pairs", pairs.len()))
}

fn tclose_case(rng: &mut impl Rng, max_n: usize, max_m: usize, max_sigma: usize) -> (Table, Rational, SaSpace) {
    let n = rng.gen_range(1..=max_n);
    let m = rng.gen_range(0..=max_m);
    let (q, s) = (rng.gen_range(1..=max_sigma), rng.gen_range(1..=max_sigma));
    let table = random_table(rng, n, m, q, s);
    let t = thresholds().choose(rng).unwrap().clone();
    let space = SaSpace::equal_distance_for(&table);
    (table, t, space)
}

fn check_solution(table: &Table, t: &Rational, space: &SaSpace, res: &SolveResult) -> Result<(), String> {
    if let Some(p) = res.partition() {
        for g in p.groups() {
            ensure!(check_closeness(table, g, t, space).unwrap(), "group {:?} is not {t}-close", g.rows());
        }
        let cost = partition_cost(table, p).map_err(|e| e.to_string())?;
        ensure!(Some(cost) == res.cost(), "reported cost {:?}, partition costs {cost}", res.cost());
    }
    Ok(())
}

fn exact_vs_brute() -> Outcome {
    let limits = Limits::default();
    let rows = corpus(3, 200, |i| {
        let mut rng = case_rng(3, i);
        let (table, t, space) = tclose_case(&mut rng, 10, 4, 4);
        let want = brute_force_tclose(&table, &t, &space, &limits).map_err(|e| e.to_string())?;
        let got = exact_tclose(&table, &t, &space, &limits).map_err(|e| e.to_string())?;
        check_solution(&table, &t, &space, &got)?;
        same_cost("exact", &got, &want)?;
        Ok(table.len())
    })?;
    Ok(format!("200 tables, largest n = {}", rows.iter().max().unwrap()))
}

fn milp_vs_brute() -> Outcome {
    let limits = Limits::default();
    let feasible = corpus(4, 100, |i| {
        let mut rng = case_rng(4, i);
        let (table, t, space) = tclose_case(&mut rng, 6, 2, 3);
        let want = brute_force_tclose(&table, &t, &space, &limits).map_err(|e| e.to_string())?;
        let model = build_milp(&table, &t, &space).map_err(|e| e.to_string())?;
        let got = solve_milp_small(&model, &table, &t, &space, &limits).map_err(|e| e.to_string())?;
        check_solution(&table, &t, &space, &got)?;
        same_cost("milp", &got, &want)?;

        let parsed = parse_lp(&export_milp(&model)).map_err(|e| e.to_string())?;
        ensure!(parsed == model, "LP round trip changed the model");
        let again = solve_milp_small(&parsed, &table, &t, &space, &limits).map_err(|e| e.to_string())?;
        same_cost("parsed milp", &again, &want)?;
        Ok(want.is_feasible())
    })?;
    let yes = feasible.iter().filter(|&&f| f).count();
    Ok(format!("100 tables ({yes} feasible), LP round trip exact"))
}

fn kanon_reduction() -> Outcome {
    let limits = Limits::default();
    let groups = corpus(5, 60, |i| {
        let mut rng = case_rng(5, i);
        let n = 1 + (i as usize % 10);
        let (m, q, s) = (rng.gen_range(0..=3), rng.gen_range(1..=3), rng.gen_range(1..=3));
        let table = random_table(&mut rng, n, m, q, s);
        for k in 1..=n {
            let bad = find_reduction_counterexample(&table, k, &limits).map_err(|e| e.to_string())?;
            ensure!(bad.is_none(), "k = {k}: group {:?} breaks the iff", bad.unwrap().rows());
            let got = exact_k_anonymity(&table, k, &limits).map_err(|e| e.to_string())?;
            let want = brute_force_k_anonymity(&table, k, &limits).map_err(|e| e.to_string())?;
            same_cost(&format!("k = {k}"), &got, &want)?;
        }
        Ok(n as u64 * ((1u64 << n) - 1))
    })?;
    Ok(format!("60 tables, n = 1..10, {} (k, group) pairs", groups.iter().sum::<u64>()))
}

fn approximation() -> Outcome {
    let limits = Limits::default();
    let cases = [ApproxCase::AllLarge, ApproxCase::MergeSmall, ApproxCase::CarveOut, ApproxCase::AbsorbNext];
    let hits = corpus(6, 200, |i| {
        let mut rng = case_rng(6, i);
        let want = cases[(i % 4) as usize];
        let n = rng.gen_range(4..=8);
        let m = rng.gen_range(1..=3);
        let (sizes, k) = sizes_for_case(&mut rng, want, n).ok_or("no class sizes for the case")?;
        let table = table_with_classes(&mut rng, &sizes, m, 2);
        let approx = approx_k_anonymity(&table, k).map_err(|e| e.to_string())?;
        let opt = brute_force_k_anonymity(&table, k, &limits).map_err(|e| e.to_string())?;
        let opt = opt.cost().ok_or("optimum infeasible")?;
        let p = approx.result.partition().ok_or("approximation infeasible")?;
        let cost = approx.result.cost().unwrap();
        ensure!(p.groups().iter().all(|g| g.len() >= k), "a group has fewer than {k} rows");
        ensure!(partition_cost(&table, p).unwrap() == cost, "reported cost differs from the partition");
        ensure!(cost <= m as u64 * opt, "cost {cost} exceeds {m} x {opt}");
        if m == 1 {
            ensure!(cost == opt, "m = 1 but cost {cost} != optimum {opt}");
        }
        approx.case.ok_or_else(|| "no case".to_string())
    })?;
    let mut tally: BTreeMap<ApproxCase, usize> = BTreeMap::new();
    for c in hits {
        *tally.entry(c).or_default() += 1;
    }
    for c in cases {
        let hit = tally.get(&c).copied().unwrap_or(0);
        ensure!(hit >= 20, "{} taken {hit} times", c.code());
    }

    let single = corpus(16, 100, |i| {
        let mut rng = case_rng(16, i);
        let n = rng.gen_range(1..=8);
        let q = rng.gen_range(1..=4);
        let table = random_table(&mut rng, n, 1, q, 2);
        let k = rng.gen_range(1..=n);
        let approx = approx_k_anonymity(&table, k).map_err(|e| e.to_string())?;
        let opt = brute_force_k_anonymity(&table, k, &limits).map_err(|e| e.to_string())?;
        same_cost("m = 1", &approx.result, &opt)
    })?;
    let counts: Vec<String> = tally.iter().map(|(c, n)| format!("{}={n}", c.code())).collect();
    Ok(format!("200 instances ({}), {} single-column tables exact", counts.join(" "), single.len()))
}

fn max_sa_share(table: &Table) -> usize {
    let mut counts = vec![0; table.sa_values().len()];
    for row in 0..table.len() {
        counts[table.sa_code(row)] += 1;
    }
    counts.into_iter().max().unwrap_or(0)
}

fn two_diversity() -> Outcome {
    let limits = Limits::default();
    let feasible = corpus(7, 200, |i| {
        let mut rng = case_rng(7, i);
        let n = rng.gen_range(1..=8);
        let s = if i % 5 == 0 { rng.gen_range(1..=2) } else { rng.gen_range(3..=5) };
        let (m, q) = (rng.gen_range(0..=3), rng.gen_range(1..=3));
        let table = random_table(&mut rng, n, m, q, s);
        let got = solve_2diversity(&table, &limits).map_err(|e| e.to_string())?;
        let want = brute_force_l_diversity(&table, 2, &limits).map_err(|e| e.to_string())?;
        same_cost("2-diversity", &got, &want)?;
        let possible = 2 * max_sa_share(&table) <= n;
        ensure!(got.is_feasible() == possible, "feasible = {} but possible = {possible}", got.is_feasible());
        if let Some(p) = got.partition() {
            ensure!(p.groups().iter().all(|g| (2..=3).contains(&g.len())), "optimum uses a group outside 2..3");
        }
        let h = build_simplex_hypergraph(&table).map_err(|e| e.to_string())?;
        ensure!(h.check_simplex(), "simplex condition fails on {} triples", h.simplex_violations().len());
        Ok(got.is_feasible())
    })?;
    let infeasible = feasible.iter().filter(|&&f| !f).count();

    let split = corpus(17, 200, |i| {
        let mut rng = case_rng(17, i);
        let table = loop {
            let n = rng.gen_range(2..=12);
            let (m, s) = (rng.gen_range(0..=3), rng.gen_range(2..=5));
            let t = random_table(&mut rng, n, m, 3, s);
            if 2 * max_sa_share(&t) <= n {
                break t;
            }
        };
        let whole = Group::new(0..table.len()).unwrap();
        let parts = decompose_2diverse_group(&table, &whole).map_err(|e| e.to_string())?;
        let mut seen = BTreeSet::new();
        let mut total = 0;
        for g in parts.groups() {
            ensure!((2..=3).contains(&g.len()), "part of size {}", g.len());
            let sa: BTreeSet<usize> = g.rows().iter().map(|&r| table.sa_code(r)).collect();
            ensure!(sa.len() == g.len(), "part {:?} repeats an SA value", g.rows());
            seen.extend(g.rows().iter().copied());
            total += group_cost(&table, g).unwrap();
        }
        ensure!(seen.len() == table.len(), "parts do not cover the group");
        ensure!(total <= group_cost(&table, &whole).unwrap(), "splitting raised the cost");
        Ok(())
    })?;
    Ok(format!(
        "200 tables ({infeasible} infeasible, all detected), simplex 200/200, {} decompositions",
        split.len()
    ))
}

fn planted_3dm(rng: &mut impl Rng, n: usize) -> ThreeDimSystem {
    let extra = rng.gen_range(0..=2 * n);
    let noise = random_3dm(rng, n, extra);
    let mut tuples: BTreeSet<[usize; 3]> = noise.tuples().iter().copied().collect();
    if rng.gen_bool(0.5) {
        let mut ys: Vec<usize> = (0..n).collect();
        let mut zs: Vec<usize> = (0..n).collect();
        ys.shuffle(rng);
        zs.shuffle(rng);
        tuples.extend((0..n).map(|x| [x, ys[x], zs[x]]));
    }
    ThreeDimSystem::new(n, tuples).unwrap()
}

fn reductions() -> Outcome {
    let limits = Limits::default();
    let small: Vec<Graph> = Graph::all_on(4).collect();
    let graphs = small.len();
    corpus(8, graphs as u64, |i| {
        let g = &small[i as usize];
        let rep = verify_bisection_identity(g, &limits).map_err(|e| e.to_string())?;
        ensure!(rep.holds(), "{rep:?} on\n{}", g.to_text());
        Ok(())
    })?;
    corpus(18, 50, |i| {
        let g = random_graph(&mut case_rng(18, i), 6, 0.5);
        let rep = verify_bisection_identity(&g, &limits).map_err(|e| e.to_string())?;
        ensure!(rep.holds(), "{rep:?} on\n{}", g.to_text());
        Ok(())
    })?;

    corpus(28, 50, |i| {
        let mut rng = case_rng(28, i);
        let c = if i % 2 == 0 { r(1, 4) } else { r(1, 3) };
        let n = if i % 2 == 0 { *[2, 4, 6].choose(&mut rng).unwrap() } else { *[2, 4, 6, 8].choose(&mut rng).unwrap() };
        let (m, q) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
        let table = random_table(&mut rng, n, m, q, 2);
        let rep = verify_scaled_identity(&table, &c, &limits).map_err(|e| e.to_string())?;
        ensure!(rep.holds(), "c = {c}: {rep:?}");
        Ok(())
    })?;

    let exhaustive: Vec<ThreeDimSystem> = ThreeDimSystem::all_on(2).collect();
    let systems = exhaustive.len();
    let small_yes = corpus(38, systems as u64, |i| {
        let sys = &exhaustive[i as usize];
        let three = verify_3dm_tclose3(sys, &r(1, 4), &limits).map_err(|e| e.to_string())?;
        ensure!(three.holds(), "three values: {three:?} on\n{}", sys.to_text());
        let four = verify_3dm_tclose4(sys, &r(1, 3), &limits).map_err(|e| e.to_string())?;
        ensure!(four.holds(), "four values: {four:?} on\n{}", sys.to_text());
        Ok(three.has_matching)
    })?;
    let sampled_yes = corpus(48, 40, |i| {
        let mut rng = case_rng(48, i);
        let sys = planted_3dm(&mut rng, 3);
        let three = verify_3dm_tclose3(&sys, &r(1, 4), &limits).map_err(|e| e.to_string())?;
        ensure!(three.holds(), "three values: {three:?} on\n{}", sys.to_text());
        let four = verify_3dm_tclose4(&sys, &r(1, 3), &limits).map_err(|e| e.to_string())?;
        ensure!(four.holds(), "four values: {four:?} on\n{}", sys.to_text());
        Ok(three.has_matching)
    })?;
    let yes = |v: &[bool]| v.iter().filter(|&&b| b).count();
    ensure!(yes(&sampled_yes) > 0 && yes(&sampled_yes) < sampled_yes.len(), "n = 3 sample lacks yes or no instances");
    Ok(format!(
        "bisection {graphs} + 50 graphs, scaled 50 tables, 3DM {systems} systems at n = 2 ({} yes), 40 at n = 3 ({} yes)",
        yes(&small_yes),
        yes(&sampled_yes)
    ))
}

fn criteria() -> Vec<Criterion> {
    let secs = Duration::from_secs;
    vec![
        Criterion { key: "goldens", title: "worked-example goldens", budget: secs(1), run: goldens },
        Criterion { key: "emd", title: "EMD closed forms match transport", budget: secs(30), run: emd_oracles },
        Criterion { key: "exact", title: "exact t-closeness vs enumeration", budget: secs(600), run: exact_vs_brute },
        Criterion { key: "milp", title: "MILP vs enumeration, LP round trip", budget: secs(300), run: milp_vs_brute },
        Criterion { key: "kanon", title: "k-anonymity as t-closeness", budget: secs(300), run: kanon_reduction },
        Criterion { key: "approx", title: "m-approximation for k-anonymity", budget: secs(600), run: approximation },
        Criterion { key: "ldiv", title: "optimal 2-diversity", budget: secs(600), run: two_diversity },
        Criterion { key: "reductions", title: "hardness constructions", budget: secs(900), run: reductions },
    ]
}

fn main() -> ExitCode {
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, c) in criteria().into_iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| c.key.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = (c.run)();
        let took = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) if took <= c.budget => (true, d),
            Ok(d) => (false, format!("over budget: {d}")),
            Err(e) => (false, e),
        };
        failed += usize::from(!ok);
        println!(
            "{} [{}] {:<40} {:>8.2}s / {}s  {detail}",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            c.title,
            took.as_secs_f64(),
            c.budget.as_secs()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
