use std::path::PathBuf;

use clap::{Subcommand, ValueEnum};
use rand::Rng;
use rayon::prelude::*;

use tclose::corpus::{case_rng, random_3dm, random_graph, random_table, sizes_for_case, table_with_classes};
use tclose::kanon::{
    approx_k_anonymity, brute_force_k_anonymity, exact_k_anonymity, find_reduction_counterexample, ApproxCase,
};
use tclose::ldiv::{brute_force_l_diversity, solve_2diversity};
use tclose::metric::check_closeness;
use tclose::reductions::{
    verify_3dm_tclose3, verify_3dm_tclose4, verify_bisection_identity, verify_clique_reduction, verify_halfclique,
    verify_scaled_identity,
};
use tclose::table::partition_cost;
use tclose::tclose::{brute_force_tclose, build_milp, exact_tclose, solve_milp_small};
use tclose::{Limits, Rational, Record, Result, SaSpace, SolveResult, Table};

use crate::gen::{load_graph, load_system};
use crate::{load_table, parse_rational, CliResult, Ctx, Failure};

#[derive(Subcommand)]
pub enum VerifyCommand {
    /// Optimal (n/2)-anonymity cost equals n(|E| + min bisection)/2.
    Bisection {
        #[arg(long, value_name = "PATH")]
        graph: PathBuf,
    },
    /// Padding keeps the anonymity optimum.
    Scaled {
        #[arg(long, value_name = "CSV")]
        table: PathBuf,
        #[arg(long)]
        split_digits: bool,
        #[arg(long, value_parser = parse_rational)]
        c: Rational,
    },
    /// Half-size clique iff the optimum is within the threshold.
    Halfclique {
        #[arg(long, value_name = "PATH")]
        graph: PathBuf,
        #[arg(long, value_parser = parse_rational)]
        c: Rational,
    },
    /// k-clique iff the padded graph has a half-size clique.
    Clique {
        #[arg(long, value_name = "PATH")]
        graph: PathBuf,
        #[arg(long)]
        k: usize,
    },
    /// Perfect matching iff the three-value optimum is within the threshold.
    #[command(name = "3dm3")]
    ThreeDm3 {
        #[arg(long, value_name = "PATH")]
        sys: PathBuf,
        #[arg(long, value_parser = parse_rational, default_value = "1/4")]
        t: Rational,
    },
    /// Perfect matching iff the four-value optimum is within the threshold.
    #[command(name = "3dm4")]
    ThreeDm4 {
        #[arg(long, value_name = "PATH")]
        sys: PathBuf,
        #[arg(long, value_parser = parse_rational, default_value = "1/3")]
        t: Rational,
    },
    /// Every group of the k-anonymity reduction is t-close iff it has k rows.
    KanonReduction {
        /// Use a table of this many distinct rows.
        #[arg(long, conflicts_with = "table")]
        n: Option<usize>,
        #[arg(long, value_name = "CSV")]
        table: Option<PathBuf>,
        #[arg(long)]
        k: usize,
    },
    /// Compare a solver with its oracle on a seeded random corpus.
    Corpus {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 100)]
        count: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    /// exact t-closeness against enumeration, n <= 10
    Exact,
    /// MILP enumeration against enumeration, n <= 6
    Milp,
    /// exact k-anonymity against enumeration, n <= 10
    Kanon,
    /// approximation ratio, n <= 8
    Approx,
    /// 2-diversity matching against enumeration, n <= 8
    Ldiv,
    /// bisection identity on random 6-vertex graphs
    Bisection,
    /// three-value matching reduction on random n = 2 systems
    Threedm,
}

impl Suite {
    fn name(self) -> &'static str {
        match self {
            Suite::Exact => "exact",
            Suite::Milp => "milp",
            Suite::Kanon => "kanon",
            Suite::Approx => "approx",
            Suite::Ldiv => "ldiv",
            Suite::Bisection => "bisection",
            Suite::Threedm => "threedm",
        }
    }
}

fn outcome(ctx: &mut Ctx, name: &str, holds: bool, detail: String) -> CliResult {
    ctx.report.set("command", "verify");
    ctx.report.set("verifier", name);
    ctx.report.set("holds", holds);
    ctx.say(&detail);
    if holds {
        ctx.say("pass");
        Ok(())
    } else {
        Err(Failure::Rejected(format!("{name} identity fails: {detail}")))
    }
}

pub fn run(ctx: &mut Ctx, cmd: &VerifyCommand) -> CliResult {
    let limits = ctx.limits;
    match cmd {
        VerifyCommand::Bisection { graph } => {
            let r = verify_bisection_identity(&load_graph(graph)?, &limits)?;
            let detail = format!(
                "min_cut={} optimum={} predicted={} every_split={}",
                r.min_cut, r.anonymity_optimum, r.predicted, r.every_split_matches
            );
            outcome(ctx, "bisection", r.holds(), detail)
        }
        VerifyCommand::Scaled { table, split_digits, c } => {
            let r = verify_scaled_identity(&load_table(table, *split_digits)?, c, &limits)?;
            let detail = format!(
                "source_optimum={} scaled_optimum={} rows={} k={}",
                r.source_optimum, r.scaled_optimum, r.scaled_rows, r.scaled_k
            );
            outcome(ctx, "scaled", r.holds(), detail)
        }
        VerifyCommand::Halfclique { graph, c } => {
            let r = verify_halfclique(&load_graph(graph)?, c, &limits)?;
            let detail = format!(
                "half_clique={} optimum={} threshold={} k={}",
                r.has_half_clique, r.optimum, r.threshold, r.k
            );
            outcome(ctx, "halfclique", r.holds(), detail)
        }
        VerifyCommand::Clique { graph, k } => {
            let g = load_graph(graph)?;
            limits.check_exact(2 * g.vertex_count())?;
            let holds = verify_clique_reduction(&g, *k)?;
            outcome(ctx, "clique", holds, format!("vertices={} k={k}", g.vertex_count()))
        }
        VerifyCommand::ThreeDm3 { sys, t } => {
            let r = verify_3dm_tclose3(&load_system(sys)?, t, &limits)?;
            let detail = matching_detail(&r);
            outcome(ctx, "3dm3", r.holds(), detail)
        }
        VerifyCommand::ThreeDm4 { sys, t } => {
            let r = verify_3dm_tclose4(&load_system(sys)?, t, &limits)?;
            let detail = matching_detail(&r);
            outcome(ctx, "3dm4", r.holds(), detail)
        }
        VerifyCommand::KanonReduction { n, table, k } => {
            let table = match (n, table) {
                (Some(n), None) => distinct_rows(*n)?,
                (None, Some(path)) => load_table(path, false)?,
                _ => return Err(Failure::Usage("kanon-reduction needs --n or --table".into())),
            };
            if *k == 0 {
                return Err(Failure::Usage("k must be at least 1".into()));
            }
            let bad = find_reduction_counterexample(&table, *k, &limits)?;
            let groups = (1u64 << table.len()) - 1;
            let detail = match &bad {
                None => format!("groups={groups} k={k}"),
                Some(g) => format!("groups={groups} k={k} counterexample={:?}", g.rows()),
            };
            outcome(ctx, "kanon-reduction", bad.is_none(), detail)
        }
        VerifyCommand::Corpus { suite, count, seed, jobs } => corpus(ctx, *suite, *count, *seed, *jobs),
    }
}

fn matching_detail(r: &tclose::reductions::MatchingReport) -> String {
    let opt = r.optimum.map_or("infeasible".to_string(), |o| o.to_string());
    format!("matching={} optimum={opt} threshold={}", r.has_matching, r.threshold)
}

fn distinct_rows(n: usize) -> CliResult<Table> {
    if n == 0 {
        return Err(Failure::Usage("n must be at least 1".into()));
    }
    let records = (0..n).map(|i| Record::new([format!("r{i}")], "x")).collect();
    Ok(Table::from_records(records)?)
}

fn corpus(ctx: &mut Ctx, suite: Suite, count: u64, seed: u64, jobs: usize) -> CliResult {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let limits = ctx.limits;
    let results: Vec<Result<Option<String>>> =
        pool.install(|| (0..count).into_par_iter().map(|i| run_case(suite, seed, i, &limits)).collect());
    let mut failures = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        if let Some(msg) = r? {
            failures.push(format!("case {i}: {msg}"));
        }
    }
    ctx.report.set("command", "verify");
    ctx.report.set("verifier", "corpus");
    ctx.report.set("suite", suite.name());
    ctx.report.set("seed", seed);
    ctx.report.set("cases", count);
    ctx.report.set("failures", failures.len());
    ctx.say(format!("suite={} cases={count} failures={}", suite.name(), failures.len()));
    match failures.first() {
        None => {
            ctx.say("pass");
            Ok(())
        }
        Some(first) => {
            for f in &failures {
                ctx.say(f);
            }
            Err(Failure::Rejected(format!("{} mismatches, first at {first}", failures.len())))
        }
    }
}

fn thresholds() -> [Rational; 5] {
    [
        Rational::zero(),
        Rational::new(1, 4),
        Rational::new(1, 2),
        Rational::new(3, 4),
        Rational::one(),
    ]
}

fn compare(label: &str, got: &SolveResult, want: &SolveResult) -> Option<String> {
    (got.cost() != want.cost()).then(|| format!("{label} cost {:?}, oracle {:?}", got.cost(), want.cost()))
}

fn run_case(suite: Suite, seed: u64, index: u64, limits: &Limits) -> Result<Option<String>> {
    let mut rng = case_rng(seed, index);
    Ok(match suite {
        Suite::Exact | Suite::Milp => {
            let (max_n, max_m, max_sa) = if suite == Suite::Exact { (10, 4, 4) } else { (6, 2, 3) };
            let n = rng.gen_range(1..=max_n);
            let (m, q, s) = (rng.gen_range(0..=max_m), rng.gen_range(1..=3), rng.gen_range(1..=max_sa));
            let table = random_table(&mut rng, n, m, q, s);
            let t = thresholds()[rng.gen_range(0..5)].clone();
            let space = SaSpace::equal_distance_for(&table);
            let want = brute_force_tclose(&table, &t, &space, limits)?;
            let got = if suite == Suite::Exact {
                exact_tclose(&table, &t, &space, limits)?
            } else {
                solve_milp_small(&build_milp(&table, &t, &space)?, &table, &t, &space, limits)?
            };
            if let Some(p) = got.partition() {
                for g in p.groups() {
                    if !check_closeness(&table, g, &t, &space)? {
                        return Ok(Some(format!("group {:?} is not {t}-close", g.rows())));
                    }
                }
                if Some(partition_cost(&table, p)?) != got.cost() {
                    return Ok(Some("reported cost differs from the partition cost".into()));
                }
            }
            compare(suite.name(), &got, &want)
        }
        Suite::Kanon => {
            let n = rng.gen_range(1..=10);
            let (m, q) = (rng.gen_range(0..=4), rng.gen_range(1..=3));
            let table = random_table(&mut rng, n, m, q, 1);
            let k = rng.gen_range(1..=n);
            compare("exact", &exact_k_anonymity(&table, k, limits)?, &brute_force_k_anonymity(&table, k, limits)?)
        }
        Suite::Approx => {
            let cases = [ApproxCase::AllLarge, ApproxCase::MergeSmall, ApproxCase::CarveOut, ApproxCase::AbsorbNext];
            let want = cases[(index % 4) as usize];
            let n = rng.gen_range(4..=8);
            let m = rng.gen_range(1..=3);
            let (sizes, k) = sizes_for_case(&mut rng, want, n).expect("every case occurs at n >= 4");
            let table = table_with_classes(&mut rng, &sizes, m, 2);
            let approx = approx_k_anonymity(&table, k)?;
            let opt = brute_force_k_anonymity(&table, k, limits)?.cost().expect("feasible");
            let p = approx.result.partition().expect("feasible");
            let cost = approx.result.cost().expect("feasible");
            if approx.case != Some(want) {
                Some(format!("expected {}, took {:?}", want.code(), approx.case.map(ApproxCase::code)))
            } else if p.groups().iter().any(|g| g.len() < k) {
                Some("a group has fewer than k rows".into())
            } else if cost > m as u64 * opt {
                Some(format!("cost {cost} exceeds {m} x {opt}"))
            } else {
                None
            }
        }
        Suite::Ldiv => {
            let n = rng.gen_range(1..=8);
            let (m, q, s) = (rng.gen_range(0..=3), rng.gen_range(1..=3), rng.gen_range(1..=4));
            let table = random_table(&mut rng, n, m, q, s);
            compare("2-diversity", &solve_2diversity(&table, limits)?, &brute_force_l_diversity(&table, 2, limits)?)
        }
        Suite::Bisection => {
            let g = random_graph(&mut rng, 6, 0.5);
            let r = verify_bisection_identity(&g, limits)?;
            (!r.holds()).then(|| format!("{r:?} on\n{}", g.to_text()))
        }
        Suite::Threedm => {
            let m = rng.gen_range(0..=8);
            let sys = random_3dm(&mut rng, 2, m);
            let r = verify_3dm_tclose3(&sys, &Rational::new(1, 4), limits)?;
            (!r.holds()).then(|| format!("{r:?} on\n{}", sys.to_text()))
        }
    })
}
