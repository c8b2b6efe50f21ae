use std::path::PathBuf;

use clap::{Args, ValueEnum};

use tclose::formats::{parse_partition, write_generalized_csv, write_partition, PartitionFile};
use tclose::kanon::{approx_k_anonymity, brute_force_k_anonymity, exact_k_anonymity};
use tclose::ldiv::{brute_force_l_diversity, is_l_diverse, solve_2diversity};
use tclose::metric::{group_emd, SpaceSpec};
use tclose::table::{generalize, group_cost, validate_partition};
use tclose::tclose::{brute_force_tclose, build_milp, exact_tclose, export_milp, solve_milp_small};
use tclose::{Rational, SaSpace, SolveResult, Table};

use crate::{load_space_spec, load_table, parse_rational, write, CliResult, Ctx, Failure, Principle};

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Exact,
    Oracle,
    Milp,
    Approx,
}

impl Algo {
    fn name(self) -> &'static str {
        match self {
            Algo::Exact => "exact",
            Algo::Oracle => "oracle",
            Algo::Milp => "milp",
            Algo::Approx => "approx",
        }
    }
}

#[derive(Args)]
pub struct PrincipleArgs {
    #[arg(long, value_enum)]
    principle: Principle,
    /// Closeness threshold, `p/q` or a decimal.
    #[arg(long, value_parser = parse_rational)]
    t: Option<Rational>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 2)]
    l: usize,
    /// `equal`, `four-point`, or a space file.
    #[arg(long, default_value = "equal")]
    space: String,
}

#[derive(Args)]
pub struct AnonymizeArgs {
    #[arg(long, value_name = "CSV")]
    table: PathBuf,
    /// Split fixed-width digit columns into one column per digit.
    #[arg(long)]
    split_digits: bool,
    #[command(flatten)]
    principle: PrincipleArgs,
    #[arg(long, value_enum, default_value = "exact")]
    algo: Algo,
    /// Partition file to write.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Generalized table to write.
    #[arg(long, value_name = "PATH")]
    generalized: Option<PathBuf>,
    /// Write the MILP in LP format (with `--algo milp`).
    #[arg(long, value_name = "PATH")]
    lp: Option<PathBuf>,
}

#[derive(Args)]
pub struct CheckArgs {
    #[arg(long, value_name = "CSV")]
    table: PathBuf,
    #[arg(long)]
    split_digits: bool,
    #[arg(long, value_name = "PATH")]
    partition: PathBuf,
    #[command(flatten)]
    principle: PrincipleArgs,
}

enum Spec {
    Close(Rational, SaSpace),
    Anon(usize),
    Diverse(usize),
}

impl PrincipleArgs {
    fn resolve(&self, table: &Table) -> CliResult<Spec> {
        match self.principle {
            Principle::Tclose => {
                let t = self
                    .t
                    .clone()
                    .ok_or_else(|| Failure::Usage("--principle tclose needs --t".into()))?;
                if !t.is_unit_interval() {
                    return Err(Failure::Usage(format!("t must lie in [0, 1], got {t}")));
                }
                let spec: SpaceSpec = load_space_spec(&self.space)?;
                Ok(Spec::Close(t, spec.resolve(table)?))
            }
            Principle::Kanon => match self.k {
                Some(k) if k >= 1 => Ok(Spec::Anon(k)),
                Some(_) => Err(Failure::Usage("k must be at least 1".into())),
                None => Err(Failure::Usage("--principle kanon needs --k".into())),
            },
            Principle::Ldiv => {
                if self.l == 0 {
                    return Err(Failure::Usage("l must be at least 1".into()));
                }
                Ok(Spec::Diverse(self.l))
            }
        }
    }
}

pub fn anonymize(ctx: &mut Ctx, args: &AnonymizeArgs) -> CliResult {
    let table = load_table(&args.table, args.split_digits)?;
    let spec = args.principle.resolve(&table)?;
    if args.lp.is_some() && args.algo != Algo::Milp {
        return Err(Failure::Usage("--lp needs --algo milp".into()));
    }
    let limits = ctx.limits;
    let bad = |what: &str| Failure::Usage(format!("--algo {} is not available for {what}", args.algo.name()));
    let mut case = None;
    let result: SolveResult = match (&spec, args.algo) {
        (Spec::Close(t, space), Algo::Exact) => exact_tclose(&table, t, space, &limits)?,
        (Spec::Close(t, space), Algo::Oracle) => brute_force_tclose(&table, t, space, &limits)?,
        (Spec::Close(t, space), Algo::Milp) => {
            let model = build_milp(&table, t, space)?;
            ctx.report.set("milp_integer_vars", model.num_integer());
            ctx.report.set("milp_continuous_vars", model.num_continuous());
            ctx.report.set("milp_constraints", model.constraints().len());
            if let Some(path) = &args.lp {
                write(path, &export_milp(&model))?;
            }
            solve_milp_small(&model, &table, t, space, &limits)?
        }
        (Spec::Close(..), _) => return Err(bad("t-closeness")),
        (Spec::Anon(k), Algo::Exact) => exact_k_anonymity(&table, *k, &limits)?,
        (Spec::Anon(k), Algo::Oracle) => brute_force_k_anonymity(&table, *k, &limits)?,
        (Spec::Anon(k), Algo::Approx) => {
            let r = approx_k_anonymity(&table, *k)?;
            case = r.case;
            r.result
        }
        (Spec::Anon(_), _) => return Err(bad("k-anonymity")),
        (Spec::Diverse(2), Algo::Exact) => solve_2diversity(&table, &limits)?,
        (Spec::Diverse(l), Algo::Exact) => {
            return Err(Failure::Usage(format!(
                "the exact l-diversity solver handles l = 2 only (got {l}); use --algo oracle"
            )))
        }
        (Spec::Diverse(l), Algo::Oracle) => brute_force_l_diversity(&table, *l, &limits)?,
        (Spec::Diverse(_), _) => return Err(bad("l-diversity")),
    };

    ctx.report.set("command", "anonymize");
    ctx.report.set("algo", args.algo.name());
    ctx.report.set("rows", table.len());
    ctx.report.set("nodes", result.stats.nodes);
    if let Some(c) = case {
        ctx.report.set("case", c.code());
    }
    if let Some(path) = &args.out {
        write(path, &write_partition(&result))?;
    }
    let (Some(partition), Some(cost)) = (result.partition(), result.cost()) else {
        ctx.report.set("feasible", false);
        ctx.say("infeasible");
        return Err(Failure::Rejected("no partition satisfies the principle".into()));
    };
    ctx.report.set("feasible", true);
    ctx.report.set("cost", cost);
    ctx.report.set("groups", partition.len());
    if let Some(path) = &args.generalized {
        write(path, &write_generalized_csv(&table, &generalize(&table, partition)?)?)?;
    }
    ctx.say(format!("cost={cost}"));
    ctx.say(format!("groups={}", partition.len()));
    if let Some(c) = case {
        ctx.say(format!("case={}", c.code()));
    }
    Ok(())
}

pub fn check(ctx: &mut Ctx, args: &CheckArgs) -> CliResult {
    let table = load_table(&args.table, args.split_digits)?;
    let spec = args.principle.resolve(&table)?;
    let text = crate::read(&args.partition)?;
    let (partition, stated) = match parse_partition(&text)? {
        PartitionFile::Groups { partition, cost } => (partition, cost),
        PartitionFile::Infeasible => {
            return Err(Failure::Usage("the partition file records no partition".into()));
        }
    };
    ctx.report.set("command", "check");
    ctx.report.set("groups", partition.len());
    if let Err(v) = validate_partition(&table, &partition) {
        ctx.report.set("violation", v.code());
        return Err(Failure::Rejected(format!("not a partition of the table: {v}")));
    }

    let mut first_bad: Option<String> = None;
    let mut total = 0;
    for (i, g) in partition.groups().iter().enumerate() {
        let cost = group_cost(&table, g)?;
        total += cost;
        let rows: Vec<String> = g.rows().iter().map(usize::to_string).collect();
        let (detail, ok) = match &spec {
            Spec::Close(t, space) => {
                let d = group_emd(&table, g, space)?;
                let ok = d <= *t;
                (format!("emd={d}"), ok)
            }
            Spec::Anon(k) => (format!("k={k}"), g.len() >= *k),
            Spec::Diverse(l) => {
                let mut counts = vec![0usize; table.sa_values().len()];
                for &r in g.rows() {
                    counts[table.sa_code(r)] += 1;
                }
                let top = counts.into_iter().max().unwrap_or(0);
                (format!("max_sa={top}"), is_l_diverse(&table, g, *l)?)
            }
        };
        ctx.say(format!(
            "group {i} rows={} size={} cost={cost} {detail} {}",
            rows.join(","),
            g.len(),
            if ok { "ok" } else { "violation" }
        ));
        if !ok && first_bad.is_none() {
            first_bad = Some(format!("group {i} ({}) violates the principle: {detail}", rows.join(",")));
        }
    }
    ctx.say(format!("cost={total}"));
    ctx.report.set("cost", total);
    if let Some(msg) = first_bad {
        ctx.report.set("violation", "principle");
        return Err(Failure::Rejected(msg));
    }
    if let Some(c) = stated.filter(|&c| c != total) {
        ctx.report.set("violation", "cost");
        return Err(Failure::Rejected(format!("stated cost {c} differs from the actual cost {total}")));
    }
    Ok(())
}
