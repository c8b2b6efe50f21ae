use std::path::{Path, PathBuf};

use clap::Subcommand;

use tclose::formats::{write_table_csv, Metadata};
use tclose::kanon::reduce_kanon_to_tclose;
use tclose::metric::table_distribution;
use tclose::reductions::{
    clique_to_halfclique, gen_3dm_tclose3, gen_3dm_tclose4, gen_bisection_table, gen_halfclique_table,
    gen_scaled_anonymity_table, halfclique_threshold, scaled_rows, threedm_threshold, Graph, ThreeDimSystem,
};
use tclose::{Rational, SaSpace, Table};

use crate::{load_table, parse_rational, read, write, CliResult, Ctx, Failure};

#[derive(Subcommand)]
pub enum GenCommand {
    /// Edge-incidence table whose (n/2)-anonymity optimum tracks the minimum bisection.
    Bisection {
        #[arg(long, value_name = "PATH")]
        graph: PathBuf,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Pad an (n/2)-anonymity table so (c n')-anonymity has the same optimum.
    Scaled {
        #[arg(long, value_name = "CSV")]
        table: PathBuf,
        #[arg(long)]
        split_digits: bool,
        #[arg(long, value_parser = parse_rational)]
        c: Rational,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Table whose (c n')-anonymity optimum decides a half-size clique.
    Halfclique {
        #[arg(long, value_name = "PATH")]
        graph: PathBuf,
        #[arg(long, value_parser = parse_rational)]
        c: Rational,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Graph with a half-size clique iff the input has a k-clique.
    Clique {
        #[arg(long, value_name = "PATH")]
        graph: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Three-value t-closeness table from a 3-dimensional matching system.
    #[command(name = "3dm3")]
    ThreeDm3 {
        #[arg(long, value_name = "PATH")]
        sys: PathBuf,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Four-value t-closeness table for 1/3 <= t < 1/2.
    #[command(name = "3dm4")]
    ThreeDm4 {
        #[arg(long, value_name = "PATH")]
        sys: PathBuf,
        #[arg(long, value_parser = parse_rational)]
        t: Rational,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// t-closeness instance equivalent to k-anonymity of the input.
    Kanon {
        #[arg(long, value_name = "CSV")]
        table: PathBuf,
        #[arg(long)]
        split_digits: bool,
        #[arg(long)]
        k: usize,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
}

fn emit(ctx: &mut Ctx, out: &Path, table: &Table, space: Option<&SaSpace>, meta: &mut Metadata) -> CliResult {
    std::fs::create_dir_all(out).map_err(|e| Failure::Usage(format!("{}: {e}", out.display())))?;
    write(&out.join("table.csv"), &write_table_csv(table)?)?;
    if let Some(space) = space {
        write(&out.join("space.txt"), &space.to_spec_string())?;
        let p = table_distribution(table, space)?;
        meta.set("distribution", &p);
        ctx.say(format!("distribution={p}"));
    }
    meta.set("rows", table.len());
    meta.set("columns", table.num_qi());
    write(&out.join("meta.txt"), &meta.to_string())?;
    ctx.say(format!("rows={} columns={}", table.len(), table.num_qi()));
    if let Some(th) = meta.get("threshold") {
        ctx.say(format!("threshold={th}"));
    }
    for (k, v) in meta.entries() {
        ctx.report.set(k, v);
    }
    Ok(())
}

pub fn load_graph(path: &Path) -> CliResult<Graph> {
    Ok(Graph::parse(&read(path)?)?)
}

pub fn load_system(path: &Path) -> CliResult<ThreeDimSystem> {
    Ok(ThreeDimSystem::parse(&read(path)?)?)
}

pub fn run(ctx: &mut Ctx, cmd: &GenCommand) -> CliResult {
    let mut meta = Metadata::new();
    ctx.report.set("command", "gen");
    match cmd {
        GenCommand::Bisection { graph, out } => {
            let g = load_graph(graph)?;
            let table = gen_bisection_table(&g)?;
            meta.set("generator", "bisection");
            meta.set("k", g.vertex_count() / 2);
            emit(ctx, out, &table, None, &mut meta)
        }
        GenCommand::Scaled { table, split_digits, c, out } => {
            let t0 = load_table(table, *split_digits)?;
            let scaled = gen_scaled_anonymity_table(&t0, c)?;
            let rows = scaled_rows(t0.len(), c);
            meta.set("generator", "scaled");
            meta.set("c", c);
            meta.set("k", (c * Rational::from(rows)).ceil());
            emit(ctx, out, &scaled, None, &mut meta)
        }
        GenCommand::Halfclique { graph, c, out } => {
            let g = load_graph(graph)?;
            let table = gen_halfclique_table(&g, c)?;
            meta.set("generator", "halfclique");
            meta.set("c", c);
            meta.set("k", (c * Rational::from(table.len())).ceil());
            meta.set("threshold", halfclique_threshold(&g, c)?);
            emit(ctx, out, &table, None, &mut meta)
        }
        GenCommand::Clique { graph, k, out } => {
            let g = load_graph(graph)?;
            let h = clique_to_halfclique(&g, *k)?;
            std::fs::create_dir_all(out).map_err(|e| Failure::Usage(format!("{}: {e}", out.display())))?;
            write(&out.join("graph.txt"), &h.to_text())?;
            ctx.report.set("vertices", h.vertex_count());
            ctx.report.set("edges", h.edges().len());
            ctx.say(format!("vertices={} edges={}", h.vertex_count(), h.edges().len()));
            Ok(())
        }
        GenCommand::ThreeDm3 { sys, out } => {
            let s = load_system(sys)?;
            let (table, space) = gen_3dm_tclose3(&s)?;
            meta.set("generator", "3dm3");
            meta.set("threshold", threedm_threshold(&s));
            emit(ctx, out, &table, Some(&space), &mut meta)
        }
        GenCommand::ThreeDm4 { sys, t, out } => {
            let s = load_system(sys)?;
            let (table, space) = gen_3dm_tclose4(&s, t)?;
            meta.set("generator", "3dm4");
            meta.set("t", t);
            meta.set("threshold", threedm_threshold(&s));
            emit(ctx, out, &table, Some(&space), &mut meta)
        }
        GenCommand::Kanon { table, split_digits, k, out } => {
            let t0 = load_table(table, *split_digits)?;
            let red = reduce_kanon_to_tclose(&t0, *k)?;
            meta.set("generator", "kanon");
            meta.set("k", k);
            meta.set("t", &red.t);
            emit(ctx, out, &red.table, Some(&red.space), &mut meta)
        }
    }
}
