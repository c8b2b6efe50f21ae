//! Constructions that turn graph problems into k-anonymity instances with
//! `k` a constant fraction of the rows.

use crate::enumerate::{binomial, for_each_combination};
use crate::error::{Error, Result};
use crate::kanon::brute_force_k_anonymity;
use crate::rational::Rational;
use crate::solve::Limits;
use crate::table::{partition_cost, Group, Partition, Record, Table};

use super::Graph;

/// Filler for the extra columns of original rows in a scaled table.
pub const PAD_OLD: &str = "#PAD1";
/// Filler for every cell of the added rows in a scaled table.
pub const PAD_NEW: &str = "#PAD2";

const DUMMY_SA: &str = "-";

fn edge_columns(g: &Graph) -> Vec<String> {
    (1..=g.edges().len()).map(|j| format!("e{j}")).collect()
}

fn incidence_row(g: &Graph, i: usize) -> Vec<String> {
    g.edges()
        .iter()
        .map(|&(u, v)| if u == i || v == i { (i + 1).to_string() } else { "0".to_string() })
        .collect()
}

fn check_even_order(g: &Graph) -> Result<()> {
    let n = g.vertex_count();
    if n < 4 || n % 2 == 1 {
        return Err(Error::OutOfRange(format!(
            "the graph needs an even number of vertices, at least 4; got {n}"
        )));
    }
    Ok(())
}

/// One row per vertex and one QI column per edge; the cell is the vertex
/// number if the vertex is an endpoint of the edge and `0` otherwise. The SA
/// column is a constant placeholder.
pub fn gen_bisection_table(g: &Graph) -> Result<Table> {
    check_even_order(g)?;
    let records = (0..g.vertex_count())
        .map(|i| Record::new(incidence_row(g, i), DUMMY_SA))
        .collect();
    Table::new(edge_columns(g), "sa".into(), records)
}

/// Edges inside `side`, across the cut, and inside the complement.
fn edge_split(g: &Graph, side: u64) -> (usize, usize, usize) {
    let mut counts = (0, 0, 0);
    for &(u, v) in g.edges() {
        match (side >> u & 1, side >> v & 1) {
            (1, 1) => counts.0 += 1,
            (0, 0) => counts.2 += 1,
            _ => counts.1 += 1,
        }
    }
    counts
}

/// `n(|E| + |E_12|) / 2`: cost of the two-group partition of the bisection
/// table that follows the split `side` / complement.
pub fn bisection_cut_cost(g: &Graph, side: u64) -> u64 {
    let (_, cross, _) = edge_split(g, side);
    (g.vertex_count() * (g.edges().len() + cross) / 2) as u64
}

/// Smallest cut over all equal splits, with the first optimal side in
/// lexicographic order.
pub fn min_bisection(g: &Graph) -> (usize, u64) {
    let n = g.vertex_count();
    let vertices: Vec<usize> = (0..n).collect();
    let mut best: Option<(usize, u64)> = None;
    for_each_combination(&vertices, n / 2, |side| {
        let cut = edge_split(g, side).1;
        if best.is_none_or(|(c, _)| cut < c) {
            best = Some((cut, side));
        }
    });
    best.expect("at least one split")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BisectionReport {
    pub min_cut: usize,
    pub anonymity_optimum: u64,
    /// `n(|E| + min_cut) / 2`.
    pub predicted: u64,
    /// Every equal split costs `n(|E| + |E_12|)/2` as a partition, and each
    /// half costs `(n/2)(|E_pp| + |E_12|)` on its own.
    pub every_split_matches: bool,
}

impl BisectionReport {
    pub fn holds(&self) -> bool {
        self.anonymity_optimum == self.predicted && self.every_split_matches
    }
}

/// Solves both sides by enumeration: the minimum bisection of `g` and the
/// optimal `(n/2)`-anonymous partition of its table.
pub fn verify_bisection_identity(g: &Graph, limits: &Limits) -> Result<BisectionReport> {
    let table = gen_bisection_table(g)?;
    limits.check_oracle(table.len())?;
    let n = g.vertex_count();
    let m = g.edges().len();
    let (min_cut, _) = min_bisection(g);
    let opt = brute_force_k_anonymity(&table, n / 2, limits)?
        .cost()
        .expect("k = n/2 is feasible");

    let vertices: Vec<usize> = (0..n).collect();
    let all = (1u64 << n) - 1;
    let mut every = true;
    for_each_combination(&vertices, n / 2, |side| {
        let (inner, cross, outer) = edge_split(g, side);
        let a = Group::from_mask(side);
        let b = Group::from_mask(all & !side);
        let ca = crate::table::group_cost(&table, &a).expect("valid group");
        let cb = crate::table::group_cost(&table, &b).expect("valid group");
        let whole = partition_cost(&table, &Partition::new(vec![a, b])).expect("valid partition");
        every &= ca == (n / 2 * (inner + cross)) as u64
            && cb == (n / 2 * (outer + cross)) as u64
            && whole == bisection_cut_cost(g, side);
    });
    Ok(BisectionReport {
        min_cut,
        anonymity_optimum: opt,
        predicted: (n * (m + min_cut) / 2) as u64,
        every_split_matches: every,
    })
}

fn rows_for(n: usize, c: &Rational) -> usize {
    let two_c = c * Rational::from(2i64);
    (Rational::from(n) / two_c).floor().to_i64().expect("small row count") as usize
}

/// `⌊n / 2c⌋`, the row count of a scaled or halfclique table.
pub fn scaled_rows(n: usize, c: &Rational) -> usize {
    rows_for(n, c)
}

/// Smallest group size `⌈c n'⌉` required in a table of `n'` rows.
fn fraction_k(c: &Rational, rows: usize) -> usize {
    (c * Rational::from(rows)).ceil().to_i64().expect("small k") as usize
}

/// Pads an `(n/2)`-anonymity instance to `⌊n/2c⌋` rows so that `(c n')`-
/// anonymity on the result has the same optimum: original rows gain `n m`
/// columns of [`PAD_OLD`], added rows are [`PAD_NEW`] throughout.
pub fn gen_scaled_anonymity_table(t0: &Table, c: &Rational) -> Result<Table> {
    if c.is_negative() || c.is_zero() || *c > Rational::new(1, 3) {
        return Err(Error::OutOfRange(format!("c must lie in (0, 1/3], got {c}")));
    }
    let n = t0.len();
    if n % 2 == 1 {
        return Err(Error::OutOfRange(format!("the source table needs an even row count, got {n}")));
    }
    let clash = t0
        .records()
        .iter()
        .any(|r| r.qi.iter().any(|v| v == PAD_OLD || v == PAD_NEW));
    if clash {
        return Err(Error::InvalidTable(format!(
            "the source table already uses the reserved filler {PAD_OLD} or {PAD_NEW}"
        )));
    }
    let m = t0.num_qi();
    let rows = rows_for(n, c);
    let extra = n * m;
    let mut names = t0.qi_names().to_vec();
    names.extend((1..=extra).map(|j| format!("pad{j}")));
    let mut records: Vec<Record> = t0
        .records()
        .iter()
        .map(|r| {
            let mut qi = r.qi.clone();
            qi.extend(std::iter::repeat_n(PAD_OLD.to_string(), extra));
            Record::new(qi, r.sa.clone())
        })
        .collect();
    records.extend((n..rows).map(|_| Record::new(vec![PAD_NEW.to_string(); m + extra], PAD_NEW)));
    Table::new(names, t0.sa_name().to_string(), records)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScaledReport {
    pub source_optimum: u64,
    pub scaled_optimum: u64,
    pub scaled_rows: usize,
    pub scaled_k: usize,
}

impl ScaledReport {
    pub fn holds(&self) -> bool {
        self.source_optimum == self.scaled_optimum
    }
}

/// Optimal `(n/2)`-anonymity of `t0` against optimal `⌈c n'⌉`-anonymity of
/// the scaled table, both by enumeration.
pub fn verify_scaled_identity(t0: &Table, c: &Rational, limits: &Limits) -> Result<ScaledReport> {
    let scaled = gen_scaled_anonymity_table(t0, c)?;
    limits.check_oracle(scaled.len())?;
    let k = fraction_k(c, scaled.len());
    let src = brute_force_k_anonymity(t0, t0.len() / 2, limits)?;
    let dst = brute_force_k_anonymity(&scaled, k, limits)?;
    Ok(ScaledReport {
        source_optimum: src.cost().expect("k = n/2 is feasible"),
        scaled_optimum: dst.cost().expect("k <= n' is feasible"),
        scaled_rows: scaled.len(),
        scaled_k: k,
    })
}

fn check_halfclique_params(g: &Graph, c: &Rational) -> Result<usize> {
    if *c <= Rational::new(1, 3) || *c >= Rational::new(1, 2) {
        return Err(Error::OutOfRange(format!("c must lie strictly between 1/3 and 1/2, got {c}")));
    }
    check_even_order(g)?;
    let rows = rows_for(g.vertex_count(), c);
    if rows <= g.vertex_count() {
        return Err(Error::OutOfRange(format!(
            "n / 2c = {rows} rows leaves no room for an added row; pick a smaller c"
        )));
    }
    Ok(rows)
}

/// Bisection rows for the vertices followed by `⌊n/2c⌋ - n` added rows whose
/// every cell is the row number.
pub fn gen_halfclique_table(g: &Graph, c: &Rational) -> Result<Table> {
    let rows = check_halfclique_params(g, c)?;
    let n = g.vertex_count();
    let m = g.edges().len();
    let mut records: Vec<Record> = (0..n).map(|i| Record::new(incidence_row(g, i), DUMMY_SA)).collect();
    records.extend((n..rows).map(|i| Record::new(vec![(i + 1).to_string(); m], DUMMY_SA)));
    Table::new(edge_columns(g), "sa".into(), records)
}

/// `n' m - (n/2) C(n/2, 2)`: the optimum reaches this iff the graph has a
/// clique on half its vertices.
pub fn halfclique_threshold(g: &Graph, c: &Rational) -> Result<i64> {
    let rows = check_halfclique_params(g, c)?;
    let half = g.vertex_count() / 2;
    Ok((rows * g.edges().len()) as i64 - (half as u128 * binomial(half as u64, 2)) as i64)
}

pub fn has_clique(g: &Graph, size: usize) -> bool {
    let n = g.vertex_count();
    let vertices: Vec<usize> = (0..n).collect();
    let mut found = false;
    for_each_combination(&vertices, size, |set| {
        if found {
            return;
        }
        let vs = crate::enumerate::mask_rows(set);
        found = vs
            .iter()
            .enumerate()
            .all(|(i, &u)| vs[i + 1..].iter().all(|&v| g.has_edge(u, v)));
    });
    found
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HalfCliqueReport {
    pub has_half_clique: bool,
    pub optimum: u64,
    pub threshold: i64,
    pub k: usize,
}

impl HalfCliqueReport {
    pub fn holds(&self) -> bool {
        self.has_half_clique == (self.optimum as i64 <= self.threshold)
    }
}

pub fn verify_halfclique(g: &Graph, c: &Rational, limits: &Limits) -> Result<HalfCliqueReport> {
    let table = gen_halfclique_table(g, c)?;
    limits.check_oracle(table.len())?;
    let k = fraction_k(c, table.len());
    let opt = brute_force_k_anonymity(&table, k, limits)?;
    Ok(HalfCliqueReport {
        has_half_clique: has_clique(g, g.vertex_count() / 2),
        optimum: opt.cost().expect("k <= n' is feasible"),
        threshold: halfclique_threshold(g, c)?,
        k,
    })
}

/// Graph with a clique on half its vertices iff `g` has a `k`-clique: add
/// `2k - n` isolated vertices when `k >= n/2`, otherwise `n - 2k` vertices
/// adjacent to each other and to everything.
pub fn clique_to_halfclique(g: &Graph, k: usize) -> Result<Graph> {
    let n = g.vertex_count();
    if k > n {
        return Err(Error::OutOfRange(format!("k = {k} exceeds the {n} vertices")));
    }
    if 2 * k >= n {
        return Graph::new(2 * k, g.edges().iter().copied());
    }
    let total = 2 * n - 2 * k;
    let mut edges = g.edges().to_vec();
    for u in n..total {
        edges.extend((0..u).map(|v| (v, u)));
    }
    Graph::new(total, edges)
}

/// Clique search on both sides of [`clique_to_halfclique`].
pub fn verify_clique_reduction(g: &Graph, k: usize) -> Result<bool> {
    let h = clique_to_halfclique(g, k)?;
    Ok(has_clique(g, k) == has_clique(&h, h.vertex_count() / 2))
}
