//! l-diversity checks and exact 2-diversity.
//!
//! An optimal 2-diverse partition can always be refined into groups of two
//! or three rows with pairwise distinct SA values without raising its cost,
//! so the optimum is a minimum-cost perfect matching in the hypergraph whose
//! edges are such pairs and triples. The matching is found by dynamic
//! programming over row subsets, which is exact but exponential; it stands
//! in for a polynomial simplex-matching algorithm at desk scale.

use std::fmt::Write;

use crate::enumerate::min_cost_partition;
use crate::error::{Error, Result};
use crate::solve::{Limits, SolveResult, SolveStats};
use crate::table::{Group, MaskCosts, Partition, Table};

fn max_multiplicity(table: &Table, rows: &[usize]) -> usize {
    let mut counts = vec![0usize; table.sa_values().len()];
    for &r in rows {
        counts[table.sa_code(r)] += 1;
    }
    counts.into_iter().max().unwrap_or(0)
}

/// True iff no SA value occurs in more than `|group| / l` rows.
pub fn is_l_diverse(table: &Table, group: &Group, l: usize) -> Result<bool> {
    if l == 0 {
        return Err(Error::OutOfRange("l must be at least 1".into()));
    }
    if let Some(&bad) = group.rows().iter().find(|&&r| r >= table.len()) {
        return Err(Error::InvalidGroup(format!("row index {bad} out of range")));
    }
    Ok(max_multiplicity(table, group.rows()) * l <= group.len())
}

/// Splits a 2-diverse group into sub-groups of two or three rows with
/// distinct SA values by repeatedly pairing a row of the most frequent SA
/// value with a row of the second most frequent one. Ties between values go
/// to the value whose lowest remaining row comes first; within a value the
/// lowest row is taken.
pub fn decompose_2diverse_group(table: &Table, group: &Group) -> Result<Partition> {
    if !is_l_diverse(table, group, 2)? {
        return Err(Error::InvalidGroup("the group is not 2-diverse".into()));
    }
    // remaining rows per SA value, ascending
    let mut by_sa: Vec<std::collections::VecDeque<usize>> = vec![Default::default(); table.sa_values().len()];
    for &r in group.rows() {
        by_sa[table.sa_code(r)].push_back(r);
    }
    let mut left = group.len();
    let mut parts = Vec::new();
    while left > 3 {
        let mut order: Vec<usize> = (0..by_sa.len()).filter(|&v| !by_sa[v].is_empty()).collect();
        order.sort_by_key(|&v| (std::cmp::Reverse(by_sa[v].len()), by_sa[v][0]));
        let a = by_sa[order[0]].pop_front().expect("non-empty");
        let b = by_sa[order[1]].pop_front().expect("two values present");
        parts.push(Group::new([a, b])?);
        left -= 2;
    }
    let rest: Vec<usize> = by_sa.into_iter().flatten().collect();
    let rest = Group::new(rest)?;
    assert_eq!(max_multiplicity(table, rest.rows()), 1, "peeling keeps the group 2-diverse");
    parts.push(rest);
    Ok(Partition::new(parts).canonical())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    /// Two or three row indices, ascending.
    pub vertices: Vec<usize>,
    pub cost: u64,
}

/// Hypergraph on the rows: an edge for every pair and triple of rows with
/// pairwise distinct SA values, weighted by the suppression cost of the
/// group. Edges are kept in lexicographic order of their vertex lists, so a
/// pair precedes the triples extending it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimplexHypergraph {
    n: usize,
    edges: Vec<Edge>,
}

impl SimplexHypergraph {
    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn pair_count(&self) -> usize {
        self.edges.iter().filter(|e| e.vertices.len() == 2).count()
    }

    pub fn triple_count(&self) -> usize {
        self.edges.len() - self.pair_count()
    }

    fn pair_cost(&self, a: usize, b: usize) -> Option<u64> {
        let key = [a.min(b), a.max(b)];
        self.edges
            .binary_search_by(|e| e.vertices.as_slice().cmp(&key[..]))
            .ok()
            .map(|i| self.edges[i].cost)
    }

    /// Triples that break the simplex condition: a sub-pair is missing or
    /// the three pair costs add up to more than twice the triple's cost.
    pub fn simplex_violations(&self) -> Vec<&Edge> {
        self.edges
            .iter()
            .filter(|e| e.vertices.len() == 3)
            .filter(|e| {
                let [a, b, c] = [e.vertices[0], e.vertices[1], e.vertices[2]];
                match (self.pair_cost(a, b), self.pair_cost(a, c), self.pair_cost(b, c)) {
                    (Some(x), Some(y), Some(z)) => x + y + z > 2 * e.cost,
                    _ => true,
                }
            })
            .collect()
    }

    pub fn check_simplex(&self) -> bool {
        self.simplex_violations().is_empty()
    }

    /// One line per edge: `e v1,v2[,v3] cost`, zero-based row indices.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for e in &self.edges {
            let vs: Vec<String> = e.vertices.iter().map(usize::to_string).collect();
            let _ = writeln!(out, "e {} {}", vs.join(","), e.cost);
        }
        out
    }
}

pub fn build_simplex_hypergraph(table: &Table) -> Result<SimplexHypergraph> {
    let n = table.len();
    let costs = MaskCosts::new(table)?;
    let sa = |r: usize| table.sa_code(r);
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if sa(a) == sa(b) {
                continue;
            }
            edges.push(Edge {
                vertices: vec![a, b],
                cost: costs.cost(1 << a | 1 << b),
            });
            for c in b + 1..n {
                if sa(c) != sa(a) && sa(c) != sa(b) {
                    edges.push(Edge {
                        vertices: vec![a, b, c],
                        cost: costs.cost(1 << a | 1 << b | 1 << c),
                    });
                }
            }
        }
    }
    Ok(SimplexHypergraph { n, edges })
}

/// Optimal 2-diverse partition as a minimum-cost perfect matching of the
/// simplex hypergraph. `dp[S]` covers the row set `S` by choosing the edge
/// through its lowest row; among equal costs the first edge in order wins.
/// Infeasible exactly when some SA value fills more than half the rows.
pub fn solve_2diversity(table: &Table, limits: &Limits) -> Result<SolveResult> {
    let n = table.len();
    let all: Vec<usize> = (0..n).collect();
    if n < 2 || max_multiplicity(table, &all) * 2 > n {
        return Ok(SolveResult::infeasible(SolveStats::default()));
    }
    limits.check_exact(n)?;
    let h = build_simplex_hypergraph(table)?;
    let masks: Vec<u64> = h.edges.iter().map(|e| e.vertices.iter().fold(0, |m, &v| m | 1 << v)).collect();
    let mut by_low: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, e) in h.edges.iter().enumerate() {
        by_low[e.vertices[0]].push(i);
    }
    let mut dp = Matching {
        masks: &masks,
        costs: h.edges.iter().map(|e| e.cost).collect(),
        by_low,
        memo: vec![None; 1 << n],
        stats: SolveStats::default(),
    };
    let full = (1u64 << n) - 1;
    let cost = dp.solve(full).expect("a 2-diverse table has a perfect matching");
    let mut groups = Vec::new();
    let mut rest = full;
    while rest != 0 {
        let (_, e) = dp.memo[rest as usize].expect("solved").expect("feasible");
        groups.push(masks[e]);
        rest &= !masks[e];
    }
    let stats = dp.stats;
    Ok(SolveResult::feasible(Partition::from_masks(groups), cost, stats))
}

struct Matching<'a> {
    masks: &'a [u64],
    costs: Vec<u64>,
    by_low: Vec<Vec<usize>>,
    // per subset: None = not yet solved, Some(None) = no perfect matching
    memo: Vec<Option<Option<(u64, usize)>>>,
    stats: SolveStats,
}

impl Matching<'_> {
    fn solve(&mut self, set: u64) -> Option<u64> {
        if set == 0 {
            return Some(0);
        }
        if let Some(done) = self.memo[set as usize] {
            return done.map(|(c, _)| c);
        }
        self.stats.nodes += 1;
        let low = set.trailing_zeros() as usize;
        let mut best: Option<(u64, usize)> = None;
        for k in 0..self.by_low[low].len() {
            let e = self.by_low[low][k];
            let m = self.masks[e];
            if m & !set != 0 {
                continue;
            }
            self.stats.subsets += 1;
            if let Some(rest) = self.solve(set & !m) {
                let total = rest + self.costs[e];
                if best.is_none_or(|(b, _)| total < b) {
                    best = Some((total, e));
                }
            }
        }
        self.memo[set as usize] = Some(best);
        best.map(|(c, _)| c)
    }
}

/// Exhaustive l-diversity optimum over all set partitions; first minimum in
/// restricted-growth-string order.
pub fn brute_force_l_diversity(table: &Table, l: usize, limits: &Limits) -> Result<SolveResult> {
    if l == 0 {
        return Err(Error::OutOfRange("l must be at least 1".into()));
    }
    limits.check_oracle(table.len())?;
    let costs = MaskCosts::new(table)?;
    let rows: Vec<usize> = (0..table.len()).collect();
    let (best, visited) = min_cost_partition(&rows, 1, |mask| {
        let g = Group::from_mask(mask);
        (max_multiplicity(table, g.rows()) * l <= g.len()).then(|| costs.cost(mask))
    });
    let stats = SolveStats {
        nodes: visited,
        subsets: 1 << table.len(),
    };
    Ok(match best {
        Some((blocks, cost)) => SolveResult::feasible(Partition::from_masks(blocks), cost, stats),
        None => SolveResult::infeasible(stats),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::Record;

    fn table(rows: &[(&str, &str)]) -> Table {
        Table::from_records(rows.iter().map(|(q, s)| Record::new([*q], *s)).collect()).unwrap()
    }

    #[test]
    fn diversity_checks() {
        let t = table(&[("a", "x"), ("a", "x"), ("b", "y"), ("b", "y")]);
        assert!(is_l_diverse(&t, &Group::new([0, 1, 2, 3]).unwrap(), 2).unwrap());
        assert!(!is_l_diverse(&t, &Group::new([0]).unwrap(), 2).unwrap());
        assert!(!is_l_diverse(&t, &Group::new([0, 1, 2]).unwrap(), 2).unwrap());
        assert!(is_l_diverse(&t, &Group::new([0]).unwrap(), 1).unwrap());
        assert!(is_l_diverse(&t, &Group::new([0]).unwrap(), 0).is_err());
    }

    #[test]
    fn decomposition_pairs_distinct_values() {
        let t = table(&[("a", "x"), ("a", "x"), ("b", "y"), ("b", "y")]);
        let p = decompose_2diverse_group(&t, &Group::new([0, 1, 2, 3]).unwrap()).unwrap();
        let groups: Vec<&[usize]> = p.groups().iter().map(Group::rows).collect();
        assert_eq!(groups, vec![&[0, 2][..], &[1, 3][..]]);
        let t = table(&[("a", "x"), ("a", "y"), ("b", "z")]);
        let p = decompose_2diverse_group(&t, &Group::new([0, 1, 2]).unwrap()).unwrap();
        assert_eq!(p.len(), 1);
        assert!(decompose_2diverse_group(&t, &Group::new([0]).unwrap()).is_err());
    }

    #[test]
    fn same_value_pair_has_no_edges() {
        let t = table(&[("a", "x"), ("b", "x")]);
        let h = build_simplex_hypergraph(&t).unwrap();
        assert!(h.edges().is_empty());
        assert!(!solve_2diversity(&t, &Limits::default()).unwrap().is_feasible());
    }

    #[test]
    fn two_distinct_rows_form_one_pair() {
        let t = table(&[("a", "x"), ("b", "y")]);
        let res = solve_2diversity(&t, &Limits::default()).unwrap();
        assert_eq!(res.cost(), Some(2));
        assert_eq!(res.partition().unwrap(), &Partition::whole(2));
        assert_eq!(build_simplex_hypergraph(&t).unwrap().dump(), "e 0,1 2\n");
    }

    #[test]
    fn odd_tables_use_a_triple() {
        let t = table(&[("a", "x"), ("a", "y"), ("a", "z"), ("b", "x"), ("b", "y")]);
        let res = solve_2diversity(&t, &Limits::default()).unwrap();
        assert_eq!(res.cost(), Some(0));
        let brute = brute_force_l_diversity(&t, 2, &Limits::default()).unwrap();
        assert_eq!(brute.cost(), Some(0));
    }
}
