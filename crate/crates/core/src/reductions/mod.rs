//! Instance generators for the hardness constructions and verifiers for
//! the cost identities they rely on.
//!
//! Graph and 3DM inputs are 1-based in files and 0-based in memory. Row
//! `i` of a generated table (0-based) stands for vertex or element `i + 1`,
//! and the QI value written for it is `i + 1`.

mod anonymity;
mod matching;

pub use anonymity::{
    bisection_cut_cost, clique_to_halfclique, gen_bisection_table, gen_halfclique_table, gen_scaled_anonymity_table,
    halfclique_threshold, has_clique, min_bisection, scaled_rows, verify_bisection_identity, verify_clique_reduction,
    verify_halfclique, verify_scaled_identity, BisectionReport, HalfCliqueReport, ScaledReport, PAD_NEW, PAD_OLD,
};
pub use matching::{
    four_point_rows, gen_3dm_tclose3, gen_3dm_tclose4, has_perfect_matching, isolated_row_optimum, threedm_threshold,
    verify_3dm_tclose3, verify_3dm_tclose4, MatchingReport,
};

use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// Simple undirected graph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Edges are stored as given, each with its smaller endpoint first.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::Parse(format!("edge ({u}, {v}) leaves the vertex range 0..{n}")));
            }
            if u == v {
                return Err(Error::Parse(format!("self-loop at vertex {u}")));
            }
            let e = (u.min(v), u.max(v));
            if !seen.insert(e) {
                return Err(Error::Parse(format!("duplicate edge ({}, {})", e.0, e.1)));
            }
            out.push(e);
        }
        Ok(Graph { n, edges: out })
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        Graph { n, edges }
    }

    pub fn path(n: usize) -> Self {
        Graph {
            n,
            edges: (1..n).map(|v| (v - 1, v)).collect(),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        let e = (u.min(v), u.max(v));
        self.edges.contains(&e)
    }

    /// Every graph on `n` labelled vertices, one per subset of the
    /// `C(n, 2)` possible edges.
    pub fn all_on(n: usize) -> impl Iterator<Item = Graph> {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        assert!(pairs.len() < 32, "too many graphs to list");
        (0u32..1 << pairs.len()).map(move |bits| Graph {
            n,
            edges: pairs
                .iter()
                .enumerate()
                .filter(|(i, _)| bits >> i & 1 == 1)
                .map(|(_, &e)| e)
                .collect(),
        })
    }

    /// `n m` on the first line, then one `u v` line per edge, 1-based.
    pub fn parse(text: &str) -> Result<Self> {
        let (header, body) = header_and_rows(text, 2)?;
        let (n, m) = (header[0], header[1]);
        if body.len() != m {
            return Err(Error::Parse(format!("expected {m} edges, found {}", body.len())));
        }
        let edges = body
            .iter()
            .map(|r| Ok((one_based(r[0], n)?, one_based(r[1], n)?)))
            .collect::<Result<Vec<_>>>()?;
        Graph::new(n, edges)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.edges.len());
        for (u, v) in &self.edges {
            out.push_str(&format!("{} {}\n", u + 1, v + 1));
        }
        out
    }
}

/// 3-dimensional matching instance over `X`, `Y`, `Z`, each `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThreeDimSystem {
    n: usize,
    tuples: Vec<[usize; 3]>,
}

impl ThreeDimSystem {
    pub fn new(n: usize, tuples: impl IntoIterator<Item = [usize; 3]>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for t in tuples {
            if t.iter().any(|&e| e >= n) {
                return Err(Error::Parse(format!("tuple {t:?} leaves the range 0..{n}")));
            }
            if !seen.insert(t) {
                return Err(Error::Parse(format!("duplicate tuple {t:?}")));
            }
            out.push(t);
        }
        Ok(ThreeDimSystem { n, tuples: out })
    }

    pub fn part_size(&self) -> usize {
        self.n
    }

    pub fn tuples(&self) -> &[[usize; 3]] {
        &self.tuples
    }

    /// Rows (elements of `X ∪ Y ∪ Z`, in that order) covered by a tuple.
    pub fn tuple_rows(&self, t: &[usize; 3]) -> [usize; 3] {
        [t[0], self.n + t[1], 2 * self.n + t[2]]
    }

    /// Every system over parts of size `n`, one per subset of `X × Y × Z`.
    pub fn all_on(n: usize) -> impl Iterator<Item = ThreeDimSystem> {
        let all: Vec<[usize; 3]> = (0..n)
            .flat_map(|x| (0..n).flat_map(move |y| (0..n).map(move |z| [x, y, z])))
            .collect();
        assert!(all.len() < 32, "too many systems to list");
        (0u32..1 << all.len()).map(move |bits| ThreeDimSystem {
            n,
            tuples: all
                .iter()
                .enumerate()
                .filter(|(i, _)| bits >> i & 1 == 1)
                .map(|(_, &t)| t)
                .collect(),
        })
    }

    /// `n m` on the first line, then one `x y z` line per tuple, 1-based.
    pub fn parse(text: &str) -> Result<Self> {
        let (header, body) = header_and_rows(text, 3)?;
        let (n, m) = (header[0], header[1]);
        if body.len() != m {
            return Err(Error::Parse(format!("expected {m} tuples, found {}", body.len())));
        }
        let tuples = body
            .iter()
            .map(|r| Ok([one_based(r[0], n)?, one_based(r[1], n)?, one_based(r[2], n)?]))
            .collect::<Result<Vec<_>>>()?;
        ThreeDimSystem::new(n, tuples)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.tuples.len());
        for t in &self.tuples {
            out.push_str(&format!("{} {} {}\n", t[0] + 1, t[1] + 1, t[2] + 1));
        }
        out
    }
}

fn one_based(v: usize, n: usize) -> Result<usize> {
    if v == 0 || v > n {
        return Err(Error::Parse(format!("index {v} outside 1..={n}")));
    }
    Ok(v - 1)
}

fn header_and_rows(text: &str, width: usize) -> Result<(Vec<usize>, Vec<Vec<usize>>)> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let parse_line = |line: &str, want: usize| -> Result<Vec<usize>> {
        let vals = line
            .split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|_| Error::Parse(format!("bad integer `{t}`"))))
            .collect::<Result<Vec<_>>>()?;
        if vals.len() != want {
            return Err(Error::Parse(format!("expected {want} integers in `{line}`")));
        }
        Ok(vals)
    };
    let header = parse_line(lines.next().ok_or_else(|| Error::Parse("empty input".into()))?, 2)?;
    let rows = lines.map(|l| parse_line(l, width)).collect::<Result<Vec<_>>>()?;
    Ok((header, rows))
}
