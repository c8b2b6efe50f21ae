//! Normalized metric spaces over SA values and Earth-Mover Distance.
//!
//! Everything here is exact: distributions, distances and EMD values are
//! [`Rational`]s, so a closeness test `EMD <= t` is decided without rounding
//! even when the EMD sits exactly on the threshold.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::table::{Group, Table};
use crate::transport::min_cost_transport;

/// Checks the four axioms of a normalized metric on a square matrix:
/// zero diagonal, symmetry, triangle inequality and maximum distance 1.
pub fn validate_space(dist: &[Vec<Rational>]) -> bool {
    space_violation(dist).is_none()
}

fn space_violation(dist: &[Vec<Rational>]) -> Option<String> {
    let s = dist.len();
    if s == 0 {
        return Some("the space has no points".into());
    }
    if let Some(i) = dist.iter().position(|row| row.len() != s) {
        return Some(format!("row {i} has {} entries, expected {s}", dist[i].len()));
    }
    for i in 0..s {
        if !dist[i][i].is_zero() {
            return Some(format!("d({0},{0}) = {1} is not 0", i + 1, dist[i][i]));
        }
        for j in 0..s {
            if dist[i][j].is_negative() {
                return Some(format!("d({},{}) is negative", i + 1, j + 1));
            }
            if dist[i][j] != dist[j][i] {
                return Some(format!("d({0},{1}) != d({1},{0})", i + 1, j + 1));
            }
            for k in 0..s {
                if &dist[i][j] + &dist[j][k] < dist[i][k] {
                    return Some(format!(
                        "triangle inequality fails for ({},{},{})",
                        i + 1,
                        j + 1,
                        k + 1
                    ));
                }
            }
        }
    }
    let max = dist.iter().flatten().max().expect("non-empty");
    if s > 1 && *max != Rational::one() {
        return Some(format!("maximum distance is {max}, not 1"));
    }
    None
}

/// A normalized metric space `(Σ_s, d)` over labelled SA values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SaSpace {
    labels: Vec<String>,
    dist: Vec<Vec<Rational>>,
    index: HashMap<String, usize>,
}

impl SaSpace {
    pub fn new(labels: Vec<String>, dist: Vec<Vec<Rational>>) -> Result<Self> {
        if labels.len() != dist.len() {
            return Err(Error::InvalidSpace(format!(
                "{} labels for a {}x{} matrix",
                labels.len(),
                dist.len(),
                dist.len()
            )));
        }
        if let Some(why) = space_violation(&dist) {
            return Err(Error::InvalidSpace(why));
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(Error::InvalidSpace(format!("duplicate label `{l}`")));
            }
        }
        Ok(SaSpace { labels, dist, index })
    }

    /// Every pair of distinct values at distance exactly 1.
    pub fn equal_distance(labels: Vec<String>) -> Result<Self> {
        let s = labels.len();
        let dist = (0..s)
            .map(|i| {
                (0..s)
                    .map(|j| if i == j { Rational::zero() } else { Rational::one() })
                    .collect()
            })
            .collect();
        SaSpace::new(labels, dist)
    }

    /// Equal-distance space labelled `1..=s`.
    pub fn equal_distance_numbered(s: usize) -> Result<Self> {
        SaSpace::equal_distance((1..=s).map(|i| i.to_string()).collect())
    }

    /// Equal-distance space over the SA values of `table`, in first-appearance order.
    pub fn equal_distance_for(table: &Table) -> Self {
        SaSpace::equal_distance(table.sa_values().to_vec()).expect("labels are distinct")
    }

    /// Four points: `1, 2, 3` pairwise at distance 1 and a hub `4` at
    /// distance 1/2 from each of them.
    pub fn hub_four_point() -> Self {
        let one = Rational::one();
        let half = Rational::new(1, 2);
        let zero = Rational::zero();
        let mut dist = vec![vec![one.clone(); 4]; 4];
        for (i, row) in dist.iter_mut().enumerate() {
            row[i] = zero.clone();
            if i < 3 {
                row[3] = half.clone();
            } else {
                row[..3].fill(half.clone());
            }
        }
        SaSpace::new((1..=4).map(|i| i.to_string()).collect(), dist).expect("valid metric")
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn distance(&self, i: usize, j: usize) -> &Rational {
        &self.dist[i][j]
    }

    pub fn matrix(&self) -> &[Vec<Rational>] {
        &self.dist
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn is_equal_distance(&self) -> bool {
        (0..self.len()).all(|i| (0..self.len()).all(|j| i == j || self.dist[i][j] == Rational::one()))
    }

    /// For each row of `table`, the index of its SA value in this space.
    pub fn row_indices(&self, table: &Table) -> Result<Vec<usize>> {
        let by_code: Vec<usize> = table
            .sa_values()
            .iter()
            .map(|v| self.index_of(v).ok_or_else(|| Error::UnknownSaValue(v.clone())))
            .collect::<Result<_>>()?;
        Ok((0..table.len()).map(|r| by_code[table.sa_code(r)]).collect())
    }

    /// Text form: `s`, a label line, then `s` rows of rationals.
    pub fn to_spec_string(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{}", self.len()).unwrap();
        writeln!(out, "{}", self.labels.join(" ")).unwrap();
        for row in &self.dist {
            let cells: Vec<String> = row.iter().map(Rational::to_string).collect();
            writeln!(out, "{}", cells.join(" ")).unwrap();
        }
        out
    }
}

/// A metric-space spec file, before it is bound to a table.
///
/// `equal <s>` names an equal-distance space without labels; it is bound to
/// a table's SA values in first-appearance order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpaceSpec {
    Equal(Option<usize>),
    Matrix(SaSpace),
}

impl SpaceSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let first = lines
            .next()
            .ok_or_else(|| Error::Parse("empty space file".into()))?;
        let mut head = first.split_whitespace();
        let word = head.next().unwrap_or_default();
        if word == "equal" {
            let size = match head.next() {
                Some(tok) => Some(tok.parse::<usize>().map_err(|_| {
                    Error::Parse(format!("bad size `{tok}` after `equal`"))
                })?),
                None => None,
            };
            if size == Some(0) {
                return Err(Error::Parse("`equal 0` has no points".into()));
            }
            return Ok(SpaceSpec::Equal(size));
        }
        let s: usize = word
            .parse()
            .map_err(|_| Error::Parse(format!("expected `equal <s>` or a size, got `{first}`")))?;
        let labels: Vec<String> = lines
            .next()
            .ok_or_else(|| Error::Parse("missing label line".into()))?
            .split_whitespace()
            .map(str::to_owned)
            .collect();
        if labels.len() != s {
            return Err(Error::Parse(format!("expected {s} labels, got {}", labels.len())));
        }
        let mut dist = Vec::with_capacity(s);
        for i in 0..s {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("missing matrix row {}", i + 1)))?;
            let row: Vec<Rational> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<Result<_>>()?;
            if row.len() != s {
                return Err(Error::Parse(format!(
                    "matrix row {} has {} entries, expected {s}",
                    i + 1,
                    row.len()
                )));
            }
            dist.push(row);
        }
        if let Some(extra) = lines.next() {
            return Err(Error::Parse(format!("trailing content: `{extra}`")));
        }
        Ok(SpaceSpec::Matrix(SaSpace::new(labels, dist)?))
    }

    /// Binds the spec to a table's SA values.
    pub fn resolve(&self, table: &Table) -> Result<SaSpace> {
        match self {
            SpaceSpec::Matrix(space) => {
                space.row_indices(table)?;
                Ok(space.clone())
            }
            SpaceSpec::Equal(size) => {
                let mut labels = table.sa_values().to_vec();
                if let Some(s) = *size {
                    if s < labels.len() {
                        return Err(Error::InvalidSpace(format!(
                            "`equal {s}` is smaller than the {} SA values of the table",
                            labels.len()
                        )));
                    }
                    let mut k = 1;
                    while labels.len() < s {
                        let l = format!("#unused{k}");
                        k += 1;
                        if !labels.contains(&l) {
                            labels.push(l);
                        }
                    }
                }
                SaSpace::equal_distance(labels)
            }
        }
    }

    /// Space for bare distribution vectors of dimension `dim`.
    pub fn resolve_dimension(&self, dim: usize) -> Result<SaSpace> {
        match self {
            SpaceSpec::Matrix(space) => {
                if space.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: space.len(),
                        got: dim,
                    });
                }
                Ok(space.clone())
            }
            SpaceSpec::Equal(size) => {
                if let Some(s) = *size {
                    if s != dim {
                        return Err(Error::DimensionMismatch { expected: s, got: dim });
                    }
                }
                SaSpace::equal_distance_numbered(dim)
            }
        }
    }
}

/// A probability vector over SA values: non-negative entries summing to 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DistributionVector(Vec<Rational>);

impl DistributionVector {
    pub fn new(mass: Vec<Rational>) -> Result<Self> {
        if mass.is_empty() {
            return Err(Error::InvalidDistribution("no coordinates".into()));
        }
        if let Some(bad) = mass.iter().find(|x| x.is_negative()) {
            return Err(Error::InvalidDistribution(format!("negative entry {bad}")));
        }
        let total: Rational = mass.iter().sum();
        if total != Rational::one() {
            return Err(Error::InvalidDistribution(format!("entries sum to {total}, not 1")));
        }
        Ok(DistributionVector(mass))
    }

    /// Normalized histogram; `counts` must not be all zero.
    pub fn from_counts(counts: &[u64]) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::InvalidDistribution("empty histogram".into()));
        }
        let total = total as i64;
        Ok(DistributionVector(
            counts.iter().map(|&c| Rational::new(c as i64, total)).collect(),
        ))
    }

    /// All mass on coordinate `i`.
    pub fn indicator(dim: usize, i: usize) -> Self {
        let mut v = vec![Rational::zero(); dim];
        v[i] = Rational::one();
        DistributionVector(v)
    }

    /// Comma-separated rationals, e.g. `1/2,1/2,0`.
    pub fn parse(text: &str) -> Result<Self> {
        let mass = text
            .split(',')
            .map(str::parse)
            .collect::<Result<Vec<Rational>>>()?;
        DistributionVector::new(mass)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn mass(&self) -> &[Rational] {
        &self.0
    }
}

impl std::fmt::Display for DistributionVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(Rational::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

/// SA value counts of a set of rows, indexed like `space`.
pub fn sa_histogram(table: &Table, rows: &[usize], space: &SaSpace) -> Result<Vec<u64>> {
    let idx = space.row_indices(table)?;
    let mut counts = vec![0u64; space.len()];
    for &r in rows {
        if r >= table.len() {
            return Err(Error::InvalidGroup(format!("row index {r} out of range")));
        }
        counts[idx[r]] += 1;
    }
    Ok(counts)
}

/// `P(group)`: the fraction of rows carrying each SA value of `space`.
pub fn distribution(table: &Table, group: &Group, space: &SaSpace) -> Result<DistributionVector> {
    if group.is_empty() {
        return Err(Error::InvalidGroup("group is empty".into()));
    }
    DistributionVector::from_counts(&sa_histogram(table, group.rows(), space)?)
}

/// `P(T)` for the whole table.
pub fn table_distribution(table: &Table, space: &SaSpace) -> Result<DistributionVector> {
    let rows: Vec<usize> = (0..table.len()).collect();
    DistributionVector::from_counts(&sa_histogram(table, &rows, space)?)
}

fn same_dim(x: &DistributionVector, y: &DistributionVector) -> Result<()> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            got: y.dim(),
        });
    }
    Ok(())
}

/// EMD in the equal-distance space: total variation distance,
/// the sum of `x[i] - y[i]` over coordinates where `x[i] >= y[i]`.
pub fn emd_equal_distance(x: &DistributionVector, y: &DistributionVector) -> Result<Rational> {
    same_dim(x, y)?;
    Ok(x.mass()
        .iter()
        .zip(y.mass())
        .filter(|(a, b)| a >= b)
        .map(|(a, b)| a - b)
        .sum())
}

/// EMD under an arbitrary normalized metric: the optimum of the
/// transportation LP, solved exactly.
pub fn emd_general(x: &DistributionVector, y: &DistributionVector, space: &SaSpace) -> Result<Rational> {
    same_dim(x, y)?;
    if x.dim() != space.len() {
        return Err(Error::DimensionMismatch {
            expected: space.len(),
            got: x.dim(),
        });
    }
    Ok(min_cost_transport(x.mass(), y.mass(), space.matrix()))
}

/// Closed form for the four-point hub space ([`SaSpace::hub_four_point`]):
/// with `a4 >= b4` (swapping if needed), `(a4 - b4)/2 + sum_{i<=3, a_i >= b_i} (a_i - b_i)`.
pub fn emd_four_point(a: &DistributionVector, b: &DistributionVector) -> Result<Rational> {
    same_dim(a, b)?;
    if a.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: a.dim(),
        });
    }
    let (a, b) = if a.mass()[3] >= b.mass()[3] { (a, b) } else { (b, a) };
    let (a, b) = (a.mass(), b.mass());
    let hub = (&a[3] - &b[3]) * Rational::new(1, 2);
    let rest: Rational = (0..3).filter(|&i| a[i] >= b[i]).map(|i| &a[i] - &b[i]).sum();
    Ok(hub + rest)
}

/// Whether `EMD(P(group), P(table)) <= t`.
pub fn check_closeness(table: &Table, group: &Group, t: &Rational, space: &SaSpace) -> Result<bool> {
    Ok(group_emd(table, group, space)? <= *t)
}

/// `EMD(P(group), P(table))`.
pub fn group_emd(table: &Table, group: &Group, space: &SaSpace) -> Result<Rational> {
    let p = distribution(table, group, space)?;
    let q = table_distribution(table, space)?;
    emd_general(&p, &q, space)
}

/// Memoized closeness test keyed by SA histogram.
///
/// Solvers ask the same question for many groups with the same histogram;
/// the answer depends on nothing else.
pub struct ClosenessCache<'a> {
    space: &'a SaSpace,
    target: DistributionVector,
    t: Rational,
    sa_index: Vec<usize>,
    memo: HashMap<Vec<u64>, bool>,
}

impl<'a> ClosenessCache<'a> {
    pub fn new(table: &Table, space: &'a SaSpace, t: Rational) -> Result<Self> {
        Ok(ClosenessCache {
            space,
            target: table_distribution(table, space)?,
            t,
            sa_index: space.row_indices(table)?,
            memo: HashMap::new(),
        })
    }

    pub fn threshold(&self) -> &Rational {
        &self.t
    }

    /// SA index of each table row.
    pub fn sa_index(&self) -> &[usize] {
        &self.sa_index
    }

    pub fn space(&self) -> &SaSpace {
        self.space
    }

    pub fn is_close_counts(&mut self, counts: &[u64]) -> bool {
        if let Some(&v) = self.memo.get(counts) {
            return v;
        }
        let p = DistributionVector::from_counts(counts).expect("non-empty group");
        let emd = emd_general(&p, &self.target, self.space).expect("dimensions agree");
        let ok = emd <= self.t;
        self.memo.insert(counts.to_vec(), ok);
        ok
    }

    pub fn is_close_mask(&mut self, mask: u64) -> bool {
        let mut counts = vec![0u64; self.space.len()];
        let mut m = mask;
        while m != 0 {
            let r = m.trailing_zeros() as usize;
            counts[self.sa_index[r]] += 1;
            m &= m - 1;
        }
        self.is_close_counts(&counts)
    }

    pub fn is_close_rows(&mut self, rows: &[usize]) -> bool {
        let mut counts = vec![0u64; self.space.len()];
        for &r in rows {
            counts[self.sa_index[r]] += 1;
        }
        self.is_close_counts(&counts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::Record;

    fn r(p: i64, q: i64) -> Rational {
        Rational::new(p, q)
    }

    fn dv(v: &[(i64, i64)]) -> DistributionVector {
        DistributionVector::new(v.iter().map(|&(p, q)| r(p, q)).collect()).unwrap()
    }

    #[test]
    fn space_axioms() {
        assert!(validate_space(SaSpace::equal_distance_numbered(3).unwrap().matrix()));
        assert!(validate_space(SaSpace::hub_four_point().matrix()));
        let half = vec![vec![r(0, 1), r(1, 2)], vec![r(1, 2), r(0, 1)]];
        assert!(!validate_space(&half));
        let asym = vec![vec![r(0, 1), r(1, 1)], vec![r(1, 2), r(0, 1)]];
        assert!(!validate_space(&asym));
        let diag = vec![vec![r(1, 1), r(1, 1)], vec![r(1, 1), r(0, 1)]];
        assert!(!validate_space(&diag));
        // d(0,1) + d(1,2) = 1/2 < d(0,2) = 1
        let tri = vec![
            vec![r(0, 1), r(1, 4), r(1, 1)],
            vec![r(1, 4), r(0, 1), r(1, 4)],
            vec![r(1, 1), r(1, 4), r(0, 1)],
        ];
        assert!(!validate_space(&tri));
    }

    #[test]
    fn distribution_rejects_unknown_values() {
        let t = Table::from_records(vec![Record::new(["a"], "x"), Record::new(["b"], "y")]).unwrap();
        let space = SaSpace::equal_distance(vec!["x".into()]).unwrap();
        let err = distribution(&t, &Group::new([0, 1]).unwrap(), &space).unwrap_err();
        assert_eq!(err, Error::UnknownSaValue("y".into()));
    }

    #[test]
    fn singleton_distribution_is_an_indicator() {
        let t = Table::from_records(vec![Record::new(["a"], "x"), Record::new(["b"], "y")]).unwrap();
        let space = SaSpace::equal_distance_for(&t);
        let p = distribution(&t, &Group::new([1]).unwrap(), &space).unwrap();
        assert_eq!(p, DistributionVector::indicator(2, 1));
    }

    #[test]
    fn distribution_vectors_must_sum_to_one() {
        assert!(DistributionVector::parse("1/2,1/3").is_err());
        assert!(DistributionVector::parse("3/2,-1/2").is_err());
        assert_eq!(DistributionVector::parse("0.3,0.3,0.4").unwrap(), dv(&[(3, 10), (3, 10), (2, 5)]));
    }

    #[test]
    fn equal_distance_examples() {
        let x = dv(&[(1, 2), (1, 2), (0, 1)]);
        let y = dv(&[(3, 10), (3, 10), (4, 10)]);
        assert_eq!(emd_equal_distance(&x, &y).unwrap(), r(2, 5));
        assert_eq!(emd_equal_distance(&x, &x).unwrap(), r(0, 1));
        // size-1 group against uniform over 4 values
        let uni = dv(&[(1, 4), (1, 4), (1, 4), (1, 4)]);
        assert_eq!(emd_equal_distance(&DistributionVector::indicator(4, 0), &uni).unwrap(), r(3, 4));
        assert!(emd_equal_distance(&x, &uni).is_err());
    }

    #[test]
    fn hub_space_examples() {
        let space = SaSpace::hub_four_point();
        for t in [r(1, 3), r(2, 5), r(9, 20)] {
            let w = (Rational::one() - &t * r(2, 1)) * r(1, 3);
            let y = DistributionVector::new(vec![w.clone(), w.clone(), w, &t * r(2, 1)]).unwrap();
            let x = dv(&[(1, 3), (1, 3), (1, 3), (0, 1)]);
            assert_eq!(emd_general(&x, &y, &space).unwrap(), t);
            assert_eq!(emd_four_point(&x, &y).unwrap(), t);
            let single = DistributionVector::indicator(4, 3);
            let half_rest = (Rational::one() - &t * r(2, 1)) * r(1, 2);
            assert_eq!(emd_general(&single, &y, &space).unwrap(), half_rest);
            assert_eq!(emd_four_point(&single, &y).unwrap(), half_rest);
        }
        let a = DistributionVector::indicator(4, 0);
        let b = DistributionVector::indicator(4, 3);
        assert_eq!(emd_four_point(&a, &b).unwrap(), r(1, 2));
        assert_eq!(emd_four_point(&a, &a).unwrap(), r(0, 1));
        assert!(emd_four_point(&dv(&[(1, 1)]), &dv(&[(1, 1)])).is_err());
    }

    #[test]
    fn space_file_forms() {
        assert_eq!(SpaceSpec::parse("equal 3\n").unwrap(), SpaceSpec::Equal(Some(3)));
        assert_eq!(SpaceSpec::parse("equal").unwrap(), SpaceSpec::Equal(None));
        let hub = SaSpace::hub_four_point();
        let text = hub.to_spec_string();
        assert_eq!(SpaceSpec::parse(&text).unwrap(), SpaceSpec::Matrix(hub));
        assert!(SpaceSpec::parse("2\na b\n0 1/2\n1/2 0\n").is_err());
        assert!(SpaceSpec::parse("2\na b\n0 1\n").is_err());
        assert!(SpaceSpec::parse("equal 0").is_err());
    }

    #[test]
    fn equal_spec_binds_to_table_values() {
        let t = Table::from_records(vec![Record::new(["a"], "x"), Record::new(["b"], "y")]).unwrap();
        let s = SpaceSpec::Equal(Some(3)).resolve(&t).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(&s.labels()[..2], &["x".to_string(), "y".to_string()]);
        assert!(SpaceSpec::Equal(Some(1)).resolve(&t).is_err());
    }
}
