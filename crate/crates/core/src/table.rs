//! Microdata tables, groups, partitions and suppression costs.
//!
//! A table holds `m` quasi-identifier (QI) columns and one sensitive
//! attribute (SA) column. Generalizing a group keeps a QI column iff every
//! row of the group agrees on it and replaces it with `*` otherwise; the
//! group's cost is the number of `*` cells it produces.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// The reserved suppression symbol.
pub const SUPPRESSED: &str = "*";

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Record {
    pub qi: Vec<String>,
    pub sa: String,
}

impl Record {
    pub fn new<Q, S>(qi: Q, sa: S) -> Self
    where
        Q: IntoIterator,
        Q::Item: Into<String>,
        S: Into<String>,
    {
        Record {
            qi: qi.into_iter().map(Into::into).collect(),
            sa: sa.into(),
        }
    }
}

/// Immutable microdata table. Cell values are opaque strings compared for
/// equality only; they are interned into integer codes at construction.
#[derive(Clone)]
pub struct Table {
    qi_names: Vec<String>,
    sa_name: String,
    records: Vec<Record>,
    qi_codes: Vec<Vec<u32>>,
    sa_codes: Vec<u32>,
    sa_values: Vec<String>,
}

impl PartialEq for Table {
    fn eq(&self, other: &Self) -> bool {
        self.qi_names == other.qi_names
            && self.sa_name == other.sa_name
            && self.records == other.records
    }
}

impl Eq for Table {}

impl fmt::Debug for Table {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Table")
            .field("qi_names", &self.qi_names)
            .field("sa_name", &self.sa_name)
            .field("records", &self.records)
            .finish()
    }
}

impl Table {
    pub fn new(qi_names: Vec<String>, sa_name: String, records: Vec<Record>) -> Result<Self> {
        let m = qi_names.len();
        if records.is_empty() {
            return Err(Error::InvalidTable("a table needs at least one record".into()));
        }
        let mut column_dicts: Vec<HashMap<&str, u32>> = vec![HashMap::new(); m];
        let mut sa_dict: HashMap<&str, u32> = HashMap::new();
        let mut sa_values = Vec::new();
        let mut qi_codes = Vec::with_capacity(records.len());
        let mut sa_codes = Vec::with_capacity(records.len());
        for (row, rec) in records.iter().enumerate() {
            if rec.qi.len() != m {
                return Err(Error::InvalidTable(format!(
                    "row {row} has {} QI cells, expected {m}",
                    rec.qi.len()
                )));
            }
            let mut codes = Vec::with_capacity(m);
            for (col, value) in rec.qi.iter().enumerate() {
                if value == SUPPRESSED {
                    return Err(Error::InvalidTable(format!(
                        "row {row}, QI column {col} holds the reserved symbol `*`"
                    )));
                }
                let dict = &mut column_dicts[col];
                let next = dict.len() as u32;
                codes.push(*dict.entry(value.as_str()).or_insert(next));
            }
            if rec.sa == SUPPRESSED {
                return Err(Error::InvalidTable(format!(
                    "row {row}: the SA cell holds the reserved symbol `*`"
                )));
            }
            let next = sa_dict.len() as u32;
            let code = *sa_dict.entry(rec.sa.as_str()).or_insert_with(|| {
                sa_values.push(rec.sa.clone());
                next
            });
            qi_codes.push(codes);
            sa_codes.push(code);
        }
        Ok(Table {
            qi_names,
            sa_name,
            records,
            qi_codes,
            sa_codes,
            sa_values,
        })
    }

    /// Convenience constructor with generated column names `q1..qm` / `sa`.
    pub fn from_records(records: Vec<Record>) -> Result<Self> {
        let m = records.first().map(|r| r.qi.len()).unwrap_or(0);
        let names = (1..=m).map(|i| format!("q{i}")).collect();
        Table::new(names, "sa".into(), records)
    }

    /// Number of rows, `n`.
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Number of QI columns, `m`.
    pub fn num_qi(&self) -> usize {
        self.qi_names.len()
    }

    pub fn qi_names(&self) -> &[String] {
        &self.qi_names
    }

    pub fn sa_name(&self) -> &str {
        &self.sa_name
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn record(&self, row: usize) -> &Record {
        &self.records[row]
    }

    /// Distinct SA values in order of first appearance.
    pub fn sa_values(&self) -> &[String] {
        &self.sa_values
    }

    /// Index of the row's SA value within [`Table::sa_values`].
    pub fn sa_code(&self, row: usize) -> usize {
        self.sa_codes[row] as usize
    }

    pub fn qi_code(&self, row: usize, col: usize) -> u32 {
        self.qi_codes[row][col]
    }

    fn qi_row_codes(&self, row: usize) -> &[u32] {
        &self.qi_codes[row]
    }

    /// Size of the alphabet `Σ`: distinct values over all QI columns and the
    /// SA column.
    pub fn alphabet_size(&self) -> usize {
        let mut seen: std::collections::HashSet<&str> = std::collections::HashSet::new();
        for r in &self.records {
            seen.extend(r.qi.iter().map(String::as_str));
            seen.insert(r.sa.as_str());
        }
        seen.len()
    }

    /// Same QI data with SA column replaced.
    pub fn with_sa_values(&self, sa: Vec<String>) -> Result<Table> {
        if sa.len() != self.len() {
            return Err(Error::InvalidTable(format!(
                "expected {} SA values, got {}",
                self.len(),
                sa.len()
            )));
        }
        let records = self
            .records
            .iter()
            .zip(sa)
            .map(|(r, s)| Record { qi: r.qi.clone(), sa: s })
            .collect();
        Table::new(self.qi_names.clone(), self.sa_name.clone(), records)
    }

    fn check_group(&self, group: &Group) -> Result<()> {
        if let Some(&bad) = group.rows().iter().find(|&&r| r >= self.len()) {
            return Err(Error::InvalidGroup(format!(
                "row index {bad} out of range for a table of {} rows",
                self.len()
            )));
        }
        Ok(())
    }

    /// QI columns on which the rows of `group` do not all agree.
    fn conflicting_columns(&self, rows: &[usize]) -> Vec<bool> {
        let first = self.qi_row_codes(rows[0]);
        let mut conflict = vec![false; self.num_qi()];
        for &r in &rows[1..] {
            for (c, (&a, &b)) in first.iter().zip(self.qi_row_codes(r)).enumerate() {
                if a != b {
                    conflict[c] = true;
                }
            }
        }
        conflict
    }
}

/// A non-empty set of row indices, stored sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Group(Vec<usize>);

impl Group {
    pub fn new(rows: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut rows: Vec<usize> = rows.into_iter().collect();
        if rows.is_empty() {
            return Err(Error::InvalidGroup("group is empty".into()));
        }
        rows.sort_unstable();
        if rows.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidGroup("group repeats a row index".into()));
        }
        Ok(Group(rows))
    }

    /// Rows whose bits are set in `mask`; `mask` must be non-zero.
    pub fn from_mask(mask: u64) -> Self {
        debug_assert!(mask != 0);
        Group((0..64).filter(|b| mask >> b & 1 == 1).collect())
    }

    pub fn rows(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn min_row(&self) -> usize {
        self.0[0]
    }

    /// Bit mask of the rows; only valid when every index is below 64.
    pub fn mask(&self) -> u64 {
        self.0.iter().fold(0u64, |m, &r| m | 1 << r)
    }
}

/// A collection of groups. Constructing one does not check it against a
/// table; see [`validate_partition`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    groups: Vec<Group>,
}

impl Partition {
    pub fn new(groups: Vec<Group>) -> Self {
        Partition { groups }
    }

    pub fn singletons(n: usize) -> Self {
        Partition {
            groups: (0..n).map(|r| Group(vec![r])).collect(),
        }
    }

    pub fn whole(n: usize) -> Self {
        Partition {
            groups: vec![Group((0..n).collect())],
        }
    }

    pub fn from_masks(masks: impl IntoIterator<Item = u64>) -> Self {
        Partition::new(masks.into_iter().map(Group::from_mask).collect()).canonical()
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// Groups ordered by their smallest row index.
    pub fn canonical(mut self) -> Self {
        self.groups.sort_by_key(Group::min_row);
        self
    }

    /// Group index of every row; `None` for rows not covered.
    pub fn assignment(&self, n: usize) -> Vec<Option<usize>> {
        let mut owner = vec![None; n];
        for (g, group) in self.groups.iter().enumerate() {
            for &r in group.rows() {
                if r < n {
                    owner[r] = Some(g);
                }
            }
        }
        owner
    }
}

/// Why a partition is not a partition of a given table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PartitionViolation {
    EmptyGroup { group: usize },
    RowOutOfRange { group: usize, row: usize },
    DuplicateRow { row: usize },
    MissingRows { count: usize, first: usize },
}

impl PartitionViolation {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            PartitionViolation::EmptyGroup { .. } => "empty-group",
            PartitionViolation::RowOutOfRange { .. } => "row-out-of-range",
            PartitionViolation::DuplicateRow { .. } => "duplicate-row",
            PartitionViolation::MissingRows { .. } => "missing-rows",
        }
    }
}

impl fmt::Display for PartitionViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PartitionViolation::EmptyGroup { group } => write!(f, "group {group} is empty"),
            PartitionViolation::RowOutOfRange { group, row } => {
                write!(f, "group {group} names row {row}, which does not exist")
            }
            PartitionViolation::DuplicateRow { row } => {
                write!(f, "row {row} appears in more than one group")
            }
            PartitionViolation::MissingRows { count, first } => {
                write!(f, "{count} row(s) are not covered, starting with row {first}")
            }
        }
    }
}

/// Checks that the groups are non-empty, pairwise disjoint and cover every
/// row of `table`.
pub fn validate_partition(
    table: &Table,
    partition: &Partition,
) -> std::result::Result<(), PartitionViolation> {
    let n = table.len();
    let mut seen = vec![false; n];
    for (g, group) in partition.groups().iter().enumerate() {
        if group.is_empty() {
            return Err(PartitionViolation::EmptyGroup { group: g });
        }
        for &row in group.rows() {
            if row >= n {
                return Err(PartitionViolation::RowOutOfRange { group: g, row });
            }
            if std::mem::replace(&mut seen[row], true) {
                return Err(PartitionViolation::DuplicateRow { row });
            }
        }
    }
    let missing: Vec<usize> = (0..n).filter(|&r| !seen[r]).collect();
    if let Some(&first) = missing.first() {
        return Err(PartitionViolation::MissingRows {
            count: missing.len(),
            first,
        });
    }
    Ok(())
}

pub fn is_valid_partition(table: &Table, partition: &Partition) -> bool {
    validate_partition(table, partition).is_ok()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Cell {
    Value(String),
    Suppressed,
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Value(v) => f.write_str(v),
            Cell::Suppressed => f.write_str(SUPPRESSED),
        }
    }
}

/// A record after suppression: QI cells may be `*`, the SA never is.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GeneralizedRecord {
    pub qi: Vec<Cell>,
    pub sa: String,
}

impl GeneralizedRecord {
    pub fn cost(&self) -> u64 {
        self.qi.iter().filter(|c| matches!(c, Cell::Suppressed)).count() as u64
    }
}

/// Generalizes one group. Returns the suppressors in the group's row order
/// and the group's cost, `|group| x (number of suppressed columns)`.
pub fn suppress_group(table: &Table, group: &Group) -> Result<(Vec<GeneralizedRecord>, u64)> {
    if group.is_empty() {
        return Err(Error::InvalidGroup("group is empty".into()));
    }
    table.check_group(group)?;
    let conflict = table.conflicting_columns(group.rows());
    let starred = conflict.iter().filter(|&&c| c).count() as u64;
    let generalized = group
        .rows()
        .iter()
        .map(|&r| {
            let rec = table.record(r);
            GeneralizedRecord {
                qi: rec
                    .qi
                    .iter()
                    .zip(&conflict)
                    .map(|(v, &c)| if c { Cell::Suppressed } else { Cell::Value(v.clone()) })
                    .collect(),
                sa: rec.sa.clone(),
            }
        })
        .collect();
    Ok((generalized, starred * group.len() as u64))
}

pub fn group_cost(table: &Table, group: &Group) -> Result<u64> {
    if group.is_empty() {
        return Err(Error::InvalidGroup("group is empty".into()));
    }
    table.check_group(group)?;
    let starred = table
        .conflicting_columns(group.rows())
        .into_iter()
        .filter(|&c| c)
        .count() as u64;
    Ok(starred * group.len() as u64)
}

/// Total cost of a partition; rejects partitions that do not fit `table`.
pub fn partition_cost(table: &Table, partition: &Partition) -> Result<u64> {
    validate_partition(table, partition).map_err(|v| Error::InvalidPartition(v.to_string()))?;
    partition
        .groups()
        .iter()
        .map(|g| group_cost(table, g))
        .sum()
}

/// Generalized table in original row order.
pub fn generalize(table: &Table, partition: &Partition) -> Result<Vec<GeneralizedRecord>> {
    validate_partition(table, partition).map_err(|v| Error::InvalidPartition(v.to_string()))?;
    let mut out: Vec<Option<GeneralizedRecord>> = vec![None; table.len()];
    for group in partition.groups() {
        let (recs, _) = suppress_group(table, group)?;
        for (&r, rec) in group.rows().iter().zip(recs) {
            out[r] = Some(rec);
        }
    }
    Ok(out.into_iter().map(|r| r.expect("validated partition covers all rows")).collect())
}

/// Which columns define "identical" rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClassKey {
    /// QI columns only; what k-anonymity cares about.
    #[default]
    QiOnly,
    /// QI columns and the SA.
    FullRecord,
}

/// Groups of identical rows, sorted by size and then by smallest row index.
pub fn equivalence_classes(table: &Table, key: ClassKey) -> Vec<Group> {
    let mut index: HashMap<(Vec<u32>, Option<u32>), usize> = HashMap::new();
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for row in 0..table.len() {
        let sa = match key {
            ClassKey::QiOnly => None,
            ClassKey::FullRecord => Some(table.sa_codes[row]),
        };
        let k = (table.qi_row_codes(row).to_vec(), sa);
        let next = classes.len();
        let slot = *index.entry(k).or_insert(next);
        if slot == next {
            classes.push(Vec::new());
        }
        classes[slot].push(row);
    }
    let mut groups: Vec<Group> = classes.into_iter().map(Group).collect();
    groups.sort_by_key(|g| (g.len(), g.min_row()));
    groups
}

/// Bit-mask group costs for tables of at most 64 rows.
///
/// For each column and value the mask of rows holding that value is kept,
/// so a column is uniform on a mask iff the mask is contained in the value
/// mask of its lowest row.
#[derive(Debug, Clone)]
pub struct MaskCosts {
    n: usize,
    m: usize,
    // value_masks[col][row] = mask of rows sharing row's value in col
    value_masks: Vec<Vec<u64>>,
}

impl MaskCosts {
    pub const MAX_ROWS: usize = 64;

    pub fn new(table: &Table) -> Result<Self> {
        let n = table.len();
        if n > Self::MAX_ROWS {
            return Err(Error::TooLarge {
                what: "rows for bit-mask costing",
                actual: n as u128,
                limit: Self::MAX_ROWS as u128,
            });
        }
        let m = table.num_qi();
        let mut value_masks = vec![vec![0u64; n]; m];
        for (col, masks) in value_masks.iter_mut().enumerate() {
            let mut by_value: HashMap<u32, u64> = HashMap::new();
            for row in 0..n {
                *by_value.entry(table.qi_code(row, col)).or_default() |= 1 << row;
            }
            for (row, slot) in masks.iter_mut().enumerate() {
                *slot = by_value[&table.qi_code(row, col)];
            }
        }
        Ok(MaskCosts { n, m, value_masks })
    }

    pub fn rows(&self) -> usize {
        self.n
    }

    /// Number of QI columns that must be suppressed for the rows in `mask`.
    pub fn starred_columns(&self, mask: u64) -> u64 {
        if mask == 0 {
            return 0;
        }
        let low = mask.trailing_zeros() as usize;
        (0..self.m)
            .filter(|&c| mask & !self.value_masks[c][low] != 0)
            .count() as u64
    }

    pub fn cost(&self, mask: u64) -> u64 {
        self.starred_columns(mask) * u64::from(mask.count_ones())
    }
}
