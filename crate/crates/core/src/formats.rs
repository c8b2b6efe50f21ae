//! Text formats: CSV tables, partition files and `key=value` sidecars.

use std::collections::BTreeSet;
use std::fmt::Write;

use crate::error::{Error, Result};
use crate::solve::{Outcome, SolveResult};
use crate::table::{GeneralizedRecord, Group, Partition, Record, Table};

const QI_PREFIX: &str = "qi:";
const SA_PREFIX: &str = "sa:";

/// Parses a CSV table whose header names each column `qi:<name>` or
/// `sa:<name>`; exactly one SA column is required, anywhere in the row.
///
/// With `split_digits`, a QI column whose values are all ASCII digit
/// strings of one common length of at least two is split into one column
/// per digit, named `<name>.1`, `<name>.2`, ...
pub fn parse_table_csv(text: &str, split_digits: bool) -> Result<Table> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader.headers()?.clone();
    let mut qi_cols = Vec::new();
    let mut qi_names = Vec::new();
    let mut sa: Option<(usize, String)> = None;
    for (i, h) in header.iter().enumerate() {
        if let Some(name) = h.strip_prefix(QI_PREFIX) {
            qi_cols.push(i);
            qi_names.push(name.to_string());
        } else if let Some(name) = h.strip_prefix(SA_PREFIX) {
            if sa.is_some() {
                return Err(Error::Parse("more than one `sa:` column".into()));
            }
            sa = Some((i, name.to_string()));
        } else {
            return Err(Error::Parse(format!(
                "header cell `{h}` must start with `qi:` or `sa:`"
            )));
        }
    }
    let (sa_col, sa_name) = sa.ok_or_else(|| Error::Parse("no `sa:` column in the header".into()))?;

    let mut cells: Vec<Vec<String>> = Vec::new();
    let mut sas = Vec::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec?;
        if rec.len() != header.len() {
            return Err(Error::Parse(format!(
                "data row {} has {} cells, expected {}",
                line + 1,
                rec.len(),
                header.len()
            )));
        }
        cells.push(qi_cols.iter().map(|&c| rec[c].to_string()).collect());
        sas.push(rec[sa_col].to_string());
    }

    if split_digits {
        let mut names = Vec::new();
        let mut split_cells: Vec<Vec<String>> = vec![Vec::new(); cells.len()];
        for (c, name) in qi_names.iter().enumerate() {
            let width = cells.first().map_or(0, |r| r[c].len());
            let splittable = width >= 2
                && cells
                    .iter()
                    .all(|r| r[c].len() == width && r[c].bytes().all(|b| b.is_ascii_digit()));
            if splittable {
                names.extend((1..=width).map(|k| format!("{name}.{k}")));
                for (row, out) in cells.iter().zip(&mut split_cells) {
                    out.extend(row[c].chars().map(|ch| ch.to_string()));
                }
            } else {
                names.push(name.clone());
                for (row, out) in cells.iter().zip(&mut split_cells) {
                    out.push(row[c].clone());
                }
            }
        }
        qi_names = names;
        cells = split_cells;
    }

    let records = cells.into_iter().zip(sas).map(|(q, s)| Record::new(q, s)).collect();
    Table::new(qi_names, sa_name, records)
}

fn write_csv(header: Vec<String>, rows: impl Iterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(&header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

fn header(table: &Table) -> Vec<String> {
    let mut h: Vec<String> = table.qi_names().iter().map(|n| format!("{QI_PREFIX}{n}")).collect();
    h.push(format!("{SA_PREFIX}{}", table.sa_name()));
    h
}

/// CSV text with QI columns first and the SA column last.
pub fn write_table_csv(table: &Table) -> Result<String> {
    write_csv(
        header(table),
        table.records().iter().map(|r| {
            let mut row = r.qi.clone();
            row.push(r.sa.clone());
            row
        }),
    )
}

/// CSV text of a released table; suppressed cells are written as `*`.
pub fn write_generalized_csv(table: &Table, rows: &[GeneralizedRecord]) -> Result<String> {
    write_csv(
        header(table),
        rows.iter().map(|r| {
            let mut row: Vec<String> = r.qi.iter().map(|c| c.to_string()).collect();
            row.push(r.sa.clone());
            row
        }),
    )
}

/// Contents of a partition file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PartitionFile {
    Groups { partition: Partition, cost: Option<u64> },
    Infeasible,
}

/// One line per group with its zero-based rows, then `cost=<int>`; an
/// infeasible result is the single line `infeasible`.
pub fn write_partition(result: &SolveResult) -> String {
    match &result.outcome {
        Outcome::Infeasible => "infeasible\n".to_string(),
        Outcome::Feasible { partition, cost } => {
            let mut out = String::new();
            for g in partition.groups() {
                let rows: Vec<String> = g.rows().iter().map(usize::to_string).collect();
                let _ = writeln!(out, "{}", rows.join(","));
            }
            let _ = writeln!(out, "cost={cost}");
            out
        }
    }
}

pub fn parse_partition(text: &str) -> Result<PartitionFile> {
    let lines: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
    if lines == ["infeasible"] {
        return Ok(PartitionFile::Infeasible);
    }
    let mut groups = Vec::new();
    let mut cost = None;
    for (i, line) in lines.iter().enumerate() {
        if let Some(v) = line.strip_prefix("cost=") {
            if i + 1 != lines.len() {
                return Err(Error::Parse("`cost=` must be the last line".into()));
            }
            cost = Some(
                v.parse::<u64>()
                    .map_err(|_| Error::Parse(format!("bad cost `{v}`")))?,
            );
            continue;
        }
        let rows = line
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad row index `{s}` on line {}", i + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        let distinct: BTreeSet<usize> = rows.iter().copied().collect();
        if distinct.len() != rows.len() {
            return Err(Error::InvalidPartition(format!("line {} repeats a row", i + 1)));
        }
        groups.push(Group::new(rows)?);
    }
    Ok(PartitionFile::Groups {
        partition: Partition::new(groups),
        cost,
    })
}

/// Ordered `key=value` lines.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Metadata {
    entries: Vec<(String, String)>,
}

impl Metadata {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        let value = value.to_string();
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = value,
            None => self.entries.push((key.to_string(), value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut meta = Metadata::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got `{line}`")))?;
            meta.set(k.trim(), v.trim());
        }
        Ok(meta)
    }
}

impl std::fmt::Display for Metadata {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (k, v) in &self.entries {
            writeln!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solve::SolveStats;

    #[test]
    fn csv_round_trip_and_sa_anywhere() {
        let text = "sa:disease,qi:zip,qi:age\nflu,47677,29\ncold,47602,22\n";
        let t = parse_table_csv(text, false).unwrap();
        assert_eq!(t.num_qi(), 2);
        assert_eq!(t.record(1).sa, "cold");
        let out = write_table_csv(&t).unwrap();
        assert_eq!(out, "qi:zip,qi:age,sa:disease\n47677,29,flu\n47602,22,cold\n");
        assert_eq!(parse_table_csv(&out, false).unwrap(), t);
    }

    #[test]
    fn digit_splitting() {
        let text = "qi:zip,qi:age,qi:edu,sa:d\n476,29,BS,flu\n470,3x,MS,cold\n";
        let t = parse_table_csv(text, true).unwrap();
        assert_eq!(t.qi_names(), ["zip.1", "zip.2", "zip.3", "age", "edu"]);
        assert_eq!(t.record(1).qi, ["4", "7", "0", "3x", "MS"]);
    }

    #[test]
    fn header_errors() {
        assert!(parse_table_csv("qi:a,qi:b\n1,2\n", false).is_err());
        assert!(parse_table_csv("qi:a,sa:b,sa:c\n1,2,3\n", false).is_err());
        assert!(parse_table_csv("a,sa:b\n1,2\n", false).is_err());
        assert!(parse_table_csv("qi:a,sa:b\n*,2\n", false).is_err());
        assert!(parse_table_csv("qi:a,sa:b\n", false).is_err());
    }

    #[test]
    fn partition_file_round_trip() {
        let p = Partition::new(vec![Group::new([0, 2]).unwrap(), Group::new([1]).unwrap()]);
        let res = SolveResult::feasible(p.clone(), 4, SolveStats::default());
        let text = write_partition(&res);
        assert_eq!(text, "0,2\n1\ncost=4\n");
        assert_eq!(
            parse_partition(&text).unwrap(),
            PartitionFile::Groups {
                partition: p,
                cost: Some(4)
            }
        );
        let inf = write_partition(&SolveResult::infeasible(SolveStats::default()));
        assert_eq!(parse_partition(&inf).unwrap(), PartitionFile::Infeasible);
        assert!(parse_partition("0,x\n").is_err());
        assert!(parse_partition("cost=3\n0\n").is_err());
    }

    #[test]
    fn metadata_round_trip() {
        let mut m = Metadata::new();
        m.set("threshold", 12);
        m.set("t", "1/3");
        let text = m.to_string();
        assert_eq!(text, "threshold=12\nt=1/3\n");
        assert_eq!(Metadata::parse(&text).unwrap(), m);
        assert_eq!(m.get("t"), Some("1/3"));
    }
}
