//! k-anonymity: every group holds at least `k` rows.

use crate::enumerate::min_cost_partition;
use crate::error::{Error, Result};
use crate::metric::{ClosenessCache, SaSpace};
use crate::rational::Rational;
use crate::solve::{Limits, SolveResult, SolveStats};
use crate::table::{equivalence_classes, partition_cost, ClassKey, Group, MaskCosts, Partition, Record, Table};
use crate::tclose::exact_tclose;

/// Which branch of the approximation produced the partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ApproxCase {
    /// Every QI class already has `k` rows; the classes cost nothing.
    AllLarge,
    /// The small classes together reach `k` and are merged.
    MergeSmall,
    /// The small classes plus rows spared by the large ones make exactly `k`.
    CarveOut,
    /// The small classes absorb the smallest large class.
    AbsorbNext,
}

impl ApproxCase {
    pub fn code(self) -> &'static str {
        match self {
            ApproxCase::AllLarge => "all-large",
            ApproxCase::MergeSmall => "case1",
            ApproxCase::CarveOut => "case2",
            ApproxCase::AbsorbNext => "case3",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApproxResult {
    pub result: SolveResult,
    /// `None` when the instance is infeasible.
    pub case: Option<ApproxCase>,
}

fn check_k(table: &Table, k: usize) -> Result<bool> {
    if k == 0 {
        return Err(Error::OutOfRange("k must be at least 1".into()));
    }
    Ok(k <= table.len())
}

/// Polynomial m-approximation built on the QI equivalence classes
/// `C_1..C_R` sorted by size.
pub fn approx_k_anonymity(table: &Table, k: usize) -> Result<ApproxResult> {
    if !check_k(table, k)? {
        return Ok(ApproxResult {
            result: SolveResult::infeasible(SolveStats::default()),
            case: None,
        });
    }
    let classes = equivalence_classes(table, ClassKey::QiOnly);
    let stats = SolveStats {
        nodes: classes.len() as u64,
        subsets: 0,
    };
    let rows = |gs: &[Group]| gs.iter().flat_map(|g| g.rows().iter().copied()).collect::<Vec<_>>();

    let (groups, case) = if classes[0].len() >= k {
        (classes, ApproxCase::AllLarge)
    } else {
        // small classes are C_1..C_L
        let l = classes.iter().take_while(|c| c.len() < k).count();
        let (small, large) = classes.split_at(l);
        let small_total: usize = small.iter().map(Group::len).sum();
        let spare: usize = large.iter().map(|c| c.len() - k).sum();
        if small_total >= k {
            let mut out = vec![Group::new(rows(small))?];
            out.extend(large.iter().cloned());
            (out, ApproxCase::MergeSmall)
        } else if small_total + spare >= k {
            // take rows from the largest classes first, highest row indices
            // first, never leaving a class below k
            let mut need = k - small_total;
            let mut merged = rows(small);
            let mut rest = Vec::with_capacity(large.len());
            for c in large.iter().rev() {
                let take = need.min(c.len() - k);
                need -= take;
                let keep = c.len() - take;
                merged.extend_from_slice(&c.rows()[keep..]);
                rest.push(Group::new(c.rows()[..keep].iter().copied())?);
            }
            debug_assert_eq!(need, 0);
            rest.reverse();
            let mut out = vec![Group::new(merged)?];
            out.extend(rest);
            (out, ApproxCase::CarveOut)
        } else {
            let mut out = vec![Group::new(rows(&classes[..=l]))?];
            out.extend(classes[l + 1..].iter().cloned());
            (out, ApproxCase::AbsorbNext)
        }
    };
    let partition = Partition::new(groups).canonical();
    let cost = partition_cost(table, &partition)?;
    debug_assert!(partition.groups().iter().all(|g| g.len() >= k));
    Ok(ApproxResult {
        result: SolveResult::feasible(partition, cost, stats),
        case: Some(case),
    })
}

/// Exhaustive k-anonymity optimum over set partitions with blocks of at
/// least `k` rows; first minimum in restricted-growth-string order.
pub fn brute_force_k_anonymity(table: &Table, k: usize, limits: &Limits) -> Result<SolveResult> {
    if !check_k(table, k)? {
        return Ok(SolveResult::infeasible(SolveStats::default()));
    }
    limits.check_oracle(table.len())?;
    let costs = MaskCosts::new(table)?;
    let rows: Vec<usize> = (0..table.len()).collect();
    let (best, visited) = min_cost_partition(&rows, k, |mask| Some(costs.cost(mask)));
    let stats = SolveStats {
        nodes: visited,
        subsets: 1 << table.len(),
    };
    let (blocks, cost) = best.expect("the one-group partition has at least k rows");
    Ok(SolveResult::feasible(Partition::from_masks(blocks), cost, stats))
}

/// A t-closeness instance whose closeness partitions are exactly the
/// k-anonymous partitions of the source table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KAnonReduction {
    pub table: Table,
    pub t: Rational,
    pub space: SaSpace,
}

/// Gives every row its own SA value `1..n`, uses the equal-distance space
/// on those values and `t = (n - k) / n`. A group of `r` rows is then at
/// distance `1 - r/n` from the table, so it is t-close iff `r >= k`.
pub fn reduce_kanon_to_tclose(table: &Table, k: usize) -> Result<KAnonReduction> {
    if !check_k(table, k)? {
        return Err(Error::OutOfRange(format!(
            "k = {k} exceeds the {} rows of the table",
            table.len()
        )));
    }
    let n = table.len();
    let labels: Vec<String> = (1..=n).map(|i| i.to_string()).collect();
    let records = table
        .records()
        .iter()
        .zip(&labels)
        .map(|(r, s)| Record::new(r.qi.iter().cloned(), s.clone()))
        .collect();
    let relabeled = Table::new(table.qi_names().to_vec(), table.sa_name().to_string(), records)?;
    Ok(KAnonReduction {
        table: relabeled,
        t: Rational::new((n - k) as i64, n as i64),
        space: SaSpace::equal_distance(labels)?,
    })
}

/// Tests every non-empty group of the reduced instance by direct EMD and
/// returns the first one, by mask, whose closeness disagrees with
/// `|G| >= k`.
pub fn find_reduction_counterexample(table: &Table, k: usize, limits: &Limits) -> Result<Option<Group>> {
    limits.check_exact(table.len())?;
    let red = reduce_kanon_to_tclose(table, k)?;
    let mut close = ClosenessCache::new(&red.table, &red.space, red.t.clone())?;
    let full = (1u64 << table.len()) - 1;
    Ok((1..=full)
        .find(|&mask| close.is_close_mask(mask) != (mask.count_ones() as usize >= k))
        .map(Group::from_mask))
}

/// Optimal k-anonymity through the t-closeness reduction and the exact
/// t-closeness solver. Relabeling SA values leaves QI costs untouched, so
/// the partition applies to the original table as is.
pub fn exact_k_anonymity(table: &Table, k: usize, limits: &Limits) -> Result<SolveResult> {
    if !check_k(table, k)? {
        return Ok(SolveResult::infeasible(SolveStats::default()));
    }
    let red = reduce_kanon_to_tclose(table, k)?;
    let res = exact_tclose(&red.table, &red.t, &red.space, limits)?;
    debug_assert!(res.partition().is_some_and(|p| p.groups().iter().all(|g| g.len() >= k)));
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::check_closeness;

    fn table(rows: &[(&[&str], &str)]) -> Table {
        Table::from_records(rows.iter().map(|(q, s)| Record::new(q.iter().copied(), *s)).collect()).unwrap()
    }

    #[test]
    fn large_classes_are_returned_free() {
        let t = table(&[(&["a"], "x"), (&["b"], "x"), (&["a"], "y"), (&["b"], "z")]);
        let res = approx_k_anonymity(&t, 2).unwrap();
        assert_eq!(res.case, Some(ApproxCase::AllLarge));
        assert_eq!(res.result.cost(), Some(0));
        assert_eq!(res.result.partition().unwrap().len(), 2);
    }

    #[test]
    fn each_case_is_reachable() {
        // three singletons and a class of five, k = 3
        let mut rows: Vec<(&[&str], &str)> = vec![(&["p", "1"], "x"), (&["q", "2"], "x"), (&["r", "3"], "x")];
        rows.extend(std::iter::repeat_n((&["s", "4"][..], "x"), 5));
        let res = approx_k_anonymity(&table(&rows), 3).unwrap();
        assert_eq!(res.case, Some(ApproxCase::MergeSmall));

        // one singleton, classes of 4 and 3, k = 3: 1 + (1 + 0) = 2 < 3
        let mut rows: Vec<(&[&str], &str)> = vec![(&["p", "1"], "x")];
        rows.extend(std::iter::repeat_n((&["s", "4"][..], "x"), 4));
        rows.extend(std::iter::repeat_n((&["t", "5"][..], "x"), 3));
        let t3 = table(&rows);
        let res = approx_k_anonymity(&t3, 3).unwrap();
        assert_eq!(res.case, Some(ApproxCase::AbsorbNext));
        assert!(res.result.partition().unwrap().groups().iter().all(|g| g.len() >= 3));

        // one singleton, classes of 5 and 4, k = 3: 1 + 2 + 1 = 4 >= 3
        let mut rows: Vec<(&[&str], &str)> = vec![(&["p", "1"], "x")];
        rows.extend(std::iter::repeat_n((&["s", "4"][..], "x"), 5));
        rows.extend(std::iter::repeat_n((&["t", "5"][..], "x"), 4));
        let t2 = table(&rows);
        let res = approx_k_anonymity(&t2, 3).unwrap();
        assert_eq!(res.case, Some(ApproxCase::CarveOut));
        let p = res.result.partition().unwrap();
        // the carved group is the singleton plus rows 4 and 5 of the class of five
        assert_eq!(p.groups()[0].rows(), &[0, 4, 5]);
        assert_eq!(res.result.cost(), Some(6));
    }

    #[test]
    fn k_bounds() {
        let t = table(&[(&["a"], "x"), (&["b"], "x")]);
        assert!(approx_k_anonymity(&t, 0).is_err());
        assert!(!approx_k_anonymity(&t, 3).unwrap().result.is_feasible());
        assert!(!brute_force_k_anonymity(&t, 3, &Limits::default()).unwrap().is_feasible());
        assert!(!exact_k_anonymity(&t, 3, &Limits::default()).unwrap().is_feasible());
        assert_eq!(exact_k_anonymity(&t, 1, &Limits::default()).unwrap().cost(), Some(0));
        assert_eq!(exact_k_anonymity(&t, 2, &Limits::default()).unwrap().cost(), Some(2));
    }

    #[test]
    fn reduction_threshold_and_iff() {
        let t = table(&[(&["a"], "x"), (&["b"], "x"), (&["c"], "y"), (&["d"], "y")]);
        let red = reduce_kanon_to_tclose(&t, 2).unwrap();
        assert_eq!(red.t, Rational::new(1, 2));
        for mask in 1u64..16 {
            let g = Group::from_mask(mask);
            let close = check_closeness(&red.table, &g, &red.t, &red.space).unwrap();
            assert_eq!(close, g.len() >= 2, "group {mask:b}");
        }
        assert_eq!(reduce_kanon_to_tclose(&t, 4).unwrap().t, Rational::zero());
        for k in 1..=4 {
            assert_eq!(find_reduction_counterexample(&t, k, &Limits::default()).unwrap(), None);
        }
    }
}
