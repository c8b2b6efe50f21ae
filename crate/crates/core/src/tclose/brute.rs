use crate::enumerate::min_cost_partition;
use crate::error::Result;
use crate::metric::{ClosenessCache, SaSpace};
use crate::rational::Rational;
use crate::solve::{Limits, SolveResult, SolveStats};
use crate::table::{MaskCosts, Partition, Table};

/// Minimum-cost t-closeness partition by enumerating every set partition of
/// the rows. Ties go to the partition met first in restricted-growth-string
/// order.
pub fn brute_force_tclose(table: &Table, t: &Rational, space: &SaSpace, limits: &Limits) -> Result<SolveResult> {
    super::check_threshold(t)?;
    limits.check_oracle(table.len())?;
    let costs = MaskCosts::new(table)?;
    let mut close = ClosenessCache::new(table, space, t.clone())?;
    let rows: Vec<usize> = (0..table.len()).collect();
    let mut scored = 0u64;
    let (best, visited) = min_cost_partition(&rows, 1, |mask| {
        scored += 1;
        close.is_close_mask(mask).then(|| costs.cost(mask))
    });
    let stats = SolveStats {
        nodes: visited,
        subsets: scored,
    };
    // the whole table is always t-close to itself
    let (blocks, cost) = best.expect("the one-group partition is always feasible");
    Ok(SolveResult::feasible(Partition::from_masks(blocks), cost, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::{partition_cost, Record};

    #[test]
    fn threshold_one_costs_nothing() {
        let table = Table::from_records(vec![
            Record::new(["a", "b"], "x"),
            Record::new(["c", "d"], "y"),
            Record::new(["a", "d"], "y"),
        ])
        .unwrap();
        let space = SaSpace::equal_distance_for(&table);
        let res = brute_force_tclose(&table, &Rational::one(), &space, &Limits::default()).unwrap();
        assert_eq!(res.cost(), Some(0));
        assert_eq!(res.partition().unwrap(), &Partition::singletons(3));
    }

    #[test]
    fn two_rows_zero_threshold() {
        let same = Table::from_records(vec![Record::new(["a"], "x"), Record::new(["a"], "x")]).unwrap();
        let space = SaSpace::equal_distance_for(&same);
        let res = brute_force_tclose(&same, &Rational::zero(), &space, &Limits::default()).unwrap();
        assert_eq!(res.cost(), Some(0));

        let split = Table::from_records(vec![Record::new(["a"], "x"), Record::new(["b"], "y")]).unwrap();
        let space = SaSpace::equal_distance_for(&split);
        let res = brute_force_tclose(&split, &Rational::zero(), &space, &Limits::default()).unwrap();
        assert_eq!(res.cost(), Some(2));
        assert_eq!(res.partition().unwrap(), &Partition::whole(2));
        assert_eq!(partition_cost(&split, res.partition().unwrap()).unwrap(), 2);
    }

    #[test]
    fn refuses_large_tables() {
        let recs = (0..13).map(|i| Record::new([i.to_string()], "x")).collect();
        let table = Table::from_records(recs).unwrap();
        let space = SaSpace::equal_distance_for(&table);
        assert!(brute_force_tclose(&table, &Rational::one(), &space, &Limits::default()).is_err());
    }

    #[test]
    fn rejects_threshold_outside_unit_interval() {
        let table = Table::from_records(vec![Record::new(["a"], "x")]).unwrap();
        let space = SaSpace::equal_distance_for(&table);
        assert!(brute_force_tclose(&table, &Rational::new(3, 2), &space, &Limits::default()).is_err());
    }
}
