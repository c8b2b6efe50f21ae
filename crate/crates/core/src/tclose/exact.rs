use std::collections::HashMap;

use crate::enumerate::{for_each_combination, mask_rows, min_cost_partition};
use crate::error::Result;
use crate::metric::{ClosenessCache, SaSpace};
use crate::rational::Rational;
use crate::solve::{Limits, SolveResult, SolveStats};
use crate::table::{MaskCosts, Partition, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactOptions {
    /// Sub-tables with fewer rows than this are solved by enumeration.
    pub base_below: usize,
    /// Remember the optimum of every sub-table already solved.
    pub subset_cache: bool,
}

impl Default for ExactOptions {
    fn default() -> Self {
        ExactOptions {
            base_below: 10,
            subset_cache: false,
        }
    }
}

/// Minimum-cost t-closeness partition by divide and conquer over row
/// subsets, closeness always measured against the full table.
pub fn exact_tclose(table: &Table, t: &Rational, space: &SaSpace, limits: &Limits) -> Result<SolveResult> {
    exact_tclose_with(table, t, space, limits, &ExactOptions::default())
}

pub fn exact_tclose_with(
    table: &Table,
    t: &Rational,
    space: &SaSpace,
    limits: &Limits,
    opts: &ExactOptions,
) -> Result<SolveResult> {
    super::check_threshold(t)?;
    limits.check_exact(table.len())?;
    let mut solver = Solver {
        costs: MaskCosts::new(table)?,
        close: ClosenessCache::new(table, space, t.clone())?,
        base_below: opts.base_below.max(1),
        memo: opts.subset_cache.then(HashMap::new),
        stats: SolveStats::default(),
    };
    let all = if table.len() == 64 { u64::MAX } else { (1u64 << table.len()) - 1 };
    let best = solver.opt(all);
    let (cost, blocks) = best.expect("the one-group partition is always feasible");
    Ok(SolveResult::feasible(Partition::from_masks(blocks), cost, solver.stats))
}

type Best = Option<(u64, Vec<u64>)>;

struct Solver<'a> {
    costs: MaskCosts,
    close: ClosenessCache<'a>,
    base_below: usize,
    memo: Option<HashMap<u64, Best>>,
    stats: SolveStats,
}

impl Solver<'_> {
    fn opt(&mut self, set: u64) -> Best {
        if set == 0 {
            return Some((0, Vec::new()));
        }
        if let Some(hit) = self.memo.as_ref().and_then(|m| m.get(&set)) {
            return hit.clone();
        }
        self.stats.nodes += 1;
        let rows = mask_rows(set);
        let s = rows.len();
        let best = if s < self.base_below {
            self.base_case(&rows)
        } else {
            self.split(set, &rows)
        };
        if let Some(memo) = self.memo.as_mut() {
            memo.insert(set, best.clone());
        }
        best
    }

    fn base_case(&mut self, rows: &[usize]) -> Best {
        let costs = &self.costs;
        let close = &mut self.close;
        let (best, visited) = min_cost_partition(rows, 1, |mask| close.is_close_mask(mask).then(|| costs.cost(mask)));
        self.stats.subsets += visited;
        best.map(|(blocks, cost)| (cost, blocks))
    }

    fn split(&mut self, set: u64, rows: &[usize]) -> Best {
        let s = rows.len();
        let mut best: Best = None;
        let offer = |best: &mut Best, cost: u64, blocks: Vec<u64>| {
            if best.as_ref().is_none_or(|(c, _)| cost < *c) {
                *best = Some((cost, blocks));
            }
        };

        // Balanced split: a union of groups holding between a quarter and
        // three quarters of the rows, both sides solved recursively.
        for size in s.div_ceil(4)..=(3 * s / 4) {
            for_each_combination(rows, size, |sub| {
                self.stats.subsets += 1;
                let Some((left, mut blocks)) = self.opt(sub) else { return };
                if best.as_ref().is_some_and(|(c, _)| left >= *c) {
                    return;
                }
                let Some((right, more)) = self.opt(set & !sub) else { return };
                blocks.extend(more);
                offer(&mut best, left + right, blocks);
            });
        }

        // One group larger than half: it stays whole, the rest is recursed.
        for size in s / 2 + 1..=s {
            for_each_combination(rows, size, |sub| {
                self.stats.subsets += 1;
                if !self.close.is_close_mask(sub) {
                    return;
                }
                let own = self.costs.cost(sub);
                if best.as_ref().is_some_and(|(c, _)| own >= *c) {
                    return;
                }
                let Some((rest, mut blocks)) = self.opt(set & !sub) else { return };
                blocks.push(sub);
                offer(&mut best, own + rest, blocks);
            });
        }
        best
    }
}
