//! Solver results and size guards shared by all solvers.

use crate::error::{Error, Result};
use crate::table::Partition;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SolveStats {
    /// Recursive calls, DP states or enumeration leaves, depending on the solver.
    pub nodes: u64,
    /// Candidate subsets or partitions examined.
    pub subsets: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Feasible { partition: Partition, cost: u64 },
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult {
    pub outcome: Outcome,
    pub stats: SolveStats,
}

impl SolveResult {
    pub fn feasible(partition: Partition, cost: u64, stats: SolveStats) -> Self {
        SolveResult {
            outcome: Outcome::Feasible { partition, cost },
            stats,
        }
    }

    pub fn infeasible(stats: SolveStats) -> Self {
        SolveResult {
            outcome: Outcome::Infeasible,
            stats,
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self.outcome, Outcome::Feasible { .. })
    }

    pub fn cost(&self) -> Option<u64> {
        match &self.outcome {
            Outcome::Feasible { cost, .. } => Some(*cost),
            Outcome::Infeasible => None,
        }
    }

    pub fn partition(&self) -> Option<&Partition> {
        match &self.outcome {
            Outcome::Feasible { partition, .. } => Some(partition),
            Outcome::Infeasible => None,
        }
    }
}

/// Size guards for the exponential solvers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Largest table handed to partition enumeration.
    pub oracle_max_rows: usize,
    /// Largest table handed to the recursive exact solver and the subset DPs.
    pub exact_max_rows: usize,
    /// Largest number of integer assignments the MILP enumerator may visit.
    pub milp_max_assignments: u128,
}

impl Limits {
    pub const DEFAULT_ORACLE_MAX_ROWS: usize = 12;
    pub const DEFAULT_EXACT_MAX_ROWS: usize = 20;
    pub const DEFAULT_MILP_MAX_ASSIGNMENTS: u128 = 10_000_000;

    pub fn check_oracle(&self, n: usize) -> Result<()> {
        guard("rows for partition enumeration", n as u128, self.oracle_max_rows as u128)
    }

    pub fn check_exact(&self, n: usize) -> Result<()> {
        guard("rows for the exact solver", n as u128, self.exact_max_rows as u128)
    }
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            oracle_max_rows: Self::DEFAULT_ORACLE_MAX_ROWS,
            exact_max_rows: Self::DEFAULT_EXACT_MAX_ROWS,
            milp_max_assignments: Self::DEFAULT_MILP_MAX_ASSIGNMENTS,
        }
    }
}

pub(crate) fn guard(what: &'static str, actual: u128, limit: u128) -> Result<()> {
    if actual > limit {
        Err(Error::TooLarge { what, actual, limit })
    } else {
        Ok(())
    }
}
