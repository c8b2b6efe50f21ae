//! Optimal t-closeness partitioning.
//!
//! Three independent routes to the same optimum: exhaustive partition
//! enumeration ([`brute_force_tclose`]), the divide-and-conquer exact
//! algorithm ([`exact_tclose`]) and the mixed integer program
//! ([`build_milp`], solved at small scale by [`solve_milp_small`]).

mod brute;
mod exact;
mod lp_format;
mod milp;

pub use brute::brute_force_tclose;
pub use exact::{exact_tclose, exact_tclose_with, ExactOptions};
pub use lp_format::{export_milp, parse_lp};
pub use milp::{build_milp, solve_milp_small, variable_bound, Constraint, MilpModel, Sense, VarKind, Variable};

use crate::error::{Error, Result};
use crate::rational::Rational;

pub(crate) fn check_threshold(t: &Rational) -> Result<()> {
    if t.is_unit_interval() {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!("t must lie in [0, 1], got {t}")))
    }
}
