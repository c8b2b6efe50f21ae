//! Optimal and approximate table anonymization under the suppression model.
//!
//! Tables are partitioned into groups; each group is released with every
//! non-uniform quasi-identifier column replaced by `*`, and the cost of a
//! partition is the number of starred cells. The crate provides exact and
//! oracle solvers for t-closeness, k-anonymity and 2-diversity, exact
//! rational Earth-Mover Distance, and generators for hardness-reduction
//! instance families.

pub mod corpus;
pub mod enumerate;
pub mod error;
pub mod formats;
pub mod kanon;
pub mod ldiv;
pub mod metric;
pub mod rational;
pub mod reductions;
pub mod solve;
pub mod table;
pub mod tclose;
pub mod transport;

pub use error::{Error, Result};
pub use metric::{DistributionVector, SaSpace};
pub use rational::Rational;
pub use solve::{Limits, Outcome, SolveResult, SolveStats};
pub use table::{Group, Partition, Record, Table};
