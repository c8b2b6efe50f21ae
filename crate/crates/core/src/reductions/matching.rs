//! 3-dimensional matching to t-closeness, for `t < 1/3` on three SA values
//! and for `1/3 <= t < 1/2` on four.

use crate::error::{Error, Result};
use crate::metric::{ClosenessCache, SaSpace};
use crate::rational::Rational;
use crate::solve::{guard, Limits};
use crate::table::{MaskCosts, Record, Table};
use crate::tclose::check_threshold;

use super::ThreeDimSystem;

const PART_LABELS: [&str; 3] = ["1", "2", "3"];
const NEW_ROW_SA: &str = "4";

/// Largest DP table `isolated_row_optimum` allocates.
const MAX_DP_STATES: u128 = 1 << 26;

fn element_rows(sys: &ThreeDimSystem) -> Vec<Record> {
    let n = sys.part_size();
    (0..3 * n)
        .map(|i| {
            let qi = sys.tuples().iter().map(|t| {
                if sys.tuple_rows(t).contains(&i) {
                    "0".to_string()
                } else {
                    (i + 1).to_string()
                }
            });
            Record::new(qi, PART_LABELS[i / n])
        })
        .collect()
}

fn tuple_columns(sys: &ThreeDimSystem) -> Vec<String> {
    (1..=sys.tuples().len()).map(|j| format!("e{j}")).collect()
}

/// `3n(m - 1)`; negative when there are no tuples.
pub fn threedm_threshold(sys: &ThreeDimSystem) -> i64 {
    3 * sys.part_size() as i64 * (sys.tuples().len() as i64 - 1)
}

/// One row per element of `X ∪ Y ∪ Z` and one QI column per tuple; the cell
/// is `0` if the element is in the tuple and the row number otherwise. The
/// SA value is the part (`1`, `2` or `3`) and the space is equal-distance.
pub fn gen_3dm_tclose3(sys: &ThreeDimSystem) -> Result<(Table, SaSpace)> {
    let table = Table::new(tuple_columns(sys), "part".into(), element_rows(sys))?;
    let space = SaSpace::equal_distance(PART_LABELS.iter().map(|s| s.to_string()).collect())?;
    Ok((table, space))
}

fn check_upper_range(t: &Rational) -> Result<()> {
    if *t < Rational::new(1, 3) || *t >= Rational::new(1, 2) {
        return Err(Error::OutOfRange(format!("t must lie in [1/3, 1/2), got {t}")));
    }
    Ok(())
}

/// `3n / (1 - 2t)`, which must be an integer.
pub fn four_point_rows(n: usize, t: &Rational) -> Result<usize> {
    check_upper_range(t)?;
    let rows = Rational::from(3 * n) / (Rational::one() - t * Rational::from(2i64));
    if let Some(r) = rows.is_integer().then(|| rows.to_i64()).flatten() {
        return Ok(r as usize);
    }
    // t giving n' rows is (1 - 3n/n') / 2
    let t_for = |r: i64| (Rational::one() - Rational::new(3 * n as i64, r)) / Rational::from(2i64);
    let lo = rows.floor().to_i64().unwrap_or(i64::MAX).max(9 * n as i64);
    let hi = rows.ceil().to_i64().unwrap_or(i64::MAX);
    let mut hint = format!("t = {} gives {hi} rows", t_for(hi));
    if lo < hi && t_for(lo) >= Rational::new(1, 3) {
        hint = format!("t = {} gives {lo} rows, {hint}", t_for(lo));
    }
    Err(Error::OutOfRange(format!(
        "3n / (1 - 2t) = {rows} is not an integer; {hint}"
    )))
}

/// The element rows followed by `n' - 3n` rows with SA value `4` whose every
/// cell is the row number, under the four-point space with `d(4, ·) = 1/2`.
pub fn gen_3dm_tclose4(sys: &ThreeDimSystem, t: &Rational) -> Result<(Table, SaSpace)> {
    let rows = four_point_rows(sys.part_size(), t)?;
    let m = sys.tuples().len();
    let mut records = element_rows(sys);
    let old = records.len();
    records.extend((old..rows).map(|i| Record::new(vec![(i + 1).to_string(); m], NEW_ROW_SA)));
    let table = Table::new(tuple_columns(sys), "part".into(), records)?;
    Ok((table, SaSpace::hub_four_point()))
}

/// Backtracking search for `n` disjoint tuples covering every element.
pub fn has_perfect_matching(sys: &ThreeDimSystem) -> bool {
    fn cover(sys: &ThreeDimSystem, x: usize, used_y: u64, used_z: u64) -> bool {
        if x == sys.part_size() {
            return true;
        }
        sys.tuples().iter().any(|&[a, b, c]| {
            a == x
                && used_y >> b & 1 == 0
                && used_z >> c & 1 == 0
                && cover(sys, x + 1, used_y | 1 << b, used_z | 1 << c)
        })
    }
    assert!(sys.part_size() <= 64, "part size above 64");
    cover(sys, 0, 0, 0)
}

/// Optimal t-closeness cost of a table in which some rows are isolated:
/// each of their QI values occurs nowhere else in its column. A group with
/// an isolated row and at least two rows suppresses every column, so
/// isolated rows matter only through their SA values and the search runs
/// over subsets of the other rows and counts of isolated rows per SA value.
/// Returns `None` when no t-closeness partition exists.
pub fn isolated_row_optimum(table: &Table, t: &Rational, space: &SaSpace, limits: &Limits) -> Result<Option<u64>> {
    check_threshold(t)?;
    let n = table.len();
    let m = table.num_qi() as u64;
    let isolated: Vec<bool> = (0..n)
        .map(|r| (0..table.num_qi()).all(|c| (0..n).all(|o| o == r || table.qi_code(o, c) != table.qi_code(r, c))))
        .collect();
    let normal: Vec<usize> = (0..n).filter(|&r| !isolated[r]).collect();
    limits.check_exact(normal.len())?;

    let mut close = ClosenessCache::new(table, space, t.clone())?;
    let sa = close.sa_index().to_vec();
    let dims = space.len();
    let mut totals = vec![0usize; dims];
    for &s in &sa {
        totals[s] += 1;
    }
    // histograms are numbered in mixed radix, totals[v] + 1 per SA value
    let mut stride = vec![1usize; dims];
    for v in 1..dims {
        stride[v] = stride[v - 1] * (totals[v - 1] + 1);
    }
    let hist_count = stride[dims - 1] * (totals[dims - 1] + 1);
    guard(
        "states for the isolated-row search",
        (hist_count as u128) << normal.len(),
        MAX_DP_STATES,
    )?;
    let mut hist_close = vec![false; hist_count];
    let mut counts = vec![0u64; dims];
    for (h, slot) in hist_close.iter_mut().enumerate().skip(1) {
        let mut rest = h;
        for v in (0..dims).rev() {
            counts[v] = (rest / stride[v]) as u64;
            rest %= stride[v];
        }
        *slot = close.is_close_counts(&counts);
    }

    let sub = Table::new(
        table.qi_names().to_vec(),
        table.sa_name().to_string(),
        normal.iter().map(|&r| table.record(r).clone()).collect(),
    );
    // an all-isolated table has no normal rows to cost
    let costs = match sub {
        Ok(sub) => Some(MaskCosts::new(&sub)?),
        Err(_) if normal.is_empty() => None,
        Err(e) => return Err(e),
    };
    let mut iso = 0usize;
    for r in (0..n).filter(|&r| isolated[r]) {
        iso += stride[sa[r]];
    }
    let mut dp = IsolatedDp {
        m,
        dims,
        stride,
        hist_close,
        normal_hist: normal.iter().map(|&r| sa[r]).collect(),
        costs,
        memo: vec![None; hist_count << normal.len()],
        hist_count,
    };
    let full = if normal.is_empty() { 0 } else { (1u64 << normal.len()) - 1 };
    Ok(dp.solve(full, iso))
}

struct IsolatedDp {
    m: u64,
    dims: usize,
    stride: Vec<usize>,
    hist_close: Vec<bool>,
    normal_hist: Vec<usize>,
    costs: Option<MaskCosts>,
    // Some(None) marks a state with no t-closeness partition
    memo: Vec<Option<Option<u64>>>,
    hist_count: usize,
}

impl IsolatedDp {
    fn decode(&self, mut h: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims];
        for v in (0..self.dims).rev() {
            out[v] = h / self.stride[v];
            h %= self.stride[v];
        }
        out
    }

    /// Every histogram `c <= avail` with `c[forced] >= 1` when `forced` is set.
    fn sub_histograms(&self, avail: &[usize], forced: Option<usize>) -> Vec<(usize, u64)> {
        let mut out = vec![(0usize, 0u64)];
        for (v, &most) in avail.iter().enumerate().take(self.dims) {
            let from = usize::from(forced == Some(v));
            let mut next = Vec::with_capacity(out.len() * (most + 1));
            for &(h, size) in &out {
                for k in from..=most {
                    next.push((h + k * self.stride[v], size + k as u64));
                }
            }
            out = next;
        }
        out
    }

    fn solve(&mut self, mask: u64, iso: usize) -> Option<u64> {
        if mask == 0 && iso == 0 {
            return Some(0);
        }
        let key = (mask as usize) * self.hist_count + iso;
        if let Some(done) = self.memo[key] {
            return done;
        }
        let avail = self.decode(iso);
        let mut best: Option<u64> = None;
        if mask == 0 {
            let first = avail.iter().position(|&k| k > 0).expect("rows remain");
            for (c, size) in self.sub_histograms(&avail, Some(first)) {
                if !self.hist_close[c] {
                    continue;
                }
                let cost = if size >= 2 { size * self.m } else { 0 };
                if let Some(rest) = self.solve(0, iso - c) {
                    best = Some(best.map_or(cost + rest, |b| b.min(cost + rest)));
                }
            }
        } else {
            let low = mask & mask.wrapping_neg();
            let others = mask & !low;
            let subs = self.sub_histograms(&avail, None);
            let mut s = others;
            loop {
                let group = s | low;
                let mut h = 0;
                let mut g = group;
                while g != 0 {
                    h += self.stride[self.normal_hist[g.trailing_zeros() as usize]];
                    g &= g - 1;
                }
                let size = group.count_ones() as u64;
                let own = self.costs.as_ref().expect("normal rows present").cost(group);
                for &(c, extra) in &subs {
                    if !self.hist_close[h + c] {
                        continue;
                    }
                    let cost = if extra == 0 { own } else { (size + extra) * self.m };
                    if best.is_some_and(|b| cost >= b) {
                        continue;
                    }
                    if let Some(rest) = self.solve(mask & !group, iso - c) {
                        best = Some(best.map_or(cost + rest, |b| b.min(cost + rest)));
                    }
                }
                if s == 0 {
                    break;
                }
                s = (s - 1) & others;
            }
        }
        self.memo[key] = Some(best);
        best
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchingReport {
    pub has_matching: bool,
    /// `None` if the table has no t-closeness partition.
    pub optimum: Option<u64>,
    pub threshold: i64,
}

impl MatchingReport {
    pub fn holds(&self) -> bool {
        self.has_matching == self.optimum.is_some_and(|o| o as i64 <= self.threshold)
    }
}

/// Matching search against the optimal cost of the three-value table at
/// `t`, which must lie in `[0, 1/3)`.
pub fn verify_3dm_tclose3(sys: &ThreeDimSystem, t: &Rational, limits: &Limits) -> Result<MatchingReport> {
    check_threshold(t)?;
    if *t >= Rational::new(1, 3) {
        return Err(Error::OutOfRange(format!("t must lie in [0, 1/3), got {t}")));
    }
    let (table, space) = gen_3dm_tclose3(sys)?;
    Ok(MatchingReport {
        has_matching: has_perfect_matching(sys),
        optimum: isolated_row_optimum(&table, t, &space, limits)?,
        threshold: threedm_threshold(sys),
    })
}

pub fn verify_3dm_tclose4(sys: &ThreeDimSystem, t: &Rational, limits: &Limits) -> Result<MatchingReport> {
    let (table, space) = gen_3dm_tclose4(sys, t)?;
    Ok(MatchingReport {
        has_matching: has_perfect_matching(sys),
        optimum: isolated_row_optimum(&table, t, &space, limits)?,
        threshold: threedm_threshold(sys),
    })
}
