//! Seeded random instances for the oracle comparisons.
//!
//! Every generator draws from a caller-supplied RNG; [`case_rng`] derives an
//! independent stream per case so corpora come out the same however they
//! are split across threads.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::kanon::ApproxCase;
use crate::metric::DistributionVector;
use crate::reductions::{Graph, ThreeDimSystem};
use crate::table::{Record, Table};

/// RNG for case `index` of the corpus seeded with `seed`.
pub fn case_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// `n` rows, `m` QI columns over `qi_values` symbols and an SA column over
/// `sa_values` symbols, all uniform. QI cells are `0, 1, ...`; SA values
/// are `s0, s1, ...`.
pub fn random_table<R: Rng>(rng: &mut R, n: usize, m: usize, qi_values: usize, sa_values: usize) -> Table {
    assert!(n >= 1 && qi_values >= 1 && sa_values >= 1);
    let records = (0..n)
        .map(|_| {
            let qi: Vec<String> = (0..m).map(|_| rng.gen_range(0..qi_values).to_string()).collect();
            Record::new(qi, format!("s{}", rng.gen_range(0..sa_values)))
        })
        .collect();
    Table::from_records(records).expect("generated rows are consistent")
}

/// Table whose QI classes have the given sizes, with distinct random QI
/// vectors per class and rows shuffled.
pub fn table_with_classes<R: Rng>(rng: &mut R, sizes: &[usize], m: usize, sa_values: usize) -> Table {
    assert!(m >= 1 || sizes.len() <= 1, "classes need a QI column to differ");
    let alphabet = sizes.len().max(2);
    let mut vectors: Vec<Vec<String>> = Vec::new();
    while vectors.len() < sizes.len() {
        let v: Vec<String> = (0..m).map(|_| rng.gen_range(0..alphabet).to_string()).collect();
        if !vectors.contains(&v) {
            vectors.push(v);
        }
    }
    let mut records: Vec<Record> = sizes
        .iter()
        .zip(&vectors)
        .flat_map(|(&s, v)| std::iter::repeat_n(v, s))
        .map(|v| Record::new(v.clone(), format!("s{}", rng.gen_range(0..sa_values))))
        .collect();
    records.shuffle(rng);
    Table::from_records(records).expect("generated rows are consistent")
}

/// Case the approximation takes on classes of these sizes.
pub fn approx_case_for(sizes: &[usize], k: usize) -> ApproxCase {
    let small: usize = sizes.iter().filter(|&&s| s < k).sum();
    let spare: usize = sizes.iter().filter(|&&s| s >= k).map(|&s| s - k).sum();
    if small == 0 {
        ApproxCase::AllLarge
    } else if small >= k {
        ApproxCase::MergeSmall
    } else if small + spare >= k {
        ApproxCase::CarveOut
    } else {
        ApproxCase::AbsorbNext
    }
}

/// Random class sizes summing to `n` whose approximation case is `want`,
/// with `k` in `2..=n`; `None` after a bounded number of draws.
pub fn sizes_for_case<R: Rng>(rng: &mut R, want: ApproxCase, n: usize) -> Option<(Vec<usize>, usize)> {
    for _ in 0..10_000 {
        let k = rng.gen_range(2..=n);
        let mut left = n;
        let mut sizes = Vec::new();
        while left > 0 {
            let s = rng.gen_range(1..=left);
            sizes.push(s);
            left -= s;
        }
        if approx_case_for(&sizes, k) == want {
            return Some((sizes, k));
        }
    }
    None
}

pub fn random_graph<R: Rng>(rng: &mut R, n: usize, p: f64) -> Graph {
    let edges: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .filter(|_| rng.gen_bool(p))
        .collect();
    Graph::new(n, edges).expect("simple graph")
}

/// `m` distinct tuples drawn uniformly from `X × Y × Z`.
pub fn random_3dm<R: Rng>(rng: &mut R, n: usize, m: usize) -> ThreeDimSystem {
    let mut all: Vec<[usize; 3]> = (0..n)
        .flat_map(|x| (0..n).flat_map(move |y| (0..n).map(move |z| [x, y, z])))
        .collect();
    all.shuffle(rng);
    all.truncate(m);
    ThreeDimSystem::new(n, all).expect("distinct tuples")
}

/// Distribution with entries `c_i / sum(c)` for random counts in
/// `0..=max_count`, at least one of them positive.
pub fn random_distribution<R: Rng>(rng: &mut R, dim: usize, max_count: u64) -> DistributionVector {
    loop {
        let counts: Vec<u64> = (0..dim).map(|_| rng.gen_range(0..=max_count)).collect();
        if counts.iter().any(|&c| c > 0) {
            return DistributionVector::from_counts(&counts).expect("positive total");
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kanon::approx_k_anonymity;

    #[test]
    fn streams_are_reproducible() {
        let a = random_table(&mut case_rng(7, 3), 6, 2, 3, 2);
        let b = random_table(&mut case_rng(7, 3), 6, 2, 3, 2);
        let c = random_table(&mut case_rng(7, 4), 6, 2, 3, 2);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn case_predictions_match_the_solver() {
        let mut rng = case_rng(1, 0);
        for want in [ApproxCase::AllLarge, ApproxCase::MergeSmall, ApproxCase::CarveOut, ApproxCase::AbsorbNext] {
            for _ in 0..20 {
                let (sizes, k) = sizes_for_case(&mut rng, want, 8).unwrap();
                let t = table_with_classes(&mut rng, &sizes, 2, 3);
                assert_eq!(approx_k_anonymity(&t, k).unwrap().case, Some(want), "{sizes:?} k={k}");
            }
        }
    }

    #[test]
    fn generators_respect_sizes() {
        let mut rng = case_rng(2, 0);
        assert_eq!(random_3dm(&mut rng, 2, 5).tuples().len(), 5);
        assert_eq!(random_graph(&mut rng, 5, 1.0).edges().len(), 10);
        assert_eq!(random_distribution(&mut rng, 4, 5).dim(), 4);
    }
}
