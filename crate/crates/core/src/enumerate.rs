//! Exhaustive enumeration helpers: set partitions and combinations.

/// Bell number `B(n)`, the number of set partitions of an `n`-set.
/// Saturates at `u128::MAX`.
pub fn bell(n: usize) -> u128 {
    // Bell triangle
    let mut row = vec![1u128];
    for _ in 0..n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(*row.last().expect("non-empty"));
        for v in &row {
            let prev = *next.last().expect("non-empty");
            next.push(prev.saturating_add(*v));
        }
        row = next;
    }
    row[0]
}

/// `C(n, k)`, saturating.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// Visits every set partition of `elements` (row indices below 64) in
/// restricted-growth-string order: element `i` tries the existing blocks in
/// creation order before opening a new one. Blocks are handed over as bit
/// masks, in creation order.
///
/// With `min_block > 1` only partitions whose blocks all have at least
/// `min_block` elements are visited; the relative order of the visited
/// partitions is unchanged.
pub fn for_each_set_partition<F: FnMut(&[u64])>(elements: &[usize], min_block: usize, mut visit: F) {
    let mut blocks: Vec<u64> = Vec::with_capacity(elements.len());
    let mut sizes: Vec<usize> = Vec::with_capacity(elements.len());
    rgs(elements, 0, min_block.max(1), &mut blocks, &mut sizes, &mut visit);
}

fn rgs<F: FnMut(&[u64])>(
    elements: &[usize],
    next: usize,
    min_block: usize,
    blocks: &mut Vec<u64>,
    sizes: &mut Vec<usize>,
    visit: &mut F,
) {
    if min_block > 1 {
        let deficit: usize = sizes.iter().map(|&s| min_block.saturating_sub(s)).sum();
        if deficit > elements.len() - next {
            return;
        }
    }
    if next == elements.len() {
        visit(blocks);
        return;
    }
    let bit = 1u64 << elements[next];
    for b in 0..blocks.len() {
        blocks[b] |= bit;
        sizes[b] += 1;
        rgs(elements, next + 1, min_block, blocks, sizes, visit);
        blocks[b] &= !bit;
        sizes[b] -= 1;
    }
    blocks.push(bit);
    sizes.push(1);
    rgs(elements, next + 1, min_block, blocks, sizes, visit);
    blocks.pop();
    sizes.pop();
}

/// Visits the `k`-element subsets of `items` as bit masks, in lexicographic
/// order of their index positions.
pub fn for_each_combination<F: FnMut(u64)>(items: &[usize], k: usize, mut visit: F) {
    let n = items.len();
    if k > n {
        return;
    }
    let mut pos: Vec<usize> = (0..k).collect();
    loop {
        visit(pos.iter().fold(0u64, |m, &p| m | 1 << items[p]));
        // rightmost position that can still move right
        let mut i = k;
        while i > 0 && pos[i - 1] == i - 1 + n - k {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        let i = i - 1;
        pos[i] += 1;
        for j in i + 1..k {
            pos[j] = pos[j - 1] + 1;
        }
    }
}

/// Cheapest set partition of `elements` under a per-block score.
///
/// `score(mask)` returns the block's cost, or `None` if the block is not
/// allowed. Every partition is visited in restricted-growth-string order and
/// the first one of minimum total cost wins. Returns the blocks (in creation
/// order) with their total, plus the number of partitions visited.
pub fn min_cost_partition<F>(elements: &[usize], min_block: usize, mut score: F) -> (Option<(Vec<u64>, u64)>, u64)
where
    F: FnMut(u64) -> Option<u64>,
{
    let k = elements.len();
    assert!(k < 32, "too many elements for a per-subset score table");
    // score every subset once, indexed by local position masks
    let mut local: Vec<Option<u64>> = vec![None; 1 << k];
    for (lm, slot) in local.iter_mut().enumerate().skip(1) {
        let global = (0..k)
            .filter(|&i| lm >> i & 1 == 1)
            .fold(0u64, |acc, i| acc | 1 << elements[i]);
        *slot = score(global);
    }
    let positions: Vec<usize> = (0..k).collect();
    let mut best: Option<(Vec<u64>, u64)> = None;
    let mut visited = 0u64;
    for_each_set_partition(&positions, min_block, |blocks| {
        visited += 1;
        let mut total = 0u64;
        for &b in blocks {
            match local[b as usize] {
                Some(c) => total += c,
                None => return,
            }
        }
        if best.as_ref().is_none_or(|(_, c)| total < *c) {
            let global = blocks
                .iter()
                .map(|&b| mask_rows(b).into_iter().fold(0u64, |acc, i| acc | 1 << elements[i]))
                .collect();
            best = Some((global, total));
        }
    });
    (best, visited)
}

/// Row indices of the set bits of `mask`, ascending.
pub fn mask_rows(mask: u64) -> Vec<usize> {
    let mut out = Vec::with_capacity(mask.count_ones() as usize);
    let mut m = mask;
    while m != 0 {
        out.push(m.trailing_zeros() as usize);
        m &= m - 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn bell_numbers() {
        let expect = [1u128, 1, 2, 5, 15, 52, 203, 877, 4140, 21147, 115975, 678570, 4213597];
        for (n, &b) in expect.iter().enumerate() {
            assert_eq!(bell(n), b, "B({n})");
        }
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(10, 3), 120);
        assert_eq!(binomial(4, 0), 1);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(20, 10), 184756);
    }

    #[test]
    fn enumerates_each_partition_once() {
        for n in 0..=7usize {
            let elems: Vec<usize> = (0..n).collect();
            let mut seen = HashSet::new();
            let mut count = 0u128;
            for_each_set_partition(&elems, 1, |blocks| {
                let mut key = blocks.to_vec();
                key.sort_unstable();
                assert_eq!(blocks.iter().fold(0, |a, b| a | b), (1u64 << n) - 1);
                assert!(seen.insert(key));
                count += 1;
            });
            assert_eq!(count, bell(n));
        }
    }

    #[test]
    fn first_partitions_follow_rgs_order() {
        let mut order = Vec::new();
        for_each_set_partition(&[0, 1, 2], 1, |b| order.push(b.to_vec()));
        assert_eq!(
            order,
            vec![vec![0b111], vec![0b011, 0b100], vec![0b101, 0b010], vec![0b001, 0b110], vec![0b001, 0b010, 0b100]]
        );
    }

    #[test]
    fn min_block_filter_matches_post_filter() {
        let elems: Vec<usize> = (0..8).collect();
        for k in 1..=4 {
            let mut all = Vec::new();
            for_each_set_partition(&elems, 1, |b| {
                if b.iter().all(|m| m.count_ones() as usize >= k) {
                    all.push(b.to_vec());
                }
            });
            let mut pruned = Vec::new();
            for_each_set_partition(&elems, k, |b| pruned.push(b.to_vec()));
            assert_eq!(all, pruned, "k = {k}");
        }
    }

    #[test]
    fn min_cost_partition_prefers_first_in_order() {
        // every block costs 1 regardless of size, so the one-block partition wins
        let (best, visited) = min_cost_partition(&[3, 5, 6], 1, |_| Some(1));
        assert_eq!(best, Some((vec![0b110_1000], 1)));
        assert_eq!(visited, 5);
        // forbid blocks containing both 3 and 5
        let (best, _) = min_cost_partition(&[3, 5, 6], 1, |m| (m & 0b10_1000 != 0b10_1000).then_some(1));
        assert_eq!(best, Some((vec![0b100_1000, 0b10_0000], 2)));
        let (best, _) = min_cost_partition(&[0, 1], 1, |_| None);
        assert_eq!(best, None);
    }

    #[test]
    fn combinations_in_lexicographic_order() {
        let mut got = Vec::new();
        for_each_combination(&[2, 5, 7, 9], 2, |m| got.push(mask_rows(m)));
        assert_eq!(
            got,
            vec![vec![2, 5], vec![2, 7], vec![2, 9], vec![5, 7], vec![5, 9], vec![7, 9]]
        );
        let mut count = 0;
        for_each_combination(&[0, 1, 2], 0, |m| {
            assert_eq!(m, 0);
            count += 1;
        });
        assert_eq!(count, 1);
        for_each_combination(&[0, 1], 3, |_| panic!("no 3-subsets of a 2-set"));
        let mut full = Vec::new();
        for_each_combination(&[0, 1, 2], 3, |m| full.push(m));
        assert_eq!(full, vec![0b111]);
    }
}
