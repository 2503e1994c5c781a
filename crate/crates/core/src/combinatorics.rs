//! Binomial coefficients and the combinatorial number system.
//!
//! Faces are indexed by the colexicographic rank of their (0-based)
//! vertex set: `rank(s_0 < s_1 < … < s_{k-1}) = Σ C(s_i, i+1)`. Rank and
//! unrank are O(k) given a binomial table, so face universes never need
//! hash maps.

use num::BigUint;

/// `C(n, k)` as u64. Panics on overflow; the face universes used in this
/// crate stay far below 2^64.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    u64::try_from(acc).expect("binomial coefficient overflows u64")
}

/// `C(n, k)` in arbitrary precision, for capacity budgeting.
pub fn binomial_big(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::ZERO;
    }
    let k = k.min(n - k);
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// Colexicographic rank of a strictly increasing 0-based k-subset.
pub fn colex_rank(subset: &[u32]) -> u64 {
    subset
        .iter()
        .enumerate()
        .map(|(i, &s)| binomial(s as u64, i as u64 + 1))
        .sum()
}

/// Inverse of [`colex_rank`]: the `rank`-th k-subset of 0-based integers
/// in colexicographic order, written into `out` (ascending).
pub fn colex_unrank(mut rank: u64, k: usize, out: &mut Vec<u32>) {
    out.clear();
    out.resize(k, 0);
    for i in (1..=k).rev() {
        // Largest s with C(s, i) <= rank.
        let mut s = i as u64 - 1;
        let mut c = 0u64; // C(i-1, i) = 0
        loop {
            // C(s+1, i) from C(s, i); the first step is C(i, i) = 1.
            let next = if s + 1 == i as u64 {
                1
            } else {
                c * (s + 1) / (s + 1 - i as u64)
            };
            if next > rank {
                break;
            }
            s += 1;
            c = next;
        }
        rank -= c;
        out[i - 1] = s as u32;
    }
}

/// Advances `subset` (0-based, ascending) to the colex successor among
/// k-subsets of `{0, …, n-1}`. Returns false when already at the last.
pub fn colex_next(subset: &mut [u32], n: u32) -> bool {
    let k = subset.len();
    for i in 0..k {
        let limit = if i + 1 < k { subset[i + 1] } else { n };
        if subset[i] + 1 < limit {
            subset[i] += 1;
            for (j, v) in subset.iter_mut().enumerate().take(i) {
                *v = j as u32;
            }
            return true;
        }
    }
    false
}

/// All k-subsets of `{0, …, n-1}` in colex order.
pub fn all_subsets(n: u32, k: usize) -> Vec<Vec<u32>> {
    let count = binomial(n as u64, k as u64);
    let mut out = Vec::with_capacity(count as usize);
    if count == 0 {
        return out;
    }
    let mut cur: Vec<u32> = (0..k as u32).collect();
    loop {
        out.push(cur.clone());
        if !colex_next(&mut cur, n) {
            break;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(0, 0), 1);
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(20, 10), 184_756);
        assert_eq!(binomial(5, 6), 0);
        assert_eq!(binomial(60, 3), 34_220);
    }

    #[test]
    fn colex_roundtrip() {
        let n = 9u32;
        for k in 1..=4usize {
            let mut seen = Vec::new();
            let mut buf = Vec::new();
            for rank in 0..binomial(n as u64, k as u64) {
                colex_unrank(rank, k, &mut buf);
                assert!(buf.windows(2).all(|w| w[0] < w[1]));
                assert!(buf.iter().all(|&v| v < n));
                assert_eq!(colex_rank(&buf), rank);
                seen.push(buf.clone());
            }
            // Colex order is strictly increasing in rank, hence all distinct.
            for w in seen.windows(2) {
                assert_ne!(w[0], w[1]);
            }
        }
    }

    #[test]
    fn successor_agrees_with_unrank() {
        let (n, k) = (7u32, 3usize);
        let mut cur: Vec<u32> = (0..k as u32).collect();
        let mut buf = Vec::new();
        for rank in 0..binomial(n as u64, k as u64) {
            colex_unrank(rank, k, &mut buf);
            assert_eq!(cur, buf);
            let more = colex_next(&mut cur, n);
            assert_eq!(more, rank + 1 < binomial(n as u64, k as u64));
        }
    }
}
