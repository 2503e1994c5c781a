//! Exact integer Smith normal form.
//!
//! Pivot selection takes the smallest nonzero absolute value in the
//! remaining submatrix, which keeps entry growth tame; arithmetic is
//! arbitrary precision throughout, so the result is exact regardless.

use num::{BigInt, BigUint, Signed, Zero};

/// Invariant factors `d₁ | d₂ | …` (positive, divisibility chain) and
/// the rank (number of nonzero factors).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnfResult {
    pub invariant_factors: Vec<BigUint>,
    pub rank: usize,
}

impl SnfResult {
    /// Product of the invariant factors (1 for an empty list).
    pub fn factor_product(&self) -> BigUint {
        self.invariant_factors
            .iter()
            .fold(BigUint::from(1u32), |acc, f| acc * f)
    }
}

/// Smith normal form of an integer matrix given as rows.
pub fn smith_normal_form(mut m: Vec<Vec<BigInt>>) -> SnfResult {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    debug_assert!(m.iter().all(|r| r.len() == cols));
    let bound = rows.min(cols);
    let mut factors: Vec<BigUint> = Vec::new();

    for k in 0..bound {
        // Smallest nonzero |entry| in the trailing submatrix.
        let mut pivot: Option<(usize, usize)> = None;
        for i in k..rows {
            for j in k..cols {
                if !m[i][j].is_zero()
                    && pivot.is_none_or(|(pi, pj)| m[i][j].abs() < m[pi][pj].abs())
                {
                    pivot = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = pivot else {
            break; // trailing submatrix is zero
        };
        m.swap(k, pi);
        for row in m.iter_mut() {
            row.swap(k, pj);
        }

        'reduce: loop {
            // Clear the pivot column by division; a nonzero remainder
            // becomes the new (smaller) pivot, so this terminates.
            for i in k + 1..rows {
                if m[i][k].is_zero() {
                    continue;
                }
                let q = &m[i][k] / &m[k][k];
                if !q.is_zero() {
                    for j in k..cols {
                        let sub = &q * &m[k][j];
                        m[i][j] -= sub;
                    }
                }
                if !m[i][k].is_zero() {
                    m.swap(k, i);
                    continue 'reduce;
                }
            }
            // Same for the pivot row.
            for j in k + 1..cols {
                if m[k][j].is_zero() {
                    continue;
                }
                let q = &m[k][j] / &m[k][k];
                if !q.is_zero() {
                    for i in k..rows {
                        let sub = &q * &m[i][k];
                        m[i][j] -= sub;
                    }
                }
                if !m[k][j].is_zero() {
                    for row in m.iter_mut() {
                        row.swap(k, j);
                    }
                    continue 'reduce;
                }
            }
            // Pivot must divide the rest of the submatrix; if not, fold
            // the offending row into the pivot row and keep reducing.
            for i in k + 1..rows {
                for j in k + 1..cols {
                    if (&m[i][j] % &m[k][k]).is_zero() {
                        continue;
                    }
                    let (left, right) = m.split_at_mut(i);
                    for (a, b) in left[k].iter_mut().zip(&right[0]).skip(k) {
                        *a += b;
                    }
                    continue 'reduce;
                }
            }
            break;
        }
        factors.push(m[k][k].abs().to_biguint().unwrap());
    }

    // The division steps above guarantee each pivot divides the whole
    // trailing submatrix, hence every later pivot: the chain holds.
    debug_assert!(factors
        .windows(2)
        .all(|w| (&w[1] % &w[0]).is_zero()));
    SnfResult {
        rank: factors.len(),
        invariant_factors: factors,
    }
}

/// Convenience wrapper over machine-integer rows.
pub fn smith_normal_form_i64(rows: &[Vec<i64>]) -> SnfResult {
    smith_normal_form(
        rows.iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factors(rows: &[Vec<i64>]) -> Vec<u64> {
        smith_normal_form_i64(rows)
            .invariant_factors
            .iter()
            .map(|f| u64::try_from(f).unwrap())
            .collect()
    }

    #[test]
    fn diagonal_pair() {
        // diag(2,3) has factors (1,6).
        assert_eq!(factors(&[vec![2, 0], vec![0, 3]]), vec![1, 6]);
    }

    #[test]
    fn zero_matrix() {
        let r = smith_normal_form_i64(&[vec![0, 0], vec![0, 0]]);
        assert_eq!(r.rank, 0);
        assert!(r.invariant_factors.is_empty());
    }

    #[test]
    fn known_four_by_four() {
        let m = vec![
            vec![-6, 111, -36, 6],
            vec![5, -672, 210, 74],
            vec![0, -255, 81, 24],
            vec![-7, 255, -81, -10],
        ];
        assert_eq!(factors(&m), vec![1, 3, 21]);
    }

    #[test]
    fn divisibility_chain_on_random_matrices() {
        use rand::Rng;
        let mut rng = crate::rng::stream_rng(3, 0);
        for _ in 0..50 {
            let rows = rng.random_range(1..=5);
            let cols = rng.random_range(1..=5);
            let m: Vec<Vec<i64>> = (0..rows)
                .map(|_| (0..cols).map(|_| rng.random_range(-6..=6)).collect())
                .collect();
            let snf = smith_normal_form_i64(&m);
            for w in snf.invariant_factors.windows(2) {
                assert!((&w[1] % &w[0]).is_zero(), "chain broken: {snf:?} for {m:?}");
            }
            assert_eq!(snf.rank, snf.invariant_factors.len());
            assert_eq!(snf.rank, rank_f64(&m), "rank mismatch for {m:?}");
        }
    }

    /// Independent rank oracle by floating Gaussian elimination (entries
    /// are tiny, so exact).
    fn rank_f64(m: &[Vec<i64>]) -> usize {
        let mut a: Vec<Vec<f64>> = m
            .iter()
            .map(|r| r.iter().map(|&x| x as f64).collect())
            .collect();
        let (rows, cols) = (a.len(), a[0].len());
        let mut rank = 0;
        for col in 0..cols {
            let Some(p) = (rank..rows).max_by(|&i, &j| {
                a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap()
            }) else {
                break;
            };
            if a[p][col].abs() < 1e-9 {
                continue;
            }
            a.swap(rank, p);
            for i in 0..rows {
                if i != rank {
                    let f = a[i][col] / a[rank][col];
                    for j in 0..cols {
                        a[i][j] -= f * a[rank][j];
                    }
                }
            }
            rank += 1;
        }
        rank
    }
}
