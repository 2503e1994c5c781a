//! Generic finite determinantal processes.
//!
//! A positive contraction `Q` (symmetric, spectrum in `[0,1]`) on a
//! labeled ground set generates a random subset `X` with
//! `P(A ⊆ X) = det Q_A`. This module validates kernels, computes exact
//! and floating subset probabilities, samples draws, and produces the
//! Poisson-binomial law of `|X ∩ A|`.
//!
//! Two kernel flavors: floating ([`PositiveContraction`], for sampling
//! at scale) and exact rational ([`ExactKernel`], an integer matrix
//! over a common denominator, for probabilities at small size). They
//! are cross-checked wherever both apply.

use nalgebra::{DMatrix, DVector};
use num::{BigInt, BigRational, One, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{child_seed, stream_rng};

/// Symmetry / spectrum validation tolerance, and the clamp applied to
/// eigenvalues before sampling.
pub const SPECTRUM_TOL: f64 = 1e-9;

/// A floating positive contraction with its spectral form, computed
/// lazily on first use.
#[derive(Debug, Clone)]
pub struct PositiveContraction {
    q: DMatrix<f64>,
    eigen: std::sync::OnceLock<(DVector<f64>, DMatrix<f64>)>,
}

impl PositiveContraction {
    /// Validates symmetry up to [`SPECTRUM_TOL`]. The spectrum check
    /// happens on the first eigensolve.
    pub fn new(q: DMatrix<f64>) -> Result<Self> {
        if !q.is_square() {
            return Err(Error::invalid("kernel matrix must be square"));
        }
        for i in 0..q.nrows() {
            for j in 0..i {
                if (q[(i, j)] - q[(j, i)]).abs() > SPECTRUM_TOL {
                    return Err(Error::invalid(format!(
                        "kernel is not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(PositiveContraction {
            q,
            eigen: std::sync::OnceLock::new(),
        })
    }

    /// Parses a matrix file: header `N`, then `N` whitespace-separated
    /// rows.
    pub fn parse(text: &str) -> Result<Self> {
        let mut numbers = text.split_whitespace().map(str::parse::<f64>);
        let n = match numbers.next() {
            Some(Ok(v)) if v >= 1.0 && v.fract() == 0.0 => v as usize,
            _ => {
                return Err(Error::Parse {
                    line: 1,
                    msg: "matrix header must be the dimension N".into(),
                })
            }
        };
        let mut data = Vec::with_capacity(n * n);
        for v in numbers {
            data.push(v.map_err(|e| Error::Parse {
                line: 0,
                msg: e.to_string(),
            })?);
        }
        if data.len() != n * n {
            return Err(Error::Parse {
                line: 0,
                msg: format!("expected {} entries, got {}", n * n, data.len()),
            });
        }
        PositiveContraction::new(DMatrix::from_row_slice(n, n, &data))
    }

    pub fn ground_size(&self) -> usize {
        self.q.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn diagonal(&self, i: usize) -> f64 {
        self.q[(i, i)]
    }

    /// Eigenvalues (clamped to `[0,1]`) and orthonormal eigenvectors;
    /// errors if the raw spectrum leaves `[-tol, 1+tol]`.
    pub fn spectral(&self) -> Result<&(DVector<f64>, DMatrix<f64>)> {
        if let Some(pair) = self.eigen.get() {
            return Ok(pair);
        }
        let se = self.q.clone().symmetric_eigen();
        for &lambda in se.eigenvalues.iter() {
            if !(-SPECTRUM_TOL..=1.0 + SPECTRUM_TOL).contains(&lambda) {
                return Err(Error::Numerical(format!(
                    "eigenvalue {lambda} outside [0,1]"
                )));
            }
        }
        let clamped = se.eigenvalues.map(|l| l.clamp(0.0, 1.0));
        let _ = self.eigen.set((clamped, se.eigenvectors));
        Ok(self.eigen.get().unwrap())
    }

    /// `P(A ⊆ X) = det Q_A` in floating point. Small negative results
    /// within tolerance clamp to zero; anything worse is an error.
    pub fn subset_probability(&self, a: &[usize]) -> Result<f64> {
        let sub = self.q.select_rows(a).select_columns(a);
        let det = sub.determinant();
        if det < -1e-6 {
            return Err(Error::Numerical(format!(
                "minor determinant {det} is negative beyond tolerance"
            )));
        }
        Ok(det.max(0.0))
    }

    /// One draw of the process: keep eigenvectors independently with
    /// probability `λ_j` (deterministic at the 0/1 endpoints), then run
    /// the projection chain — pick an element proportionally to the
    /// current kernel diagonal and deflate by the Schur complement of
    /// the chosen coordinate. The draw size equals the number of kept
    /// eigenvectors.
    pub fn sample(&self, seed: u64) -> Result<Vec<usize>> {
        let mut rng = stream_rng(seed, 0);
        self.sample_with(&mut rng)
    }

    pub fn sample_with(&self, rng: &mut impl Rng) -> Result<Vec<usize>> {
        let (values, vectors) = self.spectral()?;
        let m = self.ground_size();
        let kept: Vec<usize> = (0..m)
            .filter(|&j| {
                let l = values[j];
                l >= 1.0 - SPECTRUM_TOL || (l > SPECTRUM_TOL && rng.random::<f64>() < l)
            })
            .collect();
        let r = kept.len();
        if r == 0 {
            return Ok(Vec::new());
        }
        // Projection kernel onto the kept eigenvectors.
        let v = vectors.select_columns(&kept);
        let mut kernel = &v * v.transpose();
        let mut out = Vec::with_capacity(r);
        for t in 0..r {
            let remaining = (r - t) as f64;
            // Diagonal sampling; ties and fp dust resolve to the lowest
            // unchosen index.
            let target: f64 = rng.random::<f64>() * remaining;
            let mut acc = 0.0;
            let mut pick = None;
            for i in 0..m {
                if out.contains(&i) {
                    continue;
                }
                acc += kernel[(i, i)].max(0.0);
                if acc > target {
                    pick = Some(i);
                    break;
                }
            }
            let pick = pick.unwrap_or_else(|| (0..m).find(|i| !out.contains(i)).unwrap());
            let pivot = kernel[(pick, pick)];
            if pivot <= 0.0 {
                return Err(Error::Numerical(
                    "projection chain hit a nonpositive pivot".into(),
                ));
            }
            let col = kernel.column(pick).clone_owned();
            let row = kernel.row(pick).clone_owned();
            kernel -= col * row / pivot;
            // Deflation drifts; re-symmetrize periodically to bound it.
            if t % 64 == 63 {
                let sym = (&kernel + kernel.transpose()) / 2.0;
                kernel = sym;
            }
            out.push(pick);
        }
        out.sort_unstable();
        Ok(out)
    }

    /// A reproducible batch: draw `count` with per-draw child seeds.
    pub fn sample_batch(&self, count: usize, seed: u64) -> Result<SampleBatch> {
        let draws: Result<Vec<Vec<usize>>> = (0..count)
            .map(|j| {
                let mut rng = stream_rng(child_seed(seed, j as u64), 0);
                self.sample_with(&mut rng)
            })
            .collect();
        Ok(SampleBatch {
            seed,
            draws: draws?,
            copies: 1,
        })
    }

    /// `k` independent copies with splittable per-copy seeds: the
    /// labeled disjoint sum and the plain union.
    pub fn sample_union(&self, k: usize, seed: u64) -> Result<(Vec<Vec<usize>>, Vec<usize>)> {
        let copies: Result<Vec<Vec<usize>>> = (0..k)
            .map(|j| {
                let mut rng = stream_rng(child_seed(seed, j as u64), 0);
                self.sample_with(&mut rng)
            })
            .collect();
        let copies = copies?;
        let mut union: Vec<usize> = copies.iter().flatten().copied().collect();
        union.sort_unstable();
        union.dedup();
        Ok((copies, union))
    }

    /// The law of `|X ∩ A|`: a Poisson binomial over the eigenvalues of
    /// `Q_A`, by the standard O(|A|²) convolution.
    pub fn count_law(&self, a: &[usize], cap: u64) -> Result<Vec<f64>> {
        if a.len() as u64 > cap {
            return Err(Error::capacity("count-law subset", cap, a.len() as u64));
        }
        let sub = self.q.select_rows(a).select_columns(a);
        let eigen = sub.symmetric_eigen();
        let lambdas: Vec<f64> = eigen.eigenvalues.iter().map(|l| l.clamp(0.0, 1.0)).collect();
        Ok(poisson_binomial(&lambdas))
    }
}

/// A batch of draws, reproducible from the seed and parameters alone.
/// When the batch came from a union construction, draw `j` belongs to
/// copy `j % copies`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleBatch {
    pub seed: u64,
    pub draws: Vec<Vec<usize>>,
    pub copies: usize,
}

/// pmf of a sum of independent Bernoulli(λᵢ).
pub fn poisson_binomial(lambdas: &[f64]) -> Vec<f64> {
    let mut pmf = vec![1.0];
    for &l in lambdas {
        pmf.push(0.0);
        for j in (0..pmf.len() - 1).rev() {
            let stay = pmf[j] * (1.0 - l);
            pmf[j + 1] += pmf[j] * l;
            pmf[j] = stay;
        }
    }
    pmf
}

/// The tail bound `2·exp(−ε²·mean/4)` for `P(||X∩A| − mean| ≥ ε·mean)`.
pub fn bernstein_bound(mean: f64, epsilon: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::invalid("epsilon must lie in [0,1]"));
    }
    if mean < 0.0 {
        return Err(Error::invalid("mean must be nonnegative"));
    }
    Ok(2.0 * (-epsilon * epsilon * mean / 4.0).exp())
}

/// Exact-rational kernel: an integer symmetric matrix over a common
/// positive denominator.
#[derive(Debug, Clone)]
pub struct ExactKernel {
    num: Vec<Vec<i64>>,
    den: u64,
}

impl ExactKernel {
    pub fn new(num: Vec<Vec<i64>>, den: u64) -> Result<Self> {
        let n = num.len();
        if num.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("kernel matrix must be square"));
        }
        if den == 0 {
            return Err(Error::invalid("denominator must be positive"));
        }
        for i in 0..n {
            for j in 0..i {
                if num[i][j] != num[j][i] {
                    return Err(Error::invalid(format!(
                        "kernel is not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(ExactKernel { num, den })
    }

    pub fn ground_size(&self) -> usize {
        self.num.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> BigRational {
        BigRational::new(BigInt::from(self.num[i][j]), BigInt::from(self.den))
    }

    /// `det Q_A` exactly: fraction-free Bareiss elimination on the
    /// integer numerators, divided by `den^|A|`.
    pub fn subset_probability(&self, a: &[usize]) -> BigRational {
        let k = a.len();
        let mut m: Vec<Vec<BigInt>> = a
            .iter()
            .map(|&i| a.iter().map(|&j| BigInt::from(self.num[i][j])).collect())
            .collect();
        let det_num = bareiss_determinant(&mut m, k);
        BigRational::new(det_num, BigInt::from(self.den).pow(k as u32))
    }

    /// Hadamard check `det Q_A ≤ Π Q(a,a)` for one subset.
    pub fn hadamard_holds(&self, a: &[usize]) -> bool {
        let det = self.subset_probability(a);
        let prod = a
            .iter()
            .map(|&i| self.entry(i, i))
            .fold(BigRational::one(), |acc, x| acc * x);
        det <= prod
    }

    /// Floating view for the sampler.
    pub fn to_float(&self) -> Result<PositiveContraction> {
        let n = self.ground_size();
        let data: Vec<f64> = self
            .num
            .iter()
            .flat_map(|r| r.iter().map(|&x| x as f64 / self.den as f64))
            .collect();
        PositiveContraction::new(DMatrix::from_row_slice(n, n, &data))
    }
}

/// Bareiss fraction-free determinant of a k×k integer matrix.
fn bareiss_determinant(m: &mut [Vec<BigInt>], k: usize) -> BigInt {
    if k == 0 {
        return BigInt::one();
    }
    let mut sign = 1i32;
    let mut prev = BigInt::one();
    for step in 0..k - 1 {
        if m[step][step].is_zero() {
            let Some(swap) = (step + 1..k).find(|&i| !m[i][step].is_zero()) else {
                return BigInt::zero();
            };
            m.swap(step, swap);
            sign = -sign;
        }
        for i in step + 1..k {
            for j in step + 1..k {
                let t = &m[i][j] * &m[step][step] - &m[i][step] * &m[step][j];
                m[i][j] = &t / &prev;
            }
            m[i][step] = BigInt::zero();
        }
        prev = m[step][step].clone();
    }
    let det = m[k - 1][k - 1].clone();
    if sign < 0 {
        -det
    } else {
        det
    }
}
