//! The concrete hypertree kernels and their samplers.
//!
//! The projection kernel in dimension `d` on `[n]` factors through the
//! signed incidence matrix `I` between `d`-subsets and `(d+1)`-subsets:
//! the kernel is `IᵀI/n`, with diagonal `(d+1)/n` and off-diagonal
//! `±1/n` exactly on face pairs sharing `d` vertices. The percolated
//! kernel shifts the spectrum to `{1, ℓ/(n+ℓ)}`:
//! `(n·IᵀI/n + ℓ·Id)/(n+ℓ)`, with diagonal `(d+1+ℓ)/(n+ℓ)`.
//!
//! Two samplers:
//!
//! * `Kernel`: materialize the dense kernel and run the generic
//!   eigenvector chain from [`crate::detproc`] (small ground sets;
//!   retained for distributional cross-validation);
//! * `Percolation` (default): draw the projection process through the
//!   sparse factor — never materializing the kernel — then add each
//!   absent face independently with probability `ℓ/(n+ℓ)`.
//!
//! The factored chain keeps the selected columns' Gram–Schmidt
//! coefficients and proposes faces uniformly, accepting with the
//! conditional diagonal over `(d+1)`; the expected acceptance rate at
//! step `t` is `(r-t)/r`, so a full draw costs `O(r³)` float ops plus
//! cheap sparse bookkeeping.

use nalgebra::DMatrix;
use rand::Rng;

use crate::combinatorics::binomial;
use crate::config::Caps;
use crate::detproc::{ExactKernel, PositiveContraction};
use crate::error::{Error, Result};
use crate::homology::boundary_column;
use crate::rng::{child_seed, stream_rng};
use crate::simplicial::{Complex, Face};

/// The signed incidence between `d`-subsets and `(d+1)`-subsets of
/// `[n]`: column `σ` has entry `(-1)^i` at row `σ∖{x_i}`. Stored
/// implicitly; `transpose` of this matrix is the real coboundary map
/// one level down.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignedIncidence {
    n: u32,
    d: usize,
}

impl SignedIncidence {
    pub fn new(n: u32, d: usize) -> Result<Self> {
        if d as u64 >= n as u64 {
            return Err(Error::invalid("incidence needs d < n"));
        }
        Ok(SignedIncidence { n, d })
    }

    pub fn rows(&self) -> u64 {
        binomial(self.n as u64, self.d as u64)
    }

    pub fn cols(&self) -> u64 {
        binomial(self.n as u64, self.d as u64 + 1)
    }

    /// Nonzeros of one column: `(row rank, sign)`, exactly `d+1` of
    /// them with alternating signs.
    pub fn column(&self, face: &Face) -> Vec<(u64, i64)> {
        debug_assert_eq!(face.dim(), self.d);
        boundary_column(face)
    }

    pub fn column_by_rank(&self, rank: u64) -> Vec<(u64, i64)> {
        self.column(&Face::from_rank(rank, self.d))
    }

    /// Dense materialization for tests and exports.
    pub fn to_dense(&self) -> Vec<Vec<i64>> {
        let mut m = vec![vec![0i64; self.cols() as usize]; self.rows() as usize];
        for c in 0..self.cols() {
            for (r, s) in self.column_by_rank(c) {
                m[r as usize][c as usize] = s;
            }
        }
        m
    }
}

/// `J(σ,τ)`: the product of the incidence signs of the two faces at
/// their shared `d`-subset. Requires `|σ∩τ| = d`.
pub fn pair_sign(a: &Face, b: &Face) -> Result<i64> {
    if a.dim() != b.dim() {
        return Err(Error::invalid("pair sign needs equal dimensions"));
    }
    let mut only_a = None;
    let mut only_b = None;
    let mut shared = 0usize;
    for (i, v) in a.vertices().iter().enumerate() {
        if b.vertices().contains(v) {
            shared += 1;
        } else if only_a.replace(i).is_some() {
            return Err(Error::invalid("faces must share all but one vertex"));
        }
    }
    for (j, v) in b.vertices().iter().enumerate() {
        if !a.vertices().contains(v) && only_b.replace(j).is_some() {
            return Err(Error::invalid("faces must share all but one vertex"));
        }
    }
    if shared != a.dim() {
        return Err(Error::invalid("faces must share all but one vertex"));
    }
    let (i, j) = (only_a.unwrap(), only_b.unwrap());
    Ok(if (i + j) % 2 == 0 { 1 } else { -1 })
}

/// The kernel with parameters `(n, d, ℓ)`, held implicitly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HypertreeKernel {
    n: u32,
    d: usize,
    ell: u32,
}

impl HypertreeKernel {
    pub fn new(n: u32, d: usize, ell: u32) -> Result<Self> {
        if d as u64 >= n as u64 {
            return Err(Error::invalid("kernel needs d < n"));
        }
        Ok(HypertreeKernel { n, d, ell })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    pub fn ground_size(&self) -> u64 {
        binomial(self.n as u64, self.d as u64 + 1)
    }

    /// Expected draw size of the unpercolated process: `C(n-1, d)`.
    pub fn projection_rank(&self) -> u64 {
        binomial(self.n as u64 - 1, self.d as u64)
    }

    pub fn denominator(&self) -> u64 {
        self.n as u64 + self.ell as u64
    }

    pub fn diagonal_numerator(&self) -> u64 {
        self.d as u64 + 1 + self.ell as u64
    }

    /// Integer numerator of the entry at `(σ, τ)` over the common
    /// denominator `n + ℓ`.
    pub fn entry_numerator(&self, a: &Face, b: &Face) -> i64 {
        if a == b {
            return self.diagonal_numerator() as i64;
        }
        match pair_sign(a, b) {
            Ok(s) => s,
            Err(_) => 0,
        }
    }

    /// Dense numerator matrix over `n+ℓ`, built through the incidence
    /// buckets rather than all-pairs probing.
    fn dense_numerators(&self) -> Vec<Vec<i64>> {
        let m = self.ground_size() as usize;
        let mut num = vec![vec![0i64; m]; m];
        for (i, row) in num.iter_mut().enumerate() {
            row[i] = self.diagonal_numerator() as i64;
        }
        // Bucket faces by their d-subfaces; each bucket's pairs share
        // exactly that subface.
        let rows = binomial(self.n as u64, self.d as u64) as usize;
        let mut buckets: Vec<Vec<(usize, i64)>> = vec![Vec::new(); rows];
        for c in 0..m {
            for (r, s) in boundary_column(&Face::from_rank(c as u64, self.d)) {
                buckets[r as usize].push((c, s));
            }
        }
        for bucket in buckets {
            for (i, &(ci, si)) in bucket.iter().enumerate() {
                for &(cj, sj) in &bucket[..i] {
                    num[ci][cj] = si * sj;
                    num[cj][ci] = si * sj;
                }
            }
        }
        num
    }

    /// Exact-rational kernel (capped by `dense`).
    pub fn to_exact(&self, caps: &Caps) -> Result<ExactKernel> {
        let m = self.ground_size();
        if m > caps.dense {
            return Err(Error::capacity("dense kernel ground set", caps.dense, m));
        }
        ExactKernel::new(self.dense_numerators(), self.denominator())
    }

    /// Floating kernel (capped by `dense`).
    pub fn to_contraction(&self, caps: &Caps) -> Result<PositiveContraction> {
        let m = self.ground_size();
        if m > caps.dense {
            return Err(Error::capacity("dense kernel ground set", caps.dense, m));
        }
        let den = self.denominator() as f64;
        let num = self.dense_numerators();
        let data: Vec<f64> = num
            .iter()
            .flat_map(|r| r.iter().map(|&x| x as f64 / den))
            .collect();
        PositiveContraction::new(DMatrix::from_row_slice(
            m as usize,
            m as usize,
            &data,
        ))
    }

    /// Writes the kernel as a matrix file (header `N`, then rows).
    pub fn to_matrix_string(&self, caps: &Caps) -> Result<String> {
        let m = self.ground_size();
        if m > caps.dense {
            return Err(Error::capacity("dense kernel ground set", caps.dense, m));
        }
        let den = self.denominator() as f64;
        let num = self.dense_numerators();
        let mut out = format!("{m}\n");
        for row in &num {
            let cells: Vec<String> = row.iter().map(|&x| format!("{}", x as f64 / den)).collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
        Ok(out)
    }
}

/// Which sampling route to take.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    Kernel,
    #[default]
    Percolation,
}

impl std::str::FromStr for Backend {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kernel" => Ok(Backend::Kernel),
            "percolation" => Ok(Backend::Percolation),
            other => Err(Error::invalid(format!("unknown backend `{other}`"))),
        }
    }
}

/// Reusable sampler for one parameter triple. Immutable once built, so
/// batches can share it across worker threads; each draw derives its
/// own RNG stream from the batch seed.
pub struct HypertreeSampler {
    kernel: HypertreeKernel,
    mode: Mode,
}

enum Mode {
    Dense(PositiveContraction),
    Factored(FactoredSampler),
}

impl HypertreeSampler {
    pub fn new(n: u32, d: usize, ell: u32, backend: Backend, caps: &Caps) -> Result<Self> {
        let kernel = HypertreeKernel::new(n, d, ell)?;
        let mode = match backend {
            Backend::Kernel => Mode::Dense(kernel.to_contraction(caps)?),
            Backend::Percolation => Mode::Factored(FactoredSampler::new(n, d, ell)),
        };
        Ok(HypertreeSampler { kernel, mode })
    }

    pub fn kernel(&self) -> &HypertreeKernel {
        &self.kernel
    }

    /// Colex ranks of the drawn faces, ascending.
    pub fn draw_ranks(&self, seed: u64) -> Result<Vec<u64>> {
        let mut rng = stream_rng(seed, 0);
        match &self.mode {
            Mode::Dense(q) => {
                let picks = q.sample_with(&mut rng)?;
                Ok(picks.into_iter().map(|i| i as u64).collect())
            }
            Mode::Factored(f) => {
                let mut scratch = f.scratch();
                f.draw(&mut scratch, &mut rng)
            }
        }
    }

    pub fn draw(&self, seed: u64) -> Result<Complex> {
        let ranks = self.draw_ranks(seed)?;
        Complex::from_ranks(self.kernel.n, self.kernel.d, &ranks)
    }

    /// `k` independent copies (child seed `hash(seed, j)` for copy `j`)
    /// as the union complex plus the per-copy face lists.
    pub fn draw_union(&self, k: usize, seed: u64) -> Result<(Complex, Vec<Vec<Face>>)> {
        if k == 0 {
            return Err(Error::invalid("union needs k ≥ 1"));
        }
        let mut per_copy = Vec::with_capacity(k);
        let mut union: Vec<u64> = Vec::new();
        for j in 0..k {
            let ranks = self.draw_ranks(child_seed(seed, j as u64))?;
            union.extend_from_slice(&ranks);
            per_copy.push(
                ranks
                    .into_iter()
                    .map(|r| Face::from_rank(r, self.kernel.d))
                    .collect(),
            );
        }
        union.sort_unstable();
        union.dedup();
        let complex = Complex::from_ranks(self.kernel.n, self.kernel.d, &union)?;
        Ok((complex, per_copy))
    }

    /// Access to the factored scratch-reusing draw for hot loops.
    pub fn batch(&self) -> BatchDrawer<'_> {
        BatchDrawer {
            sampler: self,
            scratch: match &self.mode {
                Mode::Factored(f) => Some(f.scratch()),
                Mode::Dense(_) => None,
            },
        }
    }
}

/// Drives repeated draws without reallocating the chain state.
pub struct BatchDrawer<'a> {
    sampler: &'a HypertreeSampler,
    scratch: Option<DrawScratch>,
}

impl BatchDrawer<'_> {
    pub fn draw_ranks(&mut self, seed: u64) -> Result<Vec<u64>> {
        let mut rng = stream_rng(seed, 0);
        match (&self.sampler.mode, &mut self.scratch) {
            (Mode::Dense(q), _) => {
                let picks = q.sample_with(&mut rng)?;
                Ok(picks.into_iter().map(|i| i as u64).collect())
            }
            (Mode::Factored(f), Some(scratch)) => f.draw(scratch, &mut rng),
            (Mode::Factored(_), None) => unreachable!(),
        }
    }
}

/// Projection-chain sampler through the sparse incidence factor.
struct FactoredSampler {
    n: u32,
    d: usize,
    ell: u32,
    m: usize,
    r: usize,
    subface_rows: usize,
    /// Per face, its `d+1` subface row ranks and signs, flattened.
    sub_rank: Vec<u32>,
    sub_sign: Vec<f64>,
}

struct DrawScratch {
    /// Selected-column Gram–Schmidt coefficients `c^{(s)}`, packed
    /// lower triangle stored by row. f32 storage for bandwidth; all
    /// accumulation stays f64.
    cmat: Vec<f32>,
    /// Projection coefficients of the current candidate.
    qbuf: Vec<f64>,
    tmp: Vec<f32>,
    /// Sparse inner products with the selected columns.
    gbuf: Vec<(u32, f64)>,
    /// Subface row -> (selected position, sign).
    buckets: Vec<Vec<(u32, f32)>>,
    taken: Vec<bool>,
    picks: Vec<u32>,
}

impl FactoredSampler {
    fn new(n: u32, d: usize, ell: u32) -> Self {
        let m = binomial(n as u64, d as u64 + 1) as usize;
        let r = binomial(n as u64 - 1, d as u64) as usize;
        let subface_rows = binomial(n as u64, d as u64) as usize;
        let mut sub_rank = Vec::with_capacity(m * (d + 1));
        let mut sub_sign = Vec::with_capacity(m * (d + 1));
        for c in 0..m {
            for (row, sign) in boundary_column(&Face::from_rank(c as u64, d)) {
                sub_rank.push(row as u32);
                sub_sign.push(sign as f64);
            }
        }
        FactoredSampler {
            n,
            d,
            ell,
            m,
            r,
            subface_rows,
            sub_rank,
            sub_sign,
        }
    }

    fn scratch(&self) -> DrawScratch {
        DrawScratch {
            cmat: vec![0.0; self.r * (self.r + 1) / 2],
            qbuf: vec![0.0; self.r],
            tmp: vec![0.0; self.r],
            gbuf: Vec::with_capacity(64),
            buckets: vec![Vec::new(); self.subface_rows],
            taken: vec![false; self.m],
            picks: Vec::with_capacity(self.r),
        }
    }

    fn draw(&self, s: &mut DrawScratch, rng: &mut impl Rng) -> Result<Vec<u64>> {
        for b in &mut s.buckets {
            b.clear();
        }
        s.taken.iter_mut().for_each(|t| *t = false);
        s.picks.clear();
        let width = self.d + 1;
        let full = width as f64;

        for t in 0..self.r {
            // Uniform proposals accepted with the conditional diagonal
            // over d+1; expected (r-t)/r acceptance. The guard bounds a
            // numerically degenerate chain.
            let mut tries = 0u64;
            let budget = 200 * (self.r as u64 + 8) + 10_000;
            let (pick, val) = loop {
                tries += 1;
                if tries > budget {
                    return Err(Error::Numerical(
                        "projection chain stopped accepting proposals".into(),
                    ));
                }
                let cand = rng.random_range(0..self.m);
                if s.taken[cand] {
                    continue;
                }
                // Sparse inner products with the selected columns.
                s.gbuf.clear();
                for slot in 0..width {
                    let row = self.sub_rank[cand * width + slot] as usize;
                    let sc = self.sub_sign[cand * width + slot] as f32;
                    for &(pos, ssel) in &s.buckets[row] {
                        s.gbuf.push((pos, (sc * ssel) as f64));
                    }
                }
                s.gbuf.sort_unstable_by_key(|&(pos, _)| pos);
                // q_s = Σ_j c^{(s)}_j · g_j; rows are sparse against g,
                // so each row contributes only its gbuf positions.
                let mut qq = 0.0f64;
                for srow in 0..t {
                    let row = &s.cmat[srow * (srow + 1) / 2..srow * (srow + 1) / 2 + srow + 1];
                    let mut acc = 0.0f64;
                    for &(j, v) in s.gbuf.iter() {
                        let j = j as usize;
                        if j > srow {
                            break;
                        }
                        acc += row[j] as f64 * v;
                    }
                    s.qbuf[srow] = acc;
                    qq += acc * acc;
                }
                let val = full - qq;
                if val > 0.0 && rng.random::<f64>() * full < val {
                    break (cand, val);
                }
            };

            // Extend the triangle: row t accumulates -Σ_s q_s c^{(s)}
            // by independent-element axpys (vectorizes; no reduction
            // dependency), then scales by 1/ρ.
            let rho = val.sqrt();
            s.tmp[..t].iter_mut().for_each(|x| *x = 0.0);
            for srow in 0..t {
                let q = s.qbuf[srow] as f32;
                let row = &s.cmat[srow * (srow + 1) / 2..srow * (srow + 1) / 2 + srow + 1];
                for (acc, &c) in s.tmp[..=srow].iter_mut().zip(row) {
                    *acc += q * c;
                }
            }
            let out_off = t * (t + 1) / 2;
            let inv_rho = (1.0 / rho) as f32;
            for j in 0..t {
                s.cmat[out_off + j] = -s.tmp[j] * inv_rho;
            }
            s.cmat[out_off + t] = inv_rho;

            for slot in 0..width {
                let row = self.sub_rank[pick * width + slot] as usize;
                s.buckets[row].push((t as u32, self.sub_sign[pick * width + slot] as f32));
            }
            s.taken[pick] = true;
            s.picks.push(pick as u32);
        }

        let mut ranks: Vec<u64> = s.picks.iter().map(|&p| p as u64).collect();
        // Percolation: each absent face joins independently with
        // probability ℓ/(n+ℓ).
        if self.ell > 0 {
            let p = self.ell as f64 / (self.n as f64 + self.ell as f64);
            for c in 0..self.m {
                if !s.taken[c] && rng.random::<f64>() < p {
                    ranks.push(c as u64);
                }
            }
        }
        ranks.sort_unstable();
        Ok(ranks)
    }
}

/// One-shot draw of the generalized hypertree process.
pub fn sample_hypertree(
    n: u32,
    d: usize,
    ell: u32,
    seed: u64,
    backend: Backend,
    caps: &Caps,
) -> Result<Complex> {
    HypertreeSampler::new(n, d, ell, backend, caps)?.draw(seed)
}

/// Union of `k` independent draws, with the per-copy face lists.
pub fn sample_union_complex(
    n: u32,
    d: usize,
    ell: u32,
    k: usize,
    seed: u64,
    caps: &Caps,
) -> Result<(Complex, Vec<Vec<Face>>)> {
    HypertreeSampler::new(n, d, ell, Backend::Percolation, caps)?.draw_union(k, seed)
}

/// Exact check that the principal submatrix of the `(n, d, ℓ₁)` kernel
/// on faces containing the `ℓ₂` largest vertices equals the
/// `(n-ℓ₂, d-ℓ₂, ℓ₁+ℓ₂)` kernel under `τ ↦ τ ∪ {n-ℓ₂+1, …, n}`.
pub fn submatrix_reduction_holds(n: u32, d: usize, ell1: u32, ell2: u32) -> Result<bool> {
    if ell2 as usize > d {
        return Err(Error::invalid("need ℓ₂ ≤ d"));
    }
    let big = HypertreeKernel::new(n, d, ell1)?;
    if ell2 == 0 {
        return Ok(true);
    }
    let small = HypertreeKernel::new(n - ell2, d - ell2 as usize, ell1 + ell2)?;
    // Denominators agree: n + ℓ₁ = (n-ℓ₂) + (ℓ₁+ℓ₂).
    debug_assert_eq!(big.denominator(), small.denominator());
    let tail: Vec<u32> = (n - ell2 + 1..=n).collect();
    let m_small = small.ground_size();
    for i in 0..m_small {
        let fi = Face::from_rank(i, small.d);
        let mut vi = fi.vertices().to_vec();
        vi.extend_from_slice(&tail);
        let bi = Face::new(vi)?;
        for j in 0..=i {
            let fj = Face::from_rank(j, small.d);
            let mut vj = fj.vertices().to_vec();
            vj.extend_from_slice(&tail);
            let bj = Face::new(vj)?;
            if small.entry_numerator(&fi, &fj) != big.entry_numerator(&bi, &bj) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
