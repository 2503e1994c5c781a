//! F₂ coboundaries, coset-minimal norms, cohomology ranks, and exact
//! coboundary-expansion constants.
//!
//! Everything is bit-packed: cochains are bitsets over a face universe
//! indexed by colex rank (or by top-face position for dimension `d`),
//! and elimination works word-wise. Coset walks use a Gray code so each
//! step flips a single basis vector and updates support and norm
//! numerator in time proportional to the vector's weight.

use num::BigRational;

use crate::combinatorics::binomial;
use crate::config::Caps;
use crate::error::{Error, Result};
use crate::simplicial::{ratio, Cochain, Complex, Face};

/// Which coboundary space to use in dimension 0. `Reduced` takes B⁰ to
/// be the image of the augmentation map (the constants), which makes
/// 𝔥₀ a Cheeger-style constant and H⁰ vanish exactly for connected
/// skeletons; `Unreduced` takes B⁰ = {0}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Convention {
    #[default]
    Reduced,
    Unreduced,
}

/// Dense bit vector.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct BitVec {
    words: Vec<u64>,
    len: usize,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        if value {
            self.words[i / 64] |= 1 << (i % 64);
        } else {
            self.words[i / 64] &= !(1 << (i % 64));
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        self.words[i / 64] ^= 1 << (i % 64);
    }

    #[inline]
    pub fn xor_assign(&mut self, other: &BitVec) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Index of the lowest set bit.
    pub fn first_one(&self) -> Option<usize> {
        for (i, &w) in self.words.iter().enumerate() {
            if w != 0 {
                return Some(i * 64 + w.trailing_zeros() as usize);
            }
        }
        None
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(i * 64 + b)
                }
            })
        })
    }
}

/// A bit matrix with rows over a fixed column universe.
#[derive(Debug, Clone)]
pub struct F2Matrix {
    pub rows: Vec<BitVec>,
    pub cols: usize,
}

impl F2Matrix {
    pub fn new(cols: usize) -> Self {
        F2Matrix {
            rows: Vec::new(),
            cols,
        }
    }

    pub fn push(&mut self, row: BitVec) {
        assert_eq!(row.len(), self.cols);
        self.rows.push(row);
    }

    /// Rank by Gaussian elimination; `max_rank` allows early exit when a
    /// structural bound is known.
    pub fn rank(&self, max_rank: Option<usize>) -> usize {
        let bound = max_rank.unwrap_or(usize::MAX).min(self.cols);
        let mut pivots: Vec<(usize, BitVec)> = Vec::new();
        for row in &self.rows {
            let mut r = row.clone();
            while let Some(lead) = r.first_one() {
                match pivots.binary_search_by_key(&lead, |p| p.0) {
                    Ok(pos) => r.xor_assign(&pivots[pos].1),
                    Err(pos) => {
                        pivots.insert(pos, (lead, r));
                        break;
                    }
                }
            }
            if pivots.len() >= bound {
                return pivots.len();
            }
        }
        pivots.len()
    }

    /// Reduced row echelon basis of the row space, with pivot columns.
    pub fn row_reduce(&self) -> (Vec<BitVec>, Vec<usize>) {
        let mut pivots: Vec<(usize, BitVec)> = Vec::new();
        for row in &self.rows {
            let mut r = row.clone();
            while let Some(lead) = r.first_one() {
                match pivots.binary_search_by_key(&lead, |p| p.0) {
                    Ok(pos) => r.xor_assign(&pivots[pos].1),
                    Err(pos) => {
                        pivots.insert(pos, (lead, r));
                        break;
                    }
                }
            }
        }
        // Back-substitute so each pivot column is cleared elsewhere.
        for i in 0..pivots.len() {
            for j in i + 1..pivots.len() {
                let (lead, row) = (pivots[j].0, pivots[j].1.clone());
                if pivots[i].1.get(lead) {
                    pivots[i].1.xor_assign(&row);
                }
            }
        }
        let cols = pivots.iter().map(|p| p.0).collect();
        (pivots.into_iter().map(|p| p.1).collect(), cols)
    }
}

/// Index of a face inside its universe: colex rank below the top
/// dimension, position among the sorted top faces at the top.
pub fn face_index(k: &Complex, face: &Face) -> Result<usize> {
    if face.dim() < k.dim() {
        Ok(face.rank() as usize)
    } else if face.dim() == k.dim() {
        k.top_ranks()
            .binary_search(&face.rank())
            .map_err(|_| Error::invalid(format!("face {face} is not a top face")))
    } else {
        Err(Error::invalid("face dimension above the complex"))
    }
}

/// Inverse of [`face_index`].
pub fn index_face(k: &Complex, dim: usize, index: usize) -> Face {
    if dim < k.dim() {
        Face::from_rank(index as u64, dim)
    } else {
        Face::from_rank(k.top_ranks()[index], dim)
    }
}

pub fn cochain_to_bits(k: &Complex, f: &Cochain) -> Result<BitVec> {
    let mut bits = BitVec::zeros(k.universe_size(f.dim()) as usize);
    for face in f.support() {
        bits.flip(face_index(k, face)?);
    }
    Ok(bits)
}

pub fn bits_to_cochain(k: &Complex, dim: usize, bits: &BitVec) -> Cochain {
    let faces = bits.iter_ones().map(|i| index_face(k, dim, i)).collect();
    Cochain::new(dim, faces).expect("universe indices give valid faces")
}

/// Norm numerators (top-face cover counts) over the dimension-`i`
/// universe. The shared denominator is `C(d+1,i+1)·|K(d)|`.
fn norm_numerators(k: &Complex, i: usize) -> Vec<u32> {
    if i < k.dim() {
        k.cover_counts(i).to_vec()
    } else {
        vec![1; k.face_count() as usize]
    }
}

/// Coboundary of the indicator of the `i`-face with universe index
/// `idx`, as a bitset over the `(i+1)`-universe.
fn delta_generator(k: &Complex, i: usize, idx: usize) -> BitVec {
    let face = index_face(k, i, idx);
    let mut out = BitVec::zeros(k.universe_size(i + 1) as usize);
    if i + 1 < k.dim() {
        let mut verts = face.vertices().to_vec();
        for v in 1..=k.vertex_count() {
            if !face.vertices().contains(&v) {
                verts.push(v);
                verts.sort_unstable();
                let sup = Face::new(verts.clone()).unwrap();
                out.flip(sup.rank() as usize);
                verts.retain(|&w| w != v);
            }
        }
    } else {
        for (t, top) in k.top_faces().iter().enumerate() {
            if top.contains(&face) {
                out.flip(t);
            }
        }
    }
    out
}

/// `δ_i f`: the `(i+1)`-cochain whose value on each `(i+1)`-face is the
/// F₂-sum of `f` over its `i`-subfaces.
pub fn coboundary(k: &Complex, f: &Cochain) -> Result<Cochain> {
    let i = f.dim();
    if i >= k.dim() {
        return Err(Error::invalid(
            "coboundary is defined below the top dimension",
        ));
    }
    let mut bits = BitVec::zeros(k.universe_size(i + 1) as usize);
    for face in f.support() {
        bits.xor_assign(&delta_generator(k, i, face_index(k, face)?));
    }
    Ok(bits_to_cochain(k, i + 1, &bits))
}

/// An F₂ basis of `B^i(K) = Image δ_{i-1}`, row reduced. In dimension 0
/// the reduced convention yields the all-ones vector, the unreduced
/// convention an empty basis.
pub fn coboundary_basis(k: &Complex, i: usize, convention: Convention) -> Result<Vec<BitVec>> {
    if i > k.dim() {
        return Err(Error::invalid("dimension above the complex"));
    }
    if i == 0 {
        return Ok(match convention {
            Convention::Reduced => {
                let mut ones = BitVec::zeros(k.universe_size(0) as usize);
                for j in 0..ones.len() {
                    ones.set(j, true);
                }
                vec![ones]
            }
            Convention::Unreduced => Vec::new(),
        });
    }
    let mut m = F2Matrix::new(k.universe_size(i) as usize);
    for idx in 0..k.universe_size(i - 1) as usize {
        m.push(delta_generator(k, i - 1, idx));
    }
    Ok(m.row_reduce().0)
}

/// Exact minimum of the norm over `f + B^i`, with the (coset-constant)
/// norm of `δf`.
#[derive(Debug, Clone)]
pub struct CosetSummary {
    pub representative: Cochain,
    pub coset_norm: BigRational,
    pub delta_norm: BigRational,
}

/// Walks all `2^rank` coset members by Gray code, flipping one basis
/// vector per step and updating the norm numerator incrementally.
/// Ties break on the support bits, so the result does not depend on
/// how the walk is scheduled.
fn coset_walk_min(
    start: &BitVec,
    num_start: u64,
    basis: &[BitVec],
    weights: &[u32],
) -> (u64, BitVec) {
    let mut support = start.clone();
    let mut num = num_start;
    let mut best = (num, support.clone());
    let steps: u64 = 1u64 << basis.len();
    let mut step = 1u64;
    while step < steps {
        let b = &basis[step.trailing_zeros() as usize];
        support.xor_assign(b);
        for j in b.iter_ones() {
            if support.get(j) {
                num += weights[j] as u64;
            } else {
                num -= weights[j] as u64;
            }
        }
        if num < best.0 || (num == best.0 && support < best.1) {
            best = (num, support.clone());
        }
        step += 1;
    }
    best
}

fn norm_numerator_of(bits: &BitVec, weights: &[u32]) -> u64 {
    bits.iter_ones().map(|j| weights[j] as u64).sum()
}

/// [`coset_walk_min`] with the high-order basis directions partitioned
/// across workers; each chunk fixes a prefix combination and walks the
/// low space. The merge is a deterministic minimum.
fn coset_min_search(start: &BitVec, basis: &[BitVec], weights: &[u32]) -> (u64, BitVec) {
    const SERIAL_BITS: usize = 20;
    let num_start = norm_numerator_of(start, weights);
    if basis.len() <= SERIAL_BITS {
        return coset_walk_min(start, num_start, basis, weights);
    }
    use rayon::prelude::*;
    let low = SERIAL_BITS;
    let high = basis.len() - low;
    let chunks: Vec<u64> = (0..1u64 << high).collect();
    chunks
        .par_iter()
        .map(|&chunk| {
            let mut s = start.clone();
            for b in 0..high {
                if chunk >> b & 1 == 1 {
                    s.xor_assign(&basis[low + b]);
                }
            }
            let num = norm_numerator_of(&s, weights);
            coset_walk_min(&s, num, &basis[..low], weights)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .min_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)))
        .expect("at least one chunk")
}

/// Exact coset-minimal norm by Gray-code enumeration of the whole coset.
pub fn coset_min_norm(
    k: &Complex,
    f: &Cochain,
    convention: Convention,
    caps: &Caps,
) -> Result<CosetSummary> {
    let i = f.dim();
    if i > k.dim() {
        return Err(Error::invalid("cochain dimension above the complex"));
    }
    if k.face_count() == 0 {
        return Err(Error::EmptyComplex);
    }
    let basis = coboundary_basis(k, i, convention)?;
    if basis.len() as u64 > caps.coset as u64 {
        return Err(Error::capacity(
            "coset rank",
            caps.coset as u64,
            basis.len() as u64,
        ));
    }
    let weights = norm_numerators(k, i);
    let start = cochain_to_bits(k, f)?;
    let (best_num, best_support) = coset_min_search(&start, &basis, &weights);

    let delta_norm = if i < k.dim() {
        k.norm(&coboundary(k, f)?)?
    } else {
        ratio(0, 1)
    };
    Ok(CosetSummary {
        representative: bits_to_cochain(k, i, &best_support),
        coset_norm: ratio(best_num, k.weight_denominator(i)),
        delta_norm,
    })
}

/// True iff `‖f‖` equals its coset-minimal norm.
pub fn is_minimal(k: &Complex, f: &Cochain, convention: Convention, caps: &Caps) -> Result<bool> {
    let summary = coset_min_norm(k, f, convention, caps)?;
    Ok(k.norm(f)? == summary.coset_norm)
}

/// The `i`-th coboundary-expansion constant
/// `𝔥_i(K) = min ‖δ_i A‖ / ‖A + B^i‖` over cochains outside `B^i`,
/// computed per coset (`δ` is constant on each coset, saving a factor
/// `2^rank(B^i)` over per-cochain enumeration). `None` means no
/// non-coboundary cochain exists (`+∞`). Cosets whose minimal norm is
/// 0 are skipped.
pub fn expansion_constant(
    k: &Complex,
    i: usize,
    convention: Convention,
    caps: &Caps,
) -> Result<Option<BigRational>> {
    if k.dim() == 0 || i > k.dim() - 1 {
        return Err(Error::invalid("expansion constants live in 0 ≤ i ≤ d-1"));
    }
    if k.face_count() == 0 {
        return Err(Error::EmptyComplex);
    }
    let dim_ci = k.universe_size(i);
    if dim_ci > caps.ambient as u64 {
        return Err(Error::capacity(
            "ambient cochain dimension",
            caps.ambient as u64,
            dim_ci,
        ));
    }
    let basis = coboundary_basis(k, i, convention)?;
    if basis.len() as u64 > caps.coset as u64 {
        return Err(Error::capacity(
            "coset rank",
            caps.coset as u64,
            basis.len() as u64,
        ));
    }
    let (rref, pivot_cols) = {
        let mut m = F2Matrix::new(dim_ci as usize);
        for b in &basis {
            m.push(b.clone());
        }
        m.row_reduce()
    };
    let free: Vec<usize> = (0..dim_ci as usize)
        .filter(|c| !pivot_cols.contains(c))
        .collect();
    if free.is_empty() {
        return Ok(None); // C^i = B^i: nothing outside the coboundaries
    }

    let weights_i = norm_numerators(k, i);
    let weights_i1 = norm_numerators(k, i + 1);
    let delta_gens: Vec<BitVec> = free.iter().map(|&g| delta_generator(k, i, g)).collect();

    // Outer Gray walk over coset representatives spanned by the free
    // coordinates; inner walk finds each coset's minimal norm. Workers
    // partition the outer space by the high-order free coordinates.
    let prefix_bits = parallel_prefix_bits(free.len());
    let low = free.len() - prefix_bits;
    let chunks: Vec<u64> = (0..1u64 << prefix_bits).collect();
    use rayon::prelude::*;
    let best = chunks
        .par_iter()
        .map(|&chunk| {
            let mut rep = BitVec::zeros(dim_ci as usize);
            let mut delta = BitVec::zeros(k.universe_size(i + 1) as usize);
            let mut delta_num = 0u64;
            for b in 0..prefix_bits {
                if chunk >> b & 1 == 1 {
                    let g = low + b;
                    rep.flip(free[g]);
                    delta.xor_assign(&delta_gens[g]);
                }
            }
            delta_num += norm_numerator_of(&delta, &weights_i1);
            let mut local: Option<(u64, u64)> = None;
            let inner_steps = 1u64 << low;
            let consider = |delta_num: u64, rep: &BitVec, rref: &[BitVec]| {
                let rep_num = norm_numerator_of(rep, &weights_i);
                let (min_num, _) = coset_walk_min(rep, rep_num, rref, &weights_i);
                if min_num == 0 {
                    return None;
                }
                Some((delta_num, min_num))
            };
            // The chunk's own base point is a coset too (skip only the
            // global zero coset, which lives in chunk 0 at step 0).
            if chunk != 0 {
                if let Some(cand) = consider(delta_num, &rep, &rref) {
                    local = Some(cand);
                }
            }
            let mut step = 1u64;
            while step < inner_steps {
                let g = step.trailing_zeros() as usize;
                rep.flip(free[g]);
                delta.xor_assign(&delta_gens[g]);
                for j in delta_gens[g].iter_ones() {
                    if delta.get(j) {
                        delta_num += weights_i1[j] as u64;
                    } else {
                        delta_num -= weights_i1[j] as u64;
                    }
                }
                if let Some((dn, mn)) = consider(delta_num, &rep, &rref) {
                    let better = match local {
                        None => true,
                        Some((bd, bm)) => (dn as u128) * (bm as u128) < (bd as u128) * (mn as u128),
                    };
                    if better {
                        local = Some((dn, mn));
                    }
                }
                step += 1;
            }
            local
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(None::<(u64, u64)>, |acc, cand| match (acc, cand) {
            (None, c) => c,
            (a, None) => a,
            (Some((ad, am)), Some((cd, cm))) => {
                if (cd as u128) * (am as u128) < (ad as u128) * (cm as u128) {
                    Some((cd, cm))
                } else {
                    Some((ad, am))
                }
            }
        });

    Ok(best.map(|(dnum, mnum)| {
        let c_i = binomial(k.dim() as u64 + 1, i as u64 + 1);
        let c_i1 = binomial(k.dim() as u64 + 1, i as u64 + 2);
        // (dnum/(c_i1·F)) / (mnum/(c_i·F)) = dnum·c_i / (mnum·c_i1)
        ratio(dnum * c_i, mnum * c_i1)
    }))
}

fn parallel_prefix_bits(free_len: usize) -> usize {
    if free_len > 16 {
        (free_len - 16).min(8)
    } else {
        0
    }
}

/// `𝔥_i(K)` for every `i`, so `𝔥(K)` is the minimum of the entries.
pub fn expansion_profile(
    k: &Complex,
    convention: Convention,
    caps: &Caps,
) -> Result<Vec<Option<BigRational>>> {
    (0..k.dim())
        .map(|i| expansion_constant(k, i, convention, caps))
        .collect()
}

/// Dimension of reduced (or unreduced) `H^i(K; F₂)`:
/// `dim ker δ_i − rank δ_{i-1}`, by bit-packed elimination.
pub fn cohomology_dim(k: &Complex, i: usize, convention: Convention) -> Result<usize> {
    if k.dim() == 0 || i > k.dim() - 1 {
        return Err(Error::invalid("cohomology dims computed for 0 ≤ i ≤ d-1"));
    }
    let dim_ci = k.universe_size(i) as usize;
    // rank δ_i, eliminated over rows = (i+1)-faces (their subface
    // sets). A matrix and its transpose have equal rank, and this
    // orientation admits early exit at the structural bound
    // C(n-1, i+1): the rows are a subset of the full simplex's rows.
    let bound = binomial(k.vertex_count() as u64 - 1, i as u64 + 1) as usize;
    let mut m = F2Matrix::new(dim_ci);
    let count = k.universe_size(i + 1) as usize;
    let mut scratch = Vec::new();
    for idx in 0..count {
        let face = index_face(k, i + 1, idx);
        let mut row = BitVec::zeros(dim_ci);
        let zero: Vec<u32> = face.vertices().iter().map(|&v| v - 1).collect();
        crate::simplicial::for_each_subset(&zero, i + 1, &mut scratch, &mut |s| {
            row.flip(crate::combinatorics::colex_rank(s) as usize);
        });
        m.push(row);
    }
    let rank_i = m.rank(Some(bound));
    let rank_prev = if i == 0 {
        match convention {
            Convention::Reduced => 1,
            Convention::Unreduced => 0,
        }
    } else {
        // δ_{i-1} acts between complete universes (i-1 < i ≤ d-1), so
        // its rank is the full-simplex value C(n-1, i).
        binomial(k.vertex_count() as u64 - 1, i as u64) as usize
    };
    Ok(dim_ci - rank_i - rank_prev)
}

/// Exhaustive check of the simplex expansion bound
/// `|δ_i A| ≥ |A|·n/(i+2)` over every minimal `A` in the full simplex
/// on `[n]`. `δ` is constant on cosets and simplex weights are uniform,
/// so one test per coset at the coset-minimal cardinality covers every
/// minimal set at once.
pub fn meshulam_wallach_check(n: u32, i: usize, caps: &Caps) -> Result<bool> {
    let k = Complex::simplex(n);
    if i + 1 >= k.dim() {
        return Err(Error::invalid("bound needs i+1 below the top dimension"));
    }
    let dim_ci = k.universe_size(i);
    if dim_ci > caps.ambient as u64 {
        return Err(Error::capacity(
            "ambient cochain dimension",
            caps.ambient as u64,
            dim_ci,
        ));
    }
    let basis = coboundary_basis(&k, i, Convention::Reduced)?;
    if basis.len() as u64 > caps.coset as u64 {
        return Err(Error::capacity(
            "coset rank",
            caps.coset as u64,
            basis.len() as u64,
        ));
    }
    let (rref, pivot_cols) = {
        let mut m = F2Matrix::new(dim_ci as usize);
        for b in &basis {
            m.push(b.clone());
        }
        m.row_reduce()
    };
    let free: Vec<usize> = (0..dim_ci as usize)
        .filter(|c| !pivot_cols.contains(c))
        .collect();
    let uniform = vec![1u32; dim_ci as usize];
    let delta_gens: Vec<BitVec> = free.iter().map(|&g| delta_generator(&k, i, g)).collect();

    let mut rep = BitVec::zeros(dim_ci as usize);
    let mut delta = BitVec::zeros(k.universe_size(i + 1) as usize);
    let cosets: u64 = 1u64 << free.len();
    let mut step = 1u64;
    while step < cosets {
        let g = step.trailing_zeros() as usize;
        rep.flip(free[g]);
        delta.xor_assign(&delta_gens[g]);
        let rep_num = rep.count_ones();
        let (min_card, _) = coset_walk_min(&rep, rep_num, &rref, &uniform);
        // |δA|·(i+2) ≥ min|A|·n, in integers.
        if delta.count_ones() * (i as u64 + 2) < min_card * n as u64 {
            return Ok(false);
        }
        step += 1;
    }
    Ok(true)
}
