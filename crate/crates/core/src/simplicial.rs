//! Faces, complexes, links, weights, and norms.
//!
//! A [`Complex`] is a `d`-dimensional complex on the vertex set `[n]`
//! stored as its set of top faces; the `(d-1)`-skeleton is complete by
//! convention, so lower faces are never stored. The weight of an
//! `i`-face is its top-face cover count divided by `C(d+1,i+1)·|K(d)|`,
//! which makes the total weight of each dimension exactly 1; norms of
//! cochains are support-weight sums. All weights are exact rationals.

use std::fmt;
use std::path::Path;
use std::sync::{Arc, OnceLock};

use num::{BigInt, BigRational};

use crate::combinatorics::{binomial, colex_rank, colex_unrank};
use crate::error::{Error, Result};

/// A face: strictly increasing vertices in `1..=n`. Dimension is
/// `len - 1`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Face {
    verts: Vec<u32>,
}

impl Face {
    pub fn new(verts: Vec<u32>) -> Result<Self> {
        if verts.is_empty() {
            return Err(Error::invalid("a face needs at least one vertex"));
        }
        if !verts.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::invalid(format!(
                "face {verts:?} is not strictly increasing"
            )));
        }
        if verts[0] == 0 {
            return Err(Error::invalid("vertices are 1-based"));
        }
        Ok(Face { verts })
    }

    pub fn vertices(&self) -> &[u32] {
        &self.verts
    }

    pub fn dim(&self) -> usize {
        self.verts.len() - 1
    }

    pub fn contains(&self, other: &Face) -> bool {
        // Both sorted; subset test by merge walk.
        let mut it = self.verts.iter();
        other.verts.iter().all(|v| it.any(|w| w == v))
    }

    /// Colex rank among subsets of the same cardinality (0-based vertices).
    pub fn rank(&self) -> u64 {
        let zero_based: Vec<u32> = self.verts.iter().map(|&v| v - 1).collect();
        colex_rank(&zero_based)
    }

    /// Inverse of [`Face::rank`] for `dim + 1`-element faces.
    pub fn from_rank(rank: u64, dim: usize) -> Self {
        let mut buf = Vec::new();
        colex_unrank(rank, dim + 1, &mut buf);
        Face {
            verts: buf.into_iter().map(|v| v + 1).collect(),
        }
    }

    fn check_range(&self, n: u32) -> Result<()> {
        if *self.verts.last().unwrap() > n {
            return Err(Error::invalid(format!(
                "face {:?} has a vertex outside [1, {n}]",
                self.verts
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Face {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let strs: Vec<String> = self.verts.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", strs.join(" "))
    }
}

/// An F₂ `i`-cochain, represented by its support.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cochain {
    dim: usize,
    support: Vec<Face>,
}

impl Cochain {
    pub fn new(dim: usize, mut support: Vec<Face>) -> Result<Self> {
        if support.iter().any(|f| f.dim() != dim) {
            return Err(Error::invalid("cochain support mixes dimensions"));
        }
        support.sort();
        support.dedup();
        Ok(Cochain { dim, support })
    }

    pub fn zero(dim: usize) -> Self {
        Cochain {
            dim,
            support: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn support(&self) -> &[Face] {
        &self.support
    }

    pub fn is_zero(&self) -> bool {
        self.support.is_empty()
    }
}

/// A `d`-dimensional complex on `[n]` with complete `(d-1)`-skeleton,
/// stored as its sorted set of top faces.
#[derive(Debug, Clone)]
pub struct Complex {
    n: u32,
    d: usize,
    top: Vec<Face>,
    top_ranks: Vec<u64>,
    covers: Arc<Vec<OnceLock<Arc<Vec<u32>>>>>,
}

impl PartialEq for Complex {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.d == other.d && self.top == other.top
    }
}
impl Eq for Complex {}

impl Complex {
    pub fn new(n: u32, d: usize, mut top: Vec<Face>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("n must be at least 1"));
        }
        if d as u64 + 1 > n as u64 {
            return Err(Error::invalid(format!(
                "dimension {d} needs at least {} vertices, have {n}",
                d + 1
            )));
        }
        for f in &top {
            if f.dim() != d {
                return Err(Error::invalid(format!(
                    "face {f} has dimension {} in a {d}-complex",
                    f.dim()
                )));
            }
            f.check_range(n)?;
        }
        // Top faces ordered by colex rank, so positions in `top` and
        // `top_ranks` coincide and double as the top universe index.
        top.sort_by_key(Face::rank);
        let before = top.len();
        top.dedup();
        if top.len() != before {
            return Err(Error::invalid("duplicate top faces"));
        }
        let top_ranks: Vec<u64> = top.iter().map(Face::rank).collect();
        let covers = Arc::new((0..=d).map(|_| OnceLock::new()).collect());
        Ok(Complex {
            n,
            d,
            top,
            top_ranks,
            covers,
        })
    }

    /// Construction from colex ranks of the top faces.
    pub fn from_ranks(n: u32, d: usize, ranks: &[u64]) -> Result<Self> {
        let faces = ranks.iter().map(|&r| Face::from_rank(r, d)).collect();
        Complex::new(n, d, faces)
    }

    /// The full simplex on `[n]` as a complex (one top face).
    pub fn simplex(n: u32) -> Self {
        let face = Face::new((1..=n).collect()).unwrap();
        Complex::new(n, n as usize - 1, vec![face]).unwrap()
    }

    pub fn vertex_count(&self) -> u32 {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn top_faces(&self) -> &[Face] {
        &self.top
    }

    /// Colex ranks of the top faces, ascending.
    pub fn top_ranks(&self) -> &[u64] {
        &self.top_ranks
    }

    pub fn face_count(&self) -> u64 {
        self.top.len() as u64
    }

    /// Number of `i`-faces of the complex: all `(i+1)`-subsets for
    /// `i < d` (complete skeleton), the stored set for `i = d`.
    pub fn universe_size(&self, i: usize) -> u64 {
        if i < self.d {
            binomial(self.n as u64, i as u64 + 1)
        } else {
            self.face_count()
        }
    }

    pub fn contains_top(&self, face: &Face) -> bool {
        face.dim() == self.d && self.top_ranks.binary_search(&face.rank()).is_ok()
    }

    /// Cover counts of every `i`-face, indexed by colex rank. Built once
    /// per dimension, shared by clones.
    pub fn cover_counts(&self, i: usize) -> Arc<Vec<u32>> {
        assert!(i <= self.d, "cover_counts asks for dimension above top");
        self.covers[i]
            .get_or_init(|| {
                let size = binomial(self.n as u64, i as u64 + 1) as usize;
                let mut counts = vec![0u32; size];
                let mut sub = Vec::new();
                for face in &self.top {
                    let zero: Vec<u32> = face.vertices().iter().map(|&v| v - 1).collect();
                    for_each_subset(&zero, i + 1, &mut sub, &mut |s| {
                        counts[colex_rank(s) as usize] += 1;
                    });
                }
                Arc::new(counts)
            })
            .clone()
    }

    /// `|{τ ∈ K(d) : σ ⊆ τ}|`; for a top-dimensional face this is plain
    /// membership.
    pub fn cover_count(&self, sigma: &Face) -> Result<u64> {
        sigma.check_range(self.n)?;
        if sigma.dim() > self.d {
            return Err(Error::invalid(format!(
                "face of dimension {} in a {}-complex",
                sigma.dim(),
                self.d
            )));
        }
        if sigma.dim() == self.d {
            return Ok(self.contains_top(sigma) as u64);
        }
        Ok(self.cover_counts(sigma.dim())[sigma.rank() as usize] as u64)
    }

    /// Weight denominator for dimension `i`: `C(d+1, i+1) · |K(d)|`.
    pub fn weight_denominator(&self, i: usize) -> u64 {
        binomial(self.d as u64 + 1, i as u64 + 1) * self.face_count()
    }

    /// `w(σ) = cover_count(σ) / (C(d+1,i+1)·|K(d)|)`, exact.
    pub fn weight(&self, sigma: &Face) -> Result<BigRational> {
        if self.top.is_empty() {
            return Err(Error::EmptyComplex);
        }
        let num = self.cover_count(sigma)?;
        Ok(ratio(num, self.weight_denominator(sigma.dim())))
    }

    /// `‖f‖ = Σ_{σ ∈ supp f} w(σ)`, exact.
    pub fn norm(&self, f: &Cochain) -> Result<BigRational> {
        if self.top.is_empty() {
            return Err(Error::EmptyComplex);
        }
        if f.dim() > self.d {
            return Err(Error::invalid("cochain dimension above top"));
        }
        let mut num = 0u64;
        for sigma in f.support() {
            num += self.cover_count(sigma)?;
        }
        Ok(ratio(num, self.weight_denominator(f.dim())))
    }

    /// The link of `σ`: the `(d-|σ|)`-complex on `n-|σ|` vertices whose
    /// top faces are `{τ∖σ : σ ⊆ τ ∈ K(d)}`, with the surviving vertices
    /// relabeled order-preservingly onto `1..=n-|σ|`. Returns the
    /// new-to-old vertex map alongside.
    pub fn link(&self, sigma: &Face) -> Result<(Complex, Vec<u32>)> {
        sigma.check_range(self.n)?;
        let s = sigma.dim() + 1;
        if s > self.d {
            return Err(Error::invalid(format!(
                "link of a {}-face in a {}-complex",
                sigma.dim(),
                self.d
            )));
        }
        let new_to_old: Vec<u32> = (1..=self.n)
            .filter(|v| !sigma.vertices().contains(v))
            .collect();
        let mut old_to_new = vec![0u32; self.n as usize + 1];
        for (idx, &old) in new_to_old.iter().enumerate() {
            old_to_new[old as usize] = idx as u32 + 1;
        }
        let mut faces = Vec::new();
        for tau in &self.top {
            if tau.contains(sigma) {
                let rest: Vec<u32> = tau
                    .vertices()
                    .iter()
                    .filter(|v| !sigma.vertices().contains(v))
                    .map(|&v| old_to_new[v as usize])
                    .collect();
                faces.push(Face::new(rest)?);
            }
        }
        let link = Complex::new(self.n - s as u32, self.d - s, faces)?;
        Ok((link, new_to_old))
    }

    /// `|{σ ∈ K(d) : |σ ∩ A| = i}|`.
    pub fn overlap_face_count(&self, a: &[u32], i: usize) -> u64 {
        let mut in_a = vec![false; self.n as usize + 1];
        for &v in a {
            if v >= 1 && v <= self.n {
                in_a[v as usize] = true;
            }
        }
        self.top
            .iter()
            .filter(|f| {
                f.vertices().iter().filter(|&&v| in_a[v as usize]).count() == i
            })
            .count() as u64
    }

    /// `|{σ ∈ K(d) : |σ ∩ A| ≥ 2}|`.
    pub fn overlap_at_least_two(&self, a: &[u32]) -> u64 {
        (2..=self.d + 1)
            .map(|i| self.overlap_face_count(a, i))
            .sum()
    }

    /// Norm of the 1-cochain of edges with both endpoints in `A`.
    pub fn edge_norm(&self, a: &[u32]) -> Result<BigRational> {
        if self.d < 1 {
            return Err(Error::invalid("edge norm needs dimension at least 1"));
        }
        if self.top.is_empty() {
            return Err(Error::EmptyComplex);
        }
        let covers = self.cover_counts(1);
        let mut verts: Vec<u32> = a.to_vec();
        verts.sort_unstable();
        verts.dedup();
        let mut num = 0u64;
        for (j, &v) in verts.iter().enumerate() {
            for &u in &verts[..j] {
                let rank = colex_rank(&[u - 1, v - 1]);
                num += covers[rank as usize] as u64;
            }
        }
        Ok(ratio(num, self.weight_denominator(1)))
    }

    /// True when every `(d-1)`-face is covered by some top face.
    pub fn is_pure(&self) -> bool {
        if self.d == 0 {
            return self.face_count() == self.universe_size(0);
        }
        self.cover_counts(self.d - 1).iter().all(|&c| c > 0)
    }

    /// Serializes in the standard file format.
    pub fn to_file_string(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.d);
        for face in &self.top {
            out.push_str(&face.to_string());
            out.push('\n');
        }
        out
    }

    /// Parses the standard format: header `n d`, then one top face per
    /// line; blank lines and `#` comments ignored; duplicates rejected.
    pub fn parse(text: &str) -> Result<Self> {
        let mut header: Option<(u32, usize)> = None;
        let mut faces = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let nums: std::result::Result<Vec<u64>, _> =
                line.split_whitespace().map(str::parse::<u64>).collect();
            let nums = nums.map_err(|_| Error::Parse {
                line: idx + 1,
                msg: format!("expected integers, got `{line}`"),
            })?;
            match header {
                None => {
                    if nums.len() != 2 {
                        return Err(Error::Parse {
                            line: idx + 1,
                            msg: "header must be `n d`".into(),
                        });
                    }
                    header = Some((nums[0] as u32, nums[1] as usize));
                }
                Some((_, d)) => {
                    if nums.len() != d + 1 {
                        return Err(Error::Parse {
                            line: idx + 1,
                            msg: format!("expected {} vertices, got {}", d + 1, nums.len()),
                        });
                    }
                    let verts: Vec<u32> = nums.iter().map(|&v| v as u32).collect();
                    faces.push(Face::new(verts).map_err(|e| Error::Parse {
                        line: idx + 1,
                        msg: e.to_string(),
                    })?);
                }
            }
        }
        let (n, d) = header.ok_or(Error::Parse {
            line: 0,
            msg: "missing header".into(),
        })?;
        let mut sorted = faces.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != faces.len() {
            return Err(Error::Parse {
                line: 0,
                msg: "duplicate top faces".into(),
            });
        }
        Complex::new(n, d, faces)
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<Self> {
        Complex::parse(&std::fs::read_to_string(path)?)
    }

    pub fn write_file(&self, path: impl AsRef<Path>) -> Result<()> {
        Ok(std::fs::write(path, self.to_file_string())?)
    }
}

pub(crate) fn ratio(num: u64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Calls `f` on every `k`-subset of the sorted slice `set`.
pub(crate) fn for_each_subset(
    set: &[u32],
    k: usize,
    scratch: &mut Vec<u32>,
    f: &mut impl FnMut(&[u32]),
) {
    fn rec(
        set: &[u32],
        k: usize,
        start: usize,
        scratch: &mut Vec<u32>,
        f: &mut impl FnMut(&[u32]),
    ) {
        if scratch.len() == k {
            f(scratch);
            return;
        }
        let remaining = k - scratch.len();
        for i in start..=set.len().saturating_sub(remaining) {
            scratch.push(set[i]);
            rec(set, k, i + 1, scratch, f);
            scratch.pop();
        }
    }
    scratch.clear();
    if k <= set.len() {
        rec(set, k, 0, scratch, f);
    }
}
