//! Multi-index combinatorics and the number-state basis of the symmetric
//! subspace `Sym((R^n)^{⊗ℓ})`.
//!
//! Production code only ever works in the `p = C(ℓ+n-1, ℓ)` dimensional
//! number-state basis. The dense helpers at the bottom of this module build
//! the same objects on the full `n^ℓ` product space and exist so tests can
//! check the compact formulas against first principles.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::special::{binomial, ln_binomial, ln_factorial};

/// Largest product-space dimension the dense oracles will materialize.
pub const DENSE_ORACLE_CAP: usize = 10_000;

/// Exponent vector of a monomial `x^i = x_1^{i_1} ... x_n^{i_n}`.
///
/// Ordered graded-lexicographically: lower total degree first, then larger
/// leading exponents first, so `(2,0) < (1,1) < (0,2)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    exponents: Vec<u32>,
    degree: u32,
}

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        let degree = exponents.iter().sum();
        Self { exponents, degree }
    }

    pub fn zero(n: usize) -> Self {
        Self::new(vec![0; n])
    }

    /// `x_t^degree`.
    pub fn pure(n: usize, t: usize, degree: u32) -> Self {
        let mut e = vec![0; n];
        e[t] = degree;
        Self::new(e)
    }

    #[inline]
    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.exponents.len()
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.degree as usize
    }

    /// `i! = i_1! ... i_n!` in log space.
    pub fn ln_factorial(&self) -> f64 {
        self.exponents.iter().map(|&e| ln_factorial(e)).sum()
    }

    /// Componentwise sum. Panics on length mismatch.
    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        assert_eq!(self.n(), other.n(), "multi-index length mismatch");
        MultiIndex::new(
            self.exponents
                .iter()
                .zip(&other.exponents)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    /// `i + k e_t`.
    pub fn shifted_up(&self, t: usize, k: u32) -> MultiIndex {
        let mut e = self.exponents.clone();
        e[t] += k;
        MultiIndex::new(e)
    }

    /// `i - k e_t`, or `None` when the exponent would go negative.
    pub fn shifted_down(&self, t: usize, k: u32) -> Option<MultiIndex> {
        let mut e = self.exponents.clone();
        e[t] = e[t].checked_sub(k)?;
        Some(MultiIndex::new(e))
    }

    /// True when every exponent is even.
    pub fn is_even(&self) -> bool {
        self.exponents.iter().all(|e| e % 2 == 0)
    }

    /// `i / 2`, defined only for even multi-indices.
    pub fn halved(&self) -> Option<MultiIndex> {
        self.is_even()
            .then(|| MultiIndex::new(self.exponents.iter().map(|e| e / 2).collect()))
    }

    /// `x^i` evaluated at `x`.
    pub fn monomial(&self, x: &[f64]) -> f64 {
        self.exponents
            .iter()
            .zip(x)
            .map(|(&e, &xi)| xi.powi(e as i32))
            .product()
    }

    /// Componentwise `self <= other`.
    pub fn divides(&self, other: &MultiIndex) -> bool {
        self.exponents
            .iter()
            .zip(&other.exponents)
            .all(|(a, b)| a <= b)
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree
            .cmp(&other.degree)
            .then_with(|| other.exponents.cmp(&self.exponents))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.exponents)
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex::new(v)
    }
}

/// All multi-indices of length `n` and total degree `d`, in graded-lex order.
pub fn enumerate_multiindices(n: usize, d: usize) -> Vec<MultiIndex> {
    assert!(n >= 1, "enumerate_multiindices requires n >= 1");
    let mut out = Vec::new();
    let mut current = vec![0u32; n];
    fill(&mut current, 0, d as u32, &mut out);
    out
}

fn fill(current: &mut [u32], pos: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(MultiIndex::new(current.to_vec()));
        return;
    }
    for e in (0..=remaining).rev() {
        current[pos] = e;
        fill(current, pos + 1, remaining - e, out);
    }
}

/// Dimension `C(ℓ+n-1, ℓ)` of `Sym((R^n)^{⊗ℓ})`.
pub fn sym_dimension(n: usize, ell: usize) -> Result<usize> {
    assert!(n >= 1, "sym_dimension requires n >= 1");
    let v = binomial((ell + n - 1) as u64, ell as u64)?;
    usize::try_from(v).map_err(|_| Error::Overflow("symmetric subspace dimension"))
}

/// Ordered list of all degree-`ℓ` multi-indices with an inverse lookup.
#[derive(Debug)]
pub struct BasisCatalog {
    n: usize,
    degree: usize,
    indices: Vec<MultiIndex>,
    positions: HashMap<MultiIndex, usize>,
}

impl BasisCatalog {
    pub fn new(n: usize, degree: usize) -> Self {
        let indices = enumerate_multiindices(n, degree);
        let positions = indices
            .iter()
            .enumerate()
            .map(|(pos, idx)| (idx.clone(), pos))
            .collect();
        Self {
            n,
            degree,
            indices,
            positions,
        }
    }

    /// Process-wide memoized catalog. Catalogs are immutable once built.
    pub fn shared(n: usize, degree: usize) -> Arc<BasisCatalog> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<BasisCatalog>>>> =
            OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        guard
            .entry((n, degree))
            .or_insert_with(|| Arc::new(BasisCatalog::new(n, degree)))
            .clone()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn get(&self, pos: usize) -> &MultiIndex {
        &self.indices[pos]
    }

    pub fn position(&self, idx: &MultiIndex) -> Option<usize> {
        self.positions.get(idx).copied()
    }
}

/// Coefficient `⟨i ⊗ j | k⟩` of the degree-`2ℓ` number state `|k⟩` on the
/// pair of degree-`ℓ` number states `|i⟩ ⊗ |j⟩`.
///
/// Equals `sqrt(∏_t C(k_t, i_t) / C(2ℓ, ℓ))` when `i + j = k` and zero
/// otherwise. Panics on a degree mismatch between the arguments.
pub fn number_state_overlap(i: &MultiIndex, j: &MultiIndex, k: &MultiIndex) -> f64 {
    assert_eq!(i.degree(), j.degree(), "overlap: |i| != |j|");
    assert_eq!(k.degree(), 2 * i.degree(), "overlap: |k| != 2|i|");
    assert!(i.n() == j.n() && j.n() == k.n(), "overlap: length mismatch");
    let matches = i
        .exponents()
        .iter()
        .zip(j.exponents())
        .zip(k.exponents())
        .all(|((a, b), c)| a + b == *c);
    if !matches {
        return 0.0;
    }
    overlap_unchecked(i, k)
}

/// Overlap for `j = k - i`, assuming `i <= k` componentwise.
pub(crate) fn overlap_unchecked(i: &MultiIndex, k: &MultiIndex) -> f64 {
    let ell = i.degree() as u32;
    let ln_num: f64 = i
        .exponents()
        .iter()
        .zip(k.exponents())
        .map(|(&a, &c)| ln_binomial(c, a))
        .sum();
    (0.5 * (ln_num - ln_binomial(2 * ell, ell))).exp()
}

fn dense_size(n: usize, ell: usize) -> Result<usize> {
    let mut size: usize = 1;
    for _ in 0..ell {
        size = size.saturating_mul(n);
        if size > DENSE_ORACLE_CAP {
            return Err(Error::SizeGuard {
                size,
                cap: DENSE_ORACLE_CAP,
            });
        }
    }
    Ok(size)
}

/// Digits of a product-basis index, most significant factor first.
fn digits(mut index: usize, n: usize, ell: usize) -> Vec<usize> {
    let mut d = vec![0; ell];
    for slot in d.iter_mut().rev() {
        *slot = index % n;
        index /= n;
    }
    d
}

fn undigits(d: &[usize], n: usize) -> usize {
    d.iter().fold(0, |acc, &x| acc * n + x)
}

fn permutations(ell: usize) -> Vec<Vec<usize>> {
    let mut perm: Vec<usize> = (0..ell).collect();
    let mut out = vec![perm.clone()];
    // Heap's algorithm, iterative
    let mut c = vec![0usize; ell];
    let mut i = 0;
    while i < ell {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            out.push(perm.clone());
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

/// The projector `Π_ℓ = (1/ℓ!) Σ_π π` onto the symmetric subspace, as an
/// explicit `n^ℓ × n^ℓ` matrix.
pub fn dense_symmetrizer(n: usize, ell: usize) -> Result<DMatrix<f64>> {
    let size = dense_size(n, ell)?;
    if ell > 8 {
        return Err(Error::SizeGuard {
            size: (1..=ell).product(),
            cap: 40_320,
        });
    }
    let perms = permutations(ell);
    let weight = 1.0 / perms.len() as f64;
    let mut pi = DMatrix::zeros(size, size);
    for col in 0..size {
        let d = digits(col, n, ell);
        for perm in &perms {
            let permuted: Vec<usize> = perm.iter().map(|&p| d[p]).collect();
            pi[(undigits(&permuted, n), col)] += weight;
        }
    }
    Ok(pi)
}

/// The number state `|i⟩` written out in the product basis of `(R^n)^{⊗ℓ}`.
pub fn dense_number_state(i: &MultiIndex) -> Result<DVector<f64>> {
    let n = i.n();
    let ell = i.degree();
    let size = dense_size(n, ell)?;
    // c_i times the number of permutations fixing a given arrangement (i!)
    let amplitude = (0.5 * (i.ln_factorial() - ln_factorial(ell as u32))).exp();
    let mut v = DVector::zeros(size);
    for idx in 0..size {
        let mut counts = vec![0u32; n];
        for digit in digits(idx, n, ell) {
            counts[digit] += 1;
        }
        if counts == i.exponents() {
            v[idx] = amplitude;
        }
    }
    Ok(v)
}

/// `|x⟩^{⊗ℓ}` in the product basis.
pub fn dense_product_state(x: &[f64], ell: usize) -> Result<DVector<f64>> {
    let n = x.len();
    let size = dense_size(n, ell)?;
    Ok(DVector::from_fn(size, |idx, _| {
        digits(idx, n, ell).iter().map(|&d| x[d]).product()
    }))
}

/// Isometry whose columns are the number states of `BasisCatalog(n, ℓ)`.
pub fn dense_number_basis(n: usize, ell: usize) -> Result<DMatrix<f64>> {
    let catalog = BasisCatalog::shared(n, ell);
    let size = dense_size(n, ell)?;
    let mut m = DMatrix::zeros(size, catalog.len());
    for (col, idx) in catalog.indices().iter().enumerate() {
        m.set_column(col, &dense_number_state(idx)?);
    }
    Ok(m)
}

/// `tr_W` over the last `b` tensor factors of an operator on `(R^n)^{⊗ℓ}`.
pub fn dense_partial_trace(m: &DMatrix<f64>, n: usize, ell: usize, b: usize) -> DMatrix<f64> {
    assert!(b <= ell);
    let keep = n.pow((ell - b) as u32);
    let traced = n.pow(b as u32);
    let mut out = DMatrix::zeros(keep, keep);
    for u in 0..keep {
        for v in 0..keep {
            let mut s = 0.0;
            for w in 0..traced {
                s += m[(u * traced + w, v * traced + w)];
            }
            out[(u, v)] = s;
        }
    }
    out
}
