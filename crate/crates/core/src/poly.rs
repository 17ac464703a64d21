//! Homogeneous polynomials and their encoding as maximally symmetric
//! matrices on the symmetric subspace.
//!
//! A [`MaxSymMatrix`] is stored as the coefficient vector `α` of its
//! degree-`2ℓ` polynomial `Q_M(x) = ⟨x|^{⊗ℓ} M |x⟩^{⊗ℓ}`. The `p × p` matrix in
//! the number-state basis is derived on demand:
//!
//! ```text
//! M[i, j] = β_{i+j} · ⟨i ⊗ j | i+j⟩,    β_k = sqrt(k! / (2ℓ)!) · α_k
//! ```
//!
//! `β` is the orthonormal coordinate of `|M⟩` in the degree-`2ℓ` number basis.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};
use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::special::{ln_factorial, multinomial};
use crate::symbasis::{enumerate_multiindices, overlap_unchecked, BasisCatalog, MultiIndex};

/// Sparse homogeneous polynomial `T(x) = Σ_i α_i x^i` with `|i| = degree`.
#[derive(Clone, Debug, PartialEq)]
pub struct HomoPoly {
    n: usize,
    degree: usize,
    terms: BTreeMap<MultiIndex, f64>,
}

impl HomoPoly {
    pub fn zero(n: usize, degree: usize) -> Self {
        Self {
            n,
            degree,
            terms: BTreeMap::new(),
        }
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs. Repeated
    /// monomials are summed; zero coefficients are dropped.
    pub fn from_terms<I>(n: usize, degree: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, f64)>,
    {
        let mut p = Self::zero(n, degree);
        for (idx, c) in terms {
            if idx.n() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: idx.n(),
                });
            }
            if idx.degree() != degree {
                return Err(Error::DegreeMismatch {
                    expected: degree,
                    got: idx.degree(),
                });
            }
            p.add_term(idx, c);
        }
        Ok(p)
    }

    /// Convenience constructor from plain exponent vectors.
    pub fn from_pairs(n: usize, degree: usize, terms: &[(&[u32], f64)]) -> Result<Self> {
        Self::from_terms(
            n,
            degree,
            terms.iter().map(|(e, c)| (MultiIndex::new(e.to_vec()), *c)),
        )
    }

    /// Dense coefficient vector indexed by `BasisCatalog(n, degree)`.
    pub fn from_dense(n: usize, degree: usize, coeffs: &DVector<f64>) -> Self {
        let catalog = BasisCatalog::shared(n, degree);
        assert_eq!(coeffs.len(), catalog.len(), "coefficient vector length");
        let mut p = Self::zero(n, degree);
        for (idx, &c) in catalog.indices().iter().zip(coeffs.iter()) {
            p.add_term(idx.clone(), c);
        }
        p
    }

    pub fn monomial(exponents: Vec<u32>, coeff: f64) -> Self {
        let idx = MultiIndex::new(exponents);
        let mut p = Self::zero(idx.n(), idx.degree());
        p.add_term(idx, coeff);
        p
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self::monomial(vec![0; n], c)
    }

    /// `r(x)^{2k} = (x_1^2 + ... + x_n^2)^k`.
    pub fn r2_power(n: usize, k: usize) -> Self {
        let mut p = Self::zero(n, 2 * k);
        for half in enumerate_multiindices(n, k) {
            let c = multinomial(half.exponents());
            let full = MultiIndex::new(half.exponents().iter().map(|e| 2 * e).collect());
            p.add_term(full, c);
        }
        p
    }

    fn add_term(&mut self, idx: MultiIndex, c: f64) {
        if c == 0.0 {
            return;
        }
        let slot = self.terms.entry(idx).or_insert(0.0);
        *slot += c;
        if *slot == 0.0 {
            let key = self
                .terms
                .iter()
                .find(|(_, v)| **v == 0.0)
                .map(|(k, _)| k.clone());
            if let Some(key) = key {
                self.terms.remove(&key);
            }
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, f64)> {
        self.terms.iter().map(|(k, v)| (k, *v))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.is_zero()
    }

    pub fn coeff(&self, idx: &MultiIndex) -> f64 {
        self.terms.get(idx).copied().unwrap_or(0.0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Dense coefficient vector in `BasisCatalog(n, degree)` order.
    pub fn to_dense(&self) -> DVector<f64> {
        let catalog = BasisCatalog::shared(self.n, self.degree);
        let mut v = DVector::zeros(catalog.len());
        for (idx, c) in self.terms() {
            let pos = catalog.position(idx).expect("term outside catalog");
            v[pos] = c;
        }
        v
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.check_len(x)?;
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(idx, c)| c * idx.monomial(x)).sum()
    }

    /// Analytic gradient `∇T(x)`.
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x)?;
        let mut g = vec![0.0; self.n];
        for (idx, c) in &self.terms {
            for (t, gt) in g.iter_mut().enumerate() {
                let e = idx.exponents()[t];
                if e == 0 {
                    continue;
                }
                let lower = idx.shifted_down(t, 1).expect("positive exponent");
                *gt += c * f64::from(e) * lower.monomial(x);
            }
        }
        Ok(g)
    }

    fn check_len(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut p = Self::zero(self.n, self.degree);
        for (idx, c) in self.terms() {
            p.add_term(idx.clone(), s * c);
        }
        p
    }

    pub fn add(&self, other: &HomoPoly) -> Result<Self> {
        self.check_compatible(other)?;
        let mut p = self.clone();
        for (idx, c) in other.terms() {
            p.add_term(idx.clone(), c);
        }
        Ok(p)
    }

    pub fn sub(&self, other: &HomoPoly) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    fn check_compatible(&self, other: &HomoPoly) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch {
                expected: self.degree,
                got: other.degree,
            });
        }
        Ok(())
    }

    /// Full product.
    pub fn product(&self, other: &HomoPoly) -> HomoPoly {
        assert_eq!(self.n, other.n, "product: variable count mismatch");
        let mut acc: BTreeMap<MultiIndex, f64> = BTreeMap::new();
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                *acc.entry(a.add(b)).or_insert(0.0) += ca * cb;
            }
        }
        let mut p = Self::zero(self.n, self.degree + other.degree);
        p.terms = acc.into_iter().filter(|(_, c)| *c != 0.0).collect();
        p
    }

    /// `T(x) · r(x)^{2k}`.
    pub fn multiply_r2(&self, k: usize) -> HomoPoly {
        if k == 0 {
            return self.clone();
        }
        self.product(&HomoPoly::r2_power(self.n, k))
    }

    /// `ΔT = Σ_t ∂²T/∂x_t²`.
    pub fn laplacian(&self) -> Result<HomoPoly> {
        if self.degree < 2 {
            return Err(Error::DegreeTooHigh {
                degree: 2,
                target: self.degree,
            });
        }
        let mut acc: BTreeMap<MultiIndex, f64> = BTreeMap::new();
        for (idx, c) in &self.terms {
            for t in 0..self.n {
                let e = idx.exponents()[t];
                if e >= 2 {
                    let lower = idx.shifted_down(t, 2).expect("exponent >= 2");
                    *acc.entry(lower).or_insert(0.0) += c * f64::from(e * (e - 1));
                }
            }
        }
        let mut p = Self::zero(self.n, self.degree - 2);
        p.terms = acc.into_iter().filter(|(_, c)| *c != 0.0).collect();
        Ok(p)
    }

    /// Inserts a new variable in front with exponent `e0` on every term.
    pub fn prepend_variable(&self, e0: u32) -> HomoPoly {
        let mut p = Self::zero(self.n + 1, self.degree + e0 as usize);
        for (idx, c) in self.terms() {
            let mut e = Vec::with_capacity(self.n + 1);
            e.push(e0);
            e.extend_from_slice(idx.exponents());
            p.add_term(MultiIndex::new(e), c);
        }
        p
    }

    /// Largest coefficientwise difference.
    pub fn max_coeff_diff(&self, other: &HomoPoly) -> f64 {
        let mut m: f64 = 0.0;
        for (idx, c) in self.terms() {
            m = m.max((c - other.coeff(idx)).abs());
        }
        for (idx, c) in other.terms() {
            if !self.terms.contains_key(idx) {
                m = m.max(c.abs());
            }
        }
        m
    }
}

impl fmt::Display for HomoPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_terms(f, self.terms.iter().map(|(k, v)| (k, *v)))
    }
}

fn write_terms<'a, I>(f: &mut fmt::Formatter<'_>, terms: I) -> fmt::Result
where
    I: Iterator<Item = (&'a MultiIndex, f64)>,
{
    let mut first = true;
    for (idx, c) in terms {
        let sign = if c < 0.0 { "-" } else { "+" };
        if first {
            if c < 0.0 {
                write!(f, "-")?;
            }
        } else {
            write!(f, " {sign} ")?;
        }
        first = false;
        write!(f, "{:?}", c.abs())?;
        for (t, &e) in idx.exponents().iter().enumerate() {
            match e {
                0 => {}
                1 => write!(f, "*x{}", t + 1)?,
                _ => write!(f, "*x{}^{}", t + 1, e)?,
            }
        }
    }
    if first {
        write!(f, "0")?;
    }
    Ok(())
}

/// Polynomial whose terms may have different degrees, as read from input.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    n: usize,
    terms: BTreeMap<MultiIndex, f64>,
}

/// Degree parity of the monomials in a [`Polynomial`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    Mixed,
}

impl Polynomial {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            terms: BTreeMap::new(),
        }
    }

    /// Adds `c · x^exponents`; the exponent vector must have length `n`.
    pub fn add_term(&mut self, exponents: Vec<u32>, c: f64) -> Result<()> {
        if exponents.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: exponents.len(),
            });
        }
        let slot = self.terms.entry(MultiIndex::new(exponents)).or_insert(0.0);
        *slot += c;
        self.terms.retain(|_, c| *c != 0.0);
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, f64)> {
        self.terms.iter().map(|(k, v)| (k, *v))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_degree(&self) -> usize {
        self.terms.keys().map(|k| k.degree()).max().unwrap_or(0)
    }

    /// Pads (or keeps) the variable count to `n`. Fails when a variable with
    /// index above `n` is used.
    pub fn with_n(&self, n: usize) -> Result<Self> {
        if n < self.n {
            let used = self
                .terms
                .keys()
                .flat_map(|k| {
                    k.exponents()
                        .iter()
                        .enumerate()
                        .filter(|(_, &e)| e > 0)
                        .map(|(t, _)| t + 1)
                        .collect::<Vec<_>>()
                })
                .max()
                .unwrap_or(0);
            if used > n {
                return Err(Error::InvalidArgument(format!(
                    "polynomial uses x{used} but n = {n}"
                )));
            }
        }
        let terms = self
            .terms
            .iter()
            .map(|(k, &c)| {
                let mut e = k.exponents().to_vec();
                e.resize(n, 0);
                (MultiIndex::new(e), c)
            })
            .collect();
        Ok(Self { n, terms })
    }

    pub fn is_homogeneous(&self) -> bool {
        let d = self.max_degree();
        self.terms.keys().all(|k| k.degree() == d)
    }

    pub fn parity(&self) -> Parity {
        let even = self.terms.keys().all(|k| k.degree() % 2 == 0);
        let odd = self.terms.keys().all(|k| k.degree() % 2 == 1);
        match (even, odd) {
            (true, _) => Parity::Even,
            (false, true) => Parity::Odd,
            _ => Parity::Mixed,
        }
    }

    /// Converts to a [`HomoPoly`] when every term has the same degree.
    pub fn to_homogeneous(&self) -> Result<HomoPoly> {
        if !self.is_homogeneous() {
            return Err(Error::DegreeMismatch {
                expected: self.max_degree(),
                got: self
                    .terms
                    .keys()
                    .map(|k| k.degree())
                    .find(|&d| d != self.max_degree())
                    .unwrap_or(0),
            });
        }
        HomoPoly::from_terms(
            self.n,
            self.max_degree(),
            self.terms.iter().map(|(k, &c)| (k.clone(), c)),
        )
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        Ok(self.terms.iter().map(|(k, c)| c * k.monomial(x)).sum())
    }
}

impl From<&HomoPoly> for Polynomial {
    fn from(p: &HomoPoly) -> Self {
        Self {
            n: p.n,
            terms: p.terms.clone(),
        }
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_terms(f, self.terms.iter().map(|(k, v)| (k, *v)))
    }
}

/// `|Z_T⟩` in the number-state basis: entry `i` is `sqrt(i!/d!) α_i`.
pub fn poly_to_vector(t: &HomoPoly) -> DVector<f64> {
    let catalog = BasisCatalog::shared(t.n(), t.degree());
    let ln_d = ln_factorial(t.degree() as u32);
    let mut v = DVector::zeros(catalog.len());
    for (idx, c) in t.terms() {
        let pos = catalog.position(idx).expect("term outside catalog");
        v[pos] = c * (0.5 * (idx.ln_factorial() - ln_d)).exp();
    }
    v
}

/// Inverse of [`poly_to_vector`].
pub fn vector_to_poly(n: usize, degree: usize, v: &DVector<f64>) -> HomoPoly {
    let catalog = BasisCatalog::shared(n, degree);
    let ln_d = ln_factorial(degree as u32);
    let alpha = DVector::from_iterator(
        catalog.len(),
        catalog
            .indices()
            .iter()
            .zip(v.iter())
            .map(|(idx, &b)| b * (0.5 * (ln_d - idx.ln_factorial())).exp()),
    );
    HomoPoly::from_dense(n, degree, &alpha)
}

/// One nonzero of the reshape from degree-`2ℓ` number states to pairs of
/// degree-`ℓ` number states: `⟨i ⊗ j | k⟩ = overlap` with `i <= j`.
#[derive(Clone, Copy, Debug)]
pub struct PairEntry {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub overlap: f64,
}

/// All `(i, j, k)` reshape entries for one `(n, ℓ)`, plus the trace vector.
#[derive(Debug)]
pub struct PairTable {
    pub n: usize,
    pub ell: usize,
    pub p: usize,
    pub q: usize,
    /// Entries with `i <= j`, sorted by `(i, j)`.
    pub entries: Vec<PairEntry>,
    /// `τ_k = tr(B_k)`, nonzero only for even `k`.
    pub trace: DVector<f64>,
    /// For each degree-`ℓ` index and variable `t`, the position of `i - e_t`
    /// in the degree-`ℓ-1` catalog.
    pub down: Vec<Vec<Option<usize>>>,
}

impl PairTable {
    pub fn new(n: usize, ell: usize) -> Self {
        let half = BasisCatalog::shared(n, ell);
        let full = BasisCatalog::shared(n, 2 * ell);
        let mut entries = Vec::with_capacity(half.len() * (half.len() + 1) / 2);
        for (a, i) in half.indices().iter().enumerate() {
            for (b, j) in half.indices().iter().enumerate().skip(a) {
                let k = i.add(j);
                let pos = full.position(&k).expect("sum lies in catalog");
                entries.push(PairEntry {
                    i: a,
                    j: b,
                    k: pos,
                    overlap: overlap_unchecked(i, &k),
                });
            }
        }
        let mut trace = DVector::zeros(full.len());
        for e in entries.iter().filter(|e| e.i == e.j) {
            trace[e.k] = e.overlap;
        }
        let down = if ell == 0 {
            vec![vec![None; n]]
        } else {
            let lower = BasisCatalog::shared(n, ell - 1);
            half.indices()
                .iter()
                .map(|i| {
                    (0..n)
                        .map(|t| i.shifted_down(t, 1).and_then(|m| lower.position(&m)))
                        .collect()
                })
                .collect()
        };
        Self {
            n,
            ell,
            p: half.len(),
            q: full.len(),
            entries,
            trace,
            down,
        }
    }

    /// Process-wide memoized table.
    pub fn shared(n: usize, ell: usize) -> Arc<PairTable> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<PairTable>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(t) = cache
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .get(&(n, ell))
        {
            return t.clone();
        }
        // built outside the lock; a racing duplicate is harmless
        let table = Arc::new(PairTable::new(n, ell));
        cache
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .entry((n, ell))
            .or_insert(table)
            .clone()
    }

    /// `Σ_k β_k B_k` as a dense symmetric matrix.
    pub fn assemble(&self, beta: &DVector<f64>) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.p, self.p);
        for e in &self.entries {
            let v = beta[e.k] * e.overlap;
            m[(e.i, e.j)] = v;
            m[(e.j, e.i)] = v;
        }
        m
    }

    /// Adjoint of [`assemble`](Self::assemble): `β_k = ⟨B_k, A⟩`. For a
    /// symmetric `A` this is the orthogonal projection onto MSym.
    pub fn project(&self, a: &DMatrix<f64>) -> DVector<f64> {
        let mut beta = DVector::zeros(self.q);
        for e in &self.entries {
            let w = if e.i == e.j {
                a[(e.i, e.i)]
            } else {
                a[(e.i, e.j)] + a[(e.j, e.i)]
            };
            beta[e.k] += e.overlap * w;
        }
        beta
    }
}

/// Factors `sqrt(k!/(2ℓ)!)` converting polynomial coefficients to `β`.
pub(crate) fn beta_scale(n: usize, degree: usize) -> DVector<f64> {
    let catalog = BasisCatalog::shared(n, degree);
    let ln_d = ln_factorial(degree as u32);
    DVector::from_iterator(
        catalog.len(),
        catalog
            .indices()
            .iter()
            .map(|k| (0.5 * (k.ln_factorial() - ln_d)).exp()),
    )
}

/// Maximally symmetric matrix on `Sym((R^n)^{⊗ℓ})`, stored through its
/// degree-`2ℓ` polynomial.
#[derive(Clone, Debug)]
pub struct MaxSymMatrix {
    n: usize,
    ell: usize,
    coeffs: DVector<f64>,
    matrix: OnceLock<DMatrix<f64>>,
}

impl PartialEq for MaxSymMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.ell == other.ell && self.coeffs == other.coeffs
    }
}

impl MaxSymMatrix {
    /// From the coefficient vector of `Q_M` over `BasisCatalog(n, 2ℓ)`.
    pub fn from_coeffs(n: usize, ell: usize, coeffs: DVector<f64>) -> Result<Self> {
        let q = BasisCatalog::shared(n, 2 * ell).len();
        if coeffs.len() != q {
            return Err(Error::DimensionMismatch {
                expected: q,
                got: coeffs.len(),
            });
        }
        Ok(Self {
            n,
            ell,
            coeffs,
            matrix: OnceLock::new(),
        })
    }

    /// From orthonormal coordinates `β` of `|M⟩`.
    pub fn from_vectorized(n: usize, ell: usize, beta: &DVector<f64>) -> Result<Self> {
        let scale = beta_scale(n, 2 * ell);
        if beta.len() != scale.len() {
            return Err(Error::DimensionMismatch {
                expected: scale.len(),
                got: beta.len(),
            });
        }
        Self::from_coeffs(n, ell, beta.component_div(&scale))
    }

    /// Orthogonal projection of a symmetric `p × p` matrix onto MSym.
    pub fn from_matrix(n: usize, ell: usize, a: &DMatrix<f64>) -> Result<Self> {
        let table = PairTable::shared(n, ell);
        if a.nrows() != table.p || a.ncols() != table.p {
            return Err(Error::DimensionMismatch {
                expected: table.p,
                got: a.nrows(),
            });
        }
        let sym = (a + a.transpose()) * 0.5;
        Self::from_vectorized(n, ell, &table.project(&sym))
    }

    pub fn zero(n: usize, ell: usize) -> Self {
        let q = BasisCatalog::shared(n, 2 * ell).len();
        Self::from_coeffs(n, ell, DVector::zeros(q)).expect("length matches")
    }

    /// `|x⟩⟨x|^{⊗ℓ}`; a unit-trace state when `x` is a unit vector.
    pub fn product_state(x: &[f64], ell: usize) -> Self {
        let n = x.len();
        let catalog = BasisCatalog::shared(n, 2 * ell);
        let coeffs = DVector::from_iterator(
            catalog.len(),
            catalog
                .indices()
                .iter()
                .map(|k| multinomial(k.exponents()) * k.monomial(x)),
        );
        Self::from_coeffs(n, ell, coeffs).expect("length matches")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn dim(&self) -> usize {
        BasisCatalog::shared(self.n, self.ell).len()
    }

    pub fn coeffs(&self) -> &DVector<f64> {
        &self.coeffs
    }

    pub fn vectorized(&self) -> DVector<f64> {
        self.coeffs.component_mul(&beta_scale(self.n, 2 * self.ell))
    }

    /// The `p × p` matrix in the number-state basis.
    pub fn matrix(&self) -> &DMatrix<f64> {
        self.matrix.get_or_init(|| {
            PairTable::shared(self.n, self.ell).assemble(&self.vectorized())
        })
    }

    pub fn trace(&self) -> f64 {
        PairTable::shared(self.n, self.ell)
            .trace
            .dot(&self.vectorized())
    }

    pub fn to_poly(&self) -> HomoPoly {
        HomoPoly::from_dense(self.n, 2 * self.ell, &self.coeffs)
    }

    /// `Q_M(x)`.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        let catalog = BasisCatalog::shared(self.n, 2 * self.ell);
        Ok(catalog
            .indices()
            .iter()
            .zip(self.coeffs.iter())
            .map(|(k, c)| c * k.monomial(x))
            .sum())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_coeffs(self.n, self.ell, &self.coeffs * s).expect("same shape")
    }

    pub fn sub(&self, other: &MaxSymMatrix) -> Result<Self> {
        self.check_shape(other)?;
        Self::from_coeffs(self.n, self.ell, &self.coeffs - &other.coeffs)
    }

    pub fn add(&self, other: &MaxSymMatrix) -> Result<Self> {
        self.check_shape(other)?;
        Self::from_coeffs(self.n, self.ell, &self.coeffs + &other.coeffs)
    }

    pub(crate) fn check_shape(&self, other: &MaxSymMatrix) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        if self.ell != other.ell {
            return Err(Error::DegreeMismatch {
                expected: self.ell,
                got: other.ell,
            });
        }
        Ok(())
    }

    /// Smallest eigenvalue of the matrix view.
    pub fn min_eigenvalue(&self) -> f64 {
        self.matrix()
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .fold(f64::INFINITY, |m, &v| m.min(v))
    }

    /// Errors unless the matrix is PSD and unit-trace to `tol`.
    pub fn check_state(&self, tol: f64) -> Result<()> {
        let trace = self.trace();
        let min_eig = self.min_eigenvalue();
        if min_eig < -tol || (trace - 1.0).abs() > tol {
            return Err(Error::NotAState { min_eig, trace });
        }
        Ok(())
    }
}

/// `Z_T` for a polynomial of even degree `2a`, as a matrix on `a` copies.
pub fn poly_to_maxsym_matrix(t: &HomoPoly) -> Result<MaxSymMatrix> {
    if t.degree() % 2 != 0 {
        return Err(Error::OddDegree(t.degree()));
    }
    MaxSymMatrix::from_coeffs(t.n(), t.degree() / 2, t.to_dense())
}

/// `Q_M`, the inverse of [`poly_to_maxsym_matrix`].
pub fn matrix_to_poly(m: &MaxSymMatrix) -> HomoPoly {
    m.to_poly()
}

/// Traces out one tensor factor of a matrix on `Sym((R^n)^{⊗ℓ})`, using
/// `tr_1 |i⟩⟨j| = (1/ℓ) Σ_t sqrt(i_t j_t) |i - e_t⟩⟨j - e_t|`.
pub fn partial_trace_matrix(a: &DMatrix<f64>, n: usize, ell: usize) -> Result<DMatrix<f64>> {
    if ell == 0 {
        return Err(Error::InvalidPartialTrace {
            traced: 1,
            copies: 0,
        });
    }
    let table = PairTable::shared(n, ell);
    if a.nrows() != table.p || a.ncols() != table.p {
        return Err(Error::DimensionMismatch {
            expected: table.p,
            got: a.nrows(),
        });
    }
    let half = BasisCatalog::shared(n, ell);
    let lower = BasisCatalog::shared(n, ell - 1).len();
    let mut out = DMatrix::zeros(lower, lower);
    let inv = 1.0 / ell as f64;
    for t in 0..n {
        for col in 0..table.p {
            let Some(c2) = table.down[col][t] else { continue };
            let jt = f64::from(half.get(col).exponents()[t]);
            for row in 0..table.p {
                let Some(r2) = table.down[row][t] else { continue };
                let it = f64::from(half.get(row).exponents()[t]);
                out[(r2, c2)] += inv * (it * jt).sqrt() * a[(row, col)];
            }
        }
    }
    Ok(out)
}

/// Traces out `b` of the `ℓ` copies of a maximally symmetric matrix.
pub fn partial_trace_sym(m: &MaxSymMatrix, b: usize) -> Result<MaxSymMatrix> {
    if b == 0 || b >= m.ell() {
        return Err(Error::InvalidPartialTrace {
            traced: b,
            copies: m.ell(),
        });
    }
    let mut a = m.matrix().clone();
    let mut ell = m.ell();
    for _ in 0..b {
        a = partial_trace_matrix(&a, m.n(), ell)?;
        ell -= 1;
    }
    MaxSymMatrix::from_matrix(m.n(), ell, &a)
}

/// Checks `Z_{ΔT} = d(d-1) · tr_1(Z_T)` for a polynomial of even degree
/// `d >= 2`, entrywise to `1e-10` relative to the largest entry.
pub fn laplacian_via_trace_check(t: &HomoPoly) -> bool {
    let d = t.degree();
    if d < 2 || d % 2 != 0 {
        return false;
    }
    let (Ok(z), Ok(lap)) = (poly_to_maxsym_matrix(t), t.laplacian()) else {
        return false;
    };
    let Ok(traced) = partial_trace_matrix(z.matrix(), t.n(), d / 2) else {
        return false;
    };
    let lhs = MaxSymMatrix::from_coeffs(t.n(), d / 2 - 1, lap.to_dense())
        .expect("degree d-2 catalog")
        .matrix()
        .clone();
    let rhs = traced * (d * (d - 1)) as f64;
    let scale = lhs.amax().max(rhs.amax()).max(1.0);
    (lhs - rhs).amax() <= 1e-10 * scale
}
