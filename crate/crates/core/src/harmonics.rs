//! Spherical-harmonic analysis of homogeneous polynomials: surface areas,
//! harmonic dimensions, Gegenbauer polynomials, the Funk-Hecke coefficients
//! `λ(n, ℓ, j)`, harmonic decomposition and exact sphere moments.
//!
//! Integrals are always against the rotation-invariant probability measure
//! on `S^{n-1}`.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::poly::HomoPoly;
use crate::special::{binomial, gamma, ln_gamma, multinomial};
use crate::symbasis::{BasisCatalog, MultiIndex};

/// `ω_n = 2π^{n/2} / Γ(n/2)`, the area of `S^{n-1}` (`ω_1 = 2` counts the
/// two points of `S^0`).
pub fn surface_area(n: usize) -> f64 {
    assert!(n >= 1, "surface_area requires n >= 1");
    let h = n as f64 / 2.0;
    2.0 * PI.powf(h) / gamma(h)
}

/// Number of linearly independent degree-`j` spherical harmonics in `n`
/// variables: `C(n+j-1, j) - C(n+j-3, j-2)`.
pub fn harmonic_count(j: usize, n: usize) -> Result<u64> {
    assert!(n >= 2, "harmonic_count requires n >= 2");
    let all = binomial((n + j - 1) as u64, j as u64)?;
    let lower = if j >= 2 {
        binomial((n + j - 3) as u64, (j - 2) as u64)?
    } else {
        0
    };
    Ok(all - lower)
}

/// Gegenbauer polynomial `P_j(t)` for dimension `n`, normalized so that
/// `P_j(1) = 1`.
pub fn gegenbauer_eval(j: usize, n: usize, t: f64) -> f64 {
    assert!(n >= 2, "gegenbauer_eval requires n >= 2");
    if j == 0 {
        return 1.0;
    }
    let nf = n as f64;
    let (mut prev, mut cur) = (1.0, t);
    for k in 1..j {
        let kf = k as f64;
        let next = ((2.0 * kf + nf - 2.0) * t * cur - kf * prev) / (kf + nf - 2.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `λ(n, ℓ, j) = ∫_{-1}^{1} t^{2ℓ} P_j(t) (1-t²)^{(n-3)/2} dt` in closed
/// form; exactly zero for odd `j` and for `j > 2ℓ`.
pub fn lambda_coeff(n: usize, ell: usize, j: usize) -> f64 {
    if j % 2 == 1 || j > 2 * ell {
        return 0.0;
    }
    lambda_zero(n, ell) * lambda_ratio(n, ell, j).expect("even j")
}

/// `λ(n, ℓ, 0) = B(ℓ + 1/2, (n-1)/2)`.
fn lambda_zero(n: usize, ell: usize) -> f64 {
    let h = n as f64 / 2.0;
    if ell > PRODUCT_LIMIT {
        let lf = ell as f64;
        return (ln_gamma(lf + 0.5) + ln_gamma(h - 0.5) - ln_gamma(lf + h)).exp();
    }
    let base = PI.sqrt() * gamma(h - 0.5) / gamma(h);
    (1..=ell).fold(base, |acc, i| acc * (i as f64 - 0.5) / (i as f64 - 1.0 + h))
}

/// Beyond this many factors the Gamma ratios switch to log space.
const PRODUCT_LIMIT: usize = 400;

/// `λ(n, ℓ, j) / λ(n, ℓ, 0)` for even `j`, zero when `j > 2ℓ`.
///
/// Equals `Γ(ℓ+1)Γ(ℓ+n/2) / (Γ(ℓ+1-j/2)Γ(ℓ+(n+j)/2))`, which telescopes to
/// `∏_{i<j/2} (ℓ-i)/(ℓ+n/2+i)`.
pub fn lambda_ratio(n: usize, ell: usize, j: usize) -> Result<f64> {
    if j % 2 == 1 {
        return Err(Error::InvalidArgument(format!("lambda_ratio needs even j, got {j}")));
    }
    if j > 2 * ell {
        return Ok(0.0);
    }
    let (lf, h) = (ell as f64, n as f64 / 2.0);
    if j / 2 > PRODUCT_LIMIT {
        let jf = j as f64;
        return Ok((ln_gamma(lf + 1.0) + ln_gamma(lf + h)
            - ln_gamma(lf + 1.0 - jf / 2.0)
            - ln_gamma(lf + h + jf / 2.0))
        .exp());
    }
    Ok((0..j / 2).fold(1.0, |acc, i| {
        let i = i as f64;
        acc * (lf - i) / (lf + h + i)
    }))
}

/// Upper bounds on `1 - λ_j/λ_0` and on `λ_0/λ_j - 1`:
/// `j((j+n)/2 - 1)/(2ℓ+n)` and twice that. The second is only a bound when
/// it does not exceed one.
pub fn ratio_gap_bounds(n: usize, ell: usize, j: usize) -> (f64, f64) {
    let (nf, lf, jf) = (n as f64, ell as f64, j as f64);
    let first = jf * ((jf + nf) / 2.0 - 1.0) / (2.0 * lf + nf);
    (first, 2.0 * first)
}

/// Relative error `ε(a, ℓ, n)` of the level-`ℓ` bound for degree `2a`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpsBound {
    pub value: f64,
    /// Whether `n >= 3`, `a < ℓ` and `ℓ >= 2a²(a + n/2 - 1) - n/2`, the
    /// conditions under which the guarantee is proven.
    pub valid: bool,
}

/// `ε(a, ℓ, n) = 4a²(a + n/2 - 1) / (2ℓ + n)` with its validity flag.
pub fn definetti_eps(a: usize, ell: usize, n: usize) -> EpsBound {
    let (af, lf, nf) = (a as f64, ell as f64, n as f64);
    let core = af * af * (af + nf / 2.0 - 1.0);
    EpsBound {
        value: 4.0 * core / (2.0 * lf + nf),
        valid: n >= 3 && a < ell && lf >= 2.0 * core - nf / 2.0,
    }
}

/// `∫ x^k dx`: zero when any exponent is odd, otherwise
/// `∏(k_i - 1)!! / ∏_{m < |k|/2} (n + 2m)`.
pub fn sphere_monomial_moment(k: &MultiIndex) -> f64 {
    if !k.is_even() {
        return 0.0;
    }
    let n = k.n() as f64;
    let s = k.degree() / 2;
    let mut odd = Vec::with_capacity(s);
    for &e in k.exponents() {
        let mut f = 1u32;
        while f < e {
            odd.push(f as f64);
            f += 2;
        }
    }
    debug_assert_eq!(odd.len(), s);
    odd.iter()
        .enumerate()
        .fold(1.0, |acc, (m, num)| acc * num / (n + 2.0 * m as f64))
}

/// Moments of every monomial of degree `d` in `BasisCatalog(n, d)` order.
pub fn moment_vector(n: usize, d: usize) -> Arc<DVector<f64>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<DVector<f64>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    guard
        .entry((n, d))
        .or_insert_with(|| {
            let catalog = BasisCatalog::shared(n, d);
            Arc::new(DVector::from_iterator(
                catalog.len(),
                catalog.indices().iter().map(sphere_monomial_moment),
            ))
        })
        .clone()
}

/// Exact `∫ T(x) dx` over the sphere.
pub fn sphere_integral(t: &HomoPoly) -> f64 {
    t.terms().map(|(k, c)| c * sphere_monomial_moment(k)).sum()
}

/// Exact `∫ f(x) g(x) dx` over the sphere.
pub fn sphere_inner(f: &HomoPoly, g: &HomoPoly) -> f64 {
    assert_eq!(f.n(), g.n(), "sphere_inner: variable count mismatch");
    let mut s = 0.0;
    for (i, a) in f.terms() {
        for (j, b) in g.terms() {
            s += a * b * sphere_monomial_moment(&i.add(j));
        }
    }
    s
}

/// `T = Σ_j h_j · r^{d-j}` with each `h_j` harmonic of degree `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicDecomposition {
    pub n: usize,
    pub degree: usize,
    pub parts: BTreeMap<usize, HomoPoly>,
}

impl HarmonicDecomposition {
    pub fn part(&self, j: usize) -> Option<&HomoPoly> {
        self.parts.get(&j)
    }

    /// `Σ_j h_j r^{d-j}`.
    pub fn reconstruct(&self) -> HomoPoly {
        let mut acc = HomoPoly::zero(self.n, self.degree);
        for (&j, h) in &self.parts {
            acc = acc
                .add(&h.multiply_r2((self.degree - j) / 2))
                .expect("same shape");
        }
        acc
    }

    /// Multiplies block `j` by `f(j)`.
    pub fn rescale(&self, f: impl Fn(usize) -> f64) -> Self {
        Self {
            n: self.n,
            degree: self.degree,
            parts: self
                .parts
                .iter()
                .map(|(&j, h)| (j, h.scale(f(j))))
                .collect(),
        }
    }
}

/// `Δ^m (r^{2k} h_j) = c · r^{2(k-m)} h_j` for harmonic `h_j`.
fn iterated_laplacian_factor(m: usize, k: usize, j: usize, n: usize) -> f64 {
    (0..m)
        .map(|i| {
            let ki = (k - i) as f64;
            2.0 * ki * (2.0 * ki + 2.0 * j as f64 + n as f64 - 2.0)
        })
        .product()
}

/// Splits `T` into harmonic blocks by back-substitution on `Δ^m T`.
pub fn harmonic_decompose(t: &HomoPoly) -> Result<HarmonicDecomposition> {
    let n = t.n();
    let d = t.degree();
    let kmax = d / 2;
    let mut laps = vec![t.clone()];
    for _ in 0..kmax {
        let next = laps.last().expect("non-empty").laplacian()?;
        laps.push(next);
    }
    let mut parts: BTreeMap<usize, HomoPoly> = BTreeMap::new();
    for m in (0..=kmax).rev() {
        let j = d - 2 * m;
        let mut rest = laps[m].clone();
        for (&jj, h) in &parts {
            let k = (d - jj) / 2;
            let c = iterated_laplacian_factor(m, k, jj, n);
            rest = rest.sub(&h.multiply_r2(k - m).scale(c))?;
        }
        let c = iterated_laplacian_factor(m, m, j, n);
        let h = rest.scale(1.0 / c);
        if !h.is_zero() {
            parts.insert(j, h);
        }
    }
    let dec = HarmonicDecomposition {
        n,
        degree: d,
        parts,
    };
    let scale = t.max_abs_coeff().max(f64::MIN_POSITIVE);
    let residual = dec.reconstruct().max_coeff_diff(t);
    if !(residual <= 1e-8 * scale) {
        return Err(Error::Numerical(format!(
            "harmonic decomposition residual {residual:e} at degree {d}"
        )));
    }
    Ok(dec)
}

/// `|∫ ⟨x,y⟩^{2ℓ} f(x) dx - (ω_{n-1}/ω_n) λ(n,ℓ,j) f(y)|` for a harmonic
/// `f` of degree `j`, with the left side integrated exactly.
pub fn funk_hecke_check(f: &HomoPoly, ell: usize, y: &[f64]) -> Result<f64> {
    let n = f.n();
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: y.len(),
        });
    }
    let mut lhs = 0.0;
    for k in BasisCatalog::shared(n, 2 * ell).indices() {
        let w = multinomial(k.exponents()) * k.monomial(y);
        if w == 0.0 {
            continue;
        }
        let inner: f64 = f
            .terms()
            .map(|(i, c)| c * sphere_monomial_moment(&i.add(k)))
            .sum();
        lhs += w * inner;
    }
    let rhs = surface_area(n - 1) / surface_area(n)
        * lambda_coeff(n, ell, f.degree())
        * f.eval(y)?;
    Ok((lhs - rhs).abs())
}
