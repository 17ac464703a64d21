//! Reductions to the canonical input of the hierarchy: a homogeneous
//! polynomial of even degree.
//!
//! Polynomials whose monomials all have even degree are homogenized with
//! powers of `r² = Σ x_t²`, which is `1` on the sphere. A homogeneous
//! polynomial of odd degree `2a - 1` is lifted to `T'(x₀, x) = x₀ T(x)` on one
//! more variable, whose maximum is `γ(a)` times that of `T`.

use crate::definetti::BoundsReport;
use crate::error::{Error, Result};
use crate::poly::{HomoPoly, Parity, Polynomial};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReductionKind {
    EvenHomogenize,
    OddLift,
}

/// How a user polynomial was turned into the problem that was solved.
#[derive(Clone, Debug, PartialEq)]
pub struct ReductionRecord {
    pub kind: ReductionKind,
    pub n: usize,
    pub d: usize,
    pub lifted_n: usize,
    pub lifted_d: usize,
    /// `γ(a)` for odd lifts, `1` otherwise.
    pub gamma: f64,
}

/// Multiplies each degree-`d'` monomial by `r^{d - d'}`, where `d` is the
/// largest degree present. Values on the sphere are unchanged.
pub fn homogenize_even(t: &Polynomial) -> Result<HomoPoly> {
    homogenize_even_to(t, t.max_degree())
}

/// As [`homogenize_even`] with an explicit even target degree.
pub fn homogenize_even_to(t: &Polynomial, d: usize) -> Result<HomoPoly> {
    if d % 2 == 1 {
        return Err(Error::OddDegree(d));
    }
    let mut out = HomoPoly::zero(t.n(), d);
    for (idx, c) in t.terms() {
        let k = idx.degree();
        if k % 2 == 1 {
            return Err(Error::MixedParity);
        }
        if k > d {
            return Err(Error::DegreeTooHigh { degree: k, target: d });
        }
        let mono = HomoPoly::monomial(idx.exponents().to_vec(), c);
        out = out.add(&mono.multiply_r2((d - k) / 2))?;
    }
    Ok(out)
}

/// `γ(a) = max_{c ≥ 0} c^{2a-1} / (1 + c²)^a = (2a-1)^{a-1/2} / (a^a 2^a)`.
pub fn gamma_factor(a: usize) -> f64 {
    assert!(a >= 1, "gamma_factor needs a >= 1");
    let af = a as f64;
    ((af - 0.5) * (2.0 * af - 1.0).ln() - af * af.ln() - af * 2f64.ln()).exp()
}

/// `T'(x₀, x₁, ..., x_n) = x₀ T(x₁, ..., x_n)` for odd-degree `T`.
pub fn lift_odd(t: &HomoPoly) -> Result<(HomoPoly, ReductionRecord)> {
    if t.degree() % 2 == 0 {
        return Err(Error::EvenDegree(t.degree()));
    }
    let lifted = t.prepend_variable(1);
    let record = ReductionRecord {
        kind: ReductionKind::OddLift,
        n: t.n(),
        d: t.degree(),
        lifted_n: t.n() + 1,
        lifted_d: t.degree() + 1,
        gamma: gamma_factor(t.degree().div_ceil(2)),
    };
    Ok((lifted, record))
}

/// Brings a parsed polynomial into canonical form: even-parity inputs are
/// homogenized, homogeneous odd inputs are lifted, mixed parity is rejected.
pub fn reduce(t: &Polynomial) -> Result<(HomoPoly, ReductionRecord)> {
    match t.parity() {
        Parity::Mixed => Err(Error::MixedParity),
        Parity::Even => {
            let h = homogenize_even(t)?;
            let record = ReductionRecord {
                kind: ReductionKind::EvenHomogenize,
                n: t.n(),
                d: t.max_degree(),
                lifted_n: t.n(),
                lifted_d: h.degree(),
                gamma: 1.0,
            };
            Ok((h, record))
        }
        Parity::Odd => lift_odd(&t.to_homogeneous()?),
    }
}

/// Maps bounds for the solved problem back to the original one by dividing
/// every value by `γ`. The measure stays on the lifted sphere.
pub fn pullback_bounds(report: &BoundsReport, record: &ReductionRecord) -> Result<BoundsReport> {
    if report.n != record.lifted_n {
        return Err(Error::DimensionMismatch {
            expected: record.lifted_n,
            got: report.n,
        });
    }
    if report.d != record.lifted_d {
        return Err(Error::DegreeMismatch {
            expected: record.lifted_d,
            got: report.d,
        });
    }
    let g = record.gamma;
    Ok(BoundsReport {
        n: record.n,
        d: record.d,
        nu_ell: report.nu_ell / g,
        nu_tilde: report.nu_tilde / g,
        oracle_value: report.oracle_value.map(|v| v / g),
        gamma: report.gamma * g,
        ..report.clone()
    })
}

/// Maps a lifted point back to the original sphere: drops `x₀`, renormalizes
/// and flips by the sign of `x₀`, so a maximizer of `T'` becomes one of `T`.
/// `None` when the remaining part vanishes.
pub fn project_lifted_point(x: &[f64]) -> Option<Vec<f64>> {
    let rest = &x[1..];
    let norm = rest.iter().map(|v| v * v).sum::<f64>().sqrt() * x[0].signum();
    (norm != 0.0).then(|| rest.iter().map(|v| v / norm).collect())
}
