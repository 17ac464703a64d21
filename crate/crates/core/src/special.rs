//! Log-space factorial helpers shared by the combinatorial and harmonic code.

use statrs::function::factorial::ln_factorial as statrs_ln_factorial;
use statrs::function::gamma::ln_gamma as statrs_ln_gamma;

use crate::error::{Error, Result};

#[inline]
pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    statrs_ln_gamma(x)
}

#[inline]
pub fn ln_factorial(k: u32) -> f64 {
    statrs_ln_factorial(k as u64)
}

/// `ln C(n, k)`; `-inf` when `k > n`.
pub fn ln_binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Exact binomial coefficient with explicit overflow reporting.
pub fn binomial(n: u64, k: u64) -> Result<u64> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = acc
            .checked_mul(u128::from(n - i))
            .ok_or(Error::Overflow("binomial coefficient"))?
            / u128::from(i + 1);
    }
    u64::try_from(acc).map_err(|_| Error::Overflow("binomial coefficient"))
}

/// Multinomial coefficient `(Σk)! / ∏ k_t!` as a float.
pub fn multinomial(exponents: &[u32]) -> f64 {
    ln_multinomial(exponents).exp()
}

pub fn ln_multinomial(exponents: &[u32]) -> f64 {
    let total: u32 = exponents.iter().sum();
    ln_factorial(total) - exponents.iter().map(|&e| ln_factorial(e)).sum::<f64>()
}
