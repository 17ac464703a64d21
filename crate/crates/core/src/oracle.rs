//! Ground-truth tools independent of the SDP: multistart projected gradient
//! ascent on the sphere and Monte-Carlo sphere integration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::poly::HomoPoly;

/// Uniform point on `S^{n-1}` (normalized standard Gaussian).
pub fn uniform_unit<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-300 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Independent generator for sub-task `stream` of a root seed.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Debug)]
pub struct OracleConfig {
    pub restarts: usize,
    pub max_iter: usize,
    pub initial_step: f64,
    pub step_tol: f64,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            restarts: 50,
            max_iter: 500,
            initial_step: 0.1,
            step_tol: 1e-12,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    pub value: f64,
    pub argmax: Vec<f64>,
    pub restarts: usize,
    /// Whether the best restart stopped on the step tolerance.
    pub converged: bool,
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
}

fn ascend(t: &HomoPoly, mut x: Vec<f64>, cfg: &OracleConfig) -> (f64, Vec<f64>, bool) {
    let mut value = t.eval_unchecked(&x);
    let mut eta = cfg.initial_step;
    for _ in 0..cfg.max_iter {
        let g = t.gradient(&x).expect("length checked by caller");
        let radial: f64 = g.iter().zip(&x).map(|(a, b)| a * b).sum();
        let tangent: Vec<f64> = g.iter().zip(&x).map(|(a, b)| a - radial * b).collect();
        let mut moved = false;
        let mut step_norm = 0.0;
        while eta > 1e-16 {
            let mut cand: Vec<f64> = x.iter().zip(&tangent).map(|(a, b)| a + eta * b).collect();
            normalize(&mut cand);
            let v = t.eval_unchecked(&cand);
            if v > value {
                step_norm = cand
                    .iter()
                    .zip(&x)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                x = cand;
                value = v;
                moved = true;
                break;
            }
            eta *= 0.5;
        }
        if !moved || step_norm < cfg.step_tol {
            return (value, x, true);
        }
        eta = (eta * 2.0).min(1e6);
    }
    (value, x, false)
}

/// Multistart projected gradient ascent for `max_{|x|=1} T(x)`.
///
/// Restart `r` draws its start from stream `r` of `cfg.seed`, so the result
/// for `k` restarts is the running maximum over the first `k` of any larger
/// run.
pub fn sphere_maximize(t: &HomoPoly, cfg: &OracleConfig) -> OracleResult {
    assert!(cfg.restarts >= 1, "sphere_maximize needs at least one restart");
    let n = t.n();
    let mut best: Option<(f64, Vec<f64>, bool)> = None;
    for r in 0..cfg.restarts {
        let mut rng = stream_rng(cfg.seed, r as u64);
        let start = uniform_unit(&mut rng, n);
        let (v, x, conv) = ascend(t, start, cfg);
        if best.as_ref().is_none_or(|b| v > b.0) {
            best = Some((v, x, conv));
        }
    }
    let (value, argmax, converged) = best.expect("at least one restart");
    OracleResult {
        value,
        argmax,
        restarts: cfg.restarts,
        converged,
    }
}

/// Monte-Carlo estimate of `∫ f dx` and its standard error.
pub fn mc_sphere_integral(f: &HomoPoly, samples: usize, seed: u64) -> (f64, f64) {
    assert!(samples >= 2, "need at least two samples");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut mean, mut m2) = (0.0, 0.0);
    for k in 0..samples {
        let x = uniform_unit(&mut rng, f.n());
        let v = f.eval_unchecked(&x);
        let delta = v - mean;
        mean += delta / (k + 1) as f64;
        m2 += delta * (v - mean);
    }
    let var = m2 / (samples - 1) as f64;
    (mean, (var / samples as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonics::sphere_monomial_moment;
    use crate::symbasis::MultiIndex;
    use nalgebra::DMatrix;

    fn quadratic(a: &DMatrix<f64>) -> HomoPoly {
        let n = a.nrows();
        let mut terms = Vec::new();
        for i in 0..n {
            for j in i..n {
                let mut e = vec![0; n];
                e[i] += 1;
                e[j] += 1;
                let c = if i == j { a[(i, i)] } else { 2.0 * a[(i, j)] };
                terms.push((MultiIndex::new(e), c));
            }
        }
        HomoPoly::from_terms(n, 2, terms).unwrap()
    }

    #[test]
    fn quadratic_forms_reach_top_eigenvalue() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let b = DMatrix::<f64>::from_fn(3, 3, |_, _| rng.random_range(-1.0..1.0));
            let a = (&b + b.transpose()) * 0.5;
            let top = a.clone().symmetric_eigenvalues().max();
            let res = sphere_maximize(&quadratic(&a), &OracleConfig::default());
            assert!((res.value - top).abs() < 1e-8, "{} vs {}", res.value, top);
            let norm: f64 = res.argmax.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
            let at = quadratic(&a).eval(&res.argmax).unwrap();
            assert!((at - res.value).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_and_quartic_examples() {
        let r = sphere_maximize(&HomoPoly::r2_power(3, 2), &OracleConfig::default());
        assert!((r.value - 1.0).abs() < 1e-14);
        let t = HomoPoly::from_pairs(2, 4, &[(&[4, 0], 1.0), (&[0, 4], 1.0)]).unwrap();
        let r = sphere_maximize(&t, &OracleConfig::default());
        assert!((r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn more_restarts_never_hurt() {
        let t = HomoPoly::from_pairs(
            3,
            4,
            &[(&[4, 0, 0], 1.0), (&[2, 2, 0], -3.0), (&[1, 1, 2], 2.0), (&[0, 0, 4], 0.5)],
        )
        .unwrap();
        let mut prev = f64::NEG_INFINITY;
        for restarts in [1, 2, 5, 10, 20] {
            let cfg = OracleConfig {
                restarts,
                seed: 9,
                ..OracleConfig::default()
            };
            let v = sphere_maximize(&t, &cfg).value;
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        let t = HomoPoly::from_pairs(3, 3, &[(&[2, 1, 0], 1.5), (&[0, 1, 2], -2.0), (&[1, 1, 1], 0.7)])
            .unwrap();
        let x = [0.3, -0.5, 0.8];
        let g = t.gradient(&x).unwrap();
        let h = 1e-5;
        for k in 0..3 {
            let mut up = x;
            let mut dn = x;
            up[k] += h;
            dn[k] -= h;
            let fd = (t.eval(&up).unwrap() - t.eval(&dn).unwrap()) / (2.0 * h);
            assert!((fd - g[k]).abs() < 1e-6);
        }
    }

    #[test]
    fn monte_carlo_examples() {
        let (m, se) = mc_sphere_integral(&HomoPoly::constant(3, 1.0), 1000, 1);
        assert_eq!(m, 1.0);
        assert!(se < 1e-12);
        let (m, se) = mc_sphere_integral(&HomoPoly::monomial(vec![2, 0, 0], 1.0), 200_000, 2);
        assert!((m - 1.0 / 3.0).abs() < 3.0 * se);
        let (m, se) = mc_sphere_integral(&HomoPoly::monomial(vec![3, 1, 0], 1.0), 100_000, 4);
        assert!(m.abs() < 3.0 * se);
    }

    #[test]
    fn monte_carlo_agrees_with_closed_form_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for k in 0..50 {
            let n = rng.random_range(2..=4);
            let e: Vec<u32> = (0..n).map(|_| 2 * rng.random_range(0..3u32)).collect();
            let idx = MultiIndex::new(e.clone());
            let (m, se) = mc_sphere_integral(&HomoPoly::monomial(e, 1.0), 20_000, 100 + k);
            assert!((m - sphere_monomial_moment(&idx)).abs() <= 4.0 * se + 1e-15);
        }
    }
}
