//! Approximate representing measures for solved relaxations.
//!
//! For a maximally symmetric state `M` on `ℓ` copies, the polynomial
//! `c · Q_M(x)` with `c = ω_n / (ω_{n-1} λ(n, ℓ, 0))` is a probability
//! density on the sphere. Its degree-`2a` moment matrix `M̃_a` is close to the
//! reduced state of `M`, and averaging the objective against it gives a lower
//! bound that sandwiches the true maximum together with the SDP value.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{Error, Result};
use crate::harmonics::{
    definetti_eps, harmonic_decompose, lambda_coeff, moment_vector, sphere_monomial_moment,
    surface_area, HarmonicDecomposition,
};
use crate::oracle::{sphere_maximize, stream_rng, uniform_unit, OracleConfig};
use crate::poly::{partial_trace_sym, HomoPoly, MaxSymMatrix};
use crate::sdp::{build_relaxation, solve_sdp, SdpSolution, SolveStatus};
use crate::special::multinomial;
use crate::symbasis::BasisCatalog;

/// Tolerance used when checking that an input matrix is a state.
pub const STATE_TOL: f64 = 1e-8;

/// The density `c · Q_M` of the measure extracted from a state `M`.
#[derive(Clone, Debug, PartialEq)]
pub struct SphereMeasureDensity {
    pub n: usize,
    /// `ℓ`; the density has degree `2ℓ`.
    pub ell: usize,
    pub density: HomoPoly,
    /// `|∫ density dx - 1|`, computed exactly.
    pub normalization_residual: f64,
}

impl SphereMeasureDensity {
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.density.eval(x)
    }
}

/// Certified two-sided bound for one level of the hierarchy.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundsReport {
    pub n: usize,
    pub d: usize,
    pub level: usize,
    /// Upper bound `ν_ℓ`.
    pub nu_ell: f64,
    /// Lower bound `ν̃_ℓ`, the objective averaged against `measure`.
    pub nu_tilde: f64,
    pub eps: f64,
    pub eps_valid: bool,
    pub duality_gap: f64,
    pub iterations: usize,
    pub oracle_value: Option<f64>,
    /// Scale between the reported bounds and the solved problem; `1` unless
    /// the bounds were pulled back through an odd-degree lift.
    pub gamma: f64,
    /// Density on the sphere of the solved (possibly lifted) problem.
    pub measure: SphereMeasureDensity,
}

/// `ω_n / (ω_{n-1} λ(n, ℓ, 0))`.
pub fn density_constant(n: usize, ell: usize) -> f64 {
    surface_area(n) / (surface_area(n - 1) * lambda_coeff(n, ell, 0))
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "sphere measures need n >= 2, got {n}"
        )));
    }
    Ok(())
}

/// The density `c · Q_M` of a state `M`.
pub fn measure_density(m: &MaxSymMatrix) -> Result<SphereMeasureDensity> {
    check_n(m.n())?;
    m.check_state(STATE_TOL)?;
    let c = density_constant(m.n(), m.ell());
    let density = m.to_poly().scale(c);
    let total = m.coeffs().dot(&moment_vector(m.n(), 2 * m.ell())) * c;
    Ok(SphereMeasureDensity {
        n: m.n(),
        ell: m.ell(),
        density,
        normalization_residual: (total - 1.0).abs(),
    })
}

/// `∫ x^k · density(x) dx` for every `|k| = 2a`, in catalog order.
fn density_moments(density: &HomoPoly, a: usize) -> DVector<f64> {
    let catalog = BasisCatalog::shared(density.n(), 2 * a);
    DVector::from_iterator(
        catalog.len(),
        catalog.indices().iter().map(|k| {
            density
                .terms()
                .map(|(i, c)| c * sphere_monomial_moment(&i.add(k)))
                .sum::<f64>()
        }),
    )
}

/// `M̃_a = ∫ c Q_M(x) |x⟩⟨x|^{⊗a} dx`, computed with exact moments.
pub fn build_approx_moment_matrix(m: &MaxSymMatrix, a: usize) -> Result<MaxSymMatrix> {
    if a >= m.ell() {
        return Err(Error::InvalidPartialTrace {
            traced: m.ell().saturating_sub(a),
            copies: m.ell(),
        });
    }
    let mu = measure_density(m)?;
    approx_moment_from_density(&mu, a)
}

fn approx_moment_from_density(mu: &SphereMeasureDensity, a: usize) -> Result<MaxSymMatrix> {
    let catalog = BasisCatalog::shared(mu.n, 2 * a);
    let moments = density_moments(&mu.density, a);
    let coeffs = DVector::from_iterator(
        catalog.len(),
        catalog
            .indices()
            .iter()
            .zip(moments.iter())
            .map(|(k, v)| multinomial(k.exponents()) * v),
    );
    MaxSymMatrix::from_coeffs(mu.n, a, coeffs)
}

/// `ν̃ = ∫ T(x) · density(x) dx`, exact.
pub fn lower_bound(t: &HomoPoly, mu: &SphereMeasureDensity) -> Result<f64> {
    if t.n() != mu.n {
        return Err(Error::DimensionMismatch {
            expected: mu.n,
            got: t.n(),
        });
    }
    let mut s = 0.0;
    for (i, a) in t.terms() {
        for (k, b) in mu.density.terms() {
            s += a * b * sphere_monomial_moment(&i.add(k));
        }
    }
    Ok(s)
}

/// Builds the report for an already solved relaxation of `t`.
pub fn sandwich_from_solution(t: &HomoPoly, solution: &SdpSolution) -> Result<BoundsReport> {
    if solution.status != SolveStatus::Optimal {
        return Err(Error::NotOptimal(format!("{:?}", solution.status)));
    }
    let a = t.degree() / 2;
    // remove solver-level trace drift before reading off the measure
    let m = solution.m_star.scale(1.0 / solution.m_star.trace());
    let measure = measure_density(&m)?;
    let nu_tilde = lower_bound(t, &measure)?;
    let eps = definetti_eps(a, solution.ell, t.n());
    Ok(BoundsReport {
        n: t.n(),
        d: t.degree(),
        level: solution.ell,
        nu_ell: solution.nu_ell,
        nu_tilde,
        eps: eps.value,
        eps_valid: eps.valid,
        duality_gap: solution.duality_gap,
        iterations: solution.iterations,
        oracle_value: None,
        gamma: 1.0,
        measure,
    })
}

/// Solves level `ℓ` for `t` and returns the certified sandwich.
pub fn sandwich_report(t: &HomoPoly, ell: usize, tol: f64) -> Result<BoundsReport> {
    let problem = build_relaxation(t, ell)?;
    let solution = solve_sdp(&problem, tol)?;
    sandwich_from_solution(t, &solution)
}

/// `‖A - B‖₁`.
pub fn trace_distance(a: &MaxSymMatrix, b: &MaxSymMatrix) -> Result<f64> {
    let diff = a.sub(b)?;
    Ok(diff
        .matrix()
        .clone()
        .symmetric_eigenvalues()
        .iter()
        .map(|v| v.abs())
        .sum())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceCheck {
    pub distance: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Compares the `a`-copy reduction of `M` with `M̃_a` in trace distance
/// against `2a²(a + n/2 - 1)/(2ℓ + n)`.
pub fn definetti_trace_check(m: &MaxSymMatrix, a: usize) -> Result<TraceCheck> {
    let reduced = partial_trace_sym(m, m.ell().saturating_sub(a))?;
    let approx = build_approx_moment_matrix(m, a)?;
    let distance = trace_distance(&reduced, &approx)?;
    let (af, nf, lf) = (a as f64, m.n() as f64, m.ell() as f64);
    let bound = 2.0 * af * af * (af + nf / 2.0 - 1.0) / (2.0 * lf + nf);
    Ok(TraceCheck {
        distance,
        bound,
        pass: distance <= bound + 1e-7,
    })
}

/// Lower estimate of `‖A - B‖_{F1} = sup_{‖F‖_∞ ≤ 1} tr(Z_F (A - B))` from
/// random test polynomials `F`, each normalized by an ascent estimate of its
/// sup norm. Trial `k` uses stream `k` of `seed`, so the estimate is a
/// running maximum over a fixed schedule.
pub fn f1_distance_lower_estimate(
    a: &MaxSymMatrix,
    b: &MaxSymMatrix,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    let diff = a.sub(b)?;
    let (n, ell) = (diff.n(), diff.ell());
    let beta = diff.vectorized();
    let catalog = BasisCatalog::shared(n, 2 * ell);
    let mut best: f64 = 0.0;
    for trial in 0..trials {
        let mut rng = stream_rng(seed, trial as u64);
        let coeffs = DVector::from_fn(catalog.len(), |_, _| rng.random_range(-1.0..1.0));
        let f = HomoPoly::from_dense(n, 2 * ell, &coeffs);
        if f.is_zero() {
            continue;
        }
        let cfg = OracleConfig {
            restarts: 8,
            seed: seed ^ (trial as u64).rotate_left(32),
            ..OracleConfig::default()
        };
        let sup = sphere_maximize(&f, &cfg)
            .value
            .max(sphere_maximize(&f.scale(-1.0), &cfg).value);
        if sup <= 0.0 {
            continue;
        }
        let z = MaxSymMatrix::from_coeffs(n, ell, coeffs)?.vectorized();
        best = best.max(z.dot(&beta).abs() / sup);
    }
    Ok(best)
}

/// Harmonic blocks of a degree-`2ℓ` P-density for `M`: the blocks of `Q_M`
/// with block `j` multiplied by `ω_n / (ω_{n-1} λ(n, ℓ, j))`.
pub fn p_from_q_coefficients(m: &MaxSymMatrix) -> Result<HarmonicDecomposition> {
    check_n(m.n())?;
    let dec = harmonic_decompose(&m.to_poly())?;
    let (n, ell) = (m.n(), m.ell());
    for (&j, h) in &dec.parts {
        if lambda_coeff(n, ell, j) == 0.0 && !h.is_zero() {
            return Err(Error::Numerical(format!(
                "Q-representation has a nonzero block at degree {j} where λ vanishes"
            )));
        }
    }
    let ratio = surface_area(n) / surface_area(n - 1);
    Ok(dec.rescale(|j| ratio / lambda_coeff(n, ell, j)))
}

/// `∫ P(x) |x⟩⟨x|^{⊗ℓ} dx` for a degree-`2ℓ` density `P`.
pub fn moment_matrix_of_density(p: &HomoPoly, ell: usize) -> Result<MaxSymMatrix> {
    let mu = SphereMeasureDensity {
        n: p.n(),
        ell: p.degree() / 2,
        density: p.clone(),
        normalization_residual: 0.0,
    };
    approx_moment_from_density(&mu, ell)
}

/// `Σ w_i |x_i⟩⟨x_i|^{⊗ℓ}` with Dirichlet(1) weights and uniform `x_i`.
pub fn random_product_mixture<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    ell: usize,
    components: usize,
) -> MaxSymMatrix {
    assert!(components >= 1, "mixture needs at least one component");
    // normalized unit exponentials are Dirichlet(1, ..., 1)
    let raw: Vec<f64> = (0..components).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = raw.iter().sum();
    let weights = raw.into_iter().map(|w: f64| w / total);
    let mut acc = MaxSymMatrix::zero(n, ell);
    for w in weights {
        let x = uniform_unit(rng, n);
        acc = acc
            .add(&MaxSymMatrix::product_state(&x, ell).scale(w))
            .expect("same shape");
    }
    acc
}

/// Optimizer of the level-`ℓ` relaxation for a random quadratic or quartic
/// objective: a feasible state with no known positive P-representation.
pub fn random_sdp_state<R: Rng + ?Sized>(rng: &mut R, n: usize, ell: usize) -> Result<MaxSymMatrix> {
    let d = if ell >= 2 { 4 } else { 2 };
    let catalog = BasisCatalog::shared(n, d);
    let coeffs = DVector::from_fn(catalog.len(), |_, _| rng.random_range(-1.0..1.0));
    let t = HomoPoly::from_dense(n, d, &coeffs);
    let solution = solve_sdp(&build_relaxation(&t, ell)?, 1e-9)?;
    if solution.status != SolveStatus::Optimal {
        return Err(Error::NotOptimal(format!("{:?}", solution.status)));
    }
    Ok(solution.m_star.scale(1.0 / solution.m_star.trace()))
}

/// The moment matrix of the uniform sphere measure on `ℓ` copies.
pub fn uniform_state(n: usize, ell: usize) -> MaxSymMatrix {
    let catalog = BasisCatalog::shared(n, 2 * ell);
    let moments = moment_vector(n, 2 * ell);
    let coeffs = DVector::from_iterator(
        catalog.len(),
        catalog
            .indices()
            .iter()
            .zip(moments.iter())
            .map(|(k, m)| multinomial(k.exponents()) * m),
    );
    MaxSymMatrix::from_coeffs(n, ell, coeffs).expect("catalog length")
}
