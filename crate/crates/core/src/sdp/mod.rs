//! The level-`ℓ` relaxation of `max_{|x|=1} T(x)` over maximally symmetric
//! states, its solution, and sum-of-squares certificates read off the dual.
//!
//! The primal variable is the orthonormal coordinate vector `β` of `|M⟩` in
//! the degree-`2ℓ` number basis, so `M(β) = Σ_k β_k B_k` is maximally
//! symmetric by construction:
//!
//! ```text
//! primal:  max c·β   s.t.  M(β) ⪰ 0,  τ·β = 1
//! dual:    min t     s.t.  Y = t·I - Z_{T'} + Z̄ ⪰ 0,  Π_{2ℓ}|Z̄⟩ = 0
//! ```

mod ipm;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::poly::{vector_to_poly, HomoPoly, MaxSymMatrix, PairTable};
use crate::symbasis::sym_dimension;

pub use ipm::InteriorPoint;

/// Default cap on the symmetric-subspace dimension `p`.
pub const DEFAULT_MAX_P: usize = 512;

#[derive(Debug, Clone)]
pub struct SdpProblem {
    pub n: usize,
    /// Half the degree of the original objective.
    pub a: usize,
    pub ell: usize,
    pub p: usize,
    pub q: usize,
    /// `T' = T · r^{2(ℓ-a)}`.
    pub t_prime: HomoPoly,
    /// `c_k = ⟨Z_{T'}, B_k⟩`.
    pub objective: DVector<f64>,
    /// `τ_k = tr(B_k)`.
    pub trace: DVector<f64>,
    pub(crate) table: Arc<PairTable>,
}

impl SdpProblem {
    /// `M(β)` as a maximally symmetric matrix.
    pub fn matrix_of(&self, beta: &DVector<f64>) -> MaxSymMatrix {
        MaxSymMatrix::from_vectorized(self.n, self.ell, beta).expect("length q")
    }

    /// `Z_{T'}` in the number basis.
    pub fn objective_matrix(&self) -> DMatrix<f64> {
        self.table.assemble(&self.objective)
    }
}

/// Builds the relaxation with the default resource guard.
pub fn build_relaxation(t: &HomoPoly, ell: usize) -> Result<SdpProblem> {
    build_relaxation_capped(t, ell, DEFAULT_MAX_P)
}

/// Builds the relaxation, refusing problems with `p > max_p`.
pub fn build_relaxation_capped(t: &HomoPoly, ell: usize, max_p: usize) -> Result<SdpProblem> {
    if t.degree() % 2 != 0 {
        return Err(Error::OddDegree(t.degree()));
    }
    if t.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let a = t.degree() / 2;
    if ell < a || ell == 0 {
        return Err(Error::InvalidLevel {
            level: ell,
            min: a.max(1),
        });
    }
    let n = t.n();
    let p = sym_dimension(n, ell)?;
    if p > max_p {
        return Err(Error::ResourceGuard { p, cap: max_p });
    }
    let q = sym_dimension(n, 2 * ell)?;
    let t_prime = t.multiply_r2(ell - a);
    let z = MaxSymMatrix::from_coeffs(n, ell, t_prime.to_dense())?;
    let table = PairTable::shared(n, ell);
    Ok(SdpProblem {
        n,
        a,
        ell,
        p,
        q,
        objective: z.vectorized(),
        trace: table.trace.clone(),
        t_prime,
        table,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    /// Iteration limit reached; the best iterate is returned.
    MaxIterations,
    /// The Newton system could not be solved even after regularization.
    NumericalFailure,
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub n: usize,
    pub ell: usize,
    /// Primal optimum `ν_ℓ = c·β*`.
    pub nu_ell: f64,
    pub m_star: MaxSymMatrix,
    pub t_star: f64,
    /// `Z̄* = Y* - t*·I + Z_{T'}`.
    pub zbar_star: DMatrix<f64>,
    /// Dual slack `Y* = t*·I - Z_{T'} + Z̄*`.
    pub y_star: DMatrix<f64>,
    /// `|t* - ν_ℓ|`.
    pub duality_gap: f64,
    pub iterations: usize,
    pub status: SolveStatus,
}

/// Seam for alternative SDP backends.
pub trait SdpSolver {
    fn solve(&self, problem: &SdpProblem, tol: f64) -> Result<SdpSolution>;
}

/// Solves with the built-in interior-point method.
pub fn solve_sdp(problem: &SdpProblem, tol: f64) -> Result<SdpSolution> {
    InteriorPoint::default().solve(problem, tol)
}

pub(crate) fn check_tolerance(tol: f64) -> Result<()> {
    if !(1e-10..=1e-2).contains(&tol) {
        return Err(Error::InvalidTolerance(tol));
    }
    Ok(())
}

/// `t - T(x) = Σ_i w_i T_i(x)²` on the sphere.
#[derive(Clone, Debug)]
pub struct SosCertificate {
    pub t: f64,
    pub squares: Vec<(f64, HomoPoly)>,
}

impl SosCertificate {
    pub fn eval_sum(&self, x: &[f64]) -> Result<f64> {
        let mut s = 0.0;
        for (w, p) in &self.squares {
            let v = p.eval(x)?;
            s += w * v * v;
        }
        Ok(s)
    }

    /// `|t - T(x) - Σ w_i T_i(x)²|`.
    pub fn residual(&self, t: &HomoPoly, x: &[f64]) -> Result<f64> {
        Ok((self.t - t.eval(x)? - self.eval_sum(x)?).abs())
    }
}

/// Eigendecomposes `Y*`, drops eigenvalues below
/// `max(tol, 1e-9) · ‖Y*‖_∞` and maps each remaining eigenvector back to a
/// degree-`ℓ` polynomial.
pub fn extract_sos_certificate(solution: &SdpSolution, tol: f64) -> Result<SosCertificate> {
    if solution.status != SolveStatus::Optimal {
        return Err(Error::NotOptimal(format!("{:?}", solution.status)));
    }
    let y = &solution.y_star;
    let norm_inf = y
        .row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let cut = tol.max(1e-9) * norm_inf;
    let eig = y.clone().symmetric_eigen();
    let mut squares = Vec::new();
    for (k, &w) in eig.eigenvalues.iter().enumerate() {
        if w <= cut {
            continue;
        }
        let v: DVector<f64> = eig.eigenvectors.column(k).into_owned();
        // ⟨x^{⊗ℓ}|v⟩ = Σ_i v_i sqrt(ℓ!/i!) x^i, the inverse of poly_to_vector
        squares.push((w, vector_to_poly(solution.n, solution.ell, &v)));
    }
    Ok(SosCertificate {
        t: solution.t_star,
        squares,
    })
}
