//! Dense primal-dual path-following with Nesterov-Todd scaling and
//! Mehrotra predictor-corrector steps.
//!
//! The iteration starts from the moment vector of the uniform sphere measure
//! (strictly primal feasible) and from `Y = t₀·I - Z_{T'}`, `Z̄ = 0` (strictly
//! dual feasible), so both linear constraint sets stay satisfied up to
//! rounding and only the complementarity gap has to be driven to zero.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::{check_tolerance, SdpProblem, SdpSolution, SdpSolver, SolveStatus};
use crate::error::{Error, Result};
use crate::harmonics::moment_vector;
use crate::poly::{beta_scale, PairTable};

#[derive(Clone, Debug)]
pub struct InteriorPoint {
    pub max_iter: usize,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_fraction: f64,
}

impl Default for InteriorPoint {
    fn default() -> Self {
        Self {
            max_iter: 100,
            step_fraction: 0.98,
        }
    }
}

/// Index lists for assembling `H_kl = ⟨B_k, W B_l W⟩`.
struct SchurPattern {
    /// Per row `k`: pairs `(i, j, o · (2 if i≠j else 1))`.
    rows: Vec<Vec<(usize, usize, f64)>>,
    /// All pairs sorted by `l`, weight `o · (1 if i≠j else 1/2)`.
    ci: Vec<usize>,
    cj: Vec<usize>,
    cw: Vec<f64>,
    start: Vec<usize>,
}

impl SchurPattern {
    fn new(table: &PairTable) -> Self {
        let q = table.q;
        let mut rows = vec![Vec::new(); q];
        for e in &table.entries {
            let w = if e.i == e.j { e.overlap } else { 2.0 * e.overlap };
            rows[e.k].push((e.i, e.j, w));
        }
        let mut start = Vec::with_capacity(q + 1);
        let (mut ci, mut cj, mut cw) = (Vec::new(), Vec::new(), Vec::new());
        for row in &rows {
            start.push(ci.len());
            for &(i, j, w) in row {
                ci.push(i);
                cj.push(j);
                cw.push(0.5 * w);
            }
        }
        start.push(ci.len());
        Self {
            rows,
            ci,
            cj,
            cw,
            start,
        }
    }

    fn assemble(&self, w: &DMatrix<f64>) -> DMatrix<f64> {
        let q = self.rows.len();
        let mut h = DMatrix::zeros(q, q);
        for k in 0..q {
            for &(i, j, wk) in &self.rows[k] {
                let wi = w.column(i);
                let wj = w.column(j);
                let wi = wi.as_slice();
                let wj = wj.as_slice();
                for l in k..q {
                    let mut s = 0.0;
                    for idx in self.start[l]..self.start[l + 1] {
                        let (a, b) = (self.ci[idx], self.cj[idx]);
                        s += self.cw[idx] * (wi[a] * wj[b] + wi[b] * wj[a]);
                    }
                    h[(k, l)] += wk * s;
                }
            }
        }
        for k in 0..q {
            for l in 0..k {
                h[(k, l)] = h[(l, k)];
            }
        }
        h
    }
}

/// Nesterov-Todd scaling at `(S, Y)`: `Ginv S Ginvᵀ = Gᵀ Y G = Λ`.
struct Scaling {
    lambda: DVector<f64>,
    g: DMatrix<f64>,
    ginv: DMatrix<f64>,
    w: DMatrix<f64>,
}

fn nt_scaling(ls: &Cholesky<f64, Dyn>, ly: &Cholesky<f64, Dyn>) -> Option<Scaling> {
    let l_s = ls.l();
    let l_y = ly.l();
    let svd = (l_y.transpose() * &l_s).svd(false, true);
    let lambda = svd.singular_values.clone();
    if lambda.iter().any(|v| !(*v > 0.0)) {
        return None;
    }
    let v_t = svd.v_t?;
    // Ginvᵀ = L_s^{-T} V Λ^{1/2}
    let mut rhs = v_t.transpose();
    for (c, lam) in lambda.iter().enumerate() {
        rhs.column_mut(c).scale_mut(lam.sqrt());
    }
    let ginv_t = l_s.transpose().solve_upper_triangular(&rhs)?;
    let ginv = ginv_t.transpose();
    let w = &ginv_t * &ginv;
    // G = L_s V Λ^{-1/2}
    let mut g = &l_s * v_t.transpose();
    for (c, lam) in lambda.iter().enumerate() {
        g.column_mut(c).scale_mut(1.0 / lam.sqrt());
    }
    Some(Scaling { lambda, g, ginv, w })
}

/// Largest `α ≤ 1` keeping `Λ + α·Δ ⪰ 0`, shortened by `fraction`.
fn step_length(lambda: &DVector<f64>, delta: &DMatrix<f64>, fraction: f64) -> f64 {
    let inv_sqrt = lambda.map(|v| 1.0 / v.sqrt());
    let scaled = DMatrix::from_fn(delta.nrows(), delta.ncols(), |i, j| {
        delta[(i, j)] * inv_sqrt[i] * inv_sqrt[j]
    });
    let min_eig = scaled
        .symmetric_eigenvalues()
        .iter()
        .fold(f64::INFINITY, |m, &v| m.min(v));
    if min_eig >= 0.0 {
        1.0
    } else {
        (fraction * (-1.0 / min_eig)).min(1.0)
    }
}

struct Direction {
    dbeta: DVector<f64>,
    dt: f64,
    dy: DMatrix<f64>,
    ds_scaled: DMatrix<f64>,
    dy_scaled: DMatrix<f64>,
}

struct Newton<'a> {
    problem: &'a SdpProblem,
    scaling: &'a Scaling,
    h_chol: &'a Cholesky<f64, Dyn>,
    v: &'a DVector<f64>,
    r_p: f64,
    r_d: &'a DVector<f64>,
}

impl Newton<'_> {
    /// `H x = ⟨B_k, W M(x) W⟩` applied through dense products rather than the
    /// assembled Schur matrix.
    fn apply_h(&self, x: &DVector<f64>) -> DVector<f64> {
        let table = &self.problem.table;
        let w = &self.scaling.w;
        table.project(&(w * table.assemble(x) * w))
    }

    /// Solves `H Δβ + Δt τ = g`, `τ·Δβ = r` with two rounds of iterative
    /// refinement against the exact operator.
    fn bordered_solve(&self, g: &DVector<f64>, r: f64) -> (DVector<f64>, f64) {
        let tau = &self.problem.trace;
        let base = |g: &DVector<f64>, r: f64| {
            let u = self.h_chol.solve(g);
            let dt = (tau.dot(&u) - r) / tau.dot(self.v);
            (&u - self.v * dt, dt)
        };
        let (mut x, mut dt) = base(g, r);
        for _ in 0..2 {
            let res_g = g - self.apply_h(&x) - tau * dt;
            let res_r = r - tau.dot(&x);
            let (cx, cdt) = base(&res_g, res_r);
            x += cx;
            dt += cdt;
        }
        (x, dt)
    }

    /// Direction for the scaled complementarity target `Λ∘(ΔS̃ + ΔỸ) = R`.
    fn solve(&self, r: &DMatrix<f64>) -> Direction {
        let lam = &self.scaling.lambda;
        let p = lam.len();
        let d = DMatrix::from_fn(p, p, |i, j| 2.0 * r[(i, j)] / (lam[i] + lam[j]));
        let ginv = &self.scaling.ginv;
        let r_c = ginv.transpose() * &d * ginv;
        let table = &self.problem.table;
        let g = table.project(&r_c) - self.r_d;
        let (dbeta, dt) = self.bordered_solve(&g, self.r_p);
        let tau = &self.problem.trace;
        let ds = table.assemble(&dbeta);
        let w = &self.scaling.w;
        let mut dy = r_c - w * &ds * w;
        // Rounding in the Schur solve leaks into the dual equation; remove
        // the leak from the maximally symmetric part of ΔY, which is exactly
        // the part that equation constrains.
        let leak = table.project(&dy) - tau * dt - self.r_d;
        let fix = table.assemble(&leak);
        dy -= &fix;
        symmetrize(&mut dy);
        let mut ds_scaled = ginv * &ds * ginv.transpose();
        symmetrize(&mut ds_scaled);
        let g = &self.scaling.g;
        let mut dy_scaled = &d - &ds_scaled - g.transpose() * &fix * g;
        symmetrize(&mut dy_scaled);
        Direction {
            dbeta,
            dt,
            dy,
            ds_scaled,
            dy_scaled,
        }
    }
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let t = m.transpose();
    *m += t;
    *m *= 0.5;
}

fn regularized_cholesky(h: DMatrix<f64>) -> Option<Cholesky<f64, Dyn>> {
    let scale = h.diagonal().amax().max(f64::MIN_POSITIVE);
    for delta in [0.0, 1e-13, 1e-11, 1e-9] {
        let mut m = h.clone();
        if delta > 0.0 {
            for k in 0..m.nrows() {
                m[(k, k)] += delta * scale;
            }
        }
        if let Some(c) = Cholesky::new(m) {
            return Some(c);
        }
    }
    None
}

struct Iterate {
    beta: DVector<f64>,
    t: f64,
    y: DMatrix<f64>,
}

impl InteriorPoint {
    fn start(&self, problem: &SdpProblem, z: &DMatrix<f64>) -> Iterate {
        let moments = moment_vector(problem.n, 2 * problem.ell);
        let scale = beta_scale(problem.n, 2 * problem.ell);
        let mut beta = moments.component_div(&scale);
        beta /= problem.trace.dot(&beta);
        let eig = z.clone().symmetric_eigenvalues();
        let (lo, hi) = (eig.min(), eig.max());
        let t = hi + (hi - lo).max(1.0);
        let y = DMatrix::identity(problem.p, problem.p) * t - z;
        Iterate { beta, t, y }
    }

    fn finish(
        &self,
        problem: &SdpProblem,
        z: &DMatrix<f64>,
        it: Iterate,
        iterations: usize,
        status: SolveStatus,
    ) -> SdpSolution {
        let nu = problem.objective.dot(&it.beta);
        let zbar = &it.y - DMatrix::identity(problem.p, problem.p) * it.t + z;
        SdpSolution {
            n: problem.n,
            ell: problem.ell,
            nu_ell: nu,
            m_star: problem.matrix_of(&it.beta),
            t_star: it.t,
            zbar_star: zbar,
            y_star: it.y,
            duality_gap: (it.t - nu).abs(),
            iterations,
            status,
        }
    }
}

impl SdpSolver for InteriorPoint {
    fn solve(&self, problem: &SdpProblem, tol: f64) -> Result<SdpSolution> {
        check_tolerance(tol)?;
        let table = &problem.table;
        let pattern = SchurPattern::new(table);
        let z = problem.objective_matrix();
        let c = &problem.objective;
        let tau = &problem.trace;
        let p = problem.p;
        let feas_tol = (0.1 * tol).max(1e-11);
        let c_scale = c.amax().max(1.0);

        let mut it = self.start(problem, &z);
        let mut s = table.assemble(&it.beta);
        let (Some(mut ls), Some(mut ly)) = (Cholesky::new(s.clone()), Cholesky::new(it.y.clone()))
        else {
            return Err(Error::Numerical("starting point is not interior".into()));
        };

        for iter in 0..self.max_iter {
            let primal = c.dot(&it.beta);
            let rel = primal.abs().max(1.0);
            let comp = it.y.dot(&s);
            let r_p = 1.0 - tau.dot(&it.beta);
            let r_d = -(table.project(&it.y) - tau * it.t + c);
            if (it.t - primal).abs() <= tol * rel
                && comp <= tol * rel
                && r_p.abs() <= feas_tol
                && r_d.amax() <= feas_tol * c_scale
            {
                return Ok(self.finish(problem, &z, it, iter, SolveStatus::Optimal));
            }

            let Some(scaling) = nt_scaling(&ls, &ly) else {
                return Ok(self.finish(problem, &z, it, iter, SolveStatus::NumericalFailure));
            };
            let Some(h_chol) = regularized_cholesky(pattern.assemble(&scaling.w)) else {
                return Ok(self.finish(problem, &z, it, iter, SolveStatus::NumericalFailure));
            };
            let v = h_chol.solve(tau);
            let newton = Newton {
                problem,
                scaling: &scaling,
                h_chol: &h_chol,
                v: &v,
                r_p,
                r_d: &r_d,
            };
            let lam = &scaling.lambda;
            let mu = lam.iter().map(|l| l * l).sum::<f64>() / p as f64;
            let lam_sq = DMatrix::from_diagonal(&lam.map(|l| l * l));

            // predictor
            let aff = newton.solve(&(-&lam_sq));
            let ap = step_length(lam, &aff.ds_scaled, 1.0);
            let ad = step_length(lam, &aff.dy_scaled, 1.0);
            let s_aff = DMatrix::from_diagonal(lam) + &aff.ds_scaled * ap;
            let y_aff = DMatrix::from_diagonal(lam) + &aff.dy_scaled * ad;
            let mu_aff = s_aff.dot(&y_aff) / p as f64;
            let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

            // corrector
            let mut cross = &aff.ds_scaled * &aff.dy_scaled;
            symmetrize(&mut cross);
            let target = DMatrix::identity(p, p) * (sigma * mu) - &lam_sq - cross;
            let dir = newton.solve(&target);
            let mut ap = step_length(lam, &dir.ds_scaled, self.step_fraction);
            let mut ad = step_length(lam, &dir.dy_scaled, self.step_fraction);

            // guard against rounding pushing an iterate out of the cone
            let mut accepted = false;
            for _ in 0..30 {
                let beta = &it.beta + &dir.dbeta * ap;
                let mut y = &it.y + &dir.dy * ad;
                symmetrize(&mut y);
                let s_new = table.assemble(&beta);
                if let (Some(ls_new), Some(ly_new)) =
                    (Cholesky::new(s_new.clone()), Cholesky::new(y.clone()))
                {
                    it = Iterate {
                        beta,
                        t: it.t + dir.dt * ad,
                        y,
                    };
                    s = s_new;
                    ls = ls_new;
                    ly = ly_new;
                    accepted = true;
                    break;
                }
                ap *= 0.5;
                ad *= 0.5;
            }
            if !accepted {
                return Ok(self.finish(problem, &z, it, iter + 1, SolveStatus::NumericalFailure));
            }
        }
        Ok(self.finish(problem, &z, it, self.max_iter, SolveStatus::MaxIterations))
    }
}
