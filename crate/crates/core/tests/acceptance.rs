//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sphereopt_core::definetti::{moment_matrix_of_density, p_from_q_coefficients, random_product_mixture};
use sphereopt_core::harmonics::funk_hecke_check;
use sphereopt_core::symbasis::dense_number_basis;
use sphereopt_core::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_form(rng: &mut ChaCha8Rng, n: usize, d: usize) -> HomoPoly {
    let len = BasisCatalog::shared(n, d).len();
    HomoPoly::from_dense(n, d, &DVector::from_fn(len, |_, _| rng.random_range(-1.0..1.0)))
}

fn unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    sphereopt_core::oracle::uniform_unit(rng, n)
}

fn solve(t: &HomoPoly, ell: usize, tol: f64) -> SdpSolution {
    let sol = solve_sdp(&build_relaxation(t, ell).unwrap(), tol).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal, "solver did not converge");
    sol
}

fn oracle(t: &HomoPoly, seed: u64) -> f64 {
    sphere_maximize(
        t,
        &OracleConfig {
            seed,
            ..OracleConfig::default()
        },
    )
    .value
}

fn quadratic_exactness() -> Outcome {
    let mut r = rng(1);
    let mut worst: f64 = 0.0;
    for trial in 0..50 {
        let n = 2 + trial % 3;
        let a = DMatrix::from_fn(n, n, |_, _| r.random_range(-1.0..1.0));
        let a = (&a + a.transpose()) * 0.5;
        let mut t = HomoPoly::zero(n, 2);
        for i in 0..n {
            for j in i..n {
                let mut e = vec![0u32; n];
                e[i] += 1;
                e[j] += 1;
                let c = if i == j { a[(i, i)] } else { 2.0 * a[(i, j)] };
                t = t.add(&HomoPoly::monomial(e, c)).unwrap();
            }
        }
        let lmax = a.symmetric_eigenvalues().max();
        worst = worst.max((solve(&t, 1, 1e-9).nu_ell - lmax).abs());
    }
    Outcome {
        pass: worst <= 1e-6,
        detail: format!("max |nu_1 - lambda_max| = {worst:.2e} over 50 matrices"),
    }
}

/// `C_j^α(t) / C_j^α(1)` by the three-term recurrence.
fn legendre_like(j: usize, n: usize, t: f64) -> f64 {
    let alpha = (n as f64 - 2.0) / 2.0;
    let (mut c0, mut c1) = (1.0, 2.0 * alpha * t);
    let (mut e0, mut e1) = (1.0, 2.0 * alpha);
    if j == 0 {
        return 1.0;
    }
    for k in 2..=j {
        let kf = k as f64;
        let c2 = (2.0 * t * (kf + alpha - 1.0) * c1 - (kf + 2.0 * alpha - 2.0) * c0) / kf;
        let e2 = (2.0 * (kf + alpha - 1.0) * e1 - (kf + 2.0 * alpha - 2.0) * e0) / kf;
        (c0, c1, e0, e1) = (c1, c2, e1, e2);
    }
    c1 / e1
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
        return left + right + (left + right - whole) / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, tol / 2.0, depth - 1) + simpson(f, m, b, fm, frm, fb, tol / 2.0, depth - 1)
}

/// `∫_0^π cos^{2ℓ}θ P_j(cos θ) sin^{n-2}θ dθ` over uneven panels.
fn lambda_quadrature(n: usize, ell: usize, j: usize) -> f64 {
    let f = move |th: f64| {
        let c = th.cos();
        c.powi(2 * ell as i32) * legendre_like(j, n, c) * th.sin().powi(n as i32 - 2)
    };
    let cuts = [0.0, 0.37, 0.81, 1.3, 1.77, 2.2, 2.71, PI];
    cuts.windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            simpson(&f, a, b, f(a), f(0.5 * (a + b)), f(b), 1e-14, 40)
        })
        .sum()
}

fn lambda_closed_form() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut exact_zero = true;
    for n in 3..=8 {
        for ell in 0..=10 {
            for j in 0..=2 * ell + 3 {
                let v = lambda_coeff(n, ell, j);
                if j % 2 == 1 || j > 2 * ell {
                    exact_zero &= v == 0.0;
                } else {
                    worst = worst.max((v - lambda_quadrature(n, ell, j)).abs());
                }
            }
        }
    }
    Outcome {
        pass: worst <= 1e-9 && exact_zero,
        detail: format!("max |closed - quadrature| = {worst:.2e}, zeros exact: {exact_zero}"),
    }
}

/// Real and imaginary parts of `(v·x)^j` for an isotropic complex `v`.
fn isotropic_harmonics(rng: &mut ChaCha8Rng, j: usize) -> [HomoPoly; 2] {
    let a = unit(rng, 3);
    let mut b = unit(rng, 3);
    let dot: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
    b.iter_mut().zip(&a).for_each(|(y, x)| *y -= dot * x);
    let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    b.iter_mut().for_each(|v| *v /= nb);
    let lin = |w: &[f64]| {
        (0..3).fold(HomoPoly::zero(3, 1), |acc, t| {
            let mut e = vec![0u32; 3];
            e[t] = 1;
            acc.add(&HomoPoly::monomial(e, w[t])).unwrap()
        })
    };
    let (la, lb) = (lin(&a), lin(&b));
    // (la + i lb)^j expanded term by term
    let mut re = HomoPoly::zero(3, j);
    let mut im = HomoPoly::zero(3, j);
    for k in 0..=j {
        let binom = (0..k).fold(1.0, |acc, i| acc * (j - i) as f64 / (i + 1) as f64);
        let mut term = HomoPoly::constant(3, binom);
        for _ in 0..j - k {
            term = term.product(&la);
        }
        for _ in 0..k {
            term = term.product(&lb);
        }
        match k % 4 {
            0 => re = re.add(&term).unwrap(),
            1 => im = im.add(&term).unwrap(),
            2 => re = re.sub(&term).unwrap(),
            _ => im = im.sub(&term).unwrap(),
        }
    }
    [re, im]
}

fn funk_hecke() -> Outcome {
    let mut r = rng(3);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for j in [0usize, 2, 4] {
        for _ in 0..3 {
            for f in isotropic_harmonics(&mut r, j) {
                if f.is_zero() {
                    continue;
                }
                for ell in 0..=5 {
                    let y = unit(&mut r, 3);
                    worst = worst.max(funk_hecke_check(&f, ell, &y).unwrap());
                    count += 1;
                }
            }
        }
    }
    Outcome {
        pass: worst < 1e-9,
        detail: format!("max residual {worst:.2e} over {count} checks"),
    }
}

fn definetti_trace_bound() -> Outcome {
    let mut failures = Vec::new();
    let mut total_fail = 0;
    for n in [3usize, 4] {
        for ell in [4usize, 6, 8] {
            for a in [1usize, 2] {
                let mut r = rng(1000 + 100 * n as u64 + 10 * ell as u64 + a as u64);
                let mut fails = 0;
                let mut worst_ratio: f64 = 0.0;
                for _ in 0..200 {
                    let m = random_product_mixture(&mut r, n, ell, 5);
                    let c = definetti_trace_check(&m, a).unwrap();
                    worst_ratio = worst_ratio.max(c.distance / c.bound);
                    fails += usize::from(!c.pass);
                }
                total_fail += fails;
                if fails > 0 {
                    failures.push(format!(
                        "n={n} l={ell} a={a}: {fails}/200 (max distance/bound {worst_ratio:.3})"
                    ));
                }
            }
        }
    }
    Outcome {
        pass: total_fail == 0,
        detail: if failures.is_empty() {
            "2400 trials within bound".into()
        } else {
            format!("violations: {}", failures.join("; "))
        },
    }
}

fn convergence_guarantee() -> Outcome {
    let mut r = rng(5);
    let ell = 19;
    let mut sandwich_ok = true;
    let mut eps_ok = true;
    let mut worst_rel: f64 = 0.0;
    let mut valid = true;
    for seed in 0..20 {
        let t = random_form(&mut r, 3, 4);
        let rep = sandwich_from_solution(&t, &solve(&t, ell, 1e-8)).unwrap();
        let v = oracle(&t, seed);
        sandwich_ok &= rep.nu_tilde <= v + 1e-6 && v <= rep.nu_ell + 1e-6;
        valid &= rep.eps_valid;
        if rep.eps_valid {
            eps_ok &= rep.nu_ell - rep.nu_tilde <= rep.eps * rep.nu_ell + 1e-7;
            worst_rel = worst_rel.max((rep.nu_ell - rep.nu_tilde) / (rep.eps * rep.nu_ell));
        }
    }
    Outcome {
        pass: sandwich_ok && eps_ok,
        detail: format!(
            "l={ell} eps_valid={valid} sandwich={sandwich_ok} gap/(eps*nu) max {worst_rel:.3}"
        ),
    }
}

fn monotonicity() -> Outcome {
    let mut r = rng(6);
    let mut ok = true;
    let mut worst: f64 = f64::INFINITY;
    for seed in 0..20 {
        let t = random_form(&mut r, 3, 4);
        let s: Vec<SdpSolution> = (2..=4).map(|l| solve(&t, l, 1e-9)).collect();
        let v = oracle(&t, seed);
        // each value is certified only up to its reported duality gap
        for w in s.windows(2) {
            let slack = w[0].duality_gap + w[1].duality_gap;
            ok &= w[0].nu_ell >= w[1].nu_ell - slack;
            worst = worst.min(w[0].nu_ell - w[1].nu_ell);
        }
        ok &= s[2].nu_ell >= v - 1e-6;
    }
    Outcome {
        pass: ok,
        detail: format!("min consecutive decrease {worst:.2e}"),
    }
}

fn odd_pipeline() -> Outcome {
    let mut r = rng(7);
    let mut worst: f64 = 0.0;
    let mut bracket = true;
    for k in 0..10u64 {
        let n = 2 + (k % 2) as usize;
        let t = random_form(&mut r, n, 3);
        let (lifted, record) = lift_odd(&t).unwrap();
        let m = oracle(&t, k);
        let ml = oracle(&lifted, k);
        worst = worst.max((ml - record.gamma * m).abs());
        let rep = pullback_bounds(&sandwich_report(&lifted, 4, 1e-9).unwrap(), &record).unwrap();
        bracket &= rep.nu_tilde - 1e-6 <= m && m <= rep.nu_ell + 1e-6;
    }
    Outcome {
        pass: worst <= 1e-5 && bracket,
        detail: format!("max |max T' - gamma max T| = {worst:.2e}, sandwich brackets: {bracket}"),
    }
}

/// Fully symmetric order-2a tensor of `T`, reshaped to `n^a × n^a`.
fn dense_symmetric_tensor(t: &HomoPoly) -> DMatrix<f64> {
    let (n, a) = (t.n(), t.degree() / 2);
    let side = n.pow(a as u32);
    DMatrix::from_fn(side, side, |row, col| {
        let mut counts = vec![0u32; n];
        for mut idx in [row, col] {
            for _ in 0..a {
                counts[idx % n] += 1;
                idx /= n;
            }
        }
        let mult = multinomial_f(&counts);
        t.coeff(&MultiIndex::new(counts)) / mult
    })
}

fn multinomial_f(k: &[u32]) -> f64 {
    let fact = |m: u32| (1..=m).map(f64::from).product::<f64>();
    fact(k.iter().sum()) / k.iter().map(|&e| fact(e)).product::<f64>()
}

fn encoding_faithfulness() -> Outcome {
    let mut r = rng(8);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for n in 1..=3 {
        for a in 1..=2 {
            for _ in 0..20 {
                let t = random_form(&mut r, n, 2 * a);
                let basis = dense_number_basis(n, a).unwrap();
                let m = poly_to_maxsym_matrix(&t).unwrap();
                let full = &basis * m.matrix() * basis.transpose();
                worst = worst.max((full - dense_symmetric_tensor(&t)).amax());
                count += 1;
            }
        }
    }
    Outcome {
        pass: worst <= 1e-10,
        detail: format!("max entrywise deviation {worst:.2e} over {count} polynomials"),
    }
}

fn p_vs_q() -> Outcome {
    let mut r = rng(9);
    let mut worst: f64 = 0.0;
    for trial in 0..50 {
        let ell = 1 + trial % 4;
        // positive P-density: a normalized sum of three squares
        let mut p = HomoPoly::zero(3, 2 * ell);
        for _ in 0..3 {
            let f = random_form(&mut r, 3, ell);
            p = p.add(&f.product(&f)).unwrap();
        }
        let p = p.scale(1.0 / sphereopt_core::harmonics::sphere_integral(&p));
        let m = moment_matrix_of_density(&p, ell).unwrap();
        let q_blocks = harmonic_decompose(&m.to_poly()).unwrap();
        let p_blocks = harmonic_decompose(&p).unwrap();
        let ratio = surface_area(2) / surface_area(3);
        for (j, pj) in &p_blocks.parts {
            let want = pj.scale(ratio * lambda_coeff(3, ell, *j));
            let got = q_blocks.part(*j).cloned().unwrap_or_else(|| HomoPoly::zero(3, *j));
            worst = worst.max(got.max_coeff_diff(&want));
        }
        let back = p_from_q_coefficients(&m).unwrap();
        for (j, pj) in &p_blocks.parts {
            worst = worst.max(back.part(*j).unwrap().max_coeff_diff(pj));
        }
    }
    Outcome {
        pass: worst <= 1e-8,
        detail: format!("max blockwise deviation {worst:.2e} over 50 states"),
    }
}

fn solver_quality() -> Outcome {
    let mut r = rng(10);
    // every level with p <= 100 for n = 3..6 and quadratic or quartic
    // objectives; n = 2 up to ℓ = 30 (see README: beyond that the binary
    // circle cone is not representable in double precision)
    let mut cases: Vec<(HomoPoly, usize)> = Vec::new();
    for (n, top) in [(2usize, 30usize), (3, 12), (4, 6), (5, 4), (6, 3)] {
        for ell in 1..=top {
            let d = if ell >= 2 { 4 } else { 2 };
            cases.push((random_form(&mut r, n, d), ell));
        }
    }
    for n in 7..=12 {
        cases.push((random_form(&mut r, n, 2), 1));
        if sym_dimension(n, 2).unwrap() <= 100 {
            cases.push((random_form(&mut r, n, 4), 2));
        }
    }
    let mut ok = true;
    let (mut worst_gap, mut worst_iter): (f64, usize) = (0.0, 0);
    let mut deterministic = true;
    for (t, ell) in &cases {
        let problem = build_relaxation(t, *ell).unwrap();
        assert!(problem.p <= 100);
        let a = solve_sdp(&problem, 1e-9).unwrap();
        let b = solve_sdp(&problem, 1e-9).unwrap();
        deterministic &= a.nu_ell.to_bits() == b.nu_ell.to_bits();
        ok &= a.status == SolveStatus::Optimal && a.duality_gap <= 1e-8 && a.iterations <= 100;
        worst_gap = worst_gap.max(a.duality_gap);
        worst_iter = worst_iter.max(a.iterations);
    }
    Outcome {
        pass: ok && deterministic,
        detail: format!(
            "{} instances, max gap {worst_gap:.2e}, max iterations {worst_iter}, bitwise reruns: {deterministic}",
            cases.len()
        ),
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 10] = [
        ("quadratic exactness", quadratic_exactness, Duration::from_secs(10)),
        ("lambda closed form", lambda_closed_form, Duration::from_secs(5)),
        ("Funk-Hecke identity", funk_hecke, Duration::from_secs(10)),
        ("de Finetti trace bound", definetti_trace_bound, Duration::from_secs(120)),
        ("convergence guarantee", convergence_guarantee, Duration::from_secs(600)),
        ("hierarchy monotonicity", monotonicity, Duration::from_secs(120)),
        ("odd-degree pipeline", odd_pipeline, Duration::from_secs(60)),
        ("encoding faithfulness", encoding_faithfulness, Duration::from_secs(30)),
        ("P/Q relation", p_vs_q, Duration::from_secs(30)),
        ("solver quality", solver_quality, Duration::from_secs(600)),
    ];
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let took = start.elapsed();
        let pass = out.pass && took <= *budget;
        failed += usize::from(!pass);
        println!(
            "{} {:>2} {name}: {} [{:.1}s / {}s]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            out.detail,
            took.as_secs_f64(),
            budget.as_secs()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
