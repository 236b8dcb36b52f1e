use super::{errored, lambda_sum_instance, logistic_erm, quadratic_instance, random_orthogonal, rng_for, PropertyCheck};
use hvpopt::hard::{chain_constants, ChainFunction, ChainKind};
use hvpopt::linalg::{dot, norm, sub, SymMatrix};
use hvpopt::objective::{LambdaSum, Objective, Quadratic};
use hvpopt::oracle::{NoiseParams, RegularityParams};
use hvpopt::rng::{algorithm_rng, derive_seed, gaussian_vector, oracle_seed, unit_sphere};
use hvpopt::subproblems::{exact_curvature_direction, oja_search, signed_curvature_step, solve_cubic_tr, CubicModel, Secular};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const SUITE: &str = "subproblems";

pub fn subproblem_suite(seed: u64) -> Vec<PropertyCheck> {
    let mut out = cubic_examples();
    out.extend(cubic_kkt(300, seed));
    out.push(cubic_brute_force(10, 100_000, seed));
    out.push(secular_monotone(200, seed));
    out.push(oja_psd(30, 50, 0.05, seed));
    out.push(oja_negative(30, 50, 0.05, 0.2, seed));
    out.push(oja_negative(10, 50, 0.05, 0.0, seed));
    out.extend(curvature_direction_examples());
    out.push(gradient_descent_lemma(300, seed));
    out.push(cubic_descent_lemma(300, seed));
    out.push(curvature_step_descent(200, seed));
    out
}

fn model(g: Vec<f64>, h: SymMatrix<f64>, m: f64, radius: f64) -> CubicModel<f64> {
    CubicModel { g, h, m, radius }
}

/// Closed-form solutions: interior, boundary and hard case.
pub fn cubic_examples() -> Vec<PropertyCheck> {
    let theta = (5f64.sqrt() - 1.0) / 2.0;
    let cases = [
        ("cubic_interior_example", model(vec![1.0, 0.0], SymMatrix::identity(2), 2.0, 10.0), vec![-theta, 0.0], None),
        ("cubic_boundary_example", model(vec![1.0, 0.0], SymMatrix::identity(2), 2.0, 0.1), vec![-0.1, 0.0], None),
        (
            "cubic_hard_case_example",
            model(vec![0.0, 0.0], SymMatrix::from_diag(&[-1.0, 1.0]), 2.0, 10.0),
            vec![1.0, 0.0],
            Some(-1.0 / 6.0),
        ),
    ];
    cases
        .into_iter()
        .map(|(name, m, want, value)| match solve_cubic_tr(&m, 1e-12) {
            Ok(s) => {
                let mut err = norm(&sub(&s.step, &want));
                if let Some(v) = value {
                    err = err.max((m.value(&s.step) - v).abs());
                }
                PropertyCheck::at_most(SUITE, name, err, 1e-8)
            }
            Err(e) => errored(SUITE, name, e),
        })
        .collect()
}

/// Random model in dimension `d`; every fourth one is a hard case (`g` orthogonal
/// to a negative bottom eigenspace), some with a repeated bottom eigenvalue.
pub fn random_model(d: usize, k: usize, rng: &mut ChaCha8Rng) -> CubicModel<f64> {
    let q = random_orthogonal(d, rng);
    let mut lam: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
    lam.sort_by(f64::total_cmp);
    let hard = k % 4 == 3;
    if hard {
        lam[0] = -lam[0].abs() - 0.1;
        if d > 2 && k % 8 == 7 {
            lam[1] = lam[0];
        }
    }
    let h = SymMatrix::from_fn(d, |i, j| (0..d).map(|r| q[r][i] * lam[r] * q[r][j]).sum());
    let scale = 10f64.powf(rng.random_range(-2.0..1.0));
    let mut g = vec![0.0; d];
    for (r, row) in q.iter().enumerate() {
        let c = if hard && lam[r] == lam[0] { 0.0 } else { scale * rng.random_range(-1.0..1.0) };
        g.iter_mut().zip(row).for_each(|(a, b)| *a += c * b);
    }
    let m = rng.random_range(0.1..5.0);
    let radius = 10f64.powf(rng.random_range(-1.5..0.7));
    model(g, h, m, radius)
}

/// Worst KKT residual, feasibility, complementarity and second-order condition.
pub fn cubic_kkt(models: usize, seed: u64) -> Vec<PropertyCheck> {
    let mut rng = rng_for(seed, 40);
    let (mut res, mut infeas, mut comp, mut second, mut negative_mu) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for k in 0..models {
        let d = 1 + k % 8;
        let m = random_model(d, k, &mut rng);
        let s = match solve_cubic_tr(&m, 1e-12) {
            Ok(s) => s,
            Err(e) => return vec![errored(SUITE, "cubic_kkt", e)],
        };
        let n = norm(&s.step);
        res = res.max(m.kkt_residual(&s.step, s.multiplier));
        infeas = infeas.max(n - m.radius);
        comp = comp.max((s.multiplier * (m.radius - n)).abs());
        second = second.max(-(m.h.lambda_min() + m.m / 2.0 * n + s.multiplier));
        negative_mu = negative_mu.max(-s.multiplier);
    }
    vec![
        PropertyCheck::at_most(SUITE, format!("cubic_kkt_residual_{models}_models"), res, 1e-8),
        PropertyCheck::at_most(SUITE, "cubic_step_feasible", infeas, 1e-12),
        PropertyCheck::at_most(SUITE, "cubic_complementarity", comp, 1e-8),
        PropertyCheck::at_most(SUITE, "cubic_multiplier_nonnegative", negative_mu, 0.0),
        PropertyCheck::at_most(SUITE, "cubic_second_order_condition", second, 1e-8),
    ]
}

/// Solved model value minus the best of `samples` uniform points in the ball, `d ≤ 3`.
pub fn cubic_brute_force(models: usize, samples: usize, seed: u64) -> PropertyCheck {
    let gaps: Vec<f64> = (0..models)
        .into_par_iter()
        .map(|k| {
            let mut rng = rng_for(seed, 41 + ((k as u64) << 16));
            let d = 1 + k % 3;
            let m = random_model(d, k, &mut rng);
            let s = match solve_cubic_tr(&m, 1e-12) {
                Ok(s) => s,
                Err(_) => return f64::NAN,
            };
            let mut best = f64::INFINITY;
            for _ in 0..samples {
                let u: Vec<f64> = unit_sphere(&mut rng, d);
                let r = m.radius * rng.random::<f64>().powf(1.0 / d as f64);
                let p: Vec<f64> = u.iter().map(|v| r * v).collect();
                best = best.min(m.value(&p));
            }
            m.value(&s.step) - best
        })
        .collect();
    let worst = gaps.iter().cloned().fold(f64::NEG_INFINITY, |a, b| if b.is_nan() { f64::NAN } else { a.max(b) });
    PropertyCheck::at_most(SUITE, format!("cubic_brute_force_gap_{samples}_samples"), worst, 1e-6)
}

/// The secular norm is non-increasing on its domain.
pub fn secular_monotone(models: usize, seed: u64) -> PropertyCheck {
    let mut rng = rng_for(seed, 42);
    let mut worst = 0.0f64;
    for k in 0..models {
        let m = random_model(1 + k % 6, k, &mut rng);
        let sec = Secular::new(&m.h.eigen(), &m.g);
        let mut prev = f64::INFINITY;
        for i in 0..60 {
            let theta = sec.theta_low() + 10f64.powf(-6.0 + i as f64 * 0.15);
            let v = sec.norm(theta);
            worst = worst.max(v - prev);
            prev = v;
        }
    }
    PropertyCheck::at_most(SUITE, "secular_norm_non_increasing", worst, 0.0)
}

fn diag_instance(diag: &[f64], sigma: f64) -> hvpopt::oracle::ProblemInstance<f64> {
    let d = diag.len();
    let q = Quadratic::new(SymMatrix::from_diag(diag), vec![0.0; d]);
    quadratic_instance(q, NoiseParams::new(0.0, sigma).with_almost_sure_bound())
}

/// Fraction of runs returning no direction on `∇²F = 0.5·I` (`γ = 0.1`, `σ̄₂ = 0.2`).
pub fn oja_psd(runs: usize, d: usize, delta: f64, seed: u64) -> PropertyCheck {
    let inst = diag_instance(&vec![0.5; d], 0.2);
    let hits: usize = (0..runs)
        .into_par_iter()
        .map(|r| {
            let s = derive_seed(seed, 0x0_1A + r as u64);
            let mut o = inst.oracle(oracle_seed(s));
            let reg = RegularityParams { l1: 0.5, ..inst.regularity };
            match oja_search(&mut o, &vec![0.0; d], 0.1, delta, &reg, &mut algorithm_rng(s)) {
                Ok(c) => c.direction.is_none() as usize,
                Err(_) => 0,
            }
        })
        .sum();
    PropertyCheck::at_least(SUITE, format!("oja_psd_none_fraction_d{d}"), hits as f64 / runs as f64, 0.9)
}

/// Fraction of runs certifying a direction with exact Rayleigh quotient ≤ −2γ
/// on `diag(−0.9, 0.1, …, 0.1)` (`γ = 0.1`).
pub fn oja_negative(runs: usize, d: usize, delta: f64, sigma: f64, seed: u64) -> PropertyCheck {
    let mut diag = vec![0.1; d];
    diag[0] = -0.9;
    let inst = diag_instance(&diag, sigma);
    let h = SymMatrix::from_diag(&diag);
    let hits: usize = (0..runs)
        .into_par_iter()
        .map(|r| {
            let s = derive_seed(seed, 0x0_1B + r as u64);
            let mut o = inst.oracle(oracle_seed(s));
            let reg = RegularityParams { l1: 0.9, ..inst.regularity };
            match oja_search(&mut o, &vec![0.0; d], 0.1, delta, &reg, &mut algorithm_rng(s)) {
                Ok(c) => c.direction.is_some_and(|u| (norm(&u) - 1.0).abs() <= 1e-12 && h.quad_form(&u) <= -0.2) as usize,
                Err(_) => 0,
            }
        })
        .sum();
    let limit = if sigma == 0.0 { 1.0 } else { 0.9 };
    PropertyCheck::at_least(
        SUITE,
        format!("oja_negative_certificate_fraction_d{d}_sigma{sigma}"),
        hits as f64 / runs as f64,
        limit,
    )
}

pub fn curvature_direction_examples() -> Vec<PropertyCheck> {
    let a = exact_curvature_direction::<f64>(&SymMatrix::from_diag(&[-1.0, 2.0]), 0.2);
    let a_err = a.map_or(f64::INFINITY, |u| (u[0].abs() - 1.0).abs() + u[1].abs());
    let b = exact_curvature_direction(&SymMatrix::identity(3), 0.3).is_none();
    // λ_min = −4γ exactly with γ = 0.25.
    let c = exact_curvature_direction(&SymMatrix::from_diag(&[-1.0, 1.0]), 0.25).is_some();
    let step = signed_curvature_step(&[1.0, 2.0], &[1.0, 0.0], 0.5, 1.0, 1.0);
    vec![
        PropertyCheck::at_most(SUITE, "curvature_direction_diagonal", a_err, 1e-12),
        PropertyCheck::at_least(SUITE, "curvature_direction_none_on_identity", b as u8 as f64, 1.0),
        PropertyCheck::at_least(SUITE, "curvature_threshold_inclusive", c as u8 as f64, 1.0),
        PropertyCheck::at_most(SUITE, "curvature_step_example", norm(&sub(&step, &[1.5, 2.0])), 0.0),
    ]
}

/// Test objectives with valid `(L₁, L₂)` for the descent-lemma probes.
/// Name, objective, `L₁`, `L₂`.
pub type DescentCase = (String, Box<dyn Objective<f64>>, f64, f64);

pub fn descent_objectives(rng: &mut ChaCha8Rng) -> Vec<DescentCase> {
    let ls = LambdaSum::scaled(gaussian_vector(rng, 5), 1.3, 0.9);
    let (l1, l2) = (ls.gradient_lipschitz(), ls.hessian_lipschitz());
    let mut out: Vec<DescentCase> = vec![("lambda_sum".into(), Box::new(ls), l1, l2)];
    for kind in [ChainKind::EpsChain, ChainKind::GammaChain] {
        let c = chain_constants(kind);
        let (a, b) = (0.8, 0.6);
        let f = ChainFunction::<f64>::scaled(kind, 6, a, b);
        out.push((format!("{kind:?}"), Box::new(f), a * b * b * c.l1, a * b.powi(3) * c.l2));
    }
    let erm = logistic_erm(4, 10, rng);
    let (mut l1, mut l2) = (0.0f64, 0.0f64);
    for c in &erm.components {
        if let hvpopt::objective::Component::Logistic { a, reg, .. } = c {
            let n2 = dot(a, a);
            l1 = l1.max(n2 / 4.0 + reg);
            l2 = l2.max(n2.powf(1.5) / (6.0 * 3f64.sqrt()));
        }
    }
    out.push(("logistic_erm".into(), Box::new(erm), l1, l2));
    out
}

fn probe(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(-3.0..3.0)).collect()
}

/// Violations of `F(x) − F(x − ηg) ≥ (η/8)‖∇F‖² − (3η/4)‖∇F − g‖²` for
/// `η ≤ 1/(2L₁)` and arbitrary `g`, per objective.
pub fn gradient_descent_lemma(probes: usize, seed: u64) -> PropertyCheck {
    let mut rng = rng_for(seed, 43);
    let mut failures = 0usize;
    for (_, f, l1, _) in descent_objectives(&mut rng) {
        let d = f.dim();
        for _ in 0..probes {
            let x = probe(&mut rng, d);
            let grad = f.gradient(&x);
            let noise: Vec<f64> = gaussian_vector(&mut rng, d);
            let scale = 10f64.powf(rng.random_range(-3.0..1.0)) * norm(&grad).max(1.0);
            let g: Vec<f64> = grad.iter().zip(&noise).map(|(a, b)| a + scale * b).collect();
            let eta = rng.random_range(1e-3..=1.0) / (2.0 * l1);
            let y: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - eta * b).collect();
            let fx = f.value(&x);
            let lhs = fx - f.value(&y);
            let rhs = eta / 8.0 * dot(&grad, &grad) - 0.75 * eta * dot(&sub(&grad, &g), &sub(&grad, &g));
            if lhs < rhs - 1e-12 * (1.0 + fx.abs()) {
                failures += 1;
            }
        }
    }
    PropertyCheck::at_most(SUITE, format!("gradient_descent_lemma_failures_{probes}_probes"), failures as f64, 0.0)
}

/// Violations of `F(x) − F(x + s) ≥ (M/12)‖s‖³` for the exact-model cubic step, `M ≥ 4L₂`.
pub fn cubic_descent_lemma(probes: usize, seed: u64) -> PropertyCheck {
    let mut rng = rng_for(seed, 44);
    let mut failures = 0usize;
    for (_, f, _, l2) in descent_objectives(&mut rng) {
        let d = f.dim();
        for _ in 0..probes {
            let x = probe(&mut rng, d);
            let m = model(f.gradient(&x), f.hessian(&x), 4.0 * l2 * rng.random_range(1.0..3.0), 10f64.powf(rng.random_range(-2.0..0.5)));
            let s = match solve_cubic_tr(&m, 1e-12) {
                Ok(s) => s.step,
                Err(_) => {
                    failures += 1;
                    continue;
                }
            };
            let y: Vec<f64> = x.iter().zip(&s).map(|(a, b)| a + b).collect();
            let fx = f.value(&x);
            if fx - f.value(&y) < m.m / 12.0 * norm(&s).powi(3) - 1e-10 * (1.0 + fx.abs()) {
                failures += 1;
            }
        }
    }
    PropertyCheck::at_most(SUITE, format!("cubic_descent_lemma_failures_{probes}_probes"), failures as f64, 0.0)
}

/// Mean of `F(x) − F(x ± (γ/L₂)u)` over both signs against `5γ³/(6L₂²)` when
/// `u` is the exact bottom eigenvector with `⟨u, ∇²F u⟩ ≤ −2γ`.
pub fn curvature_step_descent(probes: usize, seed: u64) -> PropertyCheck {
    let mut rng = rng_for(seed, 45);
    let inst = lambda_sum_instance(4, NoiseParams::zero());
    let f = &inst.objective;
    let l2 = inst.regularity.l2;
    let mut worst = f64::INFINITY;
    let mut done = 0;
    while done < probes {
        let x: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
        let eig = f.hessian(&x).eigen();
        if eig.lambda_min() >= -0.2 {
            continue;
        }
        done += 1;
        let gamma = -eig.lambda_min() / 2.0 * rng.random_range(0.2..1.0);
        let u = &eig.vectors[0];
        let fx = f.value(&x);
        let mean = 0.5
            * ((fx - f.value(&signed_curvature_step(&x, u, gamma, l2, 1.0)))
                + (fx - f.value(&signed_curvature_step(&x, u, gamma, l2, -1.0))));
        worst = worst.min(mean / (5.0 * gamma.powi(3) / (6.0 * l2 * l2)));
    }
    PropertyCheck::at_least(SUITE, "curvature_step_descent_ratio", worst, 1.0 - 1e-9)
}
