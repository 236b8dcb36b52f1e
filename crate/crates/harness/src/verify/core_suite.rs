use super::{errored, rng_for, PropertyCheck};
use hvpopt::hard::{ChainFunction, ChainKind};
use hvpopt::linalg::{dot, norm, norm_sq, sub, SymMatrix};
use hvpopt::multipoint::{estimate_mss_ratio, finite_diff_hvp, verify_mss_equivalence, ErmOracle, RadialSignOracle};
use hvpopt::objective::{Component, FiniteSum, LambdaSum, Objective, Quadratic};
use hvpopt::oracle::{NoiseParams, Oracle, ProblemInstance, RegularityParams};
use hvpopt::rng::{gaussian_vector, unit_sphere};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

const SUITE: &str = "core";

/// Quadratic `½xᵀAx − bᵀx` with a random positive definite `A` (spectrum in `[0.5, 2]`).
pub fn random_quadratic(d: usize, rng: &mut ChaCha8Rng) -> Quadratic<f64> {
    let q = random_orthogonal(d, rng);
    let spec: Vec<f64> = (0..d).map(|_| rng.random_range(0.5..2.0)).collect();
    let a = SymMatrix::from_fn(d, |i, j| (0..d).map(|k| q[k][i] * spec[k] * q[k][j]).sum());
    let b = gaussian_vector(rng, d);
    Quadratic::new(a, b)
}

/// Rows of a random orthogonal matrix (Gram-Schmidt on Gaussian vectors).
pub fn random_orthogonal(d: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(d);
    while rows.len() < d {
        let mut v: Vec<f64> = gaussian_vector(rng, d);
        for r in &rows {
            let c = dot(&v, r);
            v.iter_mut().zip(r).for_each(|(a, b)| *a -= c * b);
        }
        let n = norm(&v);
        if n > 1e-8 {
            rows.push(v.into_iter().map(|a| a / n).collect());
        }
    }
    rows
}

/// Separable `Σ Λ(x_i − c_i)` with centres spread over `[−1, 1]`, regularity
/// from the closed-form bounds and the given noise.
pub fn lambda_sum_instance(d: usize, noise: NoiseParams<f64>) -> ProblemInstance<f64> {
    let centers: Vec<f64> = (0..d).map(|i| if d == 1 { 0.5 } else { -1.0 + 2.0 * i as f64 / (d - 1) as f64 }).collect();
    let f = LambdaSum::new(centers);
    let reg = RegularityParams { delta: f.gap_at_origin(), l1: f.gradient_lipschitz(), l2: f.hessian_lipschitz() };
    ProblemInstance::new(Arc::new(f), reg, noise).expect("valid instance")
}

pub fn quadratic_instance(q: Quadratic<f64>, noise: NoiseParams<f64>) -> ProblemInstance<f64> {
    let eig = q.a.eigenvalues();
    let l1 = eig.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let min = eig[0];
    // F(0) − inf F = ½ bᵀA⁻¹b ≤ ‖b‖²/(2λ_min) for positive definite A.
    let delta = if min > 0.0 { norm_sq(&q.b) / (2.0 * min) } else { 1.0 };
    ProblemInstance::new(Arc::new(q), RegularityParams { delta, l1, l2: 1.0 }, noise).expect("valid instance")
}

pub fn core_suite(seed: u64) -> Vec<PropertyCheck> {
    let mut out = Vec::new();
    out.extend(gradient_channel(seed, 10_000));
    out.extend(hvp_channel(seed, 10_000));
    out.extend(hessian_channel(seed, 1_000));
    out.push(matrix_concentration(10, 100, 1.0, 200, seed));
    out.extend(finite_difference_consistency(seed, 100));
    out.extend(ledger_conservation(seed));
    out.extend(mss_checks(seed));
    out.extend(finite_difference_hvp_checks(seed));
    out
}

/// Mean of `draws` gradient answers within a 3σ band, noise norm exactly `σ₁`.
pub fn gradient_channel(seed: u64, draws: usize) -> Vec<PropertyCheck> {
    let mut rng = rng_for(seed, 1);
    let s1 = 0.5;
    let inst = quadratic_instance(random_quadratic(5, &mut rng), NoiseParams::new(s1, 0.0));
    let x: Vec<f64> = gaussian_vector(&mut rng, 5);
    let exact = inst.objective.gradient(&x);
    let mut o = inst.oracle(seed);
    let mut mean = vec![0.0; 5];
    let mut worst = 0.0f64;
    for _ in 0..draws {
        let g = o.grad(&x).expect("grad");
        let z = sub(&g, &exact);
        worst = worst.max((norm(&z) - s1).abs());
        mean.iter_mut().zip(&g).for_each(|(m, v)| *m += v / draws as f64);
    }
    vec![
        PropertyCheck::at_most(SUITE, "grad_mean_within_3sigma", norm(&sub(&mean, &exact)), 3.0 * s1 / (draws as f64).sqrt()),
        PropertyCheck::at_most(SUITE, "grad_noise_norm_equals_sigma1", worst, 1e-12),
    ]
}

/// HVP answers on `∇²F = I`: mean within 3σ of `v`, every draw within 1 of `v`.
pub fn hvp_channel(seed: u64, draws: usize) -> Vec<PropertyCheck> {
    let mut rng = rng_for(seed, 2);
    let d = 6;
    let inst = quadratic_instance(Quadratic::isotropic(d, 1.0), NoiseParams::new(0.0, 1.0));
    let x: Vec<f64> = gaussian_vector(&mut rng, d);
    let v: Vec<f64> = unit_sphere(&mut rng, d);
    let mut o = inst.oracle(seed);
    let mut mean = vec![0.0; d];
    let mut worst = 0.0f64;
    for _ in 0..draws {
        let h = o.hvp(&x, &v).expect("hvp");
        worst = worst.max(norm(&sub(&h, &v)));
        mean.iter_mut().zip(&h).for_each(|(m, a)| *m += a / draws as f64);
    }
    let zero = o.hvp(&x, &vec![0.0; d]).expect("hvp");
    vec![
        PropertyCheck::at_most(SUITE, "hvp_mean_within_3sigma", norm(&sub(&mean, &v)), 3.0 / (draws as f64).sqrt()),
        PropertyCheck::at_most(SUITE, "hvp_draw_deviation_at_most_sigma2", worst, 1.0 + 1e-12),
        PropertyCheck::at_most(SUITE, "hvp_of_zero_direction_is_zero", norm(&zero), 0.0),
        PropertyCheck::at_most(SUITE, "hvp_zero_direction_counted", (o.ledger().hvp_queries as f64 - draws as f64 - 1.0).abs(), 0.0),
    ]
}

/// Hessian answers are exactly symmetric and their noise has operator norm `σ₂`.
pub fn hessian_channel(seed: u64, draws: usize) -> Vec<PropertyCheck> {
    let mut rng = rng_for(seed, 3);
    let d = 5;
    let s2 = 0.7;
    let inst = quadratic_instance(random_quadratic(d, &mut rng), NoiseParams::new(0.0, s2));
    let x: Vec<f64> = gaussian_vector(&mut rng, d);
    let exact = inst.objective.hessian(&x);
    let mut o = inst.oracle(seed);
    let mut asym = 0.0f64;
    let mut dev = 0.0f64;
    for _ in 0..draws {
        let h = o.hess(&x).expect("hess");
        for i in 0..d {
            for j in 0..d {
                asym = asym.max((h.get(i, j) - h.get(j, i)).abs());
            }
        }
        dev = dev.max((h.sub(&exact).op_norm() - s2).abs());
    }
    vec![
        PropertyCheck::at_most(SUITE, "hessian_exactly_symmetric", asym, 0.0),
        PropertyCheck::at_most(SUITE, "hessian_noise_norm_equals_sigma2", dev, 1e-10),
    ]
}

/// `E‖mean of n Hessian answers − ∇²F‖²_op` against `22σ² ln d / n`.
pub fn matrix_concentration(d: usize, n: usize, sigma: f64, reps: usize, seed: u64) -> PropertyCheck {
    let mut rng = rng_for(seed, 4 ^ ((d as u64) << 8) ^ ((n as u64) << 24));
    let inst = quadratic_instance(random_quadratic(d, &mut rng), NoiseParams::new(0.0, sigma));
    let x: Vec<f64> = gaussian_vector(&mut rng, d);
    let exact = inst.objective.hessian(&x);
    let mut acc = 0.0;
    for r in 0..reps {
        let mut o = inst.oracle(hvpopt::rng::derive_seed(seed, r as u64));
        let mut mean = SymMatrix::zeros(d);
        for _ in 0..n {
            mean.add_scaled(1.0 / n as f64, &o.hess(&x).expect("hess"));
        }
        acc += mean.sub(&exact).op_norm().powi(2);
    }
    let bound = 22.0 * sigma * sigma * (d as f64).ln() / n as f64;
    PropertyCheck::at_most(SUITE, format!("matrix_concentration_d{d}_n{n}_sigma{sigma}"), acc / reps as f64, bound)
}

/// Largest relative central-difference error of gradients and HVPs.
pub fn fd_errors(f: &dyn Objective<f64>, probes: &[Vec<f64>], h: f64) -> (f64, f64) {
    let d = f.dim();
    let (mut eg, mut eh) = (0.0f64, 0.0f64);
    for x in probes {
        let g = f.gradient(x);
        let fd: Vec<f64> = (0..d)
            .map(|i| {
                let mut p = x.clone();
                let mut m = x.clone();
                p[i] += h;
                m[i] -= h;
                (f.value(&p) - f.value(&m)) / (2.0 * h)
            })
            .collect();
        eg = eg.max(norm(&sub(&fd, &g)) / norm(&g).max(1.0));
        let v: Vec<f64> = x.iter().enumerate().map(|(i, _)| ((i * 7 + 3) % 5) as f64 / 4.0 - 0.5).collect();
        let v: Vec<f64> = v.iter().map(|a| a / norm(&v).max(1e-300)).collect();
        let hv = f.hvp(x, &v);
        let p: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a + h * b).collect();
        let m: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a - h * b).collect();
        let fdh: Vec<f64> = f.gradient(&p).iter().zip(f.gradient(&m)).map(|(a, b)| (a - b) / (2.0 * h)).collect();
        eh = eh.max(norm(&sub(&fdh, &hv)) / norm(&hv).max(1.0));
    }
    (eg, eh)
}

/// Every shipped objective against central differences at `h = 10⁻⁴`.
pub fn finite_difference_consistency(seed: u64, probes: usize) -> Vec<PropertyCheck> {
    let mut rng = rng_for(seed, 5);
    let d = 6;
    let erm = logistic_erm(d, 20, &mut rng);
    let objectives: Vec<(&str, Box<dyn Objective<f64>>)> = vec![
        ("quadratic", Box::new(random_quadratic(d, &mut rng))),
        ("lambda_sum", Box::new(LambdaSum::scaled(gaussian_vector(&mut rng, d), 1.5, 0.8))),
        ("logistic_erm", Box::new(erm)),
        ("eps_chain", Box::new(ChainFunction::<f64>::unscaled(ChainKind::EpsChain, d))),
        ("gamma_chain", Box::new(ChainFunction::<f64>::scaled(ChainKind::GammaChain, d, 0.7, 1.3))),
    ];
    let mut out = Vec::new();
    for (name, f) in &objectives {
        let pts: Vec<Vec<f64>> =
            (0..probes).map(|_| (0..d).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
        let (eg, eh) = fd_errors(f.as_ref(), &pts, 1e-4);
        out.push(PropertyCheck::at_most(SUITE, format!("fd_gradient_{name}"), eg, 1e-5));
        out.push(PropertyCheck::at_most(SUITE, format!("fd_hvp_{name}"), eh, 1e-5));
    }
    out
}

/// Logistic ERM with `n` Gaussian samples and ridge `0.1`.
pub fn logistic_erm(d: usize, n: usize, rng: &mut ChaCha8Rng) -> FiniteSum<f64> {
    let comps = (0..n)
        .map(|_| Component::Logistic {
            a: gaussian_vector(rng, d),
            y: if rng.random_bool(0.5) { 1.0 } else { -1.0 },
            reg: 0.1,
        })
        .collect();
    FiniteSum::new(d, comps)
}

/// Ledger total equals the channel sum and the number of sub-streams used.
pub fn ledger_conservation(seed: u64) -> Vec<PropertyCheck> {
    let mut rng = rng_for(seed, 6);
    let d = 4;
    let inst = quadratic_instance(random_quadratic(d, &mut rng), NoiseParams::new(0.3, 0.3));
    let mut o = inst.oracle(seed);
    let calls = 1000;
    for _ in 0..calls {
        let x: Vec<f64> = gaussian_vector(&mut rng, d);
        match rng.random_range(0..5) {
            0 => drop(o.grad(&x)),
            1 => drop(o.hvp(&x, &x)),
            2 => drop(o.hess(&x)),
            3 => drop(o.value(&x)),
            _ => drop(o.answer(&x, rng.random_bool(0.5))),
        }
    }
    let l = o.ledger();
    let sum = l.grad_queries + l.hvp_queries + l.hess_queries + l.value_queries;
    let mut erm = ErmOracle::new(Arc::new(logistic_erm(d, 5, &mut rng)), seed);
    for _ in 0..200 {
        let x: Vec<f64> = gaussian_vector(&mut rng, d);
        let _ = erm.grad(&x);
        let _ = erm.hvp(&x, &x);
    }
    vec![
        PropertyCheck::at_most(SUITE, "ledger_total_is_channel_sum", (l.total() as f64 - sum as f64).abs(), 0.0),
        PropertyCheck::at_most(SUITE, "ledger_total_is_call_count", (l.total() as f64 - calls as f64).abs(), 0.0),
        PropertyCheck::at_most(
            SUITE,
            "ledger_total_is_substreams_used",
            (l.total() as f64 - o.substreams_consumed() as f64).abs(),
            0.0,
        ),
        PropertyCheck::at_most(
            SUITE,
            "erm_ledger_total_is_substreams_used",
            (erm.ledger().total() as f64 - erm.substreams_consumed() as f64).abs(),
            0.0,
        ),
    ]
}

/// Finite sum of `(1 ± s)/2 ‖x‖²` components: Hessian spread exactly `s`.
pub fn spread_quadratics(d: usize, s: f64) -> FiniteSum<f64> {
    let comp = |c: f64| {
        let mut a = SymMatrix::identity(d);
        a.scale(c);
        Component::Quadratic { a, b: vec![0.0; d] }
    };
    FiniteSum::new(d, vec![comp(1.0 + s), comp(1.0 - s)])
}

pub fn mss_checks(seed: u64) -> Vec<PropertyCheck> {
    let mut rng = rng_for(seed, 7);
    let d = 3;
    let mut out = Vec::new();
    let mut o = ErmOracle::new(Arc::new(spread_quadratics(d, 0.5)), seed);
    match verify_mss_equivalence(&mut o, 12, 400, 0.1, &mut rng) {
        Ok(r) => out.push(PropertyCheck::at_most(SUITE, "mss_ratio_spread_quadratics", r.sup_ratio, 0.25 * 1.1)),
        Err(e) => out.push(errored(SUITE, "mss_ratio_spread_quadratics", e)),
    }
    let mut o = ErmOracle::new(Arc::new(spread_quadratics(d, 0.0)), seed);
    match verify_mss_equivalence(&mut o, 12, 50, 0.1, &mut rng) {
        Ok(r) => out.push(PropertyCheck::at_most(SUITE, "mss_ratio_zero_noise", r.sup_ratio, 0.0)),
        Err(e) => out.push(errored(SUITE, "mss_ratio_zero_noise", e)),
    }
    let mut o = RadialSignOracle::new(Arc::new(Quadratic::isotropic(d, 1.0)), seed);
    let rejected = verify_mss_equivalence(&mut o, 12, 50, 0.1, &mut rng).is_err();
    out.push(PropertyCheck::at_least(SUITE, "mss_rejects_non_jacobian_oracle", rejected as u8 as f64, 1.0));
    match estimate_mss_ratio(&mut o, 12, 200, 0.1, &mut rng) {
        // Quotient grows like 4/‖x − y‖² across straddled origins; flagged non-smooth.
        Ok(r) => out.push(PropertyCheck::at_least(SUITE, "radial_sign_flagged_non_mss", (!r.is_mss) as u8 as f64, 1.0)),
        Err(e) => out.push(errored(SUITE, "radial_sign_flagged_non_mss", e)),
    }
    out
}

pub fn finite_difference_hvp_checks(seed: u64) -> Vec<PropertyCheck> {
    let mut rng = rng_for(seed, 8);
    let d = 4;
    let q = random_quadratic(d, &mut rng);
    let a = q.a.clone();
    let sum = FiniteSum::new(d, vec![Component::Quadratic { a: q.a.clone(), b: q.b.clone() }]);
    let mut o = ErmOracle::new(Arc::new(sum), seed);
    let x: Vec<f64> = gaussian_vector(&mut rng, d);
    let u: Vec<f64> = unit_sphere(&mut rng, d);
    let mut out = Vec::new();
    match finite_diff_hvp(&mut o, &x, &u, 0.37) {
        Ok(h) => out.push(PropertyCheck::at_most(SUITE, "fd_hvp_exact_on_quadratic", norm(&sub(&h, &a.mul_vec(&u))), 1e-10)),
        Err(e) => out.push(errored(SUITE, "fd_hvp_exact_on_quadratic", e)),
    }
    out
}
