use super::{errored, rng_for, PropertyCheck};
use hvpopt::hard::{
    build_eps_hard_instance, build_gamma_hard_instance, chain_constants, lambda_fn, phi, prog, psi, zero_respecting_run,
    ChainDerivative, ChainFunction, ChainKind, ZeroChainOracle,
};
use hvpopt::hard::zero_chain::support;
use hvpopt::linalg::{norm, sub};
use hvpopt::objective::Objective;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const SUITE: &str = "hard_instances";
const E: f64 = std::f64::consts::E;

/// Name, function, lower bound, upper bound.
type Bounded = (&'static str, fn(f64) -> f64, f64, f64);

pub fn hard_suite(seed: u64) -> Vec<PropertyCheck> {
    let mut out = component_examples();
    out.extend(component_bounds());
    out.extend(chain_origin_examples());
    out.extend(prog_examples());
    out.extend(tridiagonality(1_000, seed));
    out.push(large_gradient(1_000, seed));
    out.extend(curvature_chain_eigenvalues(1_000, seed));
    out.extend(zero_chain_soundness(300, seed));
    out.extend(zero_chain_moments(10_000, seed));
    out.push(noiseless_gradient(10_000, seed));
    out.extend(eps_instance_audit(1_000, seed));
    out.extend(gamma_instance_audit(1_000, seed));
    out.extend(runner_checks(seed));
    out
}

fn close(name: &str, got: f64, want: f64, tol: f64) -> PropertyCheck {
    PropertyCheck::at_most(SUITE, name, (got - want).abs(), tol)
}

pub fn component_examples() -> Vec<PropertyCheck> {
    let se = E.sqrt();
    vec![
        close("psi_half", psi(0.5, 0), 0.0, 0.0),
        close("psi_one", psi(1.0, 0), 1.0, 1e-15),
        close("psi_three_quarters", psi(0.75, 0), (-3f64).exp(), 1e-15),
        close("phi_prime_zero", phi(0.0, 1), se, 1e-15),
        close("phi_zero", phi(0.0, 0), se * (2.0 * std::f64::consts::PI).sqrt() / 2.0, 1e-14),
        close("phi_second_zero", phi(0.0, 2), 0.0, 0.0),
        close("lambda_zero", lambda_fn(0.0, 0), 0.0, 0.0),
        close("lambda_second_zero", lambda_fn(0.0, 2), -8.0, 1e-15),
        close("lambda_far", lambda_fn(50.0, 0), -8.0, 1e-12),
    ]
}

/// Largest violation of the stated component bounds on a fine grid.
pub fn component_bounds() -> Vec<PropertyCheck> {
    let bounds: [Bounded; 6] = [
        ("psi", |x| psi(x, 0), 0.0, E),
        ("psi_prime", |x| psi(x, 1), 0.0, (54.0 / E).sqrt()),
        ("psi_second", |x| psi(x, 2), -40.0, 40.0),
        ("lambda", |x| lambda_fn(x, 0), -8.0, 0.0),
        ("lambda_prime", |x| lambda_fn(x, 1), -6.0, 6.0),
        ("lambda_second", |x| lambda_fn(x, 2), -8.0, 4.0),
    ];
    bounds
        .iter()
        .map(|&(name, f, lo, hi)| {
            let mut worst = f64::NEG_INFINITY;
            for i in 0..=200_000 {
                let x = -10.0 + i as f64 * 1e-4;
                let v = f(x);
                worst = worst.max(lo - v).max(v - hi);
            }
            PropertyCheck::at_most(SUITE, format!("{name}_bounds"), worst, 0.0)
        })
        .collect()
}

pub fn chain_origin_examples() -> Vec<PropertyCheck> {
    let t = 5;
    let fe = ChainFunction::<f64>::unscaled(ChainKind::EpsChain, t).eval(&vec![0.0; t]);
    let mut want = vec![0.0; t];
    want[0] = -E.sqrt();
    let fg = ChainFunction::<f64>::unscaled(ChainKind::GammaChain, t).eval(&vec![0.0; t]);
    vec![
        close("eps_chain_origin_value", fe.value, -phi(0.0, 0), 1e-14),
        PropertyCheck::at_most(SUITE, "eps_chain_origin_gradient", norm(&sub(&fe.gradient, &want)), 1e-15),
        close("gamma_chain_origin_value", fg.value, 0.0, 0.0),
        close("gamma_chain_origin_corner", fg.hessian.diag[0], -8.0, 1e-14),
        PropertyCheck::at_most(SUITE, "gamma_chain_origin_lambda_min", fg.hessian.lambda_min(), -8.0 + 1e-12),
    ]
}

pub fn prog_examples() -> Vec<PropertyCheck> {
    vec![
        close("prog_example_half", prog(&[0.3, 0.6, 0.0, 0.0], 0.5) as f64, 2.0, 0.0),
        close("prog_example_origin", prog(&[0.0; 4], 0.9) as f64, 0.0, 0.0),
        close("prog_example_zero_threshold", prog(&[1.0, 0.0, 2.0, 0.0], 0.0) as f64, 3.0, 0.0),
    ]
}

/// Probe mixing uniform coordinates in `[−2, 2]` with a large prefix
/// followed by coordinates below `tail`, so every progress level is hit.
pub fn chain_probe(rng: &mut ChaCha8Rng, t: usize, tail: f64) -> Vec<f64> {
    if rng.random_bool(0.5) {
        return (0..t).map(|_| rng.random_range(-2.0..2.0)).collect();
    }
    let k = rng.random_range(0..=t);
    (0..t)
        .map(|i| {
            let s = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            if i < k {
                s * rng.random_range(tail.max(1.0) + 1e-9..2.0)
            } else {
                s * rng.random_range(0.0..=tail)
            }
        })
        .collect()
}

/// Central differences of the gradient vanish bit-for-bit off the band.
pub fn tridiagonality(probes: usize, seed: u64) -> Vec<PropertyCheck> {
    let mut rng = rng_for(seed, 60);
    let t = 8;
    [ChainKind::EpsChain, ChainKind::GammaChain]
        .iter()
        .map(|&kind| {
            let f = ChainFunction::<f64>::scaled(kind, t, 1.3, 0.7);
            let mut worst = 0.0f64;
            for _ in 0..probes {
                let x = chain_probe(&mut rng, t, 1.0);
                for j in 0..t {
                    let mut p = x.clone();
                    p[j] += 1e-3;
                    let d = sub(&f.gradient(&p), &f.gradient(&x));
                    for (i, v) in d.iter().enumerate() {
                        if i.abs_diff(j) > 1 {
                            worst = worst.max(v.abs());
                        }
                    }
                }
            }
            PropertyCheck::at_most(SUITE, format!("{kind:?}_off_band_hessian_zero"), worst, 0.0)
        })
        .collect()
}

/// `min |∂_{p+1} F(x)|` over probes with `p = prog₁(x) < T`; must exceed 1.
pub fn large_gradient(probes: usize, seed: u64) -> PropertyCheck {
    let mut rng = rng_for(seed, 61);
    let t = 8;
    let f = ChainFunction::<f64>::unscaled(ChainKind::EpsChain, t);
    let mut worst = f64::INFINITY;
    let mut n = 0;
    while n < probes {
        let x = chain_probe(&mut rng, t, 1.0);
        let p = prog(&x, 1.0);
        if p >= t {
            continue;
        }
        n += 1;
        worst = worst.min(f.gradient(&x)[p].abs());
    }
    PropertyCheck::at_least(SUITE, "large_gradient_min", worst, 1.0)
}

/// `λ_min(∇²G_T) ≤ −0.5` below progress `T − 1` at threshold 9/10, and `≤ 700` anywhere.
pub fn curvature_chain_eigenvalues(probes: usize, seed: u64) -> Vec<PropertyCheck> {
    let mut rng = rng_for(seed, 62);
    let t = 8;
    let f = ChainFunction::<f64>::unscaled(ChainKind::GammaChain, t);
    let (mut worst, mut ceiling) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut n = 0;
    while n < probes {
        let x = chain_probe(&mut rng, t, 0.9);
        let l = f.eval(&x).hessian.lambda_min();
        ceiling = ceiling.max(l);
        if prog(&x, 0.9) + 1 < t {
            n += 1;
            worst = worst.max(l);
        }
    }
    vec![
        PropertyCheck::at_most(SUITE, "gamma_chain_negative_curvature_max", worst, -0.5),
        PropertyCheck::at_most(SUITE, "gamma_chain_lambda_min_ceiling", ceiling, 700.0),
    ]
}

/// Largest excess of the answer support over `prog(βx) + 1`, which must be 0.
pub fn zero_chain_soundness(probes: usize, seed: u64) -> Vec<PropertyCheck> {
    let mut rng = rng_for(seed, 63);
    let t = 10;
    let mut out = Vec::new();
    for kind in [ChainKind::EpsChain, ChainKind::GammaChain] {
        let beta = 0.5;
        let chain = ChainFunction::<f64>::scaled(kind, t, 2.0, beta);
        let mut o = match ZeroChainOracle::new(chain, 0.3, seed) {
            Ok(o) => o,
            Err(e) => return vec![errored(SUITE, "zero_chain_soundness", e)],
        };
        let mut excess = 0i64;
        for _ in 0..probes {
            let y = chain_probe(&mut rng, t, 0.25);
            let x: Vec<f64> = y.iter().map(|v| v / beta).collect();
            let p = o.progress(&x) as i64;
            for _ in 0..5 {
                let a = match o.query_all(&x) {
                    Ok(a) => a,
                    Err(e) => return vec![errored(SUITE, "zero_chain_soundness", e)],
                };
                excess = excess.max(support(&a.gradient) as i64 - p - 1);
                excess = excess.max(a.hessian.support() as i64 - p - 1);
            }
        }
        out.push(PropertyCheck::at_most(SUITE, format!("{kind:?}_support_excess"), excess as f64, 0.0));
    }
    out
}

/// Mean and variance of the revealed gradient slice over `draws` queries.
pub fn zero_chain_moments(draws: usize, seed: u64) -> Vec<PropertyCheck> {
    let t = 5;
    let rho = 0.3;
    let chain = ChainFunction::<f64>::unscaled(ChainKind::EpsChain, t);
    // prog_{1/4} = 2, so coordinate 3 is the revealed slice.
    let x = [1.0, -0.8, 0.1, 0.0, 0.0];
    let mut o = match ZeroChainOracle::new(chain, rho, seed) {
        Ok(o) => o,
        Err(e) => return vec![errored(SUITE, "zero_chain_moments", e)],
    };
    let exact = chain.eval(&x);
    let g3 = exact.gradient[2];
    let (mut sum, mut sq, mut hsum) = (0.0, 0.0, 0.0);
    let mut lower_exact = true;
    for _ in 0..draws {
        if let Ok(ChainDerivative::Gradient(g)) = o.query(&x, 1) {
            sum += g[2];
            sq += (g[2] - g3).powi(2);
            lower_exact &= g[0] == exact.gradient[0] && g[1] == exact.gradient[1];
        }
        if let Ok(ChainDerivative::Hessian(h)) = o.query(&x, 2) {
            hsum += h.get(2, 2);
        }
    }
    let n = draws as f64;
    let sd = g3.abs() * ((1.0 - rho) / rho).sqrt();
    let hsd = exact.hessian.diag[2].abs() * ((1.0 - rho) / rho).sqrt();
    let var = sq / n;
    let want_var = g3 * g3 * (1.0 - rho) / rho;
    vec![
        PropertyCheck::at_most(SUITE, "zero_chain_gradient_mean_band", (sum / n - g3).abs(), 4.0 * sd / n.sqrt()),
        PropertyCheck::at_most(SUITE, "zero_chain_hessian_mean_band", (hsum / n - exact.hessian.diag[2]).abs(), 4.0 * hsd / n.sqrt()),
        PropertyCheck::at_most(SUITE, "zero_chain_variance_relative_error", (var - want_var).abs() / want_var, 0.1),
        PropertyCheck::at_least(SUITE, "zero_chain_known_slices_exact", lower_exact as u8 as f64, 1.0),
    ]
}

/// Gradient answers of the curvature construction are bit-identical.
pub fn noiseless_gradient(queries: usize, seed: u64) -> PropertyCheck {
    let mut rng = rng_for(seed, 64);
    let t = 6;
    let chain = ChainFunction::<f64>::unscaled(ChainKind::GammaChain, t);
    let mut o = ZeroChainOracle::new(chain, 0.2, seed).expect("valid rho");
    let mut identical = true;
    for _ in 0..10 {
        let x = chain_probe(&mut rng, t, 1.0);
        let first = o.query(&x, 1).ok().and_then(|d| if let ChainDerivative::Gradient(g) = d { Some(g) } else { None });
        for _ in 0..queries / 10 {
            let again = o.query(&x, 1).ok().and_then(|d| if let ChainDerivative::Gradient(g) = d { Some(g) } else { None });
            identical &= first.is_some() && again.as_ref().map(|g| g.iter().map(|v| v.to_bits()).collect::<Vec<_>>())
                == first.as_ref().map(|g| g.iter().map(|v| v.to_bits()).collect());
        }
    }
    PropertyCheck::at_least(SUITE, "gamma_chain_gradient_noiseless", identical as u8 as f64, 1.0)
}

/// Sampled gradient and Hessian Lipschitz quotients over nearby pairs.
fn lipschitz_quotients(f: &ChainFunction<f64>, rng: &mut ChaCha8Rng, pairs: usize) -> (f64, f64) {
    let t = f.t;
    let (mut q1, mut q2) = (0.0f64, 0.0f64);
    for _ in 0..pairs {
        let y = chain_probe(rng, t, 1.0);
        let x: Vec<f64> = y.iter().map(|v| v / f.beta).collect();
        let h = 10f64.powf(rng.random_range(-4.0..0.0)) / f.beta;
        let dir: Vec<f64> = (0..t).map(|_| rng.random_range(-1.0..1.0)).collect();
        let dn = norm(&dir);
        let xp: Vec<f64> = x.iter().zip(&dir).map(|(a, b)| a + h * b / dn).collect();
        let (ea, eb) = (f.eval(&x), f.eval(&xp));
        q1 = q1.max(norm(&sub(&ea.gradient, &eb.gradient)) / h);
        let mut dh = ea.hessian.clone();
        dh.diag.iter_mut().zip(&eb.hessian.diag).for_each(|(a, b)| *a -= b);
        dh.off.iter_mut().zip(&eb.hessian.off).for_each(|(a, b)| *a -= b);
        q2 = q2.max(dh.to_dense().op_norm() / h);
    }
    (q1, q2)
}

/// Targets used by the scaled-instance audits.
pub const EPS_TARGETS: (f64, f64, f64, f64, f64, f64) = (0.1, 1.0, 1.0, 1.0, 1.0, 500.0);

pub fn eps_instance_audit(probes: usize, seed: u64) -> Vec<PropertyCheck> {
    let (eps, l1, l2, s1, s2, delta) = EPS_TARGETS;
    let inst = match build_eps_hard_instance::<f64>(eps, l1, l2, s1, s2, delta) {
        Ok(i) => i,
        Err(e) => return vec![errored(SUITE, "eps_instance", e)],
    };
    let f = inst.chain;
    let mut rng = rng_for(seed, 65);
    let mut min_grad = f64::INFINITY;
    let mut n = 0;
    while n < probes {
        let y = chain_probe(&mut rng, f.t, 1.0);
        if prog(&y, 1.0) >= f.t {
            continue;
        }
        n += 1;
        let x: Vec<f64> = y.iter().map(|v| v / f.beta).collect();
        min_grad = min_grad.min(norm(&f.gradient(&x)));
    }
    let (q1, q2) = lipschitz_quotients(&f, &mut rng, probes);
    let c = chain_constants(ChainKind::EpsChain);
    let boundary = build_eps_hard_instance::<f64>(eps, l1, l2, 2.0 * eps * c.l0, s2, delta).map_or(0.0, |i| i.rho);
    vec![
        PropertyCheck::at_least(SUITE, "eps_instance_recipe_satisfied", inst.recipe.all_satisfied() as u8 as f64, 1.0),
        PropertyCheck::at_least(SUITE, "eps_instance_gradient_floor", min_grad, eps),
        PropertyCheck::at_most(SUITE, "eps_instance_gradient_lipschitz", q1, l1 * (1.0 + 1e-3)),
        PropertyCheck::at_most(SUITE, "eps_instance_hessian_lipschitz", q2, l2 * (1.0 + 1e-3)),
        close("eps_instance_rho_boundary", boundary, 1.0, 0.0),
    ]
}

/// `(γ, L₂, σ₂, Δ)`; the curvature chain needs a large gap to reach `T ≥ 3`.
pub const GAMMA_TARGETS: (f64, f64, f64, f64) = (0.1, 1.0, 1.0, 4e8);

pub fn gamma_instance_audit(probes: usize, seed: u64) -> Vec<PropertyCheck> {
    let (gamma, l2, s2, delta) = GAMMA_TARGETS;
    let inst = match build_gamma_hard_instance::<f64>(gamma, l2, s2, delta) {
        Ok(i) => i,
        Err(e) => return vec![errored(SUITE, "gamma_instance", e)],
    };
    let f = inst.chain;
    let mut rng = rng_for(seed, 66);
    let mut worst = f64::NEG_INFINITY;
    let mut n = 0;
    while n < probes {
        let y = chain_probe(&mut rng, f.t, 0.9);
        if prog(&y, 0.9) + 1 >= f.t {
            continue;
        }
        n += 1;
        let x: Vec<f64> = y.iter().map(|v| v / f.beta).collect();
        worst = worst.max(f.eval(&x).hessian.lambda_min());
    }
    let (_, q2) = lipschitz_quotients(&f, &mut rng, probes);
    vec![
        PropertyCheck::at_least(SUITE, "gamma_instance_recipe_satisfied", inst.recipe.all_satisfied() as u8 as f64, 1.0),
        PropertyCheck::at_most(SUITE, "gamma_instance_negative_curvature", worst, -gamma),
        PropertyCheck::at_most(SUITE, "gamma_instance_hessian_lipschitz", q2, l2 * (1.0 + 1e-3)),
    ]
}

/// Deterministic revelation and the geometric discovery law.
pub fn runner_checks(seed: u64) -> Vec<PropertyCheck> {
    let t = 10;
    let chain = ChainFunction::<f64>::unscaled(ChainKind::EpsChain, t);
    let mut o = ZeroChainOracle::new(chain, 1.0, seed).expect("valid rho");
    let done = zero_respecting_run(&mut o, 100).ok().and_then(|r| r.completed_at).map_or(f64::NAN, |c| c as f64);
    let rho = 0.1;
    let t2 = 20;
    let gaps: Vec<f64> = (0..200u64)
        .into_par_iter()
        .flat_map_iter(|r| {
            let c = ChainFunction::<f64>::unscaled(ChainKind::EpsChain, t2);
            let mut o = ZeroChainOracle::new(c, rho, hvpopt::rng::derive_seed(seed, r)).expect("valid rho");
            let tr = zero_respecting_run(&mut o, 100_000).expect("run");
            tr.points.windows(2).map(|w| (w[1].0 - w[0].0) as f64).collect::<Vec<_>>()
        })
        .collect();
    let mean = gaps.iter().sum::<f64>() / gaps.len().max(1) as f64;
    vec![
        close("runner_rho_one_completes_at_t", done, t as f64, 0.0),
        PropertyCheck::at_most(SUITE, "runner_mean_discovery_time_relative_error", (mean * rho - 1.0).abs(), 0.05),
    ]
}
