//! Stochastic negative-curvature search by Oja-style power iteration with
//! fresh Hessian-vector products, followed by a Rayleigh-quotient check.

use crate::error::{Error, Result};
use crate::linalg::{dot, norm};
use crate::oracle::{Oracle, RegularityParams};
use crate::rng::gaussian_vector;
use crate::scalar::Real;
use rand::Rng;

/// Result of a curvature search. `direction` is `None` when no sufficiently
/// negative direction was certified.
#[derive(Clone, Debug)]
pub struct CurvatureCertificate<T> {
    pub direction: Option<Vec<T>>,
    /// Mean of the verification-phase stochastic Rayleigh quotients.
    pub rayleigh_estimate: T,
    pub queries_used: u64,
}

/// Iteration plan of [`oja_search`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OjaPlan<T> {
    pub step: T,
    pub iterations: u64,
    pub verify_samples: u64,
}

/// Plan for search at curvature level `gamma` (the caller's γ; the search runs
/// at precision `2γ`). With `ℓ = max(1, ln(d/δ))` and `γ' = 2γ`:
/// step `η = min{1/(2(L₁+σ̄₂)), γ'/(4σ̄₂²ℓ)}`, iterations `⌈4ℓ/(ηγ')⌉`, so the
/// bottom direction is amplified by `(d/δ)⁴` over any direction with
/// curvature above `−γ'` while the accumulated noise `η²σ̄₂²N` stays ≤ 1.
/// Verification averages `⌈9σ̄₂² ln(2/δ)/γ²⌉` (at least one) quotients.
pub fn oja_plan<T: Real>(dim: usize, gamma: T, delta_fail: T, l1: T, sigma_as: T) -> OjaPlan<T> {
    let g2 = T::lit(2.0) * gamma;
    let ell = (T::count(dim) / delta_fail).ln().max(T::one());
    let det = T::one() / (T::lit(2.0) * (l1 + sigma_as));
    let step = if sigma_as > T::zero() {
        det.min(g2 / (T::lit(4.0) * sigma_as * sigma_as * ell))
    } else {
        det
    };
    let iterations = (T::lit(4.0) * ell / (step * g2)).ceil().to_u64().unwrap_or(u64::MAX).max(1);
    let verify = (T::lit(9.0) * sigma_as * sigma_as * (T::lit(2.0) / delta_fail).ln() / (gamma * gamma))
        .ceil()
        .to_u64()
        .unwrap_or(u64::MAX)
        .max(1);
    OjaPlan { step, iterations, verify_samples: verify }
}

/// With probability at least `1 − delta_fail`: `None` means
/// `∇²F(x) ⪰ −4γI`, and a returned unit `u` has `⟨u, ∇²F(x)u⟩ ≤ −2γ`.
/// A direction is accepted only if its verified quotient is `≤ −3γ`.
pub fn oja_search<T: Real, O: Oracle<T>, R: Rng + ?Sized>(
    oracle: &mut O,
    x: &[T],
    gamma: T,
    delta_fail: T,
    regularity: &RegularityParams<T>,
    rng: &mut R,
) -> Result<CurvatureCertificate<T>> {
    let sigma_as = oracle
        .hessian_noise_bound()
        .ok_or_else(|| Error::Contract("curvature search needs an almost-sure Hessian noise bound".into()))?;
    if !(gamma > T::zero()) {
        return Err(Error::InvalidInput("gamma must be positive".into()));
    }
    if !(delta_fail > T::zero() && delta_fail < T::one()) {
        return Err(Error::InvalidInput("failure probability must lie in (0, 1)".into()));
    }
    if !regularity.l1.is_finite() {
        return Err(Error::Contract("curvature search needs a finite gradient Lipschitz constant".into()));
    }
    let plan = oja_plan(oracle.dim(), gamma, delta_fail, regularity.l1, sigma_as);
    let start = oracle.ledger().total();

    let mut w: Vec<T> = gaussian_vector(rng, oracle.dim());
    normalise(&mut w);
    for _ in 0..plan.iterations {
        let hw = oracle.hvp(x, &w)?;
        for (wi, &hi) in w.iter_mut().zip(&hw) {
            *wi -= plan.step * hi;
        }
        normalise(&mut w);
    }

    let mut acc = T::zero();
    for _ in 0..plan.verify_samples {
        acc += dot(&w, &oracle.hvp(x, &w)?);
    }
    let rayleigh = acc / T::lit(plan.verify_samples as f64);
    let accepted = rayleigh <= -T::lit(3.0) * gamma;
    Ok(CurvatureCertificate {
        direction: accepted.then_some(w),
        rayleigh_estimate: rayleigh,
        queries_used: oracle.ledger().total() - start,
    })
}

fn normalise<T: Real>(w: &mut [T]) {
    let n = norm(w);
    if n > T::zero() {
        w.iter_mut().for_each(|v| *v /= n);
    }
}
