//! Scalar building blocks of the chain functions: the smooth switch `psi`,
//! the Gaussian-integral ramp `phi` and the bump `lambda_fn`.
//! Each returns `[f, f', f'']`.

use crate::scalar::Real;

/// Switch: `exp(1 - 1/(2x-1)^2)` for `x > 1/2`, zero otherwise.
pub fn psi3<T: Real>(x: T) -> [T; 3] {
    let half = T::lit(0.5);
    if x <= half {
        return [T::zero(); 3];
    }
    let w = T::lit(2.0) * x - T::one();
    let w2 = w * w;
    let v = (T::one() - T::one() / w2).exp();
    if v == T::zero() {
        return [T::zero(); 3];
    }
    let w3 = w2 * w;
    let d1 = T::lit(4.0) * v / w3;
    let d2 = v * (T::lit(16.0) - T::lit(24.0) * w2) / (w3 * w3);
    [v, d1, d2]
}

/// `sqrt(e) * integral_{-inf}^{x} exp(-t^2/2) dt`.
pub fn phi3<T: Real>(x: T) -> [T; 3] {
    let xf = x.f64();
    let sqrt_e = std::f64::consts::E.sqrt();
    let v = sqrt_e * (std::f64::consts::PI / 2.0).sqrt() * libm::erfc(-xf / std::f64::consts::SQRT_2);
    let d1 = T::lit(sqrt_e) * (-x * x / T::lit(2.0)).exp();
    [T::lit(v), d1, -x * d1]
}

/// Bump `8(exp(-x^2/2) - 1)`.
pub fn lambda3<T: Real>(x: T) -> [T; 3] {
    let g = (-x * x / T::lit(2.0)).exp();
    let eight = T::lit(8.0);
    [eight * (g - T::one()), -eight * x * g, eight * (x * x - T::one()) * g]
}

fn pick<T: Real>(v: [T; 3], order: u8) -> T {
    assert!(order <= 2, "derivative order {order} not supported");
    v[order as usize]
}

/// `psi` or one of its first two derivatives. Panics for `order > 2`.
pub fn psi<T: Real>(x: T, order: u8) -> T {
    pick(psi3(x), order)
}

pub fn phi<T: Real>(x: T, order: u8) -> T {
    pick(phi3(x), order)
}

pub fn lambda_fn<T: Real>(x: T, order: u8) -> T {
    pick(lambda3(x), order)
}

/// Third derivative of `lambda_fn`: `8(3x - x^3) exp(-x^2/2)`.
pub fn lambda_third<T: Real>(x: T) -> T {
    T::lit(8.0) * (T::lit(3.0) * x - x * x * x) * (-x * x / T::lit(2.0)).exp()
}

/// `sup |lambda'''|`, attained at `x^2 = 3 - sqrt(6)`.
pub fn lambda_third_sup() -> f64 {
    let x = (3.0 - 6f64.sqrt()).sqrt();
    lambda_third(x).abs()
}
