//! Counter-based, splittable random streams.
//!
//! A [`SeedStream`] is a 64-bit seed; sub-stream `k` is the ChaCha8 keystream
//! for that seed with stream id `k`. Oracles draw each call's noise from its
//! own sub-stream, so a run is reproducible from `(seed, config)` and the
//! number of sub-streams handed out equals the number of oracle calls.

use crate::linalg::norm;
use crate::scalar::Real;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// SplitMix64 finaliser, used to derive independent seeds.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from a parent seed and a label.
pub fn derive_seed(parent: u64, label: u64) -> u64 {
    mix64(mix64(parent) ^ label.rotate_left(17) ^ 0xA076_1D64_78BD_642F)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeedStream {
    seed: u64,
}

impl SeedStream {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn substream(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }
}

/// Run-level random source for algorithmic coins (Bernoulli resets, branch
/// flips, Rademacher signs, output selection). Kept separate from oracle noise.
pub fn algorithm_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, 0xA1))
}

/// Seed for the oracle noise streams of a run.
pub fn oracle_seed(seed: u64) -> u64 {
    derive_seed(seed, 0x0C)
}

pub fn rademacher<T: Real, R: Rng + ?Sized>(rng: &mut R) -> T {
    if rng.random::<bool>() {
        T::one()
    } else {
        -T::one()
    }
}

pub fn standard_normal<T: Real, R: Rng + ?Sized>(rng: &mut R) -> T {
    T::lit(rng.sample::<f64, _>(StandardNormal))
}

pub fn gaussian_vector<T: Real, R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<T> {
    (0..d).map(|_| standard_normal(rng)).collect()
}

/// Uniform draw from the unit sphere in `d` dimensions.
pub fn unit_sphere<T: Real, R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<T> {
    loop {
        let mut v = gaussian_vector::<T, R>(rng, d);
        let n = norm(&v);
        if n > T::zero() && n.is_finite() {
            for x in &mut v {
                *x /= n;
            }
            return v;
        }
    }
}

pub fn bernoulli<R: Rng + ?Sized>(rng: &mut R, p: f64) -> bool {
    if p >= 1.0 {
        true
    } else if p <= 0.0 {
        false
    } else {
        rng.random::<f64>() < p
    }
}

/// Uniform index in `0..n`.
pub fn uniform_index<R: Rng + ?Sized>(rng: &mut R, n: usize) -> usize {
    rng.random_range(0..n)
}
