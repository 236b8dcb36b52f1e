//! Probability-ρ zero-chain oracles for the chain functions.
//!
//! Each query draws one `z ~ Bernoulli(ρ)`. Every derivative slice with index
//! beyond the progress threshold is multiplied by `z/ρ`, so the next
//! coordinate of the chain shows up with probability exactly `ρ` and the
//! estimator stays unbiased.

use super::chain::{prog, ChainFunction, ChainKind};
use crate::error::{Error, Result};
use crate::linalg::{SymMatrix, Tridiagonal};
use crate::oracle::{check_point, QueryLedger};
use crate::rng::{bernoulli, SeedStream};
use crate::scalar::Real;

/// Row-scaled tridiagonal matrix.
///
/// Row `i` of the exact Hessian is multiplied by its own factor, which makes
/// the estimate non-symmetric in general; `rows[i] = [H_{i,i-1}, H_ii, H_{i,i+1}]`.
#[derive(Clone, Debug, PartialEq)]
pub struct RowScaledTridiagonal<T> {
    pub rows: Vec<[T; 3]>,
}

impl<T: Real> RowScaledTridiagonal<T> {
    fn from_exact(h: &Tridiagonal<T>, factors: &[T]) -> Self {
        let n = h.dim();
        let rows = (0..n)
            .map(|i| {
                let lo = if i > 0 { h.off[i - 1] } else { T::zero() };
                let hi = if i + 1 < n { h.off[i] } else { T::zero() };
                let f = factors[i];
                [f * lo, f * h.diag[i], f * hi]
            })
            .collect();
        Self { rows }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// Entry `(i, j)`, zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> T {
        match j as isize - i as isize {
            -1 => self.rows[i][0],
            0 => self.rows[i][1],
            1 => self.rows[i][2],
            _ => T::zero(),
        }
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let r = self.rows[i];
                let mut s = r[1] * v[i];
                if i > 0 {
                    s += r[0] * v[i - 1];
                }
                if i + 1 < n {
                    s += r[2] * v[i + 1];
                }
                s
            })
            .collect()
    }

    /// Symmetric part `(H + Hᵀ)/2` as a dense matrix.
    pub fn symmetrized(&self) -> SymMatrix<T> {
        let half = T::lit(0.5);
        SymMatrix::from_fn(self.dim(), |i, j| half * (self.get(i, j) + self.get(j, i)))
    }

    /// 1-based index of the last row with a nonzero entry, or 0.
    pub fn support(&self) -> usize {
        self.rows.iter().rposition(|r| r.iter().any(|v| *v != T::zero())).map_or(0, |i| i + 1)
    }
}

/// Full answer of one query: value, gradient and Hessian under one draw.
#[derive(Clone, Debug)]
pub struct ChainAnswer<T> {
    pub value: T,
    pub gradient: Vec<T>,
    pub hessian: RowScaledTridiagonal<T>,
    /// The Bernoulli draw of this query.
    pub revealed: bool,
}

/// Derivative estimate of order `q`.
#[derive(Clone, Debug)]
pub enum ChainDerivative<T> {
    Gradient(Vec<T>),
    Hessian(RowScaledTridiagonal<T>),
}

/// 1-based index of the last nonzero entry of `v`, or 0.
pub fn support<T: Real>(v: &[T]) -> usize {
    v.iter().rposition(|x| *x != T::zero()).map_or(0, |i| i + 1)
}

#[derive(Clone, Debug)]
pub struct ZeroChainOracle<T: Real> {
    pub chain: ChainFunction<T>,
    pub rho: T,
    /// Gradient answers are exact (the curvature construction).
    pub noiseless_gradient: bool,
    /// Progress threshold on `βx` selecting which slices are scaled.
    pub threshold: T,
    streams: SeedStream,
    queries: u64,
    ledger: QueryLedger,
}

impl<T: Real> ZeroChainOracle<T> {
    /// Oracle with the defaults of the chain kind: threshold `1/4` with noisy
    /// gradients for the ε-chain, threshold `0` with exact gradients for the
    /// γ-chain.
    pub fn new(chain: ChainFunction<T>, rho: T, seed: u64) -> Result<Self> {
        if !(rho > T::zero() && rho <= T::one()) {
            return Err(Error::InvalidInput(format!("rho must lie in (0, 1], got {rho}")));
        }
        let (threshold, noiseless) = match chain.kind {
            ChainKind::EpsChain => (T::lit(0.25), false),
            ChainKind::GammaChain => (T::zero(), true),
        };
        Ok(Self {
            chain,
            rho,
            noiseless_gradient: noiseless,
            threshold,
            streams: SeedStream::new(seed),
            queries: 0,
            ledger: QueryLedger::default(),
        })
    }

    pub fn with_threshold(mut self, threshold: T) -> Self {
        self.threshold = threshold;
        self
    }

    pub fn ledger(&self) -> QueryLedger {
        self.ledger
    }

    /// Progress of `x` (in scaled coordinates) at the oracle's threshold.
    pub fn progress(&self, x: &[T]) -> usize {
        let y: Vec<T> = x.iter().map(|&v| self.chain.beta * v).collect();
        prog(&y, self.threshold)
    }

    fn draw(&mut self) -> bool {
        let mut rng = self.streams.substream(self.queries);
        self.queries += 1;
        bernoulli(&mut rng, self.rho.f64())
    }

    fn factors(&self, x: &[T], z: bool) -> Vec<T> {
        let p = self.progress(x);
        let tail = if z { T::one() / self.rho } else { T::zero() };
        (0..x.len()).map(|i| if i + 1 > p { tail } else { T::one() }).collect()
    }

    /// Value, gradient and Hessian estimates under one shared draw.
    pub fn query_all(&mut self, x: &[T]) -> Result<ChainAnswer<T>> {
        check_point(self.chain.t, x)?;
        let z = self.draw();
        self.ledger.hess_queries += 1;
        let f = self.factors(x, z);
        let e = self.chain.eval(x);
        let gradient = if self.noiseless_gradient {
            e.gradient
        } else {
            e.gradient.iter().zip(&f).map(|(g, s)| *g * *s).collect()
        };
        Ok(ChainAnswer {
            value: e.value,
            gradient,
            hessian: RowScaledTridiagonal::from_exact(&e.hessian, &f),
            revealed: z,
        })
    }

    /// Estimate of `∇^q F(x)` for `q ∈ {1, 2}`.
    pub fn query(&mut self, x: &[T], q: u8) -> Result<ChainDerivative<T>> {
        check_point(self.chain.t, x)?;
        match q {
            1 => {
                self.ledger.grad_queries += 1;
                let e = self.chain.eval(x);
                if self.noiseless_gradient {
                    return Ok(ChainDerivative::Gradient(e.gradient));
                }
                let z = self.draw();
                let f = self.factors(x, z);
                Ok(ChainDerivative::Gradient(e.gradient.iter().zip(&f).map(|(g, s)| *g * *s).collect()))
            }
            2 => {
                self.ledger.hess_queries += 1;
                let z = self.draw();
                let f = self.factors(x, z);
                let e = self.chain.eval(x);
                Ok(ChainDerivative::Hessian(RowScaledTridiagonal::from_exact(&e.hessian, &f)))
            }
            _ => Err(Error::InvalidInput(format!("derivative order {q} not supported"))),
        }
    }
}
