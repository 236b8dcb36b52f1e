//! Measured derivative bounds of the unscaled chains.
//!
//! Every derivative entry of a chain depends on at most three consecutive
//! coordinates, so the bounds are suprema of small closed-form functions.
//! They are found by a grid search over `[-R, R]^3` (plus a few far points)
//! followed by a local pattern search from the best grid points, then padded
//! by a small margin.
//!
//! * `l0`: `sup |∂_j f|`.
//! * `l1`: `sup_j Σ_k |∂_j∂_k f|`, bounding both the Hessian operator norm
//!   and the Euclidean norm of a Hessian row.
//! * `l2`: `sup ‖∇H_jj‖ + 2 sup ‖∇H_{j,j+1}‖`, bounding the Lipschitz
//!   constant of the Hessian in operator norm via the row-sum bound.

use super::chain::ChainKind;
use super::components::{lambda3, phi3, psi3};
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

const RADIUS: f64 = 6.0;
const GRID_STEP: f64 = 0.1;
const FD_STEP: f64 = 1e-5;
/// Bound of the refinement box; the components are flat to double precision beyond it.
const FAR: f64 = 1e4;
/// Relative padding applied to the measured suprema.
pub const SAFETY_MARGIN: f64 = 5e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainConstants {
    pub l0: f64,
    pub l1: f64,
    pub l2: f64,
}

/// Cached measured constants of the chain kind.
pub fn chain_constants(kind: ChainKind) -> ChainConstants {
    static EPS: OnceLock<ChainConstants> = OnceLock::new();
    static GAMMA: OnceLock<ChainConstants> = OnceLock::new();
    let cell = match kind {
        ChainKind::EpsChain => &EPS,
        ChainKind::GammaChain => &GAMMA,
    };
    *cell.get_or_init(|| measure(kind))
}

/// Component values at `±v`.
#[derive(Clone, Copy)]
struct Pt {
    pm: [f64; 3],
    pp: [f64; 3],
    um: [f64; 3],
    up: [f64; 3],
}

fn pt(kind: ChainKind, v: f64) -> Pt {
    let u = |x: f64| match kind {
        ChainKind::EpsChain => phi3(x),
        ChainKind::GammaChain => lambda3(x),
    };
    Pt { pm: psi3(-v), pp: psi3(v), um: u(-v), up: u(v) }
}

fn sign(kind: ChainKind) -> f64 {
    match kind {
        ChainKind::EpsChain => -1.0,
        ChainKind::GammaChain => 1.0,
    }
}

/// Partial of one link `(a, b)`; `oa`, `ob` are derivative orders.
fn part(s: f64, a: &Pt, b: &Pt, oa: usize, ob: usize) -> f64 {
    let sa = if oa % 2 == 1 { -1.0 } else { 1.0 };
    let sb = if ob % 2 == 1 { -1.0 } else { 1.0 };
    sa * sb * a.pm[oa] * b.um[ob] + s * a.pp[oa] * b.up[ob]
}

/// The scalar functions whose suprema define the constants.
#[derive(Clone, Copy)]
enum Quantity {
    Grad,
    GradLast,
    RowSum,
    RowSumLast,
    DiagGrad,
    DiagGradLast,
    OffGrad,
}

impl Quantity {
    fn arity(self) -> usize {
        match self {
            Quantity::Grad | Quantity::RowSum | Quantity::DiagGrad => 3,
            _ => 2,
        }
    }
}

fn diag_entry(s: f64, a: &Pt, b: &Pt, c: Option<&Pt>) -> f64 {
    part(s, a, b, 0, 2) + c.map_or(0.0, |c| part(s, b, c, 2, 0))
}

/// Evaluates a quantity from component values at the arguments and at
/// arguments shifted by `±FD_STEP` (`sh[k] = [at -h, at +h]`).
fn eval(kind: ChainKind, q: Quantity, p: &[Pt], sh: &[[Pt; 2]]) -> f64 {
    let s = sign(kind);
    let h2 = 2.0 * FD_STEP;
    match q {
        Quantity::Grad => (part(s, &p[0], &p[1], 0, 1) + part(s, &p[1], &p[2], 1, 0)).abs(),
        Quantity::GradLast => part(s, &p[0], &p[1], 0, 1).abs(),
        Quantity::RowSum => {
            part(s, &p[0], &p[1], 1, 1).abs()
                + diag_entry(s, &p[0], &p[1], Some(&p[2])).abs()
                + part(s, &p[1], &p[2], 1, 1).abs()
        }
        Quantity::RowSumLast => part(s, &p[0], &p[1], 1, 1).abs() + diag_entry(s, &p[0], &p[1], None).abs(),
        Quantity::DiagGrad | Quantity::DiagGradLast => {
            let n = q.arity();
            let f = |args: &[Pt; 3]| diag_entry(s, &args[0], &args[1], if n == 3 { Some(&args[2]) } else { None });
            let base = [p[0], p[1], if n == 3 { p[2] } else { p[1] }];
            let mut sq = 0.0;
            for k in 0..n {
                let mut lo = base;
                let mut hi = base;
                lo[k] = sh[k][0];
                hi[k] = sh[k][1];
                let d = (f(&hi) - f(&lo)) / h2;
                sq += d * d;
            }
            sq.sqrt()
        }
        Quantity::OffGrad => {
            let da = (part(s, &sh[0][1], &p[1], 1, 1) - part(s, &sh[0][0], &p[1], 1, 1)) / h2;
            let db = (part(s, &p[0], &sh[1][1], 1, 1) - part(s, &p[0], &sh[1][0], 1, 1)) / h2;
            da.hypot(db)
        }
    }
}

fn eval_at(kind: ChainKind, q: Quantity, x: &[f64]) -> f64 {
    let p: Vec<Pt> = x.iter().map(|&v| pt(kind, v)).collect();
    let sh: Vec<[Pt; 2]> = x.iter().map(|&v| [pt(kind, v - FD_STEP), pt(kind, v + FD_STEP)]).collect();
    eval(kind, q, &p, &sh)
}

/// Supremum of `q` by grid search plus pattern-search refinement.
fn supremum(kind: ChainKind, q: Quantity) -> f64 {
    let n = q.arity();
    let m = (2.0 * RADIUS / GRID_STEP).round() as usize + 1;
    let mut grid: Vec<f64> = (0..m).map(|k| -RADIUS + GRID_STEP * k as f64).collect();
    for v in [10.0, 100.0, FAR] {
        grid.extend([-v, v]);
    }
    let m = grid.len();
    let base: Vec<Pt> = grid.iter().map(|&v| pt(kind, v)).collect();
    let shifted: Vec<[Pt; 2]> = grid.iter().map(|&v| [pt(kind, v - FD_STEP), pt(kind, v + FD_STEP)]).collect();

    const KEEP: usize = 6;
    let mut best: Vec<(f64, [usize; 3])> = Vec::with_capacity(KEEP + 1);
    let mut push = |val: f64, idx: [usize; 3]| {
        if best.len() < KEEP || val > best[best.len() - 1].0 {
            best.push((val, idx));
            best.sort_by(|a, b| b.0.total_cmp(&a.0));
            best.truncate(KEEP);
        }
    };
    let third = if n == 3 { m } else { 1 };
    for i in 0..m {
        for j in 0..m {
            for k in 0..third {
                let idx = [i, j, k];
                let p = [base[i], base[j], base[k]];
                let sh = [shifted[i], shifted[j], shifted[k]];
                push(eval(kind, q, &p[..n], &sh[..n]), idx);
            }
        }
    }

    let mut sup = best.first().map_or(0.0, |b| b.0);
    for (_, idx) in &best {
        let mut x: Vec<f64> = idx[..n].iter().map(|&i| grid[i]).collect();
        let mut fx = eval_at(kind, q, &x);
        let mut step = GRID_STEP;
        while step > 1e-7 {
            let mut improved = false;
            for c in 0..n {
                for dir in [-1.0, 1.0] {
                    let mut y = x.clone();
                    y[c] = (y[c] + dir * step).clamp(-FAR, FAR);
                    let fy = eval_at(kind, q, &y);
                    if fy > fx {
                        x = y;
                        fx = fy;
                        improved = true;
                    }
                }
            }
            // Expanding steps follow suprema approached at infinity.
            step = if improved { (2.0 * step).min(FAR) } else { step / 2.0 };
        }
        sup = sup.max(fx);
    }
    sup
}

/// Measures the constants from scratch (uncached).
pub fn measure(kind: ChainKind) -> ChainConstants {
    let pad = 1.0 + SAFETY_MARGIN;
    let l0 = supremum(kind, Quantity::Grad).max(supremum(kind, Quantity::GradLast));
    let l1 = supremum(kind, Quantity::RowSum).max(supremum(kind, Quantity::RowSumLast));
    let diag = supremum(kind, Quantity::DiagGrad).max(supremum(kind, Quantity::DiagGradLast));
    let off = supremum(kind, Quantity::OffGrad);
    ChainConstants { l0: pad * l0, l1: pad * l1, l2: pad * (diag + 2.0 * off) }
}
