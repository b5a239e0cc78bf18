//! Dyadic BMO and the packing of tree tops.

use num_rational::BigRational;

use crate::dyadic::DyadicInterval;
use crate::error::{Error, Result};
use crate::grid::{GridFunction, Measure, Side};
use crate::scalar::Scalar;

use super::expbound::le_exp_neg;
use super::forest::Forest;

/// Constant in `|{x ∈ I : G_I(x) ≥ C λ 2^n}| ≤ e^-λ |I|` for forests whose
/// tops pack with constant `2^(n+1)`.
pub const C_JN: u64 = 16;

/// `sup_I |I|^-1 ∫_I |g - g_I|` over dyadic `I ⊆ [0, 1)`.
pub fn bmo_norm<S: Scalar>(g: &GridFunction<S>) -> Result<S> {
    if g.side() != Side::Space {
        return Err(Error::SideMismatch);
    }
    let res = g.res();
    let mut best = S::zero();
    for width_bits in 1..=res {
        let shift = -(width_bits as i32);
        for block in g.values().chunks(1 << width_bits) {
            let avg = block.iter().fold(S::zero(), |a, v| a + v.clone()).mul_pow2(shift);
            let osc = block
                .iter()
                .fold(S::zero(), |a, v| a + (v.clone() - avg.clone()).abs())
                .mul_pow2(shift);
            if osc > best {
                best = osc;
            }
        }
    }
    Ok(best)
}

fn intervals(res: u32) -> impl Iterator<Item = DyadicInterval> {
    (0..=res).flat_map(|j| (0..1u64 << j).map(move |m| DyadicInterval::new(-(j as i32), m)))
}

/// `sup_I sum_{I_T ⊆ I} |I_T| / |I|` over dyadic `I ⊆ [0, 1)`.
pub fn packing_ratio(forest: &Forest, res: u32) -> Measure {
    let tops: Vec<DyadicInterval> = forest.trees.iter().map(|t| t.top_time()).collect();
    intervals(res)
        .map(|i| {
            let inside: i64 = tops
                .iter()
                .filter(|t| i.contains(t))
                .map(|t| 1i64 << (res as i32 + t.scale))
                .sum();
            Measure::new(inside, 1i64 << (res as i32 + i.scale))
        })
        .max()
        .unwrap_or_else(|| Measure::from_integer(0))
}

/// An instance of `|{x ∈ I : G_I(x) ≥ C λ 2^n}| > e^-λ |I|`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct JohnNirenbergViolation {
    pub interval: DyadicInterval,
    pub lambda: u32,
    /// Fraction of `I` above the threshold.
    pub fraction: Measure,
}

/// Check the exponential distribution bound for the local counting
/// functions `G_I = sum_{I_T ⊆ I} 1_{I_T}` at level `n`.
pub fn john_nirenberg_violations(
    forest: &Forest,
    res: u32,
    n: u32,
    lambdas: &[u32],
) -> Vec<JohnNirenbergViolation> {
    let tops: Vec<DyadicInterval> = forest.trees.iter().map(|t| t.top_time()).collect();
    let unit = -(res as i32);
    let mut out = Vec::new();
    for i in intervals(res) {
        let cells = i.cells(unit);
        let mut g = vec![0u64; cells.len()];
        for t in tops.iter().filter(|t| i.contains(t)) {
            for c in t.cells(unit) {
                g[c - cells.start] += 1;
            }
        }
        for &lambda in lambdas {
            let threshold = C_JN * lambda as u64 * (1u64 << n);
            let above = g.iter().filter(|&&v| v >= threshold).count();
            let fraction = Measure::new(above as i64, g.len() as i64);
            let q = BigRational::new(above.into(), g.len().into());
            if !le_exp_neg(&q, &BigRational::from_integer(lambda.into())) {
                out.push(JohnNirenbergViolation {
                    interval: i,
                    lambda,
                    fraction,
                });
            }
        }
    }
    out
}
