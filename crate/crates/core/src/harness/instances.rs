//! Seeded random instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::carleson::ChoiceFunction;
use crate::dyadic::DyadicRational;
use crate::grid::{CellSet, ExactGrid, FloatGrid, GridFunction, Side};
use crate::phase_plane::{convex_hull, Bitile, BitileSet};
use crate::scalar::{ExactScalar, Scalar};

pub type Rng64 = ChaCha8Rng;

/// Generator for `(seed, stream)`; distinct streams are independent.
pub fn rng(seed: u64, stream: u64) -> Rng64 {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Values `a / b` with `a ∈ [-8, 8]`, `b ∈ [1, 8]`.
pub fn random_rational(rng: &mut Rng64) -> ExactScalar {
    ExactScalar::from_ratio(rng.gen_range(-8..=8), rng.gen_range(1..=8))
}

pub fn random_grid(rng: &mut Rng64, res: u32) -> ExactGrid {
    GridFunction::from_fn(res, Side::Space, |_| random_rational(rng))
}

pub fn random_float_grid(rng: &mut Rng64, res: u32) -> FloatGrid {
    GridFunction::from_fn(res, Side::Space, |_| rng.gen_range(-1.0..1.0))
}

/// `f = ±1` on a random set `E` and zero elsewhere, so `|f| ≤ 1_E`.
pub fn random_indicator_grid(rng: &mut Rng64, res: u32) -> ExactGrid {
    GridFunction::from_fn(res, Side::Space, |_| match rng.gen_range(0..4) {
        0 => ExactScalar::from_i64(1),
        1 => ExactScalar::from_i64(-1),
        _ => ExactScalar::zero(),
    })
}

pub fn random_cell_set(rng: &mut Rng64, res: u32) -> CellSet {
    CellSet::from_fn(res, |_| rng.gen_bool(0.5))
}

pub fn random_choice(rng: &mut Rng64, res: u32) -> ChoiceFunction {
    ChoiceFunction::from_fn(res, |_| rng.gen_range(0..1u64 << res)).expect("values in band")
}

pub fn random_bitile(rng: &mut Rng64, res: u32) -> Bitile {
    let k = rng.gen_range(0..res);
    Bitile::at(k, rng.gen_range(0..1u64 << k), rng.gen_range(0..1u64 << (res - k - 1)))
}

/// Convex hull of `seeds` random bitiles; requires `res ≥ 1`.
pub fn random_convex_set(rng: &mut Rng64, res: u32, seeds: usize) -> BitileSet {
    let s: BitileSet = (0..seeds).map(|_| random_bitile(rng, res)).collect();
    convex_hull(&s)
}

/// A dyadic rational in `[0, 2^span)` with bits down to `2^-depth`.
pub fn random_dyadic(rng: &mut Rng64, span: i32, depth: i32) -> DyadicRational {
    DyadicRational::from_bits((-depth..span).filter(|_| rng.gen_bool(0.5)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_plane::is_convex;

    #[test]
    fn deterministic_and_valid() {
        let a = random_grid(&mut rng(7, 0), 4);
        let b = random_grid(&mut rng(7, 0), 4);
        assert_eq!(a, b);
        assert_ne!(a, random_grid(&mut rng(7, 1), 4));
        let mut r = rng(3, 0);
        for _ in 0..20 {
            let s = random_convex_set(&mut r, 4, 3);
            assert!(is_convex(&s));
            assert!(s.iter().all(|p| p.validate(4).is_ok()));
        }
        let n = random_choice(&mut r, 4);
        assert!(n.values().iter().all(|&v| v < 16));
    }
}
