//! Walsh functions, the Walsh transform and the dyadic maximal function.

use crate::dyadic::{e_w, DyadicRational};
use crate::error::{Error, Result};
use crate::grid::{GridFunction, Side};
use crate::scalar::Scalar;

/// Reverse the low `bits` bits of `x`.
#[inline]
pub fn bitrev(x: usize, bits: u32) -> usize {
    if bits == 0 {
        0
    } else {
        x.reverse_bits() >> (usize::BITS - bits)
    }
}

/// Sign of `w_n` on grid cell `cell` at resolution `res`, as a parity bit
/// (`true` for `-1`). Digit `j` of `n` pairs with digit `a_{-1-j}` of the
/// cell's left endpoint.
#[inline]
pub fn walsh_parity(n: usize, cell: usize, res: u32) -> bool {
    (n & bitrev(cell, res)).count_ones() & 1 == 1
}

fn check_unit(x: &DyadicRational) -> Result<()> {
    if x.in_unit_interval() {
        Ok(())
    } else {
        Err(Error::OutsideUnitInterval(x.to_string()))
    }
}

/// `w_n(x)` through the doubling recursion: even indices copy `w_{n/2}` onto
/// both halves, odd indices flip the sign on the right half.
pub fn walsh_eval(n: u64, x: &DyadicRational) -> Result<i8> {
    check_unit(x)?;
    let mut sign = 1i8;
    let mut n = n;
    let mut x = x.clone();
    while n > 0 {
        let right = x.bit(-1);
        if n & 1 == 1 && right {
            sign = -sign;
        }
        x = DyadicRational::from_bits(x.bits().filter(|&p| p != -1).map(|p| p + 1));
        n >>= 1;
    }
    Ok(sign)
}

/// `w_n(x) = e_W(x ⊗ n)` on `[0, 1)`.
pub fn walsh_eval_character(n: u64, x: &DyadicRational) -> Result<i8> {
    check_unit(x)?;
    Ok(e_w(&x.otimes(&DyadicRational::from_u64(n))))
}

/// `w_n` sampled on the space grid.
pub fn walsh_function<S: Scalar>(n: usize, res: u32) -> Result<GridFunction<S>> {
    if n >> res != 0 {
        return Err(Error::OutOfBand {
            value: n as u64,
            range: format!("[0, {})", 1u64 << res),
        });
    }
    Ok(GridFunction::from_fn(res, Side::Space, |c| {
        if walsh_parity(n, c, res) {
            -S::one()
        } else {
            S::one()
        }
    }))
}

/// The Walsh transform, mapping space data to frequency data and back.
///
/// The weight is the cell length of the input side, which makes the map an
/// exact involution and an isometry.
pub fn walsh_transform<S: Scalar>(f: &GridFunction<S>) -> GridFunction<S> {
    let res = f.res();
    let src = f.values();
    let mut out: Vec<S> = (0..src.len()).map(|i| src[bitrev(i, res)].clone()).collect();
    S::fwht(&mut out);
    if f.side() == Side::Space && res > 0 {
        for v in out.iter_mut() {
            *v = v.mul_pow2(-(res as i32));
        }
    }
    GridFunction::new(res, f.side().flip(), out).expect("length preserved")
}

/// Dyadic maximal function: the largest average of `|f|` over dyadic
/// intervals containing each cell.
pub fn dyadic_maximal<S: Scalar>(f: &GridFunction<S>) -> Result<GridFunction<S>> {
    if f.side() != Side::Space {
        return Err(Error::SideMismatch);
    }
    let res = f.res();
    let mut sums: Vec<S> = f.values().iter().map(S::abs).collect();
    let mut best = sums.clone();
    for level in 1..=res {
        sums = sums
            .chunks(2)
            .map(|p| p[0].clone() + p[1].clone())
            .collect();
        let width = 1usize << level;
        for (block, s) in sums.iter().enumerate() {
            let avg = s.mul_pow2(-(level as i32));
            for b in &mut best[block * width..(block + 1) * width] {
                if avg > *b {
                    *b = avg.clone();
                }
            }
        }
    }
    GridFunction::new(res, Side::Space, best)
}
