//! Points and intervals of the Walsh half-line.
//!
//! A [`DyadicRational`] is a nonnegative number with a finite binary
//! expansion, stored as the set of bit positions `n` with `a_n = 1`
//! (`x = sum 2^n`). Digit-wise addition mod 2 and carryless multiplication
//! act directly on that set.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct DyadicRational {
    bits: BTreeSet<i32>,
}

impl DyadicRational {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_bits<I: IntoIterator<Item = i32>>(positions: I) -> Self {
        let mut bits = BTreeSet::new();
        for p in positions {
            // repeated positions cancel, as in a mod-2 sum
            if !bits.insert(p) {
                bits.remove(&p);
            }
        }
        Self { bits }
    }

    pub fn from_u64(v: u64) -> Self {
        Self::from_bits((0..64).filter(|i| v >> i & 1 == 1))
    }

    /// `num / 2^shift` for a nonnegative integer numerator.
    pub fn from_scaled(num: u64, shift: u32) -> Self {
        Self::from_bits(
            (0..64)
                .filter(|i| num >> i & 1 == 1)
                .map(|i| i - shift as i32),
        )
    }

    /// Left endpoint of grid cell `cell` at resolution `res`.
    pub fn cell_point(cell: u64, res: u32) -> Self {
        Self::from_scaled(cell, res)
    }

    /// Any nonnegative rational whose denominator is a power of two.
    pub fn from_rational(r: &BigRational) -> Result<Self> {
        if r.is_negative() {
            return Err(Error::Parse(format!("{r} is negative")));
        }
        let den = r.denom();
        if den.bits() == 0 || (den & (den - BigInt::one())) != BigInt::zero() {
            return Err(Error::Parse(format!("{r} is not dyadic")));
        }
        let shift = den.bits() as i32 - 1;
        let num = r.numer();
        let positions = (0..num.bits())
            .filter(|&i| num.bit(i))
            .map(|i| i as i32 - shift);
        Ok(Self::from_bits(positions))
    }

    pub fn to_rational(&self) -> BigRational {
        self.bits.iter().fold(BigRational::zero(), |acc, &p| {
            let two = BigInt::from(2);
            let term = if p >= 0 {
                BigRational::from_integer(two.pow(p as u32))
            } else {
                BigRational::new(BigInt::one(), two.pow((-p) as u32))
            };
            acc + term
        })
    }

    pub fn to_f64(&self) -> f64 {
        self.bits.iter().map(|&p| 2f64.powi(p)).sum()
    }

    /// Binary digit `a_n`.
    pub fn bit(&self, n: i32) -> bool {
        self.bits.contains(&n)
    }

    pub fn bits(&self) -> impl Iterator<Item = i32> + '_ {
        self.bits.iter().copied()
    }

    pub fn is_zero(&self) -> bool {
        self.bits.is_empty()
    }

    /// `x < 1`.
    pub fn in_unit_interval(&self) -> bool {
        self.bits.iter().next_back().map_or(true, |&p| p < 0)
    }

    /// `2^k x`.
    pub fn shifted(&self, k: i32) -> Self {
        Self {
            bits: self.bits.iter().map(|p| p + k).collect(),
        }
    }

    /// Bitwise mod-2 sum.
    pub fn oplus(&self, other: &Self) -> Self {
        Self {
            bits: self.bits.symmetric_difference(&other.bits).copied().collect(),
        }
    }

    /// Carryless product: `c_n = sum_m a_m(x) a_{n-m}(y) mod 2`.
    pub fn otimes(&self, other: &Self) -> Self {
        Self::from_bits(
            self.bits
                .iter()
                .flat_map(|p| other.bits.iter().map(move |q| p + q)),
        )
    }
}

impl fmt::Debug for DyadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DyadicRational({})", self.to_rational())
    }
}

impl fmt::Display for DyadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_rational())
    }
}

pub fn oplus(x: &DyadicRational, y: &DyadicRational) -> DyadicRational {
    x.oplus(y)
}

pub fn otimes(x: &DyadicRational, y: &DyadicRational) -> DyadicRational {
    x.otimes(y)
}

/// The Walsh character `e_W`: `-1` when the digit `a_{-1}` is set.
pub fn e_w(x: &DyadicRational) -> i8 {
    if x.bit(-1) {
        -1
    } else {
        1
    }
}

/// Half-open dyadic interval `[2^scale * position, 2^scale * (position + 1))`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct DyadicInterval {
    #[serde(rename = "j")]
    pub scale: i32,
    #[serde(rename = "m")]
    pub position: u64,
}

impl DyadicInterval {
    pub const fn new(scale: i32, position: u64) -> Self {
        Self { scale, position }
    }

    /// `[0, 1)`.
    pub const fn unit() -> Self {
        Self::new(0, 0)
    }

    pub fn left(&self) -> DyadicRational {
        DyadicRational::from_scaled(self.position, 0).shifted(self.scale)
    }

    pub fn length(&self) -> BigRational {
        let two = BigInt::from(2);
        if self.scale >= 0 {
            BigRational::from_integer(two.pow(self.scale as u32))
        } else {
            BigRational::new(BigInt::one(), two.pow((-self.scale) as u32))
        }
    }

    /// `other ⊆ self`.
    pub fn contains(&self, other: &Self) -> bool {
        other.scale <= self.scale
            && other.position >> (self.scale - other.scale) as u32 == self.position
    }

    pub fn intersects(&self, other: &Self) -> bool {
        self.contains(other) || other.contains(self)
    }

    pub fn parent(&self) -> Self {
        Self::new(self.scale + 1, self.position >> 1)
    }

    /// `(left half, right half)`.
    pub fn halves(&self) -> (Self, Self) {
        (
            Self::new(self.scale - 1, self.position << 1),
            Self::new(self.scale - 1, (self.position << 1) | 1),
        )
    }

    /// Ancestor (or self) of length `2^scale`; `None` when `scale` is finer.
    pub fn ancestor(&self, scale: i32) -> Option<Self> {
        (scale >= self.scale)
            .then(|| Self::new(scale, self.position >> (scale - self.scale) as u32))
    }

    /// Indices of the grid cells of length `2^unit` covered by the interval.
    pub fn cells(&self, unit: i32) -> std::ops::Range<usize> {
        debug_assert!(self.scale >= unit);
        let shift = (self.scale - unit) as u32;
        let start = (self.position << shift) as usize;
        start..start + (1usize << shift)
    }

    /// Whether grid cell `cell` of length `2^unit` lies inside the interval.
    pub fn contains_cell(&self, cell: usize, unit: i32) -> bool {
        self.scale >= unit && (cell as u64) >> (self.scale - unit) as u32 == self.position
    }

    pub fn contains_point(&self, x: &DyadicRational) -> bool {
        // x ∈ I iff floor(x / 2^scale) == position
        let q = x
            .bits()
            .filter(|&p| p >= self.scale)
            .fold(0u128, |acc, p| acc | 1u128 << (p - self.scale));
        q == self.position as u128
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::FromPrimitive;

    fn d(num: u64, shift: u32) -> DyadicRational {
        DyadicRational::from_scaled(num, shift)
    }

    #[test]
    fn oplus_examples() {
        assert!(oplus(&d(1, 0), &d(1, 0)).is_zero());
        assert_eq!(oplus(&d(5, 2), &d(1, 1)), d(7, 2));
        assert_eq!(oplus(&d(3, 0), &d(5, 0)), d(6, 0));
    }

    #[test]
    fn otimes_examples() {
        assert_eq!(otimes(&d(2, 0), &d(2, 0)), d(4, 0));
        assert_eq!(otimes(&d(3, 0), &d(3, 0)), d(5, 0));
        assert_eq!(otimes(&d(11, 3), &d(1, 0)), d(11, 3));
    }

    #[test]
    fn rational_round_trip() {
        for (n, s) in [(0u64, 0u32), (1, 0), (13, 5), (1023, 10), (6, 1)] {
            let r = BigRational::new(BigInt::from(n), BigInt::from(1u64 << s));
            let x = DyadicRational::from_rational(&r).unwrap();
            assert_eq!(x.to_rational(), r);
            assert_eq!(x, d(n, s));
        }
        let third = BigRational::new(BigInt::from(1), BigInt::from(3));
        assert!(DyadicRational::from_rational(&third).is_err());
        let neg = BigRational::from_i64(-1).unwrap();
        assert!(DyadicRational::from_rational(&neg).is_err());
    }

    #[test]
    fn intervals_nest_or_are_disjoint() {
        let all: Vec<DyadicInterval> = (-3..=0)
            .flat_map(|j: i32| (0..1u64 << (-j)).map(move |m| DyadicInterval::new(j, m)))
            .collect();
        for a in &all {
            for b in &all {
                let ra = a.cells(-3);
                let rb = b.cells(-3);
                let overlap = ra.start < rb.end && rb.start < ra.end;
                assert_eq!(overlap, a.intersects(b));
                if overlap {
                    assert!(a.contains(b) || b.contains(a));
                }
            }
        }
    }

    #[test]
    fn half_open_membership() {
        let i = DyadicInterval::new(-1, 1); // [1/2, 1)
        assert!(i.contains_point(&d(1, 1)));
        assert!(!i.contains_point(&d(1, 0)));
        assert!(!i.contains_point(&d(1, 2)));
        assert!(i.contains_point(&d(7, 3)));
        assert_eq!(i.cells(-2), 2..4);
        assert!(i.contains_cell(3, -2) && !i.contains_cell(1, -2));
    }
}
