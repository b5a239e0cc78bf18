//! Scalars for grid functions.
//!
//! Two implementations share one trait: [`ExactScalar`], the real quadratic
//! field Q(sqrt 2) with arbitrary-precision rational coordinates, and `f64`
//! for large-resolution runs. Wave-packet amplitudes are powers of
//! `2^(1/2)`, so every quantity produced at finite resolution from rational
//! data stays inside Q(sqrt 2) and can be compared exactly.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arithmetic needed by the transforms, projections and operators.
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + for<'a> AddAssign<&'a Self>
    + for<'a> SubAssign<&'a Self>
{
    /// `true` when arithmetic is exact.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    fn from_rational(r: &BigRational) -> Self;
    fn is_zero(&self) -> bool;
    fn abs(&self) -> Self;
    /// Multiply by `2^exp`.
    fn mul_pow2(&self, exp: i32) -> Self;
    /// Multiply by `2^(exp/2)`.
    fn mul_sqrt2_pow(&self, exp: i32) -> Self;
    fn to_f64(&self) -> f64;

    fn from_i64(v: i64) -> Self {
        Self::from_ratio(v, 1)
    }

    /// Unnormalized Walsh-Hadamard butterfly in natural (Hadamard) order:
    /// `out[n] = sum_c (-1)^popcount(n & c) in[c]`.
    fn fwht(values: &mut [Self]) {
        let len = values.len();
        debug_assert!(len.is_power_of_two());
        let mut half = 1;
        while half < len {
            for block in values.chunks_mut(2 * half) {
                let (lo, hi) = block.split_at_mut(half);
                for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                    let sum = x.clone() + y.clone();
                    let diff = x.clone() - y.clone();
                    *x = sum;
                    *y = diff;
                }
            }
            half *= 2;
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn from_rational(r: &BigRational) -> Self {
        r.to_f64().unwrap_or(f64::NAN)
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn mul_pow2(&self, exp: i32) -> Self {
        self * 2f64.powi(exp)
    }
    fn mul_sqrt2_pow(&self, exp: i32) -> Self {
        let v = self * 2f64.powi(exp.div_euclid(2));
        if exp.rem_euclid(2) == 1 {
            v * std::f64::consts::SQRT_2
        } else {
            v
        }
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

/// `a + b*sqrt(2)` with rational `a`, `b`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct ExactScalar {
    a: BigRational,
    b: BigRational,
}

fn pow2_rational(exp: i32) -> BigRational {
    let p = BigInt::one() << exp.unsigned_abs();
    if exp >= 0 {
        BigRational::from_integer(p)
    } else {
        BigRational::new(BigInt::one(), p)
    }
}

impl ExactScalar {
    pub fn new(a: BigRational, b: BigRational) -> Self {
        Self { a, b }
    }

    pub fn rational(a: BigRational) -> Self {
        Self {
            a,
            b: BigRational::zero(),
        }
    }

    pub fn sqrt2() -> Self {
        Self {
            a: BigRational::zero(),
            b: BigRational::one(),
        }
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.a
    }

    pub fn sqrt2_part(&self) -> &BigRational {
        &self.b
    }

    /// The value as a plain rational, when the `sqrt 2` coordinate vanishes.
    pub fn as_rational(&self) -> Option<&BigRational> {
        self.b.is_zero().then_some(&self.a)
    }

    pub fn signum(&self) -> Ordering {
        let sa = self.a.cmp(&BigRational::zero());
        let sb = self.b.cmp(&BigRational::zero());
        match (sa, sb) {
            (s, Ordering::Equal) => s,
            (Ordering::Equal, s) => s,
            (x, y) if x == y => x,
            (sa, sb) => {
                // opposite signs: the larger of a^2 and 2 b^2 wins
                let a2 = &self.a * &self.a;
                let b2 = &self.b * &self.b * BigRational::from_integer(BigInt::from(2));
                if a2 > b2 {
                    sa
                } else {
                    sb
                }
            }
        }
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn recip(&self) -> Option<Self> {
        if self.a.is_zero() && self.b.is_zero() {
            return None;
        }
        let two = BigRational::from_integer(BigInt::from(2));
        let norm = &self.a * &self.a - two * &self.b * &self.b;
        Some(Self {
            a: &self.a / &norm,
            b: -(&self.b / &norm),
        })
    }

    pub fn checked_div(&self, rhs: &Self) -> Option<Self> {
        rhs.recip().map(|r| self.clone() * r)
    }
}

impl Default for ExactScalar {
    fn default() -> Self {
        Self::zero()
    }
}

impl PartialOrd for ExactScalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExactScalar {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.clone() - other.clone()).signum()
    }
}

impl Add for ExactScalar {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self {
            a: self.a + rhs.a,
            b: self.b + rhs.b,
        }
    }
}

impl Sub for ExactScalar {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self {
            a: self.a - rhs.a,
            b: self.b - rhs.b,
        }
    }
}

impl Mul for ExactScalar {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        if self.b.is_zero() && rhs.b.is_zero() {
            return Self::rational(self.a * rhs.a);
        }
        let two = BigRational::from_integer(BigInt::from(2));
        Self {
            a: &self.a * &rhs.a + two * &self.b * &rhs.b,
            b: &self.a * &rhs.b + &self.b * &rhs.a,
        }
    }
}

impl Div for ExactScalar {
    type Output = Self;
    /// Panics on division by zero, like the integer types.
    fn div(self, rhs: Self) -> Self {
        self.checked_div(&rhs).expect("division by zero in Q(sqrt 2)")
    }
}

impl Neg for ExactScalar {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            a: -self.a,
            b: -self.b,
        }
    }
}

impl<'a> AddAssign<&'a ExactScalar> for ExactScalar {
    fn add_assign(&mut self, rhs: &'a ExactScalar) {
        self.a += &rhs.a;
        if !rhs.b.is_zero() {
            self.b += &rhs.b;
        }
    }
}

impl<'a> SubAssign<&'a ExactScalar> for ExactScalar {
    fn sub_assign(&mut self, rhs: &'a ExactScalar) {
        self.a -= &rhs.a;
        if !rhs.b.is_zero() {
            self.b -= &rhs.b;
        }
    }
}

/// Numerators over a shared denominator, with an `i128` fast lane.
enum Lattice {
    Small(Vec<i128>),
    Big(Vec<BigInt>),
}

impl Lattice {
    fn from_coords(coords: &[&BigRational], denom: &BigInt, headroom_bits: u64) -> Self {
        let nums: Vec<BigInt> = coords
            .iter()
            .map(|r| r.numer() * (denom / r.denom()))
            .collect();
        let max_bits = nums.iter().map(|n| n.bits()).max().unwrap_or(0);
        if max_bits + headroom_bits < 126 {
            Lattice::Small(nums.iter().map(|n| n.to_i128().unwrap()).collect())
        } else {
            Lattice::Big(nums)
        }
    }

    fn fwht(&mut self) {
        match self {
            Lattice::Small(v) => i128::fwht_lattice(v),
            Lattice::Big(v) => BigInt::fwht_lattice(v),
        }
    }

    fn into_rationals(self, denom: &BigInt) -> Vec<BigRational> {
        match self {
            Lattice::Small(v) => v
                .into_iter()
                .map(|n| BigRational::new(BigInt::from(n), denom.clone()))
                .collect(),
            Lattice::Big(v) => v
                .into_iter()
                .map(|n| BigRational::new(n, denom.clone()))
                .collect(),
        }
    }
}

trait LatticeInt: Clone {
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;

    fn fwht_lattice(values: &mut [Self]) {
        let len = values.len();
        let mut half = 1;
        while half < len {
            for block in values.chunks_mut(2 * half) {
                let (lo, hi) = block.split_at_mut(half);
                for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                    let s = x.add(y);
                    let d = x.sub(y);
                    *x = s;
                    *y = d;
                }
            }
            half *= 2;
        }
    }
}

impl LatticeInt for i128 {
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
}

impl LatticeInt for BigInt {
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
}

impl Scalar for ExactScalar {
    const EXACT: bool = true;

    fn zero() -> Self {
        Self {
            a: BigRational::zero(),
            b: BigRational::zero(),
        }
    }
    fn one() -> Self {
        Self::rational(BigRational::one())
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Self::rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }
    fn from_rational(r: &BigRational) -> Self {
        Self::rational(r.clone())
    }
    fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
    fn abs(&self) -> Self {
        if self.signum() == Ordering::Less {
            -self.clone()
        } else {
            self.clone()
        }
    }
    fn mul_pow2(&self, exp: i32) -> Self {
        if exp == 0 {
            return self.clone();
        }
        let p = pow2_rational(exp);
        Self {
            a: &self.a * &p,
            b: &self.b * &p,
        }
    }
    fn mul_sqrt2_pow(&self, exp: i32) -> Self {
        let half = exp.div_euclid(2);
        let scaled = self.mul_pow2(half);
        if exp.rem_euclid(2) == 0 {
            scaled
        } else {
            // (a + b sqrt2) sqrt2 = 2b + a sqrt2
            Self {
                a: &scaled.b * BigRational::from_integer(BigInt::from(2)),
                b: scaled.a,
            }
        }
    }
    fn to_f64(&self) -> f64 {
        self.a.to_f64().unwrap_or(f64::NAN)
            + self.b.to_f64().unwrap_or(f64::NAN) * std::f64::consts::SQRT_2
    }

    fn fwht(values: &mut [Self]) {
        if values.is_empty() {
            return;
        }
        let headroom = values.len().trailing_zeros() as u64 + 1;
        let has_sqrt2 = values.iter().any(|v| !v.b.is_zero());

        let mut rat: Vec<&BigRational> = values.iter().map(|v| &v.a).collect();
        let denom_a = rat
            .iter()
            .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
        let mut lat_a = Lattice::from_coords(&rat, &denom_a, headroom);
        lat_a.fwht();
        let new_a = lat_a.into_rationals(&denom_a);

        let new_b = if has_sqrt2 {
            rat = values.iter().map(|v| &v.b).collect();
            let denom_b = rat
                .iter()
                .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
            let mut lat_b = Lattice::from_coords(&rat, &denom_b, headroom);
            lat_b.fwht();
            Some(lat_b.into_rationals(&denom_b))
        } else {
            None
        };

        match new_b {
            Some(bs) => {
                for ((v, a), b) in values.iter_mut().zip(new_a).zip(bs) {
                    *v = Self { a, b };
                }
            }
            None => {
                for (v, a) in values.iter_mut().zip(new_a) {
                    *v = Self::rational(a);
                }
            }
        }
    }
}

impl fmt::Display for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", self.a);
        }
        if self.a.is_zero() {
            return write!(f, "{}*sqrt2", self.b);
        }
        if self.b.is_negative() {
            write!(f, "{}-{}*sqrt2", self.a, -self.b.clone())
        } else {
            write!(f, "{}+{}*sqrt2", self.a, self.b)
        }
    }
}

fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let s = s.strip_prefix('+').unwrap_or(s);
    BigRational::from_str(s).map_err(|_| Error::Parse(format!("bad rational `{s}`")))
}

impl FromStr for ExactScalar {
    type Err = Error;

    /// Accepts `p`, `p/q`, `r/s*sqrt2` and `p/q+r/s*sqrt2` (either sign).
    fn from_str(s: &str) -> Result<Self> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let Some(head) = s.strip_suffix("*sqrt2") else {
            return Ok(Self::rational(parse_rational(&s)?));
        };
        let split = head
            .char_indices()
            .skip(1)
            .filter(|&(i, c)| (c == '+' || c == '-') && &head[i - 1..i] != "/")
            .map(|(i, _)| i)
            .last();
        match split {
            Some(i) => Ok(Self {
                a: parse_rational(&head[..i])?,
                b: parse_rational(&head[i..])?,
            }),
            None => Ok(Self {
                a: BigRational::zero(),
                b: parse_rational(head)?,
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> ExactScalar {
        ExactScalar::from_ratio(n, d)
    }

    #[test]
    fn field_operations_are_exact() {
        let x = q(1, 2) + ExactScalar::sqrt2();
        let y = q(-3, 4) + ExactScalar::sqrt2().mul_pow2(-1);
        let prod = x.clone() * y.clone();
        assert_eq!(prod.clone() / y.clone(), x);
        assert_eq!(ExactScalar::sqrt2() * ExactScalar::sqrt2(), q(2, 1));
        assert!(ExactScalar::zero().recip().is_none());
        assert_eq!(x.clone() * x.recip().unwrap(), ExactScalar::one());
    }

    #[test]
    fn ordering_handles_mixed_signs() {
        // 3 - 2 sqrt2 > 0, 1 - sqrt2 < 0
        let a = q(3, 1) - ExactScalar::sqrt2().mul_pow2(1);
        assert_eq!(a.signum(), Ordering::Greater);
        let b = q(1, 1) - ExactScalar::sqrt2();
        assert_eq!(b.signum(), Ordering::Less);
        assert!(q(7, 5) < ExactScalar::sqrt2());
        assert!(q(3, 2) > ExactScalar::sqrt2());
        assert_eq!(b.abs(), ExactScalar::sqrt2() - q(1, 1));
    }

    #[test]
    fn sqrt2_powers() {
        assert_eq!(q(1, 1).mul_sqrt2_pow(1), ExactScalar::sqrt2());
        assert_eq!(q(1, 1).mul_sqrt2_pow(2), q(2, 1));
        assert_eq!(q(1, 1).mul_sqrt2_pow(-2), q(1, 2));
        let inv = q(1, 1).mul_sqrt2_pow(-1);
        assert_eq!(inv * ExactScalar::sqrt2(), q(1, 1));
        assert!((3.0f64.mul_sqrt2_pow(3) - 3.0 * 8f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn display_parse_round_trip() {
        for v in [
            q(0, 1),
            q(-7, 3),
            ExactScalar::sqrt2().mul_pow2(-3),
            q(1, 2) - ExactScalar::sqrt2(),
            q(-5, 6) + ExactScalar::sqrt2().mul_pow2(2),
        ] {
            let s = v.to_string();
            assert_eq!(s.parse::<ExactScalar>().unwrap(), v, "{s}");
        }
        assert!("1/2+x".parse::<ExactScalar>().is_err());
    }

    #[test]
    fn lattice_fwht_matches_generic_butterfly() {
        let vals: Vec<ExactScalar> = (0..8)
            .map(|i| q(i * 3 - 7, (i % 3 + 1) as i64) + ExactScalar::sqrt2().mul_pow2(-(i as i32)))
            .collect();
        let mut fast = vals.clone();
        ExactScalar::fwht(&mut fast);
        let mut slow = vals;
        let len = slow.len();
        let mut half = 1;
        while half < len {
            for start in (0..len).step_by(2 * half) {
                for i in start..start + half {
                    let (x, y) = (slow[i].clone(), slow[i + half].clone());
                    slow[i] = x.clone() + y.clone();
                    slow[i + half] = x - y;
                }
            }
            half *= 2;
        }
        assert_eq!(fast, slow);
    }
}
