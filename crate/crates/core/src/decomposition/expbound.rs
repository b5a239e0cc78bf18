//! Exact comparisons of rationals against `e^-x`.
//!
//! `e^x` is enclosed between rational Taylor brackets that tighten as more
//! terms are taken; a comparison is decided once the bracket excludes the
//! other operand.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Taylor bracket `[lo, hi] ∋ e^r` for `0 ≤ r < 1`.
fn exp_fraction(r: &BigRational, terms: u32) -> (BigRational, BigRational) {
    let mut sum = BigRational::one();
    let mut term = BigRational::one();
    for i in 1..=terms {
        term = term * r / BigRational::from_integer(BigInt::from(i));
        sum += &term;
    }
    // Tail after `terms`: at most `next / (1 - r / (terms + 2))`.
    let next = term * r / BigRational::from_integer(BigInt::from(terms + 1));
    let damp = BigRational::one() - r / BigRational::from_integer(BigInt::from(terms + 2));
    let hi = &sum + next / damp;
    (sum, hi)
}

/// Rational bracket `[lo, hi] ∋ e^x` for `x ≥ 0`.
fn exp_bracket(x: &BigRational, terms: u32) -> (BigRational, BigRational) {
    let whole = x.numer().div_floor(x.denom());
    let frac = x - BigRational::from_integer(whole.clone());
    let (e_lo, e_hi) = exp_fraction(&BigRational::one(), terms);
    let (f_lo, f_hi) = if frac.is_zero() {
        (BigRational::one(), BigRational::one())
    } else {
        exp_fraction(&frac, terms)
    };
    let n: usize = whole.try_into().expect("exponent too large");
    (pow(&e_lo, n) * f_lo, pow(&e_hi, n) * f_hi)
}

fn pow(b: &BigRational, n: usize) -> BigRational {
    num_traits::pow(b.clone(), n)
}

/// Rational bracket `[lo, hi] ∋ e^-x` using `terms` Taylor terms.
pub fn exp_neg_bracket(x: &BigRational, terms: u32) -> (BigRational, BigRational) {
    if x.is_negative() {
        return exp_bracket(&-x, terms);
    }
    let (lo, hi) = exp_bracket(x, terms);
    (hi.recip(), lo.recip())
}

/// Exact ordering of `q` against `e^-x`.
pub fn cmp_exp_neg(q: &BigRational, x: &BigRational) -> Ordering {
    if x.is_zero() {
        return q.cmp(&BigRational::one());
    }
    // e^-x is irrational for rational x ≠ 0, so refinement terminates.
    let mut terms = 16;
    loop {
        let (lo, hi) = exp_neg_bracket(x, terms);
        if q < &lo {
            return Ordering::Less;
        }
        if q > &hi {
            return Ordering::Greater;
        }
        terms *= 2;
    }
}

/// `q ≤ e^-x`, decided exactly.
pub fn le_exp_neg(q: &BigRational, x: &BigRational) -> bool {
    cmp_exp_neg(q, x) != Ordering::Greater
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn brackets_contain_float_value() {
        for x in [q(0, 1), q(1, 3), q(1, 1), q(5, 2), q(10, 1), q(40, 1), q(-3, 2)] {
            let (lo, hi) = exp_neg_bracket(&x, 24);
            let e = (-x.to_f64().unwrap()).exp();
            assert!(lo.to_f64().unwrap() <= e * (1.0 + 1e-12), "{x}");
            assert!(hi.to_f64().unwrap() >= e * (1.0 - 1e-12), "{x}");
            assert!((hi.to_f64().unwrap() - lo.to_f64().unwrap()) <= e * 1e-9, "{x}");
        }
    }

    #[test]
    fn comparisons() {
        // e^-1 ≈ 0.367879
        assert_eq!(cmp_exp_neg(&q(367, 1000), &q(1, 1)), Ordering::Less);
        assert_eq!(cmp_exp_neg(&q(368, 1000), &q(1, 1)), Ordering::Greater);
        // e^-10 ≈ 4.5399929762e-5
        assert!(le_exp_neg(&q(45399, 1_000_000_000), &q(10, 1)));
        assert!(!le_exp_neg(&q(45400, 1_000_000_000), &q(10, 1)));
        assert!(le_exp_neg(&q(1, 1), &q(0, 1)));
        assert!(!le_exp_neg(&q(2, 1), &q(0, 1)));
        assert!(le_exp_neg(&q(0, 1), &q(100, 1)));
        // e^{1/2} ≈ 1.6487
        assert!(le_exp_neg(&q(1648, 1000), &q(-1, 2)));
        assert!(!le_exp_neg(&q(1649, 1000), &q(-1, 2)));
    }
}
