//! Exact rational scalars and the order-derived operators: min/max,
//! positive/negative parts and the scalar Heaviside operator.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

/// Arbitrary-precision rational number, always stored reduced with a
/// positive denominator. This is the scalar domain for every structure in
/// the crate; fixed-width integers are never used for coefficients since
/// evaluation-matrix inversion would silently overflow them.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(BigRational);

impl Rational {
    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    /// Ratio of two machine integers; `den` must be nonzero.
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_int(n: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_big(num: BigInt, den: BigInt) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        Rational(BigRational::new(num, den))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(Rational(self.0.recip()))
        }
    }

    pub fn min_with(&self, other: &Self) -> Self {
        if self <= other {
            self.clone()
        } else {
            other.clone()
        }
    }

    pub fn max_with(&self, other: &Self) -> Self {
        if self >= other {
            self.clone()
        } else {
            other.clone()
        }
    }

    /// Positive part: `max(a, 0)`.
    pub fn pos_part(&self) -> Self {
        self.max_with(&Rational::zero())
    }

    /// Negative part: `min(a, 0)`.
    pub fn neg_part(&self) -> Self {
        self.min_with(&Rational::zero())
    }

    /// Approximate value as `f64`, for the numeric oracles and the sampler.
    pub fn to_f64(&self) -> f64 {
        // Scale through 2^64 chunks to stay accurate for large entries.
        let n = self.0.numer();
        let d = self.0.denom();
        big_to_f64(n) / big_to_f64(d)
    }
}

fn big_to_f64(n: &BigInt) -> f64 {
    n.to_string().parse::<f64>().unwrap_or(f64::NAN)
}

/// Minimum of two rationals.
pub fn meet(a: &Rational, b: &Rational) -> Rational {
    a.min_with(b)
}

/// Maximum of two rationals.
pub fn join(a: &Rational, b: &Rational) -> Rational {
    a.max_with(b)
}

/// Value of the scalar Heaviside operator, restricted to {0, 1}.
///
/// The crate fixes the left-continuous convention `H(0) = 0` globally (no
/// runtime switch). A symmetric value 1/2 is unrepresentable by
/// construction: it would break the multiplicativity
/// `co_heaviside(a) * co_heaviside(b) = co_heaviside(max(a, b))` at (0, 0).
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub struct HeavisideValue(bool);

impl HeavisideValue {
    pub const ZERO: HeavisideValue = HeavisideValue(false);
    pub const ONE: HeavisideValue = HeavisideValue(true);

    pub fn is_one(self) -> bool {
        self.0
    }

    pub fn is_zero(self) -> bool {
        !self.0
    }

    /// `1 - self`.
    pub fn complement(self) -> Self {
        HeavisideValue(!self.0)
    }

    pub fn to_rational(self) -> Rational {
        if self.0 {
            Rational::one()
        } else {
            Rational::zero()
        }
    }
}

impl Mul for HeavisideValue {
    type Output = HeavisideValue;
    fn mul(self, rhs: Self) -> Self {
        HeavisideValue(self.0 && rhs.0)
    }
}

impl fmt::Display for HeavisideValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", if self.0 { 1 } else { 0 })
    }
}

/// Scalar Heaviside operator: 0 for `a <= 0`, 1 for `a > 0`.
pub fn heaviside(a: &Rational) -> HeavisideValue {
    HeavisideValue(a.is_positive())
}

/// Dual Heaviside operator: `1 - heaviside(a)`.
pub fn co_heaviside(a: &Rational) -> HeavisideValue {
    heaviside(a).complement()
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((self.0).$method(rhs.0))
            }
        }
        impl $trait<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
        impl $trait<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational((self.0).$method(&rhs.0))
            }
        }
        impl $trait<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((&self.0).$method(rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        self.0 += &rhs.0;
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        self.0 -= &rhs.0;
    }
}

impl MulAssign<&Rational> for Rational {
    fn mul_assign(&mut self, rhs: &Rational) {
        self.0 *= &rhs.0;
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

/// Parse error for the `p/q` text form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseRationalError(pub String);

impl fmt::Display for ParseRationalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid rational literal: {}", self.0)
    }
}

impl std::error::Error for ParseRationalError {}

impl FromStr for Rational {
    type Err = ParseRationalError;

    /// Accepts `p` or `p/q` with optional leading sign; `q` must be nonzero.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || ParseRationalError(s.to_string());
        match s.split_once('/') {
            None => {
                let n = BigInt::from_str(s).map_err(|_| bad())?;
                Ok(Rational(BigRational::from_integer(n)))
            }
            Some((p, q)) => {
                let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
                let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
                if q.is_zero() {
                    return Err(bad());
                }
                Ok(Rational(BigRational::new(p, q)))
            }
        }
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_int(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rat(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn meet_join_basic() {
        assert_eq!(meet(&rat(1, 1), &rat(2, 1)), rat(1, 1));
        assert_eq!(join(&rat(1, 1), &rat(2, 1)), rat(2, 1));
        // -3/2 vs -3/2 + 1/7 = -19/14
        let a = rat(-3, 2);
        let b = &a + &rat(1, 7);
        assert_eq!(b, rat(-19, 14));
        assert_eq!(join(&a, &b), rat(-19, 14));
        assert_eq!(meet(&a, &b), rat(-3, 2));
    }

    #[test]
    fn pos_neg_parts() {
        assert_eq!(rat(-2, 1).pos_part(), rat(0, 1));
        assert_eq!(rat(-2, 1).neg_part(), rat(-2, 1));
        assert_eq!(Rational::zero().pos_part(), Rational::zero());
        assert_eq!(Rational::zero().neg_part(), Rational::zero());
        assert_eq!(rat(5, 3).pos_part(), rat(5, 3));
        assert_eq!(rat(5, 3).neg_part(), Rational::zero());
    }

    #[test]
    fn heaviside_left_continuous() {
        assert_eq!(heaviside(&Rational::zero()), HeavisideValue::ZERO);
        assert_eq!(heaviside(&rat(3, 2)), HeavisideValue::ONE);
        assert_eq!(co_heaviside(&rat(3, 2)), HeavisideValue::ZERO);
        assert_eq!(co_heaviside(&Rational::zero()), HeavisideValue::ONE);
    }

    #[test]
    fn co_heaviside_multiplicative_on_grid() {
        // co_heaviside(a) * co_heaviside(b) = co_heaviside(max(a, b)),
        // including the (0, 0) corner that rules out the symmetric value.
        for i in -5..5i64 {
            for j in -5..5i64 {
                let a = rat(i, 2);
                let b = rat(j, 2);
                assert_eq!(
                    co_heaviside(&a) * co_heaviside(&b),
                    co_heaviside(&join(&a, &b)),
                    "a={a} b={b}"
                );
            }
        }
    }

    #[test]
    fn display_and_parse() {
        assert_eq!(rat(-19, 14).to_string(), "-19/14");
        assert_eq!(rat(6, 3).to_string(), "2");
        assert_eq!("7/2".parse::<Rational>().unwrap(), rat(7, 2));
        assert_eq!("-4".parse::<Rational>().unwrap(), rat(-4, 1));
        assert!("1/0".parse::<Rational>().is_err());
        assert!("x".parse::<Rational>().is_err());
    }

    fn arb_rational() -> impl Strategy<Value = Rational> {
        (-50i64..50, 1i64..20).prop_map(|(n, d)| Rational::new(n, d))
    }

    proptest! {
        #[test]
        fn exchange_law(a in arb_rational(), b in arb_rational()) {
            prop_assert_eq!(join(&a, &b) + meet(&a, &b), &a + &b);
        }

        #[test]
        fn join_idempotent(a in arb_rational()) {
            prop_assert_eq!(join(&a, &a), a);
        }

        #[test]
        fn parts_recover(a in arb_rational()) {
            prop_assert_eq!(a.pos_part() + a.neg_part(), a.clone());
            prop_assert_eq!(a.pos_part() - a.neg_part(), a.abs());
        }

        #[test]
        fn heaviside_idempotent_valued(a in arb_rational()) {
            let h = heaviside(&a);
            prop_assert_eq!(h * h, h);
        }

        #[test]
        fn co_heaviside_multiplicative(a in arb_rational(), b in arb_rational()) {
            prop_assert_eq!(
                co_heaviside(&a) * co_heaviside(&b),
                co_heaviside(&join(&a, &b))
            );
        }

        #[test]
        fn roundtrip(a in arb_rational()) {
            prop_assert_eq!(a.to_string().parse::<Rational>().unwrap(), a);
        }
    }
}
