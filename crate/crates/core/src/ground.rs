//! The ground algebra: rational-coefficient polynomials in one variable with
//! derivation `d/dx`, integration from 0, shifts `f(x) -> f(x+a)` and
//! evaluation characters. Everything downstream (piecewise, distributional,
//! bivariate) takes its coefficients here.

use crate::scalars::Rational;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

/// Element of the ground algebra: a polynomial stored densely by ascending
/// power, with no trailing zero coefficient. The zero polynomial is the
/// empty coefficient list.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct GroundElem {
    coeffs: Vec<Rational>,
}

impl GroundElem {
    pub fn zero() -> Self {
        GroundElem { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        GroundElem::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        let mut g = GroundElem { coeffs: vec![c] };
        g.normalize();
        g
    }

    /// The identity polynomial `x` (the integral of 1).
    pub fn x() -> Self {
        GroundElem {
            coeffs: vec![Rational::zero(), Rational::one()],
        }
    }

    /// `c * x^k`.
    pub fn monomial(c: Rational, k: usize) -> Self {
        if c.is_zero() {
            return GroundElem::zero();
        }
        let mut coeffs = vec![Rational::zero(); k + 1];
        coeffs[k] = c;
        GroundElem { coeffs }
    }

    pub fn from_coeffs(coeffs: Vec<Rational>) -> Self {
        let mut g = GroundElem { coeffs };
        g.normalize();
        g
    }

    /// Ascending-power coefficient slice (no trailing zeros).
    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    /// Degree of the polynomial; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading_coeff(&self) -> Option<&Rational> {
        self.coeffs.last()
    }

    pub fn constant_term(&self) -> Rational {
        self.coeffs.first().cloned().unwrap_or_else(Rational::zero)
    }

    fn normalize(&mut self) {
        while matches!(self.coeffs.last(), Some(c) if c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn scalar_mul(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return GroundElem::zero();
        }
        GroundElem {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    /// Derivation `d/dx`. Satisfies the Leibniz rule; its kernel is the
    /// constants.
    pub fn derive(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return GroundElem::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * &Rational::from_int(k as i64))
            .collect();
        GroundElem { coeffs }
    }

    /// k-th derivative.
    pub fn derive_n(&self, k: usize) -> Self {
        let mut g = self.clone();
        for _ in 0..k {
            g = g.derive();
        }
        g
    }

    /// Integration from 0: the antiderivative with zero constant term.
    /// Section of `derive`; its image is the kernel of evaluation at 0.
    pub fn integrate(&self) -> Self {
        if self.is_zero() {
            return GroundElem::zero();
        }
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(Rational::zero());
        for (k, c) in self.coeffs.iter().enumerate() {
            coeffs.push(c / &Rational::from_int(k as i64 + 1));
        }
        GroundElem { coeffs }
    }

    /// Shifted integral: the antiderivative of `self` vanishing at `c`
    /// (`integrate` minus its value at `c`).
    pub fn integrate_from(&self, c: &Rational) -> Self {
        let antider = self.integrate();
        let at_c = antider.evaluate(c);
        &antider - &GroundElem::constant(at_c)
    }

    /// Definite integral of `self` from `c` to `d`.
    pub fn definite_integral(&self, c: &Rational, d: &Rational) -> Rational {
        let antider = self.integrate();
        antider.evaluate(d) - antider.evaluate(c)
    }

    /// Substitution `x -> c` (the evaluation character at `c`).
    pub fn evaluate(&self, c: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for coeff in self.coeffs.iter().rev() {
            acc = acc * c + coeff;
        }
        acc
    }

    /// Shift map `f(x) -> f(x + a)`, an algebra automorphism commuting with
    /// the derivation.
    pub fn shift(&self, a: &Rational) -> Self {
        if a.is_zero() || self.is_zero() {
            return self.clone();
        }
        // Expand (x + a)^k by running Horner on the polynomial ring.
        let mut acc = GroundElem::zero();
        let x_plus_a = GroundElem::from_coeffs(vec![a.clone(), Rational::one()]);
        for coeff in self.coeffs.iter().rev() {
            acc = &(&acc * &x_plus_a) + &GroundElem::constant(coeff.clone());
        }
        acc
    }

    pub fn pow(&self, n: usize) -> Self {
        let mut acc = GroundElem::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Exact polynomial division; `None` if `other` does not divide `self`.
    pub fn div_exact(&self, other: &GroundElem) -> Option<GroundElem> {
        if other.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(GroundElem::zero());
        }
        let mut rem = self.clone();
        let dd = other.degree().unwrap();
        let lead = other.leading_coeff().unwrap().clone();
        let mut quot = vec![Rational::zero(); self.coeffs.len()];
        while !rem.is_zero() {
            let rd = rem.degree().unwrap();
            if rd < dd {
                return None;
            }
            let factor = rem.leading_coeff().unwrap() / &lead;
            quot[rd - dd] = factor.clone();
            let sub = other.scalar_mul(&factor);
            let shifted = GroundElem::monomial(Rational::one(), rd - dd);
            rem = &rem - &(&sub * &shifted);
        }
        Some(GroundElem::from_coeffs(quot))
    }
}

/// Evaluation character at a point: the algebra homomorphism substituting
/// the point for the variable. Evaluation at 0 annihilates the image of
/// `integrate`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Character {
    pub point: Rational,
}

impl Character {
    pub fn at(point: Rational) -> Self {
        Character { point }
    }

    pub fn apply(&self, f: &GroundElem) -> Rational {
        f.evaluate(&self.point)
    }
}

impl Add for &GroundElem {
    type Output = GroundElem;
    fn add(self, rhs: &GroundElem) -> GroundElem {
        let (long, short) = if self.coeffs.len() >= rhs.coeffs.len() {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let mut coeffs = long.coeffs.clone();
        for (i, c) in short.coeffs.iter().enumerate() {
            coeffs[i] += c;
        }
        GroundElem::from_coeffs(coeffs)
    }
}

impl Sub for &GroundElem {
    type Output = GroundElem;
    fn sub(self, rhs: &GroundElem) -> GroundElem {
        self + &(-rhs)
    }
}

impl Neg for &GroundElem {
    type Output = GroundElem;
    fn neg(self) -> GroundElem {
        GroundElem {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Mul for &GroundElem {
    type Output = GroundElem;
    fn mul(self, rhs: &GroundElem) -> GroundElem {
        if self.is_zero() || rhs.is_zero() {
            return GroundElem::zero();
        }
        let mut coeffs = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += &(a * b);
            }
        }
        GroundElem::from_coeffs(coeffs)
    }
}

impl AddAssign<&GroundElem> for GroundElem {
    fn add_assign(&mut self, rhs: &GroundElem) {
        *self = &*self + rhs;
    }
}

impl fmt::Display for GroundElem {
    /// Canonical form in descending powers, e.g. `x^2 - 3/2*x + 1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let (sign, mag) = if c.is_negative() {
                ("-", -c)
            } else {
                ("+", c.clone())
            };
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
                first = false;
            } else {
                write!(f, " {} ", sign)?;
            }
            let unit_coeff = mag.is_one();
            match (k, unit_coeff) {
                (0, _) => write!(f, "{}", mag)?,
                (1, true) => write!(f, "x")?,
                (1, false) => write!(f, "{}*x", mag)?,
                (_, true) => write!(f, "x^{}", k)?,
                (_, false) => write!(f, "{}*x^{}", mag, k)?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for GroundElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
