//! Bivariate distributions in the variables `x` and `xi`: tensor products
//! of the univariate structures plus the diagonal family `H(x-xi)`,
//! `delta(x-xi)`, `delta'(x-xi)`, ... that houses Green's functions.
//!
//! An element decomposes into four parts:
//!
//! * `pw2` - bivariate piecewise terms `u(x,xi) * H_a(x) * H_b(xi)`;
//! * `tens_x` - Dirac terms in x, `lambda(xi) * delta^(i)(x-a)`, with
//!   piecewise-in-xi coefficients;
//! * `tens_xi` - symmetrically, `lambda(x) * delta^(i)(xi-b)`;
//! * `diag` - diagonal terms `u(x,xi) * [H_b(xi)] * H^(n)(x-xi)` where
//!   `H^(0) = H(x-xi)` and `H^(n+1) = delta^(n)(x-xi)`.
//!
//! Diagonal coefficients are stored right-focused: products of `H_a(x)`
//! with `H(x-xi)` are rewritten through the gluing relation
//! `H(x-a) H(x-xi) = H(x-a) H(a-xi) + H(x-xi) H(xi-a)`
//! on the fly (see [`BivDistElem::diagonal_normalize`]). The relation is
//! never differentiated. An x-side Heaviside landing on a diagonal *Dirac*
//! has no normal form and is refused, as are the other products that would
//! force a Leibniz rule onto Heavisides.

use crate::error::{AlgebraError, Result};
use crate::ground::GroundElem;
use crate::piecewise::PiecewiseElem;
use crate::scalars::{co_heaviside, heaviside, Rational};
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

/// Which of the two variables an operator acts on.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Axis {
    X,
    Xi,
}

impl Axis {
    pub fn other(self) -> Axis {
        match self {
            Axis::X => Axis::Xi,
            Axis::Xi => Axis::X,
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axis::X => write!(f, "x"),
            Axis::Xi => write!(f, "xi"),
        }
    }
}

// ---------------------------------------------------------------------------
// Bivariate polynomials
// ---------------------------------------------------------------------------

/// Sparse polynomial in `x` and `xi` over the rationals.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct BivGround {
    /// `(x power, xi power) -> coefficient`, all nonzero.
    terms: BTreeMap<(u32, u32), Rational>,
}

impl BivGround {
    pub fn zero() -> Self {
        BivGround::default()
    }

    pub fn one() -> Self {
        BivGround::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        let mut g = BivGround::zero();
        g.add_term(0, 0, c);
        g
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &Rational)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, i: u32, j: u32, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry((i, j)) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let sum = &*e.get() + &c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    /// Embed a univariate polynomial along the given axis.
    pub fn from_ground(f: &GroundElem, axis: Axis) -> Self {
        let mut g = BivGround::zero();
        for (k, c) in f.coeffs().iter().enumerate() {
            match axis {
                Axis::X => g.add_term(k as u32, 0, c.clone()),
                Axis::Xi => g.add_term(0, k as u32, c.clone()),
            }
        }
        g
    }

    /// The polynomial as univariate in `axis`, if it does not involve the
    /// other variable.
    pub fn as_ground(&self, axis: Axis) -> Option<GroundElem> {
        let mut coeffs: Vec<Rational> = Vec::new();
        for ((i, j), c) in &self.terms {
            let (own, foreign) = match axis {
                Axis::X => (*i, *j),
                Axis::Xi => (*j, *i),
            };
            if foreign != 0 {
                return None;
            }
            if coeffs.len() <= own as usize {
                coeffs.resize(own as usize + 1, Rational::zero());
            }
            coeffs[own as usize] = c.clone();
        }
        Some(GroundElem::from_coeffs(coeffs))
    }

    pub fn scalar_mul(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return BivGround::zero();
        }
        BivGround {
            terms: self
                .terms
                .iter()
                .map(|(k, v)| (*k, v * c))
                .collect(),
        }
    }

    pub fn mul(&self, rhs: &BivGround) -> Self {
        let mut out = BivGround::zero();
        for ((i1, j1), c1) in &self.terms {
            for ((i2, j2), c2) in &rhs.terms {
                out.add_term(i1 + i2, j1 + j2, c1 * c2);
            }
        }
        out
    }

    /// Partial derivative along an axis.
    pub fn derive(&self, axis: Axis) -> Self {
        let mut out = BivGround::zero();
        for ((i, j), c) in &self.terms {
            match axis {
                Axis::X if *i > 0 => {
                    out.add_term(i - 1, *j, c * &Rational::from_int(*i as i64))
                }
                Axis::Xi if *j > 0 => {
                    out.add_term(*i, j - 1, c * &Rational::from_int(*j as i64))
                }
                _ => {}
            }
        }
        out
    }

    /// Partial antiderivative along an axis, vanishing where that axis is 0.
    pub fn integrate(&self, axis: Axis) -> Self {
        let mut out = BivGround::zero();
        for ((i, j), c) in &self.terms {
            match axis {
                Axis::X => out.add_term(i + 1, *j, c / &Rational::from_int(*i as i64 + 1)),
                Axis::Xi => out.add_term(*i, j + 1, c / &Rational::from_int(*j as i64 + 1)),
            }
        }
        out
    }

    /// Substitute the value `c` for the axis variable.
    pub fn eval_axis(&self, axis: Axis, c: &Rational) -> Self {
        let mut out = BivGround::zero();
        for ((i, j), v) in &self.terms {
            let (own, keep_i, keep_j) = match axis {
                Axis::X => (*i, 0u32, *j),
                Axis::Xi => (*j, *i, 0u32),
            };
            let mut factor = Rational::one();
            for _ in 0..own {
                factor = &factor * c;
            }
            out.add_term(keep_i, keep_j, v * &factor);
        }
        out
    }

    /// Swap the two variables.
    pub fn swap(&self) -> Self {
        BivGround {
            terms: self.terms.iter().map(|((i, j), c)| ((*j, *i), c.clone())).collect(),
        }
    }

    /// Substitute `x := xi`, collapsing onto a pure-xi polynomial.
    pub fn collapse_to_xi(&self) -> Self {
        let mut out = BivGround::zero();
        for ((i, j), c) in &self.terms {
            out.add_term(0, i + j, c.clone());
        }
        out
    }

    /// Substitute `xi := x`.
    pub fn collapse_to_x(&self) -> Self {
        let mut out = BivGround::zero();
        for ((i, j), c) in &self.terms {
            out.add_term(i + j, 0, c.clone());
        }
        out
    }

    pub fn evaluate(&self, x0: &Rational, xi0: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for ((i, j), c) in &self.terms {
            let mut term = c.clone();
            for _ in 0..*i {
                term = &term * x0;
            }
            for _ in 0..*j {
                term = &term * xi0;
            }
            acc += &term;
        }
        acc
    }
}

impl Add for &BivGround {
    type Output = BivGround;
    fn add(self, rhs: &BivGround) -> BivGround {
        let mut out = self.clone();
        for ((i, j), c) in &rhs.terms {
            out.add_term(*i, *j, c.clone());
        }
        out
    }
}

impl Sub for &BivGround {
    type Output = BivGround;
    fn sub(self, rhs: &BivGround) -> BivGround {
        self + &(-rhs)
    }
}

impl Neg for &BivGround {
    type Output = BivGround;
    fn neg(self) -> BivGround {
        BivGround {
            terms: self.terms.iter().map(|(k, c)| (*k, -c)).collect(),
        }
    }
}

impl fmt::Display for BivGround {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for ((i, j), c) in self.terms.iter().rev() {
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
            let mut factors: Vec<String> = Vec::new();
            if !mag.is_one() || (*i == 0 && *j == 0) {
                factors.push(mag.to_string());
            }
            match i {
                0 => {}
                1 => factors.push("x".into()),
                _ => factors.push(format!("x^{}", i)),
            }
            match j {
                0 => {}
                1 => factors.push("xi".into()),
                _ => factors.push(format!("xi^{}", j)),
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

impl fmt::Debug for BivGround {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

// ---------------------------------------------------------------------------
// Bivariate piecewise elements
// ---------------------------------------------------------------------------

/// Key of a bivariate piecewise term: optional jump point of an `H_.(x)`
/// factor and of an `H_.(xi)` factor.
pub type PwKey = (Option<Rational>, Option<Rational>);

/// Element of the bivariate piecewise ring: a sum of terms
/// `u(x,xi) * [H_a(x)] * [H_b(xi)]`.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct BivPiecewise {
    terms: BTreeMap<PwKey, BivGround>,
}

impl BivPiecewise {
    pub fn zero() -> Self {
        BivPiecewise::default()
    }

    pub fn one() -> Self {
        BivPiecewise::from_ground(BivGround::one())
    }

    pub fn from_ground(g: BivGround) -> Self {
        let mut p = BivPiecewise::zero();
        p.add_term((None, None), g);
        p
    }

    pub fn term(key: PwKey, coef: BivGround) -> Self {
        let mut p = BivPiecewise::zero();
        p.add_term(key, coef);
        p
    }

    /// Embed a univariate piecewise element along the given axis.
    pub fn from_piecewise(p: &PiecewiseElem, axis: Axis) -> Self {
        let mut out = BivPiecewise::from_ground(BivGround::from_ground(p.base(), axis));
        for (a, coef) in p.steps() {
            let key = match axis {
                Axis::X => (Some(a.clone()), None),
                Axis::Xi => (None, Some(a.clone())),
            };
            out.add_term(key, BivGround::from_ground(coef, axis));
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PwKey, &BivGround)> {
        self.terms.iter()
    }

    /// True when no term carries a Heaviside factor in `axis`.
    pub fn is_free_of_steps(&self, axis: Axis) -> bool {
        self.terms.keys().all(|(xa, xb)| match axis {
            Axis::X => xa.is_none(),
            Axis::Xi => xb.is_none(),
        })
    }

    fn add_term(&mut self, key: PwKey, coef: BivGround) {
        if coef.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(key) {
            Entry::Vacant(e) => {
                e.insert(coef);
            }
            Entry::Occupied(mut e) => {
                let sum = &*e.get() + &coef;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn scalar_mul(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return BivPiecewise::zero();
        }
        BivPiecewise {
            terms: self
                .terms
                .iter()
                .map(|(k, v)| (k.clone(), v.scalar_mul(c)))
                .collect(),
        }
    }

    pub fn ground_mul(&self, g: &BivGround) -> Self {
        let mut out = BivPiecewise::zero();
        for (key, coef) in &self.terms {
            out.add_term(key.clone(), coef.mul(g));
        }
        out
    }

    /// Ring product under the per-axis join rules.
    pub fn mul(&self, rhs: &BivPiecewise) -> Self {
        let mut out = BivPiecewise::zero();
        for ((a1, b1), u) in &self.terms {
            for ((a2, b2), v) in &rhs.terms {
                out.add_term((join_slot(a1, a2), join_slot(b1, b2)), u.mul(v));
            }
        }
        out
    }

    /// Rota-Baxter integral along `axis`, treating the other axis's
    /// Heavisides and variable as constants (per-axis form of the piecewise
    /// integral).
    pub fn integrate(&self, axis: Axis) -> Self {
        let mut out = BivPiecewise::zero();
        for ((xa, xb), u) in &self.terms {
            let antider = u.integrate(axis);
            let own_jump = match axis {
                Axis::X => xa,
                Axis::Xi => xb,
            };
            match own_jump {
                None => out.add_term((xa.clone(), xb.clone()), antider),
                Some(a) => {
                    let at_a = antider.eval_axis(axis, a);
                    out.add_term((xa.clone(), xb.clone()), &antider - &at_a);
                    if co_heaviside(a).is_one() {
                        let dropped = match axis {
                            Axis::X => (None, xb.clone()),
                            Axis::Xi => (xa.clone(), None),
                        };
                        out.add_term(dropped, at_a);
                    }
                }
            }
        }
        out
    }

    /// Evaluation character along `axis` at `c`: substitutes into the
    /// polynomial part and sends the axis's `H_a` to `co_heaviside(a - c)`.
    pub fn eval_axis(&self, axis: Axis, c: &Rational) -> Self {
        let mut out = BivPiecewise::zero();
        for ((xa, xb), u) in &self.terms {
            let (own, keep) = match axis {
                Axis::X => (xa, xb),
                Axis::Xi => (xb, xa),
            };
            if let Some(a) = own {
                if !co_heaviside(&(a - c)).is_one() {
                    continue;
                }
            }
            let coef = u.eval_axis(axis, c);
            let key = match axis {
                Axis::X => (None, keep.clone()),
                Axis::Xi => (keep.clone(), None),
            };
            out.add_term(key, coef);
        }
        out
    }

    pub fn swap(&self) -> Self {
        BivPiecewise {
            terms: self
                .terms
                .iter()
                .map(|((a, b), u)| ((b.clone(), a.clone()), u.swap()))
                .collect(),
        }
    }

    /// Left-continuous pointwise value.
    pub fn eval_at(&self, x0: &Rational, xi0: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for ((xa, xb), u) in &self.terms {
            let on_x = xa
                .as_ref()
                .map_or(true, |a| heaviside(&(x0 - a)).is_one());
            let on_xi = xb
                .as_ref()
                .map_or(true, |b| heaviside(&(xi0 - b)).is_one());
            if on_x && on_xi {
                acc += &u.evaluate(x0, xi0);
            }
        }
        acc
    }

    /// Interval reduction on both axes: `H_a` with `a <= alpha` becomes 1,
    /// with `a >= beta` the term is dropped.
    pub fn reduce_mod_interval(&self, alpha: &Rational, beta: &Rational) -> Self {
        let mut out = BivPiecewise::zero();
        for ((xa, xb), u) in &self.terms {
            let xa = match reduce_slot(xa, alpha, beta) {
                Some(s) => s,
                None => continue,
            };
            let xb = match reduce_slot(xb, alpha, beta) {
                Some(s) => s,
                None => continue,
            };
            out.add_term((xa, xb), u.clone());
        }
        out
    }
}

fn join_slot(a: &Option<Rational>, b: &Option<Rational>) -> Option<Rational> {
    match (a, b) {
        (None, None) => None,
        (Some(a), None) => Some(a.clone()),
        (None, Some(b)) => Some(b.clone()),
        (Some(a), Some(b)) => Some(a.max(b).clone()),
    }
}

/// `None` = drop the term, `Some(slot)` = keep with this (possibly erased)
/// Heaviside slot.
fn reduce_slot(
    slot: &Option<Rational>,
    alpha: &Rational,
    beta: &Rational,
) -> Option<Option<Rational>> {
    match slot {
        None => Some(None),
        Some(a) if a >= beta => None,
        Some(a) if a <= alpha => Some(None),
        Some(a) => Some(Some(a.clone())),
    }
}

impl Add for &BivPiecewise {
    type Output = BivPiecewise;
    fn add(self, rhs: &BivPiecewise) -> BivPiecewise {
        let mut out = self.clone();
        for (key, coef) in &rhs.terms {
            out.add_term(key.clone(), coef.clone());
        }
        out
    }
}

impl Sub for &BivPiecewise {
    type Output = BivPiecewise;
    fn sub(self, rhs: &BivPiecewise) -> BivPiecewise {
        self + &(-rhs)
    }
}

impl Neg for &BivPiecewise {
    type Output = BivPiecewise;
    fn neg(self) -> BivPiecewise {
        BivPiecewise {
            terms: self.terms.iter().map(|(k, v)| (k.clone(), -v)).collect(),
        }
    }
}

impl fmt::Debug for BivPiecewise {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for ((xa, xb), u) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({})", u)?;
            if let Some(a) = xa {
                write!(f, "*H(x-({}))", a)?;
            }
            if let Some(b) = xb {
                write!(f, "*H(xi-({}))", b)?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Bivariate distribution elements
// ---------------------------------------------------------------------------

/// Element of the bivariate distribution module. See the module docs for
/// the four-part decomposition and the basis conventions.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct BivDistElem {
    pw2: BivPiecewise,
    /// `(a, i) -> lambda(xi)`: terms `lambda(xi) * delta^(i)(x-a)`.
    tens_x: BTreeMap<(Rational, u32), PiecewiseElem>,
    /// `(b, i) -> lambda(x)`: terms `lambda(x) * delta^(i)(xi-b)`.
    tens_xi: BTreeMap<(Rational, u32), PiecewiseElem>,
    /// `n -> coefficient` of `H^(n)(x-xi)`; coefficients never carry
    /// x-side Heaviside factors.
    diag: BTreeMap<u32, BivPiecewise>,
}

impl BivDistElem {
    pub fn zero() -> Self {
        BivDistElem::default()
    }

    pub fn from_pw2(pw2: BivPiecewise) -> Self {
        BivDistElem {
            pw2,
            ..BivDistElem::default()
        }
    }

    pub fn from_biv_ground(g: BivGround) -> Self {
        BivDistElem::from_pw2(BivPiecewise::from_ground(g))
    }

    pub fn from_ground(f: &GroundElem, axis: Axis) -> Self {
        BivDistElem::from_biv_ground(BivGround::from_ground(f, axis))
    }

    pub fn from_piecewise(p: &PiecewiseElem, axis: Axis) -> Self {
        BivDistElem::from_pw2(BivPiecewise::from_piecewise(p, axis))
    }

    /// Embed a univariate distribution element along `axis`.
    pub fn from_dist(d: &crate::dist::DistElem, axis: Axis) -> Self {
        let mut out = BivDistElem::from_piecewise(d.piecewise_part(), axis);
        for ((a, k), c) in d.dirac_terms() {
            out = &out
                + &BivDistElem::tens_dirac(axis, a.clone(), *k)
                    .scalar_mul_elem(c);
        }
        out
    }

    /// The diagonal Heaviside `H(x-xi)`.
    pub fn diag_heaviside() -> Self {
        let mut out = BivDistElem::zero();
        out.add_diag(0, BivPiecewise::one());
        out
    }

    /// The diagonal Dirac derivative `delta^(k)(x-xi)`.
    pub fn diag_dirac(k: u32) -> Self {
        let mut out = BivDistElem::zero();
        out.add_diag(k + 1, BivPiecewise::one());
        out
    }

    /// `delta^(i)(x-a)` (axis = X) or `delta^(i)(xi-a)` (axis = Xi).
    pub fn tens_dirac(axis: Axis, a: Rational, i: u32) -> Self {
        let mut out = BivDistElem::zero();
        match axis {
            Axis::X => out.add_tens_x(a, i, PiecewiseElem::one()),
            Axis::Xi => out.add_tens_xi(a, i, PiecewiseElem::one()),
        }
        out
    }

    pub fn pw2_part(&self) -> &BivPiecewise {
        &self.pw2
    }

    pub fn tens_x_terms(&self) -> impl Iterator<Item = (&(Rational, u32), &PiecewiseElem)> {
        self.tens_x.iter()
    }

    pub fn tens_xi_terms(&self) -> impl Iterator<Item = (&(Rational, u32), &PiecewiseElem)> {
        self.tens_xi.iter()
    }

    pub fn diag_terms(&self) -> impl Iterator<Item = (&u32, &BivPiecewise)> {
        self.diag.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.pw2.is_zero()
            && self.tens_x.is_empty()
            && self.tens_xi.is_empty()
            && self.diag.is_empty()
    }

    /// True when the element lies in the bivariate piecewise subring
    /// (no tensorial Diracs, no diagonal Diracs).
    pub fn is_piecewise(&self) -> bool {
        self.tens_x.is_empty()
            && self.tens_xi.is_empty()
            && self.diag.keys().all(|n| *n == 0)
    }

    pub fn has_any_dirac(&self) -> bool {
        !self.tens_x.is_empty()
            || !self.tens_xi.is_empty()
            || self.diag.keys().any(|n| *n >= 1)
    }

    fn add_tens_x(&mut self, a: Rational, i: u32, coef: PiecewiseElem) {
        if coef.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.tens_x.entry((a, i)) {
            Entry::Vacant(e) => {
                e.insert(coef);
            }
            Entry::Occupied(mut e) => {
                let sum = &*e.get() + &coef;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    fn add_tens_xi(&mut self, b: Rational, i: u32, coef: PiecewiseElem) {
        if coef.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.tens_xi.entry((b, i)) {
            Entry::Vacant(e) => {
                e.insert(coef);
            }
            Entry::Occupied(mut e) => {
                let sum = &*e.get() + &coef;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    fn add_diag(&mut self, n: u32, coef: BivPiecewise) {
        if coef.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.diag.entry(n) {
            Entry::Vacant(e) => {
                e.insert(coef);
            }
            Entry::Occupied(mut e) => {
                let sum = &*e.get() + &coef;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn scalar_mul_elem(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return BivDistElem::zero();
        }
        BivDistElem {
            pw2: self.pw2.scalar_mul(c),
            tens_x: self
                .tens_x
                .iter()
                .map(|(k, v)| (k.clone(), v.scalar_mul(c)))
                .collect(),
            tens_xi: self
                .tens_xi
                .iter()
                .map(|(k, v)| (k.clone(), v.scalar_mul(c)))
                .collect(),
            diag: self
                .diag
                .iter()
                .map(|(k, v)| (*k, v.scalar_mul(c)))
                .collect(),
        }
    }

    /// Rewrite level-0 diagonal coefficients so no x-side Heaviside factor
    /// remains, via `H_a(x) H(x-xi) = H_a(x) (1 - H_a(xi)) + H_a(xi) H(x-xi)`
    /// (spilling the first summand into the piecewise part). Idempotent.
    pub fn diagonal_normalize(&self) -> Self {
        let mut out = self.clone();
        if let Some(coef0) = out.diag.remove(&0) {
            let mut clean = BivPiecewise::zero();
            for ((xa, xb), u) in coef0.terms() {
                match xa {
                    None => clean.add_term((None, xb.clone()), u.clone()),
                    Some(a) => {
                        // spill: u H_a(x) [H_b(xi)] (1 - H_a(xi))
                        out.pw2
                            .add_term((Some(a.clone()), xb.clone()), u.clone());
                        out.pw2.add_term(
                            (Some(a.clone()), join_slot(xb, &Some(a.clone()))),
                            -u,
                        );
                        // keep: u H_(a v b)(xi) H(x-xi)
                        clean.add_term(
                            (None, join_slot(xb, &Some(a.clone()))),
                            u.clone(),
                        );
                    }
                }
            }
            out.add_diag(0, clean);
        }
        out
    }

    /// Module action of a bivariate piecewise factor, with the undefined
    /// Heaviside-times-Dirac products refused.
    pub fn mul_pw2(&self, p: &BivPiecewise) -> Result<Self> {
        let mut out = BivDistElem::from_pw2(self.pw2.mul(p));

        for ((a, i), lambda) in &self.tens_x {
            for ((xa, xb), u) in p.terms() {
                if xa.is_some() {
                    return Err(AlgebraError::ForbiddenProduct(format!(
                        "H(x-{}) times delta^({})(x-{})",
                        xa.as_ref().unwrap(),
                        i,
                        a
                    )));
                }
                // sift the x-dependence of u onto the Dirac at a
                for (order, xi_poly) in sift_biv_coeff(u, a, *i, Axis::X) {
                    let mut factor = PiecewiseElem::from_ground(xi_poly);
                    if let Some(b) = xb {
                        factor = &factor * &PiecewiseElem::heaviside(b.clone());
                    }
                    out.add_tens_x(a.clone(), order, &factor * lambda);
                }
            }
        }

        for ((b, i), lambda) in &self.tens_xi {
            for ((xa, xb), u) in p.terms() {
                if xb.is_some() {
                    return Err(AlgebraError::ForbiddenProduct(format!(
                        "H(xi-{}) times delta^({})(xi-{})",
                        xb.as_ref().unwrap(),
                        i,
                        b
                    )));
                }
                for (order, x_poly) in sift_biv_coeff(u, b, *i, Axis::Xi) {
                    let mut factor = PiecewiseElem::from_ground(x_poly);
                    if let Some(a) = xa {
                        factor = &factor * &PiecewiseElem::heaviside(a.clone());
                    }
                    out.add_tens_xi(b.clone(), order, &factor * lambda);
                }
            }
        }

        for (n, coef) in &self.diag {
            let prod = coef.mul(p);
            if *n >= 1 && !prod.is_free_of_steps(Axis::X) {
                return Err(AlgebraError::ForbiddenProduct(format!(
                    "x-side Heaviside times diagonal Dirac of order {}",
                    n - 1
                )));
            }
            out.add_diag(*n, prod);
        }

        Ok(out.diagonal_normalize())
    }

    /// Ring product within the bivariate piecewise subring. Refused when
    /// either factor has Dirac content.
    pub fn mul_p2(&self, rhs: &BivDistElem) -> Result<Self> {
        if self.has_any_dirac() || rhs.has_any_dirac() {
            return Err(AlgebraError::ForbiddenProduct(
                "product of two distribution elements".into(),
            ));
        }
        // pw2 x pw2 and pw2 x diag0 both ways, diag0 x diag0 via HH = H.
        let mut out = rhs.mul_pw2(&self.pw2)?;
        if let Some(cs) = self.diag.get(&0) {
            out = &out + &BivDistElem::from_pw2(rhs.pw2.mul(cs)).mul_diag0()?;
            if let Some(cr) = rhs.diag.get(&0) {
                let mut prod = BivDistElem::zero();
                prod.add_diag(0, cs.mul(cr));
                out = &out + &prod.diagonal_normalize();
            }
        }
        Ok(out)
    }

    /// Helper for `mul_p2`: reinterpret the piecewise part as a coefficient
    /// of `H(x-xi)` and normalize.
    fn mul_diag0(self) -> Result<Self> {
        let mut out = BivDistElem::zero();
        out.add_diag(0, self.pw2);
        Ok(out.diagonal_normalize())
    }

    /// Derivation along `axis`.
    ///
    /// On the diagonal it uses `d_x H^(n) = H^(n+1)` and
    /// `d_xi H^(n) = -H^(n+1)`; a piecewise coefficient sitting in the
    /// differentiated slot would require a Dirac-times-Dirac term and is
    /// refused.
    pub fn derive(&self, axis: Axis) -> Result<Self> {
        let mut out = BivDistElem::zero();

        // piecewise part: distributional derivative on the axis leg
        for ((xa, xb), u) in self.pw2.terms() {
            let (own, keep) = match axis {
                Axis::X => (xa, xb),
                Axis::Xi => (xb, xa),
            };
            let dkey = (xa.clone(), xb.clone());
            out.pw2.add_term(dkey, u.derive(axis));
            if let Some(a) = own {
                // H_a's derivative sifts the coefficient at a
                let restricted = u.eval_axis(axis, a);
                let coef = restricted
                    .as_ground(axis.other())
                    .expect("eval_axis removed the axis variable");
                let mut factor = PiecewiseElem::from_ground(coef);
                if let Some(k) = keep {
                    factor = &factor * &PiecewiseElem::heaviside(k.clone());
                }
                match axis {
                    Axis::X => out.add_tens_x(a.clone(), 0, factor),
                    Axis::Xi => out.add_tens_xi(a.clone(), 0, factor),
                }
            }
        }

        // tensorial parts: the axis's own Diracs bump their order; foreign
        // Diracs are constants whose piecewise coefficient derives by the
        // extension-by-zero rule (this leg carries the piecewise structure,
        // matching the integral, so that d . I stays the identity).
        for ((a, i), lambda) in &self.tens_x {
            match axis {
                Axis::X => out.add_tens_x(a.clone(), i + 1, lambda.clone()),
                Axis::Xi => out.add_tens_x(a.clone(), *i, lambda.derive()),
            }
        }
        for ((b, i), lambda) in &self.tens_xi {
            match axis {
                Axis::Xi => out.add_tens_xi(b.clone(), i + 1, lambda.clone()),
                Axis::X => out.add_tens_xi(b.clone(), *i, lambda.derive()),
            }
        }

        // diagonal part
        for (n, coef) in &self.diag {
            for ((xa, xb), u) in coef.terms() {
                debug_assert!(xa.is_none());
                match axis {
                    Axis::X => {
                        out.add_diag(*n, BivPiecewise::term((None, xb.clone()), u.derive(Axis::X)));
                        out.add_diag(n + 1, BivPiecewise::term((None, xb.clone()), u.clone()));
                    }
                    Axis::Xi => {
                        if xb.is_some() {
                            return Err(AlgebraError::ForbiddenProduct(format!(
                                "d/dxi of H(xi-{}) factor on a diagonal generator",
                                xb.as_ref().unwrap()
                            )));
                        }
                        out.add_diag(*n, BivPiecewise::term((None, None), u.derive(Axis::Xi)));
                        out.add_diag(n + 1, BivPiecewise::term((None, None), -u));
                    }
                }
            }
        }

        Ok(out.diagonal_normalize())
    }

    /// Rota-Baxter integral along `axis`.
    pub fn integrate(&self, axis: Axis) -> Result<Self> {
        let mut out = BivDistElem::from_pw2(self.pw2.integrate(axis));

        // tensorial part with Diracs in the integration variable
        let (own, foreign) = match axis {
            Axis::X => (&self.tens_x, &self.tens_xi),
            Axis::Xi => (&self.tens_xi, &self.tens_x),
        };
        for ((a, i), lambda) in own {
            if *i == 0 {
                // I delta_a = H_a - co_heaviside(a)
                let step = match axis {
                    Axis::X => BivPiecewise::term(
                        (Some(a.clone()), None),
                        BivGround::one(),
                    ),
                    Axis::Xi => BivPiecewise::term(
                        (None, Some(a.clone())),
                        BivGround::one(),
                    ),
                };
                let lam2 = BivPiecewise::from_piecewise(lambda, axis.other());
                out.pw2 = &out.pw2 + &step.mul(&lam2);
                if co_heaviside(a).is_one() {
                    out.pw2 = &out.pw2 - &lam2;
                }
            } else {
                match axis {
                    Axis::X => out.add_tens_x(a.clone(), i - 1, lambda.clone()),
                    Axis::Xi => out.add_tens_xi(a.clone(), i - 1, lambda.clone()),
                }
            }
        }
        // foreign Diracs are constants; their piecewise coefficient
        // integrates in the piecewise extension of the integration variable
        for ((b, i), lambda) in foreign {
            match axis {
                Axis::X => out.add_tens_xi(b.clone(), *i, lambda.integrate()),
                Axis::Xi => out.add_tens_x(b.clone(), *i, lambda.integrate()),
            }
        }

        // diagonal part
        for (n, coef) in &self.diag {
            for ((xa, xb), u) in coef.terms() {
                debug_assert!(xa.is_none());
                match axis {
                    Axis::X => {
                        out = &out + &integrate_diag_x(u, xb, *n);
                    }
                    Axis::Xi => match xb {
                        None => {
                            out = &out + &integrate_diag_xi(u, *n)?;
                        }
                        Some(b) if *n == 0 => {
                            // move to the left-focused form first:
                            // H_b(xi) H = H_b(x) H - H_b(x) + H_b(x) H_b(xi),
                            // then integrate each piece (H_b(x) is constant).
                            let hbx = BivPiecewise::term(
                                (Some(b.clone()), None),
                                BivGround::one(),
                            );
                            let part1 = integrate_diag_xi(u, 0)?.mul_pw2(&hbx)?;
                            let rest = &BivPiecewise::term((Some(b.clone()), None), -u)
                                + &BivPiecewise::term(
                                    (Some(b.clone()), Some(b.clone())),
                                    u.clone(),
                                );
                            out = &(&out + &part1)
                                + &BivDistElem::from_pw2(rest.integrate(Axis::Xi));
                        }
                        Some(b) => {
                            return Err(AlgebraError::UnsupportedBasis(format!(
                                "xi-integral of H(xi-{}) times diagonal Dirac of order {}",
                                b,
                                n - 1
                            )));
                        }
                    },
                }
            }
        }

        Ok(out.diagonal_normalize())
    }

    /// Evaluation along `axis` at `a`; the result is free of that variable.
    pub fn evaluate(&self, axis: Axis, a: &Rational) -> Self {
        let mut out = BivDistElem::from_pw2(self.pw2.eval_axis(axis, a));

        // Diracs in the evaluated variable vanish; foreign Diracs keep their
        // coefficient evaluated.
        let (_own, foreign) = match axis {
            Axis::X => (&self.tens_x, &self.tens_xi),
            Axis::Xi => (&self.tens_xi, &self.tens_x),
        };
        for ((b, i), lambda) in foreign {
            let coef = PiecewiseElem::from_ground(GroundElem::constant(lambda.evaluate(a)));
            match axis {
                Axis::X => out.add_tens_xi(b.clone(), *i, coef),
                Axis::Xi => out.add_tens_x(b.clone(), *i, coef),
            }
        }

        // diagonal: H(x-xi) evaluates to a univariate Heaviside, Diracs to 0
        if let Some(coef) = self.diag.get(&0) {
            for ((xa, xb), u) in coef.terms() {
                debug_assert!(xa.is_none());
                match axis {
                    Axis::X => {
                        // H(x-xi) -> 1 - H_a(xi); H_b(xi) factors stay
                        let ue = u.eval_axis(Axis::X, a);
                        out.pw2.add_term((None, xb.clone()), ue.clone());
                        out.pw2.add_term(
                            (None, join_slot(xb, &Some(a.clone()))),
                            -&ue,
                        );
                    }
                    Axis::Xi => {
                        // H(x-xi) -> H_a(x); H_b(xi) factors evaluate
                        if let Some(b) = xb {
                            if !co_heaviside(&(b - a)).is_one() {
                                continue;
                            }
                        }
                        let ue = u.eval_axis(Axis::Xi, a);
                        out.pw2.add_term((Some(a.clone()), None), ue);
                    }
                }
            }
        }
        out
    }

    /// Definite module integral `(e_beta - e_alpha) . integrate` along
    /// `axis`; requires `alpha < beta`. The result is free of the
    /// integration variable.
    pub fn definite_integral(
        &self,
        axis: Axis,
        alpha: &Rational,
        beta: &Rational,
    ) -> Result<Self> {
        if alpha >= beta {
            return Err(AlgebraError::InvalidInterval(format!(
                "{} >= {}",
                alpha, beta
            )));
        }
        let full = self.integrate(axis)?;
        Ok(&full.evaluate(axis, beta) - &full.evaluate(axis, alpha))
    }

    /// Exchange automorphism swapping the two variables. Fails on diagonal
    /// Diracs with xi-side Heaviside coefficients, which would leave the
    /// right-focused basis.
    pub fn exchange(&self) -> Result<Self> {
        let mut out = BivDistElem::from_pw2(self.pw2.swap());
        for ((a, i), lambda) in &self.tens_x {
            out.add_tens_xi(a.clone(), *i, lambda.clone());
        }
        for ((b, i), lambda) in &self.tens_xi {
            out.add_tens_x(b.clone(), *i, lambda.clone());
        }
        for (n, coef) in &self.diag {
            for ((xa, xb), u) in coef.terms() {
                debug_assert!(xa.is_none());
                let swapped = u.swap();
                if *n == 0 {
                    // tau(H(x-xi)) = 1 - H(x-xi); H_b(xi) -> H_b(x)
                    out.pw2
                        .add_term((xb.clone(), None), swapped.clone());
                    out.add_diag(
                        0,
                        BivPiecewise::term((xb.clone(), None), -&swapped),
                    );
                } else {
                    if xb.is_some() {
                        return Err(AlgebraError::UnsupportedBasis(format!(
                            "exchange of H(xi-{}) times diagonal Dirac",
                            xb.as_ref().unwrap()
                        )));
                    }
                    // tau(delta^(k)(x-xi)) = (-1)^k delta^(k)(x-xi), k = n-1
                    let signed = if (n - 1) % 2 == 0 {
                        swapped
                    } else {
                        -&swapped
                    };
                    out.add_diag(*n, BivPiecewise::term((None, None), signed));
                }
            }
        }
        Ok(out.diagonal_normalize())
    }

    /// Shift along an axis; defined only away from the diagonal family.
    pub fn shift(&self, axis: Axis, c: &Rational) -> Result<Self> {
        if !self.diag.is_empty() {
            return Err(AlgebraError::ShiftOnDiagonal);
        }
        let mut out = BivDistElem::zero();
        for ((xa, xb), u) in self.pw2.terms() {
            let (key, coef) = match axis {
                Axis::X => (
                    (xa.as_ref().map(|a| a - c), xb.clone()),
                    shift_biv(u, Axis::X, c),
                ),
                Axis::Xi => (
                    (xa.clone(), xb.as_ref().map(|b| b - c)),
                    shift_biv(u, Axis::Xi, c),
                ),
            };
            out.pw2.add_term(key, coef);
        }
        for ((a, i), lambda) in &self.tens_x {
            match axis {
                Axis::X => out.add_tens_x(a - c, *i, lambda.clone()),
                Axis::Xi => out.add_tens_x(a.clone(), *i, lambda.shift(c)),
            }
        }
        for ((b, i), lambda) in &self.tens_xi {
            match axis {
                Axis::Xi => out.add_tens_xi(b - c, *i, lambda.clone()),
                Axis::X => out.add_tens_xi(b.clone(), *i, lambda.shift(c)),
            }
        }
        Ok(out)
    }

    /// Reduce every piecewise layer modulo the interval ideal on both
    /// variables. Dirac terms are untouched; their piecewise coefficients
    /// reduce.
    pub fn reduce_mod_interval(&self, alpha: &Rational, beta: &Rational) -> Self {
        let mut out = BivDistElem::from_pw2(self.pw2.reduce_mod_interval(alpha, beta));
        for ((a, i), lambda) in &self.tens_x {
            out.add_tens_x(a.clone(), *i, lambda.reduce_mod_interval(alpha, beta));
        }
        for ((b, i), lambda) in &self.tens_xi {
            out.add_tens_xi(b.clone(), *i, lambda.reduce_mod_interval(alpha, beta));
        }
        for (n, coef) in &self.diag {
            out.add_diag(*n, coef.reduce_mod_interval(alpha, beta));
        }
        out
    }

    /// Sift diagonal Dirac coefficients onto the diagonal:
    /// `u(x,xi) delta^(k)(x-xi)` becomes
    /// `sum_j C(k,j) (-1)^j (d_x^j u)|_(x:=xi) delta^(k-j)(x-xi)`.
    ///
    /// The stored operators keep coefficients as produced by the defining
    /// recursions; this reduction does not change the induced action and is
    /// applied before comparing kernels (distributional verification,
    /// uniqueness checks).
    pub fn sift_diagonal(&self) -> Self {
        let mut out = self.clone();
        let diracs: Vec<(u32, BivPiecewise)> = out
            .diag
            .iter()
            .filter(|(n, _)| **n >= 1)
            .map(|(n, c)| (*n, c.clone()))
            .collect();
        for (n, _) in &diracs {
            out.diag.remove(n);
        }
        for (n, coef) in diracs {
            let k = n - 1;
            for ((_, xb), u) in coef.terms() {
                let mut binom = Rational::one();
                let mut du = u.clone();
                for j in 0..=k {
                    let sign = if j % 2 == 0 {
                        Rational::one()
                    } else {
                        -Rational::one()
                    };
                    let reduced = du.collapse_to_xi().scalar_mul(&(&binom * &sign));
                    out.add_diag(
                        k - j + 1,
                        BivPiecewise::term((None, xb.clone()), reduced),
                    );
                    du = du.derive(Axis::X);
                    binom = binom * Rational::from_int((k - j) as i64)
                        / Rational::from_int(j as i64 + 1);
                }
            }
        }
        out
    }

    /// Pointwise value for Dirac-free elements, with the left-continuous
    /// convention in each variable (`H(x-xi)` counts `x > xi`).
    pub fn eval_at(&self, x0: &Rational, xi0: &Rational) -> Result<Rational> {
        if self.has_any_dirac() {
            return Err(AlgebraError::UnsupportedBasis(
                "pointwise evaluation of a Dirac term".into(),
            ));
        }
        let mut acc = self.pw2.eval_at(x0, xi0);
        if let Some(coef) = self.diag.get(&0) {
            if heaviside(&(x0 - xi0)).is_one() {
                acc += &coef.eval_at(x0, xi0);
            }
        }
        Ok(acc)
    }

    /// Extract as a univariate piecewise element in `axis`, failing if any
    /// content involves the other variable or a Dirac term.
    pub fn to_piecewise(&self, axis: Axis) -> Result<PiecewiseElem> {
        if self.has_any_dirac() || !self.diag.is_empty() {
            return Err(AlgebraError::UnsupportedBasis(
                "element is not a univariate piecewise function".into(),
            ));
        }
        let mut out = PiecewiseElem::zero();
        for ((xa, xb), u) in self.pw2.terms() {
            let (own, foreign) = match axis {
                Axis::X => (xa, xb),
                Axis::Xi => (xb, xa),
            };
            if foreign.is_some() {
                return Err(AlgebraError::UnsupportedBasis(format!(
                    "Heaviside factor in the foreign variable: H({}-{})",
                    axis.other(),
                    foreign.as_ref().unwrap()
                )));
            }
            let g = u.as_ground(axis).ok_or_else(|| {
                AlgebraError::UnsupportedBasis(format!(
                    "coefficient {} involves the foreign variable",
                    u
                ))
            })?;
            match own {
                None => out = &out + &PiecewiseElem::from_ground(g),
                Some(a) => out = &out + &PiecewiseElem::step(a.clone(), g),
            }
        }
        Ok(out)
    }
}

/// Sift `u(x,xi) * delta^(i)(v-a)` for `v` = the given axis: returns the
/// surviving `(order, coefficient-in-the-other-variable)` pairs.
fn sift_biv_coeff(
    u: &BivGround,
    a: &Rational,
    i: u32,
    axis: Axis,
) -> Vec<(u32, GroundElem)> {
    let mut out = Vec::new();
    let mut binom = Rational::one();
    let mut du = u.clone();
    for j in 0..=i {
        let sign = if j % 2 == 0 {
            Rational::one()
        } else {
            -Rational::one()
        };
        let evaluated = du.eval_axis(axis, a);
        let g = evaluated
            .as_ground(axis.other())
            .expect("axis variable eliminated");
        out.push((i - j, g.scalar_mul(&(&binom * &sign))));
        du = du.derive(axis);
        binom = binom * Rational::from_int((i - j) as i64) / Rational::from_int(j as i64 + 1);
    }
    out
}

fn shift_biv(u: &BivGround, axis: Axis, c: &Rational) -> BivGround {
    // substitute the axis variable v -> v + c
    let mut out = BivGround::zero();
    for ((i, j), coef) in u.terms() {
        let (own, foreign) = match axis {
            Axis::X => (*i, *j),
            Axis::Xi => (*j, *i),
        };
        let shifted = GroundElem::monomial(coef.clone(), own as usize).shift(c);
        for (k, cc) in shifted.coeffs().iter().enumerate() {
            match axis {
                Axis::X => out.add_term(k as u32, foreign, cc.clone()),
                Axis::Xi => out.add_term(foreign, k as u32, cc.clone()),
            }
        }
    }
    out
}

/// `I^x` of `u(x,xi) [H_b(xi)] H^(n)(x-xi)`.
fn integrate_diag_x(u: &BivGround, xb: &Option<Rational>, n: u32) -> BivDistElem {
    if n == 0 {
        // (U - U|x:=xi) H(x-xi) + U|x:=xi * (1 - H_0(xi)), times H_b(xi)
        let antider = u.integrate(Axis::X);
        let on_diag = antider.collapse_to_xi();
        let mut out = BivDistElem::zero();
        out.add_diag(
            0,
            BivPiecewise::term((None, xb.clone()), &antider - &on_diag),
        );
        out.pw2.add_term((None, xb.clone()), on_diag.clone());
        out.pw2.add_term(
            (None, join_slot(xb, &Some(Rational::zero()))),
            -&on_diag,
        );
        out
    } else {
        // I(u H^(n)) = u H^(n-1) - I(u_x H^(n-1))
        let mut out = BivDistElem::zero();
        out.add_diag(n - 1, BivPiecewise::term((None, xb.clone()), u.clone()));
        let du = u.derive(Axis::X);
        if !du.is_zero() {
            out = &out - &integrate_diag_x(&du, xb, n - 1);
        }
        out
    }
}

/// `I^xi` of `u(x,xi) H^(n)(x-xi)` (no xi-side Heaviside factor).
fn integrate_diag_xi(u: &BivGround, n: u32) -> Result<BivDistElem> {
    if n == 0 {
        // (V - V|xi:=x) H(x-xi) + V|xi:=x * H_0(x)
        let antider = u.integrate(Axis::Xi);
        let on_diag = antider.collapse_to_x();
        let mut out = BivDistElem::zero();
        out.add_diag(
            0,
            BivPiecewise::term((None, None), &antider - &on_diag),
        );
        out.pw2
            .add_term((Some(Rational::zero()), None), on_diag);
        Ok(out)
    } else {
        // I(u H^(n)) = -u H^(n-1) + I(u_xi H^(n-1))
        let mut out = BivDistElem::zero();
        out.add_diag(n - 1, BivPiecewise::term((None, None), -u));
        let du = u.derive(Axis::Xi);
        if !du.is_zero() {
            out = &out + &integrate_diag_xi(&du, n - 1)?;
        }
        Ok(out)
    }
}

impl Add for &BivDistElem {
    type Output = BivDistElem;
    fn add(self, rhs: &BivDistElem) -> BivDistElem {
        let mut out = self.clone();
        out.pw2 = &out.pw2 + &rhs.pw2;
        for ((a, i), lambda) in &rhs.tens_x {
            out.add_tens_x(a.clone(), *i, lambda.clone());
        }
        for ((b, i), lambda) in &rhs.tens_xi {
            out.add_tens_xi(b.clone(), *i, lambda.clone());
        }
        for (n, coef) in &rhs.diag {
            out.add_diag(*n, coef.clone());
        }
        out
    }
}

impl Sub for &BivDistElem {
    type Output = BivDistElem;
    fn sub(self, rhs: &BivDistElem) -> BivDistElem {
        self + &(-rhs)
    }
}

impl Neg for &BivDistElem {
    type Output = BivDistElem;
    fn neg(self) -> BivDistElem {
        BivDistElem {
            pw2: -&self.pw2,
            tens_x: self
                .tens_x
                .iter()
                .map(|(k, v)| (k.clone(), -v))
                .collect(),
            tens_xi: self
                .tens_xi
                .iter()
                .map(|(k, v)| (k.clone(), -v))
                .collect(),
            diag: self.diag.iter().map(|(k, v)| (*k, -v)).collect(),
        }
    }
}

impl fmt::Display for BivDistElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        for ((xa, xb), u) in self.pw2.terms() {
            let mut factors = vec![coeff_factor(u)];
            if let Some(a) = xa {
                factors.push(format!("H({})", crate::piecewise::format_jump_arg("x", a)));
            }
            if let Some(b) = xb {
                factors.push(format!("H({})", crate::piecewise::format_jump_arg("xi", b)));
            }
            parts.push(join_factors(factors));
        }
        for ((a, i), lambda) in &self.tens_x {
            parts.push(join_factors(vec![
                pw_factor(lambda, "xi"),
                crate::dist::format_delta_token("x", a, *i),
            ]));
        }
        for ((b, i), lambda) in &self.tens_xi {
            parts.push(join_factors(vec![
                pw_factor(lambda, "x"),
                crate::dist::format_delta_token("xi", b, *i),
            ]));
        }
        for (n, coef) in &self.diag {
            let token = if *n == 0 {
                "H(x-xi)".to_string()
            } else {
                match n - 1 {
                    0 => "delta(x-xi)".to_string(),
                    1 => "delta'(x-xi)".to_string(),
                    k => format!("delta^{{{}}}(x-xi)", k),
                }
            };
            for ((_, xb), u) in coef.terms() {
                let mut factors = vec![coeff_factor(u)];
                if let Some(b) = xb {
                    factors.push(format!("H({})", crate::piecewise::format_jump_arg("xi", b)));
                }
                factors.push(token.clone());
                parts.push(join_factors(factors));
            }
        }
        if parts.is_empty() {
            return write!(f, "0");
        }
        let mut s = parts[0].clone();
        for p in &parts[1..] {
            if let Some(stripped) = p.strip_prefix('-') {
                s.push_str(" - ");
                s.push_str(stripped);
            } else {
                s.push_str(" + ");
                s.push_str(p);
            }
        }
        write!(f, "{}", s)
    }
}

impl fmt::Debug for BivDistElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Coefficient rendered as a single multiplicative factor.
fn coeff_factor(u: &BivGround) -> String {
    let n = u.terms().count();
    if n > 1 {
        format!("({})", u)
    } else {
        u.to_string()
    }
}

fn pw_factor(p: &PiecewiseElem, var: &str) -> String {
    let s = display_piecewise_var(p, var);
    if p.step_count() + usize::from(!p.base().is_zero()) > 1
        || p.base().coeffs().iter().filter(|c| !c.is_zero()).count() > 1
    {
        format!("({})", s)
    } else {
        s
    }
}

/// Render a univariate piecewise element with another variable name.
pub(crate) fn display_piecewise_var(p: &PiecewiseElem, var: &str) -> String {
    p.to_string().replace('x', var)
}

fn join_factors(factors: Vec<String>) -> String {
    // drop unit coefficients, fold a leading minus outward
    let mut sign = false;
    let mut keep: Vec<String> = Vec::new();
    for (idx, f) in factors.iter().enumerate() {
        if idx == 0 {
            if f == "1" {
                continue;
            }
            if f == "-1" {
                sign = true;
                continue;
            }
            if let Some(stripped) = f.strip_prefix('-') {
                sign = true;
                keep.push(stripped.to_string());
                continue;
            }
        }
        keep.push(f.clone());
    }
    if keep.is_empty() {
        keep.push("1".into());
    }
    let joined = keep.join("*");
    if sign {
        format!("-{}", joined)
    } else {
        joined
    }
}
