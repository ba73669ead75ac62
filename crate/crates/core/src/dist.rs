//! The distribution module over the ground algebra: piecewise elements
//! extended by Dirac generators `delta(x-a)` and their derivatives.
//!
//! Elements are kept in the canonical form
//! `f + sum_a f_a H_a + sum_{a,k} lambda_{a,k} delta_a^(k)` with *scalar*
//! Dirac coefficients: any ground coefficient on a Dirac term is reduced
//! immediately through the sifting rule
//! `f delta_a^(k) = sum_i C(k,i) (-1)^i f^(i)(a) delta_a^(k-i)`,
//! whose instances form a Groebner basis of the defining relations.
//!
//! Unlike the piecewise extension, the derivation here sends `H_a` to
//! `delta_a`. There is deliberately *no* product of two distribution
//! elements and no product with a Heaviside-bearing piecewise factor when
//! Dirac terms are present: a Leibniz-compatible product would collapse the
//! module (differentiating `H_a^2 = H_a` gives `2 H_a delta_a = delta_a`,
//! hence `delta_a = 0`). See [`DistElem::mul_piecewise`].

use crate::error::{AlgebraError, Result};
use crate::ground::GroundElem;
use crate::piecewise::{format_jump_arg, write_term, PiecewiseElem};
use crate::scalars::{co_heaviside, Rational};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Neg, Sub};

/// Canonical element of the distribution module.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct DistElem {
    pw: PiecewiseElem,
    /// `(source point, derivative order) -> coefficient`, all nonzero.
    diracs: BTreeMap<(Rational, u32), Rational>,
}

impl DistElem {
    pub fn zero() -> Self {
        DistElem::default()
    }

    pub fn from_piecewise(pw: PiecewiseElem) -> Self {
        DistElem {
            pw,
            diracs: BTreeMap::new(),
        }
    }

    pub fn from_ground(g: GroundElem) -> Self {
        DistElem::from_piecewise(PiecewiseElem::from_ground(g))
    }

    /// `delta_a^(k)`.
    pub fn dirac(a: Rational, k: u32) -> Self {
        let mut d = DistElem::zero();
        d.add_dirac(a, k, Rational::one());
        d
    }

    pub fn piecewise_part(&self) -> &PiecewiseElem {
        &self.pw
    }

    pub fn dirac_terms(&self) -> impl Iterator<Item = (&(Rational, u32), &Rational)> {
        self.diracs.iter()
    }

    pub fn has_diracs(&self) -> bool {
        !self.diracs.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.pw.is_zero() && self.diracs.is_empty()
    }

    fn add_dirac(&mut self, a: Rational, k: u32, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.diracs.entry((a, k)) {
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

    pub fn scalar_mul(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return DistElem::zero();
        }
        DistElem {
            pw: self.pw.scalar_mul(c),
            diracs: self
                .diracs
                .iter()
                .map(|(key, v)| (key.clone(), v * c))
                .collect(),
        }
    }

    /// Normal form of `f * delta_a^(k)` under the sifting relations:
    /// `sum_{i=0}^{k} C(k,i) (-1)^i f^(i)(a) delta_a^(k-i)`.
    pub fn reduce_product(f: &GroundElem, a: &Rational, k: u32) -> Self {
        let mut out = DistElem::zero();
        let mut binom = Rational::one();
        let mut derivative = f.clone();
        for i in 0..=k {
            let sign = if i % 2 == 0 {
                Rational::one()
            } else {
                -Rational::one()
            };
            let coeff = &binom * &sign * derivative.evaluate(a);
            out.add_dirac(a.clone(), k - i, coeff);
            derivative = derivative.derive();
            // C(k, i+1) = C(k, i) * (k - i) / (i + 1)
            binom = binom * Rational::from_int((k - i) as i64)
                / Rational::from_int(i as i64 + 1);
        }
        out
    }

    /// Same normal form computed by the derivation recursion
    /// `f delta_a^(k) = d(f delta_a^(k-1)) - f' delta_a^(k-1)` instead of the
    /// closed formula. Used to cross-check `reduce_product`.
    pub fn reduce_product_stepwise(f: &GroundElem, a: &Rational, k: u32) -> Self {
        if k == 0 {
            return DistElem::dirac(a.clone(), 0).scalar_mul(&f.evaluate(a));
        }
        let lower = DistElem::reduce_product(f, a, k - 1);
        let lower_prime = DistElem::reduce_product(&f.derive(), a, k - 1);
        &lower.derive() - &lower_prime
    }

    /// Module action of a ground element.
    pub fn ground_mul(&self, f: &GroundElem) -> Self {
        let mut out = DistElem::from_piecewise(self.pw.ground_mul(f));
        for ((a, k), c) in &self.diracs {
            out = &out + &DistElem::reduce_product(f, a, *k).scalar_mul(c);
        }
        out
    }

    /// Product with a piecewise element. Allowed when either the piecewise
    /// factor is purely ground (module action) or this element has no Dirac
    /// terms (ring product in the piecewise extension); otherwise the
    /// product is undefined and refused.
    pub fn mul_piecewise(&self, p: &PiecewiseElem) -> Result<Self> {
        if p.is_ground() {
            return Ok(self.ground_mul(p.base()));
        }
        if self.diracs.is_empty() {
            return Ok(DistElem::from_piecewise(&self.pw * p));
        }
        Err(AlgebraError::ForbiddenProduct(format!(
            "Heaviside factor {} times Dirac-bearing element {}",
            p, self
        )))
    }

    /// Derivation: `d(f_a H_a) = f_a' H_a + f_a(a) delta_a`,
    /// `d(delta_a^(k)) = delta_a^(k+1)`, ground part as usual.
    pub fn derive(&self) -> Self {
        let mut out = DistElem::from_ground(self.pw.base().derive());
        for (a, f) in self.pw.steps() {
            out = &out
                + &DistElem::from_piecewise(PiecewiseElem::step(a.clone(), f.derive()));
            out.add_dirac(a.clone(), 0, f.evaluate(a));
        }
        for ((a, k), c) in &self.diracs {
            out.add_dirac(a.clone(), k + 1, c.clone());
        }
        out
    }

    /// Rota-Baxter integral extending the piecewise integral:
    /// `I(delta_a) = H_a - co_heaviside(a)`, `I(delta_a^(k)) = delta_a^(k-1)`
    /// for `k > 0`. Section of [`DistElem::derive`].
    pub fn integrate(&self) -> Self {
        let mut out = DistElem::from_piecewise(self.pw.integrate());
        for ((a, k), c) in &self.diracs {
            if *k == 0 {
                out = &out
                    + &DistElem::from_piecewise(PiecewiseElem::heaviside(a.clone()))
                        .scalar_mul(c);
                if co_heaviside(a).is_one() {
                    out = &out - &DistElem::from_ground(GroundElem::constant(c.clone()));
                }
            } else {
                out.add_dirac(a.clone(), k - 1, c.clone());
            }
        }
        out
    }

    /// Integral of `f * delta_a^(k)` by the defining recursion
    /// (`I(f delta_a^(k)) = f delta_a^(k-1) - I(f' delta_a^(k-1))`, base case
    /// through sifting). Agrees with reducing first and then integrating;
    /// kept as an independent route for cross-checks.
    pub fn integrate_product(f: &GroundElem, a: &Rational, k: u32) -> Self {
        if k == 0 {
            return DistElem::dirac(a.clone(), 0)
                .scalar_mul(&f.evaluate(a))
                .integrate();
        }
        let direct = DistElem::reduce_product(f, a, k - 1);
        &direct - &DistElem::integrate_product(&f.derive(), a, k - 1)
    }

    /// Shifted integral `(1 - e_b) I`.
    pub fn integrate_from(&self, b: &Rational) -> Self {
        let full = self.integrate();
        let at_b = full.evaluate(b);
        &full - &DistElem::from_ground(GroundElem::constant(at_b))
    }

    /// Induced evaluation at `c`: the piecewise character on the functional
    /// part, zero on every Dirac generator.
    pub fn evaluate(&self, c: &Rational) -> Rational {
        self.pw.evaluate(c)
    }

    /// Shift `S_c`: `H_a -> H_(a-c)`, `delta_a -> delta_(a-c)`.
    pub fn shift(&self, c: &Rational) -> Self {
        DistElem {
            pw: self.pw.shift(c),
            diracs: self
                .diracs
                .iter()
                .map(|((a, k), v)| ((a - c, *k), v.clone()))
                .collect(),
        }
    }

    /// Induced evaluation `id - I . d` as an element map. Multiplicative
    /// against ground factors (`ev(f phi) = f(0) ev(phi)`), which is what
    /// upgrades this module over the plain piecewise extension.
    pub fn pseudo_eval(&self) -> Self {
        self - &self.derive().integrate()
    }

    /// Per-point filtration level: the highest Heaviside-derivative order
    /// present at each source point (`H_a` counts as 0, `delta_a^(k)` as
    /// `k + 1`). The derivation raises a level by at most one; the integral
    /// lowers it by at most one.
    pub fn filtration_level(&self) -> BTreeMap<Rational, u32> {
        let mut levels = BTreeMap::new();
        for (a, _) in self.pw.steps() {
            levels.entry(a.clone()).or_insert(0u32);
        }
        for ((a, k), _) in &self.diracs {
            let lvl = levels.entry(a.clone()).or_insert(0);
            *lvl = (*lvl).max(k + 1);
        }
        levels
    }

    /// All source points with a Heaviside or Dirac generator present.
    pub fn support_points(&self) -> BTreeSet<Rational> {
        self.filtration_level().into_keys().collect()
    }
}

impl Add for &DistElem {
    type Output = DistElem;
    fn add(self, rhs: &DistElem) -> DistElem {
        let mut out = self.clone();
        out.pw = &out.pw + &rhs.pw;
        for ((a, k), c) in &rhs.diracs {
            out.add_dirac(a.clone(), *k, c.clone());
        }
        out
    }
}

impl Sub for &DistElem {
    type Output = DistElem;
    fn sub(self, rhs: &DistElem) -> DistElem {
        self + &(-rhs)
    }
}

impl Neg for &DistElem {
    type Output = DistElem;
    fn neg(self) -> DistElem {
        DistElem {
            pw: -&self.pw,
            diracs: self
                .diracs
                .iter()
                .map(|(key, c)| (key.clone(), -c))
                .collect(),
        }
    }
}

pub(crate) fn format_delta_token(var: &str, a: &Rational, k: u32) -> String {
    let arg = format_jump_arg(var, a);
    match k {
        0 => format!("delta({})", arg),
        1 => format!("delta'({})", arg),
        k => format!("delta^{{{}}}({})", k, arg),
    }
}

impl fmt::Display for DistElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut wrote = false;
        if !self.pw.is_zero() {
            write!(f, "{}", self.pw)?;
            wrote = true;
        }
        for ((a, k), c) in &self.diracs {
            write_term(
                f,
                &mut wrote,
                &GroundElem::constant(c.clone()),
                &format_delta_token("x", a, *k),
            )?;
        }
        if !wrote {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl fmt::Debug for DistElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
