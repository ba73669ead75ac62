//! The ring of integro-differential operators over the ground algebra:
//! normal forms on the basis `f D^i`, `f I g`, `f ev(a) D^i`, `f ev(a) I g`,
//! composition by rewriting, and actions on ground, piecewise and bivariate
//! elements.
//!
//! Operators compose right-to-left: `compose(A, B)` applies `B` first. The
//! rewrite rules moving derivations right and collapsing `D I = 1`,
//! `D ev(a) = 0`, `ev(a) f = f(a) ev(a)`, together with the
//! integration-by-parts and nested-integral rules, terminate structurally;
//! a fuel counter guards the recursion anyway and reports instead of
//! spinning if a rule change ever breaks termination.

use crate::error::{AlgebraError, Result};
use crate::ground::GroundElem;
use crate::piecewise::PiecewiseElem;
use crate::scalars::Rational;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

/// Normal form of an integro-differential operator.
///
/// * `diff`: `i -> f` for terms `f * D^i` (order 0 is plain multiplication);
/// * `int`: `j -> f` for terms `f * I * x^j`;
/// * `eval_diff`: `(a, i) -> f` for terms `f * ev(a) * D^i`;
/// * `eval_int`: `(a, j) -> f` for terms `f * ev(a) * I * x^j`.
///
/// The four supports are disjoint by construction and all stored
/// coefficients are nonzero.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct IdOp {
    diff: BTreeMap<u32, GroundElem>,
    int: BTreeMap<u32, GroundElem>,
    eval_diff: BTreeMap<(Rational, u32), GroundElem>,
    eval_int: BTreeMap<(Rational, u32), GroundElem>,
}

impl IdOp {
    pub fn zero() -> Self {
        IdOp::default()
    }

    pub fn identity() -> Self {
        IdOp::multiplication(GroundElem::one())
    }

    /// The derivation `D`.
    pub fn derivation() -> Self {
        let mut op = IdOp::zero();
        op.add_diff(1, GroundElem::one());
        op
    }

    /// The integral `I` (from 0).
    pub fn integral() -> Self {
        let mut op = IdOp::zero();
        op.add_int(0, GroundElem::one());
        op
    }

    /// Multiplication by a ground element.
    pub fn multiplication(f: GroundElem) -> Self {
        let mut op = IdOp::zero();
        op.add_diff(0, f);
        op
    }

    /// The operator `left * I * weight`.
    pub fn int_with_weight(left: &GroundElem, weight: &GroundElem) -> Self {
        let mut op = IdOp::zero();
        op.add_int_poly(left, weight);
        op
    }

    /// The evaluation `ev(a)`.
    pub fn evaluation(a: Rational) -> Self {
        let mut op = IdOp::zero();
        op.add_eval_diff(a, 0, GroundElem::one());
        op
    }

    pub fn diff_terms(&self) -> impl Iterator<Item = (&u32, &GroundElem)> {
        self.diff.iter()
    }

    pub fn int_terms(&self) -> impl Iterator<Item = (&u32, &GroundElem)> {
        self.int.iter()
    }

    pub fn eval_diff_terms(&self) -> impl Iterator<Item = (&(Rational, u32), &GroundElem)> {
        self.eval_diff.iter()
    }

    pub fn eval_int_terms(&self) -> impl Iterator<Item = (&(Rational, u32), &GroundElem)> {
        self.eval_int.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.diff.is_empty()
            && self.int.is_empty()
            && self.eval_diff.is_empty()
            && self.eval_int.is_empty()
    }

    /// True when the operator involves no genuine derivative: the only
    /// `D^i` parts have `i = 0` and every evaluation term is order 0.
    /// Such operators act on piecewise elements.
    pub fn is_integral_only(&self) -> bool {
        self.diff.keys().all(|i| *i == 0)
            && self.eval_diff.keys().all(|(_, i)| *i == 0)
    }

    /// Highest derivative order in the plain differential part.
    pub fn diff_order(&self) -> Option<u32> {
        self.diff.keys().max().copied()
    }

    pub fn add_diff(&mut self, i: u32, f: GroundElem) {
        add_entry(&mut self.diff, i, f);
    }

    pub fn add_int(&mut self, j: u32, f: GroundElem) {
        add_entry(&mut self.int, j, f);
    }

    pub fn add_eval_diff(&mut self, a: Rational, i: u32, f: GroundElem) {
        add_entry(&mut self.eval_diff, (a, i), f);
    }

    pub fn add_eval_int(&mut self, a: Rational, j: u32, f: GroundElem) {
        // ev(0) I = 0: the distinguished evaluation annihilates integrals
        if a.is_zero() {
            return;
        }
        add_entry(&mut self.eval_int, (a, j), f);
    }

    /// Add `f * I * g` by expanding `g` into monomials.
    pub fn add_int_poly(&mut self, f: &GroundElem, g: &GroundElem) {
        for (j, c) in g.coeffs().iter().enumerate() {
            if !c.is_zero() {
                self.add_int(j as u32, f.scalar_mul(c));
            }
        }
    }

    pub fn add_eval_int_poly(&mut self, f: &GroundElem, a: &Rational, g: &GroundElem) {
        for (j, c) in g.coeffs().iter().enumerate() {
            if !c.is_zero() {
                self.add_eval_int(a.clone(), j as u32, f.scalar_mul(c));
            }
        }
    }

    /// Left multiplication by a ground element.
    pub fn left_mul(&self, f: &GroundElem) -> Self {
        if f.is_zero() {
            return IdOp::zero();
        }
        let mut out = IdOp::zero();
        for (i, c) in &self.diff {
            out.add_diff(*i, c * f);
        }
        for (j, c) in &self.int {
            out.add_int(*j, c * f);
        }
        for ((a, i), c) in &self.eval_diff {
            out.add_eval_diff(a.clone(), *i, c * f);
        }
        for ((a, j), c) in &self.eval_int {
            out.add_eval_int(a.clone(), *j, c * f);
        }
        out
    }

    pub fn scalar_mul(&self, c: &Rational) -> Self {
        self.left_mul(&GroundElem::constant(c.clone()))
    }

    /// Normal form of `self . rhs` (apply `rhs` first).
    pub fn compose(&self, rhs: &IdOp) -> Result<Self> {
        let mut fuel = compose_fuel(self, rhs);
        let mut out = IdOp::zero();
        for (i, f) in &self.diff {
            let c = derive_op(rhs, *i, &mut fuel)?;
            out = &out + &c.left_mul(f);
        }
        for (j, f) in &self.int {
            let pre = GroundElem::monomial(Rational::one(), *j as usize);
            let c = integrate_op(&pre, rhs, &mut fuel)?;
            out = &out + &c.left_mul(f);
        }
        for ((a, i), f) in &self.eval_diff {
            let c = derive_op(rhs, *i, &mut fuel)?;
            out = &out + &absorb_eval(a, &c).left_mul(f);
        }
        for ((a, j), f) in &self.eval_int {
            let pre = GroundElem::monomial(Rational::one(), *j as usize);
            let c = integrate_op(&pre, rhs, &mut fuel)?;
            out = &out + &absorb_eval(a, &c).left_mul(f);
        }
        Ok(out)
    }

    /// Natural action on a ground element.
    pub fn act(&self, h: &GroundElem) -> GroundElem {
        let mut out = GroundElem::zero();
        for (i, f) in &self.diff {
            out = &out + &(f * &h.derive_n(*i as usize));
        }
        for (j, f) in &self.int {
            let mon = GroundElem::monomial(Rational::one(), *j as usize);
            out = &out + &(f * &(&mon * h).integrate());
        }
        for ((a, i), f) in &self.eval_diff {
            out = &out + &f.scalar_mul(&h.derive_n(*i as usize).evaluate(a));
        }
        for ((a, j), f) in &self.eval_int {
            let mon = GroundElem::monomial(Rational::one(), *j as usize);
            out = &out + &f.scalar_mul(&(&mon * h).integrate().evaluate(a));
        }
        out
    }

    /// Action on a piecewise element. Only integral-type operators act:
    /// derivative terms are refused because the integration-by-parts rule
    /// behind the normal form is unsound on the piecewise extension.
    pub fn act_pw(&self, p: &PiecewiseElem) -> Result<PiecewiseElem> {
        if !self.is_integral_only() {
            return Err(AlgebraError::DerivativeOnPiecewise(self.to_string()));
        }
        let mut out = PiecewiseElem::zero();
        for (i, f) in &self.diff {
            debug_assert_eq!(*i, 0);
            out = &out + &p.ground_mul(f);
        }
        for (j, f) in &self.int {
            let mon = GroundElem::monomial(Rational::one(), *j as usize);
            out = &out + &p.ground_mul(&mon).integrate().ground_mul(f);
        }
        for ((a, i), f) in &self.eval_diff {
            debug_assert_eq!(*i, 0);
            out = &out + &PiecewiseElem::from_ground(f.scalar_mul(&p.evaluate(a)));
        }
        for ((a, j), f) in &self.eval_int {
            let mon = GroundElem::monomial(Rational::one(), *j as usize);
            let value = p.ground_mul(&mon).integrate().evaluate(a);
            out = &out + &PiecewiseElem::from_ground(f.scalar_mul(&value));
        }
        Ok(out)
    }

    /// Action on a bivariate distribution with respect to one variable:
    /// multiplication acts through that variable's embedding, `D` as the
    /// derivation, `I` as the integral and `ev(a)` as the evaluation.
    pub fn act_axis(
        &self,
        phi: &crate::bivariate::BivDistElem,
        axis: crate::bivariate::Axis,
    ) -> Result<crate::bivariate::BivDistElem> {
        use crate::bivariate::{BivDistElem, BivGround, BivPiecewise};
        let embed = |f: &GroundElem| {
            BivPiecewise::from_ground(BivGround::from_ground(f, axis))
        };
        let mut out = BivDistElem::zero();
        for (i, f) in &self.diff {
            let mut cur = phi.clone();
            for _ in 0..*i {
                cur = cur.derive(axis)?;
            }
            out = &out + &cur.mul_pw2(&embed(f))?;
        }
        for (j, f) in &self.int {
            let mon = GroundElem::monomial(Rational::one(), *j as usize);
            let cur = phi.mul_pw2(&embed(&mon))?.integrate(axis)?;
            out = &out + &cur.mul_pw2(&embed(f))?;
        }
        for ((a, i), f) in &self.eval_diff {
            let mut cur = phi.clone();
            for _ in 0..*i {
                cur = cur.derive(axis)?;
            }
            let cur = cur.evaluate(axis, a);
            out = &out + &cur.mul_pw2(&embed(f))?;
        }
        for ((a, j), f) in &self.eval_int {
            let mon = GroundElem::monomial(Rational::one(), *j as usize);
            let cur = phi
                .mul_pw2(&embed(&mon))?
                .integrate(axis)?
                .evaluate(axis, a);
            out = &out + &cur.mul_pw2(&embed(f))?;
        }
        Ok(out)
    }
}

fn add_entry<K: Ord>(map: &mut BTreeMap<K, GroundElem>, key: K, f: GroundElem) {
    if f.is_zero() {
        return;
    }
    use std::collections::btree_map::Entry;
    match map.entry(key) {
        Entry::Vacant(e) => {
            e.insert(f);
        }
        Entry::Occupied(mut e) => {
            let sum = &*e.get() + &f;
            if sum.is_zero() {
                e.remove();
            } else {
                *e.get_mut() = sum;
            }
        }
    }
}

fn term_count(op: &IdOp) -> usize {
    op.diff.len() + op.int.len() + op.eval_diff.len() + op.eval_int.len()
}

fn compose_fuel(a: &IdOp, b: &IdOp) -> usize {
    let degree_budget: usize = a
        .diff
        .keys()
        .chain(a.int.keys())
        .map(|k| *k as usize + 2)
        .sum::<usize>()
        + a.eval_diff.keys().map(|(_, i)| *i as usize + 2).sum::<usize>()
        + a.eval_int.keys().map(|(_, j)| *j as usize + 2).sum::<usize>();
    10 * (term_count(a) + term_count(b) + degree_budget + 4)
        * (term_count(b) + 4)
}

fn burn(fuel: &mut usize) -> Result<()> {
    if *fuel == 0 {
        return Err(AlgebraError::RewriteBudget(0));
    }
    *fuel -= 1;
    Ok(())
}

/// Normal form of `D^i . op`.
fn derive_op(op: &IdOp, i: u32, fuel: &mut usize) -> Result<IdOp> {
    let mut cur = op.clone();
    for _ in 0..i {
        burn(fuel)?;
        let mut next = IdOp::zero();
        for (k, f) in &cur.diff {
            // D f D^k = f' D^k + f D^(k+1)
            next.add_diff(*k, f.derive());
            next.add_diff(k + 1, f.clone());
        }
        for (j, f) in &cur.int {
            // D f I x^j = f' I x^j + f x^j
            next.add_int(*j, f.derive());
            next.add_diff(0, f * &GroundElem::monomial(Rational::one(), *j as usize));
        }
        for ((a, k), f) in &cur.eval_diff {
            // D f ev(a) D^k = f' ev(a) D^k   (D ev(a) = 0)
            next.add_eval_diff(a.clone(), *k, f.derive());
        }
        for ((a, j), f) in &cur.eval_int {
            next.add_eval_int(a.clone(), *j, f.derive());
        }
        cur = next;
    }
    Ok(cur)
}

/// Normal form of `I . M_pre . op` where `pre` is a ground premultiplier.
fn integrate_op(pre: &GroundElem, op: &IdOp, fuel: &mut usize) -> Result<IdOp> {
    burn(fuel)?;
    let mut out = IdOp::zero();
    for (k, f) in &op.diff {
        out = &out + &integrate_mul_diff(&(pre * f), *k, fuel)?;
    }
    for (j, f) in &op.int {
        // I u I x^j = (Iu) I x^j - I (Iu) x^j
        let u = pre * f;
        let int_u = u.integrate();
        let mut first = IdOp::zero();
        first.add_int(*j, int_u.clone());
        out = &out + &first;
        let mon = GroundElem::monomial(Rational::one(), *j as usize);
        let mut second = IdOp::zero();
        second.add_int_poly(&GroundElem::one(), &(&int_u * &mon));
        out = &out - &second;
    }
    for ((a, k), f) in &op.eval_diff {
        // I u ev(a) D^k = (Iu) ev(a) D^k
        out.add_eval_diff(a.clone(), *k, (pre * f).integrate());
    }
    for ((a, j), f) in &op.eval_int {
        out.add_eval_int(a.clone(), *j, (pre * f).integrate());
    }
    Ok(out)
}

/// Normal form of `I . M_u . D^k`.
fn integrate_mul_diff(u: &GroundElem, k: u32, fuel: &mut usize) -> Result<IdOp> {
    burn(fuel)?;
    if k == 0 {
        let mut out = IdOp::zero();
        out.add_int_poly(&GroundElem::one(), u);
        return Ok(out);
    }
    // I u D^k = u D^(k-1) - (I u' ) D^(k-1) - u(0) ev(0) D^(k-1)
    let mut out = IdOp::zero();
    out.add_diff(k - 1, u.clone());
    out = &out - &integrate_mul_diff(&u.derive(), k - 1, fuel)?;
    out.add_eval_diff(
        Rational::zero(),
        k - 1,
        -&GroundElem::constant(u.evaluate(&Rational::zero())),
    );
    Ok(out)
}

/// Normal form of `ev(a) . op`: the evaluation absorbs ground coefficients
/// and collapses onto any evaluation it meets.
fn absorb_eval(a: &Rational, op: &IdOp) -> IdOp {
    let mut out = IdOp::zero();
    for (k, f) in &op.diff {
        out.add_eval_diff(a.clone(), *k, GroundElem::constant(f.evaluate(a)));
    }
    for (j, f) in &op.int {
        out.add_eval_int(a.clone(), *j, GroundElem::constant(f.evaluate(a)));
    }
    for ((b, k), f) in &op.eval_diff {
        // ev(a) f ev(b) = f(a) ev(b)
        out.add_eval_diff(b.clone(), *k, GroundElem::constant(f.evaluate(a)));
    }
    for ((b, j), f) in &op.eval_int {
        out.add_eval_int(b.clone(), *j, GroundElem::constant(f.evaluate(a)));
    }
    out
}

impl Add for &IdOp {
    type Output = IdOp;
    fn add(self, rhs: &IdOp) -> IdOp {
        let mut out = self.clone();
        for (i, f) in &rhs.diff {
            out.add_diff(*i, f.clone());
        }
        for (j, f) in &rhs.int {
            out.add_int(*j, f.clone());
        }
        for ((a, i), f) in &rhs.eval_diff {
            out.add_eval_diff(a.clone(), *i, f.clone());
        }
        for ((a, j), f) in &rhs.eval_int {
            out.add_eval_int(a.clone(), *j, f.clone());
        }
        out
    }
}

impl Sub for &IdOp {
    type Output = IdOp;
    fn sub(self, rhs: &IdOp) -> IdOp {
        self + &(-rhs)
    }
}

impl Neg for &IdOp {
    type Output = IdOp;
    fn neg(self) -> IdOp {
        IdOp {
            diff: self.diff.iter().map(|(k, f)| (*k, -f)).collect(),
            int: self.int.iter().map(|(k, f)| (*k, -f)).collect(),
            eval_diff: self
                .eval_diff
                .iter()
                .map(|(k, f)| (k.clone(), -f))
                .collect(),
            eval_int: self
                .eval_int
                .iter()
                .map(|(k, f)| (k.clone(), -f))
                .collect(),
        }
    }
}

/// A Stieltjes boundary condition: a linear functional combining point
/// evaluations of derivatives with weighted definite integrals,
/// `sum c * ev(a) D^k + sum ev(a) I v`.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct StieltjesCond {
    /// `(c, a, k)`: the term `c * ev(a) * D^k`.
    pub local: Vec<(Rational, Rational, u32)>,
    /// `(a, v)`: the term `ev(a) * I * v`.
    pub global: Vec<(Rational, GroundElem)>,
}

impl StieltjesCond {
    /// Point evaluation `ev(a)`.
    pub fn evaluation(a: Rational) -> Self {
        StieltjesCond {
            local: vec![(Rational::one(), a, 0)],
            global: Vec::new(),
        }
    }

    /// Derivative evaluation `ev(a) D^k`.
    pub fn derivative(a: Rational, k: u32) -> Self {
        StieltjesCond {
            local: vec![(Rational::one(), a, k)],
            global: Vec::new(),
        }
    }

    /// Apply the functional to a ground element.
    pub fn apply(&self, f: &GroundElem) -> Rational {
        let mut acc = Rational::zero();
        for (c, a, k) in &self.local {
            acc += &(c * &f.derive_n(*k as usize).evaluate(a));
        }
        for (a, v) in &self.global {
            acc += &(v * f).definite_integral(&Rational::zero(), a);
        }
        acc
    }

    /// Apply to a piecewise element (defined when every local order is 0 or
    /// the element is smooth enough; derivative orders use the piecewise
    /// derivative, whose jumps are invisible to point evaluation).
    pub fn apply_pw(&self, p: &PiecewiseElem) -> Rational {
        let mut acc = Rational::zero();
        for (c, a, k) in &self.local {
            let mut cur = p.clone();
            for _ in 0..*k {
                cur = cur.derive();
            }
            acc += &(c * &cur.evaluate(a));
        }
        for (a, v) in &self.global {
            acc += &p.ground_mul(v).integrate().evaluate(a);
        }
        acc
    }

    /// Highest derivative order appearing in the local part.
    pub fn max_order(&self) -> u32 {
        self.local.iter().map(|(_, _, k)| *k).max().unwrap_or(0)
    }

    /// All evaluation points used by the condition.
    pub fn points(&self) -> Vec<Rational> {
        let mut pts: Vec<Rational> = self
            .local
            .iter()
            .map(|(_, a, _)| a.clone())
            .chain(self.global.iter().map(|(a, _)| a.clone()))
            .collect();
        pts.sort();
        pts.dedup();
        pts
    }

    /// The condition as an operator (for composition into projectors).
    pub fn to_idop(&self) -> IdOp {
        let mut op = IdOp::zero();
        for (c, a, k) in &self.local {
            op.add_eval_diff(a.clone(), *k, GroundElem::constant(c.clone()));
        }
        for (a, v) in &self.global {
            op.add_eval_int_poly(&GroundElem::one(), a, v);
        }
        op
    }
}

impl fmt::Display for StieltjesCond {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_idop())
    }
}

impl fmt::Debug for StieltjesCond {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for IdOp {
    /// Canonical order: differential, integral, evaluation-differential,
    /// evaluation-integral terms.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut wrote = false;
        let mut put = |f: &mut fmt::Formatter<'_>,
                       coef: &GroundElem,
                       tail: String|
         -> fmt::Result {
            let (lead, body) = coeff_parts(coef);
            if wrote {
                write!(f, " {} ", if lead { "-" } else { "+" })?;
            } else if lead {
                write!(f, "-")?;
            }
            wrote = true;
            match (body, tail.is_empty()) {
                (Some(b), false) => write!(f, "{}*{}", b, tail),
                (Some(b), true) => write!(f, "{}", b),
                (None, false) => write!(f, "{}", tail),
                (None, true) => write!(f, "1"),
            }
        };
        for (i, c) in &self.diff {
            put(f, c, d_token(*i))?;
        }
        for (j, c) in &self.int {
            put(f, c, format!("I{}", mon_token(*j)))?;
        }
        for ((a, i), c) in &self.eval_diff {
            let tail = if *i == 0 {
                format!("ev({})", a)
            } else {
                format!("ev({})*{}", a, d_token(*i))
            };
            put(f, c, tail)?;
        }
        for ((a, j), c) in &self.eval_int {
            put(f, c, format!("ev({})*I{}", a, mon_token(*j)))?;
        }
        if !wrote {
            write!(f, "0")?;
        }
        Ok(())
    }
}

fn d_token(i: u32) -> String {
    match i {
        0 => String::new(),
        1 => "D".into(),
        i => format!("D^{}", i),
    }
}

fn mon_token(j: u32) -> String {
    match j {
        0 => String::new(),
        1 => "*x".into(),
        j => format!("*x^{}", j),
    }
}

/// Leading-sign/body split for an operator coefficient.
fn coeff_parts(coef: &GroundElem) -> (bool, Option<String>) {
    let nterms = coef.coeffs().iter().filter(|c| !c.is_zero()).count();
    if nterms > 1 {
        return (false, Some(format!("({})", coef)));
    }
    if coef.is_constant() {
        let c = coef.constant_term();
        if c.is_one() {
            return (false, None);
        }
        if (-&c).is_one() {
            return (true, None);
        }
        if c.is_negative() {
            return (true, Some((-&c).to_string()));
        }
        return (false, Some(c.to_string()));
    }
    let s = coef.to_string();
    match s.strip_prefix('-') {
        Some(rest) => (true, Some(rest.to_string())),
        None => (false, Some(s)),
    }
}

impl fmt::Debug for IdOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
