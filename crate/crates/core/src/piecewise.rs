//! The piecewise extension of the ground algebra: polynomials with Heaviside
//! generators `H(x-a)` subject to the join rule `H_a * H_b = H_max(a,b)`.
//!
//! Integration extends the ground integral so that the result matches the
//! running integral from 0 of the corresponding step function; the
//! derivation extends by zero (`dH_a = 0`), which makes this a differential
//! Rota-Baxter algebra that is *not* integro-differential (the induced
//! pseudo-evaluation fails to be multiplicative; see `pseudo_eval`).

use crate::ground::GroundElem;
use crate::scalars::{co_heaviside, heaviside, Rational};
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Canonical element `f + sum_a f_a * H_a` of the piecewise extension.
/// Step coefficients are keyed by jump point; zero coefficients are pruned
/// after every operation so structural equality is semantic equality.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct PiecewiseElem {
    base: GroundElem,
    steps: BTreeMap<Rational, GroundElem>,
}

impl PiecewiseElem {
    pub fn zero() -> Self {
        PiecewiseElem::default()
    }

    pub fn one() -> Self {
        PiecewiseElem::from_ground(GroundElem::one())
    }

    pub fn from_ground(base: GroundElem) -> Self {
        PiecewiseElem {
            base,
            steps: BTreeMap::new(),
        }
    }

    /// The generator `H(x-a)`.
    pub fn heaviside(a: Rational) -> Self {
        PiecewiseElem::step(a, GroundElem::one())
    }

    /// `coef * H(x-a)`.
    pub fn step(a: Rational, coef: GroundElem) -> Self {
        let mut steps = BTreeMap::new();
        if !coef.is_zero() {
            steps.insert(a, coef);
        }
        PiecewiseElem {
            base: GroundElem::zero(),
            steps,
        }
    }

    /// The dual generator `H(a-x) = 1 - H(x-a)`.
    pub fn co_heaviside(a: Rational) -> Self {
        &PiecewiseElem::one() - &PiecewiseElem::heaviside(a)
    }

    pub fn base(&self) -> &GroundElem {
        &self.base
    }

    pub fn steps(&self) -> impl Iterator<Item = (&Rational, &GroundElem)> {
        self.steps.iter()
    }

    pub fn step_count(&self) -> usize {
        self.steps.len()
    }

    pub fn is_zero(&self) -> bool {
        self.base.is_zero() && self.steps.is_empty()
    }

    /// True when there are no Heaviside terms.
    pub fn is_ground(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn jump_points(&self) -> impl Iterator<Item = &Rational> {
        self.steps.keys()
    }

    fn add_step(&mut self, a: Rational, coef: GroundElem) {
        if coef.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.steps.entry(a) {
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
            return PiecewiseElem::zero();
        }
        PiecewiseElem {
            base: self.base.scalar_mul(c),
            steps: self
                .steps
                .iter()
                .map(|(a, f)| (a.clone(), f.scalar_mul(c)))
                .collect(),
        }
    }

    pub fn ground_mul(&self, g: &GroundElem) -> Self {
        if g.is_zero() {
            return PiecewiseElem::zero();
        }
        let mut out = PiecewiseElem::from_ground(&self.base * g);
        for (a, f) in &self.steps {
            out.add_step(a.clone(), f * g);
        }
        out
    }

    /// Ring product under the join rule `H_a * H_b = H_max(a,b)`.
    pub fn mul(&self, rhs: &PiecewiseElem) -> Self {
        let mut out = PiecewiseElem::from_ground(&self.base * &rhs.base);
        for (a, f) in &self.steps {
            out.add_step(a.clone(), f * &rhs.base);
        }
        for (b, g) in &rhs.steps {
            out.add_step(b.clone(), &self.base * g);
        }
        for (a, f) in &self.steps {
            for (b, g) in &rhs.steps {
                out.add_step(a.max(b).clone(), f * g);
            }
        }
        out
    }

    /// Derivation extending the ground derivation by zero on the Heaviside
    /// generators: `d(f H_a) = f' H_a`. The constants of this derivation are
    /// all Heaviside polynomials over the rationals.
    pub fn derive(&self) -> Self {
        PiecewiseElem {
            base: self.base.derive(),
            steps: self
                .steps
                .iter()
                .filter_map(|(a, f)| {
                    let d = f.derive();
                    (!d.is_zero()).then(|| (a.clone(), d))
                })
                .collect(),
        }
    }

    /// Rota-Baxter integral extending integration from 0:
    /// `I(f H_a) = (I_a f) H_a + Hbar(a) * (value of I f at a)`,
    /// where `I_a f` is the antiderivative vanishing at `a`.
    pub fn integrate(&self) -> Self {
        let mut out = PiecewiseElem::from_ground(self.base.integrate());
        for (a, f) in &self.steps {
            let antider_at_a = f.integrate().evaluate(a);
            out.add_step(a.clone(), f.integrate_from(a));
            if co_heaviside(a).is_one() {
                out.base = &out.base + &GroundElem::constant(antider_at_a.clone());
            }
        }
        out
    }

    /// Shifted integral `(1 - e_c) I`: the integral vanishing under the
    /// evaluation at `c`.
    pub fn integrate_from(&self, c: &Rational) -> Self {
        let full = self.integrate();
        let at_c = full.evaluate(c);
        &full - &PiecewiseElem::from_ground(GroundElem::constant(at_c))
    }

    /// Shift `S_c`: algebra automorphism with `S_c(H_a) = H_(a-c)` extending
    /// the ground shift.
    pub fn shift(&self, c: &Rational) -> Self {
        PiecewiseElem {
            base: self.base.shift(c),
            steps: self
                .steps
                .iter()
                .map(|(a, f)| (a - c, f.shift(c)))
                .collect(),
        }
    }

    /// Evaluation character at `c`: the unique character with
    /// `e_c(H_a) = co_heaviside(a - c)`. Note this is right-continuous at a
    /// generator's own jump (`e_a(H_a) = 1`), which is forced by
    /// multiplicativity; the *pointwise* oracle `eval_at` is left-continuous
    /// instead.
    pub fn evaluate(&self, c: &Rational) -> Rational {
        let mut acc = self.base.evaluate(c);
        for (a, f) in &self.steps {
            if co_heaviside(&(a - c)).is_one() {
                acc += &f.evaluate(c);
            }
        }
        acc
    }

    /// Induced pseudo-evaluation `id - integrate . derive`. It fixes every
    /// Heaviside generator and restricts to evaluation at 0 on the ground
    /// algebra, but it is not multiplicative.
    pub fn pseudo_eval(&self) -> Self {
        self - &self.derive().integrate()
    }

    /// Pointwise value at `t` with the left-continuous step convention
    /// `H_a(t) = heaviside(t - a)`; at a jump point this is the value from
    /// the left. Independent numeric oracle for the symbolic operations.
    pub fn eval_at(&self, t: &Rational) -> Rational {
        let mut acc = self.base.evaluate(t);
        for (a, f) in &self.steps {
            if heaviside(&(t - a)).is_one() {
                acc += &f.evaluate(t);
            }
        }
        acc
    }

    /// Drop or merge Heaviside terms so the result represents the same
    /// function on `[alpha, beta]`: `H_a` with `a <= alpha` is 1 there,
    /// `H_a` with `a >= beta` is 0 there.
    pub fn reduce_mod_interval(&self, alpha: &Rational, beta: &Rational) -> Self {
        let mut out = PiecewiseElem::from_ground(self.base.clone());
        for (a, f) in &self.steps {
            if a >= beta {
                continue;
            } else if a <= alpha {
                out.base = &out.base + f;
            } else {
                out.add_step(a.clone(), f.clone());
            }
        }
        out
    }
}

impl Add for &PiecewiseElem {
    type Output = PiecewiseElem;
    fn add(self, rhs: &PiecewiseElem) -> PiecewiseElem {
        let mut out = self.clone();
        out.base = &out.base + &rhs.base;
        for (a, f) in &rhs.steps {
            out.add_step(a.clone(), f.clone());
        }
        out
    }
}

impl Sub for &PiecewiseElem {
    type Output = PiecewiseElem;
    fn sub(self, rhs: &PiecewiseElem) -> PiecewiseElem {
        self + &(-rhs)
    }
}

impl Neg for &PiecewiseElem {
    type Output = PiecewiseElem;
    fn neg(self) -> PiecewiseElem {
        PiecewiseElem {
            base: -&self.base,
            steps: self.steps.iter().map(|(a, f)| (a.clone(), -f)).collect(),
        }
    }
}

impl Mul for &PiecewiseElem {
    type Output = PiecewiseElem;
    fn mul(self, rhs: &PiecewiseElem) -> PiecewiseElem {
        PiecewiseElem::mul(self, rhs)
    }
}

impl fmt::Display for PiecewiseElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut wrote = false;
        if !self.base.is_zero() {
            write!(f, "{}", self.base)?;
            wrote = true;
        }
        for (a, coef) in &self.steps {
            write_term(f, &mut wrote, coef, &format_h_token(a))?;
        }
        if !wrote {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl fmt::Debug for PiecewiseElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

pub(crate) fn format_h_token(a: &Rational) -> String {
    format!("H({})", format_jump_arg("x", a))
}

/// `x-a` with the sign folded in: `x-1`, `x+1/2`, `x-0`.
pub(crate) fn format_jump_arg(var: &str, a: &Rational) -> String {
    if a.is_negative() {
        format!("{}+{}", var, -a)
    } else {
        format!("{}-{}", var, a)
    }
}

/// Shared term printer: `coef * token` with coefficient parenthesized when
/// it is a sum, and +/- folded into the separator.
pub(crate) fn write_term(
    f: &mut fmt::Formatter<'_>,
    wrote: &mut bool,
    coef: &GroundElem,
    token: &str,
) -> fmt::Result {
    if coef.is_zero() {
        return Ok(());
    }
    let (lead, body) = render_coeff(coef);
    if *wrote {
        write!(f, " {} ", if lead { "-" } else { "+" })?;
    } else if lead {
        write!(f, "-")?;
    }
    *wrote = true;
    match body {
        Some(b) => write!(f, "{}*{}", b, token),
        None => write!(f, "{}", token),
    }
}

/// Split a coefficient into (leading minus?, printable factor). `None`
/// factor means the coefficient is +/-1 and the token stands alone.
fn render_coeff(coef: &GroundElem) -> (bool, Option<String>) {
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
            return (true, Some(format!("{}", -&c)));
        }
        return (false, Some(format!("{}", c)));
    }
    // single monomial of positive degree
    let s = coef.to_string();
    if let Some(stripped) = s.strip_prefix('-') {
        (true, Some(stripped.to_string()))
    } else {
        (false, Some(s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn rat(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn random_rational(rng: &mut StdRng) -> Rational {
        Rational::new(rng.gen_range(-9..=9), rng.gen_range(1..=6))
    }

    fn random_poly(rng: &mut StdRng) -> GroundElem {
        let deg = rng.gen_range(0..=3);
        GroundElem::from_coeffs((0..=deg).map(|_| random_rational(rng)).collect())
    }

    pub(crate) fn random_piecewise(rng: &mut StdRng) -> PiecewiseElem {
        let mut p = PiecewiseElem::from_ground(random_poly(rng));
        for _ in 0..rng.gen_range(0..=2) {
            let a = Rational::new(rng.gen_range(-4..=4), rng.gen_range(1..=2));
            p = &p + &PiecewiseElem::step(a, random_poly(rng));
        }
        p
    }

    fn h(a: i64) -> PiecewiseElem {
        PiecewiseElem::heaviside(rat(a, 1))
    }

    #[test]
    fn join_rule() {
        assert_eq!(&h(1) * &h(2), h(2));
        // (1 - H_1) * H_2 = 0: a falling step based left of a rising one
        let left = &PiecewiseElem::co_heaviside(rat(1, 1)) * &h(2);
        assert_eq!(left, PiecewiseElem::zero());
        // (H_1 + H_2) * H_1 = H_1 + H_2
        let s = &h(1) + &h(2);
        assert_eq!(&s * &h(1), s);
    }

    #[test]
    fn mul_matches_pointwise_oracle() {
        let mut rng = StdRng::seed_from_u64(20);
        for _ in 0..50 {
            let p = random_piecewise(&mut rng);
            let q = random_piecewise(&mut rng);
            let prod = &p * &q;
            for k in 0..10 {
                // avoid jump points: sample at thirteenths
                let t = Rational::new(2 * k - 9, 13);
                assert_eq!(prod.eval_at(&t), p.eval_at(&t) * q.eval_at(&t));
            }
        }
    }

    #[test]
    fn integrate_examples() {
        // I(H_1) = (x-1) H_1
        let got = h(1).integrate();
        let expected = PiecewiseElem::step(
            rat(1, 1),
            GroundElem::from_coeffs(vec![rat(-1, 1), rat(1, 1)]),
        );
        assert_eq!(got, expected);

        // I(H_-1) = (x+1) H_-1 - 1
        let got = h(-1).integrate();
        let expected = &PiecewiseElem::step(
            rat(-1, 1),
            GroundElem::from_coeffs(vec![rat(1, 1), rat(1, 1)]),
        ) - &PiecewiseElem::one();
        assert_eq!(got, expected);
    }

    #[test]
    fn integrate_matches_running_integral_oracle() {
        // Pointwise: I(p)(t) equals the running integral of the step
        // function, computed piece by piece between jump points.
        let mut rng = StdRng::seed_from_u64(21);
        for _ in 0..50 {
            let p = random_piecewise(&mut rng);
            let ip = p.integrate();
            for k in 0..8 {
                let t = Rational::new(2 * k - 7, 11);
                assert_eq!(ip.eval_at(&t), exact_running_integral(&p, &t), "p={p} t={t}");
            }
        }
    }

    /// Exact running integral of a piecewise element from 0 to t, summing
    /// polynomial pieces between consecutive jumps. Independent of
    /// `integrate`.
    fn exact_running_integral(p: &PiecewiseElem, t: &Rational) -> Rational {
        let mut cuts: Vec<Rational> = p.jump_points().cloned().collect();
        cuts.push(Rational::zero());
        cuts.push(t.clone());
        cuts.sort();
        cuts.dedup();
        let (lo, hi, sign) = if t >= &Rational::zero() {
            (Rational::zero(), t.clone(), Rational::one())
        } else {
            (t.clone(), Rational::zero(), -Rational::one())
        };
        let mut acc = Rational::zero();
        for w in cuts.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            if a < &lo || b > &hi {
                continue;
            }
            // polynomial valid on (a, b): base plus steps with jump <= a
            let mut piece = p.base().clone();
            for (jump, coef) in p.steps() {
                if jump <= a {
                    piece = &piece + coef;
                }
            }
            acc += &piece.definite_integral(a, b);
        }
        &sign * &acc
    }

    #[test]
    fn derive_rules() {
        assert_eq!(h(3).derive(), PiecewiseElem::zero());
        let xh1 = PiecewiseElem::step(rat(1, 1), GroundElem::x());
        assert_eq!(xh1.derive(), h(1));
    }

    #[test]
    fn section_axiom() {
        let mut rng = StdRng::seed_from_u64(22);
        for _ in 0..100 {
            let p = random_piecewise(&mut rng);
            assert_eq!(p.integrate().derive(), p);
        }
    }

    #[test]
    fn weak_rota_baxter_axiom() {
        let mut rng = StdRng::seed_from_u64(23);
        for _ in 0..200 {
            let p = random_piecewise(&mut rng);
            let q = random_piecewise(&mut rng);
            let lhs = &p.integrate() * &q.integrate();
            let rhs = &(&p * &q.integrate()).integrate() + &(&q * &p.integrate()).integrate();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn polarization_instance() {
        // (I f H_a)^2 = 2 I(f H_a * I f H_a)
        let mut rng = StdRng::seed_from_u64(24);
        for _ in 0..100 {
            let f = random_poly(&mut rng);
            let a = random_rational(&mut rng);
            let fha = PiecewiseElem::step(a, f);
            let int = fha.integrate();
            let lhs = &int * &int;
            let rhs = (&fha * &int).integrate().scalar_mul(&rat(2, 1));
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn exchange_law() {
        let mut rng = StdRng::seed_from_u64(25);
        for _ in 0..100 {
            let a = random_rational(&mut rng);
            let b = random_rational(&mut rng);
            let lhs = &PiecewiseElem::heaviside(a.max_with(&b))
                + &PiecewiseElem::heaviside(a.min_with(&b));
            let rhs = &PiecewiseElem::heaviside(a) + &PiecewiseElem::heaviside(b);
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn both_closed_forms_of_integration_agree() {
        // (I_pos(a) f) H_a - (value over [neg(a), 0]) Hbar_a
        //   = (I_a f) H_a + Hbar(a) * (value over [0, a])
        let mut rng = StdRng::seed_from_u64(26);
        for _ in 0..100 {
            let f = random_poly(&mut rng);
            let a = random_rational(&mut rng);
            let first = &PiecewiseElem::step(a.clone(), f.integrate_from(&a.pos_part()))
                - &PiecewiseElem::co_heaviside(a.clone()).scalar_mul(
                    &f.definite_integral(&a.neg_part(), &Rational::zero()),
                );
            let second = PiecewiseElem::step(a.clone(), f).integrate();
            assert_eq!(first, second, "a={a}");
        }
    }

    #[test]
    fn shift_rules() {
        assert_eq!(h(2).shift(&rat(1, 1)), h(1));
        let mut rng = StdRng::seed_from_u64(27);
        for _ in 0..50 {
            let p = random_piecewise(&mut rng);
            assert_eq!(p.shift(&Rational::zero()), p);
            let c = random_rational(&mut rng);
            // [S_c, I] = e_c I
            let lhs = &p.integrate().shift(&c) - &p.shift(&c).integrate();
            let rhs = PiecewiseElem::from_ground(GroundElem::constant(
                p.integrate().evaluate(&c),
            ));
            assert_eq!(lhs, rhs, "p={p} c={c}");
        }
    }

    #[test]
    fn evaluation_character() {
        assert_eq!(h(1).evaluate(&rat(0, 1)), rat(0, 1));
        assert_eq!(h(1).evaluate(&rat(2, 1)), rat(1, 1));
        // right-continuous at the jump by multiplicativity
        assert_eq!(h(0).evaluate(&rat(0, 1)), rat(1, 1));
        let mut rng = StdRng::seed_from_u64(28);
        for _ in 0..100 {
            let p = random_piecewise(&mut rng);
            let q = random_piecewise(&mut rng);
            let c = random_rational(&mut rng);
            assert_eq!((&p * &q).evaluate(&c), p.evaluate(&c) * q.evaluate(&c));
            // annihilates the image of the integral
            assert_eq!(p.integrate().evaluate(&Rational::zero()), Rational::zero());
        }
    }

    #[test]
    fn pseudo_eval_fixed_points_and_failure() {
        // fixes Heavisides
        assert_eq!(h(2).pseudo_eval(), h(2));
        // restricts to evaluation at 0 on ground elements
        let mut rng = StdRng::seed_from_u64(29);
        for _ in 0..50 {
            let f = random_poly(&mut rng);
            assert_eq!(
                PiecewiseElem::from_ground(f.clone()).pseudo_eval(),
                PiecewiseElem::from_ground(GroundElem::constant(
                    f.evaluate(&Rational::zero())
                ))
            );
        }

        // the multiplicativity failure witness: value 4*H_2 vs 2*H_2
        let xh1 = PiecewiseElem::step(rat(1, 1), GroundElem::x());
        let xh2 = PiecewiseElem::step(rat(2, 1), GroundElem::x());
        let product_then_eval = (&xh1 * &xh2).pseudo_eval();
        let eval_then_product = &xh1.pseudo_eval() * &xh2.pseudo_eval();
        assert_eq!(product_then_eval, h(2).scalar_mul(&rat(4, 1)));
        assert_eq!(eval_then_product, h(2).scalar_mul(&rat(2, 1)));
        assert_ne!(product_then_eval, eval_then_product);
    }

    #[test]
    fn pseudo_eval_closed_form() {
        // id - I.d on f H_a equals e_a(f) H_a + e_0(f) - e_min(a,0)(f)
        let mut rng = StdRng::seed_from_u64(30);
        for _ in 0..100 {
            let f = random_poly(&mut rng);
            let a = random_rational(&mut rng);
            let p = PiecewiseElem::step(a.clone(), f.clone());
            let lhs = p.pseudo_eval();
            let scalar = f.evaluate(&Rational::zero()) - f.evaluate(&a.neg_part());
            let rhs = &PiecewiseElem::step(a.clone(), GroundElem::constant(f.evaluate(&a)))
                + &PiecewiseElem::from_ground(GroundElem::constant(scalar));
            assert_eq!(lhs, rhs, "f={f} a={a}");
        }
    }

    #[test]
    fn eval_at_left_continuous() {
        assert_eq!(h(1).eval_at(&rat(1, 1)), rat(0, 1));
        let xh0 = PiecewiseElem::step(rat(0, 1), GroundElem::x());
        assert_eq!(xh0.eval_at(&rat(3, 1)), rat(3, 1));
    }

    #[test]
    fn eval_at_ring_homomorphism_off_jumps() {
        let mut rng = StdRng::seed_from_u64(31);
        for _ in 0..100 {
            let p = random_piecewise(&mut rng);
            let q = random_piecewise(&mut rng);
            let t = Rational::new(rng.gen_range(-30..=30), 7);
            if p.jump_points().any(|a| a == &t) || q.jump_points().any(|a| a == &t) {
                continue;
            }
            assert_eq!((&p * &q).eval_at(&t), p.eval_at(&t) * q.eval_at(&t));
            assert_eq!((&p + &q).eval_at(&t), p.eval_at(&t) + q.eval_at(&t));
        }
    }

    #[test]
    fn interval_reduction() {
        // on [0, 1]: H_-1 folds into the base, H_2 is dropped
        let p = &(&h(-1) + &h(2)) + &PiecewiseElem::step(rat(1, 2), GroundElem::x());
        let r = p.reduce_mod_interval(&rat(0, 1), &rat(1, 1));
        let expected = &PiecewiseElem::one() + &PiecewiseElem::step(rat(1, 2), GroundElem::x());
        assert_eq!(r, expected);
    }

    #[test]
    fn display_form() {
        let p = &(&PiecewiseElem::from_ground(GroundElem::x())
            + &PiecewiseElem::step(rat(1, 1), GroundElem::from_coeffs(vec![rat(-1, 1), rat(1, 1)])))
            - &PiecewiseElem::heaviside(rat(-1, 2));
        assert_eq!(p.to_string(), "x - H(x+1/2) + (x - 1)*H(x-1)");
    }
}
