//! Deterministic random generators and numeric oracles shared by the test
//! suites and the benchmark harness. Not part of the public API surface.

use crate::ground::GroundElem;
use crate::piecewise::PiecewiseElem;
use crate::scalars::Rational;

/// Tiny deterministic PRNG (xorshift64*), so the generators work the same
/// in unit tests, acceptance tests and benches without extra dependencies.
#[derive(Clone)]
pub struct Gen {
    state: u64,
}

impl Gen {
    pub fn new(seed: u64) -> Self {
        Gen {
            state: seed.wrapping_mul(2685821657736338717).max(1),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.state;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.state = x;
        x.wrapping_mul(2685821657736338717)
    }

    /// Uniform in `lo..=hi`.
    pub fn range(&mut self, lo: i64, hi: i64) -> i64 {
        let span = (hi - lo + 1) as u64;
        lo + (self.next_u64() % span) as i64
    }

    pub fn rational(&mut self) -> Rational {
        Rational::new(self.range(-9, 9), self.range(1, 6))
    }

    /// Rational at a "coarse" grid, handy for jump points.
    pub fn small_point(&mut self) -> Rational {
        Rational::new(self.range(-4, 4), self.range(1, 2))
    }

    pub fn poly(&mut self) -> GroundElem {
        self.poly_deg(3)
    }

    pub fn poly_deg(&mut self, max_deg: i64) -> GroundElem {
        let deg = self.range(0, max_deg);
        GroundElem::from_coeffs((0..=deg).map(|_| self.rational()).collect())
    }

    pub fn nonzero_poly(&mut self) -> GroundElem {
        loop {
            let p = self.poly();
            if !p.is_zero() {
                return p;
            }
        }
    }

    pub fn piecewise(&mut self) -> PiecewiseElem {
        let mut p = PiecewiseElem::from_ground(self.poly());
        for _ in 0..self.range(0, 2) {
            p = &p + &PiecewiseElem::step(self.small_point(), self.poly());
        }
        p
    }
}

/// Midpoint-rule quadrature of `p` from 0 to `t` with `n` panels, in f64.
/// Independent numeric oracle for the symbolic integral.
pub fn midpoint_quadrature(p: &PiecewiseElem, t: &Rational, n: usize) -> f64 {
    let tf = t.to_f64();
    let h = tf / n as f64;
    let mut acc = 0.0;
    for i in 0..n {
        let mid = (i as f64 + 0.5) * h;
        acc += eval_f64(p, mid) * h;
    }
    acc
}

/// f64 pointwise evaluation with the left-continuous step convention.
pub fn eval_f64(p: &PiecewiseElem, t: f64) -> f64 {
    let mut acc = poly_f64(p.base(), t);
    for (a, coef) in p.steps() {
        if t > a.to_f64() {
            acc += poly_f64(coef, t);
        }
    }
    acc
}

fn poly_f64(g: &GroundElem, t: f64) -> f64 {
    let mut acc = 0.0;
    for c in g.coeffs().iter().rev() {
        acc = acc * t + c.to_f64();
    }
    acc
}
