//! Data-parallel helpers for the embarrassingly parallel surfaces of the
//! kernel: bulk pointwise sampling, batch solving and sweep-style checks.
//!
//! All element types are immutable values, so fanning work out is safe by
//! construction. With the `parallel` feature (default) the helpers run on
//! rayon; without it they are plain sequential loops with identical results.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::piecewise::PiecewiseElem;
use crate::scalars::Rational;

/// Map over a slice, in parallel when the `parallel` feature is enabled.
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Sequential map, always. Kept alongside [`map`] so call sites (and the
/// benchmark suite) can compare the two on the same build.
pub fn map_seq<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

/// Fallible map; returns the first error (parallel builds pick an
/// unspecified failing item, sequential builds the first in order).
pub fn try_map<T, R, E, F>(items: &[T], f: F) -> Result<Vec<R>, E>
where
    T: Sync,
    R: Send,
    E: Send,
    F: Fn(&T) -> Result<R, E> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Equidistant sample grid: `n` points from `from` to `to` inclusive
/// (a single midpoint when `n == 1`).
pub fn sample_grid(from: &Rational, to: &Rational, n: usize) -> Vec<Rational> {
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![(from + to) / Rational::from_int(2)];
    }
    let span = to - from;
    let denom = Rational::from_int(n as i64 - 1);
    (0..n)
        .map(|i| from + &(&span * &Rational::from_int(i as i64) / &denom))
        .collect()
}

/// Pointwise rows `(t, p(t))` over an equidistant grid.
pub fn sample_rows(p: &PiecewiseElem, from: &Rational, to: &Rational, n: usize) -> Vec<(Rational, Rational)> {
    let grid = sample_grid(from, to, n);
    map(&grid, |t| (t.clone(), p.eval_at(t)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ground::GroundElem;

    #[test]
    fn grid_endpoints() {
        let g = sample_grid(&Rational::from_int(-1), &Rational::from_int(1), 5);
        assert_eq!(g.len(), 5);
        assert_eq!(g[0], Rational::from_int(-1));
        assert_eq!(g[2], Rational::zero());
        assert_eq!(g[4], Rational::from_int(1));
    }

    #[test]
    fn parallel_and_sequential_agree() {
        let p = &PiecewiseElem::from_ground(GroundElem::x())
            + &PiecewiseElem::heaviside(Rational::zero());
        let grid = sample_grid(&Rational::from_int(-2), &Rational::from_int(2), 33);
        let par: Vec<_> = map(&grid, |t| p.eval_at(t));
        let seq: Vec<_> = map_seq(&grid, |t| p.eval_at(t));
        assert_eq!(par, seq);
    }
}
