//! Exact symbolic kernel for piecewise functions and Dirac distributions,
//! with an application layer that synthesizes and verifies Green's
//! operators/functions of linear ODE boundary problems.
//!
//! All arithmetic is exact over the rationals. The layers build on each
//! other:
//!
//! * [`scalars`] - arbitrary-precision rationals and the scalar Heaviside
//!   operator (left-continuous, `H(0) = 0`).
//! * [`ground`] - the polynomial ground algebra with derivation, integral
//!   from 0, shifts and evaluations.
//! * [`piecewise`] - the piecewise extension with Heaviside generators.
//! * [`dist`] - the distribution module with Dirac generators.
//! * [`bivariate`] - two-variable distributions including the diagonal
//!   family `H(x-xi)`, `delta(x-xi)`, ...
//! * [`idop`] - the ring of integro-differential operators and Stieltjes
//!   boundary conditions.
//! * [`boundary`] - boundary problems: Green's operator synthesis, Green's
//!   function extraction, distributional verification, piecewise forcing.
//! * [`batch`] - data-parallel helpers for bulk evaluation and batch
//!   solving (rayon under the `parallel` feature, sequential otherwise).

pub mod batch;
pub mod bivariate;
pub mod boundary;
pub mod dist;
pub mod error;
pub mod ground;
pub mod idop;
pub mod piecewise;
pub mod scalars;

#[doc(hidden)]
pub mod testkit;

pub use bivariate::{Axis, BivDistElem, BivGround, BivPiecewise};
pub use boundary::{apply_greens, check_uniqueness, extract_greens_fn, verify_distributional, BoundaryProblem, EvalMatrix, GreensFn, UniquenessBudget, VerificationReport};
pub use dist::DistElem;
pub use error::{AlgebraError, Result};
pub use ground::{Character, GroundElem};
pub use idop::{IdOp, StieltjesCond};
pub use piecewise::PiecewiseElem;
pub use scalars::{co_heaviside, heaviside, join, meet, HeavisideValue, Rational};
