//! Nehari best approximation on the unit circle.
//!
//! Functions on the circle are handled in two representations: finitely
//! supported [`LaurentSeries`] (exact coefficient algebra) and
//! [`GridFunction`] samples on a dyadic grid (sup and L1 norms, pointwise
//! division). The Hankel operator of a symbol `g` is truncated to a
//! finite [`HankelMatrix`]; its top Schmidt pair yields the optimal
//! distance `inf ||g - f||_inf` over anticausal `f`, the optimal residual,
//! and a dual certificate in the predual unit ball.
//!
//! Everything is generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below fix the common double-precision case.

pub mod error;
pub mod factorization;
pub mod grid;
pub mod hankel;
pub mod primal;
pub mod scalar;
pub mod series;
pub mod solver;
pub mod symbol;

pub use error::NehariError;
pub use grid::GridFunction;
pub use hankel::{HankelMatrix, PowerIteration, SchmidtPair};
pub use scalar::{Real, C};
pub use series::LaurentSeries;
pub use solver::{solve, NehariSolution, SolveOptions};
pub use symbol::{parse_sym, render_sym, ParseError, SymbolSpec};

pub type Series64 = LaurentSeries<f64>;
pub type Grid64 = GridFunction<f64>;
pub type Hankel64 = HankelMatrix<f64>;
pub type Complex64 = C<f64>;
