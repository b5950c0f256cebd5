//! Numerical inversion of Laplace transforms of infinitely divisible laws
//! through extrapolated Post-Widder approximants.

pub mod double_double;
pub mod driver;
pub mod cli;
pub mod derivatives;
pub mod error;
pub mod extrapolation;
pub mod models;
pub mod post_widder;
pub mod quadrature;
pub mod real;
pub mod special;

pub use double_double::DoubleDouble;
pub use error::{Error, Result};
pub use real::Real;
