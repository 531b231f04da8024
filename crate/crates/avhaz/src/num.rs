//! Scalar abstraction for the curve-arithmetic core.
//!
//! The step-function layer ([`crate::curve`]) is pure arithmetic and is
//! written against this trait so it works for any IEEE float width. The
//! statistical layers above it (model fitting, resampling, simulation)
//! operate on the `f64` aliases exported from the crate root.

use num_traits::Float;
use std::fmt::Debug;

/// Floating-point scalar usable by the step-curve arithmetic.
pub trait Scalar: Float + Debug + Send + Sync + 'static {}

impl<T> Scalar for T where T: Float + Debug + Send + Sync + 'static {}
