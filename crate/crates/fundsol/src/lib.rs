//! Fundamental solution of the linearized three-wave kinetic equation in its
//! classical approximation, built from Mellin and Laplace contour integrals.

pub mod complexfn;
pub mod bfunc;
pub mod calibration;
pub mod cauchy;
pub mod contour;
pub mod error;
pub mod kernels;
pub mod kinetic;
pub mod lambda;
pub mod ufunc;

pub use error::{Error, Result};

/// Complex scalar used by all contour machinery.
pub type C64 = num_complex::Complex<f64>;

/// Real scalar accepted by the generic kernels and the direct solver.
pub trait Real:
    num_traits::Float + num_traits::FloatConst + num_traits::FromPrimitive + std::fmt::Debug + Send + Sync + 'static
{
}

impl<T> Real for T where
    T: num_traits::Float + num_traits::FloatConst + num_traits::FromPrimitive + std::fmt::Debug + Send + Sync + 'static
{
}
