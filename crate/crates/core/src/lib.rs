//! Numerical verification of the Haar functional on subalgebras of the
//! quantum SU(2) C*-algebra.
//!
//! The crate evaluates the Haar functional of polynomials in three
//! self-adjoint elements in two independent ways: through the weighted trace
//! over the infinite-dimensional representations `pi_phi`, and through the
//! closed-form measures (semicircle, q-integral, Askey-Wilson) that describe
//! its restriction to the generated subalgebra.
//!
//! Modules, bottom-up:
//!
//! * [`qseries`]: q-shifted factorials, `r phi s`, `8 W 7`, Jackson integrals.
//! * [`quadrature`]: Gauss rules used for the continuous parts of measures.
//! * [`spectral`]: Jacobi matrices, tridiagonal eigensolver, spectral data.
//! * [`orthopoly`]: q-Hermite, q-Charlier, Al-Salam-Chihara polynomials,
//!   Askey-Wilson measures and Poisson kernels.
//! * [`qsu2rep`]: truncated representation matrices, spherical elements,
//!   the explicit eigenbasis and the trace formula.
//! * [`haarverify`]: measure sides, intermediate identities and reports.

pub mod error;
pub mod haarverify;
pub mod orthopoly;
pub mod poly;
pub mod qseries;
pub mod qsu2rep;
pub mod quadrature;
pub mod spectral;

pub use error::{Error, Result};
pub use poly::Poly;
pub use qseries::{QContext, C64};
