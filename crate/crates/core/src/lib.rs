//! Hilbert-Schmidt degree of polarization for two-mode quantum light.
//!
//! The crate covers three layers:
//!
//! - [`distributions`]: truncated total-photon-number distributions for the
//!   catalog states (Fock, SU(2) coherent, quadrature coherent, thermal,
//!   twin beam) together with their moments and Mandel Q parameter.
//! - [`degree`]: the degree of polarization `P = Tr(rho^2) - sum p_N^2/(N+1)`
//!   evaluated as a series and through every known closed form.
//! - [`qpsolve`]: the convex quadratic program whose solution is the most
//!   polarized photon-number distribution at fixed mean photon number,
//!   solved by a primal active-set method on its two-multiplier KKT system.
//!
//! The [`cli`] module backs the `polmax` binary.

pub mod cli;
pub mod degree;
pub mod distributions;
mod error;
pub mod qpsolve;

pub use degree::{DegreeMethod, DegreeResult};
pub use distributions::{PhotonDistribution, StateSpec};
pub use error::{Error, Result};
pub use qpsolve::{KktReport, QpProblem, QpSolution};
