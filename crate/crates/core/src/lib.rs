//! Collective dissipative dynamics of `n` identical two-level emitters.
//!
//! The crate builds the vectorized Lindblad generator of an emitter network
//! whose incoherent (`gamma`) and coherent (`g`) couplings are given as
//! symmetric matrices, propagates flattened density matrices with two
//! independent engines (exponential action and adaptive Runge–Kutta) plus a
//! single-excitation sector fast path, constructs the analytic dark-state
//! basis of the all-to-all generator, and predicts long-time states without
//! integrating the master equation.
//!
//! Conventions used throughout:
//!
//! * emitter `i` (1-based) is bit `i - 1` of the computational index, so the
//!   single-excitation ket `|i>` sits at index `2^(i-1)` and vacuum at `0`;
//! * matrices are flattened column by column;
//! * time is measured in units of `1/gamma`, with `gamma_ii = 1`;
//! * the master equation is `d rho/dt = -i[H, rho] + D[rho]`.

pub mod couplings;
pub mod dynamics;
pub mod entanglement;
pub mod error;
pub mod experiment;
pub mod hilbert;
pub mod io;
pub mod krylov;
pub mod linalg;
pub mod liouvillian;
pub mod oracles;
pub mod sector;
pub mod steady;

pub use couplings::{CouplingSet, JumpDecomposition};
pub use dynamics::{TimeGrid, Trajectory};
pub use error::{Error, Result};
pub use hilbert::{DensityMatrix, FlatState, PureState, Register};
pub use liouvillian::{Form, Representation, SpectrumReport, Superoperator};
pub use sector::SectorMatrix;
pub use steady::SteadyBasis;

/// Double-precision complex scalar.
pub type C64 = num_complex::Complex64;
/// Dense complex matrix.
pub type CMat = nalgebra::DMatrix<C64>;
/// Dense complex column vector.
pub type CVec = nalgebra::DVector<C64>;
/// Dense real matrix.
pub type RMat = nalgebra::DMatrix<f64>;
