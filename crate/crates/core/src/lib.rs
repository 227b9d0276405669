//! Diagnostics for the two-vortex-ring collision at desk scale.
//!
//! The crate generates and evolves a pair of counter-rotating Gaussian-core
//! vortex rings colliding at an angle in a periodic box, then measures the
//! quantities a dissipation analysis of that flow consumes:
//!
//! - [`grid`] — periodic fields, spectral Biot–Savart, the two-ring
//!   initial configuration,
//! - [`solver`] — pseudo-spectral vorticity integrator (integrating-factor
//!   RK4, 2/3-rule dealiasing),
//! - [`sparseness`] — super-level sets of the locally maximal vorticity
//!   component and their 1D/3D sparseness at scale,
//! - [`oscillation`] — weighted local mean oscillations of the vorticity
//!   direction and log-composite weights,
//! - [`harmonic`] — harmonic measure of slit sets in the unit disc and the
//!   maximum-principle bound,
//! - [`monitor`] — scale formulas, escape times and the criticality
//!   verdict assembled from all of the above.
//!
//! Everything is generic over the floating-point type via [`Scalar`];
//! the aliases below fix `f64` (the default used by the CLI) and `f32`.

pub mod error;
pub mod grid;
pub mod harmonic;
pub mod monitor;
pub mod oscillation;
pub mod sat;
pub mod scalar;
pub mod slf;
pub mod solver;
pub mod sparseness;
pub mod spectral;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// `f64` concrete types (the CLI default).
pub type GridSpec64 = grid::GridSpec<f64>;
pub type Field64 = grid::VectorField3D<f64>;
pub type SimState64 = solver::SimState<f64>;
pub type Timeline64 = solver::Timeline<f64>;

/// `f32` concrete types.
pub type GridSpec32 = grid::GridSpec<f32>;
pub type Field32 = grid::VectorField3D<f32>;
