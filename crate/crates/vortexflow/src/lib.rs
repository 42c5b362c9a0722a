//! Simulation toolkit for de Broglie–Bohm quantum trajectories in 2D
//! harmonic-oscillator superpositions.
//!
//! The crate locates moving nodal points (quantum vortices) of a wavefunction,
//! finds the companion X-point in the frame co-moving with each node,
//! diagnoses the resulting "nodal point – X-point complex" (stability,
//! Hopf bifurcations, adiabaticity), integrates trajectories and deviation
//! vectors to obtain finite-time Lyapunov exponents, counts encounter events
//! with the complexes, and independently validates the chaotic-scattering
//! picture on an analytically solvable toy model.
//!
//! Module map:
//! - [`wavefield`]: eigenstates, superpositions, Bohmian velocity field,
//!   local quadratic expansions.
//! - [`nodal`]: closed-form and Newton solvers for nodal points, nodal-line
//!   tracking, bifurcation events.
//! - [`xcomplex`]: X-point location/refinement, eigenstructure, the ⟨f₃⟩
//!   stability indicator, Hopf scans, adiabaticity checks.
//! - [`dynamics`]: adaptive trajectory + variational integration, FTLE,
//!   encounter detection and classification.
//! - [`scattering`]: the solvable point-vortex scattering model (invariant,
//!   separatrix, traversal times, deviation amplification).
//! - [`ensemble`]: seeded parallel ensembles, complex scans, histograms,
//!   CSV reports.

pub mod config;
pub mod dynamics;
pub mod ensemble;
pub mod hermite;
pub mod nodal;
pub mod rk;
pub mod scattering;
pub mod wavefield;
pub mod xcomplex;

pub use wavefield::{WaveSpec, LocalExpansion};
pub use nodal::NodalState;
pub use xcomplex::ComplexSnapshot;
