//! Mean-field Ising thermodynamics as a Legendre submanifold, with contact
//! Hamiltonian flows that relax onto its branches.
//!
//! The [`model`] module solves the self-consistency equation, [`legendre`]
//! samples and splits the submanifold, [`dynamics`] integrates the flows and
//! [`analysis`] runs the numerical experiments built on them.

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod legendre;
pub mod model;
pub mod numeric;

pub use dynamics::{ContactState, HamiltonianVariant, IntegratorConfig, Psi0, RegionLabel, Trajectory, VariantKind};
pub use error::{Error, Result};
pub use legendre::{Branch, BranchDomain, Convention, LegendreCurve, LegendrePoint, Plane, PruneMode, Polyline};
pub use model::{BranchRoot, ModelParams, PhaseRegime, RawParams, Stability};
