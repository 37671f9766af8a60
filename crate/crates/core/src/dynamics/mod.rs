//! Contact Hamiltonian flows on the thermodynamic phase space.
//!
//! All three Hamiltonians depend on `(x, z)` only, so `xdot = dh/dy = 0`
//! and `zdot = h`: the field is a parameter of each trajectory, and `z`
//! relaxes to (or away from) the branch values `psi_mu(x)` while `y` is
//! dragged along to the branch slope `-dpsi_mu/dx`.

mod hamiltonian;
mod integrate;
mod region;

pub use hamiltonian::{
    branch_functions, generic_vector_field, in_windows, linearized_coefficients, linearized_solution,
    vector_field, vector_field_with, BranchFunctions, ContactHamiltonian, FrozenField, HamiltonianJet,
    HamiltonianVariant, LinearizedCoefficients, Psi0, VariantKind,
};
pub use integrate::{
    integrate, integrate_field, integrate_linear, rk4_step, IntegratorConfig, StopRule, Termination,
    Trajectory, BLOWUP_THRESHOLD,
};
pub use region::{classify_region, classify_region_for, classify_with, lyapunov, lyapunov_with, RegionLabel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactState {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub t: f64,
}

impl ContactState {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z, t: 0.0 }
    }

    /// The fixed point on branch `mu` at field `b.x`.
    pub fn on_branch(b: &BranchFunctions, mu: u8) -> Self {
        let i = mu as usize - 1;
        Self::new(b.x, b.y[i], b.psi[i])
    }
}
