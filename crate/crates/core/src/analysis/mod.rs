//! Experiments built on the flows: attractor maps, hysteresis sweeps,
//! stability verification and the finite-size audit.

mod attractor;
mod audit;
pub mod checks;
mod sweep;
mod verify;

pub use attractor::{
    attractor_map, kink_jump, AttractorCell, AttractorConfig, AttractorMap, CellOutcome, Limit,
    DEFAULT_EXCLUSION,
};
pub use audit::{gaps_strictly_decreasing, saddle_point_audit, AuditRow};
pub use sweep::{hysteresis_sweep, SweepConfig, SweepResult};
pub use verify::{
    basin_trials, decay_rate, growth_rate, verify_theorems, BasinTrial, CheckEntry, RateFit, TheoremReport,
    TrialOutcome,
};

#[cfg(test)]
mod tests;
