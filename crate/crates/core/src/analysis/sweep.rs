use crate::dynamics::{
    in_windows, integrate_field, ContactState, FrozenField, HamiltonianVariant, IntegratorConfig, Psi0,
    StopRule, VariantKind,
};
use crate::error::{Error, Result};
use crate::model::{self, ModelParams};
use crate::numeric::linspace;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    /// Flow used inside the three-branch windows.
    pub variant: HamiltonianVariant,
    pub integrator: IntegratorConfig,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            variant: HamiltonianVariant::with_unit_psi0(VariantKind::Squared),
            integrator: IntegratorConfig { step: 1e-2, t_max: 500.0, stop: StopRule::Stalled, tolerance: 1e-13, patience: 10 },
        }
    }
}

/// Quasi-static field sweep `x_min -> x_max -> x_min`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// Up-sweep followed by down-sweep.
    pub schedule: Vec<f64>,
    pub y_path: Vec<f64>,
    pub z_path: Vec<f64>,
    /// Length of the up-sweep part of `schedule`.
    pub n_up: usize,
    /// Fields at which the followed magnetization changed sign.
    pub jump_points: Vec<f64>,
    /// `int (y_down - y_up) dx` over the sweep range (trapezoid rule).
    pub area: f64,
}

impl SweepResult {
    pub fn up(&self) -> (&[f64], &[f64]) {
        (&self.schedule[..self.n_up], &self.y_path[..self.n_up])
    }

    pub fn down(&self) -> (&[f64], &[f64]) {
        (&self.schedule[self.n_up..], &self.y_path[self.n_up..])
    }
}

/// Relaxes from `(x, y_prev)` with `z0 = psi(x, y_prev)`.
///
/// Inside the windows the configured flow is used. Outside them a single
/// branch exists and `h = -psi0 (z - psi1)` relaxes onto it; the removed plane
/// `x = 0` holds the state.
fn relax(params: &ModelParams, config: &SweepConfig, x: f64, y_prev: f64) -> Result<(f64, f64)> {
    let z0 = model::pseudo_free_energy(params, x, y_prev);
    if x == 0.0 {
        return Ok((y_prev, z0));
    }
    let field = if in_windows(params, x) {
        FrozenField::new(&config.variant, params, x)?
    } else {
        FrozenField::single_branch(params, config.variant.psi0, x)?
    };
    let tr = integrate_field(&field, Some(config.variant), ContactState::new(x, y_prev, z0), &config.integrator)?;
    let end = tr.last();
    Ok((end.y, end.z))
}

pub fn hysteresis_sweep(
    params: &ModelParams,
    x_min: f64,
    x_max: f64,
    n_steps: usize,
    config: &SweepConfig,
) -> Result<SweepResult> {
    if !params.is_low_temperature() {
        return Err(Error::Phase(format!(
            "no hysteresis for j0bar = {} (needs 2 j0bar > 1)",
            params.j0bar()
        )));
    }
    if !(x_min.is_finite() && x_max.is_finite() && x_min < x_max) || n_steps < 2 {
        return Err(Error::InvalidInput(format!(
            "sweep needs x_min < x_max and at least two steps, got [{x_min}, {x_max}] with {n_steps}"
        )));
    }
    if let Psi0::Const(c) = config.variant.psi0 {
        if !(c > 0.0) {
            return Err(Error::InvalidInput("psi0 must be positive".into()));
        }
    }
    let up = linspace(x_min, x_max, n_steps);
    let schedule: Vec<f64> = up.iter().chain(up.iter().rev()).copied().collect();

    let start = model::most_stable_root(params, x_min)?;
    let mut y = start.y_star;
    let mut y_path = Vec::with_capacity(schedule.len());
    let mut z_path = Vec::with_capacity(schedule.len());
    let mut jump_points = Vec::new();
    for &x in &schedule {
        let (y_new, z_new) = relax(params, config, x, y)?;
        if y_path.last().is_some_and(|&prev: &f64| prev.signum() != y_new.signum()) {
            jump_points.push(x);
        }
        log::debug!("sweep x = {x:.6}: y = {y_new:.9}");
        y = y_new;
        y_path.push(y_new);
        z_path.push(z_new);
    }

    let n = n_steps;
    let area = (0..n - 1)
        .map(|i| {
            let gap_a = y_path[2 * n - 1 - i] - y_path[i];
            let gap_b = y_path[2 * n - 2 - i] - y_path[i + 1];
            0.5 * (gap_a + gap_b) * (up[i + 1] - up[i])
        })
        .sum();
    Ok(SweepResult { schedule, y_path, z_path, n_up: n, jump_points, area })
}
