use crate::error::{Error, Result};
use crate::model::ModelParams;

use super::hamiltonian::{FrozenField, HamiltonianVariant};
use super::ContactState;

/// `|y|` or `|z|` beyond this aborts integration.
pub const BLOWUP_THRESHOLD: f64 = 1e6;

/// Early-termination criterion, checked after every step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopRule {
    /// `|z - nearest fixed value| < tolerance` for `patience` consecutive steps.
    Converged,
    /// `|dz|` and `|dy|` per step both below `tolerance` for `patience` steps.
    Stalled,
    /// `|z - anchor| > radius`.
    Escaped { anchor: f64, radius: f64 },
    Never,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub step: f64,
    pub t_max: f64,
    pub stop: StopRule,
    pub tolerance: f64,
    pub patience: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { step: 1e-3, t_max: 200.0, stop: StopRule::Converged, tolerance: 1e-13, patience: 10 }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(Error::InvalidInput(format!("step must be positive, got {}", self.step)));
        }
        if !(self.t_max.is_finite() && self.t_max >= 0.0) {
            return Err(Error::InvalidInput(format!("t_max must be non-negative, got {}", self.t_max)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Termination {
    Converged,
    Stalled,
    Escaped,
    TimeLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<ContactState>,
    /// `None` for the single-branch relaxation field.
    pub variant: Option<HamiltonianVariant>,
    pub step: f64,
    pub termination: Termination,
}

impl Trajectory {
    pub fn last(&self) -> &ContactState {
        self.states.last().expect("a trajectory holds at least its initial state")
    }

    pub fn max_x_drift(&self) -> f64 {
        let x0 = self.states[0].x;
        self.states.iter().map(|s| (s.x - x0).abs()).fold(0.0, f64::max)
    }
}

/// One classical fourth-order Runge-Kutta step of a planar system.
#[inline]
pub fn rk4_step<F: Fn([f64; 2]) -> [f64; 2]>(f: F, s: [f64; 2], h: f64) -> [f64; 2] {
    let add = |a: [f64; 2], k: [f64; 2], c: f64| [a[0] + c * k[0], a[1] + c * k[1]];
    let k1 = f(s);
    let k2 = f(add(s, k1, 0.5 * h));
    let k3 = f(add(s, k2, 0.5 * h));
    let k4 = f(add(s, k3, h));
    [
        s[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        s[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

fn step_count(step: f64, t_end: f64) -> usize {
    (t_end / step - 1e-9).ceil().max(0.0) as usize
}

/// RK4 solution of `Ydot = -c Y + d Z`, `Zdot = -c Z` at `t_end`.
pub fn integrate_linear(c: f64, d: f64, y0: f64, z0: f64, step: f64, t_end: f64) -> (f64, f64) {
    let n = step_count(step, t_end);
    let mut s = [y0, z0];
    for _ in 0..n {
        s = rk4_step(|v| [-c * v[0] + d * v[1], -c * v[1]], s, step);
    }
    (s[0], s[1])
}

/// Integrates a variant's flow from `state0`, solving the branches at its field once.
pub fn integrate(
    variant: &HamiltonianVariant,
    params: &ModelParams,
    state0: ContactState,
    config: &IntegratorConfig,
) -> Result<Trajectory> {
    let field = FrozenField::new(variant, params, state0.x)?;
    integrate_field(&field, Some(*variant), state0, config)
}

pub fn integrate_field(
    field: &FrozenField,
    variant: Option<HamiltonianVariant>,
    state0: ContactState,
    config: &IntegratorConfig,
) -> Result<Trajectory> {
    config.validate()?;
    if ![state0.x, state0.y, state0.z, state0.t].iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidInput("initial state must be finite".into()));
    }
    let h = config.step;
    let n = step_count(h, config.t_max);
    let mut states = Vec::with_capacity(n.min(1 << 16) + 1);
    states.push(state0);
    let mut s = [state0.y, state0.z];
    let mut streak = 0usize;
    let mut termination = Termination::TimeLimit;

    for k in 1..=n {
        let next = rk4_step(|v| field.rates(v[0], v[1]), s, h);
        let t = state0.t + k as f64 * h;
        if !(next[0].abs() <= BLOWUP_THRESHOLD && next[1].abs() <= BLOWUP_THRESHOLD) {
            return Err(Error::Blowup {
                t,
                detail: format!("y = {:e}, z = {:e} at x = {}", next[0], next[1], state0.x),
            });
        }
        // Once every increment drops below half an ulp the discrete flow sits
        // at a floating-point fixed point and cannot move again.
        let frozen = next == s;
        let near = |tol: f64| field.fixed_values().iter().any(|a| (next[1] - a).abs() < tol);
        let quiet = match config.stop {
            StopRule::Converged => frozen || near(config.tolerance),
            StopRule::Stalled => {
                (next[0] - s[0]).abs() < config.tolerance && (next[1] - s[1]).abs() < config.tolerance
            }
            StopRule::Escaped { .. } | StopRule::Never => false,
        };
        s = next;
        states.push(ContactState { x: state0.x, y: s[0], z: s[1], t });
        if let StopRule::Escaped { anchor, radius } = config.stop {
            if (s[1] - anchor).abs() > radius {
                termination = Termination::Escaped;
                break;
            }
        }
        streak = if quiet { streak + 1 } else { 0 };
        if streak >= config.patience.max(1) {
            termination = match config.stop {
                StopRule::Converged if near(config.tolerance) => Termination::Converged,
                _ => Termination::Stalled,
            };
            break;
        }
    }
    Ok(Trajectory { states, variant, step: h, termination })
}
