use std::fmt;

use rayon::prelude::*;

use crate::dynamics::{
    branch_functions, integrate_field, linearized_coefficients, lyapunov_with, vector_field_with, BranchFunctions,
    ContactState, FrozenField, HamiltonianVariant, IntegratorConfig, RegionLabel, StopRule, Termination,
    VariantKind,
};
use crate::error::{Error, Result};
use crate::model::{self, ModelParams};
use crate::numeric::{linear_fit, linspace};

/// One named pass/fail line with its worst observed margin.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckEntry {
    pub name: String,
    pub passed: bool,
    pub worst: f64,
    pub threshold: f64,
    pub detail: String,
}

impl CheckEntry {
    pub fn new(name: &str, worst: f64, threshold: f64, passed: bool, detail: String) -> Self {
        Self { name: name.to_string(), passed, worst, threshold, detail }
    }

    /// Passes when `worst <= threshold` (NaN fails).
    pub fn at_most(name: &str, worst: f64, threshold: f64, detail: String) -> Self {
        Self::new(name, worst, threshold, worst <= threshold, detail)
    }
}

impl fmt::Display for CheckEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: worst {:.3e} (limit {:.3e}) {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.worst,
            self.threshold,
            self.detail
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrialOutcome {
    /// Ran to a stop rule or the time limit.
    Finished(Termination),
    /// Left the modelled region (blow-up).
    Escaped,
    Failed(Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasinTrial {
    pub x: f64,
    pub region: RegionLabel,
    pub y0: f64,
    pub z0: f64,
    /// Branch the region's theorem says attracts the state; `None` when no
    /// branch is stable there.
    pub target: Option<u8>,
    pub terminal: Option<ContactState>,
    /// `|z(T) - psi_target|`, infinite when there is no terminal state.
    pub gap: f64,
    /// `z(T) - psi_target`.
    pub signed_gap: f64,
    pub y_gap: f64,
    /// `1 / (psi0 * psi21 * T)`: rigorous upper bound on the gap for the
    /// algebraic approach to the double root of the Squared flow.
    pub algebraic_bound: f64,
    /// Largest `(V_{k+1} - V_k) / (1 + |V_k|)` along the trajectory.
    pub lyapunov_increase: f64,
    pub x_drift: f64,
    pub outcome: TrialOutcome,
}

fn upper_setup(kind: VariantKind, b: &BranchFunctions, f: f64) -> (RegionLabel, f64, f64, Option<u8>) {
    match kind {
        VariantKind::Squared => (RegionLabel::D2Plus, b.y[1], b.psi[1] + f * b.diff(2, 1), Some(2)),
        VariantKind::Cubic => (RegionLabel::D3Plus, b.y[2], b.psi[1] + f * b.diff(3, 2), Some(3)),
        VariantKind::Quadratic => (RegionLabel::D2Plus, b.y[1], b.psi[1] + f * b.diff(2, 1), None),
    }
}

fn run_trial(
    variant: &HamiltonianVariant,
    b: &BranchFunctions,
    region: RegionLabel,
    y0: f64,
    z0: f64,
    target: Option<u8>,
    config: &IntegratorConfig,
    adaptive: bool,
) -> BasinTrial {
    let field = FrozenField::from_branches(variant, b);
    let mut local = *config;
    if adaptive {
        if let Some(mu) = target {
            let c = -field.eval(b.psi[mu as usize - 1]).2;
            if c > 0.0 {
                local.t_max = config.t_max.max(25.0 / c);
                local.step = config.step.max(local.t_max / 2e5);
            }
        }
    }
    let config = &local;
    let mut trial = BasinTrial {
        x: b.x,
        region,
        y0,
        z0,
        target,
        terminal: None,
        gap: f64::INFINITY,
        signed_gap: f64::NAN,
        y_gap: f64::INFINITY,
        algebraic_bound: f64::INFINITY,
        lyapunov_increase: 0.0,
        x_drift: 0.0,
        outcome: TrialOutcome::Escaped,
    };
    let tr = match integrate_field(&field, Some(*variant), ContactState::new(b.x, y0, z0), config) {
        Ok(tr) => tr,
        Err(Error::Blowup { .. }) => return trial,
        Err(e) => {
            trial.outcome = TrialOutcome::Failed(e);
            return trial;
        }
    };
    let end = *tr.last();
    trial.terminal = Some(end);
    trial.x_drift = tr.max_x_drift();
    trial.outcome = TrialOutcome::Finished(tr.termination);
    if let Some(mu) = target {
        let i = mu as usize - 1;
        trial.signed_gap = end.z - b.psi[i];
        trial.gap = trial.signed_gap.abs();
        trial.y_gap = (end.y - b.y[i]).abs();
        let p0 = variant.psi0.value(b.x);
        trial.algebraic_bound = 1.0 / (p0 * b.diff(2, 1) * end.t);
        let mut prev: Option<f64> = None;
        for s in &tr.states {
            let v = match lyapunov_with(variant.kind, b, &field, region, s.z) {
                Ok((v, _)) => v,
                Err(_) => {
                    trial.lyapunov_increase = f64::INFINITY;
                    break;
                }
            };
            if let Some(p) = prev {
                trial.lyapunov_increase = trial.lyapunov_increase.max((v - p) / (1.0 + p.abs()));
            }
            prev = Some(v);
        }
    }
    trial
}

/// `n_x` fields in `[0.3, 0.95] * x_sp`, each with `n_per_region` starts below
/// the metastable branch (`D1+`) and `n_per_region` above it.
///
/// Below: `z0 = psi1 + f * psi21` with `f` in `[-1, 0.5]`, `y0 = y*_1`.
/// Above: Squared and Quadratic use `z0 = psi2 + f * psi21`, `f` in
/// `[0.05, 1]`; Cubic uses `z0 = psi2 + f * psi32`, `f` in `[0.25, 2]`.
///
/// With `adaptive_horizon`, each trial whose target branch is a simple root
/// runs for at least `25 / c` time units, `c` being the linear decay rate
/// there, with the step widened so that no trial exceeds `2e5` steps.
pub fn basin_trials(
    params: &ModelParams,
    variant: &HamiltonianVariant,
    n_x: usize,
    n_per_region: usize,
    config: &IntegratorConfig,
    adaptive_horizon: bool,
) -> Result<Vec<BasinTrial>> {
    let x_sp = model::spinodal_field(params)
        .ok_or_else(|| Error::Phase(format!("no three-branch window at j0bar = {}", params.j0bar())))?;
    let xs = linspace(0.3 * x_sp, 0.95 * x_sp, n_x);
    let branches = xs.iter().map(|&x| branch_functions(params, x)).collect::<Result<Vec<_>>>()?;
    let (lo, hi) = match variant.kind {
        VariantKind::Cubic => (0.25, 2.0),
        _ => (0.05, 1.0),
    };
    let lower = linspace(-1.0, 0.5, n_per_region);
    let upper = linspace(lo, hi, n_per_region);
    let mut jobs = Vec::with_capacity(2 * n_x * n_per_region);
    for b in &branches {
        for &f in &lower {
            jobs.push((b, RegionLabel::D1Plus, b.y[0], b.psi[0] + f * b.diff(2, 1), Some(1)));
        }
        for &f in &upper {
            let (region, y0, z0, target) = upper_setup(variant.kind, b, f);
            jobs.push((b, region, y0, z0, target));
        }
    }
    Ok(jobs
        .par_iter()
        .map(|&(b, region, y0, z0, target)| run_trial(variant, b, region, y0, z0, target, config, adaptive_horizon))
        .collect())
}

/// Measured exponential rate of `|z - psi_mu|` against the linearization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub measured: f64,
    pub predicted: f64,
    pub rel_error: f64,
    /// `|z - psi_mu|` moved strictly monotonically at every step.
    pub monotone: bool,
    /// The state left the `radius` neighbourhood (growth fits only).
    pub escaped: bool,
}

fn fit_log_gap(states: &[ContactState], anchor: f64, lo: f64, hi: f64) -> Result<f64> {
    let (ts, ls): (Vec<f64>, Vec<f64>) = states
        .iter()
        .filter_map(|s| {
            let g = (s.z - anchor).abs();
            (g >= lo && g <= hi).then(|| (s.t, g.ln()))
        })
        .unzip();
    if ts.len() < 10 {
        return Err(Error::Convergence(format!("only {} samples in the fitting window", ts.len())));
    }
    Ok(linear_fit(&ts, &ls).0)
}

fn strictly_monotone(states: &[ContactState], anchor: f64, growing: bool) -> bool {
    states.windows(2).all(|w| {
        let (a, b) = ((w[0].z - anchor).abs(), (w[1].z - anchor).abs());
        if growing {
            b > a
        } else {
            b < a || b < 1e-12
        }
    })
}

/// Decay rate of a small offset from a stable branch, fitted over
/// `|z - psi_mu|` in `[1e-10, |offset|]`.
pub fn decay_rate(
    variant: &HamiltonianVariant,
    params: &ModelParams,
    x: f64,
    mu: u8,
    offset: f64,
) -> Result<RateFit> {
    let b = branch_functions(params, x)?;
    let lc = linearized_coefficients(variant, params, x, mu)?;
    if !(lc.c > 0.0) {
        return Err(Error::InvalidInput(format!("branch {mu} is not linearly stable (c = {})", lc.c)));
    }
    let i = mu as usize - 1;
    let field = FrozenField::from_branches(variant, &b);
    let t_max = (offset.abs() / 1e-11).ln() / lc.c;
    let cfg = IntegratorConfig { step: 1e-3, t_max, stop: StopRule::Never, ..Default::default() };
    let tr = integrate_field(&field, Some(*variant), ContactState::new(x, b.y[i], b.psi[i] + offset), &cfg)?;
    let measured = -fit_log_gap(&tr.states, b.psi[i], 1e-10, offset.abs())?;
    Ok(RateFit {
        measured,
        predicted: lc.c,
        rel_error: (measured - lc.c).abs() / lc.c,
        monotone: strictly_monotone(&tr.states, b.psi[i], false),
        escaped: false,
    })
}

/// Growth rate of a perturbation off an unstable branch, fitted over
/// `|z - psi_mu|` in `[perturbation, 1e-4]`; integration stops on leaving the
/// `radius` neighbourhood.
pub fn growth_rate(
    variant: &HamiltonianVariant,
    params: &ModelParams,
    x: f64,
    mu: u8,
    perturbation: f64,
    radius: f64,
) -> Result<RateFit> {
    let b = branch_functions(params, x)?;
    let lc = linearized_coefficients(variant, params, x, mu)?;
    if !(lc.c < 0.0) {
        return Err(Error::InvalidInput(format!("branch {mu} is not linearly unstable (c = {})", lc.c)));
    }
    let i = mu as usize - 1;
    let field = FrozenField::from_branches(variant, &b);
    let rate = -lc.c;
    let cfg = IntegratorConfig {
        step: 1e-3,
        t_max: 4.0 * (radius / perturbation).ln() / rate,
        stop: StopRule::Escaped { anchor: b.psi[i], radius },
        ..Default::default()
    };
    let tr = integrate_field(&field, Some(*variant), ContactState::new(x, b.y[i], b.psi[i] + perturbation), &cfg)?;
    let measured = fit_log_gap(&tr.states, b.psi[i], perturbation, 1e-4)?;
    Ok(RateFit {
        measured,
        predicted: rate,
        rel_error: (measured - rate).abs() / rate,
        monotone: strictly_monotone(&tr.states, b.psi[i], true),
        escaped: tr.termination == Termination::Escaped,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheoremReport {
    pub variant: VariantKind,
    pub trajectories: usize,
    pub entries: Vec<CheckEntry>,
}

impl TheoremReport {
    pub fn all_passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }
}

impl fmt::Display for TheoremReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} flow, {} trajectories", self.variant, self.trajectories)?;
        for e in &self.entries {
            writeln!(f, "  {e}")?;
        }
        Ok(())
    }
}

/// Numerical check of the stability statements for one flow.
///
/// The budget is split evenly between starts below and above the metastable
/// branch over a square-ish grid of fields.
pub fn verify_theorems(params: &ModelParams, variant: &HamiltonianVariant, budget: usize) -> TheoremReport {
    let kind = variant.kind;
    let mut entries = Vec::new();
    let n_x = ((budget as f64).sqrt().floor() as usize).max(2);
    let n_per = (budget / (2 * n_x)).max(1);
    let config = IntegratorConfig::default();
    let trials = match basin_trials(params, variant, n_x, n_per, &config, true) {
        Ok(t) => t,
        Err(e) => {
            entries.push(CheckEntry::new("setup", f64::NAN, 0.0, false, e.to_string()));
            return TheoremReport { variant: kind, trajectories: 0, entries };
        }
    };

    let lower: Vec<&BasinTrial> = trials.iter().filter(|t| t.region == RegionLabel::D1Plus).collect();
    let upper: Vec<&BasinTrial> = trials.iter().filter(|t| t.region != RegionLabel::D1Plus).collect();
    let worst = |v: &[&BasinTrial], f: fn(&BasinTrial) -> f64| v.iter().map(|t| f(t)).fold(0.0, f64::max);

    entries.push(CheckEntry::at_most(
        "basin D1+ -> psi1",
        worst(&lower, |t| t.gap),
        1e-6,
        format!("{} starts, worst |y - y1| {:.2e}", lower.len(), worst(&lower, |t| t.y_gap)),
    ));
    match kind {
        VariantKind::Squared => {
            let excess = worst(&upper, |t| {
                if t.signed_gap >= 0.0 && t.gap <= t.algebraic_bound {
                    t.gap / t.algebraic_bound
                } else {
                    f64::INFINITY
                }
            });
            entries.push(CheckEntry::at_most(
                "basin D2+ -> psi2",
                excess,
                1.0,
                format!(
                    "gap / (1 / (psi0 psi21 T)); worst gap {:.2e} (algebraic approach to the double root)",
                    worst(&upper, |t| t.gap)
                ),
            ));
        }
        VariantKind::Cubic => entries.push(CheckEntry::at_most(
            "basin D3+ -> psi3",
            worst(&upper, |t| t.gap),
            1e-6,
            format!("{} starts", upper.len()),
        )),
        VariantKind::Quadratic => {
            let stayed = upper.iter().filter(|t| t.outcome != TrialOutcome::Escaped).count();
            entries.push(CheckEntry::at_most(
                "above psi2 no branch attracts",
                stayed as f64,
                0.0,
                format!("{} of {} starts left the region", upper.len() - stayed, upper.len()),
            ));
        }
    }
    entries.push(CheckEntry::at_most(
        "lyapunov non-increasing",
        trials.iter().filter(|t| t.target.is_some()).map(|t| t.lyapunov_increase).fold(f64::NEG_INFINITY, f64::max),
        1e-12,
        "max (V_{k+1} - V_k) / (1 + |V_k|)".into(),
    ));
    entries.push(CheckEntry::at_most(
        "x conserved",
        trials.iter().map(|t| t.x_drift).fold(0.0, f64::max),
        1e-14,
        String::new(),
    ));
    entries.push(fixed_point_entry(params, variant));
    entries.push(stability_sign_entry(params, variant));

    if let Some(x_sp) = model::spinodal_field(params) {
        let x = 0.6 * x_sp;
        entries.push(match decay_rate(variant, params, x, 1, -1e-4) {
            Ok(fit) => CheckEntry::at_most(
                "decay rate at psi1",
                fit.rel_error,
                0.05,
                format!("measured {:.6} vs c1 = {:.6}", fit.measured, fit.predicted),
            ),
            Err(e) => CheckEntry::new("decay rate at psi1", f64::NAN, 0.05, false, e.to_string()),
        });
        if kind != VariantKind::Squared {
            let name = "growth off psi2";
            entries.push(match growth_rate(variant, params, x, 2, 1e-6, 1e-2) {
                Ok(fit) => CheckEntry::new(
                    name,
                    fit.rel_error,
                    0.05,
                    fit.rel_error <= 0.05 && fit.monotone && fit.escaped,
                    format!(
                        "measured {:.6} vs -c2 = {:.6}, monotone {}, left 1e-2 band {}",
                        fit.measured, fit.predicted, fit.monotone, fit.escaped
                    ),
                ),
                Err(e) => CheckEntry::new(name, f64::NAN, 0.05, false, e.to_string()),
            });
        }
    }
    TheoremReport { variant: kind, trajectories: trials.len(), entries }
}

fn window_samples(params: &ModelParams, n: usize) -> Vec<f64> {
    let Some(x_sp) = model::spinodal_field(params) else { return Vec::new() };
    let half = linspace(0.02 * x_sp, 0.98 * x_sp, n);
    half.iter().map(|x| -x).chain(half.iter().copied()).collect()
}

fn fixed_point_entry(params: &ModelParams, variant: &HamiltonianVariant) -> CheckEntry {
    let mut worst: f64 = 0.0;
    for x in window_samples(params, 25) {
        match branch_functions(params, x) {
            Ok(b) => {
                for &mu in variant.kind.branches() {
                    let f = vector_field_with(variant, &b, &ContactState::on_branch(&b, mu));
                    worst = worst.max(f.iter().map(|c| c * c).sum::<f64>().sqrt());
                }
            }
            Err(_) => worst = f64::INFINITY,
        }
    }
    CheckEntry::at_most("fixed-point residual", worst, 1e-10, String::new())
}

fn stability_sign_entry(params: &ModelParams, variant: &HamiltonianVariant) -> CheckEntry {
    let mut bad = 0usize;
    let mut total = 0usize;
    for x in window_samples(params, 25) {
        for &mu in variant.kind.branches() {
            total += 1;
            let ok = match linearized_coefficients(variant, params, x, mu) {
                Ok(lc) => match (variant.kind, mu) {
                    (VariantKind::Squared, 2) => lc.c.abs() <= 1e-12,
                    (VariantKind::Cubic, 2) | (VariantKind::Quadratic, 2) => lc.c < 0.0,
                    _ => lc.c > 0.0,
                },
                Err(_) => false,
            };
            if !ok {
                bad += 1;
            }
        }
    }
    CheckEntry::at_most(
        "linear stability signs",
        bad as f64,
        0.0,
        format!("{total} (x, branch) pairs"),
    )
}
