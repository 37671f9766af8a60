//! Dimensionless Husimi-Temperley thermodynamics.
//!
//! Every routine here works with the reduced coupling `j0bar = beta * J0` and
//! the reduced field `x = beta * H`. The pseudo-free energy
//!
//! ```text
//! psi(x, y) = j0bar * y^2 - ln(2 cosh(2 j0bar y + x))
//! ```
//!
//! has its `y`-critical points on the self-consistent equation
//! `y = tanh(2 j0bar y + x)`. Those roots are the equilibrium branches.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};
use crate::numeric::{atanh_odd, ln_2cosh, log_sum_exp, sech2};

/// Half-width of the band around `2 j0bar = 1` treated as the critical point.
pub const CRITICAL_BAND: f64 = 1e-12;
/// Residual tolerance on `y - tanh(2 j0bar y + x)` for returned roots.
pub const ROOT_RESIDUAL_TOL: f64 = 1e-12;
/// Iteration cap shared by the bracketing and polishing phases.
pub const ROOT_MAX_ITER: usize = 200;
/// Bracket width at which bisection hands over to Newton.
pub const BISECTION_WIDTH: f64 = 1e-8;
/// A root with `|dx/dy| < DEGENERATE_SLOPE` sits on a spinodal fold.
pub const DEGENERATE_SLOPE: f64 = 1e-9;
/// Largest system size accepted by the exact partition sum.
pub const MAX_EXACT_N: u64 = 1_000_000;

/// Raw physical inputs, kept for provenance when parameters came in that way.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawParams {
    pub beta: f64,
    pub j0: f64,
    pub field: f64,
}

/// Reduced model parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    j0bar: f64,
    raw: Option<RawParams>,
}

impl ModelParams {
    pub fn new(j0bar: f64) -> Result<Self> {
        if !(j0bar.is_finite() && j0bar > 0.0) {
            return Err(Error::InvalidInput(format!(
                "reduced coupling must be finite and positive, got {j0bar}"
            )));
        }
        Ok(Self { j0bar, raw: None })
    }

    /// Converts `(beta, J0, H)` once; returns the parameters and the reduced
    /// field `beta * H`.
    pub fn from_raw(beta: f64, j0: f64, field: f64) -> Result<(Self, f64)> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::InvalidInput(format!(
                "beta must be finite and positive, got {beta}"
            )));
        }
        if !j0.is_finite() || !field.is_finite() {
            return Err(Error::InvalidInput("J0 and H must be finite".into()));
        }
        let mut params = Self::new(beta * j0)?;
        params.raw = Some(RawParams { beta, j0, field });
        Ok((params, beta * field))
    }

    #[inline]
    pub fn j0bar(&self) -> f64 {
        self.j0bar
    }

    pub fn raw(&self) -> Option<RawParams> {
        self.raw
    }

    /// Reduced field `beta * H` when raw inputs were supplied.
    pub fn reduced_field(&self) -> Option<f64> {
        self.raw.map(|r| r.beta * r.field)
    }

    #[inline]
    pub fn is_low_temperature(&self) -> bool {
        classify_phase(self) == PhaseRegime::LowTemperature
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhaseRegime {
    HighTemperature,
    Critical,
    LowTemperature,
}

/// Role of an equilibrium branch at fixed field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stability {
    MostStable,
    Metastable,
    Unstable,
}

impl Stability {
    pub fn as_str(self) -> &'static str {
        match self {
            Stability::MostStable => "MostStable",
            Stability::Metastable => "Metastable",
            Stability::Unstable => "Unstable",
        }
    }
}

impl fmt::Display for Stability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One solution of the self-consistent equation at a fixed field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchRoot {
    /// 1 = lowest pseudo-free energy.
    pub mu: u8,
    pub y_star: f64,
    pub z: f64,
    pub stability: Stability,
    /// The root sits on a spinodal fold where two branches merge.
    pub degenerate: bool,
}

pub fn pseudo_free_energy(params: &ModelParams, x: f64, y: f64) -> f64 {
    let j = params.j0bar;
    j * y * y - ln_2cosh(2.0 * j * y + x)
}

pub fn dpsi_dx(params: &ModelParams, x: f64, y: f64) -> f64 {
    -(2.0 * params.j0bar * y + x).tanh()
}

pub fn dpsi_dy(params: &ModelParams, x: f64, y: f64) -> f64 {
    let j = params.j0bar;
    2.0 * j * (y - (2.0 * j * y + x).tanh())
}

pub fn d2psi_dx2(params: &ModelParams, x: f64, y: f64) -> f64 {
    -sech2(2.0 * params.j0bar * y + x)
}

pub fn d2psi_dy2(params: &ModelParams, x: f64, y: f64) -> f64 {
    let j = params.j0bar;
    2.0 * j * (1.0 - 2.0 * j * sech2(2.0 * j * y + x))
}

fn check_open_unit(y: f64) -> Result<()> {
    if y.is_finite() && y.abs() < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("magnetization must lie in (-1, 1), got {y}")))
    }
}

/// Field at which `y` solves the self-consistent equation.
pub fn x_of_y(params: &ModelParams, y: f64) -> Result<f64> {
    check_open_unit(y)?;
    Ok(-2.0 * params.j0bar * y + atanh_odd(y))
}

pub fn dx_dy(params: &ModelParams, y: f64) -> Result<f64> {
    check_open_unit(y)?;
    Ok(-(2.0 * params.j0bar - 1.0 / (1.0 - y * y)))
}

/// `(y_minus, y_plus)` where `dx/dy` vanishes; `None` outside the ordered phase.
pub fn spinodal_points(params: &ModelParams) -> Option<(f64, f64)> {
    if classify_phase(params) != PhaseRegime::LowTemperature {
        return None;
    }
    let y = (1.0 - 1.0 / (2.0 * params.j0bar)).sqrt();
    Some((-y, y))
}

/// Positive field at the spinodal fold, `x(y_minus)`.
pub fn spinodal_field(params: &ModelParams) -> Option<f64> {
    let (y_minus, _) = spinodal_points(params)?;
    x_of_y(params, y_minus).ok()
}

pub fn classify_phase(params: &ModelParams) -> PhaseRegime {
    let t = 2.0 * params.j0bar - 1.0;
    if t.abs() <= CRITICAL_BAND {
        PhaseRegime::Critical
    } else if t > 0.0 {
        PhaseRegime::LowTemperature
    } else {
        PhaseRegime::HighTemperature
    }
}

/// Residual of the self-consistent equation.
#[inline]
pub fn self_consistency_residual(params: &ModelParams, x: f64, y: f64) -> f64 {
    y - (2.0 * params.j0bar * y + x).tanh()
}

/// Linear-response estimate of the root near `y = 0`.
pub fn small_y_approx(params: &ModelParams, x: f64) -> Result<f64> {
    let denom = 1.0 - 2.0 * params.j0bar;
    if denom.abs() <= CRITICAL_BAND {
        return Err(Error::Domain(
            "linear response diverges at the critical coupling".into(),
        ));
    }
    Ok(x / denom)
}

/// Finds the root on one monotone segment `[lo, hi]` of `x(y)`.
///
/// `sign(y - tanh(2 j y + x)) == sign(x(y) - x)` for `|y| < 1`, so the residual
/// carries the bracket's sign information while staying finite at `y = +-1`.
fn root_on_segment(params: &ModelParams, x: f64, lo: f64, hi: f64) -> Result<Option<f64>> {
    let g = |y: f64| self_consistency_residual(params, x, y);
    let (mut a, mut b) = (lo, hi);
    let (mut ga, gb) = (g(a), g(b));
    if ga == 0.0 {
        return Ok(Some(a));
    }
    if gb == 0.0 {
        return Ok(Some(b));
    }
    if ga.signum() == gb.signum() {
        return Ok(None);
    }

    let mut iter = 0;
    while b - a > BISECTION_WIDTH && iter < ROOT_MAX_ITER {
        let m = 0.5 * (a + b);
        let gm = g(m);
        if gm == 0.0 {
            return Ok(Some(m));
        }
        if gm.signum() == ga.signum() {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
        iter += 1;
    }

    // Newton polish, kept inside the bracket.
    let j = params.j0bar;
    let mut y = 0.5 * (a + b);
    for _ in iter..ROOT_MAX_ITER {
        let r = g(y);
        if r.abs() < ROOT_RESIDUAL_TOL * 1e-2 {
            break;
        }
        let slope = 1.0 - 2.0 * j * sech2(2.0 * j * y + x);
        let mut next = y - r / slope;
        if !(next.is_finite() && next > a && next < b) {
            // Fall back to a bisection step on the current bracket.
            if r.signum() == ga.signum() {
                a = y;
                ga = r;
            } else {
                b = y;
            }
            next = 0.5 * (a + b);
        } else if r.signum() == ga.signum() {
            a = y;
            ga = r;
        } else {
            b = y;
        }
        if next == y {
            break;
        }
        y = next;
    }

    let r = g(y);
    if r.abs() >= ROOT_RESIDUAL_TOL {
        return Err(Error::Convergence(format!(
            "residual {r:e} at y = {y} (x = {x}, j0bar = {j})"
        )));
    }
    Ok(Some(y))
}

fn is_degenerate(params: &ModelParams, y: f64) -> bool {
    dx_dy(params, y).map(|d| d.abs() < DEGENERATE_SLOPE).unwrap_or(false)
}

/// All equilibrium magnetizations at field `x`, labelled by pseudo-free energy.
///
/// Returns one root outside the multivalued window, three inside, and two at
/// a spinodal fold where a pair has merged (the merged root is flagged
/// `degenerate`).
pub fn solve_branches(params: &ModelParams, x: f64) -> Result<Vec<BranchRoot>> {
    if !x.is_finite() {
        return Err(Error::InvalidInput(format!("field must be finite, got {x}")));
    }
    let j = params.j0bar;
    // Any root obeys |y| <= 1, hence tanh(x - 2j) <= y <= tanh(x + 2j).
    let lo = (x - 2.0 * j).tanh();
    let hi = (x + 2.0 * j).tanh();

    let mut ys: Vec<(f64, bool)> = Vec::with_capacity(3);
    match spinodal_points(params) {
        None => {
            if let Some(y) = root_on_segment(params, x, lo, hi)? {
                ys.push((y, is_degenerate(params, y)));
            }
        }
        Some((ym, yp)) => {
            // A field sitting on a fold image (to rounding) has the fold itself
            // as its merged root; the two segments meeting there are skipped.
            let at_fold = |s: f64| {
                let xf = x_of_y(params, s).unwrap_or(f64::NAN);
                (x - xf).abs() <= 4.0 * f64::EPSILON * xf.abs()
            };
            let (fold_m, fold_p) = (at_fold(ym), at_fold(yp));
            let segments = [
                (lo.min(ym), ym, fold_m),
                (ym, yp, fold_m || fold_p),
                (yp, hi.max(yp), fold_p),
            ];
            for (i, &(a, b, skip)) in segments.iter().enumerate() {
                if i == 1 && fold_m {
                    ys.push((ym, true));
                }
                if !skip {
                    if let Some(y) = root_on_segment(params, x, a, b)? {
                        ys.push((y, is_degenerate(params, y)));
                    }
                }
                if i == 1 && fold_p {
                    ys.push((yp, true));
                }
            }
        }
    }
    ys.sort_by(|a, b| a.0.total_cmp(&b.0));
    ys.dedup_by(|b, a| (a.0 - b.0).abs() < f64::EPSILON);
    // Neighbouring roots that both sit on a fold have merged.
    let mut merged: Vec<(f64, bool)> = Vec::with_capacity(ys.len());
    for (y, degenerate) in ys {
        match merged.last_mut() {
            Some(prev) if degenerate && prev.1 => prev.0 = 0.5 * (prev.0 + y),
            _ => merged.push((y, degenerate)),
        }
    }
    let ys = merged;

    let mut roots: Vec<BranchRoot> = ys
        .into_iter()
        .map(|(y, degenerate)| BranchRoot {
            mu: 0,
            y_star: y,
            z: pseudo_free_energy(params, x, y),
            stability: Stability::MostStable,
            degenerate,
        })
        .collect();

    // Ties (x = 0 in the ordered phase) fall back to the sign of the field.
    roots.sort_by(|a, b| {
        a.z.partial_cmp(&b.z)
            .unwrap_or(Ordering::Equal)
            .then_with(|| {
                if x >= 0.0 {
                    b.y_star.total_cmp(&a.y_star)
                } else {
                    a.y_star.total_cmp(&b.y_star)
                }
            })
    });
    let n = roots.len();
    for (i, r) in roots.iter_mut().enumerate() {
        r.mu = (i + 1) as u8;
        r.stability = match (n, i) {
            (_, 0) => Stability::MostStable,
            (3, 1) | (2, 1) => Stability::Metastable,
            _ => Stability::Unstable,
        };
    }
    Ok(roots)
}

/// The globally stable root at field `x`.
pub fn most_stable_root(params: &ModelParams, x: f64) -> Result<BranchRoot> {
    solve_branches(params, x)?
        .into_iter()
        .next()
        .ok_or_else(|| Error::Convergence(format!("no root found at x = {x}")))
}

/// Exact free energy per spin of the finite-`n` model,
/// `-(1 / (n beta)) ln sum_k C(n, k) exp(beta J0 (n - 2k)^2 / n + beta H (n - 2k))`.
///
/// The sum runs over magnetization sectors, so the cost is `O(n)`.
pub fn exact_free_energy_per_spin(n: u64, beta: f64, j0: f64, field: f64) -> Result<f64> {
    if n == 0 || n > MAX_EXACT_N {
        return Err(Error::InvalidInput(format!(
            "system size must be in 1..={MAX_EXACT_N}, got {n}"
        )));
    }
    if !(beta.is_finite() && beta > 0.0) || !j0.is_finite() || !field.is_finite() {
        return Err(Error::InvalidInput("beta must be positive; J0, H finite".into()));
    }
    let nf = n as f64;
    let ln_n_fact = libm::lgamma(nf + 1.0);
    let terms: Vec<f64> = (0..=n)
        .map(|k| {
            let kf = k as f64;
            let m = nf - 2.0 * kf;
            let ln_binom = ln_n_fact - libm::lgamma(kf + 1.0) - libm::lgamma(nf - kf + 1.0);
            ln_binom + beta * j0 * m * m / nf + beta * field * m
        })
        .collect();
    let ln_z = log_sum_exp(&terms);
    if !ln_z.is_finite() {
        return Err(Error::Overflow(format!("ln Z = {ln_z} for n = {n}")));
    }
    Ok(-ln_z / (nf * beta))
}

/// Large-`n` limit of the free energy per spin, `min_y psi / beta`.
pub fn saddle_free_energy_per_spin(beta: f64, j0: f64, field: f64) -> Result<f64> {
    let (params, x) = ModelParams::from_raw(beta, j0, field)?;
    let root = most_stable_root(&params, x)?;
    Ok(root.z / beta)
}
