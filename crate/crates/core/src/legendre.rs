//! The equilibrium Legendre curve in the thermodynamic phase space `(x, y, z)`
//! and its projections.
//!
//! The curve is parametrized by the magnetization: `m -> (x(m), m, psi(x(m), m))`.
//! Under the contact form `dz + y dx` it is Legendrian because
//! `dz/dm = dpsi/dx * dx/dm + dpsi/dm` and `dpsi/dm` vanishes on the curve
//! while `dpsi/dx = -m`.
//!
//! In the ordered phase the curve folds at the two spinodal points. Cutting it
//! there gives three segments (outer negative, middle, outer positive). Over
//! each half-window `I-` and `I+` the three segments are relabelled by their
//! pseudo-free energy, so that `psi_1 < psi_2 < psi_3`.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};
use crate::model::{self, ModelParams, Stability};
use crate::numeric::linspace;

/// Sign convention of the Darboux contact form `dz + s * y dx`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Convention {
    /// `dz + y dx`; `y` is the magnetization.
    PlusYdx,
    /// `dz - y dx`; `y` is the slope `dz/dx`, i.e. minus the magnetization.
    MinusYdx,
}

impl Convention {
    #[inline]
    pub fn sign(self) -> f64 {
        match self {
            Convention::PlusYdx => 1.0,
            Convention::MinusYdx => -1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Convention::PlusYdx => "plus",
            Convention::MinusYdx => "minus",
        }
    }
}

impl std::str::FromStr for Convention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plus" => Ok(Convention::PlusYdx),
            "minus" => Ok(Convention::MinusYdx),
            other => Err(Error::InvalidInput(format!("unknown convention {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegendrePoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl LegendrePoint {
    pub fn reflect(self) -> Self {
        Self { x: -self.x, y: -self.y, z: self.z }
    }
}

/// A sampled Legendre curve of the mean-field model.
#[derive(Debug, Clone, PartialEq)]
pub struct LegendreCurve {
    pub params: ModelParams,
    pub samples: Vec<LegendrePoint>,
    pub convention: Convention,
}

/// Default magnetization grid: 2001 uniform points on `[-0.999, 0.999]`.
pub fn default_y_grid() -> Vec<f64> {
    linspace(-0.999, 0.999, 2001)
}

pub fn sample_curve(params: &ModelParams, y_grid: &[f64]) -> Result<LegendreCurve> {
    sample_curve_with(params, y_grid, Convention::PlusYdx)
}

/// Samples the curve over a strictly increasing magnetization grid.
pub fn sample_curve_with(
    params: &ModelParams,
    y_grid: &[f64],
    convention: Convention,
) -> Result<LegendreCurve> {
    if y_grid.len() < 2 {
        return Err(Error::InvalidInput("grid needs at least two points".into()));
    }
    if y_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("grid must be strictly increasing".into()));
    }
    let s = convention.sign();
    let samples = y_grid
        .iter()
        .map(|&m| {
            let x = model::x_of_y(params, m)?;
            Ok(LegendrePoint { x, y: s * m, z: model::pseudo_free_energy(params, x, m) })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LegendreCurve { params: *params, samples, convention })
}

impl LegendreCurve {
    #[inline]
    pub fn magnetization(&self, p: &LegendrePoint) -> f64 {
        self.convention.sign() * p.y
    }

    /// `|dz + s * ybar * dx| / |dy|` for each adjacent pair, `ybar` the midpoint.
    ///
    /// The midpoint rule makes this `|x''(y)| h^2 / 12 + O(h^4)`.
    pub fn discrete_contact_residuals(&self) -> Vec<f64> {
        let s = self.convention.sign();
        self.samples
            .windows(2)
            .map(|w| {
                let (a, b) = (w[0], w[1]);
                let ybar = 0.5 * (a.y + b.y);
                ((b.z - a.z) + s * ybar * (b.x - a.x)).abs() / (b.y - a.y).abs()
            })
            .collect()
    }

    pub fn max_discrete_contact_residual(&self) -> f64 {
        self.discrete_contact_residuals().into_iter().fold(0.0, f64::max)
    }

    /// Magnetizations where the wave-front tangent `(dx, dz)` changes sign,
    /// located by bracketing on the sampled curve (midpoint of the bracket).
    pub fn xz_singular_points(&self) -> Vec<f64> {
        let dx: Vec<(f64, f64)> = self
            .samples
            .windows(2)
            .map(|w| (w[1].x - w[0].x, 0.5 * (self.magnetization(&w[0]) + self.magnetization(&w[1]))))
            .collect();
        dx.windows(2)
            .filter(|w| w[0].0.signum() != w[1].0.signum())
            .map(|w| 0.5 * (w[0].1 + w[1].1))
            .collect()
    }
}

/// Tangent of the Legendre curve with respect to the magnetization parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tangent {
    pub dx: f64,
    pub dy: f64,
    pub dz: f64,
}

pub fn tangent_vector(params: &ModelParams, y: f64) -> Result<Tangent> {
    let dx = model::dx_dy(params, y)?;
    let x = model::x_of_y(params, y)?;
    Ok(Tangent { dx, dy: 1.0, dz: dx * model::dpsi_dx(params, x, y) })
}

/// `dz/dy + y dx/dy` along the curve, using the full chain rule for `dz/dy`.
pub fn contact_residual(params: &ModelParams, y: f64) -> Result<f64> {
    let x = model::x_of_y(params, y)?;
    let dx = model::dx_dy(params, y)?;
    let dz = model::dpsi_dx(params, x, y) * dx + model::dpsi_dy(params, x, y);
    Ok(dz + y * dx)
}

/// Open interval `(lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// The half-windows `I- = (-x_sp, 0)` and `I+ = (0, x_sp)` where the wave front
/// is three-valued.
pub fn intervals(params: &ModelParams) -> Result<(Interval, Interval)> {
    let x_sp = model::spinodal_field(params).ok_or_else(|| {
        Error::Phase(format!(
            "no multivalued window for j0bar = {} (needs 2 j0bar > 1)",
            params.j0bar()
        ))
    })?;
    Ok((Interval { lo: -x_sp, hi: 0.0 }, Interval { lo: 0.0, hi: x_sp }))
}

/// Which part of the field axis a branch lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BranchDomain {
    /// `x <= -x_sp`, single-valued.
    OuterMinus,
    IMinus,
    IPlus,
    /// `x >= x_sp`, single-valued.
    OuterPlus,
    /// High-temperature phase: the whole curve is one branch.
    Whole,
}

impl BranchDomain {
    pub fn as_str(self) -> &'static str {
        match self {
            BranchDomain::OuterMinus => "outer-minus",
            BranchDomain::IMinus => "I-",
            BranchDomain::IPlus => "I+",
            BranchDomain::OuterPlus => "outer-plus",
            BranchDomain::Whole => "whole",
        }
    }

    pub fn mirror(self) -> Self {
        match self {
            BranchDomain::OuterMinus => BranchDomain::OuterPlus,
            BranchDomain::IMinus => BranchDomain::IPlus,
            BranchDomain::IPlus => BranchDomain::IMinus,
            BranchDomain::OuterPlus => BranchDomain::OuterMinus,
            BranchDomain::Whole => BranchDomain::Whole,
        }
    }
}

impl fmt::Display for BranchDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A single-valued piece of the wave front, points sorted by `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub mu: u8,
    pub domain: BranchDomain,
    pub role: Stability,
    pub points: Vec<LegendrePoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Segment {
    Negative,
    Middle,
    Positive,
}

/// Minimum sample count accepted by [`split_branches`] in the ordered phase.
pub const MIN_SPLIT_SAMPLES: usize = 512;

fn interpolate_z(points: &[LegendrePoint], x: f64) -> Option<f64> {
    let first = points.first()?;
    let last = points.last()?;
    if x < first.x || x > last.x {
        return None;
    }
    let i = points.partition_point(|p| p.x < x);
    if i == 0 {
        return Some(first.z);
    }
    let (a, b) = (points[i - 1], points[i]);
    if b.x == a.x {
        return Some(a.z);
    }
    let t = (x - a.x) / (b.x - a.x);
    Some(a.z + t * (b.z - a.z))
}

/// Ranks each group by pointwise comparison of `z` at matched `x`. Each segment
/// is single-valued in `x`, so the partner value comes from linear
/// interpolation (error `O(h^2)`); the rank is the majority vote over points.
fn rank_groups(groups: &[Vec<LegendrePoint>]) -> Vec<usize> {
    let n = groups.len();
    let mut ranks = Vec::with_capacity(n);
    for (i, g) in groups.iter().enumerate() {
        let mut votes = vec![0usize; n];
        for p in g {
            let mut below = 0;
            let mut comparable = true;
            for (k, other) in groups.iter().enumerate() {
                if k == i {
                    continue;
                }
                match interpolate_z(other, p.x) {
                    Some(z) if z < p.z => below += 1,
                    Some(_) => {}
                    None => comparable = false,
                }
            }
            if comparable {
                votes[below] += 1;
            }
        }
        let best = votes
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
            .map(|(r, _)| r)
            .unwrap_or(i);
        ranks.push(best);
    }
    // Fall back to mean z if the vote produced a tie (coarse grids).
    let mut sorted = ranks.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != n {
        let mut order: Vec<usize> = (0..n).collect();
        let mean = |g: &Vec<LegendrePoint>| g.iter().map(|p| p.z).sum::<f64>() / g.len() as f64;
        order.sort_by(|&a, &b| mean(&groups[a]).partial_cmp(&mean(&groups[b])).unwrap_or(Ordering::Equal));
        for (r, &g) in order.iter().enumerate() {
            ranks[g] = r;
        }
    }
    ranks
}

fn role_for(mu: u8) -> Stability {
    match mu {
        1 => Stability::MostStable,
        2 => Stability::Metastable,
        _ => Stability::Unstable,
    }
}

/// Decomposes the curve into single-valued branches.
///
/// In the high-temperature (or critical) phase the result is one branch with
/// domain [`BranchDomain::Whole`], labelled `mu = 1`. Points on the removed
/// plane `x = 0` are dropped.
pub fn split_branches(curve: &LegendreCurve) -> Result<Vec<Branch>> {
    let params = &curve.params;
    let Some((ym, yp)) = model::spinodal_points(params) else {
        let mut points = curve.samples.clone();
        points.sort_by(|a, b| a.x.total_cmp(&b.x));
        return Ok(vec![Branch {
            mu: 1,
            domain: BranchDomain::Whole,
            role: Stability::MostStable,
            points,
        }]);
    };
    if curve.samples.len() < MIN_SPLIT_SAMPLES {
        return Err(Error::InvalidInput(format!(
            "branch splitting needs at least {MIN_SPLIT_SAMPLES} samples, got {}",
            curve.samples.len()
        )));
    }
    let x_sp = model::spinodal_field(params).expect("ordered phase has a spinodal field");

    let mut buckets: Vec<((Segment, BranchDomain), Vec<LegendrePoint>)> = Vec::new();
    for p in &curve.samples {
        let m = curve.magnetization(p);
        let seg = if m <= ym {
            Segment::Negative
        } else if m >= yp {
            Segment::Positive
        } else {
            Segment::Middle
        };
        if p.x == 0.0 {
            continue;
        }
        let domain = match seg {
            Segment::Negative if p.x <= -x_sp => BranchDomain::OuterMinus,
            Segment::Positive if p.x >= x_sp => BranchDomain::OuterPlus,
            _ if p.x > 0.0 => BranchDomain::IPlus,
            _ => BranchDomain::IMinus,
        };
        match buckets.iter_mut().find(|(k, _)| *k == (seg, domain)) {
            Some((_, v)) => v.push(*p),
            None => buckets.push(((seg, domain), vec![*p])),
        }
    }
    for (_, v) in buckets.iter_mut() {
        v.sort_by(|a, b| a.x.total_cmp(&b.x));
    }

    let mut branches = Vec::new();
    for domain in [
        BranchDomain::OuterMinus,
        BranchDomain::IMinus,
        BranchDomain::IPlus,
        BranchDomain::OuterPlus,
    ] {
        let groups: Vec<Vec<LegendrePoint>> = buckets
            .iter()
            .filter(|((_, d), _)| *d == domain)
            .map(|(_, v)| v.clone())
            .collect();
        if groups.is_empty() {
            continue;
        }
        let ranks = rank_groups(&groups);
        let mut labelled: Vec<Branch> = groups
            .into_iter()
            .zip(ranks)
            .map(|(points, r)| {
                let mu = (r + 1) as u8;
                Branch { mu, domain, role: role_for(mu), points }
            })
            .collect();
        labelled.sort_by_key(|b| b.mu);
        branches.extend(labelled);
    }
    Ok(branches)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PruneMode {
    None,
    DropUnstable,
    DropUnstableAndMetastable,
}

impl std::str::FromStr for PruneMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(PruneMode::None),
            "unstable" => Ok(PruneMode::DropUnstable),
            "unstable-metastable" => Ok(PruneMode::DropUnstableAndMetastable),
            other => Err(Error::InvalidInput(format!("unknown prune mode {other:?}"))),
        }
    }
}

/// Removes unstable (and optionally metastable) branches.
///
/// `DropUnstable` leaves the disconnected hysteresis pair; additionally
/// dropping the metastable branches leaves the lower envelope, the cusp.
pub fn prune(branches: &[Branch], mode: PruneMode) -> Vec<Branch> {
    branches
        .iter()
        .filter(|b| match mode {
            PruneMode::None => true,
            PruneMode::DropUnstable => b.role != Stability::Unstable,
            PruneMode::DropUnstableAndMetastable => b.role == Stability::MostStable,
        })
        .cloned()
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Plane {
    /// Wave front.
    XZ,
    /// Lagrange map.
    XY,
    YZ,
}

impl Plane {
    #[inline]
    pub fn coords(self, p: &LegendrePoint) -> [f64; 2] {
        match self {
            Plane::XZ => [p.x, p.z],
            Plane::XY => [p.x, p.y],
            Plane::YZ => [p.y, p.z],
        }
    }

    pub fn axis_names(self) -> (&'static str, &'static str) {
        match self {
            Plane::XZ => ("x", "z"),
            Plane::XY => ("x", "y"),
            Plane::YZ => ("y", "z"),
        }
    }
}

impl std::str::FromStr for Plane {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "xz" => Ok(Plane::XZ),
            "xy" => Ok(Plane::XY),
            "yz" => Ok(Plane::YZ),
            other => Err(Error::InvalidInput(format!("unknown plane {other:?}"))),
        }
    }
}

/// A projected polyline. Branch metadata is absent for a whole-curve projection.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub branch: Option<(u8, BranchDomain, Stability)>,
    pub points: Vec<[f64; 2]>,
}

/// Projects the whole curve as one polyline, in parameter order.
pub fn project_curve(curve: &LegendreCurve, plane: Plane) -> Vec<Polyline> {
    vec![Polyline {
        branch: None,
        points: curve.samples.iter().map(|p| plane.coords(p)).collect(),
    }]
}

/// Projects each branch to its own polyline.
pub fn project_branches(branches: &[Branch], plane: Plane) -> Vec<Polyline> {
    branches
        .iter()
        .map(|b| Polyline {
            branch: Some((b.mu, b.domain, b.role)),
            points: b.points.iter().map(|p| plane.coords(p)).collect(),
        })
        .collect()
}

/// Whether two polylines (or one with itself) have properly crossing segments.
pub fn has_self_intersection(points: &[[f64; 2]]) -> bool {
    fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
        (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    }
    let n = points.len();
    for i in 0..n.saturating_sub(1) {
        for j in (i + 2)..n.saturating_sub(1) {
            let (a, b, c, d) = (points[i], points[i + 1], points[j], points[j + 1]);
            let d1 = orient(a, b, c);
            let d2 = orient(a, b, d);
            let d3 = orient(c, d, a);
            let d4 = orient(c, d, b);
            if d1 * d2 < 0.0 && d3 * d4 < 0.0 {
                return true;
            }
        }
    }
    false
}

/// Both branches of the toy cusp `y = (2y - x)^2` under `dz - y dx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToyCuspPoint {
    pub x: f64,
    pub y_plus: f64,
    pub y_minus: f64,
    pub z_plus: f64,
    pub z_minus: f64,
}

/// Lower end of the toy cusp, where both branches join.
pub const TOY_CUSP_X: f64 = -0.125;

/// `y_pm = (4x + 1 +- sqrt(1 + 8x)) / 8` and `z = y^2 - D^3 / 3` with `D = 2y - x`.
///
/// `D` keeps its sign: on the `y_minus` branch it turns negative for `x > 0`,
/// where the closed form `y^2 - y^{3/2} / 3` would break the contact condition.
pub fn toy_cusp_curve(x: f64) -> Result<ToyCuspPoint> {
    if !(x.is_finite() && x >= TOY_CUSP_X) {
        return Err(Error::Domain(format!("toy cusp needs x >= -1/8, got {x}")));
    }
    let r = (1.0 + 8.0 * x).max(0.0).sqrt();
    let y_plus = (4.0 * x + 1.0 + r) / 8.0;
    let y_minus = (4.0 * x + 1.0 - r) / 8.0;
    let z = |y: f64| {
        let d = 2.0 * y - x;
        y * y - d * d * d / 3.0
    };
    Ok(ToyCuspPoint { x, y_plus, y_minus, z_plus: z(y_plus), z_minus: z(y_minus) })
}

/// `dz/dx - y` on each toy branch, with analytic `dy/dx`. Undefined at the
/// joint `x = -1/8` where `dy/dx` diverges.
pub fn toy_contact_residual(x: f64) -> Result<(f64, f64)> {
    if !(x.is_finite() && x > TOY_CUSP_X) {
        return Err(Error::Domain(format!("toy residual needs x > -1/8, got {x}")));
    }
    let pt = toy_cusp_curve(x)?;
    let r = (1.0 + 8.0 * x).sqrt();
    let residual = |y: f64, dy: f64| {
        let d = 2.0 * y - x;
        let dz = 2.0 * y * dy - d * d * (2.0 * dy - 1.0);
        dz - y
    };
    let dy_plus = 0.5 + 0.5 / r;
    let dy_minus = 0.5 - 0.5 / r;
    Ok((residual(pt.y_plus, dy_plus), residual(pt.y_minus, dy_minus)))
}

/// Samples the toy cusp on a field grid.
pub fn toy_cusp_samples(x_grid: &[f64]) -> Result<Vec<ToyCuspPoint>> {
    x_grid.iter().map(|&x| toy_cusp_curve(x)).collect()
}
