use std::fmt;

use crate::error::{Error, Result};
use crate::legendre::{intervals, Convention};
use crate::model::{self, ModelParams};
use crate::numeric::linspace;

use super::ContactState;

/// Positive prefactor `psi0(x)` of the Hamiltonians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Psi0 {
    Const(f64),
    /// `c * exp(a * x)`.
    Exp { c: f64, a: f64 },
}

impl Default for Psi0 {
    fn default() -> Self {
        Psi0::Const(1.0)
    }
}

impl Psi0 {
    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            Psi0::Const(c) => c,
            Psi0::Exp { c, a } => c * (a * x).exp(),
        }
    }

    #[inline]
    pub fn derivative(&self, x: f64) -> f64 {
        match *self {
            Psi0::Const(_) => 0.0,
            Psi0::Exp { c, a } => a * c * (a * x).exp(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VariantKind {
    /// `h = -psi0 (z - psi1)(z - psi2)^2`
    Squared,
    /// `h = -psi0 (z - psi1)(z - psi2)(z - psi3)`
    Cubic,
    /// `h = +psi0 (z - psi1)(z - psi2)`
    Quadratic,
}

impl VariantKind {
    pub fn as_str(self) -> &'static str {
        match self {
            VariantKind::Squared => "squared",
            VariantKind::Cubic => "cubic",
            VariantKind::Quadratic => "quadratic",
        }
    }

    /// Branch labels that are fixed-point sets of the flow.
    pub fn branches(self) -> &'static [u8] {
        match self {
            VariantKind::Squared | VariantKind::Quadratic => &[1, 2],
            VariantKind::Cubic => &[1, 2, 3],
        }
    }

    fn sign(self) -> f64 {
        match self {
            VariantKind::Squared | VariantKind::Cubic => -1.0,
            VariantKind::Quadratic => 1.0,
        }
    }

    /// Zero-based branch index of each linear factor `z - psi_i`.
    fn factors(self) -> &'static [usize] {
        match self {
            VariantKind::Squared => &[0, 1, 1],
            VariantKind::Cubic => &[0, 1, 2],
            VariantKind::Quadratic => &[0, 1],
        }
    }
}

impl fmt::Display for VariantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for VariantKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "squared" => Ok(VariantKind::Squared),
            "cubic" => Ok(VariantKind::Cubic),
            "quadratic" => Ok(VariantKind::Quadratic),
            other => Err(Error::InvalidInput(format!("unknown variant {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianVariant {
    pub kind: VariantKind,
    pub psi0: Psi0,
}

impl HamiltonianVariant {
    /// Checks `psi0 > 0` (and finite) on a grid over `[-4, 4]`.
    pub fn new(kind: VariantKind, psi0: Psi0) -> Result<Self> {
        let ok = linspace(-4.0, 4.0, 401).into_iter().all(|x| {
            let v = psi0.value(x);
            v.is_finite() && v > 0.0 && psi0.derivative(x).is_finite()
        });
        if !ok {
            return Err(Error::InvalidInput(format!("psi0 must be positive and finite: {psi0:?}")));
        }
        Ok(Self { kind, psi0 })
    }

    pub fn with_unit_psi0(kind: VariantKind) -> Self {
        Self { kind, psi0: Psi0::Const(1.0) }
    }
}

/// Branch values and slopes at a fixed field inside `I-` or `I+`.
///
/// Index `i` holds branch `mu = i + 1`, ordered so that `psi[0] < psi[1] < psi[2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchFunctions {
    pub x: f64,
    pub psi: [f64; 3],
    /// `dpsi_mu/dx = -y*_mu`.
    pub dpsi: [f64; 3],
    pub y: [f64; 3],
}

impl BranchFunctions {
    /// `psi_a - psi_b` for one-based labels.
    #[inline]
    pub fn diff(&self, a: u8, b: u8) -> f64 {
        self.psi[a as usize - 1] - self.psi[b as usize - 1]
    }

    #[inline]
    pub fn diff_prime(&self, a: u8, b: u8) -> f64 {
        self.dpsi[a as usize - 1] - self.dpsi[b as usize - 1]
    }
}

pub fn in_windows(params: &ModelParams, x: f64) -> bool {
    intervals(params).map(|(im, ip)| im.contains(x) || ip.contains(x)).unwrap_or(false)
}

pub fn branch_functions(params: &ModelParams, x: f64) -> Result<BranchFunctions> {
    if !in_windows(params, x) {
        return Err(Error::Region(format!(
            "x = {x} is outside the three-branch windows for j0bar = {}",
            params.j0bar()
        )));
    }
    let roots = model::solve_branches(params, x)?;
    if roots.len() != 3 {
        return Err(Error::Region(format!("expected three branches at x = {x}, found {}", roots.len())));
    }
    let mut out = BranchFunctions { x, psi: [0.0; 3], dpsi: [0.0; 3], y: [0.0; 3] };
    for (i, r) in roots.iter().enumerate() {
        out.psi[i] = r.z;
        out.y[i] = r.y_star;
        out.dpsi[i] = -r.y_star;
    }
    Ok(out)
}

/// A Hamiltonian and its first partial derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianJet {
    pub h: f64,
    pub h_x: f64,
    pub h_y: f64,
    pub h_z: f64,
}

pub trait ContactHamiltonian {
    fn jet(&self, x: f64, y: f64, z: f64) -> HamiltonianJet;
}

impl<F> ContactHamiltonian for F
where
    F: Fn(f64, f64, f64) -> HamiltonianJet,
{
    fn jet(&self, x: f64, y: f64, z: f64) -> HamiltonianJet {
        self(x, y, z)
    }
}

/// Contact vector field of an arbitrary Hamiltonian in Darboux coordinates.
pub fn generic_vector_field<H: ContactHamiltonian + ?Sized>(
    h: &H,
    convention: Convention,
    state: &ContactState,
) -> [f64; 3] {
    let j = h.jet(state.x, state.y, state.z);
    let y = state.y;
    match convention {
        Convention::PlusYdx => [j.h_y, -j.h_x + y * j.h_z, j.h - y * j.h_y],
        Convention::MinusYdx => [-j.h_y, j.h_x + y * j.h_z, j.h - y * j.h_y],
    }
}

/// `h = sign * psi0(x) * prod_i (z - a_i(x))` with `x` frozen.
///
/// Every flow in this crate leaves `x` invariant, so the branch values are
/// solved once per trajectory and kept here.
#[derive(Debug, Clone, PartialEq)]
pub struct FrozenField {
    pub x: f64,
    sign: f64,
    psi0: f64,
    dpsi0: f64,
    roots: Vec<f64>,
    slopes: Vec<f64>,
    /// Distinct fixed values of `z`, ascending.
    fixed: Vec<f64>,
}

impl FrozenField {
    pub fn new(variant: &HamiltonianVariant, params: &ModelParams, x: f64) -> Result<Self> {
        let b = branch_functions(params, x)?;
        Ok(Self::from_branches(variant, &b))
    }

    pub fn from_branches(variant: &HamiltonianVariant, b: &BranchFunctions) -> Self {
        let factors = variant.kind.factors();
        let mut fixed: Vec<f64> = variant.kind.branches().iter().map(|&m| b.psi[m as usize - 1]).collect();
        fixed.sort_by(f64::total_cmp);
        Self {
            x: b.x,
            sign: variant.kind.sign(),
            psi0: variant.psi0.value(b.x),
            dpsi0: variant.psi0.derivative(b.x),
            roots: factors.iter().map(|&i| b.psi[i]).collect(),
            slopes: factors.iter().map(|&i| b.dpsi[i]).collect(),
            fixed,
        }
    }

    /// `h = -psi0 (z - psi1)`, which relaxes to the lowest branch and exists
    /// for every field, including outside the three-branch windows.
    pub fn single_branch(params: &ModelParams, psi0: Psi0, x: f64) -> Result<Self> {
        let r = model::most_stable_root(params, x)?;
        Ok(Self {
            x,
            sign: -1.0,
            psi0: psi0.value(x),
            dpsi0: psi0.derivative(x),
            roots: vec![r.z],
            slopes: vec![-r.y_star],
            fixed: vec![r.z],
        })
    }

    pub fn fixed_values(&self) -> &[f64] {
        &self.fixed
    }

    /// `(h, h_x, h_z)` at height `z`.
    #[inline]
    pub fn eval(&self, z: f64) -> (f64, f64, f64) {
        let a = &self.roots;
        let m = &self.slopes;
        // `rest_i` is the product of every factor except the i-th.
        let (p, p_z, p_x) = match a.len() {
            1 => (z - a[0], 1.0, -m[0]),
            2 => {
                let (g0, g1) = (z - a[0], z - a[1]);
                (g0 * g1, g1 + g0, -(m[0] * g1 + m[1] * g0))
            }
            _ => {
                let (g0, g1, g2) = (z - a[0], z - a[1], z - a[2]);
                let (r0, r1, r2) = (g1 * g2, g0 * g2, g0 * g1);
                (g0 * r0, r0 + r1 + r2, -(m[0] * r0 + m[1] * r1 + m[2] * r2))
            }
        };
        let s = self.sign;
        (s * self.psi0 * p, s * (self.dpsi0 * p + self.psi0 * p_x), s * self.psi0 * p_z)
    }

    /// `(h_zz, h_xz)` at height `z`.
    pub fn second_derivatives(&self, z: f64) -> (f64, f64) {
        let n = self.roots.len();
        let rest = |skip: &[usize]| -> f64 {
            (0..n).filter(|k| !skip.contains(k)).map(|k| z - self.roots[k]).product()
        };
        let mut p_z = 0.0;
        let mut p_zz = 0.0;
        let mut p_xz = 0.0;
        for i in 0..n {
            p_z += rest(&[i]);
            for j in 0..n {
                if i != j {
                    let r = rest(&[i, j]);
                    p_zz += r;
                    p_xz -= self.slopes[i] * r;
                }
            }
        }
        let s = self.sign;
        (s * self.psi0 * p_zz, s * (self.dpsi0 * p_z + self.psi0 * p_xz))
    }

    /// `(ydot, zdot)`; `xdot` is identically zero.
    #[inline]
    pub fn rates(&self, y: f64, z: f64) -> [f64; 2] {
        let (h, h_x, h_z) = self.eval(z);
        [-h_x + y * h_z, h]
    }

    /// Jacobian of `(ydot, zdot)` with respect to `(y, z)`.
    pub fn jacobian(&self, y: f64, z: f64) -> [[f64; 2]; 2] {
        let (_, _, h_z) = self.eval(z);
        let (h_zz, h_xz) = self.second_derivatives(z);
        [[h_z, -h_xz + y * h_zz], [0.0, h_z]]
    }
}

impl ContactHamiltonian for FrozenField {
    /// Evaluates at the frozen field regardless of `x`.
    fn jet(&self, _x: f64, _y: f64, z: f64) -> HamiltonianJet {
        let (h, h_x, h_z) = self.eval(z);
        HamiltonianJet { h, h_x, h_y: 0.0, h_z }
    }
}

/// The explicit flow of each variant, written out term by term.
pub fn vector_field(
    variant: &HamiltonianVariant,
    params: &ModelParams,
    state: &ContactState,
) -> Result<[f64; 3]> {
    let b = branch_functions(params, state.x)?;
    Ok(vector_field_with(variant, &b, state))
}

pub fn vector_field_with(variant: &HamiltonianVariant, b: &BranchFunctions, s: &ContactState) -> [f64; 3] {
    let p0 = variant.psi0.value(b.x);
    let p0d = variant.psi0.derivative(b.x);
    let g = [s.z - b.psi[0], s.z - b.psi[1], s.z - b.psi[2]];
    let w = [b.dpsi[0] + s.y, b.dpsi[1] + s.y, b.dpsi[2] + s.y];
    let (ydot, zdot) = match variant.kind {
        VariantKind::Squared => (
            p0d * g[0] * g[1] * g[1] - p0 * w[0] * g[1] * g[1] - 2.0 * p0 * w[1] * g[0] * g[1],
            -p0 * g[0] * g[1] * g[1],
        ),
        VariantKind::Cubic => (
            p0d * g[0] * g[1] * g[2]
                - p0 * (w[0] * g[1] * g[2] + w[1] * g[0] * g[2] + w[2] * g[0] * g[1]),
            -p0 * g[0] * g[1] * g[2],
        ),
        VariantKind::Quadratic => (
            -p0d * g[0] * g[1] + p0 * (w[0] * g[1] + w[1] * g[0]),
            p0 * g[0] * g[1],
        ),
    };
    [0.0, ydot, zdot]
}

/// Coefficients of the linearization `Zdot = -c Z`, `Ydot = -c Y + d Z` at a
/// fixed branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearizedCoefficients {
    pub c: f64,
    pub d: f64,
    /// Closed-form `c` in terms of branch gaps.
    pub c_displayed: f64,
    /// Closed-form `d` as displayed in the literature, where one exists.
    pub d_displayed: Option<f64>,
}

pub fn linearized_coefficients(
    variant: &HamiltonianVariant,
    params: &ModelParams,
    x: f64,
    mu: u8,
) -> Result<LinearizedCoefficients> {
    if !variant.kind.branches().contains(&mu) {
        return Err(Error::InvalidInput(format!("branch {mu} is not a fixed set of the {} flow", variant.kind)));
    }
    let b = branch_functions(params, x)?;
    let field = FrozenField::from_branches(variant, &b);
    let i = mu as usize - 1;
    let jac = field.jacobian(b.y[i], b.psi[i]);
    let (c_displayed, d_displayed) = displayed_coefficients(variant, &b, mu);
    Ok(LinearizedCoefficients { c: -jac[1][1], d: jac[0][1], c_displayed, d_displayed })
}

fn displayed_coefficients(variant: &HamiltonianVariant, b: &BranchFunctions, mu: u8) -> (f64, Option<f64>) {
    let p0 = variant.psi0.value(b.x);
    let p0d = variant.psi0.derivative(b.x);
    let (d21, d21p) = (b.diff(2, 1), b.diff_prime(2, 1));
    let (d31, d31p) = (b.diff(3, 1), b.diff_prime(3, 1));
    let (d32, d32p) = (b.diff(3, 2), b.diff_prime(3, 2));
    match (variant.kind, mu) {
        (VariantKind::Squared, 1) => (p0 * d21 * d21, Some(p0d * d21 * d21 + p0 * d21 * d21p)),
        (VariantKind::Squared, _) => (0.0, None),
        (VariantKind::Cubic, 1) => (
            p0 * d21 * d31,
            Some(p0d * d21 * d31 + p0 * d21p * d31 + p0 * d21 * d31p),
        ),
        (VariantKind::Cubic, 2) => (
            -p0 * d21 * d32,
            Some(-(p0d * d21 * d32 + p0 * d21p * d32 + p0 * d21 * d32p)),
        ),
        (VariantKind::Cubic, _) => (
            p0 * d31 * d32,
            Some(p0d * d31 * d32 + p0 * d31p * d32 + p0 * d31 * d32p),
        ),
        (VariantKind::Quadratic, 1) => (p0 * d21, Some(p0d * d21 + p0 * d21p)),
        (VariantKind::Quadratic, _) => (-p0 * d21, Some(-(p0d * d21 + p0 * d21p))),
    }
}

/// Closed-form solution of the linearized system.
pub fn linearized_solution(c: f64, d: f64, y0: f64, z0: f64, t: f64) -> (f64, f64) {
    let e = (-c * t).exp();
    ((y0 + d * z0 * t) * e, z0 * e)
}
