use std::fmt;

use crate::error::{Error, Result};
use crate::model::ModelParams;

use super::hamiltonian::{branch_functions, BranchFunctions, FrozenField, HamiltonianVariant, VariantKind};
use super::ContactState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegionLabel {
    D1Plus,
    D2Plus,
    D3Plus,
    D1Minus,
    D2Minus,
    D3Minus,
    OffRegion,
}

impl RegionLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            RegionLabel::D1Plus => "D1+",
            RegionLabel::D2Plus => "D2+",
            RegionLabel::D3Plus => "D3+",
            RegionLabel::D1Minus => "D1-",
            RegionLabel::D2Minus => "D2-",
            RegionLabel::D3Minus => "D3-",
            RegionLabel::OffRegion => "off",
        }
    }

    /// 1, 2 or 3; `None` off the windows.
    pub fn index(self) -> Option<u8> {
        match self {
            RegionLabel::D1Plus | RegionLabel::D1Minus => Some(1),
            RegionLabel::D2Plus | RegionLabel::D2Minus => Some(2),
            RegionLabel::D3Plus | RegionLabel::D3Minus => Some(3),
            RegionLabel::OffRegion => None,
        }
    }

    fn from_parts(index: u8, positive: bool) -> Self {
        match (index, positive) {
            (1, true) => RegionLabel::D1Plus,
            (2, true) => RegionLabel::D2Plus,
            (3, true) => RegionLabel::D3Plus,
            (1, false) => RegionLabel::D1Minus,
            (2, false) => RegionLabel::D2Minus,
            _ => RegionLabel::D3Minus,
        }
    }
}

impl fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `D1` below the metastable branch, `D2` on or above it.
pub fn classify_region(params: &ModelParams, state: &ContactState) -> RegionLabel {
    match branch_functions(params, state.x) {
        Ok(b) => classify_with(None, &b, state.z),
        Err(_) => RegionLabel::OffRegion,
    }
}

/// Like [`classify_region`], but the Cubic flow splits the upper part into
/// the basin of the top branch (`z > psi2`, `D3`) and the unstable set itself.
pub fn classify_region_for(
    variant: &HamiltonianVariant,
    params: &ModelParams,
    state: &ContactState,
) -> RegionLabel {
    match branch_functions(params, state.x) {
        Ok(b) => classify_with(Some(variant.kind), &b, state.z),
        Err(_) => RegionLabel::OffRegion,
    }
}

/// Region of height `z` given precomputed branch values; `kind` as in
/// [`classify_region_for`], or `None` for the two-region split.
pub fn classify_with(kind: Option<VariantKind>, b: &BranchFunctions, z: f64) -> RegionLabel {
    let positive = b.x > 0.0;
    let index = if z < b.psi[1] {
        1
    } else if kind == Some(VariantKind::Cubic) && z > b.psi[1] {
        3
    } else {
        2
    };
    RegionLabel::from_parts(index, positive)
}

/// Lyapunov function of the named region and its time derivative along the flow.
///
/// `V1 = (z - psi1)^2 / 2` on `D1`, `V2 = z - psi2` on `D2` (Squared),
/// `V3 = (z - psi3)^2 / 2` on `D3` (Cubic).
pub fn lyapunov(
    variant: &HamiltonianVariant,
    params: &ModelParams,
    region: RegionLabel,
    state: &ContactState,
) -> Result<(f64, f64)> {
    let b = branch_functions(params, state.x)?;
    let field = FrozenField::from_branches(variant, &b);
    lyapunov_with(variant.kind, &b, &field, region, state.z)
}

/// [`lyapunov`] with precomputed branch values and field.
pub fn lyapunov_with(
    kind: VariantKind,
    b: &BranchFunctions,
    field: &FrozenField,
    region: RegionLabel,
    z: f64,
) -> Result<(f64, f64)> {
    let actual = classify_with(Some(kind), b, z);
    if actual != region {
        return Err(Error::Region(format!("state is in {actual}, not {region}")));
    }
    let h = field.eval(z).0;
    match (kind, region.index()) {
        (_, Some(1)) => {
            let e = z - b.psi[0];
            Ok((0.5 * e * e, e * h))
        }
        (VariantKind::Squared, Some(2)) => Ok((z - b.psi[1], h)),
        (VariantKind::Cubic, Some(3)) => {
            let e = z - b.psi[2];
            Ok((0.5 * e * e, e * h))
        }
        _ => Err(Error::Region(format!("the {kind} flow has no Lyapunov function on {region}"))),
    }
}
