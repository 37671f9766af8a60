use rayon::prelude::*;

use crate::dynamics::{
    branch_functions, integrate_field, ContactState, FrozenField, HamiltonianVariant, IntegratorConfig,
};
use crate::error::Error;
use crate::model::ModelParams;

/// Grid points closer than this to `x = 0` are skipped by default.
pub const DEFAULT_EXCLUSION: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttractorConfig {
    pub integrator: IntegratorConfig,
    /// Branch whose value and slope anchor the initial conditions:
    /// `z0 = psi_ref(x) + offset`, `y0 = -dpsi_ref/dx`.
    pub reference: u8,
    pub exclusion: f64,
}

impl Default for AttractorConfig {
    fn default() -> Self {
        Self { integrator: IntegratorConfig::default(), reference: 2, exclusion: DEFAULT_EXCLUSION }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Limit {
    pub y0: f64,
    pub z0: f64,
    pub y: f64,
    pub z: f64,
    pub t: f64,
    /// Branch label nearest to the terminal `z`.
    pub branch: u8,
    /// `|z - psi_branch|`.
    pub gap: f64,
    /// `|y - y*_branch|`.
    pub y_gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CellOutcome {
    /// On the removed plane near `x = 0`.
    Excluded,
    Failed(Error),
    Limit(Limit),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttractorCell {
    pub x_index: usize,
    pub offset_index: usize,
    pub x: f64,
    pub offset: f64,
    pub outcome: CellOutcome,
}

/// Long-time limits of the flow over a grid of fields and initial offsets.
#[derive(Debug, Clone, PartialEq)]
pub struct AttractorMap {
    pub params: ModelParams,
    pub variant: HamiltonianVariant,
    pub x_grid: Vec<f64>,
    pub offsets: Vec<f64>,
    /// Row-major: all offsets for `x_grid[0]`, then `x_grid[1]`, ...
    pub cells: Vec<AttractorCell>,
}

impl AttractorMap {
    pub fn limits(&self) -> impl Iterator<Item = (&AttractorCell, &Limit)> {
        self.cells.iter().filter_map(|c| match &c.outcome {
            CellOutcome::Limit(l) => Some((c, l)),
            _ => None,
        })
    }

    pub fn cell(&self, x_index: usize, offset_index: usize) -> &AttractorCell {
        &self.cells[x_index * self.offsets.len() + offset_index]
    }
}

fn run_cell(
    variant: &HamiltonianVariant,
    params: &ModelParams,
    x: f64,
    offset: f64,
    config: &AttractorConfig,
) -> CellOutcome {
    if x.abs() < config.exclusion {
        return CellOutcome::Excluded;
    }
    let attempt = || -> crate::error::Result<Limit> {
        let b = branch_functions(params, x)?;
        let r = config.reference.clamp(1, 3) as usize - 1;
        let (y0, z0) = (b.y[r], b.psi[r] + offset);
        let field = FrozenField::from_branches(variant, &b);
        let tr = integrate_field(&field, Some(*variant), ContactState::new(x, y0, z0), &config.integrator)?;
        let end = tr.last();
        let (i, gap) = b
            .psi
            .iter()
            .map(|p| (end.z - p).abs())
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("three branches");
        Ok(Limit {
            y0,
            z0,
            y: end.y,
            z: end.z,
            t: end.t,
            branch: i as u8 + 1,
            gap,
            y_gap: (end.y - b.y[i]).abs(),
        })
    };
    match attempt() {
        Ok(l) => CellOutcome::Limit(l),
        Err(e) => CellOutcome::Failed(e),
    }
}

/// Integrates every `(x, offset)` pair in parallel; results keep grid order.
pub fn attractor_map(
    variant: &HamiltonianVariant,
    params: &ModelParams,
    x_grid: &[f64],
    offsets: &[f64],
    config: &AttractorConfig,
) -> AttractorMap {
    let jobs: Vec<(usize, usize)> = (0..x_grid.len())
        .flat_map(|i| (0..offsets.len()).map(move |k| (i, k)))
        .collect();
    let cells = jobs
        .par_iter()
        .map(|&(i, k)| AttractorCell {
            x_index: i,
            offset_index: k,
            x: x_grid[i],
            offset: offsets[k],
            outcome: run_cell(variant, params, x_grid[i], offsets[k], config),
        })
        .collect();
    AttractorMap {
        params: *params,
        variant: *variant,
        x_grid: x_grid.to_vec(),
        offsets: offsets.to_vec(),
        cells,
    }
}

/// Jump of the terminal magnetization across `x = 0`.
///
/// Each one-sided limit is extrapolated linearly from the two grid points
/// nearest to zero on that side, using the first offset column.
pub fn kink_jump(map: &AttractorMap) -> Option<f64> {
    let mut pos: Vec<(f64, f64)> = Vec::new();
    let mut neg: Vec<(f64, f64)> = Vec::new();
    for (cell, limit) in map.limits().filter(|(c, _)| c.offset_index == 0) {
        if cell.x > 0.0 {
            pos.push((cell.x, limit.y));
        } else {
            neg.push((cell.x, limit.y));
        }
    }
    pos.sort_by(|a, b| a.0.total_cmp(&b.0));
    neg.sort_by(|a, b| b.0.total_cmp(&a.0));
    let extrapolate = |v: &[(f64, f64)]| -> Option<f64> {
        let (a, b) = (v.first()?, v.get(1)?);
        Some(a.1 - a.0 * (b.1 - a.1) / (b.0 - a.0))
    };
    Some(extrapolate(&pos)? - extrapolate(&neg)?)
}
