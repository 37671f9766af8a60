use crate::error::{Error, Result};
use crate::model::{exact_free_energy_per_spin, saddle_free_energy_per_spin};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditRow {
    pub n: u64,
    pub exact: f64,
    pub saddle: f64,
    pub gap: f64,
}

/// Exact finite-`n` free energy per spin against its saddle-point limit.
pub fn saddle_point_audit(beta: f64, j0: f64, field: f64, n_list: &[u64]) -> Result<Vec<AuditRow>> {
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("system sizes must be strictly ascending".into()));
    }
    let saddle = saddle_free_energy_per_spin(beta, j0, field)?;
    n_list
        .iter()
        .map(|&n| {
            let exact = exact_free_energy_per_spin(n, beta, j0, field)?;
            Ok(AuditRow { n, exact, saddle, gap: (exact - saddle).abs() })
        })
        .collect()
}

/// Whether the gap column is strictly decreasing.
pub fn gaps_strictly_decreasing(rows: &[AuditRow]) -> bool {
    rows.windows(2).all(|w| w[1].gap < w[0].gap)
}
