//! The invariant suite run by `contactflow check`.

use std::fmt;

use crate::dynamics::{
    branch_functions, generic_vector_field, integrate_linear, linearized_solution, vector_field_with, ContactState,
    FrozenField, HamiltonianVariant, Psi0, VariantKind,
};
use crate::legendre::{
    self, contact_residual, default_y_grid, prune, sample_curve, split_branches, toy_contact_residual, BranchDomain, Convention, PruneMode,
};
use crate::model::{self, classify_phase, ModelParams, PhaseRegime};
use crate::numeric::{linspace, observed_orders};

use super::{
    attractor_map, gaps_strictly_decreasing, hysteresis_sweep, saddle_point_audit, verify_theorems, AttractorConfig,
    CellOutcome, CheckEntry, SweepConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CheckLevel {
    Quick,
    Full,
}

impl std::str::FromStr for CheckLevel {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> crate::error::Result<Self> {
        match s {
            "quick" => Ok(CheckLevel::Quick),
            "full" => Ok(CheckLevel::Full),
            other => Err(crate::error::Error::InvalidInput(format!("unknown check level {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub level: CheckLevel,
    pub entries: Vec<CheckEntry>,
}

impl CheckReport {
    pub fn all_passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckEntry> {
        self.entries.iter().filter(|e| !e.passed)
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            writeln!(f, "{e}")?;
        }
        Ok(())
    }
}

/// Fractional part of `k * alpha`: a deterministic equidistributed sequence.
fn weyl(k: usize, alpha: f64) -> f64 {
    (k as f64 * alpha).fract()
}

fn p(j: f64) -> ModelParams {
    ModelParams::new(j).expect("positive coupling")
}

fn model_checks(out: &mut Vec<CheckEntry>) {
    let mut residual: f64 = 0.0;
    let mut count_errors = 0usize;
    let mut asymmetry: f64 = 0.0;
    let mut argmin_errors = 0usize;
    for j in [0.3, 0.6, 1.0, 2.0] {
        let par = p(j);
        let window = model::spinodal_field(&par);
        for x in linspace(-2.5, 2.5, 101) {
            let (Ok(roots), Ok(mirror)) = (model::solve_branches(&par, x), model::solve_branches(&par, -x)) else {
                count_errors += 1;
                continue;
            };
            for r in &roots {
                residual = residual.max(model::self_consistency_residual(&par, x, r.y_star).abs());
            }
            let expected = match window {
                Some(w) if x.abs() < w => 3,
                _ => 1,
            };
            if roots.len() != expected {
                count_errors += 1;
            }
            let mut a: Vec<f64> = roots.iter().map(|r| r.y_star).collect();
            let mut b: Vec<f64> = mirror.iter().map(|r| -r.y_star).collect();
            a.sort_by(f64::total_cmp);
            b.sort_by(f64::total_cmp);
            if a.len() == b.len() {
                asymmetry = a.iter().zip(&b).fold(asymmetry, |m, (u, v)| m.max((u - v).abs()));
            } else {
                asymmetry = f64::INFINITY;
            }
            if roots.iter().any(|r| r.z < roots[0].z) {
                argmin_errors += 1;
            }
        }
    }
    out.push(CheckEntry::at_most("model: root residual", residual, 1e-12, "404 fields".into()));
    out.push(CheckEntry::at_most("model: root count", count_errors as f64, 0.0, "1 outside, 3 inside the window".into()));
    out.push(CheckEntry::at_most("model: odd symmetry", asymmetry, 1e-12, String::new()));
    out.push(CheckEntry::at_most("model: mu = 1 is the arg-min", argmin_errors as f64, 0.0, String::new()));

    let below = classify_phase(&p(0.5 - 1e-9));
    let above = classify_phase(&p(0.5 + 1e-9));
    out.push(CheckEntry::new(
        "model: critical point at 2 j0bar = 1",
        0.0,
        0.0,
        below == PhaseRegime::HighTemperature && above == PhaseRegime::LowTemperature,
        format!("{below:?} / {above:?}"),
    ));
}

fn legendre_checks(out: &mut Vec<CheckEntry>) {
    let mut worst: f64 = 0.0;
    for j in [0.6, 1.0, 2.0] {
        for y in linspace(-0.9999, 0.9999, 10_000) {
            worst = worst.max(contact_residual(&p(j), y).map(f64::abs).unwrap_or(f64::INFINITY));
        }
    }
    out.push(CheckEntry::at_most("legendre: analytic contact residual", worst, 1e-10, "3 x 10^4 samples".into()));

    let errors: Vec<f64> = [201, 401, 801]
        .iter()
        .map(|&n| {
            sample_curve(&p(1.0), &linspace(-0.9, 0.9, n))
                .map(|c| c.max_discrete_contact_residual())
                .unwrap_or(f64::NAN)
        })
        .collect();
    let order = observed_orders(&errors).into_iter().fold(f64::INFINITY, f64::min);
    out.push(CheckEntry::new(
        "legendre: discrete residual order",
        order,
        1.9,
        order >= 1.9,
        format!("errors {:?}", errors),
    ));

    let par = p(1.0);
    let Ok(curve) = sample_curve(&par, &default_y_grid()) else {
        out.push(CheckEntry::new("legendre: sampling", f64::NAN, 0.0, false, "failed".into()));
        return;
    };
    let branches = split_branches(&curve).unwrap_or_default();

    let mirrored = |d: BranchDomain| branches.iter().filter(move |b| b.domain == d);
    let mut reflect_ok = !branches.is_empty();
    for b in mirrored(BranchDomain::IPlus).chain(mirrored(BranchDomain::OuterPlus)) {
        let image = branches.iter().find(|o| o.domain == b.domain.mirror() && o.mu == b.mu);
        reflect_ok &= image.is_some_and(|o| {
            let mut pts: Vec<_> = o.points.iter().map(|q| q.reflect()).collect();
            pts.sort_by(|a, c| a.x.total_cmp(&c.x));
            pts == b.points && o.role == b.role
        });
    }
    out.push(CheckEntry::new("legendre: reflection symmetry", 0.0, 0.0, reflect_ok, "bitwise".into()));

    let idempotent = [PruneMode::None, PruneMode::DropUnstable, PruneMode::DropUnstableAndMetastable]
        .iter()
        .all(|&m| prune(&prune(&branches, m), m) == prune(&branches, m));
    out.push(CheckEntry::new("legendre: prune idempotent", 0.0, 0.0, idempotent, String::new()));

    let x_sp = model::spinodal_field(&par).unwrap_or(f64::NAN);
    let mut misordered = 0usize;
    for k in 1..=1000 {
        let x = x_sp * k as f64 / 1001.0;
        for xv in [x, -x] {
            match branch_functions(&par, xv) {
                Ok(b) if b.psi[0] < b.psi[1] && b.psi[1] < b.psi[2] => {}
                _ => misordered += 1,
            }
        }
    }
    out.push(CheckEntry::at_most(
        "legendre: psi1 < psi2 < psi3 on I-, I+",
        misordered as f64,
        0.0,
        "10^3 interior fields per window".into(),
    ));

    let mut label_gap: f64 = 0.0;
    for b in branches.iter().filter(|b| matches!(b.domain, BranchDomain::IPlus | BranchDomain::IMinus)) {
        for q in &b.points {
            if let Ok(roots) = model::solve_branches(&par, q.x) {
                if roots.len() == 3 {
                    label_gap = label_gap.max((roots[b.mu as usize - 1].z - q.z).abs());
                }
            }
        }
    }
    out.push(CheckEntry::at_most("legendre: branch labels match root order", label_gap, 1e-10, String::new()));

    let sing = curve.xz_singular_points();
    let ys = 0.5f64.sqrt();
    let h = 2.0 * 0.999 / 2000.0;
    let ok = sing.len() == 2 && (sing[0] + ys).abs() <= h && (sing[1] - ys).abs() <= h;
    out.push(CheckEntry::new("legendre: wave-front singular points", 0.0, 0.0, ok, format!("{sing:?}")));

    let mut toy: f64 = 0.0;
    for i in 1..=2000 {
        let x = legendre::TOY_CUSP_X + (2.0 - legendre::TOY_CUSP_X) * i as f64 / 2000.0;
        let (a, b) = toy_contact_residual(x).unwrap_or((f64::INFINITY, f64::INFINITY));
        toy = toy.max(a.abs()).max(b.abs());
    }
    out.push(CheckEntry::at_most("legendre: toy contact residual", toy, 1e-10, "x in (-1/8, 2]".into()));
}

fn dynamics_checks(out: &mut Vec<CheckEntry>) {
    let par = p(1.0);
    let x_sp = model::spinodal_field(&par).unwrap_or(f64::NAN);
    let kinds = [VariantKind::Squared, VariantKind::Cubic, VariantKind::Quadratic];

    let mut mismatch: f64 = 0.0;
    for k in 0..1000 {
        let kind = kinds[k % 3];
        let v = HamiltonianVariant { kind, psi0: Psi0::Exp { c: 0.8, a: 2.0 * weyl(k, 0.618_033_988_749_895) - 1.0 } };
        let mut x = (0.02 + 0.96 * weyl(k, 0.414_213_562_373_095)) * x_sp;
        if k % 2 == 1 {
            x = -x;
        }
        let Ok(b) = branch_functions(&par, x) else {
            mismatch = f64::INFINITY;
            continue;
        };
        let s = ContactState::new(x, 2.0 * weyl(k, 0.732_050_807_568_877) - 1.0, b.psi[1] + weyl(k, 0.236_067_977_499_79) - 0.5);
        let a = vector_field_with(&v, &b, &s);
        let g = generic_vector_field(&FrozenField::from_branches(&v, &b), Convention::PlusYdx, &s);
        mismatch = (0..3).fold(mismatch, |m, i| m.max((a[i] - g[i]).abs()));
    }
    out.push(CheckEntry::at_most("dynamics: explicit vs generic field", mismatch, 1e-12, "10^3 states".into()));

    let eps = 1e-6;
    let mut jac_err: f64 = 0.0;
    for kind in kinds {
        let v = HamiltonianVariant { kind, psi0: Psi0::Exp { c: 1.5, a: -0.8 } };
        for x in [-0.7 * x_sp, 0.25 * x_sp, 0.8 * x_sp] {
            let Ok(b) = branch_functions(&par, x) else { continue };
            let field = FrozenField::from_branches(&v, &b);
            for &mu in kind.branches() {
                let s = ContactState::on_branch(&b, mu);
                let jac = field.jacobian(s.y, s.z);
                let scale = jac.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-3);
                for (col, (dy, dz)) in [(eps, 0.0), (0.0, eps)].into_iter().enumerate() {
                    let fp = vector_field_with(&v, &b, &ContactState::new(x, s.y + dy, s.z + dz));
                    let fm = vector_field_with(&v, &b, &ContactState::new(x, s.y - dy, s.z - dz));
                    for row in 0..2 {
                        let fd = (fp[row + 1] - fm[row + 1]) / (2.0 * eps);
                        jac_err = jac_err.max((fd - jac[row][col]).abs() / scale);
                    }
                }
            }
        }
    }
    out.push(CheckEntry::at_most("dynamics: Jacobian vs central differences", jac_err, 1e-5, String::new()));

    let (c, d, y0, z0, t) = (0.7, 1.3, 0.2, -0.5, 2.0);
    let exact = linearized_solution(c, d, y0, z0, t);
    let errs: Vec<f64> = [0.1, 0.05, 0.025, 0.0125]
        .iter()
        .map(|&h| {
            let (y, z) = integrate_linear(c, d, y0, z0, h, t);
            (y - exact.0).abs().max((z - exact.1).abs())
        })
        .collect();
    let order = observed_orders(&errs).into_iter().fold(f64::INFINITY, f64::min);
    out.push(CheckEntry::new("dynamics: RK4 order on linear system", order, 3.9, order >= 3.9, String::new()));
}

fn audit_checks(out: &mut Vec<CheckEntry>) {
    for beta in [0.4, 1.0] {
        let name = format!("analysis: audit gap decreasing (beta = {beta})");
        let entry = match saddle_point_audit(beta, 1.0, 0.1, &[64, 256, 1024]) {
            Ok(rows) => CheckEntry::new(
                &name,
                rows.last().map(|r| r.gap).unwrap_or(f64::NAN),
                0.0,
                gaps_strictly_decreasing(&rows),
                rows.iter().map(|r| format!("{}:{:.3e}", r.n, r.gap)).collect::<Vec<_>>().join(" "),
            ),
            Err(e) => CheckEntry::new(&name, f64::NAN, 0.0, false, e.to_string()),
        };
        out.push(entry);
    }
}

fn full_checks(out: &mut Vec<CheckEntry>) {
    let par = p(1.0);
    for kind in [VariantKind::Squared, VariantKind::Cubic, VariantKind::Quadratic] {
        let report = verify_theorems(&par, &HamiltonianVariant::with_unit_psi0(kind), 400);
        for mut e in report.entries {
            e.name = format!("theorems[{kind}]: {}", e.name);
            out.push(e);
        }
    }

    let v = HamiltonianVariant { kind: VariantKind::Squared, psi0: Psi0::Const(50.0) };
    let grid = linspace(-0.5, 0.5, 41);
    let map = attractor_map(&v, &par, &grid, &[-0.2, -0.05], &AttractorConfig::default());
    let worst = map.cells.iter().fold(0.0f64, |m, c| match &c.outcome {
        CellOutcome::Excluded => m,
        CellOutcome::Limit(l) if l.branch == 1 => m.max(l.gap),
        _ => f64::INFINITY,
    });
    out.push(CheckEntry::at_most("analysis: attractor limits on psi1", worst, 1e-6, "41 fields x 2 offsets".into()));

    let sweep = hysteresis_sweep(&par, -0.6, 0.6, 121, &SweepConfig::default());
    let x_sp = model::spinodal_field(&par).unwrap_or(f64::NAN);
    match sweep {
        Ok(s) => {
            let h = 1.2 / 120.0;
            let jumps_ok = s.jump_points.len() == 2
                && (s.jump_points[0] - x_sp).abs() <= h
                && (s.jump_points[1] + x_sp).abs() <= h;
            out.push(CheckEntry::new(
                "analysis: sweep jumps at the spinodal fields",
                0.0,
                h,
                jumps_ok,
                format!("{:?}", s.jump_points),
            ));
            let (xu, yu) = s.up();
            let (_, yd) = s.down();
            let n = xu.len();
            let reversible = (0..n)
                .filter(|&i| xu[i].abs() > x_sp)
                .map(|i| (yu[i] - yd[n - 1 - i]).abs())
                .fold(0.0, f64::max);
            out.push(CheckEntry::at_most("analysis: sweep reversible outside the loop", reversible, 1e-8, String::new()));
            out.push(CheckEntry::new("analysis: loop area positive", s.area, 0.0, s.area > 0.0, String::new()));
        }
        Err(e) => out.push(CheckEntry::new("analysis: sweep", f64::NAN, 0.0, false, e.to_string())),
    }
}

pub fn run_checks(level: CheckLevel) -> CheckReport {
    let mut entries = Vec::new();
    model_checks(&mut entries);
    legendre_checks(&mut entries);
    dynamics_checks(&mut entries);
    audit_checks(&mut entries);
    if level == CheckLevel::Full {
        full_checks(&mut entries);
    }
    CheckReport { level, entries }
}
