use super::*;
use crate::analysis::checks::{run_checks, CheckLevel};
use crate::dynamics::{HamiltonianVariant, IntegratorConfig, Psi0, VariantKind};
use crate::error::Error;
use crate::model::{self, ModelParams};
use crate::numeric::linspace;

fn p(j0bar: f64) -> ModelParams {
    ModelParams::new(j0bar).unwrap()
}

#[test]
fn attractor_map_lands_on_psi1_with_kink() {
    let par = p(1.0);
    let v = HamiltonianVariant { kind: VariantKind::Squared, psi0: Psi0::Const(50.0) };
    let grid = linspace(-0.5, 0.5, 41);
    let map = attractor_map(&v, &par, &grid, &[-0.2, -0.05], &AttractorConfig::default());
    assert_eq!(map.cells.len(), 82);
    assert_eq!(map.cells.iter().filter(|c| c.outcome == CellOutcome::Excluded).count(), 2);
    assert_eq!(map.limits().count(), 80);
    for (cell, l) in map.limits() {
        assert_eq!(l.branch, 1, "x = {}", cell.x);
        assert!(l.gap < 1e-6, "x = {} gap {}", cell.x, l.gap);
        assert!(l.y_gap < 1e-6, "x = {} y gap {}", cell.x, l.y_gap);
    }
    assert_eq!(map.cell(3, 1).offset, -0.05);
    let jump = kink_jump(&map).unwrap();
    assert!((jump - 1.915_01).abs() < 1e-3, "{jump}");
}

#[test]
fn cubic_flow_above_psi2_settles_on_psi3() {
    let par = p(1.0);
    let v = HamiltonianVariant { kind: VariantKind::Cubic, psi0: Psi0::Const(5.0) };
    let grid = linspace(0.1, 0.3, 5);
    let cfg = AttractorConfig { reference: 2, ..Default::default() };
    let map = attractor_map(&v, &par, &grid, &[0.05, 0.02], &cfg);
    for (cell, l) in map.limits() {
        assert_eq!(l.branch, 3, "x = {}", cell.x);
        assert!(l.gap < 1e-8, "{}", l.gap);
    }
    assert_eq!(map.limits().count(), 10);
}

#[test]
fn attractor_cells_outside_windows_fail_cleanly() {
    let v = HamiltonianVariant::with_unit_psi0(VariantKind::Squared);
    let map = attractor_map(&v, &p(1.0), &[0.9], &[-0.1], &AttractorConfig::default());
    assert!(matches!(map.cells[0].outcome, CellOutcome::Failed(Error::Region(_))));
    assert!(kink_jump(&map).is_none());
}

#[test]
fn sweep_shows_hysteresis_loop() {
    let par = p(1.0);
    let s = hysteresis_sweep(&par, -0.6, 0.6, 121, &SweepConfig::default()).unwrap();
    let x_sp = model::spinodal_field(&par).unwrap();
    assert_eq!(s.schedule.len(), 242);
    assert_eq!(s.n_up, 121);
    assert_eq!(s.jump_points.len(), 2);
    let h = 0.01;
    assert!((s.jump_points[0] - x_sp).abs() <= h, "{:?}", s.jump_points);
    assert!((s.jump_points[1] + x_sp).abs() <= h, "{:?}", s.jump_points);
    assert!(s.area > 0.0);

    let (xu, yu) = s.up();
    let (xd, yd) = s.down();
    let n = xu.len();
    for i in 0..n {
        assert_eq!(xu[i], xd[n - 1 - i]);
        if xu[i].abs() > x_sp {
            assert!((yu[i] - yd[n - 1 - i]).abs() < 1e-8);
        }
    }
    // Up-sweep follows the negative branch through zero field.
    let mid = n / 2;
    assert!(yu[mid] < -0.9 && yd[n - 1 - mid] > 0.9);
}

#[test]
fn sweep_rejects_high_temperature_and_bad_ranges() {
    let cfg = SweepConfig::default();
    assert!(matches!(hysteresis_sweep(&p(0.4), -0.5, 0.5, 11, &cfg), Err(Error::Phase(_))));
    assert!(matches!(hysteresis_sweep(&p(1.0), 0.5, -0.5, 11, &cfg), Err(Error::InvalidInput(_))));
    assert!(hysteresis_sweep(&p(1.0), -0.5, 0.5, 1, &cfg).is_err());
}

#[test]
fn audit_single_spin_matches_closed_form() {
    let (beta, j0, h) = (0.7, 1.3, 0.2);
    let rows = saddle_point_audit(beta, j0, h, &[1]).unwrap();
    let closed = -(beta * j0 + (2.0 * (beta * h).cosh()).ln()) / beta;
    assert!((rows[0].exact - closed).abs() < 1e-12, "{} vs {closed}", rows[0].exact);
}

#[test]
fn audit_gap_shrinks_with_size() {
    for beta in [0.4, 1.0, 1.5] {
        let rows = saddle_point_audit(beta, 1.0, 0.1, &[16, 64, 256, 1024]).unwrap();
        assert!(gaps_strictly_decreasing(&rows), "beta {beta}: {rows:?}");
        assert!(rows.iter().all(|r| r.saddle == rows[0].saddle));
    }
    assert!(saddle_point_audit(1.0, 1.0, 0.1, &[64, 16]).is_err());
    assert!(saddle_point_audit(1.0, 1.0, 0.1, &[64, 64]).is_err());
}

#[test]
fn basin_trials_cover_both_regions() {
    let par = p(1.0);
    let v = HamiltonianVariant::with_unit_psi0(VariantKind::Squared);
    let trials = basin_trials(&par, &v, 3, 4, &IntegratorConfig::default(), false).unwrap();
    assert_eq!(trials.len(), 24);
    for t in trials.iter().filter(|t| t.target == Some(1)) {
        assert!(t.gap < 1e-6);
    }
    for t in trials.iter().filter(|t| t.target == Some(2)) {
        assert!(t.signed_gap >= 0.0 && t.gap <= t.algebraic_bound, "{t:?}");
    }
    assert!(matches!(basin_trials(&p(0.4), &v, 3, 4, &IntegratorConfig::default(), false), Err(Error::Phase(_))));
}

#[test]
fn rates_match_linearization() {
    let par = p(1.0);
    let x = 0.6 * model::spinodal_field(&par).unwrap();
    for kind in [VariantKind::Squared, VariantKind::Cubic, VariantKind::Quadratic] {
        let v = HamiltonianVariant::with_unit_psi0(kind);
        let fit = decay_rate(&v, &par, x, 1, -1e-4).unwrap();
        assert!(fit.rel_error < 0.05 && fit.monotone, "{kind}: {fit:?}");
    }
    for kind in [VariantKind::Cubic, VariantKind::Quadratic] {
        let v = HamiltonianVariant::with_unit_psi0(kind);
        let fit = growth_rate(&v, &par, x, 2, 1e-6, 1e-2).unwrap();
        assert!(fit.rel_error < 0.05 && fit.monotone && fit.escaped, "{kind}: {fit:?}");
    }
}

#[test]
fn theorem_reports_pass_for_every_flow() {
    let par = p(1.0);
    for kind in [VariantKind::Squared, VariantKind::Cubic, VariantKind::Quadratic] {
        let report = verify_theorems(&par, &HamiltonianVariant::with_unit_psi0(kind), 64);
        assert!(report.all_passed(), "{report}");
        assert!(report.trajectories > 0);
    }
}

#[test]
fn quick_checks_pass() {
    let report = run_checks(CheckLevel::Quick);
    assert!(report.all_passed(), "{report}");
    assert!("full".parse::<CheckLevel>().is_ok());
    assert!("slow".parse::<CheckLevel>().is_err());
}
