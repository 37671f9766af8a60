use contactflow_core::analysis::{gaps_strictly_decreasing, saddle_point_audit};
use contactflow_core::dynamics::{
    branch_functions, generic_vector_field, integrate, lyapunov, vector_field, FrozenField, RegionLabel,
};
use contactflow_core::legendre::{
    contact_residual, default_y_grid, prune, sample_curve, split_branches, toy_contact_residual,
};
use contactflow_core::model::{self, d2psi_dx2, d2psi_dy2, solve_branches, x_of_y};
use contactflow_core::numeric::linspace;
use contactflow_core::{
    BranchDomain, ContactState, Convention, HamiltonianVariant, IntegratorConfig, ModelParams, PruneMode,
    Stability, VariantKind,
};
use proptest::prelude::*;

fn p(j: f64) -> ModelParams {
    ModelParams::new(j).unwrap()
}

fn kinds() -> impl Strategy<Value = VariantKind> {
    prop_oneof![Just(VariantKind::Squared), Just(VariantKind::Cubic), Just(VariantKind::Quadratic)]
}

proptest! {
    #[test]
    fn roots_solve_the_self_consistent_equation(j in 0.3f64..2.0, x in -1.5f64..1.5) {
        let par = p(j);
        for r in solve_branches(&par, x).unwrap() {
            prop_assert!(model::self_consistency_residual(&par, x, r.y_star).abs() < 1e-12);
            prop_assert!((x_of_y(&par, r.y_star).unwrap() - x).abs() < 1e-10);
        }
    }

    #[test]
    fn root_count_follows_the_window(j in 0.55f64..2.0, frac in 1e-3f64..0.999, far in 1.001f64..3.0) {
        let par = p(j);
        let x_sp = model::spinodal_field(&par).unwrap();
        prop_assert_eq!(solve_branches(&par, frac * x_sp).unwrap().len(), 3);
        prop_assert_eq!(solve_branches(&par, -frac * x_sp).unwrap().len(), 3);
        prop_assert_eq!(solve_branches(&par, far * x_sp).unwrap().len(), 1);
        prop_assert_eq!(solve_branches(&par, -far * x_sp).unwrap().len(), 1);
    }

    #[test]
    fn high_temperature_has_one_root(j in 0.05f64..0.499, x in -2.0f64..2.0) {
        prop_assert_eq!(solve_branches(&p(j), x).unwrap().len(), 1);
    }

    #[test]
    fn solutions_are_odd_in_the_field(j in 0.3f64..2.0, x in -1.5f64..1.5) {
        let par = p(j);
        let a = solve_branches(&par, x).unwrap();
        let b = solve_branches(&par, -x).unwrap();
        prop_assert_eq!(a.len(), b.len());
        for (r, s) in a.iter().zip(&b) {
            prop_assert_eq!(r.mu, s.mu);
            prop_assert!((r.y_star + s.y_star).abs() < 1e-12);
            prop_assert!((r.z - s.z).abs() < 1e-12);
        }
    }

    #[test]
    fn most_stable_root_follows_the_field(j in 0.55f64..2.0, frac in 1e-3f64..0.999) {
        let par = p(j);
        let x = frac * model::spinodal_field(&par).unwrap();
        let roots = solve_branches(&par, x).unwrap();
        let best = roots.iter().find(|r| r.stability == Stability::MostStable).unwrap();
        prop_assert!(best.y_star > 0.0);
        prop_assert!(roots.iter().all(|r| r.y_star <= best.y_star));
        let roots = solve_branches(&par, -x).unwrap();
        let best = roots.iter().find(|r| r.stability == Stability::MostStable).unwrap();
        prop_assert!(roots.iter().all(|r| r.y_star >= best.y_star));
    }

    #[test]
    fn pseudo_free_energy_is_concave_in_the_field(j in 0.05f64..3.0, x in -3.0f64..3.0, y in -0.999f64..0.999) {
        prop_assert!(d2psi_dx2(&p(j), x, y) < 0.0);
    }

    #[test]
    fn legendre_curve_is_legendrian(j in 0.3f64..3.0, y in -0.999f64..0.999) {
        prop_assert!(contact_residual(&p(j), y).unwrap() < 1e-10);
    }

    #[test]
    fn toy_cusp_is_legendrian(x in -0.1249f64..2.0) {
        let (a, b) = toy_contact_residual(x).unwrap();
        prop_assert!(a.abs() < 1e-10 && b.abs() < 1e-10);
    }

    #[test]
    fn branch_values_are_strictly_ordered(j in 0.55f64..2.0, frac in 1e-3f64..0.999, sign in prop::bool::ANY) {
        let par = p(j);
        let x = frac * model::spinodal_field(&par).unwrap() * if sign { 1.0 } else { -1.0 };
        let b = branch_functions(&par, x).unwrap();
        prop_assert!(b.psi[0] < b.psi[1] && b.psi[1] < b.psi[2]);
    }
}

#[test]
fn second_y_derivative_changes_sign_only_when_ordered() {
    let ys = linspace(-0.999, 0.999, 1001);
    for j in [0.2, 0.4, 0.49, 0.51, 1.0, 2.0] {
        let par = p(j);
        for x in [-0.5, 0.0, 0.3] {
            let v: Vec<f64> = ys.iter().map(|&y| d2psi_dy2(&par, x, y)).collect();
            let mixed = v.iter().any(|&a| a > 0.0) && v.iter().any(|&a| a < 0.0);
            assert_eq!(mixed, 2.0 * j > 1.0, "j0bar {j} x {x}");
        }
    }
}

#[test]
fn root_count_on_a_dense_grid() {
    let par = p(1.0);
    let x_sp = model::spinodal_field(&par).unwrap();
    for x in linspace(-1.5, 1.5, 1001) {
        let n = solve_branches(&par, x).unwrap().len();
        if x.abs() < x_sp * (1.0 - 1e-9) {
            assert_eq!(n, 3, "x = {x}");
        } else if x.abs() > x_sp * (1.0 + 1e-9) {
            assert_eq!(n, 1, "x = {x}");
        }
    }
}

#[test]
fn audit_gap_decreases_across_phases() {
    for (beta, j0, h) in [(0.4, 1.0, 0.1), (1.0, 1.0, 0.1), (0.8, 1.0, -0.3)] {
        let rows = saddle_point_audit(beta, j0, h, &[64, 256, 1024, 4096]).unwrap();
        assert!(gaps_strictly_decreasing(&rows), "{beta} {j0} {h}: {rows:?}");
    }
}

#[test]
fn branches_reflect_between_windows() {
    for j in [0.75, 1.0, 2.0] {
        let curve = sample_curve(&p(j), &default_y_grid()).unwrap();
        let branches = split_branches(&curve).unwrap();
        for b in branches.iter().filter(|b| b.domain == BranchDomain::IPlus) {
            let m = branches
                .iter()
                .find(|c| c.domain == BranchDomain::IMinus && c.mu == b.mu)
                .expect("mirror branch");
            assert_eq!(m.role, b.role);
            let mut mirrored: Vec<_> = b.points.iter().map(|q| q.reflect()).collect();
            mirrored.reverse();
            assert_eq!(m.points, mirrored, "j0bar {j} mu {}", b.mu);
        }
    }
}

#[test]
fn pruning_is_idempotent() {
    let curve = sample_curve(&p(1.0), &default_y_grid()).unwrap();
    let branches = split_branches(&curve).unwrap();
    for mode in [PruneMode::None, PruneMode::DropUnstable, PruneMode::DropUnstableAndMetastable] {
        let once = prune(&branches, mode);
        assert_eq!(prune(&once, mode), once);
    }
    assert!(prune(&branches, PruneMode::DropUnstableAndMetastable)
        .iter()
        .all(|b| b.role == Stability::MostStable));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn flows_conserve_x_and_decrease_lyapunov(
        kind in kinds(),
        j in 0.75f64..2.0,
        frac in 0.2f64..0.9,
        f in -1.0f64..0.5,
    ) {
        let par = p(j);
        let x = frac * model::spinodal_field(&par).unwrap();
        let b = branch_functions(&par, x).unwrap();
        let v = HamiltonianVariant::with_unit_psi0(kind);
        let z0 = b.psi[0] + f * b.diff(2, 1);
        let cfg = IntegratorConfig { t_max: 40.0, step: 1e-2, ..Default::default() };
        let tr = integrate(&v, &par, ContactState::new(x, b.y[0], z0), &cfg).unwrap();
        prop_assert!(tr.max_x_drift() <= 1e-14);
        let mut prev = f64::INFINITY;
        for s in &tr.states {
            let (val, rate) = lyapunov(&v, &par, RegionLabel::D1Plus, s).unwrap();
            prop_assert!(val >= 0.0 && rate <= 0.0);
            prop_assert!(val <= prev + 1e-12 * (1.0 + prev.abs().min(1e300)));
            prev = val;
        }
    }

    #[test]
    fn branches_are_fixed_points(kind in kinds(), j in 0.55f64..2.0, frac in 1e-3f64..0.999, sign in prop::bool::ANY) {
        let par = p(j);
        let x = frac * model::spinodal_field(&par).unwrap() * if sign { 1.0 } else { -1.0 };
        let b = branch_functions(&par, x).unwrap();
        let v = HamiltonianVariant::with_unit_psi0(kind);
        for &mu in kind.branches() {
            let f = vector_field(&v, &par, &ContactState::on_branch(&b, mu)).unwrap();
            prop_assert!(f.iter().map(|c| c * c).sum::<f64>().sqrt() < 1e-10);
        }
    }

    #[test]
    fn explicit_field_matches_generic(kind in kinds(), frac in 0.05f64..0.95, y in -1.0f64..1.0, dz in -0.3f64..0.3) {
        let par = p(1.0);
        let x = frac * model::spinodal_field(&par).unwrap();
        let b = branch_functions(&par, x).unwrap();
        let v = HamiltonianVariant::with_unit_psi0(kind);
        let s = ContactState::new(x, y, b.psi[1] + dz);
        let explicit = vector_field(&v, &par, &s).unwrap();
        let generic = generic_vector_field(&FrozenField::from_branches(&v, &b), Convention::PlusYdx, &s);
        for k in 0..3 {
            prop_assert!((explicit[k] - generic[k]).abs() < 1e-12);
        }
    }
}
