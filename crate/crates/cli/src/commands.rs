use std::io::Write;

use contactflow_core::analysis::checks::{run_checks, CheckLevel};
use contactflow_core::analysis::{
    attractor_map, hysteresis_sweep, kink_jump, saddle_point_audit, AttractorConfig, CellOutcome, SweepConfig,
};
use contactflow_core::dynamics::{
    branch_functions, classify_with, integrate_field, lyapunov_with, FrozenField,
};
use contactflow_core::legendre::{
    prune, project_branches, project_curve, sample_curve_with, split_branches, toy_cusp_samples,
};
use contactflow_core::model::solve_branches;
use contactflow_core::numeric::linspace;
use contactflow_core::{
    ContactState, Convention, HamiltonianVariant, IntegratorConfig, Plane, PruneMode, Psi0, VariantKind,
};

use crate::output::{curve_csv, num, parse_grid, parse_sizes, polylines_csv, polylines_svg, read_curve, write_file, Csv};
use crate::{CliError, Command, ConventionArg, LevelArg, PlaneArg, PruneArg, VariantArg};

type Out<'a> = &'a mut dyn Write;

fn emit(out: Out, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string()))
}

fn variant(kind: VariantArg, psi0: f64) -> Result<HamiltonianVariant, CliError> {
    let kind = match kind {
        VariantArg::Squared => VariantKind::Squared,
        VariantArg::Cubic => VariantKind::Cubic,
        VariantArg::Quadratic => VariantKind::Quadratic,
    };
    HamiltonianVariant::new(kind, Psi0::Const(psi0)).map_err(|e| CliError::Usage(e.to_string()))
}

fn integrator(dt: f64, t_max: f64) -> Result<IntegratorConfig, CliError> {
    let cfg = IntegratorConfig { step: dt, t_max, ..Default::default() };
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(cfg)
}

pub fn execute(command: Command, out: Out, err: Out) -> Result<(), CliError> {
    match command {
        Command::Branches { params, format: _ } => {
            let (params, x) = params.resolve(true)?;
            let x = x.expect("resolved field");
            let mut csv = Csv::new(&["mu", "x", "y", "z", "stability", "degenerate"]);
            for r in solve_branches(&params, x)? {
                csv.row(&[
                    r.mu.to_string(),
                    num(x),
                    num(r.y_star),
                    num(r.z),
                    r.stability.as_str().to_string(),
                    r.degenerate.to_string(),
                ]);
            }
            emit(out, &csv.into_string())
        }

        Command::Curve { params, ymin, ymax, n, convention, out: path } => {
            let (params, _) = params.resolve(false)?;
            if n < 2 || !(ymin < ymax) {
                return Err(CliError::Usage("need --n >= 2 and --ymin < --ymax".into()));
            }
            let convention = match convention {
                ConventionArg::Plus => Convention::PlusYdx,
                ConventionArg::Minus => Convention::MinusYdx,
            };
            let curve = sample_curve_with(&params, &linspace(ymin, ymax, n), convention)?;
            log::info!("sampled {} points at j0bar = {}", curve.samples.len(), params.j0bar());
            write_file(&path, &curve_csv(&curve))
        }

        Command::Project { input, plane, prune: mode, out: path, svg } => {
            let curve = read_curve(&input)?;
            let plane = match plane {
                PlaneArg::Xz => Plane::XZ,
                PlaneArg::Xy => Plane::XY,
                PlaneArg::Yz => Plane::YZ,
            };
            let lines = match mode {
                PruneArg::None => project_curve(&curve, plane),
                PruneArg::Unstable | PruneArg::UnstableMetastable => {
                    let mode = if mode == PruneArg::Unstable {
                        PruneMode::DropUnstable
                    } else {
                        PruneMode::DropUnstableAndMetastable
                    };
                    project_branches(&prune(&split_branches(&curve)?, mode), plane)
                }
            };
            write_file(&path, &polylines_csv(&lines, plane.axis_names()))?;
            if let Some(svg) = svg {
                let pts: Vec<Vec<[f64; 2]>> = lines.into_iter().map(|l| l.points).collect();
                write_file(&svg, &polylines_svg(&pts))?;
            }
            Ok(())
        }

        Command::Flow { variant: kind, params, z0, y0, psi0_const, dt, t_max, stride, out: path } => {
            let (params, x) = params.resolve(true)?;
            let x = x.expect("resolved field");
            let v = variant(kind, psi0_const)?;
            let cfg = integrator(dt, t_max)?;
            if stride == 0 {
                return Err(CliError::Usage("--stride must be positive".into()));
            }
            let b = branch_functions(&params, x)?;
            let y0 = y0.unwrap_or_else(|| {
                let nearest = (0..3).min_by(|&i, &j| (z0 - b.psi[i]).abs().total_cmp(&(z0 - b.psi[j]).abs()));
                b.y[nearest.expect("three branches")]
            });
            let field = FrozenField::from_branches(&v, &b);
            let tr = integrate_field(&field, Some(v), ContactState::new(x, y0, z0), &cfg)?;
            log::info!("{} states, termination {:?}", tr.states.len(), tr.termination);
            let mut csv = Csv::new(&["t", "x", "y", "z", "region", "V", "dVdt"]);
            let last = tr.states.len() - 1;
            for (i, s) in tr.states.iter().enumerate() {
                if i % stride != 0 && i != last {
                    continue;
                }
                let region = classify_with(Some(v.kind), &b, s.z);
                let (vv, dv) = match lyapunov_with(v.kind, &b, &field, region, s.z) {
                    Ok((a, d)) => (num(a), num(d)),
                    Err(_) => (String::new(), String::new()),
                };
                csv.row(&[num(s.t), num(s.x), num(s.y), num(s.z), region.as_str().to_string(), vv, dv]);
            }
            write_file(&path, &csv.into_string())
        }

        Command::Sweep { params, x_max, steps, out: path } => {
            let (params, _) = params.resolve(false)?;
            if !(x_max > 0.0) || steps < 2 {
                return Err(CliError::Usage("need --x-max > 0 and --steps >= 2".into()));
            }
            let s = hysteresis_sweep(&params, -x_max, x_max, steps, &SweepConfig::default())?;
            log::info!("jumps at {:?}, loop area {}", s.jump_points, s.area);
            let mut csv = Csv::new(&["direction", "x", "y", "z"]);
            for i in 0..s.schedule.len() {
                let dir = if i < s.n_up { "up" } else { "down" };
                csv.row(&[dir.to_string(), num(s.schedule[i]), num(s.y_path[i]), num(s.z_path[i])]);
            }
            write_file(&path, &csv.into_string())
        }

        Command::Basin {
            variant: kind,
            params,
            x_grid,
            offsets,
            reference,
            psi0_const,
            dt,
            t_max,
            out: path,
            svg,
        } => {
            let (params, _) = params.resolve(false)?;
            let v = variant(kind, psi0_const)?;
            let xs = parse_grid(&x_grid)?;
            let offs = parse_grid(&offsets)?;
            let cfg = AttractorConfig { integrator: integrator(dt, t_max)?, reference, ..Default::default() };
            let map = attractor_map(&v, &params, &xs, &offs, &cfg);
            let mut csv = Csv::new(&[
                "x_index", "offset_index", "x", "offset", "status", "y0", "z0", "t", "y", "z", "branch", "gap",
            ]);
            for c in &map.cells {
                let head = [c.x_index.to_string(), c.offset_index.to_string(), num(c.x), num(c.offset)];
                let tail: [String; 8] = match &c.outcome {
                    CellOutcome::Limit(l) => [
                        "limit".into(),
                        num(l.y0),
                        num(l.z0),
                        num(l.t),
                        num(l.y),
                        num(l.z),
                        l.branch.to_string(),
                        num(l.gap),
                    ],
                    CellOutcome::Excluded => ["excluded".into(), "".into(), "".into(), "".into(), "".into(), "".into(), "".into(), "".into()],
                    CellOutcome::Failed(e) => {
                        log::warn!("x = {}, offset = {}: {e}", c.x, c.offset);
                        ["failed".into(), "".into(), "".into(), "".into(), "".into(), "".into(), "".into(), "".into()]
                    }
                };
                let row: Vec<String> = head.into_iter().chain(tail).collect();
                csv.row(&row);
            }
            if let Some(jump) = kink_jump(&map) {
                log::info!("terminal magnetization jump across x = 0: {jump}");
            }
            write_file(&path, &csv.into_string())?;
            if let Some(svg) = svg {
                let mut lines: Vec<Vec<[f64; 2]>> = Vec::new();
                for mu in 1..=3u8 {
                    let mut pts: Vec<[f64; 2]> =
                        map.limits().filter(|(_, l)| l.branch == mu).map(|(c, l)| [c.x, l.z]).collect();
                    pts.sort_by(|a, b| a[0].total_cmp(&b[0]));
                    if !pts.is_empty() {
                        lines.push(pts);
                    }
                }
                write_file(&svg, &polylines_svg(&lines))?;
            }
            Ok(())
        }

        Command::Audit { beta, j0, field, n_list } => {
            let sizes = parse_sizes(&n_list)?;
            let rows = saddle_point_audit(beta, j0, field, &sizes)?;
            let mut csv = Csv::new(&["n", "exact", "saddle", "gap"]);
            for r in rows {
                csv.row(&[r.n.to_string(), num(r.exact), num(r.saddle), num(r.gap)]);
            }
            emit(out, &csv.into_string())
        }

        Command::Toy { x_grid, out: path } => {
            let xs = parse_grid(&x_grid)?;
            let mut csv = Csv::new(&["x", "y_plus", "y_minus", "z_plus", "z_minus"]);
            for p in toy_cusp_samples(&xs)? {
                csv.row(&[num(p.x), num(p.y_plus), num(p.y_minus), num(p.z_plus), num(p.z_minus)]);
            }
            write_file(&path, &csv.into_string())
        }

        Command::Check { level } => {
            let level = match level {
                LevelArg::Quick => CheckLevel::Quick,
                LevelArg::Full => CheckLevel::Full,
            };
            let report = run_checks(level);
            emit(out, &report.to_string())?;
            let failures: Vec<_> = report.failures().collect();
            if failures.is_empty() {
                return Ok(());
            }
            for f in &failures {
                let _ = writeln!(err, "failed: {}", f.name);
            }
            Err(CliError::Checks(failures.len()))
        }
    }
}
