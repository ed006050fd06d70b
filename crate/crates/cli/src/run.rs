//! The four run modes: single solve, solver benchmark sweep, joint-path
//! comparison, and the transient simulation.

use crate::config::RunConfig;
use crate::output::{
    eccentricity_plot_script, field_plot_script, forces_plot_script, residual_plot_script,
    snapshot_path, write_field, write_forces, write_snapshot, write_trace, Csv, CsvField,
    OutputMeta, WAVEFORM_NOTE,
};
use anyhow::Context;
use pistonfilm_core::assembly::{assemble, expand_pressure, BoundaryCondition};
use pistonfilm_core::geometry::{
    film_thickness, film_thickness_rate, shaft_kinematics, FilmMesh, KinematicState,
    TexturePattern,
};
use pistonfilm_core::joint::{
    build_joint, sequential_solve, solve_joint, ConvergenceStrategy, StrategyKind,
};
use pistonfilm_core::krylov::{omega_grid, pcg_solve, Preconditioner, PreconditionerKind};
use pistonfilm_core::CoreError;
use std::path::Path;

/// Linear interpolation of the boundary pressures along the axis, used as
/// the stand-alone solve's initial guess; it is exact for a uniform film
/// with equal boundary pressures.
fn axial_profile_guess(mesh: &FilmMesh, bc: &BoundaryCondition) -> Vec<f64> {
    let nt = mesh.n_theta;
    let rings = mesh.n_y - 2;
    let length = mesh.y(mesh.n_y - 1);
    let mut guess = vec![0.0; nt * rings];
    for g in 0..rings {
        let t = mesh.y(g + 1) / length;
        let p = bc.inlet + (bc.outlet - bc.inlet) * t;
        guess[g * nt..(g + 1) * nt].fill(p);
    }
    guess
}

/// Assembles the pressure system of the configured initial state at shaft
/// angle zero.
struct AssembledCase {
    mesh: FilmMesh,
    state: KinematicState,
    surface_speed: f64,
    bc: BoundaryCondition,
}

fn assembled_case(
    cfg: &RunConfig,
    n_theta: usize,
    n_y: usize,
    inlet: f64,
) -> anyhow::Result<AssembledCase> {
    let kin = shaft_kinematics(&cfg.pump, 0.0);
    let mesh = FilmMesh::for_pump(&cfg.pump, n_theta, n_y, kin.coupling_length)?;
    let state = cfg.dynamics.initial_state();
    Ok(AssembledCase {
        mesh,
        state,
        surface_speed: kin.surface_speed,
        bc: BoundaryCondition { inlet, outlet: cfg.pump.outlet_pressure },
    })
}

pub fn solve_mode(cfg: &RunConfig, out: &Path, meta: &OutputMeta) -> anyhow::Result<()> {
    let waveform = cfg.waveform.to_waveform()?;
    let inlet = waveform.pressure_at(0.0);
    let case = assembled_case(cfg, cfg.mesh.n_theta, cfg.mesh.n_y, inlet)?;
    let pattern = TexturePattern::build(cfg.texture.kind, &case.mesh)?;
    let h = film_thickness(&case.mesh, &case.state, &pattern)?;
    let dhdt = film_thickness_rate(&case.mesh, &case.state)?;
    let sys = assemble(
        &case.mesh,
        &h,
        &dhdt,
        case.surface_speed,
        cfg.pump.viscosity,
        &case.bc,
    )?;
    let omega = cfg.solver.omega_for(cfg.texture.kind);
    let precond = Preconditioner::build(cfg.solver.preconditioner, omega, &sys)?;
    let guess = axial_profile_guess(&case.mesh, &case.bc);
    let (p, report) = pcg_solve(&sys, &precond, &guess, cfg.solver.tol, cfg.solver.max_iter)?;
    if !report.converged {
        anyhow::bail!(
            "solve did not converge in {} iterations (relative residual {})",
            report.iterations,
            report.final_relative_residual
        );
    }

    let meta = meta.clone().note(WAVEFORM_NOTE);
    let mut summary = Csv::new(
        &meta,
        &[
            "preconditioner", "omega", "n_theta", "n_y", "texture", "unknowns", "iterations",
            "converged", "final_relative_residual", "spmv", "dot", "inlet_pressure",
            "outlet_pressure",
        ],
    );
    summary.row(&[
        cfg.solver.preconditioner.name().into(),
        omega.into(),
        cfg.mesh.n_theta.into(),
        cfg.mesh.n_y.into(),
        texture_name(cfg.texture.kind).into(),
        sys.n().into(),
        report.iterations.into(),
        report.converged.into(),
        report.final_relative_residual.into(),
        report.kernel_counters.spmv.into(),
        report.kernel_counters.dot.into(),
        case.bc.inlet.into(),
        case.bc.outlet.into(),
    ]);
    summary.write(&out.join("solve_summary.csv"))?;

    if cfg.outputs.pressure {
        let field = expand_pressure(&case.mesh, &p, &case.bc)?;
        write_field(&meta, &case.mesh, &field, "pressure", &out.join("pressure.csv"))?;
        if cfg.outputs.plots {
            std::fs::write(
                out.join("pressure_map.gp"),
                field_plot_script("pressure.csv", 5, "film pressure (Pa)"),
            )?;
        }
    }
    if cfg.outputs.residuals {
        let mut csv = Csv::new(&meta, &["iteration", "relative_residual"]);
        for (k, r) in report.residual_history.iter().enumerate() {
            csv.row(&[k.into(), (*r).into()]);
        }
        csv.write(&out.join("residuals.csv"))?;
        if cfg.outputs.plots {
            std::fs::write(out.join("residuals.gp"), residual_plot_script("residuals.csv"))?;
        }
    }
    Ok(())
}

fn texture_name(kind: pistonfilm_core::geometry::TextureKind) -> &'static str {
    use pistonfilm_core::geometry::TextureKind::*;
    match kind {
        None => "none",
        Short => "short",
        Long => "long",
    }
}

/// One bench cell, or the error that stopped it; failures become CSV rows so
/// a sweep survives individual misconfigurations.
fn bench_cell(
    cfg: &RunConfig,
    nt: usize,
    ny: usize,
    texture: pistonfilm_core::geometry::TextureKind,
    kind: PreconditionerKind,
    omega: f64,
) -> anyhow::Result<(usize, bool, f64, usize, usize)> {
    let case = assembled_case(cfg, nt, ny, cfg.bench.inlet_pressure)?;
    let pattern = TexturePattern::build(texture, &case.mesh)?;
    let h = film_thickness(&case.mesh, &case.state, &pattern)?;
    let dhdt = film_thickness_rate(&case.mesh, &case.state)?;
    let sys = assemble(
        &case.mesh,
        &h,
        &dhdt,
        case.surface_speed,
        cfg.pump.viscosity,
        &case.bc,
    )?;
    let precond = Preconditioner::build(kind, omega, &sys)?;
    let zero = vec![0.0; sys.n()];
    let (_, report) = pcg_solve(&sys, &precond, &zero, cfg.bench.tol, cfg.bench.max_iter)?;
    Ok((
        report.iterations,
        report.converged,
        report.final_relative_residual,
        report.kernel_counters.spmv,
        report.kernel_counters.dot,
    ))
}

pub fn bench_mode(cfg: &RunConfig, out: &Path, meta: &OutputMeta) -> anyhow::Result<()> {
    let mut csv = Csv::new(
        meta,
        &[
            "case", "n_theta", "n_y", "texture", "preconditioner", "omega", "iterations",
            "converged", "final_relative_residual", "spmv", "dot", "error",
        ],
    );
    let mut case_id = 0usize;
    for &(nt, ny) in &cfg.bench.meshes {
        for &texture in &cfg.bench.textures {
            for &kind in &cfg.bench.preconditioners {
                let omegas: Vec<f64> = if kind == PreconditionerKind::Jacobian {
                    vec![1.0]
                } else if cfg.bench.omegas.is_empty() {
                    omega_grid()
                } else {
                    cfg.bench.omegas.clone()
                };
                for omega in omegas {
                    case_id += 1;
                    let mut fields: Vec<CsvField> = vec![
                        case_id.into(),
                        nt.into(),
                        ny.into(),
                        texture_name(texture).into(),
                        kind.name().into(),
                        omega.into(),
                    ];
                    match bench_cell(cfg, nt, ny, texture, kind, omega) {
                        Ok((iters, converged, resid, spmv, dot)) => {
                            fields.extend([
                                iters.into(),
                                converged.into(),
                                resid.into(),
                                spmv.into(),
                                dot.into(),
                                "".into(),
                            ]);
                        }
                        Err(err) => {
                            fields.extend([
                                0usize.into(),
                                false.into(),
                                f64::NAN.into(),
                                0usize.into(),
                                0usize.into(),
                                err.to_string().into(),
                            ]);
                        }
                    }
                    csv.row(&fields);
                }
            }
        }
    }
    csv.write(&out.join("bench.csv"))?;
    Ok(())
}

pub fn joint_bench_mode(cfg: &RunConfig, out: &Path, meta: &OutputMeta) -> anyhow::Result<()> {
    let mut csv = Csv::new(
        meta,
        &[
            "case", "texture", "path", "preconditioner", "omega", "iterations", "converged",
            "final_relative_residual", "reconfigurations", "block_iterations", "error",
        ],
    );
    let mut case_id = 0usize;
    for &texture in &cfg.joint_bench.textures {
        case_id += 1;
        let omega = cfg.solver.omega_for(texture);
        let kind = cfg.solver.preconditioner;
        let built = (|| -> anyhow::Result<_> {
            let case = assembled_case(
                cfg,
                cfg.mesh.n_theta,
                cfg.mesh.n_y,
                cfg.joint_bench.inlet_pressure,
            )?;
            let pattern = TexturePattern::build(texture, &case.mesh)?;
            Ok(build_joint(
                &case.mesh,
                &case.state,
                &pattern,
                &cfg.pump,
                case.surface_speed,
                &case.bc,
            )?)
        })();
        let joint = match built {
            Ok(j) => j,
            Err(err) => {
                for path in ["synchronized", "asynchronous", "sequential"] {
                    csv.row(&[
                        case_id.into(),
                        texture_name(texture).into(),
                        path.into(),
                        kind.name().into(),
                        omega.into(),
                        0usize.into(),
                        false.into(),
                        f64::NAN.into(),
                        0usize.into(),
                        "".into(),
                        err.to_string().into(),
                    ]);
                }
                continue;
            }
        };
        let tol = cfg.joint_bench.tol;
        let max_iter = cfg.joint_bench.max_iter;
        let runs: [(&str, Result<_, CoreError>); 3] = [
            (
                "synchronized",
                solve_joint(
                    &joint,
                    kind,
                    omega,
                    ConvergenceStrategy { kind: StrategyKind::Synchronized, tol },
                    max_iter,
                    None,
                ),
            ),
            (
                "asynchronous",
                solve_joint(
                    &joint,
                    kind,
                    omega,
                    ConvergenceStrategy { kind: StrategyKind::Asynchronous, tol },
                    max_iter,
                    None,
                ),
            ),
            ("sequential", sequential_solve(&joint, kind, omega, tol, max_iter, None)),
        ];
        for (path, run) in runs {
            match run {
                Ok(solution) => {
                    let blocks = solution
                        .block_reports
                        .iter()
                        .map(|r| r.iterations.to_string())
                        .collect::<Vec<_>>()
                        .join(";");
                    csv.row(&[
                        case_id.into(),
                        texture_name(texture).into(),
                        path.into(),
                        kind.name().into(),
                        omega.into(),
                        solution.global.iterations.into(),
                        solution.global.converged.into(),
                        solution.global.final_relative_residual.into(),
                        solution.global.reconfiguration_events.into(),
                        blocks.into(),
                        "".into(),
                    ]);
                }
                Err(err) => {
                    csv.row(&[
                        case_id.into(),
                        texture_name(texture).into(),
                        path.into(),
                        kind.name().into(),
                        omega.into(),
                        0usize.into(),
                        false.into(),
                        f64::NAN.into(),
                        0usize.into(),
                        "".into(),
                        err.to_string().into(),
                    ]);
                }
            }
        }
    }
    csv.write(&out.join("joint_bench.csv"))?;
    Ok(())
}

pub fn simulate_mode(cfg: &RunConfig, out: &Path, meta: &OutputMeta) -> anyhow::Result<()> {
    let waveform = cfg.waveform.to_waveform()?;
    let options = cfg.dynamics.march_options(&cfg.solver, cfg.texture.kind);
    let initial = cfg.dynamics.initial_state();
    let trace = pistonfilm_core::dynamics::time_march(
        &cfg.pump,
        cfg.mesh.n_theta,
        cfg.mesh.n_y,
        cfg.texture.kind,
        &waveform,
        &initial,
        &options,
    )
    .context("time march failed")?;

    let meta = meta.clone().note(WAVEFORM_NOTE);
    if cfg.outputs.trace {
        write_trace(&meta, &trace, &out.join("trace.csv"))?;
        if cfg.outputs.plots {
            std::fs::write(out.join("eccentricity.gp"), eccentricity_plot_script("trace.csv"))?;
        }
    }
    if cfg.outputs.forces {
        write_forces(&meta, &trace, &out.join("forces.csv"))?;
        if cfg.outputs.plots {
            std::fs::write(out.join("forces.gp"), forces_plot_script("forces.csv"))?;
        }
    }
    if cfg.outputs.snapshots && !trace.snapshots.is_empty() {
        // Snapshot meshes rescale with the coupling length; rebuild per step.
        for snap in &trace.snapshots {
            let kin = shaft_kinematics(&cfg.pump, snap.time);
            let mesh = FilmMesh::for_pump(
                &cfg.pump,
                cfg.mesh.n_theta,
                cfg.mesh.n_y,
                kin.coupling_length,
            )?;
            write_snapshot(&meta, &mesh, snap, &snapshot_path(out, snap.step))?;
        }
        if cfg.outputs.plots {
            let last = trace.snapshots.last().expect("nonempty");
            let name = snapshot_path(Path::new(""), last.step);
            std::fs::write(
                out.join("pressure_map.gp"),
                field_plot_script(
                    name.file_name().unwrap().to_str().unwrap(),
                    5,
                    "film pressure (Pa)",
                ),
            )?;
        }
    }
    Ok(())
}
