//! Piston motion: force Jacobians from the nine-block solve, the Picard
//! equilibrium iteration per time step, and multi-period time marching.
//!
//! Each backward-Euler step seeks (e, ė) at the new time such that the total
//! generalized force vanishes, with the kinematic link e = e_prev + Δt·ė
//! imposed through the update. The force is evaluated through a full pressure
//! solve, so its Jacobians come from the eight perturbed companion solves.

use crate::assembly::{expand_pressure, BoundaryCondition};
use crate::error::{CoreError, Result};
use crate::geometry::{
    film_thickness, shaft_kinematics, FilmMesh, KinematicState, PumpConfig, ScalarField,
    TextureKind, TexturePattern,
};
use crate::joint::{build_joint, perturbed_state, solve_path, SolvePath, BLOCK_COUNT};
use crate::krylov::PreconditionerKind;
use crate::loads::{
    external_force, floor_pressure, general_oil_force, inertial_force, oil_wrench, ForceKind,
    GeneralForce, WrenchBreakdown,
};
use crate::waveform::InletWaveform;
use serde::{Deserialize, Serialize};

/// Forward-difference force Jacobians with respect to the eccentricities and
/// their rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobianPair {
    /// (∂F_i/∂e_j), row i, column j.
    pub df_de: [[f64; 4]; 4],
    /// (∂F_i/∂ė_j).
    pub df_dedot: [[f64; 4]; 4],
    pub delta_e: f64,
    pub delta_e_rate: f64,
}

/// Builds both Jacobians by forward differences: column j of `df_de` is
/// (F[block j+1] − F[block 0])/Δe, column j of `df_dedot` is
/// (F[block j+5] − F[block 0])/Δė.
pub fn build_jacobians(
    forces: &[GeneralForce; BLOCK_COUNT],
    delta_e: f64,
    delta_e_rate: f64,
) -> JacobianPair {
    let mut df_de = [[0.0; 4]; 4];
    let mut df_dedot = [[0.0; 4]; 4];
    for j in 0..4 {
        for i in 0..4 {
            df_de[i][j] = (forces[1 + j].f[i] - forces[0].f[i]) / delta_e;
            df_dedot[i][j] = (forces[5 + j].f[i] - forces[0].f[i]) / delta_e_rate;
        }
    }
    JacobianPair {
        df_de,
        df_dedot,
        delta_e,
        delta_e_rate,
    }
}

/// Synthetic affine force law F(e, ė) = K_e·e + K_v·ė + b.
///
/// Stands in for the full pressure-integrated force when exercising the
/// Jacobian builder and the Picard update: its Jacobians are known exactly
/// and its equilibrium has a closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearForceModel {
    pub stiffness: [[f64; 4]; 4],
    pub damping: [[f64; 4]; 4],
    pub offset: [f64; 4],
}

impl LinearForceModel {
    pub fn force(&self, state: &KinematicState) -> GeneralForce {
        let mut f = self.offset;
        for i in 0..4 {
            for j in 0..4 {
                f[i] += self.stiffness[i][j] * state.e[j] + self.damping[i][j] * state.e_rate[j];
            }
        }
        GeneralForce { f, kind: ForceKind::Total }
    }

    /// Forces at the nine perturbation conditions, in block order.
    pub fn block_forces(
        &self,
        state: &KinematicState,
        delta_e: f64,
        delta_e_rate: f64,
    ) -> [GeneralForce; BLOCK_COUNT] {
        core::array::from_fn(|block| {
            self.force(&perturbed_state(state, block, delta_e, delta_e_rate))
        })
    }
}

/// How the equilibrium update treats the eccentricity dependence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PicardScheme {
    /// Solve [Δt·(∂F/∂e) + (∂F/∂ė)]·δ = −F for the rate increment δ, then
    /// advance e by Δt·δ: the full linearization of the backward-difference
    /// step.
    #[default]
    General,
    /// Drop the ∂F/∂e term: ė ← ė − (∂F/∂ė)⁻¹F and e ← e − Δt·(∂F/∂ė)⁻¹F.
    Simplified,
}

const PIVOT_FLOOR: f64 = 1.0e-30;

/// Partial-pivot Gaussian elimination on a 4×4 system.
fn solve4(mut a: [[f64; 4]; 4], mut b: [f64; 4]) -> Result<[f64; 4]> {
    let norm = a
        .iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0_f64, f64::max);
    for col in 0..4 {
        let pivot_row = (col..4)
            .max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs()))
            .unwrap();
        let pivot = a[pivot_row][col];
        if !pivot.is_finite() || pivot.abs() <= PIVOT_FLOOR * norm {
            return Err(CoreError::SingularJacobian {
                pivot,
                floor: PIVOT_FLOOR * norm,
            });
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        for row in col + 1..4 {
            let factor = a[row][col] / pivot;
            for k in col..4 {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = [0.0; 4];
    for row in (0..4).rev() {
        let mut acc = b[row];
        for k in row + 1..4 {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Ok(x)
}

/// One Picard update of (e, ė) toward force equilibrium at a fixed time.
pub fn picard_step(
    state: &KinematicState,
    total: &GeneralForce,
    jac: &JacobianPair,
    dt: f64,
    scheme: PicardScheme,
) -> Result<([f64; 4], [f64; 4])> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(CoreError::InvalidParameter {
            name: "dt",
            value: dt,
            constraint: "must be positive and finite",
        });
    }
    let matrix = match scheme {
        PicardScheme::General => {
            let mut m = [[0.0; 4]; 4];
            for i in 0..4 {
                for j in 0..4 {
                    m[i][j] = dt * jac.df_de[i][j] + jac.df_dedot[i][j];
                }
            }
            m
        }
        PicardScheme::Simplified => jac.df_dedot,
    };
    let delta = solve4(matrix, [-total.f[0], -total.f[1], -total.f[2], -total.f[3]])?;
    let mut e = state.e;
    let mut e_rate = state.e_rate;
    for k in 0..4 {
        e_rate[k] += delta[k];
        e[k] += dt * delta[k];
    }
    Ok((e, e_rate))
}

/// What to do when a step exhausts `max_picard` without meeting the force
/// tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum StallPolicy {
    /// Keep the iterate with the lowest force residual, flag the step, and
    /// continue marching.
    #[default]
    Accept,
    /// Abort the march with [`CoreError::NonConvergentStep`].
    Halt,
}

/// Knobs for [`time_march`].
#[derive(Debug, Clone, PartialEq)]
pub struct MarchOptions {
    /// Shaft revolutions to march; zero yields an empty trace.
    pub periods: usize,
    pub steps_per_period: usize,
    pub scheme: PicardScheme,
    /// Force tolerance relative to max(‖external force‖, 1 N).
    pub eps_dyn: f64,
    pub max_picard: usize,
    pub preconditioner: PreconditionerKind,
    pub omega: f64,
    pub pcg_tol: f64,
    pub pcg_max_iter: usize,
    pub path: SolvePath,
    /// Seed each pressure solve from the previous one instead of zero.
    pub warm_start: bool,
    pub on_stall: StallPolicy,
    /// Store a pressure/thickness snapshot whenever the shaft angle crosses a
    /// multiple of this interval (rad).
    pub snapshot_interval: Option<f64>,
    /// Optional pressure floor (Pa) applied inside force integration only.
    pub pressure_floor: Option<f64>,
}

impl Default for MarchOptions {
    fn default() -> Self {
        Self {
            periods: 1,
            steps_per_period: 90,
            scheme: PicardScheme::General,
            eps_dyn: 1.0e-3,
            max_picard: 20,
            preconditioner: PreconditionerKind::AssorII,
            omega: 1.8,
            pcg_tol: 1.0e-6,
            pcg_max_iter: 100_000,
            path: SolvePath::Synchronized,
            warm_start: false,
            on_stall: StallPolicy::Accept,
            snapshot_interval: Some(30.0_f64.to_radians()),
            pressure_floor: None,
        }
    }
}

impl MarchOptions {
    pub fn validate(&self) -> Result<()> {
        let checks = [
            (
                "steps_per_period",
                self.steps_per_period as f64,
                self.steps_per_period >= 1,
                "must be at least 1",
            ),
            ("eps_dyn", self.eps_dyn, self.eps_dyn > 0.0, "must be positive"),
            (
                "max_picard",
                self.max_picard as f64,
                self.max_picard >= 1,
                "must be at least 1",
            ),
        ];
        for (name, value, ok, constraint) in checks {
            if !ok {
                return Err(CoreError::InvalidParameter { name, value, constraint });
            }
        }
        Ok(())
    }
}

/// One accepted time step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    /// 1-based step index.
    pub step: usize,
    pub time: f64,
    pub shaft_angle: f64,
    pub inlet_pressure: f64,
    pub e: [f64; 4],
    pub e_rate: [f64; 4],
    /// ‖F_total‖₂ at the accepted iterate (N).
    pub force_residual: f64,
    /// Force evaluations spent in the step.
    pub picard_iterations: usize,
    pub converged: bool,
    /// Linear-solver iterations summed over the step's joint solves.
    pub pcg_iterations: usize,
    /// Minimum film thickness at the accepted state (m).
    pub min_thickness: f64,
    /// Oil wrench of the base condition at the accepted state.
    pub wrench: WrenchBreakdown,
}

/// Stored field pair at a snapshot angle.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub time: f64,
    pub shaft_angle: f64,
    pub pressure: ScalarField,
    pub thickness: ScalarField,
}

/// Full time-march output.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTrace {
    pub dt: f64,
    pub steps: Vec<StepRecord>,
    pub snapshots: Vec<Snapshot>,
}

struct PicardIterate {
    state: KinematicState,
    force_norm: f64,
    wrench: WrenchBreakdown,
    min_thickness: f64,
}

/// Marches `periods`·`steps_per_period` backward-Euler steps from `initial`.
///
/// Per step: the state is seeded by the explicit predictor
/// e ← e + Δt·ė (rates carried over), then Picard iterations alternate a
/// nine-block pressure solve, force assembly, finite-difference Jacobians and
/// a [`picard_step`] update until ‖F‖ meets the tolerance. The mesh axial
/// extent follows L_F(φ), so spacings rescale every step while node counts
/// stay fixed.
pub fn time_march(
    config: &PumpConfig,
    n_theta: usize,
    n_y: usize,
    texture: TextureKind,
    waveform: &InletWaveform,
    initial: &KinematicState,
    options: &MarchOptions,
) -> Result<SimulationTrace> {
    config.validate()?;
    options.validate()?;
    waveform.validate()?;
    let dt = config.period() / options.steps_per_period as f64;
    let total_steps = options.periods * options.steps_per_period;
    let mut trace = SimulationTrace {
        dt,
        steps: Vec::with_capacity(total_steps),
        snapshots: Vec::new(),
    };
    let mut state = *initial;
    let mut prev_angle = config.angular_speed() * initial.time;
    let mut warm: Option<Vec<Vec<f64>>> = None;

    for step in 1..=total_steps {
        let t = initial.time + step as f64 * dt;
        let kin = shaft_kinematics(config, t);
        let mesh = FilmMesh::for_pump(config, n_theta, n_y, kin.coupling_length)?;
        let pattern = TexturePattern::build(texture, &mesh)?;
        let inlet = waveform.pressure_at(kin.shaft_angle);
        let bc = BoundaryCondition {
            inlet,
            outlet: config.outlet_pressure,
        };
        let ext = external_force(config, t, inlet);
        let inert = inertial_force(config, t);
        let force_tol = options.eps_dyn * ext.norm().max(1.0);

        // Predictor: first-order extrapolation keeps the backward-difference
        // link consistent; without it the eccentricities would only ever see
        // rate increments.
        for k in 0..4 {
            state.e[k] += dt * state.e_rate[k];
        }
        state.shaft_angle = kin.shaft_angle;
        state.time = t;

        let mut best: Option<PicardIterate> = None;
        let mut converged = false;
        let mut picard_count = 0;
        let mut pcg_total = 0;

        while picard_count < options.max_picard {
            picard_count += 1;
            let joint = build_joint(&mesh, &state, &pattern, config, kin.surface_speed, &bc)?;
            let solution = solve_path(
                &joint,
                options.preconditioner,
                options.omega,
                options.path,
                options.pcg_tol,
                options.pcg_max_iter,
                warm.as_deref(),
            )?;
            pcg_total += solution.global.iterations;
            if options.warm_start {
                warm = Some(solution.pressures.clone());
            }

            let mut forces = [GeneralForce::zero(ForceKind::Oil); BLOCK_COUNT];
            let mut base_wrench = WrenchBreakdown::default();
            let mut base_min_h = f64::INFINITY;
            for block in 0..BLOCK_COUNT {
                let s = perturbed_state(&state, block, config.fd_step_e, config.fd_step_e_rate);
                let h = film_thickness(&mesh, &s, &pattern).map_err(|source| {
                    CoreError::JointBlock {
                        block,
                        source: Box::new(source),
                    }
                })?;
                let p = expand_pressure(&mesh, &solution.pressures[block], &bc)?;
                let p = match options.pressure_floor {
                    Some(floor) => floor_pressure(&p, floor),
                    None => p,
                };
                let wrench = oil_wrench(&mesh, &p, &h, kin.surface_speed, config.viscosity)?;
                forces[block] = general_oil_force(&wrench, mesh.coupling_length);
                forces[block] = GeneralForce::total(&ext, &inert, &forces[block]);
                if block == 0 {
                    base_wrench = wrench;
                    base_min_h = h.values.iter().fold(f64::INFINITY, |m, &v| m.min(v));
                }
            }

            let force_norm = forces[0].norm();
            let candidate = PicardIterate {
                state,
                force_norm,
                wrench: base_wrench,
                min_thickness: base_min_h,
            };
            if best.as_ref().map_or(true, |b| force_norm < b.force_norm) {
                best = Some(candidate);
            }
            if force_norm <= force_tol {
                converged = true;
                break;
            }
            if picard_count == options.max_picard {
                break;
            }
            let jac = build_jacobians(&forces, config.fd_step_e, config.fd_step_e_rate);
            let (e, e_rate) = picard_step(&state, &forces[0], &jac, dt, options.scheme)?;
            state.e = e;
            state.e_rate = e_rate;
        }

        let accepted = best.expect("at least one Picard evaluation per step");
        if !converged && options.on_stall == StallPolicy::Halt {
            return Err(CoreError::NonConvergentStep {
                step,
                iterations: picard_count,
                residual: accepted.force_norm,
            });
        }
        state = accepted.state;

        trace.steps.push(StepRecord {
            step,
            time: t,
            shaft_angle: kin.shaft_angle,
            inlet_pressure: inlet,
            e: state.e,
            e_rate: state.e_rate,
            force_residual: accepted.force_norm,
            picard_iterations: picard_count,
            converged,
            pcg_iterations: pcg_total,
            min_thickness: accepted.min_thickness,
            wrench: accepted.wrench,
        });

        if let Some(interval) = options.snapshot_interval {
            if (kin.shaft_angle / interval).floor() > (prev_angle / interval).floor() {
                let h = film_thickness(&mesh, &state, &pattern)?;
                let joint = build_joint(&mesh, &state, &pattern, config, kin.surface_speed, &bc)?;
                let solution = solve_path(
                    &joint,
                    options.preconditioner,
                    options.omega,
                    options.path,
                    options.pcg_tol,
                    options.pcg_max_iter,
                    warm.as_deref(),
                )?;
                let pressure = expand_pressure(&mesh, &solution.pressures[0], &bc)?;
                trace.snapshots.push(Snapshot {
                    step,
                    time: t,
                    shaft_angle: kin.shaft_angle,
                    pressure,
                    thickness: h,
                });
            }
        }
        prev_angle = kin.shaft_angle;
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_matrices() -> ([[f64; 4]; 4], [[f64; 4]; 4]) {
        let ke = [
            [-2.0e6, 3.0e5, 1.0e5, 0.0],
            [4.0e5, -1.5e6, 0.0, 2.0e5],
            [1.0e5, 0.0, -2.5e6, 3.0e5],
            [0.0, 2.0e5, 4.0e5, -1.8e6],
        ];
        let kv = [
            [-3.0e4, 1.0e3, 0.0, 5.0e2],
            [2.0e3, -4.0e4, 1.0e3, 0.0],
            [0.0, 1.5e3, -3.5e4, 2.0e3],
            [1.0e3, 0.0, 2.5e3, -2.8e4],
        ];
        (ke, kv)
    }

    #[test]
    fn equal_forces_give_zero_jacobians() {
        let f = GeneralForce { f: [1.0, -2.0, 3.0, 4.0], kind: ForceKind::Total };
        let jac = build_jacobians(&[f; BLOCK_COUNT], 1e-9, 1e-8);
        assert_eq!(jac.df_de, [[0.0; 4]; 4]);
        assert_eq!(jac.df_dedot, [[0.0; 4]; 4]);
    }

    #[test]
    fn linear_model_recovers_its_matrices() {
        let (ke, kv) = sample_matrices();
        let model = LinearForceModel {
            stiffness: ke,
            damping: kv,
            offset: [10.0, -20.0, 5.0, 15.0],
        };
        let mut state = KinematicState::at_rest();
        state.e = [0.3e-6, -0.2e-6, 0.1e-6, 0.4e-6];
        state.e_rate = [1.0e-7, -2.0e-7, 3.0e-7, 0.0];
        let (de, dv) = (1.0e-9, 1.0e-8);
        let forces = model.block_forces(&state, de, dv);
        let jac = build_jacobians(&forces, de, dv);
        for i in 0..4 {
            for j in 0..4 {
                let scale = ke[i][j].abs().max(1.0);
                assert!((jac.df_de[i][j] - ke[i][j]).abs() <= 1e-6 * scale, "Ke[{i}][{j}]");
                let scale = kv[i][j].abs().max(1.0);
                assert!((jac.df_dedot[i][j] - kv[i][j]).abs() <= 1e-6 * scale, "Kv[{i}][{j}]");
            }
        }
    }

    #[test]
    fn zero_force_leaves_the_state_unchanged() {
        let (ke, kv) = sample_matrices();
        let jac = JacobianPair { df_de: ke, df_dedot: kv, delta_e: 1e-9, delta_e_rate: 1e-8 };
        let mut state = KinematicState::at_rest();
        state.e = [1.0e-6, 2.0e-6, -1.0e-6, 0.5e-6];
        state.e_rate = [1.0e-7, 0.0, -1.0e-7, 2.0e-7];
        let zero = GeneralForce::zero(ForceKind::Total);
        for scheme in [PicardScheme::General, PicardScheme::Simplified] {
            let (e, v) = picard_step(&state, &zero, &jac, 1e-4, scheme).unwrap();
            assert_eq!(e, state.e);
            assert_eq!(v, state.e_rate);
        }
    }

    #[test]
    fn general_scheme_without_e_coupling_is_the_simplified_update() {
        let (_, kv) = sample_matrices();
        let jac = JacobianPair {
            df_de: [[0.0; 4]; 4],
            df_dedot: kv,
            delta_e: 1e-9,
            delta_e_rate: 1e-8,
        };
        let mut state = KinematicState::at_rest();
        state.e_rate = [1.0e-7, -1.0e-7, 2.0e-7, 0.0];
        let f = GeneralForce { f: [50.0, -30.0, 20.0, -10.0], kind: ForceKind::Total };
        let dt = 2.5e-4;
        let (eg, vg) = picard_step(&state, &f, &jac, dt, PicardScheme::General).unwrap();
        let (es, vs) = picard_step(&state, &f, &jac, dt, PicardScheme::Simplified).unwrap();
        for k in 0..4 {
            assert!((eg[k] - es[k]).abs() <= 1e-18);
            assert!((vg[k] - vs[k]).abs() <= 1e-12 * vg[k].abs().max(1e-12));
        }
    }

    #[test]
    fn one_general_step_zeroes_a_linear_force_model() {
        let (ke, kv) = sample_matrices();
        let model = LinearForceModel {
            stiffness: ke,
            damping: kv,
            offset: [120.0, -75.0, 60.0, -40.0],
        };
        let mut state = KinematicState::at_rest();
        state.e = [0.5e-6, -0.5e-6, 0.3e-6, 0.2e-6];
        state.e_rate = [2.0e-7, 1.0e-7, -1.0e-7, 0.0];
        let (de, dv) = (1.0e-9, 1.0e-8);
        let dt = 1.0 / 540.0;
        let forces = model.block_forces(&state, de, dv);
        let jac = build_jacobians(&forces, de, dv);
        let (e, v) = picard_step(&state, &forces[0], &jac, dt, PicardScheme::General).unwrap();
        let mut after = state;
        after.e = e;
        after.e_rate = v;
        let residual = model.force(&after).norm();
        let scale = forces[0].norm();
        assert!(residual <= 1e-10 * scale, "residual {residual} vs scale {scale}");
    }

    #[test]
    fn singular_rate_jacobian_is_reported() {
        let jac = JacobianPair {
            df_de: [[0.0; 4]; 4],
            df_dedot: [[0.0; 4]; 4],
            delta_e: 1e-9,
            delta_e_rate: 1e-8,
        };
        let f = GeneralForce { f: [1.0, 0.0, 0.0, 0.0], kind: ForceKind::Total };
        let err = picard_step(&KinematicState::at_rest(), &f, &jac, 1e-4, PicardScheme::Simplified)
            .unwrap_err();
        assert!(matches!(err, CoreError::SingularJacobian { .. }));
    }

    #[test]
    fn solve4_matches_a_known_inverse() {
        // Diagonally dominant system with a known right-hand side.
        let a = [
            [10.0, 1.0, 0.0, 2.0],
            [1.0, 8.0, 2.0, 0.0],
            [0.0, 2.0, 9.0, 1.0],
            [2.0, 0.0, 1.0, 7.0],
        ];
        let x_true = [1.0, -2.0, 3.0, -4.0];
        let mut b = [0.0; 4];
        for i in 0..4 {
            for j in 0..4 {
                b[i] += a[i][j] * x_true[j];
            }
        }
        let x = solve4(a, b).unwrap();
        for k in 0..4 {
            assert!((x[k] - x_true[k]).abs() <= 1e-12);
        }
    }

    fn quiet_pump() -> PumpConfig {
        // No swashplate tilt and a negligible shaft speed: every load source
        // (thrust reaction, centrifugal, wedge) is switched off.
        let mut cfg = PumpConfig::default();
        cfg.swashplate_angle = 0.0;
        cfg.shaft_speed_rpm = 1.0e-3;
        cfg.coupling_law = crate::geometry::CouplingLengthLaw::Constant;
        cfg
    }

    #[test]
    fn quiescent_pump_stays_at_rest() {
        let cfg = quiet_pump();
        let waveform = InletWaveform::Constant { pressure: cfg.outlet_pressure };
        let options = MarchOptions {
            periods: 1,
            steps_per_period: 4,
            snapshot_interval: None,
            pcg_tol: 1.0e-8,
            ..MarchOptions::default()
        };
        let trace = time_march(
            &cfg,
            12,
            6,
            TextureKind::None,
            &waveform,
            &KinematicState::at_rest(),
            &options,
        )
        .unwrap();
        assert_eq!(trace.steps.len(), 4);
        for record in &trace.steps {
            assert!(record.converged);
            assert_eq!(record.picard_iterations, 1);
            for k in 0..4 {
                assert!(record.e[k].abs() <= 1e-12, "e[{k}] = {}", record.e[k]);
                assert!(record.e_rate[k].abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn trace_time_and_angle_advance_uniformly() {
        let cfg = quiet_pump();
        let waveform = InletWaveform::Constant { pressure: cfg.outlet_pressure };
        let options = MarchOptions {
            periods: 2,
            steps_per_period: 3,
            snapshot_interval: None,
            ..MarchOptions::default()
        };
        let trace = time_march(
            &cfg,
            12,
            6,
            TextureKind::None,
            &waveform,
            &KinematicState::at_rest(),
            &options,
        )
        .unwrap();
        assert_eq!(trace.steps.len(), 6);
        let dt = cfg.period() / 3.0;
        assert!((trace.dt - dt).abs() <= 1e-12 * dt);
        for (k, record) in trace.steps.iter().enumerate() {
            assert_eq!(record.step, k + 1);
            let expect_t = (k + 1) as f64 * dt;
            assert!((record.time - expect_t).abs() <= 1e-9 * expect_t);
            assert!(
                (record.shaft_angle - cfg.angular_speed() * expect_t).abs() <= 1e-12,
            );
            if k > 0 {
                assert!(record.time > trace.steps[k - 1].time);
            }
        }
    }

    #[test]
    fn snapshots_follow_the_angle_cadence() {
        let cfg = PumpConfig::default();
        let waveform = InletWaveform::Constant { pressure: 2.0e6 };
        let options = MarchOptions {
            periods: 1,
            steps_per_period: 8,
            snapshot_interval: Some(std::f64::consts::FRAC_PI_2),
            pcg_tol: 1.0e-6,
            ..MarchOptions::default()
        };
        let trace = time_march(
            &cfg,
            12,
            6,
            TextureKind::None,
            &waveform,
            &KinematicState::at_rest(),
            &options,
        )
        .unwrap();
        // Crossings at π/2, π, 3π/2 and 2π: four snapshots over one period.
        assert_eq!(trace.snapshots.len(), 4);
        for (s, snap) in trace.snapshots.iter().enumerate() {
            assert_eq!(snap.step, 2 * (s + 1));
            assert_eq!(snap.pressure.len(), 12 * 6);
            assert_eq!(snap.thickness.len(), 12 * 6);
        }
    }

    #[test]
    fn stall_policies_differ_only_in_the_outcome() {
        let cfg = PumpConfig::default();
        let waveform = InletWaveform::default();
        let base = MarchOptions {
            periods: 1,
            steps_per_period: 1,
            max_picard: 1,
            snapshot_interval: None,
            ..MarchOptions::default()
        };
        let halt = MarchOptions { on_stall: StallPolicy::Halt, ..base.clone() };
        let err = time_march(
            &cfg,
            12,
            8,
            TextureKind::None,
            &waveform,
            &KinematicState::at_rest(),
            &halt,
        )
        .unwrap_err();
        assert!(matches!(err, CoreError::NonConvergentStep { step: 1, .. }));
        let accept = MarchOptions { on_stall: StallPolicy::Accept, ..base };
        let trace = time_march(
            &cfg,
            12,
            8,
            TextureKind::None,
            &waveform,
            &KinematicState::at_rest(),
            &accept,
        )
        .unwrap();
        assert_eq!(trace.steps.len(), 1);
        assert!(!trace.steps[0].converged);
        assert_eq!(trace.steps[0].picard_iterations, 1);
        assert!(trace.steps[0].force_residual > 0.0);
    }

    #[test]
    fn options_are_validated() {
        let bad = MarchOptions { steps_per_period: 0, ..MarchOptions::default() };
        assert!(bad.validate().is_err());
        let bad = MarchOptions { eps_dyn: 0.0, ..MarchOptions::default() };
        assert!(bad.validate().is_err());
        let bad = MarchOptions { max_picard: 0, ..MarchOptions::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn zero_periods_march_is_empty() {
        let cfg = quiet_pump();
        let waveform = InletWaveform::Constant { pressure: cfg.outlet_pressure };
        let options = MarchOptions { periods: 0, ..MarchOptions::default() };
        let trace = time_march(
            &cfg,
            12,
            6,
            TextureKind::None,
            &waveform,
            &KinematicState::at_rest(),
            &options,
        )
        .unwrap();
        assert!(trace.steps.is_empty());
        assert!(trace.snapshots.is_empty());
    }
}
