//! Lubrication solver for the piston/cylinder interface of an axial piston
//! pump.
//!
//! The film between a tilted piston and its bore is modeled by the
//! incompressible Reynolds equation on the unwrapped clearance surface,
//! discretized with a finite-volume five-point stencil and solved by a
//! preconditioned conjugate-gradient method on a compact diagonal-band
//! storage. A nine-condition joint solve (base state plus eight perturbed
//! companions) yields finite-difference force Jacobians, which drive an
//! implicit Picard iteration marching the piston's eccentric position and
//! velocity through shaft revolutions.
//!
//! Module map:
//! - [`geometry`]: pump parameters, mesh, film thickness and kinematics
//! - [`waveform`]: inlet pressure as a function of shaft angle
//! - [`assembly`]: finite-volume discretization into banded form
//! - [`krylov`]: conjugate gradients and the preconditioner family
//! - [`joint`]: the nine-block systems and their solution strategies
//! - [`loads`]: wrench integration and the rigid-body force balance
//! - [`dynamics`]: Jacobians, Picard stepping and time marching
//! - [`parallel`]: deterministic parallel reductions used throughout

pub mod assembly;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod joint;
pub mod krylov;
pub mod loads;
pub mod parallel;
pub mod waveform;

pub use assembly::{assemble, expand_pressure, BoundaryCondition, DiaSystem};
pub use dynamics::{
    build_jacobians, picard_step, time_march, JacobianPair, LinearForceModel, MarchOptions,
    PicardScheme, SimulationTrace, Snapshot, StallPolicy, StepRecord,
};
pub use error::{CoreError, Result};
pub use geometry::{
    film_thickness, film_thickness_rate, shaft_kinematics, CouplingLengthLaw, FieldUnit, FilmMesh,
    KinematicState, PumpConfig, ScalarField, ShaftKinematics, TextureKind, TexturePattern,
    MIN_THICKNESS,
};
pub use joint::{
    build_joint, solve_joint, solve_path, ConvergenceStrategy, GlobalReport, JointSolution,
    JointSystem, SolvePath, StrategyKind, BLOCK_COUNT,
};
pub use krylov::{
    omega_sweep, pcg_solve, spmv, KernelCounters, PcgProcess, PcgReport, Preconditioner,
    PreconditionerKind,
};
pub use loads::{
    external_force, floor_pressure, general_oil_force, inertial_force, oil_wrench, ForceKind,
    GeneralForce, Wrench, WrenchBreakdown,
};
pub use waveform::InletWaveform;
