//! Shared fixtures for the solver benchmarks: assembled pressure systems at
//! reproducible states, plus the nine-block joint variant.

use pistonfilm_core::assembly::{assemble, BoundaryCondition, DiaSystem};
use pistonfilm_core::geometry::{
    film_thickness, film_thickness_rate, shaft_kinematics, FilmMesh, KinematicState,
    TextureKind, TexturePattern,
};
use pistonfilm_core::joint::{build_joint, JointSystem};
use pistonfilm_testkit::table_config;

/// The slightly tilted, slowly drifting state used across benchmarks.
pub fn bench_state() -> KinematicState {
    let mut state = KinematicState::at_rest();
    state.e = [-0.2e-6, 0.2e-6, 0.2e-6, -0.2e-6];
    state.e_rate = [-3.78e-7, 3.78e-7, 3.78e-7, -3.78e-7];
    state
}

/// Assembled smooth-piston pressure system with a 10 MPa chamber boundary.
pub fn smooth_system(n_theta: usize, n_y: usize) -> DiaSystem {
    let config = table_config();
    let state = bench_state();
    let kin = shaft_kinematics(&config, 0.0);
    let mesh = FilmMesh::for_pump(&config, n_theta, n_y, kin.coupling_length).unwrap();
    let pattern = TexturePattern::build(TextureKind::None, &mesh).unwrap();
    let h = film_thickness(&mesh, &state, &pattern).unwrap();
    let dhdt = film_thickness_rate(&mesh, &state).unwrap();
    let bc = BoundaryCondition { inlet: 10.0e6, outlet: config.outlet_pressure };
    assemble(&mesh, &h, &dhdt, kin.surface_speed, config.viscosity, &bc).unwrap()
}

/// Nine-block joint system on the same state and boundary conditions.
pub fn joint_fixture(n_theta: usize, n_y: usize) -> JointSystem {
    let config = table_config();
    let state = bench_state();
    let kin = shaft_kinematics(&config, 0.0);
    let mesh = FilmMesh::for_pump(&config, n_theta, n_y, kin.coupling_length).unwrap();
    let pattern = TexturePattern::build(TextureKind::None, &mesh).unwrap();
    let bc = BoundaryCondition { inlet: 10.0e6, outlet: config.outlet_pressure };
    build_joint(&mesh, &state, &pattern, &config, kin.surface_speed, &bc).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_build_at_the_benchmark_sizes() {
        assert_eq!(smooth_system(100, 80).n(), 100 * 78);
        assert_eq!(joint_fixture(24, 16).total_unknowns(), 9 * 24 * 14);
    }
}
