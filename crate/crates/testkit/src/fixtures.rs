//! Seeded generators for meshes, states and synthetic band systems.

use pistonfilm_core::assembly::DiaSystem;
use pistonfilm_core::geometry::{KinematicState, PumpConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Deterministic RNG for a test, keyed by an explicit seed.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The default pump geometry used across the suites.
pub fn table_config() -> PumpConfig {
    PumpConfig::default()
}

/// A random piston state safely inside the 6 µm radial clearance, with rates
/// in the regime the dynamics produces.
pub fn random_state(rng: &mut ChaCha8Rng) -> KinematicState {
    let mut state = KinematicState::at_rest();
    for k in 0..4 {
        state.e[k] = rng.gen_range(-1.5e-6..1.5e-6);
        state.e_rate[k] = rng.gen_range(-1.0e-4..1.0e-4);
    }
    state
}

/// A random symmetric positive-definite band system with the layout of an
/// assembled pressure matrix: negative couplings, strictly dominant diagonal.
pub fn random_band_system(rng: &mut ChaCha8Rng, n_theta: usize, n_rings: usize) -> DiaSystem {
    let mut sys = DiaSystem::zeroed(n_theta, n_rings);
    let n = sys.n();
    for v in sys
        .north
        .iter_mut()
        .chain(sys.east.iter_mut())
        .chain(sys.east_wrap.iter_mut())
    {
        *v = -rng.gen_range(0.5..1.5);
    }
    sys.south.copy_from_slice(&sys.north);
    sys.west.copy_from_slice(&sys.east);
    sys.west_wrap.copy_from_slice(&sys.east_wrap);
    for r in 0..n {
        let off: f64 = sys
            .lower_row(r)
            .chain(sys.upper_row(r))
            .map(|(_, v)| v.abs())
            .sum();
        sys.diag[r] = off * (1.0 + rng.gen_range(0.05..0.5));
    }
    for v in sys.source.iter_mut() {
        *v = rng.gen_range(-1.0..1.0);
    }
    sys
}
