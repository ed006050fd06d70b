//! Slow-but-obvious reference implementations used to cross-check the
//! production solver, plus seeded fixture generators shared by the test
//! suites and benchmarks.
//!
//! Everything here favors directness over speed: dense matrices, textbook
//! factorizations, nested loops. None of it shares code with the band
//! implementations it checks.

pub mod dense;
pub mod fixtures;
pub mod precond;

pub use dense::{dense_assemble, lu_solve, mat_vec, DenseSystem};
pub use fixtures::{random_band_system, random_state, seeded_rng, table_config};
pub use precond::dense_preconditioner_apply;
