//! Error type shared by all solver modules.

use crate::geometry::FieldUnit;

#[derive(Debug, thiserror::Error)]
pub enum CoreError {
    #[error("invalid mesh {n_theta}x{n_y}: both directions need at least 4 nodes")]
    InvalidMesh { n_theta: usize, n_y: usize },

    #[error("invalid parameter {name} = {value}: {constraint}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    #[error("film thickness {value:.3e} m at node ({i}, {j}) is below the {floor:.2e} m floor")]
    NonPositiveThickness {
        i: usize,
        j: usize,
        value: f64,
        floor: f64,
    },

    #[error(
        "mesh {n_theta}x{n_y} too coarse for the texture pattern: \
         {nodes} node(s) per cell in the {direction} direction (need at least 2)"
    )]
    MeshTooCoarse {
        n_theta: usize,
        n_y: usize,
        nodes: usize,
        direction: &'static str,
    },

    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("unit mismatch in {context}: expected {expected:?}, got {got:?}")]
    UnitMismatch {
        context: &'static str,
        expected: FieldUnit,
        got: FieldUnit,
    },

    #[error("system with {n} unknowns exceeds the dense-expansion limit of {limit}")]
    TooLarge { n: usize, limit: usize },

    #[error("non-positive or non-finite diagonal {value:.3e} at row {row}")]
    ZeroDiagonal { row: usize, value: f64 },

    #[error("relaxation factor {omega} outside the stable range (0, 2)")]
    InvalidOmega { omega: f64 },

    #[error("iteration breakdown at step {iteration}: {what}")]
    Breakdown { iteration: usize, what: &'static str },

    #[error("joint block {block}: {source}")]
    JointBlock {
        block: usize,
        #[source]
        source: Box<CoreError>,
    },

    #[error("singular jacobian system: pivot {pivot:.3e} below floor {floor:.3e}")]
    SingularJacobian { pivot: f64, floor: f64 },

    #[error(
        "step {step}: force equilibrium not reached after {iterations} picard iterations \
         (residual {residual:.3e} N)"
    )]
    NonConvergentStep {
        step: usize,
        iterations: usize,
        residual: f64,
    },
}

pub type Result<T> = std::result::Result<T, CoreError>;
