//! Dense reference discretization and direct solver.

use pistonfilm_core::assembly::BoundaryCondition;
use pistonfilm_core::geometry::{FilmMesh, ScalarField};

/// Full-matrix counterpart of the banded pressure system.
#[derive(Debug, Clone)]
pub struct DenseSystem {
    pub n: usize,
    /// Row-major n×n coefficient matrix.
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

/// Assembles the five-point finite-volume pressure system as a dense matrix,
/// straight from the discretization: one pass per unknown, explicit neighbor
/// arithmetic, boundary rows folded into the right-hand side.
pub fn dense_assemble(
    mesh: &FilmMesh,
    h: &ScalarField,
    dhdt: &ScalarField,
    surface_speed: f64,
    viscosity: f64,
    bc: &BoundaryCondition,
) -> DenseSystem {
    let nt = mesh.n_theta;
    let rings = mesh.n_y - 2;
    let n = nt * rings;
    let dx = mesh.dx();
    let dy = mesh.dy();
    let mob = |i: usize, j: usize| {
        let v = h.at(i, j);
        v * v * v / (12.0 * viscosity)
    };
    let harm = |a: f64, b: f64| 2.0 * a * b / (a + b);
    let mut a = vec![vec![0.0; n]; n];
    let mut b = vec![0.0; n];
    for g in 0..rings {
        for i in 0..nt {
            let j = g + 1;
            let row = i + g * nt;
            let ie = (i + 1) % nt;
            let iw = (i + nt - 1) % nt;
            let a_e = harm(mob(i, j), mob(ie, j)) * dy / dx;
            let a_w = harm(mob(i, j), mob(iw, j)) * dy / dx;
            let a_n = harm(mob(i, j), mob(i, j + 1)) * dx / dy;
            let a_s = harm(mob(i, j), mob(i, j - 1)) * dx / dy;
            a[row][row] = a_e + a_w + a_n + a_s;
            a[row][g * nt + ie] -= a_e;
            a[row][g * nt + iw] -= a_w;
            let dhdx = (h.at(ie, j) - h.at(iw, j)) / (2.0 * dx);
            let mut s = -(0.5 * surface_speed * dhdx + dhdt.at(i, j)) * dx * dy;
            if g + 1 < rings {
                a[row][row + nt] -= a_n;
            } else {
                s += a_n * bc.outlet;
            }
            if g > 0 {
                a[row][row - nt] -= a_s;
            } else {
                s += a_s * bc.inlet;
            }
            b[row] = s;
        }
    }
    DenseSystem { n, a, b }
}

/// y = A·x for a dense row-major matrix.
pub fn mat_vec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(c, v)| c * v).sum())
        .collect()
}

/// Solves A·x = b by Gaussian elimination with partial pivoting.
///
/// Panics on a numerically singular matrix — reference use only.
pub fn lu_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut x = b.to_vec();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&p, &q| m[p][col].abs().total_cmp(&m[q][col].abs()))
            .unwrap();
        m.swap(col, pivot_row);
        x.swap(col, pivot_row);
        let pivot = m[col][col];
        assert!(pivot.abs() > 0.0, "singular reference matrix at column {col}");
        for row in col + 1..n {
            let factor = m[row][col] / pivot;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                m[row][k] -= factor * m[col][k];
            }
            x[row] -= factor * x[col];
        }
    }
    for row in (0..n).rev() {
        for k in row + 1..n {
            let t = x[k];
            x[row] -= m[row][k] * t;
        }
        x[row] /= m[row][row];
    }
    x
}
