//! Dense evaluations of the preconditioner formulas, written directly from
//! their matrix definitions with D = diag(A) and L = strict lower triangle.

use crate::dense::lu_solve;
use pistonfilm_core::krylov::PreconditionerKind;

/// Applies M⁻¹ to `r` using dense arithmetic on the full matrix `a`.
pub fn dense_preconditioner_apply(
    kind: PreconditionerKind,
    omega: f64,
    a: &[Vec<f64>],
    r: &[f64],
) -> Vec<f64> {
    let n = r.len();
    let d: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    let scale = omega * (2.0 - omega);
    match kind {
        PreconditionerKind::Jacobian => (0..n).map(|i| r[i] / d[i]).collect(),
        PreconditionerKind::AssorI => (0..n)
            .map(|i| {
                let correction: f64 = (0..i).map(|k| a[i][k] * a[i][k] / d[k]).sum();
                scale * r[i] / (d[i] + omega * omega * correction)
            })
            .collect(),
        PreconditionerKind::AssorII => {
            // z = ω(2−ω)·(I − ωD⁻¹Lᵀ)(I − ωD⁻¹L)·D⁻¹·r
            let v0: Vec<f64> = (0..n).map(|i| r[i] / d[i]).collect();
            let v1: Vec<f64> = (0..n)
                .map(|i| {
                    let lv: f64 = (0..i).map(|k| a[i][k] * v0[k]).sum();
                    v0[i] - omega * lv / d[i]
                })
                .collect();
            (0..n)
                .map(|i| {
                    let ltv: f64 = (i + 1..n).map(|k| a[k][i] * v1[k]).sum();
                    scale * (v1[i] - omega * ltv / d[i])
                })
                .collect()
        }
        PreconditionerKind::Ssor => {
            // M = (D + ωL)·D⁻¹·(D + ωL)ᵀ / (ω(2−ω)), inverted directly.
            let mut m = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in 0..n {
                    // (D + ωL)[i][k] nonzero for k ≤ i; (D + ωL)ᵀ[k][j] for k ≥ j.
                    let mut acc = 0.0;
                    for k in 0..n {
                        let left = if k == i {
                            d[i]
                        } else if k < i {
                            omega * a[i][k]
                        } else {
                            0.0
                        };
                        if left == 0.0 {
                            continue;
                        }
                        let right = if k == j {
                            d[j]
                        } else if k < j {
                            omega * a[j][k]
                        } else {
                            0.0
                        };
                        acc += left * right / d[k];
                    }
                    m[i][j] = acc / scale;
                }
            }
            lu_solve(&m, r)
        }
    }
}
