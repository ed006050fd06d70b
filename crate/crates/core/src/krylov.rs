//! Banded matrix-vector product, preconditioners and the conjugate-gradient
//! driver used by every pressure solve.
//!
//! All elementwise kernels are data-parallel over rows and all reductions go
//! through the fixed-shape tree of [`crate::parallel`], so a solve is
//! bit-reproducible for a given system regardless of thread count.

use crate::assembly::DiaSystem;
use crate::error::{CoreError, Result};
use crate::parallel;
use serde::{Deserialize, Serialize};

/// y = A·x over the seven stored bands.
pub fn spmv(sys: &DiaSystem, x: &[f64], y: &mut [f64]) -> Result<()> {
    let n = sys.n();
    if x.len() != n || y.len() != n {
        return Err(CoreError::DimensionMismatch {
            context: "spmv",
            expected: n,
            got: if x.len() != n { x.len() } else { y.len() },
        });
    }
    let nt = sys.n_theta;
    let n_rings = sys.n_rings;
    let (diag, north, south) = (&sys.diag, &sys.north, &sys.south);
    let (east, west) = (&sys.east, &sys.west);
    let (east_wrap, west_wrap) = (&sys.east_wrap, &sys.west_wrap);
    parallel::fill(y, |r| {
        let (g, i) = (r / nt, r % nt);
        let mut acc = diag[r] * x[r];
        if g + 1 < n_rings {
            acc += north[r] * x[r + nt];
        }
        if g > 0 {
            acc += south[r - nt] * x[r - nt];
        }
        if i + 1 < nt {
            acc += east[r - g] * x[r + 1];
        } else {
            acc += east_wrap[g] * x[r - (nt - 1)];
        }
        if i > 0 {
            acc += west[r - g - 1] * x[r - 1];
        } else {
            acc += west_wrap[g] * x[r + nt - 1];
        }
        acc
    });
    Ok(())
}

/// Preconditioner family tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PreconditionerKind {
    Jacobian,
    /// Exact symmetric successive over-relaxation via sequential triangular
    /// solves; inherently serial, kept for solver comparisons.
    Ssor,
    /// Diagonal of the SSOR matrix: z_i = ω(2−ω)·r_i / (D_i + ω²·Σ_k L²_ik/D_k).
    #[serde(rename = "assor1")]
    AssorI,
    /// Two-step truncated-Neumann approximation of the SSOR inverse:
    /// v = (I − ωD⁻¹L)D⁻¹r, then z = (2−ω)ω·(I − ωD⁻¹Lᵀ)v. Symmetric and
    /// fully data-parallel.
    #[default]
    #[serde(rename = "assor2")]
    AssorII,
}

impl PreconditionerKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Jacobian => "jacobian",
            Self::Ssor => "ssor",
            Self::AssorI => "assor1",
            Self::AssorII => "assor2",
        }
    }
}

/// Relaxation factor grid ω = 0.18·i + 0.1, i = 1..10, used by sweeps.
pub fn omega_grid() -> Vec<f64> {
    (1..=10).map(|i| 0.18 * i as f64 + 0.1).collect()
}

/// Relaxation factor defaults: 1.8 for smooth surfaces, 1.6 once textures
/// steepen the coefficient contrasts.
pub fn default_omega(textured: bool) -> f64 {
    if textured {
        1.6
    } else {
        1.8
    }
}

/// Built preconditioner state for one system.
#[derive(Debug, Clone)]
pub struct Preconditioner {
    pub kind: PreconditionerKind,
    pub omega: f64,
    inv_diag: Vec<f64>,
    /// AssorI only: ω(2−ω) / {(D+ωL)D⁻¹(D+ωL)ᵀ}_ii precomputed per row.
    assor1_scale: Vec<f64>,
}

impl Preconditioner {
    /// Validates ω ∈ (0, 2) and the positivity of the diagonal, then
    /// precomputes the per-row data. The returned value must only be applied
    /// to the system it was built from.
    pub fn build(kind: PreconditionerKind, omega: f64, sys: &DiaSystem) -> Result<Self> {
        if !(omega > 0.0 && omega < 2.0) || !omega.is_finite() {
            return Err(CoreError::InvalidOmega { omega });
        }
        for (row, &d) in sys.diag.iter().enumerate() {
            if !(d > 0.0) || !d.is_finite() {
                return Err(CoreError::ZeroDiagonal { row, value: d });
            }
        }
        let mut inv_diag = vec![0.0; sys.n()];
        parallel::fill(&mut inv_diag, |r| 1.0 / sys.diag[r]);
        let assor1_scale = if kind == PreconditionerKind::AssorI {
            let c = omega * (2.0 - omega);
            let inv = &inv_diag;
            let mut scale = vec![0.0; sys.n()];
            parallel::fill(&mut scale, |r| {
                let corr: f64 = sys.lower_row(r).map(|(c_, l)| l * l * inv[c_]).sum();
                c / (sys.diag[r] + omega * omega * corr)
            });
            scale
        } else {
            Vec::new()
        };
        Ok(Self {
            kind,
            omega,
            inv_diag,
            assor1_scale,
        })
    }

    /// z = M⁻¹·r for the built variant.
    pub fn apply(&self, sys: &DiaSystem, r: &[f64], z: &mut [f64]) -> Result<()> {
        let n = sys.n();
        if r.len() != n || z.len() != n {
            return Err(CoreError::DimensionMismatch {
                context: "preconditioner apply",
                expected: n,
                got: if r.len() != n { r.len() } else { z.len() },
            });
        }
        let om = self.omega;
        let inv = &self.inv_diag;
        match self.kind {
            PreconditionerKind::Jacobian => {
                parallel::fill(z, |i| r[i] * inv[i]);
            }
            PreconditionerKind::AssorI => {
                let scale = &self.assor1_scale;
                parallel::fill(z, |i| r[i] * scale[i]);
            }
            PreconditionerKind::AssorII => {
                let c = (2.0 - om) * om;
                let mut w = vec![0.0; n];
                parallel::fill(&mut w, |i| r[i] * inv[i]);
                let mut v = vec![0.0; n];
                parallel::fill(&mut v, |i| {
                    let lw: f64 = sys.lower_row(i).map(|(col, l)| l * w[col]).sum();
                    w[i] - om * lw * inv[i]
                });
                parallel::fill(z, |i| {
                    let ltv: f64 = sys.upper_row(i).map(|(col, l)| l * v[col]).sum();
                    c * (v[i] - om * ltv * inv[i])
                });
            }
            PreconditionerKind::Ssor => {
                // Forward solve (D + ωL)·t = r, in place in z.
                for i in 0..n {
                    let lt: f64 = sys.lower_row(i).map(|(col, l)| l * z[col]).sum();
                    z[i] = (r[i] - om * lt) * inv[i];
                }
                // Scale by D.
                for i in 0..n {
                    z[i] *= sys.diag[i];
                }
                // Backward solve (D + ωL)ᵀ·z = (scaled), then ω(2−ω).
                let c = om * (2.0 - om);
                for i in (0..n).rev() {
                    let ut: f64 = sys.upper_row(i).map(|(col, l)| l * z[col]).sum();
                    z[i] = (z[i] - om * ut) * inv[i];
                }
                for zi in z.iter_mut() {
                    *zi *= c;
                }
            }
        }
        Ok(())
    }
}

/// Kernel invocation tallies for one solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct KernelCounters {
    /// Banded matrix-vector products (one per iteration plus the initial
    /// residual).
    pub spmv: usize,
    /// Logical inner products, counting each component of a fused reduction.
    pub dot: usize,
}

/// Outcome of a conjugate-gradient run.
#[derive(Debug, Clone, PartialEq)]
pub struct PcgReport {
    pub iterations: usize,
    pub converged: bool,
    pub final_relative_residual: f64,
    /// ‖r‖₂/‖S‖₂ per iteration, starting at the initial guess; length is
    /// always `iterations + 1`.
    pub residual_history: Vec<f64>,
    pub kernel_counters: KernelCounters,
}

/// Curvature/energy products at or below this multiple of the vector norms
/// are treated as loss of positive definiteness.
pub(crate) const BREAKDOWN_FLOOR: f64 = 1.0e-30;

/// Resumable conjugate-gradient iteration for one system.
///
/// [`pcg_solve`] drives a process to completion; the asynchronous joint
/// solver steps several processes in lockstep and freezes each one as it
/// converges. Because both run the identical code path on identically sized
/// vectors, a process stepped in isolation reproduces `pcg_solve`
/// bit-for-bit.
#[derive(Debug, Clone)]
pub struct PcgProcess {
    p: Vec<f64>,
    r: Vec<f64>,
    z: Vec<f64>,
    u: Vec<f64>,
    v: Vec<f64>,
    d: f64,
    source_norm: f64,
    denom: f64,
    rel: f64,
    history: Vec<f64>,
    iterations: usize,
    converged: bool,
    counters: KernelCounters,
}

impl PcgProcess {
    /// Computes the initial residual, preconditioned direction and scalars.
    /// `sys` and `precond` must be the same objects on every later `step`.
    pub fn start(
        sys: &DiaSystem,
        precond: &Preconditioner,
        x0: &[f64],
        tol: f64,
    ) -> Result<Self> {
        let n = sys.n();
        if x0.len() != n {
            return Err(CoreError::DimensionMismatch {
                context: "pcg initial guess",
                expected: n,
                got: x0.len(),
            });
        }
        if !(tol > 0.0) || !tol.is_finite() {
            return Err(CoreError::InvalidParameter {
                name: "tol",
                value: tol,
                constraint: "must be positive and finite",
            });
        }
        let mut counters = KernelCounters::default();
        counters.dot += 1;
        let source_norm = parallel::dot(&sys.source, &sys.source).sqrt();
        let denom = if source_norm > 0.0 { source_norm } else { 1.0 };

        let p = x0.to_vec();
        let mut r = vec![0.0; n];
        spmv(sys, &p, &mut r)?;
        counters.spmv += 1;
        parallel::sub_scaled(&mut r, 1.0, &sys.source);

        counters.dot += 1;
        let rel = parallel::dot(&r, &r).sqrt() / denom;
        let history = vec![rel];
        let mut state = Self {
            p,
            r,
            z: Vec::new(),
            u: Vec::new(),
            v: Vec::new(),
            d: 0.0,
            source_norm,
            denom,
            rel,
            history,
            iterations: 0,
            converged: rel <= tol,
            counters,
        };
        if state.converged {
            return Ok(state);
        }
        let mut z = vec![0.0; n];
        precond.apply(sys, &state.r, &mut z)?;
        state.counters.dot += 1;
        state.d = parallel::dot(&state.r, &z);
        if !(state.d > 0.0) || !state.d.is_finite() {
            return Err(CoreError::Breakdown {
                iteration: 0,
                what: "preconditioned residual product r'z not positive",
            });
        }
        state.u = z.clone();
        state.z = z;
        state.v = vec![0.0; n];
        Ok(state)
    }

    /// One conjugate-gradient iteration (one matrix product). Must not be
    /// called after convergence.
    pub fn step(&mut self, sys: &DiaSystem, precond: &Preconditioner, tol: f64) -> Result<()> {
        debug_assert!(!self.converged, "stepping a converged process");
        spmv(sys, &self.u, &mut self.v)?;
        self.counters.spmv += 1;
        let (u, v) = (&self.u, &self.v);
        let [uu, uv, vv] = parallel::sum_terms::<3>(u.len(), |i| {
            let (a, b) = (u[i], v[i]);
            [a * a, a * b, b * b]
        });
        self.counters.dot += 3;
        if !uv.is_finite() || uv <= BREAKDOWN_FLOOR * (uu.sqrt() * vv.sqrt()) {
            return Err(CoreError::Breakdown {
                iteration: self.iterations,
                what: "curvature u'Au not positive",
            });
        }
        let alpha = self.d / uv;
        parallel::sub_scaled(&mut self.p, alpha, &self.u);
        parallel::sub_scaled(&mut self.r, alpha, &self.v);
        self.iterations += 1;
        self.counters.dot += 1;
        self.rel = parallel::dot(&self.r, &self.r).sqrt() / self.denom;
        self.history.push(self.rel);
        if self.rel <= tol {
            self.converged = true;
            return Ok(());
        }
        precond.apply(sys, &self.r, &mut self.z)?;
        self.counters.dot += 1;
        let d_next = parallel::dot(&self.r, &self.z);
        if !(d_next > 0.0) || !d_next.is_finite() {
            return Err(CoreError::Breakdown {
                iteration: self.iterations,
                what: "preconditioned residual product r'z not positive",
            });
        }
        let beta = d_next / self.d;
        self.d = d_next;
        parallel::xpby(&mut self.u, &self.z, beta);
        Ok(())
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// ‖r‖₂/‖S‖₂ of the current iterate.
    pub fn relative_residual(&self) -> f64 {
        self.rel
    }

    /// ‖S‖₂ of the system this process was started on.
    pub fn source_norm(&self) -> f64 {
        self.source_norm
    }

    pub fn solution(&self) -> &[f64] {
        &self.p
    }

    /// Consumes the process into the iterate and its report.
    pub fn finish(self) -> (Vec<f64>, PcgReport) {
        let report = PcgReport {
            iterations: self.iterations,
            converged: self.converged,
            final_relative_residual: self.rel,
            residual_history: self.history,
            kernel_counters: self.counters,
        };
        (self.p, report)
    }
}

/// Preconditioned conjugate gradients on A·p = S.
///
/// The recurrence tracks the gradient r = A·p − S (not the usual b − Ax), so
/// the descent update steps against the conjugate direction: p ← p − α·u with
/// r ← r − α·v. All scalars (α = rᵀz/uᵀAu, β = ratio of successive rᵀz) are
/// the classical ones, and exactly one matrix product is issued per iteration.
/// Convergence is declared when ‖r‖₂/‖S‖₂ ≤ `tol` (absolute ‖r‖₂ if S = 0).
///
/// Returns the best iterate with `converged = false` in the report if
/// `max_iter` is exhausted; hard errors ([`CoreError::Breakdown`]) signal a
/// non-positive-definite system or a collapsing search direction.
pub fn pcg_solve(
    sys: &DiaSystem,
    precond: &Preconditioner,
    x0: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, PcgReport)> {
    let mut process = PcgProcess::start(sys, precond, x0, tol)?;
    while !process.converged() && process.iterations() < max_iter {
        process.step(sys, precond, tol)?;
    }
    Ok(process.finish())
}

/// Runs `pcg_solve` from a zero guess once per relaxation factor and reports
/// (ω, iterations) pairs.
pub fn omega_sweep(
    sys: &DiaSystem,
    kind: PreconditionerKind,
    omegas: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<Vec<(f64, usize)>> {
    let x0 = vec![0.0; sys.n()];
    omegas
        .iter()
        .map(|&omega| {
            let precond = Preconditioner::build(kind, omega, sys)?;
            let (_, report) = pcg_solve(sys, &precond, &x0, tol, max_iter)?;
            Ok((omega, report.iterations))
        })
        .collect()
}
