//! The nine-block joint system: the pressure problem at the base state plus
//! eight finite-difference perturbation problems, solved together.
//!
//! Block 0 is assembled at (e, ė); blocks 1–4 bump one eccentricity by Δe
//! (changing both the matrix and the source); blocks 5–8 bump one rate by Δė
//! (changing only the source). The blocks are mathematically independent —
//! the joint matrix is block-diagonal — but solving them as one batch lets
//! every kernel run over 9n rows at once, and the per-block pressure
//! differences feed the force Jacobians of the motion solver.

use crate::assembly::{assemble, BoundaryCondition, DiaSystem};
use crate::error::{CoreError, Result};
use crate::geometry::{
    film_thickness, film_thickness_rate, FilmMesh, KinematicState, PumpConfig, TexturePattern,
};
use crate::krylov::{
    pcg_solve, spmv, KernelCounters, PcgProcess, PcgReport, Preconditioner, PreconditionerKind,
    BREAKDOWN_FLOOR,
};
use crate::parallel;
use serde::{Deserialize, Serialize};

/// Base condition plus 4 eccentricity and 4 rate perturbations.
pub const BLOCK_COUNT: usize = 9;

/// The assembled nine-block system.
#[derive(Debug, Clone)]
pub struct JointSystem {
    /// Nine systems sharing one mesh: identical n and band structure.
    pub blocks: Vec<DiaSystem>,
    /// Eccentricity perturbation Δe used for blocks 1–4 (m).
    pub delta_e: f64,
    /// Rate perturbation Δė used for blocks 5–8 (m/s).
    pub delta_e_rate: f64,
}

impl JointSystem {
    /// Unknowns per block.
    pub fn n(&self) -> usize {
        self.blocks[0].n()
    }

    /// Unknowns across all blocks.
    pub fn total_unknowns(&self) -> usize {
        BLOCK_COUNT * self.n()
    }

    pub fn base(&self) -> &DiaSystem {
        &self.blocks[0]
    }

    /// Index of block-`block` node `node` in the concatenated layout:
    /// node + block·n.
    pub fn global_index(&self, block: usize, node: usize) -> usize {
        debug_assert!(block < BLOCK_COUNT && node < self.n());
        node + block * self.n()
    }

    /// Concatenated source vector of length 9n.
    pub fn concat_source(&self) -> Vec<f64> {
        let mut s = Vec::with_capacity(self.total_unknowns());
        for b in &self.blocks {
            s.extend_from_slice(&b.source);
        }
        s
    }

    /// Block-diagonal product y = A_G·x over the concatenated layout.
    pub fn joint_spmv(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        let n = self.n();
        let total = self.total_unknowns();
        if x.len() != total || y.len() != total {
            return Err(CoreError::DimensionMismatch {
                context: "joint spmv",
                expected: total,
                got: if x.len() != total { x.len() } else { y.len() },
            });
        }
        for (j, block) in self.blocks.iter().enumerate() {
            spmv(block, &x[j * n..(j + 1) * n], &mut y[j * n..(j + 1) * n])?;
        }
        Ok(())
    }
}

/// The kinematic state block `block` of the joint system is assembled at:
/// the base state for block 0, one eccentricity bumped by Δe for blocks 1–4,
/// one rate bumped by Δė for blocks 5–8.
pub fn perturbed_state(
    state: &KinematicState,
    block: usize,
    delta_e: f64,
    delta_e_rate: f64,
) -> KinematicState {
    let mut s = *state;
    match block {
        0 => {}
        1..=4 => s.e[block - 1] += delta_e,
        5..=8 => s.e_rate[block - 5] += delta_e_rate,
        _ => panic!("block index {block} out of range"),
    }
    s
}

/// Builds the nine blocks at `state` with the finite-difference steps from
/// `config`. A failure in any block reports which block could not be
/// assembled.
pub fn build_joint(
    mesh: &FilmMesh,
    state: &KinematicState,
    pattern: &TexturePattern,
    config: &PumpConfig,
    surface_speed: f64,
    bc: &BoundaryCondition,
) -> Result<JointSystem> {
    let mut blocks = Vec::with_capacity(BLOCK_COUNT);
    for block in 0..BLOCK_COUNT {
        let s = perturbed_state(state, block, config.fd_step_e, config.fd_step_e_rate);
        let build = || -> Result<DiaSystem> {
            let h = film_thickness(mesh, &s, pattern)?;
            let dhdt = film_thickness_rate(mesh, &s)?;
            assemble(mesh, &h, &dhdt, surface_speed, config.viscosity, bc)
        };
        blocks.push(build().map_err(|source| CoreError::JointBlock {
            block,
            source: Box::new(source),
        })?);
    }
    Ok(JointSystem {
        blocks,
        delta_e: config.fd_step_e,
        delta_e_rate: config.fd_step_e_rate,
    })
}

/// Convergence test governing a joint solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum StrategyKind {
    /// One Krylov process over all 9n unknowns with global inner products;
    /// stops on the global relative residual.
    #[default]
    Synchronized,
    /// Nine independent Krylov processes stepped in lockstep; each block
    /// freezes as its own relative residual converges.
    Asynchronous,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceStrategy {
    pub kind: StrategyKind,
    /// Relative residual target ε applied globally (synchronized) or per
    /// block (asynchronous).
    pub tol: f64,
}

impl ConvergenceStrategy {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(CoreError::InvalidParameter {
                name: "strategy tol",
                value: self.tol,
                constraint: "must be positive and finite",
            });
        }
        Ok(())
    }
}

/// Which machinery solves the nine blocks; `Sequential` is the reference
/// "one block after another" baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SolvePath {
    #[default]
    Synchronized,
    Asynchronous,
    Sequential,
}

/// Whole-solve outcome alongside the per-block reports.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalReport {
    /// Synchronized: global iteration count. Asynchronous/sequential: total
    /// iterations across blocks.
    pub iterations: usize,
    pub converged: bool,
    /// ‖A_G·p_G − S_G‖₂ / ‖S_G‖₂ at the end of the solve.
    pub final_relative_residual: f64,
    /// Active-set compactions in the asynchronous path: sweeps in which at
    /// least one block froze while others kept iterating. Zero elsewhere.
    pub reconfiguration_events: usize,
    /// Work counted in per-block banded products and logical dots, summed
    /// over blocks, including reporting-only reductions.
    pub kernel_counters: KernelCounters,
}

#[derive(Debug, Clone)]
pub struct JointSolution {
    /// Nine length-n pressure iterates, block order.
    pub pressures: Vec<Vec<f64>>,
    pub block_reports: Vec<PcgReport>,
    pub global: GlobalReport,
}

fn validate_initial(sys: &JointSystem, initial: Option<&[Vec<f64>]>) -> Result<()> {
    if let Some(guess) = initial {
        if guess.len() != BLOCK_COUNT {
            return Err(CoreError::DimensionMismatch {
                context: "joint initial guess blocks",
                expected: BLOCK_COUNT,
                got: guess.len(),
            });
        }
        for g in guess {
            if g.len() != sys.n() {
                return Err(CoreError::DimensionMismatch {
                    context: "joint initial guess",
                    expected: sys.n(),
                    got: g.len(),
                });
            }
        }
    }
    Ok(())
}

/// Global residual norm from per-block absolute residuals and source norms.
fn combined_relative(parts: &[(f64, f64)]) -> f64 {
    let r2: f64 = parts.iter().map(|(r, _)| r * r).sum();
    let s2: f64 = parts.iter().map(|(_, s)| s * s).sum();
    let denom = if s2 > 0.0 { s2.sqrt() } else { 1.0 };
    r2.sqrt() / denom
}

/// Solves all nine blocks under `strategy` with one preconditioner family and
/// relaxation factor. `initial` seeds the per-block iterates (zero when
/// absent).
pub fn solve_joint(
    sys: &JointSystem,
    kind: PreconditionerKind,
    omega: f64,
    strategy: ConvergenceStrategy,
    max_iter: usize,
    initial: Option<&[Vec<f64>]>,
) -> Result<JointSolution> {
    strategy.validate()?;
    validate_initial(sys, initial)?;
    match strategy.kind {
        StrategyKind::Synchronized => solve_synchronized(sys, kind, omega, strategy.tol, max_iter, initial),
        StrategyKind::Asynchronous => solve_asynchronous(sys, kind, omega, strategy.tol, max_iter, initial),
    }
}

/// Solves the nine blocks one after another with independent runs; the
/// baseline every batched path is checked against.
pub fn sequential_solve(
    sys: &JointSystem,
    kind: PreconditionerKind,
    omega: f64,
    tol: f64,
    max_iter: usize,
    initial: Option<&[Vec<f64>]>,
) -> Result<JointSolution> {
    ConvergenceStrategy { kind: StrategyKind::Asynchronous, tol }.validate()?;
    validate_initial(sys, initial)?;
    let n = sys.n();
    let zero = vec![0.0; n];
    let mut pressures = Vec::with_capacity(BLOCK_COUNT);
    let mut reports = Vec::with_capacity(BLOCK_COUNT);
    let mut counters = KernelCounters::default();
    let mut parts = Vec::with_capacity(BLOCK_COUNT);
    for (j, block) in sys.blocks.iter().enumerate() {
        let wrap = |source: CoreError| CoreError::JointBlock {
            block: j,
            source: Box::new(source),
        };
        let precond = Preconditioner::build(kind, omega, block).map_err(&wrap)?;
        let x0 = initial.map_or(zero.as_slice(), |g| g[j].as_slice());
        let (p, report) = pcg_solve(block, &precond, x0, tol, max_iter).map_err(&wrap)?;
        counters.spmv += report.kernel_counters.spmv;
        counters.dot += report.kernel_counters.dot + 1;
        let s_norm = parallel::dot(&block.source, &block.source).sqrt();
        let denom = if s_norm > 0.0 { s_norm } else { 1.0 };
        parts.push((report.final_relative_residual * denom, s_norm));
        pressures.push(p);
        reports.push(report);
    }
    let global = GlobalReport {
        iterations: reports.iter().map(|r| r.iterations).sum(),
        converged: reports.iter().all(|r| r.converged),
        final_relative_residual: combined_relative(&parts),
        reconfiguration_events: 0,
        kernel_counters: counters,
    };
    Ok(JointSolution {
        pressures,
        block_reports: reports,
        global,
    })
}

/// Dispatches on the solve path.
pub fn solve_path(
    sys: &JointSystem,
    kind: PreconditionerKind,
    omega: f64,
    path: SolvePath,
    tol: f64,
    max_iter: usize,
    initial: Option<&[Vec<f64>]>,
) -> Result<JointSolution> {
    match path {
        SolvePath::Synchronized => solve_joint(
            sys,
            kind,
            omega,
            ConvergenceStrategy { kind: StrategyKind::Synchronized, tol },
            max_iter,
            initial,
        ),
        SolvePath::Asynchronous => solve_joint(
            sys,
            kind,
            omega,
            ConvergenceStrategy { kind: StrategyKind::Asynchronous, tol },
            max_iter,
            initial,
        ),
        SolvePath::Sequential => sequential_solve(sys, kind, omega, tol, max_iter, initial),
    }
}

fn solve_asynchronous(
    sys: &JointSystem,
    kind: PreconditionerKind,
    omega: f64,
    tol: f64,
    max_iter: usize,
    initial: Option<&[Vec<f64>]>,
) -> Result<JointSolution> {
    let n = sys.n();
    let zero = vec![0.0; n];
    let mut preconds = Vec::with_capacity(BLOCK_COUNT);
    let mut processes = Vec::with_capacity(BLOCK_COUNT);
    for (j, block) in sys.blocks.iter().enumerate() {
        let wrap = |source: CoreError| CoreError::JointBlock {
            block: j,
            source: Box::new(source),
        };
        let precond = Preconditioner::build(kind, omega, block).map_err(&wrap)?;
        let x0 = initial.map_or(zero.as_slice(), |g| g[j].as_slice());
        let process = PcgProcess::start(block, &precond, x0, tol).map_err(&wrap)?;
        preconds.push(precond);
        processes.push(process);
    }

    let active = |p: &PcgProcess| !p.converged() && p.iterations() < max_iter;
    let mut reconfigurations = 0;
    while processes.iter().any(active) {
        let mut froze = 0;
        for j in 0..BLOCK_COUNT {
            if active(&processes[j]) {
                processes[j]
                    .step(&sys.blocks[j], &preconds[j], tol)
                    .map_err(|source| CoreError::JointBlock {
                        block: j,
                        source: Box::new(source),
                    })?;
                if processes[j].converged() {
                    froze += 1;
                }
            }
        }
        // A compaction only happens when the kernel set shrinks but work
        // remains; all blocks finishing together needs no adjustment.
        if froze > 0 && processes.iter().any(active) {
            reconfigurations += 1;
        }
    }

    let mut parts = Vec::with_capacity(BLOCK_COUNT);
    let mut counters = KernelCounters::default();
    let mut pressures = Vec::with_capacity(BLOCK_COUNT);
    let mut reports = Vec::with_capacity(BLOCK_COUNT);
    for process in processes {
        parts.push((
            process.relative_residual()
                * if process.source_norm() > 0.0 {
                    process.source_norm()
                } else {
                    1.0
                },
            process.source_norm(),
        ));
        let (p, report) = process.finish();
        counters.spmv += report.kernel_counters.spmv;
        counters.dot += report.kernel_counters.dot;
        pressures.push(p);
        reports.push(report);
    }
    let global = GlobalReport {
        iterations: reports.iter().map(|r| r.iterations).sum(),
        converged: reports.iter().all(|r| r.converged),
        final_relative_residual: combined_relative(&parts),
        reconfiguration_events: reconfigurations,
        kernel_counters: counters,
    };
    Ok(JointSolution {
        pressures,
        block_reports: reports,
        global,
    })
}

fn solve_synchronized(
    sys: &JointSystem,
    kind: PreconditionerKind,
    omega: f64,
    tol: f64,
    max_iter: usize,
    initial: Option<&[Vec<f64>]>,
) -> Result<JointSolution> {
    let n = sys.n();
    let total = sys.total_unknowns();
    let mut preconds = Vec::with_capacity(BLOCK_COUNT);
    for (j, block) in sys.blocks.iter().enumerate() {
        preconds.push(
            Preconditioner::build(kind, omega, block).map_err(|source| CoreError::JointBlock {
                block: j,
                source: Box::new(source),
            })?,
        );
    }
    let source = sys.concat_source();
    let mut counters = KernelCounters::default();
    counters.dot += 1;
    let s_norm = parallel::dot(&source, &source).sqrt();
    let denom = if s_norm > 0.0 { s_norm } else { 1.0 };

    let mut p = vec![0.0; total];
    if let Some(guess) = initial {
        for (j, g) in guess.iter().enumerate() {
            p[j * n..(j + 1) * n].copy_from_slice(g);
        }
    }
    let mut r = vec![0.0; total];
    sys.joint_spmv(&p, &mut r)?;
    counters.spmv += BLOCK_COUNT;
    parallel::sub_scaled(&mut r, 1.0, &source);

    // Per-block bookkeeping: ‖S_j‖ once, then a residual trace per block.
    let block_denoms: Vec<f64> = sys
        .blocks
        .iter()
        .map(|b| {
            counters.dot += 1;
            let s = parallel::dot(&b.source, &b.source).sqrt();
            if s > 0.0 {
                s
            } else {
                1.0
            }
        })
        .collect();
    let block_rel = |r: &[f64], counters: &mut KernelCounters| -> Vec<f64> {
        (0..BLOCK_COUNT)
            .map(|j| {
                counters.dot += 1;
                parallel::dot(&r[j * n..(j + 1) * n], &r[j * n..(j + 1) * n]).sqrt()
                    / block_denoms[j]
            })
            .collect()
    };
    let apply_blocks = |r: &[f64], z: &mut [f64], preconds: &[Preconditioner]| -> Result<()> {
        for (j, precond) in preconds.iter().enumerate() {
            precond.apply(&sys.blocks[j], &r[j * n..(j + 1) * n], &mut z[j * n..(j + 1) * n])?;
        }
        Ok(())
    };

    counters.dot += 1;
    let mut rel = parallel::dot(&r, &r).sqrt() / denom;
    let mut history = vec![rel];
    let mut block_histories: Vec<Vec<f64>> = block_rel(&r, &mut counters)
        .into_iter()
        .map(|v| vec![v])
        .collect();
    let mut iterations = 0;
    let mut converged = rel <= tol;

    if !converged {
        let mut z = vec![0.0; total];
        apply_blocks(&r, &mut z, &preconds)?;
        counters.dot += 1;
        let mut d = parallel::dot(&r, &z);
        if !(d > 0.0) || !d.is_finite() {
            return Err(CoreError::Breakdown {
                iteration: 0,
                what: "preconditioned residual product r'z not positive",
            });
        }
        let mut u = z.clone();
        let mut v = vec![0.0; total];
        for j in 0..max_iter {
            sys.joint_spmv(&u, &mut v)?;
            counters.spmv += BLOCK_COUNT;
            let (uref, vref) = (&u, &v);
            let [uu, uv, vv] = parallel::sum_terms::<3>(total, |i| {
                let (a, b) = (uref[i], vref[i]);
                [a * a, a * b, b * b]
            });
            counters.dot += 3;
            if !uv.is_finite() || uv <= BREAKDOWN_FLOOR * (uu.sqrt() * vv.sqrt()) {
                return Err(CoreError::Breakdown {
                    iteration: j,
                    what: "curvature u'Au not positive",
                });
            }
            let alpha = d / uv;
            parallel::sub_scaled(&mut p, alpha, &u);
            parallel::sub_scaled(&mut r, alpha, &v);
            iterations = j + 1;
            counters.dot += 1;
            rel = parallel::dot(&r, &r).sqrt() / denom;
            history.push(rel);
            for (hist, value) in block_histories.iter_mut().zip(block_rel(&r, &mut counters)) {
                hist.push(value);
            }
            if rel <= tol {
                converged = true;
                break;
            }
            apply_blocks(&r, &mut z, &preconds)?;
            counters.dot += 1;
            let d_next = parallel::dot(&r, &z);
            if !(d_next > 0.0) || !d_next.is_finite() {
                return Err(CoreError::Breakdown {
                    iteration: j + 1,
                    what: "preconditioned residual product r'z not positive",
                });
            }
            let beta = d_next / d;
            d = d_next;
            parallel::xpby(&mut u, &z, beta);
        }
    }

    let pressures: Vec<Vec<f64>> = (0..BLOCK_COUNT).map(|j| p[j * n..(j + 1) * n].to_vec()).collect();
    let block_reports: Vec<PcgReport> = block_histories
        .into_iter()
        .map(|hist| {
            let last = *hist.last().unwrap();
            PcgReport {
                iterations,
                converged: last <= tol,
                final_relative_residual: last,
                residual_history: hist,
                kernel_counters: KernelCounters {
                    spmv: iterations + 1,
                    dot: iterations + 1,
                },
            }
        })
        .collect();
    let global = GlobalReport {
        iterations,
        converged,
        final_relative_residual: rel,
        reconfiguration_events: 0,
        kernel_counters: counters,
    };
    Ok(JointSolution {
        pressures,
        block_reports,
        global,
    })
}
