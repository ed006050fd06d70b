//! Run configuration: a strict TOML schema covering every mode.
//!
//! Unknown keys anywhere in the file are rejected, so typos fail loudly
//! instead of silently falling back to defaults. Every section is optional
//! and defaults to the values documented in `configs/`.

use anyhow::{bail, Context};
use pistonfilm_core::dynamics::{MarchOptions, PicardScheme, StallPolicy};
use pistonfilm_core::geometry::{KinematicState, PumpConfig, TextureKind};
use pistonfilm_core::joint::SolvePath;
use pistonfilm_core::krylov::{default_omega, PreconditionerKind};
use pistonfilm_core::waveform::InletWaveform;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub pump: PumpConfig,
    pub mesh: MeshSection,
    pub texture: TextureSection,
    pub waveform: WaveformSection,
    pub solver: SolverSection,
    pub dynamics: DynamicsSection,
    pub outputs: OutputSection,
    pub bench: BenchSection,
    pub joint_bench: JointBenchSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeshSection {
    pub n_theta: usize,
    pub n_y: usize,
}

impl Default for MeshSection {
    fn default() -> Self {
        Self { n_theta: 100, n_y: 80 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct TextureSection {
    pub kind: TextureKind,
}

/// Flat inlet-waveform description; `shape` selects which fields apply.
///
/// The default trapezoid (0.5 MPa ↔ 10 MPa, 50% duty, 5% ramps) is a
/// declared stand-in for real valve-plate port timing, which varies by pump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WaveformSection {
    pub shape: WaveShape,
    /// Inlet pressure for `shape = "constant"` (Pa).
    pub pressure: f64,
    pub low: f64,
    pub high: f64,
    /// Fraction of the cycle at the high level, including the leading ramp.
    pub duty: f64,
    /// Fraction of the cycle spent on each ramp.
    pub ramp: f64,
    /// Cycle offset as a fraction of a revolution.
    pub phase: f64,
    /// (cycle fraction, pressure) knots for `shape = "table"`.
    pub table: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum WaveShape {
    Constant,
    #[default]
    Trapezoid,
    Table,
}

impl Default for WaveformSection {
    fn default() -> Self {
        Self {
            shape: WaveShape::Trapezoid,
            pressure: 10.0e6,
            low: 0.5e6,
            high: 10.0e6,
            duty: 0.5,
            ramp: 0.05,
            phase: 0.0,
            table: Vec::new(),
        }
    }
}

impl WaveformSection {
    pub fn to_waveform(&self) -> anyhow::Result<InletWaveform> {
        let w = match self.shape {
            WaveShape::Constant => InletWaveform::Constant { pressure: self.pressure },
            WaveShape::Trapezoid => InletWaveform::Trapezoid {
                low: self.low,
                high: self.high,
                duty: self.duty,
                ramp: self.ramp,
                phase: self.phase,
            },
            WaveShape::Table => {
                if self.table.is_empty() {
                    bail!("waveform shape \"table\" requires at least one table entry");
                }
                InletWaveform::Table { points: self.table.clone() }
            }
        };
        w.validate()?;
        Ok(w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub preconditioner: PreconditionerKind,
    /// Relaxation factor; if absent, picked by texture kind (1.8 smooth,
    /// 1.6 textured).
    pub omega: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
    pub path: SolvePath,
    /// Seed each pressure solve in `simulate` from the previous one.
    pub warm_start: bool,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            preconditioner: PreconditionerKind::default(),
            omega: None,
            tol: 1.0e-6,
            max_iter: 100_000,
            path: SolvePath::default(),
            warm_start: false,
        }
    }
}

impl SolverSection {
    pub fn omega_for(&self, texture: TextureKind) -> f64 {
        self.omega
            .unwrap_or_else(|| default_omega(texture != TextureKind::None))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DynamicsSection {
    pub scheme: PicardScheme,
    pub periods: usize,
    pub steps_per_period: usize,
    pub eps_dyn: f64,
    pub max_picard: usize,
    pub on_stall: StallPolicy,
    /// Shaft-angle spacing of pressure/thickness snapshots (degrees);
    /// 0 disables snapshots.
    pub snapshot_interval_deg: f64,
    /// Clamp negative gauge pressures to this floor (Pa) inside force
    /// integration; omit to keep the raw field.
    pub pressure_floor: Option<f64>,
    /// Initial eccentricities (e1, e2) at y = 0 and (e3, e4) at y = L_F (m).
    pub initial_e: [f64; 4],
    /// Initial eccentricity rates (m/s).
    pub initial_e_rate: [f64; 4],
}

impl Default for DynamicsSection {
    fn default() -> Self {
        Self {
            scheme: PicardScheme::default(),
            periods: 1,
            steps_per_period: 90,
            eps_dyn: 1.0e-3,
            max_picard: 20,
            on_stall: StallPolicy::default(),
            snapshot_interval_deg: 30.0,
            pressure_floor: None,
            initial_e: [-0.2e-6, 0.2e-6, 0.2e-6, -0.2e-6],
            initial_e_rate: [-3.78e-7, 3.78e-7, 3.78e-7, -3.78e-7],
        }
    }
}

impl DynamicsSection {
    pub fn initial_state(&self) -> KinematicState {
        let mut s = KinematicState::at_rest();
        s.e = self.initial_e;
        s.e_rate = self.initial_e_rate;
        s
    }

    pub fn march_options(&self, solver: &SolverSection, texture: TextureKind) -> MarchOptions {
        MarchOptions {
            periods: self.periods,
            steps_per_period: self.steps_per_period,
            scheme: self.scheme,
            eps_dyn: self.eps_dyn,
            max_picard: self.max_picard,
            preconditioner: solver.preconditioner,
            omega: solver.omega_for(texture),
            pcg_tol: solver.tol,
            pcg_max_iter: solver.max_iter,
            path: solver.path,
            warm_start: solver.warm_start,
            on_stall: self.on_stall,
            snapshot_interval: (self.snapshot_interval_deg > 0.0)
                .then(|| self.snapshot_interval_deg.to_radians()),
            pressure_floor: self.pressure_floor,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub pressure: bool,
    pub residuals: bool,
    pub trace: bool,
    pub forces: bool,
    pub snapshots: bool,
    pub plots: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            pressure: true,
            residuals: true,
            trace: true,
            forces: true,
            snapshots: true,
            plots: true,
        }
    }
}

/// Sweep grid for `bench`: the cartesian product of meshes, textures,
/// preconditioners and relaxation factors. Empty omega list means the
/// standard ten-point grid for SOR-family preconditioners and a single run
/// for the diagonal one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BenchSection {
    pub meshes: Vec<(usize, usize)>,
    pub textures: Vec<TextureKind>,
    pub preconditioners: Vec<PreconditionerKind>,
    pub omegas: Vec<f64>,
    pub tol: f64,
    pub max_iter: usize,
    /// Boundary pressure at the displacement-chamber end for bench systems (Pa).
    pub inlet_pressure: f64,
}

impl Default for BenchSection {
    fn default() -> Self {
        Self {
            meshes: vec![(100, 80)],
            textures: vec![TextureKind::None],
            preconditioners: vec![PreconditionerKind::Jacobian, PreconditionerKind::AssorII],
            omegas: Vec::new(),
            tol: 1.0e-6,
            max_iter: 200_000,
            inlet_pressure: 10.0e6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct JointBenchSection {
    pub textures: Vec<TextureKind>,
    pub tol: f64,
    pub max_iter: usize,
    pub inlet_pressure: f64,
}

impl Default for JointBenchSection {
    fn default() -> Self {
        Self {
            textures: vec![TextureKind::None],
            tol: 1.0e-6,
            max_iter: 200_000,
            inlet_pressure: 10.0e6,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let cfg: RunConfig = toml::from_str(&text)
            .with_context(|| format!("cannot parse config {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        self.pump.validate()?;
        self.waveform.to_waveform()?;
        if self.mesh.n_theta < 4 || self.mesh.n_y < 4 {
            bail!(
                "mesh must be at least 4x4, got {}x{}",
                self.mesh.n_theta,
                self.mesh.n_y
            );
        }
        if let Some(omega) = self.solver.omega {
            if !(omega > 0.0 && omega < 2.0) {
                bail!("solver omega must lie in (0, 2), got {omega}");
            }
        }
        if !(self.solver.tol > 0.0) {
            bail!("solver tol must be positive, got {}", self.solver.tol);
        }
        if !(self.bench.tol > 0.0) || !(self.joint_bench.tol > 0.0) {
            bail!("bench tolerances must be positive");
        }
        for &(nt, ny) in &self.bench.meshes {
            if nt < 4 || ny < 4 {
                bail!("bench mesh must be at least 4x4, got {nt}x{ny}");
            }
        }
        for &omega in &self.bench.omegas {
            if !(omega > 0.0 && omega < 2.0) {
                bail!("bench omega must lie in (0, 2), got {omega}");
            }
        }
        self.dynamics
            .march_options(&self.solver, self.texture.kind)
            .validate()?;
        Ok(())
    }

    pub fn to_toml(&self) -> anyhow::Result<String> {
        Ok(toml::to_string_pretty(self)?)
    }
}
