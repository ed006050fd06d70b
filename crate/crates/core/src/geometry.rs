//! Pump geometry, shaft kinematics, film mesh and gap-height evaluation.
//!
//! The film lives on the unwrapped piston surface: circumferential coordinate
//! x = R_k·θ with θ ∈ [0, 2π) (periodic) and axial coordinate y ∈ [0, L_F]
//! measured from the piston bottom (pressurized chamber side). The piston axis
//! position is described by four generalized eccentricities: (e1, e2) are the
//! lateral offsets at y = 0 and (e3, e4) the offsets at y = L_F.

use crate::error::{CoreError, Result};
use crate::parallel;
use serde::{Deserialize, Serialize};

/// Gap heights below this floor (0.05 µm) are treated as solid contact.
pub const MIN_THICKNESS: f64 = 5.0e-8;

/// Unit tag carried by nodal fields so mixed-unit arithmetic is caught early.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldUnit {
    Meter,
    MeterPerSecond,
    Pascal,
}

/// Nodal scalar field on a [`FilmMesh`], indexed by node = i + j·n_theta.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub values: Vec<f64>,
    pub unit: FieldUnit,
    n_theta: usize,
}

impl ScalarField {
    /// Wraps nodal values for `mesh`; rejects length mismatches.
    pub fn new(mesh: &FilmMesh, values: Vec<f64>, unit: FieldUnit) -> Result<Self> {
        if values.len() != mesh.node_count() {
            return Err(CoreError::DimensionMismatch {
                context: "scalar field",
                expected: mesh.node_count(),
                got: values.len(),
            });
        }
        Ok(Self {
            values,
            unit,
            n_theta: mesh.n_theta,
        })
    }

    /// Value at node (i, j).
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i + j * self.n_theta]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Errors unless the field carries `unit`.
    pub fn expect_unit(&self, unit: FieldUnit, context: &'static str) -> Result<()> {
        if self.unit != unit {
            return Err(CoreError::UnitMismatch {
                context,
                expected: unit,
                got: self.unit,
            });
        }
        Ok(())
    }
}

/// How the coupling length L_F follows the shaft angle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum CouplingLengthLaw {
    /// L_F stays at the configured minimum.
    Constant,
    /// L_F(φ) = L_Fmin + R_b·tanβ·(1 + cosφ): maximum engagement at φ = 0,
    /// minimum at φ = π.
    #[default]
    Swashplate,
}

/// Pump and oil parameters. All lengths in meters, angles in radians,
/// masses in kg, pressures in Pa.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PumpConfig {
    /// Piston radius R_k (m).
    pub piston_radius: f64,
    /// Cylinder bore radius R_c (m); the radial clearance is R_c − R_k.
    pub bore_radius: f64,
    /// Piston pitch radius R_b on the cylinder barrel (m).
    pub pitch_radius: f64,
    /// Minimum piston/cylinder coupling length L_Fmin (m).
    pub min_coupling_length: f64,
    /// Swashplate tilt angle β (rad).
    pub swashplate_angle: f64,
    /// Shaft speed (rev/min).
    pub shaft_speed_rpm: f64,
    /// Piston mass m_k (kg).
    pub piston_mass: f64,
    /// Slipper mass m_G (kg).
    pub slipper_mass: f64,
    /// Dynamic oil viscosity μ (Pa·s). Assumed value; not a measured datum.
    pub viscosity: f64,
    /// Case/outlet pressure applied at y = L_F (Pa).
    pub outlet_pressure: f64,
    /// Finite-difference step for eccentricities (m).
    pub fd_step_e: f64,
    /// Finite-difference step for eccentricity rates (m/s).
    pub fd_step_e_rate: f64,
    pub coupling_law: CouplingLengthLaw,
}

impl Default for PumpConfig {
    fn default() -> Self {
        Self {
            piston_radius: 1.0e-2,
            bore_radius: 1.0e-2 + 6.0e-6,
            pitch_radius: 4.05e-2,
            min_coupling_length: 3.0e-2,
            swashplate_angle: 10.0_f64.to_radians(),
            shaft_speed_rpm: 600.0,
            piston_mass: 0.128,
            slipper_mass: 0.0259,
            viscosity: 0.03,
            outlet_pressure: 0.5e6,
            fd_step_e: 1.0e-9,
            fd_step_e_rate: 1.0e-8,
            coupling_law: CouplingLengthLaw::Swashplate,
        }
    }
}

impl PumpConfig {
    pub fn validate(&self) -> Result<()> {
        let checks: [(&'static str, f64, bool, &'static str); 12] = [
            ("piston_radius", self.piston_radius, self.piston_radius > 0.0, "must be positive"),
            (
                "bore_radius",
                self.bore_radius,
                self.bore_radius > self.piston_radius,
                "must exceed piston_radius",
            ),
            ("pitch_radius", self.pitch_radius, self.pitch_radius > 0.0, "must be positive"),
            (
                "min_coupling_length",
                self.min_coupling_length,
                self.min_coupling_length > 0.0,
                "must be positive",
            ),
            (
                "swashplate_angle",
                self.swashplate_angle,
                self.swashplate_angle >= 0.0 && self.swashplate_angle < std::f64::consts::FRAC_PI_2,
                "must lie in [0, pi/2)",
            ),
            (
                "shaft_speed_rpm",
                self.shaft_speed_rpm,
                self.shaft_speed_rpm > 0.0,
                "must be positive",
            ),
            ("piston_mass", self.piston_mass, self.piston_mass > 0.0, "must be positive"),
            ("slipper_mass", self.slipper_mass, self.slipper_mass > 0.0, "must be positive"),
            ("viscosity", self.viscosity, self.viscosity > 0.0, "must be positive"),
            (
                "outlet_pressure",
                self.outlet_pressure,
                self.outlet_pressure.is_finite() && self.outlet_pressure >= 0.0,
                "must be finite and non-negative",
            ),
            ("fd_step_e", self.fd_step_e, self.fd_step_e > 0.0, "must be positive"),
            (
                "fd_step_e_rate",
                self.fd_step_e_rate,
                self.fd_step_e_rate > 0.0,
                "must be positive",
            ),
        ];
        for (name, value, ok, constraint) in checks {
            if !ok {
                return Err(CoreError::InvalidParameter { name, value, constraint });
            }
        }
        Ok(())
    }

    /// Shaft angular speed ω (rad/s).
    pub fn angular_speed(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.shaft_speed_rpm / 60.0
    }

    /// Shaft revolution period (s).
    pub fn period(&self) -> f64 {
        60.0 / self.shaft_speed_rpm
    }

    /// Radial clearance R_c − R_k (m).
    pub fn clearance(&self) -> f64 {
        self.bore_radius - self.piston_radius
    }
}

/// Generalized state of the piston axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinematicState {
    /// Eccentricities (e1, e2) at y = 0 and (e3, e4) at y = L_F (m).
    pub e: [f64; 4],
    /// Eccentricity rates (m/s).
    pub e_rate: [f64; 4],
    /// Shaft angle φ (rad).
    pub shaft_angle: f64,
    /// Time (s).
    pub time: f64,
}

impl KinematicState {
    pub fn at_rest() -> Self {
        Self {
            e: [0.0; 4],
            e_rate: [0.0; 4],
            shaft_angle: 0.0,
            time: 0.0,
        }
    }
}

/// Shaft-driven quantities at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShaftKinematics {
    /// Shaft angle φ = ω·t (rad, not wrapped).
    pub shaft_angle: f64,
    /// ω (rad/s).
    pub angular_speed: f64,
    /// Circumferential sliding speed U = ω·R_k of the piston surface (m/s).
    /// The axial stroke rate is kept separate (`coupling_length_rate`), so the
    /// wedge term uses the circumferential component only.
    pub surface_speed: f64,
    /// Coupling length L_F(φ) (m).
    pub coupling_length: f64,
    /// dL_F/dt (m/s); equals −R_b·tanβ·ω·sinφ under the swashplate law.
    pub coupling_length_rate: f64,
    /// Axial stroke acceleration R_b·tanβ·ω²·cosφ (m/s²).
    pub axial_acceleration: f64,
}

/// Kinematics of the piston at time `t` for the configured shaft drive.
pub fn shaft_kinematics(config: &PumpConfig, t: f64) -> ShaftKinematics {
    let omega = config.angular_speed();
    let phi = omega * t;
    let tan_beta = config.swashplate_angle.tan();
    let (coupling_length, coupling_length_rate) = match config.coupling_law {
        CouplingLengthLaw::Constant => (config.min_coupling_length, 0.0),
        CouplingLengthLaw::Swashplate => (
            config.min_coupling_length + config.pitch_radius * tan_beta * (1.0 + phi.cos()),
            -config.pitch_radius * tan_beta * omega * phi.sin(),
        ),
    };
    ShaftKinematics {
        shaft_angle: phi,
        angular_speed: omega,
        surface_speed: omega * config.piston_radius,
        coupling_length,
        coupling_length_rate,
        axial_acceleration: config.pitch_radius * tan_beta * omega * omega * phi.cos(),
    }
}

/// Uniform node-centered mesh over the unwrapped film.
///
/// θ_i = i·Δθ with Δθ = 2π/n_theta (node n_theta−1 wraps to node 0);
/// y_j = j·Δy with Δy = L_F/(n_y − 1), so rows j = 0 and j = n_y−1 lie on the
/// axial pressure boundaries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilmMesh {
    pub n_theta: usize,
    pub n_y: usize,
    /// Piston radius R_k (m): sets the unwrapped spacing Δx = R_k·Δθ.
    pub piston_radius: f64,
    /// Cylinder bore radius R_c (m).
    pub bore_radius: f64,
    /// Axial extent L_F (m).
    pub coupling_length: f64,
}

impl FilmMesh {
    pub fn new(
        n_theta: usize,
        n_y: usize,
        piston_radius: f64,
        bore_radius: f64,
        coupling_length: f64,
    ) -> Result<Self> {
        if n_theta < 4 || n_y < 4 {
            return Err(CoreError::InvalidMesh { n_theta, n_y });
        }
        if !(piston_radius > 0.0) {
            return Err(CoreError::InvalidParameter {
                name: "piston_radius",
                value: piston_radius,
                constraint: "must be positive",
            });
        }
        if !(bore_radius > piston_radius) {
            return Err(CoreError::InvalidParameter {
                name: "bore_radius",
                value: bore_radius,
                constraint: "must exceed piston_radius",
            });
        }
        if !(coupling_length > 0.0) {
            return Err(CoreError::InvalidParameter {
                name: "coupling_length",
                value: coupling_length,
                constraint: "must be positive",
            });
        }
        Ok(Self {
            n_theta,
            n_y,
            piston_radius,
            bore_radius,
            coupling_length,
        })
    }

    /// Mesh sized from the pump geometry at coupling length `coupling_length`.
    pub fn for_pump(config: &PumpConfig, n_theta: usize, n_y: usize, coupling_length: f64) -> Result<Self> {
        Self::new(
            n_theta,
            n_y,
            config.piston_radius,
            config.bore_radius,
            coupling_length,
        )
    }

    pub fn node_count(&self) -> usize {
        self.n_theta * self.n_y
    }

    /// Unknowns after removing the two Dirichlet rows.
    pub fn interior_count(&self) -> usize {
        self.n_theta * (self.n_y - 2)
    }

    pub fn d_theta(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.n_theta as f64
    }

    /// Circumferential spacing Δx = R_k·Δθ (m).
    pub fn dx(&self) -> f64 {
        self.piston_radius * self.d_theta()
    }

    /// Axial spacing Δy = L_F/(n_y − 1) (m).
    pub fn dy(&self) -> f64 {
        self.coupling_length / (self.n_y - 1) as f64
    }

    pub fn theta(&self, i: usize) -> f64 {
        i as f64 * self.d_theta()
    }

    pub fn y(&self, j: usize) -> f64 {
        j as f64 * self.dy()
    }

    pub fn node(&self, i: usize, j: usize) -> usize {
        i + j * self.n_theta
    }
}

/// Named surface texture layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum TextureKind {
    #[default]
    None,
    /// 60 × 10 cells over the bottom quarter of the axial span.
    Short,
    /// 60 × 20 cells over the bottom half (same axial pitch as `Short`).
    Long,
}

/// Rectangular dimple pattern on the piston surface, laid out on a regular
/// cell grid inside an axial band that starts at the piston bottom (y = 0,
/// the high-pressure side). Within each cell the dimple footprint covers
/// `footprint` of the pitch in each direction, centered.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TexturePattern {
    pub cells_theta: usize,
    pub cells_y: usize,
    /// Dimple depth added to the gap height (m).
    pub depth: f64,
    /// Fraction of the axial node span covered by the banded pattern.
    pub band_fraction: f64,
    /// Fraction of the cell pitch covered by the dimple, per direction.
    pub footprint: f64,
}

impl TexturePattern {
    const DEPTH: f64 = 20.0e-6;
    const FOOTPRINT: f64 = 0.5;

    /// Empty pattern: adds nothing anywhere.
    pub fn none() -> Self {
        Self {
            cells_theta: 0,
            cells_y: 0,
            depth: 0.0,
            band_fraction: 0.0,
            footprint: 0.0,
        }
    }

    /// Builds one of the named patterns, checking that `mesh` resolves every
    /// cell with at least 2 nodes per direction.
    pub fn build(kind: TextureKind, mesh: &FilmMesh) -> Result<Self> {
        match kind {
            TextureKind::None => Ok(Self::none()),
            TextureKind::Short => Self::custom(60, 10, Self::DEPTH, 0.25, Self::FOOTPRINT, mesh),
            TextureKind::Long => Self::custom(60, 20, Self::DEPTH, 0.5, Self::FOOTPRINT, mesh),
        }
    }

    /// Arbitrary pattern with the same resolution check as [`Self::build`].
    pub fn custom(
        cells_theta: usize,
        cells_y: usize,
        depth: f64,
        band_fraction: f64,
        footprint: f64,
        mesh: &FilmMesh,
    ) -> Result<Self> {
        if cells_theta == 0 || cells_y == 0 {
            return Ok(Self::none());
        }
        if !(depth >= 0.0) || !depth.is_finite() {
            return Err(CoreError::InvalidParameter {
                name: "texture depth",
                value: depth,
                constraint: "must be finite and non-negative",
            });
        }
        if !(band_fraction > 0.0 && band_fraction <= 1.0) {
            return Err(CoreError::InvalidParameter {
                name: "texture band_fraction",
                value: band_fraction,
                constraint: "must lie in (0, 1]",
            });
        }
        if !(footprint > 0.0 && footprint <= 1.0) {
            return Err(CoreError::InvalidParameter {
                name: "texture footprint",
                value: footprint,
                constraint: "must lie in (0, 1]",
            });
        }
        let pattern = Self {
            cells_theta,
            cells_y,
            depth,
            band_fraction,
            footprint,
        };
        let nodes_t = mesh.n_theta / cells_theta;
        if nodes_t < 2 {
            return Err(CoreError::MeshTooCoarse {
                n_theta: mesh.n_theta,
                n_y: mesh.n_y,
                nodes: nodes_t,
                direction: "circumferential",
            });
        }
        let nodes_y = pattern.band_nodes(mesh) / cells_y;
        if nodes_y < 2 {
            return Err(CoreError::MeshTooCoarse {
                n_theta: mesh.n_theta,
                n_y: mesh.n_y,
                nodes: nodes_y,
                direction: "axial",
            });
        }
        Ok(pattern)
    }

    pub fn is_none(&self) -> bool {
        self.cells_theta == 0 || self.cells_y == 0 || self.depth == 0.0
    }

    /// Axial node rows covered by the band.
    fn band_nodes(&self, mesh: &FilmMesh) -> usize {
        (self.band_fraction * mesh.n_y as f64).round() as usize
    }

    /// Texture depth at node (i, j): `depth` inside a dimple footprint, else 0.
    /// Membership is computed from node indices alone, so the textured node
    /// set does not drift as L_F rescales the axial spacing.
    pub fn depth_at(&self, mesh: &FilmMesh, i: usize, j: usize) -> f64 {
        if self.is_none() {
            return 0.0;
        }
        let band = self.band_nodes(mesh);
        if j >= band {
            return 0.0;
        }
        let lo = (1.0 - self.footprint) / 2.0;
        let hi = (1.0 + self.footprint) / 2.0;
        let ft = (i * self.cells_theta % mesh.n_theta) as f64 / mesh.n_theta as f64;
        if !(ft >= lo && ft < hi) {
            return 0.0;
        }
        let fy = (j * self.cells_y % band) as f64 / band as f64;
        if fy >= lo && fy < hi {
            self.depth
        } else {
            0.0
        }
    }
}

/// Gap height at a continuous point, before the texture contribution.
fn gap_at(mesh: &FilmMesh, state: &KinematicState, theta: f64, y: f64) -> f64 {
    let lf = mesh.coupling_length;
    let gx = mesh.bore_radius * theta.cos() - (state.e[2] - state.e[0]) / lf * y - state.e[0];
    let gy = mesh.bore_radius * theta.sin() - (state.e[3] - state.e[1]) / lf * y - state.e[1];
    (gx * gx + gy * gy).sqrt() - mesh.piston_radius
}

/// Gap-height rate at a continuous point: the chain rule of the gap formula
/// through e1..e4 with rates ė1..ė4. Texture depth is time-invariant and does
/// not appear.
fn gap_rate_at(mesh: &FilmMesh, state: &KinematicState, theta: f64, y: f64) -> f64 {
    let lf = mesh.coupling_length;
    let gx = mesh.bore_radius * theta.cos() - (state.e[2] - state.e[0]) / lf * y - state.e[0];
    let gy = mesh.bore_radius * theta.sin() - (state.e[3] - state.e[1]) / lf * y - state.e[1];
    let r = (gx * gx + gy * gy).sqrt();
    let gx_dot = -(state.e_rate[2] - state.e_rate[0]) / lf * y - state.e_rate[0];
    let gy_dot = -(state.e_rate[3] - state.e_rate[1]) / lf * y - state.e_rate[1];
    (gx * gx_dot + gy * gy_dot) / r
}

/// Nodal film thickness h = gap + texture depth (m).
///
/// Fails with [`CoreError::NonPositiveThickness`] if any node falls below
/// [`MIN_THICKNESS`].
pub fn film_thickness(
    mesh: &FilmMesh,
    state: &KinematicState,
    pattern: &TexturePattern,
) -> Result<ScalarField> {
    let nt = mesh.n_theta;
    let mut values = vec![0.0; mesh.node_count()];
    parallel::fill(&mut values, |idx| {
        let (i, j) = (idx % nt, idx / nt);
        gap_at(mesh, state, mesh.theta(i), mesh.y(j)) + pattern.depth_at(mesh, i, j)
    });
    for (idx, &h) in values.iter().enumerate() {
        if !(h >= MIN_THICKNESS) {
            return Err(CoreError::NonPositiveThickness {
                i: idx % nt,
                j: idx / nt,
                value: h,
                floor: MIN_THICKNESS,
            });
        }
    }
    ScalarField::new(mesh, values, FieldUnit::Meter)
}

/// Nodal film thickness rate ∂h/∂t (m/s).
pub fn film_thickness_rate(mesh: &FilmMesh, state: &KinematicState) -> Result<ScalarField> {
    let nt = mesh.n_theta;
    let mut values = vec![0.0; mesh.node_count()];
    parallel::fill(&mut values, |idx| {
        let (i, j) = (idx % nt, idx / nt);
        gap_rate_at(mesh, state, mesh.theta(i), mesh.y(j))
    });
    ScalarField::new(mesh, values, FieldUnit::MeterPerSecond)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table_mesh(n_theta: usize, n_y: usize) -> FilmMesh {
        let cfg = PumpConfig::default();
        FilmMesh::for_pump(&cfg, n_theta, n_y, cfg.min_coupling_length).unwrap()
    }

    #[test]
    fn centered_piston_gap_is_the_radial_clearance() {
        let mesh = table_mesh(16, 8);
        let h = film_thickness(&mesh, &KinematicState::at_rest(), &TexturePattern::none()).unwrap();
        // sqrt of the centered gap rounds within a few ulps of the bore radius.
        for &v in &h.values {
            assert!((v - 6.0e-6).abs() < 1e-16);
        }
    }

    #[test]
    fn textured_node_gains_exactly_the_dimple_depth() {
        let mesh = table_mesh(120, 80);
        let state = KinematicState::at_rest();
        let plain = film_thickness(&mesh, &state, &TexturePattern::none()).unwrap();
        let pattern = TexturePattern::build(TextureKind::Short, &mesh).unwrap();
        let textured = film_thickness(&mesh, &state, &pattern).unwrap();
        let mut textured_nodes = 0;
        for j in 0..mesh.n_y {
            for i in 0..mesh.n_theta {
                let d = textured.at(i, j) - plain.at(i, j);
                let expect = pattern.depth_at(&mesh, i, j);
                assert_eq!(d, expect);
                if expect > 0.0 {
                    textured_nodes += 1;
                    assert!((textured.at(i, j) - 26.0e-6).abs() < 1e-16);
                }
            }
        }
        assert!(textured_nodes > 0);
    }

    #[test]
    fn full_lateral_displacement_is_contact() {
        let mesh = table_mesh(16, 8);
        let mut state = KinematicState::at_rest();
        state.e = [6.0e-6, 0.0, 6.0e-6, 0.0];
        let err = film_thickness(&mesh, &state, &TexturePattern::none()).unwrap_err();
        assert!(matches!(err, CoreError::NonPositiveThickness { .. }));
    }

    #[test]
    fn gap_is_periodic_in_theta() {
        let mesh = table_mesh(16, 8);
        let mut state = KinematicState::at_rest();
        state.e = [1.0e-6, -2.0e-6, 0.5e-6, 1.5e-6];
        for j in [0.0, 0.4, 1.0] {
            let y = j * mesh.coupling_length;
            let a = gap_at(&mesh, &state, 0.0, y);
            let b = gap_at(&mesh, &state, 2.0 * std::f64::consts::PI, y);
            assert!((a - b).abs() < 1e-20);
        }
    }

    #[test]
    fn rate_vanishes_for_zero_rates() {
        let mesh = table_mesh(16, 8);
        let mut state = KinematicState::at_rest();
        state.e = [1.0e-6, -1.0e-6, 2.0e-6, 0.5e-6];
        let r = film_thickness_rate(&mesh, &state).unwrap();
        assert!(r.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn bottom_rate_matches_axis_velocity() {
        // e rate (v, 0, 0, 0): at theta = 0, y = 0 the gap shrinks at exactly v.
        let mesh = table_mesh(16, 8);
        let mut state = KinematicState::at_rest();
        let v = 2.5e-7;
        state.e_rate = [v, 0.0, 0.0, 0.0];
        let r = film_thickness_rate(&mesh, &state).unwrap();
        assert!((r.at(0, 0) + v).abs() < 1e-20);
    }

    #[test]
    fn rate_matches_finite_difference_of_thickness() {
        let mesh = table_mesh(24, 12);
        let mut state = KinematicState::at_rest();
        state.e = [1.2e-6, -0.8e-6, 2.1e-6, 0.3e-6];
        state.e_rate = [-3.0e-5, 7.0e-5, 1.0e-5, -9.0e-5];
        let rate = film_thickness_rate(&mesh, &state).unwrap();
        // The thickness is computed through a sqrt of magnitude ~1e-2 m, so
        // each sample carries a few 1e-18 of rounding; a small dt would sink
        // the finite difference below that floor. The gap is almost linear in
        // e, so a generous dt keeps truncation negligible too.
        let dt = 3.0e-4;
        let mut fwd = state;
        let mut bwd = state;
        for k in 0..4 {
            fwd.e[k] += dt * state.e_rate[k];
            bwd.e[k] -= dt * state.e_rate[k];
        }
        let hf = film_thickness(&mesh, &fwd, &TexturePattern::none()).unwrap();
        let hb = film_thickness(&mesh, &bwd, &TexturePattern::none()).unwrap();
        let scale = rate.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        for idx in 0..mesh.node_count() {
            let fd = (hf.values[idx] - hb.values[idx]) / (2.0 * dt);
            assert!(
                (rate.values[idx] - fd).abs() <= 1e-7 * scale,
                "node {idx}: {} vs {}",
                rate.values[idx],
                fd
            );
        }
    }

    #[test]
    fn kinematics_match_the_drive_law() {
        let cfg = PumpConfig::default();
        let k0 = shaft_kinematics(&cfg, 0.0);
        assert!((k0.angular_speed - 62.831_853_071_8).abs() < 1e-9);
        assert!((cfg.period() - 0.1).abs() < 1e-15);
        // L_F(0) = L_Fmin + 2 R_b tan(beta)
        assert!((k0.coupling_length - 4.428_248_543_7e-2).abs() < 1e-8);
        assert_eq!(k0.coupling_length_rate, 0.0);
        // minimum engagement at phi = pi
        let half = cfg.period() / 2.0;
        let k_half = shaft_kinematics(&cfg, half);
        assert!((k_half.coupling_length - cfg.min_coupling_length).abs() < 1e-12);
        // constant law ignores the shaft angle
        let mut fixed = cfg.clone();
        fixed.coupling_law = CouplingLengthLaw::Constant;
        let k_fixed = shaft_kinematics(&fixed, 0.321 * half);
        assert_eq!(k_fixed.coupling_length, fixed.min_coupling_length);
        assert_eq!(k_fixed.coupling_length_rate, 0.0);
    }

    #[test]
    fn named_patterns_have_the_published_layouts() {
        let mesh = table_mesh(2000, 1600);
        let short = TexturePattern::build(TextureKind::Short, &mesh).unwrap();
        assert_eq!((short.cells_theta, short.cells_y), (60, 10));
        assert_eq!(short.depth, 20.0e-6);
        let long = TexturePattern::build(TextureKind::Long, &mesh).unwrap();
        assert_eq!((long.cells_theta, long.cells_y), (60, 20));
        assert_eq!(long.depth, 20.0e-6);
        assert!(TexturePattern::build(TextureKind::None, &mesh).unwrap().is_none());
    }

    #[test]
    fn coarse_mesh_cannot_hold_the_pattern() {
        let mesh = table_mesh(60, 10);
        let err = TexturePattern::build(TextureKind::Short, &mesh).unwrap_err();
        assert!(matches!(err, CoreError::MeshTooCoarse { .. }));
    }

    #[test]
    fn mesh_rejects_degenerate_sizes() {
        let cfg = PumpConfig::default();
        assert!(matches!(
            FilmMesh::for_pump(&cfg, 3, 8, 0.03).unwrap_err(),
            CoreError::InvalidMesh { .. }
        ));
        assert!(matches!(
            FilmMesh::for_pump(&cfg, 8, 3, 0.03).unwrap_err(),
            CoreError::InvalidMesh { .. }
        ));
    }

    #[test]
    fn scalar_field_validates_length_and_unit() {
        let mesh = table_mesh(8, 4);
        assert!(ScalarField::new(&mesh, vec![0.0; 31], FieldUnit::Pascal).is_err());
        let f = ScalarField::new(&mesh, vec![0.0; 32], FieldUnit::Pascal).unwrap();
        assert!(f.expect_unit(FieldUnit::Meter, "test").is_err());
        assert!(f.expect_unit(FieldUnit::Pascal, "test").is_ok());
    }

    #[test]
    fn default_config_passes_validation() {
        PumpConfig::default().validate().unwrap();
        let mut bad = PumpConfig::default();
        bad.bore_radius = bad.piston_radius;
        assert!(bad.validate().is_err());
    }
}
