//! Force and moment integration over the film, plus the external and
//! inertial load models, composed into the four-component generalized force
//! that the motion solver drives to zero.
//!
//! Frame conventions: x̂ and ŷ span the transverse plane (x̂ radially outward
//! from the barrel axis through this piston, fixed in the rotating barrel
//! frame), ẑ runs along the piston axis from the bottom (y = 0, chamber side)
//! toward the slipper. Moments are taken about the piston bottom center. The
//! generalized components (F1, F2) are the transverse resultants applied at
//! y = 0 and (F3, F4) the pair at y = L_F, conjugate to (e1..e4).

use crate::error::{CoreError, Result};
use crate::geometry::{FieldUnit, FilmMesh, PumpConfig, ScalarField};
use crate::parallel;

/// Force (N) and moment (N·m, about the piston bottom center) triples.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Wrench {
    pub force: [f64; 3],
    pub moment: [f64; 3],
}

impl Wrench {
    pub fn add(&self, other: &Wrench) -> Wrench {
        let mut out = *self;
        for k in 0..3 {
            out.force[k] += other.force[k];
            out.moment[k] += other.moment[k];
        }
        out
    }
}

/// Oil-film wrench split into its normal-pressure and viscous-shear parts.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WrenchBreakdown {
    pub pressure: Wrench,
    pub shear: Wrench,
}

impl WrenchBreakdown {
    pub fn total(&self) -> Wrench {
        self.pressure.add(&self.shear)
    }
}

/// Which load a generalized force describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForceKind {
    External,
    Inertial,
    Oil,
    Total,
}

/// Four-component generalized force conjugate to (e1, e2, e3, e4):
/// transverse newtons applied at the piston bottom (components 1, 2) and at
/// y = L_F (components 3, 4).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralForce {
    pub f: [f64; 4],
    pub kind: ForceKind,
}

impl GeneralForce {
    pub fn zero(kind: ForceKind) -> Self {
        Self { f: [0.0; 4], kind }
    }

    /// Componentwise sum of the three load contributions.
    pub fn total(external: &GeneralForce, inertial: &GeneralForce, oil: &GeneralForce) -> Self {
        let mut f = [0.0; 4];
        for k in 0..4 {
            f[k] = external.f[k] + inertial.f[k] + oil.f[k];
        }
        Self { f, kind: ForceKind::Total }
    }

    pub fn norm(&self) -> f64 {
        self.f.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Integrates the pressure and shear tractions over the film by midpoint
/// quadrature on the n_theta × (n_y − 1) cells between nodes (periodic
/// across the circumferential seam).
///
/// The piston-wall tractions follow lubrication theory: circumferential
/// shear τ_θ = μU/h + (h/2)·(1/R_k)·∂p/∂θ and axial shear τ_y = (h/2)·∂p/∂y;
/// the pressure acts along the inward radial normal (−cosθ, −sinθ, 0).
pub fn oil_wrench(
    mesh: &FilmMesh,
    p: &ScalarField,
    h: &ScalarField,
    surface_speed: f64,
    viscosity: f64,
) -> Result<WrenchBreakdown> {
    p.expect_unit(FieldUnit::Pascal, "oil_wrench pressure")?;
    h.expect_unit(FieldUnit::Meter, "oil_wrench thickness")?;
    for (field, ctx) in [(p, "oil_wrench pressure"), (h, "oil_wrench thickness")] {
        if field.len() != mesh.node_count() {
            return Err(CoreError::DimensionMismatch {
                context: ctx,
                expected: mesh.node_count(),
                got: field.len(),
            });
        }
    }
    let nt = mesh.n_theta;
    let cells = nt * (mesh.n_y - 1);
    let d_theta = mesh.d_theta();
    let (dx, dy) = (mesh.dx(), mesh.dy());
    let area = dx * dy;
    let rk = mesh.piston_radius;
    let (pv, hv) = (&p.values, &h.values);

    // One fused pass: pressure part (F_x, F_y, M_x, M_y) and shear part
    // (F_x, F_y, F_z, M_x, M_y, M_z). Pressure has no axial component on the
    // lateral film surface and no moment about the axis.
    let sums = parallel::sum_terms::<10>(cells, |c| {
        let (i, j) = (c % nt, c / nt);
        let ie = if i + 1 < nt { i + 1 } else { 0 };
        let (n00, n10) = (mesh.node(i, j), mesh.node(ie, j));
        let (n01, n11) = (mesh.node(i, j + 1), mesh.node(ie, j + 1));
        let pc = 0.25 * (pv[n00] + pv[n10] + pv[n01] + pv[n11]);
        let hc = 0.25 * (hv[n00] + hv[n10] + hv[n01] + hv[n11]);
        let dp_dtheta = ((pv[n10] + pv[n11]) - (pv[n00] + pv[n01])) / (2.0 * d_theta);
        let dp_dyy = ((pv[n01] + pv[n11]) - (pv[n00] + pv[n10])) / (2.0 * dy);
        let theta = (i as f64 + 0.5) * d_theta;
        let y = (j as f64 + 0.5) * dy;
        let (sin_t, cos_t) = theta.sin_cos();

        let tau_theta = viscosity * surface_speed / hc + 0.5 * hc * dp_dtheta / rk;
        let tau_y = 0.5 * hc * dp_dyy;

        [
            // Pressure part.
            -pc * cos_t * area,
            -pc * sin_t * area,
            pc * y * sin_t * area,
            -pc * y * cos_t * area,
            // Shear part.
            -tau_theta * sin_t * area,
            tau_theta * cos_t * area,
            tau_y * area,
            (rk * sin_t * tau_y - y * cos_t * tau_theta) * area,
            (-y * sin_t * tau_theta - rk * cos_t * tau_y) * area,
            rk * tau_theta * area,
        ]
    });
    Ok(WrenchBreakdown {
        pressure: Wrench {
            force: [sums[0], sums[1], 0.0],
            moment: [sums[2], sums[3], 0.0],
        },
        shear: Wrench {
            force: [sums[4], sums[5], sums[6]],
            moment: [sums[7], sums[8], sums[9]],
        },
    })
}

/// Projects the lateral part of an oil wrench onto the four generalized
/// coordinates by static two-point equivalence: the y = L_F pair carries the
/// transverse moment (F3 = M_y/L_F, F4 = −M_x/L_F) and the y = 0 pair the
/// force remainder.
pub fn general_oil_force(wrench: &WrenchBreakdown, coupling_length: f64) -> GeneralForce {
    let total = wrench.total();
    let f3 = total.moment[1] / coupling_length;
    let f4 = -total.moment[0] / coupling_length;
    GeneralForce {
        f: [total.force[0] - f3, total.force[1] - f4, f3, f4],
        kind: ForceKind::Oil,
    }
}

/// Transverse swashplate reaction to the axial pressure thrust: magnitude
/// p_in·π·R_k²·tanβ, applied at the slipper end, rotating with −φ in the
/// barrel frame (direction (−cosφ, sinφ)).
pub fn external_force(config: &PumpConfig, t: f64, inlet_pressure: f64) -> GeneralForce {
    let phi = config.angular_speed() * t;
    let thrust = inlet_pressure
        * std::f64::consts::PI
        * config.piston_radius
        * config.piston_radius
        * config.swashplate_angle.tan();
    GeneralForce {
        f: [0.0, 0.0, -thrust * phi.cos(), thrust * phi.sin()],
        kind: ForceKind::External,
    }
}

/// Centrifugal load (m_k + m_G)·ω²·R_b along +x̂, constant in the barrel
/// frame and shared evenly between the two support stations. The axial
/// stroke acceleration is purely axial and has no transverse component.
pub fn inertial_force(config: &PumpConfig, _t: f64) -> GeneralForce {
    let omega = config.angular_speed();
    let centrifugal =
        (config.piston_mass + config.slipper_mass) * omega * omega * config.pitch_radius;
    GeneralForce {
        f: [0.5 * centrifugal, 0.0, 0.5 * centrifugal, 0.0],
        kind: ForceKind::Inertial,
    }
}

/// Copy of `p` with values clamped below at `floor` (Pa); the optional
/// cavitation gate applied just before force integration.
pub fn floor_pressure(p: &ScalarField, floor: f64) -> ScalarField {
    let mut out = p.clone();
    for v in &mut out.values {
        if *v < floor {
            *v = floor;
        }
    }
    out
}
