//! Finite-volume discretization of the Reynolds equation into a banded
//! symmetric positive-definite system.
//!
//! The pressure unknowns are the interior mesh rows j = 1..n_y−2; the two
//! axial boundary rows carry Dirichlet pressures and are folded into the
//! source vector. Unknown r = i + (j−1)·n_theta, so rings of constant j are
//! contiguous and circumferential neighbors sit at offset ±1 except across
//! the periodic seam, which is carried by dedicated wrap bands.

use crate::error::{CoreError, Result};
use crate::geometry::{FieldUnit, FilmMesh, ScalarField, MIN_THICKNESS};
use crate::parallel;

/// Dirichlet pressures on the two axial boundaries; the circumferential
/// direction is periodic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryCondition {
    /// Pressure on the y = 0 row (piston bottom, displacement chamber side).
    pub inlet: f64,
    /// Pressure on the y = L_F row (case side).
    pub outlet: f64,
}

impl BoundaryCondition {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("inlet pressure", self.inlet), ("outlet pressure", self.outlet)] {
            if !v.is_finite() || v < 0.0 {
                return Err(CoreError::InvalidParameter {
                    name,
                    value: v,
                    constraint: "must be finite and non-negative",
                });
            }
        }
        Ok(())
    }
}

/// Symmetric banded system A·p = S in diagonal-compressed storage.
///
/// With n = n_theta·n_rings unknowns the seven bands hold, for row
/// r = i + g·n_theta (ring g, circumferential index i):
///
/// * `diag[r]` — main diagonal, strictly positive;
/// * `north[r]` — coupling r ↔ r + n_theta, stored for r < n − n_theta;
/// * `south[k]` — coupling r ↔ r − n_theta, stored at k = r − n_theta
///   (mirror of `north`);
/// * `east[k]` — coupling r ↔ r + 1 within a ring, stored at k = r − g for
///   i < n_theta − 1;
/// * `west[k]` — coupling r ↔ r − 1, stored at k = r − g − 1 for i > 0
///   (mirror of `east`);
/// * `east_wrap[g]` — periodic coupling of row (n_theta − 1, g) to column
///   (0, g), a lower-triangle entry;
/// * `west_wrap[g]` — periodic coupling of row (0, g) to column
///   (n_theta − 1, g), the mirrored upper-triangle entry.
///
/// Off-diagonal entries are non-positive; on rows not touching an axial
/// boundary the entries of a row sum to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct DiaSystem {
    pub n_theta: usize,
    pub n_rings: usize,
    pub diag: Vec<f64>,
    pub north: Vec<f64>,
    pub south: Vec<f64>,
    pub east: Vec<f64>,
    pub west: Vec<f64>,
    pub east_wrap: Vec<f64>,
    pub west_wrap: Vec<f64>,
    pub source: Vec<f64>,
}

impl DiaSystem {
    /// All-zero system with the band lengths implied by the ring layout.
    pub fn zeroed(n_theta: usize, n_rings: usize) -> Self {
        let n = n_theta * n_rings;
        Self {
            n_theta,
            n_rings,
            diag: vec![0.0; n],
            north: vec![0.0; n - n_theta],
            south: vec![0.0; n - n_theta],
            east: vec![0.0; n - n_rings],
            west: vec![0.0; n - n_rings],
            east_wrap: vec![0.0; n_rings],
            west_wrap: vec![0.0; n_rings],
            source: vec![0.0; n],
        }
    }

    /// Unknown count.
    pub fn n(&self) -> usize {
        self.n_theta * self.n_rings
    }

    /// Nodes on each axial boundary of the unknown set (rows without a
    /// stored south/north neighbor).
    pub fn axial_boundary_count(&self) -> usize {
        self.n_theta
    }

    /// Nodes on the periodic seam (rows whose east/west neighbor wraps).
    pub fn seam_count(&self) -> usize {
        self.n_rings
    }

    /// Stored matrix entries across all bands.
    pub fn stored_entries(&self) -> usize {
        self.diag.len()
            + self.north.len()
            + self.south.len()
            + self.east.len()
            + self.west.len()
            + self.east_wrap.len()
            + self.west_wrap.len()
    }

    /// Strict-lower entries (column, value) of row r: west, south and the
    /// seam coupling of the last column in a ring.
    pub fn lower_row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let nt = self.n_theta;
        let (g, i) = (r / nt, r % nt);
        let west = (i > 0).then(|| (r - 1, self.west[r - g - 1]));
        let south = (g > 0).then(|| (r - nt, self.south[r - nt]));
        let wrap = (i == nt - 1).then(|| (r - (nt - 1), self.east_wrap[g]));
        west.into_iter().chain(south).chain(wrap)
    }

    /// Strict-upper entries (column, value) of row r: east, north and the
    /// seam coupling of the first column in a ring.
    pub fn upper_row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let nt = self.n_theta;
        let (g, i) = (r / nt, r % nt);
        let east = (i + 1 < nt).then(|| (r + 1, self.east[r - g]));
        let north = (g + 1 < self.n_rings).then(|| (r + nt, self.north[r]));
        let wrap = (i == 0).then(|| (r + nt - 1, self.west_wrap[g]));
        east.into_iter().chain(north).chain(wrap)
    }

    /// Dense row-major matrix and source copy for small systems.
    pub fn expand_dense(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        const LIMIT: usize = 10_000;
        let n = self.n();
        if n > LIMIT {
            return Err(CoreError::TooLarge { n, limit: LIMIT });
        }
        let nt = self.n_theta;
        let mut a = vec![0.0; n * n];
        for r in 0..n {
            let (g, i) = (r / nt, r % nt);
            a[r * n + r] = self.diag[r];
            if g + 1 < self.n_rings {
                a[r * n + (r + nt)] = self.north[r];
            }
            if g > 0 {
                a[r * n + (r - nt)] = self.south[r - nt];
            }
            if i + 1 < nt {
                a[r * n + (r + 1)] = self.east[r - g];
            }
            if i > 0 {
                a[r * n + (r - 1)] = self.west[r - g - 1];
            }
            if i == nt - 1 {
                a[r * n + (r - (nt - 1))] += self.east_wrap[g];
            }
            if i == 0 {
                a[r * n + (r + nt - 1)] += self.west_wrap[g];
            }
        }
        Ok((a, self.source.clone()))
    }
}

/// Harmonic mean, the face value used for the mobility h³/(12μ): preserves
/// flux continuity across the thickness jumps at texture edges.
fn harmonic(a: f64, b: f64) -> f64 {
    2.0 * a * b / (a + b)
}

/// Reattaches the Dirichlet rows to an interior solution vector, producing
/// the full-mesh nodal pressure field.
pub fn expand_pressure(
    mesh: &FilmMesh,
    interior: &[f64],
    bc: &BoundaryCondition,
) -> Result<ScalarField> {
    if interior.len() != mesh.interior_count() {
        return Err(CoreError::DimensionMismatch {
            context: "expand_pressure",
            expected: mesh.interior_count(),
            got: interior.len(),
        });
    }
    let nt = mesh.n_theta;
    let total = mesh.node_count();
    let mut values = vec![0.0; total];
    values[..nt].fill(bc.inlet);
    values[nt..nt + interior.len()].copy_from_slice(interior);
    values[total - nt..].fill(bc.outlet);
    ScalarField::new(mesh, values, crate::geometry::FieldUnit::Pascal)
}

/// Discretizes ∇·(h³/(12μ)∇p) = (U/2)·∂h/∂x + ∂h/∂t on the unwrapped film
/// with Dirichlet axial boundaries and circumferential periodicity, returning
/// the negated (positive-definite) system.
///
/// `surface_speed` is the circumferential sliding speed U = ω·R_k feeding the
/// wedge term; ∂h/∂x is centrally differenced with periodic wrap.
pub fn assemble(
    mesh: &FilmMesh,
    h: &ScalarField,
    dhdt: &ScalarField,
    surface_speed: f64,
    viscosity: f64,
    bc: &BoundaryCondition,
) -> Result<DiaSystem> {
    if mesh.n_theta < 4 || mesh.n_y < 4 {
        return Err(CoreError::InvalidMesh {
            n_theta: mesh.n_theta,
            n_y: mesh.n_y,
        });
    }
    h.expect_unit(FieldUnit::Meter, "assemble thickness")?;
    dhdt.expect_unit(FieldUnit::MeterPerSecond, "assemble thickness rate")?;
    for (field, ctx) in [(h, "assemble thickness"), (dhdt, "assemble thickness rate")] {
        if field.len() != mesh.node_count() {
            return Err(CoreError::DimensionMismatch {
                context: ctx,
                expected: mesh.node_count(),
                got: field.len(),
            });
        }
    }
    if !(viscosity > 0.0) || !viscosity.is_finite() {
        return Err(CoreError::InvalidParameter {
            name: "viscosity",
            value: viscosity,
            constraint: "must be positive and finite",
        });
    }
    if !surface_speed.is_finite() {
        return Err(CoreError::InvalidParameter {
            name: "surface_speed",
            value: surface_speed,
            constraint: "must be finite",
        });
    }
    bc.validate()?;
    let nt = mesh.n_theta;
    for (idx, &v) in h.values.iter().enumerate() {
        if !(v >= MIN_THICKNESS) {
            return Err(CoreError::NonPositiveThickness {
                i: idx % nt,
                j: idx / nt,
                value: v,
                floor: MIN_THICKNESS,
            });
        }
    }

    let n_rings = mesh.n_y - 2;
    let n = nt * n_rings;
    let dx = mesh.dx();
    let dy = mesh.dy();
    let cx = dy / dx; // face area / distance, circumferential faces
    let cy = dx / dy; // axial faces

    // Nodal mobility k = h³/(12 μ) over the full mesh including boundaries.
    let mut k = vec![0.0; mesh.node_count()];
    parallel::fill(&mut k, |idx| {
        let hv = h.values[idx];
        hv * hv * hv / (12.0 * viscosity)
    });
    // Mesh node index of unknown row r.
    let node = |r: usize| (r % nt) + (r / nt + 1) * nt;

    let mut sys = DiaSystem::zeroed(nt, n_rings);

    // Axial faces between consecutive interior rings (negated coefficients).
    parallel::fill(&mut sys.north, |r| {
        -harmonic(k[node(r)], k[node(r) + nt]) * cy
    });
    sys.south.copy_from_slice(&sys.north);

    // Circumferential faces within a ring, seam excluded.
    parallel::fill(&mut sys.east, |idx| {
        let (g, i) = (idx / (nt - 1), idx % (nt - 1));
        let p = i + (g + 1) * nt;
        -harmonic(k[p], k[p + 1]) * cx
    });
    sys.west.copy_from_slice(&sys.east);

    // Periodic seam faces.
    parallel::fill(&mut sys.east_wrap, |g| {
        let p = (g + 1) * nt;
        -harmonic(k[p + nt - 1], k[p]) * cx
    });
    sys.west_wrap.copy_from_slice(&sys.east_wrap);

    // Faces toward the two Dirichlet rows, used for the diagonal and the
    // source folds but not stored as bands.
    let south_bc: Vec<f64> = (0..nt).map(|i| harmonic(k[nt + i], k[i]) * cy).collect();
    let north_bc: Vec<f64> = (0..nt)
        .map(|i| {
            let top = (mesh.n_y - 1) * nt + i;
            harmonic(k[top - nt], k[top]) * cy
        })
        .collect();

    // Diagonal = −(sum of the four face couplings of the row), assembled from
    // the stored bands so row sums cancel exactly where no boundary is folded.
    {
        let (north, south) = (&sys.north, &sys.south);
        let (east, west) = (&sys.east, &sys.west);
        let (east_wrap, west_wrap) = (&sys.east_wrap, &sys.west_wrap);
        let (south_bc, north_bc) = (&south_bc, &north_bc);
        parallel::fill(&mut sys.diag, |r| {
            let (g, i) = (r / nt, r % nt);
            let a_n = if g + 1 < n_rings { north[r] } else { -north_bc[i] };
            let a_s = if g > 0 { south[r - nt] } else { -south_bc[i] };
            let a_e = if i + 1 < nt { east[r - g] } else { east_wrap[g] };
            let a_w = if i > 0 { west[r - g - 1] } else { west_wrap[g] };
            -(a_n + a_s + a_e + a_w)
        });
    }

    // Source: wedge + squeeze over the cell area, negated with the system,
    // plus the folded Dirichlet terms.
    {
        let (south_bc, north_bc) = (&south_bc, &north_bc);
        let hv = &h.values;
        let area = dx * dy;
        parallel::fill(&mut sys.source, |r| {
            let (g, i) = (r / nt, r % nt);
            let p = node(r);
            let east = if i + 1 < nt { p + 1 } else { p + 1 - nt };
            let west = if i > 0 { p - 1 } else { p + nt - 1 };
            let dhdx = (hv[east] - hv[west]) / (2.0 * dx);
            let mut s = -(0.5 * surface_speed * dhdx + dhdt.values[p]) * area;
            if g == 0 {
                s += south_bc[i] * bc.inlet;
            }
            if g + 1 == n_rings {
                s += north_bc[i] * bc.outlet;
            }
            s
        });
    }
    debug_assert_eq!(sys.n(), n);
    Ok(sys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{film_thickness, film_thickness_rate, KinematicState, PumpConfig, TexturePattern};

    fn dense_matvec(a: &[f64], x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..n)
            .map(|r| (0..n).map(|c| a[r * n + c] * x[c]).sum())
            .collect()
    }

    fn table_mesh(n_theta: usize, n_y: usize) -> FilmMesh {
        let cfg = PumpConfig::default();
        FilmMesh::for_pump(&cfg, n_theta, n_y, cfg.min_coupling_length).unwrap()
    }

    fn assembled(mesh: &FilmMesh, state: &KinematicState, u: f64, bc: &BoundaryCondition) -> DiaSystem {
        let h = film_thickness(mesh, state, &TexturePattern::none()).unwrap();
        let dhdt = film_thickness_rate(mesh, state).unwrap();
        assemble(mesh, &h, &dhdt, u, 0.03, bc).unwrap()
    }

    #[test]
    fn zeroed_with_unit_diagonal_expands_to_identity() {
        let mut sys = DiaSystem::zeroed(4, 2);
        sys.diag.fill(1.0);
        let (a, _) = sys.expand_dense().unwrap();
        for r in 0..8 {
            for c in 0..8 {
                assert_eq!(a[r * 8 + c], if r == c { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn wrap_bands_expand_to_mirrored_positions() {
        let mut sys = DiaSystem::zeroed(4, 2);
        sys.east_wrap[0] = -3.0;
        sys.west_wrap[0] = -3.0;
        let (a, _) = sys.expand_dense().unwrap();
        // Row (i = 3, g = 0) couples to column 0 and vice versa.
        assert_eq!(a[3 * 8], -3.0);
        assert_eq!(a[3], -3.0);
        let asym = (0..8)
            .flat_map(|r| (0..8).map(move |c| (r, c)))
            .map(|(r, c)| (a[r * 8 + c] - a[c * 8 + r]).abs())
            .fold(0.0_f64, f64::max);
        assert_eq!(asym, 0.0);
    }

    #[test]
    fn expansion_guards_against_large_systems() {
        let sys = DiaSystem::zeroed(120, 100);
        assert!(matches!(sys.expand_dense().unwrap_err(), CoreError::TooLarge { .. }));
    }

    #[test]
    fn assembled_matrix_is_exactly_symmetric() {
        let mesh = table_mesh(12, 10);
        let mut state = KinematicState::at_rest();
        state.e = [1.0e-6, -2.0e-6, 2.0e-6, 1.5e-6];
        state.e_rate = [1.0e-5, 0.0, -2.0e-5, 3.0e-5];
        let sys = assembled(&mesh, &state, 0.5, &BoundaryCondition { inlet: 2.0e6, outlet: 0.5e6 });
        let n = sys.n();
        let (a, _) = sys.expand_dense().unwrap();
        for r in 0..n {
            for c in 0..n {
                assert_eq!(a[r * n + c], a[c * n + r], "asymmetry at ({r}, {c})");
            }
        }
        assert_eq!(sys.stored_entries(), 5 * n - 2 * sys.n_theta);
    }

    #[test]
    fn diagonal_positive_offdiagonal_nonpositive_rows_conserve() {
        let mesh = table_mesh(12, 10);
        let mut state = KinematicState::at_rest();
        state.e = [2.0e-6, 1.0e-6, -1.0e-6, 2.0e-6];
        let sys = assembled(&mesh, &state, 0.5, &BoundaryCondition { inlet: 1.0e6, outlet: 0.5e6 });
        assert!(sys.diag.iter().all(|&v| v > 0.0));
        for band in [&sys.north, &sys.south, &sys.east, &sys.west, &sys.east_wrap, &sys.west_wrap] {
            assert!(band.iter().all(|&v| v < 0.0));
        }
        let n = sys.n();
        let (a, _) = sys.expand_dense().unwrap();
        for r in 0..n {
            let g = r / sys.n_theta;
            let sum: f64 = (0..n).map(|c| a[r * n + c]).sum();
            if g > 0 && g + 1 < sys.n_rings {
                assert!(sum.abs() <= 1e-14 * sys.diag[r], "row {r} sum {sum}");
            } else {
                // Boundary-folded rows keep the face coupling toward the
                // Dirichlet row on the diagonal: strict dominance.
                assert!(sum > 0.0, "row {r} sum {sum}");
            }
        }
    }

    #[test]
    fn equal_dirichlet_pressures_give_constant_solution() {
        let mesh = table_mesh(8, 6);
        let state = KinematicState::at_rest();
        let p = 2.5e6;
        let sys = assembled(&mesh, &state, 0.0, &BoundaryCondition { inlet: p, outlet: p });
        let n = sys.n();
        let (a, s) = sys.expand_dense().unwrap();
        let r = dense_matvec(&a, &vec![p; n]);
        for i in 0..n {
            assert!(
                (r[i] - s[i]).abs() <= 1e-12 * s[i].abs().max(sys.diag[i] * p),
                "row {i}: {} vs {}",
                r[i],
                s[i]
            );
        }
    }

    #[test]
    fn unequal_dirichlet_pressures_give_linear_axial_profile() {
        let mesh = table_mesh(8, 9);
        let state = KinematicState::at_rest();
        let bc = BoundaryCondition { inlet: 10.0e6, outlet: 0.5e6 };
        let sys = assembled(&mesh, &state, 0.0, &bc);
        let n = sys.n();
        let (a, s) = sys.expand_dense().unwrap();
        let linear: Vec<f64> = (0..n)
            .map(|r| {
                let j = r / sys.n_theta + 1;
                let t = mesh.y(j) / mesh.coupling_length;
                bc.inlet + (bc.outlet - bc.inlet) * t
            })
            .collect();
        let res = dense_matvec(&a, &linear);
        for i in 0..n {
            let scale = sys.diag[i] * bc.inlet;
            assert!((res[i] - s[i]).abs() <= 1e-12 * scale, "row {i}");
        }
    }

    #[test]
    fn viscosity_scales_band_entries_inversely() {
        let mesh = table_mesh(8, 6);
        let mut state = KinematicState::at_rest();
        state.e = [1.0e-6, 0.5e-6, -0.5e-6, 1.0e-6];
        let h = film_thickness(&mesh, &state, &TexturePattern::none()).unwrap();
        let dhdt = film_thickness_rate(&mesh, &state).unwrap();
        let bc = BoundaryCondition { inlet: 0.0, outlet: 0.0 };
        let base = assemble(&mesh, &h, &dhdt, 0.0, 0.03, &bc).unwrap();
        let scaled = assemble(&mesh, &h, &dhdt, 0.0, 8.0 * 0.03, &bc).unwrap();
        for (b, s) in [
            (&base.diag, &scaled.diag),
            (&base.north, &scaled.north),
            (&base.east, &scaled.east),
            (&base.east_wrap, &scaled.east_wrap),
        ] {
            for (x, y) in b.iter().zip(s.iter()) {
                assert_eq!(*x, 8.0 * *y);
            }
        }
    }

    #[test]
    fn thickness_bump_only_touches_adjacent_rows() {
        let mesh = table_mesh(10, 8);
        let state = KinematicState::at_rest();
        let smooth = film_thickness(&mesh, &state, &TexturePattern::none()).unwrap();
        let mut bumped = smooth.clone();
        let (bi, bj) = (4, 3);
        bumped.values[mesh.node(bi, bj)] += 5.0e-6;
        let dhdt = film_thickness_rate(&mesh, &state).unwrap();
        let bc = BoundaryCondition { inlet: 1.0e6, outlet: 0.5e6 };
        let a = assemble(&mesh, &smooth, &dhdt, 0.5, 0.03, &bc).unwrap();
        let b = assemble(&mesh, &bumped, &dhdt, 0.5, 0.03, &bc).unwrap();
        let n = a.n();
        let (da, _) = a.expand_dense().unwrap();
        let (db, _) = b.expand_dense().unwrap();
        for r in 0..n {
            let changed = (0..n).any(|c| da[r * n + c] != db[r * n + c]);
            let (g, i) = (r / a.n_theta, r % a.n_theta);
            let (j, nt) = (g + 1, mesh.n_theta);
            let di = (i as isize - bi as isize).rem_euclid(nt as isize).min(
                (bi as isize - i as isize).rem_euclid(nt as isize),
            );
            let dj = (j as isize - bj as isize).abs();
            let touches = (di == 0 && dj <= 1) || (di <= 1 && dj == 0);
            assert_eq!(changed, touches, "row {r} (i={i}, j={j})");
        }
    }

    #[test]
    fn squeeze_term_feeds_the_source() {
        let mesh = table_mesh(8, 6);
        let mut state = KinematicState::at_rest();
        state.e_rate = [1.0e-4, 0.0, 1.0e-4, 0.0];
        let h = film_thickness(&mesh, &state, &TexturePattern::none()).unwrap();
        let dhdt = film_thickness_rate(&mesh, &state).unwrap();
        let bc = BoundaryCondition { inlet: 0.0, outlet: 0.0 };
        let sys = assemble(&mesh, &h, &dhdt, 0.0, 0.03, &bc).unwrap();
        let area = mesh.dx() * mesh.dy();
        for r in 0..sys.n() {
            let p = (r % 8) + (r / 8 + 1) * 8;
            assert!((sys.source[r] - (-dhdt.values[p] * area)).abs() <= 1e-25);
        }
    }

    #[test]
    fn bad_inputs_are_rejected() {
        let mesh = table_mesh(8, 6);
        let state = KinematicState::at_rest();
        let h = film_thickness(&mesh, &state, &TexturePattern::none()).unwrap();
        let dhdt = film_thickness_rate(&mesh, &state).unwrap();
        let bc = BoundaryCondition { inlet: 1.0e6, outlet: 0.5e6 };
        // Wrong unit order.
        assert!(matches!(
            assemble(&mesh, &dhdt, &h, 0.5, 0.03, &bc).unwrap_err(),
            CoreError::UnitMismatch { .. }
        ));
        // Non-positive viscosity.
        assert!(assemble(&mesh, &h, &dhdt, 0.5, 0.0, &bc).is_err());
        // Negative boundary pressure.
        let bad_bc = BoundaryCondition { inlet: -1.0, outlet: 0.5e6 };
        assert!(assemble(&mesh, &h, &dhdt, 0.5, 0.03, &bad_bc).is_err());
        // Thickness below the contact floor.
        let mut thin = h.clone();
        thin.values[10] = 1.0e-8;
        assert!(matches!(
            assemble(&mesh, &thin, &dhdt, 0.5, 0.03, &bc).unwrap_err(),
            CoreError::NonPositiveThickness { .. }
        ));
    }
}
