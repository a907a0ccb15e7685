//! Gas-phase combustion solver.
//!
//! One call to [`fire_step`] advances velocity and the reaction coordinate
//! `Y` by a single time step using operator splitting: semi-Lagrangian
//! advection, reaction, body forces, pressure projection and fuel sourcing.

mod projection;

pub use projection::{divergence_max, project, ProjectionStats};

use rayon::prelude::*;
use thiserror::Error;

use crate::charring::{CharParams, CharState};
use crate::grid::{Field, GridSpec, Lerp, ScalarField, Vec3, VectorField};
use crate::material::SolidProps;

#[derive(Debug, Error, PartialEq)]
pub enum FireError {
    #[error("ignition voxel {0:?} is outside the grid")]
    OutOfBounds([i64; 3]),
    #[error("invalid simulation parameter: {0}")]
    Param(String),
}

/// Gas-phase tunables.
#[derive(Debug, Clone, PartialEq)]
pub struct SimParams {
    /// Time step, s.
    pub dt: f32,
    /// Reaction rate, 1/s.
    pub k: f32,
    /// Buoyancy coefficient, m/s² per K.
    pub alpha: f32,
    /// Ambient gas temperature, K.
    pub t_air: f32,
    /// Peak flame temperature, K.
    pub t_max: f32,
    /// Vorticity confinement strength.
    pub eps_vort: f32,
    /// Uniform body acceleration, m/s².
    pub wind: Vec3,
    /// Gas density, kg/m³.
    pub rho: f32,
    pub projection_iters: usize,
    pub projection_tol: f32,
    /// Over-relaxation factor for the pressure sweeps; `None` picks the
    /// optimal factor for the grid size. `Some(1.0)` is plain Gauss–Seidel.
    pub projection_omega: Option<f32>,
    /// Coefficients `[c0, c1, c2]` of `q(Y) = c0 + c1·Y + c2·Y²`.
    pub temperature_curve: [f32; 3],
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            dt: 1.0 / 30.0,
            k: 1.5,
            alpha: 0.002,
            t_air: 300.0,
            t_max: 1800.0,
            eps_vort: 0.5,
            wind: Vec3::zeros(),
            rho: 1.0,
            projection_iters: 60,
            projection_tol: 1e-4,
            projection_omega: None,
            temperature_curve: [0.0, 4.0, -4.0],
        }
    }
}

impl SimParams {
    pub fn validate(&self) -> Result<(), FireError> {
        let bad = |m: &str| Err(FireError::Param(m.to_string()));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt must be positive");
        }
        if !(self.k >= 0.0) {
            return bad("k must be non-negative");
        }
        if !(self.rho > 0.0) {
            return bad("rho must be positive");
        }
        if !(self.t_max > self.t_air) {
            return bad("t_max must exceed t_air");
        }
        if self.projection_iters == 0 {
            return bad("projection_iters must be at least 1");
        }
        if let Some(w) = self.projection_omega {
            if !(w > 0.0 && w < 2.0) {
                return bad("projection_omega must lie in (0, 2)");
            }
        }
        let finite = [self.alpha, self.eps_vort, self.projection_tol]
            .iter()
            .chain(self.wind.iter())
            .chain(self.temperature_curve.iter())
            .all(|v| v.is_finite());
        if !finite {
            return bad("non-finite parameter");
        }
        Ok(())
    }

    /// Gas temperature for reaction coordinate `y`. Unreacted air is ambient.
    #[inline]
    pub fn temperature(&self, y: f32) -> f32 {
        if y <= 0.0 {
            return self.t_air;
        }
        let [c0, c1, c2] = self.temperature_curve;
        let q = c0 + y * (c1 + y * c2);
        self.t_air + (self.t_max - self.t_air) * q
    }
}

/// Evolving gas-phase fields.
#[derive(Debug, Clone, PartialEq)]
pub struct FireState {
    pub u: VectorField,
    pub y: ScalarField,
    /// Pressure from the last projection; reused as the initial guess.
    pub p: ScalarField,
}

impl FireState {
    pub fn new(spec: GridSpec) -> Self {
        Self {
            u: VectorField::zeros(spec),
            y: ScalarField::zeros(spec),
            p: ScalarField::zeros(spec),
        }
    }

    pub fn spec(&self) -> &GridSpec {
        self.y.spec()
    }
}

/// Semi-Lagrangian transport of `field` through `u` over `dt`.
pub fn advect<T: Lerp + Send + Sync>(field: &Field<T>, u: &VectorField, dt: f32) -> Field<T> {
    let spec = *field.spec();
    assert_eq!(&spec, u.spec(), "advect: mismatched grids");
    let [nx, ny, _] = spec.dims();
    let scale = dt / spec.spacing();
    let vel = u.values();
    let mut out = field.values().to_vec();
    out.par_chunks_mut(nx * ny).enumerate().for_each(|(k, slab)| {
        for j in 0..ny {
            for i in 0..nx {
                let idx = i + nx * (j + ny * k);
                let back = Vec3::new(i as f32, j as f32, k as f32) - vel[idx] * scale;
                slab[i + nx * j] = field.sample_grid(&back);
            }
        }
    });
    Field::from_values(spec, out).expect("same length")
}

pub fn temperature_from_y(y: &ScalarField, params: &SimParams) -> ScalarField {
    let values = y.values().iter().map(|&v| params.temperature(v)).collect();
    ScalarField::from_values(*y.spec(), values).expect("same length")
}

#[inline]
fn axis_neighbors(c: usize, n: usize) -> (usize, usize) {
    (c.saturating_sub(1), (c + 1).min(n - 1))
}

/// Central-difference curl; one-sided at the domain faces.
pub fn curl(u: &VectorField) -> VectorField {
    let spec = *u.spec();
    let [nx, ny, nz] = spec.dims();
    let h = spec.spacing();
    let v = u.values();
    let mut out = vec![Vec3::zeros(); spec.cell_count()];
    out.par_chunks_mut(nx * ny).enumerate().for_each(|(k, slab)| {
        let (km, kp) = axis_neighbors(k, nz);
        let dz = (kp - km) as f32 * h;
        for j in 0..ny {
            let (jm, jp) = axis_neighbors(j, ny);
            let dy = (jp - jm) as f32 * h;
            for i in 0..nx {
                let (im, ip) = axis_neighbors(i, nx);
                let dx = (ip - im) as f32 * h;
                let at = |i: usize, j: usize, k: usize| v[i + nx * (j + ny * k)];
                let ddx = (at(ip, j, k) - at(im, j, k)) / dx;
                let ddy = (at(i, jp, k) - at(i, jm, k)) / dy;
                let ddz = (at(i, j, kp) - at(i, j, km)) / dz;
                slab[i + nx * j] = Vec3::new(ddy.z - ddz.y, ddz.x - ddx.z, ddx.y - ddy.x);
            }
        }
    });
    VectorField::from_values(spec, out).expect("same length")
}

/// Vorticity confinement force `eps·h·(N × ω)` with `N = ∇|ω| / (|∇|ω|| + 1e-10)`.
///
/// Gradients of |ω| below `1e-4·max|ω|/h` over the stencil are rounding
/// noise and give `N = 0`.
pub fn vorticity_confinement(u: &VectorField, eps: f32) -> VectorField {
    let spec = *u.spec();
    if eps == 0.0 {
        return VectorField::zeros(spec);
    }
    let [nx, ny, nz] = spec.dims();
    let h = spec.spacing();
    let omega = curl(u);
    let w = omega.values();
    let mag: Vec<f32> = w.iter().map(|o| o.norm()).collect();
    let mut out = vec![Vec3::zeros(); spec.cell_count()];
    out.par_chunks_mut(nx * ny).enumerate().for_each(|(k, slab)| {
        let (km, kp) = axis_neighbors(k, nz);
        for j in 0..ny {
            let (jm, jp) = axis_neighbors(j, ny);
            for i in 0..nx {
                let (im, ip) = axis_neighbors(i, nx);
                let at = |i: usize, j: usize, k: usize| mag[i + nx * (j + ny * k)];
                let grad = Vec3::new(
                    (at(ip, j, k) - at(im, j, k)) / ((ip - im) as f32 * h),
                    (at(i, jp, k) - at(i, jm, k)) / ((jp - jm) as f32 * h),
                    (at(i, j, kp) - at(i, j, km)) / ((kp - km) as f32 * h),
                );
                let local = [at(ip, j, k), at(im, j, k), at(i, jp, k), at(i, jm, k), at(i, j, kp), at(i, j, km)]
                    .into_iter()
                    .fold(0.0, f32::max);
                let g = grad.norm();
                if g * h <= NOISE_FLOOR * local {
                    continue;
                }
                let n = grad / (g + 1e-10);
                slab[i + nx * j] = n.cross(&w[i + nx * (j + ny * k)]) * (eps * h);
            }
        }
    });
    VectorField::from_values(spec, out).expect("same length")
}

const NOISE_FLOOR: f32 = 1e-4;

/// Adds buoyancy, vorticity confinement and wind, integrated over `dt`.
/// Solid cells receive no force.
pub fn apply_forces(
    u: &VectorField,
    y: &ScalarField,
    solids: &SolidProps,
    params: &SimParams,
    dt: f32,
) -> VectorField {
    let spec = *u.spec();
    let f_vor = vorticity_confinement(u, params.eps_vort);
    let occ = &solids.occupancy;
    let yv = y.values();
    let out: Vec<Vec3> = u
        .values()
        .par_iter()
        .zip(f_vor.values().par_iter())
        .enumerate()
        .map(|(idx, (&vel, &fv))| {
            if occ.is_occupied(idx) {
                return vel;
            }
            let t = params.temperature(yv[idx]);
            let buoy = Vec3::new(0.0, 0.0, params.alpha * (t - params.t_air));
            vel + (buoy + fv + params.wind) * dt
        })
        .collect();
    VectorField::from_values(spec, out).expect("same length")
}

/// `Y ← max(Y − k·dt, 0)`.
pub fn react(y: &ScalarField, k: f32, dt: f32) -> ScalarField {
    let d = k * dt;
    let values = y.values().iter().map(|&v| (v - d).max(0.0)).collect();
    ScalarField::from_values(*y.spec(), values).expect("same length")
}

const FACE_OFFSETS: [[i64; 3]; 6] =
    [[-1, 0, 0], [1, 0, 0], [0, -1, 0], [0, 1, 0], [0, 0, -1], [0, 0, 1]];

/// Face-adjacent in-grid neighbors of a cell.
pub(crate) fn face_neighbors(spec: &GridSpec, c: [usize; 3]) -> impl Iterator<Item = usize> + '_ {
    FACE_OFFSETS.iter().filter_map(move |o| {
        let n = [c[0] as i64 + o[0], c[1] as i64 + o[1], c[2] as i64 + o[2]];
        spec.contains_cell(n)
            .then(|| spec.index(n[0] as usize, n[1] as usize, n[2] as usize))
    })
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IgnitionReport {
    pub ignited: Vec<[usize; 3]>,
    /// Requests on cells that are not combustible.
    pub skipped: Vec<[usize; 3]>,
}

/// Ignites the requested solid voxels: each combustible one is set to
/// `T_burn` and its air neighbors receive `Y = 1`.
pub fn ignite(
    fire: &mut FireState,
    char_state: &mut CharState,
    solids: &SolidProps,
    voxels: &[[i64; 3]],
    params: &CharParams,
) -> Result<IgnitionReport, FireError> {
    let spec = *fire.spec();
    let mut report = IgnitionReport::default();
    let cells: Vec<[usize; 3]> = voxels
        .iter()
        .map(|v| {
            if spec.contains_cell(*v) {
                Ok([v[0] as usize, v[1] as usize, v[2] as usize])
            } else {
                Err(FireError::OutOfBounds(*v))
            }
        })
        .collect::<Result<_, _>>()?;
    let occ = &solids.occupancy;
    for c in cells {
        let idx = spec.index(c[0], c[1], c[2]);
        if !occ.is_combustible(idx) {
            report.skipped.push(c);
            continue;
        }
        char_state.t_m.values_mut()[idx] = params.t_burn;
        for n in face_neighbors(&spec, c) {
            if !occ.is_occupied(n) {
                fire.y.values_mut()[n] = 1.0;
            }
        }
        report.ignited.push(c);
    }
    Ok(report)
}

/// Keeps flames alive over burning solids: every air cell touching a
/// combustible cell at or above its ignition temperature that is not yet
/// fully charred is reset to `Y = 1`.
pub fn source_fuel(fire: &mut FireState, char_state: &CharState, solids: &SolidProps) {
    let spec = *fire.spec();
    let occ = &solids.occupancy;
    let tm = char_state.t_m.values();
    let mc = char_state.m_c.values();
    let y = fire.y.values_mut();
    for idx in 0..spec.cell_count() {
        if !occ.is_combustible(idx) || tm[idx] < solids.t_ign[idx] || mc[idx] >= 1.0 {
            continue;
        }
        for n in face_neighbors(&spec, spec.coords(idx)) {
            if !occ.is_occupied(n) {
                y[n] = 1.0;
            }
        }
    }
}

/// Per-step gas-phase diagnostics.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepDiagnostics {
    pub max_divergence: f32,
    pub projection_residual: f32,
    pub projection_iters: usize,
    pub max_speed: f32,
    pub total_y: f64,
}

fn zero_solids(fire: &mut FireState, solids: &SolidProps) {
    let occ = &solids.occupancy;
    let (u, y) = (fire.u.values_mut(), fire.y.values_mut());
    for idx in 0..u.len() {
        if occ.is_occupied(idx) {
            u[idx] = Vec3::zeros();
            y[idx] = 0.0;
        }
    }
}

/// Advances the gas phase by `params.dt`.
pub fn fire_step(
    fire: &mut FireState,
    char_state: &CharState,
    solids: &SolidProps,
    params: &SimParams,
) -> StepDiagnostics {
    let dt = params.dt;
    let u_adv = advect(&fire.u, &fire.u, dt);
    let y_adv = advect(&fire.y, &fire.u, dt);
    // Freshly sourced fuel sits at ambient temperature under the default
    // curve, so buoyancy is evaluated on the reacted field.
    fire.y = react(&y_adv, params.k, dt);
    fire.u = apply_forces(&u_adv, &fire.y, solids, params, dt);
    zero_solids(fire, solids);
    let stats = project(&mut fire.u, &mut fire.p, &solids.occupancy, params);
    source_fuel(fire, char_state, solids);
    for v in fire.y.values_mut() {
        *v = v.clamp(0.0, 1.0);
    }
    zero_solids(fire, solids);
    StepDiagnostics {
        max_divergence: stats.max_divergence_after,
        projection_residual: stats.relative_residual,
        projection_iters: stats.iterations,
        max_speed: fire.u.max_norm(),
        total_y: fire.y.sum(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::{Material, MaterialTable};
    use crate::occupancy::OccupancyGrid;

    fn spec(n: usize) -> GridSpec {
        GridSpec::new([n, n, n], Vec3::zeros(), 0.1).unwrap()
    }

    fn air(spec: GridSpec) -> SolidProps {
        SolidProps::new(OccupancyGrid::empty(spec), &MaterialTable::new(), &CharParams::default())
    }

    fn with_solids(spec: GridSpec, cells: &[([usize; 3], bool)]) -> SolidProps {
        let mut occ = OccupancyGrid::empty(spec);
        let mut t = MaterialTable::new();
        t.insert(0, Material::inert("metal"));
        t.insert(1, Material { burnable: true, ..Material::inert("wood") });
        for &(c, burn) in cells {
            occ.set_solid(spec.index(c[0], c[1], c[2]), burn as u32, burn);
        }
        SolidProps::new(occ, &t, &CharParams::default())
    }

    #[test]
    fn zero_velocity_advection_is_identity() {
        let s = spec(6);
        let f = ScalarField::from_fn(s, |i, j, k| (i * 7 + j * 3 + k) as f32 * 0.1);
        assert_eq!(advect(&f, &VectorField::zeros(s), 0.5), f);
    }

    #[test]
    fn advection_shifts_by_one_cell() {
        let s = spec(8);
        let dt = 0.25;
        let u = VectorField::filled(s, Vec3::new(s.spacing() / dt, 0.0, 0.0));
        let mut f = ScalarField::zeros(s);
        f.set(3, 4, 4, 5.0);
        let g = advect(&f, &u, dt);
        assert_eq!(g.get(4, 4, 4), 5.0);
        assert_eq!(g.get(3, 4, 4), 0.0);
        let peak = g.values().iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        assert_eq!(s.coords(peak), [4, 4, 4]);
    }

    #[test]
    fn temperature_curve_defaults() {
        let p = SimParams::default();
        assert_eq!(p.temperature(0.0), p.t_air);
        assert!((p.temperature(0.5) - p.t_max).abs() < 1e-3);
        assert!((p.temperature(1.0) - p.t_air).abs() < 1e-3);
    }

    #[test]
    fn forces_vanish_for_still_cold_gas() {
        let s = spec(6);
        let u = VectorField::zeros(s);
        let out = apply_forces(&u, &ScalarField::zeros(s), &air(s), &SimParams::default(), 0.1);
        assert_eq!(out, u);
    }

    #[test]
    fn buoyancy_pointwise() {
        let s = spec(6);
        let mut y = ScalarField::zeros(s);
        y.set(2, 2, 2, 0.5);
        let p = SimParams { eps_vort: 0.0, ..SimParams::default() };
        let dt = 0.05;
        let out = apply_forces(&VectorField::zeros(s), &y, &air(s), &p, dt);
        let du = out.get(2, 2, 2);
        let expect = p.alpha * (p.t_max - p.t_air) * dt;
        assert!((du.z - expect).abs() < 1e-6 * expect.max(1.0));
        assert_eq!(du.x, 0.0);
        assert_eq!(out.get(1, 2, 2), Vec3::zeros());
    }

    #[test]
    fn forces_skip_solids() {
        let s = spec(6);
        let solids = with_solids(s, &[([2, 2, 2], true)]);
        let y = ScalarField::filled(s, 0.5);
        let out = apply_forces(&VectorField::zeros(s), &y, &solids, &SimParams::default(), 0.1);
        assert_eq!(out.get(2, 2, 2), Vec3::zeros());
        assert!(out.get(3, 2, 2).z > 0.0);
    }

    #[test]
    fn rigid_rotation_has_no_confinement_force() {
        let s = spec(8);
        let c = Vec3::repeat(0.4);
        let omega = Vec3::new(0.0, 0.0, 2.0);
        let u = VectorField::from_fn(s, |i, j, k| omega.cross(&(s.center(i, j, k) - c)));
        let w = curl(&u);
        for v in w.values() {
            assert!((v - omega * 2.0).norm() < 1e-4);
        }
        let f = vorticity_confinement(&u, 1.0);
        assert!(f.max_norm() < 1e-4);
    }

    #[test]
    fn confinement_matches_bruteforce_stencil() {
        // independent f64 evaluation of the same discrete formula
        let s = spec(7);
        let h = s.spacing() as f64;
        let vel = |i: usize, j: usize, k: usize| -> [f64; 3] {
            let (x, y, z) = (i as f64 - 3.0, j as f64 - 3.0, k as f64 - 3.0);
            let g = (-(x * x + y * y + z * z) / 6.0).exp();
            [-y * g, x * g, 0.3 * x * z * g]
        };
        let u = VectorField::from_fn(s, |i, j, k| {
            let v = vel(i, j, k);
            Vec3::new(v[0] as f32, v[1] as f32, v[2] as f32)
        });
        let n = 7i64;
        let cl = |a: i64| a.clamp(0, n - 1) as usize;
        let d = |c: i64| (cl(c + 1) - cl(c - 1)) as f64 * h;
        let omega = |i: i64, j: i64, k: i64| -> [f64; 3] {
            let ddx: Vec<f64> = (0..3).map(|a| (vel(cl(i + 1), j as usize, k as usize)[a] - vel(cl(i - 1), j as usize, k as usize)[a]) / d(i)).collect();
            let ddy: Vec<f64> = (0..3).map(|a| (vel(i as usize, cl(j + 1), k as usize)[a] - vel(i as usize, cl(j - 1), k as usize)[a]) / d(j)).collect();
            let ddz: Vec<f64> = (0..3).map(|a| (vel(i as usize, j as usize, cl(k + 1))[a] - vel(i as usize, j as usize, cl(k - 1))[a]) / d(k)).collect();
            [ddy[2] - ddz[1], ddz[0] - ddx[2], ddx[1] - ddy[0]]
        };
        let mag = |i: i64, j: i64, k: i64| {
            let w = omega(cl(i) as i64, cl(j) as i64, cl(k) as i64);
            (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt()
        };
        let eps = 0.8;
        let f = vorticity_confinement(&u, eps as f32);
        for (i, j, k) in [(3i64, 3i64, 3i64), (2, 4, 3), (1, 1, 5), (0, 3, 6), (5, 2, 2)] {
            let g = [
                (mag(i + 1, j, k) - mag(i - 1, j, k)) / d(i),
                (mag(i, j + 1, k) - mag(i, j - 1, k)) / d(j),
                (mag(i, j, k + 1) - mag(i, j, k - 1)) / d(k),
            ];
            let local = [mag(i + 1, j, k), mag(i - 1, j, k), mag(i, j + 1, k), mag(i, j - 1, k), mag(i, j, k + 1), mag(i, j, k - 1)]
                .into_iter()
                .fold(0.0, f64::max);
            let gnorm = (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt();
            let gn = gnorm + 1e-10;
            let nv = if gnorm * h <= 1e-4 * local { [0.0; 3] } else { [g[0] / gn, g[1] / gn, g[2] / gn] };
            let w = omega(i, j, k);
            let expect = [
                eps * h * (nv[1] * w[2] - nv[2] * w[1]),
                eps * h * (nv[2] * w[0] - nv[0] * w[2]),
                eps * h * (nv[0] * w[1] - nv[1] * w[0]),
            ];
            let got = f.get(i as usize, j as usize, k as usize);
            let em = (expect[0].powi(2) + expect[1].powi(2) + expect[2].powi(2)).sqrt();
            assert!(((got.norm() as f64) - em).abs() <= 1e-4 * em.max(1e-3), "at {i},{j},{k}: {got:?} vs {expect:?}");
        }
    }

    #[test]
    fn react_cases() {
        let s = spec(3);
        let y = ScalarField::from_fn(s, |i, _, _| [1.0, 0.05, 0.0][i]);
        let r = react(&y, 1.0, 0.1);
        assert!((r.get(0, 0, 0) - 0.9).abs() < 1e-7);
        assert_eq!(r.get(1, 0, 0), 0.0);
        assert_eq!(r.get(2, 0, 0), 0.0);
        assert_eq!(react(&y, 0.0, 0.1), y);
    }

    #[test]
    fn ignite_combustible_writes_neighbors() {
        let s = spec(6);
        let solids = with_solids(s, &[([2, 2, 2], true), ([2, 2, 3], true)]);
        let cp = CharParams::default();
        let mut fire = FireState::new(s);
        let mut ch = CharState::new(s, &cp);
        let r = ignite(&mut fire, &mut ch, &solids, &[[2, 2, 2]], &cp).unwrap();
        assert_eq!(r.ignited, vec![[2, 2, 2]]);
        assert_eq!(ch.t_m.get(2, 2, 2), cp.t_burn);
        for c in [[1, 2, 2], [3, 2, 2], [2, 1, 2], [2, 3, 2], [2, 2, 1]] {
            assert_eq!(fire.y.get(c[0], c[1], c[2]), 1.0);
        }
        // solid neighbor gets no Y
        assert_eq!(fire.y.get(2, 2, 3), 0.0);
        assert_eq!(fire.y.sum(), 5.0);
    }

    #[test]
    fn ignite_inert_is_skipped() {
        let s = spec(6);
        let solids = with_solids(s, &[([2, 2, 2], false)]);
        let cp = CharParams::default();
        let mut fire = FireState::new(s);
        let mut ch = CharState::new(s, &cp);
        let before = (fire.clone(), ch.clone());
        let r = ignite(&mut fire, &mut ch, &solids, &[[2, 2, 2]], &cp).unwrap();
        assert_eq!(r.skipped, vec![[2, 2, 2]]);
        assert_eq!((fire, ch), before);
    }

    #[test]
    fn ignite_buried_voxel_sets_only_temperature() {
        let s = spec(5);
        let mut cells = vec![([2, 2, 2], true)];
        for c in [[1, 2, 2], [3, 2, 2], [2, 1, 2], [2, 3, 2], [2, 2, 1], [2, 2, 3]] {
            cells.push((c, false));
        }
        let solids = with_solids(s, &cells);
        let cp = CharParams::default();
        let mut fire = FireState::new(s);
        let mut ch = CharState::new(s, &cp);
        ignite(&mut fire, &mut ch, &solids, &[[2, 2, 2]], &cp).unwrap();
        assert_eq!(ch.t_m.get(2, 2, 2), cp.t_burn);
        assert_eq!(fire.y.sum(), 0.0);
    }

    #[test]
    fn ignite_out_of_bounds() {
        let s = spec(4);
        let solids = air(s);
        let cp = CharParams::default();
        let mut fire = FireState::new(s);
        let mut ch = CharState::new(s, &cp);
        assert_eq!(
            ignite(&mut fire, &mut ch, &solids, &[[4, 0, 0]], &cp),
            Err(FireError::OutOfBounds([4, 0, 0]))
        );
        assert!(ignite(&mut fire, &mut ch, &solids, &[[-1, 0, 0]], &cp).is_err());
    }

    #[test]
    fn source_fuel_rules() {
        let s = spec(5);
        // burning cell against the lower x face: a single air neighbor at x=1
        let mut cells = vec![([0, 2, 2], true)];
        for c in [[0, 1, 2], [0, 3, 2], [0, 2, 1], [0, 2, 3]] {
            cells.push((c, false));
        }
        let solids = with_solids(s, &cells);
        let cp = CharParams::default();
        let mut fire = FireState::new(s);
        let mut ch = CharState::new(s, &cp);

        source_fuel(&mut fire, &ch, &solids);
        assert_eq!(fire.y.sum(), 0.0);

        ch.t_m.set(0, 2, 2, cp.t_burn);
        fire.y.set(1, 2, 2, 0.3);
        source_fuel(&mut fire, &ch, &solids);
        assert_eq!(fire.y.get(1, 2, 2), 1.0);
        assert_eq!(fire.y.sum(), 1.0);

        let mut fire = FireState::new(s);
        ch.m_c.set(0, 2, 2, 1.0);
        source_fuel(&mut fire, &ch, &solids);
        assert_eq!(fire.y.sum(), 0.0);
    }

    #[test]
    fn quiescent_state_is_a_fixed_point() {
        let s = spec(8);
        let solids = with_solids(s, &[([3, 3, 0], true), ([4, 3, 0], false)]);
        let cp = CharParams::default();
        let ch = CharState::new(s, &cp);
        let mut fire = FireState::new(s);
        let before = fire.clone();
        for _ in 0..3 {
            fire_step(&mut fire, &ch, &solids, &SimParams::default());
        }
        assert_eq!(fire, before);
    }
}
