//! Solid-phase heat transfer and char accumulation.

use rayon::prelude::*;

use crate::grid::{GridSpec, ScalarField, Vec3};
use crate::material::SolidProps;

/// Solid-phase tunables. `beta`, `eps_c` and `t_ign` are fallbacks for
/// materials that leave them unset.
#[derive(Debug, Clone, PartialEq)]
pub struct CharParams {
    /// Thermal diffusivity, m²/s.
    pub beta: f32,
    /// Radiative cooling coefficient, 1/(s·K³).
    pub gamma_m: f32,
    pub t_amb: f32,
    pub t_ign: f32,
    pub t_burn: f32,
    /// Charring rate, 1/s.
    pub eps_c: f32,
    /// Minimum substeps per step; raised automatically for stability.
    pub substeps: usize,
}

impl Default for CharParams {
    fn default() -> Self {
        Self {
            beta: 5e-5,
            gamma_m: 1e-12,
            t_amb: 300.0,
            t_ign: 550.0,
            t_burn: 900.0,
            eps_c: 0.05,
            substeps: 1,
        }
    }
}

impl CharParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.beta >= 0.0 && self.gamma_m >= 0.0 && self.eps_c >= 0.0) {
            return Err("beta, gamma_m and eps_c must be non-negative".into());
        }
        if !(self.t_burn >= self.t_ign && self.t_ign > self.t_amb && self.t_amb > 0.0) {
            return Err("temperatures must satisfy t_burn >= t_ign > t_amb > 0".into());
        }
        if self.substeps == 0 {
            return Err("substeps must be at least 1".into());
        }
        Ok(())
    }
}

/// Solid temperature and relative char mass.
#[derive(Debug, Clone, PartialEq)]
pub struct CharState {
    pub t_m: ScalarField,
    pub m_c: ScalarField,
}

impl CharState {
    pub fn new(spec: GridSpec, params: &CharParams) -> Self {
        Self {
            t_m: ScalarField::filled(spec, params.t_amb),
            m_c: ScalarField::zeros(spec),
        }
    }
}

/// Number of explicit substeps needed to integrate diffusion over `dt`.
///
/// Keeps `dt_sub <= 0.9·h²/(6·β_max)`.
pub fn substep_count(dt: f32, beta_max: f32, h: f32, min_substeps: usize) -> usize {
    let bound = (dt as f64 * 6.0 * beta_max as f64 / (h as f64 * h as f64) / 0.9).ceil();
    (bound as usize).max(min_substeps).max(1)
}

#[inline]
fn harmonic(a: f32, b: f32) -> f32 {
    if a + b > 0.0 {
        2.0 * a * b / (a + b)
    } else {
        0.0
    }
}

/// Advances solid temperatures by `dt`, returning the substep count used.
///
/// Conduction only crosses solid–solid faces (harmonic-mean diffusivity);
/// solid–air faces and the domain boundary are insulated. Combustible cells
/// at or above their ignition temperature are pinned to `t_burn` after every
/// substep.
pub fn heat_step(state: &mut CharState, solids: &SolidProps, params: &CharParams, dt: f32) -> usize {
    let spec = *state.t_m.spec();
    let [nx, ny, nz] = spec.dims();
    let h = spec.spacing();
    let n_sub = substep_count(dt, solids.beta_max, h, params.substeps);
    let dt_sub = dt / n_sub as f32;
    let inv_h2 = 1.0 / (h * h);
    let occ = &solids.occupancy;
    let beta = &solids.beta;
    let t_amb4 = params.t_amb.powi(4);
    let strides = spec.strides();

    let mut cur = state.t_m.values().to_vec();
    let mut next = cur.clone();
    for _ in 0..n_sub {
        next.par_chunks_mut(nx * ny).enumerate().for_each(|(k, slab)| {
            for j in 0..ny {
                for i in 0..nx {
                    let idx = i + nx * (j + ny * k);
                    if !occ.is_occupied(idx) {
                        slab[i + nx * j] = cur[idx];
                        continue;
                    }
                    let t = cur[idx];
                    let c = [i, j, k];
                    let mut lap = 0f32;
                    for a in 0..3 {
                        let s = strides[a];
                        let dims_a = [nx, ny, nz][a];
                        if c[a] + 1 < dims_a && occ.is_occupied(idx + s) {
                            lap += harmonic(beta[idx], beta[idx + s]) * (cur[idx + s] - t);
                        }
                        if c[a] > 0 && occ.is_occupied(idx - s) {
                            lap += harmonic(beta[idx], beta[idx - s]) * (cur[idx - s] - t);
                        }
                    }
                    let cool = params.gamma_m * (t_amb4 - t * t * t * t);
                    let mut tn = t + dt_sub * (lap * inv_h2 + cool);
                    if occ.is_combustible(idx) && tn >= solids.t_ign[idx] {
                        tn = params.t_burn;
                    }
                    slab[i + nx * j] = tn;
                }
            }
        });
        std::mem::swap(&mut cur, &mut next);
    }
    state.t_m.values_mut().copy_from_slice(&cur);
    n_sub
}

/// `M_c ← min(M_c + ε_c·dt·ξ(T_m), 1)` on combustible cells.
pub fn char_update(state: &mut CharState, solids: &SolidProps, dt: f32) {
    let occ = &solids.occupancy;
    let tm = state.t_m.values();
    let mc = state.m_c.values_mut();
    for idx in 0..mc.len() {
        if occ.is_combustible(idx) && tm[idx] >= solids.t_ign[idx] {
            mc[idx] = (mc[idx] + solids.eps_c[idx] * dt).min(1.0);
        }
    }
}

/// Char mass of the cell containing each point; 0 for points outside the
/// grid or in cells that are not combustible.
pub fn gaussian_char_lookup(points: &[Vec3], m_c: &ScalarField, solids: &SolidProps) -> Vec<f32> {
    let spec = m_c.spec();
    points
        .iter()
        .map(|p| match spec.cell_of(p) {
            Some([i, j, k]) => {
                let idx = spec.index(i, j, k);
                if solids.occupancy.is_combustible(idx) {
                    m_c.values()[idx]
                } else {
                    0.0
                }
            }
            None => 0.0,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::{Material, MaterialTable};
    use crate::occupancy::OccupancyGrid;

    fn solids_from(spec: GridSpec, cells: impl Iterator<Item = usize>, burnable: bool, params: &CharParams) -> SolidProps {
        let mut occ = OccupancyGrid::empty(spec);
        for idx in cells {
            occ.set_solid(idx, 1, burnable);
        }
        let mut t = MaterialTable::new();
        t.insert(1, Material { burnable, ..Material::inert("block") });
        SolidProps::new(occ, &t, params)
    }

    #[test]
    fn substep_bound() {
        assert_eq!(substep_count(0.1, 0.0, 0.01, 3), 3);
        let n = substep_count(1.0 / 30.0, 1e-3, 0.01, 1);
        let dt_sub = (1.0 / 30.0) / n as f32;
        assert!(dt_sub <= 0.9 * 0.01 * 0.01 / (6.0 * 1e-3) * 1.0001);
        assert!(n > 1);
    }

    #[test]
    fn equilibrium_is_fixed() {
        let p = CharParams::default();
        let s = GridSpec::new([6, 6, 6], Vec3::zeros(), 0.01).unwrap();
        let solids = solids_from(s, 0..s.cell_count(), true, &p);
        let mut st = CharState::new(s, &p);
        let before = st.clone();
        heat_step(&mut st, &solids, &p, 0.1);
        char_update(&mut st, &solids, 0.1);
        assert_eq!(st, before);
    }

    #[test]
    fn isolated_voxel_cools_like_the_scalar_ode() {
        let p = CharParams { gamma_m: 2e-11, t_ign: 2000.0, t_burn: 2000.0, ..CharParams::default() };
        let s = GridSpec::new([3, 3, 3], Vec3::zeros(), 0.01).unwrap();
        let c = s.index(1, 1, 1);
        let solids = solids_from(s, std::iter::once(c), false, &p);
        let mut st = CharState::new(s, &p);
        st.t_m.values_mut()[c] = 900.0;

        // fine RK4 oracle of dT/dt = γ(Tamb⁴ − T⁴)
        let f = |t: f64| p.gamma_m as f64 * ((p.t_amb as f64).powi(4) - t.powi(4));
        let mut t_ref = 900.0f64;
        let dt = 1.0 / 30.0;
        let mut prev = 900.0f32;
        for _ in 0..90 {
            heat_step(&mut st, &solids, &p, dt);
            let h = dt as f64 / 200.0;
            for _ in 0..200 {
                let k1 = f(t_ref);
                let k2 = f(t_ref + 0.5 * h * k1);
                let k3 = f(t_ref + 0.5 * h * k2);
                let k4 = f(t_ref + h * k3);
                t_ref += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            }
            let t = st.t_m.values()[c];
            assert!(t < prev && t > p.t_amb);
            assert!(((t as f64 - t_ref) / t_ref).abs() < 0.01);
            prev = t;
        }
    }

    #[test]
    fn conduction_conserves_heat_in_a_closed_block() {
        let p = CharParams { gamma_m: 0.0, beta: 1e-4, t_ign: 5000.0, t_burn: 5000.0, ..CharParams::default() };
        let s = GridSpec::new([32, 32, 32], Vec3::zeros(), 0.01).unwrap();
        let solids = solids_from(s, 0..s.cell_count(), false, &p);
        let mut st = CharState::new(s, &p);
        for (idx, v) in st.t_m.values_mut().iter_mut().enumerate() {
            let [i, j, k] = s.coords(idx);
            *v = 300.0 + ((i * 7 + j * 13 + k * 5) % 17) as f32 * 20.0;
        }
        let e0 = st.t_m.sum();
        let mut subs = 0;
        while subs < 1000 {
            subs += heat_step(&mut st, &solids, &p, 0.05);
        }
        let drift = ((st.t_m.sum() - e0) / e0).abs();
        assert!(drift < 1e-5, "drift {drift}");
    }

    #[test]
    fn air_gap_blocks_conduction() {
        let p = CharParams { gamma_m: 0.0, ..CharParams::default() };
        let s = GridSpec::new([7, 3, 3], Vec3::zeros(), 0.01).unwrap();
        // cells x = 0..3 and x = 4..7 solid, x = 3 air
        let cells = (0..s.cell_count()).filter(|&i| s.coords(i)[0] != 3);
        let solids = solids_from(s, cells, false, &p);
        let mut st = CharState::new(s, &p);
        for idx in 0..s.cell_count() {
            if s.coords(idx)[0] < 3 {
                st.t_m.values_mut()[idx] = 500.0;
            }
        }
        for _ in 0..200 {
            heat_step(&mut st, &solids, &p, 0.1);
        }
        for idx in 0..s.cell_count() {
            if s.coords(idx)[0] > 3 {
                assert_eq!(st.t_m.values()[idx], p.t_amb);
            }
        }
    }

    #[test]
    fn char_accumulates_linearly_and_saturates() {
        let p = CharParams { eps_c: 0.2, ..CharParams::default() };
        let s = GridSpec::new([2, 2, 2], Vec3::zeros(), 0.01).unwrap();
        let solids = solids_from(s, 0..8, true, &p);
        let mut st = CharState::new(s, &p);
        char_update(&mut st, &solids, 1.0);
        assert_eq!(st.m_c.sum(), 0.0);

        st.t_m.values_mut()[0] = p.t_burn;
        // held at T_burn for t = 0.5/eps_c in 25 steps
        let steps = 25;
        let dt = 0.5 / p.eps_c / steps as f32;
        for _ in 0..steps {
            char_update(&mut st, &solids, dt);
        }
        assert!((st.m_c.values()[0] - 0.5).abs() < 1e-5);

        st.m_c.values_mut()[0] = 0.99;
        char_update(&mut st, &solids, 0.25);
        assert_eq!(st.m_c.values()[0], 1.0);
    }

    #[test]
    fn lookup_rules() {
        let p = CharParams::default();
        let s = GridSpec::new([4, 4, 4], Vec3::zeros(), 0.1).unwrap();
        let solids = solids_from(s, std::iter::once(s.index(1, 1, 1)), true, &p);
        let mut mc = ScalarField::zeros(s);
        mc.set(1, 1, 1, 0.7);
        mc.set(2, 2, 2, 0.4); // air cell, ignored
        let pts = [s.center(1, 1, 1), Vec3::new(5.0, 0.0, 0.0), s.center(2, 2, 2)];
        assert_eq!(gaussian_char_lookup(&pts, &mc, &solids), vec![0.7, 0.0, 0.0]);
    }
}
