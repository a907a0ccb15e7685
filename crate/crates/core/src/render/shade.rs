use std::collections::VecDeque;

use nalgebra::Vector3;

use super::{FireColor, RenderParams};
use super::march::EmissionTable;
use crate::charring::CharState;
use crate::grid::ScalarField;
use crate::material::SolidProps;
use crate::spectral::LinearRgb;

/// Background multiplier for char mass `m_c`: 1 up to the onset, falling
/// linearly to `r_dark` at full char.
pub fn char_dimming(m_c: f64, params: &RenderParams) -> f64 {
    let f = (m_c - params.m_c_dark) / (1.0 - params.m_c_dark);
    if f <= 0.0 {
        1.0
    } else if f >= 1.0 {
        params.r_dark
    } else {
        params.r_dark + (1.0 - params.r_dark) * (1.0 - f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Light {
    pub position: Vector3<f64>,
    /// Display-normalized radiant intensity, already scaled for subsampling.
    pub rgb: LinearRgb,
}

/// Hot gas voxels acting as point lights.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LightSet {
    pub lights: Vec<Light>,
    /// Volume each light stands for, m³.
    pub volume: f64,
    /// Squared distance below which falloff is clamped.
    pub min_dist2: f64,
}

impl LightSet {
    /// Air cells with gas temperature at or above `t_light`, ranked by
    /// temperature, thinned to `max_lights` by stratified selection.
    ///
    /// Each light carries `σ_a · rgb(T)`, the emitted color per unit volume;
    /// the selected ones are rescaled by the inverse sampling fraction.
    pub fn collect(
        temperature: &ScalarField,
        solids: &SolidProps,
        emission: &EmissionTable,
        color: &FireColor,
        params: &RenderParams,
    ) -> Self {
        let spec = temperature.spec();
        let h = spec.spacing() as f64;
        let t = temperature.values();
        let mut hot: Vec<usize> = (0..t.len())
            .filter(|&i| !solids.occupancy.is_occupied(i) && t[i] as f64 >= params.t_light)
            .collect();
        hot.sort_by(|&a, &b| t[b].total_cmp(&t[a]).then(a.cmp(&b)));
        let (chosen, scale): (Vec<usize>, f64) = if hot.len() > params.max_lights {
            let n = hot.len();
            let m = params.max_lights;
            ((0..m).map(|s| hot[(2 * s + 1) * n / (2 * m)]).collect(), n as f64 / m as f64)
        } else {
            (hot, 1.0)
        };
        let lights = chosen
            .into_iter()
            .map(|idx| {
                let [i, j, k] = spec.coords(idx);
                let rgb = color.to_rgb(&emission.lookup(t[idx] as f64)) * (params.sigma_a * scale);
                Light { position: spec.center(i, j, k).cast(), rgb }
            })
            .collect();
        Self { lights, volume: h * h * h, min_dist2: h * h }
    }
}

/// Surface seen through one pixel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    pub color: LinearRgb,
    pub position: Vector3<f64>,
    pub normal: Vector3<f64>,
    /// Unit vector from the surface toward the viewer.
    pub view: Vector3<f64>,
}

/// Char-dimmed background color plus Phong light from hot voxels.
pub fn shade_background(surface: &SurfacePoint, m_c: f64, lights: &LightSet, params: &RenderParams) -> LinearRgb {
    let dim = char_dimming(m_c, params);
    let base = if dim == 1.0 { surface.color } else { surface.color * dim };
    if lights.lights.is_empty() {
        return base;
    }
    let n = surface.normal;
    let mut acc = LinearRgb::zeros();
    for light in &lights.lights {
        let l = light.position - surface.position;
        let d2 = l.norm_squared();
        if d2 == 0.0 {
            continue;
        }
        let l = l / d2.sqrt();
        let ndl = n.dot(&l);
        let mut term = params.k_d * ndl.max(0.0);
        if params.k_s > 0.0 {
            let r = n * (2.0 * ndl) - l;
            term += params.k_s * r.dot(&surface.view).max(0.0).powf(params.shininess);
        }
        if term <= 0.0 {
            continue;
        }
        let w = if params.light_falloff { lights.volume / d2.max(lights.min_dist2) } else { 1.0 };
        acc += light.rgb * (term * w);
    }
    base + acc
}

/// Smoke color per cell, copied from the nearest burning combustible cell
/// (6-connected grid distance, ties to the earliest source). Falls back to
/// every combustible cell when nothing burns, and to `fallback` when there
/// is no combustible cell at all.
pub fn smoke_color_field(char_state: &CharState, solids: &SolidProps, fallback: [f32; 3]) -> Vec<[f32; 3]> {
    let spec = *char_state.t_m.spec();
    let n = spec.cell_count();
    let occ = &solids.occupancy;
    let tm = char_state.t_m.values();
    let burning: Vec<usize> = (0..n).filter(|&i| occ.is_combustible(i) && tm[i] >= solids.t_ign[i]).collect();
    let sources = if burning.is_empty() {
        (0..n).filter(|&i| occ.is_combustible(i)).collect()
    } else {
        burning
    };
    if sources.is_empty() {
        return vec![fallback; n];
    }
    let mut color = vec![fallback; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::with_capacity(n);
    for &s in &sources {
        seen[s] = true;
        color[s] = solids.smoke_color[s];
        queue.push_back(s);
    }
    let dims = spec.dims();
    let strides = spec.strides();
    while let Some(idx) = queue.pop_front() {
        let c = spec.coords(idx);
        for a in 0..3 {
            let s = strides[a];
            let mut visit = |m: usize| {
                if !seen[m] {
                    seen[m] = true;
                    color[m] = color[idx];
                    queue.push_back(m);
                }
            };
            if c[a] > 0 {
                visit(idx - s);
            }
            if c[a] + 1 < dims[a] {
                visit(idx + s);
            }
        }
    }
    color
}
