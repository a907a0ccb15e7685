//! Ray-marched fire and smoke composited over a per-view background.
//!
//! A frame is rendered in two passes. The first marches every pixel ray
//! through the reaction-coordinate field and gathers fire radiance, smoke
//! radiance and transmittance. The second shades the background buffer
//! (char dimming and light from hot voxels) and composites
//! `L = L_fire + L_smoke + T̂·(L_bg + L_phong)` in linear RGB before tone
//! mapping.

mod camera;
mod march;
mod shade;

pub use camera::{Camera, GBuffer, Ray};
pub use march::{
    integrate_fire_smoke, sample_interval, sample_ray, Aabb, EmissionTable, MarchResult, Medium, RaySamples,
    WEIGHT_FLOOR,
};
pub use shade::{char_dimming, shade_background, smoke_color_field, Light, LightSet, SurfacePoint};

use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use crate::charring::{gaussian_char_lookup, CharState};
use crate::fire::{temperature_from_y, FireState, SimParams};
use crate::grid::Vec3;
use crate::material::SolidProps;
use crate::spectral::{
    blackbody_xyz, linear_to_display, xyz_to_linear_srgb, ChromaticAdaptation, LinearRgb, SpectralTable, Xyz,
};

/// Lowest white point used for adaptation, K. Cooler blackbodies have a
/// negative CAT02 M response and cannot serve as a von Kries white.
pub const MIN_ADAPTATION_TEMPERATURE: f64 = 1000.0;

const EMISSION_TABLE_SIZE: usize = 2048;

#[derive(Debug, Error, PartialEq)]
pub enum RenderError {
    #[error("invalid camera: {0}")]
    Camera(String),
    #[error("camera is {camera:?} pixels but the gbuffer is {gbuffer:?}")]
    Resolution { camera: (usize, usize), gbuffer: (usize, usize) },
    #[error("invalid render input: {0}")]
    Param(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderParams {
    /// Fire absorption coefficient, 1/m.
    pub sigma_a: f64,
    /// Reaction coordinate at and below which gas renders as smoke.
    pub y_smoke: f64,
    /// Smoke extinction per unit `Y`, 1/m.
    pub sigma_s_smoke: f64,
    /// Brightness of smoke pseudo-emission.
    pub smoke_ambient: f64,
    /// Char mass at which darkening starts.
    pub m_c_dark: f64,
    /// Background multiplier at full char.
    pub r_dark: f64,
    pub k_d: f64,
    pub k_s: f64,
    /// Specular exponent.
    pub shininess: f64,
    /// Gas temperature at which voxels light the scene, K.
    pub t_light: f64,
    pub max_lights: usize,
    /// Inverse-square falloff weighted by voxel volume.
    pub light_falloff: bool,
    pub n_coarse: usize,
    pub n_fine: usize,
    pub exposure: f64,
    /// Fire luminance, relative to the adaptation white, before exposure.
    pub fire_brightness: f64,
}

impl Default for RenderParams {
    fn default() -> Self {
        Self {
            sigma_a: 40.0,
            y_smoke: 0.25,
            sigma_s_smoke: 30.0,
            smoke_ambient: 0.6,
            m_c_dark: 0.2,
            r_dark: 0.25,
            k_d: 0.8,
            k_s: 0.2,
            shininess: 16.0,
            t_light: 1200.0,
            max_lights: 256,
            light_falloff: true,
            n_coarse: 128,
            n_fine: 1024,
            exposure: 1.0,
            fire_brightness: 4.0,
        }
    }
}

impl RenderParams {
    pub fn validate(&self) -> Result<(), RenderError> {
        let bad = |m: &str| Err(RenderError::Param(m.to_string()));
        if !(self.sigma_a >= 0.0 && self.sigma_s_smoke >= 0.0 && self.smoke_ambient >= 0.0) {
            return bad("sigma_a, sigma_s_smoke and smoke_ambient must be non-negative");
        }
        if !(self.y_smoke > 0.0 && self.y_smoke < 1.0) {
            return bad("y_smoke must lie in (0, 1)");
        }
        if !(self.m_c_dark >= 0.0 && self.m_c_dark < 1.0) {
            return bad("m_c_dark must lie in [0, 1)");
        }
        if !(self.r_dark > 0.0 && self.r_dark <= 1.0) {
            return bad("r_dark must lie in (0, 1]");
        }
        if !(self.k_d >= 0.0 && self.k_s >= 0.0 && self.shininess >= 0.0) {
            return bad("phong coefficients must be non-negative");
        }
        if self.n_coarse == 0 || self.n_fine == 0 {
            return bad("sample counts must be at least 1");
        }
        if !(self.exposure > 0.0 && self.fire_brightness >= 0.0 && self.t_light.is_finite()) {
            return bad("exposure must be positive and fire_brightness non-negative");
        }
        Ok(())
    }
}

/// Maps blackbody XYZ to display-normalized linear RGB: adaptation to D65,
/// then scaling so the adaptation white has luminance `brightness`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FireColor {
    adaptation: ChromaticAdaptation,
    scale: f64,
}

impl FireColor {
    pub fn new(t_white: f64, brightness: f64, spectral: &SpectralTable) -> Self {
        let white = blackbody_xyz(t_white, spectral);
        Self { adaptation: ChromaticAdaptation::from_white(white), scale: brightness / white.y }
    }

    #[inline]
    pub fn to_rgb(&self, xyz: &Xyz) -> LinearRgb {
        xyz_to_linear_srgb(&self.adaptation.apply(xyz)) * self.scale
    }
}

/// 8-bit RGB raster, rows top to bottom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

impl Image {
    pub fn pixel(&self, i: usize, j: usize) -> [u8; 3] {
        let o = 3 * (j * self.width + i);
        [self.data[o], self.data[o + 1], self.data[o + 2]]
    }
}

/// Simulation state a frame is rendered from.
#[derive(Debug, Clone, Copy)]
pub struct FrameInputs<'a> {
    pub fire: &'a FireState,
    pub char_state: &'a CharState,
    pub solids: &'a SolidProps,
    pub sim: &'a SimParams,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RenderTimings {
    /// Ray marching of fire and smoke.
    pub fire_smoke: Duration,
    /// Background shading, compositing and tone mapping.
    pub gs_composite: Duration,
}

/// Per-pixel terms of the composite, in linear RGB.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameLayers {
    pub width: usize,
    pub height: usize,
    pub fire: Vec<LinearRgb>,
    pub smoke: Vec<LinearRgb>,
    pub transmittance: Vec<f64>,
    /// Shaded background, `L_bg + L_phong`.
    pub background: Vec<LinearRgb>,
    /// Hottest gas temperature this frame, floored at `t_air + 1`.
    pub t_max_scene: f64,
}

impl FrameLayers {
    pub fn composite(&self, p: usize) -> LinearRgb {
        self.fire[p] + self.smoke[p] + self.background[p] * self.transmittance[p]
    }

    pub fn to_image(&self, exposure: f64) -> Image {
        let data = (0..self.width * self.height)
            .into_par_iter()
            .flat_map_iter(|p| linear_to_display(&self.composite(p), exposure).to_u8())
            .collect();
        Image { width: self.width, height: self.height, data }
    }
}

fn check_inputs(camera: &Camera, gbuffer: &GBuffer, inputs: &FrameInputs) -> Result<(), RenderError> {
    if (camera.width, camera.height) != (gbuffer.width, gbuffer.height) {
        return Err(RenderError::Resolution {
            camera: (camera.width, camera.height),
            gbuffer: (gbuffer.width, gbuffer.height),
        });
    }
    let spec = inputs.fire.spec();
    if inputs.char_state.t_m.spec() != spec || inputs.solids.occupancy.spec() != spec {
        return Err(RenderError::Param("simulation grids disagree".into()));
    }
    Ok(())
}

/// Renders the per-pixel terms without tone mapping.
pub fn render_layers(
    camera: &Camera,
    gbuffer: &GBuffer,
    inputs: &FrameInputs,
    params: &RenderParams,
) -> Result<(FrameLayers, RenderTimings), RenderError> {
    params.validate()?;
    check_inputs(camera, gbuffer, inputs)?;
    let (w, h) = (camera.width, camera.height);
    let npix = w * h;
    let spectral = SpectralTable::default();
    let y = &inputs.fire.y;
    let spec = *y.spec();
    let t_air = inputs.sim.t_air as f64;

    // fire and smoke
    let start = Instant::now();
    let temperature = temperature_from_y(y, inputs.sim);
    let t_max_scene = (temperature.max() as f64).max(t_air + 1.0);
    let t_white = t_max_scene.max(MIN_ADAPTATION_TEMPERATURE);
    let color = FireColor::new(t_white, params.fire_brightness, &spectral);
    let emission = EmissionTable::new(t_air, t_max_scene, EMISSION_TABLE_SIZE, &spectral);
    let mut march = vec![MarchResult::default(); npix];
    if let Some(active) = Aabb::of_active(y) {
        let smoke_color = smoke_color_field(inputs.char_state, inputs.solids, [0.5; 3]);
        let medium = Medium { y, temperature: &temperature, smoke_color: &smoke_color, emission: &emission };
        march.par_iter_mut().enumerate().for_each(|(p, out)| {
            let ray = camera.generate_ray(p % w, p / w);
            if let Some((t0, t1)) = active.clip(&ray) {
                let t_far = t1.min(gbuffer.depth[p] as f64);
                let samples = sample_interval(&ray, y, t0.max(0.0), t_far, params.n_coarse, params.n_fine);
                *out = integrate_fire_smoke(&ray, &samples, &medium, params);
            }
        });
    }
    let fire: Vec<LinearRgb> = march.iter().map(|m| color.to_rgb(&m.fire)).collect();
    let fire_smoke = start.elapsed();

    // background
    let start = Instant::now();
    let lights = LightSet::collect(&temperature, inputs.solids, &emission, &color, params);
    let nudge = 0.5 * spec.spacing() as f64;
    let surfaces: Vec<Option<SurfacePoint>> = (0..npix)
        .into_par_iter()
        .map(|p| {
            let depth = gbuffer.depth[p];
            if !depth.is_finite() {
                return None;
            }
            let ray = camera.generate_ray(p % w, p / w);
            Some(SurfacePoint {
                color: gbuffer.color[p],
                position: ray.at(depth as f64),
                normal: gbuffer.normal[p].cast::<f64>().normalize(),
                view: -ray.dir,
            })
        })
        .collect();
    // char is read just inside the surface
    let probes: Vec<Vec3> = surfaces
        .iter()
        .flatten()
        .map(|s| (s.position - s.normal * nudge).cast::<f32>())
        .collect();
    let char_mass = gaussian_char_lookup(&probes, &inputs.char_state.m_c, inputs.solids);
    let mut char_of = vec![0.0f64; npix];
    for (p, m) in surfaces.iter().enumerate().filter(|(_, s)| s.is_some()).map(|(p, _)| p).zip(char_mass) {
        char_of[p] = m as f64;
    }
    let background: Vec<LinearRgb> = (0..npix)
        .into_par_iter()
        .map(|p| match &surfaces[p] {
            Some(s) => shade_background(s, char_of[p], &lights, params),
            None => gbuffer.color[p],
        })
        .collect();
    let layers = FrameLayers {
        width: w,
        height: h,
        fire,
        smoke: march.iter().map(|m| m.smoke).collect(),
        transmittance: march.iter().map(|m| m.transmittance).collect(),
        background,
        t_max_scene,
    };
    let gs_composite = start.elapsed();
    Ok((layers, RenderTimings { fire_smoke, gs_composite }))
}

/// Renders one display-referred frame.
pub fn render_frame(
    camera: &Camera,
    gbuffer: &GBuffer,
    inputs: &FrameInputs,
    params: &RenderParams,
) -> Result<Image, RenderError> {
    render_frame_timed(camera, gbuffer, inputs, params).map(|(img, _)| img)
}

pub fn render_frame_timed(
    camera: &Camera,
    gbuffer: &GBuffer,
    inputs: &FrameInputs,
    params: &RenderParams,
) -> Result<(Image, RenderTimings), RenderError> {
    let (layers, mut timings) = render_layers(camera, gbuffer, inputs, params)?;
    let start = Instant::now();
    let image = layers.to_image(params.exposure);
    timings.gs_composite += start.elapsed();
    Ok((image, timings))
}

/// Ray through every pixel, row-major.
pub fn pixel_rays(camera: &Camera) -> Vec<Ray> {
    (0..camera.width * camera.height)
        .map(|p| camera.generate_ray(p % camera.width, p / camera.width))
        .collect()
}
