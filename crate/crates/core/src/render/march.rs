use nalgebra::Vector3;

use super::camera::Ray;
use super::RenderParams;
use crate::grid::{ScalarField, Vec3};
use crate::spectral::{spectrum_to_xyz, LinearRgb, SpectralTable, Xyz};

/// Floor added to coarse `Y` values so the sampling CDF stays invertible.
pub const WEIGHT_FLOOR: f64 = 1e-4;

/// Transmittance below which marching stops.
const OPAQUE: f64 = 1e-6;

/// Ordered ray parameters with the length of ray each one stands for.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RaySamples {
    pub t: Vec<f64>,
    pub dt: Vec<f64>,
}

impl RaySamples {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

/// Axis-aligned box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vector3<f64>,
    pub max: Vector3<f64>,
}

impl Aabb {
    pub fn of_grid(y: &ScalarField) -> Self {
        let (lo, hi) = y.spec().bounds();
        Self { min: lo.cast(), max: hi.cast() }
    }

    /// Cells with `Y > 0`, padded by one cell for interpolation support and
    /// clipped to the grid; `None` if there are none.
    pub fn of_active(y: &ScalarField) -> Option<Self> {
        let spec = y.spec();
        let mut lo = [usize::MAX; 3];
        let mut hi = [0usize; 3];
        for (idx, &v) in y.values().iter().enumerate() {
            if v > 0.0 {
                let c = spec.coords(idx);
                for a in 0..3 {
                    lo[a] = lo[a].min(c[a]);
                    hi[a] = hi[a].max(c[a]);
                }
            }
        }
        if lo[0] == usize::MAX {
            return None;
        }
        let h = spec.spacing() as f64;
        let o: Vector3<f64> = spec.origin().cast();
        let dims = spec.dims();
        let min = Vector3::from_fn(|a, _| o[a] + lo[a].saturating_sub(1) as f64 * h);
        let max = Vector3::from_fn(|a, _| o[a] + (hi[a] + 2).min(dims[a]) as f64 * h);
        Some(Self { min, max })
    }

    /// Parametric interval where `ray` is inside the box.
    pub fn clip(&self, ray: &Ray) -> Option<(f64, f64)> {
        let mut t0 = f64::NEG_INFINITY;
        let mut t1 = f64::INFINITY;
        for a in 0..3 {
            let d = ray.dir[a];
            if d == 0.0 {
                if ray.origin[a] < self.min[a] || ray.origin[a] > self.max[a] {
                    return None;
                }
                continue;
            }
            let (mut ta, mut tb) = ((self.min[a] - ray.origin[a]) / d, (self.max[a] - ray.origin[a]) / d);
            if ta > tb {
                std::mem::swap(&mut ta, &mut tb);
            }
            t0 = t0.max(ta);
            t1 = t1.min(tb);
        }
        (t0 <= t1).then_some((t0, t1))
    }
}

#[inline]
fn sample_at(field: &ScalarField, p: Vector3<f64>) -> f64 {
    field.sample(&Vec3::new(p.x as f32, p.y as f32, p.z as f32)) as f64
}

/// Coarse-to-fine samples along `ray` inside the grid, up to `t_max`.
pub fn sample_ray(ray: &Ray, y: &ScalarField, t_max: f64, params: &RenderParams) -> RaySamples {
    match Aabb::of_grid(y).clip(ray) {
        Some((t0, t1)) => sample_interval(ray, y, t0.max(0.0), t1.min(t_max), params.n_coarse, params.n_fine),
        None => RaySamples::default(),
    }
}

/// `n_coarse` uniform samples on `[t_near, t_far]`, plus `n_fine` samples
/// placed by stratified inversion of the CDF of `Y + WEIGHT_FLOOR` over the
/// coarse bins. Each sample covers the span between the midpoints to its
/// neighbors, so the lengths sum to `t_far − t_near`.
pub fn sample_interval(
    ray: &Ray,
    y: &ScalarField,
    t_near: f64,
    t_far: f64,
    n_coarse: usize,
    n_fine: usize,
) -> RaySamples {
    if !(t_far > t_near) || n_coarse == 0 {
        return RaySamples::default();
    }
    let len = t_far - t_near;
    let bin = len / n_coarse as f64;
    let coarse: Vec<f64> = (0..n_coarse).map(|i| t_near + (i as f64 + 0.5) * bin).collect();
    let mut cdf = Vec::with_capacity(n_coarse + 1);
    cdf.push(0.0);
    let mut acc = 0.0;
    for &t in &coarse {
        acc += sample_at(y, ray.at(t)).max(0.0) + WEIGHT_FLOOR;
        cdf.push(acc);
    }

    let mut fine = Vec::with_capacity(n_fine);
    let mut b = 0;
    for m in 0..n_fine {
        let target = (m as f64 + 0.5) / n_fine as f64 * acc;
        while b + 1 < n_coarse && cdf[b + 1] <= target {
            b += 1;
        }
        let frac = ((target - cdf[b]) / (cdf[b + 1] - cdf[b])).clamp(0.0, 1.0);
        fine.push(t_near + (b as f64 + frac) * bin);
    }

    let mut t = Vec::with_capacity(n_coarse + n_fine);
    let (mut i, mut j) = (0, 0);
    while i < coarse.len() || j < fine.len() {
        if j == fine.len() || (i < coarse.len() && coarse[i] <= fine[j]) {
            t.push(coarse[i]);
            i += 1;
        } else {
            t.push(fine[j]);
            j += 1;
        }
    }
    let n = t.len();
    let dt = (0..n)
        .map(|s| {
            let lo = if s == 0 { t_near } else { 0.5 * (t[s - 1] + t[s]) };
            let hi = if s + 1 == n { t_far } else { 0.5 * (t[s] + t[s + 1]) };
            hi - lo
        })
        .collect();
    RaySamples { t, dt }
}

/// Blackbody XYZ tabulated over a temperature range, linearly interpolated.
#[derive(Debug, Clone)]
pub struct EmissionTable {
    t_lo: f64,
    step: f64,
    xyz: Vec<Xyz>,
}

impl EmissionTable {
    pub fn new(t_lo: f64, t_hi: f64, entries: usize, spectral: &SpectralTable) -> Self {
        assert!(t_lo > 0.0 && t_hi > t_lo && entries >= 2, "invalid emission table range");
        let step = (t_hi - t_lo) / (entries - 1) as f64;
        let xyz = (0..entries)
            .map(|i| spectrum_to_xyz(&spectral.planck_spectrum(t_lo + i as f64 * step), spectral))
            .collect();
        Self { t_lo, step, xyz }
    }

    /// XYZ at `t`, clamped to the table range.
    #[inline]
    pub fn lookup(&self, t: f64) -> Xyz {
        let x = ((t - self.t_lo) / self.step).clamp(0.0, (self.xyz.len() - 1) as f64);
        let i = (x as usize).min(self.xyz.len() - 2);
        let f = x - i as f64;
        self.xyz[i] * (1.0 - f) + self.xyz[i + 1] * f
    }
}

/// Read-only fields a ray marches through.
pub struct Medium<'a> {
    pub y: &'a ScalarField,
    /// Gas temperature, K.
    pub temperature: &'a ScalarField,
    /// Linear smoke color per cell.
    pub smoke_color: &'a [[f32; 3]],
    pub emission: &'a EmissionTable,
}

/// Radiance gathered along one ray.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarchResult {
    /// Fire radiance before adaptation.
    pub fire: Xyz,
    pub smoke: LinearRgb,
    pub transmittance: f64,
}

impl Default for MarchResult {
    fn default() -> Self {
        Self { fire: Xyz::zeros(), smoke: LinearRgb::zeros(), transmittance: 1.0 }
    }
}

/// Front-to-back emission–absorption march. Samples with `Y > Y_smoke` are
/// fire; samples with `0 < Y <= Y_smoke` are smoke.
pub fn integrate_fire_smoke(ray: &Ray, samples: &RaySamples, medium: &Medium, params: &RenderParams) -> MarchResult {
    let spec = medium.y.spec();
    let mut out = MarchResult::default();
    for (&t, &dt) in samples.t.iter().zip(&samples.dt) {
        let p = ray.at(t);
        let y = sample_at(medium.y, p);
        if y <= 0.0 {
            continue;
        }
        if y > params.y_smoke {
            let alpha = 1.0 - (-params.sigma_a * dt).exp();
            let e = medium.emission.lookup(sample_at(medium.temperature, p));
            out.fire += e * (out.transmittance * alpha);
            out.transmittance *= 1.0 - alpha;
        } else {
            let sigma = params.sigma_s_smoke * y;
            let alpha = 1.0 - (-sigma * dt).exp();
            let pf = Vec3::new(p.x as f32, p.y as f32, p.z as f32);
            let color = match spec.cell_of(&pf) {
                Some([i, j, k]) => medium.smoke_color[spec.index(i, j, k)],
                None => [0.0; 3],
            };
            let c = LinearRgb::new(color[0] as f64, color[1] as f64, color[2] as f64);
            out.smoke += c * (params.smoke_ambient * out.transmittance * alpha);
            out.transmittance *= 1.0 - alpha;
        }
        if out.transmittance < OPAQUE {
            break;
        }
    }
    out
}
