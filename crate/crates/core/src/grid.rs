//! Cell-centered voxel grids.
//!
//! Every field lives on the centers of a uniform `nx × ny × nz` lattice with
//! x varying fastest in memory. Velocity is collocated with the scalars.

use std::ops::{Add, Mul};

use nalgebra::Vector3;
use thiserror::Error;

pub type Vec3 = Vector3<f32>;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("grid dimensions must all be >= 2, got {0:?}")]
    Dims([usize; 3]),
    #[error("grid spacing must be positive and finite, got {0}")]
    Spacing(f32),
    #[error("grid origin must be finite")]
    Origin,
    #[error("point {index} references unknown material id {material_id}")]
    UnknownMaterial { index: usize, material_id: u32 },
    #[error("point {index} has non-finite coordinates")]
    NonFinitePoint { index: usize },
    #[error("point {index} has opacity {opacity} outside [0, 1]")]
    Opacity { index: usize, opacity: f32 },
    #[error("opacity threshold {0} outside [0, 1]")]
    Threshold(f32),
    #[error("field length {got} does not match {expected} cells")]
    Length { expected: usize, got: usize },
}

/// Geometry of a uniform cell-centered grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    dims: [usize; 3],
    origin: Vec3,
    spacing: f32,
}

impl GridSpec {
    pub fn new(dims: [usize; 3], origin: Vec3, spacing: f32) -> Result<Self, GridError> {
        if dims.iter().any(|&d| d < 2) {
            return Err(GridError::Dims(dims));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(GridError::Spacing(spacing));
        }
        if !origin.iter().all(|c| c.is_finite()) {
            return Err(GridError::Origin);
        }
        Ok(Self { dims, origin, spacing })
    }

    #[inline]
    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    #[inline]
    pub fn origin(&self) -> Vec3 {
        self.origin
    }

    #[inline]
    pub fn spacing(&self) -> f32 {
        self.spacing
    }

    #[inline]
    pub fn cell_count(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    /// Linear offset of cell `(i, j, k)`, x fastest.
    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        debug_assert!(i < self.dims[0] && j < self.dims[1] && k < self.dims[2]);
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let nx = self.dims[0];
        let ny = self.dims[1];
        [idx % nx, (idx / nx) % ny, idx / (nx * ny)]
    }

    #[inline]
    pub fn contains_cell(&self, c: [i64; 3]) -> bool {
        (0..3).all(|a| c[a] >= 0 && (c[a] as usize) < self.dims[a])
    }

    /// Stride between neighbors along each axis in the linear layout.
    #[inline]
    pub fn strides(&self) -> [usize; 3] {
        [1, self.dims[0], self.dims[0] * self.dims[1]]
    }

    /// World position of the center of cell `(i, j, k)`.
    #[inline]
    pub fn center(&self, i: usize, j: usize, k: usize) -> Vec3 {
        let h = self.spacing;
        self.origin
            + Vec3::new(
                (i as f32 + 0.5) * h,
                (j as f32 + 0.5) * h,
                (k as f32 + 0.5) * h,
            )
    }

    /// Continuous index coordinates: cell centers sit at integers.
    #[inline]
    pub fn to_grid_coords(&self, p: &Vec3) -> Vec3 {
        (p - self.origin) / self.spacing - Vec3::repeat(0.5)
    }

    /// Cell containing `p`, or `None` outside the grid.
    pub fn cell_of(&self, p: &Vec3) -> Option<[usize; 3]> {
        let mut out = [0usize; 3];
        for a in 0..3 {
            let f = ((p[a] - self.origin[a]) / self.spacing).floor();
            if !(f >= 0.0 && f < self.dims[a] as f32) {
                return None;
            }
            out[a] = f as usize;
        }
        Some(out)
    }

    /// Axis-aligned world bounds `(min, max)` of the whole grid.
    pub fn bounds(&self) -> (Vec3, Vec3) {
        let ext = Vec3::new(
            self.dims[0] as f32,
            self.dims[1] as f32,
            self.dims[2] as f32,
        ) * self.spacing;
        (self.origin, self.origin + ext)
    }

    pub fn cell_volume(&self) -> f32 {
        self.spacing * self.spacing * self.spacing
    }
}

/// Values interpolable by trilinear weights.
pub trait Lerp: Copy + Add<Output = Self> + Mul<f32, Output = Self> {}
impl<T: Copy + Add<Output = T> + Mul<f32, Output = T>> Lerp for T {}

/// One value per cell, x-fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T> {
    spec: GridSpec,
    values: Vec<T>,
}

pub type ScalarField = Field<f32>;
pub type VectorField = Field<Vec3>;

impl<T: Copy> Field<T> {
    pub fn filled(spec: GridSpec, value: T) -> Self {
        Self { spec, values: vec![value; spec.cell_count()] }
    }

    pub fn from_values(spec: GridSpec, values: Vec<T>) -> Result<Self, GridError> {
        if values.len() != spec.cell_count() {
            return Err(GridError::Length { expected: spec.cell_count(), got: values.len() });
        }
        Ok(Self { spec, values })
    }

    pub fn from_fn(spec: GridSpec, mut f: impl FnMut(usize, usize, usize) -> T) -> Self {
        let [nx, ny, nz] = spec.dims();
        let mut values = Vec::with_capacity(spec.cell_count());
        for k in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    values.push(f(i, j, k));
                }
            }
        }
        Self { spec, values }
    }

    #[inline]
    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    #[inline]
    pub fn values(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> T {
        self.values[self.spec.index(i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: T) {
        let idx = self.spec.index(i, j, k);
        self.values[idx] = v;
    }
}

impl<T: Lerp> Field<T> {
    /// Trilinear interpolation of the eight surrounding cell centers.
    ///
    /// Positions outside the grid are clamped to the outermost cell centers,
    /// so the result always lies within the hull of the stencil values.
    pub fn sample(&self, p: &Vec3) -> T {
        self.sample_grid(&self.spec.to_grid_coords(p))
    }

    /// Same as [`Field::sample`] but takes continuous index coordinates.
    pub fn sample_grid(&self, g: &Vec3) -> T {
        let dims = self.spec.dims;
        let mut base = [0usize; 3];
        let mut frac = [0f32; 3];
        for a in 0..3 {
            let hi = (dims[a] - 1) as f32;
            let x = if g[a].is_nan() { 0.0 } else { g[a].clamp(0.0, hi) };
            // keep i0 + 1 in range so the upper corner is always valid
            let i0 = (x.floor() as usize).min(dims[a] - 2);
            base[a] = i0;
            // world→index rounding leaves ~1e-7 residue at exact centers
            let f = (x - i0 as f32).clamp(0.0, 1.0);
            frac[a] = if f < 1e-5 {
                0.0
            } else if f > 1.0 - 1e-5 {
                1.0
            } else {
                f
            };
        }
        let [sx, sy, sz] = self.spec.strides();
        let o = base[0] + dims[0] * (base[1] + dims[1] * base[2]);
        let v = &self.values;
        let (fx, fy, fz) = (frac[0], frac[1], frac[2]);
        let lerp = |a: T, b: T, t: f32| a * (1.0 - t) + b * t;
        let c00 = lerp(v[o], v[o + sx], fx);
        let c10 = lerp(v[o + sy], v[o + sy + sx], fx);
        let c01 = lerp(v[o + sz], v[o + sz + sx], fx);
        let c11 = lerp(v[o + sz + sy], v[o + sz + sy + sx], fx);
        lerp(lerp(c00, c10, fy), lerp(c01, c11, fy), fz)
    }
}

impl ScalarField {
    pub fn zeros(spec: GridSpec) -> Self {
        Self::filled(spec, 0.0)
    }

    pub fn max(&self) -> f32 {
        self.values.iter().copied().fold(f32::NEG_INFINITY, f32::max)
    }

    pub fn min(&self) -> f32 {
        self.values.iter().copied().fold(f32::INFINITY, f32::min)
    }

    /// Sum accumulated in f64, in memory order.
    pub fn sum(&self) -> f64 {
        self.values.iter().map(|&v| v as f64).sum()
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

impl VectorField {
    pub fn zeros(spec: GridSpec) -> Self {
        Self::filled(spec, Vec3::zeros())
    }

    pub fn max_norm(&self) -> f32 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f32::max)
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.iter().all(|c| c.is_finite()))
    }

    /// Split into three scalar components.
    pub fn components(&self) -> [ScalarField; 3] {
        std::array::from_fn(|a| ScalarField {
            spec: self.spec,
            values: self.values.iter().map(|v| v[a]).collect(),
        })
    }

    pub fn from_components(c: &[ScalarField; 3]) -> Self {
        let spec = c[0].spec;
        let values = (0..spec.cell_count())
            .map(|i| Vec3::new(c[0].values[i], c[1].values[i], c[2].values[i]))
            .collect();
        Self { spec, values }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec(n: [usize; 3]) -> GridSpec {
        GridSpec::new(n, Vec3::new(-0.3, 0.1, 2.0), 0.05).unwrap()
    }

    #[test]
    fn rejects_bad_specs() {
        assert_eq!(GridSpec::new([1, 4, 4], Vec3::zeros(), 1.0), Err(GridError::Dims([1, 4, 4])));
        assert!(matches!(GridSpec::new([4, 4, 4], Vec3::zeros(), 0.0), Err(GridError::Spacing(_))));
        assert!(GridSpec::new([4, 4, 4], Vec3::new(f32::NAN, 0.0, 0.0), 1.0).is_err());
    }

    #[test]
    fn center_round_trips_through_cell_of() {
        let s = spec([5, 6, 7]);
        for k in 0..7 {
            for j in 0..6 {
                for i in 0..5 {
                    assert_eq!(s.cell_of(&s.center(i, j, k)), Some([i, j, k]));
                    assert_eq!(s.coords(s.index(i, j, k)), [i, j, k]);
                }
            }
        }
        assert_eq!(s.cell_of(&Vec3::new(-10.0, 0.0, 0.0)), None);
    }

    #[test]
    fn sample_at_center_is_identity() {
        let s = spec([4, 4, 4]);
        let f = ScalarField::from_fn(s, |i, j, k| (i * 16 + j * 4 + k) as f32);
        for (i, j, k) in [(0, 0, 0), (3, 3, 3), (1, 2, 3), (2, 0, 1)] {
            assert_eq!(f.sample(&s.center(i, j, k)), f.get(i, j, k));
        }
    }

    #[test]
    fn sample_midpoint_is_average() {
        let s = spec([4, 4, 4]);
        let f = ScalarField::from_fn(s, |i, _, _| if i == 2 { 1.0 } else { 0.0 });
        let mid = (s.center(1, 1, 1) + s.center(2, 1, 1)) * 0.5;
        assert!((f.sample(&mid) - 0.5).abs() < 1e-6);
    }

    #[test]
    fn sample_clamps_outside() {
        let s = spec([3, 3, 3]);
        let f = ScalarField::from_fn(s, |i, j, k| (i + j + k) as f32);
        let far = s.center(2, 2, 2) + Vec3::new(10.0, 10.0, 10.0);
        assert_eq!(f.sample(&far), 6.0);
        let below = s.center(0, 0, 0) - Vec3::new(10.0, 10.0, 10.0);
        assert_eq!(f.sample(&below), 0.0);
    }

    #[test]
    fn vector_sample_matches_components() {
        let s = spec([4, 5, 3]);
        let v = VectorField::from_fn(s, |i, j, k| Vec3::new(i as f32, j as f32 * 2.0, -(k as f32)));
        let p = s.origin() + Vec3::new(0.071, 0.12, 0.093);
        let c = v.components();
        let got = v.sample(&p);
        for a in 0..3 {
            assert!((got[a] - c[a].sample(&p)).abs() < 1e-6);
        }
    }

    proptest! {
        // affine functions are reproduced exactly inside the hull of centers
        #[test]
        fn trilinear_reproduces_affine(x in 0.0f32..1.0, y in 0.0f32..1.0, z in 0.0f32..1.0) {
            let s = spec([6, 5, 4]);
            let f = ScalarField::from_fn(s, |i, j, k| {
                let c = s.center(i, j, k);
                c.x + 2.0 * c.y + 3.0 * c.z
            });
            let lo = s.center(0, 0, 0);
            let hi = s.center(5, 4, 3);
            let p = lo + (hi - lo).component_mul(&Vec3::new(x, y, z));
            let expect = p.x + 2.0 * p.y + 3.0 * p.z;
            prop_assert!((f.sample(&p) - expect).abs() < 1e-4);
        }

        #[test]
        fn trilinear_maximum_principle(
            vals in proptest::collection::vec(-5.0f32..5.0, 27),
            x in -0.2f32..0.4, y in -0.2f32..0.4, z in -0.2f32..0.4,
        ) {
            let s = GridSpec::new([3, 3, 3], Vec3::zeros(), 0.1).unwrap();
            let f = ScalarField::from_values(s, vals).unwrap();
            let p = Vec3::new(x, y, z);
            let g = s.to_grid_coords(&p);
            // stencil corners after clamping
            let mut lo = f32::INFINITY;
            let mut hi = f32::NEG_INFINITY;
            let base: Vec<usize> = (0..3).map(|a| (g[a].clamp(0.0, 2.0).floor() as usize).min(1)).collect();
            for dk in 0..2 { for dj in 0..2 { for di in 0..2 {
                let v = f.get(base[0] + di, base[1] + dj, base[2] + dk);
                lo = lo.min(v);
                hi = hi.max(v);
            }}}
            let got = f.sample(&p);
            prop_assert!(got >= lo - 1e-5 && got <= hi + 1e-5);
        }
    }
}
