use nalgebra::{Matrix3, Matrix4, Vector3};

use super::RenderError;
use crate::spectral::LinearRgb;

/// World-space ray with unit direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Vector3<f64>,
    pub dir: Vector3<f64>,
}

impl Ray {
    #[inline]
    pub fn at(&self, t: f64) -> Vector3<f64> {
        self.origin + self.dir * t
    }
}

/// Pinhole camera: +x right, +y down, +z forward in camera space.
#[derive(Debug, Clone, PartialEq)]
pub struct Camera {
    pub width: usize,
    pub height: usize,
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    world_from_camera: Matrix4<f64>,
}

impl Camera {
    /// Rejects non-positive focal lengths, empty images and transforms
    /// whose rotation block is not orthonormal within `tol`.
    pub fn new(
        width: usize,
        height: usize,
        [fx, fy, cx, cy]: [f64; 4],
        world_from_camera: Matrix4<f64>,
        tol: f64,
    ) -> Result<Self, RenderError> {
        if width == 0 || height == 0 {
            return Err(RenderError::Camera("image size must be positive".into()));
        }
        if !(fx > 0.0 && fy > 0.0 && cx.is_finite() && cy.is_finite()) {
            return Err(RenderError::Camera("focal lengths must be positive".into()));
        }
        if !world_from_camera.iter().all(|v| v.is_finite()) {
            return Err(RenderError::Camera("non-finite transform".into()));
        }
        let r = world_from_camera.fixed_view::<3, 3>(0, 0).into_owned();
        let err = (r.transpose() * r - Matrix3::identity()).abs().max();
        if err > tol || r.determinant() < 0.0 {
            return Err(RenderError::Camera(format!(
                "rotation is not orthonormal (deviation {err:.3e})"
            )));
        }
        let last = world_from_camera.row(3);
        if last[0] != 0.0 || last[1] != 0.0 || last[2] != 0.0 || last[3] != 1.0 {
            return Err(RenderError::Camera("last row must be 0 0 0 1".into()));
        }
        Ok(Self { width, height, fx, fy, cx, cy, world_from_camera })
    }

    /// Camera at `eye` looking at `target`, with image-down roughly along
    /// `-up`.
    pub fn look_at(
        width: usize,
        height: usize,
        intrinsics: [f64; 4],
        eye: Vector3<f64>,
        target: Vector3<f64>,
        up: Vector3<f64>,
    ) -> Result<Self, RenderError> {
        let z = (target - eye).normalize();
        let x = z.cross(&up).normalize();
        let y = z.cross(&x);
        if !(x.iter().chain(y.iter()).all(|v| v.is_finite())) {
            return Err(RenderError::Camera("degenerate look-at basis".into()));
        }
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 1>(0, 0).copy_from(&x);
        m.fixed_view_mut::<3, 1>(0, 1).copy_from(&y);
        m.fixed_view_mut::<3, 1>(0, 2).copy_from(&z);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&eye);
        Self::new(width, height, intrinsics, m, 1e-9)
    }

    pub fn world_from_camera(&self) -> &Matrix4<f64> {
        &self.world_from_camera
    }

    pub fn position(&self) -> Vector3<f64> {
        self.world_from_camera.fixed_view::<3, 1>(0, 3).into_owned()
    }

    /// Ray through the center of pixel `(i, j)` (column, row).
    pub fn generate_ray(&self, i: usize, j: usize) -> Ray {
        assert!(i < self.width && j < self.height, "pixel ({i}, {j}) out of bounds");
        let d = Vector3::new(
            (i as f64 + 0.5 - self.cx) / self.fx,
            (j as f64 + 0.5 - self.cy) / self.fy,
            1.0,
        );
        let r = self.world_from_camera.fixed_view::<3, 3>(0, 0);
        Ray { origin: self.position(), dir: (r * d).normalize() }
    }
}

/// Per-pixel background: linear color, ray depth and world normal.
#[derive(Debug, Clone, PartialEq)]
pub struct GBuffer {
    pub width: usize,
    pub height: usize,
    pub color: Vec<LinearRgb>,
    /// Distance along the pixel ray; `+inf` for sky.
    pub depth: Vec<f32>,
    pub normal: Vec<Vector3<f32>>,
}

impl GBuffer {
    pub fn new(
        width: usize,
        height: usize,
        color: Vec<LinearRgb>,
        depth: Vec<f32>,
        normal: Vec<Vector3<f32>>,
    ) -> Result<Self, RenderError> {
        let n = width * height;
        if color.len() != n || depth.len() != n || normal.len() != n {
            return Err(RenderError::Param(format!(
                "gbuffer planes must hold {n} pixels (color {}, depth {}, normal {})",
                color.len(),
                depth.len(),
                normal.len()
            )));
        }
        for (p, (&d, nrm)) in depth.iter().zip(&normal).enumerate() {
            if !(d > 0.0) {
                return Err(RenderError::Param(format!("pixel {p}: depth must be positive or +inf")));
            }
            if d.is_finite() && (nrm.norm() - 1.0).abs() > 1e-3 {
                return Err(RenderError::Param(format!("pixel {p}: normal is not unit length")));
            }
        }
        Ok(Self { width, height, color, depth, normal })
    }

    /// Everything sky, in one color.
    pub fn sky(width: usize, height: usize, color: LinearRgb) -> Self {
        let n = width * height;
        Self {
            width,
            height,
            color: vec![color; n],
            depth: vec![f32::INFINITY; n],
            normal: vec![Vector3::z(); n],
        }
    }
}
