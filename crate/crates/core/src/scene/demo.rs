//! Procedural box-on-plane scene with analytically shaded gbuffers.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CameraEntry, RunConfig};
use crate::charring::CharParams;
use crate::fire::SimParams;
use crate::grid::{GridSpec, Vec3};
use crate::io::{self, camera_to_text, materials_to_text, FormatError};
use crate::material::{Material, MaterialTable};
use crate::occupancy::LabeledPoint;
use crate::render::{Camera, GBuffer, RenderParams};
use crate::spectral::LinearRgb;

const N: usize = 96;
const H: f32 = 0.01;
/// Ground occupies cell layers `0..GROUND`.
const GROUND: usize = 2;
/// Wooden box cell ranges `[lo, hi)` per axis.
pub const DEMO_BOX: [[usize; 2]; 3] = [[40, 56], [40, 56], [2, 14]];
/// Bottom-center cell of the box face that looks toward `-y`.
pub const DEMO_IGNITION: [i64; 3] = [48, 40, 2];

const GROUND_ID: u32 = 0;
const WOOD_ID: u32 = 1;
const SOLID_OPACITY: f32 = 0.9;
const FLOATERS: usize = 2000;
const SEED: u64 = 7;

const SKY: [f64; 3] = [0.45, 0.55, 0.7];
const WOOD: [f64; 3] = [0.55, 0.36, 0.2];
const GROUND_A: [f64; 3] = [0.3, 0.3, 0.27];
const GROUND_B: [f64; 3] = [0.36, 0.35, 0.31];

pub struct DemoScene {
    pub spec: GridSpec,
    pub points: Vec<LabeledPoint>,
    pub materials: MaterialTable,
    /// `(id, camera, gbuffer)`.
    pub views: Vec<(String, Camera, GBuffer)>,
}

fn in_box(c: [usize; 3]) -> bool {
    (0..3).all(|a| (DEMO_BOX[a][0]..DEMO_BOX[a][1]).contains(&c[a]))
}

fn box_bounds() -> (Vector3<f64>, Vector3<f64>) {
    let lo = Vector3::from_fn(|a, _| DEMO_BOX[a][0] as f64 * H as f64);
    let hi = Vector3::from_fn(|a, _| DEMO_BOX[a][1] as f64 * H as f64);
    (lo, hi)
}

/// Nearest hit of the ground plane or the box: `(t, normal, albedo)`.
fn trace(origin: Vector3<f64>, dir: Vector3<f64>) -> Option<(f64, Vector3<f64>, [f64; 3])> {
    let mut best: Option<(f64, Vector3<f64>, [f64; 3])> = None;
    let ground_z = GROUND as f64 * H as f64;
    if dir.z < 0.0 {
        let t = (ground_z - origin.z) / dir.z;
        if t > 0.0 {
            let p = origin + dir * t;
            // 10 cm checker
            let parity = ((p.x * 10.0).floor() as i64 + (p.y * 10.0).floor() as i64).rem_euclid(2);
            best = Some((t, Vector3::z(), if parity == 0 { GROUND_A } else { GROUND_B }));
        }
    }
    let (lo, hi) = box_bounds();
    let (mut t0, mut t1, mut axis, mut sign) = (f64::NEG_INFINITY, f64::INFINITY, 0, 0.0);
    let mut hit = true;
    for a in 0..3 {
        if dir[a] == 0.0 {
            if origin[a] < lo[a] || origin[a] > hi[a] {
                hit = false;
            }
            continue;
        }
        let (ta, tb) = ((lo[a] - origin[a]) / dir[a], (hi[a] - origin[a]) / dir[a]);
        let (near, far, s) = if ta < tb { (ta, tb, -1.0) } else { (tb, ta, 1.0) };
        if near > t0 {
            t0 = near;
            axis = a;
            sign = s;
        }
        t1 = t1.min(far);
    }
    if hit && t0 <= t1 && t0 > 0.0 && best.is_none_or(|b| t0 < b.0) {
        let mut n = Vector3::zeros();
        n[axis] = sign;
        best = Some((t0, n, WOOD));
    }
    best
}

/// Constant-albedo Lambertian shading under a fixed sun plus ambient.
fn analytic_gbuffer(camera: &Camera) -> GBuffer {
    let sun = Vector3::new(0.3, -0.5, 0.8).normalize();
    let n = camera.width * camera.height;
    let mut color = Vec::with_capacity(n);
    let mut depth = Vec::with_capacity(n);
    let mut normal = Vec::with_capacity(n);
    for p in 0..n {
        let ray = camera.generate_ray(p % camera.width, p / camera.width);
        match trace(ray.origin, ray.dir) {
            Some((t, nrm, albedo)) => {
                let shade = 0.3 + 0.7 * nrm.dot(&sun).max(0.0);
                color.push(LinearRgb::from(albedo) * shade);
                depth.push(t as f32);
                normal.push(nrm.cast::<f32>());
            }
            None => {
                color.push(LinearRgb::from(SKY));
                depth.push(f32::INFINITY);
                normal.push(Vector3::z());
            }
        }
    }
    GBuffer::new(camera.width, camera.height, color, depth, normal).expect("analytic gbuffer is valid")
}

/// The demo scene at `width × height` per view.
pub fn demo_scene(width: usize, height: usize) -> DemoScene {
    let spec = GridSpec::new([N; 3], Vec3::zeros(), H).expect("demo grid");
    let mut points = Vec::new();
    for k in 0..N {
        for j in 0..N {
            for i in 0..N {
                let material_id = if k < GROUND {
                    GROUND_ID
                } else if in_box([i, j, k]) {
                    WOOD_ID
                } else {
                    continue;
                };
                points.push(LabeledPoint { position: spec.center(i, j, k), opacity: SOLID_OPACITY, material_id });
            }
        }
    }
    // faint splats scattered through the air stay below the opacity threshold
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let extent = N as f32 * H;
    for _ in 0..FLOATERS {
        let position = Vec3::new(rng.gen::<f32>(), rng.gen::<f32>(), rng.gen::<f32>()) * extent;
        points.push(LabeledPoint { position, opacity: rng.gen_range(0.0..0.2), material_id: GROUND_ID });
    }

    let mut materials = MaterialTable::new();
    materials.insert(GROUND_ID, Material::inert("ground"));
    materials.insert(
        WOOD_ID,
        Material {
            name: "wood".into(),
            burnable: true,
            beta: Some(5e-5),
            eps_c: Some(0.05),
            t_ign: Some(550.0),
            smoke_color: [0.85, 0.85, 0.85],
        },
    );

    let f = width as f64 * 0.95;
    let intr = [f, f, width as f64 / 2.0, height as f64 / 2.0];
    let target = Vector3::new(0.48, 0.48, 0.16);
    let eyes = [("front", Vector3::new(0.48, -0.25, 0.34)), ("side", Vector3::new(1.18, 0.12, 0.38))];
    let views = eyes
        .into_iter()
        .map(|(id, eye)| {
            let cam = Camera::look_at(width, height, intr, eye, target, Vector3::z()).expect("demo camera");
            let g = analytic_gbuffer(&cam);
            (id.to_string(), cam, g)
        })
        .collect();
    DemoScene { spec, points, materials, views }
}

/// Writes the demo scene into `dir` and returns the config path.
pub fn write_demo(dir: &Path, width: usize, height: usize) -> Result<PathBuf, FormatError> {
    fs::create_dir_all(dir).map_err(|e| FormatError::Io { path: dir.into(), msg: e.to_string() })?;
    let scene = demo_scene(width, height);
    io::write_points(&dir.join("demo.pnts"), &scene.points)?;
    io::write_bytes(&dir.join("materials.txt"), materials_to_text(&scene.materials).as_bytes())?;
    let mut cameras = Vec::new();
    for (id, cam, g) in &scene.views {
        let file = PathBuf::from(format!("{id}.camera"));
        io::write_bytes(&dir.join(&file), camera_to_text(cam).as_bytes())?;
        io::write_gbuffer(&dir.join(id), g)?;
        cameras.push(CameraEntry { id: id.clone(), file, gbuffer: PathBuf::from(id) });
    }
    let config = RunConfig {
        grid: scene.spec,
        opacity_threshold: 0.5,
        points: "demo.pnts".into(),
        materials: "materials.txt".into(),
        cameras,
        sim: SimParams::default(),
        char_params: CharParams::default(),
        render: RenderParams::default(),
        ignite: vec![DEMO_IGNITION],
        frames: 60,
        snapshot_every: 10,
        output: "out".into(),
    };
    let path = dir.join("demo.cfg");
    io::write_bytes(&path, config.to_text().as_bytes())?;
    Ok(path)
}
