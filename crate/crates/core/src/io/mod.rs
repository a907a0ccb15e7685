//! File formats: binary grids, points, float planes and PPM images, plus
//! the text documents for materials, cameras and run configuration.
//!
//! All binary integers and floats are little-endian. See `FORMATS.md` at
//! the repository root for byte layouts.

mod binary;
pub mod text;

pub use binary::{
    decode_plane, decode_points, decode_ppm, decode_vgrid, encode_plane, encode_points, encode_ppm, encode_vgrid,
    Plane, Vgrid, FPLN_HEADER_LEN, FPLN_MAGIC, PNTS_HEADER_LEN, PNTS_MAGIC, PNTS_RECORD_LEN, VERSION,
    VGRD_HEADER_LEN, VGRD_MAGIC,
};

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{Matrix4, Vector3};
use thiserror::Error;

use crate::charring::CharState;
use crate::fire::FireState;
use crate::grid::{ScalarField, VectorField};
use crate::material::{Material, MaterialTable};
use crate::occupancy::LabeledPoint;
use crate::render::{Camera, GBuffer, Image};
use crate::spectral::{srgb_decode, srgb_encode, LinearRgb};
use text::{join, Document, Fields};

#[derive(Debug, Error, PartialEq)]
pub enum FormatError {
    #[error("{path}: {msg}")]
    Io { path: PathBuf, msg: String },
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: Box<FormatError>,
    },
    #[error("bad magic at byte 0: expected {expected:?}, found {found:?}")]
    Magic { expected: String, found: String },
    #[error("unsupported version {found} at byte {offset}")]
    Version { found: u32, offset: usize },
    #[error("truncated at byte {offset}: expected {expected} bytes, got {actual}")]
    Truncated { offset: usize, expected: usize, actual: usize },
    #[error("trailing data at byte {offset}: expected {expected} bytes, got {actual}")]
    Trailing { offset: usize, expected: usize, actual: usize },
    #[error("invalid header at byte {offset}: {msg}")]
    Header { offset: usize, msg: String },
    #[error("{at}: {msg}")]
    Parse { at: String, msg: String },
    #[error("missing required key {key:?} in {section}")]
    Missing { section: String, key: String },
    #[error("{0}")]
    Invalid(String),
}

impl FormatError {
    pub fn in_file(self, path: &Path) -> Self {
        match self {
            e @ (FormatError::Io { .. } | FormatError::File { .. }) => e,
            e => FormatError::File { path: path.to_path_buf(), source: Box::new(e) },
        }
    }
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>, FormatError> {
    fs::read(path).map_err(|e| FormatError::Io { path: path.into(), msg: e.to_string() })
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), FormatError> {
    fs::write(path, bytes).map_err(|e| FormatError::Io { path: path.into(), msg: e.to_string() })
}

pub fn read_text(path: &Path) -> Result<String, FormatError> {
    fs::read_to_string(path).map_err(|e| FormatError::Io { path: path.into(), msg: e.to_string() })
}

fn with_path<T>(path: &Path, r: Result<T, FormatError>) -> Result<T, FormatError> {
    r.map_err(|e| e.in_file(path))
}

pub fn read_vgrid(path: &Path) -> Result<Vgrid, FormatError> {
    with_path(path, decode_vgrid(&read_bytes(path)?))
}

pub fn write_vgrid(path: &Path, grid: &Vgrid) -> Result<(), FormatError> {
    write_bytes(path, &with_path(path, encode_vgrid(grid))?)
}

pub fn read_points(path: &Path) -> Result<Vec<LabeledPoint>, FormatError> {
    with_path(path, decode_points(&read_bytes(path)?))
}

pub fn write_points(path: &Path, points: &[LabeledPoint]) -> Result<(), FormatError> {
    write_bytes(path, &encode_points(points))
}

pub fn read_plane(path: &Path) -> Result<Plane, FormatError> {
    with_path(path, decode_plane(&read_bytes(path)?))
}

pub fn write_plane(path: &Path, plane: &Plane) -> Result<(), FormatError> {
    write_bytes(path, &with_path(path, encode_plane(plane))?)
}

pub fn read_ppm(path: &Path) -> Result<Image, FormatError> {
    with_path(path, decode_ppm(&read_bytes(path)?))
}

pub fn write_ppm(path: &Path, image: &Image) -> Result<(), FormatError> {
    write_bytes(path, &encode_ppm(image))
}

/// Paths of the three gbuffer planes for `stem`.
pub fn gbuffer_paths(stem: &Path) -> [PathBuf; 3] {
    let s = stem.as_os_str().to_string_lossy();
    [
        PathBuf::from(format!("{s}.color.ppm")),
        PathBuf::from(format!("{s}.depth.fpln")),
        PathBuf::from(format!("{s}.normal.fpln")),
    ]
}

/// Loads `<stem>.color.ppm`, `<stem>.depth.fpln` and `<stem>.normal.fpln`.
/// Color is decoded to linear RGB; normals are renormalized.
pub fn read_gbuffer(stem: &Path) -> Result<GBuffer, FormatError> {
    let [cp, dp, np] = gbuffer_paths(stem);
    let color = read_ppm(&cp)?;
    let depth = read_plane(&dp)?;
    let normal = read_plane(&np)?;
    let size = (color.width, color.height);
    for (path, plane, channels) in [(&dp, &depth, 1), (&np, &normal, 3)] {
        if (plane.width, plane.height) != size {
            return Err(FormatError::Invalid(format!(
                "{} is {}x{} but {} is {}x{}",
                path.display(),
                plane.width,
                plane.height,
                cp.display(),
                size.0,
                size.1
            )));
        }
        if plane.channels != channels {
            return Err(FormatError::Invalid(format!(
                "{} has {} channels, expected {channels}",
                path.display(),
                plane.channels
            )));
        }
    }
    let colors = color
        .data
        .chunks_exact(3)
        .map(|c| LinearRgb::from_fn(|a, _| srgb_decode(c[a] as f64 / 255.0)))
        .collect();
    let normals = normal
        .data
        .chunks_exact(3)
        .map(|n| {
            let v = Vector3::new(n[0], n[1], n[2]);
            let len = v.norm();
            if len > 0.0 && len.is_finite() {
                v / len
            } else {
                v
            }
        })
        .collect();
    GBuffer::new(size.0, size.1, colors, depth.data, normals)
        .map_err(|e| FormatError::Invalid(format!("{}: {e}", stem.display())))
}

pub fn write_gbuffer(stem: &Path, g: &GBuffer) -> Result<(), FormatError> {
    let [cp, dp, np] = gbuffer_paths(stem);
    let data = g
        .color
        .iter()
        .flat_map(|c| c.iter().map(|&v| (srgb_encode(v) * 255.0 + 0.5).floor().clamp(0.0, 255.0) as u8).collect::<Vec<_>>())
        .collect();
    write_ppm(&cp, &Image { width: g.width, height: g.height, data })?;
    write_plane(&dp, &Plane { width: g.width, height: g.height, channels: 1, data: g.depth.clone() })?;
    let normals = g.normal.iter().flat_map(|n| [n.x, n.y, n.z]).collect();
    write_plane(&np, &Plane { width: g.width, height: g.height, channels: 3, data: normals })
}

fn invalid_at(at: &text::Origin, msg: impl Into<String>) -> FormatError {
    FormatError::Parse { at: at.to_string(), msg: msg.into() }
}

/// `[material.<id>]` sections with `name` and `burnable` required and
/// `beta`, `eps_c`, `t_ign`, `smoke_color` optional.
pub fn parse_materials(doc: &Document) -> Result<MaterialTable, FormatError> {
    let mut table = MaterialTable::new();
    for s in &doc.sections {
        if s.name.is_empty() && s.entries.is_empty() {
            continue;
        }
        let id: u32 = s
            .name
            .strip_prefix("material.")
            .and_then(|id| id.parse().ok())
            .ok_or_else(|| invalid_at(&s.origin, format!("expected [material.<id>], found [{}]", s.name)))?;
        let mut f = Fields::new(doc, &s.name);
        let name: String = f.required("name")?;
        let burnable: bool = f.required("burnable")?;
        let beta: Option<f32> = f.get("beta")?;
        let eps_c: Option<f32> = f.get("eps_c")?;
        let t_ign: Option<f32> = f.get("t_ign")?;
        let smoke_color = f.array::<f32, 3>("smoke_color")?.unwrap_or([0.5; 3]);
        f.finish()?;
        let nonneg = |v: Option<f32>| v.is_none_or(|v| v >= 0.0 && v.is_finite());
        if !(nonneg(beta) && nonneg(eps_c)) {
            return Err(invalid_at(&s.origin, format!("material {id}: beta and eps_c must be non-negative")));
        }
        if t_ign.is_some_and(|t| !(t > 0.0 && t.is_finite())) {
            return Err(invalid_at(&s.origin, format!("material {id}: t_ign must be positive")));
        }
        if !smoke_color.iter().all(|c| (0.0..=1.0).contains(c)) {
            return Err(invalid_at(&s.origin, format!("material {id}: smoke_color must lie in [0, 1]")));
        }
        table.insert(id, Material { name, burnable, beta, eps_c, t_ign, smoke_color });
    }
    Ok(table)
}

pub fn materials_to_text(table: &MaterialTable) -> String {
    let mut out = String::new();
    for (id, m) in table.iter() {
        out += &format!("[material.{id}]\nname = {}\nburnable = {}\n", m.name, m.burnable);
        for (key, v) in [("beta", m.beta), ("eps_c", m.eps_c), ("t_ign", m.t_ign)] {
            if let Some(v) = v {
                out += &format!("{key} = {v}\n");
            }
        }
        out += &format!("smoke_color = {}\n\n", join(m.smoke_color));
    }
    out
}

pub fn read_materials(path: &Path) -> Result<MaterialTable, FormatError> {
    with_path(path, Document::parse(&read_text(path)?).and_then(|d| parse_materials(&d)))
}

/// Camera rotations may deviate from orthonormal by this much.
pub const CAMERA_TOLERANCE: f64 = 1e-4;

/// Top-level `width`, `height`, `fx`, `fy`, `cx`, `cy` and a 16-number
/// row-major `world_from_camera`.
pub fn parse_camera(doc: &Document) -> Result<Camera, FormatError> {
    if let Some(s) = doc.sections.iter().find(|s| !s.name.is_empty()) {
        return Err(invalid_at(&s.origin, "camera files take no sections"));
    }
    let mut f = Fields::new(doc, "");
    let width = f.required("width")?;
    let height = f.required("height")?;
    let intr = [f.required("fx")?, f.required("fy")?, f.required("cx")?, f.required("cy")?];
    let (raw, origin) = f.required_raw("world_from_camera")?;
    let m: [f64; 16] = text::parse_array(raw, origin, "world_from_camera")?;
    f.finish()?;
    Camera::new(width, height, intr, Matrix4::from_row_slice(&m), CAMERA_TOLERANCE)
        .map_err(|e| invalid_at(origin, e.to_string()))
}

pub fn camera_to_text(c: &Camera) -> String {
    let m = c.world_from_camera();
    let rows: Vec<String> = (0..4).map(|r| join((0..4).map(|k| m[(r, k)]))).collect();
    format!(
        "width = {}\nheight = {}\nfx = {}\nfy = {}\ncx = {}\ncy = {}\nworld_from_camera = {}\n",
        c.width,
        c.height,
        c.fx,
        c.fy,
        c.cx,
        c.cy,
        rows.join(",  ")
    )
}

pub fn read_camera(path: &Path) -> Result<Camera, FormatError> {
    with_path(path, Document::parse(&read_text(path)?).and_then(|d| parse_camera(&d)))
}

/// Channel order of simulation snapshots.
pub const SNAPSHOT_CHANNELS: [&str; 7] = ["ux", "uy", "uz", "Y", "p", "T_m", "M_c"];

/// Simulation state at the end of a frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub fire: FireState,
    pub char_state: CharState,
}

impl Snapshot {
    pub fn to_vgrid(&self) -> Vgrid {
        let [ux, uy, uz] = self.fire.u.components();
        Vgrid {
            spec: *self.fire.spec(),
            channels: vec![
                ux.into_values(),
                uy.into_values(),
                uz.into_values(),
                self.fire.y.values().to_vec(),
                self.fire.p.values().to_vec(),
                self.char_state.t_m.values().to_vec(),
                self.char_state.m_c.values().to_vec(),
            ],
        }
    }

    pub fn from_vgrid(g: Vgrid) -> Result<Self, FormatError> {
        if g.channels.len() != SNAPSHOT_CHANNELS.len() {
            return Err(FormatError::Invalid(format!(
                "snapshot needs {} channels ({}), found {}",
                SNAPSHOT_CHANNELS.len(),
                SNAPSHOT_CHANNELS.join(", "),
                g.channels.len()
            )));
        }
        let spec = g.spec;
        let mut ch = g.channels.into_iter();
        let mut next = || ScalarField::from_values(spec, ch.next().unwrap()).expect("decoded channel length");
        let (ux, uy, uz) = (next(), next(), next());
        let u = VectorField::from_components(&[ux, uy, uz]);
        let (y, p, t_m, m_c) = (next(), next(), next(), next());
        Ok(Self { fire: FireState { u, y, p }, char_state: CharState { t_m, m_c } })
    }
}

pub fn snapshot_path(dir: &Path, frame: usize) -> PathBuf {
    dir.join(format!("frame_{frame:05}.vgrd"))
}

pub fn write_snapshot(path: &Path, snap: &Snapshot) -> Result<(), FormatError> {
    write_vgrid(path, &snap.to_vgrid())
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot, FormatError> {
    with_path(path, read_vgrid(path).and_then(Snapshot::from_vgrid))
}
