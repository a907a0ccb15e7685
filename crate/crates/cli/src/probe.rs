//! Describes an input or output file and checks that it decodes.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::Result;
use emberfield::io::text::Document;
use emberfield::io::{
    self, decode_plane, decode_points, decode_ppm, decode_vgrid, parse_camera, parse_materials, FormatError,
    FPLN_MAGIC, PNTS_MAGIC, SNAPSHOT_CHANNELS, VGRD_MAGIC,
};
use emberfield::scene::RunConfig;

use crate::input_error;

#[derive(Debug, Clone, Copy)]
struct Stats {
    min: f32,
    max: f32,
    mean: f64,
    non_finite: usize,
}

fn stats(values: impl Iterator<Item = f32>) -> Stats {
    let (mut min, mut max, mut sum, mut n, mut non_finite) = (f32::INFINITY, f32::NEG_INFINITY, 0.0f64, 0usize, 0);
    for v in values {
        if !v.is_finite() {
            non_finite += 1;
            continue;
        }
        min = min.min(v);
        max = max.max(v);
        sum += v as f64;
        n += 1;
    }
    let mean = if n > 0 { sum / n as f64 } else { f64::NAN };
    Stats { min, max, mean, non_finite }
}

fn stats_line(out: &mut String, name: &str, s: Stats) {
    let _ = write!(out, "  {name:<8} min={} max={} mean={:.6}", s.min, s.max, s.mean);
    if s.non_finite > 0 {
        let _ = write!(out, " non_finite={}", s.non_finite);
    }
    out.push('\n');
}

fn in_file(path: &Path) -> impl Fn(FormatError) -> FormatError + '_ {
    move |e| e.in_file(path)
}

/// A human-readable description of `path`, ending in a `verdict:` line.
/// Files that do not decode are reported as errors carrying the byte offset
/// or line of the problem.
pub fn probe(path: &Path) -> Result<String> {
    let bytes = io::read_bytes(path)?;
    let mut out = format!("file: {}\n", path.display());
    let magic = bytes.get(..4).unwrap_or(&bytes);
    if magic == VGRD_MAGIC {
        let g = decode_vgrid(&bytes).map_err(in_file(path))?;
        let [nx, ny, nz] = g.spec.dims();
        let o = g.spec.origin();
        let _ = writeln!(out, "format: VGRD voxel grid");
        let _ = writeln!(out, "dims: {nx} x {ny} x {nz}");
        let _ = writeln!(out, "origin: {} {} {}", o.x, o.y, o.z);
        let _ = writeln!(out, "spacing: {}", g.spec.spacing());
        let _ = writeln!(out, "channels: {}", g.channels.len());
        let snapshot = g.channels.len() == SNAPSHOT_CHANNELS.len();
        for (c, ch) in g.channels.iter().enumerate() {
            let name = if snapshot { SNAPSHOT_CHANNELS[c].to_string() } else { format!("ch{c}") };
            stats_line(&mut out, &name, stats(ch.iter().copied()));
        }
    } else if magic == PNTS_MAGIC {
        let pts = decode_points(&bytes).map_err(in_file(path))?;
        let _ = writeln!(out, "format: PNTS labeled points");
        let _ = writeln!(out, "points: {}", pts.len());
        for (a, name) in ["x", "y", "z"].iter().enumerate() {
            stats_line(&mut out, name, stats(pts.iter().map(|p| p.position[a])));
        }
        stats_line(&mut out, "opacity", stats(pts.iter().map(|p| p.opacity)));
        let mut ids: Vec<(u32, usize)> = Vec::new();
        for p in &pts {
            match ids.iter_mut().find(|(id, _)| *id == p.material_id) {
                Some((_, n)) => *n += 1,
                None => ids.push((p.material_id, 1)),
            }
        }
        ids.sort_unstable();
        let listed: Vec<String> = ids.iter().map(|(id, n)| format!("{id}:{n}")).collect();
        let _ = writeln!(out, "materials: {}", listed.join(" "));
    } else if magic == FPLN_MAGIC {
        let p = decode_plane(&bytes).map_err(in_file(path))?;
        let _ = writeln!(out, "format: FPLN float plane");
        let _ = writeln!(out, "size: {} x {}", p.width, p.height);
        let _ = writeln!(out, "channels: {}", p.channels);
        for c in 0..p.channels {
            let values = p.data.iter().skip(c).step_by(p.channels).copied();
            stats_line(&mut out, &format!("ch{c}"), stats(values));
        }
    } else if magic.starts_with(b"P6") {
        let img = decode_ppm(&bytes).map_err(in_file(path))?;
        let _ = writeln!(out, "format: PPM image");
        let _ = writeln!(out, "size: {} x {}", img.width, img.height);
        for (c, name) in ["r", "g", "b"].iter().enumerate() {
            stats_line(&mut out, name, stats(img.data.iter().skip(c).step_by(3).map(|&v| v as f32)));
        }
    } else {
        probe_text(path, &bytes, &mut out)?;
    }
    out += "verdict: ok\n";
    Ok(out)
}

fn probe_text(path: &Path, bytes: &[u8], out: &mut String) -> Result<()> {
    let text = std::str::from_utf8(bytes)
        .map_err(|_| input_error(format!("{}: unrecognized binary file (unknown magic)", path.display())))?;
    let doc = Document::parse(text).map_err(in_file(path))?;
    let names: Vec<&str> = doc.section_names().filter(|n| !n.is_empty()).collect();
    if names.contains(&"grid") {
        let base = path.parent().unwrap_or(Path::new("."));
        let cfg = RunConfig::from_document(&doc, base).map_err(in_file(path))?;
        let [nx, ny, nz] = cfg.grid.dims();
        let _ = writeln!(out, "format: run config");
        let _ = writeln!(out, "grid: {nx} x {ny} x {nz} spacing {}", cfg.grid.spacing());
        let _ = writeln!(out, "frames: {} (snapshot every {})", cfg.frames, cfg.snapshot_every);
        let ids: Vec<&str> = cfg.cameras.iter().map(|c| c.id.as_str()).collect();
        let _ = writeln!(out, "cameras: {}", ids.join(" "));
        let _ = writeln!(out, "ignite: {} voxel(s)", cfg.ignite.len());
        cfg.check_files()?;
        let _ = writeln!(out, "referenced files: present");
    } else if !names.is_empty() && names.iter().all(|n| n.starts_with("material.")) {
        let table = parse_materials(&doc).map_err(in_file(path))?;
        let _ = writeln!(out, "format: material table");
        for (id, m) in table.iter() {
            let _ = writeln!(out, "  {id}: {} burnable={}", m.name, m.burnable);
        }
    } else if names.is_empty() && text.contains("world_from_camera") {
        let c = parse_camera(&doc).map_err(in_file(path))?;
        let p = c.position();
        let _ = writeln!(out, "format: camera");
        let _ = writeln!(out, "size: {} x {}", c.width, c.height);
        let _ = writeln!(out, "focal: {} {}  principal point: {} {}", c.fx, c.fy, c.cx, c.cy);
        let _ = writeln!(out, "position: {} {} {}", p.x, p.y, p.z);
    } else {
        return Err(input_error(format!("{}: not a recognized emberfield file", path.display())));
    }
    Ok(())
}
