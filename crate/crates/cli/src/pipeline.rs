//! Loading scenes, stepping the simulation, and rendering snapshots.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use emberfield::io::{self, read_snapshot, snapshot_path, write_snapshot, Snapshot};
use emberfield::material::SolidProps;
use emberfield::occupancy::build_occupancy;
use emberfield::render::{render_frame_timed, Camera, FrameInputs, GBuffer};
use emberfield::scene::RunConfig;
use emberfield::sim::Simulation;

use crate::input_error;
use crate::report::RunReport;

/// Command-line adjustments on top of a config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    /// `section.key=value` strings.
    pub set: Vec<String>,
    /// `i,j,k` strings; when present they replace the configured ignition list.
    pub ignite: Vec<String>,
    pub frames: Option<usize>,
    pub out: Option<PathBuf>,
}

impl Overrides {
    /// One line per override, as given on the command line.
    pub fn describe(&self) -> Vec<String> {
        let mut out: Vec<String> = self.set.iter().map(|s| format!("--set {s}")).collect();
        out.extend(self.ignite.iter().map(|s| format!("--ignite {s}")));
        if let Some(f) = self.frames {
            out.push(format!("--frames {f}"));
        }
        if let Some(o) = &self.out {
            out.push(format!("--out {}", o.display()));
        }
        out
    }

    fn pairs(&self) -> Result<Vec<(String, String)>> {
        let mut pairs = self
            .set
            .iter()
            .map(|s| {
                s.split_once('=')
                    .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                    .ok_or_else(|| input_error(format!("--set expects section.key=value, got {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if !self.ignite.is_empty() {
            pairs.push(("run.ignite".into(), self.ignite.join("; ")));
        }
        if let Some(f) = self.frames {
            pairs.push(("run.frames".into(), f.to_string()));
        }
        Ok(pairs)
    }
}

pub fn load_config(path: &Path, ov: &Overrides) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(path, &ov.pairs()?)?;
    if let Some(out) = &ov.out {
        cfg.output = out.clone();
    }
    Ok(cfg)
}

pub fn build_solids(cfg: &RunConfig) -> Result<SolidProps> {
    let points = io::read_points(&cfg.points)?;
    let materials = io::read_materials(&cfg.materials)?;
    let occ = build_occupancy(&points, cfg.grid, &materials, cfg.opacity_threshold)
        .with_context(|| format!("voxelizing {}", cfg.points.display()))?;
    Ok(SolidProps::new(occ, &materials, &cfg.char_params))
}

pub struct View {
    pub id: String,
    pub camera: Camera,
    pub gbuffer: GBuffer,
}

/// The selected camera, or every camera when `only` is `None`.
pub fn load_views(cfg: &RunConfig, only: Option<&str>) -> Result<Vec<View>> {
    let entries: Vec<_> = match only {
        Some(id) => vec![cfg.camera(id).ok_or_else(|| {
            let known: Vec<&str> = cfg.cameras.iter().map(|c| c.id.as_str()).collect();
            input_error(format!("unknown camera {id:?}; the config defines {known:?}"))
        })?],
        None => cfg.cameras.iter().collect(),
    };
    entries
        .into_iter()
        .map(|e| {
            let camera = io::read_camera(&e.file)?;
            let gbuffer = io::read_gbuffer(&e.gbuffer)?;
            if (camera.width, camera.height) != (gbuffer.width, gbuffer.height) {
                return Err(input_error(format!(
                    "camera {} is {}x{} but its gbuffer is {}x{}",
                    e.id, camera.width, camera.height, gbuffer.width, gbuffer.height
                )));
            }
            Ok(View { id: e.id.clone(), camera, gbuffer })
        })
        .collect()
}

pub fn image_path(dir: &Path, camera: &str, frame: usize) -> PathBuf {
    dir.join(format!("{camera}_{frame:05}.ppm"))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| input_error(format!("cannot create {}: {e}", dir.display())))
}

/// Runs `cfg.frames` frames, writing a snapshot every `cfg.snapshot_every`
/// frames and after the last one. `on_snapshot` sees each written frame.
pub fn simulate(
    cfg: &RunConfig,
    solids: SolidProps,
    report: &mut RunReport,
    mut on_snapshot: impl FnMut(usize, &Simulation, &mut RunReport) -> Result<()>,
) -> Result<Simulation> {
    create_dir(&cfg.output)?;
    let mut sim = Simulation::new(solids, cfg.sim.clone(), cfg.char_params.clone())?;
    let ignition = sim.ignite(&cfg.ignite)?;
    for c in &ignition.skipped {
        report.warn(format!("ignition voxel {},{},{} is not combustible and was skipped", c[0], c[1], c[2]));
    }
    if !cfg.ignite.is_empty() && ignition.ignited.is_empty() {
        report.warn("no ignition voxel is combustible; nothing will burn".into());
    }
    for _ in 0..cfg.frames {
        let start = Instant::now();
        let diag = sim.step();
        let line = report.record_frame(&diag, start.elapsed());
        println!("{line}");
        let frame = diag.frame;
        if frame % cfg.snapshot_every == 0 || frame == cfg.frames {
            let snap = Snapshot { fire: sim.fire.clone(), char_state: sim.char_state.clone() };
            write_snapshot(&snapshot_path(&cfg.output, frame), &snap)?;
            on_snapshot(frame, &sim, report)?;
        }
    }
    Ok(sim)
}

/// Renders one snapshot through every view into `cfg.output`.
pub fn render_views(
    cfg: &RunConfig,
    views: &[View],
    frame: usize,
    inputs: &FrameInputs,
    report: &mut RunReport,
) -> Result<()> {
    for v in views {
        let (image, timings) = render_frame_timed(&v.camera, &v.gbuffer, inputs, &cfg.render)?;
        let path = image_path(&cfg.output, &v.id, frame);
        io::write_ppm(&path, &image)?;
        println!("{}", report.record_render(frame, &v.id, &timings, &path));
    }
    Ok(())
}

/// `N` or an inclusive `A..B`.
pub fn parse_frame_range(s: &str) -> Result<(usize, usize)> {
    let bad = || input_error(format!("expected a frame number or A..B, got {s:?}"));
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (num(a)?, num(b)?),
        None => {
            let n = num(s)?;
            (n, n)
        }
    };
    if a > b {
        return Err(bad());
    }
    Ok((a, b))
}

/// Frame numbers of the snapshots in `dir`, ascending.
pub fn list_snapshots(dir: &Path) -> Result<Vec<usize>> {
    let entries = fs::read_dir(dir).map_err(|e| input_error(format!("cannot list {}: {e}", dir.display())))?;
    let mut frames: Vec<usize> = entries
        .filter_map(|e| e.ok())
        .filter_map(|e| {
            let name = e.file_name().into_string().ok()?;
            name.strip_prefix("frame_")?.strip_suffix(".vgrd")?.parse().ok()
        })
        .collect();
    frames.sort_unstable();
    Ok(frames)
}

fn write_report(cfg: &RunConfig, report: &RunReport) -> Result<PathBuf> {
    let path = cfg.output.join(format!("{}_report.txt", report.command));
    io::write_bytes(&path, report.to_text().as_bytes())?;
    Ok(path)
}

pub fn cmd_sim(config: &Path, ov: &Overrides) -> Result<RunReport> {
    let cfg = load_config(config, ov)?;
    let solids = build_solids(&cfg)?;
    let mut report = RunReport::new("sim", config, ov.describe());
    simulate(&cfg, solids, &mut report, |_, _, _| Ok(()))?;
    write_report(&cfg, &report)?;
    Ok(report)
}

/// Renders existing snapshots. `frames` selects a range; by default every
/// snapshot in the output directory is rendered.
pub fn cmd_render(config: &Path, ov: &Overrides, camera: Option<&str>, frames: Option<&str>) -> Result<RunReport> {
    let cfg = load_config(config, ov)?;
    let solids = build_solids(&cfg)?;
    let views = load_views(&cfg, camera)?;
    let available = list_snapshots(&cfg.output)?;
    let selected: Vec<usize> = match frames {
        Some(r) => {
            let (a, b) = parse_frame_range(r)?;
            if a == b {
                vec![a]
            } else {
                available.iter().copied().filter(|f| (a..=b).contains(f)).collect()
            }
        }
        None => available.clone(),
    };
    if selected.is_empty() {
        return Err(input_error(format!(
            "no snapshots to render in {} (run the simulation first)",
            cfg.output.display()
        )));
    }
    let mut report = RunReport::new("render", config, ov.describe());
    for frame in selected {
        let path = snapshot_path(&cfg.output, frame);
        if !path.is_file() {
            return Err(input_error(format!("snapshot for frame {frame} not found: {}", path.display())));
        }
        let snap = read_snapshot(&path)?;
        if snap.fire.spec() != &cfg.grid {
            return Err(input_error(format!("snapshot for frame {frame} does not match the configured grid")));
        }
        let inputs = FrameInputs { fire: &snap.fire, char_state: &snap.char_state, solids: &solids, sim: &cfg.sim };
        render_views(&cfg, &views, frame, &inputs, &mut report)?;
    }
    write_report(&cfg, &report)?;
    Ok(report)
}

/// Simulates and renders every snapshot as it is written.
pub fn cmd_run(config: &Path, ov: &Overrides, camera: Option<&str>) -> Result<RunReport> {
    let cfg = load_config(config, ov)?;
    let solids = build_solids(&cfg)?;
    let views = load_views(&cfg, camera)?;
    let mut report = RunReport::new("run", config, ov.describe());
    simulate(&cfg, solids, &mut report, |frame, sim, report| {
        let inputs =
            FrameInputs { fire: &sim.fire, char_state: &sim.char_state, solids: &sim.solids, sim: &sim.sim };
        render_views(&cfg, &views, frame, &inputs, report)
    })?;
    write_report(&cfg, &report)?;
    Ok(report)
}
