//! Run configuration and the built-in demo scene.

mod demo;

pub use demo::{demo_scene, write_demo, DemoScene, DEMO_BOX, DEMO_IGNITION};

use std::path::{Path, PathBuf};

use crate::charring::CharParams;
use crate::fire::SimParams;
use crate::grid::{GridSpec, Vec3};
use crate::io::text::{join, Document, Fields, Origin};
use crate::io::{gbuffer_paths, read_text, FormatError};
use crate::render::RenderParams;

#[derive(Debug, Clone, PartialEq)]
pub struct CameraEntry {
    pub id: String,
    pub file: PathBuf,
    /// Stem of the three gbuffer planes.
    pub gbuffer: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub grid: GridSpec,
    pub opacity_threshold: f32,
    pub points: PathBuf,
    pub materials: PathBuf,
    pub cameras: Vec<CameraEntry>,
    pub sim: SimParams,
    pub char_params: CharParams,
    pub render: RenderParams,
    pub ignite: Vec<[i64; 3]>,
    pub frames: usize,
    /// Write a snapshot every this many frames.
    pub snapshot_every: usize,
    pub output: PathBuf,
}

const KNOWN_SECTIONS: [&str; 6] = ["grid", "scene", "run", "sim", "char", "render"];

fn invalid(msg: impl Into<String>) -> FormatError {
    FormatError::Invalid(msg.into())
}

/// `i,j,k` triples separated by `;`.
pub fn parse_voxels(v: &str, origin: &Origin) -> Result<Vec<[i64; 3]>, FormatError> {
    v.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| crate::io::text::parse_array(s, origin, "ignite"))
        .collect()
}

fn resolve(base: &Path, p: &str) -> PathBuf {
    let p = Path::new(p);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl RunConfig {
    /// Builds a config from a parsed document; relative paths are taken
    /// against `base`. Parameters are validated but files are not touched.
    pub fn from_document(doc: &Document, base: &Path) -> Result<Self, FormatError> {
        for s in &doc.sections {
            let known = KNOWN_SECTIONS.contains(&s.name.as_str()) || s.name.starts_with("camera.");
            if !known || (s.name.is_empty() && !s.entries.is_empty()) {
                return Err(FormatError::Parse {
                    at: s.origin.to_string(),
                    msg: format!("unknown section [{}]", s.name),
                });
            }
        }

        let mut g = Fields::new(doc, "grid");
        let dims: [usize; 3] = g.array("dims")?.ok_or_else(|| missing("grid", "dims"))?;
        let origin: [f32; 3] = g.array("origin")?.unwrap_or([0.0; 3]);
        let spacing: f32 = g.required("spacing")?;
        let opacity_threshold = g.get("opacity_threshold")?.unwrap_or(0.5);
        g.finish()?;
        let grid = GridSpec::new(dims, Vec3::from(origin), spacing).map_err(|e| invalid(format!("[grid]: {e}")))?;
        if !(0.0..1.0).contains(&opacity_threshold) {
            return Err(invalid("[grid]: opacity_threshold must lie in [0, 1)"));
        }

        let mut s = Fields::new(doc, "scene");
        let points = resolve(base, &s.required::<String>("points")?);
        let materials = resolve(base, &s.required::<String>("materials")?);
        s.finish()?;

        let mut cameras = Vec::new();
        for sec in doc.sections.iter().filter(|s| s.name.starts_with("camera.")) {
            let id = sec.name["camera.".len()..].to_string();
            let mut f = Fields::new(doc, &sec.name);
            let file = resolve(base, &f.required::<String>("file")?);
            let gbuffer = resolve(base, &f.required::<String>("gbuffer")?);
            f.finish()?;
            cameras.push(CameraEntry { id, file, gbuffer });
        }

        let mut r = Fields::new(doc, "run");
        let frames = r.get("frames")?.unwrap_or(1);
        let snapshot_every = r.get("snapshot_every")?.unwrap_or(1);
        let output = resolve(base, &r.get::<String>("output")?.unwrap_or_else(|| "out".into()));
        let ignite = match r.raw("ignite") {
            Some((v, origin)) => parse_voxels(v, origin)?,
            None => Vec::new(),
        };
        r.finish()?;
        if frames == 0 || snapshot_every == 0 {
            return Err(invalid("[run]: frames and snapshot_every must be at least 1"));
        }

        let sim = parse_sim(doc)?;
        let char_params = parse_char(doc)?;
        let render = parse_render(doc)?;
        Ok(Self {
            grid,
            opacity_threshold,
            points,
            materials,
            cameras,
            sim,
            char_params,
            render,
            ignite,
            frames,
            snapshot_every,
            output,
        })
    }

    /// Reads `path`, applies `section.key = value` overrides, parses, and
    /// checks that every referenced file exists.
    pub fn load(path: &Path, overrides: &[(String, String)]) -> Result<Self, FormatError> {
        let mut doc = Document::parse(&read_text(path)?).map_err(|e| e.in_file(path))?;
        for (k, v) in overrides {
            doc.set_override(k, v)?;
        }
        let base = path.parent().unwrap_or(Path::new("."));
        let cfg = Self::from_document(&doc, base).map_err(|e| e.in_file(path))?;
        cfg.check_files()?;
        Ok(cfg)
    }

    /// Every referenced input must exist.
    pub fn check_files(&self) -> Result<(), FormatError> {
        let mut required = vec![("points", self.points.clone()), ("materials", self.materials.clone())];
        for c in &self.cameras {
            required.push(("camera", c.file.clone()));
            for p in gbuffer_paths(&c.gbuffer) {
                required.push(("gbuffer", p));
            }
        }
        for (what, p) in required {
            if !p.is_file() {
                return Err(invalid(format!("missing {what} file {}", p.display())));
            }
        }
        Ok(())
    }

    pub fn camera(&self, id: &str) -> Option<&CameraEntry> {
        self.cameras.iter().find(|c| c.id == id)
    }

    /// Every setting, defaults included, as a config document.
    pub fn to_document(&self) -> Document {
        let mut doc = Document::default();
        let mut set = |k: &str, v: String| doc.set_override(k, &v).expect("static keys are valid");
        let g = &self.grid;
        set("grid.dims", join(g.dims()));
        set("grid.origin", join(g.origin().iter()));
        set("grid.spacing", g.spacing().to_string());
        set("grid.opacity_threshold", self.opacity_threshold.to_string());
        set("scene.points", self.points.display().to_string());
        set("scene.materials", self.materials.display().to_string());
        set("run.frames", self.frames.to_string());
        set("run.snapshot_every", self.snapshot_every.to_string());
        set("run.output", self.output.display().to_string());
        if !self.ignite.is_empty() {
            set("run.ignite", self.ignite.iter().map(join).collect::<Vec<_>>().join("; "));
        }
        let s = &self.sim;
        set("sim.dt", s.dt.to_string());
        set("sim.k", s.k.to_string());
        set("sim.alpha", s.alpha.to_string());
        set("sim.t_air", s.t_air.to_string());
        set("sim.t_max", s.t_max.to_string());
        set("sim.eps_vort", s.eps_vort.to_string());
        set("sim.wind", join(s.wind.iter()));
        set("sim.rho", s.rho.to_string());
        set("sim.projection_iters", s.projection_iters.to_string());
        set("sim.projection_tol", s.projection_tol.to_string());
        set("sim.projection_omega", s.projection_omega.map_or("auto".into(), |w| w.to_string()));
        set("sim.temperature_curve", join(s.temperature_curve));
        let c = &self.char_params;
        set("char.beta", c.beta.to_string());
        set("char.gamma_m", c.gamma_m.to_string());
        set("char.t_amb", c.t_amb.to_string());
        set("char.t_ign", c.t_ign.to_string());
        set("char.t_burn", c.t_burn.to_string());
        set("char.eps_c", c.eps_c.to_string());
        set("char.substeps", c.substeps.to_string());
        let r = &self.render;
        set("render.sigma_a", r.sigma_a.to_string());
        set("render.y_smoke", r.y_smoke.to_string());
        set("render.sigma_s_smoke", r.sigma_s_smoke.to_string());
        set("render.smoke_ambient", r.smoke_ambient.to_string());
        set("render.m_c_dark", r.m_c_dark.to_string());
        set("render.r_dark", r.r_dark.to_string());
        set("render.k_d", r.k_d.to_string());
        set("render.k_s", r.k_s.to_string());
        set("render.shininess", r.shininess.to_string());
        set("render.t_light", r.t_light.to_string());
        set("render.max_lights", r.max_lights.to_string());
        set("render.light_falloff", r.light_falloff.to_string());
        set("render.n_coarse", r.n_coarse.to_string());
        set("render.n_fine", r.n_fine.to_string());
        set("render.exposure", r.exposure.to_string());
        set("render.fire_brightness", r.fire_brightness.to_string());
        for cam in &self.cameras {
            set(&format!("camera.{}.file", cam.id), cam.file.display().to_string());
            set(&format!("camera.{}.gbuffer", cam.id), cam.gbuffer.display().to_string());
        }
        doc
    }

    pub fn to_text(&self) -> String {
        self.to_document().to_string()
    }
}

fn missing(section: &str, key: &str) -> FormatError {
    FormatError::Missing { section: format!("[{section}]"), key: key.into() }
}

fn parse_sim(doc: &Document) -> Result<SimParams, FormatError> {
    let mut p = SimParams::default();
    let mut f = Fields::new(doc, "sim");
    f.update("dt", &mut p.dt)?;
    f.update("k", &mut p.k)?;
    f.update("alpha", &mut p.alpha)?;
    f.update("t_air", &mut p.t_air)?;
    f.update("t_max", &mut p.t_max)?;
    f.update("eps_vort", &mut p.eps_vort)?;
    if let Some(w) = f.array::<f32, 3>("wind")? {
        p.wind = Vec3::from(w);
    }
    f.update("rho", &mut p.rho)?;
    f.update("projection_iters", &mut p.projection_iters)?;
    f.update("projection_tol", &mut p.projection_tol)?;
    if let Some((v, origin)) = f.raw("projection_omega") {
        p.projection_omega = match v {
            "auto" => None,
            v => Some(crate::io::text::parse_value(v, origin, "projection_omega")?),
        };
    }
    if let Some(c) = f.array::<f32, 3>("temperature_curve")? {
        p.temperature_curve = c;
    }
    f.finish()?;
    p.validate().map_err(|e| invalid(format!("[sim]: {e}")))?;
    Ok(p)
}

fn parse_char(doc: &Document) -> Result<CharParams, FormatError> {
    let mut p = CharParams::default();
    let mut f = Fields::new(doc, "char");
    f.update("beta", &mut p.beta)?;
    f.update("gamma_m", &mut p.gamma_m)?;
    f.update("t_amb", &mut p.t_amb)?;
    f.update("t_ign", &mut p.t_ign)?;
    f.update("t_burn", &mut p.t_burn)?;
    f.update("eps_c", &mut p.eps_c)?;
    f.update("substeps", &mut p.substeps)?;
    f.finish()?;
    p.validate().map_err(|e| invalid(format!("[char]: {e}")))?;
    Ok(p)
}

fn parse_render(doc: &Document) -> Result<RenderParams, FormatError> {
    let mut p = RenderParams::default();
    let mut f = Fields::new(doc, "render");
    f.update("sigma_a", &mut p.sigma_a)?;
    f.update("y_smoke", &mut p.y_smoke)?;
    f.update("sigma_s_smoke", &mut p.sigma_s_smoke)?;
    f.update("smoke_ambient", &mut p.smoke_ambient)?;
    f.update("m_c_dark", &mut p.m_c_dark)?;
    f.update("r_dark", &mut p.r_dark)?;
    f.update("k_d", &mut p.k_d)?;
    f.update("k_s", &mut p.k_s)?;
    f.update("shininess", &mut p.shininess)?;
    f.update("t_light", &mut p.t_light)?;
    f.update("max_lights", &mut p.max_lights)?;
    f.update("light_falloff", &mut p.light_falloff)?;
    f.update("n_coarse", &mut p.n_coarse)?;
    f.update("n_fine", &mut p.n_fine)?;
    f.update("exposure", &mut p.exposure)?;
    f.update("fire_brightness", &mut p.fire_brightness)?;
    f.finish()?;
    p.validate().map_err(|e| invalid(format!("[render]: {e}")))?;
    Ok(p)
}
