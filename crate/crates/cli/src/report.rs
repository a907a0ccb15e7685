//! Plain-text run reports: a header, one `key=value` line per event, and a
//! timing summary.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Duration;

use emberfield::render::RenderTimings;
use emberfield::sim::FrameDiagnostics;

/// Timing categories, in report order.
pub const CATEGORIES: [&str; 3] = ["simulation", "gs_composite", "fire_smoke"];

#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub command: String,
    pub config: String,
    /// Command-line overrides, verbatim.
    pub overrides: Vec<String>,
    pub warnings: Vec<String>,
    lines: Vec<String>,
    /// Summed seconds per category and the number of frames contributing.
    totals: [(f64, usize); 3],
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

impl RunReport {
    pub fn new(command: &str, config: &Path, overrides: Vec<String>) -> Self {
        Self { command: command.into(), config: config.display().to_string(), overrides, ..Default::default() }
    }

    pub fn warn(&mut self, msg: String) {
        log::warn!("{msg}");
        self.warnings.push(msg);
    }

    pub fn record_frame(&mut self, d: &FrameDiagnostics, elapsed: Duration) -> &str {
        let g = &d.gas;
        self.lines.push(format!(
            "frame={} max_divergence={:e} projection_residual={:e} projection_iters={} max_speed={} total_y={} \
             heat_substeps={} max_t_m={} charred_cells={} burning_cells={} simulation_ms={:.3}",
            d.frame,
            g.max_divergence,
            g.projection_residual,
            g.projection_iters,
            g.max_speed,
            g.total_y,
            d.heat_substeps,
            d.max_t_m,
            d.charred_cells,
            d.burning_cells,
            ms(elapsed)
        ));
        self.add(0, elapsed);
        self.lines.last().unwrap()
    }

    pub fn record_render(&mut self, frame: usize, camera: &str, t: &RenderTimings, image: &Path) -> &str {
        self.lines.push(format!(
            "render frame={frame} camera={camera} gs_composite_ms={:.3} fire_smoke_ms={:.3} image={}",
            ms(t.gs_composite),
            ms(t.fire_smoke),
            image.display()
        ));
        self.add(1, t.gs_composite);
        self.add(2, t.fire_smoke);
        self.lines.last().unwrap()
    }

    fn add(&mut self, c: usize, d: Duration) {
        self.totals[c].0 += d.as_secs_f64();
        self.totals[c].1 += 1;
    }

    /// Mean seconds per recorded event, per category.
    pub fn mean_seconds(&self) -> [Option<f64>; 3] {
        self.totals.map(|(s, n)| (n > 0).then(|| s / n as f64))
    }

    /// Timing table with one row per category.
    pub fn summary(&self) -> String {
        let mut out = format!("{:<14} {:>8} {:>12}\n", "category", "count", "mean_s");
        for (name, (s, n)) in CATEGORIES.iter().zip(self.totals) {
            if n > 0 {
                let _ = writeln!(out, "{name:<14} {n:>8} {:>12.4}", s / n as f64);
            }
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("# emberfield {} report\nconfig={}\n", self.command, self.config);
        for o in &self.overrides {
            let _ = writeln!(out, "override {o}");
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning {w}");
        }
        for l in &self.lines {
            out += l;
            out.push('\n');
        }
        for l in self.summary().lines() {
            let _ = writeln!(out, "# {l}");
        }
        out
    }
}
