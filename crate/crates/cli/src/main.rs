use std::panic;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use emberfield_cli::pipeline::{cmd_render, cmd_run, cmd_sim, Overrides};
use emberfield_cli::{exit_code, probe, EXIT_INTERNAL};

/// Voxel fire simulation and rendering over point-cloud scenes.
#[derive(Parser)]
#[command(name = "emberfield", version)]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SceneArgs {
    /// Run config file.
    config: PathBuf,
    /// Override a config value, e.g. `--set sim.alpha=0.5`. Repeatable.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    set: Vec<String>,
    /// Output directory (defaults to `run.output` in the config).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimArgs {
    #[command(flatten)]
    scene: SceneArgs,
    /// Number of frames to simulate.
    #[arg(long)]
    frames: Option<usize>,
    /// Ignite the solid voxel `i,j,k`. Repeatable; replaces the config's list.
    #[arg(long, value_name = "I,J,K")]
    ignite: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate and write snapshots.
    Sim(SimArgs),
    /// Render snapshots written by `sim`.
    Render {
        #[command(flatten)]
        scene: SceneArgs,
        /// Render only this camera.
        #[arg(long)]
        camera: Option<String>,
        /// Frame `N` or inclusive range `A..B` (defaults to every snapshot).
        #[arg(long)]
        frames: Option<String>,
    },
    /// Simulate and render each snapshot as it is written.
    Run {
        #[command(flatten)]
        sim: SimArgs,
        /// Render only this camera.
        #[arg(long)]
        camera: Option<String>,
    },
    /// Write the built-in demo scene.
    Demo {
        /// Destination directory.
        dir: PathBuf,
        #[arg(long, default_value_t = 320)]
        width: usize,
        #[arg(long, default_value_t = 240)]
        height: usize,
    },
    /// Describe a grid, point, plane, image, or text file.
    Probe { file: PathBuf },
}

fn overrides(scene: &SceneArgs) -> Overrides {
    Overrides { set: scene.set.clone(), out: scene.out.clone(), ..Default::default() }
}

fn sim_overrides(a: &SimArgs) -> Overrides {
    Overrides { frames: a.frames, ignite: a.ignite.clone(), ..overrides(&a.scene) }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    match cli.command {
        Command::Sim(a) => {
            let report = cmd_sim(&a.scene.config, &sim_overrides(&a))?;
            print!("{}", report.summary());
        }
        Command::Render { scene, camera, frames } => {
            let report = cmd_render(&scene.config, &overrides(&scene), camera.as_deref(), frames.as_deref())?;
            print!("{}", report.summary());
        }
        Command::Run { sim, camera } => {
            let report = cmd_run(&sim.scene.config, &sim_overrides(&sim), camera.as_deref())?;
            print!("{}", report.summary());
        }
        Command::Demo { dir, width, height } => {
            let config = emberfield::scene::write_demo(&dir, width, height)?;
            println!("wrote {}", config.display());
        }
        Command::Probe { file } => print!("{}", probe::probe(&file)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e) as u8)
        }
        Err(_) => ExitCode::from(EXIT_INTERNAL as u8),
    }
}
