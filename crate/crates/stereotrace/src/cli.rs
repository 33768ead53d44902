//! Command-line front end: `render`, `stereo`, `bench`, and `scene gen`.
//!
//! Exit codes: 0 on success, 1 with a diagnostic on scene or I/O errors,
//! 2 on flag errors (clap's convention).

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::accel::{build_bvh, build_linear, AccelHandle, AccelMode, DEFAULT_LEAF_MAX};
use crate::bench::{run_bench, BenchPlan, BenchScene};
use crate::parallel::{assemble_image, env_thread_cap, render_channel, NetworkConfig};
use crate::scene::{
    builtin_object, experiment_scene, load_scene, serialize_scene, BuiltinKind, Camera, PointLight,
    Scene,
};
use crate::math::{Color, Vec3};
use crate::stereo::{
    run_pipeline, stage_fractions, PipelineJob, SceneSource, StereoMode, StereoOutput,
};
use crate::tracer::TraceSettings;

#[derive(Parser)]
#[command(
    name = "stereotrace",
    version,
    about = "Parallel stereo ray tracer and benchmark harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a single mono view of a scene
    Render(RenderArgs),
    /// Render a stereo pair through the staged pipeline
    Stereo(StereoArgs),
    /// Sweep scenes, resolutions, and worker grids; emit CSV timings
    Bench(BenchArgs),
    /// Scene-file utilities
    #[command(subcommand)]
    Scene(SceneCommand),
}

#[derive(Subcommand)]
enum SceneCommand {
    /// Write a scene file (generated layout, built-in solid, or reformat)
    Gen(GenArgs),
}

#[derive(Args)]
struct SceneSelect {
    /// Scene file to load
    #[arg(long, value_name = "PATH", conflicts_with = "paper_scene")]
    scene: Option<PathBuf>,
    /// Built-in experiment layout by object count
    #[arg(long, value_name = "N", value_parser = parse_paper_scene)]
    paper_scene: Option<u32>,
}

impl SceneSelect {
    fn load(&self) -> Result<Scene, String> {
        match (&self.scene, self.paper_scene) {
            (Some(path), _) => load_scene(path).map_err(|e| e.to_string()),
            (None, Some(n)) => experiment_scene(n).map_err(|e| e.to_string()),
            (None, None) => experiment_scene(1).map_err(|e| e.to_string()),
        }
    }
}

#[derive(Args)]
struct RenderArgs {
    #[command(flatten)]
    select: SceneSelect,
    /// Output resolution, WIDTHxHEIGHT
    #[arg(long, value_name = "WxH", default_value = "256x256", value_parser = parse_size)]
    size: (u32, u32),
    /// Worker grid, BLOCKSxTHREADS
    #[arg(long, value_name = "BxT", default_value = "1x1", value_parser = parse_config)]
    config: NetworkConfig,
    /// Intersection acceleration: linear or bvh
    #[arg(long, default_value = "bvh", value_parser = parse_accel)]
    accel: AccelMode,
    /// Maximum reflection recursion depth
    #[arg(long, value_name = "N", default_value_t = 3)]
    depth: u32,
    /// Output PPM path (timings print either way)
    #[arg(short, long, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct StereoArgs {
    #[command(flatten)]
    select: SceneSelect,
    #[arg(long, value_name = "WxH", default_value = "256x256", value_parser = parse_size)]
    size: (u32, u32),
    #[arg(long, value_name = "BxT", default_value = "1x1", value_parser = parse_config)]
    config: NetworkConfig,
    #[arg(long, default_value = "bvh", value_parser = parse_accel)]
    accel: AccelMode,
    #[arg(long, value_name = "N", default_value_t = 3)]
    depth: u32,
    /// Composition: separate, anaglyph, or sbs
    #[arg(long, default_value = "anaglyph", value_parser = parse_mode)]
    mode: StereoMode,
    /// Interocular distance in world units (default: scene's stereo record)
    #[arg(long, value_name = "F")]
    eye_sep: Option<f64>,
    /// Render the two channels concurrently
    #[arg(
        long,
        value_name = "on|off",
        default_value = "on",
        value_parser = parse_switch,
        action = clap::ArgAction::Set
    )]
    channel_parallel: bool,
    /// Output PPM path; separate mode appends _left/_right to the stem
    #[arg(short, long, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Scene file to sweep (repeatable)
    #[arg(long, value_name = "PATH")]
    scene: Vec<PathBuf>,
    /// Built-in experiment layout to sweep (repeatable; default 1 2 3 5 6)
    #[arg(long, value_name = "N", value_parser = parse_paper_scene)]
    paper_scene: Vec<u32>,
    /// Resolution to sweep (repeatable; default 128x128 and 256x256)
    #[arg(long, value_name = "WxH", value_parser = parse_size)]
    size: Vec<(u32, u32)>,
    /// Worker grids, comma-separated
    #[arg(long, value_name = "LIST", default_value = "1x1,2x1,4x1", value_parser = parse_config_list)]
    configs: ConfigList,
    /// Acceleration mode to sweep (repeatable; default bvh)
    #[arg(long, value_parser = parse_accel)]
    accel: Vec<AccelMode>,
    /// Repetitions per cell
    #[arg(long, value_name = "N", default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..))]
    reps: u32,
    /// CSV output path (default: stdout)
    #[arg(long, value_name = "PATH")]
    out_csv: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    select: SceneSelect,
    /// Emit a single built-in solid instead of a layout
    #[arg(long, value_parser = parse_builtin, conflicts_with_all = ["scene", "paper_scene"])]
    builtin: Option<BuiltinKind>,
    /// Output path (default: stdout)
    #[arg(short, long, value_name = "PATH")]
    output: Option<PathBuf>,
}

// clap maps a String error from these parsers to a usage error (exit 2).

fn parse_paper_scene(s: &str) -> Result<u32, String> {
    match s {
        "1" | "2" | "3" | "5" | "6" => Ok(s.parse().unwrap()),
        _ => Err(format!("supported experiment layouts: 1, 2, 3, 5, 6 (got '{s}')")),
    }
}

fn parse_size(s: &str) -> Result<(u32, u32), String> {
    let bad = || format!("expected WIDTHxHEIGHT (e.g. 256x256), got '{s}'");
    let (w, h) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    let width: u32 = w.trim().parse().map_err(|_| bad())?;
    let height: u32 = h.trim().parse().map_err(|_| bad())?;
    if width == 0 || height == 0 {
        return Err(format!("image dimensions must be at least 1, got '{s}'"));
    }
    Ok((width, height))
}

fn parse_config(s: &str) -> Result<NetworkConfig, String> {
    s.parse()
}

#[derive(Clone, Debug)]
struct ConfigList(Vec<NetworkConfig>);

fn parse_config_list(s: &str) -> Result<ConfigList, String> {
    let configs = s
        .split(',')
        .map(|part| part.trim().parse())
        .collect::<Result<Vec<NetworkConfig>, String>>()?;
    if configs.is_empty() {
        return Err("need at least one worker grid".into());
    }
    Ok(ConfigList(configs))
}

fn parse_accel(s: &str) -> Result<AccelMode, String> {
    s.parse()
}

fn parse_mode(s: &str) -> Result<StereoMode, String> {
    s.parse()
}

fn parse_switch(s: &str) -> Result<bool, String> {
    match s {
        "on" => Ok(true),
        "off" => Ok(false),
        other => Err(format!("expected on or off, got '{other}'")),
    }
}

fn parse_builtin(s: &str) -> Result<BuiltinKind, String> {
    s.parse()
}

/// Parse argv and execute; returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return err.exit_code();
        }
    };
    let result = match cli.command {
        Command::Render(args) => cmd_render(args),
        Command::Stereo(args) => cmd_stereo(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Scene(SceneCommand::Gen(args)) => cmd_scene_gen(args),
    };
    match result {
        Ok(()) => 0,
        Err(message) => {
            eprintln!("error: {message}");
            1
        }
    }
}

fn build_accel(scene: &Scene, mode: AccelMode) -> AccelHandle {
    match mode {
        AccelMode::Linear => build_linear(scene),
        AccelMode::Bvh => build_bvh(scene, DEFAULT_LEAF_MAX),
    }
}

fn cmd_render(args: RenderArgs) -> Result<(), String> {
    let total_start = Instant::now();
    let stage = Instant::now();
    let scene = args.select.load()?;
    let accel = build_accel(&scene, args.accel);
    let prepare = stage.elapsed().as_nanos();

    let settings = TraceSettings {
        max_depth: args.depth,
        ..TraceSettings::default()
    };
    let (width, height) = args.size;
    let stage = Instant::now();
    let (buffer, stats) = render_channel(
        &scene,
        &scene.camera(),
        &accel,
        &settings,
        width,
        height,
        args.config,
        env_thread_cap(),
    );
    let compute = stage.elapsed().as_nanos();

    let stage = Instant::now();
    let image = assemble_image(&buffer);
    let transfer_out = stage.elapsed().as_nanos();

    let stage = Instant::now();
    let bytes = image.encode_ppm();
    if let Some(path) = &args.output {
        std::fs::write(path, &bytes).map_err(|e| format!("failed to write {}: {e}", path.display()))?;
    }
    let encode = stage.elapsed().as_nanos();
    let total = total_start.elapsed().as_nanos();

    println!(
        "render {}x{} grid {} accel {}: {} triangles, {} isect tests",
        width,
        height,
        args.config,
        args.accel,
        scene.triangle_count(),
        stats.trace.triangle_tests,
    );
    print_stage_lines(
        &[
            ("prepare", prepare),
            ("compute", compute),
            ("transfer_out", transfer_out),
            ("encode", encode),
        ],
        total,
    );
    if let Some(path) = &args.output {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_stereo(args: StereoArgs) -> Result<(), String> {
    let source = match (&args.select.scene, args.select.paper_scene) {
        (Some(path), _) => SceneSource::Path(path.clone()),
        (None, Some(n)) => SceneSource::Scene(experiment_scene(n).map_err(|e| e.to_string())?),
        (None, None) => SceneSource::Scene(experiment_scene(1).map_err(|e| e.to_string())?),
    };
    let (width, height) = args.size;
    let mut job = PipelineJob::new(source, width, height);
    job.config = args.config;
    job.settings.max_depth = args.depth;
    job.mode = args.mode;
    job.accel = args.accel;
    job.channel_parallel = args.channel_parallel;
    job.eye_separation = args.eye_sep;
    job.output = args.output.clone();

    let output = run_pipeline(job).map_err(|e| e.to_string())?;
    print_stereo_summary(&args, &output);
    Ok(())
}

fn print_stereo_summary(args: &StereoArgs, output: &StereoOutput) {
    let t = &output.timings;
    println!(
        "stereo {}x{} grid {} accel {} mode {}: channels {}",
        args.size.0,
        args.size.1,
        args.config,
        args.accel,
        output.mode,
        if args.channel_parallel { "parallel" } else { "sequential" },
    );
    print_stage_lines(
        &[
            ("prepare", t.prepare),
            ("transfer_in", t.transfer_in),
            ("compute_left", t.compute_left),
            ("compute_right", t.compute_right),
            ("transfer_out", t.transfer_out),
            ("postprocess", t.postprocess),
            ("encode", t.encode),
        ],
        t.total,
    );
    if let Ok(f) = stage_fractions(t) {
        println!(
            "  attributed: compute {:.1}% transfer {:.1}% other {:.1}%",
            f.compute * 100.0,
            f.transfer * 100.0,
            f.other * 100.0,
        );
    }
    if let Some(path) = &args.output {
        match output.mode {
            StereoMode::Separate => println!("wrote {} (x2, _left/_right)", path.display()),
            _ => println!("wrote {}", path.display()),
        }
    }
}

fn print_stage_lines(stages: &[(&str, u128)], total: u128) {
    for (name, ns) in stages {
        let share = if total > 0 {
            *ns as f64 / total as f64 * 100.0
        } else {
            0.0
        };
        println!("  {name:<13} {ns:>12} ns  {share:>5.1}%");
    }
    println!("  {:<13} {total:>12} ns", "total");
}

fn cmd_bench(args: BenchArgs) -> Result<(), String> {
    let mut scenes: Vec<BenchScene> = args
        .paper_scene
        .iter()
        .map(|&n| BenchScene::Experiment(n))
        .chain(args.scene.iter().cloned().map(BenchScene::File))
        .collect();
    if scenes.is_empty() {
        scenes = [1, 2, 3, 5, 6].map(BenchScene::Experiment).to_vec();
    }
    let plan = BenchPlan {
        scenes,
        resolutions: if args.size.is_empty() {
            vec![(128, 128), (256, 256)]
        } else {
            args.size.clone()
        },
        configs: args.configs.0.clone(),
        accel_modes: if args.accel.is_empty() {
            vec![AccelMode::Bvh]
        } else {
            args.accel.clone()
        },
        reps: args.reps,
    };
    let records = match &args.out_csv {
        Some(path) => {
            let file = std::fs::File::create(path)
                .map_err(|e| format!("failed to create {}: {e}", path.display()))?;
            let mut writer = std::io::BufWriter::new(file);
            let records = run_bench(&plan, &mut writer).map_err(|e| e.to_string())?;
            writer.flush().map_err(|e| e.to_string())?;
            eprintln!("wrote {} data rows to {}", records.len(), path.display());
            records
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            run_bench(&plan, &mut lock).map_err(|e| e.to_string())?
        }
    };
    drop(records);
    Ok(())
}

fn cmd_scene_gen(args: GenArgs) -> Result<(), String> {
    let scene = match args.builtin {
        Some(kind) => single_solid_scene(kind)?,
        None => args.select.load()?,
    };
    let text = format!(
        "# objects={} triangles={}\n{}",
        scene.objects().len(),
        scene.triangle_count(),
        serialize_scene(&scene),
    );
    match &args.output {
        Some(path) => {
            std::fs::write(path, text)
                .map_err(|e| format!("failed to write {}: {e}", path.display()))?;
            println!("wrote {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

/// One solid at the origin under the standard experiment lighting, so the
/// generated file renders standalone.
fn single_solid_scene(kind: BuiltinKind) -> Result<Scene, String> {
    let object = builtin_object(kind, Vec3::ZERO, 4.0, kind.default_material());
    Scene::new(
        vec![object],
        vec![PointLight {
            position: Vec3::new(7.0, 9.0, 12.0),
            intensity: Color::gray(1.0),
        }],
        Color::gray(0.12),
        Color::new(0.06, 0.07, 0.10),
        Camera::default_view(),
        0.065,
    )
    .map_err(|e| e.to_string())
}
