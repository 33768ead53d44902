//! Stereo synthesis pipeline: derive the two eye cameras, render the left and
//! right channels (optionally concurrently; the channels share no mutable
//! state), compose the pair into the requested output form, and account
//! wall time per stage.
//!
//! Stage taxonomy: prepare (parse/validate/build accel), transfer_in (flatten
//! the scene into one contiguous buffer, modeling a host-to-device copy),
//! compute_left/compute_right, transfer_out (copy worker rows into the output
//! rasters, where 8-bit quantization happens), postprocess (composition),
//! encode (PPM bytes and optional file writes).

use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::accel::{build_bvh, build_linear, AccelHandle, AccelMismatch, AccelMode, DEFAULT_LEAF_MAX};
use crate::image::Image;
use crate::parallel::{
    assemble_image, env_thread_cap, render_channel, ChannelBuffer, ComputeStats, NetworkConfig,
};
use crate::scene::{load_scene, Camera, Scene, SceneError};
use crate::tracer::TraceSettings;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    Accel(#[from] AccelMismatch),
    #[error("invalid stereo rig: {0}")]
    InvalidRig(String),
    #[error("image dimensions differ: left {left_width}x{left_height}, right {right_width}x{right_height}")]
    DimensionMismatch {
        left_width: u32,
        left_height: u32,
        right_width: u32,
        right_height: u32,
    },
    #[error("side-by-side composition needs width >= 2, got {0}")]
    SbsTooNarrow(u32),
    #[error("stage timings have zero duration")]
    ZeroTotal,
    #[error("failed to write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StereoMode {
    /// Two full-size images, left and right.
    Separate,
    /// One image: red from the left eye, green/blue from the right.
    Anaglyph,
    /// One image: both channels squeezed to half width, side by side.
    Sbs,
}

impl StereoMode {
    pub fn as_str(self) -> &'static str {
        match self {
            StereoMode::Separate => "separate",
            StereoMode::Anaglyph => "anaglyph",
            StereoMode::Sbs => "sbs",
        }
    }
}

impl std::str::FromStr for StereoMode {
    type Err = String;

    fn from_str(s: &str) -> Result<StereoMode, String> {
        match s {
            "separate" => Ok(StereoMode::Separate),
            "anaglyph" => Ok(StereoMode::Anaglyph),
            "sbs" => Ok(StereoMode::Sbs),
            other => Err(format!(
                "unknown stereo mode '{other}' (expected separate, anaglyph, or sbs)"
            )),
        }
    }
}

impl std::fmt::Display for StereoMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Base camera plus interocular distance in world units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StereoRig {
    pub base: Camera,
    pub eye_separation: f64,
}

impl StereoRig {
    pub fn new(base: Camera, eye_separation: f64) -> Result<StereoRig, PipelineError> {
        base.check().map_err(PipelineError::InvalidRig)?;
        if !eye_separation.is_finite() || eye_separation <= 0.0 {
            return Err(PipelineError::InvalidRig(
                "eye separation must be positive".into(),
            ));
        }
        let focus = (base.look_at - base.position).length();
        if eye_separation >= focus {
            return Err(PipelineError::InvalidRig(format!(
                "eye separation {eye_separation} must be smaller than the focus distance {focus}"
            )));
        }
        Ok(StereoRig {
            base,
            eye_separation,
        })
    }
}

/// Parallel-axis eye pair: both cameras are the base camera shifted by half
/// the separation along the rig's right axis (position and look_at together,
/// so the look directions stay parallel: no toe-in).
pub fn derive_eyes(rig: &StereoRig) -> (Camera, Camera) {
    let (right_axis, _, _) = rig.base.basis();
    let offset = right_axis * (rig.eye_separation * 0.5);
    let shifted = |sign: f64| {
        let mut eye = rig.base;
        eye.position = rig.base.position + offset * sign;
        eye.look_at = rig.base.look_at + offset * sign;
        eye
    };
    (shifted(-1.0), shifted(1.0))
}

/// Wall-clock nanoseconds per pipeline stage. The stage fields sum to at most
/// `total`; the gap (un-attributed glue) stays within 10% of `total`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StageTimings {
    pub prepare: u128,
    pub transfer_in: u128,
    pub compute_left: u128,
    pub compute_right: u128,
    pub transfer_out: u128,
    pub postprocess: u128,
    pub encode: u128,
    pub total: u128,
}

impl StageTimings {
    pub fn stage_sum(&self) -> u128 {
        self.prepare
            + self.transfer_in
            + self.compute_left
            + self.compute_right
            + self.transfer_out
            + self.postprocess
            + self.encode
    }

    pub fn compute_ns(&self) -> u128 {
        self.compute_left + self.compute_right
    }

    pub fn transfer_ns(&self) -> u128 {
        self.transfer_in + self.transfer_out
    }

    pub fn other_ns(&self) -> u128 {
        self.prepare + self.postprocess + self.encode
    }
}

/// Fractions of {compute, transfer, other} over their sum. Sums to 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StageFractions {
    pub compute: f64,
    pub transfer: f64,
    pub other: f64,
}

pub fn stage_fractions(timings: &StageTimings) -> Result<StageFractions, PipelineError> {
    if timings.total == 0 {
        return Err(PipelineError::ZeroTotal);
    }
    let compute = timings.compute_ns() as f64;
    let transfer = timings.transfer_ns() as f64;
    let other = timings.other_ns() as f64;
    let sum = compute + transfer + other;
    if sum == 0.0 {
        return Err(PipelineError::ZeroTotal);
    }
    Ok(StageFractions {
        compute: compute / sum,
        transfer: transfer / sum,
        other: other / sum,
    })
}

/// Rendered output plus instrumentation. `images` holds two entries in
/// `separate` mode and one otherwise.
#[derive(Clone, Debug)]
pub struct StereoOutput {
    pub mode: StereoMode,
    pub images: Vec<Image>,
    pub timings: StageTimings,
    pub channel_stats: (ComputeStats, ComputeStats),
}

/// Red channel from the left eye, green and blue from the right.
pub fn compose_anaglyph(left: &Image, right: &Image) -> Result<Image, PipelineError> {
    check_dims(left, right)?;
    let mut out = Image::new(left.width(), left.height());
    for y in 0..left.height() {
        for x in 0..left.width() {
            let l = left.pixel(x, y);
            let r = right.pixel(x, y);
            out.set_pixel(x, y, (l.0, r.1, r.2));
        }
    }
    Ok(out)
}

/// Squeeze both channels to half width by averaging column pairs per 8-bit
/// channel (round half up), then place them left | right.
pub fn compose_sbs(left: &Image, right: &Image) -> Result<Image, PipelineError> {
    check_dims(left, right)?;
    if left.width() < 2 {
        return Err(PipelineError::SbsTooNarrow(left.width()));
    }
    let half = left.width() / 2;
    let mut out = Image::new(half * 2, left.height());
    let avg = |a: u8, b: u8| ((a as u16 + b as u16 + 1) / 2) as u8;
    let squeeze = |img: &Image, out: &mut Image, x_off: u32| {
        for y in 0..img.height() {
            for x in 0..half {
                let a = img.pixel(2 * x, y);
                let b = img.pixel(2 * x + 1, y);
                out.set_pixel(
                    x_off + x,
                    y,
                    (avg(a.0, b.0), avg(a.1, b.1), avg(a.2, b.2)),
                );
            }
        }
    };
    squeeze(left, &mut out, 0);
    squeeze(right, &mut out, half);
    Ok(out)
}

fn check_dims(left: &Image, right: &Image) -> Result<(), PipelineError> {
    if left.width() != right.width() || left.height() != right.height() {
        return Err(PipelineError::DimensionMismatch {
            left_width: left.width(),
            left_height: left.height(),
            right_width: right.width(),
            right_height: right.height(),
        });
    }
    Ok(())
}

/// Render both channels. Each channel is an independent `render_parallel`
/// over its own derived eye camera; `channel_parallel` runs the two renders
/// concurrently. The returned images are bit-identical either way.
pub fn render_stereo(
    scene: &Scene,
    rig: &StereoRig,
    accel: &AccelHandle,
    settings: &TraceSettings,
    width: u32,
    height: u32,
    config: NetworkConfig,
    channel_parallel: bool,
) -> (Image, Image, StageTimings) {
    let start = Instant::now();
    let (left_cam, right_cam) = derive_eyes(rig);
    let channels = compute_channels(
        scene,
        &left_cam,
        &right_cam,
        accel,
        settings,
        width,
        height,
        config,
        channel_parallel,
        env_thread_cap(),
    );
    let out_start = Instant::now();
    let left = assemble_image(&channels.left_buffer);
    let right = assemble_image(&channels.right_buffer);
    let transfer_out = out_start.elapsed().as_nanos();
    let timings = StageTimings {
        compute_left: channels.left_ns,
        compute_right: channels.right_ns,
        transfer_out,
        total: start.elapsed().as_nanos(),
        ..StageTimings::default()
    };
    (left, right, timings)
}

struct Channels {
    left_buffer: ChannelBuffer,
    right_buffer: ChannelBuffer,
    left_stats: ComputeStats,
    right_stats: ComputeStats,
    left_ns: u128,
    right_ns: u128,
}

#[allow(clippy::too_many_arguments)]
fn compute_channels(
    scene: &Scene,
    left_cam: &Camera,
    right_cam: &Camera,
    accel: &AccelHandle,
    settings: &TraceSettings,
    width: u32,
    height: u32,
    config: NetworkConfig,
    channel_parallel: bool,
    cap: Option<usize>,
) -> Channels {
    let render = |cam: &Camera| -> ((ChannelBuffer, ComputeStats), u128) {
        let start = Instant::now();
        let result = render_channel(scene, cam, accel, settings, width, height, config, cap);
        (result, start.elapsed().as_nanos())
    };
    if channel_parallel {
        let phase = Instant::now();
        let (((lb, ls), l_raw), ((rb, rs), r_raw)) = std::thread::scope(|s| {
            let lh = s.spawn(|| render(left_cam));
            let rh = s.spawn(|| render(right_cam));
            (lh.join().unwrap(), rh.join().unwrap())
        });
        // The channels overlapped, so their raw walls double-count the phase.
        // Attribute the measured phase wall to the channels in proportion to
        // their raw walls; the pair then sums to the real elapsed time.
        let wall = phase.elapsed().as_nanos();
        let (left_ns, right_ns) = split_wall(wall, l_raw, r_raw);
        Channels {
            left_buffer: lb,
            right_buffer: rb,
            left_stats: ls,
            right_stats: rs,
            left_ns,
            right_ns,
        }
    } else {
        let ((lb, ls), left_ns) = render(left_cam);
        let ((rb, rs), right_ns) = render(right_cam);
        Channels {
            left_buffer: lb,
            right_buffer: rb,
            left_stats: ls,
            right_stats: rs,
            left_ns,
            right_ns,
        }
    }
}

fn split_wall(wall: u128, l_raw: u128, r_raw: u128) -> (u128, u128) {
    let sum = l_raw + r_raw;
    if sum == 0 {
        let half = wall / 2;
        return (half, wall - half);
    }
    let left = wall * l_raw / sum;
    (left, wall - left)
}

/// Where the pipeline's scene comes from.
#[derive(Clone, Debug)]
pub enum SceneSource {
    Path(PathBuf),
    Scene(Scene),
}

impl From<Scene> for SceneSource {
    fn from(scene: Scene) -> SceneSource {
        SceneSource::Scene(scene)
    }
}

impl From<PathBuf> for SceneSource {
    fn from(path: PathBuf) -> SceneSource {
        SceneSource::Path(path)
    }
}

impl From<&Path> for SceneSource {
    fn from(path: &Path) -> SceneSource {
        SceneSource::Path(path.to_path_buf())
    }
}

/// Everything one pipeline run needs. `new` fills the defaults: 1x1 grid,
/// BVH, anaglyph, concurrent channels, scene-file eye separation, no output
/// file.
#[derive(Clone, Debug)]
pub struct PipelineJob {
    pub source: SceneSource,
    pub width: u32,
    pub height: u32,
    pub config: NetworkConfig,
    pub settings: TraceSettings,
    pub mode: StereoMode,
    pub accel: AccelMode,
    pub leaf_max: usize,
    pub channel_parallel: bool,
    /// Overrides the scene file's `stereo` record when set.
    pub eye_separation: Option<f64>,
    /// Written during the encode stage when set. `separate` mode writes two
    /// files with `_left`/`_right` appended to the stem.
    pub output: Option<PathBuf>,
}

impl PipelineJob {
    pub fn new(source: impl Into<SceneSource>, width: u32, height: u32) -> PipelineJob {
        PipelineJob {
            source: source.into(),
            width,
            height,
            config: NetworkConfig::new(1, 1),
            settings: TraceSettings::default(),
            mode: StereoMode::Anaglyph,
            accel: AccelMode::Bvh,
            leaf_max: DEFAULT_LEAF_MAX,
            channel_parallel: true,
            eye_separation: None,
            output: None,
        }
    }
}

/// The scene and the eye cameras flattened into contiguous buffers, which is
/// the transfer_in payload. The copy is real work (it is what the stage measures)
/// and the buffer stays alive across the compute stage like a device-side
/// scene would.
struct FlatScene {
    vertices: Vec<f64>,
    face_indices: Vec<u32>,
    face_objects: Vec<u32>,
    materials: Vec<f64>,
    lights: Vec<f64>,
    header: Vec<f64>,
}

impl FlatScene {
    fn pack(scene: &Scene, left: &Camera, right: &Camera) -> FlatScene {
        let mut vertices = Vec::with_capacity(
            scene.objects().iter().map(|o| o.vertices.len() * 3).sum(),
        );
        let mut face_indices = Vec::with_capacity(scene.triangle_count() * 3);
        let mut face_objects = Vec::with_capacity(scene.triangle_count());
        let mut materials = Vec::with_capacity(scene.objects().len() * 8);
        let mut vertex_base = 0u32;
        for (oi, obj) in scene.objects().iter().enumerate() {
            for v in &obj.vertices {
                vertices.extend_from_slice(&[v.x, v.y, v.z]);
            }
            for f in &obj.faces {
                face_indices.extend_from_slice(&[
                    vertex_base + f[0],
                    vertex_base + f[1],
                    vertex_base + f[2],
                ]);
                face_objects.push(oi as u32);
            }
            let m = obj.material;
            materials.extend_from_slice(&[
                m.diffuse.r,
                m.diffuse.g,
                m.diffuse.b,
                m.specular.r,
                m.specular.g,
                m.specular.b,
                m.shininess,
                m.reflectivity,
            ]);
            vertex_base += obj.vertices.len() as u32;
        }
        let mut lights = Vec::with_capacity(scene.lights().len() * 6);
        for l in scene.lights() {
            lights.extend_from_slice(&[
                l.position.x,
                l.position.y,
                l.position.z,
                l.intensity.r,
                l.intensity.g,
                l.intensity.b,
            ]);
        }
        let mut header = Vec::with_capacity(28);
        for c in [scene.ambient(), scene.background()] {
            header.extend_from_slice(&[c.r, c.g, c.b]);
        }
        for cam in [left, right] {
            for v in [cam.position, cam.look_at, cam.up] {
                header.extend_from_slice(&[v.x, v.y, v.z]);
            }
            header.push(cam.vertical_fov_deg);
            header.push(cam.aspect);
        }
        FlatScene {
            vertices,
            face_indices,
            face_objects,
            materials,
            lights,
            header,
        }
    }

    fn byte_len(&self) -> usize {
        (self.vertices.len() + self.materials.len() + self.lights.len() + self.header.len()) * 8
            + (self.face_indices.len() + self.face_objects.len()) * 4
    }
}

/// Execute the full staged pipeline for one job. Determinism contract: the
/// output image bytes depend only on the scene, dimensions, trace settings,
/// and eye separation, never on the worker grid, accel mode, channel
/// concurrency, or thread cap.
pub fn run_pipeline(job: PipelineJob) -> Result<StereoOutput, PipelineError> {
    let cap = env_thread_cap();
    let total_start = Instant::now();

    let stage = Instant::now();
    let scene = match job.source {
        SceneSource::Path(ref path) => load_scene(path)?,
        SceneSource::Scene(scene) => scene,
    };
    let accel = match job.accel {
        AccelMode::Linear => build_linear(&scene),
        AccelMode::Bvh => build_bvh(&scene, job.leaf_max),
    };
    let separation = job.eye_separation.unwrap_or_else(|| scene.eye_separation());
    let rig = StereoRig::new(scene.camera(), separation)?;
    let (left_cam, right_cam) = derive_eyes(&rig);
    let prepare = stage.elapsed().as_nanos();

    let stage = Instant::now();
    let flat = FlatScene::pack(&scene, &left_cam, &right_cam);
    std::hint::black_box(flat.byte_len());
    let transfer_in = stage.elapsed().as_nanos();

    let channels = compute_channels(
        &scene,
        &left_cam,
        &right_cam,
        &accel,
        &job.settings,
        job.width,
        job.height,
        job.config,
        job.channel_parallel,
        cap,
    );
    drop(flat);

    let stage = Instant::now();
    let left = assemble_image(&channels.left_buffer);
    let right = assemble_image(&channels.right_buffer);
    let transfer_out = stage.elapsed().as_nanos();

    let stage = Instant::now();
    let images = match job.mode {
        StereoMode::Separate => vec![left, right],
        StereoMode::Anaglyph => vec![compose_anaglyph(&left, &right)?],
        StereoMode::Sbs => vec![compose_sbs(&left, &right)?],
    };
    let postprocess = stage.elapsed().as_nanos();

    let stage = Instant::now();
    let encoded: Vec<Vec<u8>> = images.iter().map(Image::encode_ppm).collect();
    if let Some(ref path) = job.output {
        let targets: Vec<PathBuf> = match job.mode {
            StereoMode::Separate => vec![suffixed(path, "_left"), suffixed(path, "_right")],
            _ => vec![path.clone()],
        };
        for (target, bytes) in targets.iter().zip(&encoded) {
            std::fs::write(target, bytes).map_err(|source| PipelineError::Write {
                path: target.clone(),
                source,
            })?;
        }
    }
    let encode = stage.elapsed().as_nanos();

    let timings = StageTimings {
        prepare,
        transfer_in,
        compute_left: channels.left_ns,
        compute_right: channels.right_ns,
        transfer_out,
        postprocess,
        encode,
        total: total_start.elapsed().as_nanos(),
    };
    Ok(StereoOutput {
        mode: job.mode,
        images,
        timings,
        channel_stats: (channels.left_stats, channels.right_stats),
    })
}

/// `out.ppm` -> `out_left.ppm`; extensionless paths just get the suffix.
fn suffixed(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().unwrap_or_default().to_string_lossy();
    let name = match path.extension() {
        Some(ext) => format!("{stem}{suffix}.{}", ext.to_string_lossy()),
        None => format!("{stem}{suffix}"),
    };
    path.with_file_name(name)
}
