//! Parallel stereo ray tracer with a staged, instrumented synthesis pipeline.
//!
//! The pipeline has two levels of parallelism: the left and right eye
//! channels render independently (level 1), and inside each channel the
//! image is partitioned across a `(blocks : threads-per-block)` worker
//! grid (level 2). Every stage of a run (prepare, transfer-in, compute,
//! transfer-out, postprocess, encode) is timed separately so pipelines can
//! be profiled and swept by a benchmark harness.
//!
//! Most capabilities have a runnable demo under `examples/`; the
//! `stereotrace` binary exposes the same machinery as `render`, `stereo`,
//! `bench` and `scene gen` subcommands.

pub mod accel;
pub mod bench;
pub mod cli;
pub mod image;
pub mod math;
pub mod parallel;
pub mod scene;
pub mod stereo;
pub mod tracer;

pub use accel::{build_bvh, build_linear, AccelHandle, AccelMismatch, AccelMode, DEFAULT_LEAF_MAX};
pub use bench::{run_bench, BenchPlan, BenchRecord, BenchScene, CSV_HEADER};
pub use image::Image;
pub use math::{Color, Vec3};
pub use parallel::{
    partition_image, render_parallel, Assignment, ComputeStats, NetworkConfig, Tile,
    THREADS_CAP_ENV,
};
pub use scene::{
    builtin_object, experiment_scene, load_scene, parse_scene, serialize_scene, BuiltinKind,
    Camera, Material, PointLight, Scene, SceneError, TriangleMesh,
};
pub use stereo::{
    compose_anaglyph, compose_sbs, derive_eyes, render_stereo, run_pipeline, stage_fractions,
    PipelineError, PipelineJob, SceneSource, StageFractions, StageTimings, StereoMode,
    StereoOutput, StereoRig,
};
pub use tracer::{
    generate_primary_ray, intersect_scene, intersect_triangle, reflect, shade, trace, Hit, Ray,
    TraceSettings, TraceStats,
};
