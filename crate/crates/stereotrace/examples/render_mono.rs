//! Render a single view of the three-object demo scene and save it as PPM.
//!
//!     cargo run --example render_mono

use stereotrace::{build_bvh, experiment_scene, render_parallel, NetworkConfig, TraceSettings};

fn main() {
    let scene = experiment_scene(3).expect("built-in layout");
    let accel = build_bvh(&scene, stereotrace::DEFAULT_LEAF_MAX);
    let settings = TraceSettings::default();

    let (image, stats) = render_parallel(
        &scene,
        &scene.camera(),
        &accel,
        &settings,
        512,
        512,
        NetworkConfig::new(4, 2),
    );

    let path = std::env::temp_dir().join("render_mono.ppm");
    image.save_ppm(&path).expect("write ppm");

    println!(
        "rendered {} triangles at 512x512 in {:.1} ms",
        scene.triangle_count(),
        stats.wall_ns as f64 / 1e6,
    );
    println!(
        "{} primary rays, {} shadow rays, {} reflection rays, {} triangle tests",
        stats.trace.primary_rays,
        stats.trace.shadow_rays,
        stats.trace.reflection_rays,
        stats.trace.triangle_tests,
    );
    println!("wrote {}", path.display());
}
