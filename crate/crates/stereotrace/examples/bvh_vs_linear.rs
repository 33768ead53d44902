//! Compare the BVH against the linear scan: identical pixels, far fewer
//! ray/triangle tests.
//!
//!     cargo run --example bvh_vs_linear

use stereotrace::{
    build_bvh, build_linear, experiment_scene, render_parallel, AccelHandle, NetworkConfig,
    TraceSettings,
};

fn main() {
    let scene = experiment_scene(6).expect("built-in layout");
    let settings = TraceSettings::default();
    let config = NetworkConfig::new(2, 2);

    let run = |name: &str, accel: &AccelHandle| {
        let (image, stats) =
            render_parallel(&scene, &scene.camera(), accel, &settings, 256, 256, config);
        let per_ray = stats.trace.triangle_tests as f64 / stats.trace.primary_rays as f64;
        println!(
            "{name:6}  {:>8.2} ms  {:>9} triangle tests ({per_ray:.1} per primary ray), {} node visits",
            stats.wall_ns as f64 / 1e6,
            stats.trace.triangle_tests,
            stats.trace.node_visits,
        );
        (image, stats.trace.triangle_tests)
    };

    let (linear_img, linear_tests) = run("linear", &build_linear(&scene));
    let (bvh_img, bvh_tests) = run("bvh", &build_bvh(&scene, stereotrace::DEFAULT_LEAF_MAX));

    assert_eq!(linear_img, bvh_img, "accel mode must not change pixels");
    println!(
        "identical frames; bvh did {:.1}% of the linear tests",
        bvh_tests as f64 / linear_tests as f64 * 100.0,
    );
}
