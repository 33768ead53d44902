//! Run the full staged stereo pipeline and save a red/cyan anaglyph.
//!
//!     cargo run --example stereo_anaglyph

use stereotrace::{experiment_scene, run_pipeline, NetworkConfig, PipelineJob};

fn main() {
    let scene = experiment_scene(5).expect("built-in layout");
    let mut job = PipelineJob::new(scene, 512, 512);
    job.config = NetworkConfig::new(4, 2);
    job.output = Some(std::env::temp_dir().join("stereo_anaglyph.ppm"));

    let out = run_pipeline(job).expect("pipeline");
    let t = out.timings;
    println!(
        "anaglyph {}x{} in {:.1} ms (left {:.1} ms, right {:.1} ms)",
        out.images[0].width(),
        out.images[0].height(),
        t.total as f64 / 1e6,
        t.compute_left as f64 / 1e6,
        t.compute_right as f64 / 1e6,
    );
    println!(
        "wrote {}",
        std::env::temp_dir().join("stereo_anaglyph.ppm").display()
    );
}
