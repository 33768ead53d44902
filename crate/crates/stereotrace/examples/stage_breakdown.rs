//! Account every pipeline stage's wall time and the {compute, transfer,
//! other} split, with the two channels rendered sequentially and then
//! concurrently.
//!
//!     cargo run --example stage_breakdown

use stereotrace::{experiment_scene, run_pipeline, stage_fractions, NetworkConfig, PipelineJob};

fn main() {
    for channel_parallel in [false, true] {
        let scene = experiment_scene(6).expect("built-in layout");
        let mut job = PipelineJob::new(scene, 384, 384);
        job.config = NetworkConfig::new(2, 2);
        job.channel_parallel = channel_parallel;

        let out = run_pipeline(job).expect("pipeline");
        let t = out.timings;
        println!(
            "channels rendered {}:",
            if channel_parallel { "concurrently" } else { "sequentially" }
        );
        for (name, ns) in [
            ("prepare", t.prepare),
            ("transfer_in", t.transfer_in),
            ("compute_left", t.compute_left),
            ("compute_right", t.compute_right),
            ("transfer_out", t.transfer_out),
            ("postprocess", t.postprocess),
            ("encode", t.encode),
        ] {
            println!("  {name:<13} {:>9.3} ms", ns as f64 / 1e6);
        }
        println!("  {:<13} {:>9.3} ms", "total", t.total as f64 / 1e6);

        let f = stage_fractions(&t).expect("nonzero total");
        println!(
            "  attributed: compute {:.1}%, transfer {:.1}%, other {:.1}%\n",
            f.compute * 100.0,
            f.transfer * 100.0,
            f.other * 100.0,
        );
    }
}
