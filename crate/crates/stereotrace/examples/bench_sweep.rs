//! Run a small benchmark sweep and stream the CSV (with its trailing
//! median/speedup summary) to stdout.
//!
//!     cargo run --example bench_sweep

use stereotrace::{run_bench, AccelMode, BenchPlan, BenchScene, NetworkConfig};

fn main() {
    let plan = BenchPlan {
        scenes: vec![BenchScene::Experiment(1), BenchScene::Experiment(3)],
        resolutions: vec![(128, 128)],
        configs: vec![
            NetworkConfig::new(1, 1),
            NetworkConfig::new(2, 1),
            NetworkConfig::new(4, 1),
        ],
        accel_modes: vec![AccelMode::Bvh],
        reps: 3,
    };
    let stdout = std::io::stdout();
    let records = run_bench(&plan, &mut stdout.lock()).expect("sweep");
    eprintln!("{} data rows", records.len());
}
