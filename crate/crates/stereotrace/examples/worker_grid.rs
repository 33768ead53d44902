//! Show the worker-grid schedule and that grid shape never changes pixels.
//!
//! The image splits into `blocks` horizontal bands; each band's scanlines are
//! dealt round-robin to its threads. Workers own disjoint rows, so any grid
//! produces bit-identical output.
//!
//!     cargo run --example worker_grid

use stereotrace::{
    build_bvh, experiment_scene, partition_image, render_parallel, NetworkConfig, TraceSettings,
};

fn main() {
    let schedule = partition_image(8, 8, NetworkConfig::new(2, 2));
    println!("8 rows under a 2x2 grid:");
    for (tile, rows) in &schedule.tiles {
        println!(
            "  worker {} (band rows {}..{}) renders {:?}",
            tile.worker_id, tile.row_start, tile.row_end, rows
        );
    }

    let scene = experiment_scene(3).expect("built-in layout");
    let accel = build_bvh(&scene, stereotrace::DEFAULT_LEAF_MAX);
    let settings = TraceSettings::default();
    let grids = ["1x1", "2x1", "4x2", "8x4"];
    let mut images = Vec::new();
    for g in grids {
        let config: NetworkConfig = g.parse().unwrap();
        let (image, stats) = render_parallel(
            &scene,
            &scene.camera(),
            &accel,
            &settings,
            128,
            128,
            config,
        );
        let min = stats.rows_per_worker.iter().min().unwrap();
        let max = stats.rows_per_worker.iter().max().unwrap();
        println!(
            "grid {:4}  {:>8.2} ms  {} workers, {}..{} rows each",
            g,
            stats.wall_ns as f64 / 1e6,
            stats.rows_per_worker.len(),
            min,
            max,
        );
        images.push(image);
    }
    assert!(images.windows(2).all(|w| w[0] == w[1]));
    println!("all grids produced byte-identical frames");
}
