//! Worker-grid partitioning and the parallel channel renderer.
//!
//! The grid is (blocks : threads_per_block): the image splits into `blocks`
//! horizontal bands of near-equal height, and within a band the scanlines are
//! dealt round-robin to that block's threads. Workers therefore own disjoint
//! row sets that exactly cover the image, which is what makes the render
//! bit-deterministic under any grid: no two workers ever touch the same
//! output row, and tracing itself is pure.

use std::time::Instant;

use crate::accel::AccelHandle;
use crate::image::Image;
use crate::math::Color;
use crate::scene::{Camera, Scene};
use crate::tracer::{generate_primary_ray, trace, TraceSettings, TraceStats};

/// Environment knob that caps how many OS threads a channel render may use.
/// The logical grid (and so the image) is unaffected; idle-capped workers'
/// row lists are just executed by fewer threads. Unset or invalid means
/// one thread per logical worker.
pub const THREADS_CAP_ENV: &str = "STEREOTRACE_THREADS_CAP";

/// Worker grid shape, written `BxT` (e.g. `4x2`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct NetworkConfig {
    pub blocks: u32,
    pub threads_per_block: u32,
}

impl NetworkConfig {
    pub fn new(blocks: u32, threads_per_block: u32) -> NetworkConfig {
        assert!(blocks >= 1, "grid needs at least one block");
        assert!(threads_per_block >= 1, "grid needs at least one thread per block");
        NetworkConfig {
            blocks,
            threads_per_block,
        }
    }

    pub fn total_workers(self) -> u32 {
        self.blocks * self.threads_per_block
    }
}

impl std::str::FromStr for NetworkConfig {
    type Err = String;

    fn from_str(s: &str) -> Result<NetworkConfig, String> {
        let bad = || format!("expected BLOCKSxTHREADS (e.g. 4x2), got '{s}'");
        let (b, t) = s.split_once(['x', 'X']).ok_or_else(bad)?;
        let blocks: u32 = b.trim().parse().map_err(|_| bad())?;
        let threads: u32 = t.trim().parse().map_err(|_| bad())?;
        if blocks == 0 || threads == 0 {
            return Err(format!("grid dimensions must be at least 1, got '{s}'"));
        }
        Ok(NetworkConfig::new(blocks, threads))
    }
}

impl std::fmt::Display for NetworkConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", self.blocks, self.threads_per_block)
    }
}

/// One worker's slice of the image: the band it lives in plus its id.
/// Invariant: `row_start < row_end`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Tile {
    pub row_start: u32,
    pub row_end: u32,
    pub worker_id: u32,
}

/// The full static schedule for one channel at one resolution. `tiles` holds
/// one entry per worker that owns at least one row, in worker-id order, each
/// with the exact rows it renders (ascending).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assignment {
    pub width: u32,
    pub height: u32,
    pub config: NetworkConfig,
    pub tiles: Vec<(Tile, Vec<u32>)>,
}

/// Split `height` rows into the worker grid. The first `height % blocks`
/// bands take the extra row, so band heights differ by at most one; within a
/// band, thread `i` takes rows `start+i, start+i+T, ...`.
pub fn partition_image(width: u32, height: u32, config: NetworkConfig) -> Assignment {
    assert!(width >= 1 && height >= 1, "image must be at least 1x1");
    let threads = config.threads_per_block;
    let base = height / config.blocks;
    let extra = height % config.blocks;
    let mut tiles = Vec::new();
    let mut row = 0;
    for block in 0..config.blocks {
        let band = base + u32::from(block < extra);
        if band == 0 {
            continue;
        }
        let (start, end) = (row, row + band);
        row = end;
        for i in 0..threads {
            let rows: Vec<u32> = (start + i..end).step_by(threads as usize).collect();
            if rows.is_empty() {
                continue;
            }
            tiles.push((
                Tile {
                    row_start: start,
                    row_end: end,
                    worker_id: block * threads + i,
                },
                rows,
            ));
        }
    }
    Assignment {
        width,
        height,
        config,
        tiles,
    }
}

/// Instrumentation for one channel render. `rows_per_worker` has one entry
/// per logical worker (zeros for workers the partition left idle).
#[derive(Clone, Debug, Default)]
pub struct ComputeStats {
    pub wall_ns: u128,
    pub rows_per_worker: Vec<u32>,
    pub trace: TraceStats,
}

/// Traced rows before quantization, keyed by scanline index. Turning this
/// into an `Image` is the transfer_out stage's job.
#[derive(Clone, Debug)]
pub(crate) struct ChannelBuffer {
    pub width: u32,
    pub height: u32,
    pub rows: Vec<(u32, Vec<Color>)>,
}

pub(crate) fn env_thread_cap() -> Option<usize> {
    std::env::var(THREADS_CAP_ENV)
        .ok()?
        .trim()
        .parse::<usize>()
        .ok()
        .filter(|&cap| cap >= 1)
}

/// Render one channel over the worker grid. Each logical worker's rows are
/// traced with a camera fixed to the image's aspect; `cap` bounds the OS
/// threads actually spawned (logical workers are folded onto executors
/// round-robin, and results are merged by schedule position, so the cap
/// cannot change the output).
#[allow(clippy::too_many_arguments)]
pub(crate) fn render_channel(
    scene: &Scene,
    camera: &Camera,
    accel: &AccelHandle,
    settings: &TraceSettings,
    width: u32,
    height: u32,
    config: NetworkConfig,
    cap: Option<usize>,
) -> (ChannelBuffer, ComputeStats) {
    let start = Instant::now();
    let assignment = partition_image(width, height, config);
    let camera = camera.with_aspect(width as f64 / height as f64);
    let entries = assignment.tiles.len();
    let executors = entries.min(cap.unwrap_or(usize::MAX)).max(1);

    let mut results: Vec<Option<(Vec<(u32, Vec<Color>)>, TraceStats)>> = Vec::new();
    results.resize_with(entries, || None);

    std::thread::scope(|s| {
        let camera = &camera;
        let assignment = &assignment;
        let handles: Vec<_> = (0..executors)
            .map(|e| {
                s.spawn(move || {
                    let mut done = Vec::new();
                    let mut idx = e;
                    while idx < entries {
                        let (_, rows) = &assignment.tiles[idx];
                        let mut stats = TraceStats::default();
                        let mut traced = Vec::with_capacity(rows.len());
                        for &y in rows {
                            let mut row = Vec::with_capacity(width as usize);
                            for x in 0..width {
                                let ray = generate_primary_ray(camera, x, y, width, height);
                                stats.primary_rays += 1;
                                row.push(trace(
                                    &ray,
                                    scene,
                                    accel,
                                    settings,
                                    settings.max_depth,
                                    &mut stats,
                                ));
                            }
                            traced.push((y, row));
                        }
                        done.push((idx, traced, stats));
                        idx += executors;
                    }
                    done
                })
            })
            .collect();
        for handle in handles {
            for (idx, traced, stats) in handle.join().expect("render worker panicked") {
                results[idx] = Some((traced, stats));
            }
        }
    });

    let mut rows = Vec::with_capacity(height as usize);
    let mut trace_stats = TraceStats::default();
    let mut rows_per_worker = vec![0u32; config.total_workers() as usize];
    for (entry, result) in results.into_iter().enumerate() {
        let (traced, stats) = result.expect("schedule entry never executed");
        let worker = assignment.tiles[entry].0.worker_id as usize;
        rows_per_worker[worker] = traced.len() as u32;
        trace_stats.merge(&stats);
        rows.extend(traced);
    }
    (
        ChannelBuffer {
            width,
            height,
            rows,
        },
        ComputeStats {
            wall_ns: start.elapsed().as_nanos(),
            rows_per_worker,
            trace: trace_stats,
        },
    )
}

/// Quantize traced rows into the 8-bit raster. Every scanline is written by
/// exactly one buffer entry (the partition covers the image exactly).
pub(crate) fn assemble_image(buffer: &ChannelBuffer) -> Image {
    let mut image = Image::new(buffer.width, buffer.height);
    for (y, row) in &buffer.rows {
        image.write_row(*y, row);
    }
    image
}

/// Render one view of the scene over the worker grid and quantize it.
pub fn render_parallel(
    scene: &Scene,
    camera: &Camera,
    accel: &AccelHandle,
    settings: &TraceSettings,
    width: u32,
    height: u32,
    config: NetworkConfig,
) -> (Image, ComputeStats) {
    let (buffer, stats) = render_channel(
        scene,
        camera,
        accel,
        settings,
        width,
        height,
        config,
        env_thread_cap(),
    );
    (assemble_image(&buffer), stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::accel::build_bvh;
    use crate::scene::experiment_scene;
    use std::collections::BTreeSet;

    fn rows_of(assignment: &Assignment, worker: u32) -> Vec<u32> {
        assignment
            .tiles
            .iter()
            .find(|(t, _)| t.worker_id == worker)
            .map(|(_, rows)| rows.clone())
            .unwrap_or_default()
    }

    #[test]
    fn eight_rows_two_blocks_single_thread() {
        let a = partition_image(4, 8, NetworkConfig::new(2, 1));
        assert_eq!(rows_of(&a, 0), vec![0, 1, 2, 3]);
        assert_eq!(rows_of(&a, 1), vec![4, 5, 6, 7]);
    }

    #[test]
    fn eight_rows_two_by_two() {
        let a = partition_image(4, 8, NetworkConfig::new(2, 2));
        assert_eq!(rows_of(&a, 0), vec![0, 2]);
        assert_eq!(rows_of(&a, 1), vec![1, 3]);
        assert_eq!(rows_of(&a, 2), vec![4, 6]);
        assert_eq!(rows_of(&a, 3), vec![5, 7]);
    }

    #[test]
    fn seven_rows_four_blocks_band_heights() {
        let a = partition_image(4, 7, NetworkConfig::new(4, 1));
        let heights: Vec<u32> = a.tiles.iter().map(|(t, _)| t.row_end - t.row_start).collect();
        assert_eq!(heights, vec![2, 2, 2, 1]);
    }

    #[test]
    fn partition_covers_every_row_exactly_once() {
        for height in 1..=32u32 {
            for blocks in 1..=8u32 {
                for threads in 1..=8u32 {
                    let config = NetworkConfig::new(blocks, threads);
                    let a = partition_image(3, height, config);
                    let mut seen = BTreeSet::new();
                    for (tile, rows) in &a.tiles {
                        assert!(tile.row_start < tile.row_end);
                        assert!(tile.row_end <= height);
                        assert!(tile.worker_id < config.total_workers());
                        assert!(!rows.is_empty());
                        for &y in rows {
                            assert!((tile.row_start..tile.row_end).contains(&y));
                            assert!(seen.insert(y), "row {y} assigned twice ({config})");
                        }
                    }
                    assert_eq!(seen.len() as u32, height, "cover gap at h={height} {config}");
                }
            }
        }
    }

    #[test]
    fn partition_balances_rows_within_blocks_slack() {
        for height in 1..=64u32 {
            for blocks in 1..=8u32 {
                for threads in 1..=8u32 {
                    let config = NetworkConfig::new(blocks, threads);
                    let a = partition_image(3, height, config);
                    let mut counts = vec![0u32; config.total_workers() as usize];
                    for (tile, rows) in &a.tiles {
                        counts[tile.worker_id as usize] = rows.len() as u32;
                    }
                    let max = counts.iter().max().unwrap();
                    let min = counts.iter().min().unwrap();
                    assert!(
                        max - min <= blocks,
                        "imbalance {max}-{min} at h={height} {config}"
                    );
                }
            }
        }
    }

    #[test]
    fn config_strings_roundtrip() {
        for s in ["1x1", "2x1", "4x2", "16x16"] {
            let c: NetworkConfig = s.parse().unwrap();
            assert_eq!(c.to_string(), s);
        }
        assert_eq!("4X2".parse::<NetworkConfig>().unwrap(), NetworkConfig::new(4, 2));
        for bad in ["", "4", "x", "0x2", "2x0", "axb", "2x2x2"] {
            assert!(bad.parse::<NetworkConfig>().is_err(), "accepted '{bad}'");
        }
    }

    #[test]
    fn grid_shape_does_not_change_pixels() {
        let scene = experiment_scene(1).unwrap();
        let accel = build_bvh(&scene, 4);
        let settings = TraceSettings::default();
        let camera = scene.camera();
        let reference = render_parallel(&scene, &camera, &accel, &settings, 24, 24, NetworkConfig::new(1, 1));
        for config in [
            NetworkConfig::new(2, 1),
            NetworkConfig::new(2, 2),
            NetworkConfig::new(3, 2),
            NetworkConfig::new(5, 5),
        ] {
            let (image, stats) = render_parallel(&scene, &camera, &accel, &settings, 24, 24, config);
            assert_eq!(image, reference.0, "pixels drifted under {config}");
            assert_eq!(stats.rows_per_worker.iter().sum::<u32>(), 24);
            assert_eq!(stats.rows_per_worker.len(), config.total_workers() as usize);
        }
    }

    #[test]
    fn executor_cap_folds_without_changing_output() {
        let scene = experiment_scene(1).unwrap();
        let accel = build_bvh(&scene, 4);
        let settings = TraceSettings::default();
        let camera = scene.camera();
        let config = NetworkConfig::new(4, 2);
        let full = render_channel(&scene, &camera, &accel, &settings, 16, 16, config, None);
        for cap in [1usize, 2, 3] {
            let capped =
                render_channel(&scene, &camera, &accel, &settings, 16, 16, config, Some(cap));
            assert_eq!(assemble_image(&capped.0), assemble_image(&full.0));
            assert_eq!(capped.1.rows_per_worker, full.1.rows_per_worker);
        }
    }

    #[test]
    fn stats_count_one_primary_ray_per_pixel() {
        let scene = experiment_scene(1).unwrap();
        let accel = build_bvh(&scene, 4);
        let settings = TraceSettings::default();
        let (_, stats) = render_parallel(
            &scene,
            &scene.camera(),
            &accel,
            &settings,
            20,
            10,
            NetworkConfig::new(2, 2),
        );
        assert_eq!(stats.trace.primary_rays, 200);
        assert!(stats.wall_ns > 0);
    }
}
