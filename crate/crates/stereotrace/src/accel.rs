//! Nearest-hit acceleration: a binary BVH (median split on the longest
//! centroid axis) and a brute-force linear scan. Both return bit-identical
//! results (same intersection kernel, same tie-break), so the linear mode
//! doubles as the correctness oracle for the tree.

use crate::math::Vec3;
use crate::scene::Scene;
use crate::tracer::{intersect_triangle, Hit, Ray, TraceStats};

/// Handle revision does not match the scene being queried. Scenes are
/// content-addressed, so this catches both "wrong scene" and "scene was
/// rebuilt since".
#[derive(Clone, Copy, Debug, thiserror::Error, PartialEq, Eq)]
#[error("acceleration structure built for scene revision {built:#018x}, queried with {queried:#018x}")]
pub struct AccelMismatch {
    pub built: u64,
    pub queried: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AccelMode {
    Linear,
    Bvh,
}

impl AccelMode {
    pub fn as_str(self) -> &'static str {
        match self {
            AccelMode::Linear => "linear",
            AccelMode::Bvh => "bvh",
        }
    }
}

impl std::str::FromStr for AccelMode {
    type Err = String;

    fn from_str(s: &str) -> Result<AccelMode, String> {
        match s {
            "linear" => Ok(AccelMode::Linear),
            "bvh" => Ok(AccelMode::Bvh),
            other => Err(format!("unknown accel mode '{other}' (expected linear or bvh)")),
        }
    }
}

impl std::fmt::Display for AccelMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Axis-aligned box. `min <= max` component-wise for any non-empty box.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    /// Identity for `union`: grows to whatever it is merged with.
    pub fn empty() -> Aabb {
        Aabb {
            min: Vec3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY),
            max: Vec3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
        }
    }

    pub fn of_triangle(a: Vec3, b: Vec3, c: Vec3) -> Aabb {
        Aabb {
            min: a.min(b).min(c),
            max: a.max(b).max(c),
        }
    }

    pub fn union(a: Aabb, b: Aabb) -> Aabb {
        Aabb {
            min: a.min.min(b.min),
            max: a.max.max(b.max),
        }
    }

    pub fn grow(&mut self, p: Vec3) {
        self.min = self.min.min(p);
        self.max = self.max.max(p);
    }

    pub fn contains(&self, other: &Aabb) -> bool {
        self.min.x <= other.min.x
            && self.min.y <= other.min.y
            && self.min.z <= other.min.z
            && self.max.x >= other.max.x
            && self.max.y >= other.max.y
            && self.max.z >= other.max.z
    }

    /// Longest-extent axis; ties pick the lowest axis index.
    pub fn longest_axis(&self) -> usize {
        let e = self.max - self.min;
        let mut axis = 0;
        if e.y > e.component(axis) {
            axis = 1;
        }
        if e.z > e.component(axis) {
            axis = 2;
        }
        axis
    }

    /// Branchless slab test over [t_min, t_max]. Returns the entry parameter
    /// (negative when the origin is inside). Zero direction components yield
    /// infinities, and any 0 * inf NaN is suppressed by the min/max chain.
    pub fn hit(&self, origin: Vec3, inv_dir: Vec3, t_min: f64, t_max: f64) -> Option<f64> {
        let mut near = f64::NEG_INFINITY;
        let mut far = f64::INFINITY;
        for axis in 0..3 {
            let t1 = (self.min.component(axis) - origin.component(axis)) * inv_dir.component(axis);
            let t2 = (self.max.component(axis) - origin.component(axis)) * inv_dir.component(axis);
            near = near.max(t1.min(t2));
            far = far.min(t1.max(t2));
        }
        if near <= far && near <= t_max && far >= t_min {
            Some(near)
        } else {
            None
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub enum NodeKind {
    Inner { left: u32, right: u32 },
    /// Contiguous range of the handle's triangle list.
    Leaf { start: u32, count: u32 },
}

#[derive(Clone, Copy, Debug)]
pub struct BvhNode {
    pub bounds: Aabb,
    pub kind: NodeKind,
}

/// Immutable query structure bound to one scene revision. Shareable across
/// any number of concurrent readers.
#[derive(Clone, Debug)]
pub struct AccelHandle {
    mode: AccelMode,
    revision: u64,
    /// Flat node array, root at index 0. Empty in linear mode.
    nodes: Vec<BvhNode>,
    /// (object, face) references, permuted so each leaf owns a contiguous
    /// slice. Empty in linear mode (the scan walks the scene directly).
    tris: Vec<(u32, u32)>,
    triangle_count: usize,
    leaf_max: usize,
}

impl AccelHandle {
    pub fn mode(&self) -> AccelMode {
        self.mode
    }

    pub fn revision(&self) -> u64 {
        self.revision
    }

    pub fn nodes(&self) -> &[BvhNode] {
        &self.nodes
    }

    pub fn triangle_refs(&self) -> &[(u32, u32)] {
        &self.tris
    }

    pub fn triangle_count(&self) -> usize {
        self.triangle_count
    }

    pub fn leaf_max(&self) -> usize {
        self.leaf_max
    }
}

/// Brute-force baseline: every query tests every triangle.
pub fn build_linear(scene: &Scene) -> AccelHandle {
    AccelHandle {
        mode: AccelMode::Linear,
        revision: scene.revision(),
        nodes: Vec::new(),
        tris: Vec::new(),
        triangle_count: scene.triangle_count(),
        leaf_max: 0,
    }
}

pub const DEFAULT_LEAF_MAX: usize = 4;

struct BuildTri {
    obj: u32,
    face: u32,
    bounds: Aabb,
    centroid: Vec3,
}

/// Top-down binary BVH: split at the median of triangle centroids along the
/// longest axis of the centroid bounds, stop at `leaf_max` triangles.
pub fn build_bvh(scene: &Scene, leaf_max: usize) -> AccelHandle {
    assert!(leaf_max >= 1, "leaf_max must be at least 1");
    let mut build: Vec<BuildTri> = Vec::with_capacity(scene.triangle_count());
    for (oi, obj) in scene.objects().iter().enumerate() {
        for fi in 0..obj.faces.len() {
            let (a, b, c) = obj.face_vertices(fi);
            build.push(BuildTri {
                obj: oi as u32,
                face: fi as u32,
                bounds: Aabb::of_triangle(a, b, c),
                centroid: (a + b + c) * (1.0 / 3.0),
            });
        }
    }
    let mut nodes = Vec::new();
    if !build.is_empty() {
        build_node(&mut build, 0, &mut nodes, leaf_max);
    }
    AccelHandle {
        mode: AccelMode::Bvh,
        revision: scene.revision(),
        triangle_count: build.len(),
        tris: build.iter().map(|t| (t.obj, t.face)).collect(),
        nodes,
        leaf_max,
    }
}

fn build_node(tris: &mut [BuildTri], first: u32, nodes: &mut Vec<BvhNode>, leaf_max: usize) -> u32 {
    let bounds = tris
        .iter()
        .fold(Aabb::empty(), |acc, t| Aabb::union(acc, t.bounds));
    let index = nodes.len() as u32;
    if tris.len() <= leaf_max {
        nodes.push(BvhNode {
            bounds,
            kind: NodeKind::Leaf {
                start: first,
                count: tris.len() as u32,
            },
        });
        return index;
    }
    let mut centroid_bounds = Aabb::empty();
    for t in tris.iter() {
        centroid_bounds.grow(t.centroid);
    }
    let axis = centroid_bounds.longest_axis();
    // Total order (centroid, object, face) keeps the build deterministic even
    // with duplicated centroids.
    tris.sort_unstable_by(|a, b| {
        a.centroid
            .component(axis)
            .total_cmp(&b.centroid.component(axis))
            .then_with(|| (a.obj, a.face).cmp(&(b.obj, b.face)))
    });
    let mid = tris.len() / 2;
    nodes.push(BvhNode {
        bounds,
        kind: NodeKind::Leaf { start: 0, count: 0 }, // patched below
    });
    let (lo, hi) = tris.split_at_mut(mid);
    let left = build_node(lo, first, nodes, leaf_max);
    let right = build_node(hi, first + mid as u32, nodes, leaf_max);
    nodes[index as usize].kind = NodeKind::Inner { left, right };
    index
}

#[derive(Clone, Copy)]
struct Best {
    t: f64,
    obj: u32,
    face: u32,
}

/// Shared tie-break: nearer t wins, equal t goes to the smaller
/// (object, face) pair. Both modes funnel through this so their results are
/// comparable bit for bit.
fn consider(best: &mut Option<Best>, t: f64, obj: u32, face: u32) {
    let better = match best {
        None => true,
        Some(b) => t < b.t || (t == b.t && (obj, face) < (b.obj, b.face)),
    };
    if better {
        *best = Some(Best { t, obj, face });
    }
}

/// Nearest hit beyond `t_min`, or `AccelMismatch` if the handle was built for
/// a different scene revision.
pub fn query_nearest(
    handle: &AccelHandle,
    scene: &Scene,
    ray: &Ray,
    t_min: f64,
    stats: &mut TraceStats,
) -> Result<Option<Hit>, AccelMismatch> {
    if handle.revision != scene.revision() {
        return Err(AccelMismatch {
            built: handle.revision,
            queried: scene.revision(),
        });
    }
    let best = match handle.mode {
        AccelMode::Linear => query_linear(scene, ray, t_min, stats),
        AccelMode::Bvh => query_bvh(handle, scene, ray, t_min, stats),
    };
    Ok(best.map(|b| make_hit(scene, ray, b)))
}

fn query_linear(scene: &Scene, ray: &Ray, t_min: f64, stats: &mut TraceStats) -> Option<Best> {
    let mut best = None;
    for (oi, obj) in scene.objects().iter().enumerate() {
        for fi in 0..obj.faces.len() {
            let (a, b, c) = obj.face_vertices(fi);
            stats.triangle_tests += 1;
            if let Some((t, _, _)) = intersect_triangle(ray, a, b, c, t_min) {
                consider(&mut best, t, oi as u32, fi as u32);
            }
        }
    }
    best
}

fn query_bvh(
    handle: &AccelHandle,
    scene: &Scene,
    ray: &Ray,
    t_min: f64,
    stats: &mut TraceStats,
) -> Option<Best> {
    if handle.nodes.is_empty() {
        return None;
    }
    let inv_dir = Vec3::new(
        1.0 / ray.direction.x,
        1.0 / ray.direction.y,
        1.0 / ray.direction.z,
    );
    let mut best: Option<Best> = None;
    let mut best_t = f64::INFINITY;

    stats.node_visits += 1;
    let root_entry = handle.nodes[0].bounds.hit(ray.origin, inv_dir, t_min, best_t)?;
    // (node index, slab entry t); entries are rechecked against the current
    // best at pop time, which prunes subtrees that became irrelevant while
    // they waited on the stack.
    let mut stack: Vec<(u32, f64)> = Vec::with_capacity(48);
    stack.push((0, root_entry));

    while let Some((index, entry)) = stack.pop() {
        if entry > best_t {
            continue;
        }
        match handle.nodes[index as usize].kind {
            NodeKind::Leaf { start, count } => {
                for &(obj, face) in &handle.tris[start as usize..(start + count) as usize] {
                    let (a, b, c) = scene.objects()[obj as usize].face_vertices(face as usize);
                    stats.triangle_tests += 1;
                    if let Some((t, _, _)) = intersect_triangle(ray, a, b, c, t_min) {
                        consider(&mut best, t, obj, face);
                        best_t = best.unwrap().t;
                    }
                }
            }
            NodeKind::Inner { left, right } => {
                stats.node_visits += 2;
                let l = handle.nodes[left as usize]
                    .bounds
                    .hit(ray.origin, inv_dir, t_min, best_t)
                    .map(|t| (left, t));
                let r = handle.nodes[right as usize]
                    .bounds
                    .hit(ray.origin, inv_dir, t_min, best_t)
                    .map(|t| (right, t));
                match (l, r) {
                    (Some(a), Some(b)) => {
                        // Nearer child on top of the stack.
                        if a.1 <= b.1 {
                            stack.push(b);
                            stack.push(a);
                        } else {
                            stack.push(a);
                            stack.push(b);
                        }
                    }
                    (Some(a), None) | (None, Some(a)) => stack.push(a),
                    (None, None) => {}
                }
            }
        }
    }
    best
}

fn make_hit(scene: &Scene, ray: &Ray, best: Best) -> Hit {
    let (a, b, c) = scene.objects()[best.obj as usize].face_vertices(best.face as usize);
    let mut normal = (b - a).cross(c - a).normalized();
    if normal.dot(ray.direction) > 0.0 {
        normal = -normal;
    }
    Hit {
        t: best.t,
        point: ray.at(best.t),
        normal,
        object_index: best.obj as usize,
        face_index: best.face as usize,
    }
}
