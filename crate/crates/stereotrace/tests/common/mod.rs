//! Reference implementations the engine is checked against: a scalar tracer
//! built from different algorithms (plane intersection plus a dot-product
//! barycentric inside test instead of the engine's kernel), plus shared
//! helpers for the integration suites.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use stereotrace::{Camera, Color, Ray, Scene, StageTimings, Vec3};

pub const T_MIN: f64 = 1e-4;
pub const SHADOW_BIAS: f64 = 1e-4;
pub const MAX_DEPTH: u32 = 3;

#[derive(Clone, Copy, Debug)]
pub struct OracleHit {
    pub t: f64,
    pub object: usize,
    pub face: usize,
    pub point: Vec3,
    pub normal: Vec3,
}

/// Intersect the triangle's plane, then test the hit point against the edges
/// in barycentric coordinates. Edges and vertices count as inside; rays
/// parallel to the plane miss under the same |n.d| < 1e-12 cutoff the engine
/// uses (its determinant equals -n.d for the same unnormalized n).
pub fn oracle_triangle(
    origin: Vec3,
    dir: Vec3,
    v0: Vec3,
    v1: Vec3,
    v2: Vec3,
    t_min: f64,
) -> Option<f64> {
    let e0 = v1 - v0;
    let e1 = v2 - v0;
    let n = e0.cross(e1);
    let denom = dir.dot(n);
    if denom.abs() < 1e-12 {
        return None;
    }
    let t = (v0 - origin).dot(n) / denom;
    if t <= t_min {
        return None;
    }
    let w = origin + dir * t - v0;
    let d00 = e0.dot(e0);
    let d01 = e0.dot(e1);
    let d11 = e1.dot(e1);
    let d20 = w.dot(e0);
    let d21 = w.dot(e1);
    let inv = 1.0 / (d00 * d11 - d01 * d01);
    let u = (d11 * d20 - d01 * d21) * inv;
    let v = (d00 * d21 - d01 * d20) * inv;
    if u >= 0.0 && v >= 0.0 && u + v <= 1.0 {
        Some(t)
    } else {
        None
    }
}

/// Exhaustive nearest hit with the engine's tie-break: smaller t wins, equal
/// t goes to the smallest (object, face) pair.
pub fn oracle_nearest(scene: &Scene, origin: Vec3, dir: Vec3, t_min: f64) -> Option<OracleHit> {
    let mut best: Option<OracleHit> = None;
    for (oi, obj) in scene.objects().iter().enumerate() {
        for fi in 0..obj.faces.len() {
            let (v0, v1, v2) = obj.face_vertices(fi);
            let Some(t) = oracle_triangle(origin, dir, v0, v1, v2, t_min) else {
                continue;
            };
            let better = match &best {
                None => true,
                Some(b) => t < b.t || (t == b.t && (oi, fi) < (b.object, b.face)),
            };
            if better {
                let mut normal = (v1 - v0).cross(v2 - v0).normalized();
                if normal.dot(dir) > 0.0 {
                    normal = -normal;
                }
                best = Some(OracleHit {
                    t,
                    object: oi,
                    face: fi,
                    point: origin + dir * t,
                    normal,
                });
            }
        }
    }
    best
}

fn mirror(d: Vec3, n: Vec3) -> Vec3 {
    d - n * (2.0 * d.dot(n))
}

/// Whitted shading over the oracle intersector: ambient*diffuse, per-light
/// diffuse and specular gated by a shadow probe, plus the mirrored bounce.
pub fn oracle_trace(scene: &Scene, origin: Vec3, dir: Vec3, depth: u32) -> Color {
    let Some(hit) = oracle_nearest(scene, origin, dir, T_MIN) else {
        return scene.background();
    };
    let m = scene.objects()[hit.object].material;
    let mut color = scene.ambient() * m.diffuse;
    for light in scene.lights() {
        let shadow_origin = hit.point + hit.normal * SHADOW_BIAS;
        let to_light = light.position - shadow_origin;
        let distance = to_light.length();
        if distance == 0.0 {
            continue;
        }
        let l = to_light * (1.0 / distance);
        let blocked = oracle_nearest(scene, shadow_origin, l, T_MIN)
            .is_some_and(|h| h.t < distance);
        if blocked {
            continue;
        }
        color = color + m.diffuse * light.intensity * hit.normal.dot(l).max(0.0);
        let r_dot_v = mirror(-l, hit.normal).dot(-dir).max(0.0);
        if r_dot_v > 0.0 {
            color = color + m.specular * light.intensity * r_dot_v.powf(m.shininess);
        }
    }
    if depth > 0 && m.reflectivity > 0.0 {
        let bounced = oracle_trace(scene, hit.point, mirror(dir, hit.normal), depth - 1);
        color = color + bounced * m.reflectivity;
    }
    color
}

/// Pixel-center camera ray, derived from the camera record by hand (basis
/// from look_at/up, vertical fov, aspect from the target raster).
pub fn oracle_camera_ray(cam: &Camera, px: u32, py: u32, width: u32, height: u32) -> (Vec3, Vec3) {
    let forward = (cam.look_at - cam.position).normalized();
    let right = forward.cross(cam.up).normalized();
    let up = right.cross(forward);
    let half_h = (cam.vertical_fov_deg.to_radians() * 0.5).tan();
    let half_w = (width as f64 / height as f64) * half_h;
    let x = ((px as f64 + 0.5) / width as f64) * 2.0 - 1.0;
    let y = 1.0 - ((py as f64 + 0.5) / height as f64) * 2.0;
    let dir = (right * (x * half_w) + up * (y * half_h) + forward).normalized();
    (cam.position, dir)
}

/// The full reference path for one pixel of a mono render.
pub fn oracle_pixel(scene: &Scene, px: u32, py: u32, width: u32, height: u32) -> Color {
    let (origin, dir) = oracle_camera_ray(&scene.camera(), px, py, width, height);
    oracle_trace(scene, origin, dir, MAX_DEPTH)
}

pub fn oracle_quantize(c: f64) -> u8 {
    (c * 255.0).round().clamp(0.0, 255.0) as u8
}

/// A ray from a shell outside every built-in layout, aimed through the
/// populated core, so a good share of probes hit geometry.
pub fn random_probe_ray(rng: &mut ChaCha8Rng) -> Ray {
    let origin = loop {
        let p = Vec3::new(
            rng.gen_range(-14.0..14.0),
            rng.gen_range(-14.0..14.0),
            rng.gen_range(-14.0..14.0),
        );
        if p.length() > 9.0 {
            break p;
        }
    };
    let target = Vec3::new(
        rng.gen_range(-4.0..4.0),
        rng.gen_range(-4.0..4.0),
        rng.gen_range(-4.0..4.0),
    );
    Ray::new(origin, target - origin)
}

/// Stage-duration sum must land in [90%, 100%] of the run's total.
pub fn assert_accounting(t: &StageTimings) {
    let sum = t.stage_sum();
    assert!(
        sum <= t.total,
        "stage sum {sum} ns exceeds total {} ns",
        t.total
    );
    assert!(
        sum * 10 >= t.total * 9,
        "unattributed time above 10%: stages {sum} ns of {} ns total",
        t.total
    );
}
