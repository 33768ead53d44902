//! Ray generation, triangle intersection, and Whitted shading: ambient term,
//! Phong diffuse/specular from point lights, hard shadow rays, and recursive
//! perfect-mirror reflection. No refraction, no falloff, no sampling: every
//! operation is a pure function, which is what makes parallel renders
//! bit-identical to serial ones.

use crate::accel::{AccelHandle, AccelMismatch};
use crate::math::{Color, Vec3};
use crate::scene::{Camera, Scene};

#[derive(Clone, Copy, Debug)]
pub struct Ray {
    pub origin: Vec3,
    /// Unit length; `Ray::new` normalizes.
    pub direction: Vec3,
}

impl Ray {
    pub fn new(origin: Vec3, direction: Vec3) -> Ray {
        Ray {
            origin,
            direction: direction.normalized(),
        }
    }

    pub fn at(&self, t: f64) -> Vec3 {
        self.origin + self.direction * t
    }
}

/// Nearest surface interaction. `normal` is the geometric normal flipped to
/// face the ray origin (`normal . direction <= 0`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hit {
    pub t: f64,
    pub point: Vec3,
    pub normal: Vec3,
    pub object_index: usize,
    pub face_index: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceSettings {
    /// Reflection bounces still allowed; 0 means direct lighting only.
    pub max_depth: u32,
    /// Hits closer than this are ignored (self-intersection guard).
    pub t_min: f64,
    /// Shadow rays start this far along the surface normal.
    pub shadow_bias: f64,
}

impl Default for TraceSettings {
    fn default() -> TraceSettings {
        TraceSettings {
            max_depth: 3,
            t_min: 1e-4,
            shadow_bias: 1e-4,
        }
    }
}

/// Work counters, accumulated through an explicit `&mut` so the trace
/// functions stay pure apart from it. Merged across workers after a render.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TraceStats {
    pub primary_rays: u64,
    pub shadow_rays: u64,
    pub reflection_rays: u64,
    /// Ray-triangle kernel invocations.
    pub triangle_tests: u64,
    /// BVH nodes slab-tested (0 in linear mode).
    pub node_visits: u64,
}

impl TraceStats {
    pub fn merge(&mut self, other: &TraceStats) {
        self.primary_rays += other.primary_rays;
        self.shadow_rays += other.shadow_rays;
        self.reflection_rays += other.reflection_rays;
        self.triangle_tests += other.triangle_tests;
        self.node_visits += other.node_visits;
    }
}

/// Ray through the center of pixel (px, py). Pixel (0,0) is the top-left
/// corner; the image plane sits at unit distance along the view direction.
pub fn generate_primary_ray(camera: &Camera, px: u32, py: u32, width: u32, height: u32) -> Ray {
    assert!(
        px < width && py < height,
        "pixel ({px}, {py}) outside a {width}x{height} image"
    );
    let (right, up, forward) = camera.basis();
    let half_h = (camera.vertical_fov_deg.to_radians() * 0.5).tan();
    let half_w = camera.aspect * half_h;
    let x = ((px as f64 + 0.5) / width as f64) * 2.0 - 1.0;
    let y = 1.0 - ((py as f64 + 0.5) / height as f64) * 2.0;
    Ray::new(
        camera.position,
        right * (x * half_w) + up * (y * half_h) + forward,
    )
}

/// Barycentric ray-triangle intersection. Returns the smallest `t > t_min`
/// with coordinates (u, v); edges and vertices count as hits (u >= 0, v >= 0,
/// u + v <= 1). Rays parallel to the plane (|det| < 1e-12) miss.
pub fn intersect_triangle(
    ray: &Ray,
    v0: Vec3,
    v1: Vec3,
    v2: Vec3,
    t_min: f64,
) -> Option<(f64, f64, f64)> {
    let e1 = v1 - v0;
    let e2 = v2 - v0;
    let p = ray.direction.cross(e2);
    let det = e1.dot(p);
    if det.abs() < 1e-12 {
        return None;
    }
    let inv_det = 1.0 / det;
    let tv = ray.origin - v0;
    let u = tv.dot(p) * inv_det;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = tv.cross(e1);
    let v = ray.direction.dot(q) * inv_det;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let t = e2.dot(q) * inv_det;
    if t > t_min {
        Some((t, u, v))
    } else {
        None
    }
}

/// Nearest hit with `t > t_min`; ties at equal `t` go to the smallest
/// (object_index, face_index) pair, in both acceleration modes.
pub fn intersect_scene(
    ray: &Ray,
    scene: &Scene,
    accel: &AccelHandle,
    t_min: f64,
    stats: &mut TraceStats,
) -> Result<Option<Hit>, AccelMismatch> {
    crate::accel::query_nearest(accel, scene, ray, t_min, stats)
}

/// Mirror `direction` across `normal`: d - 2(d.n)n. Unit in, unit out.
pub fn reflect(direction: Vec3, normal: Vec3) -> Vec3 {
    direction - normal * (2.0 * direction.dot(normal))
}

/// Whitted shading for a hit:
/// ambient*diffuse
///   + sum over lights of visible * (diffuse*I*max(0,n.l) + specular*I*max(0,r.v)^shininess)
///   + reflectivity * trace(reflected, depth_remaining - 1).
/// A light is visible when the shadow ray from `hit.point + bias*n` meets no
/// occluder closer than the light. The reflection term is skipped at
/// depth_remaining = 0 or reflectivity = 0.
pub fn shade(
    hit: &Hit,
    ray: &Ray,
    scene: &Scene,
    accel: &AccelHandle,
    settings: &TraceSettings,
    depth_remaining: u32,
    stats: &mut TraceStats,
) -> Color {
    let material = scene.objects()[hit.object_index].material;
    let mut color = scene.ambient() * material.diffuse;
    let view = -ray.direction;

    for light in scene.lights() {
        let origin = hit.point + hit.normal * settings.shadow_bias;
        let to_light = light.position - origin;
        let distance = to_light.length();
        if distance == 0.0 {
            continue;
        }
        let l = to_light * (1.0 / distance);
        stats.shadow_rays += 1;
        let shadow_ray = Ray {
            origin,
            direction: l,
        };
        let occluded = intersect_scene(&shadow_ray, scene, accel, settings.t_min, stats)
            .expect("accel handle was valid for the primary ray")
            .is_some_and(|h| h.t < distance);
        if occluded {
            continue;
        }
        let n_dot_l = hit.normal.dot(l).max(0.0);
        color = color + material.diffuse * light.intensity * n_dot_l;
        let r_dot_v = reflect(-l, hit.normal).dot(view).max(0.0);
        if r_dot_v > 0.0 {
            color = color + material.specular * light.intensity * r_dot_v.powf(material.shininess);
        }
    }

    if depth_remaining > 0 && material.reflectivity > 0.0 {
        stats.reflection_rays += 1;
        let reflected = Ray {
            origin: hit.point,
            direction: reflect(ray.direction, hit.normal),
        };
        let bounced = trace(&reflected, scene, accel, settings, depth_remaining - 1, stats);
        color = color + bounced * material.reflectivity;
    }
    color
}

/// Background color on a miss, `shade` on a hit.
///
/// Panics if `accel` was built for a different scene; the render entry points
/// build their own handle so this only fires on direct misuse.
pub fn trace(
    ray: &Ray,
    scene: &Scene,
    accel: &AccelHandle,
    settings: &TraceSettings,
    depth_remaining: u32,
    stats: &mut TraceStats,
) -> Color {
    match intersect_scene(ray, scene, accel, settings.t_min, stats) {
        Ok(Some(hit)) => shade(&hit, ray, scene, accel, settings, depth_remaining, stats),
        Ok(None) => scene.background(),
        Err(e) => panic!("{e}"),
    }
}
