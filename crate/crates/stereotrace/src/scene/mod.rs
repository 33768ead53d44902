//! Scene description: triangle meshes with Phong materials, point lights,
//! a camera, and the stereo eye separation. A `Scene` is validated once at
//! construction and immutable afterwards, so it can be shared freely across
//! render workers.

mod builtin;
mod parse;

pub use builtin::{builtin_object, experiment_scene, BuiltinKind};
pub use parse::{load_scene, parse_scene, serialize_scene};

use std::path::PathBuf;

use crate::math::{Color, Vec3};

#[derive(Debug, thiserror::Error)]
pub enum SceneError {
    #[error("scene file not found: {0}")]
    FileNotFound(PathBuf),
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid scene: {entity}: {reason}")]
    Validation { entity: String, reason: String },
    #[error("unsupported experiment scene count {0} (supported: 1, 2, 3, 5, 6)")]
    UnsupportedCount(u32),
}

/// Phong surface parameters. `reflectivity` scales the recursive mirror term.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Material {
    pub diffuse: Color,
    pub specular: Color,
    pub shininess: f64,
    pub reflectivity: f64,
}

impl Material {
    pub fn new(diffuse: Color, specular: Color, shininess: f64, reflectivity: f64) -> Material {
        Material {
            diffuse,
            specular,
            shininess,
            reflectivity,
        }
    }

    /// Matte light gray; the parser's fallback when an object block has no
    /// material record.
    pub fn default_gray() -> Material {
        Material::new(Color::gray(0.7), Color::BLACK, 1.0, 0.0)
    }

    fn check(&self) -> Result<(), String> {
        for (label, c) in [("diffuse", self.diffuse), ("specular", self.specular)] {
            if !c.is_finite() || !c.is_non_negative() {
                return Err(format!("{label} color must be finite and non-negative"));
            }
        }
        if !self.shininess.is_finite() || self.shininess < 1.0 {
            return Err("shininess must be finite and >= 1".into());
        }
        if !self.reflectivity.is_finite() || !(0.0..=1.0).contains(&self.reflectivity) {
            return Err("reflectivity must be in [0, 1]".into());
        }
        Ok(())
    }
}

/// Indexed triangle soup. Faces are vertex-index triples, counter-clockwise
/// when viewed from outside for the built-in solids.
#[derive(Clone, Debug, PartialEq)]
pub struct TriangleMesh {
    pub name: String,
    pub vertices: Vec<Vec3>,
    pub faces: Vec<[u32; 3]>,
    pub material: Material,
}

impl TriangleMesh {
    pub fn face_vertices(&self, face: usize) -> (Vec3, Vec3, Vec3) {
        let [a, b, c] = self.faces[face];
        (
            self.vertices[a as usize],
            self.vertices[b as usize],
            self.vertices[c as usize],
        )
    }

    fn check(&self) -> Result<(), String> {
        for (i, v) in self.vertices.iter().enumerate() {
            if !v.is_finite() {
                return Err(format!("vertex {i} has a non-finite component"));
            }
        }
        let n = self.vertices.len() as u32;
        for (i, f) in self.faces.iter().enumerate() {
            for &idx in f {
                if idx >= n {
                    return Err(format!(
                        "face {i} references vertex {idx}, but the object has {n} vertices"
                    ));
                }
            }
        }
        if self.faces.is_empty() {
            return Ok(());
        }
        // Degenerate faces would yield NaN normals in shading; rejected
        // relative to the mesh extent.
        let (mut lo, mut hi) = (self.vertices[0], self.vertices[0]);
        for v in &self.vertices {
            lo = lo.min(*v);
            hi = hi.max(*v);
        }
        let diag_sq = (hi - lo).length_squared();
        for (i, _) in self.faces.iter().enumerate() {
            let (a, b, c) = self.face_vertices(i);
            let area = 0.5 * (b - a).cross(c - a).length();
            if !(area > 1e-12 * diag_sq) {
                return Err(format!("face {i} is degenerate (area {area:.3e})"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointLight {
    pub position: Vec3,
    pub intensity: Color,
}

/// Pinhole camera. `aspect` is not stored in scene files; render entry points
/// override it with the actual image aspect via `with_aspect`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Camera {
    pub position: Vec3,
    pub look_at: Vec3,
    pub up: Vec3,
    pub vertical_fov_deg: f64,
    pub aspect: f64,
}

impl Camera {
    /// The fixed viewpoint of the built-in scenes: on the +z axis looking at
    /// the origin.
    pub fn default_view() -> Camera {
        Camera {
            position: Vec3::new(0.0, 0.0, 15.0),
            look_at: Vec3::ZERO,
            up: Vec3::new(0.0, 1.0, 0.0),
            vertical_fov_deg: 60.0,
            aspect: 1.0,
        }
    }

    pub fn with_aspect(mut self, aspect: f64) -> Camera {
        self.aspect = aspect;
        self
    }

    /// Orthonormal view basis: (right, up, forward). `forward` points from
    /// the position toward `look_at`.
    pub fn basis(&self) -> (Vec3, Vec3, Vec3) {
        let forward = (self.look_at - self.position).normalized();
        let right = forward.cross(self.up).normalized();
        let up = right.cross(forward);
        (right, up, forward)
    }

    pub fn check(&self) -> Result<(), String> {
        if !self.position.is_finite() || !self.look_at.is_finite() || !self.up.is_finite() {
            return Err("camera vectors must be finite".into());
        }
        let forward = self.look_at - self.position;
        if forward.length_squared() == 0.0 {
            return Err("camera position equals look_at".into());
        }
        if forward.cross(self.up).length_squared() < 1e-18 {
            return Err("camera up is parallel to the view direction".into());
        }
        if !self.vertical_fov_deg.is_finite()
            || self.vertical_fov_deg <= 0.0
            || self.vertical_fov_deg >= 180.0
        {
            return Err("vertical fov must lie in (0, 180) degrees".into());
        }
        if !self.aspect.is_finite() || self.aspect <= 0.0 {
            return Err("aspect must be positive".into());
        }
        Ok(())
    }
}

/// Validated, immutable world description. The revision id is an FNV-1a hash
/// of the canonical serialized form; acceleration structures remember it so a
/// stale handle is detected instead of silently mis-rendering.
#[derive(Clone, Debug, PartialEq)]
pub struct Scene {
    objects: Vec<TriangleMesh>,
    lights: Vec<PointLight>,
    ambient: Color,
    background: Color,
    camera: Camera,
    eye_separation: f64,
    revision: u64,
}

impl Scene {
    pub fn new(
        objects: Vec<TriangleMesh>,
        lights: Vec<PointLight>,
        ambient: Color,
        background: Color,
        camera: Camera,
        eye_separation: f64,
    ) -> Result<Scene, SceneError> {
        let validation = |entity: &str, reason: String| SceneError::Validation {
            entity: entity.to_string(),
            reason,
        };
        for (i, obj) in objects.iter().enumerate() {
            let entity = if obj.name.is_empty() {
                format!("object {i}")
            } else {
                format!("object {i} ({})", obj.name)
            };
            obj.check().map_err(|r| validation(&entity, r))?;
            obj.material.check().map_err(|r| validation(&entity, r))?;
        }
        for (i, light) in lights.iter().enumerate() {
            if !light.position.is_finite() {
                return Err(validation(&format!("light {i}"), "non-finite position".into()));
            }
            if !light.intensity.is_finite() || !light.intensity.is_non_negative() {
                return Err(validation(
                    &format!("light {i}"),
                    "intensity must be finite and non-negative".into(),
                ));
            }
        }
        for (label, c) in [("ambient", ambient), ("background", background)] {
            if !c.is_finite() || !c.is_non_negative() {
                return Err(validation(label, "color must be finite and non-negative".into()));
            }
        }
        camera.check().map_err(|r| validation("camera", r))?;
        if !eye_separation.is_finite() || eye_separation <= 0.0 {
            return Err(validation("stereo", "eye separation must be positive".into()));
        }
        let mut scene = Scene {
            objects,
            lights,
            ambient,
            background,
            camera,
            eye_separation,
            revision: 0,
        };
        scene.revision = fnv1a64(serialize_scene(&scene).as_bytes());
        Ok(scene)
    }

    pub fn objects(&self) -> &[TriangleMesh] {
        &self.objects
    }

    pub fn lights(&self) -> &[PointLight] {
        &self.lights
    }

    pub fn ambient(&self) -> Color {
        self.ambient
    }

    pub fn background(&self) -> Color {
        self.background
    }

    pub fn camera(&self) -> Camera {
        self.camera
    }

    pub fn eye_separation(&self) -> f64 {
        self.eye_separation
    }

    /// Content hash of the canonical serialized form.
    pub fn revision(&self) -> u64 {
        self.revision
    }

    pub fn triangle_count(&self) -> usize {
        self.objects.iter().map(|o| o.faces.len()).sum()
    }
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad_mesh() -> TriangleMesh {
        TriangleMesh {
            name: "quad".into(),
            vertices: vec![
                Vec3::new(-1.0, -1.0, 0.0),
                Vec3::new(1.0, -1.0, 0.0),
                Vec3::new(1.0, 1.0, 0.0),
                Vec3::new(-1.0, 1.0, 0.0),
            ],
            faces: vec![[0, 1, 2], [0, 2, 3]],
            material: Material::default_gray(),
        }
    }

    fn scene_with(objects: Vec<TriangleMesh>) -> Result<Scene, SceneError> {
        Scene::new(
            objects,
            vec![PointLight {
                position: Vec3::new(0.0, 0.0, 10.0),
                intensity: Color::gray(1.0),
            }],
            Color::gray(0.1),
            Color::BLACK,
            Camera::default_view(),
            0.065,
        )
    }

    #[test]
    fn empty_scene_is_valid() {
        let scene = Scene::new(
            Vec::new(),
            Vec::new(),
            Color::BLACK,
            Color::BLACK,
            Camera::default_view(),
            0.065,
        )
        .unwrap();
        assert_eq!(scene.objects().len(), 0);
        assert_eq!(scene.lights().len(), 0);
        assert_eq!(scene.triangle_count(), 0);
    }

    #[test]
    fn out_of_range_face_index_is_rejected() {
        let mut mesh = quad_mesh();
        mesh.faces.push([0, 1, 9]);
        let err = scene_with(vec![mesh]).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("quad"), "error should name the object: {msg}");
        assert!(msg.contains("face 2"), "error should name the face: {msg}");
    }

    #[test]
    fn degenerate_face_is_rejected() {
        let mut mesh = quad_mesh();
        mesh.faces.push([0, 1, 1]);
        let err = scene_with(vec![mesh]).unwrap_err();
        assert!(err.to_string().contains("degenerate"), "{err}");
    }

    #[test]
    fn bad_camera_is_rejected() {
        let mut cam = Camera::default_view();
        cam.up = Vec3::new(0.0, 0.0, -1.0); // parallel to the view direction
        let err = Scene::new(Vec::new(), Vec::new(), Color::BLACK, Color::BLACK, cam, 0.065)
            .unwrap_err();
        assert!(err.to_string().contains("parallel"), "{err}");
    }

    #[test]
    fn revision_tracks_content() {
        let a = scene_with(vec![quad_mesh()]).unwrap();
        let b = scene_with(vec![quad_mesh()]).unwrap();
        assert_eq!(a.revision(), b.revision());

        let mut moved = quad_mesh();
        moved.vertices[0].x = -2.0;
        let c = scene_with(vec![moved]).unwrap();
        assert_ne!(a.revision(), c.revision());
    }

    #[test]
    fn camera_basis_is_orthonormal() {
        let (right, up, forward) = Camera::default_view().basis();
        assert!((right.length() - 1.0).abs() < 1e-12);
        assert!((up.length() - 1.0).abs() < 1e-12);
        assert!(right.dot(up).abs() < 1e-12);
        assert!(right.dot(forward).abs() < 1e-12);
        assert!(up.dot(forward).abs() < 1e-12);
        // Looking from +z toward the origin with +y up, right must be +x.
        assert!((right - Vec3::new(1.0, 0.0, 0.0)).length() < 1e-12);
    }
}
