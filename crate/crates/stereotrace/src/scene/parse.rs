//! Textual scene format: one record per line, `#` starts a comment, numbers
//! use `.` as the decimal separator regardless of locale.
//!
//! ```text
//! camera px py pz  lx ly lz  ux uy uz  vfov_deg
//! stereo eye_separation
//! ambient r g b
//! background r g b
//! light px py pz  ir ig ib
//! object begin <name>
//! v x y z
//! f i j k ...          # 0-based; n-gons are fanned from the first index
//! material kdr kdg kdb  ksr ksg ksb  shininess reflectivity
//! object end
//! builtin <kind> cx cy cz scale  kdr kdg kdb ksr ksg ksb shininess reflectivity
//! ```
//!
//! The serializer writes the expanded `object begin`/`end` form for every
//! object and is the canonical form hashed into `Scene::revision`. The camera
//! `aspect` field is not part of the format; files always parse with aspect 1
//! and renders override it with the actual image aspect.

use std::path::Path;

use crate::math::{Color, Vec3};
use crate::scene::{
    builtin_object, BuiltinKind, Camera, Material, PointLight, Scene, SceneError, TriangleMesh,
};

pub fn load_scene<P: AsRef<Path>>(path: P) -> Result<Scene, SceneError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            SceneError::FileNotFound(path.to_path_buf())
        } else {
            SceneError::Io {
                path: path.to_path_buf(),
                source: e,
            }
        }
    })?;
    parse_scene(&text)
}

struct OpenObject {
    begin_line: usize,
    name: String,
    vertices: Vec<Vec3>,
    faces: Vec<[u32; 3]>,
    material: Option<Material>,
}

pub fn parse_scene(text: &str) -> Result<Scene, SceneError> {
    let err = |line: usize, message: String| SceneError::Parse { line, message };

    let mut camera: Option<Camera> = None;
    let mut stereo: Option<f64> = None;
    let mut ambient: Option<Color> = None;
    let mut background: Option<Color> = None;
    let mut lights = Vec::new();
    let mut objects = Vec::new();
    let mut open: Option<OpenObject> = None;

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        };
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        match tokens[0] {
            "camera" => {
                let n = floats(&tokens[1..], 10, line_no)?;
                camera = Some(Camera {
                    position: Vec3::new(n[0], n[1], n[2]),
                    look_at: Vec3::new(n[3], n[4], n[5]),
                    up: Vec3::new(n[6], n[7], n[8]),
                    vertical_fov_deg: n[9],
                    aspect: 1.0,
                });
            }
            "stereo" => {
                let n = floats(&tokens[1..], 1, line_no)?;
                stereo = Some(n[0]);
            }
            "ambient" => {
                let n = floats(&tokens[1..], 3, line_no)?;
                ambient = Some(Color::new(n[0], n[1], n[2]));
            }
            "background" => {
                let n = floats(&tokens[1..], 3, line_no)?;
                background = Some(Color::new(n[0], n[1], n[2]));
            }
            "light" => {
                let n = floats(&tokens[1..], 6, line_no)?;
                lights.push(PointLight {
                    position: Vec3::new(n[0], n[1], n[2]),
                    intensity: Color::new(n[3], n[4], n[5]),
                });
            }
            "object" => match tokens.get(1) {
                Some(&"begin") => {
                    if open.is_some() {
                        return Err(err(line_no, "nested 'object begin'".into()));
                    }
                    open = Some(OpenObject {
                        begin_line: line_no,
                        name: tokens[2..].join(" "),
                        vertices: Vec::new(),
                        faces: Vec::new(),
                        material: None,
                    });
                }
                Some(&"end") => {
                    let obj = open
                        .take()
                        .ok_or_else(|| err(line_no, "'object end' without 'object begin'".into()))?;
                    objects.push(TriangleMesh {
                        name: obj.name,
                        vertices: obj.vertices,
                        faces: obj.faces,
                        material: obj.material.unwrap_or_else(Material::default_gray),
                    });
                }
                other => {
                    return Err(err(
                        line_no,
                        format!("expected 'object begin' or 'object end', got {other:?}"),
                    ));
                }
            },
            "v" => {
                let n = floats(&tokens[1..], 3, line_no)?;
                open.as_mut()
                    .ok_or_else(|| err(line_no, "'v' outside an object block".into()))?
                    .vertices
                    .push(Vec3::new(n[0], n[1], n[2]));
            }
            "f" => {
                let obj = open
                    .as_mut()
                    .ok_or_else(|| err(line_no, "'f' outside an object block".into()))?;
                if tokens.len() < 4 {
                    return Err(err(line_no, "'f' needs at least 3 vertex indices".into()));
                }
                let mut ids = Vec::with_capacity(tokens.len() - 1);
                for t in &tokens[1..] {
                    ids.push(t.parse::<u32>().map_err(|_| {
                        err(line_no, format!("'{t}' is not a vertex index"))
                    })?);
                }
                for m in 1..ids.len() - 1 {
                    obj.faces.push([ids[0], ids[m], ids[m + 1]]);
                }
            }
            "material" => {
                let n = floats(&tokens[1..], 8, line_no)?;
                open.as_mut()
                    .ok_or_else(|| err(line_no, "'material' outside an object block".into()))?
                    .material = Some(Material::new(
                    Color::new(n[0], n[1], n[2]),
                    Color::new(n[3], n[4], n[5]),
                    n[6],
                    n[7],
                ));
            }
            "builtin" => {
                if open.is_some() {
                    return Err(err(line_no, "'builtin' inside an object block".into()));
                }
                let kind: BuiltinKind = tokens
                    .get(1)
                    .ok_or_else(|| err(line_no, "'builtin' needs a kind".into()))?
                    .parse()
                    .map_err(|e: String| err(line_no, e))?;
                let n = floats(&tokens[2..], 12, line_no)?;
                if !(n[3] > 0.0 && n[3].is_finite()) {
                    return Err(err(line_no, "builtin scale must be positive".into()));
                }
                objects.push(builtin_object(
                    kind,
                    Vec3::new(n[0], n[1], n[2]),
                    n[3],
                    Material::new(
                        Color::new(n[4], n[5], n[6]),
                        Color::new(n[7], n[8], n[9]),
                        n[10],
                        n[11],
                    ),
                ));
            }
            other => {
                return Err(err(line_no, format!("unknown record '{other}'")));
            }
        }
    }

    if let Some(obj) = open {
        return Err(err(
            obj.begin_line,
            format!("object '{}' is never closed", obj.name),
        ));
    }

    Scene::new(
        objects,
        lights,
        ambient.unwrap_or(Color::BLACK),
        background.unwrap_or(Color::BLACK),
        camera.unwrap_or_else(Camera::default_view),
        stereo.unwrap_or(0.065),
    )
}

fn floats(tokens: &[&str], expect: usize, line: usize) -> Result<Vec<f64>, SceneError> {
    if tokens.len() != expect {
        return Err(SceneError::Parse {
            line,
            message: format!("expected {expect} numbers, got {}", tokens.len()),
        });
    }
    tokens
        .iter()
        .map(|t| {
            t.parse::<f64>().map_err(|_| SceneError::Parse {
                line,
                message: format!("'{t}' is not a number"),
            })
        })
        .collect()
}

/// Canonical text form. Parsing the result reproduces the scene exactly
/// (float formatting is shortest-round-trip), which is what makes the
/// revision hash content-addressed.
pub fn serialize_scene(scene: &Scene) -> String {
    use std::fmt::Write;

    let mut out = String::new();
    let cam = scene.camera();
    let v = |v: Vec3| format!("{} {} {}", v.x, v.y, v.z);
    let c = |c: Color| format!("{} {} {}", c.r, c.g, c.b);

    let _ = writeln!(
        out,
        "camera {} {} {} {}",
        v(cam.position),
        v(cam.look_at),
        v(cam.up),
        cam.vertical_fov_deg
    );
    let _ = writeln!(out, "stereo {}", scene.eye_separation());
    let _ = writeln!(out, "ambient {}", c(scene.ambient()));
    let _ = writeln!(out, "background {}", c(scene.background()));
    for light in scene.lights() {
        let _ = writeln!(out, "light {} {}", v(light.position), c(light.intensity));
    }
    for obj in scene.objects() {
        if obj.name.is_empty() {
            let _ = writeln!(out, "object begin");
        } else {
            let _ = writeln!(out, "object begin {}", obj.name);
        }
        for vert in &obj.vertices {
            let _ = writeln!(out, "v {}", v(*vert));
        }
        for f in &obj.faces {
            let _ = writeln!(out, "f {} {} {}", f[0], f[1], f[2]);
        }
        let m = obj.material;
        let _ = writeln!(
            out,
            "material {} {} {} {}",
            c(m.diffuse),
            c(m.specular),
            m.shininess,
            m.reflectivity
        );
        let _ = writeln!(out, "object end");
    }
    out
}
