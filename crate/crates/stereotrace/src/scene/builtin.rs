//! Built-in solids (cube, icosahedron, triangulated dodecahedron) and the
//! fixed experiment scenes used by the benchmark harness.
//!
//! Geometry is generated from golden-ratio coordinate tables, not from
//! trigonometry, so every vertex is a fixed arithmetic expression and the
//! meshes are bit-identical run to run.

use crate::math::{Color, Vec3};
use crate::scene::{Camera, Material, PointLight, Scene, SceneError, TriangleMesh};

const PHI: f64 = 1.618033988749894848204586834365638118;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BuiltinKind {
    Cube,
    Icosahedron,
    /// Regular dodecahedron with each pentagon fanned into 3 triangles:
    /// 20 vertices, 36 faces.
    Dodeca36,
}

impl BuiltinKind {
    pub const ALL: [BuiltinKind; 3] = [
        BuiltinKind::Cube,
        BuiltinKind::Icosahedron,
        BuiltinKind::Dodeca36,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BuiltinKind::Cube => "cube",
            BuiltinKind::Icosahedron => "icosahedron",
            BuiltinKind::Dodeca36 => "dodeca36",
        }
    }

    /// The material each kind gets in the experiment scenes.
    pub fn default_material(self) -> Material {
        match self {
            BuiltinKind::Cube => Material::new(
                Color::new(0.80, 0.30, 0.25),
                Color::gray(0.45),
                32.0,
                0.10,
            ),
            BuiltinKind::Icosahedron => Material::new(
                Color::new(0.25, 0.70, 0.35),
                Color::gray(0.45),
                48.0,
                0.15,
            ),
            BuiltinKind::Dodeca36 => Material::new(
                Color::new(0.30, 0.40, 0.85),
                Color::gray(0.50),
                64.0,
                0.25,
            ),
        }
    }
}

impl std::str::FromStr for BuiltinKind {
    type Err = String;

    fn from_str(s: &str) -> Result<BuiltinKind, String> {
        match s {
            "cube" => Ok(BuiltinKind::Cube),
            "icosahedron" => Ok(BuiltinKind::Icosahedron),
            "dodeca36" => Ok(BuiltinKind::Dodeca36),
            other => Err(format!(
                "unknown builtin kind '{other}' (expected cube, icosahedron, or dodeca36)"
            )),
        }
    }
}

impl std::fmt::Display for BuiltinKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One built-in solid centered at `center`. For the cube, `scale` is the edge
/// length; for the round solids it is the circumsphere diameter. All faces
/// wind counter-clockwise seen from outside.
pub fn builtin_object(kind: BuiltinKind, center: Vec3, scale: f64, material: Material) -> TriangleMesh {
    assert!(scale > 0.0 && scale.is_finite(), "scale must be positive");
    let (vertices, faces) = match kind {
        BuiltinKind::Cube => cube_geometry(center, scale),
        BuiltinKind::Icosahedron => icosahedron_geometry(center, scale),
        BuiltinKind::Dodeca36 => dodeca36_geometry(center, scale),
    };
    TriangleMesh {
        name: kind.as_str().to_string(),
        vertices,
        faces,
        material,
    }
}

fn cube_geometry(center: Vec3, scale: f64) -> (Vec<Vec3>, Vec<[u32; 3]>) {
    let h = 0.5 * scale;
    let corner = |x: f64, y: f64, z: f64| center + Vec3::new(x * h, y * h, z * h);
    let vertices = vec![
        corner(-1.0, -1.0, -1.0),
        corner(1.0, -1.0, -1.0),
        corner(1.0, 1.0, -1.0),
        corner(-1.0, 1.0, -1.0),
        corner(-1.0, -1.0, 1.0),
        corner(1.0, -1.0, 1.0),
        corner(1.0, 1.0, 1.0),
        corner(-1.0, 1.0, 1.0),
    ];
    // Two triangles per face, wound outward.
    let faces = vec![
        [4, 5, 6],
        [4, 6, 7], // +z
        [1, 0, 3],
        [1, 3, 2], // -z
        [5, 1, 2],
        [5, 2, 6], // +x
        [0, 4, 7],
        [0, 7, 3], // -x
        [7, 6, 2],
        [7, 2, 3], // +y
        [0, 1, 5],
        [0, 5, 4], // -y
    ];
    (vertices, faces)
}

fn icosahedron_geometry(center: Vec3, scale: f64) -> (Vec<Vec3>, Vec<[u32; 3]>) {
    let mut raw = Vec::with_capacity(12);
    for &sy in &[1.0f64, -1.0] {
        for &sz in &[1.0f64, -1.0] {
            raw.push(Vec3::new(0.0, sy, sz * PHI));
        }
    }
    for &sx in &[1.0f64, -1.0] {
        for &sy in &[1.0f64, -1.0] {
            raw.push(Vec3::new(sx, sy * PHI, 0.0));
        }
    }
    for &sx in &[1.0f64, -1.0] {
        for &sz in &[1.0f64, -1.0] {
            raw.push(Vec3::new(sx * PHI, 0.0, sz));
        }
    }
    debug_assert_eq!(raw.len(), 12);

    // Faces are exactly the triangles of mutually adjacent vertices. Edge
    // length is 2 in raw coordinates; the next-nearest distance is > 3.
    let adjacent = |a: Vec3, b: Vec3| (a - b).length_squared() < 6.0;
    let mut faces = Vec::with_capacity(20);
    for i in 0..raw.len() {
        for j in i + 1..raw.len() {
            if !adjacent(raw[i], raw[j]) {
                continue;
            }
            for k in j + 1..raw.len() {
                if adjacent(raw[i], raw[k]) && adjacent(raw[j], raw[k]) {
                    faces.push(orient_outward(&raw, [i as u32, j as u32, k as u32]));
                }
            }
        }
    }
    assert_eq!(faces.len(), 20, "icosahedron face enumeration");
    canonicalize_faces(&mut faces);
    (place(&raw, center, scale), faces)
}

fn dodeca36_geometry(center: Vec3, scale: f64) -> (Vec<Vec3>, Vec<[u32; 3]>) {
    let inv = 1.0 / PHI;
    let mut raw = Vec::with_capacity(20);
    for &sx in &[1.0f64, -1.0] {
        for &sy in &[1.0f64, -1.0] {
            for &sz in &[1.0f64, -1.0] {
                raw.push(Vec3::new(sx, sy, sz));
            }
        }
    }
    for &sy in &[1.0f64, -1.0] {
        for &sz in &[1.0f64, -1.0] {
            raw.push(Vec3::new(0.0, sy * inv, sz * PHI));
        }
    }
    for &sx in &[1.0f64, -1.0] {
        for &sy in &[1.0f64, -1.0] {
            raw.push(Vec3::new(sx * inv, sy * PHI, 0.0));
        }
    }
    for &sx in &[1.0f64, -1.0] {
        for &sz in &[1.0f64, -1.0] {
            raw.push(Vec3::new(sx * PHI, 0.0, sz * inv));
        }
    }
    debug_assert_eq!(raw.len(), 20);

    // The 12 pentagonal faces point along these axes; each face consists of
    // the 5 vertices closest in angle to its axis (the dot-product gap to the
    // 6th-best vertex is ~2.0, so the selection is unambiguous).
    let mut face_axes = Vec::with_capacity(12);
    for &sa in &[1.0f64, -1.0] {
        for &sb in &[1.0f64, -1.0] {
            face_axes.push(Vec3::new(0.0, sa * PHI, sb));
            face_axes.push(Vec3::new(sa, 0.0, sb * PHI));
            face_axes.push(Vec3::new(sa * PHI, sb, 0.0));
        }
    }

    let mut faces = Vec::with_capacity(36);
    for axis in face_axes {
        let mut ranked: Vec<usize> = (0..raw.len()).collect();
        ranked.sort_by(|&a, &b| {
            raw[b]
                .dot(axis)
                .total_cmp(&raw[a].dot(axis))
                .then(a.cmp(&b))
        });
        debug_assert!(raw[ranked[4]].dot(axis) - raw[ranked[5]].dot(axis) > 1.0);
        let cycle = pentagon_cycle(&raw, &ranked[..5]);
        let c = cycle.iter().map(|&i| raw[i]).fold(Vec3::ZERO, |a, b| a + b) * (1.0 / 5.0);
        let n = (raw[cycle[1]] - raw[cycle[0]]).cross(raw[cycle[2]] - raw[cycle[0]]);
        let ordered: Vec<usize> = if n.dot(c) >= 0.0 {
            cycle
        } else {
            cycle.into_iter().rev().collect()
        };
        for m in 1..4 {
            faces.push([ordered[0] as u32, ordered[m] as u32, ordered[m + 1] as u32]);
        }
    }
    assert_eq!(faces.len(), 36, "dodecahedron face enumeration");
    canonicalize_faces(&mut faces);
    (place(&raw, center, scale), faces)
}

/// Order 5 coplanar vertices into a perimeter cycle by walking to the nearest
/// unvisited vertex. In a regular pentagon the nearest unvisited vertex is
/// always a perimeter neighbor, so the walk never jumps a diagonal.
fn pentagon_cycle(raw: &[Vec3], members: &[usize]) -> Vec<usize> {
    let start = *members.iter().min().unwrap();
    let mut cycle = vec![start];
    while cycle.len() < members.len() {
        let cur = raw[*cycle.last().unwrap()];
        let next = members
            .iter()
            .copied()
            .filter(|i| !cycle.contains(i))
            .min_by(|&a, &b| {
                (raw[a] - cur)
                    .length_squared()
                    .total_cmp(&(raw[b] - cur).length_squared())
                    .then(a.cmp(&b))
            })
            .unwrap();
        cycle.push(next);
    }
    cycle
}

/// Flip a face of an origin-centered convex solid so its normal points away
/// from the origin.
fn orient_outward(raw: &[Vec3], [a, b, c]: [u32; 3]) -> [u32; 3] {
    let (va, vb, vc) = (raw[a as usize], raw[b as usize], raw[c as usize]);
    let n = (vb - va).cross(vc - va);
    let centroid = (va + vb + vc) * (1.0 / 3.0);
    if n.dot(centroid) >= 0.0 {
        [a, b, c]
    } else {
        [a, c, b]
    }
}

/// Rotate each face so its smallest index leads (cyclic, so winding is kept),
/// then sort the face list. Makes generated meshes order-independent of the
/// enumeration above.
fn canonicalize_faces(faces: &mut [[u32; 3]]) {
    for f in faces.iter_mut() {
        let lead = (0..3).min_by_key(|&i| f[i]).unwrap();
        *f = [f[lead], f[(lead + 1) % 3], f[(lead + 2) % 3]];
    }
    faces.sort_unstable();
}

/// Project raw coordinates onto the unit sphere, then scale to a circumsphere
/// of diameter `scale` around `center`.
fn place(raw: &[Vec3], center: Vec3, scale: f64) -> Vec<Vec3> {
    raw.iter()
        .map(|v| center + v.normalized() * (0.5 * scale))
        .collect()
}

/// Fixed benchmark scenes of 1, 2, 3, 5, or 6 disjoint solids and one point
/// light, all viewed from the default camera. Layouts and materials are fixed
/// constants so renders are reproducible.
pub fn experiment_scene(object_count: u32) -> Result<Scene, SceneError> {
    let solid = |kind: BuiltinKind, center: Vec3, scale: f64| {
        builtin_object(kind, center, scale, kind.default_material())
    };
    use BuiltinKind::{Cube, Dodeca36, Icosahedron};

    let objects = match object_count {
        1 => vec![solid(Cube, Vec3::ZERO, 4.0)],
        2 => vec![
            solid(Cube, Vec3::new(-2.5, 0.0, 0.0), 3.0),
            solid(Cube, Vec3::new(2.5, 0.0, 0.0), 3.0),
        ],
        3 => vec![
            solid(Cube, Vec3::new(-3.0, 0.0, 0.0), 2.8),
            solid(Icosahedron, Vec3::new(3.0, 0.0, 0.0), 2.8),
            solid(Dodeca36, Vec3::new(0.0, 2.8, -1.5), 2.8),
        ],
        5 => vec![
            solid(Cube, Vec3::new(-3.2, 2.3, 0.0), 2.2),
            solid(Cube, Vec3::new(3.2, 2.3, 0.0), 2.2),
            solid(Icosahedron, Vec3::new(-3.2, -2.3, 0.0), 2.2),
            solid(Icosahedron, Vec3::new(3.2, -2.3, 0.0), 2.2),
            solid(Dodeca36, Vec3::ZERO, 2.6),
        ],
        6 => {
            // Hexagonal ring, alternating kinds.
            let ring = [
                (Cube, 3.4, 0.0),
                (Icosahedron, 1.7, 2.95),
                (Dodeca36, -1.7, 2.95),
                (Cube, -3.4, 0.0),
                (Icosahedron, -1.7, -2.95),
                (Dodeca36, 1.7, -2.95),
            ];
            ring.iter()
                .map(|&(kind, x, y)| solid(kind, Vec3::new(x, y, 0.0), 2.2))
                .collect()
        }
        n => return Err(SceneError::UnsupportedCount(n)),
    };

    Scene::new(
        objects,
        vec![PointLight {
            position: Vec3::new(7.0, 9.0, 12.0),
            intensity: Color::gray(1.0),
        }],
        Color::gray(0.12),
        Color::new(0.06, 0.07, 0.10),
        Camera::default_view(),
        0.065,
    )
}
