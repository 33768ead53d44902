//! Serialize a generated scene to the text format, parse it back, and check
//! the round trip is exact (same content revision, same render).
//!
//!     cargo run --example scene_roundtrip

use stereotrace::{experiment_scene, load_scene, parse_scene, serialize_scene};

fn main() {
    let scene = experiment_scene(5).expect("built-in layout");
    let text = serialize_scene(&scene);
    println!(
        "serialized {} objects / {} triangles to {} bytes",
        scene.objects().len(),
        scene.triangle_count(),
        text.len(),
    );
    for line in text.lines().take(6) {
        println!("  {line}");
    }
    println!("  ...");

    let reparsed = parse_scene(&text).expect("own output must parse");
    assert_eq!(scene, reparsed);
    assert_eq!(scene.revision(), reparsed.revision());
    println!("round trip exact (revision {:016x})", scene.revision());

    let path = std::env::temp_dir().join("scene_roundtrip.txt");
    std::fs::write(&path, &text).expect("write scene file");
    let from_disk = load_scene(&path).expect("reload");
    assert_eq!(from_disk.revision(), scene.revision());
    println!("reloaded from {}", path.display());
}
