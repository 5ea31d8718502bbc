//! Repo maintenance tasks: regenerate the committed fixtures.

mod images;
mod ttf;

use std::path::PathBuf;

fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .ancestors()
        .nth(2)
        .expect("workspace root")
        .to_path_buf()
}

fn main() {
    let task = std::env::args().nth(1).unwrap_or_default();
    let root = repo_root();
    match task.as_str() {
        "gen-fonts" => gen_fonts(&root),
        "gen-images" => gen_images(&root),
        "gen-fixtures" => {
            gen_fonts(&root);
            gen_images(&root);
        }
        _ => {
            eprintln!("usage: cargo run -p xtask -- <gen-fonts|gen-images|gen-fixtures>");
            std::process::exit(2);
        }
    }
}

fn gen_fonts(root: &std::path::Path) {
    let dir = root.join("fixtures/fonts");
    std::fs::create_dir_all(&dir).expect("create font dir");
    let font = ttf::build_font();
    let path = dir.join("BoxHan-Regular.ttf");
    std::fs::write(&path, &font).expect("write font");
    println!("wrote {} ({} bytes)", path.display(), font.len());
}

fn gen_images(root: &std::path::Path) {
    let dir = root.join("fixtures/images");
    images::generate(&dir).expect("generate sample images");
    println!("wrote sample images to {}", dir.display());
}
