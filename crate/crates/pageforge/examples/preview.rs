use pageforge::compose::{compose_document, Category, ComposeOptions, Corpora};
use pageforge::config::GenerationConfig;
use pageforge::font::FontRegistry;
use std::path::PathBuf;

fn main() {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..");
    let mut cfg = GenerationConfig::default();
    cfg.base_dir = Some(root.clone());
    let reg = FontRegistry::load(&root.join("fixtures/fonts")).unwrap();
    let corp = Corpora::load(&cfg, true).unwrap();
    for (cat, seed) in [
        (Category::PureEnglish, 1u64),
        (Category::PureChinese, 2),
        (Category::WithImage, 3),
        (Category::WithTable, 4),
        (Category::WithChart, 5),
        (Category::WithChart, 6),
        (Category::WithChart, 7),
        (Category::WithChart, 8),
    ] {
        let doc = compose_document(&cfg, &reg, &corp, cat, seed, &ComposeOptions::default()).unwrap();
        let name = format!("/tmp/preview/{}_{}.png", cat.tag(), seed);
        doc.image.save_png(std::path::Path::new(&name)).unwrap();
        println!("{name}\n--- annotation ({} bytes) ---\n{}\n", doc.annotation.len(),
                 doc.annotation.chars().take(200).collect::<String>());
    }
}
