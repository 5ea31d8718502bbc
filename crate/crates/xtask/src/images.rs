//! Procedural sample images for the natural-image corpus fixture.
//!
//! Ten small landscape-ish PNGs, seven with a category label in the sidecar
//! file and three without so the placeholder path stays exercised.

use image::{Rgb, RgbImage};
use std::fs;
use std::io::Write;
use std::path::Path;

const WIDTH: u32 = 160;
const HEIGHT: u32 = 120;

const LABELS: [Option<&str>; 10] = [
    Some("sunset"),
    Some("mountains"),
    Some("ocean"),
    Some("forest"),
    Some("city skyline"),
    Some("river"),
    Some("meadow"),
    None,
    None,
    None,
];

struct XorShift(u64);

impl XorShift {
    fn next(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x
    }
    fn unit(&mut self) -> f64 {
        (self.next() >> 11) as f64 / (1u64 << 53) as f64
    }
    fn range(&mut self, lo: u32, hi: u32) -> u32 {
        lo + (self.next() % (hi - lo) as u64) as u32
    }
}

fn lerp(a: u8, b: u8, t: f64) -> u8 {
    (a as f64 + (b as f64 - a as f64) * t).round() as u8
}

fn render_scene(seed: u64) -> RgbImage {
    let mut rng = XorShift(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1);
    let sky_top = [
        rng.range(40, 140) as u8,
        rng.range(80, 180) as u8,
        rng.range(140, 240) as u8,
    ];
    let sky_bottom = [
        rng.range(160, 250) as u8,
        rng.range(120, 220) as u8,
        rng.range(90, 200) as u8,
    ];
    let ground = [
        rng.range(40, 120) as u8,
        rng.range(90, 170) as u8,
        rng.range(30, 110) as u8,
    ];
    let horizon = rng.range(HEIGHT / 3, 2 * HEIGHT / 3);

    let mut img = RgbImage::new(WIDTH, HEIGHT);
    for y in 0..HEIGHT {
        for x in 0..WIDTH {
            let px = if y < horizon {
                let t = y as f64 / horizon as f64;
                [
                    lerp(sky_top[0], sky_bottom[0], t),
                    lerp(sky_top[1], sky_bottom[1], t),
                    lerp(sky_top[2], sky_bottom[2], t),
                ]
            } else {
                let shade = 1.0 - 0.3 * ((y - horizon) as f64 / (HEIGHT - horizon) as f64);
                [
                    (ground[0] as f64 * shade) as u8,
                    (ground[1] as f64 * shade) as u8,
                    (ground[2] as f64 * shade) as u8,
                ]
            };
            img.put_pixel(x, y, Rgb(px));
        }
    }

    // Sun or moon.
    let cx = rng.range(20, WIDTH - 20) as i32;
    let cy = rng.range(10, horizon.max(11) - 5) as i32;
    let r = rng.range(6, 14) as i32;
    let disc = [
        rng.range(220, 255) as u8,
        rng.range(180, 250) as u8,
        rng.range(120, 230) as u8,
    ];
    for y in (cy - r).max(0)..(cy + r).min(HEIGHT as i32) {
        for x in (cx - r).max(0)..(cx + r).min(WIDTH as i32) {
            if (x - cx).pow(2) + (y - cy).pow(2) <= r * r {
                img.put_pixel(x as u32, y as u32, Rgb(disc));
            }
        }
    }

    // Foreground blocks: buildings, trees, rocks -- all rectangles squint hard enough.
    for _ in 0..rng.range(3, 9) {
        let w = rng.range(8, 30);
        let h = rng.range(10, 40);
        let x0 = rng.range(0, WIDTH - w);
        let y0 = horizon.saturating_sub(rng.range(0, h / 2)).min(HEIGHT - h);
        let col = [
            rng.range(20, 120) as u8,
            rng.range(20, 120) as u8,
            rng.range(20, 120) as u8,
        ];
        for y in y0..(y0 + h).min(HEIGHT) {
            for x in x0..x0 + w {
                img.put_pixel(x, y, Rgb(col));
            }
        }
    }

    // Light speckle so no two rows compress identically.
    for _ in 0..400 {
        let x = rng.range(0, WIDTH);
        let y = rng.range(0, HEIGHT);
        let p = img.get_pixel(x, y).0;
        let d = (rng.unit() * 24.0 - 12.0) as i16;
        img.put_pixel(
            x,
            y,
            Rgb([
                (p[0] as i16 + d).clamp(0, 255) as u8,
                (p[1] as i16 + d).clamp(0, 255) as u8,
                (p[2] as i16 + d).clamp(0, 255) as u8,
            ]),
        );
    }
    img
}

pub fn generate(dir: &Path) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    let mut labels = fs::File::create(dir.join("labels.jsonl"))?;
    for (i, label) in LABELS.iter().enumerate() {
        let name = format!("nature_{i:02}.png");
        let img = render_scene(i as u64 + 1);
        img.save(dir.join(&name))
            .map_err(|e| std::io::Error::other(e.to_string()))?;
        if let Some(category) = label {
            let record = serde_json::json!({ "file": name, "category": category });
            writeln!(labels, "{record}")?;
        }
    }
    Ok(())
}
