//! Software raster canvas and the drawing primitives the table and chart
//! renderers lower to. No anti-aliasing except glyph coverage masks, which
//! keeps output deterministic on a platform.

use image::RgbImage;
use std::path::Path;

pub type Rgb = [u8; 3];

/// Rectangle in page pixels. Origin is the top-left corner, y grows down.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bbox {
    pub x: i32,
    pub y: i32,
    pub w: u32,
    pub h: u32,
}

impl Bbox {
    pub fn new(x: i32, y: i32, w: u32, h: u32) -> Self {
        Bbox { x, y, w, h }
    }

    pub fn right(&self) -> i32 {
        self.x + self.w as i32
    }

    pub fn bottom(&self) -> i32 {
        self.y + self.h as i32
    }

    pub fn contains(&self, other: &Bbox) -> bool {
        other.x >= self.x
            && other.y >= self.y
            && other.right() <= self.right()
            && other.bottom() <= self.bottom()
    }

    /// Area of the intersection, in square pixels.
    pub fn intersection_area(&self, other: &Bbox) -> u64 {
        let x0 = self.x.max(other.x);
        let y0 = self.y.max(other.y);
        let x1 = self.right().min(other.right());
        let y1 = self.bottom().min(other.bottom());
        if x1 <= x0 || y1 <= y0 {
            0
        } else {
            (x1 - x0) as u64 * (y1 - y0) as u64
        }
    }
}

/// Grayscale coverage mask produced by glyph rasterization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlphaMask {
    pub width: u32,
    pub height: u32,
    pub data: Vec<u8>,
}

impl AlphaMask {
    pub fn new(width: u32, height: u32) -> Self {
        AlphaMask {
            width,
            height,
            data: vec![0; (width * height) as usize],
        }
    }

    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.data[(y * self.width + x) as usize]
    }

    pub fn add(&mut self, x: u32, y: u32, coverage: u8) {
        let px = &mut self.data[(y * self.width + x) as usize];
        *px = px.saturating_add(coverage);
    }

    /// Number of pixels with any coverage.
    pub fn ink(&self) -> usize {
        self.data.iter().filter(|&&v| v > 0).count()
    }
}

/// RGB8 page canvas.
#[derive(Clone)]
pub struct Canvas {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl std::fmt::Debug for Canvas {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Canvas")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("pixel_hash", &self.pixel_hash())
            .finish()
    }
}

impl Canvas {
    pub fn new(width: u32, height: u32, background: Rgb) -> Self {
        let mut data = Vec::with_capacity((width * height * 3) as usize);
        for _ in 0..width * height {
            data.extend_from_slice(&background);
        }
        Canvas {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn get(&self, x: u32, y: u32) -> Rgb {
        let i = ((y * self.width + x) * 3) as usize;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn set(&mut self, x: i32, y: i32, color: Rgb) {
        if x < 0 || y < 0 || x >= self.width as i32 || y >= self.height as i32 {
            return;
        }
        let i = ((y as u32 * self.width + x as u32) * 3) as usize;
        self.data[i..i + 3].copy_from_slice(&color);
    }

    pub fn blend(&mut self, x: i32, y: i32, color: Rgb, alpha: u8) {
        if alpha == 0 || x < 0 || y < 0 || x >= self.width as i32 || y >= self.height as i32 {
            return;
        }
        let i = ((y as u32 * self.width + x as u32) * 3) as usize;
        let a = alpha as u32;
        for c in 0..3 {
            let dst = self.data[i + c] as u32;
            let src = color[c] as u32;
            self.data[i + c] = ((src * a + dst * (255 - a) + 127) / 255) as u8;
        }
    }

    pub fn fill_rect(&mut self, rect: Bbox, color: Rgb) {
        let x0 = rect.x.max(0);
        let y0 = rect.y.max(0);
        let x1 = rect.right().min(self.width as i32);
        let y1 = rect.bottom().min(self.height as i32);
        for y in y0..y1 {
            for x in x0..x1 {
                self.set(x, y, color);
            }
        }
    }

    pub fn stroke_rect(&mut self, rect: Bbox, thickness: u32, color: Rgb) {
        let t = thickness;
        self.fill_rect(Bbox::new(rect.x, rect.y, rect.w, t), color);
        self.fill_rect(Bbox::new(rect.x, rect.bottom() - t as i32, rect.w, t), color);
        self.fill_rect(Bbox::new(rect.x, rect.y, t, rect.h), color);
        self.fill_rect(Bbox::new(rect.right() - t as i32, rect.y, t, rect.h), color);
    }

    pub fn hline(&mut self, x: i32, y: i32, len: u32, thickness: u32, color: Rgb) {
        self.fill_rect(Bbox::new(x, y, len, thickness), color);
    }

    pub fn vline(&mut self, x: i32, y: i32, len: u32, thickness: u32, color: Rgb) {
        self.fill_rect(Bbox::new(x, y, thickness, len), color);
    }

    /// Thick line between two points; each step stamps a small square.
    pub fn line(&mut self, x0: i32, y0: i32, x1: i32, y1: i32, thickness: u32, color: Rgb) {
        let (dx, dy) = ((x1 - x0).abs(), (y1 - y0).abs());
        let steps = dx.max(dy).max(1);
        let half = thickness as i32 / 2;
        for i in 0..=steps {
            let x = x0 + (x1 - x0) * i / steps;
            let y = y0 + (y1 - y0) * i / steps;
            self.fill_rect(
                Bbox::new(x - half, y - half, thickness.max(1), thickness.max(1)),
                color,
            );
        }
    }

    pub fn fill_disc(&mut self, cx: i32, cy: i32, r: i32, color: Rgb) {
        for y in -r..=r {
            for x in -r..=r {
                if x * x + y * y <= r * r {
                    self.set(cx + x, cy + y, color);
                }
            }
        }
    }

    /// Filled circular sector. Angles in degrees, measured clockwise from
    /// 12 o'clock, matching how pie charts are conventionally read.
    pub fn fill_pie_slice(
        &mut self,
        cx: i32,
        cy: i32,
        r: i32,
        start_deg: f64,
        sweep_deg: f64,
        color: Rgb,
    ) {
        if sweep_deg >= 360.0 {
            self.fill_disc(cx, cy, r, color);
            return;
        }
        for y in -r..=r {
            for x in -r..=r {
                if x * x + y * y > r * r {
                    continue;
                }
                // atan2 with x right, y down; rotate so 0 deg points up.
                let angle = (x as f64).atan2(-y as f64).to_degrees();
                let angle = if angle < 0.0 { angle + 360.0 } else { angle };
                let rel = angle - start_deg;
                let rel = if rel < 0.0 { rel + 360.0 } else { rel };
                if rel < sweep_deg {
                    self.set(cx + x, cy + y, color);
                }
            }
        }
    }

    /// Pastes an RGB image with its top-left corner at (x, y).
    pub fn blit_image(&mut self, img: &RgbImage, x: i32, y: i32) {
        for (sx, sy, px) in img.enumerate_pixels() {
            self.set(x + sx as i32, y + sy as i32, px.0);
        }
    }

    /// Alpha-blends a coverage mask in `color`, clipped to `clip` when given.
    pub fn blend_mask(&mut self, mask: &AlphaMask, x: i32, y: i32, color: Rgb, clip: Option<Bbox>) {
        for my in 0..mask.height {
            for mx in 0..mask.width {
                let a = mask.get(mx, my);
                if a == 0 {
                    continue;
                }
                let (dx, dy) = (x + mx as i32, y + my as i32);
                if let Some(c) = clip {
                    if dx < c.x || dy < c.y || dx >= c.right() || dy >= c.bottom() {
                        continue;
                    }
                }
                self.blend(dx, dy, color, a);
            }
        }
    }

    /// Alpha-blends a mask rotated counterclockwise by `degrees` around the
    /// mask's top-left corner placed at (x, y). Nearest-neighbor sampling.
    pub fn blend_mask_rotated(
        &mut self,
        mask: &AlphaMask,
        x: i32,
        y: i32,
        degrees: f64,
        color: Rgb,
        clip: Option<Bbox>,
    ) {
        if degrees == 0.0 {
            self.blend_mask(mask, x, y, color, clip);
            return;
        }
        let rad = degrees.to_radians();
        let (sin, cos) = (rad.sin(), rad.cos());
        let (w, h) = (mask.width as f64, mask.height as f64);
        // Destination bounding box of the rotated mask (y-down: ccw visual
        // rotation maps (mx,my) -> (mx*cos + my*sin, -mx*sin + my*cos)).
        let corners = [
            (0.0, 0.0),
            (w * cos, -w * sin),
            (h * sin, h * cos),
            (w * cos + h * sin, -w * sin + h * cos),
        ];
        let min_x = corners.iter().map(|c| c.0).fold(f64::MAX, f64::min);
        let max_x = corners.iter().map(|c| c.0).fold(f64::MIN, f64::max);
        let min_y = corners.iter().map(|c| c.1).fold(f64::MAX, f64::min);
        let max_y = corners.iter().map(|c| c.1).fold(f64::MIN, f64::max);
        for dy in min_y.floor() as i32..=max_y.ceil() as i32 {
            for dx in min_x.floor() as i32..=max_x.ceil() as i32 {
                // Inverse rotation back into mask space.
                let sx = dx as f64 * cos - dy as f64 * sin;
                let sy = dx as f64 * sin + dy as f64 * cos;
                if sx < 0.0 || sy < 0.0 || sx >= w || sy >= h {
                    continue;
                }
                let a = mask.get(sx as u32, sy as u32);
                if a == 0 {
                    continue;
                }
                let (px, py) = (x + dx, y + dy);
                if let Some(c) = clip {
                    if px < c.x || py < c.y || px >= c.right() || py >= c.bottom() {
                        continue;
                    }
                }
                self.blend(px, py, color, a);
            }
        }
    }

    /// Copies a patch canvas onto this one.
    pub fn blit_canvas(&mut self, patch: &Canvas, x: i32, y: i32) {
        for sy in 0..patch.height {
            for sx in 0..patch.width {
                self.set(x + sx as i32, y + sy as i32, patch.get(sx, sy));
            }
        }
    }

    /// FNV-1a hash of the raw pixel data; used by determinism checks.
    pub fn pixel_hash(&self) -> u64 {
        let mut h = 0xcbf29ce484222325u64;
        for &b in &self.data {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
        h
    }

    pub fn to_image(&self) -> RgbImage {
        RgbImage::from_raw(self.width, self.height, self.data.clone())
            .expect("canvas dimensions consistent")
    }

    pub fn save_png(&self, path: &Path) -> image::ImageResult<()> {
        self.to_image().save_with_format(path, image::ImageFormat::Png)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bbox_intersection_area() {
        let a = Bbox::new(0, 0, 10, 10);
        let b = Bbox::new(5, 5, 10, 10);
        let c = Bbox::new(10, 0, 5, 5);
        assert_eq!(a.intersection_area(&b), 25);
        assert_eq!(a.intersection_area(&c), 0);
        assert_eq!(a.intersection_area(&a), 100);
    }

    #[test]
    fn fill_and_blend_are_clipped() {
        let mut c = Canvas::new(4, 4, [255, 255, 255]);
        c.fill_rect(Bbox::new(-2, -2, 10, 3), [0, 0, 0]);
        assert_eq!(c.get(0, 0), [0, 0, 0]);
        assert_eq!(c.get(3, 0), [0, 0, 0]);
        assert_eq!(c.get(0, 1), [255, 255, 255]);
        c.blend(2, 2, [0, 0, 0], 255);
        assert_eq!(c.get(2, 2), [0, 0, 0]);
        c.blend(200, 200, [0, 0, 0], 255); // out of bounds: no panic
    }

    #[test]
    fn pie_slice_full_circle_equals_disc() {
        let mut a = Canvas::new(41, 41, [255, 255, 255]);
        let mut b = Canvas::new(41, 41, [255, 255, 255]);
        a.fill_pie_slice(20, 20, 15, 0.0, 360.0, [10, 10, 10]);
        b.fill_disc(20, 20, 15, [10, 10, 10]);
        assert_eq!(a.pixel_hash(), b.pixel_hash());
    }

    #[test]
    fn pie_quadrants_cover_disjoint_pixels() {
        let mut c = Canvas::new(41, 41, [255, 255, 255]);
        c.fill_pie_slice(20, 20, 15, 0.0, 90.0, [255, 0, 0]);
        c.fill_pie_slice(20, 20, 15, 90.0, 90.0, [0, 255, 0]);
        // First quadrant (up-right) red, second (down-right) green.
        assert_eq!(c.get(25, 12), [255, 0, 0]);
        assert_eq!(c.get(25, 28), [0, 255, 0]);
    }

    #[test]
    fn pixel_hash_tracks_content() {
        let a = Canvas::new(8, 8, [255, 255, 255]);
        let mut b = Canvas::new(8, 8, [255, 255, 255]);
        assert_eq!(a.pixel_hash(), b.pixel_hash());
        b.set(1, 1, [0, 0, 0]);
        assert_ne!(a.pixel_hash(), b.pixel_hash());
    }
}
