//! Minimal TrueType writer for the repo's synthetic CJK fallback font.
//!
//! Real CJK fonts run to tens of megabytes, which is too heavy for a test
//! fixture. Instead we ship a tiny font that maps every covered code point
//! onto one of 64 box-pattern glyphs (glyph id = 1 + cp % 64). Glyphs are
//! full-width and visually distinct, which is all the renderer needs; the
//! pipeline never claims the pixels are real hanzi.
//!
//! The output is byte-for-byte reproducible: no timestamps, no randomness.

const UNITS_PER_EM: u16 = 1000;
const ASCENT: i16 = 800;
const DESCENT: i16 = -200;
const ADVANCE: u16 = 1000;

/// Covered code point ranges (inclusive). U+3000 ideographic space is left
/// out: the tokenizer treats it as whitespace, so it is never rendered.
const COVERAGE: &[(u32, u32)] = &[
    (0x3001, 0x303F), // CJK symbols and punctuation
    (0x3041, 0x30FF), // hiragana + katakana
    (0x3400, 0x4DBF), // CJK unified ideographs extension A
    (0x4E00, 0x9FFF), // CJK unified ideographs
    (0xFF01, 0xFF60), // fullwidth forms
];
const REPLACEMENT: u32 = 0xFFFD;

const SHAPE_COUNT: u16 = 64;
const REPLACEMENT_GID: u16 = SHAPE_COUNT + 1;
const NUM_GLYPHS: u16 = SHAPE_COUNT + 2; // .notdef + shapes + U+FFFD

/// Axis-aligned rectangle in font units: (x0, y0, x1, y1).
type Rect = (i16, i16, i16, i16);

fn frame(x0: i16, y0: i16, x1: i16, y1: i16, stroke: i16) -> Vec<Rect> {
    vec![
        (x0, y0, x0 + stroke, y1),
        (x1 - stroke, y0, x1, y1),
        (x0, y1 - stroke, x1, y1),
        (x0, y0, x1, y0 + stroke),
    ]
}

/// Interior bars selectable by the six low bits of the shape index.
const BARS: [Rect; 6] = [
    (130, 265, 870, 335),
    (465, -70, 535, 670),
    (130, 480, 870, 550),
    (270, -70, 340, 670),
    (130, 20, 870, 90),
    (420, 220, 580, 380),
];

fn shape_glyph(index: u16) -> Vec<Rect> {
    let mut rects = frame(60, -140, 940, 740, 70);
    for (bit, bar) in BARS.iter().enumerate() {
        if index & (1 << bit) != 0 {
            rects.push(*bar);
        }
    }
    rects
}

fn glyph_outlines() -> Vec<Vec<Rect>> {
    let mut glyphs = Vec::with_capacity(NUM_GLYPHS as usize);
    glyphs.push(frame(100, -100, 900, 700, 40)); // .notdef
    for i in 0..SHAPE_COUNT {
        glyphs.push(shape_glyph(i));
    }
    glyphs.push(vec![(60, -140, 940, 740)]); // U+FFFD: solid block
    glyphs
}

struct Writer(Vec<u8>);

impl Writer {
    fn new() -> Self {
        Writer(Vec::new())
    }
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u16(&mut self, v: u16) {
        self.0.extend_from_slice(&v.to_be_bytes());
    }
    fn i16(&mut self, v: i16) {
        self.0.extend_from_slice(&v.to_be_bytes());
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_be_bytes());
    }
    fn i64(&mut self, v: i64) {
        self.0.extend_from_slice(&v.to_be_bytes());
    }
    fn bytes(&mut self, v: &[u8]) {
        self.0.extend_from_slice(v);
    }
    fn finish(self) -> Vec<u8> {
        self.0
    }
}

fn encode_glyph(rects: &[Rect]) -> Vec<u8> {
    let mut w = Writer::new();
    let (mut xmin, mut ymin, mut xmax, mut ymax) = (i16::MAX, i16::MAX, i16::MIN, i16::MIN);
    for &(x0, y0, x1, y1) in rects {
        xmin = xmin.min(x0);
        ymin = ymin.min(y0);
        xmax = xmax.max(x1);
        ymax = ymax.max(y1);
    }
    w.i16(rects.len() as i16);
    w.i16(xmin);
    w.i16(ymin);
    w.i16(xmax);
    w.i16(ymax);
    let mut end = 0u16;
    for _ in rects {
        end += 4;
        w.u16(end - 1);
    }
    w.u16(0); // no instructions

    // Every point on-curve, every coordinate a 16-bit delta.
    let points: Vec<(i16, i16)> = rects
        .iter()
        .flat_map(|&(x0, y0, x1, y1)| [(x0, y0), (x1, y0), (x1, y1), (x0, y1)])
        .collect();
    for _ in &points {
        w.u8(0x01);
    }
    let (mut px, mut py) = (0i16, 0i16);
    for &(x, _) in &points {
        w.i16(x - px);
        px = x;
    }
    for &(_, y) in &points {
        w.i16(y - py);
        py = y;
    }
    let mut data = w.finish();
    while data.len() % 4 != 0 {
        data.push(0);
    }
    data
}

/// cmap format 4 segments. Each segment must stay inside one aligned
/// 64-code-point block so that `glyph = 1 + cp % 64` is expressible as the
/// linear `cp + idDelta` mapping the format supports.
fn cmap_segments() -> Vec<(u16, u16, u16)> {
    let mut segs = Vec::new();
    for &(lo, hi) in COVERAGE {
        let mut cp = lo;
        while cp <= hi {
            let end = (cp | 63).min(hi);
            let block = cp & !63;
            let delta = (1i32 - block as i32).rem_euclid(65536) as u16;
            segs.push((cp as u16, end as u16, delta));
            cp = end + 1;
        }
    }
    let fffd_delta = (REPLACEMENT_GID as i32 - REPLACEMENT as i32).rem_euclid(65536) as u16;
    segs.push((REPLACEMENT as u16, REPLACEMENT as u16, fffd_delta));
    segs.push((0xFFFF, 0xFFFF, 1));
    segs
}

fn build_cmap() -> Vec<u8> {
    let segs = cmap_segments();
    let n = segs.len() as u16;
    let mut sub = Writer::new();
    sub.u16(4);
    sub.u16(16 + 8 * n); // subtable length
    sub.u16(0); // language
    sub.u16(n * 2);
    let pow = 1u16 << (15 - n.leading_zeros() as u16);
    sub.u16(pow * 2);
    sub.u16(pow.trailing_zeros() as u16);
    sub.u16(n * 2 - pow * 2);
    for &(_, end, _) in &segs {
        sub.u16(end);
    }
    sub.u16(0); // reservedPad
    for &(start, _, _) in &segs {
        sub.u16(start);
    }
    for &(_, _, delta) in &segs {
        sub.u16(delta);
    }
    for _ in &segs {
        sub.u16(0); // idRangeOffset
    }
    let sub = sub.finish();

    let mut w = Writer::new();
    w.u16(0); // version
    w.u16(1); // one encoding record
    w.u16(3); // Windows
    w.u16(1); // Unicode BMP
    w.u32(12);
    w.bytes(&sub);
    w.finish()
}

fn build_head(bbox: (i16, i16, i16, i16)) -> Vec<u8> {
    let mut w = Writer::new();
    w.u16(1);
    w.u16(0);
    w.u32(0x0001_0000); // fontRevision
    w.u32(0); // checkSumAdjustment, patched later
    w.u32(0x5F0F_3CF5);
    w.u16(0x0003);
    w.u16(UNITS_PER_EM);
    w.i64(0); // created: fixed for reproducibility
    w.i64(0); // modified
    w.i16(bbox.0);
    w.i16(bbox.1);
    w.i16(bbox.2);
    w.i16(bbox.3);
    w.u16(0); // macStyle
    w.u16(8); // lowestRecPPEM
    w.i16(2); // fontDirectionHint
    w.i16(1); // indexToLocFormat: long
    w.i16(0);
    w.finish()
}

fn build_hhea(bbox: (i16, i16, i16, i16)) -> Vec<u8> {
    let mut w = Writer::new();
    w.u32(0x0001_0000);
    w.i16(ASCENT);
    w.i16(DESCENT);
    w.i16(0); // lineGap
    w.u16(ADVANCE);
    w.i16(bbox.0);
    w.i16(0);
    w.i16(bbox.2);
    w.i16(1);
    w.i16(0);
    w.i16(0);
    for _ in 0..4 {
        w.i16(0);
    }
    w.i16(0);
    w.u16(NUM_GLYPHS);
    w.finish()
}

fn build_maxp(max_points: u16, max_contours: u16) -> Vec<u8> {
    let mut w = Writer::new();
    w.u32(0x0001_0000);
    w.u16(NUM_GLYPHS);
    w.u16(max_points);
    w.u16(max_contours);
    for _ in 0..4 {
        w.u16(0);
    }
    w.u16(2); // maxZones
    for _ in 0..7 {
        w.u16(0);
    }
    w.finish()
}

fn build_os2() -> Vec<u8> {
    let mut w = Writer::new();
    w.u16(4);
    w.i16(ADVANCE as i16);
    w.u16(400);
    w.u16(5);
    w.u16(0);
    for v in [650i16, 600, 0, 75, 650, 600, 0, 350, 50, 300] {
        w.i16(v);
    }
    w.i16(0); // sFamilyClass
    w.bytes(&[0u8; 10]); // panose
    for _ in 0..4 {
        w.u32(0); // ulUnicodeRange
    }
    w.bytes(b"BXHN");
    w.u16(0x0040); // fsSelection: REGULAR
    w.u16(0x3001);
    w.u16(0xFFFD);
    w.i16(ASCENT);
    w.i16(DESCENT);
    w.i16(0);
    w.u16(ASCENT as u16);
    w.u16((-DESCENT) as u16);
    w.u32(0);
    w.u32(0);
    w.i16(500);
    w.i16(700);
    w.u16(0);
    w.u16(0);
    w.u16(1);
    w.finish()
}

fn build_name() -> Vec<u8> {
    let entries: [(u16, &str); 5] = [
        (0, "Synthetic box-glyph CJK fallback font; public domain"),
        (1, "BoxHan"),
        (2, "Regular"),
        (4, "BoxHan Regular"),
        (6, "BoxHan-Regular"),
    ];
    let mut strings = Vec::new();
    let mut records = Vec::new();
    for (id, text) in entries {
        let start = strings.len() as u16;
        for unit in text.encode_utf16() {
            strings.extend_from_slice(&unit.to_be_bytes());
        }
        records.push((id, start, strings.len() as u16 - start));
    }
    let mut w = Writer::new();
    w.u16(0);
    w.u16(records.len() as u16);
    w.u16(6 + 12 * records.len() as u16);
    for (id, offset, len) in records {
        w.u16(3);
        w.u16(1);
        w.u16(0x0409);
        w.u16(id);
        w.u16(len);
        w.u16(offset);
    }
    w.bytes(&strings);
    w.finish()
}

fn build_post() -> Vec<u8> {
    let mut w = Writer::new();
    w.u32(0x0003_0000);
    w.u32(0); // italicAngle
    w.i16(-100);
    w.i16(50);
    w.u32(1); // isFixedPitch
    for _ in 0..4 {
        w.u32(0);
    }
    w.finish()
}

fn table_checksum(data: &[u8]) -> u32 {
    let mut sum = 0u32;
    for chunk in data.chunks(4) {
        let mut word = [0u8; 4];
        word[..chunk.len()].copy_from_slice(chunk);
        sum = sum.wrapping_add(u32::from_be_bytes(word));
    }
    sum
}

pub fn build_font() -> Vec<u8> {
    let outlines = glyph_outlines();

    let mut glyf = Vec::new();
    let mut loca = Writer::new();
    let mut hmtx = Writer::new();
    let mut max_points = 0u16;
    let mut max_contours = 0u16;
    let mut bbox = (i16::MAX, i16::MAX, i16::MIN, i16::MIN);
    for rects in &outlines {
        loca.u32(glyf.len() as u32);
        glyf.extend_from_slice(&encode_glyph(rects));
        max_points = max_points.max(rects.len() as u16 * 4);
        max_contours = max_contours.max(rects.len() as u16);
        let mut lsb = i16::MAX;
        for &(x0, y0, x1, y1) in rects {
            bbox.0 = bbox.0.min(x0);
            bbox.1 = bbox.1.min(y0);
            bbox.2 = bbox.2.max(x1);
            bbox.3 = bbox.3.max(y1);
            lsb = lsb.min(x0);
        }
        hmtx.u16(ADVANCE);
        hmtx.i16(lsb);
    }
    loca.u32(glyf.len() as u32);

    let tables: Vec<(&[u8; 4], Vec<u8>)> = vec![
        (b"OS/2", build_os2()),
        (b"cmap", build_cmap()),
        (b"glyf", glyf),
        (b"head", build_head(bbox)),
        (b"hhea", build_hhea(bbox)),
        (b"hmtx", hmtx.finish()),
        (b"loca", loca.finish()),
        (b"maxp", build_maxp(max_points, max_contours)),
        (b"name", build_name()),
        (b"post", build_post()),
    ];

    let n = tables.len() as u16;
    let pow = 1u16 << (15 - n.leading_zeros() as u16);
    let mut w = Writer::new();
    w.u32(0x0001_0000);
    w.u16(n);
    w.u16(pow * 16);
    w.u16(pow.trailing_zeros() as u16);
    w.u16(n * 16 - pow * 16);

    let mut offset = 12 + 16 * tables.len() as u32;
    let mut head_offset = 0u32;
    let mut directory = Writer::new();
    let mut body = Vec::new();
    for (tag, data) in &tables {
        directory.bytes(*tag);
        directory.u32(table_checksum(data));
        directory.u32(offset);
        directory.u32(data.len() as u32);
        if *tag == b"head" {
            head_offset = offset;
        }
        body.extend_from_slice(data);
        while body.len() % 4 != 0 {
            body.push(0);
        }
        offset = 12 + 16 * tables.len() as u32 + body.len() as u32;
    }
    w.bytes(&directory.finish());
    w.bytes(&body);

    let mut font = w.finish();
    let total = table_checksum(&font);
    let adjustment = 0xB1B0_AFBAu32.wrapping_sub(total);
    let at = head_offset as usize + 8;
    font[at..at + 4].copy_from_slice(&adjustment.to_be_bytes());
    font
}
