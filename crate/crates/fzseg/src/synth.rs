//! Procedural test fixtures with exact ground truth.
//!
//! Real dermoscopy corpora cannot ship with the repository, so the
//! end-to-end tests run on generated images instead: a star-shaped dark
//! lesion on textured skin, plus the usual disturbing artifacts (hair
//! strokes, corner vignettes, gel bubbles). Because every artifact is drawn
//! by this module, the lesion mask and the artifact mask are known exactly,
//! with no annotation noise.
//!
//! Everything is deterministic: global shape parameters come from a seeded
//! [`ChaCha8Rng`], per-pixel texture comes from a stateless hash so it is
//! independent of evaluation order.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::features::{feature_names, sample_pixels, ExtractOptions, LabelMap};
use crate::forest::{splitmix64, TrainingSet};
use crate::imaging::{dilate, erode, BinaryMask, Gray8Image, RgbImage, StructuringElement};
use crate::PixelClass;

/// A generated dermoscopy-like image with exact per-pixel annotations.
pub struct DermoscopyFixture {
    pub image: RgbImage,
    /// Ground-truth lesion mask (the geometric blob, unaffected by
    /// artifacts drawn over it).
    pub lesion: BinaryMask,
    /// Every pixel touched by hair, bubbles or the vignette.
    pub artifacts: BinaryMask,
}

/// Uniform in [0, 1) from a stateless hash of (seed, x, y).
fn hash01(seed: u64, x: usize, y: usize) -> f64 {
    let h = splitmix64(seed ^ ((y as u64) << 24 | x as u64));
    (h >> 11) as f64 / (1u64 << 53) as f64
}

/// Symmetric noise in [-1, 1).
fn noise(seed: u64, x: usize, y: usize) -> f64 {
    2.0 * hash01(seed, x, y) - 1.0
}

/// Smooth value noise: hash values on a coarse lattice, blended with a
/// smoothstep. `cell` is the lattice pitch in pixels.
fn value_noise(seed: u64, x: usize, y: usize, cell: usize) -> f64 {
    let (gx, gy) = (x / cell, y / cell);
    let (fx, fy) = (
        (x % cell) as f64 / cell as f64,
        (y % cell) as f64 / cell as f64,
    );
    let s = |t: f64| t * t * (3.0 - 2.0 * t);
    let (sx, sy) = (s(fx), s(fy));
    let corner = |dx: usize, dy: usize| noise(seed, gx + dx, gy + dy);
    let top = corner(0, 0) * (1.0 - sx) + corner(1, 0) * sx;
    let bot = corner(0, 1) * (1.0 - sx) + corner(1, 1) * sx;
    top * (1.0 - sy) + bot * sy
}

fn clamp_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

fn add_noise(base: [f64; 3], n: f64) -> [u8; 3] {
    [
        clamp_u8(base[0] + n),
        clamp_u8(base[1] + n),
        clamp_u8(base[2] + n),
    ]
}

fn lerp3(a: [u8; 3], b: [u8; 3], t: f64) -> [u8; 3] {
    let mut out = [0u8; 3];
    for c in 0..3 {
        out[c] = clamp_u8(a[c] as f64 + (b[c] as f64 - a[c] as f64) * t);
    }
    out
}

/// Paints a filled disk into the image and flags it in the artifact mask.
fn stamp_disk(
    img: &mut RgbImage,
    artifacts: &mut BinaryMask,
    cx: f64,
    cy: f64,
    radius: f64,
    color: [u8; 3],
) {
    let (w, h) = (img.width() as isize, img.height() as isize);
    let r = radius.ceil() as isize;
    let (icx, icy) = (cx.round() as isize, cy.round() as isize);
    for y in (icy - r).max(0)..=(icy + r).min(h - 1) {
        for x in (icx - r).max(0)..=(icx + r).min(w - 1) {
            let (dx, dy) = (x as f64 - cx, y as f64 - cy);
            if dx * dx + dy * dy <= radius * radius {
                img.set_pixel(x as usize, y as usize, color);
                artifacts.set(x as usize, y as usize, true);
            }
        }
    }
}

/// Generates one fixture at the given geometry.
///
/// The lesion is a star-shaped blob (base radius modulated by low-order
/// harmonics) of dark blotchy texture on lighter skin texture, blended over
/// a ±2 px rim. On top of that: 5-8 hair strokes (quadratic Bezier curves,
/// 1-2 px radius), 2-4 bright gel bubbles with a highlight ring, and a dark
/// vignette in every corner. The ground truth is the geometric blob; the
/// artifact mask contains exactly the stamped pixels.
pub fn dermoscopy_fixture(width: usize, height: usize, seed: u64) -> DermoscopyFixture {
    assert!(width >= 64 && height >= 64, "fixture too small to draw on");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let min_dim = width.min(height) as f64;

    // Blob geometry.
    let cx = width as f64 / 2.0 + rng.random_range(-0.05..0.05) * min_dim;
    let cy = height as f64 / 2.0 + rng.random_range(-0.05..0.05) * min_dim;
    let r0 = rng.random_range(0.20..0.27) * min_dim;
    let harmonics: Vec<(f64, f64)> = (2..=5)
        .map(|k| {
            (
                rng.random_range(0.02..0.10) / (k as f64 / 2.0),
                rng.random_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect();
    let radius_at = |theta: f64| {
        let mut r = 1.0;
        for (k, &(a, phase)) in harmonics.iter().enumerate() {
            r += a * ((k as f64 + 2.0) * theta + phase).cos();
        }
        r0 * r
    };

    let skin_base = [202.0, 158.0, 138.0];
    let lesion_base = [96.0, 64.0, 56.0];
    let blotch_seed = splitmix64(seed ^ 0x01);
    let grain_seed = splitmix64(seed ^ 0x02);

    let mut lesion_data = vec![false; width * height];
    let mut image = RgbImage::from_fn(width, height, |x, y| {
        let (dx, dy) = (x as f64 - cx, y as f64 - cy);
        let d = (dx * dx + dy * dy).sqrt() - radius_at(dy.atan2(dx));
        if d <= 0.0 {
            lesion_data[y * width + x] = true;
        }
        let skin = add_noise(
            skin_base,
            8.0 * value_noise(blotch_seed, x, y, 16) + 5.0 * noise(grain_seed, x, y),
        );
        let lesion = add_noise(
            lesion_base,
            14.0 * value_noise(blotch_seed ^ 0xA5, x, y, 8) + 6.0 * noise(grain_seed, x, y),
        );
        // Smoothstep blend over d in [-2, 2]: negative = inside the blob.
        let t = ((d + 2.0) / 4.0).clamp(0.0, 1.0);
        let t = t * t * (3.0 - 2.0 * t);
        lerp3(lesion, skin, t)
    });
    let lesion = BinaryMask::new(width, height, lesion_data).expect("geometry is consistent");
    let mut artifacts = BinaryMask::filled(width, height, false);

    // Corner vignette: darken a disk around each corner.
    let rv = 0.18 * min_dim;
    let corners = [
        (0.0, 0.0),
        (width as f64 - 1.0, 0.0),
        (0.0, height as f64 - 1.0),
        (width as f64 - 1.0, height as f64 - 1.0),
    ];
    for y in 0..height {
        for x in 0..width {
            for &(vx, vy) in &corners {
                let (dx, dy) = (x as f64 - vx, y as f64 - vy);
                if dx * dx + dy * dy <= rv * rv {
                    let px = image.pixel(x, y);
                    image.set_pixel(x, y, lerp3(px, [12, 10, 14], 0.82));
                    artifacts.set(x, y, true);
                    break;
                }
            }
        }
    }

    // Hair: quadratic Bezier strokes crossing the frame.
    let n_hairs = rng.random_range(5..=8);
    for _ in 0..n_hairs {
        let edge_point = |rng: &mut ChaCha8Rng, side: u8| -> (f64, f64) {
            match side {
                0 => (rng.random_range(0.0..width as f64), 0.0),
                1 => (rng.random_range(0.0..width as f64), height as f64 - 1.0),
                2 => (0.0, rng.random_range(0.0..height as f64)),
                _ => (width as f64 - 1.0, rng.random_range(0.0..height as f64)),
            }
        };
        let s0 = rng.random_range(0..4u8);
        // Opposite-ish exit side makes strokes long, like real hair.
        let s1 = (s0 + rng.random_range(1..4u8)) % 4;
        let p0 = edge_point(&mut rng, s0);
        let p2 = edge_point(&mut rng, s1);
        let ctrl = (
            rng.random_range(0.2..0.8) * width as f64,
            rng.random_range(0.2..0.8) * height as f64,
        );
        let radius = rng.random_range(1.0..2.0);
        let shade = rng.random_range(0.0..14.0);
        let color = [
            clamp_u8(38.0 + shade),
            clamp_u8(30.0 + shade),
            clamp_u8(26.0 + shade),
        ];
        let approx_len = ((p2.0 - p0.0).hypot(p2.1 - p0.1)).max(8.0);
        let steps = (approx_len * 2.5) as usize;
        for i in 0..=steps {
            let t = i as f64 / steps as f64;
            let u = 1.0 - t;
            let x = u * u * p0.0 + 2.0 * u * t * ctrl.0 + t * t * p2.0;
            let y = u * u * p0.1 + 2.0 * u * t * ctrl.1 + t * t * p2.1;
            stamp_disk(&mut image, &mut artifacts, x, y, radius, color);
        }
    }

    // Gel bubbles: bright disk plus brighter rim highlight.
    let n_bubbles = rng.random_range(2..=4);
    for _ in 0..n_bubbles {
        let bx = rng.random_range(0.15..0.85) * width as f64;
        let by = rng.random_range(0.15..0.85) * height as f64;
        let br: f64 = rng.random_range(4.0..10.0);
        let (w, h) = (width as isize, height as isize);
        let reach = (br + 1.5).ceil() as isize;
        let (ibx, iby) = (bx.round() as isize, by.round() as isize);
        for y in (iby - reach).max(0)..=(iby + reach).min(h - 1) {
            for x in (ibx - reach).max(0)..=(ibx + reach).min(w - 1) {
                let dist = (x as f64 - bx).hypot(y as f64 - by);
                if dist <= br + 1.5 {
                    let (ux, uy) = (x as usize, y as usize);
                    let px = image.pixel(ux, uy);
                    let color = if dist >= br - 0.5 {
                        [242, 242, 248] // rim highlight
                    } else {
                        lerp3(px, [235, 232, 238], 0.6)
                    };
                    image.set_pixel(ux, uy, color);
                    artifacts.set(ux, uy, true);
                }
            }
        }
    }

    DermoscopyFixture {
        image,
        lesion,
        artifacts,
    }
}

impl DermoscopyFixture {
    /// Derives a training label map from the exact annotations.
    ///
    /// Lesion samples come from the eroded blob, skin samples from outside
    /// the dilated blob (both with artifact pixels excluded), and artifact
    /// samples from the artifact mask itself; the erosions keep the
    /// ambiguous blend rim unlabeled. At most `per_class` pixels per class
    /// are kept, chosen by a seeded shuffle; a class with fewer candidates
    /// contributes all of them.
    pub fn label_map(&self, margin: usize, per_class: usize, seed: u64) -> Result<LabelMap> {
        let se = StructuringElement::disk(margin.max(1))?;
        let clean = self.artifacts.complement();
        let lesion_zone = erode(&self.lesion, &se).intersect(&clean);
        let skin_zone = dilate(&self.lesion, &se).complement().intersect(&clean);

        let (w, h) = (self.image.width(), self.image.height());
        let mut codes = vec![0u8; w * h];
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ 0x1abe1));
        for (zone, class) in [
            (&lesion_zone, PixelClass::Lesion),
            (&skin_zone, PixelClass::Skin),
            (&self.artifacts, PixelClass::Other),
        ] {
            let mut candidates: Vec<usize> = zone
                .data()
                .iter()
                .enumerate()
                .filter(|(_, &m)| m)
                .map(|(i, _)| i)
                .collect();
            candidates.shuffle(&mut rng);
            for &i in candidates.iter().take(per_class) {
                codes[i] = class.code();
            }
        }
        LabelMap::new(w, h, codes)
    }

    /// The label map as an 8-bit image (class codes 0-3), the on-disk
    /// sidecar format the training command reads.
    pub fn label_image(labels: &LabelMap) -> Gray8Image {
        Gray8Image::new(labels.width(), labels.height(), labels.codes().to_vec())
            .expect("label map geometry is consistent")
    }
}

/// One image of a single procedural texture.
///
/// `kind` 0: dark blotchy (low-frequency value noise on brown), 1: light
/// micro-textured (white noise on light skin tones), 2: mid-gray with
/// high-frequency diagonal stripes. Distinct in both color and frequency
/// content.
pub fn texture_image(width: usize, height: usize, kind: u8, seed: u64) -> RgbImage {
    let blotch = splitmix64(seed ^ 0x10);
    let grain = splitmix64(seed ^ 0x20);
    RgbImage::from_fn(width, height, |x, y| match kind {
        0 => add_noise(
            [98.0, 66.0, 58.0],
            26.0 * value_noise(blotch, x, y, 12) + 4.0 * noise(grain, x, y),
        ),
        1 => add_noise([204.0, 160.0, 140.0], 11.0 * noise(grain, x, y)),
        _ => {
            let phase = (x as f64 + 2.0 * y as f64) * std::f64::consts::TAU / 6.0;
            add_noise(
                [150.0, 150.0, 150.0],
                26.0 * phase.sin() + 4.0 * noise(grain, x, y),
            )
        }
    })
}

/// Builds a labeled three-class corpus from the three procedural textures.
///
/// Each texture is rendered as its own image and fully attributed to one
/// class (0 -> lesion, 1 -> skin, 2 -> other); `per_class` pixels per image
/// are sampled by seeded shuffle after feature extraction.
pub fn texture_corpus(
    width: usize,
    height: usize,
    per_class: usize,
    seed: u64,
) -> Result<TrainingSet> {
    let opts = ExtractOptions::default();
    let mut set = TrainingSet::new(feature_names(&opts));
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ 0xc0e9));
    for (kind, class) in [
        (0u8, PixelClass::Lesion),
        (1, PixelClass::Skin),
        (2, PixelClass::Other),
    ] {
        let img = texture_image(width, height, kind, splitmix64(seed ^ kind as u64));
        let codes = vec![class.code(); width * height];
        let labels = LabelMap::new(width, height, codes)?;
        let mut rows = sample_pixels(&img, &labels, &opts)?;
        // Keep a seeded subsample; whole-image sampling would be overkill.
        let mut order: Vec<usize> = (0..rows.len()).collect();
        order.shuffle(&mut rng);
        order.truncate(per_class);
        order.sort_unstable();
        for i in order {
            let (row, c) = &rows[i];
            set.push_row(row, *c)?;
        }
        rows.clear();
    }
    Ok(set)
}
