//! Binary morphology with disk structuring elements.
//!
//! Pixels outside the image count as background for **both** erosion and
//! dilation: erosion eats away at the border, dilation gains nothing from
//! it. Components use 8-connectivity; holes use 4-connectivity.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::imaging::BinaryMask;

/// A flat disk structuring element of integer radius >= 1.
///
/// Membership is `dx*dx + dy*dy <= radius*radius`; the disk is symmetric and
/// always contains its center. Row `dy` spans `-half_width(dy) ..= half_width(dy)`.
#[derive(Debug, Clone)]
pub struct StructuringElement {
    radius: usize,
    half_widths: Vec<i32>,
}

impl StructuringElement {
    /// Disk of the given radius; radius 0 would be the identity and is
    /// rejected as a parameter error.
    pub fn disk(radius: usize) -> Result<Self> {
        if radius == 0 {
            return Err(Error::Parameter("structuring element radius must be >= 1".into()));
        }
        let r = radius as i64;
        let half_widths = (-r..=r)
            .map(|dy| ((r * r - dy * dy) as f64).sqrt().floor() as i32)
            .collect();
        Ok(StructuringElement {
            radius,
            half_widths,
        })
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    /// Horizontal half-width of the disk row at vertical offset `dy`
    /// (|dy| <= radius).
    pub fn half_width(&self, dy: i32) -> i32 {
        self.half_widths[(dy + self.radius as i32) as usize]
    }

    /// Whether offset `(dx, dy)` belongs to the disk.
    pub fn contains(&self, dx: i32, dy: i32) -> bool {
        dx.unsigned_abs() as usize <= self.radius
            && dy.unsigned_abs() as usize <= self.radius
            && dx.abs() <= self.half_width(dy)
    }
}

/// Per-row prefix counts of foreground pixels: `pref[y][x+1] - pref[y][x0]`
/// is the number of foreground pixels in `row y, columns x0..=x`.
fn row_prefixes(mask: &BinaryMask) -> Vec<Vec<u32>> {
    let (w, h) = (mask.width(), mask.height());
    let data = mask.data();
    (0..h)
        .map(|y| {
            let mut p = Vec::with_capacity(w + 1);
            p.push(0u32);
            let mut acc = 0u32;
            for x in 0..w {
                acc += data[y * w + x] as u32;
                p.push(acc);
            }
            p
        })
        .collect()
}

/// Erosion: a pixel survives iff the whole disk around it is foreground.
/// Disk rows that stick out of the image see background, so nothing within
/// `radius` of the border survives.
pub fn erode(mask: &BinaryMask, se: &StructuringElement) -> BinaryMask {
    let (w, h) = (mask.width(), mask.height());
    let r = se.radius() as i32;
    let pref = row_prefixes(mask);
    let mut out = BinaryMask::filled(w, h, false);
    let wi = w as i32;
    for y in 0..h as i32 {
        if y < r || y + r >= h as i32 {
            continue;
        }
        let row_out = &mut out.data_mut()[(y as usize) * w..(y as usize + 1) * w];
        row_out.fill(true);
        for dy in -r..=r {
            let hw = se.half_width(dy);
            let p = &pref[(y + dy) as usize];
            let need = (2 * hw + 1) as u32;
            for (x, slot) in row_out.iter_mut().enumerate() {
                if *slot {
                    let lo = x as i32 - hw;
                    let hi = x as i32 + hw;
                    if lo < 0 || hi >= wi || p[(hi + 1) as usize] - p[lo as usize] != need {
                        *slot = false;
                    }
                }
            }
        }
    }
    out
}

/// Dilation: a pixel lights up iff the disk around it touches any
/// foreground. Out-of-image areas contribute nothing.
pub fn dilate(mask: &BinaryMask, se: &StructuringElement) -> BinaryMask {
    let (w, h) = (mask.width(), mask.height());
    let r = se.radius() as i32;
    let pref = row_prefixes(mask);
    let mut out = BinaryMask::filled(w, h, false);
    let wi = w as i32;
    let hi_y = h as i32;
    for y in 0..h as i32 {
        let row_out = &mut out.data_mut()[(y as usize) * w..(y as usize + 1) * w];
        for dy in -r..=r {
            let sy = y + dy;
            if sy < 0 || sy >= hi_y {
                continue;
            }
            let hw = se.half_width(dy);
            let p = &pref[sy as usize];
            for (x, slot) in row_out.iter_mut().enumerate() {
                if !*slot {
                    let lo = (x as i32 - hw).max(0);
                    let hi = (x as i32 + hw).min(wi - 1);
                    if p[(hi + 1) as usize] - p[lo as usize] > 0 {
                        *slot = true;
                    }
                }
            }
        }
    }
    out
}

/// One labeled component: pixel count, row-major index of its first pixel,
/// and coordinate sums for centroid math.
#[derive(Debug, Clone)]
pub(crate) struct Component {
    pub area: usize,
    pub first: usize,
    pub sum_x: u64,
    pub sum_y: u64,
}

/// Labels 8-connected components in row-major discovery order.
/// `labels[i] == 0` is background; components are 1-based.
pub(crate) fn components(mask: &BinaryMask) -> (Vec<u32>, Vec<Component>) {
    let (w, h) = (mask.width(), mask.height());
    let data = mask.data();
    let mut labels = vec![0u32; w * h];
    let mut comps: Vec<Component> = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..w * h {
        if !data[start] || labels[start] != 0 {
            continue;
        }
        let id = comps.len() as u32 + 1;
        let mut comp = Component {
            area: 0,
            first: start,
            sum_x: 0,
            sum_y: 0,
        };
        labels[start] = id;
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            let (x, y) = (i % w, i / w);
            comp.area += 1;
            comp.sum_x += x as u64;
            comp.sum_y += y as u64;
            for dy in -1i32..=1 {
                for dx in -1i32..=1 {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    let nx = x as i32 + dx;
                    let ny = y as i32 + dy;
                    if nx < 0 || ny < 0 || nx >= w as i32 || ny >= h as i32 {
                        continue;
                    }
                    let ni = ny as usize * w + nx as usize;
                    if data[ni] && labels[ni] == 0 {
                        labels[ni] = id;
                        queue.push_back(ni);
                    }
                }
            }
        }
        comps.push(comp);
    }
    (labels, comps)
}

fn extract(labels: &[u32], id: u32, w: usize, h: usize) -> BinaryMask {
    BinaryMask::new(w, h, labels.iter().map(|&l| l == id).collect())
        .expect("labels came from a valid mask")
}

/// Keeps only the largest 8-connected component; ties go to the component
/// whose first pixel comes earliest in row-major order. Empty in, empty out.
pub fn largest_component(mask: &BinaryMask) -> BinaryMask {
    let (labels, comps) = components(mask);
    let mut best: Option<(usize, usize, u32)> = None; // (area, first, id)
    for (k, c) in comps.iter().enumerate() {
        let candidate = (c.area, c.first, k as u32 + 1);
        best = Some(match best {
            None => candidate,
            Some(b) => {
                if candidate.0 > b.0 || (candidate.0 == b.0 && candidate.1 < b.1) {
                    candidate
                } else {
                    b
                }
            }
        });
    }
    match best {
        Some((_, _, id)) => extract(&labels, id, mask.width(), mask.height()),
        None => BinaryMask::filled(mask.width(), mask.height(), false),
    }
}

/// Compares `dist^2(a) ? dist^2(b)` of two component centroids from the image
/// center using integers only, so ties are exact.
///
/// For a component with pixel-count n and coordinate sum Sx, the centroid
/// x-offset from the center (W-1)/2 is `Sx/n - (W-1)/2 = (2*Sx - n*(W-1)) / (2n)`.
/// Cross-multiplying the squared distances by the denominators keeps
/// everything integral: compare `(Dx_a^2 + Dy_a^2) * n_b^2` against
/// `(Dx_b^2 + Dy_b^2) * n_a^2` in u128.
fn centroid_dist2_cmp(a: &Component, b: &Component, w: usize, h: usize) -> std::cmp::Ordering {
    let num = |c: &Component| -> u128 {
        let n = c.area as i128;
        let dx = 2 * c.sum_x as i128 - n * (w as i128 - 1);
        let dy = 2 * c.sum_y as i128 - n * (h as i128 - 1);
        (dx * dx + dy * dy) as u128
    };
    let (na, nb) = (a.area as u128, b.area as u128);
    let lhs = num(a) * nb * nb;
    let rhs = num(b) * na * na;
    lhs.cmp(&rhs)
}

/// Among the `top_k` largest components, keeps the one whose centroid is
/// closest to the image center. Ties: exact distance, then larger area, then
/// earlier first pixel. Empty in, empty out.
pub fn most_centered_component(mask: &BinaryMask, top_k: usize) -> BinaryMask {
    let (w, h) = (mask.width(), mask.height());
    let (labels, comps) = components(mask);
    if comps.is_empty() || top_k == 0 {
        return BinaryMask::filled(w, h, false);
    }
    // Rank by area (desc), break by first pixel (asc), take the top k.
    let mut order: Vec<usize> = (0..comps.len()).collect();
    order.sort_by(|&i, &j| {
        comps[j]
            .area
            .cmp(&comps[i].area)
            .then(comps[i].first.cmp(&comps[j].first))
    });
    order.truncate(top_k);
    let winner = order
        .into_iter()
        .min_by(|&i, &j| {
            centroid_dist2_cmp(&comps[i], &comps[j], w, h)
                .then(comps[j].area.cmp(&comps[i].area))
                .then(comps[i].first.cmp(&comps[j].first))
        })
        .expect("non-empty candidate list");
    extract(&labels, winner as u32 + 1, w, h)
}

/// Fills holes: background regions (4-connected) that cannot reach the image
/// border become foreground.
pub fn fill_holes(mask: &BinaryMask) -> BinaryMask {
    let (w, h) = (mask.width(), mask.height());
    let data = mask.data();
    let mut outside = vec![false; w * h];
    let mut queue = VecDeque::new();
    let push = |i: usize, outside: &mut Vec<bool>, queue: &mut VecDeque<usize>| {
        if !data[i] && !outside[i] {
            outside[i] = true;
            queue.push_back(i);
        }
    };
    for x in 0..w {
        push(x, &mut outside, &mut queue);
        push((h - 1) * w + x, &mut outside, &mut queue);
    }
    for y in 0..h {
        push(y * w, &mut outside, &mut queue);
        push(y * w + w - 1, &mut outside, &mut queue);
    }
    while let Some(i) = queue.pop_front() {
        let (x, y) = (i % w, i / w);
        if x > 0 {
            push(i - 1, &mut outside, &mut queue);
        }
        if x + 1 < w {
            push(i + 1, &mut outside, &mut queue);
        }
        if y > 0 {
            push(i - w, &mut outside, &mut queue);
        }
        if y + 1 < h {
            push(i + w, &mut outside, &mut queue);
        }
    }
    BinaryMask::new(
        w,
        h,
        (0..w * h).map(|i| data[i] || !outside[i]).collect(),
    )
    .expect("dims unchanged")
}
