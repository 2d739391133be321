//! Shared test oracles: pixel-set descriptors computed by direct
//! accumulation, a supersampled polygon rasterizer, and an exhaustive
//! partition search for merge quality.
#![allow(dead_code)] // each test binary uses a different subset

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use fuzzseg_core::rulebase::RuleBase;
use fuzzseg_core::SegmentDescriptor;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Descriptor of a pixel set computed by integer accumulation, the
/// independent second pass the merge algebra is checked against.
pub fn pixel_descriptor(pixels: &[(u32, u32)]) -> SegmentDescriptor {
    assert!(!pixels.is_empty(), "oracle needs at least one pixel");
    let mut sum_x: u64 = 0;
    let mut sum_y: u64 = 0;
    let (mut x_min, mut x_max) = (u32::MAX, 0u32);
    let (mut y_min, mut y_max) = (u32::MAX, 0u32);
    for &(x, y) in pixels {
        sum_x += u64::from(x);
        sum_y += u64::from(y);
        x_min = x_min.min(x);
        x_max = x_max.max(x);
        y_min = y_min.min(y);
        y_max = y_max.max(y);
    }
    let n = pixels.len() as f64;
    SegmentDescriptor::new(
        n,
        sum_x as f64 / n,
        sum_y as f64 / n,
        f64::from(x_min),
        f64::from(x_max),
        f64::from(y_min),
        f64::from(y_max),
    )
    .expect("pixel accumulation yields a valid descriptor")
}

pub type PixelSet = Vec<(u32, u32)>;

/// Two disjoint random pixel sets on a `side`×`side` grid.
pub fn disjoint_pixel_sets(
    rng: &mut ChaCha8Rng,
    side: u32,
    max_size: usize,
) -> (PixelSet, PixelSet) {
    let mut cells: Vec<(u32, u32)> = (0..side)
        .flat_map(|y| (0..side).map(move |x| (x, y)))
        .collect();
    cells.shuffle(rng);
    let na = rng.random_range(1..=max_size);
    let nb = rng.random_range(1..=max_size);
    let a = cells[..na].to_vec();
    let b = cells[na..na + nb].to_vec();
    (a, b)
}

pub fn assert_close(label: &str, got: f64, want: f64, rel: f64) {
    let scale = want.abs().max(1.0);
    assert!(
        (got - want).abs() <= rel * scale,
        "{label}: got {got}, want {want} (rel tol {rel})"
    );
}

pub fn assert_descriptors_close(got: &SegmentDescriptor, want: &SegmentDescriptor, rel: f64) {
    assert_close("area", got.area, want.area, rel);
    assert_close("cx", got.cx, want.cx, rel);
    assert_close("cy", got.cy, want.cy, rel);
    assert_close("x_min", got.x_min, want.x_min, rel);
    assert_close("x_max", got.x_max, want.x_max, rel);
    assert_close("y_min", got.y_min, want.y_min, rel);
    assert_close("y_max", got.y_max, want.y_max, rel);
}

/// Even-odd point-in-polygon test.
fn contains(poly: &[[f64; 2]], x: f64, y: f64) -> bool {
    let mut inside = false;
    let n = poly.len();
    for i in 0..n {
        let [x1, y1] = poly[i];
        let [x2, y2] = poly[(i + 1) % n];
        if (y1 > y) != (y2 > y) {
            let cross_x = x1 + (y - y1) / (y2 - y1) * (x2 - x1);
            if x < cross_x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Descriptor of a polygon computed by rasterizing it at `oversample`
/// samples per pixel edge; area is reported in pixel units, the bounding
/// box from covered sample positions.
pub fn raster_descriptor(poly: &[[f64; 2]], oversample: u32) -> SegmentDescriptor {
    let xs = poly.iter().map(|p| p[0]);
    let ys = poly.iter().map(|p| p[1]);
    let x_lo = xs.clone().fold(f64::INFINITY, f64::min).floor() - 1.0;
    let x_hi = xs.fold(f64::NEG_INFINITY, f64::max).ceil() + 1.0;
    let y_lo = ys.clone().fold(f64::INFINITY, f64::min).floor() - 1.0;
    let y_hi = ys.fold(f64::NEG_INFINITY, f64::max).ceil() + 1.0;
    let step = 1.0 / f64::from(oversample);
    let weight = step * step;

    let mut covered = 0u64;
    let (mut sum_x, mut sum_y) = (0.0f64, 0.0f64);
    let (mut x_min, mut x_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_min, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let nx = ((x_hi - x_lo) * f64::from(oversample)).round() as u64;
    let ny = ((y_hi - y_lo) * f64::from(oversample)).round() as u64;
    for iy in 0..ny {
        let y = y_lo + (iy as f64 + 0.5) * step;
        for ix in 0..nx {
            let x = x_lo + (ix as f64 + 0.5) * step;
            if contains(poly, x, y) {
                covered += 1;
                sum_x += x;
                sum_y += y;
                x_min = x_min.min(x);
                x_max = x_max.max(x);
                y_min = y_min.min(y);
                y_max = y_max.max(y);
            }
        }
    }
    assert!(covered > 0, "polygon covered no samples");
    let n = covered as f64;
    SegmentDescriptor::new(n * weight, sum_x / n, sum_y / n, x_min, x_max, y_min, y_max)
        .expect("raster accumulation yields a valid descriptor")
}

/// Best merged shape membership achievable by any nonempty subset of the
/// fragments, which equals the best per-group value over all set
/// partitions (every nonempty subset is a group of some partition).
pub fn exhaustive_best_group(fragments: &[SegmentDescriptor], rb: &RuleBase) -> f64 {
    let m = fragments.len();
    assert!(m <= 16, "exhaustive search limited to small fragment sets");
    let mut best = 0.0f64;
    for mask in 1u32..(1 << m) {
        let members: Vec<SegmentDescriptor> = (0..m)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| fragments[i])
            .collect();
        let merged = SegmentDescriptor::merge_all(&members).expect("subset merge is well defined");
        let (_, mu) = rb.best_shape_match(&merged);
        best = best.max(mu);
    }
    best
}
