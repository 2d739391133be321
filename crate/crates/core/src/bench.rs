//! Seeded synthetic benchmark: fragment, jitter and drop projected model
//! segments, then measure classification accuracy.
//!
//! Each (class, scene) pair gets its own derived RNG stream, so reports
//! are byte-identical across runs and insensitive to evaluation order.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bundled;
use crate::config::Config;
use crate::descriptors::SegmentDescriptor;
use crate::inference::Winner;
use crate::model::VehicleClass;
use crate::pipeline::{classify_scene, PipelineError};
use crate::rulebase::{induct, RuleError};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("scenes_per_class must be at least 1")]
    NoScenes,
    #[error("split_k must be at least 1")]
    BadSplit,
    #[error("jitter must be nonnegative and finite, got {0}")]
    BadJitter(f64),
    #[error("drop_prob must lie in [0, 1], got {0}")]
    BadDropProb(f64),
    #[error("no classes selected")]
    NoClasses,
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
}

/// Benchmark parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchConfig {
    pub classes: Vec<VehicleClass>,
    pub scenes_per_class: usize,
    /// Each surviving segment splits into Uniform{1..=split_k} fragments.
    pub split_k: u32,
    /// Mass-center jitter sigma as a fraction of the model diagonal.
    pub jitter: f64,
    /// Per-segment drop probability (occlusion surrogate).
    pub drop_prob: f64,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            classes: VehicleClass::ALL.to_vec(),
            scenes_per_class: 40,
            split_k: 2,
            jitter: 0.02,
            drop_prob: 0.2,
            seed: 1,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        if self.classes.is_empty() {
            return Err(BenchError::NoClasses);
        }
        if self.scenes_per_class == 0 {
            return Err(BenchError::NoScenes);
        }
        if self.split_k == 0 {
            return Err(BenchError::BadSplit);
        }
        if !self.jitter.is_finite() || self.jitter < 0.0 {
            return Err(BenchError::BadJitter(self.jitter));
        }
        if !(0.0..=1.0).contains(&self.drop_prob) {
            return Err(BenchError::BadDropProb(self.drop_prob));
        }
        Ok(())
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent per-scene RNG stream derived from (seed, class, scene).
pub fn scene_rng(seed: u64, class_idx: usize, scene_idx: usize) -> ChaCha8Rng {
    let mixed = splitmix64(
        splitmix64(splitmix64(seed).wrapping_add(class_idx as u64)).wrapping_add(scene_idx as u64),
    );
    ChaCha8Rng::seed_from_u64(mixed)
}

/// Splits a descriptor into `parts` fragments whose merge reproduces the
/// parent (up to rounding): the bbox splits on its longer axis at a random
/// position in [0.35, 0.65], child areas are proportional to their share
/// of the split extent, and child mass centers solve the area-weighted
/// mean constraint. Returns fewer fragments when a split is not solvable.
pub fn split_descriptor<R: Rng + ?Sized>(
    seg: &SegmentDescriptor,
    parts: u32,
    rng: &mut R,
) -> Vec<SegmentDescriptor> {
    if parts <= 1 {
        return vec![*seg];
    }
    let Some((a, b)) = split_once(seg, rng) else {
        return vec![*seg];
    };
    let left_parts = parts / 2;
    let right_parts = parts - left_parts;
    let mut out = split_descriptor(&a, left_parts, rng);
    out.extend(split_descriptor(&b, right_parts, rng));
    out
}

fn split_once<R: Rng + ?Sized>(
    seg: &SegmentDescriptor,
    rng: &mut R,
) -> Option<(SegmentDescriptor, SegmentDescriptor)> {
    let along_x = seg.width() >= seg.height();
    let t = rng.random_range(0.35..0.65);
    split_at(seg, along_x, t)
}

/// Cuts a descriptor at fraction `t` of its x extent (`along_x`) or y
/// extent, producing two fragments whose merge reproduces the parent
/// exactly. Returns `None` when the axis is degenerate or the parent's
/// mass center cannot be balanced between the two sub-boxes.
pub fn split_at(
    seg: &SegmentDescriptor,
    along_x: bool,
    t: f64,
) -> Option<(SegmentDescriptor, SegmentDescriptor)> {
    assert!((0.0..=1.0).contains(&t), "cut fraction must lie in [0, 1]");
    let extent = if along_x { seg.width() } else { seg.height() };
    if extent <= 1e-9 || t <= 0.0 || t >= 1.0 {
        return None;
    }
    let (lo, hi, center) = if along_x {
        (seg.x_min, seg.x_max, seg.cx)
    } else {
        (seg.y_min, seg.y_max, seg.cy)
    };
    let cut = lo + t * extent;
    let area_a = seg.area * t;
    let area_b = seg.area - area_a;

    // one child center at its sub-box midpoint, the other solved from the
    // weighted-mean constraint; swap roles if the solution leaves its box
    let solve = |fixed: f64, fixed_area: f64, other_area: f64| -> f64 {
        (seg.area * center - fixed_area * fixed) / other_area
    };
    let mut ca = (lo + cut) / 2.0;
    let mut cb = solve(ca, area_a, area_b);
    if !(cut..=hi).contains(&cb) {
        cb = cb.clamp(cut, hi);
        ca = solve(cb, area_b, area_a);
        if !(lo..=cut).contains(&ca) {
            return None;
        }
    }

    let (a, b) = if along_x {
        (
            SegmentDescriptor {
                area: area_a,
                cx: ca,
                cy: seg.cy,
                x_min: seg.x_min,
                x_max: cut,
                y_min: seg.y_min,
                y_max: seg.y_max,
            },
            SegmentDescriptor {
                area: area_b,
                cx: cb,
                cy: seg.cy,
                x_min: cut,
                x_max: seg.x_max,
                y_min: seg.y_min,
                y_max: seg.y_max,
            },
        )
    } else {
        (
            SegmentDescriptor {
                area: area_a,
                cx: seg.cx,
                cy: ca,
                x_min: seg.x_min,
                x_max: seg.x_max,
                y_min: seg.y_min,
                y_max: cut,
            },
            SegmentDescriptor {
                area: area_b,
                cx: seg.cx,
                cy: cb,
                x_min: seg.x_min,
                x_max: seg.x_max,
                y_min: cut,
                y_max: seg.y_max,
            },
        )
    };
    (a.validate().is_ok() && b.validate().is_ok()).then_some((a, b))
}

/// Degrades one projected model into a synthetic scene: drop, fragment,
/// jitter. An empty vector means every segment was dropped.
pub fn generate_scene<R: Rng + ?Sized>(
    segments: &[SegmentDescriptor],
    diagonal: f64,
    split_k: u32,
    jitter: f64,
    drop_prob: f64,
    rng: &mut R,
) -> Vec<SegmentDescriptor> {
    let noise = Normal::new(0.0, jitter * diagonal).expect("jitter validated nonnegative");
    let mut scene = Vec::new();
    for seg in segments {
        if rng.random_bool(drop_prob) {
            continue;
        }
        let parts = rng.random_range(1..=split_k);
        for fragment in split_descriptor(seg, parts, rng) {
            let dx = noise.sample(rng);
            let dy = noise.sample(rng);
            scene.push(fragment.translated(dx, dy));
        }
    }
    scene
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassStats {
    pub scenes: usize,
    pub correct: usize,
    pub accuracy: f64,
}

/// Accuracy report; map keys are class ids (plus "unclassified" in
/// confusion columns), so serialization order is stable.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub per_class: BTreeMap<String, ClassStats>,
    pub overall_accuracy: f64,
    pub confusion: BTreeMap<String, BTreeMap<String, usize>>,
}

impl BenchReport {
    pub fn to_json_pretty(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serializes");
        out.push('\n');
        out
    }
}

/// Runs the benchmark on the bundled models.
pub fn run_bench(bench: &BenchConfig, cfg: &Config) -> Result<BenchReport, BenchError> {
    bench.validate()?;
    let mut rulebases = Vec::with_capacity(bench.classes.len());
    let mut class_models = Vec::with_capacity(bench.classes.len());
    for class in &bench.classes {
        let cm = bundled::class_model(*class);
        rulebases.push(induct(&cm, &cfg.widths)?);
        class_models.push(cm);
    }

    let mut per_class = BTreeMap::new();
    let mut confusion: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
    let mut total_correct = 0usize;
    for (class_idx, (class, cm)) in bench.classes.iter().zip(&class_models).enumerate() {
        let diagonal = cm.diagonal();
        let mut correct = 0usize;
        let row = confusion.entry(class.id().to_owned()).or_default();
        for scene_idx in 0..bench.scenes_per_class {
            let mut rng = scene_rng(bench.seed, class_idx, scene_idx);
            let scene = generate_scene(
                &cm.segments,
                diagonal,
                bench.split_k,
                bench.jitter,
                bench.drop_prob,
                &mut rng,
            );
            let predicted = if scene.is_empty() {
                None
            } else {
                match classify_scene(&scene, &rulebases, cfg)?.result.winner {
                    Winner::Class(c) => Some(c),
                    Winner::Ambiguous(_) => None,
                }
            };
            let key = predicted.map_or("unclassified".to_owned(), |c| c.id().to_owned());
            *row.entry(key).or_insert(0) += 1;
            if predicted == Some(*class) {
                correct += 1;
            }
        }
        total_correct += correct;
        per_class.insert(
            class.id().to_owned(),
            ClassStats {
                scenes: bench.scenes_per_class,
                correct,
                accuracy: correct as f64 / bench.scenes_per_class as f64,
            },
        );
    }

    let total = bench.scenes_per_class * bench.classes.len();
    Ok(BenchReport {
        config: bench.clone(),
        per_class,
        overall_accuracy: total_correct as f64 / total as f64,
        confusion,
    })
}
