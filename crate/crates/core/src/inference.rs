//! Three-stage inference: shape matching, placement consistency, class
//! membership, then maximal-membership defuzzification.
//!
//! Stage one scores every (input segment, model segment) pair by the shape
//! rules. Stage two scores candidate anchors against every non-anchor
//! model role by combining offset memberships with the partner's shape
//! score, maximized over partners. Stage three averages, per candidate
//! anchor, its anchor shape score with all placement scores over
//! n(c) + 1 and takes the best candidate. The divisor is kept as printed
//! in the source formula, so a perfect match scores n(c) / (n(c) + 1); the
//! optional `normalize_perfect_match` flag rescales that ceiling to 1.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::descriptors::SegmentDescriptor;
use crate::model::VehicleClass;
use crate::rulebase::RuleBase;

#[derive(Debug, Error, PartialEq)]
pub enum InferenceError {
    #[error("scene contains no segments")]
    EmptyScene,
    #[error("no rulebases given")]
    NoRulebases,
    #[error("duplicate rulebase for class '{0}'")]
    DuplicateClass(VehicleClass),
}

/// Shape-rule scores: rows = input segments, columns = model segments.
#[derive(Debug, Clone)]
pub struct ShapeMatchMatrix {
    m: usize,
    n: usize,
    values: Vec<f64>,
    degenerate_rows: Vec<usize>,
}

impl ShapeMatchMatrix {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    /// Input segment count m.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Model segment count n(c).
    pub fn n(&self) -> usize {
        self.n
    }

    /// Rows zeroed because the input segment has no shape coefficient.
    pub fn degenerate_rows(&self) -> &[usize] {
        &self.degenerate_rows
    }
}

/// Placement scores: rows = candidate anchors, column k = model segment
/// k + 1 (the anchor itself has no placement rule).
#[derive(Debug, Clone)]
pub struct PlacementMatchMatrix {
    m: usize,
    n: usize,
    values: Vec<f64>,
}

impl PlacementMatchMatrix {
    pub fn at(&self, i: usize, k: usize) -> f64 {
        self.values[i * (self.n - 1) + k]
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// Stage one: evaluate every shape rule on every input segment.
/// Degenerate input segments get zero rows and are reported, not
/// rejected.
pub fn shape_match(es: &[SegmentDescriptor], rb: &RuleBase) -> ShapeMatchMatrix {
    let n = rb.n();
    let mut values = Vec::with_capacity(es.len() * n);
    let mut degenerate_rows = Vec::new();
    for (i, s) in es.iter().enumerate() {
        if s.is_degenerate() {
            degenerate_rows.push(i);
        }
        for rule in &rb.shape_rules {
            values.push(rule.membership(s));
        }
    }
    ShapeMatchMatrix {
        m: es.len(),
        n,
        values,
        degenerate_rows,
    }
}

/// Stage two: for candidate anchor i1 and model segment j2, the best
/// partner i2 under mean(dx membership, dy membership, partner shape
/// score). A single-segment scene has no partners and scores zero.
pub fn placement_match(
    es: &[SegmentDescriptor],
    sm: &ShapeMatchMatrix,
    rb: &RuleBase,
) -> PlacementMatchMatrix {
    let m = es.len();
    let n = rb.n();
    let mut values = vec![0.0; m * (n - 1)];
    for i1 in 0..m {
        for (k, rule) in rb.placement_rules.iter().enumerate() {
            let mut best = 0.0f64;
            for i2 in 0..m {
                if i2 == i1 {
                    continue;
                }
                let dx = es[i1].cx - es[i2].cx;
                let dy = es[i1].cy - es[i2].cy;
                let mu =
                    (rule.dx.membership(dx) + rule.dy.membership(dy) + sm.at(i2, rule.segment))
                        / 3.0;
                best = best.max(mu);
            }
            values[i1 * (n - 1) + k] = best;
        }
    }
    PlacementMatchMatrix { m, n, values }
}

/// Stage three: class membership and the candidate anchor achieving it.
///
/// For each candidate anchor i the bracket sums its anchor shape score
/// and all placement scores; the class score is the best bracket divided
/// by n(c) + 1. Ties go to the lowest i.
pub fn class_membership(
    sm: &ShapeMatchMatrix,
    pm: &PlacementMatchMatrix,
    n_c: usize,
) -> (f64, Option<usize>) {
    debug_assert_eq!(sm.m(), pm.m());
    debug_assert_eq!(sm.n(), n_c);
    debug_assert_eq!(pm.n(), n_c);
    let mut best = 0.0f64;
    let mut best_anchor = None;
    for i in 0..sm.m() {
        let mut bracket = sm.at(i, 0);
        for k in 0..n_c - 1 {
            bracket += pm.at(i, k);
        }
        let score = bracket / (n_c + 1) as f64;
        if best_anchor.is_none() || score > best {
            best = score;
            best_anchor = Some(i);
        }
    }
    (best, best_anchor)
}

/// Tunables of the inference stage.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct InferenceConfig {
    /// Absolute score gap under which two classes count as tied.
    pub tie_tolerance: f64,
    /// Rescale scores by (n(c)+1)/n(c) so a perfect match reaches 1.0.
    pub normalize_perfect_match: bool,
}

impl Default for InferenceConfig {
    fn default() -> Self {
        Self {
            tie_tolerance: 1e-9,
            normalize_perfect_match: false,
        }
    }
}

/// Score of one class: membership plus the candidate anchor that achieved
/// it (`None` when the scene gave this class nothing to anchor on).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassScore {
    pub class_id: VehicleClass,
    pub score: f64,
    pub anchor_index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Winner {
    Class(VehicleClass),
    Ambiguous(Vec<VehicleClass>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassificationResult {
    /// One entry per rulebase, input order preserved.
    pub scores: Vec<ClassScore>,
    pub winner: Winner,
    /// Input-segment index anchoring the winning class; `None` when
    /// ambiguous.
    pub anchor_index: Option<usize>,
}

impl ClassificationResult {
    /// Maximal-membership defuzzification over per-class scores; classes
    /// within `tie_tolerance` of the maximum tie.
    pub fn from_scores(
        scores: Vec<ClassScore>,
        tie_tolerance: f64,
    ) -> Result<Self, InferenceError> {
        if scores.is_empty() {
            return Err(InferenceError::NoRulebases);
        }
        let top = scores
            .iter()
            .map(|s| s.score)
            .fold(f64::NEG_INFINITY, f64::max);
        if top <= 0.0 {
            // no class produced any evidence; a zero "winner" would be noise
            return Ok(Self {
                winner: Winner::Ambiguous(scores.iter().map(|s| s.class_id).collect()),
                anchor_index: None,
                scores,
            });
        }
        let tied: Vec<&ClassScore> = scores
            .iter()
            .filter(|s| top - s.score <= tie_tolerance)
            .collect();
        let (winner, anchor_index) = if tied.len() == 1 {
            (Winner::Class(tied[0].class_id), tied[0].anchor_index)
        } else {
            (
                Winner::Ambiguous(tied.iter().map(|s| s.class_id).collect()),
                None,
            )
        };
        Ok(Self {
            scores,
            winner,
            anchor_index,
        })
    }

    pub fn score_of(&self, class_id: VehicleClass) -> Option<f64> {
        self.scores
            .iter()
            .find(|s| s.class_id == class_id)
            .map(|s| s.score)
    }
}

/// Scores one segment set against one rulebase via the three stages.
pub fn score_class(es: &[SegmentDescriptor], rb: &RuleBase, cfg: &InferenceConfig) -> ClassScore {
    if es.is_empty() {
        return ClassScore {
            class_id: rb.class_id,
            score: 0.0,
            anchor_index: None,
        };
    }
    let sm = shape_match(es, rb);
    let pm = placement_match(es, &sm, rb);
    let (raw, anchor_index) = class_membership(&sm, &pm, rb.n());
    let score = if cfg.normalize_perfect_match {
        (raw * (rb.n() + 1) as f64 / rb.n() as f64).min(1.0)
    } else {
        raw
    };
    ClassScore {
        class_id: rb.class_id,
        score,
        anchor_index,
    }
}

/// Full classification of one segment set against every rulebase.
///
/// No merging happens here; callers wanting fragment merging run the
/// pipeline instead.
pub fn classify(
    es: &[SegmentDescriptor],
    rulebases: &[RuleBase],
    cfg: &InferenceConfig,
) -> Result<ClassificationResult, InferenceError> {
    if es.is_empty() {
        return Err(InferenceError::EmptyScene);
    }
    if rulebases.is_empty() {
        return Err(InferenceError::NoRulebases);
    }
    for (i, rb) in rulebases.iter().enumerate() {
        if rulebases[..i].iter().any(|r| r.class_id == rb.class_id) {
            return Err(InferenceError::DuplicateClass(rb.class_id));
        }
    }
    let scores = rulebases
        .iter()
        .map(|rb| score_class(es, rb, cfg))
        .collect();
    ClassificationResult::from_scores(scores, cfg.tie_tolerance)
}
