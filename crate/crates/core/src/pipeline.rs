//! End-to-end scene classification: per-class fragment merging followed by
//! the three inference stages.
//!
//! Merging is model-guided, so each class sees its own merged view of the
//! scene; the per-class scores are then compared by maximal membership.

use thiserror::Error;

use crate::config::Config;
use crate::descriptors::SegmentDescriptor;
use crate::inference::{score_class, ClassScore, ClassificationResult, InferenceError, Winner};
use crate::model::VehicleClass;
use crate::preprocess::{merge_to_model, MergePlan, PreprocessError};
use crate::rulebase::RuleBase;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Inference(#[from] InferenceError),
    #[error(transparent)]
    Preprocess(#[from] PreprocessError),
}

/// How one class saw the scene: its merged segments, the merge plan and
/// the resulting score.
#[derive(Debug, Clone)]
pub struct ClassEvaluation {
    pub class_id: VehicleClass,
    pub merged: Vec<SegmentDescriptor>,
    pub plan: MergePlan,
    pub score: ClassScore,
}

#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub result: ClassificationResult,
    pub evaluations: Vec<ClassEvaluation>,
}

impl PipelineOutcome {
    /// Scores, winner and anchor index as a JSON value; an ambiguous
    /// result lists the tied classes and carries a null anchor.
    pub fn to_json(&self) -> serde_json::Value {
        let scores: std::collections::BTreeMap<String, f64> = self
            .result
            .scores
            .iter()
            .map(|s| (s.class_id.to_string(), s.score))
            .collect();
        match &self.result.winner {
            Winner::Class(c) => serde_json::json!({
                "scores": scores,
                "winner": c.to_string(),
                "anchor_index": self.result.anchor_index,
            }),
            Winner::Ambiguous(tied) => serde_json::json!({
                "scores": scores,
                "winner": "ambiguous",
                "tied": tied.iter().map(ToString::to_string).collect::<Vec<_>>(),
                "anchor_index": serde_json::Value::Null,
            }),
        }
    }
}

/// Merges the raw scene against every rulebase and classifies.
///
/// A class whose merge retains nothing scores 0 rather than failing; an
/// entirely empty input scene is an error.
pub fn classify_scene(
    es_prime: &[SegmentDescriptor],
    rulebases: &[RuleBase],
    cfg: &Config,
) -> Result<PipelineOutcome, PipelineError> {
    if es_prime.is_empty() {
        return Err(InferenceError::EmptyScene.into());
    }
    if rulebases.is_empty() {
        return Err(InferenceError::NoRulebases.into());
    }
    for (i, rb) in rulebases.iter().enumerate() {
        if rulebases[..i].iter().any(|r| r.class_id == rb.class_id) {
            return Err(InferenceError::DuplicateClass(rb.class_id).into());
        }
    }
    let inference_cfg = cfg.inference();
    let mut evaluations = Vec::with_capacity(rulebases.len());
    for rb in rulebases {
        let (merged, plan) = merge_to_model(es_prime, rb, cfg.tau, cfg.adjacency_gate)?;
        let score = score_class(&merged, rb, &inference_cfg);
        evaluations.push(ClassEvaluation {
            class_id: rb.class_id,
            merged,
            plan,
            score,
        });
    }
    let scores: Vec<ClassScore> = evaluations.iter().map(|e| e.score.clone()).collect();
    let result = ClassificationResult::from_scores(scores, cfg.tie_tolerance)?;
    Ok(PipelineOutcome {
        result,
        evaluations,
    })
}
