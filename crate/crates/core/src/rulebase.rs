//! Rule induction: fuzzifying reference segment parameters.
//!
//! Each class model yields one shape rule per segment (trapezoids over
//! area and shape coefficient) and one placement rule per non-anchor
//! segment (trapezoids over the anchor-relative offsets dx, dy). The
//! class-level arrangement rule has no stored parameters; it is the fixed
//! combination formula in the inference stage.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::descriptors::{DescriptorError, SegmentDescriptor};
use crate::fuzzy::{FuzzyError, Trapezoid};
use crate::model::{ClassModel, VehicleClass};

#[derive(Debug, Error)]
pub enum RuleError {
    #[error("width config invalid: {0}")]
    InvalidWidthConfig(FuzzyError),
    #[error("model segment {index} is degenerate (zero height)")]
    DegenerateModelSegment { index: usize },
    #[error("model segment {index} invalid: {source}")]
    InvalidModelSegment {
        index: usize,
        source: DescriptorError,
    },
    #[error("rule construction failed for segment {index}: {source}")]
    Construction { index: usize, source: FuzzyError },
    #[error("rulebase needs at least 2 model segments, got {0}")]
    TooFewSegments(usize),
    #[error("expected {expected} {kind} rules, got {got}")]
    WrongRuleCount {
        kind: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("{kind} rule {position} points at model segment {got}, expected {expected}")]
    WrongRuleTarget {
        kind: &'static str,
        position: usize,
        got: usize,
        expected: usize,
    },
    #[error("model diagonal must be positive and finite, got {0}")]
    BadDiagonal(f64),
}

/// Trapezoid half-widths used during induction.
///
/// Shape widths are relative (fractions of the segment's own area and
/// shape coefficient); offset widths are absolute fractions of the model
/// envelope diagonal, so dx/dy tolerance stays meaningful near zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WidthConfig {
    pub shape_core: f64,
    pub shape_support: f64,
    pub offset_core: f64,
    pub offset_support: f64,
}

impl Default for WidthConfig {
    fn default() -> Self {
        Self {
            shape_core: 0.15,
            shape_support: 0.40,
            offset_core: 0.05,
            offset_support: 0.15,
        }
    }
}

impl WidthConfig {
    pub fn validate(&self) -> Result<(), RuleError> {
        for (core, support) in [
            (self.shape_core, self.shape_support),
            (self.offset_core, self.offset_support),
        ] {
            let ok = core.is_finite() && support.is_finite() && 0.0 <= core && core <= support;
            if !ok {
                return Err(RuleError::InvalidWidthConfig(FuzzyError::InvalidWidths {
                    core,
                    support,
                }));
            }
        }
        Ok(())
    }

    /// All four widths multiplied by `k`; used to reason about tolerance
    /// scaling.
    pub fn scaled(&self, k: f64) -> Self {
        Self {
            shape_core: self.shape_core * k,
            shape_support: self.shape_support * k,
            offset_core: self.offset_core * k,
            offset_support: self.offset_support * k,
        }
    }
}

/// Shape rule for one model segment: premises over area and shape
/// coefficient, consequent "this input segment plays model role
/// `segment`".
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShapeRule {
    pub segment: usize,
    pub area: Trapezoid,
    pub q: Trapezoid,
}

impl ShapeRule {
    /// Premise strength: mean of the area and shape-coefficient
    /// memberships. Degenerate segments have no shape coefficient and
    /// score 0.
    pub fn membership(&self, s: &SegmentDescriptor) -> f64 {
        match s.shape_coefficient() {
            Ok(q) => 0.5 * (self.area.membership(s.area) + self.q.membership(q)),
            Err(_) => 0.0,
        }
    }
}

/// Placement rule for model segment `segment` (never the anchor):
/// premises over dx, dy measured anchor-minus-partner.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlacementRule {
    pub segment: usize,
    pub dx: Trapezoid,
    pub dy: Trapezoid,
}

/// Induced rules of one class, self-contained for serialization: carries
/// the width config, the model segments and the envelope diagonal so
/// classification and overlays are reproducible from the file alone.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RuleBase {
    #[serde(rename = "class")]
    pub class_id: VehicleClass,
    pub widths: WidthConfig,
    pub model_diagonal: f64,
    pub shape_rules: Vec<ShapeRule>,
    pub placement_rules: Vec<PlacementRule>,
    pub model_segments: Vec<SegmentDescriptor>,
}

impl RuleBase {
    /// Number of model segments n(c).
    pub fn n(&self) -> usize {
        self.shape_rules.len()
    }

    /// Best shape-rule premise over all model segments; ties go to the
    /// lowest segment index.
    pub fn best_shape_match(&self, s: &SegmentDescriptor) -> (usize, f64) {
        let mut best = (0, f64::NEG_INFINITY);
        for rule in &self.shape_rules {
            let mu = rule.membership(s);
            if mu > best.1 {
                best = (rule.segment, mu);
            }
        }
        best
    }

    pub fn validate(&self) -> Result<(), RuleError> {
        self.widths.validate()?;
        if !(self.model_diagonal.is_finite() && self.model_diagonal > 0.0) {
            return Err(RuleError::BadDiagonal(self.model_diagonal));
        }
        let n = self.model_segments.len();
        if n < 2 {
            return Err(RuleError::TooFewSegments(n));
        }
        for (index, s) in self.model_segments.iter().enumerate() {
            s.validate()
                .map_err(|source| RuleError::InvalidModelSegment { index, source })?;
            if s.is_degenerate() {
                return Err(RuleError::DegenerateModelSegment { index });
            }
        }
        if self.shape_rules.len() != n {
            return Err(RuleError::WrongRuleCount {
                kind: "shape",
                expected: n,
                got: self.shape_rules.len(),
            });
        }
        if self.placement_rules.len() != n - 1 {
            return Err(RuleError::WrongRuleCount {
                kind: "placement",
                expected: n - 1,
                got: self.placement_rules.len(),
            });
        }
        for (position, rule) in self.shape_rules.iter().enumerate() {
            if rule.segment != position {
                return Err(RuleError::WrongRuleTarget {
                    kind: "shape",
                    position,
                    got: rule.segment,
                    expected: position,
                });
            }
        }
        for (position, rule) in self.placement_rules.iter().enumerate() {
            if rule.segment != position + 1 {
                return Err(RuleError::WrongRuleTarget {
                    kind: "placement",
                    position,
                    got: rule.segment,
                    expected: position + 1,
                });
            }
        }
        Ok(())
    }

    pub fn to_json_pretty(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("rulebase serializes");
        out.push('\n');
        out
    }

    pub fn from_json(json: &str) -> Result<Self, RuleBaseParseError> {
        let rb: RuleBase = serde_json::from_str(json)?;
        rb.validate()?;
        Ok(rb)
    }
}

#[derive(Debug, Error)]
pub enum RuleBaseParseError {
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Invalid(#[from] RuleError),
}

/// Builds the rule base for one class model.
pub fn induct(m: &ClassModel, widths: &WidthConfig) -> Result<RuleBase, RuleError> {
    widths.validate()?;
    let diagonal = m.diagonal();
    for (index, s) in m.segments.iter().enumerate() {
        s.validate()
            .map_err(|source| RuleError::InvalidModelSegment { index, source })?;
        if s.is_degenerate() {
            return Err(RuleError::DegenerateModelSegment { index });
        }
    }

    let mut shape_rules = Vec::with_capacity(m.n());
    for (index, s) in m.segments.iter().enumerate() {
        let q = s.shape_coefficient().expect("degeneracy checked above");
        let build = |center: f64| {
            Trapezoid::around(
                center,
                widths.shape_core * center.abs(),
                widths.shape_support * center.abs(),
            )
        };
        shape_rules.push(ShapeRule {
            segment: index,
            area: build(s.area).map_err(|source| RuleError::Construction { index, source })?,
            q: build(q).map_err(|source| RuleError::Construction { index, source })?,
        });
    }

    let anchor = m.anchor();
    let core = widths.offset_core * diagonal;
    let support = widths.offset_support * diagonal;
    let mut placement_rules = Vec::with_capacity(m.n() - 1);
    for (offset, s) in m.segments.iter().enumerate().skip(1) {
        let build = |center: f64| Trapezoid::around(center, core, support);
        placement_rules.push(PlacementRule {
            segment: offset,
            dx: build(anchor.cx - s.cx).map_err(|source| RuleError::Construction {
                index: offset,
                source,
            })?,
            dy: build(anchor.cy - s.cy).map_err(|source| RuleError::Construction {
                index: offset,
                source,
            })?,
        });
    }

    Ok(RuleBase {
        class_id: m.class_id,
        widths: *widths,
        model_diagonal: diagonal,
        shape_rules,
        placement_rules,
        model_segments: m.segments.clone(),
    })
}
