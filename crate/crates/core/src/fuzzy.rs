//! Trapezoidal fuzzy sets over descriptor features.
//!
//! Crisp feature values are fuzzified as singletons, so evaluating a rule
//! premise reduces to reading the trapezoid membership at a point. Premises
//! combine by the arithmetic mean rather than a t-norm: one poor feature
//! dents the score instead of vetoing it.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FuzzyError {
    #[error("trapezoid breakpoints must be ordered a <= b <= c <= d, got [{0}, {1}, {2}, {3}]")]
    InvalidBreakpoints(f64, f64, f64, f64),
    #[error(
        "trapezoid widths must satisfy 0 <= core <= support, got core {core}, support {support}"
    )]
    InvalidWidths { core: f64, support: f64 },
    #[error("empty input")]
    EmptyInput,
}

/// Trapezoidal membership function with breakpoints `a <= b <= c <= d`.
///
/// Membership is 0 outside `[a, d]`, 1 on the core `[b, c]` and linear on
/// the ramps. Degenerate ramps (`a == b` or `c == d`) keep the closed core:
/// the step edge itself evaluates to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct Trapezoid {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl Trapezoid {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self, FuzzyError> {
        let ordered = a <= b && b <= c && c <= d;
        let finite = [a, b, c, d].iter().all(|v| v.is_finite());
        if !ordered || !finite {
            return Err(FuzzyError::InvalidBreakpoints(a, b, c, d));
        }
        Ok(Self { a, b, c, d })
    }

    /// Symmetric trapezoid: core `center ± core_hw`, support
    /// `center ± support_hw`. Both zero gives the singleton limit, a crisp
    /// equality test at `center`.
    pub fn around(center: f64, core_hw: f64, support_hw: f64) -> Result<Self, FuzzyError> {
        if !(0.0 <= core_hw && core_hw <= support_hw) {
            return Err(FuzzyError::InvalidWidths {
                core: core_hw,
                support: support_hw,
            });
        }
        Self::new(
            center - support_hw,
            center - core_hw,
            center + core_hw,
            center + support_hw,
        )
    }

    pub fn breakpoints(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    /// Membership degree at `x`.
    pub fn membership(&self, x: f64) -> f64 {
        if !x.is_finite() || x < self.a || x > self.d {
            return 0.0;
        }
        if x >= self.b && x <= self.c {
            return 1.0;
        }
        if x < self.b {
            // a < x < b, and a == b is covered by the core branch
            (x - self.a) / (self.b - self.a)
        } else {
            (self.d - x) / (self.d - self.c)
        }
    }
}

impl TryFrom<[f64; 4]> for Trapezoid {
    type Error = FuzzyError;

    fn try_from(v: [f64; 4]) -> Result<Self, Self::Error> {
        Self::new(v[0], v[1], v[2], v[3])
    }
}

impl From<Trapezoid> for [f64; 4] {
    fn from(t: Trapezoid) -> Self {
        t.breakpoints()
    }
}

/// Arithmetic mean of membership degrees; the premise aggregator.
pub fn mean(values: &[f64]) -> Result<f64, FuzzyError> {
    if values.is_empty() {
        return Err(FuzzyError::EmptyInput);
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}
