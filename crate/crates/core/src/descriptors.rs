//! Segment descriptors and the merging algebra.
//!
//! A segment is summarized by a 7-tuple: area, mass center and axis-aligned
//! bounding box. Two descriptors of disjoint pixel sets merge into the
//! descriptor of the union without touching pixel data: areas add, mass
//! centers combine as the area-weighted mean and bounding boxes take the
//! componentwise envelope. The operation is commutative and associative,
//! so fragment sets can be folded in any order.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Height below which a segment has no usable shape coefficient.
pub const DEGENERATE_HEIGHT_EPS: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum DescriptorError {
    #[error("segment area must be positive, got {0}")]
    NonPositiveArea(f64),
    #[error("bounding box interval inverted: [{min}, {max}]")]
    InvertedBbox { min: f64, max: f64 },
    #[error("mass center ({cx}, {cy}) lies outside the bounding box")]
    CenterOutsideBbox { cx: f64, cy: f64 },
    #[error("descriptor contains a non-finite value")]
    NonFinite,
    #[error("segment height is below {DEGENERATE_HEIGHT_EPS}; shape coefficient undefined")]
    DegenerateSegment,
    #[error("empty input")]
    EmptyInput,
}

/// Descriptor of one image segment: area, mass center, bounding box.
///
/// Coordinates are reals so that model-projected polygons and pixel-derived
/// segments share the same type. Serialized field names follow the
/// interchange record: `area, cx, cy, xmin, xmax, ymin, ymax`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentDescriptor {
    pub area: f64,
    pub cx: f64,
    pub cy: f64,
    #[serde(rename = "xmin")]
    pub x_min: f64,
    #[serde(rename = "xmax")]
    pub x_max: f64,
    #[serde(rename = "ymin")]
    pub y_min: f64,
    #[serde(rename = "ymax")]
    pub y_max: f64,
}

impl SegmentDescriptor {
    /// Builds a descriptor, rejecting non-positive area, inverted bounding
    /// boxes and mass centers outside the box.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        area: f64,
        cx: f64,
        cy: f64,
        x_min: f64,
        x_max: f64,
        y_min: f64,
        y_max: f64,
    ) -> Result<Self, DescriptorError> {
        let s = Self {
            area,
            cx,
            cy,
            x_min,
            x_max,
            y_min,
            y_max,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), DescriptorError> {
        let fields = [
            self.area, self.cx, self.cy, self.x_min, self.x_max, self.y_min, self.y_max,
        ];
        if fields.iter().any(|v| !v.is_finite()) {
            return Err(DescriptorError::NonFinite);
        }
        if self.area <= 0.0 {
            return Err(DescriptorError::NonPositiveArea(self.area));
        }
        if self.x_min > self.x_max {
            return Err(DescriptorError::InvertedBbox {
                min: self.x_min,
                max: self.x_max,
            });
        }
        if self.y_min > self.y_max {
            return Err(DescriptorError::InvertedBbox {
                min: self.y_min,
                max: self.y_max,
            });
        }
        if self.cx < self.x_min
            || self.cx > self.x_max
            || self.cy < self.y_min
            || self.cy > self.y_max
        {
            return Err(DescriptorError::CenterOutsideBbox {
                cx: self.cx,
                cy: self.cy,
            });
        }
        Ok(())
    }

    /// Bounding-box width.
    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    /// Bounding-box height.
    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    /// True when the segment is too flat to carry a shape coefficient.
    pub fn is_degenerate(&self) -> bool {
        self.height() <= DEGENERATE_HEIGHT_EPS
    }

    /// Shape coefficient `q = width / height`.
    pub fn shape_coefficient(&self) -> Result<f64, DescriptorError> {
        if self.is_degenerate() {
            return Err(DescriptorError::DegenerateSegment);
        }
        Ok(self.width() / self.height())
    }

    /// Merges two descriptors of disjoint pixel sets.
    ///
    /// Disjointness is a caller contract; it cannot be checked from the
    /// descriptors alone. On overlapping sets the area (and hence the mass
    /// center) of the result is wrong.
    pub fn merge(&self, other: &Self) -> Self {
        let area = self.area + other.area;
        Self {
            area,
            cx: (self.area * self.cx + other.area * other.cx) / area,
            cy: (self.area * self.cy + other.area * other.cy) / area,
            x_min: self.x_min.min(other.x_min),
            x_max: self.x_max.max(other.x_max),
            y_min: self.y_min.min(other.y_min),
            y_max: self.y_max.max(other.y_max),
        }
    }

    /// Left fold of [`merge`](Self::merge) over a nonempty slice.
    pub fn merge_all(parts: &[Self]) -> Result<Self, DescriptorError> {
        let (first, rest) = parts.split_first().ok_or(DescriptorError::EmptyInput)?;
        Ok(rest.iter().fold(*first, |acc, s| acc.merge(s)))
    }

    /// Descriptor translated by `(dx, dy)`; area and extents are unchanged.
    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        Self {
            area: self.area,
            cx: self.cx + dx,
            cy: self.cy + dy,
            x_min: self.x_min + dx,
            x_max: self.x_max + dx,
            y_min: self.y_min + dy,
            y_max: self.y_max + dy,
        }
    }
}

/// Rotation of the working x-y frame relative to the image axes.
///
/// Applied once at ingestion: pixel coordinates are rotated before
/// descriptor accumulation, and all algebra afterwards is axis-aligned.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameOrientation {
    /// Angle in radians, normalized to `[-pi, pi)`.
    pub angle: f64,
}

impl FrameOrientation {
    pub fn new(angle: f64) -> Self {
        let two_pi = 2.0 * std::f64::consts::PI;
        let mut a = angle.rem_euclid(two_pi);
        if a >= std::f64::consts::PI {
            a -= two_pi;
        }
        Self { angle: a }
    }

    pub fn identity() -> Self {
        Self { angle: 0.0 }
    }

    /// Rotates a point from image axes into the working frame.
    pub fn rotate(&self, x: f64, y: f64) -> (f64, f64) {
        if self.angle == 0.0 {
            return (x, y);
        }
        let (sin, cos) = self.angle.sin_cos();
        (x * cos - y * sin, x * sin + y * cos)
    }
}

impl Default for FrameOrientation {
    fn default() -> Self {
        Self::identity()
    }
}

/// One line of the descriptor interchange format: a segment plus an
/// optional caller tag. Emitted field order is fixed; readers accept any.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DescriptorRecord {
    #[serde(flatten)]
    pub segment: SegmentDescriptor,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tag: Option<String>,
}

#[derive(Debug, Error)]
pub enum SceneReadError {
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        source: serde_json::Error,
    },
    #[error("line {line}: {source}")]
    Invalid {
        line: usize,
        source: DescriptorError,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Reads a JSON-lines scene, validating each descriptor. Tags are dropped.
pub fn read_scene<R: BufRead>(reader: R) -> Result<Vec<SegmentDescriptor>, SceneReadError> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: DescriptorRecord =
            serde_json::from_str(&line).map_err(|source| SceneReadError::Json {
                line: idx + 1,
                source,
            })?;
        record
            .segment
            .validate()
            .map_err(|source| SceneReadError::Invalid {
                line: idx + 1,
                source,
            })?;
        out.push(record.segment);
    }
    Ok(out)
}

/// Writes segments as JSON lines; `tags` (when given) must match in length.
pub fn write_scene<W: Write>(
    mut writer: W,
    segments: &[SegmentDescriptor],
    tags: Option<&[String]>,
) -> io::Result<()> {
    for (i, segment) in segments.iter().enumerate() {
        let record = DescriptorRecord {
            segment: *segment,
            tag: tags.map(|t| t[i].clone()),
        };
        serde_json::to_writer(&mut writer, &record)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}
