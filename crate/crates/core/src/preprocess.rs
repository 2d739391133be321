//! Scene preprocessing: descriptor extraction from label masks and
//! model-guided fragment merging.
//!
//! Extraction turns each nonzero label of a mask into one descriptor.
//! Merging rebuilds oversegmented regions: starting from singleton
//! fragments, the spatially adjacent pair whose union most improves its
//! best shape-rule score is merged, until no merge improves anything;
//! groups that never reach the similarity threshold are discarded.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::descriptors::{FrameOrientation, SegmentDescriptor};
use crate::rulebase::RuleBase;

#[derive(Debug, Error)]
pub enum PreprocessError {
    #[error("mask dimensions must be positive, got {width}x{height}")]
    BadDimensions { width: usize, height: usize },
    #[error("mask needs {expected} labels for {width}x{height}, got {got}")]
    WrongLabelCount {
        width: usize,
        height: usize,
        expected: usize,
        got: usize,
    },
    #[error("mask text line {line}: {reason}")]
    BadText { line: usize, reason: String },
    #[error("not a binary PGM (P5) file: {0}")]
    BadPgm(String),
    #[error("PGM maxval {0} unsupported (must be 1..=255)")]
    BadPgmMaxval(u32),
    #[error("PGM pixel data truncated: expected {expected} bytes, got {got}")]
    TruncatedPgm { expected: usize, got: usize },
    #[error("mask has no nonzero labels")]
    EmptyMask,
    #[error("similarity threshold must lie in [0, 1], got {0}")]
    TauOutOfRange(f64),
    #[error("adjacency gate must be nonnegative and finite, got {0}")]
    BadAdjacencyGate(f64),
}

/// Labeled segmentation mask: 0 is background, equal positive labels form
/// one segment (connectivity is the labeler's concern).
#[derive(Debug, Clone)]
pub struct LabelMask {
    width: usize,
    height: usize,
    labels: Vec<u32>,
}

impl LabelMask {
    pub fn new(width: usize, height: usize, labels: Vec<u32>) -> Result<Self, PreprocessError> {
        if width == 0 || height == 0 {
            return Err(PreprocessError::BadDimensions { width, height });
        }
        if labels.len() != width * height {
            return Err(PreprocessError::WrongLabelCount {
                width,
                height,
                expected: width * height,
                got: labels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            labels,
        })
    }

    /// Parses the text grid format: a "W H" header line, then H rows of W
    /// space-separated labels.
    pub fn from_text(input: &str) -> Result<Self, PreprocessError> {
        let mut lines = input
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (header_line, header) = lines.next().ok_or(PreprocessError::BadText {
            line: 1,
            reason: "missing header".to_owned(),
        })?;
        let dims: Vec<&str> = header.split_whitespace().collect();
        if dims.len() != 2 {
            return Err(PreprocessError::BadText {
                line: header_line + 1,
                reason: format!("header must be 'W H', got '{}'", header.trim()),
            });
        }
        let parse_dim = |s: &str| -> Result<usize, PreprocessError> {
            s.parse().map_err(|_| PreprocessError::BadText {
                line: header_line + 1,
                reason: format!("bad dimension '{s}'"),
            })
        };
        let width = parse_dim(dims[0])?;
        let height = parse_dim(dims[1])?;
        let mut labels = Vec::with_capacity(width * height);
        let mut rows = 0;
        for (idx, row) in lines {
            let before = labels.len();
            for token in row.split_whitespace() {
                let v: u32 = token.parse().map_err(|_| PreprocessError::BadText {
                    line: idx + 1,
                    reason: format!("bad label '{token}'"),
                })?;
                labels.push(v);
            }
            if labels.len() - before != width {
                return Err(PreprocessError::BadText {
                    line: idx + 1,
                    reason: format!("expected {} labels, got {}", width, labels.len() - before),
                });
            }
            rows += 1;
            if rows == height {
                break;
            }
        }
        if rows != height {
            return Err(PreprocessError::BadText {
                line: 0,
                reason: format!("expected {height} rows, got {rows}"),
            });
        }
        Self::new(width, height, labels)
    }

    /// Parses a binary PGM (P5) as a foreground mask (nonzero = object)
    /// and labels 4-connected components in row-major discovery order.
    pub fn from_pgm(bytes: &[u8]) -> Result<Self, PreprocessError> {
        let mut pos = 0;
        let mut fields = Vec::with_capacity(4);
        // header: "P5", width, height, maxval, separated by whitespace,
        // with '#' comments allowed
        while fields.len() < 4 {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if start == pos {
                return Err(PreprocessError::BadPgm("truncated header".to_owned()));
            }
            fields.push(
                std::str::from_utf8(&bytes[start..pos])
                    .map_err(|_| PreprocessError::BadPgm("non-ASCII header".to_owned()))?
                    .to_owned(),
            );
        }
        if fields[0] != "P5" {
            return Err(PreprocessError::BadPgm(format!(
                "magic '{}', expected 'P5'",
                fields[0]
            )));
        }
        let parse = |s: &str| -> Result<usize, PreprocessError> {
            s.parse()
                .map_err(|_| PreprocessError::BadPgm(format!("bad header field '{s}'")))
        };
        let width = parse(&fields[1])?;
        let height = parse(&fields[2])?;
        let maxval = parse(&fields[3])? as u32;
        if !(1..=255).contains(&maxval) {
            return Err(PreprocessError::BadPgmMaxval(maxval));
        }
        // exactly one whitespace byte separates header and pixel data
        pos += 1;
        let expected = width
            .checked_mul(height)
            .ok_or_else(|| PreprocessError::BadPgm("dimensions overflow".to_owned()))?;
        let got = bytes.len().saturating_sub(pos);
        if got < expected {
            return Err(PreprocessError::TruncatedPgm { expected, got });
        }
        let data = &bytes[pos..pos + expected];
        Self::label_components(width, height, |x, y| data[y * width + x] != 0)
    }

    /// 4-connectivity flood labeling of a foreground predicate.
    fn label_components<F: Fn(usize, usize) -> bool>(
        width: usize,
        height: usize,
        foreground: F,
    ) -> Result<Self, PreprocessError> {
        if width == 0 || height == 0 {
            return Err(PreprocessError::BadDimensions { width, height });
        }
        let mut labels = vec![0u32; width * height];
        let mut next = 0u32;
        let mut queue = VecDeque::new();
        for start_y in 0..height {
            for start_x in 0..width {
                let idx = start_y * width + start_x;
                if labels[idx] != 0 || !foreground(start_x, start_y) {
                    continue;
                }
                next += 1;
                labels[idx] = next;
                queue.push_back((start_x, start_y));
                while let Some((x, y)) = queue.pop_front() {
                    let mut visit = |nx: usize, ny: usize| {
                        let nidx = ny * width + nx;
                        if labels[nidx] == 0 && foreground(nx, ny) {
                            labels[nidx] = next;
                            queue.push_back((nx, ny));
                        }
                    };
                    if x > 0 {
                        visit(x - 1, y);
                    }
                    if x + 1 < width {
                        visit(x + 1, y);
                    }
                    if y > 0 {
                        visit(x, y - 1);
                    }
                    if y + 1 < height {
                        visit(x, y + 1);
                    }
                }
            }
        }
        Self::new(width, height, labels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn label_at(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }
}

/// One extracted segment: the mask label it came from plus its descriptor.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSegment {
    pub label: u32,
    pub segment: SegmentDescriptor,
}

/// Computes one descriptor per nonzero label: area = pixel count, mass
/// center = mean pixel coordinate, bbox = pixel-coordinate envelope.
/// Pixel (column x, row y) sits at coordinates (x, y), rotated by `frame`
/// before accumulation. Output is ordered by label.
pub fn extract_segments(
    mask: &LabelMask,
    frame: FrameOrientation,
) -> Result<Vec<LabeledSegment>, PreprocessError> {
    #[derive(Clone)]
    struct Acc {
        count: u64,
        sum_x: f64,
        sum_y: f64,
        x_min: f64,
        x_max: f64,
        y_min: f64,
        y_max: f64,
    }
    let empty = Acc {
        count: 0,
        sum_x: 0.0,
        sum_y: 0.0,
        x_min: f64::INFINITY,
        x_max: f64::NEG_INFINITY,
        y_min: f64::INFINITY,
        y_max: f64::NEG_INFINITY,
    };
    let max_label = mask.labels.iter().copied().max().unwrap_or(0) as usize;
    if max_label == 0 {
        return Err(PreprocessError::EmptyMask);
    }
    let mut accs = vec![empty; max_label + 1];
    for row in 0..mask.height {
        for col in 0..mask.width {
            let label = mask.label_at(col, row);
            if label == 0 {
                continue;
            }
            let (x, y) = frame.rotate(col as f64, row as f64);
            let acc = &mut accs[label as usize];
            acc.count += 1;
            acc.sum_x += x;
            acc.sum_y += y;
            acc.x_min = acc.x_min.min(x);
            acc.x_max = acc.x_max.max(x);
            acc.y_min = acc.y_min.min(y);
            acc.y_max = acc.y_max.max(y);
        }
    }
    let mut out = Vec::new();
    for (label, acc) in accs.iter().enumerate().skip(1) {
        if acc.count == 0 {
            continue;
        }
        let n = acc.count as f64;
        out.push(LabeledSegment {
            label: label as u32,
            segment: SegmentDescriptor {
                area: n,
                cx: acc.sum_x / n,
                cy: acc.sum_y / n,
                x_min: acc.x_min,
                x_max: acc.x_max,
                y_min: acc.y_min,
                y_max: acc.y_max,
            },
        });
    }
    Ok(out)
}

/// One merged group: which input fragments it contains and how well the
/// union matches its best model segment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MergeGroup {
    /// Input-segment indices, ascending.
    pub members: Vec<usize>,
    /// Best-matching model segment index.
    pub model_segment: usize,
    /// Shape membership of the merged descriptor against that segment.
    pub shape_membership: f64,
}

/// Outcome of model-guided merging: retained groups (a partition of a
/// subset of the input indices) and the fragments that never reached the
/// threshold.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MergePlan {
    pub groups: Vec<MergeGroup>,
    pub discarded: Vec<usize>,
}

/// Shortest distance between two axis-aligned boxes (0 when they overlap
/// or touch).
fn bbox_gap(a: &SegmentDescriptor, b: &SegmentDescriptor) -> f64 {
    let gx = (b.x_min - a.x_max).max(a.x_min - b.x_max).max(0.0);
    let gy = (b.y_min - a.y_max).max(a.y_min - b.y_max).max(0.0);
    gx.hypot(gy)
}

/// Greedy model-guided merging of fragment descriptors.
///
/// `tau` is the retention threshold on the best shape membership; `gamma`
/// scales the adjacency gate (two groups are mergeable while their bbox
/// gap is at most `gamma` times the model diagonal).
pub fn merge_to_model(
    es_prime: &[SegmentDescriptor],
    rb: &RuleBase,
    tau: f64,
    gamma: f64,
) -> Result<(Vec<SegmentDescriptor>, MergePlan), PreprocessError> {
    if !(0.0..=1.0).contains(&tau) || !tau.is_finite() {
        return Err(PreprocessError::TauOutOfRange(tau));
    }
    if !gamma.is_finite() || gamma < 0.0 {
        return Err(PreprocessError::BadAdjacencyGate(gamma));
    }

    struct Group {
        members: Vec<usize>,
        seg: SegmentDescriptor,
        best_model: usize,
        best_mu: f64,
    }

    let gate = gamma * rb.model_diagonal;
    let mut groups: Vec<Option<Group>> = es_prime
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let (best_model, best_mu) = rb.best_shape_match(s);
            Some(Group {
                members: vec![i],
                seg: *s,
                best_model,
                best_mu,
            })
        })
        .collect();

    loop {
        // best strictly-improving merge of two adjacent groups; ties go to
        // the lowest (min member, min member) pair
        let mut chosen: Option<(usize, usize, f64, SegmentDescriptor, usize, f64)> = None;
        for a in 0..groups.len() {
            let Some(ga) = groups[a].as_ref() else {
                continue;
            };
            for (b, slot) in groups.iter().enumerate().skip(a + 1) {
                let Some(gb) = slot.as_ref() else {
                    continue;
                };
                if bbox_gap(&ga.seg, &gb.seg) > gate {
                    continue;
                }
                let candidate = ga.seg.merge(&gb.seg);
                let (model, mu) = rb.best_shape_match(&candidate);
                let gain = mu - ga.best_mu.max(gb.best_mu);
                if gain <= 0.0 {
                    continue;
                }
                let better = match &chosen {
                    None => true,
                    Some((_, _, best_gain, ..)) => gain > *best_gain,
                };
                if better {
                    chosen = Some((a, b, gain, candidate, model, mu));
                }
            }
        }
        // groups are scanned in ascending min-member order, so the first
        // candidate seen at the best gain is the lowest index pair
        let Some((a, b, _, seg, model, mu)) = chosen else {
            break;
        };
        let gb = groups[b].take().expect("group b is alive");
        let ga = groups[a].as_mut().expect("group a is alive");
        ga.members.extend(gb.members);
        ga.members.sort_unstable();
        ga.seg = seg;
        ga.best_model = model;
        ga.best_mu = mu;
    }

    let mut merged = Vec::new();
    let mut plan = MergePlan {
        groups: Vec::new(),
        discarded: Vec::new(),
    };
    for group in groups.into_iter().flatten() {
        if group.best_mu >= tau {
            merged.push(group.seg);
            plan.groups.push(MergeGroup {
                members: group.members,
                model_segment: group.best_model,
                shape_membership: group.best_mu,
            });
        } else {
            plan.discarded.extend(group.members);
        }
    }
    plan.discarded.sort_unstable();
    Ok((merged, plan))
}
