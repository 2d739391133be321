//! 3-D vehicle face models, camera poses and pinhole projection to
//! reference segment descriptors.
//!
//! A vehicle body is a list of planar faces; projecting the visible faces
//! through a calibrated camera yields one descriptor per face. The
//! resulting [`ClassModel`] is the per-class reference the rule induction
//! works from, with segment 0 fixed as the anchor.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::descriptors::{FrameOrientation, SegmentDescriptor};

/// Allowed out-of-plane deviation of a face vertex, in meters.
pub const PLANARITY_TOL: f64 = 1e-6;
/// Projected faces below this area (px^2) are rejected as degenerate.
pub const MIN_PROJECTED_AREA: f64 = 1e-6;
/// Allowed deviation of the camera rotation from orthonormality.
pub const ROTATION_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("face '{label}' needs at least 3 vertices, got {count}")]
    TooFewVertices { label: String, count: usize },
    #[error("face '{label}' contains a non-finite vertex")]
    NonFiniteVertex { label: String },
    #[error("face '{label}' has a degenerate outline (zero normal)")]
    DegenerateFace { label: String },
    #[error("face '{label}' is not planar: vertex deviates {deviation} m from the face plane")]
    NonPlanar { label: String, deviation: f64 },
    #[error("face '{label}' outline self-intersects")]
    SelfIntersecting { label: String },
    #[error("model has no faces")]
    NoFaces,
    #[error("camera rotation is not orthonormal within {ROTATION_TOL}")]
    NonOrthonormalRotation,
    #[error("camera focal length must be positive, got {0}")]
    NonPositiveFocal(f64),
    #[error("camera pose contains a non-finite value")]
    NonFiniteCamera,
    #[error("camera position and look-at target coincide")]
    DegenerateLookAt,
    #[error("face '{label}' has a vertex at or behind the camera (Z = {z})")]
    FaceBehindCamera { label: String, z: f64 },
    #[error("face '{label}' projects to area {area} px^2, below {MIN_PROJECTED_AREA}")]
    DegenerateProjection { label: String, area: f64 },
    #[error("anchor label '{0}' does not name any face")]
    UnknownAnchorLabel(String),
    #[error("anchor face '{0}' is not visible from this camera")]
    AnchorNotVisible(String),
    #[error("{visible} visible face(s); a class model needs at least 2")]
    TooFewVisibleFaces { visible: usize },
    #[error("class model needs at least 2 segments, got {0}")]
    TooFewSegments(usize),
    #[error("unknown vehicle class '{0}'")]
    UnknownClass(String),
}

/// The five vehicle classes the engine distinguishes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VehicleClass {
    PersonalCar,
    Van,
    Truck,
    Bus,
    TractorTrailer,
}

impl VehicleClass {
    pub const ALL: [VehicleClass; 5] = [
        VehicleClass::PersonalCar,
        VehicleClass::Van,
        VehicleClass::Truck,
        VehicleClass::Bus,
        VehicleClass::TractorTrailer,
    ];

    pub fn id(self) -> &'static str {
        match self {
            VehicleClass::PersonalCar => "personal_car",
            VehicleClass::Van => "van",
            VehicleClass::Truck => "truck",
            VehicleClass::Bus => "bus",
            VehicleClass::TractorTrailer => "tractor_trailer",
        }
    }
}

impl fmt::Display for VehicleClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for VehicleClass {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        VehicleClass::ALL
            .into_iter()
            .find(|c| c.id() == s)
            .ok_or_else(|| ModelError::UnknownClass(s.to_owned()))
    }
}

/// One planar polygonal face of a vehicle body, in meters.
///
/// Vertex winding encodes the outward normal (right-hand rule); the
/// back-face test relies on it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Face3D {
    pub label: String,
    pub vertices: Vec<[f64; 3]>,
}

impl Face3D {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.vertices.len() < 3 {
            return Err(ModelError::TooFewVertices {
                label: self.label.clone(),
                count: self.vertices.len(),
            });
        }
        if self
            .vertices
            .iter()
            .any(|v| v.iter().any(|x| !x.is_finite()))
        {
            return Err(ModelError::NonFiniteVertex {
                label: self.label.clone(),
            });
        }
        let normal = self.newell_normal();
        if normal.norm() <= 1e-12 {
            return Err(ModelError::DegenerateFace {
                label: self.label.clone(),
            });
        }
        let unit = normal.normalize();
        let centroid = self.vertex_mean();
        for v in &self.vertices {
            let deviation = (Vector3::from(*v) - centroid).dot(&unit).abs();
            if deviation > PLANARITY_TOL {
                return Err(ModelError::NonPlanar {
                    label: self.label.clone(),
                    deviation,
                });
            }
        }
        if self.outline_self_intersects(&unit) {
            return Err(ModelError::SelfIntersecting {
                label: self.label.clone(),
            });
        }
        Ok(())
    }

    /// Newell normal; length is twice the face area, direction follows the
    /// vertex winding.
    pub fn newell_normal(&self) -> Vector3<f64> {
        let mut n = Vector3::zeros();
        let v = &self.vertices;
        for i in 0..v.len() {
            let p = v[i];
            let q = v[(i + 1) % v.len()];
            n.x += (p[1] - q[1]) * (p[2] + q[2]);
            n.y += (p[2] - q[2]) * (p[0] + q[0]);
            n.z += (p[0] - q[0]) * (p[1] + q[1]);
        }
        n
    }

    pub fn vertex_mean(&self) -> Vector3<f64> {
        let sum: Vector3<f64> = self.vertices.iter().map(|v| Vector3::from(*v)).sum();
        sum / self.vertices.len() as f64
    }

    /// Checks for crossing edges in the face plane (strict crossings only;
    /// touching endpoints are allowed).
    fn outline_self_intersects(&self, unit_normal: &Vector3<f64>) -> bool {
        let drop = unit_normal.iamax();
        let keep: [usize; 2] = match drop {
            0 => [1, 2],
            1 => [0, 2],
            _ => [0, 1],
        };
        let pts: Vec<[f64; 2]> = self
            .vertices
            .iter()
            .map(|v| [v[keep[0]], v[keep[1]]])
            .collect();
        let n = pts.len();
        for i in 0..n {
            for j in (i + 1)..n {
                // skip edges sharing a vertex
                if j == i + 1 || (i == 0 && j == n - 1) {
                    continue;
                }
                let (a, b) = (pts[i], pts[(i + 1) % n]);
                let (c, d) = (pts[j], pts[(j + 1) % n]);
                if segments_cross(a, b, c, d) {
                    return true;
                }
            }
        }
        false
    }
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn segments_cross(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

/// A 3-D face model of one vehicle class.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VehicleModel3D {
    #[serde(rename = "class")]
    pub class_id: VehicleClass,
    pub faces: Vec<Face3D>,
    /// Label of the face to use as the anchor segment; largest projected
    /// face when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor: Option<String>,
}

impl VehicleModel3D {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.faces.is_empty() {
            return Err(ModelError::NoFaces);
        }
        for face in &self.faces {
            face.validate()?;
        }
        if let Some(anchor) = &self.anchor {
            if !self.faces.iter().any(|f| &f.label == anchor) {
                return Err(ModelError::UnknownAnchorLabel(anchor.clone()));
            }
        }
        Ok(())
    }

    pub fn from_json(json: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(json)
    }
}

/// Calibrated pinhole camera: world-to-camera rotation and position plus
/// focal length and principal point in pixels.
///
/// Rotation rows are the camera's right, down and forward axes, so camera
/// coordinates are `R (p - position)` with Z along the view direction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CameraPose {
    pub position: [f64; 3],
    pub rotation: [[f64; 3]; 3],
    pub focal: f64,
    pub principal: [f64; 2],
}

impl CameraPose {
    pub fn validate(&self) -> Result<(), ModelError> {
        let finite = self.position.iter().all(|v| v.is_finite())
            && self.rotation.iter().flatten().all(|v| v.is_finite())
            && self.focal.is_finite()
            && self.principal.iter().all(|v| v.is_finite());
        if !finite {
            return Err(ModelError::NonFiniteCamera);
        }
        if self.focal <= 0.0 {
            return Err(ModelError::NonPositiveFocal(self.focal));
        }
        let r = self.rotation_matrix();
        let gram = r.transpose() * r;
        let deviation = (gram - Matrix3::identity()).abs().max();
        if deviation > ROTATION_TOL {
            return Err(ModelError::NonOrthonormalRotation);
        }
        Ok(())
    }

    /// Pose looking from `position` toward `target` with the given world-up
    /// hint; image x runs along camera-right, image y along camera-down.
    pub fn look_at(
        position: [f64; 3],
        target: [f64; 3],
        up: [f64; 3],
        focal: f64,
        principal: [f64; 2],
    ) -> Result<Self, ModelError> {
        let pos = Vector3::from(position);
        let gaze = Vector3::from(target) - pos;
        if gaze.norm() <= 1e-12 {
            return Err(ModelError::DegenerateLookAt);
        }
        let forward = gaze.normalize();
        let right = forward.cross(&Vector3::from(up));
        if right.norm() <= 1e-12 {
            return Err(ModelError::DegenerateLookAt);
        }
        let right = right.normalize();
        let down = forward.cross(&right).normalize();
        let pose = Self {
            position,
            rotation: [
                [right.x, right.y, right.z],
                [down.x, down.y, down.z],
                [forward.x, forward.y, forward.z],
            ],
            focal,
            principal,
        };
        pose.validate()?;
        Ok(pose)
    }

    pub fn rotation_matrix(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|r, c| self.rotation[r][c])
    }

    /// World point to camera coordinates (Z positive in front).
    pub fn to_camera(&self, p: [f64; 3]) -> Vector3<f64> {
        self.rotation_matrix() * (Vector3::from(p) - Vector3::from(self.position))
    }

    /// World point to image pixel coordinates; `None` at or behind the
    /// camera plane.
    pub fn project_point(&self, p: [f64; 3]) -> Option<[f64; 2]> {
        let c = self.to_camera(p);
        if c.z <= 0.0 {
            return None;
        }
        Some([
            self.focal * c.x / c.z + self.principal[0],
            self.focal * c.y / c.z + self.principal[1],
        ])
    }

    pub fn from_json(json: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(json)
    }
}

/// Descriptor of a simple polygon: shoelace area, shoelace centroid,
/// vertex envelope. `None` when the area is below [`MIN_PROJECTED_AREA`].
pub fn polygon_descriptor(points: &[[f64; 2]]) -> Option<SegmentDescriptor> {
    if points.len() < 3 {
        return None;
    }
    let mut twice_signed = 0.0;
    let mut cx = 0.0;
    let mut cy = 0.0;
    for i in 0..points.len() {
        let [x0, y0] = points[i];
        let [x1, y1] = points[(i + 1) % points.len()];
        let cross = x0 * y1 - x1 * y0;
        twice_signed += cross;
        cx += (x0 + x1) * cross;
        cy += (y0 + y1) * cross;
    }
    let area = twice_signed.abs() / 2.0;
    if area < MIN_PROJECTED_AREA {
        return None;
    }
    let scale = 1.0 / (3.0 * twice_signed);
    let (x_min, x_max) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p[0]), hi.max(p[0]))
        });
    let (y_min, y_max) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p[1]), hi.max(p[1]))
        });
    Some(SegmentDescriptor {
        area,
        cx: cx * scale,
        cy: cy * scale,
        x_min,
        x_max,
        y_min,
        y_max,
    })
}

/// Reference segments of one class: the projected model faces, anchor
/// first, in the frame the rules will be evaluated in.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassModel {
    #[serde(rename = "class")]
    pub class_id: VehicleClass,
    pub segments: Vec<SegmentDescriptor>,
    pub labels: Vec<String>,
    pub frame: FrameOrientation,
}

impl ClassModel {
    pub fn new(
        class_id: VehicleClass,
        segments: Vec<SegmentDescriptor>,
        labels: Vec<String>,
        frame: FrameOrientation,
    ) -> Result<Self, ModelError> {
        if segments.len() < 2 {
            return Err(ModelError::TooFewSegments(segments.len()));
        }
        debug_assert_eq!(segments.len(), labels.len());
        Ok(Self {
            class_id,
            segments,
            labels,
            frame,
        })
    }

    /// Number of model segments n(c).
    pub fn n(&self) -> usize {
        self.segments.len()
    }

    /// The anchor reference segment (index 0 by construction).
    pub fn anchor(&self) -> &SegmentDescriptor {
        &self.segments[0]
    }

    /// Diagonal of the envelope of all model segments; the length scale
    /// for offset trapezoids and the merge adjacency gate.
    pub fn diagonal(&self) -> f64 {
        let env = SegmentDescriptor::merge_all(&self.segments)
            .expect("class model has at least 2 segments");
        (env.width().powi(2) + env.height().powi(2)).sqrt()
    }
}

/// Projects the camera-facing faces of a model to reference descriptors.
///
/// Every face must lie strictly in front of the camera. Back faces (Newell
/// normal pointing away from the camera) are dropped; the anchor face goes
/// first, the rest keep model order. No inter-face occlusion is computed.
pub fn project_model(m: &VehicleModel3D, cam: &CameraPose) -> Result<ClassModel, ModelError> {
    m.validate()?;
    cam.validate()?;
    for face in &m.faces {
        for v in &face.vertices {
            let z = cam.to_camera(*v).z;
            if z <= 0.0 {
                return Err(ModelError::FaceBehindCamera {
                    label: face.label.clone(),
                    z,
                });
            }
        }
    }

    let cam_pos = Vector3::from(cam.position);
    let mut projected: Vec<(String, SegmentDescriptor)> = Vec::new();
    for face in &m.faces {
        let view = face.vertex_mean() - cam_pos;
        if face.newell_normal().dot(&view) >= 0.0 {
            continue;
        }
        let points: Vec<[f64; 2]> = face
            .vertices
            .iter()
            .map(|v| {
                cam.project_point(*v)
                    .expect("front-of-camera checked above")
            })
            .collect();
        let descriptor =
            polygon_descriptor(&points).ok_or_else(|| ModelError::DegenerateProjection {
                label: face.label.clone(),
                area: polygon_area(&points),
            })?;
        projected.push((face.label.clone(), descriptor));
    }

    if projected.len() < 2 {
        return Err(ModelError::TooFewVisibleFaces {
            visible: projected.len(),
        });
    }

    let anchor_idx = match &m.anchor {
        Some(label) => projected
            .iter()
            .position(|(l, _)| l == label)
            .ok_or_else(|| ModelError::AnchorNotVisible(label.clone()))?,
        None => projected
            .iter()
            .enumerate()
            .max_by(|(i, (_, a)), (j, (_, b))| {
                // largest area wins; earlier face on exact ties
                a.area.partial_cmp(&b.area).unwrap().then(j.cmp(i))
            })
            .map(|(i, _)| i)
            .expect("projected is nonempty"),
    };

    let anchor = projected.remove(anchor_idx);
    let mut ordered = vec![anchor];
    ordered.extend(projected);
    let (labels, segments) = ordered.into_iter().unzip();
    ClassModel::new(m.class_id, segments, labels, FrameOrientation::identity())
}

fn polygon_area(points: &[[f64; 2]]) -> f64 {
    let mut twice = 0.0;
    for i in 0..points.len() {
        let [x0, y0] = points[i];
        let [x1, y1] = points[(i + 1) % points.len()];
        twice += x0 * y1 - x1 * y0;
    }
    twice.abs() / 2.0
}
