//! Bundled reference assets: five boxy vehicle models with realistic
//! meter dimensions and one roadside camera pose.
//!
//! The dimensions are illustrative; any model/camera pair in the same
//! JSON formats works through the same code paths.

use crate::model::{project_model, CameraPose, ClassModel, VehicleClass, VehicleModel3D};

pub fn model_json(class: VehicleClass) -> &'static str {
    match class {
        VehicleClass::PersonalCar => include_str!("../models/personal_car.json"),
        VehicleClass::Van => include_str!("../models/van.json"),
        VehicleClass::Truck => include_str!("../models/truck.json"),
        VehicleClass::Bus => include_str!("../models/bus.json"),
        VehicleClass::TractorTrailer => include_str!("../models/tractor_trailer.json"),
    }
}

pub fn camera_json() -> &'static str {
    include_str!("../models/camera.json")
}

pub fn model(class: VehicleClass) -> VehicleModel3D {
    VehicleModel3D::from_json(model_json(class)).expect("bundled model parses")
}

pub fn models() -> Vec<VehicleModel3D> {
    VehicleClass::ALL.into_iter().map(model).collect()
}

pub fn camera() -> CameraPose {
    CameraPose::from_json(camera_json()).expect("bundled camera parses")
}

/// The class model seen by the bundled camera.
pub fn class_model(class: VehicleClass) -> ClassModel {
    project_model(&model(class), &camera()).expect("bundled model projects")
}

pub fn class_models() -> Vec<ClassModel> {
    VehicleClass::ALL.into_iter().map(class_model).collect()
}
