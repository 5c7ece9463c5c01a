//! Kinematics, workspace analysis and sizing of a decoupled 6-DOF haptic
//! device: an orthogonal 3-DOF translational parallel stage carrying a hybrid
//! 2R+1R spherical wrist, with base-mounted wrist motors driving the wrist
//! through double universal joints.
//!
//! Position and orientation are solved independently:
//!
//! * [`orthoglide`] handles the translational stage,
//! * [`wrist`] the hybrid wrist,
//! * [`transmission`] the Cardan shafts between the base motors and the wrist,
//! * [`device`] assembles them into full 6-DOF kinematics and statics.
//!
//! [`workspace`] maps the reachable set and its conditioning and finds the
//! largest axis-aligned cube inside it; [`optimize`] sizes the leg length for
//! a requested cube and amplification bound.

pub mod device;
pub mod error;
pub mod model;
pub mod optimize;
pub mod orthoglide;
pub mod transmission;
pub mod workspace;
pub mod wrist;

pub use error::ErrorName;
pub use model::{
    deg_to_rad, load_geometry, quaternion_distance, rad_to_deg, serialize_geometry,
    validate_geometry, CardanChainState, DeviceGeometry, GeometryError, Legs, Pose,
    TranslationJoints, ValidatedGeometry, Variant, WristJoints,
};

pub use nalgebra::{Matrix3, Matrix6, Quaternion, UnitQuaternion, Vector3, Vector6};
