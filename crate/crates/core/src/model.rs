//! Shared domain types: device geometry, joint records, poses and the
//! transmission state of one leg.
//!
//! Internally every length is in meters and every angle in radians. Files and
//! the command line use degrees; the conversion happens only in
//! [`load_geometry`] / [`serialize_geometry`] and in the CLI.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::ops::Deref;

use nalgebra::{UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::ErrorName;

/// Device family. Only the hybrid-wrist variant has a wrist model here.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    /// Translational stage + two-dof agile eye + embedded roll joint.
    #[serde(rename = "3T2R1R")]
    ThreeTTwoROneR,
    /// Translational stage + fully parallel three-dof agile eye.
    #[serde(rename = "3T3R")]
    ThreeTThreeR,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::ThreeTTwoROneR => f.write_str("3T2R1R"),
            Variant::ThreeTThreeR => f.write_str("3T3R"),
        }
    }
}

/// Dimensional parameters of the device.
///
/// The three prismatic axes are the fixed frame axes x, y and z. Base points
/// and platform offsets are collapsed to zero, so the constraint sphere of leg
/// `i` is centered at `rho_i * e_i` with radius `leg_length`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceGeometry {
    /// Parallelogram length `L` (m).
    pub leg_length: f64,
    /// Lower prismatic stroke limit (m). May be `-inf` for analysis.
    pub stroke_min: f64,
    /// Upper prismatic stroke limit (m). May be `+inf` for analysis.
    pub stroke_max: f64,
    /// Maximum angle between a parallelogram and its leg axis (rad).
    pub parallelogram_half_cone: f64,
    /// Symmetric limit on the first two wrist joints (rad).
    pub wrist_pitch_yaw_limit: f64,
    pub variant: Variant,
}

pub const DEFAULT_HALF_CONE_DEG: f64 = 60.0;
pub const DEFAULT_WRIST_LIMIT_DEG: f64 = 45.0;

impl Default for DeviceGeometry {
    fn default() -> Self {
        DeviceGeometry {
            leg_length: 1.0,
            stroke_min: 0.05,
            stroke_max: 2.0,
            parallelogram_half_cone: DEFAULT_HALF_CONE_DEG.to_radians(),
            wrist_pitch_yaw_limit: DEFAULT_WRIST_LIMIT_DEG.to_radians(),
            variant: Variant::ThreeTTwoROneR,
        }
    }
}

impl DeviceGeometry {
    /// Geometry with unbounded strokes, used for pure workspace studies.
    pub fn unlimited_strokes(leg_length: f64, half_cone: f64) -> Self {
        DeviceGeometry {
            leg_length,
            stroke_min: f64::NEG_INFINITY,
            stroke_max: f64::INFINITY,
            parallelogram_half_cone: half_cone,
            ..Default::default()
        }
    }

    pub fn with_leg_length(mut self, leg_length: f64) -> Self {
        self.leg_length = leg_length;
        self
    }

    pub fn with_strokes(mut self, stroke_min: f64, stroke_max: f64) -> Self {
        self.stroke_min = stroke_min;
        self.stroke_max = stroke_max;
        self
    }

    pub fn validate(self) -> Result<ValidatedGeometry, GeometryError> {
        validate_geometry(self)
    }
}

/// A [`DeviceGeometry`] whose invariants have been checked.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ValidatedGeometry(DeviceGeometry);

impl ValidatedGeometry {
    pub fn geometry(&self) -> &DeviceGeometry {
        &self.0
    }

    pub fn into_inner(self) -> DeviceGeometry {
        self.0
    }
}

impl Deref for ValidatedGeometry {
    type Target = DeviceGeometry;

    fn deref(&self) -> &DeviceGeometry {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("leg length must be positive, got {0}")]
    NonPositiveLength(f64),
    #[error("stroke interval [{min}, {max}] is empty")]
    EmptyStroke { min: f64, max: f64 },
    #[error("{which} = {value} rad is outside its allowed range")]
    BadAngleLimit { which: &'static str, value: f64 },
    #[error("malformed geometry document: {0}")]
    Parse(String),
    #[error("geometry document does not match the schema: {0}")]
    Schema(String),
}

impl ErrorName for GeometryError {
    fn name(&self) -> &'static str {
        match self {
            GeometryError::NonPositiveLength(_) => "NonPositiveLength",
            GeometryError::EmptyStroke { .. } => "EmptyStroke",
            GeometryError::BadAngleLimit { .. } => "BadAngleLimit",
            GeometryError::Parse(_) => "ParseError",
            GeometryError::Schema(_) => "SchemaError",
        }
    }
}

pub fn validate_geometry(geom: DeviceGeometry) -> Result<ValidatedGeometry, GeometryError> {
    if !(geom.leg_length > 0.0) || !geom.leg_length.is_finite() {
        return Err(GeometryError::NonPositiveLength(geom.leg_length));
    }
    if !(geom.stroke_min < geom.stroke_max) {
        return Err(GeometryError::EmptyStroke {
            min: geom.stroke_min,
            max: geom.stroke_max,
        });
    }
    let cone = geom.parallelogram_half_cone;
    if !(cone > 0.0 && cone < FRAC_PI_2) {
        return Err(GeometryError::BadAngleLimit {
            which: "parallelogram_half_cone",
            value: cone,
        });
    }
    let wrist = geom.wrist_pitch_yaw_limit;
    if !(wrist > 0.0 && wrist <= FRAC_PI_2) {
        return Err(GeometryError::BadAngleLimit {
            which: "wrist_pitch_yaw_limit",
            value: wrist,
        });
    }
    Ok(ValidatedGeometry(geom))
}

/// On-disk layout of a geometry file. Angles are in degrees.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeometryFile {
    leg_length: f64,
    stroke: [f64; 2],
    #[serde(default = "default_half_cone_deg")]
    parallelogram_half_cone_deg: f64,
    #[serde(default = "default_wrist_limit_deg")]
    wrist_pitch_yaw_limit_deg: f64,
    #[serde(default = "default_variant")]
    variant: Variant,
}

fn default_half_cone_deg() -> f64 {
    DEFAULT_HALF_CONE_DEG
}

fn default_wrist_limit_deg() -> f64 {
    DEFAULT_WRIST_LIMIT_DEG
}

fn default_variant() -> Variant {
    Variant::ThreeTTwoROneR
}

/// Parses and validates a JSON geometry document.
///
/// ```json
/// {"leg_length":1.0,"stroke":[0.2,2.0],"parallelogram_half_cone_deg":60,
///  "wrist_pitch_yaw_limit_deg":45,"variant":"3T2R1R"}
/// ```
///
/// `parallelogram_half_cone_deg`, `wrist_pitch_yaw_limit_deg` and `variant`
/// are optional (60, 45 and `3T2R1R`).
pub fn load_geometry(text: &str) -> Result<ValidatedGeometry, GeometryError> {
    let file: GeometryFile = serde_json::from_str(text).map_err(|e| {
        use serde_json::error::Category;
        match e.classify() {
            Category::Data => GeometryError::Schema(e.to_string()),
            _ => GeometryError::Parse(e.to_string()),
        }
    })?;
    validate_geometry(DeviceGeometry {
        leg_length: file.leg_length,
        stroke_min: file.stroke[0],
        stroke_max: file.stroke[1],
        parallelogram_half_cone: deg_to_rad(file.parallelogram_half_cone_deg),
        wrist_pitch_yaw_limit: deg_to_rad(file.wrist_pitch_yaw_limit_deg),
        variant: file.variant,
    })
}

/// Writes a geometry in the [`load_geometry`] format.
///
/// Degree values are chosen so that loading the document reproduces the
/// stored radians bit for bit whenever such a degree value exists.
/// Infinite strokes cannot be represented in JSON and are written as `null`.
pub fn serialize_geometry(geom: &DeviceGeometry) -> String {
    let file = GeometryFile {
        leg_length: geom.leg_length,
        stroke: [geom.stroke_min, geom.stroke_max],
        parallelogram_half_cone_deg: exact_degrees(geom.parallelogram_half_cone),
        wrist_pitch_yaw_limit_deg: exact_degrees(geom.wrist_pitch_yaw_limit),
        variant: geom.variant,
    };
    serde_json::to_string(&file).expect("geometry serializes")
}

/// Degree-to-radian conversion used at every human-facing boundary.
pub fn deg_to_rad(deg: f64) -> f64 {
    deg * (std::f64::consts::PI / 180.0)
}

pub fn rad_to_deg(rad: f64) -> f64 {
    rad * (180.0 / std::f64::consts::PI)
}

// Searches a few ulps around the nominal conversion for a degree value that
// maps back onto `rad` exactly.
fn exact_degrees(rad: f64) -> f64 {
    let nominal = rad_to_deg(rad);
    if !nominal.is_finite() {
        return nominal;
    }
    let mut down = nominal;
    let mut up = nominal;
    for _ in 0..64 {
        if deg_to_rad(down) == rad {
            return down;
        }
        if deg_to_rad(up) == rad {
            return up;
        }
        down = down.next_down();
        up = up.next_up();
    }
    nominal
}

/// Actuated prismatic coordinates, one per orthogonal leg (m).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TranslationJoints {
    pub rho: Vector3<f64>,
}

impl TranslationJoints {
    pub fn new(rho1: f64, rho2: f64, rho3: f64) -> Self {
        TranslationJoints {
            rho: Vector3::new(rho1, rho2, rho3),
        }
    }
}

/// Wrist joint angles (rad): `theta1` about x, `theta2` about the rotated y,
/// `theta3` roll about the rotated z.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WristJoints {
    pub theta: Vector3<f64>,
}

impl WristJoints {
    pub fn new(theta1: f64, theta2: f64, theta3: f64) -> Self {
        WristJoints {
            theta: Vector3::new(theta1, theta2, theta3),
        }
    }

    pub fn from_degrees(theta1: f64, theta2: f64, theta3: f64) -> Self {
        Self::new(deg_to_rad(theta1), deg_to_rad(theta2), deg_to_rad(theta3))
    }

    pub fn to_degrees(&self) -> [f64; 3] {
        [
            rad_to_deg(self.theta.x),
            rad_to_deg(self.theta.y),
            rad_to_deg(self.theta.z),
        ]
    }
}

/// End-effector position and orientation.
///
/// The quaternion is kept with a nonnegative scalar part so that equal
/// orientations compare equal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub position: Vector3<f64>,
    orientation: UnitQuaternion<f64>,
}

impl Pose {
    pub fn new(position: Vector3<f64>, orientation: UnitQuaternion<f64>) -> Self {
        Pose {
            position,
            orientation: canonical(orientation),
        }
    }

    pub fn identity_at(position: Vector3<f64>) -> Self {
        Self::new(position, UnitQuaternion::identity())
    }

    pub fn orientation(&self) -> UnitQuaternion<f64> {
        self.orientation
    }
}

/// Flips the quaternion sign so the scalar part is nonnegative.
pub fn canonical(q: UnitQuaternion<f64>) -> UnitQuaternion<f64> {
    let q = UnitQuaternion::new_normalize(q.into_inner());
    if q.w < 0.0 {
        UnitQuaternion::new_unchecked(-q.into_inner())
    } else {
        q
    }
}

/// Euclidean distance between two unit quaternions, modulo the double cover.
pub fn quaternion_distance(a: &UnitQuaternion<f64>, b: &UnitQuaternion<f64>) -> f64 {
    let (a, b) = (a.as_ref().coords, b.as_ref().coords);
    (a - b).norm().min((a + b).norm())
}

/// Shaft angles along one leg's rotary transmission.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CardanChainState {
    /// Bend angle shared by both universal joints (rad).
    pub bend_angle: f64,
    /// Yoke phase of the first universal joint (rad).
    pub phase: f64,
    pub phi_motor: f64,
    pub phi_after_u1: f64,
    pub phi_after_u2: f64,
}

/// Set of leg indices (1-based in display) flagged by a per-leg check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Legs(pub [bool; 3]);

impl Legs {
    pub fn contains(&self, leg: usize) -> bool {
        (1..=3).contains(&leg) && self.0[leg - 1]
    }

    pub fn any(&self) -> bool {
        self.0.iter().any(|&b| b)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (1..=3).filter(move |&i| self.0[i - 1])
    }
}

impl fmt::Display for Legs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list: Vec<String> = self.iter().map(|i| i.to_string()).collect();
        f.write_str(&list.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn example() -> DeviceGeometry {
        DeviceGeometry {
            leg_length: 1.0,
            stroke_min: 0.2,
            stroke_max: 2.0,
            parallelogram_half_cone: 60f64.to_radians(),
            wrist_pitch_yaw_limit: 45f64.to_radians(),
            variant: Variant::ThreeTTwoROneR,
        }
    }

    #[test]
    fn valid_geometry_is_returned_unchanged() {
        let g = example();
        assert_eq!(*validate_geometry(g).unwrap(), g);
    }

    #[test]
    fn zero_leg_length_is_rejected() {
        let g = example().with_leg_length(0.0);
        assert!(matches!(
            validate_geometry(g),
            Err(GeometryError::NonPositiveLength(_))
        ));
    }

    #[test]
    fn empty_stroke_is_rejected() {
        let g = example().with_strokes(1.0, 1.0);
        assert!(matches!(
            validate_geometry(g),
            Err(GeometryError::EmptyStroke { .. })
        ));
    }

    #[test]
    fn angle_limits_are_checked() {
        let mut g = example();
        g.parallelogram_half_cone = FRAC_PI_2;
        assert_eq!(validate_geometry(g).unwrap_err().name(), "BadAngleLimit");
        let mut g = example();
        g.wrist_pitch_yaw_limit = 0.0;
        assert_eq!(validate_geometry(g).unwrap_err().name(), "BadAngleLimit");
        let mut g = example();
        g.wrist_pitch_yaw_limit = FRAC_PI_2;
        assert!(validate_geometry(g).is_ok());
    }

    #[test]
    fn loads_schema_example() {
        let text = r#"{"leg_length":1.0,"stroke":[0.2,2.0],"parallelogram_half_cone_deg":60,"wrist_pitch_yaw_limit_deg":45,"variant":"3T2R1R"}"#;
        let g = load_geometry(text).unwrap();
        assert_eq!(g.leg_length, 1.0);
        assert_eq!((g.stroke_min, g.stroke_max), (0.2, 2.0));
        assert_eq!(g.wrist_pitch_yaw_limit, FRAC_PI_4);
        assert_eq!(g.variant, Variant::ThreeTTwoROneR);
    }

    #[test]
    fn missing_or_extra_fields_are_schema_errors() {
        let missing = r#"{"stroke":[0.2,2.0]}"#;
        assert_eq!(load_geometry(missing).unwrap_err().name(), "SchemaError");
        let extra = r#"{"leg_length":1.0,"stroke":[0.2,2.0],"mass":3}"#;
        assert_eq!(load_geometry(extra).unwrap_err().name(), "SchemaError");
        let bad_variant = r#"{"leg_length":1.0,"stroke":[0.2,2.0],"variant":"6R"}"#;
        assert_eq!(
            load_geometry(bad_variant).unwrap_err().name(),
            "SchemaError"
        );
    }

    #[test]
    fn malformed_json_is_parse_error() {
        assert_eq!(
            load_geometry("{\"leg_length\":").unwrap_err().name(),
            "ParseError"
        );
        assert_eq!(load_geometry("nope").unwrap_err().name(), "ParseError");
    }

    #[test]
    fn loaded_values_are_validated() {
        let text = r#"{"leg_length":-1.0,"stroke":[0.2,2.0]}"#;
        assert_eq!(load_geometry(text).unwrap_err().name(), "NonPositiveLength");
    }

    #[test]
    fn default_geometry_round_trips() {
        let g = DeviceGeometry::default();
        let back = load_geometry(&serialize_geometry(&g)).unwrap();
        assert_eq!(*back, g);
    }

    #[test]
    fn canonical_sign_is_nonnegative() {
        let q = UnitQuaternion::from_axis_angle(&Vector3::x_axis(), 3.5);
        let c = canonical(q);
        assert!(c.w >= 0.0);
        assert!(quaternion_distance(&q, &c) < 1e-15);
        let p = Pose::new(Vector3::zeros(), q);
        assert!(p.orientation().w >= 0.0);
    }

    #[test]
    fn legs_display() {
        assert_eq!(Legs([true, false, true]).to_string(), "1,3");
        assert!(Legs([false, true, false]).contains(2));
        assert!(!Legs::default().any());
    }
}
