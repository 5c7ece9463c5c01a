//! Hybrid 2R+1R wrist: a two-dof agile eye in series with a roll joint.
//!
//! The agile eye is represented by its serial-equivalent gimbal, so the
//! orientation is `R = Rx(θ1) · Ry(θ2) · Rz(θ3)`. At the home posture the roll
//! axis is orthogonal to the first two joint axes and the Jacobian is the
//! identity. The mechanism is singular when either of the first two joints
//! reaches ±90°; for the serial equivalent only `θ2 = ±90°` is a gimbal lock,
//! so `θ1 = ±90°` is flagged by [`check_wrist_limits`] instead.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Matrix3, UnitQuaternion, Vector3};
use thiserror::Error;

use crate::error::ErrorName;
use crate::model::{canonical, ValidatedGeometry, WristJoints};

/// Distance of `|θ2|` to 90° below which the first and third joints merge.
pub const GIMBAL_TOL: f64 = 1e-9;
const LIMIT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum WristError {
    /// Only `combined = θ1 + sign(θ2)·θ3` is determined.
    #[error("wrist at gimbal lock (theta2 = {theta2}), only theta1 + sign(theta2)*theta3 = {combined} is defined")]
    GimbalSingular { theta2: f64, combined: f64 },
    #[error("orientation quaternion is not finite")]
    NonFinite,
}

impl ErrorName for WristError {
    fn name(&self) -> &'static str {
        match self {
            WristError::GimbalSingular { .. } => "GimbalSingular",
            WristError::NonFinite => "NonFinite",
        }
    }
}

pub fn fk_wrist(theta: &WristJoints) -> UnitQuaternion<f64> {
    let t = theta.theta;
    let q = UnitQuaternion::from_axis_angle(&Vector3::x_axis(), t.x)
        * UnitQuaternion::from_axis_angle(&Vector3::y_axis(), t.y)
        * UnitQuaternion::from_axis_angle(&Vector3::z_axis(), t.z);
    canonical(q)
}

// atan2 returns −π for some inputs; the representative interval is (−π, π].
fn wrap_half_open(angle: f64) -> f64 {
    if angle <= -PI {
        angle + 2.0 * PI
    } else {
        angle
    }
}

/// Decomposes an orientation into `θ2 ∈ [−π/2, π/2]`, `θ1, θ3 ∈ (−π, π]`.
pub fn ik_wrist(q: &UnitQuaternion<f64>) -> Result<WristJoints, WristError> {
    if !q.coords.iter().all(|v| v.is_finite()) {
        return Err(WristError::NonFinite);
    }
    let r = canonical(*q).to_rotation_matrix().into_inner();
    // Row 0 of Rx·Ry·Rz is (c2 c3, −c2 s3, s2).
    let theta2 = r[(0, 2)].atan2(r[(0, 0)].hypot(r[(0, 1)]));
    if FRAC_PI_2 - theta2.abs() <= GIMBAL_TOL {
        // R = Rx(θ1 ± θ3) · Ry(±π/2): the second row carries the sum.
        let sign = theta2.signum();
        let combined = wrap_half_open((sign * r[(1, 0)]).atan2(r[(1, 1)]));
        return Err(WristError::GimbalSingular { theta2, combined });
    }
    let theta1 = wrap_half_open((-r[(1, 2)]).atan2(r[(2, 2)]));
    let theta3 = wrap_half_open((-r[(0, 1)]).atan2(r[(0, 0)]));
    Ok(WristJoints::new(theta1, theta2, theta3))
}

/// Maps wrist joint rates to the base-frame angular velocity, `ω = J θ̇`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WristJacobian {
    matrix: Matrix3<f64>,
    theta2: f64,
}

impl WristJacobian {
    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.matrix
    }

    /// Closed-form determinant, `cos θ2`.
    pub fn determinant(&self) -> f64 {
        self.theta2.cos()
    }

    pub fn condition_number(&self) -> f64 {
        let s = self.matrix.singular_values();
        s.max() / s.min()
    }
}

/// Columns are the instantaneous joint axes `x`, `Rx(θ1)·y`, `Rx(θ1)Ry(θ2)·z`.
pub fn wrist_jacobian(theta: &WristJoints) -> WristJacobian {
    let (s1, c1) = theta.theta.x.sin_cos();
    let (s2, c2) = theta.theta.y.sin_cos();
    let e1 = Vector3::x();
    let e2 = Vector3::new(0.0, c1, s1);
    let e3 = Vector3::new(s2, -s1 * c2, c1 * c2);
    WristJacobian {
        matrix: Matrix3::from_columns(&[e1, e2, e3]),
        theta2: theta.theta.y,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitViolation {
    /// 1 or 2.
    pub joint: usize,
    /// Amount by which `|θ|` exceeds the limit (rad).
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitReport {
    pub feasible: bool,
    pub violations: Vec<LimitViolation>,
    /// `limit − |θ|` for joints 1 and 2; negative when violated.
    pub margins: [f64; 2],
    /// Set when joint 1 or 2 sits on the ±90° singular locus of the real
    /// mechanism, regardless of the configured limit.
    pub mechanism_singular: bool,
}

/// Checks pitch/yaw against the configured limit (inclusive). Roll is
/// unlimited.
pub fn check_wrist_limits(theta: &WristJoints, geom: &ValidatedGeometry) -> LimitReport {
    let limit = geom.wrist_pitch_yaw_limit;
    let angles = [theta.theta.x, theta.theta.y];
    let margins = angles.map(|a| limit - a.abs());
    let violations: Vec<LimitViolation> = margins
        .iter()
        .enumerate()
        .filter(|(_, m)| **m < -LIMIT_TOL)
        .map(|(i, m)| LimitViolation {
            joint: i + 1,
            excess: -m,
        })
        .collect();
    let mechanism_singular = angles.iter().any(|a| a.abs() >= FRAC_PI_2 - GIMBAL_TOL);
    LimitReport {
        feasible: violations.is_empty() && !mechanism_singular,
        violations,
        margins,
        mechanism_singular,
    }
}
