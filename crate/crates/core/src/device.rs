//! The assembled 3T+2R+1R device.
//!
//! Position and orientation are decoupled: the translational stage sets the
//! platform position, the wrist sets the orientation, and the two wrist
//! motors on legs 1 and 2 reach the wrist through homokinetic double Cardan
//! shafts. The roll motor is embedded in the wrist. The 6×6 Jacobian is
//! therefore block diagonal.

use nalgebra::{Matrix3, Matrix6, Vector3, Vector6};
use thiserror::Error;

use crate::error::ErrorName;
use crate::model::{Pose, TranslationJoints, ValidatedGeometry, Variant, WristJoints};
use crate::orthoglide::{self, OrthoglideError, TranslationJacobian};
use crate::transmission::{double_cardan_transfer, TransmissionError};
use crate::wrist::{self, LimitReport, WristError, WristJacobian};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DeviceError {
    #[error("translation stage: {0}")]
    Translation(#[from] OrthoglideError),
    #[error("wrist stage: {0}")]
    Wrist(#[from] WristError),
    #[error("transmission: {0}")]
    Transmission(#[from] TransmissionError),
    #[error("wrist stage: joint limits exceeded {report:?}")]
    WristLimitExceeded { report: LimitReport },
    #[error("variant {0} has no wrist model")]
    UnsupportedVariant(Variant),
}

impl DeviceError {
    /// Which sub-problem produced the error.
    pub fn stage(&self) -> &'static str {
        match self {
            DeviceError::Translation(_) => "translation",
            DeviceError::Wrist(_) | DeviceError::WristLimitExceeded { .. } => "wrist",
            DeviceError::Transmission(_) => "transmission",
            DeviceError::UnsupportedVariant(_) => "device",
        }
    }
}

impl ErrorName for DeviceError {
    fn name(&self) -> &'static str {
        match self {
            DeviceError::Translation(e) => e.name(),
            DeviceError::Wrist(e) => e.name(),
            DeviceError::Transmission(e) => e.name(),
            DeviceError::WristLimitExceeded { .. } => "WristLimitExceeded",
            DeviceError::UnsupportedVariant(_) => "UnsupportedVariant",
        }
    }
}

fn require_hybrid(geom: &ValidatedGeometry) -> Result<(), DeviceError> {
    match geom.variant {
        Variant::ThreeTTwoROneR => Ok(()),
        v => Err(DeviceError::UnsupportedVariant(v)),
    }
}

fn check_limits(theta: &WristJoints, geom: &ValidatedGeometry) -> Result<(), DeviceError> {
    let report = wrist::check_wrist_limits(theta, geom);
    if report.feasible {
        Ok(())
    } else {
        Err(DeviceError::WristLimitExceeded { report })
    }
}

/// Maps `(ρ̇, θ̇)` to `(ṗ, ω)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceJacobian(Matrix6<f64>);

impl DeviceJacobian {
    pub fn from_blocks(translation: &TranslationJacobian, wrist: &WristJacobian) -> Self {
        let mut m = Matrix6::zeros();
        m.fixed_view_mut::<3, 3>(0, 0)
            .copy_from(translation.matrix());
        m.fixed_view_mut::<3, 3>(3, 3).copy_from(wrist.matrix());
        DeviceJacobian(m)
    }

    pub fn matrix(&self) -> &Matrix6<f64> {
        &self.0
    }

    pub fn translation_block(&self) -> Matrix3<f64> {
        self.0.fixed_view::<3, 3>(0, 0).into_owned()
    }

    pub fn wrist_block(&self) -> Matrix3<f64> {
        self.0.fixed_view::<3, 3>(3, 3).into_owned()
    }

    /// Upper-right and lower-left blocks.
    pub fn coupling_blocks(&self) -> (Matrix3<f64>, Matrix3<f64>) {
        (
            self.0.fixed_view::<3, 3>(0, 3).into_owned(),
            self.0.fixed_view::<3, 3>(3, 0).into_owned(),
        )
    }
}

/// Forward kinematics from prismatic positions and the three wrist motor
/// angles (rad). Motors 1 and 2 drive the wrist through legs 1 and 2; motor
/// 3 is the embedded roll joint.
pub fn fk_device(
    rho: &TranslationJoints,
    phi_motor: &Vector3<f64>,
    geom: &ValidatedGeometry,
) -> Result<Pose, DeviceError> {
    require_hybrid(geom)?;
    let position = orthoglide::fk_translation(rho, geom)?;
    let theta1 = double_cardan_transfer(phi_motor.x, &position, geom, 1)?.phi_after_u2;
    let theta2 = double_cardan_transfer(phi_motor.y, &position, geom, 2)?.phi_after_u2;
    let theta = WristJoints::new(theta1, theta2, phi_motor.z);
    check_limits(&theta, geom)?;
    Ok(Pose::new(position, wrist::fk_wrist(&theta)))
}

/// Per-stage inverse kinematics results. The stages never interact, so one
/// may succeed while the other fails.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceIk {
    pub translation: Result<TranslationJoints, DeviceError>,
    pub wrist: Result<WristJoints, DeviceError>,
}

impl DeviceIk {
    /// Both stages, or the first error (translation before wrist).
    pub fn into_result(self) -> Result<(TranslationJoints, WristJoints), DeviceError> {
        Ok((self.translation?, self.wrist?))
    }
}

pub fn ik_device(pose: &Pose, geom: &ValidatedGeometry) -> DeviceIk {
    if let Err(e) = require_hybrid(geom) {
        return DeviceIk {
            translation: Err(e.clone()),
            wrist: Err(e),
        };
    }
    let translation = orthoglide::ik_translation(&pose.position, geom).map_err(DeviceError::from);
    let wrist = wrist::ik_wrist(&pose.orientation())
        .map_err(DeviceError::from)
        .and_then(|theta| check_limits(&theta, geom).map(|_| theta));
    DeviceIk { translation, wrist }
}

pub fn jacobian_device(
    pose: &Pose,
    geom: &ValidatedGeometry,
) -> Result<DeviceJacobian, DeviceError> {
    let (rho, theta) = ik_device(pose, geom).into_result()?;
    let jt = orthoglide::jacobian_at(&pose.position, &rho, geom)?;
    let jw = wrist::wrist_jacobian(&theta);
    Ok(DeviceJacobian::from_blocks(&jt, &jw))
}

/// Actuator efforts `Jᵀ · wrench` balancing a wrench applied at the handle.
///
/// The wrench is `(force; torque)`; the result is `(prismatic forces; wrist
/// motor torques)`.
pub fn actuator_efforts(
    pose: &Pose,
    wrench: &Vector6<f64>,
    geom: &ValidatedGeometry,
) -> Result<Vector6<f64>, DeviceError> {
    Ok(jacobian_device(pose, geom)?.matrix().tr_mul(wrench))
}

/// Isotropic posture: legs orthogonal (`ρ = (L, L, L)`) and the roll axis
/// along z (`θ = 0`).
pub fn isotropy_posture(
    geom: &ValidatedGeometry,
) -> Result<(TranslationJoints, WristJoints), DeviceError> {
    require_hybrid(geom)?;
    let l = geom.leg_length;
    Ok((
        TranslationJoints::new(l, l, l),
        WristJoints::new(0.0, 0.0, 0.0),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{quaternion_distance, DeviceGeometry};
    use approx::assert_relative_eq;
    use nalgebra::UnitQuaternion;

    fn wide() -> ValidatedGeometry {
        DeviceGeometry::unlimited_strokes(1.0, 60f64.to_radians())
            .validate()
            .unwrap()
    }

    #[test]
    fn isotropic_home() {
        let g = wide();
        let pose = fk_device(
            &TranslationJoints::new(1.0, 1.0, 1.0),
            &Vector3::zeros(),
            &g,
        )
        .unwrap();
        assert!(pose.position.norm() < 1e-15);
        assert_eq!(pose.orientation(), UnitQuaternion::identity());
        assert_eq!(
            *jacobian_device(&pose, &g).unwrap().matrix(),
            Matrix6::identity()
        );
    }

    #[test]
    fn composed_example() {
        let g = wide();
        let s = 0.75f64.sqrt();
        let motors = Vector3::new(30f64.to_radians(), 0.0, 0.0);
        let pose = fk_device(&TranslationJoints::new(s, s, 1.5), &motors, &g).unwrap();
        assert_relative_eq!(pose.position, Vector3::new(0.0, 0.0, 0.5), epsilon = 1e-12);
        let rx = UnitQuaternion::from_axis_angle(&Vector3::x_axis(), 30f64.to_radians());
        assert!(quaternion_distance(&pose.orientation(), &rx) < 1e-12);
    }

    #[test]
    fn unlimited_roll() {
        let g = wide();
        let rho = TranslationJoints::new(1.0, 1.0, 1.0);
        let a = fk_device(&rho, &Vector3::zeros(), &g).unwrap();
        let b = fk_device(
            &rho,
            &Vector3::new(0.0, 0.0, 4.0 * std::f64::consts::PI),
            &g,
        )
        .unwrap();
        assert!(quaternion_distance(&a.orientation(), &b.orientation()) < 1e-12);
    }

    #[test]
    fn motors_beyond_limits_are_rejected() {
        let g = wide();
        let err = fk_device(
            &TranslationJoints::new(1.0, 1.0, 1.0),
            &Vector3::new(50f64.to_radians(), 0.0, 0.0),
            &g,
        )
        .unwrap_err();
        assert_eq!(err.name(), "WristLimitExceeded");
        assert_eq!(err.stage(), "wrist");
    }

    #[test]
    fn stages_fail_independently() {
        let g = wide();
        let ry = UnitQuaternion::from_axis_angle(&Vector3::y_axis(), std::f64::consts::FRAC_PI_2);
        let ik = ik_device(&Pose::new(Vector3::zeros(), ry), &g);
        assert_eq!(
            ik.translation.clone().unwrap(),
            TranslationJoints::new(1.0, 1.0, 1.0)
        );
        let err = ik.wrist.clone().unwrap_err();
        assert_eq!(err.name(), "GimbalSingular");
        assert_eq!(err.stage(), "wrist");
        assert_eq!(ik.into_result().unwrap_err().name(), "GimbalSingular");
    }

    #[test]
    fn efforts_at_home() {
        let g = wide();
        let pose = Pose::identity_at(Vector3::zeros());
        let w = Vector6::new(1.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        assert_eq!(actuator_efforts(&pose, &w, &g).unwrap(), w);
        assert_eq!(
            actuator_efforts(&pose, &Vector6::zeros(), &g).unwrap(),
            Vector6::zeros()
        );
    }

    #[test]
    fn isotropy_posture_scales_and_checks_variant() {
        let g = DeviceGeometry::default()
            .with_leg_length(0.5)
            .validate()
            .unwrap();
        let (rho, theta) = isotropy_posture(&g).unwrap();
        assert_eq!(rho, TranslationJoints::new(0.5, 0.5, 0.5));
        assert_eq!(theta.theta, Vector3::zeros());

        let mut g3 = DeviceGeometry::default();
        g3.variant = Variant::ThreeTThreeR;
        let g3 = g3.validate().unwrap();
        assert_eq!(
            isotropy_posture(&g3).unwrap_err().name(),
            "UnsupportedVariant"
        );
    }

    #[test]
    fn coupling_blocks_are_zero() {
        let g = wide();
        let q = UnitQuaternion::from_euler_angles(0.2, -0.3, 1.0);
        let pose = Pose::new(Vector3::new(0.1, -0.2, 0.15), q);
        let j = jacobian_device(&pose, &g).unwrap();
        let (a, b) = j.coupling_blocks();
        assert_eq!(a, Matrix3::zeros());
        assert_eq!(b, Matrix3::zeros());
    }
}
