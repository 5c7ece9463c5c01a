//! Rotary transmission of one leg, from the base-mounted wrist motor to the
//! wrist input shaft.
//!
//! The prismatic and coaxial revolute joints pass the shaft angle through
//! unchanged. The two universal joints at the ends of the parallelogram's
//! neutral fiber each bend the shaft by the same angle `β`, because the
//! parallelogram keeps the end shafts parallel. With the yokes of the second
//! joint phased 90° from the first (Z-configuration) the fluctuation of the
//! first joint is undone exactly and the chain is homokinetic.

use std::f64::consts::FRAC_PI_2;

use nalgebra::Vector3;
use thiserror::Error;

use crate::error::ErrorName;
use crate::model::{CardanChainState, ValidatedGeometry};
use crate::orthoglide::{ik_translation, OrthoglideError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransmissionError {
    #[error("bend angle {0} rad is outside [0, pi/2)")]
    BendOutOfRange(f64),
    #[error("leg index {0} is not 1, 2 or 3")]
    BadLeg(usize),
    #[error(transparent)]
    Translation(#[from] OrthoglideError),
}

impl ErrorName for TransmissionError {
    fn name(&self) -> &'static str {
        match self {
            TransmissionError::BendOutOfRange(_) => "BendOutOfRange",
            TransmissionError::BadLeg(_) => "BadLeg",
            TransmissionError::Translation(e) => e.name(),
        }
    }
}

fn check_bend(beta: f64) -> Result<(), TransmissionError> {
    if (0.0..FRAC_PI_2).contains(&beta) {
        Ok(())
    } else {
        Err(TransmissionError::BendOutOfRange(beta))
    }
}

fn leg_index(leg: usize) -> Result<usize, TransmissionError> {
    if (1..=3).contains(&leg) {
        Ok(leg - 1)
    } else {
        Err(TransmissionError::BadLeg(leg))
    }
}

/// Bend of leg `leg` (1-based) and the direction of its bend plane.
///
/// The phase is measured in the leg frame `(e_{i+1}, e_{i+2})` and is zero
/// when the leg is straight.
fn bend_and_phase(
    p: &Vector3<f64>,
    geom: &ValidatedGeometry,
    leg: usize,
) -> Result<(f64, f64), TransmissionError> {
    let i = leg_index(leg)?;
    let rho = ik_translation(p, geom)?;
    // Parallelogram direction u = (ρ_i e_i − p) / L, split along and across e_i.
    let axial = rho.rho[i] - p[i];
    let a = -p[(i + 1) % 3];
    let b = -p[(i + 2) % 3];
    let transverse = a.hypot(b);
    let beta = transverse.atan2(axial);
    let phase = if transverse > 0.0 { b.atan2(a) } else { 0.0 };
    Ok((beta, phase))
}

/// Angle between the leg axis `e_i` and its parallelogram; shared by both
/// universal joints of the leg.
pub fn bend_angle(
    p: &Vector3<f64>,
    geom: &ValidatedGeometry,
    leg: usize,
) -> Result<f64, TransmissionError> {
    bend_and_phase(p, geom, leg).map(|(beta, _)| beta)
}

/// Output angle of a single universal joint,
/// `tan(φ_out − phase) = tan(φ_in − phase) / cos β`.
///
/// The result is continuous and increasing in `phi_in`, equals `phase` at
/// `phi_in = phase`, and advances by exactly one turn per input turn.
pub fn cardan_transfer(phi_in: f64, beta: f64, phase: f64) -> Result<f64, TransmissionError> {
    check_bend(beta)?;
    let x = phi_in - phase;
    let (s, c) = x.sin_cos();
    // Both atan2 calls land in the same quadrant since cos β > 0; their
    // difference is the bounded deviation from a straight shaft.
    let deviation = s.atan2(c * beta.cos()) - s.atan2(c);
    Ok(phi_in + deviation)
}

/// `dφ_out / dφ_in = cos β / (1 − sin²β · cos²(φ_in − phase))`, the exact
/// derivative of [`cardan_transfer`]. It is `1/cos β` at `φ_in = phase` and
/// `cos β` a quarter turn later.
pub fn cardan_velocity_ratio(phi_in: f64, beta: f64, phase: f64) -> Result<f64, TransmissionError> {
    check_bend(beta)?;
    let sb = beta.sin();
    let cx = (phi_in - phase).cos();
    Ok(beta.cos() / (1.0 - sb * sb * cx * cx))
}

/// Propagates the motor angle through both universal joints of a leg in the
/// Z-configuration.
pub fn double_cardan_transfer(
    phi_motor: f64,
    p: &Vector3<f64>,
    geom: &ValidatedGeometry,
    leg: usize,
) -> Result<CardanChainState, TransmissionError> {
    let (beta, phase) = bend_and_phase(p, geom, leg)?;
    let phi_after_u1 = cardan_transfer(phi_motor, beta, phase)?;
    let phi_after_u2 = cardan_transfer(phi_after_u1, beta, phase + FRAC_PI_2)?;
    debug_assert!(
        (phi_after_u2 - phi_motor).abs() <= 1e-12 * phi_motor.abs().max(1.0),
        "double Cardan chain is not homokinetic: {phi_motor} -> {phi_after_u2}"
    );
    Ok(CardanChainState {
        bend_angle: beta,
        phase,
        phi_motor,
        phi_after_u1,
        phi_after_u2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DeviceGeometry;
    use approx::assert_relative_eq;

    fn wide() -> ValidatedGeometry {
        DeviceGeometry::unlimited_strokes(1.0, 80f64.to_radians())
            .validate()
            .unwrap()
    }

    #[test]
    fn straight_legs_at_isotropic_point() {
        for leg in 1..=3 {
            assert_eq!(bend_angle(&Vector3::zeros(), &wide(), leg).unwrap(), 0.0);
        }
    }

    #[test]
    fn bend_of_offset_leg() {
        let beta = bend_angle(&Vector3::new(0.0, 0.5, 0.0), &wide(), 1).unwrap();
        assert_relative_eq!(beta, 30f64.to_radians(), epsilon = 1e-15);
    }

    #[test]
    fn bend_stays_inside_cone() {
        let g = DeviceGeometry::default().validate().unwrap();
        for p in [Vector3::new(0.2, -0.3, 0.4), Vector3::new(-0.5, 0.5, 0.1)] {
            for leg in 1..=3 {
                assert!(bend_angle(&p, &g, leg).unwrap() < g.parallelogram_half_cone);
            }
        }
    }

    #[test]
    fn bad_leg_and_infeasible_point() {
        assert_eq!(
            bend_angle(&Vector3::zeros(), &wide(), 0)
                .unwrap_err()
                .name(),
            "BadLeg"
        );
        let err = bend_angle(&Vector3::new(0.0, 1.2, 0.0), &wide(), 1).unwrap_err();
        assert_eq!(err.name(), "OutsideCylinder");
    }

    #[test]
    fn straight_shaft_and_fixed_point() {
        for phi in [-7.0, -1.0, 0.0, 0.3, 2.9, 12.0] {
            assert_eq!(cardan_transfer(phi, 0.0, 0.4).unwrap(), phi);
        }
        assert_eq!(cardan_transfer(0.7, 1.0, 0.7).unwrap(), 0.7);
    }

    #[test]
    fn bend_limit() {
        assert_eq!(
            cardan_transfer(0.0, FRAC_PI_2, 0.0).unwrap_err().name(),
            "BendOutOfRange"
        );
        assert!(cardan_velocity_ratio(0.0, -0.1, 0.0).is_err());
    }

    #[test]
    fn forty_five_degree_example() {
        let out = cardan_transfer(45f64.to_radians(), 45f64.to_radians(), 0.0).unwrap();
        assert_relative_eq!(out, 2f64.sqrt().atan(), epsilon = 1e-15);
        assert_relative_eq!(out.to_degrees(), 54.7356, epsilon = 1e-4);
    }

    #[test]
    fn ratio_at_fixed_point_and_quarter_turn() {
        let beta = 30f64.to_radians();
        assert_relative_eq!(
            cardan_velocity_ratio(0.2, beta, 0.2).unwrap(),
            1.0 / beta.cos(),
            epsilon = 1e-15
        );
        let r = cardan_velocity_ratio(0.2 + FRAC_PI_2, beta, 0.2).unwrap();
        assert_relative_eq!(r, beta.cos(), epsilon = 1e-12);
    }

    #[test]
    fn transfer_is_one_turn_per_turn() {
        let tau = std::f64::consts::TAU;
        for phi in [-2.0, 0.1, 1.7, 3.2] {
            let a = cardan_transfer(phi, 0.6, 0.3).unwrap();
            let b = cardan_transfer(phi + tau, 0.6, 0.3).unwrap();
            assert_relative_eq!(b - a, tau, epsilon = 1e-12);
        }
    }

    #[test]
    fn double_chain_straight_and_bent() {
        let g = wide();
        let s = double_cardan_transfer(1.234, &Vector3::zeros(), &g, 2).unwrap();
        assert_eq!(s.bend_angle, 0.0);
        assert_eq!(s.phi_after_u2, 1.234);

        let p = Vector3::new(0.0, 0.5, 0.0);
        let s = double_cardan_transfer(45f64.to_radians(), &p, &g, 1).unwrap();
        assert_relative_eq!(s.bend_angle, 30f64.to_radians(), epsilon = 1e-15);
        assert!((s.phi_after_u1 - s.phi_motor).abs() > 1e-3);
        assert!((s.phi_after_u2 - s.phi_motor).abs() <= 1e-12);
    }
}
