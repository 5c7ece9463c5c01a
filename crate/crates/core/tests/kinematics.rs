mod common;

use std::f64::consts::{FRAC_PI_2, PI};

use approx::assert_relative_eq;
use common::*;
use nalgebra::{Rotation3, SymmetricEigen};
use orthohaptic::orthoglide::{
    assembly_margin, constraint_residual, feasibility_margin, fk_translation, ik_translation,
    jacobian_translation,
};
use orthohaptic::transmission::{cardan_transfer, cardan_velocity_ratio, double_cardan_transfer};
use orthohaptic::wrist::{fk_wrist, ik_wrist, wrist_jacobian};
use orthohaptic::{quaternion_distance, DeviceGeometry, Vector3, WristJoints};
use proptest::prelude::*;

fn coord() -> impl Strategy<Value = f64> {
    -1.0..1.0f64
}

fn wrap(a: f64) -> f64 {
    (a + PI).rem_euclid(2.0 * PI) - PI
}

/// Output angle of a universal joint from the yoke geometry: input shaft on
/// z, output shaft tilted by `beta` about y, yokes orthogonal.
fn cardan_oracle(phi_in: f64, beta: f64) -> f64 {
    let a = Rotation3::from_axis_angle(&Vector3::z_axis(), phi_in) * Vector3::x();
    let tilt = Rotation3::from_axis_angle(&Vector3::y_axis(), beta);
    let b = (tilt * Vector3::z()).cross(&a);
    let local = tilt.inverse() * b;
    local.y.atan2(local.x) - FRAC_PI_2
}

proptest! {
    #[test]
    fn translation_round_trip(x in coord(), y in coord(), z in coord(), l in 0.1..10.0f64) {
        let g = DeviceGeometry::unlimited_strokes(l, 80f64.to_radians()).validate().unwrap();
        let p = Vector3::new(x, y, z) * l;
        if let Ok(rho) = ik_translation(&p, &g) {
            prop_assert!(constraint_residual(&p, &rho, &g).amax() <= 1e-12 * l);
            prop_assume!(assembly_margin(&p, &rho, l) > 1e-3);
            let back = fk_translation(&rho, &g).unwrap();
            prop_assert!((back - p).norm() <= 1e-9 * l);
        }
    }

    #[test]
    fn margin_sign_matches_ik(x in coord(), y in coord(), z in coord()) {
        let g = default_geometry();
        let p = Vector3::new(x, y, z) * 1.2;
        let m = feasibility_margin(&p, &g);
        match ik_translation(&p, &g) {
            Ok(_) => prop_assert!(m >= 0.0),
            Err(_) => prop_assert!(m <= 1e-12),
        }
    }

    #[test]
    fn ik_scales_with_leg_length(x in coord(), y in coord(), z in coord(), k in 0.1..10.0f64) {
        let g1 = wide_geometry(1.0);
        let gk = wide_geometry(k);
        let p = Vector3::new(x, y, z);
        if let Ok(r1) = ik_translation(&p, &g1) {
            let rk = ik_translation(&(p * k), &gk).unwrap();
            prop_assert!((rk.rho - r1.rho * k).amax() <= 1e-12 * k);
            let j1 = jacobian_translation(&p, &g1);
            let jk = jacobian_translation(&(p * k), &gk);
            if let (Ok(j1), Ok(jk)) = (j1, jk) {
                let scale = j1.matrix().amax();
                prop_assert!((j1.matrix() - jk.matrix()).amax() <= 1e-9 * scale);
            }
        }
    }

    #[test]
    fn amplification_matches_eigenvalues(x in coord(), y in coord(), z in coord()) {
        let g = default_geometry();
        let p = Vector3::new(x, y, z) * 0.8;
        if let Ok(j) = jacobian_translation(&p, &g) {
            let amp = j.amplification();
            let m = j.matrix();
            let mut eig: Vec<f64> = SymmetricEigen::new(m.transpose() * m)
                .eigenvalues
                .iter()
                .map(|v| v.max(0.0).sqrt())
                .collect();
            eig.sort_by(|a, b| b.total_cmp(a));
            let scale = eig[0];
            for (s, e) in amp.sigma.iter().zip(&eig) {
                prop_assert!((s - e).abs() <= 1e-8 * scale, "{:?} vs {:?}", amp.sigma, eig);
            }
            prop_assert!(amp.kappa >= 1.0);
            prop_assert!(amp.sigma[0] >= amp.sigma[1] && amp.sigma[1] >= amp.sigma[2]);
        }
    }

    #[test]
    fn wrist_round_trip(t1 in -PI..PI, t2 in -1.5..1.5f64, t3 in -PI..PI) {
        let theta = WristJoints::new(t1, t2, t3);
        let q = fk_wrist(&theta);
        let back = ik_wrist(&q).unwrap();
        prop_assert!(quaternion_distance(&fk_wrist(&back), &q) <= 1e-12);
        for (a, b) in back.theta.iter().zip(theta.theta.iter()) {
            prop_assert!(wrap(a - b).abs() <= 1e-9);
        }
        prop_assert!(back.theta.x > -PI && back.theta.x <= PI);
        prop_assert!(back.theta.z > -PI && back.theta.z <= PI);
    }

    #[test]
    fn wrist_determinant(t1 in -PI..PI, t2 in -PI..PI, t3 in -PI..PI) {
        let j = wrist_jacobian(&WristJoints::new(t1, t2, t3));
        prop_assert!((j.matrix().determinant() - t2.cos()).abs() <= 1e-12);
    }

    #[test]
    fn cardan_matches_yoke_geometry(phi in -10.0..10.0f64, beta in 0.0..1.5f64, phase in -PI..PI) {
        let out = cardan_transfer(phi, beta, phase).unwrap();
        let expected = phase + cardan_oracle(phi - phase, beta);
        prop_assert!(wrap(out - expected).abs() <= 1e-12, "{out} vs {expected}");
    }

    #[test]
    fn cardan_fluctuation_averages_out(beta in 0.0..1.5f64, phase in -PI..PI, start in -PI..PI) {
        // Trapezoid rule is spectrally accurate for this periodic integrand.
        let n = 4096;
        let mean = (0..n)
            .map(|k| {
                let phi = start + 2.0 * PI * k as f64 / n as f64;
                cardan_transfer(phi, beta, phase).unwrap() - phi
            })
            .sum::<f64>() / n as f64;
        prop_assert!(mean.abs() <= 1e-9, "{mean}");
    }

    #[test]
    fn cardan_is_increasing(phi in -10.0..10.0f64, d in 1e-6..0.5f64, beta in 0.0..1.5f64, phase in -PI..PI) {
        let a = cardan_transfer(phi, beta, phase).unwrap();
        let b = cardan_transfer(phi + d, beta, phase).unwrap();
        prop_assert!(b > a);
    }

    #[test]
    fn velocity_ratio_is_transfer_derivative(phi in -PI..PI, beta in 0.0..1.2f64, phase in -PI..PI) {
        let h = 1e-6;
        let fd = (cardan_transfer(phi + h, beta, phase).unwrap()
            - cardan_transfer(phi - h, beta, phase).unwrap()) / (2.0 * h);
        let r = cardan_velocity_ratio(phi, beta, phase).unwrap();
        prop_assert!((fd - r).abs() <= 1e-8 * r.max(1.0), "{fd} vs {r}");
        prop_assert!(r >= beta.cos() - 1e-15 && r <= 1.0 / beta.cos() + 1e-12);
    }

    #[test]
    fn double_cardan_is_homokinetic(x in coord(), y in coord(), z in coord(), phi in -20.0..20.0f64, leg in 1usize..=3) {
        let g = default_geometry();
        let p = Vector3::new(x, y, z) * 0.7;
        if let Ok(s) = double_cardan_transfer(phi, &p, &g, leg) {
            prop_assert!((s.phi_after_u2 - phi).abs() <= 1e-12 * phi.abs().max(1.0));
            prop_assert!(s.bend_angle < g.parallelogram_half_cone + 1e-12);
        }
    }
}

#[test]
fn sampled_poses_round_trip_through_fk() {
    let g = default_geometry();
    let mut rng = rng(11);
    for _ in 0..2000 {
        let p = sample_position(&mut rng, &g, 1e-3);
        let rho = ik_translation(&p, &g).unwrap();
        assert_relative_eq!(fk_translation(&rho, &g).unwrap(), p, epsilon = 1e-9);
    }
}

#[test]
fn oracle_reproduces_known_angle() {
    let out = cardan_oracle(45f64.to_radians(), 45f64.to_radians());
    assert_relative_eq!(out, 2f64.sqrt().atan(), epsilon = 1e-14);
}
