#![allow(dead_code)]

use std::f64::consts::PI;

use orthohaptic::orthoglide::{assembly_margin, feasibility_margin, ik_translation};
use orthohaptic::{DeviceGeometry, ValidatedGeometry, Vector3, WristJoints};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn default_geometry() -> ValidatedGeometry {
    DeviceGeometry::default().validate().unwrap()
}

pub fn wide_geometry(l: f64) -> ValidatedGeometry {
    DeviceGeometry::unlimited_strokes(l, 89.99f64.to_radians())
        .validate()
        .unwrap()
}

/// Uniform in `[−L, L]³`, rejected until IK succeeds in the working assembly
/// mode with relative margin `margin` on every limit.
pub fn sample_position(
    rng: &mut ChaCha8Rng,
    geom: &ValidatedGeometry,
    margin: f64,
) -> Vector3<f64> {
    let l = geom.leg_length;
    loop {
        let p = Vector3::from_fn(|_, _| rng.random_range(-l..l));
        let Ok(rho) = ik_translation(&p, geom) else {
            continue;
        };
        if feasibility_margin(&p, geom) >= margin * l && assembly_margin(&p, &rho, l) >= margin {
            return p;
        }
    }
}

/// Pitch and yaw uniform inside the limits, roll uniform in `(−π, π]`.
pub fn sample_wrist(rng: &mut ChaCha8Rng, geom: &ValidatedGeometry) -> WristJoints {
    let lim = geom.wrist_pitch_yaw_limit;
    WristJoints::new(
        rng.random_range(-lim..=lim),
        rng.random_range(-lim..=lim),
        rng.random_range(-PI..PI),
    )
}

pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}
