//! Shared inputs for the benchmarks.

use orthohaptic::orthoglide::ik_translation;
use orthohaptic::{DeviceGeometry, TranslationJoints, ValidatedGeometry, Vector3, WristJoints};

pub fn geometry() -> ValidatedGeometry {
    DeviceGeometry::default()
        .validate()
        .expect("default geometry is valid")
}

/// Feasible positions on a regular grid, paired with their joint values.
pub fn poses(per_axis: usize) -> Vec<(Vector3<f64>, TranslationJoints)> {
    let g = geometry();
    let at = |k: usize| -0.5 + k as f64 / (per_axis - 1).max(1) as f64;
    let mut out = Vec::new();
    for i in 0..per_axis {
        for j in 0..per_axis {
            for k in 0..per_axis {
                let p = Vector3::new(at(i), at(j), at(k)) * 0.8;
                if let Ok(rho) = ik_translation(&p, &g) {
                    out.push((p, rho));
                }
            }
        }
    }
    out
}

pub fn wrist_samples(n: usize) -> Vec<WristJoints> {
    (0..n)
        .map(|k| {
            let t = k as f64 / n as f64;
            WristJoints::new(3.0 * t - 1.5, 1.4 * (6.0 * t).sin(), 2.0 - 4.0 * t)
        })
        .collect()
}
