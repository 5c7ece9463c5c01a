//! Kinematics of the orthogonal translational stage.
//!
//! Leg `i` slides along the frame axis `e_i`; its parallelogram keeps the
//! platform point `p` at distance `L` from the slider point `rho_i * e_i`:
//!
//! ```text
//! ‖p − ρ_i e_i‖ = L,   i = 1, 2, 3
//! ```
//!
//! The inverse problem is closed form (one square root per leg). The direct
//! problem is the intersection of three equal spheres, which has two roots
//! mirrored across the plane through the sphere centers. The working assembly
//! mode is the side containing the isotropic posture `p = 0, ρ = (L, L, L)`.

use nalgebra::{Matrix3, Vector3};
use thiserror::Error;

use crate::error::ErrorName;
use crate::model::{Legs, TranslationJoints, ValidatedGeometry};

/// Relative distance to the cylinder wall below which a leg is singular.
pub const BOUNDARY_TOL: f64 = 1e-12;
/// Relative sphere-center separation below which the direct problem is
/// ambiguous.
pub const BRANCH_TOL: f64 = 1e-9;
/// `z² / L²` below which the two direct-problem roots are treated as one.
pub const TANGENT_TOL: f64 = 1e-12;
/// Normalized `|det A| / L³` below which the stage is singular.
pub const SINGULAR_DET_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OrthoglideError {
    #[error("point lies outside the reachable cylinder of leg(s) {0}")]
    OutsideCylinder(Legs),
    #[error("point lies on the cylinder wall of leg(s) {0}")]
    BoundarySingular(Legs),
    #[error("prismatic stroke exceeded on leg(s) {0}")]
    StrokeExceeded(Legs),
    #[error("parallelogram cone limit exceeded on leg(s) {0}")]
    ConeExceeded(Legs),
    #[error("the three leg spheres do not intersect")]
    NoIntersection,
    #[error("both direct-kinematics roots lie on the assembly branch")]
    BranchAmbiguous,
    #[error("translation Jacobian is rank deficient")]
    SingularConfiguration,
    #[error("non-finite input")]
    NonFinite,
}

impl ErrorName for OrthoglideError {
    fn name(&self) -> &'static str {
        match self {
            OrthoglideError::OutsideCylinder(_) => "OutsideCylinder",
            OrthoglideError::BoundarySingular(_) => "BoundarySingular",
            OrthoglideError::StrokeExceeded(_) => "StrokeExceeded",
            OrthoglideError::ConeExceeded(_) => "ConeExceeded",
            OrthoglideError::NoIntersection => "NoIntersection",
            OrthoglideError::BranchAmbiguous => "BranchAmbiguous",
            OrthoglideError::SingularConfiguration => "SingularConfiguration",
            OrthoglideError::NonFinite => "NonFinite",
        }
    }
}

fn axis(i: usize) -> Vector3<f64> {
    Vector3::ith(i, 1.0)
}

/// Distance from `p` to the axis `e_i` (0-based `i`).
pub fn transverse_radius(p: &Vector3<f64>, i: usize) -> f64 {
    let (a, b) = match i {
        0 => (p.y, p.z),
        1 => (p.x, p.z),
        _ => (p.x, p.y),
    };
    a.hypot(b)
}

/// Axial extent `sqrt(L² − r²)` of a leg, evaluated as `(L − r)(L + r)`.
fn axial_extent(leg_length: f64, r: f64) -> f64 {
    ((leg_length - r) * (leg_length + r)).max(0.0).sqrt()
}

/// Inverse kinematics on the positive branch `ρ_i = p_i + sqrt(L² − r_i²)`.
///
/// Checks are applied in order: cylinder membership, wall singularity,
/// strokes, then the parallelogram cone. Every failing leg is reported.
pub fn ik_translation(
    p: &Vector3<f64>,
    geom: &ValidatedGeometry,
) -> Result<TranslationJoints, OrthoglideError> {
    if !p.iter().all(|v| v.is_finite()) {
        return Err(OrthoglideError::NonFinite);
    }
    let l = geom.leg_length;
    let mut outside = Legs::default();
    let mut wall = Legs::default();
    let mut radii = [0.0; 3];
    for (i, r) in radii.iter_mut().enumerate() {
        *r = transverse_radius(p, i);
        if *r > l {
            outside.0[i] = true;
        } else if l - *r <= BOUNDARY_TOL * l {
            wall.0[i] = true;
        }
    }
    if outside.any() {
        return Err(OrthoglideError::OutsideCylinder(outside));
    }
    if wall.any() {
        return Err(OrthoglideError::BoundarySingular(wall));
    }

    let mut rho = Vector3::zeros();
    let mut stroke = Legs::default();
    let mut cone = Legs::default();
    for i in 0..3 {
        let s = axial_extent(l, radii[i]);
        rho[i] = p[i] + s;
        if rho[i] < geom.stroke_min || rho[i] > geom.stroke_max {
            stroke.0[i] = true;
        }
        if radii[i].atan2(s) > geom.parallelogram_half_cone {
            cone.0[i] = true;
        }
    }
    if stroke.any() {
        return Err(OrthoglideError::StrokeExceeded(stroke));
    }
    if cone.any() {
        return Err(OrthoglideError::ConeExceeded(cone));
    }
    Ok(TranslationJoints { rho })
}

/// Direct kinematics: intersection of the spheres of radius `L` centered at
/// `ρ_i e_i`.
///
/// Roots with `p_i > ρ_i` on some leg are discarded (they belong to the
/// negative inverse branch). If both roots remain, the one in the working
/// assembly mode (`det A < 0`, same side as the isotropic posture) is taken.
pub fn fk_translation(
    rho: &TranslationJoints,
    geom: &ValidatedGeometry,
) -> Result<Vector3<f64>, OrthoglideError> {
    let rho = rho.rho;
    if !rho.iter().all(|v| v.is_finite()) {
        return Err(OrthoglideError::NonFinite);
    }
    let l = geom.leg_length;
    let c1 = axis(0) * rho.x;
    let c2 = axis(1) * rho.y;
    let c3 = axis(2) * rho.z;

    let d12 = c2 - c1;
    let d = d12.norm();
    let ex = d12 / d;
    let v13 = c3 - c1;
    let i = ex.dot(&v13);
    let ey_raw = v13 - ex * i;
    let j = ey_raw.norm();
    // Coincident or collinear centers leave a whole circle of solutions.
    if d <= BRANCH_TOL * l || j <= BRANCH_TOL * l {
        return Err(OrthoglideError::BranchAmbiguous);
    }
    let ey = ey_raw / j;
    let ez = ex.cross(&ey);

    let x = 0.5 * d;
    let y = (i * i + j * j) / (2.0 * j) - (i / j) * x;
    let z2 = l * l - x * x - y * y;
    // Rounding leaves z² with noise of order ε·L², so tangency is decided on z².
    let tangent = z2.abs() <= TANGENT_TOL * l * l;
    if z2 < 0.0 && !tangent {
        return Err(OrthoglideError::NoIntersection);
    }
    let z = z2.max(0.0).sqrt();
    let foot = c1 + ex * x + ey * y;
    // `ez` is parallel to (c2 − c1) × (c3 − c1), so the working root is `−z`.
    let working = foot - ez * z;
    let mirrored = foot + ez * z;

    let on_branch = |q: &Vector3<f64>| (0..3).all(|k| q[k] <= rho[k] + BOUNDARY_TOL * l);
    match (on_branch(&working), on_branch(&mirrored)) {
        (false, false) => Err(OrthoglideError::NoIntersection),
        (true, false) | (false, true) if tangent => Err(OrthoglideError::BranchAmbiguous),
        (true, true) if tangent => Err(OrthoglideError::BranchAmbiguous),
        (true, _) => Ok(working),
        (false, true) => Ok(mirrored),
    }
}

/// Per-leg constraint residuals `‖p − ρ_i e_i‖ − L`.
pub fn constraint_residual(
    p: &Vector3<f64>,
    rho: &TranslationJoints,
    geom: &ValidatedGeometry,
) -> Vector3<f64> {
    Vector3::from_fn(|i, _| (p - axis(i) * rho.rho[i]).norm() - geom.leg_length)
}

/// Signed distance-like margin of `p` to the boundary of the inverse
/// kinematics feasible set (m). Positive inside, negative outside.
///
/// Combines cylinder, stroke and cone slacks; it is a search heuristic and
/// [`ik_translation`] remains the authority on feasibility.
pub fn feasibility_margin(p: &Vector3<f64>, geom: &ValidatedGeometry) -> f64 {
    let l = geom.leg_length;
    let cone_radius = l * geom.parallelogram_half_cone.sin();
    let mut margin = f64::INFINITY;
    for i in 0..3 {
        let r = transverse_radius(p, i);
        margin = margin.min(l - r);
        if r < l {
            let rho = p[i] + axial_extent(l, r);
            margin = margin
                .min(rho - geom.stroke_min)
                .min(geom.stroke_max - rho)
                .min(cone_radius - r);
        }
    }
    margin
}

/// Row `i` of `A` is `(p − ρ_i e_i)ᵀ`.
fn constraint_matrix(p: &Vector3<f64>, rho: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::from_rows(&[
        (p - axis(0) * rho.x).transpose(),
        (p - axis(1) * rho.y).transpose(),
        (p - axis(2) * rho.z).transpose(),
    ])
}

/// `−det A / L³`: positive in the working assembly mode, zero on the
/// direct-kinematics singularity, negative in the mirrored mode.
pub fn assembly_margin(p: &Vector3<f64>, rho: &TranslationJoints, leg_length: f64) -> f64 {
    -constraint_matrix(p, &rho.rho).determinant() / leg_length.powi(3)
}

/// Maps prismatic rates to platform velocity, `ṗ = J ρ̇`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TranslationJacobian(pub Matrix3<f64>);

impl TranslationJacobian {
    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    /// Velocity amplification factors, sorted descending.
    pub fn amplification(&self) -> Amplification {
        let mut sigma: Vec<f64> = self.0.singular_values().iter().copied().collect();
        sigma.sort_by(|a, b| b.total_cmp(a));
        Amplification {
            sigma: [sigma[0], sigma[1], sigma[2]],
            kappa: sigma[0] / sigma[2],
        }
    }
}

/// Singular values of the translation Jacobian and their ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Amplification {
    /// `σ1 ≥ σ2 ≥ σ3`.
    pub sigma: [f64; 3],
    /// `σ1 / σ3`.
    pub kappa: f64,
}

impl Amplification {
    pub fn sigma_max(&self) -> f64 {
        self.sigma[0]
    }

    pub fn sigma_min(&self) -> f64 {
        self.sigma[2]
    }
}

/// Jacobian at a pose given its joint values; no feasibility checks.
pub fn jacobian_at(
    p: &Vector3<f64>,
    rho: &TranslationJoints,
    geom: &ValidatedGeometry,
) -> Result<TranslationJacobian, OrthoglideError> {
    // Differentiating ‖p − ρ_i e_i‖² = L² gives A ṗ = B ρ̇.
    let a = constraint_matrix(p, &rho.rho);
    if a.determinant().abs() <= SINGULAR_DET_TOL * geom.leg_length.powi(3) {
        return Err(OrthoglideError::SingularConfiguration);
    }
    let b = Matrix3::from_diagonal(&Vector3::from_fn(|i, _| p[i] - rho.rho[i]));
    let lu = a.lu();
    lu.solve(&b)
        .map(TranslationJacobian)
        .ok_or(OrthoglideError::SingularConfiguration)
}

/// `J = A⁻¹ B` at a strictly feasible point.
pub fn jacobian_translation(
    p: &Vector3<f64>,
    geom: &ValidatedGeometry,
) -> Result<TranslationJacobian, OrthoglideError> {
    let rho = ik_translation(p, geom)?;
    jacobian_at(p, &rho, geom)
}

pub fn velocity_amplification(
    p: &Vector3<f64>,
    geom: &ValidatedGeometry,
) -> Result<Amplification, OrthoglideError> {
    Ok(jacobian_translation(p, geom)?.amplification())
}
