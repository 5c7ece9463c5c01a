//! Workspace mapping of the translational stage and extraction of the largest
//! axis-aligned cube inside it.

mod export;

pub use export::{export_grid, fmt_sig9, import_grid_json, round_sig9, ExportFormat};

use std::fmt;
use std::str::FromStr;

use nalgebra::Vector3;
use rayon::prelude::*;
use thiserror::Error;

use crate::error::ErrorName;
use crate::model::ValidatedGeometry;
use crate::orthoglide::{self, assembly_margin, feasibility_margin, jacobian_at, OrthoglideError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WorkspaceError {
    #[error("bounds must be finite with min < max on every axis")]
    BadBounds,
    #[error("resolution must be at least 2, got {0}")]
    BadResolution(usize),
    #[error("tolerance must be positive and finite, got {0}")]
    BadTolerance(f64),
    #[error("no feasible point inside the search bounds")]
    EmptyWorkspace,
    #[error("cube sample ({:.6}, {:.6}, {:.6}) is not feasible: {reason}", point.x, point.y, point.z)]
    CubeNotFeasible {
        point: Vector3<f64>,
        reason: FailureReason,
    },
    #[error("cannot read grid document: {0}")]
    Import(String),
}

impl ErrorName for WorkspaceError {
    fn name(&self) -> &'static str {
        match self {
            WorkspaceError::BadBounds => "BadBounds",
            WorkspaceError::BadResolution(_) => "BadResolution",
            WorkspaceError::BadTolerance(_) => "BadTolerance",
            WorkspaceError::EmptyWorkspace => "EmptyWorkspace",
            WorkspaceError::CubeNotFeasible { .. } => "CubeNotFeasible",
            WorkspaceError::Import(_) => "ImportError",
        }
    }
}

/// Why a sample point is not usable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FailureReason {
    OutsideCylinder,
    BoundarySingular,
    StrokeExceeded,
    ConeExceeded,
    SingularConfiguration,
    /// Inverse kinematics succeeds but the point lies on the mirrored side of
    /// the direct-kinematics singularity.
    WrongAssemblyMode,
    NonFinite,
}

impl FailureReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            FailureReason::OutsideCylinder => "OutsideCylinder",
            FailureReason::BoundarySingular => "BoundarySingular",
            FailureReason::StrokeExceeded => "StrokeExceeded",
            FailureReason::ConeExceeded => "ConeExceeded",
            FailureReason::SingularConfiguration => "SingularConfiguration",
            FailureReason::WrongAssemblyMode => "WrongAssemblyMode",
            FailureReason::NonFinite => "NonFinite",
        }
    }
}

impl fmt::Display for FailureReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FailureReason {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "OutsideCylinder" => FailureReason::OutsideCylinder,
            "BoundarySingular" => FailureReason::BoundarySingular,
            "StrokeExceeded" => FailureReason::StrokeExceeded,
            "ConeExceeded" => FailureReason::ConeExceeded,
            "SingularConfiguration" => FailureReason::SingularConfiguration,
            "WrongAssemblyMode" => FailureReason::WrongAssemblyMode,
            "NonFinite" => FailureReason::NonFinite,
            other => return Err(format!("unknown failure reason {other:?}")),
        })
    }
}

impl From<&OrthoglideError> for FailureReason {
    fn from(e: &OrthoglideError) -> Self {
        match e {
            OrthoglideError::OutsideCylinder(_) => FailureReason::OutsideCylinder,
            OrthoglideError::BoundarySingular(_) => FailureReason::BoundarySingular,
            OrthoglideError::StrokeExceeded(_) => FailureReason::StrokeExceeded,
            OrthoglideError::ConeExceeded(_) => FailureReason::ConeExceeded,
            OrthoglideError::NonFinite => FailureReason::NonFinite,
            OrthoglideError::SingularConfiguration
            | OrthoglideError::NoIntersection
            | OrthoglideError::BranchAmbiguous => FailureReason::SingularConfiguration,
        }
    }
}

/// Axis-aligned box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub min: Vector3<f64>,
    pub max: Vector3<f64>,
}

impl Bounds {
    pub fn new(min: Vector3<f64>, max: Vector3<f64>) -> Self {
        Bounds { min, max }
    }

    /// `[-half, half]³`.
    pub fn symmetric(half: f64) -> Self {
        Bounds::new(Vector3::repeat(-half), Vector3::repeat(half))
    }

    pub fn validate(&self) -> Result<(), WorkspaceError> {
        let ok = (0..3).all(|i| {
            self.min[i].is_finite() && self.max[i].is_finite() && self.min[i] < self.max[i]
        });
        if ok {
            Ok(())
        } else {
            Err(WorkspaceError::BadBounds)
        }
    }

    pub fn contains(&self, p: &Vector3<f64>) -> bool {
        (0..3).all(|i| self.min[i] <= p[i] && p[i] <= self.max[i])
    }

    fn clamp(&self, p: Vector3<f64>) -> Vector3<f64> {
        Vector3::from_fn(|i, _| p[i].clamp(self.min[i], self.max[i]))
    }

    /// `n` evenly spaced values on axis `i`, bounds included.
    fn linspace(&self, i: usize, n: usize) -> impl Iterator<Item = f64> + '_ {
        let step = (self.max[i] - self.min[i]) / (n - 1) as f64;
        (0..n).map(move |k| self.min[i] + step * k as f64)
    }
}

/// Evaluation of one grid cell center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellRecord {
    pub center: Vector3<f64>,
    pub feasible: bool,
    pub failure_reason: Option<FailureReason>,
    /// Amplification factors; `None` for infeasible cells.
    pub sigma_min: Option<f64>,
    pub sigma_max: Option<f64>,
    pub kappa: Option<f64>,
}

impl CellRecord {
    fn infeasible(center: Vector3<f64>, reason: FailureReason) -> Self {
        CellRecord {
            center,
            feasible: false,
            failure_reason: Some(reason),
            sigma_min: None,
            sigma_max: None,
            kappa: None,
        }
    }
}

/// Feasibility and conditioning sampled at `resolution³` cell centers.
///
/// Cells are stored with the z index varying fastest:
/// `index = (ix * resolution + iy) * resolution + iz`.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkspaceGrid {
    pub bounds: Bounds,
    pub resolution: usize,
    pub cells: Vec<CellRecord>,
}

impl WorkspaceGrid {
    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (ix * self.resolution + iy) * self.resolution + iz
    }

    pub fn cell(&self, ix: usize, iy: usize, iz: usize) -> &CellRecord {
        &self.cells[self.index(ix, iy, iz)]
    }

    pub fn feasible_count(&self) -> usize {
        self.cells.iter().filter(|c| c.feasible).count()
    }

    /// Mean of the feasible cell centers.
    pub fn feasible_centroid(&self) -> Option<Vector3<f64>> {
        centroid(self.cells.iter().filter(|c| c.feasible).map(|c| c.center))
    }
}

fn centroid(points: impl Iterator<Item = Vector3<f64>>) -> Option<Vector3<f64>> {
    let (sum, n) = points.fold((Vector3::zeros(), 0usize), |(s, n), p| (s + p, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Center of cell `k` of `n` along axis `i`.
fn cell_center(bounds: &Bounds, n: usize, i: usize, k: usize) -> f64 {
    let width = (bounds.max[i] - bounds.min[i]) / n as f64;
    bounds.min[i] + width * (k as f64 + 0.5)
}

/// Inverse kinematics plus conditioning at one point.
pub fn evaluate_point(p: &Vector3<f64>, geom: &ValidatedGeometry) -> CellRecord {
    let rho = match orthoglide::ik_translation(p, geom) {
        Ok(rho) => rho,
        Err(e) => return CellRecord::infeasible(*p, FailureReason::from(&e)),
    };
    match jacobian_at(p, &rho, geom) {
        Ok(j) => {
            let amp = j.amplification();
            CellRecord {
                center: *p,
                feasible: true,
                failure_reason: None,
                sigma_min: Some(amp.sigma_min()),
                sigma_max: Some(amp.sigma_max()),
                kappa: Some(amp.kappa),
            }
        }
        Err(e) => CellRecord::infeasible(*p, FailureReason::from(&e)),
    }
}

/// Evaluates every cell center of `bounds` split into `resolution` cells per
/// axis. Cells are evaluated in parallel; the result does not depend on the
/// evaluation order.
pub fn map_workspace(
    geom: &ValidatedGeometry,
    bounds: &Bounds,
    resolution: usize,
) -> Result<WorkspaceGrid, WorkspaceError> {
    bounds.validate()?;
    if resolution < 2 {
        return Err(WorkspaceError::BadResolution(resolution));
    }
    let n = resolution;
    let cells = (0..n * n * n)
        .into_par_iter()
        .map(|idx| {
            let (ix, iy, iz) = (idx / (n * n), (idx / n) % n, idx % n);
            let p = Vector3::new(
                cell_center(bounds, n, 0, ix),
                cell_center(bounds, n, 1, iy),
                cell_center(bounds, n, 2, iz),
            );
            evaluate_point(&p, geom)
        })
        .collect();
    Ok(WorkspaceGrid {
        bounds: *bounds,
        resolution,
        cells,
    })
}

/// Axis-aligned cube (faces parallel to the coordinate planes).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicWorkspace {
    pub center: Vector3<f64>,
    pub edge: f64,
}

impl CubicWorkspace {
    pub fn bounds(&self) -> Bounds {
        let h = Vector3::repeat(0.5 * self.edge);
        Bounds::new(self.center - h, self.center + h)
    }
}

/// Sample points certifying a cube: an `per_axis³` grid over the cube plus
/// all corners, edge midpoints and face centers.
pub fn cube_lattice(cube: &CubicWorkspace, per_axis: usize) -> Vec<Vector3<f64>> {
    let grid: Vec<f64> = if per_axis < 2 {
        vec![0.0]
    } else {
        (0..per_axis)
            .map(|k| -1.0 + 2.0 * k as f64 / (per_axis - 1) as f64)
            .collect()
    };
    let mut fractions: Vec<[f64; 3]> = Vec::with_capacity(grid.len().pow(3) + 27);
    for &a in &grid {
        for &b in &grid {
            for &c in &grid {
                fractions.push([a, b, c]);
            }
        }
    }
    // Corners, edge midpoints and face centers not already on the grid.
    let on_grid = |v: f64| grid.contains(&v);
    for a in [-1.0, 0.0, 1.0] {
        for b in [-1.0, 0.0, 1.0] {
            for c in [-1.0, 0.0, 1.0] {
                if !(on_grid(a) && on_grid(b) && on_grid(c)) {
                    fractions.push([a, b, c]);
                }
            }
        }
    }
    let half = 0.5 * cube.edge;
    fractions
        .iter()
        .map(|f| cube.center + Vector3::new(f[0], f[1], f[2]) * half)
        .collect()
}

/// Tuning of the cube search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubeSearch {
    /// Lattice points per axis used to certify a cube.
    pub lattice_per_axis: usize,
    /// Candidate centers per axis in the coarse center search.
    pub coarse_per_axis: usize,
    /// Number of best coarse candidates refined locally.
    pub refine_candidates: usize,
}

impl Default for CubeSearch {
    fn default() -> Self {
        CubeSearch {
            lattice_per_axis: 5,
            coarse_per_axis: 9,
            refine_candidates: 3,
        }
    }
}

/// Maximizes a lattice score over cube centers inside `bounds`: coarse grid
/// first, then compass search from the best candidates. Near-equal scores are
/// broken by the distance to `anchor`.
pub(crate) fn search_center<F>(
    bounds: &Bounds,
    coarse_per_axis: usize,
    refine_candidates: usize,
    min_step: f64,
    anchor: &Vector3<f64>,
    score: F,
) -> (Vector3<f64>, f64)
where
    F: Fn(&Vector3<f64>) -> f64 + Sync,
{
    let n = coarse_per_axis.max(2);
    let xs: Vec<f64> = bounds.linspace(0, n).collect();
    let ys: Vec<f64> = bounds.linspace(1, n).collect();
    let zs: Vec<f64> = bounds.linspace(2, n).collect();
    let mut scored: Vec<(f64, f64, Vector3<f64>)> = (0..n * n * n)
        .into_par_iter()
        .map(|idx| {
            let c = Vector3::new(xs[idx / (n * n)], ys[(idx / n) % n], zs[idx % n]);
            (score(&c), (c - anchor).norm(), c)
        })
        .collect();
    let scale = (bounds.max - bounds.min).amax();
    let same = |a: f64, b: f64| (a - b).abs() <= 1e-12 * scale;
    let better = |a: &(f64, f64, Vector3<f64>), b: &(f64, f64, Vector3<f64>)| {
        if same(a.0, b.0) {
            a.1 < b.1
        } else {
            a.0 > b.0
        }
    };
    // Best score first, then move the near-ties with the top score ahead by
    // their distance to the anchor.
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.total_cmp(&b.1)));
    let top = scored[0].0;
    let ties = scored.iter().take_while(|s| same(s.0, top)).count();
    scored[..ties].sort_by(|a, b| a.1.total_cmp(&b.1));

    let directions: Vec<Vector3<f64>> = (0..27)
        .map(|k| {
            Vector3::new(
                (k / 9) as f64 - 1.0,
                ((k / 3) % 3) as f64 - 1.0,
                (k % 3) as f64 - 1.0,
            )
        })
        .filter(|d| d.norm_squared() > 0.0)
        .collect();
    let initial_step = scale / (n - 1) as f64 / 2.0;

    let refined: Vec<(f64, f64, Vector3<f64>)> = scored
        .iter()
        .take(refine_candidates.max(1))
        .map(|&(mut best, _, mut c)| {
            let mut step = initial_step;
            while step > min_step {
                let mut moved = false;
                for d in &directions {
                    let trial = bounds.clamp(c + d * step);
                    let s = score(&trial);
                    if s > best {
                        best = s;
                        c = trial;
                        moved = true;
                        break;
                    }
                }
                if !moved {
                    step *= 0.5;
                }
            }
            (best, (c - anchor).norm(), c)
        })
        .collect();
    let winner = refined
        .into_iter()
        .reduce(|a, b| if better(&b, &a) { b } else { a })
        .expect("at least one candidate");
    (winner.2, winner.0)
}

/// `true` when every lattice point passes inverse kinematics.
pub fn cube_is_feasible(geom: &ValidatedGeometry, cube: &CubicWorkspace, per_axis: usize) -> bool {
    cube_lattice(cube, per_axis)
        .iter()
        .all(|p| orthoglide::ik_translation(p, geom).is_ok())
}

fn lattice_margin(
    geom: &ValidatedGeometry,
    offsets: &[Vector3<f64>],
    center: &Vector3<f64>,
) -> f64 {
    offsets
        .iter()
        .map(|o| feasibility_margin(&(center + o), geom))
        .fold(f64::INFINITY, f64::min)
}

/// Largest axis-aligned cube whose sample lattice is feasible, with its
/// center inside `search`. The edge is bisected down to `tolerance`.
pub fn largest_cube(
    geom: &ValidatedGeometry,
    search: &Bounds,
    tolerance: f64,
    options: &CubeSearch,
) -> Result<CubicWorkspace, WorkspaceError> {
    search.validate()?;
    if !(tolerance > 0.0 && tolerance.is_finite()) {
        return Err(WorkspaceError::BadTolerance(tolerance));
    }
    let probe = map_workspace(geom, search, options.coarse_per_axis.max(2))?;
    let anchor = probe
        .feasible_centroid()
        .ok_or(WorkspaceError::EmptyWorkspace)?;

    let try_edge = |edge: f64| -> Option<CubicWorkspace> {
        let unit = CubicWorkspace {
            center: Vector3::zeros(),
            edge,
        };
        let offsets = cube_lattice(&unit, options.lattice_per_axis);
        let (center, margin) = search_center(
            search,
            options.coarse_per_axis,
            options.refine_candidates,
            tolerance * 1e-3,
            &anchor,
            |c| lattice_margin(geom, &offsets, c),
        );
        let cube = CubicWorkspace { center, edge };
        (margin > 0.0 && cube_is_feasible(geom, &cube, options.lattice_per_axis)).then_some(cube)
    };

    let mut best = try_edge(0.0).ok_or(WorkspaceError::EmptyWorkspace)?;
    // No cube wider than √2·L fits inside the three leg cylinders.
    let mut lo = 0.0;
    let mut hi = 2.0 * geom.leg_length;
    while hi - lo > tolerance {
        let mid = 0.5 * (lo + hi);
        match try_edge(mid) {
            Some(cube) => {
                lo = mid;
                best = cube;
            }
            None => hi = mid,
        }
    }
    Ok(best)
}

/// Extremes of the amplification factors over a cube.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dexterity {
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub worst_kappa: f64,
}

/// Evaluates the translation Jacobian over the cube lattice.
///
/// Every sample must pass inverse kinematics and lie in the working assembly
/// mode; a cube straddling the direct-kinematics singularity is rejected.
pub fn dexterity_over_cube(
    geom: &ValidatedGeometry,
    cube: &CubicWorkspace,
    samples_per_axis: usize,
) -> Result<Dexterity, WorkspaceError> {
    let points = cube_lattice(cube, samples_per_axis);
    let per_point: Result<Vec<_>, WorkspaceError> = points
        .par_iter()
        .map(|p| {
            let fail = |reason| WorkspaceError::CubeNotFeasible { point: *p, reason };
            let rho =
                orthoglide::ik_translation(p, geom).map_err(|e| fail(FailureReason::from(&e)))?;
            if assembly_margin(p, &rho, geom.leg_length) <= 0.0 {
                return Err(fail(FailureReason::WrongAssemblyMode));
            }
            let amp = jacobian_at(p, &rho, geom)
                .map_err(|e| fail(FailureReason::from(&e)))?
                .amplification();
            Ok((amp.sigma_min(), amp.sigma_max(), amp.kappa))
        })
        .collect();
    let init = Dexterity {
        sigma_min: f64::INFINITY,
        sigma_max: 0.0,
        worst_kappa: 1.0,
    };
    Ok(per_point?
        .into_iter()
        .fold(init, |d, (lo, hi, k)| Dexterity {
            sigma_min: d.sigma_min.min(lo),
            sigma_max: d.sigma_max.max(hi),
            worst_kappa: d.worst_kappa.max(k),
        }))
}
