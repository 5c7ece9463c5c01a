//! Leg-length sizing for a prescribed cubic workspace.
//!
//! Given a cube edge `a` and an amplification bound `ψ > 1`, the sizing finds
//! the smallest leg length `L` for which some axis-aligned cube of edge `a`
//! lies in the working assembly mode and all velocity amplification factors
//! over its sample lattice stay in `[1/ψ, ψ]`. Strokes are outputs of the
//! sizing: the stroke interval of the template is ignored and the interval
//! the cube actually needs is reported. The cone limit of the template
//! applies.

use nalgebra::Vector3;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::error::ErrorName;
use crate::model::{DeviceGeometry, GeometryError, ValidatedGeometry};
use crate::orthoglide::{self, assembly_margin, feasibility_margin, jacobian_at};
use crate::workspace::{
    cube_lattice, dexterity_over_cube, largest_cube, Bounds, CubeSearch, CubicWorkspace, Dexterity,
};
use crate::workspace::{fmt_sig9, round_sig9};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimizeError {
    #[error("amplification bound must be a finite number >= 1, got {0}")]
    BadBound(f64),
    #[error("target edge must be positive and finite, got {0}")]
    BadEdge(f64),
    #[error("no leg length in [{lo}, {hi}] meets the requested cube and bound")]
    Unachievable { lo: f64, hi: f64 },
    #[error("the list of leg lengths is empty")]
    EmptyInput,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

impl ErrorName for OptimizeError {
    fn name(&self) -> &'static str {
        match self {
            OptimizeError::BadBound(_) => "BadBound",
            OptimizeError::BadEdge(_) => "BadEdge",
            OptimizeError::Unachievable { .. } => "Unachievable",
            OptimizeError::EmptyInput => "EmptyInput",
            OptimizeError::Geometry(e) => e.name(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SizingOptions {
    /// Relative bisection tolerance on the leg length.
    pub rel_tol: f64,
    pub lattice_per_axis: usize,
    /// Coarse samples of the center along the (1, 1, 1) line.
    pub diagonal_samples: usize,
    pub coarse_per_axis: usize,
    pub refine_candidates: usize,
    /// Bracket growth steps before giving up.
    pub max_bracket_steps: usize,
    /// Relative tolerance of the largest-cube bisection in sweeps.
    pub cube_rel_tol: f64,
}

impl Default for SizingOptions {
    fn default() -> Self {
        SizingOptions {
            rel_tol: 1e-6,
            lattice_per_axis: 5,
            diagonal_samples: 41,
            coarse_per_axis: 7,
            refine_candidates: 2,
            max_bracket_steps: 40,
            cube_rel_tol: 1e-4,
        }
    }
}

/// Template geometry with leg length `l` and unbounded strokes.
fn stroke_free(template: &DeviceGeometry, l: f64) -> Result<ValidatedGeometry, GeometryError> {
    template
        .with_leg_length(l)
        .with_strokes(f64::NEG_INFINITY, f64::INFINITY)
        .validate()
}

/// Per-point score: nonnegative iff the point is feasible, in the working
/// mode and within the amplification bound. Failures score below −100.
fn point_score(p: &Vector3<f64>, geom: &ValidatedGeometry, log_psi: f64) -> f64 {
    let l = geom.leg_length;
    let rho = match orthoglide::ik_translation(p, geom) {
        Ok(rho) => rho,
        Err(_) => return -1e3 + (feasibility_margin(p, geom) / l).min(0.0),
    };
    let mode = assembly_margin(p, &rho, l);
    if mode <= 0.0 {
        return -1e3 + mode;
    }
    match jacobian_at(p, &rho, geom) {
        Ok(j) => {
            let amp = j.amplification();
            let worst = amp.sigma_min().ln().abs().max(amp.sigma_max().ln().abs());
            (log_psi - worst).max(-100.0)
        }
        Err(_) => -1e3,
    }
}

/// Maximizes `score(t)` for `t` in `[−half, half]`: uniform scan, then golden
/// section inside the best scan bracket. Ties go to the smaller `|t|`.
fn diagonal_search<F>(half: f64, samples: usize, tol: f64, score: F) -> f64
where
    F: Fn(f64) -> f64 + Sync,
{
    let n = samples.max(3);
    let at = |k: usize| -half + 2.0 * half * k as f64 / (n - 1) as f64;
    let scan: Vec<f64> = (0..n).into_par_iter().map(|k| score(at(k))).collect();
    let mut k_best = 0;
    for k in 1..n {
        let (s, b) = (scan[k], scan[k_best]);
        if s > b || (s == b && at(k).abs() < at(k_best).abs()) {
            k_best = k;
        }
    }
    let (mut best_t, mut best_s) = (at(k_best), scan[k_best]);
    let mut a = at(k_best.saturating_sub(1));
    let mut b = at((k_best + 1).min(n - 1));
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (score(x1), score(x2));
    while b - a > tol {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = score(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = score(x2);
        }
        for (x, f) in [(x1, f1), (x2, f2)] {
            if f > best_s {
                best_t = x;
                best_s = f;
            }
        }
    }
    best_t
}

/// Outcome of the sizing check at one leg length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckOutcome {
    pub passed: bool,
    /// Best cube found by the center search.
    pub cube: CubicWorkspace,
    /// Amplification extremes over that cube, when it is feasible.
    pub dexterity: Option<Dexterity>,
}

/// Searches a cube of edge `target_edge` at leg length `l` and tests it
/// against `[1/ψ, ψ]`.
pub fn sizing_check(
    l: f64,
    target_edge: f64,
    psi: f64,
    template: &DeviceGeometry,
    options: &SizingOptions,
) -> Result<CheckOutcome, OptimizeError> {
    let geom = stroke_free(template, l)?;
    let offsets = cube_lattice(
        &CubicWorkspace {
            center: Vector3::zeros(),
            edge: target_edge,
        },
        options.lattice_per_axis,
    );
    let log_psi = psi.ln();
    let lattice_score = |c: &Vector3<f64>| {
        offsets
            .iter()
            .map(|o| point_score(&(c + o), &geom, log_psi))
            .fold(f64::INFINITY, f64::min)
    };
    // Every leg has the same limits, so the score is invariant under axis
    // permutations of the center and its maximum lies on the (1, 1, 1) line.
    let t = diagonal_search(l, options.diagonal_samples, 1e-12 * l, |t| {
        lattice_score(&Vector3::repeat(t))
    });
    let center = Vector3::repeat(t);
    let cube = CubicWorkspace {
        center,
        edge: target_edge,
    };
    let dexterity = dexterity_over_cube(&geom, &cube, options.lattice_per_axis).ok();
    let passed = dexterity
        .map(|d| d.sigma_min >= 1.0 / psi && d.sigma_max <= psi)
        .unwrap_or(false);
    Ok(CheckOutcome {
        passed,
        cube,
        dexterity,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Certificate {
    /// Leg length at which the check must fail, `L·(1 − 10·tol)`.
    pub lower_leg_length: f64,
    pub passes_at_leg_length: bool,
    pub fails_below: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SizingReport {
    /// Template with the sized leg length and the required stroke interval.
    pub geometry: ValidatedGeometry,
    pub leg_length: f64,
    pub cube: CubicWorkspace,
    pub dexterity: Dexterity,
    /// `(min ρ_i, max ρ_i)` over the cube lattice, per leg.
    pub strokes_per_leg: [(f64, f64); 3],
    pub certificate: Certificate,
    /// Number of sizing checks evaluated.
    pub evaluations: usize,
}

/// Smallest leg length for which a cube of edge `target_edge` meets the
/// amplification bound `psi`.
pub fn size_leg_length(
    target_edge: f64,
    psi: f64,
    template: &DeviceGeometry,
    options: &SizingOptions,
) -> Result<SizingReport, OptimizeError> {
    if !(target_edge > 0.0 && target_edge.is_finite()) {
        return Err(OptimizeError::BadEdge(target_edge));
    }
    if !(psi >= 1.0 && psi.is_finite()) {
        return Err(OptimizeError::BadBound(psi));
    }
    // Exact isotropy holds at a single point only.
    if psi == 1.0 {
        return Err(OptimizeError::Unachievable {
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    let mut evaluations = 0;
    let mut check = |l: f64| -> Result<CheckOutcome, OptimizeError> {
        evaluations += 1;
        sizing_check(l, target_edge, psi, template, options)
    };

    // Bracket: `lo` fails, `hi` passes. Lengths stay multiples of the edge by
    // powers of two so that the search is exactly scale-equivariant.
    let mut hi = target_edge;
    let mut lo;
    let mut best = check(hi)?;
    if best.passed {
        lo = 0.5 * hi;
        let mut steps = 0;
        loop {
            let out = check(lo)?;
            if !out.passed {
                break;
            }
            hi = lo;
            best = out;
            lo *= 0.5;
            steps += 1;
            if steps > options.max_bracket_steps {
                return Err(OptimizeError::Unachievable { lo, hi });
            }
        }
    } else {
        lo = hi;
        let mut steps = 0;
        loop {
            hi *= 2.0;
            let out = check(hi)?;
            if out.passed {
                best = out;
                break;
            }
            lo = hi;
            steps += 1;
            if steps > options.max_bracket_steps {
                return Err(OptimizeError::Unachievable {
                    lo: target_edge,
                    hi,
                });
            }
        }
    }

    while hi - lo > options.rel_tol * hi {
        let mid = 0.5 * (lo + hi);
        let out = check(mid)?;
        if out.passed {
            hi = mid;
            best = out;
        } else {
            lo = mid;
        }
    }

    let lower = hi * (1.0 - 10.0 * options.rel_tol);
    let certificate = Certificate {
        lower_leg_length: lower,
        passes_at_leg_length: check(hi)?.passed,
        fails_below: !check(lower)?.passed,
    };

    let free = stroke_free(template, hi)?;
    let mut strokes_per_leg = [(f64::INFINITY, f64::NEG_INFINITY); 3];
    for p in cube_lattice(&best.cube, options.lattice_per_axis) {
        let rho = orthoglide::ik_translation(&p, &free)
            .map_err(|_| OptimizeError::Unachievable { lo, hi })?;
        for (i, s) in strokes_per_leg.iter_mut().enumerate() {
            s.0 = s.0.min(rho.rho[i]);
            s.1 = s.1.max(rho.rho[i]);
        }
    }
    let stroke_min = strokes_per_leg
        .iter()
        .map(|s| s.0)
        .fold(f64::INFINITY, f64::min);
    let stroke_max = strokes_per_leg
        .iter()
        .map(|s| s.1)
        .fold(f64::NEG_INFINITY, f64::max);
    let geometry = template
        .with_leg_length(hi)
        .with_strokes(stroke_min, stroke_max)
        .validate()?;
    let dexterity = best.dexterity.expect("passing check has dexterity");

    Ok(SizingReport {
        geometry,
        leg_length: hi,
        cube: best.cube,
        dexterity,
        strokes_per_leg,
        certificate,
        evaluations,
    })
}

/// One row of a leg-length sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub leg_length: f64,
    /// Edge of the largest feasible cube.
    pub achieved_edge: Option<f64>,
    /// Worst condition number over the best cube of the target edge.
    pub worst_kappa: Option<f64>,
    pub pass: bool,
    /// `pass`, `fail`, or the name of the error hit on this row.
    pub status: String,
}

/// Evaluates each leg length independently; rows keep the input order.
pub fn sweep_report(
    template: &DeviceGeometry,
    lengths: &[f64],
    target_edge: f64,
    psi: f64,
    options: &SizingOptions,
) -> Result<Vec<SweepRow>, OptimizeError> {
    if lengths.is_empty() {
        return Err(OptimizeError::EmptyInput);
    }
    if !(target_edge > 0.0 && target_edge.is_finite()) {
        return Err(OptimizeError::BadEdge(target_edge));
    }
    if !(psi >= 1.0 && psi.is_finite()) {
        return Err(OptimizeError::BadBound(psi));
    }
    Ok(lengths
        .par_iter()
        .map(|&l| sweep_row(template, l, target_edge, psi, options))
        .collect())
}

fn sweep_row(
    template: &DeviceGeometry,
    l: f64,
    target_edge: f64,
    psi: f64,
    options: &SizingOptions,
) -> SweepRow {
    let failed = |status: &str| SweepRow {
        leg_length: l,
        achieved_edge: None,
        worst_kappa: None,
        pass: false,
        status: status.to_string(),
    };
    let geom = match stroke_free(template, l) {
        Ok(g) => g,
        Err(e) => return failed(e.name()),
    };
    let search = CubeSearch {
        lattice_per_axis: options.lattice_per_axis,
        coarse_per_axis: options.coarse_per_axis,
        refine_candidates: options.refine_candidates,
    };
    let achieved = match largest_cube(
        &geom,
        &Bounds::symmetric(l),
        options.cube_rel_tol * l,
        &search,
    ) {
        Ok(cube) => cube.edge,
        Err(e) => return failed(e.name()),
    };
    match sizing_check(l, target_edge, psi, template, options) {
        Ok(out) => SweepRow {
            leg_length: l,
            achieved_edge: Some(achieved),
            worst_kappa: out.dexterity.map(|d| d.worst_kappa),
            pass: out.passed,
            status: if out.passed { "pass" } else { "fail" }.to_string(),
        },
        Err(e) => SweepRow {
            achieved_edge: Some(achieved),
            ..failed(e.name())
        },
    }
}

fn opt_sig9(x: Option<f64>) -> String {
    x.map(fmt_sig9).unwrap_or_default()
}

/// `leg_length,achieved_edge,worst_kappa,pass,status` rows.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("leg_length,achieved_edge,worst_kappa,pass,status\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_sig9(r.leg_length),
            opt_sig9(r.achieved_edge),
            opt_sig9(r.worst_kappa),
            u8::from(r.pass),
            r.status
        ));
    }
    out
}

pub fn sweep_json(rows: &[SweepRow]) -> String {
    let rows: Vec<_> = rows
        .iter()
        .map(|r| {
            json!({
                "leg_length": round_sig9(r.leg_length),
                "achieved_edge": r.achieved_edge.map(round_sig9),
                "worst_kappa": r.worst_kappa.map(round_sig9),
                "pass": r.pass,
                "status": r.status,
            })
        })
        .collect();
    serde_json::to_string(&rows).expect("rows serialize")
}

pub fn sizing_json(report: &SizingReport) -> String {
    let v3 = |v: &Vector3<f64>| [round_sig9(v.x), round_sig9(v.y), round_sig9(v.z)];
    let doc = json!({
        "leg_length": round_sig9(report.leg_length),
        "stroke": [round_sig9(report.geometry.stroke_min), round_sig9(report.geometry.stroke_max)],
        "strokes_per_leg": report.strokes_per_leg.map(|(a, b)| [round_sig9(a), round_sig9(b)]),
        "cube": { "center": v3(&report.cube.center), "edge": round_sig9(report.cube.edge) },
        "sigma_min": round_sig9(report.dexterity.sigma_min),
        "sigma_max": round_sig9(report.dexterity.sigma_max),
        "worst_kappa": round_sig9(report.dexterity.worst_kappa),
        "certificate": {
            "passes_at_leg_length": report.certificate.passes_at_leg_length,
            "lower_leg_length": round_sig9(report.certificate.lower_leg_length),
            "fails_below": report.certificate.fails_below,
        },
        "evaluations": report.evaluations,
    });
    serde_json::to_string(&doc).expect("report serializes")
}
