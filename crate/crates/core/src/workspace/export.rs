//! Plot-data emission for workspace grids.
//!
//! All numbers are written with 9 significant digits in `%.9g` style, with a
//! decimal point regardless of locale.

use std::fmt::Write as _;
use std::str::FromStr;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::{Bounds, CellRecord, FailureReason, WorkspaceError, WorkspaceGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Json,
    /// Feasible cell centers only, one `x y z` line each.
    Xyz,
}

impl FromStr for ExportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ExportFormat::Csv),
            "json" => Ok(ExportFormat::Json),
            "xyz" => Ok(ExportFormat::Xyz),
            other => Err(format!(
                "unknown format {other:?}, expected csv, json or xyz"
            )),
        }
    }
}

/// Formats like C's `%.9g`: 9 significant digits, trailing zeros removed,
/// exponent form outside `[1e-5, 1e9)`.
pub fn fmt_sig9(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!(
            "{}e{}{:02}",
            trim_zeros(mantissa.to_string()),
            if exp < 0 { '-' } else { '+' },
            exp.abs()
        )
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Rounds to the value that [`fmt_sig9`] prints.
pub fn round_sig9(x: f64) -> f64 {
    if x.is_finite() {
        fmt_sig9(x).parse().expect("formatted float parses")
    } else {
        x
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_sig9).unwrap_or_default()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridDoc {
    bounds: BoundsDoc,
    resolution: usize,
    cells: Vec<CellDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundsDoc {
    min: [f64; 3],
    max: [f64; 3],
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CellDoc {
    x: f64,
    y: f64,
    z: f64,
    feasible: bool,
    sigma_min: Option<f64>,
    sigma_max: Option<f64>,
    kappa: Option<f64>,
    reason: Option<String>,
}

fn round3(v: &Vector3<f64>) -> [f64; 3] {
    [round_sig9(v.x), round_sig9(v.y), round_sig9(v.z)]
}

pub fn export_grid(grid: &WorkspaceGrid, format: ExportFormat) -> String {
    match format {
        ExportFormat::Csv => {
            let mut out = String::from("x,y,z,feasible,sigma_min,sigma_max,kappa,reason\n");
            for c in &grid.cells {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    fmt_sig9(c.center.x),
                    fmt_sig9(c.center.y),
                    fmt_sig9(c.center.z),
                    u8::from(c.feasible),
                    opt(c.sigma_min),
                    opt(c.sigma_max),
                    opt(c.kappa),
                    c.failure_reason.map(|r| r.as_str()).unwrap_or(""),
                );
            }
            out
        }
        ExportFormat::Xyz => {
            let mut out = String::new();
            for c in grid.cells.iter().filter(|c| c.feasible) {
                let _ = writeln!(
                    out,
                    "{} {} {}",
                    fmt_sig9(c.center.x),
                    fmt_sig9(c.center.y),
                    fmt_sig9(c.center.z)
                );
            }
            out
        }
        ExportFormat::Json => {
            let doc = GridDoc {
                bounds: BoundsDoc {
                    min: round3(&grid.bounds.min),
                    max: round3(&grid.bounds.max),
                },
                resolution: grid.resolution,
                cells: grid
                    .cells
                    .iter()
                    .map(|c| {
                        let [x, y, z] = round3(&c.center);
                        CellDoc {
                            x,
                            y,
                            z,
                            feasible: c.feasible,
                            sigma_min: c.sigma_min.map(round_sig9),
                            sigma_max: c.sigma_max.map(round_sig9),
                            kappa: c.kappa.map(round_sig9),
                            reason: c.failure_reason.map(|r| r.as_str().to_string()),
                        }
                    })
                    .collect(),
            };
            serde_json::to_string(&doc).expect("grid serializes")
        }
    }
}

/// Reads a grid written by [`export_grid`] in JSON form.
pub fn import_grid_json(text: &str) -> Result<WorkspaceGrid, WorkspaceError> {
    let doc: GridDoc =
        serde_json::from_str(text).map_err(|e| WorkspaceError::Import(e.to_string()))?;
    let n = doc.resolution;
    if n.checked_pow(3) != Some(doc.cells.len()) {
        return Err(WorkspaceError::Import(format!(
            "{} cells do not match resolution {n}",
            doc.cells.len()
        )));
    }
    let cells = doc
        .cells
        .into_iter()
        .map(|c| {
            let failure_reason = c
                .reason
                .map(|r| r.parse::<FailureReason>())
                .transpose()
                .map_err(WorkspaceError::Import)?;
            Ok(CellRecord {
                center: Vector3::new(c.x, c.y, c.z),
                feasible: c.feasible,
                failure_reason,
                sigma_min: c.sigma_min,
                sigma_max: c.sigma_max,
                kappa: c.kappa,
            })
        })
        .collect::<Result<Vec<_>, WorkspaceError>>()?;
    Ok(WorkspaceGrid {
        bounds: Bounds::new(Vector3::from(doc.bounds.min), Vector3::from(doc.bounds.max)),
        resolution: n,
        cells,
    })
}
