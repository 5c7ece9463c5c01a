//! Command-line front end. Lengths are in meters and angles in degrees;
//! numbers are printed with 9 significant digits.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use orthohaptic::optimize::{
    size_leg_length, sizing_json, sweep_csv, sweep_json, sweep_report, SizingOptions,
};
use orthohaptic::orthoglide::{fk_translation, ik_translation, jacobian_translation};
use orthohaptic::transmission::double_cardan_transfer;
use orthohaptic::workspace::{
    export_grid, fmt_sig9, largest_cube, map_workspace, Bounds, CubeSearch, ExportFormat,
};
use orthohaptic::wrist::{ik_wrist, WristError};
use orthohaptic::{
    load_geometry, rad_to_deg, ErrorName, Quaternion, TranslationJoints, UnitQuaternion,
    ValidatedGeometry, Vector3,
};

#[derive(Parser, Debug)]
#[command(
    name = "orthohaptic",
    version,
    about = "Kinematics, workspace and sizing of the orthogonal haptic device"
)]
struct Cli {
    /// Geometry file (JSON). Defaults: L = 1 m, strokes [0.05, 2] m, cone 60°, wrist ±45°.
    #[arg(long, global = true)]
    geom: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Prismatic joint positions for a platform position.
    Ik {
        #[arg(allow_negative_numbers = true)]
        x: f64,
        #[arg(allow_negative_numbers = true)]
        y: f64,
        #[arg(allow_negative_numbers = true)]
        z: f64,
    },
    /// Platform position for prismatic joint positions.
    Fk {
        #[arg(allow_negative_numbers = true)]
        r1: f64,
        #[arg(allow_negative_numbers = true)]
        r2: f64,
        #[arg(allow_negative_numbers = true)]
        r3: f64,
    },
    /// Wrist joint angles (degrees) for a scalar-first quaternion.
    WristIk {
        #[arg(allow_negative_numbers = true)]
        qw: f64,
        #[arg(allow_negative_numbers = true)]
        qx: f64,
        #[arg(allow_negative_numbers = true)]
        qy: f64,
        #[arg(allow_negative_numbers = true)]
        qz: f64,
    },
    /// Translation Jacobian and velocity amplification factors.
    Jacobian {
        #[arg(allow_negative_numbers = true)]
        x: f64,
        #[arg(allow_negative_numbers = true)]
        y: f64,
        #[arg(allow_negative_numbers = true)]
        z: f64,
    },
    /// Shaft angles through the double universal joint of one leg over a revolution.
    Transmission {
        #[arg(allow_negative_numbers = true)]
        x: f64,
        #[arg(allow_negative_numbers = true)]
        y: f64,
        #[arg(allow_negative_numbers = true)]
        z: f64,
        #[arg(long)]
        leg: usize,
        #[arg(long, default_value_t = 36)]
        samples: usize,
    },
    /// Feasibility and conditioning over a grid of cells.
    Map {
        /// Half-width of a centered box, or `xmin ymin zmin xmax ymax zmax`.
        #[arg(long, num_args = 1..=6, allow_negative_numbers = true, required = true)]
        bounds: Vec<f64>,
        #[arg(long, default_value_t = 21)]
        res: usize,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = MapFormat::Csv)]
        format: MapFormat,
    },
    /// Largest axis-aligned cube inside the workspace.
    Cube {
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
    },
    /// Smallest leg length giving a cube of the requested edge within the amplification bound.
    Optimize {
        #[arg(long, allow_negative_numbers = true)]
        edge: f64,
        #[arg(long, allow_negative_numbers = true)]
        psi: f64,
        #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
        format: ReportFormat,
    },
    /// Achieved cube edge and pass/fail for a list of leg lengths.
    Sweep {
        #[arg(long, num_args = 1.., allow_negative_numbers = true, required = true)]
        lengths: Vec<f64>,
        #[arg(long, allow_negative_numbers = true)]
        edge: f64,
        #[arg(long, allow_negative_numbers = true)]
        psi: f64,
        #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
        format: TableFormat,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MapFormat {
    Csv,
    Json,
    Xyz,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TableFormat {
    Csv,
    Json,
}

struct Failure {
    name: &'static str,
    message: String,
    usage: bool,
}

impl<E: ErrorName + std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure {
            name: e.name(),
            message: e.to_string(),
            usage: false,
        }
    }
}

fn usage(message: String) -> Failure {
    Failure {
        name: "UsageError",
        message,
        usage: true,
    }
}

fn io_failure(e: std::io::Error) -> Failure {
    Failure {
        name: "IoError",
        message: e.to_string(),
        usage: false,
    }
}

fn vec3(v: &Vector3<f64>) -> String {
    format!("{} {} {}", fmt_sig9(v.x), fmt_sig9(v.y), fmt_sig9(v.z))
}

fn geometry(path: &Option<PathBuf>) -> Result<ValidatedGeometry, Failure> {
    match path {
        None => Ok(ValidatedGeometry::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(io_failure)?;
            Ok(load_geometry(&text)?)
        }
    }
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<(), Failure> {
    let geom = geometry(&cli.geom)?;
    let mut text = String::new();
    match cli.command {
        Command::Ik { x, y, z } => {
            let rho = ik_translation(&Vector3::new(x, y, z), &geom)?;
            text = format!("rho = {}\n", vec3(&rho.rho));
        }
        Command::Fk { r1, r2, r3 } => {
            let p = fk_translation(&TranslationJoints::new(r1, r2, r3), &geom)?;
            text = format!("p = {}\n", vec3(&p));
        }
        Command::WristIk { qw, qx, qy, qz } => {
            let raw = unit_quaternion(qw, qx, qy, qz).ok_or(WristError::NonFinite)?;
            let theta = ik_wrist(&raw)?;
            let deg = theta.theta.map(rad_to_deg);
            text = format!("theta = {}\n", vec3(&deg));
        }
        Command::Jacobian { x, y, z } => {
            let j = jacobian_translation(&Vector3::new(x, y, z), &geom)?;
            let m = j.matrix();
            for r in 0..3 {
                text.push_str(&format!(
                    "{} {} {}\n",
                    fmt_sig9(m[(r, 0)]),
                    fmt_sig9(m[(r, 1)]),
                    fmt_sig9(m[(r, 2)])
                ));
            }
            let a = j.amplification();
            text.push_str(&format!(
                "sigma = {} {} {}\nkappa = {}\n",
                fmt_sig9(a.sigma[0]),
                fmt_sig9(a.sigma[1]),
                fmt_sig9(a.sigma[2]),
                fmt_sig9(a.kappa)
            ));
        }
        Command::Transmission {
            x,
            y,
            z,
            leg,
            samples,
        } => {
            if samples == 0 {
                return Err(usage("--samples must be at least 1".into()));
            }
            let p = Vector3::new(x, y, z);
            text.push_str("phi_motor,phi_after_u1,phi_after_u2\n");
            for k in 0..samples {
                let phi = 2.0 * std::f64::consts::PI * k as f64 / samples as f64;
                let s = double_cardan_transfer(phi, &p, &geom, leg)?;
                if k == 0 {
                    text.insert_str(
                        0,
                        &format!(
                            "beta = {}\nphase = {}\n",
                            fmt_sig9(rad_to_deg(s.bend_angle)),
                            fmt_sig9(rad_to_deg(s.phase))
                        ),
                    );
                }
                text.push_str(&format!(
                    "{},{},{}\n",
                    fmt_sig9(rad_to_deg(s.phi_motor)),
                    fmt_sig9(rad_to_deg(s.phi_after_u1)),
                    fmt_sig9(rad_to_deg(s.phi_after_u2))
                ));
            }
        }
        Command::Map {
            bounds,
            res,
            out: path,
            format,
        } => {
            let b = match bounds.as_slice() {
                [h] => Bounds::symmetric(*h),
                [a, b, c, d, e, f] => {
                    Bounds::new(Vector3::new(*a, *b, *c), Vector3::new(*d, *e, *f))
                }
                other => {
                    return Err(usage(format!(
                        "--bounds takes 1 or 6 values, got {}",
                        other.len()
                    )))
                }
            };
            let grid = map_workspace(&geom, &b, res)?;
            let format = match format {
                MapFormat::Csv => ExportFormat::Csv,
                MapFormat::Json => ExportFormat::Json,
                MapFormat::Xyz => ExportFormat::Xyz,
            };
            let doc = export_grid(&grid, format);
            match path {
                Some(p) => {
                    std::fs::write(&p, doc).map_err(io_failure)?;
                    text = format!(
                        "feasible = {} of {}\n",
                        grid.feasible_count(),
                        grid.cells.len()
                    );
                }
                None => text = doc,
            }
        }
        Command::Cube { tol } => {
            let cube = largest_cube(
                &geom,
                &Bounds::symmetric(geom.leg_length),
                tol,
                &CubeSearch::default(),
            )?;
            text = format!(
                "edge = {}\ncenter = {}\n",
                fmt_sig9(cube.edge),
                vec3(&cube.center)
            );
        }
        Command::Optimize { edge, psi, format } => {
            let r = size_leg_length(edge, psi, &geom, &SizingOptions::default())?;
            text = match format {
                ReportFormat::Json => sizing_json(&r) + "\n",
                ReportFormat::Text => {
                    let mut t = format!(
                        "leg_length = {}\nstroke = {} {}\ncenter = {}\nsigma = {} {}\nkappa = {}\n",
                        fmt_sig9(r.leg_length),
                        fmt_sig9(r.geometry.stroke_min),
                        fmt_sig9(r.geometry.stroke_max),
                        vec3(&r.cube.center),
                        fmt_sig9(r.dexterity.sigma_min),
                        fmt_sig9(r.dexterity.sigma_max),
                        fmt_sig9(r.dexterity.worst_kappa),
                    );
                    for (i, (lo, hi)) in r.strokes_per_leg.iter().enumerate() {
                        t.push_str(&format!(
                            "stroke_leg{} = {} {}\n",
                            i + 1,
                            fmt_sig9(*lo),
                            fmt_sig9(*hi)
                        ));
                    }
                    let verdict = |ok: bool| if ok { "pass" } else { "fail" };
                    t.push_str(&format!(
                        "check at {} = {}\ncheck at {} = {}\n",
                        fmt_sig9(r.leg_length),
                        verdict(r.certificate.passes_at_leg_length),
                        fmt_sig9(r.certificate.lower_leg_length),
                        verdict(!r.certificate.fails_below)
                    ));
                    t
                }
            };
        }
        Command::Sweep {
            lengths,
            edge,
            psi,
            format,
        } => {
            let rows = sweep_report(&geom, &lengths, edge, psi, &SizingOptions::default())?;
            text = match format {
                TableFormat::Csv => sweep_csv(&rows),
                TableFormat::Json => sweep_json(&rows) + "\n",
            };
        }
    }
    out.write_all(text.as_bytes()).map_err(io_failure)
}

fn unit_quaternion(w: f64, x: f64, y: f64, z: f64) -> Option<UnitQuaternion<f64>> {
    let q = Quaternion::new(w, x, y, z);
    let n = q.norm();
    (n.is_finite() && n > 0.0).then(|| UnitQuaternion::new_normalize(q))
}

/// Runs one invocation; returns the process exit code.
fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(rendered.as_bytes())
            } else {
                err.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match execute(cli, out) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(err, "error: {}: {}", f.name, f.message);
            if f.usage {
                2
            } else {
                1
            }
        }
    }
}

fn main() -> ExitCode {
    let code = run(
        std::env::args_os(),
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    );
    ExitCode::from(code)
}
