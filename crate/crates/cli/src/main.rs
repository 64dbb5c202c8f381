//! `pkm`: inverse and forward kinematics of the serial-parallel machine from
//! the command line.
//!
//! Exit codes: 0 when at least one solution is printed, 1 on bad usage or
//! input, 2 when there is no solution (or no unique one with `--select`).

mod output;

use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use output::{label, render, render_ellipses, Column, EllipseRecord, Format, SolutionRecord};
use pkm_kinematics::machine::{select_machine_solution, select_tool_mode, tool_fk, tool_ik};
use pkm_kinematics::parallel_fk::{enumerate_fk, select_assembly_mode};
use pkm_kinematics::parallel_ik::{enumerate_ik, iso_ellipse, select_working_solution};
use pkm_kinematics::sampling::roundtrip_report;
use pkm_kinematics::{
    Ambiguous, MachineGeometry, MachineJoints, ParallelJoints, Selection, ToolPose,
};

#[derive(Parser, Debug)]
#[command(
    name = "pkm",
    version,
    about = "Kinematics of a 3-axis parallel module on a 2-axis tilting table"
)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Read and print angles in degrees instead of radians.
    #[arg(long, global = true)]
    deg: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Geometry file (`key = value` lines).
    geometry: PathBuf,
    /// Print only the branch the machine runs in.
    #[arg(long)]
    select: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// All inverse branches for a platform position.
    Ik {
        #[command(flatten)]
        common: Common,
        #[arg(allow_negative_numbers = true)]
        x_p: f64,
        #[arg(allow_negative_numbers = true)]
        y_p: f64,
        #[arg(allow_negative_numbers = true)]
        z_p: f64,
    },
    /// All assembly modes for slider positions.
    Fk {
        #[command(flatten)]
        common: Common,
        #[arg(allow_negative_numbers = true)]
        rho1: f64,
        #[arg(allow_negative_numbers = true)]
        rho2: f64,
        #[arg(allow_negative_numbers = true)]
        rho3: f64,
    },
    /// All machine joint solutions for a tool pose in the table frame.
    ToolIk {
        #[command(flatten)]
        common: Common,
        #[arg(allow_negative_numbers = true)]
        x_u: f64,
        #[arg(allow_negative_numbers = true)]
        y_u: f64,
        #[arg(allow_negative_numbers = true)]
        z_u: f64,
        #[arg(allow_negative_numbers = true)]
        phi1: f64,
        #[arg(allow_negative_numbers = true)]
        phi2: f64,
    },
    /// All tool poses for slider positions and table angles.
    ToolFk {
        #[command(flatten)]
        common: Common,
        #[arg(allow_negative_numbers = true)]
        rho1: f64,
        #[arg(allow_negative_numbers = true)]
        rho2: f64,
        #[arg(allow_negative_numbers = true)]
        rho3: f64,
        #[arg(allow_negative_numbers = true)]
        theta1: f64,
        #[arg(allow_negative_numbers = true)]
        theta2: f64,
    },
    /// Iso-orientation ellipses of the platform centre.
    Ellipse {
        geometry: PathBuf,
        /// First orientation (default -pi).
        #[arg(long, allow_negative_numbers = true)]
        from: Option<f64>,
        /// Last orientation (default pi).
        #[arg(long, allow_negative_numbers = true)]
        to: Option<f64>,
        /// Orientation step (default 2 pi / 45).
        #[arg(long)]
        step: Option<f64>,
        /// Sample points per ellipse.
        #[arg(long, default_value_t = 16)]
        points: usize,
    },
    /// Random IK -> FK round trips with error statistics.
    Roundtrip {
        geometry: PathBuf,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Also time symbolic against Newton forward kinematics (makes the
        /// report non-reproducible).
        #[arg(long)]
        timing: bool,
    },
    /// Print the built-in synthetic geometry as a geometry file.
    Geometry,
}

struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

fn load(path: &PathBuf) -> Result<MachineGeometry, Failure> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    MachineGeometry::from_document(&text).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

/// Applies `--select` and reports the exit status for the printed rows.
fn choose<T: std::fmt::Debug + Clone>(
    rows: Vec<(T, SolutionRecord)>,
    select: bool,
    pick: impl Fn(&[T]) -> Selection<T>,
    same: impl Fn(&T, &T) -> bool,
) -> (Vec<SolutionRecord>, u8) {
    if !select {
        let code = if rows.is_empty() { 2 } else { 0 };
        return (rows.into_iter().map(|(_, r)| r).collect(), code);
    }
    let items: Vec<T> = rows.iter().map(|(t, _)| t.clone()).collect();
    let keep = |wanted: &[T]| -> Vec<SolutionRecord> {
        rows.iter()
            .filter(|(t, _)| wanted.iter().any(|w| same(w, t)))
            .map(|(_, r)| r.clone())
            .collect()
    };
    match pick(&items) {
        Ok(Some(one)) => (keep(&[one]), 0),
        Ok(None) => (Vec::new(), 2),
        Err(Ambiguous { survivors }) => {
            eprintln!(
                "warning: {} branches pass the working-mode filter",
                survivors.len()
            );
            (keep(&survivors), 2)
        }
    }
}

fn angle_in(v: f64, deg: bool) -> f64 {
    if deg {
        v.to_radians()
    } else {
        v
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let deg = cli.deg;
    let emit = |records: Vec<SolutionRecord>, columns: &[Column]| {
        let records: Vec<SolutionRecord> = if deg {
            records
                .into_iter()
                .map(SolutionRecord::in_degrees)
                .collect()
        } else {
            records
        };
        print!("{}", render(&records, cli.format, columns, deg));
    };

    match cli.command {
        Command::Ik {
            common,
            x_p,
            y_p,
            z_p,
        } => {
            let g = load(&common.geometry)?;
            let sols = enumerate_ik(&g, x_p, y_p, z_p);
            let rows = sols
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    let reachable = s.indices.is_working()
                        && g.platform_span1 * s.alpha.cos() > g.slider_span1
                        && s.within_limits;
                    let rec = SolutionRecord {
                        mode: label(i),
                        rho1: Some(s.joints.rho1),
                        rho2: Some(s.joints.rho2),
                        rho3: Some(s.joints.rho3),
                        x_p: Some(x_p),
                        y_p: Some(y_p),
                        z_p: Some(z_p),
                        alpha: Some(s.alpha),
                        residual_norm: s.residual_norm,
                        reachable,
                        ..Default::default()
                    }
                    .with_indices(s.indices);
                    (*s, rec)
                })
                .collect();
            let (records, code) = choose(
                rows,
                common.select,
                |s| select_working_solution(s, &g),
                |a, b| a == b,
            );
            emit(records, &[Column::Rho, Column::Platform]);
            Ok(code)
        }
        Command::Fk {
            common,
            rho1,
            rho2,
            rho3,
        } => {
            let g = load(&common.geometry)?;
            let modes = enumerate_fk(&g, &ParallelJoints::new(rho1, rho2, rho3))?;
            let rows = modes
                .iter()
                .enumerate()
                .map(|(i, m)| {
                    let rec = SolutionRecord {
                        mode: label(i),
                        rho1: Some(rho1),
                        rho2: Some(rho2),
                        rho3: Some(rho3),
                        x_p: Some(m.pose.x),
                        y_p: Some(m.pose.y),
                        z_p: Some(m.pose.z),
                        alpha: Some(m.pose.alpha),
                        residual_norm: m.residual_norm,
                        reachable: m.reachable,
                        ..Default::default()
                    }
                    .with_indices(m.indices);
                    (*m, rec)
                })
                .collect();
            let (records, code) = choose(rows, common.select, select_assembly_mode, |a, b| a == b);
            emit(records, &[Column::Rho, Column::Platform]);
            Ok(code)
        }
        Command::ToolIk {
            common,
            x_u,
            y_u,
            z_u,
            phi1,
            phi2,
        } => {
            let g = load(&common.geometry)?;
            let tool = ToolPose::new(x_u, y_u, z_u, angle_in(phi1, deg), angle_in(phi2, deg));
            let sols = tool_ik(&g, &tool)?;
            let rows = sols
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    let reachable = s.indices.is_working()
                        && g.platform_span1 * s.alpha.cos() > g.slider_span1
                        && s.within_limits;
                    let rec = SolutionRecord {
                        mode: label(i),
                        rho1: Some(s.joints.joints.rho1),
                        rho2: Some(s.joints.joints.rho2),
                        rho3: Some(s.joints.joints.rho3),
                        theta1: Some(s.joints.theta1),
                        theta2: Some(s.joints.theta2),
                        x_p: Some(s.platform.x),
                        y_p: Some(s.platform.y),
                        z_p: Some(s.platform.z),
                        alpha: Some(s.alpha),
                        x_u: Some(tool.x_u),
                        y_u: Some(tool.y_u),
                        z_u: Some(tool.z_u),
                        phi1: Some(tool.phi1),
                        phi2: Some(tool.phi2),
                        residual_norm: s.residual_norm,
                        reachable,
                        ..Default::default()
                    }
                    .with_indices(s.indices);
                    (*s, rec)
                })
                .collect();
            let (records, code) = choose(
                rows,
                common.select,
                |s| select_machine_solution(s, &g),
                |a, b| a == b,
            );
            emit(records, &[Column::Rho, Column::Theta, Column::Tool]);
            Ok(code)
        }
        Command::ToolFk {
            common,
            rho1,
            rho2,
            rho3,
            theta1,
            theta2,
        } => {
            let g = load(&common.geometry)?;
            let mj = MachineJoints::new(
                ParallelJoints::new(rho1, rho2, rho3),
                angle_in(theta1, deg),
                angle_in(theta2, deg),
            );
            let modes = tool_fk(&g, &mj)?;
            let rows = modes
                .iter()
                .enumerate()
                .map(|(i, m)| {
                    let rec = SolutionRecord {
                        mode: label(i),
                        rho1: Some(rho1),
                        rho2: Some(rho2),
                        rho3: Some(rho3),
                        theta1: Some(mj.theta1),
                        theta2: Some(mj.theta2),
                        x_p: Some(m.mode.pose.x),
                        y_p: Some(m.mode.pose.y),
                        z_p: Some(m.mode.pose.z),
                        alpha: Some(m.mode.pose.alpha),
                        x_u: Some(m.tool.x_u),
                        y_u: Some(m.tool.y_u),
                        z_u: Some(m.tool.z_u),
                        phi1: Some(m.tool.phi1),
                        phi2: Some(m.tool.phi2),
                        residual_norm: m.residual_norm,
                        reachable: m.mode.reachable,
                        ..Default::default()
                    }
                    .with_indices(m.mode.indices);
                    (*m, rec)
                })
                .collect();
            let (records, code) = choose(rows, common.select, select_tool_mode, |a, b| a == b);
            emit(records, &[Column::Theta, Column::Tool]);
            Ok(code)
        }
        Command::Ellipse {
            geometry,
            from,
            to,
            step,
            points,
        } => {
            let g = load(&geometry)?;
            let from = from.map_or(-PI, |v| angle_in(v, deg));
            let to = to.map_or(PI, |v| angle_in(v, deg));
            let step = step.map_or(2.0 * PI / 45.0, |v| angle_in(v, deg));
            if step.is_nan() || step <= 0.0 || !step.is_finite() {
                return Err(Failure("step must be positive".into()));
            }
            if to.is_nan() || from.is_nan() || to < from {
                return Err(Failure("--to must not be below --from".into()));
            }
            let shown = |a: f64| if deg { a.to_degrees() } else { a };
            let count = ((to - from) / step + 1e-9).floor() as usize;
            let mut records = Vec::new();
            for k in 0..=count {
                let alpha = from + k as f64 * step;
                match iso_ellipse(&g, alpha) {
                    Ok(e) => records.push(EllipseRecord::Ellipse {
                        alpha: shown(alpha),
                        center_x: e.center_x,
                        semi_major: e.semi_major_a,
                        semi_minor: e.semi_minor_b,
                        points: (0..points)
                            .map(|i| {
                                let (x, y) = e.point(2.0 * PI * i as f64 / points as f64);
                                [x, y]
                            })
                            .collect(),
                    }),
                    Err(e) => records.push(EllipseRecord::Warning {
                        alpha: shown(alpha),
                        message: e.to_string(),
                    }),
                }
            }
            print!("{}", render_ellipses(&records, cli.format));
            let any = records
                .iter()
                .any(|r| matches!(r, EllipseRecord::Ellipse { .. }));
            Ok(if any { 0 } else { 2 })
        }
        Command::Roundtrip {
            geometry,
            samples,
            seed,
            timing,
        } => {
            let g = load(&geometry)?;
            print!("{}", roundtrip_report(&g, samples, seed, timing).render());
            Ok(0)
        }
        Command::Geometry => {
            print!("{}", MachineGeometry::DEFAULT_SYNTHETIC.to_document());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
