//! Solution records and the three output formats.

use serde::Serialize;
use std::fmt::Write as _;

use pkm_kinematics::ConfigurationIndices;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Table,
    Csv,
    JsonLines,
}

/// One row of a solution table. Fields a command does not produce stay
/// `None` (empty in CSV, `null` in JSON).
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SolutionRecord {
    pub mode: String,
    pub rho1: Option<f64>,
    pub rho2: Option<f64>,
    pub rho3: Option<f64>,
    pub theta1: Option<f64>,
    pub theta2: Option<f64>,
    pub x_p: Option<f64>,
    pub y_p: Option<f64>,
    pub z_p: Option<f64>,
    pub alpha: Option<f64>,
    pub x_u: Option<f64>,
    pub y_u: Option<f64>,
    pub z_u: Option<f64>,
    pub phi1: Option<f64>,
    pub phi2: Option<f64>,
    pub s1: Option<i8>,
    pub s2: Option<i8>,
    pub s3: Option<i8>,
    pub residual_norm: f64,
    pub reachable: bool,
}

/// Fixed CSV header, shared by every solution command.
pub const CSV_HEADER: &str = "mode,rho1,rho2,rho3,theta1,theta2,x_p,y_p,z_p,alpha,x_u,y_u,z_u,phi1,phi2,s1,s2,s3,residual_norm,reachable";

/// Column groups shown in the human table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Column {
    Rho,
    Theta,
    Platform,
    Tool,
}

/// `i`-th mode label: a, b, ..., z, aa, ab, ...
pub fn label(i: usize) -> String {
    let letters = b"abcdefghijklmnopqrstuvwxyz";
    if i < 26 {
        (letters[i] as char).to_string()
    } else {
        format!("{}{}", label(i / 26 - 1), letters[i % 26] as char)
    }
}

impl SolutionRecord {
    pub fn with_indices(mut self, idx: ConfigurationIndices) -> Self {
        self.s1 = Some(idx.s1.as_i8());
        self.s2 = Some(idx.s2.as_i8());
        self.s3 = Some(idx.s3.as_i8());
        self
    }

    /// Rewrites every angle field from radians to degrees.
    pub fn in_degrees(mut self) -> Self {
        for a in [
            &mut self.theta1,
            &mut self.theta2,
            &mut self.alpha,
            &mut self.phi1,
            &mut self.phi2,
        ] {
            *a = a.map(f64::to_degrees);
        }
        self
    }

    fn csv_row(&self) -> String {
        let f = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let i = |v: Option<i8>| v.map(|x| x.to_string()).unwrap_or_default();
        [
            self.mode.clone(),
            f(self.rho1),
            f(self.rho2),
            f(self.rho3),
            f(self.theta1),
            f(self.theta2),
            f(self.x_p),
            f(self.y_p),
            f(self.z_p),
            f(self.alpha),
            f(self.x_u),
            f(self.y_u),
            f(self.z_u),
            f(self.phi1),
            f(self.phi2),
            i(self.s1),
            i(self.s2),
            i(self.s3),
            self.residual_norm.to_string(),
            self.reachable.to_string(),
        ]
        .join(",")
    }
}

fn table(records: &[SolutionRecord], columns: &[Column], degrees: bool) -> String {
    let angle = if degrees { "deg" } else { "rad" };
    let mut head: Vec<String> = vec!["mode".into()];
    for c in columns {
        match c {
            Column::Rho => head.extend(["rho1", "rho2", "rho3"].map(String::from)),
            Column::Theta => head.extend(["theta1", "theta2"].map(|s| format!("{s}[{angle}]"))),
            Column::Platform => {
                head.extend(["x_p", "y_p", "z_p"].map(String::from));
                head.push(format!("alpha[{angle}]"));
            }
            Column::Tool => {
                head.extend(["x_u", "y_u", "z_u"].map(String::from));
                head.extend(["phi1", "phi2"].map(|s| format!("{s}[{angle}]")));
            }
        }
    }
    head.extend(["s", "residual", "reachable"].map(String::from));

    let num = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.4}"));
    let rows: Vec<Vec<String>> = records
        .iter()
        .map(|r| {
            let mut row = vec![r.mode.clone()];
            for c in columns {
                let vals: &[Option<f64>] = match c {
                    Column::Rho => &[r.rho1, r.rho2, r.rho3],
                    Column::Theta => &[r.theta1, r.theta2],
                    Column::Platform => &[r.x_p, r.y_p, r.z_p, r.alpha],
                    Column::Tool => &[r.x_u, r.y_u, r.z_u, r.phi1, r.phi2],
                };
                row.extend(vals.iter().map(|v| num(*v)));
            }
            let sign = |s: Option<i8>| s.map_or("?".to_string(), |v| format!("{v:+}"));
            row.push(format!("({},{},{})", sign(r.s1), sign(r.s2), sign(r.s3)));
            row.push(format!("{:.1e}", r.residual_norm));
            row.push(if r.reachable { "yes" } else { "no" }.to_string());
            row
        })
        .collect();

    let widths: Vec<usize> = (0..head.len())
        .map(|i| {
            rows.iter()
                .map(|r| r[i].len())
                .chain([head[i].len()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    let line = |cells: &[String], out: &mut String| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect();
        let _ = writeln!(out, "{}", padded.join("  ").trim_end());
    };
    line(&head, &mut out);
    for r in &rows {
        line(r, &mut out);
    }
    out
}

/// Renders records in the requested format.
pub fn render(
    records: &[SolutionRecord],
    format: Format,
    columns: &[Column],
    degrees: bool,
) -> String {
    match format {
        Format::Table => table(records, columns, degrees),
        Format::Csv => {
            let mut out = format!("{CSV_HEADER}\n");
            for r in records {
                out.push_str(&r.csv_row());
                out.push('\n');
            }
            out
        }
        Format::JsonLines => records
            .iter()
            .map(|r| serde_json::to_string(r).expect("records serialize") + "\n")
            .collect(),
    }
}

/// One line of iso-orientation plot data.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EllipseRecord {
    Ellipse {
        alpha: f64,
        center_x: f64,
        semi_major: f64,
        semi_minor: f64,
        points: Vec<[f64; 2]>,
    },
    Warning {
        alpha: f64,
        message: String,
    },
}

/// CSV header for ellipse output: one `ellipse` row per orientation
/// followed by its `point` rows.
pub const ELLIPSE_CSV_HEADER: &str = "kind,alpha,center_x,semi_major,semi_minor,x,y,message";

pub fn render_ellipses(records: &[EllipseRecord], format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::JsonLines => {
            for r in records {
                out.push_str(&serde_json::to_string(r).expect("records serialize"));
                out.push('\n');
            }
        }
        Format::Csv => {
            out.push_str(ELLIPSE_CSV_HEADER);
            out.push('\n');
            for r in records {
                match r {
                    EllipseRecord::Ellipse {
                        alpha,
                        center_x,
                        semi_major,
                        semi_minor,
                        points,
                    } => {
                        let _ = writeln!(
                            out,
                            "ellipse,{alpha},{center_x},{semi_major},{semi_minor},,,"
                        );
                        for [x, y] in points {
                            let _ = writeln!(out, "point,{alpha},,,,{x},{y},");
                        }
                    }
                    EllipseRecord::Warning { alpha, message } => {
                        let _ = writeln!(out, "warning,{alpha},,,,,,\"{message}\"");
                    }
                }
            }
        }
        Format::Table => {
            for r in records {
                match r {
                    EllipseRecord::Ellipse {
                        alpha,
                        center_x,
                        semi_major,
                        semi_minor,
                        points,
                    } => {
                        let _ = writeln!(
                            out,
                            "alpha {alpha:+.6}  center_x {center_x:.4}  a {semi_major:.4}  b {semi_minor:.4}  ({} points)",
                            points.len()
                        );
                    }
                    EllipseRecord::Warning { alpha, message } => {
                        let _ = writeln!(out, "alpha {alpha:+.6}  warning: {message}");
                    }
                }
            }
        }
    }
    out
}
