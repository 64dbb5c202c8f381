//! Fixed dimensions of the machine and the key/value geometry document.
//!
//! The document is flat UTF-8 text, one `name = value` pair per line, with
//! `#` starting a comment. Keys are the conventional dimension symbols
//! (`D1`, `d1`, `R1`, ...). Lengths are millimetres and angles radians.

use std::fmt;
use std::fmt::Write as _;

use crate::error::{KinematicsError, Result};

/// All fixed dimensions of the machine.
///
/// Field docs give the document key in backticks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MachineGeometry {
    /// `D1`: x-offset of the leg I slider.
    pub slider_x1: f64,
    /// `d1`: x-offset of the leg I platform attachment.
    pub platform_x1: f64,
    /// `R1`: half-span of the leg I attachment pair on the platform.
    pub platform_span1: f64,
    /// `r1`: half-span of the leg I attachment pair on the slider.
    pub slider_span1: f64,
    /// `L1`: rod length of leg I.
    pub rod1: f64,
    /// `D2`: x-offset of the leg II/III sliders.
    pub slider_x2: f64,
    /// `d2`: x-offset of the leg II/III platform attachments.
    pub platform_x2: f64,
    /// `R2`: y-offset of the leg II/III platform attachments.
    pub platform_span2: f64,
    /// `r4`: y-offset of the leg II/III slider attachments.
    pub slider_span2: f64,
    /// `L2`: rod length of leg II.
    pub rod2: f64,
    /// `L3`: rod length of leg III.
    pub rod3: f64,
    /// `Delta`: spindle offset from the platform origin to the tool centre point.
    pub tool_offset: f64,
    /// `d_a`: height of the tilting axis frame.
    pub tilt_axis_height: f64,
    /// `d_t`: offset of the table frame from the tilting axis.
    pub table_height: f64,
    /// `rho_min`: lower slider limit, shared by all sliders.
    pub rho_min: f64,
    /// `rho_max`: upper slider limit.
    pub rho_max: f64,
    /// `theta1_min` (optional).
    pub tilt_min: f64,
    /// `theta1_max` (optional).
    pub tilt_max: f64,
    /// `theta2_min` (optional).
    pub rotary_min: f64,
    /// `theta2_max` (optional).
    pub rotary_max: f64,
}

/// A violated geometry invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Document key(s) involved, e.g. `L1` or `rho_min/rho_max`.
    pub field: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.message, self.field)
    }
}

const PERMISSIVE_MIN: f64 = -std::f64::consts::PI;
const PERMISSIVE_MAX: f64 = std::f64::consts::PI;

/// Keys whose values must be strictly positive lengths.
const POSITIVE_KEYS: [&str; 14] = [
    "D1", "d1", "R1", "r1", "L1", "D2", "d2", "R2", "r4", "L2", "L3", "Delta", "d_a", "d_t",
];

const REQUIRED_KEYS: [&str; 16] = [
    "D1", "d1", "R1", "r1", "L1", "D2", "d2", "R2", "r4", "L2", "L3", "Delta", "d_a", "d_t",
    "rho_min", "rho_max",
];

const OPTIONAL_KEYS: [&str; 4] = ["theta1_min", "theta1_max", "theta2_min", "theta2_max"];

impl MachineGeometry {
    /// A synthetic reference machine.
    ///
    /// These are NOT the dimensions of any commercial machine; they were
    /// chosen so that every invariant holds, the two leg groups sit on
    /// opposite sides of the platform, and generic interior points admit
    /// all sixteen inverse-kinematic branches. Supply a geometry document to
    /// model a real machine.
    pub const DEFAULT_SYNTHETIC: MachineGeometry = MachineGeometry {
        slider_x1: 900.0,
        platform_x1: 100.0,
        platform_span1: 250.0,
        slider_span1: 200.0,
        rod1: 800.0,
        slider_x2: 100.0,
        platform_x2: 50.0,
        platform_span2: 200.0,
        slider_span2: 250.0,
        rod2: 800.0,
        rod3: 800.0,
        tool_offset: 150.0,
        tilt_axis_height: 1200.0,
        table_height: 100.0,
        rho_min: 0.0,
        rho_max: 600.0,
        tilt_min: -1.0,
        tilt_max: 1.0,
        rotary_min: PERMISSIVE_MIN,
        rotary_max: PERMISSIVE_MAX,
    };

    fn get(&self, key: &str) -> f64 {
        match key {
            "D1" => self.slider_x1,
            "d1" => self.platform_x1,
            "R1" => self.platform_span1,
            "r1" => self.slider_span1,
            "L1" => self.rod1,
            "D2" => self.slider_x2,
            "d2" => self.platform_x2,
            "R2" => self.platform_span2,
            "r4" => self.slider_span2,
            "L2" => self.rod2,
            "L3" => self.rod3,
            "Delta" => self.tool_offset,
            "d_a" => self.tilt_axis_height,
            "d_t" => self.table_height,
            "rho_min" => self.rho_min,
            "rho_max" => self.rho_max,
            "theta1_min" => self.tilt_min,
            "theta1_max" => self.tilt_max,
            "theta2_min" => self.rotary_min,
            "theta2_max" => self.rotary_max,
            _ => unreachable!("unknown geometry key {key}"),
        }
    }

    fn slot(&mut self, key: &str) -> Option<&mut f64> {
        Some(match key {
            "D1" => &mut self.slider_x1,
            "d1" => &mut self.platform_x1,
            "R1" => &mut self.platform_span1,
            "r1" => &mut self.slider_span1,
            "L1" => &mut self.rod1,
            "D2" => &mut self.slider_x2,
            "d2" => &mut self.platform_x2,
            "R2" => &mut self.platform_span2,
            "r4" => &mut self.slider_span2,
            "L2" => &mut self.rod2,
            "L3" => &mut self.rod3,
            "Delta" => &mut self.tool_offset,
            "d_a" => &mut self.tilt_axis_height,
            "d_t" => &mut self.table_height,
            "rho_min" => &mut self.rho_min,
            "rho_max" => &mut self.rho_max,
            "theta1_min" => &mut self.tilt_min,
            "theta1_max" => &mut self.tilt_max,
            "theta2_min" => &mut self.rotary_min,
            "theta2_max" => &mut self.rotary_max,
            _ => return None,
        })
    }

    /// Parses and validates a geometry document.
    pub fn from_document(source: &str) -> Result<Self> {
        let mut geom = MachineGeometry {
            tilt_min: PERMISSIVE_MIN,
            tilt_max: PERMISSIVE_MAX,
            rotary_min: PERMISSIVE_MIN,
            rotary_max: PERMISSIVE_MAX,
            ..MachineGeometry::DEFAULT_SYNTHETIC
        };
        let mut seen: Vec<String> = Vec::new();

        for (index, raw) in source.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) =
                line.split_once('=')
                    .ok_or_else(|| KinematicsError::MalformedLine {
                        line: index + 1,
                        text: raw.to_string(),
                    })?;
            let key = key.trim();
            let value = value.trim();
            if seen.iter().any(|k| k == key) {
                return Err(KinematicsError::DuplicateKey(key.to_string()));
            }
            let slot = geom
                .slot(key)
                .ok_or_else(|| KinematicsError::UnknownKey(key.to_string()))?;
            *slot = value
                .parse::<f64>()
                .map_err(|_| KinematicsError::NonNumeric {
                    key: key.to_string(),
                    value: value.to_string(),
                })?;
            seen.push(key.to_string());
        }

        if let Some(missing) = REQUIRED_KEYS.iter().find(|k| !seen.iter().any(|s| s == *k)) {
            return Err(KinematicsError::MissingKey(missing.to_string()));
        }

        let violations = geom.validate();
        if let Some(first) = violations.first() {
            return Err(KinematicsError::InvalidGeometry(first.to_string()));
        }
        Ok(geom)
    }

    /// Serializes every field, including the optional table limits.
    pub fn to_document(&self) -> String {
        let mut out = String::from("# machine geometry (mm, rad)\n");
        for key in REQUIRED_KEYS.iter().chain(OPTIONAL_KEYS.iter()) {
            let _ = writeln!(out, "{key} = {}", self.get(key));
        }
        out
    }

    /// Lists every violated invariant; empty when the geometry is usable.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut push = |field: &str, message: String| {
            out.push(Violation {
                field: field.to_string(),
                message,
            })
        };

        for key in REQUIRED_KEYS.iter().chain(OPTIONAL_KEYS.iter()) {
            if !self.get(key).is_finite() {
                push(key, format!("non-finite value for {key}"));
            }
        }
        for key in POSITIVE_KEYS {
            let v = self.get(key);
            if v.is_finite() && v <= 0.0 {
                push(key, format!("non-positive length {key}"));
            }
        }
        if !(self.rho_min < self.rho_max) {
            push(
                "rho_min/rho_max",
                "slider limits must satisfy rho_min < rho_max".into(),
            );
        }
        if !(self.tilt_min < self.tilt_max) {
            push(
                "theta1_min/theta1_max",
                "tilt limits must satisfy theta1_min < theta1_max".into(),
            );
        }
        if !(self.rotary_min < self.rotary_max) {
            push(
                "theta2_min/theta2_max",
                "rotary limits must satisfy theta2_min < theta2_max".into(),
            );
        }
        if self.platform_span1 == self.slider_span1 {
            push("R1/r1", "leg I must be a trapezium (R1 = r1)".into());
        }
        let gap = (self.platform_span1 - self.slider_span1).abs();
        if self.rod1 > 0.0 && self.rod1 <= gap {
            push("L1", format!("L1 must exceed |R1 - r1| = {gap}"));
        }
        out
    }

    /// `D1 - d1`.
    pub fn leg1_offset(&self) -> f64 {
        self.slider_x1 - self.platform_x1
    }

    /// `D2 - d2`.
    pub fn leg23_offset(&self) -> f64 {
        self.slider_x2 - self.platform_x2
    }

    /// `r1 R2 - r4 R1`.
    pub fn span_coupling(&self) -> f64 {
        self.slider_span1 * self.platform_span2 - self.slider_span2 * self.platform_span1
    }

    /// Largest squared rod length, the natural scale of every constraint residual.
    pub fn residual_scale(&self) -> f64 {
        let l = self.rod1.max(self.rod2).max(self.rod3);
        l * l
    }

    /// Whether `rho` lies within the slider stroke.
    pub fn rho_in_limits(&self, rho: f64) -> bool {
        rho >= self.rho_min && rho <= self.rho_max
    }

    pub fn tilt_in_limits(&self, theta1: f64) -> bool {
        theta1 >= self.tilt_min && theta1 <= self.tilt_max
    }

    pub fn rotary_in_limits(&self, theta2: f64) -> bool {
        theta2 >= self.rotary_min && theta2 <= self.rotary_max
    }
}

impl Default for MachineGeometry {
    fn default() -> Self {
        MachineGeometry::DEFAULT_SYNTHETIC
    }
}

/// Free-function form of [`MachineGeometry::from_document`].
pub fn load_geometry(source: &str) -> Result<MachineGeometry> {
    MachineGeometry::from_document(source)
}

/// Free-function form of [`MachineGeometry::validate`].
pub fn validate(geom: &MachineGeometry) -> Vec<Violation> {
    geom.validate()
}
