//! Poses, joint vectors and branch indices shared by every solver.

use std::f64::consts::PI;
use std::fmt;

/// Wraps an angle into `(-pi, pi]`.
pub fn normalize_angle(a: f64) -> f64 {
    if a > -PI && a <= PI {
        return a;
    }
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    if r <= -PI {
        r += 2.0 * PI;
    }
    r
}

/// Smallest signed difference `a - b` on the circle.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    normalize_angle(a - b)
}

/// Position of the platform origin and its coupled rotation about x.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlatformPose {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub alpha: f64,
}

impl PlatformPose {
    pub fn new(x: f64, y: f64, z: f64, alpha: f64) -> Self {
        PlatformPose {
            x,
            y,
            z,
            alpha: normalize_angle(alpha),
        }
    }

    /// Largest coordinate difference (mm) and angular difference (rad).
    pub fn distance(&self, other: &PlatformPose) -> (f64, f64) {
        let lin = (self.x - other.x)
            .abs()
            .max((self.y - other.y).abs())
            .max((self.z - other.z).abs());
        (lin, angle_diff(self.alpha, other.alpha).abs())
    }
}

/// Actuated slider coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParallelJoints {
    pub rho1: f64,
    pub rho2: f64,
    pub rho3: f64,
}

impl ParallelJoints {
    pub fn new(rho1: f64, rho2: f64, rho3: f64) -> Self {
        ParallelJoints { rho1, rho2, rho3 }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.rho1, self.rho2, self.rho3]
    }

    pub fn max_diff(&self, other: &ParallelJoints) -> f64 {
        self.as_array()
            .iter()
            .zip(other.as_array())
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Square-root branch of one leg.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Minus,
    Plus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Minus, Sign::Plus];

    pub fn value(self) -> f64 {
        match self {
            Sign::Minus => -1.0,
            Sign::Plus => 1.0,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Minus => -1,
            Sign::Plus => 1,
        }
    }

    /// Sign of `v`, with zero mapped to `Minus`.
    pub fn of(v: f64) -> Sign {
        if v > 0.0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}", self.as_i8())
    }
}

/// Configuration indices `(s1, s2, s3)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConfigurationIndices {
    pub s1: Sign,
    pub s2: Sign,
    pub s3: Sign,
}

impl ConfigurationIndices {
    /// Every slider above its platform attachments (z points down).
    pub const WORKING: ConfigurationIndices = ConfigurationIndices {
        s1: Sign::Minus,
        s2: Sign::Minus,
        s3: Sign::Minus,
    };

    pub fn new(s1: Sign, s2: Sign, s3: Sign) -> Self {
        ConfigurationIndices { s1, s2, s3 }
    }

    pub fn is_working(&self) -> bool {
        *self == Self::WORKING
    }

    /// All eight sign combinations.
    pub fn all() -> impl Iterator<Item = ConfigurationIndices> {
        Sign::BOTH.into_iter().flat_map(|s1| {
            Sign::BOTH
                .into_iter()
                .flat_map(move |s2| Sign::BOTH.into_iter().map(move |s3| Self::new(s1, s2, s3)))
        })
    }
}

impl fmt::Display for ConfigurationIndices {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.s1, self.s2, self.s3)
    }
}

/// Tool centre point and tool orientation in the table frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToolPose {
    pub x_u: f64,
    pub y_u: f64,
    pub z_u: f64,
    pub phi1: f64,
    pub phi2: f64,
}

impl ToolPose {
    pub fn new(x_u: f64, y_u: f64, z_u: f64, phi1: f64, phi2: f64) -> Self {
        ToolPose {
            x_u,
            y_u,
            z_u,
            phi1: normalize_angle(phi1),
            phi2: normalize_angle(phi2),
        }
    }

    /// Largest coordinate difference (mm) and angular difference (rad).
    pub fn distance(&self, other: &ToolPose) -> (f64, f64) {
        let lin = (self.x_u - other.x_u)
            .abs()
            .max((self.y_u - other.y_u).abs())
            .max((self.z_u - other.z_u).abs());
        let ang = angle_diff(self.phi1, other.phi1)
            .abs()
            .max(angle_diff(self.phi2, other.phi2).abs());
        (lin, ang)
    }
}

/// Slider coordinates plus the tilt (`theta1`) and rotary (`theta2`) table angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MachineJoints {
    pub joints: ParallelJoints,
    pub theta1: f64,
    pub theta2: f64,
}

impl MachineJoints {
    pub fn new(joints: ParallelJoints, theta1: f64, theta2: f64) -> Self {
        MachineJoints {
            joints,
            theta1: normalize_angle(theta1),
            theta2: normalize_angle(theta2),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_range() {
        assert_eq!(normalize_angle(PI), PI);
        assert_eq!(normalize_angle(-PI), PI);
        assert!((normalize_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((normalize_angle(-0.5) + 0.5).abs() < 1e-15);
        assert!((normalize_angle(2.0 * PI + 0.25) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn eight_index_combinations() {
        let all: Vec<_> = ConfigurationIndices::all().collect();
        assert_eq!(all.len(), 8);
        assert_eq!(all[0], ConfigurationIndices::WORKING);
    }
}
