//! Inverse kinematics of the 3-DOF parallel module.
//!
//! Leg I is a trapezium, so the platform rotation `alpha` about x is not
//! free: eliminating the leg I slider between its two rods leaves a relation
//! between `(x_p, y_p)` and `alpha` alone. Written in `cos(alpha)` it is a
//! cubic, whose roots in `[-1, 1]` give at most four orientations. Each
//! orientation then yields the slider coordinates in closed form, one
//! square-root branch per leg.

use crate::error::{Ambiguous, KinematicsError, Result, Selection};
use crate::geometry::MachineGeometry;
use crate::oracle::residuals_parallel;
use crate::rootfind::{real_roots_in_unit_interval, Polynomial};
use crate::types::{normalize_angle, ConfigurationIndices, ParallelJoints, PlatformPose, Sign};

/// Relative tolerance on the coupling relation.
pub const COUPLING_TOL: f64 = 1e-9;
/// Tolerance on constraint residuals of emitted branches, relative to `max(L^2)`.
pub const IK_RESIDUAL_TOL: f64 = 1e-8;
/// Radicands in `[-RADICAND_TOL * L^2, 0)` are treated as grazing contact.
pub const RADICAND_TOL: f64 = 1e-9;
/// Branches closer than this (mm and rad) are merged.
pub const MERGE_TOL: f64 = 1e-9;

const ZERO_SIN: f64 = 1e-12;

/// One inverse-kinematic branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IkSolution {
    pub joints: ParallelJoints,
    pub alpha: f64,
    pub indices: ConfigurationIndices,
    pub residual_norm: f64,
    pub within_limits: bool,
}

/// Locus of platform positions sharing one orientation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsoEllipse {
    pub center_x: f64,
    pub semi_major_a: f64,
    pub semi_minor_b: f64,
    pub alpha: f64,
}

impl IsoEllipse {
    /// Point at parameter `u` (rad) on the ellipse.
    pub fn point(&self, u: f64) -> (f64, f64) {
        (
            self.center_x + self.semi_major_a * u.cos(),
            self.semi_minor_b * u.sin(),
        )
    }
}

/// Admissible values of `s1` at a given pose.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LegOneBranch {
    /// `alpha` is 0 or pi: both signs are valid.
    Both,
    /// Only this sign is consistent with the leg I rods.
    Only(Sign),
    /// `rho1 = z_p`; the sign is immaterial.
    Level,
}

impl LegOneBranch {
    pub fn admits(&self, s1: Sign) -> bool {
        match self {
            LegOneBranch::Both | LegOneBranch::Level => true,
            LegOneBranch::Only(s) => *s == s1,
        }
    }
}

/// `L1^2 - (R1^2 + r1^2 - 2 R1 r1 cos(alpha))`: squared midpoint distance of leg I.
fn leg_one_reach(g: &MachineGeometry, cos_a: f64) -> f64 {
    let (big, small) = (g.platform_span1, g.slider_span1);
    g.rod1 * g.rod1 - (big * big + small * small - 2.0 * big * small * cos_a)
}

/// Left-hand side of the position/orientation coupling.
pub fn coupling_residual(g: &MachineGeometry, x_p: f64, y_p: f64, alpha: f64) -> f64 {
    let (s, c) = alpha.sin_cos();
    let (big, small) = (g.platform_span1, g.slider_span1);
    let x1 = x_p + g.leg1_offset();
    let k = big * big * s * s;
    k * x1 * x1 + (small * small - 2.0 * big * small * c + big * big) * y_p * y_p
        - k * leg_one_reach(g, c)
}

/// Natural magnitude of [`coupling_residual`] at `(x_p, y_p)`.
pub fn coupling_scale(g: &MachineGeometry, x_p: f64, y_p: f64) -> f64 {
    coupling_cubic(g, x_p, y_p).max_coeff()
}

/// Cubic in `cos(alpha)` whose roots are the admissible orientations,
/// coefficients ascending.
pub fn coupling_cubic(g: &MachineGeometry, x_p: f64, y_p: f64) -> Polynomial {
    let (big, small) = (g.platform_span1, g.slider_span1);
    let x1 = x_p + g.leg1_offset();
    let m = g.rod1 * g.rod1 - big * big - small * small;
    let big2 = big * big;
    let y2 = y_p * y_p;
    let p1 = 2.0 * big2 * big * small;
    let p2 = big2 * m - big2 * x1 * x1;
    let p3 = -2.0 * big2 * big * small - 2.0 * big * small * y2;
    let p4 = big2 * x1 * x1 + (big2 + small * small) * y2 - big2 * m;
    // p1 > 0 by the geometry invariants, so no trimming can occur here.
    Polynomial::new(vec![p4, p3, p2, p1]).expect("finite cubic coefficients")
}

/// All platform orientations compatible with `(x_p, y_p)`, ascending.
pub fn orientation_candidates(g: &MachineGeometry, x_p: f64, y_p: f64) -> Vec<f64> {
    let cubic = coupling_cubic(g, x_p, y_p);
    let scale = cubic.max_coeff();
    let cosines = match real_roots_in_unit_interval(&cubic) {
        Ok(c) => c,
        Err(_) => return Vec::new(),
    };
    let mut out: Vec<f64> = Vec::new();
    for c in cosines {
        let a = c.acos();
        for alpha in [a, -a] {
            let alpha = normalize_angle(alpha);
            if coupling_residual(g, x_p, y_p, alpha).abs() > COUPLING_TOL * scale {
                continue;
            }
            if !out.iter().any(|b| (b - alpha).abs() <= MERGE_TOL) {
                out.push(alpha);
            }
        }
    }
    out.sort_by(|a, b| a.total_cmp(b));
    out
}

/// Iso-orientation ellipse of leg I for a fixed `alpha`.
pub fn iso_ellipse(g: &MachineGeometry, alpha: f64) -> Result<IsoEllipse> {
    let (s, c) = alpha.sin_cos();
    if s.abs() <= ZERO_SIN {
        return Err(KinematicsError::DegenerateOrientation { alpha });
    }
    let reach = leg_one_reach(g, c);
    if reach <= 0.0 {
        return Err(KinematicsError::UnreachableOrientation { alpha });
    }
    let (big, small) = (g.platform_span1, g.slider_span1);
    let mid = big * big + small * small - 2.0 * big * small * c;
    let a = reach.sqrt();
    let b = (big * big * s * s * reach / mid).sqrt();
    Ok(IsoEllipse {
        center_x: g.platform_x1 - g.slider_x1,
        semi_major_a: a,
        semi_minor_b: b,
        alpha,
    })
}

fn is_level(g: &MachineGeometry, pose: &PlatformPose) -> bool {
    (g.platform_span1 * pose.alpha.cos() - g.slider_span1).abs() <= 1e-12 * g.platform_span1
        || pose.y.abs() <= 1e-12 * g.rod1
}

/// Admissible `s1` values at a solved pose.
///
/// With `sin(alpha) = 0` both signs are valid. When `R1 cos(alpha) = r1` or
/// `y_p = 0` (and `alpha` is not 0 or pi) the leg I slider must sit level
/// with the platform. Otherwise the rod geometry fixes the sign uniquely.
pub fn allowed_s1(g: &MachineGeometry, pose: &PlatformPose) -> LegOneBranch {
    let (s, c) = pose.alpha.sin_cos();
    if s.abs() <= ZERO_SIN {
        return LegOneBranch::Both;
    }
    if is_level(g, pose) {
        return LegOneBranch::Level;
    }
    let lhs = (g.platform_span1 * c - g.slider_span1).signum() * pose.y.signum();
    LegOneBranch::Only(Sign::of(lhs * s.signum()))
}

fn clamp_radicand(value: f64, scale: f64, leg: &'static str) -> Result<f64> {
    if value >= 0.0 {
        Ok(value)
    } else if value >= -RADICAND_TOL * scale {
        Ok(0.0)
    } else {
        Err(KinematicsError::NegativeRadicand { leg, value })
    }
}

/// Slider coordinates for a pose whose orientation satisfies the coupling.
pub fn joints_from_pose(
    g: &MachineGeometry,
    pose: &PlatformPose,
    indices: ConfigurationIndices,
) -> Result<ParallelJoints> {
    let residual = coupling_residual(g, pose.x, pose.y, pose.alpha);
    if residual.abs() > COUPLING_TOL * coupling_scale(g, pose.x, pose.y) {
        return Err(KinematicsError::CouplingViolated {
            alpha: pose.alpha,
            residual,
        });
    }
    let branch = allowed_s1(g, pose);
    if !branch.admits(indices.s1) {
        return Err(KinematicsError::SignRuleViolation {
            given: indices.s1.as_i8(),
        });
    }
    let (s, c) = pose.alpha.sin_cos();
    let x1 = pose.x + g.leg1_offset();
    let x2 = pose.x + g.leg23_offset();

    let rho1 = if branch == LegOneBranch::Level {
        pose.z
    } else {
        let rad = leg_one_reach(g, c) - x1 * x1 - pose.y * pose.y;
        let rad = clamp_radicand(rad, g.rod1 * g.rod1, "I")?;
        pose.z + indices.s1.value() * rad.sqrt()
    };

    let dy2 = pose.y - g.platform_span2 * c + g.slider_span2;
    let rad2 = clamp_radicand(g.rod2 * g.rod2 - x2 * x2 - dy2 * dy2, g.rod2 * g.rod2, "II")?;
    let rho2 = pose.z - g.platform_span2 * s + indices.s2.value() * rad2.sqrt();

    let dy3 = pose.y + g.platform_span2 * c - g.slider_span2;
    let rad3 = clamp_radicand(
        g.rod3 * g.rod3 - x2 * x2 - dy3 * dy3,
        g.rod3 * g.rod3,
        "III",
    )?;
    let rho3 = pose.z + g.platform_span2 * s + indices.s3.value() * rad3.sqrt();

    Ok(ParallelJoints::new(rho1, rho2, rho3))
}

fn within_limits(g: &MachineGeometry, j: &ParallelJoints) -> bool {
    j.as_array().iter().all(|&r| g.rho_in_limits(r))
}

/// Every inverse-kinematic branch at `(x_p, y_p, z_p)`.
///
/// Branches are annotated with `within_limits` but never filtered on it.
pub fn enumerate_ik(g: &MachineGeometry, x_p: f64, y_p: f64, z_p: f64) -> Vec<IkSolution> {
    let tol = IK_RESIDUAL_TOL * g.residual_scale();
    let mut out: Vec<IkSolution> = Vec::new();
    for alpha in orientation_candidates(g, x_p, y_p) {
        let pose = PlatformPose::new(x_p, y_p, z_p, alpha);
        for indices in ConfigurationIndices::all() {
            let Ok(joints) = joints_from_pose(g, &pose, indices) else {
                continue;
            };
            let residual_norm = residuals_parallel(g, &pose, &joints).max_abs();
            if !(residual_norm <= tol) {
                continue;
            }
            let duplicate = out.iter().any(|o| {
                o.joints.max_diff(&joints) <= MERGE_TOL && (o.alpha - pose.alpha).abs() <= MERGE_TOL
            });
            if duplicate {
                continue;
            }
            out.push(IkSolution {
                joints,
                alpha: pose.alpha,
                indices,
                residual_norm,
                within_limits: within_limits(g, &joints),
            });
        }
    }
    out
}

fn canonical_order(a: &IkSolution, b: &IkSolution) -> std::cmp::Ordering {
    a.alpha
        .total_cmp(&b.alpha)
        .then(a.indices.cmp(&b.indices))
        .then(a.joints.rho1.total_cmp(&b.joints.rho1))
        .then(a.joints.rho2.total_cmp(&b.joints.rho2))
        .then(a.joints.rho3.total_cmp(&b.joints.rho3))
}

/// The branch the machine actually runs in: every slider above the
/// platform, no rod crossing on leg I (`R1 cos(alpha) > r1`), sliders
/// within their stroke.
pub fn select_working_solution(
    solutions: &[IkSolution],
    g: &MachineGeometry,
) -> Selection<IkSolution> {
    let mut survivors: Vec<IkSolution> = solutions
        .iter()
        .filter(|s| s.indices.is_working())
        .filter(|s| g.platform_span1 * s.alpha.cos() > g.slider_span1)
        .filter(|s| s.within_limits)
        .copied()
        .collect();
    survivors.sort_by(canonical_order);
    match survivors.len() {
        0 => Ok(None),
        1 => Ok(survivors.pop()),
        _ => Err(Ambiguous { survivors }),
    }
}
