//! Full machine: the parallel module plus the tilting table.
//!
//! The table frame hangs off the base through
//! `trans(z, d_a) rot(x, theta1) trans(z, d_t) rot(x, pi) rot(z, theta2)`.
//! Because the rods of legs II and III stay parallel, the rotary table must
//! cancel the tool's second angle (`theta2 = -phi2`) and the platform
//! orientation is `alpha = theta1 + phi1`. Inverse kinematics then reduces
//! to one unknown, `theta1`, found as the real roots of a sextic in
//! `tan(theta1 / 2)`.

use nalgebra::{Isometry3, Point3, Translation3, UnitQuaternion, Vector3};
use num_complex::Complex64;
use num_traits::Num;
use std::f64::consts::PI;

use crate::error::{Ambiguous, KinematicsError, Result, Selection};
use crate::geometry::MachineGeometry;
use crate::oracle::residuals_machine;
use crate::parallel_fk::{enumerate_fk, AssemblyMode};
use crate::rootfind::{real_roots, Polynomial, DEFAULT_TOL};
use crate::types::{
    normalize_angle, ConfigurationIndices, MachineJoints, ParallelJoints, PlatformPose, Sign,
    ToolPose,
};

/// Allowed disagreement between the two leg I slider values, relative to `L1`.
pub const RHO1_AGREEMENT_TOL: f64 = 1e-9;
/// Residual tolerance for accepted machine solutions, relative to `max(L^2)`.
pub const MACHINE_RESIDUAL_TOL: f64 = 1e-8;

const TILT_TAIL_TOL: f64 = 1e-9;
const TILT_NODES: usize = 16;
const MERGE_TOL: f64 = 1e-9;

/// Base frame to table frame.
pub fn table_transform(g: &MachineGeometry, theta1: f64, theta2: f64) -> Isometry3<f64> {
    let tz =
        |d: f64| Isometry3::from_parts(Translation3::new(0.0, 0.0, d), UnitQuaternion::identity());
    let rx = |a: f64| {
        Isometry3::from_parts(
            Translation3::identity(),
            UnitQuaternion::from_axis_angle(&Vector3::x_axis(), a),
        )
    };
    let rz = |a: f64| {
        Isometry3::from_parts(
            Translation3::identity(),
            UnitQuaternion::from_axis_angle(&Vector3::z_axis(), a),
        )
    };
    tz(g.tilt_axis_height) * rx(theta1) * tz(g.table_height) * rx(PI) * rz(theta2)
}

/// Tool pose in the table frame for a platform pose and table angles.
pub fn tool_from_platform(
    g: &MachineGeometry,
    pose: &PlatformPose,
    theta1: f64,
    theta2: f64,
) -> ToolPose {
    let (s, c) = pose.alpha.sin_cos();
    let tcp = Point3::new(
        pose.x,
        pose.y - g.tool_offset * s,
        pose.z + g.tool_offset * c,
    );
    let u = table_transform(g, theta1, theta2).inverse_transform_point(&tcp);
    ToolPose::new(u.x, u.y, u.z, pose.alpha - theta1, -theta2)
}

/// Platform pose that puts the tool at `tool` with tilt `theta1` and
/// `theta2 = -phi2`.
pub fn platform_from_tool(g: &MachineGeometry, tool: &ToolPose, theta1: f64) -> PlatformPose {
    let (st, ct) = theta1.sin_cos();
    let (sp, cp) = tool.phi2.sin_cos();
    let alpha = theta1 + tool.phi1;
    let (sa, ca) = alpha.sin_cos();
    let h = tool.z_u - g.table_height;
    let w = sp * tool.x_u - cp * tool.y_u;
    PlatformPose::new(
        cp * tool.x_u + sp * tool.y_u,
        st * h + ct * w + g.tool_offset * sa,
        st * w - ct * h + g.tilt_axis_height - g.tool_offset * ca,
        alpha,
    )
}

/// One forward solution at machine level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToolMode {
    pub tool: ToolPose,
    pub mode: AssemblyMode,
    pub residual_norm: f64,
}

/// Every tool pose reachable with the given joints, one per assembly mode.
pub fn tool_fk(g: &MachineGeometry, mj: &MachineJoints) -> Result<Vec<ToolMode>> {
    let modes = enumerate_fk(g, &mj.joints)?;
    Ok(modes
        .into_iter()
        .map(|mode| {
            let tool = tool_from_platform(g, &mode.pose, mj.theta1, mj.theta2);
            let residual_norm = residuals_machine(g, &tool, mj.theta1, &mj.joints).max_abs();
            ToolMode {
                tool,
                mode,
                residual_norm,
            }
        })
        .collect())
}

/// The tool pose of the unique reachable assembly mode, if any.
pub fn select_tool_mode(modes: &[ToolMode]) -> Selection<ToolMode> {
    let mut survivors: Vec<ToolMode> = modes.iter().filter(|m| m.mode.reachable).copied().collect();
    match survivors.len() {
        0 => Ok(None),
        1 => Ok(survivors.pop()),
        _ => Err(Ambiguous { survivors }),
    }
}

/// Leg I rod difference with `rho1` eliminated, as a function of the tilt.
fn tilt_equation<T>(g: &MachineGeometry, tool: &ToolPose, ct: T, st: T) -> T
where
    T: Num + Copy + From<f64>,
{
    let k = |v: f64| T::from(v);
    let (sf, cf) = tool.phi1.sin_cos();
    let (sp, cp) = tool.phi2.sin_cos();
    let (big, small) = (g.platform_span1, g.slider_span1);
    let ca = ct * k(cf) - st * k(sf);
    let sa = st * k(cf) + ct * k(sf);
    let h = tool.z_u - g.table_height;
    let w = sp * tool.x_u - cp * tool.y_u;
    let x1 = cp * tool.x_u + sp * tool.y_u + g.leg1_offset();
    let y = st * k(h) + ct * k(w) + k(g.tool_offset) * sa;
    let reach = k(g.rod1 * g.rod1 - big * big - small * small) + k(2.0 * big * small) * ca;
    let k2 = k(big * big) * sa * sa;
    k2 * k(x1 * x1) + (k(small * small + big * big) - k(2.0 * big * small) * ca) * y * y
        - k2 * reach
}

/// Sextic in `tan(theta1 / 2)` whose real roots are the candidate tilts.
pub fn tilt_polynomial(g: &MachineGeometry, tool: &ToolPose) -> Result<Polynomial> {
    let one = Complex64::new(1.0, 0.0);
    Polynomial::interpolate_on_circle(
        |t| {
            let q = one + t * t;
            let f = tilt_equation(g, tool, (one - t * t) / q, t * 2.0 / q);
            f * q * q * q
        },
        6,
        TILT_NODES,
        TILT_TAIL_TOL,
    )
}

fn tilt_residual(g: &MachineGeometry, tool: &ToolPose, theta1: f64) -> f64 {
    let (s, c) = theta1.sin_cos();
    tilt_equation(g, tool, c, s)
}

fn polish_tilt(g: &MachineGeometry, tool: &ToolPose, theta1: f64) -> f64 {
    let mut a = theta1;
    let mut fa = tilt_residual(g, tool, a);
    for _ in 0..8 {
        if fa == 0.0 {
            break;
        }
        let h = 1e-7 * (1.0 + a.abs());
        let d = (tilt_residual(g, tool, a + h) - tilt_residual(g, tool, a - h)) / (2.0 * h);
        if d == 0.0 || !d.is_finite() {
            break;
        }
        let next = a - fa / d;
        let fnext = tilt_residual(g, tool, next);
        if !(fnext.abs() < fa.abs()) {
            break;
        }
        a = next;
        fa = fnext;
    }
    a
}

/// Candidate tilt angles in `(-pi, pi]`, ascending.
pub fn tilt_candidates(g: &MachineGeometry, tool: &ToolPose) -> Result<Vec<f64>> {
    let p = tilt_polynomial(g, tool)?;
    let mut out: Vec<f64> = match real_roots(&p, DEFAULT_TOL) {
        Ok(roots) => roots.into_iter().map(|t| 2.0 * t.atan()).collect(),
        Err(KinematicsError::ConstantPolynomial) => Vec::new(),
        Err(e) => return Err(e),
    };
    if p.degree() < 6 {
        out.push(PI);
    }
    let mut out: Vec<f64> = out
        .into_iter()
        .map(|a| normalize_angle(polish_tilt(g, tool, a)))
        .collect();
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() <= MERGE_TOL);
    Ok(out)
}

/// One inverse solution at machine level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MachineSolution {
    pub joints: MachineJoints,
    /// Platform orientation, `theta1 + phi1`.
    pub alpha: f64,
    pub platform: PlatformPose,
    pub indices: ConfigurationIndices,
    pub residual_norm: f64,
    /// Sliders and table angles inside their configured ranges.
    pub within_limits: bool,
}

fn quadratic_roots(centre: f64, radicand: f64, scale: f64) -> Vec<(Sign, f64)> {
    if radicand < -1e-9 * scale {
        return Vec::new();
    }
    let r = radicand.max(0.0).sqrt();
    vec![(Sign::Minus, centre - r), (Sign::Plus, centre + r)]
}

/// Every inverse solution for a tool pose: up to six tilts, each with up to
/// four slider branches.
pub fn tool_ik(g: &MachineGeometry, tool: &ToolPose) -> Result<Vec<MachineSolution>> {
    let theta2 = -tool.phi2;
    let (big1, small1) = (g.platform_span1, g.slider_span1);
    let (big2, small2) = (g.platform_span2, g.slider_span2);
    let l1 = g.rod1 * g.rod1;
    let tol = MACHINE_RESIDUAL_TOL * g.residual_scale();
    let mut out: Vec<MachineSolution> = Vec::new();

    for theta1 in tilt_candidates(g, tool)? {
        let p = platform_from_tool(g, tool, theta1);
        let (sa, ca) = p.alpha.sin_cos();
        let x1 = p.x + g.leg1_offset();
        let x2 = p.x + g.leg23_offset();

        // leg I: one value from each rod, kept only where they agree
        let ya = p.y + big1 * ca - small1;
        let yb = p.y - big1 * ca + small1;
        let from_a = quadratic_roots(p.z + big1 * sa, l1 - x1 * x1 - ya * ya, l1);
        let from_b = quadratic_roots(p.z - big1 * sa, l1 - x1 * x1 - yb * yb, l1);
        let mut rho1s: Vec<f64> = Vec::new();
        for &(_, a) in &from_a {
            for &(_, b) in &from_b {
                if (a - b).abs() <= RHO1_AGREEMENT_TOL * g.rod1 {
                    let r = 0.5 * (a + b);
                    if !rho1s
                        .iter()
                        .any(|q| (q - r).abs() <= RHO1_AGREEMENT_TOL * g.rod1)
                    {
                        rho1s.push(r);
                    }
                }
            }
        }

        let y2 = p.y - big2 * ca + small2;
        let rho2s = quadratic_roots(
            p.z - big2 * sa,
            g.rod2 * g.rod2 - x2 * x2 - y2 * y2,
            g.rod2 * g.rod2,
        );
        let y3 = p.y + big2 * ca - small2;
        let rho3s = quadratic_roots(
            p.z + big2 * sa,
            g.rod3 * g.rod3 - x2 * x2 - y3 * y3,
            g.rod3 * g.rod3,
        );

        for &rho1 in &rho1s {
            let s1 = if (rho1 - p.z).abs() <= RHO1_AGREEMENT_TOL * g.rod1 {
                Sign::Minus
            } else {
                Sign::of(rho1 - p.z)
            };
            for &(s2, rho2) in &rho2s {
                for &(s3, rho3) in &rho3s {
                    let joints = ParallelJoints::new(rho1, rho2, rho3);
                    let residual_norm = residuals_machine(g, tool, theta1, &joints).max_abs();
                    if !(residual_norm <= tol) {
                        continue;
                    }
                    let duplicate = out.iter().any(|o| {
                        o.joints.joints.max_diff(&joints) <= MERGE_TOL
                            && (o.joints.theta1 - theta1).abs() <= MERGE_TOL
                    });
                    if duplicate {
                        continue;
                    }
                    let within_limits = joints.as_array().iter().all(|&r| g.rho_in_limits(r))
                        && g.tilt_in_limits(theta1)
                        && g.rotary_in_limits(theta2);
                    out.push(MachineSolution {
                        joints: MachineJoints::new(joints, theta1, theta2),
                        alpha: p.alpha,
                        platform: p,
                        indices: ConfigurationIndices::new(s1, s2, s3),
                        residual_norm,
                        within_limits,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// The working branch: all sliders above the platform, no leg I rod
/// crossing, everything inside its limits.
pub fn select_machine_solution(
    solutions: &[MachineSolution],
    g: &MachineGeometry,
) -> Selection<MachineSolution> {
    let mut survivors: Vec<MachineSolution> = solutions
        .iter()
        .filter(|s| s.indices.is_working())
        .filter(|s| g.platform_span1 * s.alpha.cos() > g.slider_span1)
        .filter(|s| s.within_limits)
        .copied()
        .collect();
    survivors.sort_by(|a, b| {
        a.joints
            .theta1
            .total_cmp(&b.joints.theta1)
            .then(a.joints.joints.rho1.total_cmp(&b.joints.joints.rho1))
    });
    match survivors.len() {
        0 => Ok(None),
        1 => Ok(survivors.pop()),
        _ => Err(Ambiguous { survivors }),
    }
}
