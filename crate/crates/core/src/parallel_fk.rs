//! Forward kinematics of the parallel module.
//!
//! The slider coordinates are known and the platform pose is not. The two
//! leg I rods give `y_p` in terms of `z_p` and `alpha`; the difference of
//! the leg II and III constraints then fixes `z_p`; the difference between
//! leg II and the leg I midpoint constraint is linear in `x_p`. What is left
//! is one equation in `alpha`. With `t = tan(alpha / 2)` and the known
//! denominators cleared it is a polynomial of degree eight in `t`, which is
//! recovered here by sampling it on the unit circle rather than by
//! expanding its (very long) symbolic coefficients.
//!
//! Variable naming below: with `W = R1 cos(alpha) - r1` and
//! `E = 2 (r1 R2 - r4 R1) sin(alpha) + W (rho3 - rho2)`, the eliminated
//! unknowns are carried as `E`-scaled numerators
//! `Y = y_p E`, `V = (rho1 - z_p) E`, `X = (x_p + D1 - d1) E`, so that no
//! division happens until the final back-substitution.

use num_complex::Complex64;
use num_traits::Num;
use std::f64::consts::PI;

use crate::error::{Ambiguous, KinematicsError, Result, Selection};
use crate::geometry::MachineGeometry;
use nalgebra::Vector4;

use crate::oracle::{residual_jacobian, residuals_parallel};
use crate::rootfind::{real_roots, Polynomial, DEFAULT_TOL};
use crate::types::{normalize_angle, ConfigurationIndices, ParallelJoints, PlatformPose, Sign};

/// Residual tolerance for accepted assembly modes, relative to `max(L^2)`.
pub const FK_RESIDUAL_TOL: f64 = 1e-7;
/// Modes closer than this (mm and rad) are merged.
pub const FK_MERGE_TOL: f64 = 1e-7;

const DENOMINATOR_TOL: f64 = 1e-12;
const OCTIC_TAIL_TOL: f64 = 1e-9;
const OCTIC_NODES: usize = 16;
const REFINE_STEPS: usize = 20;

/// One real solution of the forward problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssemblyMode {
    pub pose: PlatformPose,
    /// Signs of `rho1 - z`, `rho2 - z + R2 sin(alpha)`, `rho3 - z - R2 sin(alpha)`.
    pub indices: ConfigurationIndices,
    pub residual_norm: f64,
    /// Working mode and no leg I rod crossing.
    pub reachable: bool,
}

/// Quantities of the elimination chain at one orientation.
#[derive(Debug, Clone, Copy)]
struct Reduced<T> {
    e: T,
    x: T,
    y: T,
    v: T,
    /// Remaining equation after all substitutions: `X^2 + Y^2 + V^2 - K E^2`.
    f: T,
}

fn reduce<T>(g: &MachineGeometry, j: &ParallelJoints, c: T, s: T) -> Reduced<T>
where
    T: Num + Copy + From<f64>,
{
    let k = |v: f64| T::from(v);
    let (big1, small1) = (g.platform_span1, g.slider_span1);
    let (big2, small2) = (g.platform_span2, g.slider_span2);
    let delta = g.leg23_offset() - g.leg1_offset();
    let d32 = j.rho3 - j.rho2;

    let w = k(big1) * c - k(small1);
    let e = k(2.0 * g.span_coupling()) * s + w * k(d32);
    let gg = k(2.0 * j.rho1 - j.rho2 - j.rho3) * (k(d32) - k(2.0 * big2) * s)
        + k(g.rod3 * g.rod3 - g.rod2 * g.rod2);
    let y = k(0.5 * big1) * s * gg;
    let v = k(0.5) * w * gg;
    let reach = k(g.rod1 * g.rod1 - big1 * big1 - small1 * small1) + k(2.0 * big1 * small1) * c;
    let b = k(big2) * c - k(small2);
    let m = k(j.rho1 - j.rho2) - k(big2) * s;
    let qe = (b * b + m * m - k(g.rod2 * g.rod2) + reach) * e - k(2.0) * (y * b + v * m);
    let x = (k(-delta * delta) * e - qe) / k(2.0 * delta);
    let f = x * x + y * y + v * v - reach * e * e;
    Reduced { e, x, y, v, f }
}

fn denominator_scale(g: &MachineGeometry, j: &ParallelJoints) -> f64 {
    2.0 * g.span_coupling().abs() + (g.platform_span1 + g.slider_span1) * (j.rho3 - j.rho2).abs()
}

fn check_offsets(g: &MachineGeometry) -> Result<()> {
    let delta = g.leg23_offset() - g.leg1_offset();
    if delta.abs() <= DENOMINATOR_TOL * (g.leg1_offset().abs() + g.leg23_offset().abs()) {
        return Err(KinematicsError::CoincidentOffsets);
    }
    Ok(())
}

fn checked_e(g: &MachineGeometry, j: &ParallelJoints, r: &Reduced<f64>) -> Result<f64> {
    if r.e.abs() <= DENOMINATOR_TOL * denominator_scale(g, j) || r.e == 0.0 {
        return Err(KinematicsError::DegenerateDenominator { value: r.e });
    }
    Ok(r.e)
}

/// `y_p` from the leg I rod difference.
pub fn yp_from(g: &MachineGeometry, alpha: f64, z_p: f64, rho1: f64) -> Result<f64> {
    let (s, c) = alpha.sin_cos();
    let w = g.platform_span1 * c - g.slider_span1;
    if w.abs() < DENOMINATOR_TOL * g.platform_span1 {
        return Err(KinematicsError::SingularOrientation);
    }
    Ok(g.platform_span1 * s * (rho1 - z_p) / w)
}

/// `z_p` from the leg II / leg III difference.
pub fn zp_from(g: &MachineGeometry, alpha: f64, joints: &ParallelJoints) -> Result<f64> {
    let (s, c) = alpha.sin_cos();
    let r = reduce(g, joints, c, s);
    let e = checked_e(g, joints, &r)?;
    Ok(joints.rho1 - r.v / e)
}

/// `x_p` from the leg II / leg I midpoint difference.
pub fn xp_from(g: &MachineGeometry, alpha: f64, joints: &ParallelJoints) -> Result<f64> {
    check_offsets(g)?;
    let (s, c) = alpha.sin_cos();
    let r = reduce(g, joints, c, s);
    let e = checked_e(g, joints, &r)?;
    Ok(r.x / e - g.leg1_offset())
}

/// Full back-substitution at one orientation.
pub fn pose_from_alpha(
    g: &MachineGeometry,
    alpha: f64,
    joints: &ParallelJoints,
) -> Result<PlatformPose> {
    check_offsets(g)?;
    let (s, c) = alpha.sin_cos();
    let r = reduce(g, joints, c, s);
    let e = checked_e(g, joints, &r)?;
    Ok(PlatformPose::new(
        r.x / e - g.leg1_offset(),
        r.y / e,
        joints.rho1 - r.v / e,
        alpha,
    ))
}

/// Degree-8 polynomial in `t = tan(alpha / 2)` whose real roots are the
/// orientations of every assembly mode (except `alpha = 0, pi` on the
/// symmetric branch `rho2 = rho3`, where the elimination degenerates).
pub fn octic_from_joints(g: &MachineGeometry, joints: &ParallelJoints) -> Result<Polynomial> {
    check_offsets(g)?;
    let one = Complex64::new(1.0, 0.0);
    Polynomial::interpolate_on_circle(
        |t| {
            let q = one + t * t;
            let c = (one - t * t) / q;
            let s = t * 2.0 / q;
            let r = reduce(g, joints, c, s);
            let q2 = q * q;
            r.f * q2 * q2
        },
        8,
        OCTIC_NODES,
        OCTIC_TAIL_TOL,
    )
}

fn reduced_f(g: &MachineGeometry, joints: &ParallelJoints, alpha: f64) -> f64 {
    let (s, c) = alpha.sin_cos();
    reduce(g, joints, c, s).f
}

/// Newton refinement of a root of the reduced equation in `alpha`.
fn polish_alpha(g: &MachineGeometry, joints: &ParallelJoints, alpha: f64) -> f64 {
    let mut a = alpha;
    let mut fa = reduced_f(g, joints, a);
    for _ in 0..8 {
        if fa == 0.0 {
            break;
        }
        let h = 1e-7 * (1.0 + a.abs());
        let d = (reduced_f(g, joints, a + h) - reduced_f(g, joints, a - h)) / (2.0 * h);
        if d == 0.0 || !d.is_finite() {
            break;
        }
        let next = a - fa / d;
        let fn_ = reduced_f(g, joints, next);
        if !(fn_.abs() < fa.abs()) {
            break;
        }
        a = next;
        fa = fn_;
    }
    a
}

/// Poses at a fixed orientation where the leg II / leg III difference
/// carries no information (it holds for every `z_p`). `y_p` and `x_p` are
/// then linear in `v = rho1 - z_p` and the leg I midpoint constraint is a
/// quadratic in `v`.
fn free_height_candidates(
    g: &MachineGeometry,
    joints: &ParallelJoints,
    alpha: f64,
) -> Vec<PlatformPose> {
    let (s, c) = alpha.sin_cos();
    let (big1, small1) = (g.platform_span1, g.slider_span1);
    let w = big1 * c - small1;
    if w.abs() < DENOMINATOR_TOL * big1 {
        return Vec::new();
    }
    let delta = g.leg23_offset() - g.leg1_offset();
    let kappa = big1 * s / w;
    let reach = g.rod1 * g.rod1 - big1 * big1 - small1 * small1 + 2.0 * big1 * small1 * c;
    let b = g.platform_span2 * c - g.slider_span2;
    let m = joints.rho1 - joints.rho2 - g.platform_span2 * s;
    // X1 = e0 + e1 v from the leg II minus leg I midpoint difference
    let e0 = -(delta * delta + b * b + m * m - g.rod2 * g.rod2 + reach) / (2.0 * delta);
    let e1 = (2.0 * kappa * b + 2.0 * m) / (2.0 * delta);
    let qa = e1 * e1 + kappa * kappa + 1.0;
    let qb = 2.0 * e0 * e1;
    let qc = e0 * e0 - reach;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < -1e-12 * qb * qb.max(4.0 * qa * qc.abs()) {
        return Vec::new();
    }
    let root = disc.max(0.0).sqrt();
    [-1.0, 1.0]
        .into_iter()
        .map(|sgn| {
            let v = (-qb + sgn * root) / (2.0 * qa);
            PlatformPose::new(
                e0 + e1 * v - g.leg1_offset(),
                kappa * v,
                joints.rho1 - v,
                alpha,
            )
        })
        .collect()
}

/// Orientations where the leg II / leg III difference can degenerate:
/// `alpha in {0, pi}` (exactly so for `rho2 = rho3`) and the zeros of
/// `E(alpha)` (for `2 rho1 = rho2 + rho3` with `L2 = L3`). Modes at or near
/// these are poorly conditioned in the octic, so they are always seeded.
fn degenerate_orientations(g: &MachineGeometry, joints: &ParallelJoints) -> Vec<f64> {
    let mut out = vec![0.0, PI];
    let d32 = joints.rho3 - joints.rho2;
    // 2 C1 sin(alpha) + R1 d32 cos(alpha) = r1 d32
    let (a, b, c) = (
        2.0 * g.span_coupling(),
        g.platform_span1 * d32,
        g.slider_span1 * d32,
    );
    let r = a.hypot(b);
    if r > 0.0 && c.abs() <= r {
        let phase = a.atan2(b);
        let spread = (c / r).acos();
        out.extend([phase + spread, phase - spread]);
    }
    out
}

/// A few damped Newton steps on the four rod constraints. Cleans up
/// candidates from ill-conditioned back-substitution.
fn refine_pose(g: &MachineGeometry, joints: &ParallelJoints, pose: PlatformPose) -> PlatformPose {
    let norm = |p: &PlatformPose| residuals_parallel(g, p, joints).max_abs();
    let mut cur = pose;
    let mut cur_norm = norm(&pose);
    for _ in 0..REFINE_STEPS {
        if cur_norm == 0.0 || !cur_norm.is_finite() {
            break;
        }
        let f = Vector4::from(residuals_parallel(g, &cur, joints).as_array());
        let Some(step) = residual_jacobian(g, &cur, joints).lu().solve(&(-f)) else {
            break;
        };
        let mut damping = 1.0;
        let mut improved = false;
        for _ in 0..12 {
            let trial = PlatformPose {
                x: cur.x + damping * step[0],
                y: cur.y + damping * step[1],
                z: cur.z + damping * step[2],
                alpha: cur.alpha + damping * step[3],
            };
            let n = norm(&trial);
            if n < cur_norm {
                cur = trial;
                cur_norm = n;
                improved = true;
                break;
            }
            damping *= 0.5;
        }
        if !improved {
            break;
        }
    }
    PlatformPose::new(cur.x, cur.y, cur.z, cur.alpha)
}

/// Configuration indices implied by a solved pose.
pub fn indices_of(
    g: &MachineGeometry,
    pose: &PlatformPose,
    joints: &ParallelJoints,
) -> ConfigurationIndices {
    let s = pose.alpha.sin();
    ConfigurationIndices::new(
        Sign::of(joints.rho1 - pose.z),
        Sign::of(joints.rho2 - pose.z + g.platform_span2 * s),
        Sign::of(joints.rho3 - pose.z - g.platform_span2 * s),
    )
}

fn reachable(g: &MachineGeometry, pose: &PlatformPose, indices: &ConfigurationIndices) -> bool {
    indices.is_working() && g.platform_span1 * pose.alpha.cos() > g.slider_span1
}

/// Every assembly mode for the given slider coordinates, sorted by `alpha`.
pub fn enumerate_fk(g: &MachineGeometry, joints: &ParallelJoints) -> Result<Vec<AssemblyMode>> {
    let octic = octic_from_joints(g, joints)?;
    let mut alphas: Vec<f64> = match real_roots(&octic, DEFAULT_TOL) {
        Ok(roots) => roots.into_iter().map(|t| 2.0 * t.atan()).collect(),
        Err(KinematicsError::ConstantPolynomial) => Vec::new(),
        Err(e) => return Err(e),
    };
    if octic.degree() < 8 {
        // root at t = infinity
        alphas.push(PI);
    }

    let tol = FK_RESIDUAL_TOL * g.residual_scale();
    let mut seeds: Vec<PlatformPose> = Vec::new();
    for a in alphas {
        let a = normalize_angle(polish_alpha(g, joints, a));
        if let Ok(p) = pose_from_alpha(g, a, joints) {
            seeds.push(p);
        }
        // near a zero of E the back-substitution is unreliable
        seeds.extend(free_height_candidates(g, joints, a));
    }
    for a in degenerate_orientations(g, joints) {
        seeds.extend(free_height_candidates(g, joints, normalize_angle(a)));
    }
    let poses: Vec<PlatformPose> = seeds
        .into_iter()
        .map(|p| refine_pose(g, joints, p))
        .collect();

    let mut modes: Vec<AssemblyMode> = Vec::new();
    for pose in poses {
        let residual_norm = residuals_parallel(g, &pose, joints).max_abs();
        if !(residual_norm <= tol) {
            continue;
        }
        let duplicate = modes.iter().position(|m| {
            let (lin, ang) = m.pose.distance(&pose);
            lin <= FK_MERGE_TOL * (1.0 + pose.x.abs().max(pose.y.abs()).max(pose.z.abs()))
                && ang <= FK_MERGE_TOL
        });
        if let Some(i) = duplicate {
            if residual_norm < modes[i].residual_norm {
                modes.swap_remove(i);
            } else {
                continue;
            }
        }
        let indices = indices_of(g, &pose, joints);
        modes.push(AssemblyMode {
            pose,
            indices,
            residual_norm,
            reachable: reachable(g, &pose, &indices),
        });
    }
    modes.sort_by(|a, b| {
        a.pose
            .alpha
            .total_cmp(&b.pose.alpha)
            .then(a.pose.x.total_cmp(&b.pose.x))
            .then(a.pose.z.total_cmp(&b.pose.z))
    });
    Ok(modes)
}

/// The unique reachable mode, if any.
pub fn select_assembly_mode(modes: &[AssemblyMode]) -> Selection<AssemblyMode> {
    let mut survivors: Vec<AssemblyMode> = modes.iter().filter(|m| m.reachable).copied().collect();
    survivors.sort_by(|a, b| {
        a.pose
            .alpha
            .total_cmp(&b.pose.alpha)
            .then(a.pose.x.total_cmp(&b.pose.x))
    });
    match survivors.len() {
        0 => Ok(None),
        1 => Ok(survivors.pop()),
        _ => Err(Ambiguous { survivors }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parallel_ik::{enumerate_ik, select_working_solution};

    const G: MachineGeometry = MachineGeometry::DEFAULT_SYNTHETIC;

    fn working_joints(x: f64, y: f64, z: f64) -> (PlatformPose, ParallelJoints) {
        let sols = enumerate_ik(&G, x, y, z);
        let w = select_working_solution(&sols, &G)
            .unwrap()
            .expect("reachable test pose");
        (PlatformPose::new(x, y, z, w.alpha), w.joints)
    }

    #[test]
    fn yp_vanishes_without_rotation() {
        assert_eq!(yp_from(&G, 0.0, 900.0, 300.0).unwrap(), 0.0);
        assert!(
            yp_from(&G, std::f64::consts::PI, 900.0, 300.0)
                .unwrap()
                .abs()
                < 1e-10
        );
        let alpha = (G.slider_span1 / G.platform_span1).acos();
        assert_eq!(
            yp_from(&G, alpha, 900.0, 300.0),
            Err(KinematicsError::SingularOrientation)
        );
    }

    #[test]
    fn yp_satisfies_rod_difference() {
        let (alpha, z, rho1) = (0.13, 910.0, 260.0);
        let y = yp_from(&G, alpha, z, rho1).unwrap();
        let lhs = y * (G.platform_span1 * alpha.cos() - G.slider_span1);
        let rhs = G.platform_span1 * alpha.sin() * (rho1 - z);
        assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs());
    }

    #[test]
    fn zp_balances_legs_two_and_three() {
        let joints = ParallelJoints::new(250.0, 330.0, 180.0);
        for alpha in [-0.4, 0.05, 0.3, 2.0] {
            let z = zp_from(&G, alpha, &joints).unwrap();
            let y = yp_from(&G, alpha, z, joints.rho1).unwrap();
            // x cancels in the difference of the leg II and III constraints
            let r = residuals_parallel(&G, &PlatformPose::new(-400.0, y, z, alpha), &joints);
            assert!(
                (r.r_4 - r.r_5).abs() <= 1e-9 * G.residual_scale(),
                "{alpha}: {}",
                r.r_4 - r.r_5
            );
        }
    }

    #[test]
    fn zp_symmetric_sliders_closed_form() {
        let joints = ParallelJoints::new(250.0, 300.0, 300.0);
        let alpha: f64 = 0.3;
        let c1 = G.span_coupling();
        let (s, c) = alpha.sin_cos();
        let w = G.platform_span1 * c - G.slider_span1;
        // rho3 = rho2 substituted into the general expression
        let num = -2.0 * G.platform_span2 * (2.0 * joints.rho2 - 2.0 * joints.rho1) * w * s
            + 4.0 * c1 * joints.rho1 * s;
        let want = num / (4.0 * c1 * s);
        let got = zp_from(&G, alpha, &joints).unwrap();
        assert!((got - want).abs() < 1e-9, "{got} vs {want}");
    }

    #[test]
    fn zp_degenerate_denominator() {
        let joints = ParallelJoints::new(250.0, 300.0, 300.0);
        assert!(matches!(
            zp_from(&G, 0.0, &joints),
            Err(KinematicsError::DegenerateDenominator { .. })
        ));
    }

    #[test]
    fn xp_closes_leg_two_against_leg_one_midpoint() {
        let joints = ParallelJoints::new(250.0, 330.0, 180.0);
        for alpha in [-0.4, 0.05, 0.3] {
            let p = pose_from_alpha(&G, alpha, &joints).unwrap();
            assert_eq!(p.x, xp_from(&G, alpha, &joints).unwrap());
            let r = residuals_parallel(&G, &p, &joints);
            let midpoint = 0.5 * (r.r_3a + r.r_3b);
            assert!((r.r_4 - midpoint).abs() <= 1e-8 * G.residual_scale());
        }
        // symmetric sliders keep a finite x for sin(alpha) != 0
        let sym = ParallelJoints::new(250.0, 300.0, 300.0);
        assert!(xp_from(&G, 0.3, &sym).unwrap().is_finite());
    }

    #[test]
    fn coincident_offsets_rejected() {
        let mut g = G;
        g.platform_x2 = g.slider_x2 - g.leg1_offset();
        let joints = ParallelJoints::new(250.0, 330.0, 180.0);
        assert_eq!(
            xp_from(&g, 0.2, &joints),
            Err(KinematicsError::CoincidentOffsets)
        );
        assert_eq!(
            octic_from_joints(&g, &joints),
            Err(KinematicsError::CoincidentOffsets)
        );
    }

    #[test]
    fn octic_has_root_at_known_orientation() {
        let (pose, joints) = working_joints(-470.0, 45.0, 920.0);
        let octic = octic_from_joints(&G, &joints).unwrap();
        assert_eq!(octic.degree(), 8);
        let roots = real_roots(&octic, DEFAULT_TOL).unwrap();
        assert!(
            roots
                .iter()
                .any(|t| (2.0 * t.atan() - pose.alpha).abs() <= 1e-8),
            "{roots:?} vs {}",
            pose.alpha
        );
    }

    #[test]
    fn working_pose_recovered() {
        let (pose, joints) = working_joints(-470.0, 45.0, 920.0);
        let modes = enumerate_fk(&G, &joints).unwrap();
        let picked = select_assembly_mode(&modes).unwrap().unwrap();
        let (lin, ang) = picked.pose.distance(&pose);
        assert!(lin <= 1e-6 && ang <= 1e-8, "{lin} {ang}");
    }

    #[test]
    fn symmetric_sliders_include_level_modes() {
        let (pose, joints) = working_joints(-470.0, 0.0, 920.0);
        assert_eq!(pose.alpha, 0.0);
        assert!((joints.rho2 - joints.rho3).abs() < 1e-9);
        let modes = enumerate_fk(&G, &joints).unwrap();
        let level: Vec<_> = modes
            .iter()
            .filter(|m| m.pose.alpha.sin().abs() < 1e-12)
            .collect();
        assert!(!level.is_empty());
        for m in &level {
            assert!(m.pose.y.abs() < 1e-9);
        }
        assert!(modes.iter().any(|m| m.pose.distance(&pose).0 < 1e-6));
    }

    #[test]
    fn midpoint_sliders_resolve_vanishing_denominator() {
        // 2 rho1 = rho2 + rho3 with L2 = L3: the leg II / III difference
        // is silent and every mode sits on a zero of E
        let joints = ParallelJoints::new(300.0, 320.0, 280.0);
        let modes = enumerate_fk(&G, &joints).unwrap();
        assert_eq!(modes.len(), 4);
        for m in &modes {
            assert!(m.residual_norm <= 1e-9 * G.residual_scale());
        }
        let oracle = crate::oracle::newton_fk(&G, &joints, &crate::oracle::NewtonConfig::default());
        assert!(!oracle.is_empty());
        for p in oracle {
            assert!(modes.iter().any(|m| m.pose.distance(&p).0 < 1e-6));
        }
        assert!(select_assembly_mode(&modes).unwrap().is_some());
    }

    #[test]
    fn selection_edge_cases() {
        assert_eq!(select_assembly_mode(&[]), Ok(None));
        let (_, joints) = working_joints(-470.0, 45.0, 920.0);
        let modes: Vec<AssemblyMode> = enumerate_fk(&G, &joints)
            .unwrap()
            .into_iter()
            .filter(|m| !m.indices.is_working())
            .collect();
        assert_eq!(select_assembly_mode(&modes), Ok(None));
    }
}
