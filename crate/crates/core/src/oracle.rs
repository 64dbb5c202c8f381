//! Independent numeric ground truth.
//!
//! Residuals are the raw left-hand sides of the rod-length constraints, and
//! [`newton_fk`] solves the forward problem by multi-start damped Newton.
//! Nothing in here depends on the closed-form solvers, so agreement between
//! the two is a real cross-check.

use nalgebra::{Matrix4, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use crate::geometry::MachineGeometry;
use crate::types::{ParallelJoints, PlatformPose, ToolPose};

/// Constraint residuals (mm^2) for leg I (two rods), leg II and leg III.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualVector {
    pub r_3a: f64,
    pub r_3b: f64,
    pub r_4: f64,
    pub r_5: f64,
}

impl ResidualVector {
    pub fn as_array(&self) -> [f64; 4] {
        [self.r_3a, self.r_3b, self.r_4, self.r_5]
    }

    /// Infinity norm.
    pub fn max_abs(&self) -> f64 {
        self.as_array().iter().fold(0.0_f64, |m, r| m.max(r.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.as_array().iter().all(|r| r.is_finite())
    }
}

/// One rod constraint: `(x + a)^2 + (y + b cos(alpha) + e)^2 + (z + b sin(alpha) - rho)^2 - L^2`.
#[derive(Debug, Clone, Copy)]
struct Rod {
    x_offset: f64,
    span: f64,
    y_offset: f64,
    length: f64,
}

impl Rod {
    fn parts(&self, pose: &PlatformPose, rho: f64) -> (f64, f64, f64) {
        let (s, c) = pose.alpha.sin_cos();
        (
            pose.x + self.x_offset,
            pose.y + self.span * c + self.y_offset,
            pose.z + self.span * s - rho,
        )
    }

    fn residual(&self, pose: &PlatformPose, rho: f64) -> f64 {
        let (dx, dy, dz) = self.parts(pose, rho);
        dx * dx + dy * dy + dz * dz - self.length * self.length
    }

    /// Gradient with respect to `(x, y, z, alpha)`.
    fn gradient(&self, pose: &PlatformPose, rho: f64) -> [f64; 4] {
        let (s, c) = pose.alpha.sin_cos();
        let (dx, dy, dz) = self.parts(pose, rho);
        [
            2.0 * dx,
            2.0 * dy,
            2.0 * dz,
            2.0 * dy * (-self.span * s) + 2.0 * dz * (self.span * c),
        ]
    }
}

fn rods(g: &MachineGeometry) -> [Rod; 4] {
    let a1 = g.slider_x1 - g.platform_x1;
    let a2 = g.slider_x2 - g.platform_x2;
    [
        Rod {
            x_offset: a1,
            span: g.platform_span1,
            y_offset: -g.slider_span1,
            length: g.rod1,
        },
        Rod {
            x_offset: a1,
            span: -g.platform_span1,
            y_offset: g.slider_span1,
            length: g.rod1,
        },
        Rod {
            x_offset: a2,
            span: -g.platform_span2,
            y_offset: g.slider_span2,
            length: g.rod2,
        },
        Rod {
            x_offset: a2,
            span: g.platform_span2,
            y_offset: -g.slider_span2,
            length: g.rod3,
        },
    ]
}

fn rod_rhos(j: &ParallelJoints) -> [f64; 4] {
    [j.rho1, j.rho1, j.rho2, j.rho3]
}

/// Direct evaluation of the four parallel-module constraints.
pub fn residuals_parallel(
    geom: &MachineGeometry,
    pose: &PlatformPose,
    joints: &ParallelJoints,
) -> ResidualVector {
    let r = rods(geom);
    let rho = rod_rhos(joints);
    ResidualVector {
        r_3a: r[0].residual(pose, rho[0]),
        r_3b: r[1].residual(pose, rho[1]),
        r_4: r[2].residual(pose, rho[2]),
        r_5: r[3].residual(pose, rho[3]),
    }
}

/// Analytic Jacobian of [`residuals_parallel`] with respect to `(x, y, z, alpha)`.
pub fn residual_jacobian(
    geom: &MachineGeometry,
    pose: &PlatformPose,
    joints: &ParallelJoints,
) -> Matrix4<f64> {
    let r = rods(geom);
    let rho = rod_rhos(joints);
    let mut m = Matrix4::zeros();
    for i in 0..4 {
        let g = r[i].gradient(pose, rho[i]);
        for k in 0..4 {
            m[(i, k)] = g[k];
        }
    }
    m
}

/// Full-machine constraints expressed in tool coordinates.
///
/// The table's rotary angle is assumed to cancel the tool's second angle
/// (`theta2 = -phi2`), which is how every machine-level solution is built;
/// `theta1` is the tilt angle.
pub fn residuals_machine(
    geom: &MachineGeometry,
    tool: &ToolPose,
    theta1: f64,
    joints: &ParallelJoints,
) -> ResidualVector {
    let g = geom;
    let (s1, c1) = theta1.sin_cos();
    let (sp2, cp2) = tool.phi2.sin_cos();
    let (sa, ca) = (theta1 + tool.phi1).sin_cos();
    let h = tool.z_u - g.table_height;
    let w = sp2 * tool.x_u - cp2 * tool.y_u;
    let planar = cp2 * tool.x_u + sp2 * tool.y_u;
    let y_base = s1 * h + c1 * w + g.tool_offset * sa;
    let z_base = s1 * w - c1 * h + g.tilt_axis_height - g.tool_offset * ca;

    let leg = |x_off: f64, span: f64, y_off: f64, rho: f64, l: f64| -> f64 {
        let dx = planar + x_off;
        let dy = y_base + span * ca + y_off;
        let dz = z_base + span * sa - rho;
        dx * dx + dy * dy + dz * dz - l * l
    };
    let a1 = g.slider_x1 - g.platform_x1;
    let a2 = g.slider_x2 - g.platform_x2;
    ResidualVector {
        r_3a: leg(a1, g.platform_span1, -g.slider_span1, joints.rho1, g.rod1),
        r_3b: leg(a1, -g.platform_span1, g.slider_span1, joints.rho1, g.rod1),
        r_4: leg(a2, -g.platform_span2, g.slider_span2, joints.rho2, g.rod2),
        r_5: leg(a2, g.platform_span2, -g.slider_span2, joints.rho3, g.rod3),
    }
}

/// Axis-aligned box of start poses for [`newton_fk`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseBox {
    pub x: (f64, f64),
    pub y: (f64, f64),
    pub z: (f64, f64),
}

impl PoseBox {
    /// A box around the leg attachments that contains every assembly mode
    /// of the given joints.
    pub fn around(geom: &MachineGeometry, joints: &ParallelJoints) -> Self {
        let l = geom.rod1.max(geom.rod2).max(geom.rod3);
        let span = l + geom.platform_span1.max(geom.platform_span2);
        let cx = -0.5 * (geom.leg1_offset() + geom.leg23_offset());
        let half_x = span + 0.5 * (geom.leg1_offset() - geom.leg23_offset()).abs();
        let rho = joints.as_array();
        let zlo = rho.iter().cloned().fold(f64::INFINITY, f64::min) - span;
        let zhi = rho.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + span;
        PoseBox {
            x: (cx - half_x, cx + half_x),
            y: (-span, span),
            z: (zlo, zhi),
        }
    }
}

/// Settings for the multi-start Newton oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonConfig {
    pub starts: usize,
    pub seed: u64,
    pub max_iterations: usize,
    /// Start box; `None` uses [`PoseBox::around`].
    pub pose_box: Option<PoseBox>,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig {
            starts: 100,
            seed: 0x5eed,
            max_iterations: 100,
            pose_box: None,
        }
    }
}

const NEWTON_TOL: f64 = 1e-10;
const NEWTON_DEDUP: f64 = 1e-6;

/// Damped Newton from one start. Returns the converged pose and the number
/// of iterations taken, or `None` when the start does not converge.
pub fn newton_solve(
    geom: &MachineGeometry,
    joints: &ParallelJoints,
    start: PlatformPose,
    max_iterations: usize,
) -> Option<(PlatformPose, usize)> {
    let tol = NEWTON_TOL * geom.residual_scale();
    let norm = |p: &PlatformPose| residuals_parallel(geom, p, joints).max_abs();
    let mut pose = start;
    let mut current = norm(&pose);
    for iter in 0..=max_iterations {
        if !current.is_finite() {
            return None;
        }
        if current <= tol {
            return Some((PlatformPose::new(pose.x, pose.y, pose.z, pose.alpha), iter));
        }
        if iter == max_iterations {
            break;
        }
        let f = Vector4::from(residuals_parallel(geom, &pose, joints).as_array());
        let jac = residual_jacobian(geom, &pose, joints);
        let step = jac.lu().solve(&(-f))?;
        let mut damping = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial = PlatformPose {
                x: pose.x + damping * step[0],
                y: pose.y + damping * step[1],
                z: pose.z + damping * step[2],
                alpha: pose.alpha + damping * step[3],
            };
            let r = norm(&trial);
            if r.is_finite() && r < current {
                pose = trial;
                current = r;
                accepted = true;
                break;
            }
            damping *= 0.5;
        }
        if !accepted {
            return None;
        }
    }
    None
}

/// Distinct forward-kinematic solutions found by multi-start Newton,
/// sorted by `(alpha, x, y, z)`.
pub fn newton_fk(
    geom: &MachineGeometry,
    joints: &ParallelJoints,
    config: &NewtonConfig,
) -> Vec<PlatformPose> {
    let b = config
        .pose_box
        .unwrap_or_else(|| PoseBox::around(geom, joints));
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut found: Vec<PlatformPose> = Vec::new();
    for _ in 0..config.starts.max(1) {
        let start = PlatformPose {
            x: rng.gen_range(b.x.0..=b.x.1),
            y: rng.gen_range(b.y.0..=b.y.1),
            z: rng.gen_range(b.z.0..=b.z.1),
            alpha: rng.gen_range(-PI..=PI),
        };
        if let Some((p, _)) = newton_solve(geom, joints, start, config.max_iterations) {
            let dup = found.iter().any(|q| {
                let (lin, ang) = q.distance(&p);
                lin <= NEWTON_DEDUP && ang <= NEWTON_DEDUP
            });
            if !dup {
                found.push(p);
            }
        }
    }
    found.sort_by(|a, b| {
        a.alpha
            .total_cmp(&b.alpha)
            .then(a.x.total_cmp(&b.x))
            .then(a.y.total_cmp(&b.y))
            .then(a.z.total_cmp(&b.z))
    });
    found
}
