//! Random reachable poses and the IK/FK round-trip report.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use crate::geometry::MachineGeometry;
use crate::machine::{
    select_machine_solution, select_tool_mode, tool_fk, tool_from_platform, tool_ik,
};
use crate::oracle::{newton_fk, NewtonConfig};
use crate::parallel_fk::{enumerate_fk, select_assembly_mode};
use crate::parallel_ik::{enumerate_ik, select_working_solution};
use crate::types::{ParallelJoints, PlatformPose, ToolPose};

/// Attempts allowed per requested sample before giving up.
pub const ATTEMPTS_PER_SAMPLE: usize = 1000;

/// Box of candidate platform positions: leg I ellipse centre in x, the rod
/// length around it, and below the slider stroke in z.
pub fn position_box(g: &MachineGeometry) -> [(f64, f64); 3] {
    let cx = -g.leg1_offset();
    let l = g.rod1;
    [
        (cx - l, cx + l),
        (-l, l),
        (g.rho_min, g.rho_max + g.rod1.max(g.rod2).max(g.rod3)),
    ]
}

/// A platform position with a unique working inverse solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReachablePose {
    pub pose: PlatformPose,
    pub joints: ParallelJoints,
}

/// Draws one position from the box and keeps it if the working branch
/// exists and is unique.
pub fn try_reachable_pose<R: Rng>(g: &MachineGeometry, rng: &mut R) -> Option<ReachablePose> {
    let b = position_box(g);
    let x = rng.gen_range(b[0].0..b[0].1);
    let y = rng.gen_range(b[1].0..b[1].1);
    let z = rng.gen_range(b[2].0..b[2].1);
    let sols = enumerate_ik(g, x, y, z);
    let w = select_working_solution(&sols, g).ok().flatten()?;
    Some(ReachablePose {
        pose: PlatformPose::new(x, y, z, w.alpha),
        joints: w.joints,
    })
}

/// `count` reachable poses from a seeded stream. Returns fewer if the
/// workspace is too thin to hit within the attempt budget.
pub fn reachable_poses(g: &MachineGeometry, count: usize, seed: u64) -> Vec<ReachablePose> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count && attempts < count * ATTEMPTS_PER_SAMPLE {
        attempts += 1;
        if let Some(p) = try_reachable_pose(g, &mut rng) {
            out.push(p);
        }
    }
    out
}

/// A reachable tool pose together with the table angles that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReachableTool {
    pub tool: ToolPose,
    pub platform: ReachablePose,
    pub theta1: f64,
    pub theta2: f64,
}

/// Reachable platform poses seen through random table angles.
pub fn reachable_tools(g: &MachineGeometry, count: usize, seed: u64) -> Vec<ReachableTool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count && attempts < count * ATTEMPTS_PER_SAMPLE {
        attempts += 1;
        let Some(p) = try_reachable_pose(g, &mut rng) else {
            continue;
        };
        let theta1 = rng.gen_range(g.tilt_min..=g.tilt_max);
        let theta2 = rng.gen_range(g.rotary_min..=g.rotary_max);
        out.push(ReachableTool {
            tool: tool_from_platform(g, &p.pose, theta1, theta2),
            platform: p,
            theta1,
            theta2,
        });
    }
    out
}

/// Outcome of one round trip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Trip {
    Recovered {
        lin: f64,
        ang: f64,
    },
    /// The forward side found no reachable mode or more than one.
    NotSelected,
    Failed,
}

/// Position and orientation error of FK(select(IK(P))) against P.
pub fn parallel_round_trip(g: &MachineGeometry, p: &ReachablePose) -> Trip {
    match enumerate_fk(g, &p.joints) {
        Ok(modes) => match select_assembly_mode(&modes) {
            Ok(Some(m)) => {
                let (lin, ang) = m.pose.distance(&p.pose);
                Trip::Recovered { lin, ang }
            }
            _ => Trip::NotSelected,
        },
        Err(_) => Trip::Failed,
    }
}

/// Machine-level round trip: select(tool_ik) then select(tool_fk).
pub fn tool_round_trip(g: &MachineGeometry, t: &ReachableTool) -> Trip {
    let Ok(sols) = tool_ik(g, &t.tool) else {
        return Trip::Failed;
    };
    let Ok(Some(s)) = select_machine_solution(&sols, g) else {
        return Trip::NotSelected;
    };
    let Ok(modes) = tool_fk(g, &s.joints) else {
        return Trip::Failed;
    };
    match select_tool_mode(&modes) {
        Ok(Some(m)) => {
            let (lin, ang) = m.tool.distance(&t.tool);
            Trip::Recovered { lin, ang }
        }
        _ => Trip::NotSelected,
    }
}

/// Summary of a round-trip run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RoundtripReport {
    pub requested: usize,
    pub samples: usize,
    pub failures: usize,
    pub max_lin_err: f64,
    pub mean_lin_err: f64,
    pub max_ang_err: f64,
    /// Number of inverse branches -> number of samples.
    pub ik_counts: BTreeMap<usize, usize>,
    /// Number of assembly modes -> number of samples.
    pub fk_counts: BTreeMap<usize, usize>,
    pub timing: Option<Timing>,
}

/// Mean wall time per forward solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Timing {
    pub symbolic_us: f64,
    pub newton_us: f64,
}

/// Samples `count` reachable poses and runs IK -> FK on each. Timing is
/// measured only on request since it makes the report non-reproducible.
pub fn roundtrip_report(
    g: &MachineGeometry,
    count: usize,
    seed: u64,
    timing: bool,
) -> RoundtripReport {
    let poses = reachable_poses(g, count, seed);
    let mut r = RoundtripReport {
        requested: count,
        samples: poses.len(),
        ..Default::default()
    };
    let mut sum = 0.0;
    for p in &poses {
        let n_ik = enumerate_ik(g, p.pose.x, p.pose.y, p.pose.z).len();
        *r.ik_counts.entry(n_ik).or_default() += 1;
        let n_fk = enumerate_fk(g, &p.joints).map(|m| m.len()).unwrap_or(0);
        *r.fk_counts.entry(n_fk).or_default() += 1;
        match parallel_round_trip(g, p) {
            Trip::Recovered { lin, ang } if lin <= 1e-6 && ang <= 1e-8 => {
                sum += lin;
                r.max_lin_err = r.max_lin_err.max(lin);
                r.max_ang_err = r.max_ang_err.max(ang);
            }
            Trip::Recovered { lin, ang } => {
                r.failures += 1;
                r.max_lin_err = r.max_lin_err.max(lin);
                r.max_ang_err = r.max_ang_err.max(ang);
            }
            _ => r.failures += 1,
        }
    }
    if !poses.is_empty() {
        r.mean_lin_err = sum / poses.len() as f64;
    }
    if timing && !poses.is_empty() {
        let t0 = Instant::now();
        for p in &poses {
            let _ = enumerate_fk(g, &p.joints);
        }
        let symbolic = t0.elapsed().as_secs_f64();
        let config = NewtonConfig::default();
        let t1 = Instant::now();
        for p in &poses {
            let _ = newton_fk(g, &p.joints, &config);
        }
        let newton = t1.elapsed().as_secs_f64();
        let n = poses.len() as f64;
        r.timing = Some(Timing {
            symbolic_us: symbolic / n * 1e6,
            newton_us: newton / n * 1e6,
        });
    }
    r
}

impl RoundtripReport {
    /// Plain-text rendering; identical for identical inputs unless timing
    /// was requested.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "samples: {} of {}", self.samples, self.requested);
        let _ = writeln!(s, "failures: {}", self.failures);
        let _ = writeln!(s, "max_position_error_mm: {:e}", self.max_lin_err);
        let _ = writeln!(s, "mean_position_error_mm: {:e}", self.mean_lin_err);
        let _ = writeln!(s, "max_orientation_error_rad: {:e}", self.max_ang_err);
        let _ = writeln!(s, "ik_branch_counts:");
        for (k, v) in &self.ik_counts {
            let _ = writeln!(s, "  {k}: {v}");
        }
        let _ = writeln!(s, "fk_mode_counts:");
        for (k, v) in &self.fk_counts {
            let _ = writeln!(s, "  {k}: {v}");
        }
        if let Some(t) = self.timing {
            let _ = writeln!(s, "symbolic_fk_us: {:.1}", t.symbolic_us);
            let _ = writeln!(s, "newton_fk_us: {:.1}", t.newton_us);
        }
        s
    }
}
