use proptest::prelude::*;

use pkm_kinematics::machine::{tilt_candidates, tool_fk, tool_from_platform, tool_ik};
use pkm_kinematics::oracle::{newton_fk, residuals_parallel, NewtonConfig};
use pkm_kinematics::parallel_fk::enumerate_fk;
use pkm_kinematics::parallel_ik::{enumerate_ik, orientation_candidates, select_working_solution};
use pkm_kinematics::{
    normalize_angle, MachineGeometry, MachineJoints, ParallelJoints, PlatformPose,
};

const G: MachineGeometry = MachineGeometry::DEFAULT_SYNTHETIC;

fn tol() -> f64 {
    1e-7 * G.residual_scale()
}

fn oracle_agrees(joints: ParallelJoints) -> Result<(), TestCaseError> {
    let modes = enumerate_fk(&G, &joints).unwrap();
    let config = NewtonConfig {
        starts: 40,
        ..NewtonConfig::default()
    };
    for p in newton_fk(&G, &joints, &config) {
        let found = modes.iter().any(|m| {
            let (lin, ang) = m.pose.distance(&p);
            lin <= 1e-5 && ang <= 1e-5
        });
        prop_assert!(found, "{:?} missing from {:?}", p, modes);
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ik_branches_satisfy_constraints(
        x in -1600.0f64..0.0, y in -800.0f64..800.0, z in 0.0f64..1400.0,
    ) {
        let sols = enumerate_ik(&G, x, y, z);
        prop_assert!(sols.len() <= 16);
        prop_assert!(orientation_candidates(&G, x, y).len() <= 4);
        for s in sols {
            let pose = PlatformPose::new(x, y, z, s.alpha);
            prop_assert!(residuals_parallel(&G, &pose, &s.joints).max_abs() <= tol());
        }
    }

    #[test]
    fn fk_modes_satisfy_constraints(
        r1 in 0.0f64..600.0, r2 in 0.0f64..600.0, r3 in 0.0f64..600.0,
    ) {
        let j = ParallelJoints::new(r1, r2, r3);
        let modes = enumerate_fk(&G, &j).unwrap();
        prop_assert!(modes.len() <= 8);
        for m in &modes {
            prop_assert!(m.residual_norm <= tol());
            prop_assert!(m.pose.alpha > -std::f64::consts::PI && m.pose.alpha <= std::f64::consts::PI);
        }
    }

    #[test]
    fn fk_is_complete_for_equal_outer_sliders(r1 in 0.0f64..600.0, r2 in 0.0f64..600.0) {
        oracle_agrees(ParallelJoints::new(r1, r2, r2))?;
    }

    #[test]
    fn fk_is_complete_for_midpoint_leg_one(r2 in 0.0f64..600.0, r3 in 0.0f64..600.0) {
        oracle_agrees(ParallelJoints::new(0.5 * (r2 + r3), r2, r3))?;
    }

    #[test]
    fn working_pose_round_trips(
        x in -700.0f64..-300.0, y in -120.0f64..120.0, z in 800.0f64..1000.0,
    ) {
        let sols = enumerate_ik(&G, x, y, z);
        let Ok(Some(w)) = select_working_solution(&sols, &G) else {
            return Ok(());
        };
        let modes = enumerate_fk(&G, &w.joints).unwrap();
        let want = PlatformPose::new(x, y, z, w.alpha);
        let found = modes.iter().any(|m| {
            let (lin, ang) = m.pose.distance(&want);
            lin <= 1e-6 && ang <= 1e-8
        });
        prop_assert!(found);
    }

    #[test]
    fn machine_identities(
        x in -700.0f64..-300.0, y in -120.0f64..120.0, z in 800.0f64..1000.0,
        theta1 in -1.0f64..1.0, theta2 in -3.0f64..3.0,
    ) {
        let sols = enumerate_ik(&G, x, y, z);
        let Ok(Some(w)) = select_working_solution(&sols, &G) else {
            return Ok(());
        };
        let tool = tool_from_platform(&G, &PlatformPose::new(x, y, z, w.alpha), theta1, theta2);
        let tilts = tilt_candidates(&G, &tool).unwrap();
        let machine = tool_ik(&G, &tool).unwrap();
        prop_assert!(machine.len() <= 4 * tilts.len());
        let recovered = machine.iter().any(|s| s.joints.joints.max_diff(&w.joints) <= 1e-7);
        prop_assert!(recovered);
        for s in &machine {
            prop_assert_eq!(s.joints.theta2 + tool.phi2, 0.0);
            prop_assert!(normalize_angle(s.alpha - (s.joints.theta1 + tool.phi1)).abs() <= 1e-9);
        }
        let mj = MachineJoints::new(w.joints, theta1, theta2);
        prop_assert_eq!(tool_fk(&G, &mj).unwrap().len(), enumerate_fk(&G, &w.joints).unwrap().len());
    }
}

#[test]
fn geometry_document_round_trip() {
    let text = G.to_document();
    let back = MachineGeometry::from_document(&text).unwrap();
    assert_eq!(back, G);
}
