//! Closed-form kinematics of a serial-parallel 5-axis machine tool: a
//! 3-DOF parallel module whose platform carries the spindle, plus a 2-DOF
//! tilting table under the workpiece.
//!
//! * [`parallel_ik`] / [`parallel_fk`]: all inverse branches and all
//!   assembly modes of the parallel module, with working-mode selection.
//! * [`machine`]: the same for the full machine in tool coordinates.
//! * [`oracle`]: raw constraint residuals and a multi-start Newton solver
//!   used to cross-check the closed forms.

// `!(a < b)` is used on purpose so that NaN fails every check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod machine;
pub mod oracle;
pub mod parallel_fk;
pub mod parallel_ik;
pub mod rootfind;
pub mod sampling;
pub mod types;

pub use error::{Ambiguous, KinematicsError, Result, Selection};
pub use geometry::MachineGeometry;
pub use types::{
    normalize_angle, ConfigurationIndices, MachineJoints, ParallelJoints, PlatformPose, Sign,
    ToolPose,
};
