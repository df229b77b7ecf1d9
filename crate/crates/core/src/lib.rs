//! Lipschitz-free spaces over small pointed metric spaces: exact
//! free-space norms by optimal transport, linearized Lipschitz maps and
//! orbit diagnostics.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod dynamics;
pub mod error;
pub mod flow;
pub mod free;
pub mod gallery;
pub mod io;
pub mod maps;
pub mod metric;
pub mod norm;
pub mod piecewise;
pub mod random;
pub mod selftest;

pub use dynamics::{
    classify_orbit, interval_analyze, orbit_norm_profile, power_equivalence_check, recurrence_gap, rigidity_check,
    ClassificationParams, ClassificationReport, IntervalAnalysis, IntervalCase, Ladder, Verdict,
};
pub use error::{Error, MetricViolation, Result};
pub use free::{pair, push_forward, FreeVector, Functional};
pub use maps::{
    iterate_point, iterate_vector, lip_constant, operator_norm_estimate, AlphaRule, LipConstant, LipMap, MapSpec,
};
pub use metric::{validate_finite_metric, AlphaSpace, FiniteSpace, IntervalSpace, LatticeBox, MetricSpace, Point};
pub use norm::{dual_gap, norm_alpha, norm_flow, norm_flow_exact, norm_line, Backend, NormResult};
pub use piecewise::PiecewiseLinear;
pub use selftest::{run_selftest, SelftestReport};
