//! Numerical laboratory for high-order curvature gradient flows of closed
//! curves in the plane, the round sphere and the hyperbolic plane, with
//! verification suites for submanifold identities and Sobolev-type
//! inequalities.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod curve;
pub mod energy;
pub mod error;
pub mod extended_float;
pub mod fd;
pub mod flow;
pub mod frenet;
pub mod inequality;
pub mod initial;
pub mod output;
pub mod space;
pub mod spline;
pub mod stats;
pub mod surface;
pub mod variation;

pub use config::{parse_config, parse_config_str, ExperimentConfig};
pub use curve::{CurvatureJet, CurveSnapshot, DiscreteCurve, InducedMetric};
pub use energy::{check_initial_condition, energy, threshold, threshold_sup, InitialConditionReport, ThresholdSup};
pub use error::{Error, Result};
pub use flow::{
    curvature_norms, gronwall_monitor, DiagnosticsRecord, FlowConfig, FlowSolver, FlowState, Integrator, RunResult,
    Termination,
};
pub use frenet::{grad_norm_sq, DiffPoly, FrenetVector, Monomial};
pub use inequality::{BandLimitedField, Interpolation, LadderReport, SuiteReport};
pub use initial::InitialCurve;
pub use output::emit_outputs;
pub use space::{BInterval, ChartMargin, ConformalCorrection, Point, SpaceForm, SpaceKind, SpaceSpec};
pub use surface::{DiscreteSurface, IdentityResiduals, Patch, SurfaceKind};
pub use variation::{discrete_gradient, euler_lagrange_m1, gradient_consistency, GradientField};
