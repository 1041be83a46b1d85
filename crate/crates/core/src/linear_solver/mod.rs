//! Implicit time stepping for x∂ₜu + P(D)u = f on the log grid, with
//! coercivity, Hardy, cascade and maximal-regularity diagnostics.

mod operator;
mod cascade;
mod diagnostics;
mod mms;
mod stepper;

pub use operator::{assemble, derivative_matrix, roots_matrix, BandedOperator, Bandwidth};
pub use stepper::{
    sample_source, solve_linear, BoundaryConfig, FarField, FnSource, LinearProblem, SnapshotSource,
    Source, Stepper, ZeroSource,
};
pub use mms::{default_mms_study, mms_convergence, mms_error, Manufactured, MmsLevel, MmsReport};
pub use cascade::{cascade_run, cascade_verify, CascadeOptions, CascadeResidual};
pub use diagnostics::{
    anisotropic_check, coercivity_check, coercivity_ratio, hardy_bench, hardy_constant, hardy_ratio,
    maxreg_diagnostic, symbol_infimum, BenchOptions, CoercivityReport, HardyReport, MaxRegReport,
};
