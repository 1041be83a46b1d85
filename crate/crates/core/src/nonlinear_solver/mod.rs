//! Picard iteration for x∂ₜu + p(D)u = 𝓝(u) and the checks on its output:
//! a-priori ratio, decay of the expansion coefficients, coefficient bounds.

mod analysis;
mod picard;

pub use analysis::{
    apriori_check, coefficient_diagnostics, decay_report, epsilon_sweep, AprioriReport,
    CoefficientBound, CoefficientDiagnostics, DecayEntry, DecayReport, SweepEntry, SweepReport,
    NOISE_FLOOR,
};
pub use picard::{
    fixed_point_residual, max_difference, nonlinear_forcing, picard_map, picard_solve, LinearConfig,
    PicardConfig, PicardResult, standard_bump,
};
