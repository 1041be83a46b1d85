//! Grid functions on the logarithmic grid s = ln x, weighted norms and the
//! singular-expansion fit at the contact line.

mod expansion;
mod grid;
mod norms;
mod parabolic;
mod stencil;
mod testfns;
mod trajectory;

pub use expansion::{
    extract_expansion, extract_expansion_with, synthesize, Cutoff, ExpansionFit, FitOptions, FitTerm,
};
pub use grid::{GridFunction, LogGrid};
pub use norms::{
    cumulative_integral, integrate, norm_stride, sobolev, sobolev_range, sobolev_sq, sup_norm, weighted_l2,
    weighted_l2_sq,
};
pub(crate) use stencil::d1_into;
pub use stencil::{d1_rows, d_apply, d_power, fornberg, poly_of_d, roots_of_d, Stencil};
pub use testfns::{Bump, SmoothFunction};
pub use parabolic::{
    initial_norm, norm_spacing, rhs_norm, sobolev_coarse, solution_norm, NormReport, NormTerm,
    TermKind,
};
pub use trajectory::{time_diff_series, time_integral, time_integral_power, Trajectory};
