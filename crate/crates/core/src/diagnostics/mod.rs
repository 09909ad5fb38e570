//! Estimators that turn sample sets into rigidity, loop-equation, gap,
//! concentration and measure-distance statistics.
//!
//! Error bars are jackknife estimates over chains (or over contiguous
//! batches when a set holds a single chain).

pub mod boundary;
pub mod convexity;
pub mod distance;
pub mod gaps;
pub mod kernels;
pub mod rigidity;
pub mod stieltjes;

pub use boundary::{good_set_check, matching, matching_error, GoodSetParams, GoodSetReport, MatchingSpec, Verdict};
pub use convexity::{
    block_average, concentration_bound, concentration_check, hessian_quadratic_form, local_hessian_floor,
    ConcentrationRow, LocalHessianFloor,
};
pub use distance::{
    dirichlet_form_constrained, dirichlet_form_estimate, entropy_constrained, entropy_upper_bound, Estimate,
};
pub use gaps::{
    gap_mtuple_statistic, gap_statistic, universality_compare, GapEnsemble, GapScaling, GapStatistic,
    UniversalityComparison,
};
pub use kernels::{GapKernel, ProductKernel};
pub use rigidity::{rigidity_ladder, rigidity_report, RigidityReport};
pub use stieltjes::{
    empirical_stieltjes, empirical_stieltjes_replicates, loop_residual, loop_residual_rms, StieltjesEstimate,
};
