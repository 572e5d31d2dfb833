//! Weighted spatial-sign tests for the high-dimensional one-sample
//! location problem.
//!
//! The crate provides:
//!
//! - a weighted Hettmansperger–Randles-type fixed-point estimator of
//!   location and diagonal scale ([`sign`]);
//! - the Gumbel-calibrated weighted max-type test and its mean-based
//!   baseline ([`max_test`]);
//! - the normally calibrated weighted sum-type U-statistic with
//!   leave-two-out scales and a scalar-invariant mean-based baseline
//!   ([`sum_test`]);
//! - the Cauchy combination of the two p-values with an empirical
//!   independence diagnostic ([`combine`]);
//! - samplers for heavy-tailed elliptical panels and radial-moment
//!   calculators ([`dist`]);
//! - asymptotic-relative-efficiency tables ([`are`]);
//! - a reproducible Monte Carlo harness plus a Ljung–Box prefiltering
//!   pipeline for return panels ([`harness`], [`prefilter`]).
//!
//! Start from the `examples/` directory: each file is a runnable tour of
//! one capability (`cargo run --example nine_tests`, and so on). The thin
//! `hdloc` binary exposes the same entry points for batch use.

pub mod are;
pub mod combine;
pub mod dist;
pub mod error;
pub mod harness;
pub mod prefilter;
pub mod sample;
pub mod sign;
mod util;

pub use are::{are_report, are_table, are_weighted_pair, AreMode, AreReport, AreValues};
pub use combine::{
    cauchy_combine, cc_test, joint_independence_diagnostic, mean_cc_test, CombinedResult,
    IndependenceReport,
};
pub use dist::{
    make_covariance, radial_moment, replication_seed, sample_panel, Covariance, CovarianceSpec,
    MomentMode, PanelModel, RadialLaw, Setting, SignalSpec,
};
pub use error::{Error, Result};
pub use harness::{
    run_bahadur_diagnostic, run_gumbel_qq, run_methods, run_power_experiment,
    run_size_experiment, run_subsample_experiment, BahadurReport, QqReport, SimConfig, SimReport,
    SimRow, Sweep,
};
pub use max_test::{
    gumbel_cdf, gumbel_quantile, max_test, mean_max_test, t_max_statistic, theoretical_power_max,
    MaxPowerMethod, Method, TestResult, ZetaSource,
};
pub use prefilter::{ljung_box, prefilter_panel, PrefilterReport, SeriesPanel};
pub use sample::Sample;
pub use sign::{
    hr_residuals, leave_out_scale, moment_estimates, spatial_sign, weighted_hr_estimate,
    HrEstimate, MomentEstimates, SolverOptions, WeightExponent,
};
pub use sum_test::{
    mean_sum_test, sigma_hat_sq, sum_test, t_sum_statistic, theoretical_power_sum, ScaleMode,
    SumVarianceEstimate,
};
