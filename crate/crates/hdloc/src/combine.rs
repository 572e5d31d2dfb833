//! Cauchy combination of the max-type and sum-type p-values, and the
//! empirical independence diagnostic backing it.

use rayon::prelude::*;

use crate::dist::{replication_seed, sample_panel, PanelModel, SignalSpec};
use crate::error::{invalid, Result};
use crate::max_test::{max_test_with_estimate, mean_max_test, Method, TestResult};
use crate::sample::Sample;
use crate::sign::{weighted_hr_estimate, SolverOptions, WeightExponent};
use crate::sum_test::{mean_sum_test, sum_tests_multi, ScaleMode};
use crate::util::{ks_distance_uniform, pearson_correlation};

const P_CLIP: f64 = 1e-15;

/// Combine p-values through the Cauchy transform
/// p_CC = 1 − G[Σ w_i tan{(0.5 − p_i)π}], G the standard Cauchy CDF.
///
/// Inputs are clipped to [1e−15, 1−1e−15] before the tangent; equal inputs
/// under equal weights are a fixed point of the transform and are returned
/// unchanged.
pub fn cauchy_combine(p_values: &[f64], weights: Option<&[f64]>) -> Result<f64> {
    if p_values.is_empty() {
        return Err(invalid("cannot combine an empty p-value list"));
    }
    if p_values.iter().any(|p| !p.is_finite() || *p < 0.0 || *p > 1.0) {
        return Err(invalid("p-values must lie in [0, 1]"));
    }
    let k = p_values.len();
    let equal = vec![1.0 / k as f64; k];
    let w = match weights {
        Some(w) => {
            if w.len() != k {
                return Err(invalid("weights must match the p-value list"));
            }
            if w.iter().any(|v| !(*v >= 0.0)) {
                return Err(invalid("weights must be nonnegative"));
            }
            let sum: f64 = w.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(invalid(format!("weights must sum to 1, got {sum}")));
            }
            w
        }
        None => &equal,
    };
    let clipped: Vec<f64> = p_values
        .iter()
        .map(|p| p.clamp(P_CLIP, 1.0 - P_CLIP))
        .collect();
    let uniform_weights = weights.is_none()
        || w.iter().all(|v| (v - 1.0 / k as f64).abs() <= f64::EPSILON);
    if uniform_weights && clipped.iter().all(|p| *p == clipped[0]) {
        // the equal-weight transform fixes equal inputs exactly
        return Ok(clipped[0]);
    }
    let t: f64 = clipped
        .iter()
        .zip(w.iter())
        .map(|(p, wi)| wi * ((0.5 - p) * std::f64::consts::PI).tan())
        .sum();
    // 1 − G(t) with G(t) = 1/2 + atan(t)/π
    Ok((0.5 - t.atan() / std::f64::consts::PI).clamp(0.0, 1.0))
}

/// Result of a combined max/sum test.
#[derive(Debug, Clone)]
pub struct CombinedResult {
    pub p_max: f64,
    pub p_sum: f64,
    pub p_cc: f64,
    pub component_results: [TestResult; 2],
}

impl CombinedResult {
    pub fn alpha(&self) -> f64 {
        self.component_results[0].alpha
    }

    pub fn reject(&self) -> bool {
        self.p_cc < self.alpha()
    }

    /// The combination as a uniform result envelope; the statistic is the
    /// equal-weight tangent average fed to the Cauchy distribution.
    pub fn to_test_result(&self) -> TestResult {
        let method = match (self.component_results[0].method, self.component_results[1].method) {
            (Method::InMax, Method::InSum) => Method::InCc,
            (Method::SsMax, Method::SsSum) => Method::SsCc,
            (Method::MeanMax, Method::MeanSum) => Method::MeanCc,
            _ => Method::WeightedCc,
        };
        let t = 0.5 * ((0.5 - self.p_max.clamp(P_CLIP, 1.0 - P_CLIP)) * std::f64::consts::PI).tan()
            + 0.5 * ((0.5 - self.p_sum.clamp(P_CLIP, 1.0 - P_CLIP)) * std::f64::consts::PI).tan();
        let mut warnings: Vec<String> = Vec::new();
        for c in &self.component_results {
            warnings.extend(c.warnings.iter().cloned());
        }
        for (label, p) in [("max", self.p_max), ("sum", self.p_sum)] {
            if p <= P_CLIP || p >= 1.0 - P_CLIP {
                warnings.push(format!("{label} p-value clipped before the Cauchy transform"));
            }
        }
        TestResult {
            method,
            statistic: t,
            p_value: self.p_cc,
            alpha: self.alpha(),
            reject: self.reject(),
            warnings,
        }
    }
}

/// Weighted Cauchy combination test: runs the max and sum tests with the
/// same exponent on the same panel (one location/scale fit is shared on
/// the max side) and combines the two p-values with equal weights.
pub fn cc_test(
    x: &Sample,
    m: WeightExponent,
    alpha: f64,
    scale_mode: ScaleMode,
) -> Result<CombinedResult> {
    let est = weighted_hr_estimate(x, m, &SolverOptions::default())?;
    let max = max_test_with_estimate(x, m, alpha, &est)?;
    let sum = sum_tests_multi(x, &[m], alpha, scale_mode)?.pop().expect("one exponent");
    combine_components(max, sum)
}

/// Mean-based Cauchy combination (the CC baseline).
pub fn mean_cc_test(x: &Sample, alpha: f64) -> Result<CombinedResult> {
    let max = mean_max_test(x, alpha)?;
    let sum = mean_sum_test(x, alpha)?;
    combine_components(max, sum)
}

pub(crate) fn combine_components(max: TestResult, sum: TestResult) -> Result<CombinedResult> {
    let p_max = max.p_value;
    let p_sum = sum.p_value;
    let p_cc = cauchy_combine(&[p_max, p_sum], None)?;
    Ok(CombinedResult {
        p_max,
        p_sum,
        p_cc,
        component_results: [max, sum],
    })
}

/// Empirical stand-in for the asymptotic-independence results: simulate
/// panels, record the max statistic and the studentized sum statistic, and
/// report their correlation together with the uniformity of p_CC.
#[derive(Debug, Clone)]
pub struct IndependenceReport {
    pub correlation: f64,
    pub ks_distance_pcc: f64,
    pub reps: usize,
    pub errors: usize,
}

pub fn joint_independence_diagnostic(
    model: &PanelModel,
    n: usize,
    m: WeightExponent,
    reps: usize,
    signal: &SignalSpec,
    seed: u64,
) -> Result<IndependenceReport> {
    if reps < 200 {
        return Err(invalid("the independence diagnostic needs at least 200 replications"));
    }
    let draws: Vec<Option<(f64, f64, f64)>> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let rep_seed = replication_seed(seed, rep as u64);
            let x = sample_panel(model, n, signal, rep_seed).ok()?;
            let est = weighted_hr_estimate(&x, m, &SolverOptions::default()).ok()?;
            let max = max_test_with_estimate(&x, m, 0.05, &est).ok()?;
            let sum = sum_tests_multi(&x, &[m], 0.05, ScaleMode::SharedScale)
                .ok()?
                .pop()?;
            let p_cc = cauchy_combine(&[max.p_value, sum.p_value], None).ok()?;
            Some((max.statistic, sum.statistic, p_cc))
        })
        .collect();
    let ok: Vec<&(f64, f64, f64)> = draws.iter().flatten().collect();
    let errors = reps - ok.len();
    if ok.len() < 100 {
        return Err(invalid(format!(
            "too many failed replications ({errors} of {reps}) for a meaningful diagnostic"
        )));
    }
    let max_stats: Vec<f64> = ok.iter().map(|t| t.0).collect();
    let sum_stats: Vec<f64> = ok.iter().map(|t| t.1).collect();
    let p_ccs: Vec<f64> = ok.iter().map(|t| t.2).collect();
    Ok(IndependenceReport {
        correlation: pearson_correlation(&max_stats, &sum_stats),
        ks_distance_pcc: ks_distance_uniform(&p_ccs),
        reps,
        errors,
    })
}
