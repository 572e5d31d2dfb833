//! Spatial-sign primitives and the weighted Hettmansperger–Randles-type
//! fixed-point estimator of location and diagonal scale.
//!
//! The estimator solves, for a weight function w(x) = x^m with m ≤ 1,
//!
//! ```text
//!   (1/n) Σ_i w(‖ε_i‖) U(ε_i)                 = 0
//!   (p/n) diag{ Σ_i U(ε_i) U(ε_i)ᵀ }          = I_p ,   ε_i = D^{-1/2}(X_i − θ)
//! ```
//!
//! by cycling a Weiszfeld-type location step with a diagonal rescale until
//! both estimating-equation residuals fall below tolerance.

use ndarray::{Array1, ArrayView1};

use crate::error::{degenerate, invalid, Result};
use crate::sample::Sample;

/// Weight exponent m of w(x) = x^m, restricted to m ≤ 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightExponent(f64);

impl WeightExponent {
    /// Inverse-norm weighting, m = −1.
    pub const INVERSE_NORM: WeightExponent = WeightExponent(-1.0);
    /// Pure spatial sign, m = 0.
    pub const SIGN: WeightExponent = WeightExponent(0.0);
    /// Identity weighting, m = 1.
    pub const IDENTITY: WeightExponent = WeightExponent(1.0);

    pub fn new(m: f64) -> Result<Self> {
        if !m.is_finite() || m > 1.0 {
            return Err(invalid(format!("weight exponent must satisfy m <= 1, got {m}")));
        }
        Ok(WeightExponent(m))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Options for the fixed-point solver.
#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Sup-norm tolerance applied to both estimating-equation residuals.
    pub tol: f64,
    /// Iteration cap; exhausting it yields `converged = false`, not an error.
    pub max_iter: usize,
    /// Optional warm start (θ, diag of D as the d_j² entries). When absent
    /// the solver starts from the sample mean and sample variances.
    pub init: Option<(Array1<f64>, Array1<f64>)>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-8,
            max_iter: 200,
            init: None,
        }
    }
}

/// Fitted location/scale pair with convergence telemetry.
#[derive(Debug, Clone)]
pub struct HrEstimate {
    /// Location estimate θ̂.
    pub theta_hat: Array1<f64>,
    /// Diagonal of D̂ stored as the d_j² scale entries (strictly positive).
    pub d_hat: Array1<f64>,
    /// Number of update steps performed.
    pub iterations: usize,
    /// Sup-norm of the weighted sign equation at (θ̂, D̂).
    pub residual_location: f64,
    /// Sup-norm of p·diag{mean sign outer product} − I at (θ̂, D̂).
    pub residual_scale: f64,
    pub converged: bool,
}

/// The spatial sign U(x) = x/‖x‖, with U(0) = 0.
pub fn spatial_sign(x: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
    if !x.iter().all(|v| v.is_finite()) {
        return Err(invalid("spatial sign of a non-finite vector"));
    }
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Ok(Array1::zeros(x.len()));
    }
    Ok(x.map(|v| v / norm))
}

/// One pass over the panel at a given iterate: standardized radii, signs
/// and the quantities entering both the residuals and the updates.
///
/// Rows with zero radius are skipped (they contribute nothing for m ≥ 0);
/// the caller handles the m < 0 tie policy.
struct PassStats {
    /// Σ w(r_i) U(ε_i), per coordinate.
    weighted_sign_sum: Vec<f64>,
    /// Σ w(r_i) / r_i over nonzero-radius rows.
    inverse_radius_sum: f64,
    /// Σ U(ε_i)_j² per coordinate.
    sign_sq_sum: Vec<f64>,
    /// Count of rows with exactly zero radius.
    zero_radius_rows: usize,
}

fn pass(values: &[f64], n: usize, p: usize, theta: &[f64], root_d: &[f64], m: f64) -> PassStats {
    let mut weighted_sign_sum = vec![0.0; p];
    let mut sign_sq_sum = vec![0.0; p];
    let mut inverse_radius_sum = 0.0;
    let mut zero_radius_rows = 0;
    let mut eps = vec![0.0; p];
    let inv_root_d: Vec<f64> = root_d.iter().map(|v| 1.0 / v).collect();
    for i in 0..n {
        let row = &values[i * p..(i + 1) * p];
        let mut sq = 0.0;
        for j in 0..p {
            let e = (row[j] - theta[j]) * inv_root_d[j];
            eps[j] = e;
            sq += e * e;
        }
        let r = sq.sqrt();
        if r == 0.0 {
            zero_radius_rows += 1;
            continue;
        }
        let w = r.powf(m);
        let inv_r = 1.0 / r;
        let wr = w * inv_r;
        inverse_radius_sum += wr;
        for j in 0..p {
            let e = eps[j];
            let u = e * inv_r;
            weighted_sign_sum[j] += wr * e;
            sign_sq_sum[j] += u * u;
        }
    }
    PassStats {
        weighted_sign_sum,
        inverse_radius_sum,
        sign_sq_sum,
        zero_radius_rows,
    }
}

fn residuals_from_pass(stats: &PassStats, n: usize, p: usize) -> (f64, f64) {
    let nf = n as f64;
    let rloc = stats
        .weighted_sign_sum
        .iter()
        .map(|v| (v / nf).abs())
        .fold(0.0, f64::max);
    let rsc = stats
        .sign_sq_sum
        .iter()
        .map(|v| (p as f64 * v / nf - 1.0).abs())
        .fold(0.0, f64::max);
    (rloc, rsc)
}

const SCALE_FLOOR: f64 = 1e-300;

/// Solve the weighted estimating equations on a panel.
///
/// Iterates the three-step update (standardize, Weiszfeld location step,
/// diagonal rescale) until both residual sup-norms fall below `opts.tol`
/// or `opts.max_iter` update steps have been taken. Non-convergence is a
/// reportable outcome, not an error: the best iterate seen is returned
/// with `converged = false`.
pub fn weighted_hr_estimate(
    x: &Sample,
    m: WeightExponent,
    opts: &SolverOptions,
) -> Result<HrEstimate> {
    if opts.tol <= 0.0 {
        return Err(invalid("solver tolerance must be positive"));
    }
    if opts.max_iter < 1 {
        return Err(invalid("solver needs max_iter >= 1"));
    }
    let (n, p) = x.values().dim();
    let m = m.value();
    let values = x
        .values()
        .as_slice()
        .expect("samples are stored in standard layout");

    let (mut theta, mut d): (Vec<f64>, Vec<f64>) = match &opts.init {
        Some((t0, d0)) => {
            if t0.len() != p || d0.len() != p {
                return Err(invalid("warm start dimension mismatch"));
            }
            if d0.iter().any(|v| !(*v > 0.0)) {
                return Err(invalid("warm start scale entries must be positive"));
            }
            (t0.to_vec(), d0.to_vec())
        }
        None => {
            let mut t0 = vec![0.0; p];
            let mut d0 = vec![0.0; p];
            for j in 0..p {
                let mut sum = 0.0;
                for i in 0..n {
                    sum += values[i * p + j];
                }
                let mean = sum / n as f64;
                let mut var = 0.0;
                for i in 0..n {
                    let e = values[i * p + j] - mean;
                    var += e * e;
                }
                let var = var / (n as f64 - 1.0);
                if !(var > 0.0) {
                    return Err(invalid(format!(
                        "column {j} has non-positive sample variance; cannot initialize"
                    )));
                }
                t0[j] = mean;
                d0[j] = var;
            }
            (t0, d0)
        }
    };

    let mut root_d = vec![0.0; p];
    let mut jittered = false;
    let mut clamped = false;
    let mut best: Option<(Vec<f64>, Vec<f64>, f64, f64)> = None;
    let mut iterations = 0;

    loop {
        for j in 0..p {
            root_d[j] = d[j].sqrt();
        }
        let stats = pass(values, n, p, &theta, &root_d, m);
        if stats.zero_radius_rows > 0 && m < 0.0 {
            // w(0) is undefined for negative exponents: perturb once by a
            // deterministic jitter of 1e-12 of the column scale, then give up.
            if jittered {
                return Err(degenerate(
                    "zero residual vector recurred after jitter (m < 0)",
                ));
            }
            for j in 0..p {
                theta[j] += 1e-12 * root_d[j];
            }
            jittered = true;
            continue;
        }
        let (rloc, rsc) = residuals_from_pass(&stats, n, p);
        let score = rloc.max(rsc);
        if best.as_ref().map_or(true, |b| score < b.2.max(b.3)) {
            best = Some((theta.clone(), d.clone(), rloc, rsc));
        }
        if rloc <= opts.tol && rsc <= opts.tol {
            return Ok(HrEstimate {
                theta_hat: Array1::from_vec(theta),
                d_hat: Array1::from_vec(d),
                iterations,
                residual_location: rloc,
                residual_scale: rsc,
                converged: !clamped,
            });
        }
        if iterations >= opts.max_iter {
            let (bt, bd, brl, brs) = best.expect("at least one iterate evaluated");
            return Ok(HrEstimate {
                theta_hat: Array1::from_vec(bt),
                d_hat: Array1::from_vec(bd),
                iterations,
                residual_location: brl,
                residual_scale: brs,
                converged: false,
            });
        }

        // Location step: θ += D^{1/2} · Σ w U(ε) / Σ w ‖ε‖^{-1}.
        if stats.inverse_radius_sum > 0.0 && stats.inverse_radius_sum.is_finite() {
            for j in 0..p {
                theta[j] += root_d[j] * stats.weighted_sign_sum[j] / stats.inverse_radius_sum;
            }
        }
        // Scale step: d_j ← p · mean_i U(ε_i)_j² · d_j.
        for j in 0..p {
            let next = (p as f64) * stats.sign_sq_sum[j] / (n as f64) * d[j];
            if next < SCALE_FLOOR {
                d[j] = SCALE_FLOOR;
                clamped = true;
            } else {
                d[j] = next;
            }
        }
        iterations += 1;
    }
}

/// Leave-two-out estimate: the fit on the panel with rows `i` and `j`
/// removed. The d_hat of the returned estimate is the pair scale used by
/// the sum-type statistics.
pub fn leave_out_scale(
    x: &Sample,
    excluded: (usize, usize),
    m: WeightExponent,
    opts: &SolverOptions,
) -> Result<HrEstimate> {
    let (i, j) = excluded;
    if i == j {
        return Err(invalid("leave-two-out indices must differ"));
    }
    let n = x.n();
    if i >= n || j >= n {
        return Err(invalid(format!(
            "leave-two-out index out of range: ({i},{j}) with n={n}"
        )));
    }
    if n < 6 {
        return Err(invalid(format!(
            "leave-two-out needs n - 2 >= 4 observations, got n={n}"
        )));
    }
    let reduced = x.without_rows(&[i, j])?;
    weighted_hr_estimate(&reduced, m, opts)
}

/// Evaluate both estimating-equation residual sup-norms at an arbitrary
/// (θ, D) point. Pure evaluation; this is the ground truth the solver is
/// tested against.
pub fn hr_residuals(
    x: &Sample,
    theta: &Array1<f64>,
    d: &Array1<f64>,
    m: WeightExponent,
) -> Result<(f64, f64)> {
    let (n, p) = x.values().dim();
    if theta.len() != p || d.len() != p {
        return Err(invalid("theta/d dimension mismatch"));
    }
    if d.iter().any(|v| !(*v > 0.0)) {
        return Err(invalid("scale entries must be strictly positive"));
    }
    let values = x
        .values()
        .as_slice()
        .expect("samples are stored in standard layout");
    let root_d: Vec<f64> = d.iter().map(|v| v.sqrt()).collect();
    let theta: Vec<f64> = theta.to_vec();
    let stats = pass(values, n, p, &theta, &root_d, m.value());
    if stats.zero_radius_rows > 0 {
        return Err(degenerate(
            "estimating equations evaluated at a zero residual vector",
        ));
    }
    Ok(residuals_from_pass(&stats, n, p))
}

/// Plug-in radial moments ζ̂_k = n⁻¹ Σ_i ‖D̂^{-1/2}(X_i − θ̂)‖^k.
#[derive(Debug, Clone)]
pub struct MomentEstimates {
    entries: Vec<(f64, f64)>,
}

impl MomentEstimates {
    pub fn get(&self, k: f64) -> Option<f64> {
        self.entries
            .iter()
            .find(|(kk, _)| *kk == k)
            .map(|(_, v)| *v)
    }

    pub fn require(&self, k: f64) -> Result<f64> {
        self.get(k)
            .ok_or_else(|| invalid(format!("moment exponent {k} was not estimated")))
    }

    pub fn entries(&self) -> &[(f64, f64)] {
        &self.entries
    }
}

/// Estimate radial moments of the standardized residuals of a fit.
pub fn moment_estimates(
    x: &Sample,
    est: &HrEstimate,
    exponents: &[f64],
) -> Result<MomentEstimates> {
    let (n, p) = x.values().dim();
    if est.theta_hat.len() != p {
        return Err(invalid("estimate does not match the panel dimension"));
    }
    if exponents.iter().any(|k| !k.is_finite()) {
        return Err(invalid("moment exponents must be finite"));
    }
    let root_d: Vec<f64> = est.d_hat.iter().map(|v| v.sqrt()).collect();
    let mut radii = Vec::with_capacity(n);
    for i in 0..n {
        let row = x.values().row(i);
        let mut sq = 0.0;
        for j in 0..p {
            let e = (row[j] - est.theta_hat[j]) / root_d[j];
            sq += e * e;
        }
        radii.push(sq.sqrt());
    }
    let mut entries = Vec::with_capacity(exponents.len());
    for &k in exponents {
        if k < 0.0 && radii.iter().any(|r| *r == 0.0) {
            return Err(degenerate(format!(
                "zero residual radius with negative moment exponent {k}"
            )));
        }
        let mean = radii.iter().map(|r| r.powf(k)).sum::<f64>() / n as f64;
        entries.push((k, mean));
    }
    Ok(MomentEstimates { entries })
}
