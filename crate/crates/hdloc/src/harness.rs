//! Monte Carlo experiment runner: size and power experiments, estimator
//! diagnostics and the subsample workflow, all reproducible by
//! construction (per-replication seeds are pure functions of the master
//! seed, so worker count never changes a result).

use std::time::Instant;

use ndarray::Array1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combine::combine_components;
use crate::dist::{
    make_covariance, replication_seed, sample_panel, stream_rng, streams, CovarianceSpec,
    PanelModel, RadialLaw, Setting, SignalSpec,
};
use crate::error::{invalid, Error, Result};
use crate::max_test::{
    gumbel_quantile, max_test_with_estimate, mean_max_test, t_max_statistic, Method, TestResult,
};
use crate::sample::Sample;
use crate::sign::{weighted_hr_estimate, SolverOptions, WeightExponent};
use crate::sum_test::{mean_sum_test, sum_tests_multi, ScaleMode};
use crate::util::{empirical_quantile, median};

/// Declarative description of one Monte Carlo experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    /// Canonical setting (i–iv); exclusive with `law`/`covariance`.
    #[serde(default)]
    pub setting: Option<Setting>,
    #[serde(default)]
    pub law: Option<RadialLaw>,
    #[serde(default)]
    pub covariance: Option<CovarianceSpec>,
    pub n: usize,
    pub p: usize,
    pub reps: usize,
    pub alpha: f64,
    pub methods: Vec<Method>,
    #[serde(default)]
    pub signal: Option<SignalSpec>,
    #[serde(default)]
    pub sweep: Option<Sweep>,
    pub seed: u64,
    #[serde(default)]
    pub scale_mode: Option<ScaleMode>,
    /// Worker count; absent means one worker per available core.
    #[serde(default)]
    pub parallelism: Option<usize>,
    /// Sample sizes for the estimator-expansion diagnostic.
    #[serde(default)]
    pub n_grid: Option<Vec<usize>>,
    /// Weight exponent used by the diagnostics (default −1).
    #[serde(default)]
    pub weight_m: Option<f64>,
}

/// Signal sweep: either a grid of energies at fixed support, or a grid of
/// supports at fixed energy.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    #[serde(default)]
    pub delta_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub s: Option<usize>,
    #[serde(default)]
    pub s_grid: Option<Vec<usize>>,
    #[serde(default)]
    pub delta: Option<f64>,
}

impl SimConfig {
    pub fn from_json(text: &str) -> Result<SimConfig> {
        let config: SimConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps < 1 {
            return Err(Error::Config("reps must be at least 1".to_string()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!(
                "alpha must be in (0,1), got {}",
                self.alpha
            )));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("methods list is empty".to_string()));
        }
        match (&self.setting, &self.law, &self.covariance) {
            (Some(_), None, None) => {}
            (None, Some(law), Some(cov)) => {
                law.validate().map_err(|e| Error::Config(e.to_string()))?;
                if cov.p() != self.p {
                    return Err(Error::Config(format!(
                        "covariance dimension {} does not match p = {}",
                        cov.p(),
                        self.p
                    )));
                }
            }
            (None, None, None) => {
                return Err(Error::Config(
                    "specify either a setting or a law with a covariance".to_string(),
                ))
            }
            _ => {
                return Err(Error::Config(
                    "setting and law/covariance are mutually exclusive".to_string(),
                ))
            }
        }
        if let Some(sig) = &self.signal {
            SignalSpec::new(sig.delta, sig.s).map_err(|e| Error::Config(e.to_string()))?;
        }
        if let Some(sweep) = &self.sweep {
            sweep.grid_points()?;
        }
        if let Some(m) = self.weight_m {
            WeightExponent::new(m).map_err(|e| Error::Config(e.to_string()))?;
        }
        Ok(())
    }

    pub fn model(&self) -> Result<PanelModel> {
        match (&self.setting, &self.law, &self.covariance) {
            (Some(setting), _, _) => Ok(PanelModel::setting(*setting, self.p)),
            (None, Some(law), Some(cov)) => PanelModel::new(law.clone(), make_covariance(cov)?),
            _ => Err(Error::Config("incomplete sampling model".to_string())),
        }
    }

    pub fn scale_mode(&self) -> ScaleMode {
        self.scale_mode.unwrap_or(ScaleMode::SharedScale)
    }

    pub fn weight_exponent(&self) -> WeightExponent {
        WeightExponent::new(self.weight_m.unwrap_or(-1.0)).expect("validated exponent")
    }

    /// Hash of the experiment identity. The worker count is an execution
    /// knob, not part of the experiment, so it is excluded: reports from
    /// different worker counts must be byte-identical.
    pub fn hash(&self) -> String {
        let mut identity = self.clone();
        identity.parallelism = None;
        let canonical = serde_json::to_string(&identity).expect("config serializes");
        format!("{:016x}", fnv1a64(canonical.as_bytes()))
    }
}

impl Sweep {
    /// The grid as (grid_value, signal) pairs.
    pub fn grid_points(&self) -> Result<Vec<(f64, SignalSpec)>> {
        match (&self.delta_grid, self.s, &self.s_grid, self.delta) {
            (Some(deltas), Some(s), None, None) => {
                if deltas.is_empty() {
                    return Err(Error::Config("delta grid is empty".to_string()));
                }
                deltas
                    .iter()
                    .map(|&d| Ok((d, SignalSpec::new(d, s).map_err(|e| Error::Config(e.to_string()))?)))
                    .collect()
            }
            (None, None, Some(supports), Some(delta)) => {
                if supports.is_empty() {
                    return Err(Error::Config("s grid is empty".to_string()));
                }
                supports
                    .iter()
                    .map(|&s| {
                        Ok((s as f64, SignalSpec::new(delta, s).map_err(|e| Error::Config(e.to_string()))?))
                    })
                    .collect()
            }
            _ => Err(Error::Config(
                "sweep needs either delta_grid with s, or s_grid with delta".to_string(),
            )),
        }
    }
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for b in bytes {
        hash ^= *b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// One aggregated line of a simulation report.
#[derive(Debug, Clone)]
pub struct SimRow {
    pub method: Method,
    pub grid_value: f64,
    pub reject_rate: f64,
    pub stderr: f64,
    pub reps: usize,
    pub errors: usize,
    /// Mean wall time per replication (not part of the CSV, which must be
    /// byte-identical across runs).
    pub mean_runtime_ms: f64,
}

#[derive(Debug, Clone)]
pub struct SimReport {
    pub rows: Vec<SimRow>,
    pub config_hash: String,
    pub seed: u64,
    pub scale_mode: ScaleMode,
    pub warnings: Vec<String>,
}

impl SimReport {
    /// Deterministic CSV rendering with a provenance comment line.
    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# config_hash={} seed={} scale_mode={}\n",
            self.config_hash, self.seed, self.scale_mode
        );
        out.push_str("method,grid_value,reject_rate,stderr,reps,errors\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{:.6},{:.6},{},{}\n",
                row.method,
                format_grid_value(row.grid_value),
                row.reject_rate,
                row.stderr,
                row.reps,
                row.errors
            ));
        }
        out
    }
}

fn format_grid_value(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

/// Outcome of one method on one replication.
type RepOutcome = (Option<bool>, f64);

/// Evaluate the requested methods on one panel, sharing fits where the
/// statistics allow it: the max and combination tests of one family share
/// a location/scale fit, and all sum-type tests share one pair sweep.
pub fn run_methods(
    x: &Sample,
    methods: &[Method],
    alpha: f64,
    mode: ScaleMode,
) -> Vec<(Result<TestResult>, f64)> {
    let wants = |m: Method| methods.contains(&m);
    let opts = SolverOptions::default();

    let mut elapsed_shared = 0.0f64;

    // family fits for the max side
    let t0 = Instant::now();
    let fit_in = if wants(Method::InMax) || wants(Method::InCc) {
        Some(weighted_hr_estimate(x, WeightExponent::INVERSE_NORM, &opts))
    } else {
        None
    };
    let fit_ss = if wants(Method::SsMax) || wants(Method::SsCc) {
        Some(weighted_hr_estimate(x, WeightExponent::SIGN, &opts))
    } else {
        None
    };
    // one pair sweep for every spatial sum statistic
    let mut sum_ms: Vec<WeightExponent> = Vec::new();
    if wants(Method::InSum) || wants(Method::InCc) {
        sum_ms.push(WeightExponent::INVERSE_NORM);
    }
    if wants(Method::SsSum) || wants(Method::SsCc) {
        sum_ms.push(WeightExponent::SIGN);
    }
    let sums = if sum_ms.is_empty() {
        None
    } else {
        Some(sum_tests_multi(x, &sum_ms, alpha, mode))
    };
    elapsed_shared += t0.elapsed().as_secs_f64() * 1e3;

    let sum_for = |m: WeightExponent| -> Result<TestResult> {
        let idx = sum_ms
            .iter()
            .position(|mm| mm.value() == m.value())
            .expect("requested exponent was swept");
        match &sums {
            Some(Ok(list)) => Ok(list[idx].clone()),
            Some(Err(e)) => Err(clone_error(e)),
            None => unreachable!("sum requested but not swept"),
        }
    };

    let shared_span = elapsed_shared / methods.len().max(1) as f64;
    methods
        .iter()
        .map(|&method| {
            let t0 = Instant::now();
            let result: Result<TestResult> = match method {
                Method::InMax => fit_in
                    .as_ref()
                    .expect("fit prepared")
                    .as_ref()
                    .map_err(clone_error)
                    .and_then(|est| {
                        max_test_with_estimate(x, WeightExponent::INVERSE_NORM, alpha, est)
                    }),
                Method::SsMax => fit_ss
                    .as_ref()
                    .expect("fit prepared")
                    .as_ref()
                    .map_err(clone_error)
                    .and_then(|est| max_test_with_estimate(x, WeightExponent::SIGN, alpha, est)),
                Method::MeanMax => mean_max_test(x, alpha),
                Method::InSum => sum_for(WeightExponent::INVERSE_NORM),
                Method::SsSum => sum_for(WeightExponent::SIGN),
                Method::MeanSum => mean_sum_test(x, alpha),
                Method::InCc => fit_in
                    .as_ref()
                    .expect("fit prepared")
                    .as_ref()
                    .map_err(clone_error)
                    .and_then(|est| {
                        let max =
                            max_test_with_estimate(x, WeightExponent::INVERSE_NORM, alpha, est)?;
                        let sum = sum_for(WeightExponent::INVERSE_NORM)?;
                        Ok(combine_components(max, sum)?.to_test_result())
                    }),
                Method::SsCc => fit_ss
                    .as_ref()
                    .expect("fit prepared")
                    .as_ref()
                    .map_err(clone_error)
                    .and_then(|est| {
                        let max = max_test_with_estimate(x, WeightExponent::SIGN, alpha, est)?;
                        let sum = sum_for(WeightExponent::SIGN)?;
                        Ok(combine_components(max, sum)?.to_test_result())
                    }),
                Method::MeanCc => mean_max_test(x, alpha).and_then(|max| {
                    let sum = mean_sum_test(x, alpha)?;
                    Ok(combine_components(max, sum)?.to_test_result())
                }),
                Method::WeightedMax | Method::WeightedSum | Method::WeightedCc => Err(invalid(
                    "custom-exponent methods are not addressable by tag; call the test \
                     functions directly",
                )),
            };
            (result, t0.elapsed().as_secs_f64() * 1e3 + shared_span)
        })
        .collect()
}

fn clone_error(e: &Error) -> Error {
    match e {
        Error::InvalidInput(m) => Error::InvalidInput(m.clone()),
        Error::DegenerateSample(m) => Error::DegenerateSample(m.clone()),
        Error::DegenerateVariance { estimate, details } => Error::DegenerateVariance {
            estimate: *estimate,
            details: details.clone(),
        },
        Error::DegenerateSeries(m) => Error::DegenerateSeries(m.clone()),
        Error::Numerical(m) => Error::Numerical(m.clone()),
        Error::Io(m) => Error::Numerical(format!("i/o: {m}")),
        Error::Config(m) => Error::Config(m.clone()),
    }
}

fn thread_pool(parallelism: Option<usize>) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))
}

/// Empirical sizes at δ = 0.
pub fn run_size_experiment(config: &SimConfig) -> Result<SimReport> {
    config.validate()?;
    if let Some(sig) = &config.signal {
        if sig.delta != 0.0 {
            return Err(Error::Config(
                "a size experiment requires signal.delta = 0".to_string(),
            ));
        }
    }
    run_grid(config, &[(0.0, SignalSpec::null())])
}

/// Rejection-rate curves over a sweep of signal energies or supports.
pub fn run_power_experiment(config: &SimConfig) -> Result<SimReport> {
    config.validate()?;
    let sweep = config
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Config("power experiment needs a sweep".to_string()))?;
    let points = sweep.grid_points()?;
    run_grid(config, &points)
}

fn run_grid(config: &SimConfig, points: &[(f64, SignalSpec)]) -> Result<SimReport> {
    let model = config.model()?;
    let mode = config.scale_mode();
    let pool = thread_pool(config.parallelism)?;
    let methods = config.methods.clone();
    let mut per_point: Vec<Vec<Vec<RepOutcome>>> = Vec::with_capacity(points.len());
    for (_, signal) in points {
        // common random numbers across grid points: replication seeds do
        // not depend on the grid position
        let outcomes: Vec<Vec<RepOutcome>> = pool.install(|| {
            (0..config.reps)
                .into_par_iter()
                .map(|rep| {
                    let seed = replication_seed(config.seed, rep as u64);
                    match sample_panel(&model, config.n, signal, seed) {
                        Ok(x) => run_methods(&x, &methods, config.alpha, mode)
                            .into_iter()
                            .map(|(r, ms)| (r.ok().map(|t| t.reject), ms))
                            .collect(),
                        Err(_) => methods.iter().map(|_| (None, 0.0)).collect(),
                    }
                })
                .collect()
        });
        per_point.push(outcomes);
    }

    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for (mi, &method) in methods.iter().enumerate() {
        for (pi, (grid_value, _)) in points.iter().enumerate() {
            let outcomes = &per_point[pi];
            let mut rejects = 0usize;
            let mut errors = 0usize;
            let mut runtime = 0.0f64;
            for rep in outcomes {
                match rep[mi].0 {
                    Some(true) => rejects += 1,
                    Some(false) => {}
                    None => errors += 1,
                }
                runtime += rep[mi].1;
            }
            let ok = config.reps - errors;
            let rate = if ok > 0 { rejects as f64 / ok as f64 } else { f64::NAN };
            let stderr = if ok > 0 {
                (rate * (1.0 - rate) / ok as f64).sqrt()
            } else {
                f64::NAN
            };
            if errors * 100 > config.reps {
                warnings.push(format!(
                    "{method} at grid value {} errored on {errors}/{} replications",
                    format_grid_value(*grid_value),
                    config.reps
                ));
            }
            rows.push(SimRow {
                method,
                grid_value: *grid_value,
                reject_rate: rate,
                stderr,
                reps: config.reps,
                errors,
                mean_runtime_ms: runtime / config.reps as f64,
            });
        }
    }
    Ok(SimReport {
        rows,
        config_hash: config.hash(),
        seed: config.seed,
        scale_mode: mode,
        warnings,
    })
}

/// Summary of the estimator-expansion remainder over an n-grid.
#[derive(Debug, Clone)]
pub struct BahadurRow {
    pub n: usize,
    pub median_sup_norm: f64,
    pub p90_sup_norm: f64,
    pub reps: usize,
    pub errors: usize,
}

#[derive(Debug, Clone)]
pub struct BahadurReport {
    pub weight_m: f64,
    pub rows: Vec<BahadurRow>,
    pub config_hash: String,
    pub seed: u64,
}

impl BahadurReport {
    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# config_hash={} seed={} weight_m={}\n",
            self.config_hash, self.seed, self.weight_m
        );
        out.push_str("n,median_sup_norm,p90_sup_norm,reps,errors\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{:.6},{:.6},{},{}\n",
                r.n, r.median_sup_norm, r.p90_sup_norm, r.reps, r.errors
            ));
        }
        out
    }
}

/// Remainder of the linear expansion of the location estimator, evaluated
/// against the generating parameters:
/// C_n = √n D̂^{-1/2}(θ̂ − θ) − n^{-1/2} ζ̂⁻¹_{m−1} Σ_i w(R_i) U_i,
/// with R_i and U_i built from the true θ and the true diagonal of Σ.
pub fn run_bahadur_diagnostic(config: &SimConfig) -> Result<BahadurReport> {
    config.validate()?;
    let model = config.model()?;
    let m = config.weight_exponent();
    let signal = config.signal.clone().unwrap_or_else(SignalSpec::null);
    let n_grid = config.n_grid.clone().unwrap_or_else(|| vec![40, 80, 160]);
    if n_grid.is_empty() {
        return Err(Error::Config("n_grid is empty".to_string()));
    }
    let pool = thread_pool(config.parallelism)?;
    let p = config.p;
    let theta = signal.theta(p)?;
    let true_d = model.covariance.diagonal();
    let mut rows = Vec::new();
    for (gi, &n) in n_grid.iter().enumerate() {
        let sup_norms: Vec<Option<f64>> = pool.install(|| {
            (0..config.reps)
                .into_par_iter()
                .map(|rep| {
                    let seed =
                        replication_seed(config.seed, (gi * config.reps + rep) as u64);
                    let x = sample_panel(&model, n, &signal, seed).ok()?;
                    bahadur_sup_norm(&x, &theta, &true_d, m).ok()
                })
                .collect()
        });
        let mut values: Vec<f64> = sup_norms.iter().flatten().cloned().collect();
        let errors = config.reps - values.len();
        if values.is_empty() {
            return Err(Error::Numerical(format!(
                "no successful replications at n={n}"
            )));
        }
        values.sort_by(|a, b| a.partial_cmp(b).expect("finite sup norms"));
        let med = median(&mut values.clone());
        let p90 = empirical_quantile(&values, 0.9);
        rows.push(BahadurRow {
            n,
            median_sup_norm: med,
            p90_sup_norm: p90,
            reps: config.reps,
            errors,
        });
    }
    Ok(BahadurReport {
        weight_m: m.value(),
        rows,
        config_hash: config.hash(),
        seed: config.seed,
    })
}

fn bahadur_sup_norm(
    x: &Sample,
    theta: &Array1<f64>,
    true_d: &Array1<f64>,
    m: WeightExponent,
) -> Result<f64> {
    let (n, p) = x.values().dim();
    let est = weighted_hr_estimate(x, m, &SolverOptions::default())?;
    let n_f = n as f64;
    // linear term from the generating parameters
    let root_d: Vec<f64> = true_d.iter().map(|v| v.sqrt()).collect();
    let mut lead = vec![0.0; p];
    let mut zeta = 0.0;
    let mut eps = vec![0.0; p];
    for i in 0..n {
        let row = x.values().row(i);
        let mut sq = 0.0;
        for j in 0..p {
            let e = (row[j] - theta[j]) / root_d[j];
            eps[j] = e;
            sq += e * e;
        }
        let r = sq.sqrt();
        if r == 0.0 {
            return Err(crate::error::degenerate("zero radius at the true center"));
        }
        let w = r.powf(m.value());
        zeta += r.powf(m.value() - 1.0);
        for j in 0..p {
            lead[j] += w * eps[j] / r;
        }
    }
    zeta /= n_f;
    let mut sup = 0.0f64;
    for j in 0..p {
        let c = n_f.sqrt() * (est.theta_hat[j] - theta[j]) / est.d_hat[j].sqrt()
            - lead[j] / (zeta * n_f.sqrt());
        sup = sup.max(c.abs());
    }
    Ok(sup)
}

/// Null-distribution calibration check: paired empirical/theoretical
/// quantiles of the max statistic and the largest CDF gap.
#[derive(Debug, Clone)]
pub struct QqReport {
    pub levels: Vec<f64>,
    pub empirical: Vec<f64>,
    pub theoretical: Vec<f64>,
    pub max_cdf_gap: f64,
    pub reps: usize,
    pub errors: usize,
    pub config_hash: String,
    pub seed: u64,
}

impl QqReport {
    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# config_hash={} seed={} max_cdf_gap={:.6}\n",
            self.config_hash, self.seed, self.max_cdf_gap
        );
        out.push_str("level,empirical,theoretical\n");
        for i in 0..self.levels.len() {
            out.push_str(&format!(
                "{},{:.6},{:.6}\n",
                self.levels[i], self.empirical[i], self.theoretical[i]
            ));
        }
        out
    }
}

pub fn run_gumbel_qq(config: &SimConfig) -> Result<QqReport> {
    config.validate()?;
    if let Some(sig) = &config.signal {
        if sig.delta != 0.0 {
            return Err(Error::Config(
                "the null calibration check requires delta = 0".to_string(),
            ));
        }
    }
    let model = config.model()?;
    let m = config.weight_exponent();
    let pool = thread_pool(config.parallelism)?;
    let stats: Vec<Option<f64>> = pool.install(|| {
        (0..config.reps)
            .into_par_iter()
            .map(|rep| {
                let seed = replication_seed(config.seed, rep as u64);
                let x = sample_panel(&model, config.n, &SignalSpec::null(), seed).ok()?;
                t_max_statistic(&x, m, None).ok()
            })
            .collect()
    });
    let mut values: Vec<f64> = stats.iter().flatten().cloned().collect();
    let errors = config.reps - values.len();
    if values.len() < 10 {
        return Err(Error::Numerical(
            "too few successful replications for a quantile table".to_string(),
        ));
    }
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite statistics"));
    let mut levels = vec![0.01];
    for i in 1..=19 {
        levels.push(i as f64 * 0.05);
    }
    levels.push(0.99);
    let empirical: Vec<f64> = levels.iter().map(|&l| empirical_quantile(&values, l)).collect();
    let theoretical: Vec<f64> = levels
        .iter()
        .map(|&l| gumbel_quantile(1.0 - l).expect("level in (0,1)"))
        .collect();
    // under the limit law, F(T) is uniform; the KS distance of the
    // transformed sample is the largest CDF gap
    let transformed: Vec<f64> = values.iter().map(|&t| crate::max_test::gumbel_cdf(t)).collect();
    let max_cdf_gap = crate::util::ks_distance_uniform(&transformed);
    Ok(QqReport {
        levels,
        empirical,
        theoretical,
        max_cdf_gap,
        reps: config.reps,
        errors,
        config_hash: config.hash(),
        seed: config.seed,
    })
}

/// Draw `count` distinct row indices from `total` by partial Fisher–Yates.
fn draw_without_replacement(
    total: usize,
    count: usize,
    rng: &mut rand_chacha::ChaCha12Rng,
) -> Vec<usize> {
    use rand::Rng;
    let mut pool: Vec<usize> = (0..total).collect();
    for i in 0..count {
        let j = rng.random_range(i..total);
        pool.swap(i, j);
    }
    pool.truncate(count);
    pool
}

/// Rejection rates of the requested methods over random subsamples of a
/// fixed panel, one column of results per subsample size.
#[allow(clippy::too_many_arguments)]
pub fn run_subsample_experiment(
    panel: &Sample,
    sizes: &[usize],
    reps: usize,
    alpha: f64,
    methods: &[Method],
    seed: u64,
    mode: ScaleMode,
    parallelism: Option<usize>,
) -> Result<SimReport> {
    if sizes.is_empty() {
        return Err(invalid("subsample experiment needs at least one size"));
    }
    for &n in sizes {
        if n < 6 || n > panel.n() {
            return Err(invalid(format!(
                "subsample size {n} must be in [6, {}]",
                panel.n()
            )));
        }
    }
    if reps < 1 {
        return Err(invalid("subsample experiment needs reps >= 1"));
    }
    let pool = thread_pool(parallelism)?;
    let mut rows = Vec::new();
    let mut per_size: Vec<Vec<Vec<RepOutcome>>> = Vec::new();
    for (si, &n) in sizes.iter().enumerate() {
        let outcomes: Vec<Vec<RepOutcome>> = pool.install(|| {
            (0..reps)
                .into_par_iter()
                .map(|rep| {
                    let rep_seed = replication_seed(seed, (si * reps + rep) as u64);
                    let mut rng = stream_rng(rep_seed, streams::SUBSAMPLE);
                    let idx = draw_without_replacement(panel.n(), n, &mut rng);
                    match panel.select_rows(&idx) {
                        Ok(x) => run_methods(&x, methods, alpha, mode)
                            .into_iter()
                            .map(|(r, ms)| (r.ok().map(|t| t.reject), ms))
                            .collect(),
                        Err(_) => methods.iter().map(|_| (None, 0.0)).collect(),
                    }
                })
                .collect()
        });
        per_size.push(outcomes);
    }
    for (mi, &method) in methods.iter().enumerate() {
        for (si, &n) in sizes.iter().enumerate() {
            let outcomes = &per_size[si];
            let mut rejects = 0usize;
            let mut errors = 0usize;
            let mut runtime = 0.0;
            for rep in outcomes {
                match rep[mi].0 {
                    Some(true) => rejects += 1,
                    Some(false) => {}
                    None => errors += 1,
                }
                runtime += rep[mi].1;
            }
            let ok = reps - errors;
            let rate = if ok > 0 { rejects as f64 / ok as f64 } else { f64::NAN };
            rows.push(SimRow {
                method,
                grid_value: n as f64,
                reject_rate: rate,
                stderr: if ok > 0 { (rate * (1.0 - rate) / ok as f64).sqrt() } else { f64::NAN },
                reps,
                errors,
                mean_runtime_ms: runtime / reps as f64,
            });
        }
    }
    let descriptor = format!(
        "subsample sizes={sizes:?} reps={reps} alpha={alpha} methods={} seed={seed}",
        methods.len()
    );
    Ok(SimReport {
        rows,
        config_hash: format!("{:016x}", fnv1a64(descriptor.as_bytes())),
        seed,
        scale_mode: mode,
        warnings: Vec::new(),
    })
}
