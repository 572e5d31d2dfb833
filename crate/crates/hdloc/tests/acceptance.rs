//! Acceptance suite: one test per release criterion, each printing a
//! single PASS/FAIL line (run with `--nocapture` to see them).
//!
//! Monte Carlo criteria use one fixed master seed; the suite is fully
//! deterministic and independent of worker count.

use std::time::Instant;

use hdloc::are::{are_report, AreMode};
use hdloc::{
    cauchy_combine, gumbel_cdf, gumbel_quantile, hr_residuals, joint_independence_diagnostic,
    leave_out_scale, prefilter_panel, replication_seed, run_bahadur_diagnostic,
    run_power_experiment, run_size_experiment, run_subsample_experiment, sample_panel,
    t_sum_statistic, weighted_hr_estimate, Method, PanelModel, RadialLaw, Sample, ScaleMode,
    SeriesPanel, Setting, SignalSpec, SimConfig, SolverOptions, Sweep, WeightExponent,
};
use ndarray::Array2;

const MASTER_SEED: u64 = 20_260_810;

fn report(criterion: &str, pass: bool, detail: &str) {
    println!(
        "ACCEPTANCE {criterion}: {} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "{criterion} failed: {detail}");
}

fn base_config(setting: Setting, n: usize, p: usize, reps: usize, methods: Vec<Method>) -> SimConfig {
    SimConfig {
        setting: Some(setting),
        law: None,
        covariance: None,
        n,
        p,
        reps,
        alpha: 0.05,
        methods,
        signal: None,
        sweep: None,
        seed: MASTER_SEED,
        scale_mode: Some(ScaleMode::SharedScale),
        parallelism: None,
        n_grid: None,
        weight_m: None,
    }
}

#[test]
fn criterion_01_are_closed_forms_and_mc() {
    let t0 = Instant::now();
    let cases: [(RadialLaw, [f64; 3]); 5] = [
        (RadialLaw::T { df: 3.0 }, [3.00, 1.18, 2.54]),
        (RadialLaw::T { df: 4.0 }, [2.00, 1.13, 1.76]),
        (RadialLaw::T { df: 5.0 }, [1.67, 1.11, 1.51]),
        (RadialLaw::T { df: 6.0 }, [1.50, 1.09, 1.38]),
        (RadialLaw::Normal, [1.00, 1.00, 1.00]),
    ];
    let mut worst: f64 = 0.0;
    for (law, expected) in &cases {
        let closed = are_report(law, AreMode::ClosedForm).unwrap();
        let got = [closed.values.in_vs_max, closed.values.in_vs_ss, closed.values.ss_vs_max];
        for (g, e) in got.iter().zip(expected) {
            worst = worst.max((g - e).abs());
            assert!(
                (g - e).abs() <= 0.01,
                "{law}: closed form {g:.4} vs tabulated {e}"
            );
        }
        let mc = are_report(law, AreMode::Mc { draws: 10_000_000, seed: MASTER_SEED }).unwrap();
        let se = mc.mc_stderr.unwrap();
        let mc_v = [mc.values.in_vs_max, mc.values.in_vs_ss, mc.values.ss_vs_max];
        let se_v = [se.in_vs_max, se.in_vs_ss, se.ss_vs_max];
        for ((g, m), s) in got.iter().zip(mc_v).zip(se_v) {
            assert!(
                (g - m).abs() <= 3.0 * s.max(1e-9),
                "{law}: mc {m:.4} vs closed {g:.4} with stderr {s:.5}"
            );
        }
    }
    let elapsed = t0.elapsed().as_secs_f64();
    report(
        "criterion 1 (efficiency table, t rows and normal)",
        elapsed < 60.0,
        &format!("max closed-form deviation {worst:.4}; mc within 3 stderr; runtime {elapsed:.1}s"),
    );
}

#[test]
fn criterion_02_are_mixture_cells() {
    let m0210 = are_report(&RadialLaw::Mixture { gamma: 0.2, sigma: 10.0 }, AreMode::ClosedForm)
        .unwrap();
    assert!(
        (m0210.values.in_vs_max - 16.68).abs() <= 0.01,
        "MN(0.2,10): {:.4}",
        m0210.values.in_vs_max
    );
    let m0510 = are_report(&RadialLaw::Mixture { gamma: 0.5, sigma: 10.0 }, AreMode::ClosedForm)
        .unwrap();
    assert!(
        (m0510.values.in_vs_max - 25.50).abs() <= 0.01,
        "MN(0.5,10): {:.4}",
        m0510.values.in_vs_max
    );
    let m023 = are_report(&RadialLaw::Mixture { gamma: 0.2, sigma: 3.0 }, AreMode::ClosedForm)
        .unwrap();
    // the two-point closed form is ≈ 2.14 ...
    assert!(
        (m023.values.in_vs_max - 2.1378).abs() <= 0.01,
        "MN(0.2,3) closed form drifted: {:.4}",
        m023.values.in_vs_max
    );
    // ... which silently matching the tabulated 2.25 would contradict
    assert!((m023.values.in_vs_max - 2.25).abs() > 0.05);
    let reference = m023.reference.expect("tabulated reference attached");
    assert_eq!(reference.in_vs_max, 2.25);
    assert!(
        m023.flags.iter().any(|f| f.starts_with("ARE(IN-MAX,MAX)")),
        "discrepancy against the tabulated 2.25 must be flagged: {:?}",
        m023.flags
    );
    report(
        "criterion 2 (efficiency table, mixture cells)",
        true,
        &format!(
            "MN(0.2,10)={:.4}, MN(0.5,10)={:.4}, MN(0.2,3)={:.4} flagged against 2.25",
            m0210.values.in_vs_max, m0510.values.in_vs_max, m023.values.in_vs_max
        ),
    );
}

#[test]
fn criterion_03_empirical_sizes() {
    let t0 = Instant::now();
    let methods = vec![
        Method::InMax,
        Method::InSum,
        Method::InCc,
        Method::SsMax,
        Method::SsSum,
        Method::SsCc,
    ];
    let expected = [0.044, 0.068, 0.077, 0.038, 0.067, 0.069];
    let config = base_config(Setting::I, 80, 200, 1000, methods.clone());
    let sizes = run_size_experiment(&config).unwrap();
    let mut detail = String::new();
    let mut pass = true;
    for (method, want) in methods.iter().zip(expected) {
        let row = sizes.rows.iter().find(|r| r.method == *method).unwrap();
        let ok = (row.reject_rate - want).abs() <= 0.02;
        pass &= ok;
        detail.push_str(&format!(
            "{}={:.3} (target {want}±0.02){} ",
            method,
            row.reject_rate,
            if ok { "" } else { " OUT" }
        ));
    }
    // mean-based sum test under heavy tails must be severely conservative
    let conservative = run_size_experiment(&base_config(
        Setting::II,
        80,
        200,
        1000,
        vec![Method::MeanSum],
    ))
    .unwrap();
    let sum_ii = conservative.rows[0].reject_rate;
    pass &= sum_ii <= 0.02;
    let elapsed = t0.elapsed().as_secs_f64();
    pass &= elapsed < 1800.0;
    detail.push_str(&format!("SUM(setting ii)={sum_ii:.3} (≤0.02); runtime {elapsed:.0}s"));
    report("criterion 3 (empirical sizes, setting i, (80,200), 1000 reps)", pass, &detail);
}

#[test]
fn criterion_04_power_ordering() {
    let mut config = base_config(
        Setting::II,
        80,
        200,
        500,
        vec![
            Method::InMax,
            Method::SsMax,
            Method::MeanMax,
            Method::InSum,
            Method::SsSum,
            Method::MeanSum,
            Method::InCc,
        ],
    );
    config.sweep = Some(Sweep {
        delta_grid: None,
        s: None,
        s_grid: Some(vec![2, 10, 20]),
        delta: Some(0.5),
    });
    let power = run_power_experiment(&config).unwrap();
    let rate = |m: Method, s: f64| -> f64 {
        power
            .rows
            .iter()
            .find(|r| r.method == m && r.grid_value == s)
            .unwrap()
            .reject_rate
    };
    let sparse_ok = rate(Method::InMax, 2.0) >= rate(Method::SsMax, 2.0)
        && rate(Method::SsMax, 2.0) >= rate(Method::MeanMax, 2.0);
    let dense_ok = rate(Method::InSum, 20.0) >= rate(Method::SsSum, 20.0)
        && rate(Method::SsSum, 20.0) >= rate(Method::MeanSum, 20.0);
    let mut cc_ok = true;
    for s in [2.0, 10.0, 20.0] {
        let cc = rate(Method::InCc, s);
        let best = rate(Method::InMax, s).max(rate(Method::InSum, s));
        cc_ok &= cc >= best - 0.05;
    }
    let detail = format!(
        "s=2 max family (IN {:.3} ≥ SS {:.3} ≥ MAX {:.3}); s=20 sum family (IN {:.3} ≥ SS {:.3} ≥ SUM {:.3}); IN-CC tracks the best component within 0.05",
        rate(Method::InMax, 2.0),
        rate(Method::SsMax, 2.0),
        rate(Method::MeanMax, 2.0),
        rate(Method::InSum, 20.0),
        rate(Method::SsSum, 20.0),
        rate(Method::MeanSum, 20.0),
    );
    report(
        "criterion 4 (qualitative power ordering, setting ii, delta=0.5)",
        sparse_ok && dense_ok && cc_ok,
        &detail,
    );
}

#[test]
fn criterion_05_fixed_point_property_suite() {
    let settings = [Setting::I, Setting::II, Setting::III, Setting::IV];
    let mut converged = 0usize;
    let mut failed = 0usize;
    let mut equivariance_checked = 0usize;
    let mut worst_resid: f64 = 0.0;
    let mut worst_shift: f64 = 0.0;
    let mut worst_scale: f64 = 0.0;
    for panel_idx in 0..50u64 {
        let seed = replication_seed(MASTER_SEED, 1000 + panel_idx);
        let n = 20 + (seed % 81) as usize; // 20..=100
        let p = 10 + ((seed >> 8) % 291) as usize; // 10..=300
        let setting = settings[(panel_idx % 4) as usize];
        let m = if panel_idx % 2 == 0 {
            WeightExponent::INVERSE_NORM
        } else {
            WeightExponent::SIGN
        };
        let model = PanelModel::setting(setting, p);
        let x = sample_panel(&model, n, &SignalSpec::null(), seed).unwrap();
        let est = match weighted_hr_estimate(&x, m, &SolverOptions::default()) {
            Ok(est) if est.converged => est,
            Ok(_) | Err(_) => {
                failed += 1;
                continue;
            }
        };
        converged += 1;
        let (rloc, rsc) = hr_residuals(&x, &est.theta_hat, &est.d_hat, m).unwrap();
        worst_resid = worst_resid.max(rloc).max(rsc);
        assert!(
            rloc <= 1e-8 && rsc <= 1e-8,
            "panel {panel_idx}: converged but residuals {rloc:.2e}/{rsc:.2e}"
        );

        // shift equivariance with a coordinate-dependent shift
        let mut shifted = x.values().clone();
        for mut row in shifted.rows_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                *v += 1.0 + 0.03 * j as f64;
            }
        }
        let shifted = Sample::new(shifted).unwrap();
        if let Ok(est_s) = weighted_hr_estimate(&shifted, m, &SolverOptions::default()) {
            if est_s.converged {
                equivariance_checked += 1;
                for j in 0..p {
                    let want = est.theta_hat[j] + 1.0 + 0.03 * j as f64;
                    let err = (est_s.theta_hat[j] - want).abs()
                        .max((est_s.d_hat[j] - est.d_hat[j]).abs() / est.d_hat[j].max(1.0));
                    worst_shift = worst_shift.max(err);
                    assert!(err <= 1e-7, "panel {panel_idx}: shift equivariance error {err:.2e}");
                }
            }
        }

        // per-column scale equivariance on column 0
        let c = 3.5;
        let mut scaled = x.values().clone();
        for mut row in scaled.rows_mut() {
            row[0] *= c;
        }
        let scaled = Sample::new(scaled).unwrap();
        if let Ok(est_c) = weighted_hr_estimate(&scaled, m, &SolverOptions::default()) {
            if est_c.converged {
                let theta_err = (est_c.theta_hat[0] - c * est.theta_hat[0]).abs()
                    / (c * est.theta_hat[0]).abs().max(1.0);
                let d_err = (est_c.d_hat[0] - c * c * est.d_hat[0]).abs()
                    / (c * c * est.d_hat[0]).max(1.0);
                let err = theta_err.max(d_err);
                worst_scale = worst_scale.max(err);
                assert!(err <= 1e-7, "panel {panel_idx}: scale equivariance error {err:.2e}");
            }
        }
    }
    let pass = converged >= 35 && equivariance_checked >= 30;
    report(
        "criterion 5 (fixed-point property suite, 50 random panels)",
        pass,
        &format!(
            "{converged}/50 converged ({failed} degenerate or non-converged), worst residual {worst_resid:.2e}, worst shift error {worst_shift:.2e}, worst scale error {worst_scale:.2e}"
        ),
    );
}

/// Naive double-loop recomputation of the exact-mode sum statistic,
/// written from the definition and independent of the sweep machinery.
fn naive_double_loop(x: &Sample, m: f64) -> f64 {
    let n = x.n();
    let p = x.p();
    let mut total = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let est = leave_out_scale(x, (i, j), WeightExponent::SIGN, &SolverOptions::default())
                .unwrap();
            let mut vi = vec![0.0; p];
            let mut vj = vec![0.0; p];
            for l in 0..p {
                let s = est.d_hat[l].sqrt();
                vi[l] = x.values()[[i, l]] / s;
                vj[l] = x.values()[[j, l]] / s;
            }
            let mut ri = 0.0;
            for l in 0..p {
                ri += vi[l] * vi[l];
            }
            let ri = ri.sqrt();
            let mut rj = 0.0;
            for l in 0..p {
                rj += vj[l] * vj[l];
            }
            let rj = rj.sqrt();
            for l in 0..p {
                vi[l] /= ri;
                vj[l] /= rj;
            }
            let mut dot = 0.0;
            for l in 0..p {
                dot += vi[l] * vj[l];
            }
            total += ri.powf(m) * rj.powf(m) * dot;
        }
    }
    2.0 * total / (n as f64 * (n as f64 - 1.0))
}

#[test]
fn criterion_06_brute_force_oracle() {
    let exponents = [-1.0, 0.0, 1.0];
    let mut checked = 0;
    for case in 0..20u64 {
        let seed = replication_seed(MASTER_SEED, 2000 + case);
        let n = 6 + (seed % 7) as usize; // 6..=12
        let p = 2 + ((seed >> 16) % 5) as usize; // 2..=6
        let setting = [Setting::I, Setting::II, Setting::III, Setting::IV][(case % 4) as usize];
        let model = PanelModel::setting(setting, p);
        let x = sample_panel(&model, n, &SignalSpec::null(), seed).unwrap();
        let m = exponents[(case % 3) as usize];
        let fast = t_sum_statistic(&x, WeightExponent::new(m).unwrap(), ScaleMode::ExactLeaveTwoOut)
            .unwrap();
        let slow = naive_double_loop(&x, m);
        assert_eq!(
            fast.to_bits(),
            slow.to_bits(),
            "case {case} (n={n}, p={p}, m={m}): {fast:?} vs {slow:?}"
        );
        checked += 1;
    }
    report(
        "criterion 6 (brute-force oracle, exact sum statistic)",
        checked == 20,
        &format!("{checked}/20 instances bit-identical to the naive double loop"),
    );
}

#[test]
fn criterion_07_calibration_identities() {
    for alpha in [0.01, 0.02, 0.05, 0.1, 0.25, 0.5, 0.9] {
        let q = gumbel_quantile(alpha).unwrap();
        assert!(
            (gumbel_cdf(q) - (1.0 - alpha)).abs() <= 1e-12,
            "roundtrip at alpha={alpha}"
        );
    }
    // high-precision evaluation of −log π − 2 log log(1/0.95)
    let q95 = gumbel_quantile(0.05).unwrap();
    assert!(
        (q95 - 4.795660612234929).abs() <= 1e-4,
        "q(0.95) = {q95:.7}"
    );
    for p in [0.001, 0.01, 0.05, 0.2, 0.5, 0.8, 0.99, 0.999] {
        let combined = cauchy_combine(&[p, p], None).unwrap();
        assert_eq!(combined, p, "fixed point at p={p}");
    }
    report(
        "criterion 7 (calibration identities)",
        true,
        &format!("roundtrips ≤ 1e-12, q(0.95) = {q95:.6}, equal-input combination exact"),
    );
}

#[test]
fn criterion_08_independence_diagnostic() {
    let model = PanelModel::setting(Setting::I, 200);
    let diag = joint_independence_diagnostic(
        &model,
        80,
        WeightExponent::INVERSE_NORM,
        500,
        &SignalSpec::null(),
        MASTER_SEED,
    )
    .unwrap();
    let corr_ok = diag.correlation.abs() < 0.15;
    let ks_ok = diag.ks_distance_pcc < 0.08;
    report(
        "criterion 8 (independence diagnostic at (80,200))",
        corr_ok && ks_ok,
        &format!(
            "|corr| = {:.3} (required < 0.15), KS(p_cc) = {:.3} (required < 0.08). \
             Note: the max/sum correlation of a Gaussian score vector with ar1(0.5) \
             covariance is ≈ 0.45 at p = 200 and still ≈ 0.15 at p = 8000, so the \
             correlation bound is unattainable at this dimension for any faithful \
             implementation; the combination p-value is nevertheless calibrated (see KS).",
            diag.correlation.abs(),
            diag.ks_distance_pcc
        ),
    );
}

#[test]
fn criterion_09_bahadur_trend() {
    let mut config = base_config(Setting::I, 80, 200, 200, vec![Method::InMax]);
    config.n_grid = Some(vec![40, 80, 160]);
    config.weight_m = Some(-1.0);
    let bahadur = run_bahadur_diagnostic(&config).unwrap();
    let medians: Vec<f64> = bahadur.rows.iter().map(|r| r.median_sup_norm).collect();
    let decreasing = medians.windows(2).all(|w| w[1] < w[0]);
    report(
        "criterion 9 (estimator expansion remainder shrinks with n)",
        decreasing,
        &format!(
            "median sup norms at n=40/80/160: {:.4}/{:.4}/{:.4}",
            medians[0], medians[1], medians[2]
        ),
    );
}

#[test]
fn criterion_10_determinism_across_worker_counts() {
    let mut config = base_config(
        Setting::II,
        40,
        60,
        40,
        vec![Method::InMax, Method::InSum, Method::InCc],
    );
    config.parallelism = Some(1);
    let serial = run_size_experiment(&config).unwrap().to_csv();
    config.parallelism = Some(8);
    let parallel = run_size_experiment(&config).unwrap().to_csv();
    let repeat = run_size_experiment(&config).unwrap().to_csv();
    report(
        "criterion 10 (byte-identical reports at 1 and 8 workers)",
        serial == parallel && parallel == repeat,
        &format!("{} bytes each", serial.len()),
    );
}

/// Synthetic weekly-return panel: `clean` i.i.d. heavy-tailed columns with
/// a small dense mean shift plus `auto` AR(1) columns for the prefilter to
/// drop.
fn synthetic_panel(t: usize, clean: usize, auto: usize, seed: u64) -> SeriesPanel {
    let model = PanelModel::setting(Setting::II, clean);
    let base = sample_panel(&model, t, &SignalSpec::new(0.3, clean).unwrap(), seed).unwrap();
    let noise_model = PanelModel::setting(Setting::I, auto);
    let noise = sample_panel(&noise_model, t, &SignalSpec::null(), replication_seed(seed, 7))
        .unwrap();
    let mut values = Array2::zeros((t, clean + auto));
    for i in 0..t {
        for j in 0..clean {
            values[[i, j]] = 0.02 * base.values()[[i, j]];
        }
    }
    for j in 0..auto {
        let mut prev = 0.0;
        for i in 0..t {
            prev = 0.5 * prev + 0.02 * noise.values()[[i, j]];
            values[[i, j + clean]] = prev;
        }
    }
    let labels: Vec<String> = (0..clean)
        .map(|j| format!("clean{j}"))
        .chain((0..auto).map(|j| format!("ar{j}")))
        .collect();
    SeriesPanel::new(values, labels, None).unwrap()
}

#[test]
fn criterion_11_prefilter_subsample_pipeline() {
    let t0 = Instant::now();
    let panel = synthetic_panel(716, 280, 144, MASTER_SEED);
    assert_eq!(panel.rows(), 716);
    assert_eq!(panel.series_count(), 424);
    let (retained, prefilter_report) = prefilter_panel(&panel, 10, 0.05).unwrap();
    // every AR column must go; a ~5% false-positive rate on the clean
    // block is expected at level 0.05
    let ar_retained = retained.labels().iter().filter(|l| l.starts_with("ar")).count();
    assert_eq!(ar_retained, 0, "autocorrelated columns survived the prefilter");
    assert!(
        retained.series_count() >= 240,
        "prefilter dropped too many clean columns: {}",
        retained.series_count()
    );

    let sample = retained.to_sample().unwrap();
    let sizes = [156, 208, 260, 312, 364, 416];
    let methods = [
        Method::MeanMax,
        Method::MeanSum,
        Method::MeanCc,
        Method::SsMax,
        Method::SsSum,
        Method::SsCc,
        Method::InMax,
        Method::InSum,
        Method::InCc,
    ];
    // two replications per subsample size keep the end-to-end run at desk
    // scale; the criterion is the shape of the table, not its rates
    let table = run_subsample_experiment(
        &sample,
        &sizes,
        2,
        0.05,
        &methods,
        MASTER_SEED,
        ScaleMode::SharedScale,
        None,
    )
    .unwrap();
    assert_eq!(table.rows.len(), methods.len() * sizes.len());
    for row in &table.rows {
        assert!(row.reject_rate.is_finite());
        assert!(sizes.contains(&(row.grid_value as usize)));
    }
    let csv = table.to_csv();
    assert!(csv.lines().count() == 2 + methods.len() * sizes.len());
    report(
        "criterion 11 (prefilter + subsample + nine-test pipeline)",
        true,
        &format!(
            "dropped {} columns (all {} autocorrelated ones), table {} methods × {} sizes, runtime {:.0}s",
            prefilter_report.dropped.len(),
            144,
            methods.len(),
            sizes.len(),
            t0.elapsed().as_secs_f64()
        ),
    );
}
