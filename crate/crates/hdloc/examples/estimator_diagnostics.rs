//! Estimator-level diagnostics: fixed-point telemetry of the weighted
//! location/scale fit, the decay of the linear-expansion remainder with
//! the sample size, the Gumbel calibration of the max statistic under the
//! null, and the empirical independence of the max and sum statistics.
//!
//! ```bash
//! cargo run --release --example estimator_diagnostics
//! ```

use hdloc::{
    hr_residuals, joint_independence_diagnostic, run_bahadur_diagnostic, run_gumbel_qq,
    sample_panel, weighted_hr_estimate, Method, PanelModel, Result, ScaleMode, Setting,
    SignalSpec, SimConfig, SolverOptions, WeightExponent,
};

fn main() -> Result<()> {
    // one fit, inspected closely
    let model = PanelModel::setting(Setting::II, 50);
    let x = sample_panel(&model, 60, &SignalSpec::null(), 5)?;
    let est = weighted_hr_estimate(&x, WeightExponent::INVERSE_NORM, &SolverOptions::default())?;
    println!(
        "fit: converged={} after {} steps, residuals {:.2e}/{:.2e}",
        est.converged, est.iterations, est.residual_location, est.residual_scale
    );
    let (rloc, rsc) = hr_residuals(&x, &est.theta_hat, &est.d_hat, WeightExponent::INVERSE_NORM)?;
    println!("re-evaluated residuals: {rloc:.2e}/{rsc:.2e}");

    let base = SimConfig {
        setting: Some(Setting::I),
        law: None,
        covariance: None,
        n: 60,
        p: 50,
        reps: 60,
        alpha: 0.05,
        methods: vec![Method::InMax],
        signal: None,
        sweep: None,
        seed: 17,
        scale_mode: Some(ScaleMode::SharedScale),
        parallelism: None,
        n_grid: Some(vec![30, 60, 120]),
        weight_m: Some(-1.0),
    };

    println!("\nlinear-expansion remainder over n (sup norm, should shrink):");
    let bahadur = run_bahadur_diagnostic(&base)?;
    print!("{}", bahadur.to_csv());

    println!("\nnull calibration of the max statistic (largest CDF gap vs the limit law):");
    let qq = run_gumbel_qq(&base)?;
    println!("max_cdf_gap = {:.4} over {} replications", qq.max_cdf_gap, qq.reps);

    println!("\nmax/sum dependence under the null (both should be near zero):");
    let indep = joint_independence_diagnostic(
        &PanelModel::setting(Setting::I, 50),
        40,
        WeightExponent::INVERSE_NORM,
        200,
        &SignalSpec::null(),
        23,
    )?;
    println!(
        "corr(T_MAX, studentized T_SUM) = {:.3}, KS(p_cc, uniform) = {:.3}",
        indep.correlation, indep.ks_distance_pcc
    );
    Ok(())
}
