//! Batch front-end for the library: location tests on CSV panels,
//! simulation experiments from JSON configs, efficiency tables,
//! Ljung–Box prefiltering and estimator diagnostics.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hdloc::{
    are_table, cc_test, joint_independence_diagnostic, max_test, mean_cc_test, mean_max_test,
    mean_sum_test, prefilter_panel, run_bahadur_diagnostic, run_gumbel_qq, run_power_experiment,
    run_size_experiment, sum_test, AreMode, Error, Method, RadialLaw, Result, Sample, ScaleMode,
    SeriesPanel, SignalSpec, SimConfig, TestResult, WeightExponent,
};

#[derive(Parser)]
#[command(name = "hdloc", version, about = "High-dimensional one-sample location tests")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one location test on a CSV data panel.
    Test(TestArgs),
    /// Run a size or power experiment described by a JSON config.
    Simulate(SimulateArgs),
    /// Print the asymptotic-relative-efficiency table.
    Are(AreArgs),
    /// Drop autocorrelated columns from a return panel.
    Prefilter(PrefilterArgs),
    /// Estimator and calibration diagnostics.
    Diagnose(DiagnoseArgs),
}

#[derive(Args)]
struct TestArgs {
    /// CSV panel: header row of variable names, observation rows below.
    #[arg(long)]
    input: PathBuf,
    /// Method tag: in-max|in-sum|in-cc|ss-max|ss-sum|ss-cc|max|sum|cc.
    #[arg(long)]
    method: String,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Override the weight exponent of the spatial methods (m <= 1).
    #[arg(long, allow_hyphen_values = true)]
    weight_m: Option<f64>,
    /// Solve every leave-two-out scale system from a cold start.
    #[arg(long)]
    exact: bool,
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON experiment description (mirrors the SimConfig fields).
    #[arg(long)]
    config: PathBuf,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum DistKind {
    Normal,
    T,
    Mixture,
}

#[derive(Args)]
struct AreArgs {
    /// Restrict to one radial law (default: the full tabulated set).
    #[arg(long, value_enum)]
    dist: Option<DistKind>,
    #[arg(long)]
    df: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    /// Evaluate by Monte Carlo with this many draws instead of closed form.
    #[arg(long)]
    mc_draws: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Also write the table as CSV to this path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PrefilterArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 10)]
    lags: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Output CSV of the retained columns.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Diagnostic {
    Bahadur,
    GumbelQq,
    Independence,
}

#[derive(Args)]
struct DiagnoseArgs {
    #[arg(value_enum)]
    which: Diagnostic,
    #[arg(long)]
    config: PathBuf,
    /// Write the diagnostic table as CSV to this path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Test(args) => run_test(args),
        Command::Simulate(args) => run_simulate(args),
        Command::Are(args) => run_are(args),
        Command::Prefilter(args) => run_prefilter(args),
        Command::Diagnose(args) => run_diagnose(args),
    }
}

fn print_result(r: &TestResult, scale_mode: Option<ScaleMode>) {
    println!("method:    {}", r.method);
    println!("statistic: {:.6}", r.statistic);
    println!("p-value:   {:.6}", r.p_value);
    println!("alpha:     {}", r.alpha);
    println!("reject:    {}", r.reject);
    if let Some(mode) = scale_mode {
        println!("scales:    {mode}");
    }
    for w in &r.warnings {
        println!("warning:   {w}");
    }
}

fn run_test(args: TestArgs) -> Result<()> {
    let sample = Sample::from_csv(&args.input)?;
    let method: Method = args.method.parse()?;
    let mode = if args.exact {
        ScaleMode::ExactLeaveTwoOut
    } else {
        ScaleMode::SharedScale
    };
    let default_m = |fallback: f64| -> Result<WeightExponent> {
        WeightExponent::new(args.weight_m.unwrap_or(fallback))
    };
    match method {
        Method::InMax => print_result(&max_test(&sample, default_m(-1.0)?, args.alpha)?, None),
        Method::SsMax => print_result(&max_test(&sample, default_m(0.0)?, args.alpha)?, None),
        Method::MeanMax => print_result(&mean_max_test(&sample, args.alpha)?, None),
        Method::InSum => print_result(
            &sum_test(&sample, default_m(-1.0)?, args.alpha, mode)?,
            Some(mode),
        ),
        Method::SsSum => print_result(
            &sum_test(&sample, default_m(0.0)?, args.alpha, mode)?,
            Some(mode),
        ),
        Method::MeanSum => print_result(&mean_sum_test(&sample, args.alpha)?, None),
        Method::InCc => {
            let combined = cc_test(&sample, default_m(-1.0)?, args.alpha, mode)?;
            print_combined(&combined, mode);
        }
        Method::SsCc => {
            let combined = cc_test(&sample, default_m(0.0)?, args.alpha, mode)?;
            print_combined(&combined, mode);
        }
        Method::MeanCc => {
            let combined = mean_cc_test(&sample, args.alpha)?;
            print_result(&combined.to_test_result(), None);
            println!("p-max:     {:.6}", combined.p_max);
            println!("p-sum:     {:.6}", combined.p_sum);
        }
        _ => return Err(Error::InvalidInput("unsupported method tag".to_string())),
    }
    Ok(())
}

fn print_combined(combined: &hdloc::CombinedResult, mode: ScaleMode) {
    print_result(&combined.to_test_result(), Some(mode));
    println!("p-max:     {:.6}", combined.p_max);
    println!("p-sum:     {:.6}", combined.p_sum);
}

fn run_simulate(args: SimulateArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.config)?;
    let config = SimConfig::from_json(&text)?;
    let report = if config.sweep.is_some() {
        run_power_experiment(&config)?
    } else {
        run_size_experiment(&config)?
    };
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    std::fs::write(&args.out, report.to_csv())?;
    println!("wrote {}", args.out.display());
    Ok(())
}

fn run_are(args: AreArgs) -> Result<()> {
    let laws = match args.dist {
        None => hdloc::are::reference_laws(),
        Some(DistKind::Normal) => vec![RadialLaw::Normal],
        Some(DistKind::T) => {
            let df = args
                .df
                .ok_or_else(|| Error::InvalidInput("--dist t needs --df".to_string()))?;
            vec![RadialLaw::t(df)?]
        }
        Some(DistKind::Mixture) => {
            let gamma = args
                .gamma
                .ok_or_else(|| Error::InvalidInput("--dist mixture needs --gamma".to_string()))?;
            let sigma = args
                .sigma
                .ok_or_else(|| Error::InvalidInput("--dist mixture needs --sigma".to_string()))?;
            vec![RadialLaw::mixture(gamma, sigma)?]
        }
    };
    let mode = match args.mc_draws {
        Some(draws) => AreMode::Mc {
            draws,
            seed: args.seed,
        },
        None => AreMode::ClosedForm,
    };
    let reports = are_table(&laws, mode)?;
    print!("{}", hdloc::are::format_table(&reports));
    if let Some(path) = args.out {
        std::fs::write(&path, hdloc::are::table_csv(&reports))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn run_prefilter(args: PrefilterArgs) -> Result<()> {
    let panel = SeriesPanel::from_csv(&args.input)?;
    let (retained, report) = prefilter_panel(&panel, args.lags, args.alpha)?;
    println!(
        "retained {} of {} columns (lags={}, alpha={})",
        retained.series_count(),
        panel.series_count(),
        report.lags,
        report.alpha
    );
    for (label, p) in &report.dropped {
        match p {
            Some(p) => println!("dropped {label}: p={p:.4}"),
            None => println!("dropped {label}: degenerate series"),
        }
    }
    let sample = retained.to_sample()?;
    let mut buf = Vec::new();
    sample.to_csv(&mut buf)?;
    std::fs::write(&args.out, buf)?;
    println!("wrote {}", args.out.display());
    Ok(())
}

fn run_diagnose(args: DiagnoseArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.config)?;
    let config = SimConfig::from_json(&text)?;
    let csv = match args.which {
        Diagnostic::Bahadur => {
            let report = run_bahadur_diagnostic(&config)?;
            report.to_csv()
        }
        Diagnostic::GumbelQq => {
            let report = run_gumbel_qq(&config)?;
            report.to_csv()
        }
        Diagnostic::Independence => {
            let model = config.model()?;
            let signal = config.signal.clone().unwrap_or_else(SignalSpec::null);
            let report = joint_independence_diagnostic(
                &model,
                config.n,
                config.weight_exponent(),
                config.reps,
                &signal,
                config.seed,
            )?;
            format!(
                "# reps={} errors={}\nstatistic,value\ncorrelation,{:.6}\nks_distance_pcc,{:.6}\n",
                report.reps, report.errors, report.correlation, report.ks_distance_pcc
            )
        }
    };
    match args.out {
        Some(path) => {
            std::fs::write(&path, csv)?;
            println!("wrote {}", path.display());
        }
        None => print!("{csv}"),
    }
    Ok(())
}
