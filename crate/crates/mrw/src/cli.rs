//! Command definitions and dispatch.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use mrw_core::estimate::{self, CovMethod};
use mrw_core::{
    coarse_grain, compute_market_mode, cumulative_frequency, daily_large_count, deseasonalize_news,
    find_main_shock, fit_lambda_l, fit_news_coupling_pairs, fit_omori, fit_zeta, log_returns,
    moment_scaling, simulate_omori_events, DetrendMode, MarketModeConfig, MrwFit, MrwParams,
    MrwSimulator, OmoriParams, Series, ShockFrame, WindowScanConfig,
};
use serde::Serialize;

use crate::error::Error;
use crate::io::{self, fmt_opt, format_timestamp, TextWriter};
use crate::manifest::Manifest;

pub const OUT_DIR_ENV: &str = "MRW_OUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "mrw",
    version,
    about = "Multifractal random walk toolkit for minute-level returns"
)]
pub struct Cli {
    /// Output directory (created if missing).
    #[arg(long, global = true, env = OUT_DIR_ENV, default_value = ".")]
    pub out: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate an MRW path.
    ///
    /// Writes simulate.csv with columns index,dX,omega.
    Simulate(SimulateArgs),
    /// Simulate Omori-law event times around a shock at t=0.
    ///
    /// Writes omori_events.csv with column t_minutes (sorted, includes 0).
    SimulateOmori(SimulateOmoriArgs),
    /// Build the market mode from long-format minute prices.
    ///
    /// Input CSV columns: timestamp,issue,price. Optional calendar CSV:
    /// date,open_skip_minutes. Writes market_mode.csv (timestamp,dM; empty dM
    /// where masked), sigmas.csv (issue,sigma), profile.csv (minute,std) when
    /// deseasonalized, and ingestion_report.txt (one line per rejected row).
    MarketMode(MarketModeArgs),
    /// Fit lambda^2 and L from the log-amplitude covariance.
    ///
    /// Writes fit.txt (key=value) and covcurve.csv with columns k,cov,n
    /// (lag in samples, covariance, pair count).
    Estimate(EstimateArgs),
    /// Moment scaling exponents zeta_q.
    ///
    /// Writes spectrum.csv (q,zeta,se,r2,scales), moments.csv
    /// (q,dt,moment,count,heavy_tail) and spectrum.txt (key=value).
    Spectrum(SpectrumArgs),
    /// Sliding-window Var(omega) trajectory.
    ///
    /// Writes window_scan.csv (window_end,lambda2,L,var_omega,r2,flag; empty
    /// L when undetermined) and daily_counts.csv (date,threshold,count,observed).
    WindowScan(WindowScanArgs),
    /// Cumulative frequency of large returns around the main shock and Omori fits.
    ///
    /// Writes omori_<m>.csv per threshold multiple m with columns
    /// side,t_minutes,N (t in trading minutes from the shock, N the count
    /// from the shock up to t) and omori_fit.txt, one line per threshold.
    Omori(OmoriArgs),
    /// Power-law coupling between Var(omega) and cumulative news counts.
    ///
    /// Inputs: a window_scan.csv trajectory (windows with var_omega <= 0 are
    /// skipped) and a news CSV with columns
    /// date,count. Writes news_fit.txt (key=value), news_joined.csv
    /// (date,var_omega,cum_news) and news_adjusted.csv
    /// (date,raw,adjusted,cumulative).
    NewsFit(NewsFitArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::SimulateOmori(_) => "simulate-omori",
            Command::MarketMode(_) => "market-mode",
            Command::Estimate(_) => "estimate",
            Command::Spectrum(_) => "spectrum",
            Command::WindowScan(_) => "window-scan",
            Command::Omori(_) => "omori",
            Command::NewsFit(_) => "news-fit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Detrend {
    None,
    Local,
}

impl From<Detrend> for DetrendMode {
    fn from(d: Detrend) -> Self {
        match d {
            Detrend::None => DetrendMode::None,
            Detrend::Local => DetrendMode::local(),
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long)]
    pub lambda2: f64,
    /// Decorrelation length in minutes.
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub l: f64,
    #[arg(long, default_value_t = 1.0)]
    pub dt: f64,
    /// Number of increments.
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateOmoriArgs {
    #[arg(long)]
    pub beta_before: f64,
    #[arg(long)]
    pub beta_after: f64,
    #[arg(long)]
    pub c_before: f64,
    #[arg(long)]
    pub c_after: f64,
    #[arg(long, default_value_t = 10_000.0)]
    pub horizon_before: f64,
    #[arg(long, default_value_t = 10_000.0)]
    pub horizon_after: f64,
    /// Require 0 < beta_before < beta_after < 1.
    #[arg(long, default_value_t = false, action = clap::ArgAction::Set)]
    pub strict_ordering: bool,
    #[arg(long)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct MarketModeArgs {
    #[arg(long)]
    pub prices: PathBuf,
    #[arg(long)]
    pub calendar: Option<PathBuf>,
    /// Return horizon in minutes.
    #[arg(long, default_value_t = 1)]
    pub dt: usize,
    /// Minimum fraction of issues present for a minute to be kept.
    #[arg(long, default_value_t = 1.0)]
    pub coverage: f64,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub deseasonalize: bool,
    #[arg(long, default_value_t = mrw_core::preprocess::DEFAULT_MIN_BUCKET)]
    pub min_bucket: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct SeriesInput {
    /// Series CSV; a timestamp column sets the trading calendar.
    #[arg(long)]
    pub input: PathBuf,
    /// Value column (default: first column other than timestamp/index).
    #[arg(long)]
    pub column: Option<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct EstimateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub series: SeriesInput,
    /// Coarse-graining interval in minutes.
    #[arg(long, default_value_t = 1)]
    pub dt: usize,
    #[arg(long, value_enum, default_value_t = Detrend::None)]
    pub detrend: Detrend,
    #[arg(long, default_value_t = estimate::DEFAULT_K_MIN)]
    pub k_min: usize,
    /// Largest lag in samples (default: a tenth of the series).
    #[arg(long)]
    pub max_lag: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct SpectrumArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub series: SeriesInput,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5")]
    pub q_list: Vec<f64>,
    /// Powers of two up to 4096.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "1,2,4,8,16,32,64,128,256"
    )]
    pub dt_list: Vec<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct WindowScanArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub series: SeriesInput,
    /// Window width in trading minutes.
    #[arg(long)]
    pub window: usize,
    /// Step between window ends (default: one average trading day).
    #[arg(long)]
    pub stride: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub dt: usize,
    #[arg(long, value_enum, default_value_t = Detrend::Local)]
    pub detrend: Detrend,
    #[arg(long, default_value_t = estimate::DEFAULT_K_MIN)]
    pub k_min: usize,
    #[arg(long)]
    pub max_lag: Option<usize>,
    /// Multiples of the period standard deviation for daily counts.
    #[arg(long, value_delimiter = ',', default_value = "2")]
    pub thresholds: Vec<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct OmoriArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub series: SeriesInput,
    /// Start of the main-shock search range: row index or timestamp.
    #[arg(long)]
    pub from: Option<String>,
    /// End of the search range (exclusive): row index or timestamp.
    #[arg(long)]
    pub to: Option<String>,
    /// Threshold multiples of the whole-series standard deviation.
    #[arg(long, value_delimiter = ',', default_value = "4,5,6,7")]
    pub thresholds: Vec<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct NewsFitArgs {
    /// window_scan.csv from a previous run.
    #[arg(long)]
    pub trajectory: PathBuf,
    #[arg(long)]
    pub news: PathBuf,
    /// First date of the fit window (YYYY-MM-DD).
    #[arg(long)]
    pub start: String,
    /// Last date of the fit window, inclusive.
    #[arg(long)]
    pub end: String,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub deseasonalize: bool,
}

/// A failed run: originating module and message.
#[derive(Debug)]
pub struct Failure {
    pub module: &'static str,
    pub message: String,
}

impl Failure {
    fn new(module: &'static str, message: impl ToString) -> Self {
        Self {
            module,
            message: message.to_string(),
        }
    }
}

trait Origin<T> {
    fn origin(self, module: &'static str) -> Result<T, Failure>;
}

impl<T, E: Into<Error>> Origin<T> for Result<T, E> {
    fn origin(self, module: &'static str) -> Result<T, Failure> {
        self.map_err(|e| Failure::new(module, e.into()))
    }
}

fn config_json<T: Serialize>(args: &T) -> String {
    serde_json::to_string(args).expect("arguments serialize")
}

fn require_file(path: &Path) -> Result<(), Failure> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Failure::new(
            "cli",
            format!("input file not found: {}", path.display()),
        ))
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>, Failure> {
    csv::Writer::from_path(path)
        .map_err(|e| Failure::new("cli", format!("{}: {e}", path.display())))
}

fn write_rows<I, R>(path: &Path, header: &[&str], rows: I) -> Result<(), Failure>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let fail = |e: csv::Error| Failure::new("cli", format!("{}: {e}", path.display()));
    let mut w = csv_writer(path)?;
    w.write_record(header).map_err(fail)?;
    for row in rows {
        w.write_record(row).map_err(fail)?;
    }
    w.flush()
        .map_err(|e| Failure::new("cli", format!("{}: {e}", path.display())))
}

/// Parses arguments (after `--config` expansion) and runs; returns the exit code.
pub fn main_with_args(args: Vec<OsString>) -> i32 {
    let args = match crate::config::expand_config(args) {
        Ok(a) => a,
        Err(e) => return report_failure("none", &Failure::new("cli", e)),
    };
    let command_hint = args
        .get(1)
        .map(|a| a.to_string_lossy().into_owned())
        .unwrap_or_else(|| "none".into());
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            let rendered = e.to_string();
            let message = rendered
                .lines()
                .take_while(|l| !l.starts_with("Usage:"))
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .collect::<Vec<_>>()
                .join(" ");
            let message = message.trim_start_matches("error: ");
            return report_failure(&command_hint, &Failure::new("cli", message));
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(f) => report_failure(cli.command.name(), &f),
    }
}

fn report_failure(command: &str, f: &Failure) -> i32 {
    let message = f.message.replace(['\n', '\r'], " ");
    eprintln!(
        "error: command={command} module={} message={message}",
        f.module
    );
    if f.module == "cli" {
        2
    } else {
        1
    }
}

pub fn run(cli: &Cli) -> Result<(), Failure> {
    std::fs::create_dir_all(&cli.out)
        .map_err(|e| Failure::new("cli", format!("{}: {e}", cli.out.display())))?;
    let out = cli.out.as_path();
    let mut manifest = match &cli.command {
        Command::Simulate(a) => simulate(a, out)?,
        Command::SimulateOmori(a) => simulate_omori(a, out)?,
        Command::MarketMode(a) => market_mode(a, out)?,
        Command::Estimate(a) => estimate_cmd(a, out)?,
        Command::Spectrum(a) => spectrum(a, out)?,
        Command::WindowScan(a) => window_scan_cmd(a, out)?,
        Command::Omori(a) => omori(a, out)?,
        Command::NewsFit(a) => news_fit(a, out)?,
    };
    manifest.command = cli.command.name().to_string();
    manifest.write(out).origin("cli")
}

fn simulate(a: &SimulateArgs, out: &Path) -> Result<Manifest, Failure> {
    let params = MrwParams::new(a.sigma, a.lambda2, a.l, a.dt).origin("mrw_simulator")?;
    let path = MrwSimulator::new(params, a.n)
        .origin("mrw_simulator")?
        .path(a.seed);
    write_rows(
        &out.join("simulate.csv"),
        &["index", "dX", "omega"],
        path.dx
            .iter()
            .zip(&path.omega)
            .enumerate()
            .map(|(i, (dx, w))| [i.to_string(), dx.to_string(), w.to_string()]),
    )?;
    Ok(Manifest {
        seed: Some(a.seed),
        config: config_json(a),
        outputs: vec!["simulate.csv".into()],
        ..Manifest::default()
    })
}

fn simulate_omori(a: &SimulateOmoriArgs, out: &Path) -> Result<Manifest, Failure> {
    let params = OmoriParams {
        beta_before: a.beta_before,
        beta_after: a.beta_after,
        c_before: a.c_before,
        c_after: a.c_after,
        horizon_before: a.horizon_before,
        horizon_after: a.horizon_after,
        strict_ordering: a.strict_ordering,
    };
    let times = simulate_omori_events(&params, a.seed).origin("mrw_simulator")?;
    write_rows(
        &out.join("omori_events.csv"),
        &["t_minutes"],
        times.iter().map(|t| [t.to_string()]),
    )?;
    Ok(Manifest {
        seed: Some(a.seed),
        config: config_json(a),
        outputs: vec!["omori_events.csv".into()],
        ..Manifest::default()
    })
}

fn market_mode(a: &MarketModeArgs, out: &Path) -> Result<Manifest, Failure> {
    require_file(&a.prices)?;
    if let Some(c) = &a.calendar {
        require_file(c)?;
    }
    let ingested = io::load_prices(&a.prices, a.calendar.as_deref()).origin("timeseries_core")?;
    let mut report = TextWriter::create(&out.join("ingestion_report.txt")).origin("cli")?;
    for line in &ingested.report {
        report.line(line).origin("cli")?;
    }
    report.finish().origin("cli")?;

    let returns = ingested
        .prices
        .iter()
        .map(|p| log_returns(p, a.dt))
        .collect::<Result<Vec<_>, _>>()
        .origin("timeseries_core")?;
    let config = MarketModeConfig {
        coverage: a.coverage,
        deseasonalize: a.deseasonalize,
        min_bucket: a.min_bucket,
    };
    let mm = compute_market_mode(&returns, &config).origin("market_mode")?;
    let s = &mm.series;
    write_rows(
        &out.join("market_mode.csv"),
        &["timestamp", "dM"],
        (0..s.len()).map(|i| [format_timestamp(s.timestamp(i)), fmt_opt(s.get(i))]),
    )?;
    write_rows(
        &out.join("sigmas.csv"),
        &["issue", "sigma"],
        mm.sigmas
            .iter()
            .map(|(id, sd)| [id.clone(), sd.to_string()]),
    )?;
    let mut outputs = vec![
        "ingestion_report.txt".to_string(),
        "market_mode.csv".into(),
        "sigmas.csv".into(),
    ];
    if let Some(profile) = &mm.profile {
        write_rows(
            &out.join("profile.csv"),
            &["minute", "std"],
            profile
                .entries()
                .map(|(m, sd)| [m.to_string(), sd.to_string()]),
        )?;
        outputs.push("profile.csv".into());
    }
    let mut inputs = vec![a.prices.clone()];
    inputs.extend(a.calendar.clone());
    Ok(Manifest {
        config: config_json(a),
        inputs,
        outputs,
        ..Manifest::default()
    })
}

fn load(input: &SeriesInput) -> Result<io::LoadedSeries, Failure> {
    require_file(&input.input)?;
    io::read_series(&input.input, input.column.as_deref()).origin("timeseries_core")
}

fn fit_lines(fit: &MrwFit) -> Vec<(&'static str, String)> {
    vec![
        ("lambda2", fit.lambda2.to_string()),
        ("lambda2_se", fit.lambda2_se.to_string()),
        ("L", fmt_opt(fit.l)),
        ("var_omega", fit.var_omega.to_string()),
        ("dt", fit.dt.to_string()),
        ("k_min", fit.k_min.to_string()),
        ("k_max", fit.k_max.to_string()),
        ("n_lags", fit.n_lags.to_string()),
        ("r2", fit.r2.to_string()),
        ("excluded_zeros", fit.excluded_zeros.to_string()),
        ("status", fit.status.as_str().to_string()),
    ]
}

fn estimate_cmd(a: &EstimateArgs, out: &Path) -> Result<Manifest, Failure> {
    let loaded = load(&a.series)?;
    if a.dt == 0 {
        return Err(Failure::new("cli", "dt must be positive"));
    }
    let mut series = if a.dt > 1 {
        coarse_grain(&loaded.series, a.dt).origin("timeseries_core")?
    } else {
        loaded.series
    };
    if let DetrendMode::LocalBlock(block) = DetrendMode::from(a.detrend) {
        series = mrw_core::detrend_local(&series, block).origin("timeseries_core")?;
    }
    let max_lag = a.max_lag.unwrap_or(series.len() / 10);
    let curve =
        estimate::log_abs_cov_with(&series, max_lag, CovMethod::Auto).origin("mrw_estimator")?;
    let fit = fit_lambda_l(&curve, a.k_min, a.dt as f64).origin("mrw_estimator")?;
    write_rows(
        &out.join("covcurve.csv"),
        &["k", "cov", "n"],
        curve
            .lags
            .iter()
            .zip(&curve.cov)
            .zip(&curve.counts)
            .map(|((k, c), n)| [k.to_string(), c.to_string(), n.to_string()]),
    )?;
    let mut lines = fit_lines(&fit);
    lines.push(("n", series.len().to_string()));
    lines.push(("max_lag", max_lag.to_string()));
    io::write_report(&out.join("fit.txt"), &lines).origin("cli")?;
    Ok(Manifest {
        config: config_json(a),
        inputs: vec![a.series.input.clone()],
        outputs: vec!["covcurve.csv".into(), "fit.txt".into()],
        ..Manifest::default()
    })
}

fn spectrum(a: &SpectrumArgs, out: &Path) -> Result<Manifest, Failure> {
    let loaded = load(&a.series)?;
    let table = moment_scaling(&loaded.series, &a.q_list, &a.dt_list).origin("mrw_estimator")?;
    let spec = fit_zeta(&table).origin("mrw_estimator")?;
    write_rows(
        &out.join("moments.csv"),
        &["q", "dt", "moment", "count", "heavy_tail"],
        table.cells.iter().map(|c| {
            [
                c.q.to_string(),
                c.dt.to_string(),
                c.moment.to_string(),
                c.count.to_string(),
                c.heavy_tail.to_string(),
            ]
        }),
    )?;
    write_rows(
        &out.join("spectrum.csv"),
        &["q", "zeta", "se", "r2", "scales"],
        spec.estimates.iter().map(|e| {
            [
                e.q.to_string(),
                e.zeta.to_string(),
                e.se.to_string(),
                e.r2.to_string(),
                e.cells.to_string(),
            ]
        }),
    )?;
    io::write_report(
        &out.join("spectrum.txt"),
        &[
            ("lambda2_spec", spec.lambda2_spec.to_string()),
            ("lambda2_spec_se", spec.lambda2_spec_se.to_string()),
            ("dt_min", spec.dt_min.to_string()),
            ("dt_max", spec.dt_max.to_string()),
            (
                "heavy_tail_cells",
                table
                    .cells
                    .iter()
                    .filter(|c| c.heavy_tail)
                    .count()
                    .to_string(),
            ),
        ],
    )
    .origin("cli")?;
    Ok(Manifest {
        config: config_json(a),
        inputs: vec![a.series.input.clone()],
        outputs: vec![
            "moments.csv".into(),
            "spectrum.csv".into(),
            "spectrum.txt".into(),
        ],
        ..Manifest::default()
    })
}

fn window_scan_cmd(a: &WindowScanArgs, out: &Path) -> Result<Manifest, Failure> {
    let loaded = load(&a.series)?;
    let series = &loaded.series;
    let mut config = match a.stride {
        Some(stride) => WindowScanConfig::new(a.window, stride),
        None => WindowScanConfig::daily(a.window, series),
    };
    config.dt = a.dt;
    config.detrend = a.detrend.into();
    config.k_min = a.k_min;
    config.max_lag = a.max_lag;
    let estimates = scan_parallel(series, &config).origin("window_scan")?;
    write_rows(
        &out.join("window_scan.csv"),
        &["window_end", "lambda2", "L", "var_omega", "r2", "flag"],
        estimates.iter().map(|w| {
            [
                format_timestamp(w.end_time),
                w.fit.lambda2.to_string(),
                fmt_opt(w.fit.l),
                w.var_omega().to_string(),
                w.fit.r2.to_string(),
                w.flag(),
            ]
        }),
    )?;
    let mut counts = Vec::new();
    for &m in &a.thresholds {
        for c in daily_large_count(series, m).origin("window_scan")? {
            counts.push([
                c.date.to_string(),
                m.to_string(),
                c.count.to_string(),
                c.observed.to_string(),
            ]);
        }
    }
    write_rows(
        &out.join("daily_counts.csv"),
        &["date", "threshold", "count", "observed"],
        counts,
    )?;
    Ok(Manifest {
        config: config_json(a),
        inputs: vec![a.series.input.clone()],
        outputs: vec!["daily_counts.csv".into(), "window_scan.csv".into()],
        ..Manifest::default()
    })
}

/// Same windows as [`mrw_core::window_scan`], fitted on worker threads.
fn scan_parallel(
    series: &Series,
    config: &WindowScanConfig,
) -> mrw_core::Result<Vec<mrw_core::WindowEstimate>> {
    let ends = mrw_core::window::window_ends(series, config)?;
    let threads = std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(ends.len().max(1));
    let chunk = ends.len().div_ceil(threads.max(1)).max(1);
    let mut out = Vec::with_capacity(ends.len());
    std::thread::scope(|scope| {
        let handles: Vec<_> = ends
            .chunks(chunk)
            .map(|part| {
                scope.spawn(move || {
                    part.iter()
                        .map(|&end| mrw_core::window::estimate_at(series, config, end))
                        .collect::<mrw_core::Result<Vec<_>>>()
                })
            })
            .collect();
        for h in handles {
            out.push(h.join().expect("window worker panicked"));
        }
    });
    let mut estimates = Vec::with_capacity(ends.len());
    for part in out {
        estimates.extend(part?);
    }
    Ok(estimates)
}

fn resolve_position(series: &Series, raw: &str, what: &str) -> Result<usize, Failure> {
    if let Ok(i) = raw.parse::<usize>() {
        return Ok(i);
    }
    let ts = io::parse_timestamp(raw).ok_or_else(|| {
        Failure::new(
            "cli",
            format!("{what} `{raw}` is neither an index nor a timestamp"),
        )
    })?;
    let stamps = series.calendar().timestamps();
    let offset = series.offset();
    let pos = stamps[offset..offset + series.len()].partition_point(|t| *t < ts);
    Ok(pos)
}

fn omori(a: &OmoriArgs, out: &Path) -> Result<Manifest, Failure> {
    let loaded = load(&a.series)?;
    let series = &loaded.series;
    let from = match &a.from {
        Some(raw) => resolve_position(series, raw, "from")?,
        None => 0,
    };
    let to = match &a.to {
        Some(raw) => resolve_position(series, raw, "to")?,
        None => series.len(),
    };
    let origin = find_main_shock(series, from..to).origin("event_analysis")?;
    let mut fit_file = TextWriter::create(&out.join("omori_fit.txt")).origin("cli")?;
    let mut outputs = vec!["omori_fit.txt".to_string()];
    let frames = std::thread::scope(|scope| {
        let handles: Vec<_> = a
            .thresholds
            .iter()
            .map(|&m| scope.spawn(move || cumulative_frequency(series, origin, m, None)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("threshold worker panicked"))
            .collect::<Vec<_>>()
    });
    for (&m, frame) in a.thresholds.iter().zip(frames) {
        let frame: ShockFrame = frame.origin("event_analysis")?;
        let fit = fit_omori(&frame).origin("event_analysis")?;
        let name = format!("omori_{m}.csv");
        let rows = frame
            .cumulative_before()
            .into_iter()
            .map(|(t, n)| ["before".to_string(), t.to_string(), n.to_string()])
            .chain(
                frame
                    .cumulative_after()
                    .into_iter()
                    .map(|(t, n)| ["after".to_string(), t.to_string(), n.to_string()]),
            );
        write_rows(&out.join(&name), &["side", "t_minutes", "N"], rows)?;
        outputs.push(name);

        let side = |s: &Option<mrw_core::events::SideFit>| match s {
            Some(s) => (
                s.beta.to_string(),
                s.se.to_string(),
                s.r2.to_string(),
                s.events.to_string(),
            ),
            None => (String::new(), String::new(), String::new(), String::new()),
        };
        let (bb, bb_se, bb_r2, _) = side(&fit.before);
        let (ba, ba_se, ba_r2, _) = side(&fit.after);
        let ordering = fit
            .ordering_holds()
            .map_or_else(|| "undetermined".to_string(), |b| b.to_string());
        fit_file
            .line(format!(
                "threshold={m} sigma_m={} shock={} beta_b={bb} beta_b_se={bb_se} r2_b={bb_r2} \
                 events_b={} beta_a={ba} beta_a_se={ba_se} r2_a={ba_r2} events_a={} ordering={ordering}",
                frame.sigma_m,
                frame
                    .origin_time
                    .map_or_else(|| frame.origin.to_string(), format_timestamp),
                frame.before.len(),
                frame.after.len(),
            ))
            .origin("cli")?;
    }
    fit_file.finish().origin("cli")?;
    Ok(Manifest {
        config: config_json(a),
        inputs: vec![a.series.input.clone()],
        outputs,
        ..Manifest::default()
    })
}

fn news_fit(a: &NewsFitArgs, out: &Path) -> Result<Manifest, Failure> {
    require_file(&a.trajectory)?;
    require_file(&a.news)?;
    let parse = |raw: &str, what: &str| {
        io::parse_date(raw)
            .ok_or_else(|| Failure::new("cli", format!("{what} `{raw}` is not a YYYY-MM-DD date")))
    };
    let window = (parse(&a.start, "start")?, parse(&a.end, "end")?);
    // Windows without a fit carry Var(omega) = 0 and cannot enter a log-log fit.
    let mut trajectory = io::read_trajectory(&a.trajectory).origin("news_coupling")?;
    let total_windows = trajectory.len();
    trajectory.retain(|(_, v)| *v > 0.0);
    let skipped = total_windows - trajectory.len();
    let raw = io::read_news(&a.news).origin("news_coupling")?;
    let news = if a.deseasonalize {
        deseasonalize_news(&raw).origin("news_coupling")?
    } else {
        raw
    };
    let fit = fit_news_coupling_pairs(&trajectory, &news, window).origin("news_coupling")?;
    write_rows(
        &out.join("news_adjusted.csv"),
        &["date", "raw", "adjusted", "cumulative"],
        (0..news.len()).map(|i| {
            [
                news.dates[i].to_string(),
                news.raw[i].to_string(),
                news.adjusted[i].to_string(),
                news.cumulative[i].to_string(),
            ]
        }),
    )?;
    write_rows(
        &out.join("news_joined.csv"),
        &["date", "var_omega", "cum_news"],
        fit.joined
            .iter()
            .map(|(d, v, c)| [d.to_string(), v.to_string(), c.to_string()]),
    )?;
    io::write_report(
        &out.join("news_fit.txt"),
        &[
            ("alpha", fit.alpha.to_string()),
            ("alpha_se", fit.alpha_se.to_string()),
            ("prefactor", fit.prefactor.to_string()),
            ("r2", fit.r2.to_string()),
            ("start", fit.start.to_string()),
            ("end", fit.end.to_string()),
            ("points", fit.joined.len().to_string()),
            ("skipped_windows", skipped.to_string()),
            ("deseasonalized", a.deseasonalize.to_string()),
        ],
    )
    .origin("cli")?;
    Ok(Manifest {
        config: config_json(a),
        inputs: vec![a.trajectory.clone(), a.news.clone()],
        outputs: vec![
            "news_adjusted.csv".into(),
            "news_fit.txt".into(),
            "news_joined.csv".into(),
        ],
        ..Manifest::default()
    })
}
