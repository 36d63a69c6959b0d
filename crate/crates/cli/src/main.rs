use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use aspill::data_ingest::{load_csv, log_transform, write_csv, Panel};
use aspill::decomposition::{decompose_panel, TrendSpec};
use aspill::pipeline::{
    run_pipeline, CsvInput, FredInput, LagChoice, RollingOptions, RunConfig, RunManifest, Secrets,
};
use aspill::report::{parse_rolling_csv, parse_table_csv, render_table, write_plot, PlotOptions, TableFormat};
use aspill::simulate::{monthly_dates, AsymmetricSystem};
use aspill::{ConnectednessTable, LagCriterion, ShockSide, SigmaScaling};
use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;

const DIRECTIONAL_HELP: &str = "\
Directional spillovers (net_<side>.json, `directional`) follow the usual
connectedness convention: from_pct[i] = 100 * sum_{j != i} share[i][j] / m is
what variable i receives, to_pct[i] = 100 * sum_{j != i} share[j][i] / m is
what it transmits. A literal reading with identical numerator and
denominator would be 100 for every variable and is not used.
net_directional[i] = to_others[i] - from_others[i] (transmitted minus
received).

--sigma-scaling jj (default) divides squared impacts by the shocked
variable's variance, which makes horizon-0 shares equal squared
correlations. --sigma-scaling ii uses the responding variable's variance.";

#[derive(Parser)]
#[command(name = "aspill", version, about = "Asymmetric volatility connectedness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Split series into cumulative positive and negative components.
    Decompose(DecomposeArgs),
    /// Full-sample connectedness tables per shock side (plus rolling index with --window).
    #[command(after_long_help = DIRECTIONAL_HELP)]
    Analyze(AnalyzeArgs),
    /// Rolling-window spillover index per shock side.
    Roll(RollArgs),
    /// Download FRED series into the cache and write an aligned CSV panel.
    Fetch(FetchArgs),
    /// Re-render a saved table or rolling series.
    Report(ReportArgs),
    /// Write a seeded synthetic panel with sign-dependent transmission.
    Simulate(SimulateArgs),
}

#[derive(Args, Clone)]
struct InputArgs {
    /// CSV input file (repeatable; files are inner-joined on dates).
    #[arg(long = "input", short = 'i')]
    inputs: Vec<PathBuf>,
    #[arg(long, default_value = "date")]
    date_column: String,
    /// Comma-separated value columns, applied to every input (default: all).
    #[arg(long, value_delimiter = ',')]
    columns: Vec<String>,
    /// Comma-separated FRED series ids.
    #[arg(long, value_delimiter = ',')]
    fred: Vec<String>,
    #[arg(long, value_parser = parse_date)]
    start: Option<NaiveDate>,
    #[arg(long, value_parser = parse_date)]
    end: Option<NaiveDate>,
    #[arg(long, env = "FRED_API_KEY", hide_env_values = true)]
    api_key: Option<String>,
    #[arg(long, default_value = aspill::data_ingest::DEFAULT_CACHE_DIR)]
    cache_dir: String,
    /// Use values as given instead of natural logs.
    #[arg(long)]
    no_log: bool,
}

#[derive(Args, Clone)]
struct ModelArgs {
    /// Deterministic part of the decomposition: none, drift or trend.
    #[arg(long, default_value = "drift")]
    trend: TrendSpec,
    /// Fixed VAR lag order (ignored with --lag-select).
    #[arg(long, default_value_t = 2)]
    lags: usize,
    /// Choose the lag order by information criterion: hjc, aic, sic or hqc.
    #[arg(long)]
    lag_select: Option<LagCriterion>,
    #[arg(long, default_value_t = 8)]
    max_lags: usize,
    /// Estimate one extra unrestricted lag that is left out of the MA recursion.
    #[arg(long)]
    ty_augment: bool,
    #[arg(long)]
    no_intercept: bool,
    /// Forecast horizon n (MA terms 0..=n).
    #[arg(long, default_value_t = 10)]
    horizon: usize,
    /// Comma-separated shock sides: pos, neg, sym.
    #[arg(long, value_delimiter = ',', default_value = "pos,neg,sym")]
    sides: Vec<ShockSide>,
    /// Variance used to scale squared impacts: jj or ii.
    #[arg(long, default_value = "jj")]
    sigma_scaling: SigmaScaling,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Also compute a rolling index with this window length.
    #[arg(long)]
    window: Option<usize>,
    #[arg(long, default_value_t = 1)]
    step: usize,
    #[arg(long)]
    decompose_per_window: bool,
    /// Comma-separated table formats: csv, json, md.
    #[arg(long, value_delimiter = ',', default_value = "csv,json,md")]
    formats: Vec<TableFormat>,
    #[arg(long)]
    no_plots: bool,
    /// Re-run the configuration recorded in a manifest (other model/input flags are ignored).
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long, short = 'o', default_value = "./results")]
    out: PathBuf,
}

#[derive(Args)]
struct RollArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 200)]
    window: usize,
    #[arg(long, default_value_t = 1)]
    step: usize,
    #[arg(long)]
    decompose_per_window: bool,
    #[arg(long)]
    no_plots: bool,
    #[arg(long, short = 'o', default_value = "./results")]
    out: PathBuf,
}

#[derive(Args)]
struct DecomposeArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value = "drift")]
    trend: TrendSpec,
    /// Output CSV with `_pos` and `_neg` columns.
    #[arg(long, short = 'o')]
    out: PathBuf,
}

#[derive(Args)]
struct FetchArgs {
    /// Comma-separated FRED series ids.
    #[arg(long, value_delimiter = ',', required = true)]
    series: Vec<String>,
    #[arg(long, value_parser = parse_date)]
    start: Option<NaiveDate>,
    #[arg(long, value_parser = parse_date)]
    end: Option<NaiveDate>,
    #[arg(long, env = "FRED_API_KEY", hide_env_values = true)]
    api_key: Option<String>,
    #[arg(long, default_value = aspill::data_ingest::DEFAULT_CACHE_DIR)]
    cache_dir: String,
    #[arg(long, short = 'o')]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Saved table (`.json` or `.csv`).
    #[arg(long, conflicts_with = "rolling")]
    table: Option<PathBuf>,
    #[arg(long, default_value = "md")]
    format: TableFormat,
    /// Saved rolling series (`date,index` CSV) to plot as SVG.
    #[arg(long)]
    rolling: Option<PathBuf>,
    #[arg(long)]
    title: Option<String>,
    #[arg(long, default_value_t = 0.0)]
    y_min: f64,
    #[arg(long, default_value_t = 100.0)]
    y_max: f64,
    /// Output file (stdout when omitted for tables; required for plots).
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 300)]
    length: usize,
    #[arg(long, default_value_t = 3)]
    series: usize,
    /// Transmission of the leader's positive shocks.
    #[arg(long, default_value_t = 0.2)]
    up: f64,
    /// Transmission of the leader's negative shocks.
    #[arg(long, default_value_t = 0.9)]
    down: f64,
    #[arg(long, default_value = "1999-01-01", value_parser = parse_date)]
    start: NaiveDate,
    #[arg(long, short = 'o')]
    out: PathBuf,
}

fn parse_date(s: &str) -> Result<NaiveDate, String> {
    aspill::data_ingest::parse_date(s).ok_or_else(|| format!("bad date `{s}` (YYYY-MM-DD or YYYY-MM)"))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Decompose(a) => decompose(a).map(|_| ExitCode::SUCCESS),
        Command::Analyze(a) => analyze(a),
        Command::Roll(a) => roll(a),
        Command::Fetch(a) => fetch(a).map(|_| ExitCode::SUCCESS),
        Command::Report(a) => report(a).map(|_| ExitCode::SUCCESS),
        Command::Simulate(a) => simulate(a).map(|_| ExitCode::SUCCESS),
    }
}

fn base_config(input: &InputArgs, model: &ModelArgs) -> RunConfig {
    let csv_inputs = input
        .inputs
        .iter()
        .map(|p| CsvInput {
            path: p.display().to_string(),
            date_column: input.date_column.clone(),
            columns: input.columns.clone(),
        })
        .collect();
    let fred = (!input.fred.is_empty()).then(|| FredInput {
        series_ids: input.fred.clone(),
        start: input.start,
        end: input.end,
        cache_dir: input.cache_dir.clone(),
    });
    let lags = match model.lag_select {
        Some(criterion) => LagChoice::Select {
            criterion,
            max_lags: model.max_lags,
        },
        None => LagChoice::Fixed { p: model.lags },
    };
    RunConfig {
        csv_inputs,
        fred,
        log_transform: !input.no_log,
        trend: model.trend,
        lags,
        include_intercept: !model.no_intercept,
        ty_extra_lags: usize::from(model.ty_augment),
        horizon: model.horizon,
        sigma_scaling: model.sigma_scaling,
        sides: model.sides.clone(),
        ..RunConfig::default()
    }
}

fn secrets(input: &InputArgs) -> Secrets {
    Secrets {
        fred_api_key: input.api_key.clone(),
    }
}

fn finish(manifest: &RunManifest, out: &Path) -> ExitCode {
    for s in &manifest.sides {
        match (&s.failure, s.spillover_index) {
            (Some(f), _) => eprintln!("failed {f}"),
            (None, Some(index)) => println!(
                "[{}] VAR({}) spillover index {:.2}%",
                s.side,
                s.lag.unwrap_or_default(),
                index
            ),
            (None, None) => println!(
                "[{}] {} rolling windows ({} gaps)",
                s.side,
                s.rolling_windows.unwrap_or_default(),
                s.rolling_gaps.unwrap_or_default()
            ),
        }
    }
    for w in &manifest.warnings {
        eprintln!("warning: {w}");
    }
    println!("wrote {}", out.join("manifest.json").display());
    if manifest.completed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn analyze(a: AnalyzeArgs) -> Result<ExitCode> {
    let cfg = match &a.manifest {
        Some(path) => RunManifest::load(path)
            .with_context(|| format!("loading {}", path.display()))?
            .config,
        None => RunConfig {
            rolling: a.window.map(|window| RollingOptions {
                window,
                step: a.step,
                decompose_per_window: a.decompose_per_window,
            }),
            formats: a.formats.clone(),
            plots: !a.no_plots,
            ..base_config(&a.input, &a.model)
        },
    };
    let manifest = run_pipeline(&cfg, &a.out, &secrets(&a.input))?;
    Ok(finish(&manifest, &a.out))
}

fn roll(a: RollArgs) -> Result<ExitCode> {
    let cfg = RunConfig {
        rolling: Some(RollingOptions {
            window: a.window,
            step: a.step,
            decompose_per_window: a.decompose_per_window,
        }),
        tables: false,
        plots: !a.no_plots,
        ..base_config(&a.input, &a.model)
    };
    let manifest = run_pipeline(&cfg, &a.out, &secrets(&a.input))?;
    Ok(finish(&manifest, &a.out))
}

fn load_panel(input: &InputArgs) -> Result<Panel> {
    let cfg = RunConfig {
        log_transform: false,
        ..base_config(input, &ModelArgs::parse_defaults())
    };
    let (panel, digests) = aspill::pipeline::load_inputs(&cfg, &secrets(input))?;
    for d in digests.iter().filter(|d| d.dropped_rows > 0) {
        eprintln!("{}: dropped {} incomplete rows", d.source, d.dropped_rows);
    }
    Ok(if input.no_log {
        panel
    } else {
        log_transform(&panel)?
    })
}

impl ModelArgs {
    fn parse_defaults() -> Self {
        ModelArgs {
            trend: TrendSpec::Drift,
            lags: 2,
            lag_select: None,
            max_lags: 8,
            ty_augment: false,
            no_intercept: false,
            horizon: 10,
            sides: ShockSide::ALL.to_vec(),
            sigma_scaling: SigmaScaling::Jj,
        }
    }
}

fn decompose(a: DecomposeArgs) -> Result<()> {
    if a.input.inputs.len() == 1 && a.input.fred.is_empty() {
        // a single file may hold just one series, which the pipeline loader rejects
        let load = load_csv(&a.input.inputs[0], &a.input.date_column, &a.input.columns)?;
        let panel = if a.input.no_log {
            load.panel
        } else {
            log_transform(&load.panel)?
        };
        return write_components(&panel, a.trend, &a.out);
    }
    let panel = load_panel(&a.input)?;
    write_components(&panel, a.trend, &a.out)
}

fn write_components(panel: &Panel, trend: TrendSpec, out: &Path) -> Result<()> {
    let parts = decompose_panel(panel, trend)?;
    write_csv(&parts.combined(), out)?;
    for (name, fit) in panel.names().iter().zip(&parts.fits) {
        println!("{name}: c = {:.6e}, d = {:.6e}, G0 = {}", fit.c, fit.d, fit.g0);
    }
    println!("wrote {}", out.display());
    Ok(())
}

fn fetch(a: FetchArgs) -> Result<()> {
    let input = InputArgs {
        inputs: vec![],
        date_column: "date".into(),
        columns: vec![],
        fred: a.series.clone(),
        start: a.start,
        end: a.end,
        api_key: a.api_key.clone(),
        cache_dir: a.cache_dir.clone(),
        no_log: true,
    };
    if a.series.len() == 1 {
        let range = (a.start.is_some() || a.end.is_some()).then_some(aspill::data_ingest::DateRange {
            start: a.start,
            end: a.end,
        });
        let s = aspill::data_ingest::fetch_fred(
            &a.series[0],
            a.api_key.as_deref().unwrap_or(""),
            range,
            Some(Path::new(&a.cache_dir)),
        )?;
        write_csv(&s.into_panel(), &a.out)?;
    } else {
        write_csv(&load_panel(&input)?, &a.out)?;
    }
    println!("wrote {}", a.out.display());
    Ok(())
}

fn report(a: ReportArgs) -> Result<()> {
    if let Some(path) = &a.table {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        let table: ConnectednessTable = if path.extension().is_some_and(|e| e == "csv") {
            parse_table_csv(&text)?
        } else {
            serde_json::from_str(&text)?
        };
        let rendered = render_table(&table, a.format)?;
        match &a.out {
            Some(out) => aspill::write_atomic(out, rendered.as_bytes())?,
            None => print!("{rendered}"),
        }
        return Ok(());
    }
    let Some(path) = &a.rolling else {
        bail!("pass --table or --rolling");
    };
    let Some(out) = &a.out else {
        bail!("--out is required for plots");
    };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let series = parse_rolling_csv(&text, ShockSide::Symmetric)?;
    let mut opts = PlotOptions {
        y_range: (a.y_min, a.y_max),
        ..PlotOptions::default()
    };
    if let Some(t) = &a.title {
        opts.title = t.clone();
    }
    write_plot(&series, &opts, out)?;
    println!("wrote {}", out.display());
    Ok(())
}

fn simulate(a: SimulateArgs) -> Result<()> {
    if a.series < 2 {
        bail!("need at least 2 series");
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(a.seed);
    let sys = AsymmetricSystem {
        m: a.series,
        len: a.length,
        up_coupling: a.up,
        down_coupling: a.down,
        ..AsymmetricSystem::default()
    };
    let logs = sys.simulate(&mut rng, a.start);
    // written as price levels so the default log transform recovers the simulated path
    let levels = Panel::new(
        monthly_dates(a.start, a.length),
        logs.names().to_vec(),
        logs.columns()
            .iter()
            .map(|c| c.iter().map(|v| v.exp()).collect())
            .collect(),
    )?;
    write_csv(&levels, &a.out)?;
    println!("wrote {}", a.out.display());
    Ok(())
}
