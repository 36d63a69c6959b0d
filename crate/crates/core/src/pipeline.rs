//! End-to-end run: ingest, decompose, estimate, tabulate, roll, and record a
//! manifest that is sufficient to repeat the run.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::connectedness::{
    build_table, directional, fevd_of_fit, net_measures, Directional, NetMeasures, SigmaScaling,
};
use crate::data_ingest::{align, load_csv, log_transform, IngestError, Panel};
use crate::decomposition::TrendSpec;
use crate::report::{render_table, write_plot, PlotOptions, TableFormat};
use crate::rolling::{rolling_index, RollingConfig, ShockSide};
use crate::var_engine::{estimate_var, select_lag, LagCriterion, VarSpec};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("no input series given")]
    EmptyInput,

    #[error("ingest failed: {0}")]
    Ingest(String),

    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvInput {
    pub path: String,
    #[serde(default = "default_date_column")]
    pub date_column: String,
    /// Empty selects every non-date column.
    #[serde(default)]
    pub columns: Vec<String>,
}

fn default_date_column() -> String {
    "date".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FredInput {
    pub series_ids: Vec<String>,
    pub start: Option<NaiveDate>,
    pub end: Option<NaiveDate>,
    pub cache_dir: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum LagChoice {
    Fixed { p: usize },
    Select { criterion: LagCriterion, max_lags: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RollingOptions {
    pub window: usize,
    pub step: usize,
    #[serde(default)]
    pub decompose_per_window: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default)]
    pub csv_inputs: Vec<CsvInput>,
    #[serde(default)]
    pub fred: Option<FredInput>,
    pub log_transform: bool,
    pub trend: TrendSpec,
    pub lags: LagChoice,
    pub include_intercept: bool,
    pub ty_extra_lags: usize,
    pub horizon: usize,
    pub sigma_scaling: SigmaScaling,
    pub sides: Vec<ShockSide>,
    pub rolling: Option<RollingOptions>,
    /// Write full-sample tables (`analyze`); off for rolling-only runs.
    pub tables: bool,
    pub formats: Vec<TableFormat>,
    pub plots: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            csv_inputs: Vec::new(),
            fred: None,
            log_transform: true,
            trend: TrendSpec::Drift,
            lags: LagChoice::Fixed { p: 2 },
            include_intercept: true,
            ty_extra_lags: 0,
            horizon: 10,
            sigma_scaling: SigmaScaling::Jj,
            sides: ShockSide::ALL.to_vec(),
            rolling: None,
            tables: true,
            formats: vec![TableFormat::Csv, TableFormat::Json, TableFormat::Markdown],
            plots: true,
        }
    }
}

impl RunConfig {
    fn validate(&self) -> Result<(), PipelineError> {
        if self.sides.is_empty() {
            return Err(PipelineError::Config("no shock side requested".into()));
        }
        if self.horizon == 0 {
            return Err(PipelineError::Config("horizon must be at least 1".into()));
        }
        match self.lags {
            LagChoice::Fixed { p: 0 } | LagChoice::Select { max_lags: 0, .. } => {
                return Err(PipelineError::Config("lag order must be at least 1".into()))
            }
            _ => {}
        }
        if !self.tables && self.rolling.is_none() {
            return Err(PipelineError::Config(
                "nothing to do: tables disabled and no rolling window".into(),
            ));
        }
        if let Some(r) = self.rolling {
            if r.step == 0 || r.window == 0 {
                return Err(PipelineError::Config("window and step must be positive".into()));
            }
        }
        Ok(())
    }

    fn var_spec(&self, p: usize) -> VarSpec {
        VarSpec {
            p,
            include_intercept: self.include_intercept,
            ty_extra_lags: self.ty_extra_lags,
        }
    }
}

/// Values that must not be recorded in the manifest.
#[derive(Debug, Clone, Default)]
pub struct Secrets {
    pub fred_api_key: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub source: String,
    pub sha256: String,
    pub rows: usize,
    pub dropped_rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelSummary {
    pub names: Vec<String>,
    pub rows: usize,
    pub first_date: NaiveDate,
    pub last_date: NaiveDate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageFailure {
    pub side: Option<ShockSide>,
    pub stage: String,
    pub message: String,
}

impl std::fmt::Display for StageFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.side {
            Some(s) => write!(f, "[{s}] {}: {}", self.stage, self.message),
            None => write!(f, "{}: {}", self.stage, self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SideSummary {
    pub side: ShockSide,
    pub completed: bool,
    pub lag: Option<usize>,
    pub spillover_index: Option<f64>,
    pub rolling_windows: Option<usize>,
    pub rolling_gaps: Option<usize>,
    pub files: Vec<String>,
    pub warnings: Vec<String>,
    pub failure: Option<StageFailure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub software: String,
    pub version: String,
    pub config: RunConfig,
    pub inputs: Vec<InputDigest>,
    pub panel: PanelSummary,
    pub sides: Vec<SideSummary>,
    pub warnings: Vec<String>,
}

impl RunManifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, PipelineError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| PipelineError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn completed(&self) -> bool {
        self.sides.iter().all(|s| s.completed)
    }

    pub fn failures(&self) -> Vec<&StageFailure> {
        self.sides.iter().filter_map(|s| s.failure.as_ref()).collect()
    }
}

/// `net_<side>.json` contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetReport {
    #[serde(flatten)]
    pub net: NetMeasures,
    pub directional: Directional,
}

fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Resolves every input into one aligned panel (before any log transform).
pub fn load_inputs(
    cfg: &RunConfig,
    secrets: &Secrets,
) -> Result<(Panel, Vec<InputDigest>), PipelineError> {
    let mut panels = Vec::new();
    let mut digests = Vec::new();
    for input in &cfg.csv_inputs {
        let bytes = std::fs::read(&input.path).map_err(|e| {
            PipelineError::Ingest(format!("cannot read {}: {e}", input.path))
        })?;
        let load = load_csv(&input.path, &input.date_column, &input.columns)
            .map_err(|e| PipelineError::Ingest(format!("{}: {e}", input.path)))?;
        digests.push(InputDigest {
            source: input.path.clone(),
            sha256: hex_digest(&bytes),
            rows: load.panel.len(),
            dropped_rows: load.dropped_rows,
        });
        panels.push(load.panel);
    }
    if let Some(fred) = &cfg.fred {
        for p in fetch_fred_panels(fred, secrets, &mut digests)? {
            panels.push(p);
        }
    }
    let panel = match panels.len() {
        0 => return Err(PipelineError::EmptyInput),
        1 => panels.pop().unwrap(),
        _ => align(&panels).map_err(|e| PipelineError::Ingest(e.to_string()))?,
    };
    if panel.m() < 2 {
        return Err(PipelineError::Ingest(format!(
            "connectedness needs at least 2 series, got {}",
            panel.m()
        )));
    }
    Ok((panel, digests))
}

#[cfg(feature = "fred")]
fn fetch_fred_panels(
    fred: &FredInput,
    secrets: &Secrets,
    digests: &mut Vec<InputDigest>,
) -> Result<Vec<Panel>, PipelineError> {
    use crate::data_ingest::{DateRange, FredClient};
    let client = FredClient::new(
        secrets.fred_api_key.clone().unwrap_or_default(),
        &fred.cache_dir,
    );
    let range = (fred.start.is_some() || fred.end.is_some()).then_some(DateRange {
        start: fred.start,
        end: fred.end,
    });
    let mut out = Vec::new();
    for id in &fred.series_ids {
        let s = client
            .fetch(id, range)
            .map_err(|e| PipelineError::Ingest(format!("FRED {id}: {e}")))?;
        let mut text = String::new();
        for (d, v) in s.dates().iter().zip(s.values()) {
            text.push_str(&format!("{d},{v}\n"));
        }
        digests.push(InputDigest {
            source: format!("fred:{id}"),
            sha256: hex_digest(text.as_bytes()),
            rows: s.len(),
            dropped_rows: 0,
        });
        out.push(s.into_panel());
    }
    Ok(out)
}

#[cfg(not(feature = "fred"))]
fn fetch_fred_panels(
    _fred: &FredInput,
    _secrets: &Secrets,
    _digests: &mut Vec<InputDigest>,
) -> Result<Vec<Panel>, PipelineError> {
    Err(PipelineError::Config(
        "built without FRED support".into(),
    ))
}

struct OutDir<'a> {
    root: &'a Path,
}

impl OutDir<'_> {
    fn write(&self, name: &str, bytes: &[u8]) -> Result<(), PipelineError> {
        let path: PathBuf = self.root.join(name);
        crate::fsutil::write_atomic(&path, bytes).map_err(|source| PipelineError::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

fn fail(side: ShockSide, stage: &str, message: impl ToString) -> StageFailure {
    StageFailure {
        side: Some(side),
        stage: stage.into(),
        message: message.to_string(),
    }
}

fn run_side(
    cfg: &RunConfig,
    panel: &Panel,
    side: ShockSide,
    out: &OutDir<'_>,
    summary: &mut SideSummary,
) -> Result<(), StageFailure> {
    let data = side
        .select(panel, cfg.trend)
        .map_err(|e| fail(side, "decompose", e))?;
    let p = match cfg.lags {
        LagChoice::Fixed { p } => p,
        LagChoice::Select {
            criterion,
            max_lags,
        } => select_lag(&data, max_lags, criterion).map_err(|e| fail(side, "lag-select", e))?,
    };
    summary.lag = Some(p);
    let spec = cfg.var_spec(p);

    if cfg.tables {
        let fit = estimate_var(&data, spec).map_err(|e| fail(side, "estimate", e))?;
        summary.warnings.extend(fit.warnings.iter().cloned());
        let res = fevd_of_fit(&fit, cfg.horizon, cfg.sigma_scaling)
            .map_err(|e| fail(side, "fevd", e))?;
        let table = build_table(&res.normalized, data.names()).map_err(|e| fail(side, "table", e))?;
        summary.spillover_index = Some(table.total_spillover);

        for &format in &cfg.formats {
            let name = format!("table_{}.{}", side.tag(), format.extension());
            let text = render_table(&table, format).map_err(|e| fail(side, "render", e))?;
            out.write(&name, text.as_bytes())
                .map_err(|e| fail(side, "write", e))?;
            summary.files.push(name);
        }
        let net = NetReport {
            net: net_measures(&table),
            directional: directional(&table),
        };
        let name = format!("net_{}.json", side.tag());
        let text = serde_json::to_string_pretty(&net).map_err(|e| fail(side, "render", e))? + "\n";
        out.write(&name, text.as_bytes())
            .map_err(|e| fail(side, "write", e))?;
        summary.files.push(name);

        let name = format!("var_{}.json", side.tag());
        let text = serde_json::to_string_pretty(&fit.export()).map_err(|e| fail(side, "render", e))? + "\n";
        out.write(&name, text.as_bytes())
            .map_err(|e| fail(side, "write", e))?;
        summary.files.push(name);
    }

    if let Some(r) = cfg.rolling {
        let rcfg = RollingConfig {
            window: r.window,
            step: r.step,
            horizon: cfg.horizon,
            var_spec: spec,
            trend_spec: cfg.trend,
            shock_side: side,
            sigma_scaling: cfg.sigma_scaling,
            decompose_per_window: r.decompose_per_window,
        };
        let series = rolling_index(panel, &rcfg).map_err(|e| fail(side, "rolling", e))?;
        summary.rolling_windows = Some(series.len());
        summary.rolling_gaps = Some(series.gaps.len());
        summary.warnings.extend(
            series
                .gaps
                .iter()
                .map(|g| format!("window ending {} failed: {}", g.end_date, g.reason)),
        );
        let name = format!("rolling_{}.csv", side.tag());
        out.write(&name, series.to_csv().as_bytes())
            .map_err(|e| fail(side, "write", e))?;
        summary.files.push(name);
        if cfg.plots {
            let name = format!("rolling_{}.svg", side.tag());
            let opts = PlotOptions {
                title: format!(
                    "Spillover (Connectedness) Index, {} ({} obs windows, {} step horizon)",
                    side.title(),
                    r.window,
                    cfg.horizon
                ),
                ..PlotOptions::default()
            };
            write_plot(&series, &opts, out.root.join(&name)).map_err(|e| fail(side, "plot", e))?;
            summary.files.push(name);
        }
    }
    Ok(())
}

/// Runs every requested side and writes `manifest.json` last.
///
/// Configuration and input errors abort before any file is created. A
/// failing side is recorded in the manifest and the remaining sides still
/// run; check [`RunManifest::completed`].
pub fn run_pipeline(
    cfg: &RunConfig,
    out_dir: impl AsRef<Path>,
    secrets: &Secrets,
) -> Result<RunManifest, PipelineError> {
    cfg.validate()?;
    let (raw, inputs) = load_inputs(cfg, secrets)?;
    let panel = if cfg.log_transform {
        log_transform(&raw).map_err(|e: IngestError| PipelineError::Ingest(e.to_string()))?
    } else {
        raw
    };

    let root = out_dir.as_ref();
    std::fs::create_dir_all(root).map_err(|source| PipelineError::Io {
        path: root.display().to_string(),
        source,
    })?;
    let out = OutDir { root };

    let mut sides = Vec::with_capacity(cfg.sides.len());
    for &side in &cfg.sides {
        let mut summary = SideSummary {
            side,
            completed: false,
            lag: None,
            spillover_index: None,
            rolling_windows: None,
            rolling_gaps: None,
            files: Vec::new(),
            warnings: Vec::new(),
            failure: None,
        };
        match run_side(cfg, &panel, side, &out, &mut summary) {
            Ok(()) => summary.completed = true,
            Err(f) => {
                log::error!("{f}");
                summary.failure = Some(f);
            }
        }
        sides.push(summary);
    }

    let warnings = sides
        .iter()
        .flat_map(|s| s.warnings.iter().map(move |w| format!("[{}] {w}", s.side)))
        .collect();
    let manifest = RunManifest {
        software: "aspill".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: cfg.clone(),
        inputs,
        panel: PanelSummary {
            names: panel.names().to_vec(),
            rows: panel.len(),
            first_date: panel.dates()[0],
            last_date: *panel.dates().last().unwrap(),
        },
        sides,
        warnings,
    };
    let text = serde_json::to_string_pretty(&manifest)? + "\n";
    out.write("manifest.json", text.as_bytes())?;
    Ok(manifest)
}
