//! Spillover index over sliding windows.

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::connectedness::{build_table, fevd_of_fit, ConnectednessTable, SigmaScaling};
use crate::data_ingest::Panel;
use crate::decomposition::{decompose_panel, DecompositionError, TrendSpec};
use crate::var_engine::{estimate_var, VarSpec};

#[derive(Debug, Error)]
pub enum RollingError {
    #[error("window of {window} exceeds the {len} available observations")]
    WindowTooLong { window: usize, len: usize },

    #[error("window {window} too short for {m} variables with {lags} lags (need more than {required})")]
    WindowTooShort {
        window: usize,
        m: usize,
        lags: usize,
        required: usize,
    },

    #[error("step and horizon must be at least 1")]
    BadStride,

    #[error("all {0} windows failed")]
    AllWindowsFailed(usize),

    #[error(transparent)]
    Decomposition(#[from] DecompositionError),
}

/// Which component set an analysis runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShockSide {
    Positive,
    Negative,
    Symmetric,
}

impl ShockSide {
    pub const ALL: [ShockSide; 3] = [ShockSide::Positive, ShockSide::Negative, ShockSide::Symmetric];

    /// Short tag used in file names.
    pub fn tag(&self) -> &'static str {
        match self {
            ShockSide::Positive => "pos",
            ShockSide::Negative => "neg",
            ShockSide::Symmetric => "sym",
        }
    }

    pub fn title(&self) -> &'static str {
        match self {
            ShockSide::Positive => "Positive Shocks",
            ShockSide::Negative => "Negative Shocks",
            ShockSide::Symmetric => "Symmetric",
        }
    }

    /// The panel this side analyzes: raw for symmetric, otherwise one
    /// component set of the decomposition of `panel`.
    pub fn select(&self, panel: &Panel, trend: TrendSpec) -> Result<Panel, DecompositionError> {
        Ok(match self {
            ShockSide::Symmetric => panel.clone(),
            ShockSide::Positive => decompose_panel(panel, trend)?.plus_panel,
            ShockSide::Negative => decompose_panel(panel, trend)?.minus_panel,
        })
    }
}

impl fmt::Display for ShockSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for ShockSide {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "pos" | "positive" | "plus" => Ok(ShockSide::Positive),
            "neg" | "negative" | "minus" => Ok(ShockSide::Negative),
            "sym" | "symmetric" => Ok(ShockSide::Symmetric),
            other => Err(format!("unknown shock side `{other}` (pos|neg|sym)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RollingConfig {
    pub window: usize,
    pub step: usize,
    pub horizon: usize,
    pub var_spec: VarSpec,
    pub trend_spec: TrendSpec,
    pub shock_side: ShockSide,
    #[serde(default)]
    pub sigma_scaling: SigmaScaling,
    /// Re-run the decomposition inside every window instead of once on the
    /// full sample.
    #[serde(default)]
    pub decompose_per_window: bool,
}

impl RollingConfig {
    pub fn new(window: usize, horizon: usize, var_spec: VarSpec, shock_side: ShockSide) -> Self {
        Self {
            window,
            step: 1,
            horizon,
            var_spec,
            trend_spec: TrendSpec::default(),
            shock_side,
            sigma_scaling: SigmaScaling::default(),
            decompose_per_window: false,
        }
    }

    fn validate(&self, m: usize, len: usize) -> Result<(), RollingError> {
        if self.step == 0 || self.horizon == 0 {
            return Err(RollingError::BadStride);
        }
        let lags = self.var_spec.p_effective();
        let required = m * lags + 10;
        if self.window <= required {
            return Err(RollingError::WindowTooShort {
                window: self.window,
                m,
                lags,
                required,
            });
        }
        if self.window > len {
            return Err(RollingError::WindowTooLong {
                window: self.window,
                len,
            });
        }
        Ok(())
    }
}

/// A window whose estimation failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowGap {
    pub position: usize,
    pub end_date: NaiveDate,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpilloverSeries {
    pub side: ShockSide,
    pub window_end_dates: Vec<NaiveDate>,
    /// Percent; `None` marks a failed window listed in `gaps`.
    pub index_values: Vec<Option<f64>>,
    pub gaps: Vec<WindowGap>,
}

impl SpilloverSeries {
    pub fn len(&self) -> usize {
        self.index_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index_values.is_empty()
    }

    /// `date,index` lines; failed windows leave the value empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("date,index\n");
        for (d, v) in self.window_end_dates.iter().zip(&self.index_values) {
            match v {
                Some(v) => out.push_str(&format!("{},{}\n", d.format("%Y-%m-%d"), v)),
                None => out.push_str(&format!("{},\n", d.format("%Y-%m-%d"))),
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RollingTables {
    pub side: ShockSide,
    pub window_end_dates: Vec<NaiveDate>,
    pub tables: Vec<Option<ConnectednessTable>>,
    pub gaps: Vec<WindowGap>,
}

impl RollingTables {
    pub fn index_series(&self) -> SpilloverSeries {
        SpilloverSeries {
            side: self.side,
            window_end_dates: self.window_end_dates.clone(),
            index_values: self
                .tables
                .iter()
                .map(|t| t.as_ref().map(|t| t.total_spillover))
                .collect(),
            gaps: self.gaps.clone(),
        }
    }
}

pub fn window_count(len: usize, window: usize, step: usize) -> usize {
    if window > len || step == 0 {
        0
    } else {
        (len - window) / step + 1
    }
}

fn window_table(
    source: &Panel,
    start: usize,
    cfg: &RollingConfig,
) -> Result<ConnectednessTable, String> {
    let slice = source.slice(start, start + cfg.window);
    let data = if cfg.decompose_per_window {
        cfg.shock_side
            .select(&slice, cfg.trend_spec)
            .map_err(|e| e.to_string())?
    } else {
        slice
    };
    let fit = estimate_var(&data, cfg.var_spec).map_err(|e| e.to_string())?;
    let res = fevd_of_fit(&fit, cfg.horizon, cfg.sigma_scaling).map_err(|e| e.to_string())?;
    build_table(&res.normalized, data.names()).map_err(|e| e.to_string())
}

/// Full connectedness table for every window.
///
/// `panel` is the raw panel; for the positive and negative sides it is
/// decomposed once over the full sample (unless `decompose_per_window`).
pub fn rolling_tables(panel: &Panel, cfg: &RollingConfig) -> Result<RollingTables, RollingError> {
    cfg.validate(panel.m(), panel.len())?;
    let source = if cfg.decompose_per_window {
        panel.clone()
    } else {
        cfg.shock_side.select(panel, cfg.trend_spec)?
    };
    let count = window_count(panel.len(), cfg.window, cfg.step);
    let mut dates = Vec::with_capacity(count);
    let mut tables = Vec::with_capacity(count);
    let mut gaps = Vec::new();
    for w in 0..count {
        let start = w * cfg.step;
        let end_date = panel.dates()[start + cfg.window - 1];
        dates.push(end_date);
        match window_table(&source, start, cfg) {
            Ok(t) => tables.push(Some(t)),
            Err(reason) => {
                log::warn!("window ending {end_date} failed: {reason}");
                gaps.push(WindowGap {
                    position: w,
                    end_date,
                    reason,
                });
                tables.push(None);
            }
        }
    }
    if gaps.len() == count {
        return Err(RollingError::AllWindowsFailed(count));
    }
    Ok(RollingTables {
        side: cfg.shock_side,
        window_end_dates: dates,
        tables,
        gaps,
    })
}

pub fn rolling_index(panel: &Panel, cfg: &RollingConfig) -> Result<SpilloverSeries, RollingError> {
    Ok(rolling_tables(panel, cfg)?.index_series())
}
