//! Cumulative positive/negative partial-sum decomposition of integrated series.
//!
//! A series is modelled as `G_t = c + d·t + G_{t-1} + v_t`. The drift `c` and
//! trend slope `d` are fitted by least squares on first differences, the
//! residual shocks are split by sign, and each component carries half of the
//! deterministic path `c·t + d·t(t+1)/2 + G_0` plus the running sum of its
//! signed shocks. The two components add back to the original series.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data_ingest::{IngestError, Panel, Series};

#[derive(Debug, Error)]
pub enum DecompositionError {
    #[error("series needs at least {required} observations, got {actual}")]
    TooShort { required: usize, actual: usize },

    #[error("trend design matrix is singular")]
    SingularDesign,

    #[error("decomposition failed for {}", .0.iter().map(|(n, e)| format!("`{n}`: {e}")).collect::<Vec<_>>().join("; "))]
    Panel(Vec<(String, DecompositionError)>),

    #[error(transparent)]
    Ingest(#[from] IngestError),
}

/// Deterministic terms included in the first-difference regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrendSpec {
    /// No drift, no trend: `c = d = 0`.
    None,
    /// Drift only: `d = 0`.
    #[default]
    Drift,
    /// Drift and linear trend.
    #[serde(rename = "trend")]
    DriftAndTrend,
}

impl fmt::Display for TrendSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TrendSpec::None => "none",
            TrendSpec::Drift => "drift",
            TrendSpec::DriftAndTrend => "trend",
        })
    }
}

impl FromStr for TrendSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(TrendSpec::None),
            "drift" => Ok(TrendSpec::Drift),
            "trend" | "drift-and-trend" => Ok(TrendSpec::DriftAndTrend),
            other => Err(format!("unknown trend spec `{other}` (none|drift|trend)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendFit {
    pub spec: TrendSpec,
    /// Drift per period.
    pub c: f64,
    /// Trend slope per period squared.
    pub d: f64,
    /// First observation.
    pub g0: f64,
    /// Shocks `v_1..v_{T-1}`.
    pub residuals: Vec<f64>,
}

impl TrendFit {
    /// `c·t + d·t(t+1)/2 + G_0`.
    pub fn deterministic(&self, t: usize) -> f64 {
        let t = t as f64;
        self.c * t + self.d * t * (t + 1.0) / 2.0 + self.g0
    }
}

pub const MIN_TREND_OBS: usize = 4;

pub fn fit_trend(values: &[f64], spec: TrendSpec) -> Result<TrendFit, DecompositionError> {
    if values.len() < MIN_TREND_OBS {
        return Err(DecompositionError::TooShort {
            required: MIN_TREND_OBS,
            actual: values.len(),
        });
    }
    let diffs: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let n = diffs.len() as f64;
    let (c, d) = match spec {
        TrendSpec::None => (0.0, 0.0),
        TrendSpec::Drift => (diffs.iter().sum::<f64>() / n, 0.0),
        TrendSpec::DriftAndTrend => {
            // centred regressor: ΔG_t on {1, t}, t = 1..T-1
            let t_mean = (n + 1.0) / 2.0;
            let y_mean = diffs.iter().sum::<f64>() / n;
            let (mut sxy, mut sxx) = (0.0, 0.0);
            for (k, y) in diffs.iter().enumerate() {
                let x = (k + 1) as f64 - t_mean;
                sxy += x * (y - y_mean);
                sxx += x * x;
            }
            if sxx <= 0.0 {
                return Err(DecompositionError::SingularDesign);
            }
            let d = sxy / sxx;
            (y_mean - d * t_mean, d)
        }
    };
    let residuals = diffs
        .iter()
        .enumerate()
        .map(|(k, y)| y - c - d * (k + 1) as f64)
        .collect();
    Ok(TrendFit {
        spec,
        c,
        d,
        g0: values[0],
        residuals,
    })
}

/// Splits shocks into `max(v, 0)` and `min(v, 0)`.
pub fn split_shocks(residuals: &[f64]) -> (Vec<f64>, Vec<f64>) {
    residuals
        .iter()
        .map(|&v| (v.max(0.0), v.min(0.0)))
        .unzip()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentPair {
    pub plus: Series,
    pub minus: Series,
    pub fit: TrendFit,
}

impl ComponentPair {
    /// `plus[t]` minus its deterministic half: the running sum of positive shocks.
    pub fn positive_shock_path(&self) -> Vec<f64> {
        self.plus
            .values()
            .iter()
            .enumerate()
            .map(|(t, v)| v - self.fit.deterministic(t) / 2.0)
            .collect()
    }

    pub fn negative_shock_path(&self) -> Vec<f64> {
        self.minus
            .values()
            .iter()
            .enumerate()
            .map(|(t, v)| v - self.fit.deterministic(t) / 2.0)
            .collect()
    }
}

/// Positive (`_pos`) and negative (`_neg`) cumulative components of `series`.
pub fn build_components(
    series: &Series,
    spec: TrendSpec,
) -> Result<ComponentPair, DecompositionError> {
    let fit = fit_trend(series.values(), spec)?;
    let (v_plus, v_minus) = split_shocks(&fit.residuals);
    let len = series.len();
    let mut plus = Vec::with_capacity(len);
    let mut minus = Vec::with_capacity(len);
    let (mut sum_plus, mut sum_minus) = (0.0, 0.0);
    for t in 0..len {
        if t > 0 {
            sum_plus += v_plus[t - 1];
            sum_minus += v_minus[t - 1];
        }
        let half = fit.deterministic(t) / 2.0;
        plus.push(half + sum_plus);
        minus.push(half + sum_minus);
    }
    let dates = series.dates().to_vec();
    Ok(ComponentPair {
        plus: Series::new(format!("{}_pos", series.name()), dates.clone(), plus)?,
        minus: Series::new(format!("{}_neg", series.name()), dates, minus)?,
        fit,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecomposedPanel {
    pub plus_panel: Panel,
    pub minus_panel: Panel,
    pub fits: Vec<TrendFit>,
}

impl DecomposedPanel {
    /// All positive columns followed by all negative columns.
    pub fn combined(&self) -> Panel {
        let mut names = self.plus_panel.names().to_vec();
        names.extend(self.minus_panel.names().iter().cloned());
        let mut columns = self.plus_panel.columns().to_vec();
        columns.extend(self.minus_panel.columns().iter().cloned());
        Panel::new(self.plus_panel.dates().to_vec(), names, columns)
            .expect("components share the source grid")
    }
}

pub fn decompose_panel(
    panel: &Panel,
    spec: TrendSpec,
) -> Result<DecomposedPanel, DecompositionError> {
    let mut plus = Vec::with_capacity(panel.m());
    let mut minus = Vec::with_capacity(panel.m());
    let mut fits = Vec::with_capacity(panel.m());
    let mut failures = Vec::new();
    for i in 0..panel.m() {
        match build_components(&panel.series(i), spec) {
            Ok(pair) => {
                plus.push(pair.plus);
                minus.push(pair.minus);
                fits.push(pair.fit);
            }
            Err(e) => failures.push((panel.names()[i].clone(), e)),
        }
    }
    if !failures.is_empty() {
        return Err(DecompositionError::Panel(failures));
    }
    Ok(DecomposedPanel {
        plus_panel: Panel::from_series(plus)?,
        minus_panel: Panel::from_series(minus)?,
        fits,
    })
}
