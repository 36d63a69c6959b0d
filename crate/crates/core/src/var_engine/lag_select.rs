use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{check_length, design, ols, VarError, VarSpec};
use crate::data_ingest::Panel;

/// Information criterion minimized over candidate lag orders.
///
/// All share the fit term `ln|Γ̂_j|` (maximum-likelihood covariance on the
/// common sample); they differ in the penalty per lag `j`:
///
/// | criterion | penalty |
/// |-----------|---------|
/// | AIC | `2·j·m² / T` |
/// | SIC | `j·m²·ln T / T` |
/// | HQC | `2·j·m²·ln ln T / T` |
/// | HJC | `j·(m²·ln T + 2·m²·ln ln T) / (2T)`, the mean of SIC and HQC |
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LagCriterion {
    #[default]
    Hjc,
    Aic,
    Sic,
    Hqc,
}

impl LagCriterion {
    pub fn penalty(&self, lags: usize, m: usize, t: usize) -> f64 {
        let j = lags as f64;
        let m2 = (m * m) as f64;
        let t = t as f64;
        match self {
            LagCriterion::Aic => 2.0 * j * m2 / t,
            LagCriterion::Sic => j * m2 * t.ln() / t,
            LagCriterion::Hqc => 2.0 * j * m2 * t.ln().ln() / t,
            LagCriterion::Hjc => j * (m2 * t.ln() + 2.0 * m2 * t.ln().ln()) / (2.0 * t),
        }
    }
}

impl fmt::Display for LagCriterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LagCriterion::Hjc => "hjc",
            LagCriterion::Aic => "aic",
            LagCriterion::Sic => "sic",
            LagCriterion::Hqc => "hqc",
        })
    }
}

impl FromStr for LagCriterion {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "hjc" => Ok(LagCriterion::Hjc),
            "aic" => Ok(LagCriterion::Aic),
            "sic" | "bic" | "sbc" => Ok(LagCriterion::Sic),
            "hqc" | "hq" => Ok(LagCriterion::Hqc),
            other => Err(format!("unknown criterion `{other}` (hjc|aic|sic|hqc)")),
        }
    }
}

/// Criterion values for `j = 1..=p_max`, all fitted on rows `p_max..T`.
pub fn information_criteria(
    panel: &Panel,
    p_max: usize,
    criterion: LagCriterion,
) -> Result<Vec<f64>, VarError> {
    information_criteria_matrix(&panel.to_matrix(), p_max, criterion)
}

pub(crate) fn information_criteria_matrix(
    data: &DMatrix<f64>,
    p_max: usize,
    criterion: LagCriterion,
) -> Result<Vec<f64>, VarError> {
    let (t_total, m) = data.shape();
    check_length(t_total, m, VarSpec::new(p_max))?;
    let t_eff = t_total - p_max;
    (1..=p_max)
        .map(|j| {
            let (y, x) = design(data, j, p_max, true);
            let fit = ols(&y, &x)?;
            let sigma = fit.residuals.transpose() * &fit.residuals / t_eff as f64;
            let det = sigma.determinant();
            if !(det > 0.0) || !det.is_finite() {
                return Err(VarError::DegenerateCovariance);
            }
            Ok(det.ln() + criterion.penalty(j, m, t_eff))
        })
        .collect()
}

/// Lag order in `1..=p_max` minimizing `criterion` (intercept included).
pub fn select_lag(panel: &Panel, p_max: usize, criterion: LagCriterion) -> Result<usize, VarError> {
    select_lag_matrix(&panel.to_matrix(), p_max, criterion)
}

pub(crate) fn select_lag_matrix(
    data: &DMatrix<f64>,
    p_max: usize,
    criterion: LagCriterion,
) -> Result<usize, VarError> {
    if p_max == 0 {
        return Err(VarError::ZeroLag);
    }
    let values = information_criteria_matrix(data, p_max, criterion)?;
    let best = values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bv), (i, &v)| {
            if v < bv {
                (i, v)
            } else {
                (bi, bv)
            }
        })
        .0;
    Ok(best + 1)
}
