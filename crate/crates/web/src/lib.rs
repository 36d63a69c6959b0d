//! Browser bindings: every export takes plain numbers and returns a JSON string.

use aspill::connectedness::{build_table, directional, fevd_of_fit, net_measures, SigmaScaling};
use aspill::data_ingest::Series;
use aspill::decomposition::{build_components, TrendSpec};
use aspill::report::{render_plot, render_table, PlotOptions, TableFormat};
use aspill::rolling::{rolling_index, RollingConfig, ShockSide};
use aspill::simulate::{monthly_dates, random_walk, AsymmetricSystem};
use aspill::var_engine::{estimate_var, VarSpec};
use chrono::NaiveDate;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn start() -> NaiveDate {
    NaiveDate::from_ymd_opt(1999, 1, 1).unwrap()
}

fn to_json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct DecomposeOut {
    dates: Vec<String>,
    series: Vec<f64>,
    plus: Vec<f64>,
    minus: Vec<f64>,
    c: f64,
    d: f64,
}

pub fn decompose_json(
    seed: u64,
    len: usize,
    drift: f64,
    sigma: f64,
    trend: &str,
) -> Result<String, String> {
    let trend: TrendSpec = trend.parse()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dates = monthly_dates(start(), len);
    let values = random_walk(&mut rng, len, 4.0, drift, 0.0, sigma);
    let series = Series::new("G", dates.clone(), values.clone()).map_err(|e| e.to_string())?;
    let pair = build_components(&series, trend).map_err(|e| e.to_string())?;
    to_json(&DecomposeOut {
        dates: dates.iter().map(|d| d.format("%Y-%m").to_string()).collect(),
        series: values,
        plus: pair.plus.values().to_vec(),
        minus: pair.minus.values().to_vec(),
        c: pair.fit.c,
        d: pair.fit.d,
    })
}

#[derive(Serialize)]
struct SideOut {
    side: &'static str,
    index: f64,
    markdown: String,
    from_pct: Vec<f64>,
    to_pct: Vec<f64>,
    net_directional: Vec<f64>,
}

fn system(seed: u64, len: usize, m: usize, up: f64, down: f64) -> aspill::Panel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    AsymmetricSystem {
        m,
        len,
        up_coupling: up,
        down_coupling: down,
        ..AsymmetricSystem::default()
    }
    .simulate(&mut rng, start())
}

pub fn connectedness_json(
    seed: u64,
    len: usize,
    m: usize,
    up: f64,
    down: f64,
    lags: usize,
    horizon: usize,
) -> Result<String, String> {
    if m < 2 {
        return Err("need at least 2 series".into());
    }
    let panel = system(seed, len, m, up, down);
    let mut out = Vec::new();
    for side in ShockSide::ALL {
        let data = side
            .select(&panel, TrendSpec::Drift)
            .map_err(|e| e.to_string())?;
        let fit = estimate_var(&data, VarSpec::new(lags)).map_err(|e| e.to_string())?;
        let res = fevd_of_fit(&fit, horizon, SigmaScaling::Jj).map_err(|e| e.to_string())?;
        let table = build_table(&res.normalized, panel.names()).map_err(|e| e.to_string())?;
        let dir = directional(&table);
        out.push(SideOut {
            side: side.tag(),
            index: table.total_spillover,
            markdown: render_table(&table, TableFormat::Markdown).map_err(|e| e.to_string())?,
            from_pct: dir.from_pct,
            to_pct: dir.to_pct,
            net_directional: net_measures(&table).net_directional,
        });
    }
    to_json(&out)
}

#[derive(Serialize)]
struct RollingOut {
    dates: Vec<String>,
    values: Vec<Option<f64>>,
    gaps: usize,
    svg: String,
}

#[allow(clippy::too_many_arguments)]
pub fn rolling_json(
    seed: u64,
    len: usize,
    up: f64,
    down: f64,
    window: usize,
    step: usize,
    horizon: usize,
    side: &str,
) -> Result<String, String> {
    let side: ShockSide = side.parse()?;
    let panel = system(seed, len, 3, up, down);
    let mut cfg = RollingConfig::new(window, horizon, VarSpec::new(2), side);
    cfg.step = step;
    let series = rolling_index(&panel, &cfg).map_err(|e| e.to_string())?;
    let opts = PlotOptions {
        title: format!("Spillover index, {} ({window}-month windows)", side.title()),
        ..PlotOptions::default()
    };
    let svg = render_plot(&series, &opts).map_err(|e| e.to_string())?;
    to_json(&RollingOut {
        dates: series
            .window_end_dates
            .iter()
            .map(|d| d.format("%Y-%m-%d").to_string())
            .collect(),
        values: series.index_values.clone(),
        gaps: series.gaps.len(),
        svg,
    })
}

#[wasm_bindgen]
pub fn decompose(seed: u64, len: usize, drift: f64, sigma: f64, trend: &str) -> Result<String, JsValue> {
    decompose_json(seed, len, drift, sigma, trend).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn connectedness(
    seed: u64,
    len: usize,
    m: usize,
    up: f64,
    down: f64,
    lags: usize,
    horizon: usize,
) -> Result<String, JsValue> {
    connectedness_json(seed, len, m, up, down, lags, horizon).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn rolling(
    seed: u64,
    len: usize,
    up: f64,
    down: f64,
    window: usize,
    step: usize,
    horizon: usize,
    side: &str,
) -> Result<String, JsValue> {
    rolling_json(seed, len, up, down, window, step, horizon, side)
        .map_err(|e| JsValue::from_str(&e))
}
