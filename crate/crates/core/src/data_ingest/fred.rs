//! FRED observations client with a plain-text, cache-first store.
//!
//! Cache entries live at `<cache_dir>/<series_id>__<start>__<end>.csv`
//! (`all` for an open bound) and hold `date,value` lines. A cached entry is
//! always served without touching the network.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, OnceLock};

use chrono::NaiveDate;
use serde::Deserialize;
use thiserror::Error;

use super::{parse_date, IngestError, Series};

pub const DEFAULT_CACHE_DIR: &str = "./.aspill-cache";
const BASE_URL: &str = "https://api.stlouisfed.org/fred/series/observations";

#[derive(Debug, Error)]
pub enum FetchError {
    #[error("FRED API key is empty (set FRED_API_KEY or pass --api-key)")]
    MissingCredentials,

    #[error("invalid FRED series id `{0}`")]
    InvalidSeriesId(String),

    #[error("FRED series `{0}` does not exist")]
    SeriesNotFound(String),

    #[error("FRED returned HTTP {status}: {message}")]
    Http { status: u16, message: String },

    #[error("transport failure: {0}")]
    Transport(String),

    #[error("malformed FRED response: {0}")]
    MalformedResponse(String),

    #[error("cache error at {path}: {source}")]
    Cache {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Series(#[from] IngestError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DateRange {
    pub start: Option<NaiveDate>,
    pub end: Option<NaiveDate>,
}

#[derive(Debug, Clone)]
pub struct HttpResponse {
    pub status: u16,
    pub body: String,
}

/// Minimal blocking GET, swappable for tests.
pub trait Transport {
    fn get(&self, url: &str) -> Result<HttpResponse, String>;
}

/// Production transport backed by `ureq`.
pub struct UreqTransport {
    agent: ureq::Agent,
}

impl Default for UreqTransport {
    fn default() -> Self {
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .build()
            .into();
        Self { agent }
    }
}

impl Transport for UreqTransport {
    fn get(&self, url: &str) -> Result<HttpResponse, String> {
        let mut resp = self.agent.get(url).call().map_err(|e| e.to_string())?;
        let status = resp.status().as_u16();
        let body = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| e.to_string())?;
        Ok(HttpResponse { status, body })
    }
}

pub struct FredClient<T: Transport = UreqTransport> {
    api_key: String,
    cache_dir: PathBuf,
    transport: T,
}

impl FredClient<UreqTransport> {
    pub fn new(api_key: impl Into<String>, cache_dir: impl Into<PathBuf>) -> Self {
        Self::with_transport(api_key, cache_dir, UreqTransport::default())
    }
}

impl<T: Transport> FredClient<T> {
    pub fn with_transport(
        api_key: impl Into<String>,
        cache_dir: impl Into<PathBuf>,
        transport: T,
    ) -> Self {
        Self {
            api_key: api_key.into(),
            cache_dir: cache_dir.into(),
            transport,
        }
    }

    pub fn cache_path(&self, series_id: &str, range: Option<DateRange>) -> PathBuf {
        let bound = |d: Option<NaiveDate>| {
            d.map(|d| d.format("%Y-%m-%d").to_string())
                .unwrap_or_else(|| "all".into())
        };
        let (s, e) = match range {
            Some(r) => (bound(r.start), bound(r.end)),
            None => ("all".into(), "all".into()),
        };
        self.cache_dir.join(format!("{series_id}__{s}__{e}.csv"))
    }

    /// Monthly observations for `series_id`, served from cache when present.
    pub fn fetch(&self, series_id: &str, range: Option<DateRange>) -> Result<Series, FetchError> {
        if series_id.is_empty()
            || !series_id
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_')
        {
            return Err(FetchError::InvalidSeriesId(series_id.to_string()));
        }
        let path = self.cache_path(series_id, range);
        let lock = entry_lock(&path);
        let _guard = lock.lock().unwrap_or_else(|p| p.into_inner());

        if path.exists() {
            return read_cache(&path, series_id);
        }
        if self.api_key.trim().is_empty() {
            return Err(FetchError::MissingCredentials);
        }

        let mut url = format!(
            "{BASE_URL}?series_id={series_id}&api_key={}&file_type=json&frequency=m",
            self.api_key.trim()
        );
        if let Some(r) = range {
            if let Some(s) = r.start {
                url.push_str(&format!("&observation_start={}", s.format("%Y-%m-%d")));
            }
            if let Some(e) = r.end {
                url.push_str(&format!("&observation_end={}", e.format("%Y-%m-%d")));
            }
        }
        let resp = self.transport.get(&url).map_err(FetchError::Transport)?;
        let series = parse_response(series_id, &resp)?;
        write_cache(&path, &series)?;
        Ok(series)
    }
}

/// Fetches one series with the default transport.
pub fn fetch_fred(
    series_id: &str,
    api_key: &str,
    date_range: Option<DateRange>,
    cache_dir: Option<&Path>,
) -> Result<Series, FetchError> {
    let dir = cache_dir.unwrap_or_else(|| Path::new(DEFAULT_CACHE_DIR));
    FredClient::new(api_key, dir).fetch(series_id, date_range)
}

// Serializes concurrent fetches of the same cache entry within the process.
fn entry_lock(path: &Path) -> Arc<Mutex<()>> {
    static LOCKS: OnceLock<Mutex<HashMap<PathBuf, Arc<Mutex<()>>>>> = OnceLock::new();
    let mut map = LOCKS
        .get_or_init(Default::default)
        .lock()
        .unwrap_or_else(|p| p.into_inner());
    map.entry(path.to_path_buf()).or_default().clone()
}

#[derive(Deserialize)]
struct ObservationsBody {
    observations: Vec<Observation>,
}

#[derive(Deserialize)]
struct Observation {
    date: String,
    value: String,
}

#[derive(Deserialize)]
struct ErrorBody {
    error_message: Option<String>,
}

fn parse_response(series_id: &str, resp: &HttpResponse) -> Result<Series, FetchError> {
    if !(200..300).contains(&resp.status) {
        let message = serde_json::from_str::<ErrorBody>(&resp.body)
            .ok()
            .and_then(|b| b.error_message)
            .unwrap_or_else(|| resp.body.chars().take(200).collect());
        // FRED answers 400 "The series does not exist." for unknown ids
        if resp.status == 404
            || (resp.status == 400 && message.to_ascii_lowercase().contains("does not exist"))
        {
            return Err(FetchError::SeriesNotFound(series_id.to_string()));
        }
        return Err(FetchError::Http {
            status: resp.status,
            message,
        });
    }
    let body: ObservationsBody = serde_json::from_str(&resp.body)
        .map_err(|e| FetchError::MalformedResponse(e.to_string()))?;
    let mut dates = Vec::with_capacity(body.observations.len());
    let mut values = Vec::with_capacity(body.observations.len());
    for obs in body.observations {
        if obs.value == "." || obs.value.is_empty() {
            continue;
        }
        let date = parse_date(&obs.date)
            .ok_or_else(|| FetchError::MalformedResponse(format!("bad date `{}`", obs.date)))?;
        let value: f64 = obs
            .value
            .parse()
            .map_err(|_| FetchError::MalformedResponse(format!("bad value `{}`", obs.value)))?;
        dates.push(date);
        values.push(value);
    }
    if values.is_empty() {
        return Err(FetchError::MalformedResponse("no observations".into()));
    }
    Ok(Series::new(series_id, dates, values)?)
}

fn write_cache(path: &Path, series: &Series) -> Result<(), FetchError> {
    let cache_err = |source| FetchError::Cache {
        path: path.display().to_string(),
        source,
    };
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(cache_err)?;
    }
    let mut text = String::from("date,value\n");
    for (d, v) in series.dates().iter().zip(series.values()) {
        text.push_str(&format!("{},{}\n", d.format("%Y-%m-%d"), v));
    }
    crate::fsutil::write_atomic(path, text.as_bytes()).map_err(cache_err)
}

fn read_cache(path: &Path, series_id: &str) -> Result<Series, FetchError> {
    let text = std::fs::read_to_string(path).map_err(|source| FetchError::Cache {
        path: path.display().to_string(),
        source,
    })?;
    let mut dates = Vec::new();
    let mut values = Vec::new();
    for line in text.lines().skip(1).filter(|l| !l.trim().is_empty()) {
        let bad = || FetchError::MalformedResponse(format!("bad cache line `{line}`"));
        let (d, v) = line.split_once(',').ok_or_else(bad)?;
        dates.push(parse_date(d).ok_or_else(bad)?);
        values.push(v.trim().parse().map_err(|_| bad())?);
    }
    Ok(Series::new(series_id, dates, values)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cell::{Cell, RefCell};

    struct Mock {
        calls: Cell<usize>,
        last_url: RefCell<String>,
        response: HttpResponse,
    }

    impl Mock {
        fn new(status: u16, body: &str) -> Self {
            Self {
                calls: Cell::new(0),
                last_url: RefCell::new(String::new()),
                response: HttpResponse {
                    status,
                    body: body.into(),
                },
            }
        }
    }

    impl Transport for &Mock {
        fn get(&self, url: &str) -> Result<HttpResponse, String> {
            self.calls.set(self.calls.get() + 1);
            *self.last_url.borrow_mut() = url.to_string();
            Ok(self.response.clone())
        }
    }

    const OK_BODY: &str = r#"{"observations":[
        {"realtime_start":"x","date":"1999-01-01","value":"1279.64"},
        {"date":"1999-02-01","value":"."},
        {"date":"1999-03-01","value":"1286.37"}]}"#;

    #[test]
    fn fetch_then_cache_hit() {
        let dir = tempfile::tempdir().unwrap();
        let mock = Mock::new(200, OK_BODY);
        let client = FredClient::with_transport("key", dir.path(), &mock);
        let range = Some(DateRange {
            start: NaiveDate::from_ymd_opt(1999, 1, 1),
            end: None,
        });
        let s = client.fetch("SP500", range).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.values()[1], 1286.37);
        assert_eq!(mock.calls.get(), 1);
        let url = mock.last_url.borrow().clone();
        assert!(url.contains("series_id=SP500"));
        assert!(url.contains("observation_start=1999-01-01"));

        let again = client.fetch("SP500", range).unwrap();
        assert_eq!(again, s);
        assert_eq!(mock.calls.get(), 1);
        assert!(client
            .cache_path("SP500", range)
            .ends_with("SP500__1999-01-01__all.csv"));
    }

    #[test]
    fn cache_hit_needs_no_key() {
        let dir = tempfile::tempdir().unwrap();
        let mock = Mock::new(200, OK_BODY);
        FredClient::with_transport("key", dir.path(), &mock)
            .fetch("X1", None)
            .unwrap();
        let offline = Mock::new(500, "");
        let s = FredClient::with_transport("", dir.path(), &offline)
            .fetch("X1", None)
            .unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(offline.calls.get(), 0);
    }

    #[test]
    fn unknown_series_maps_to_not_found() {
        let dir = tempfile::tempdir().unwrap();
        let mock = Mock::new(
            400,
            r#"{"error_code":400,"error_message":"Bad Request.  The series does not exist."}"#,
        );
        let err = FredClient::with_transport("key", dir.path(), &mock)
            .fetch("NOPE", None)
            .unwrap_err();
        assert!(matches!(err, FetchError::SeriesNotFound(id) if id == "NOPE"));

        let mock = Mock::new(404, "not found");
        let err = FredClient::with_transport("key", dir.path(), &mock)
            .fetch("NOPE2", None)
            .unwrap_err();
        assert!(matches!(err, FetchError::SeriesNotFound(_)));
    }

    #[test]
    fn empty_key_fails_before_network() {
        let dir = tempfile::tempdir().unwrap();
        let mock = Mock::new(200, OK_BODY);
        let err = FredClient::with_transport("  ", dir.path(), &mock)
            .fetch("SP500", None)
            .unwrap_err();
        assert!(matches!(err, FetchError::MissingCredentials));
        assert_eq!(mock.calls.get(), 0);
    }

    #[test]
    fn other_failures_are_distinguishable() {
        let dir = tempfile::tempdir().unwrap();
        let mock = Mock::new(500, "oops");
        let err = FredClient::with_transport("k", dir.path(), &mock)
            .fetch("A", None)
            .unwrap_err();
        assert!(matches!(err, FetchError::Http { status: 500, .. }));

        let mock = Mock::new(200, "{not json");
        let err = FredClient::with_transport("k", dir.path(), &mock)
            .fetch("B", None)
            .unwrap_err();
        assert!(matches!(err, FetchError::MalformedResponse(_)));

        struct Down;
        impl Transport for Down {
            fn get(&self, _: &str) -> Result<HttpResponse, String> {
                Err("connection refused".into())
            }
        }
        let err = FredClient::with_transport("k", dir.path(), Down)
            .fetch("C", None)
            .unwrap_err();
        assert!(matches!(err, FetchError::Transport(_)));

        let err = FredClient::with_transport("k", dir.path(), Down)
            .fetch("../etc", None)
            .unwrap_err();
        assert!(matches!(err, FetchError::InvalidSeriesId(_)));
    }
}
