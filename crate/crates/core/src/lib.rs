//! Asymmetric volatility connectedness.
//!
//! The pipeline splits each integrated series into cumulative positive and
//! negative shock components, fits a VAR to each component set (and to the
//! raw series for the symmetric baseline), computes generalized
//! forecast-error variance decompositions, and summarizes them as
//! connectedness tables, directional and net spillovers, and rolling
//! spillover-index series.
//!
//! ```
//! use aspill::connectedness::{build_table, fevd_of_fit, SigmaScaling};
//! use aspill::decomposition::{decompose_panel, TrendSpec};
//! use aspill::simulate::AsymmetricSystem;
//! use aspill::var_engine::{estimate_var, VarSpec};
//! use rand::SeedableRng;
//!
//! let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
//! let start = chrono::NaiveDate::from_ymd_opt(1999, 1, 1).unwrap();
//! let panel = AsymmetricSystem::default().simulate(&mut rng, start);
//! let parts = decompose_panel(&panel, TrendSpec::Drift).unwrap();
//! let fit = estimate_var(&parts.minus_panel, VarSpec::new(2)).unwrap();
//! let fevd = fevd_of_fit(&fit, 10, SigmaScaling::Jj).unwrap();
//! let table = build_table(&fevd.normalized, parts.minus_panel.names()).unwrap();
//! assert!((0.0..=100.0).contains(&table.total_spillover));
//! ```

pub mod connectedness;
pub mod data_ingest;
pub mod decomposition;
pub(crate) mod fsutil;
pub mod pipeline;
pub mod report;
pub mod rolling;
pub mod simulate;
pub mod var_engine;

pub use connectedness::{ConnectednessTable, FevdResult, NetMeasures, SigmaScaling};
pub use data_ingest::{Panel, Series};
pub use decomposition::{ComponentPair, DecomposedPanel, TrendFit, TrendSpec};
pub use rolling::{RollingConfig, ShockSide, SpilloverSeries};
pub use var_engine::{LagCriterion, MaCoefficients, VarFit, VarSpec};

pub use fsutil::write_atomic;
