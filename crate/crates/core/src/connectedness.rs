//! Generalized forecast-error variance decomposition and connectedness tables.
//!
//! For MA coefficients `K_0..K_n` and shock covariance `Γ`, the raw share of
//! variable `i`'s `n`-step forecast-error variance attributed to shocks in
//! variable `j` is
//!
//! ```text
//!            σ_jj⁻¹ Σ_{l=0..n} (e_i' K_l Γ e_j)²
//! θ_ij(n) = ─────────────────────────────────────
//!               Σ_{l=0..n} e_i' K_l Γ K_l' e_i
//! ```
//!
//! Generalized shocks are not orthogonal, so rows of `θ` do not sum to one
//! and are normalized before tables are built. Normalized shares are kept as
//! fractions; tables and reports are in percent.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::var_engine::{ma_coefficients, rows_of, MaCoefficients, VarFit};

#[derive(Debug, Error)]
pub enum ConnectednessError {
    #[error("horizon {requested} exceeds the {available} available MA terms")]
    HorizonTooLong { requested: usize, available: usize },

    #[error("covariance must be {expected}×{expected}, got {rows}×{cols}")]
    Dimension {
        expected: usize,
        rows: usize,
        cols: usize,
    },

    #[error("covariance diagonal entry {index} is not positive ({value})")]
    NonPositiveVariance { index: usize, value: f64 },

    #[error("forecast-error variance of variable {0} is zero")]
    ZeroDenominator(usize),

    #[error("row {0} sums to zero and cannot be normalized")]
    ZeroRowSum(usize),

    #[error("{labels} labels for a {m}×{m} matrix")]
    LabelMismatch { labels: usize, m: usize },
}

/// Which variance scales the squared impact in the numerator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SigmaScaling {
    /// `σ_jj⁻¹`, the shocked variable's variance (standard generalized FEVD).
    #[default]
    Jj,
    /// `σ_ii⁻¹`, the responding variable's variance.
    Ii,
}

impl fmt::Display for SigmaScaling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SigmaScaling::Jj => "jj",
            SigmaScaling::Ii => "ii",
        })
    }
}

impl FromStr for SigmaScaling {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "jj" => Ok(SigmaScaling::Jj),
            "ii" => Ok(SigmaScaling::Ii),
            other => Err(format!("unknown sigma scaling `{other}` (jj|ii)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FevdResult {
    pub horizon: usize,
    pub raw: DMatrix<f64>,
    pub normalized: DMatrix<f64>,
}

/// Raw generalized FEVD matrix at horizon `n` (sums `l = 0..=n`).
pub fn gfevd(
    ma: &MaCoefficients,
    gamma: &DMatrix<f64>,
    n: usize,
    scaling: SigmaScaling,
) -> Result<DMatrix<f64>, ConnectednessError> {
    let m = ma.m();
    if n > ma.horizon {
        return Err(ConnectednessError::HorizonTooLong {
            requested: n,
            available: ma.horizon,
        });
    }
    if gamma.shape() != (m, m) {
        return Err(ConnectednessError::Dimension {
            expected: m,
            rows: gamma.nrows(),
            cols: gamma.ncols(),
        });
    }
    for i in 0..m {
        let v = gamma[(i, i)];
        if !(v > 0.0) {
            return Err(ConnectednessError::NonPositiveVariance { index: i, value: v });
        }
    }

    let mut numer = DMatrix::<f64>::zeros(m, m);
    let mut denom = vec![0.0; m];
    for k in &ma.k[..=n] {
        let kg = k * gamma;
        numer += kg.map(|x| x * x);
        for (i, d) in denom.iter_mut().enumerate() {
            *d += kg.row(i).dot(&k.row(i));
        }
    }
    for (i, &d) in denom.iter().enumerate() {
        if !(d > 0.0) {
            return Err(ConnectednessError::ZeroDenominator(i));
        }
    }
    Ok(DMatrix::from_fn(m, m, |i, j| {
        let sigma = match scaling {
            SigmaScaling::Jj => gamma[(j, j)],
            SigmaScaling::Ii => gamma[(i, i)],
        };
        numer[(i, j)] / sigma / denom[i]
    }))
}

/// Divides each row by its sum.
pub fn normalize_rows(raw: &DMatrix<f64>) -> Result<DMatrix<f64>, ConnectednessError> {
    let mut out = raw.clone();
    for i in 0..raw.nrows() {
        let s = raw.row(i).sum();
        if !(s > 0.0) {
            return Err(ConnectednessError::ZeroRowSum(i));
        }
        out.row_mut(i).scale_mut(1.0 / s);
    }
    Ok(out)
}

pub fn fevd(
    ma: &MaCoefficients,
    gamma: &DMatrix<f64>,
    n: usize,
    scaling: SigmaScaling,
) -> Result<FevdResult, ConnectednessError> {
    let raw = gfevd(ma, gamma, n, scaling)?;
    let normalized = normalize_rows(&raw)?;
    Ok(FevdResult {
        horizon: n,
        raw,
        normalized,
    })
}

/// FEVD of a fitted VAR at horizon `n`.
pub fn fevd_of_fit(
    fit: &VarFit,
    n: usize,
    scaling: SigmaScaling,
) -> Result<FevdResult, ConnectednessError> {
    fevd(&ma_coefficients(fit, n), &fit.gamma, n, scaling)
}

/// Connectedness table with margins, all in percent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnectednessTable {
    pub labels: Vec<String>,
    /// Row `i`, column `j`: share of `i`'s forecast-error variance due to `j`.
    pub matrix: Vec<Vec<f64>>,
    /// Off-diagonal row sums.
    pub from_others: Vec<f64>,
    /// Off-diagonal column sums.
    pub to_others: Vec<f64>,
    /// Full column sums.
    pub including_own: Vec<f64>,
    /// Off-diagonal mass divided by `m`.
    pub total_spillover: f64,
    /// `100·Σ_j share_ij / m`.
    pub aggregates_from: Vec<f64>,
    /// `100·Σ_j share_ji / m`.
    pub aggregates_to: Vec<f64>,
}

impl ConnectednessTable {
    /// Builds margins from a percent-valued matrix.
    pub fn from_percent(
        labels: Vec<String>,
        matrix: Vec<Vec<f64>>,
    ) -> Result<Self, ConnectednessError> {
        let m = matrix.len();
        if labels.len() != m {
            return Err(ConnectednessError::LabelMismatch {
                labels: labels.len(),
                m,
            });
        }
        if let Some(row) = matrix.iter().find(|r| r.len() != m) {
            return Err(ConnectednessError::Dimension {
                expected: m,
                rows: m,
                cols: row.len(),
            });
        }
        let mf = m as f64;
        let from_others: Vec<f64> = (0..m)
            .map(|i| (0..m).filter(|&j| j != i).map(|j| matrix[i][j]).sum())
            .collect();
        let to_others: Vec<f64> = (0..m)
            .map(|j| (0..m).filter(|&i| i != j).map(|i| matrix[i][j]).sum())
            .collect();
        let including_own: Vec<f64> = (0..m).map(|j| (0..m).map(|i| matrix[i][j]).sum()).collect();
        let total_spillover = from_others.iter().sum::<f64>() / mf;
        let aggregates_from = (0..m).map(|i| matrix[i].iter().sum::<f64>() / mf).collect();
        let aggregates_to = including_own.iter().map(|s| s / mf).collect();
        Ok(Self {
            labels,
            matrix,
            from_others,
            to_others,
            including_own,
            total_spillover,
            aggregates_from,
            aggregates_to,
        })
    }

    pub fn m(&self) -> usize {
        self.labels.len()
    }

    /// Shares as fractions.
    pub fn fractions(&self) -> DMatrix<f64> {
        let m = self.m();
        DMatrix::from_fn(m, m, |i, j| self.matrix[i][j] / 100.0)
    }

    /// Checks the invariants of a table built from a row-normalized matrix.
    pub fn check_invariants(&self, tol: f64) -> Result<(), String> {
        let m = self.m() as f64;
        for (i, row) in self.matrix.iter().enumerate() {
            let s: f64 = row.iter().sum();
            if (s - 100.0).abs() > tol {
                return Err(format!("row {i} sums to {s}"));
            }
        }
        let from = self.from_others.iter().sum::<f64>() / m;
        let to = self.to_others.iter().sum::<f64>() / m;
        if (from - self.total_spillover).abs() > tol || (to - self.total_spillover).abs() > tol {
            return Err(format!(
                "index {} vs from {from} / to {to}",
                self.total_spillover
            ));
        }
        let total: f64 = self.matrix.iter().flatten().sum();
        if (total - 100.0 * m).abs() > tol {
            return Err(format!("matrix total {total}"));
        }
        if !(0.0..=100.0).contains(&self.total_spillover) {
            return Err(format!("index {} outside [0, 100]", self.total_spillover));
        }
        Ok(())
    }
}

/// Table from a row-normalized fractional matrix.
pub fn build_table(
    normalized: &DMatrix<f64>,
    labels: &[String],
) -> Result<ConnectednessTable, ConnectednessError> {
    let percent = rows_of(&normalized.map(|x| 100.0 * x));
    ConnectednessTable::from_percent(labels.to_vec(), percent)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetMeasures {
    pub labels: Vec<String>,
    /// Transmitted minus received, percent.
    pub net_directional: Vec<f64>,
    /// `share_ij − share_ji`, fractions.
    pub net_pairwise_simple: Vec<Vec<f64>>,
    /// `100·(share_ij/Σ_r share_ir − share_ji/Σ_r share_jr)`.
    pub net_pairwise_scaled: Vec<Vec<f64>>,
}

pub fn net_measures(table: &ConnectednessTable) -> NetMeasures {
    let m = table.m();
    let share = table.fractions();
    let row_sums: Vec<f64> = (0..m).map(|i| share.row(i).sum()).collect();
    let mut simple = vec![vec![0.0; m]; m];
    let mut scaled = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in (i + 1)..m {
            let s = share[(i, j)] - share[(j, i)];
            let c = (share[(i, j)] / row_sums[i] - share[(j, i)] / row_sums[j]) * 100.0;
            simple[i][j] = s;
            simple[j][i] = -s;
            scaled[i][j] = c;
            scaled[j][i] = -c;
        }
    }
    NetMeasures {
        labels: table.labels.clone(),
        net_directional: (0..m)
            .map(|i| table.to_others[i] - table.from_others[i])
            .collect(),
        net_pairwise_simple: simple,
        net_pairwise_scaled: scaled,
    }
}

/// Directional spillovers normalized by `m`, percent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Directional {
    /// Received by `i` from all others.
    pub from_pct: Vec<f64>,
    /// Transmitted by `i` to all others.
    pub to_pct: Vec<f64>,
}

pub fn directional(table: &ConnectednessTable) -> Directional {
    let m = table.m() as f64;
    Directional {
        from_pct: table.from_others.iter().map(|v| v / m).collect(),
        to_pct: table.to_others.iter().map(|v| v / m).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::var_engine::ma_from_lags;
    use nalgebra::dmatrix;
    use proptest::prelude::*;

    fn labels(m: usize) -> Vec<String> {
        (0..m).map(|i| format!("v{i}")).collect()
    }

    // Scalar triple loop, independent of the matrix-form path.
    fn oracle(k: &[DMatrix<f64>], gamma: &DMatrix<f64>, n: usize) -> Vec<Vec<f64>> {
        let m = gamma.nrows();
        let mut out = vec![vec![0.0; m]; m];
        for i in 0..m {
            let mut denom = 0.0;
            for kl in &k[..=n] {
                for a in 0..m {
                    for b in 0..m {
                        denom += kl[(i, a)] * gamma[(a, b)] * kl[(i, b)];
                    }
                }
            }
            for j in 0..m {
                let mut num = 0.0;
                for kl in &k[..=n] {
                    let mut impact = 0.0;
                    for a in 0..m {
                        impact += kl[(i, a)] * gamma[(a, j)];
                    }
                    num += impact * impact;
                }
                out[i][j] = num / gamma[(j, j)] / denom;
            }
        }
        out
    }

    #[test]
    fn horizon_zero_is_squared_correlation() {
        let gamma = dmatrix![2.0, 0.6, -0.3; 0.6, 1.0, 0.2; -0.3, 0.2, 0.5];
        let ma = ma_from_lags(&[dmatrix![0.3, 0.1, 0.0; 0.0, 0.2, 0.1; 0.1, 0.0, 0.4]], 3, 0);
        let raw = gfevd(&ma, &gamma, 0, SigmaScaling::Jj).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let rho2 = gamma[(i, j)].powi(2) / (gamma[(i, i)] * gamma[(j, j)]);
                assert!((raw[(i, j)] - rho2).abs() < 1e-15);
            }
            assert_eq!(raw[(i, i)], 1.0);
        }
    }

    #[test]
    fn non_interacting_system_is_identity() {
        let gamma = dmatrix![2.0, 0.0; 0.0, 0.5];
        let ma = ma_from_lags(&[dmatrix![0.7, 0.0; 0.0, -0.2]], 2, 8);
        let raw = gfevd(&ma, &gamma, 8, SigmaScaling::Jj).unwrap();
        assert!((raw - DMatrix::identity(2, 2)).amax() < 1e-15);
    }

    #[test]
    fn bivariate_var1_matches_loop_oracle() {
        let ma = ma_from_lags(&[dmatrix![0.5, 0.2; 0.1, 0.4]], 2, 10);
        let gamma = dmatrix![1.0, 0.3; 0.3, 1.0];
        let raw = gfevd(&ma, &gamma, 10, SigmaScaling::Jj).unwrap();
        let expect = oracle(&ma.k, &gamma, 10);
        for i in 0..2 {
            for j in 0..2 {
                assert!((raw[(i, j)] - expect[i][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn printed_scaling_uses_own_variance() {
        let ma = ma_from_lags(&[dmatrix![0.5, 0.2; 0.1, 0.4]], 2, 3);
        let gamma = dmatrix![4.0, 0.3; 0.3, 1.0];
        let jj = gfevd(&ma, &gamma, 3, SigmaScaling::Jj).unwrap();
        let ii = gfevd(&ma, &gamma, 3, SigmaScaling::Ii).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let expect = jj[(i, j)] * gamma[(j, j)] / gamma[(i, i)];
                assert!((ii[(i, j)] - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn error_paths() {
        let ma = ma_from_lags(&[dmatrix![0.5, 0.0; 0.0, 0.5]], 2, 2);
        assert!(matches!(
            gfevd(&ma, &DMatrix::identity(2, 2), 3, SigmaScaling::Jj),
            Err(ConnectednessError::HorizonTooLong { .. })
        ));
        assert!(matches!(
            gfevd(&ma, &dmatrix![1.0, 0.0; 0.0, 0.0], 1, SigmaScaling::Jj),
            Err(ConnectednessError::NonPositiveVariance { index: 1, .. })
        ));
        assert!(matches!(
            normalize_rows(&dmatrix![1.0, 0.0; 0.0, 0.0]),
            Err(ConnectednessError::ZeroRowSum(1))
        ));
    }

    #[test]
    fn normalization_examples() {
        let id = DMatrix::<f64>::identity(3, 3);
        assert_eq!(normalize_rows(&id).unwrap(), id);
        let r = normalize_rows(&dmatrix![2.0, 2.0; 1.0, 3.0]).unwrap();
        assert_eq!(r.row(0).iter().copied().collect::<Vec<_>>(), vec![0.5, 0.5]);
        assert!((r.sum() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn identity_table_has_no_spillover() {
        let t = build_table(&DMatrix::identity(3, 3), &labels(3)).unwrap();
        assert_eq!(t.total_spillover, 0.0);
        assert!(t.from_others.iter().chain(&t.to_others).all(|v| *v == 0.0));
        let d = directional(&t);
        assert!(d.from_pct.iter().chain(&d.to_pct).all(|v| *v == 0.0));
        t.check_invariants(1e-9).unwrap();
    }

    fn published_negative_table() -> ConnectednessTable {
        ConnectednessTable::from_percent(
            vec!["China".into(), "Euro".into(), "US".into()],
            vec![
                vec![64.3, 18.5, 17.3],
                vec![5.3, 50.6, 44.1],
                vec![10.0, 38.4, 51.6],
            ],
        )
        .unwrap()
    }

    #[test]
    fn negative_shock_table_margins() {
        let t = published_negative_table();
        let from = [35.7, 49.4, 48.4];
        let to = [15.4, 56.9, 61.4];
        for i in 0..3 {
            assert!((t.from_others[i] - from[i]).abs() <= 0.1 + 1e-9);
            assert!((t.to_others[i] - to[i]).abs() <= 0.1 + 1e-9);
        }
        assert!((t.total_spillover - 44.5).abs() <= 0.1);
        let d = directional(&t);
        // 35.8 / 3 from the printed cells; the printed margin 35.7 gives 11.9
        assert!((d.from_pct[0] - 35.7 / 3.0).abs() < 0.05);
    }

    #[test]
    fn negative_shock_net_measures() {
        let net = net_measures(&published_negative_table());
        // printed margins: US 61.4 − 48.4, China 15.4 − 35.7; each margin
        // carries ±0.1 rounding, so the difference carries ±0.2
        assert!((net.net_directional[2] - 13.0).abs() <= 0.2 + 1e-9);
        assert!((net.net_directional[0] - (-20.3)).abs() <= 0.2 + 1e-9);
        assert!(net.net_directional.iter().sum::<f64>().abs() < 1e-9);
    }

    #[test]
    fn positive_shock_index() {
        let t = ConnectednessTable::from_percent(
            vec!["China".into(), "Euro".into(), "US".into()],
            vec![
                vec![99.9, 0.0, 0.1],
                vec![0.6, 97.9, 1.4],
                vec![3.3, 65.6, 31.2],
            ],
        )
        .unwrap();
        assert!((t.from_others.iter().sum::<f64>() - 71.0).abs() < 1e-9);
        assert!((t.total_spillover - 23.67).abs() < 0.005);
    }

    #[test]
    fn symmetric_matrix_has_zero_net() {
        let t = build_table(
            &dmatrix![0.6, 0.3, 0.1; 0.3, 0.5, 0.2; 0.1, 0.2, 0.7],
            &labels(3),
        )
        .unwrap();
        let net = net_measures(&t);
        assert!(net.net_directional.iter().all(|v| v.abs() < 1e-12));
        assert!(net
            .net_pairwise_simple
            .iter()
            .chain(&net.net_pairwise_scaled)
            .flatten()
            .all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn scaled_pairwise_is_hundred_times_simple_for_normalized_rows() {
        let t = build_table(
            &dmatrix![0.6, 0.3, 0.1; 0.05, 0.75, 0.2; 0.25, 0.15, 0.6],
            &labels(3),
        )
        .unwrap();
        let net = net_measures(&t);
        for i in 0..3 {
            for j in 0..3 {
                let a = net.net_pairwise_scaled[i][j];
                let b = 100.0 * net.net_pairwise_simple[i][j];
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    fn stable_instance() -> impl Strategy<Value = (Vec<DMatrix<f64>>, DMatrix<f64>, usize)> {
        (2usize..=4, 1usize..=2, 0usize..=20).prop_flat_map(|(m, p, n)| {
            (
                prop::collection::vec(prop::collection::vec(-1.0f64..1.0, m * m), p),
                prop::collection::vec(-1.0f64..1.0, m * m),
                0.1f64..2.0,
            )
                .prop_map(move |(lags, a, ridge)| {
                    let scale = 0.9 / (m as f64 * p as f64);
                    let lags = lags
                        .into_iter()
                        .map(|v| DMatrix::from_vec(m, m, v) * scale)
                        .collect();
                    let a = DMatrix::from_vec(m, m, a);
                    let gamma = &a * a.transpose() + DMatrix::identity(m, m) * ridge;
                    (lags, gamma, n)
                })
        })
    }

    proptest! {
        #[test]
        fn matrix_form_matches_oracle((lags, gamma, n) in stable_instance()) {
            let m = gamma.nrows();
            let ma = ma_from_lags(&lags, m, n);
            let raw = gfevd(&ma, &gamma, n, SigmaScaling::Jj).unwrap();
            let expect = oracle(&ma.k, &gamma, n);
            for i in 0..m {
                for j in 0..m {
                    prop_assert!((raw[(i, j)] - expect[i][j]).abs() < 1e-12);
                }
            }
        }

        #[test]
        fn invariant_to_covariance_scale((lags, gamma, n) in stable_instance(), c in prop::sample::select(vec![1e-4, 1.0, 1e4])) {
            let m = gamma.nrows();
            let ma = ma_from_lags(&lags, m, n);
            let a = gfevd(&ma, &gamma, n, SigmaScaling::Jj).unwrap();
            let b = gfevd(&ma, &(&gamma * c), n, SigmaScaling::Jj).unwrap();
            prop_assert!((a - b).amax() < 1e-12);
        }

        #[test]
        fn diagonal_covariance_rows_sum_to_one((lags, gamma, n) in stable_instance()) {
            let m = gamma.nrows();
            let diag = DMatrix::from_diagonal(&gamma.diagonal());
            let ma = ma_from_lags(&lags, m, n);
            let raw = gfevd(&ma, &diag, n, SigmaScaling::Jj).unwrap();
            for i in 0..m {
                prop_assert!((raw.row(i).sum() - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn tables_and_net_measures_are_consistent((lags, gamma, n) in stable_instance()) {
            let m = gamma.nrows();
            let ma = ma_from_lags(&lags, m, n);
            let res = fevd(&ma, &gamma, n, SigmaScaling::Jj).unwrap();
            for i in 0..m {
                prop_assert!((res.normalized.row(i).sum() - 1.0).abs() < 1e-9);
            }
            prop_assert!(res.normalized.iter().all(|v| (0.0..=1.0).contains(v)));
            let t = build_table(&res.normalized, &labels(m)).unwrap();
            prop_assert!(t.check_invariants(1e-6).is_ok());
            let net = net_measures(&t);
            prop_assert!(net.net_directional.iter().sum::<f64>().abs() < 1e-6);
            for i in 0..m {
                prop_assert_eq!(net.net_pairwise_simple[i][i], 0.0);
                for j in 0..m {
                    prop_assert_eq!(net.net_pairwise_simple[i][j], -net.net_pairwise_simple[j][i]);
                    prop_assert_eq!(net.net_pairwise_scaled[i][j], -net.net_pairwise_scaled[j][i]);
                }
            }
            let d = directional(&t);
            prop_assert!((d.from_pct.iter().sum::<f64>() - t.total_spillover).abs() < 1e-9);
            prop_assert!((d.to_pct.iter().sum::<f64>() - t.total_spillover).abs() < 1e-9);
        }

        #[test]
        fn relabeling_permutes_consistently((lags, gamma, n) in stable_instance()) {
            let m = gamma.nrows();
            let order: Vec<usize> = (0..m).rev().collect();
            let perm = |x: &DMatrix<f64>| DMatrix::from_fn(m, m, |i, j| x[(order[i], order[j])]);
            let plags: Vec<_> = lags.iter().map(perm).collect();
            let a = fevd(&ma_from_lags(&lags, m, n), &gamma, n, SigmaScaling::Jj).unwrap();
            let b = fevd(&ma_from_lags(&plags, m, n), &perm(&gamma), n, SigmaScaling::Jj).unwrap();
            prop_assert!((perm(&a.normalized) - &b.normalized).amax() < 1e-12);
            let ta = build_table(&a.normalized, &labels(m)).unwrap();
            let tb = build_table(&b.normalized, &labels(m)).unwrap();
            prop_assert!((ta.total_spillover - tb.total_spillover).abs() < 1e-9);
        }
    }
}
