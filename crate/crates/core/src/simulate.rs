//! Seeded data generators for fixtures, Monte Carlo checks and the demo page.

use chrono::{Months, NaiveDate};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::data_ingest::Panel;

pub fn white_noise<R: Rng + ?Sized>(rng: &mut R, t: usize, m: usize) -> DMatrix<f64> {
    DMatrix::from_fn(t, m, |_, _| rng.sample(StandardNormal))
}

/// Simulates `y_t = b0 + Σ_s lags[s]·y_{t-s-1} + u_t` with `u_t ~ N(0, cov)`,
/// discarding `burn_in` leading rows. Starts from zeros.
pub fn simulate_var<R: Rng + ?Sized>(
    rng: &mut R,
    b0: &DVector<f64>,
    lags: &[DMatrix<f64>],
    cov: &DMatrix<f64>,
    t: usize,
    burn_in: usize,
) -> DMatrix<f64> {
    let m = b0.len();
    let chol = cov
        .clone()
        .cholesky()
        .expect("simulation covariance must be positive definite")
        .l();
    let total = t + burn_in;
    let mut y = DMatrix::zeros(total, m);
    for row in 0..total {
        let z = DVector::from_fn(m, |_, _| rng.sample(StandardNormal));
        let mut next = b0 + &chol * z;
        for (s, b) in lags.iter().enumerate() {
            if row > s {
                next += b * y.row(row - s - 1).transpose();
            }
        }
        y.set_row(row, &next.transpose());
    }
    y.rows(burn_in, t).into_owned()
}

/// Random walk `G_t = G_{t-1} + c + d·t + σ·ε_t` starting at `g0`.
pub fn random_walk<R: Rng + ?Sized>(
    rng: &mut R,
    len: usize,
    g0: f64,
    drift: f64,
    trend: f64,
    sigma: f64,
) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    let mut level = g0;
    for t in 0..len {
        if t > 0 {
            let e: f64 = rng.sample(StandardNormal);
            level += drift + trend * t as f64 + sigma * e;
        }
        out.push(level);
    }
    out
}

/// Monthly dates starting at `start`.
pub fn monthly_dates(start: NaiveDate, len: usize) -> Vec<NaiveDate> {
    (0..len)
        .map(|k| start + Months::new(k as u32))
        .collect()
}

/// Log-price-like panel whose shocks transmit differently by sign.
///
/// Series 0 is a leader with drift. Follower `i` receives
/// `up_coupling·max(e_0, 0) + down_coupling·min(e_0, 0)` from the leader's
/// same-period shock and the same split of its previous-period shock
/// scaled by `lag_share`, plus its own noise.
#[derive(Debug, Clone, Copy)]
pub struct AsymmetricSystem {
    pub m: usize,
    pub len: usize,
    pub up_coupling: f64,
    pub down_coupling: f64,
    pub lag_share: f64,
    pub drift: f64,
    pub sigma: f64,
}

impl Default for AsymmetricSystem {
    fn default() -> Self {
        Self {
            m: 3,
            len: 300,
            up_coupling: 0.2,
            down_coupling: 0.9,
            lag_share: 0.5,
            drift: 0.004,
            sigma: 0.04,
        }
    }
}

impl AsymmetricSystem {
    pub fn simulate<R: Rng + ?Sized>(&self, rng: &mut R, start: NaiveDate) -> Panel {
        let m = self.m.max(1);
        let mut levels = vec![vec![0.0; self.len]; m];
        let mut prev_leader = 0.0f64;
        let channel = |e: f64| {
            if e >= 0.0 {
                self.up_coupling * e
            } else {
                self.down_coupling * e
            }
        };
        for t in 0..self.len {
            let leader: f64 = self.sigma * rng.sample::<f64, _>(StandardNormal);
            for (i, col) in levels.iter_mut().enumerate() {
                let own: f64 = self.sigma * rng.sample::<f64, _>(StandardNormal);
                let shock = if i == 0 {
                    leader
                } else {
                    channel(leader) + self.lag_share * channel(prev_leader) + own
                };
                let base = if t == 0 { 4.0 + 0.1 * i as f64 } else { col[t - 1] };
                col[t] = if t == 0 { base } else { base + self.drift + shock };
            }
            prev_leader = leader;
        }
        let names = (0..m).map(|i| format!("S{}", i + 1)).collect();
        Panel::new(monthly_dates(start, self.len), names, levels)
            .expect("simulated panel is well formed")
    }
}
