//! Synthetic price and volatility generators used as oracles for the
//! estimators.
//!
//! Every generator draws from a ChaCha8 stream seeded with
//! `ChaCha8Rng::seed_from_u64(spec.seed)`, so a [`SimSpec`] fully determines
//! its output. Dates are consecutive weekdays from 2000-01-03.

use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::ingest::IntradayPriceGrid;
use crate::series::DailySeries;

pub const START_PRICE: f64 = 100.0;
/// Truncation of the moving-average fallback for fractional noise.
pub const MA_TRUNCATION: usize = 5000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimKind {
    ConstantVol,
    OuSuperpositionSv,
    FractionalNoise,
}

impl FromStr for SimKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "constant_vol" => Ok(Self::ConstantVol),
            "ou_sv" | "ou_superposition_sv" => Ok(Self::OuSuperpositionSv),
            "fractional_noise" => Ok(Self::FractionalNoise),
            _ => Err(Error::Domain(format!("unknown simulation kind `{s}`"))),
        }
    }
}

impl fmt::Display for SimKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::ConstantVol => "constant_vol",
            Self::OuSuperpositionSv => "ou_superposition_sv",
            Self::FractionalNoise => "fractional_noise",
        })
    }
}

/// One Ornstein-Uhlenbeck component of the log-variance, rates per day.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OuFactor {
    pub rate: f64,
    pub vol_of_vol: f64,
}

impl OuFactor {
    pub fn stationary_variance(&self) -> f64 {
        self.vol_of_vol * self.vol_of_vol / (2.0 * self.rate)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSpec {
    pub kind: SimKind,
    /// Daily return standard deviation (innovation scale for fractional noise).
    pub sigma_daily: f64,
    /// Memory parameter for fractional noise, in `[0, 0.5)`.
    pub d: f64,
    pub ou_factors: Vec<OuFactor>,
    pub intervals: usize,
    pub days: usize,
    pub seed: u64,
}

impl SimSpec {
    pub fn constant_vol(sigma_daily: f64, intervals: usize, days: usize, seed: u64) -> Self {
        Self {
            kind: SimKind::ConstantVol,
            sigma_daily,
            d: 0.0,
            ou_factors: Vec::new(),
            intervals,
            days,
            seed,
        }
    }

    pub fn ou_sv(sigma_daily: f64, factors: Vec<OuFactor>, intervals: usize, days: usize, seed: u64) -> Self {
        Self {
            kind: SimKind::OuSuperpositionSv,
            ou_factors: factors,
            ..Self::constant_vol(sigma_daily, intervals, days, seed)
        }
    }

    pub fn fractional_noise(d: f64, days: usize, seed: u64) -> Self {
        Self {
            kind: SimKind::FractionalNoise,
            sigma_daily: 1.0,
            d,
            ou_factors: Vec::new(),
            intervals: 1,
            days,
            seed,
        }
    }

    /// Three factors with daily rates 0.9, 0.09 and 0.009, each contributing
    /// log-variance `0.25`.
    pub fn default_ou_factors() -> Vec<OuFactor> {
        [0.9, 0.09, 0.009]
            .into_iter()
            .map(|rate: f64| OuFactor {
                rate,
                vol_of_vol: (0.5 * rate).sqrt(),
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.intervals < 1 {
            return Err(Error::Domain("intervals must be at least 1".into()));
        }
        if self.days < 1 {
            return Err(Error::Domain("days must be at least 1".into()));
        }
        if !(self.sigma_daily >= 0.0 && self.sigma_daily.is_finite()) {
            return Err(Error::Domain(format!(
                "sigma_daily {} must be non-negative",
                self.sigma_daily
            )));
        }
        if !(0.0..0.5).contains(&self.d) {
            return Err(Error::Domain(format!("d = {} not in [0, 0.5)", self.d)));
        }
        if let Some(f) = self
            .ou_factors
            .iter()
            .find(|f| f.rate.is_nan() || f.rate <= 0.0 || f.vol_of_vol.is_nan() || f.vol_of_vol < 0.0)
        {
            return Err(Error::Domain(format!("invalid OU factor {f:?}")));
        }
        Ok(())
    }

    fn expect_kind(&self, kind: SimKind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::Domain(format!(
                "spec kind {} where {} is required",
                self.kind, kind
            )));
        }
        self.validate()
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

/// `count` consecutive weekdays from 2000-01-03.
pub fn weekdays(count: usize) -> Vec<NaiveDate> {
    NaiveDate::from_ymd_opt(2000, 1, 3)
        .expect("valid date")
        .iter_days()
        .filter(|d| !matches!(d.weekday(), Weekday::Sat | Weekday::Sun))
        .take(count)
        .collect()
}

fn grid_from_returns(intervals: usize, returns: Vec<Vec<f64>>) -> Result<IntradayPriceGrid> {
    let days = weekdays(returns.len());
    let prices = returns
        .iter()
        .map(|day| {
            let mut row = Vec::with_capacity(intervals + 1);
            let mut cum = 0.0;
            row.push(START_PRICE);
            for r in day {
                cum += r;
                row.push(START_PRICE * f64::exp(cum));
            }
            row
        })
        .collect();
    IntradayPriceGrid::observed(intervals, days, prices)
}

/// Interval log returns i.i.d. `N(0, σ²/m)`. Each day opens at 100.
pub fn simulate_constant_vol(spec: &SimSpec) -> Result<IntradayPriceGrid> {
    spec.expect_kind(SimKind::ConstantVol)?;
    let mut rng = spec.rng();
    let scale = spec.sigma_daily / (spec.intervals as f64).sqrt();
    let returns = (0..spec.days)
        .map(|_| {
            (0..spec.intervals)
                .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
                .collect()
        })
        .collect();
    grid_from_returns(spec.intervals, returns)
}

/// Log-variance is a sum of OU factors, discretized exactly at interval
/// resolution and started from stationarity. It is centered by half its
/// stationary variance so the mean daily variance stays `σ²`.
pub fn simulate_ou_sv(spec: &SimSpec) -> Result<IntradayPriceGrid> {
    spec.expect_kind(SimKind::OuSuperpositionSv)?;
    if spec.ou_factors.is_empty() {
        return Err(Error::Domain(
            "OU stochastic volatility needs at least one factor".into(),
        ));
    }
    let mut rng = spec.rng();
    let dt = 1.0 / spec.intervals as f64;
    let steps: Vec<(f64, f64)> = spec
        .ou_factors
        .iter()
        .map(|f| {
            let decay = (-f.rate * dt).exp();
            let sd = (f.stationary_variance() * (1.0 - decay * decay)).sqrt();
            (decay, sd)
        })
        .collect();
    let centering = 0.5
        * spec
            .ou_factors
            .iter()
            .map(OuFactor::stationary_variance)
            .sum::<f64>();
    let mut state: Vec<f64> = spec
        .ou_factors
        .iter()
        .map(|f| f.stationary_variance().sqrt() * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let scale = spec.sigma_daily / (spec.intervals as f64).sqrt();

    let mut returns = Vec::with_capacity(spec.days);
    for _ in 0..spec.days {
        let mut day = Vec::with_capacity(spec.intervals);
        for _ in 0..spec.intervals {
            let log_var = state.iter().sum::<f64>() - centering;
            let shock: f64 = rng.sample(StandardNormal);
            day.push(scale * (0.5 * log_var).exp() * shock);
            for (x, (decay, sd)) in state.iter_mut().zip(&steps) {
                *x = *x * decay + sd * rng.sample::<f64, _>(StandardNormal);
            }
        }
        returns.push(day);
    }
    grid_from_returns(spec.intervals, returns)
}

/// Autocovariances `γ(0..len)` of fractionally integrated noise with
/// innovation variance `sigma²`.
pub fn fractional_autocovariance(d: f64, sigma: f64, len: usize) -> Vec<f64> {
    let mut acv = Vec::with_capacity(len);
    if len == 0 {
        return acv;
    }
    acv.push(sigma * sigma * gamma(1.0 - 2.0 * d) / gamma(1.0 - d).powi(2));
    for k in 1..len {
        let k = k as f64;
        let prev = acv[acv.len() - 1];
        acv.push(prev * (k - 1.0 + d) / (k - d));
    }
    acv
}

/// Gaussian fractional noise of length `days` with memory parameter `d`.
///
/// Uses circulant embedding of the exact autocovariance; if the embedding
/// has a negative eigenvalue it falls back to a truncated moving average.
pub fn simulate_fractional_noise(spec: &SimSpec) -> Result<DailySeries> {
    spec.expect_kind(SimKind::FractionalNoise)?;
    let mut rng = spec.rng();
    let n = spec.days;
    let values = if spec.d == 0.0 {
        (0..n)
            .map(|_| spec.sigma_daily * rng.sample::<f64, _>(StandardNormal))
            .collect()
    } else {
        match circulant_embedding(
            &fractional_autocovariance(spec.d, spec.sigma_daily, n + 1),
            &mut rng,
        ) {
            Some(v) => v,
            None => {
                log::warn!("circulant embedding not non-negative definite; using truncated MA");
                truncated_ma(spec.d, spec.sigma_daily, n, &mut rng)
            }
        }
    };
    DailySeries::new(format!("fractional_noise_d{}", spec.d), weekdays(n), values)
}

/// Samples a stationary Gaussian series with autocovariance `acv[0..=n-1]`
/// (`acv` has length `n + 1`). Returns `None` when the embedding is not
/// non-negative definite.
pub(crate) fn circulant_embedding(acv: &[f64], rng: &mut impl Rng) -> Option<Vec<f64>> {
    let n = acv.len() - 1;
    let size = 2 * n;
    let mut row: Vec<Complex<f64>> = (0..size)
        .map(|k| Complex::new(if k <= n { acv[k] } else { acv[size - k] }, 0.0))
        .collect();
    let fft = FftPlanner::new().plan_fft_forward(size);
    fft.process(&mut row);
    let tol = 1e-10 * row[0].re.abs().max(1.0);
    if row.iter().any(|l| l.re < -tol) {
        return None;
    }
    let mut w: Vec<Complex<f64>> = row
        .iter()
        .map(|l| {
            let amp = (l.re.max(0.0) / size as f64).sqrt();
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            Complex::new(amp * a, amp * b)
        })
        .collect();
    fft.process(&mut w);
    Some(w[..n].iter().map(|c| c.re).collect())
}

/// `x_t = σ Σ_{k ≤ K} ψ_k ε_{t-k}` with `ψ_k = Γ(k + d) / (Γ(d) Γ(k + 1))`.
pub(crate) fn truncated_ma(d: f64, sigma: f64, n: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut psi = Vec::with_capacity(MA_TRUNCATION + 1);
    psi.push(1.0);
    for k in 1..=MA_TRUNCATION {
        let kf = k as f64;
        psi.push(psi[k - 1] * (kf - 1.0 + d) / kf);
    }
    let eps: Vec<f64> = (0..n + MA_TRUNCATION)
        .map(|_| rng.sample(StandardNormal))
        .collect();
    (0..n)
        .map(|t| {
            let now = t + MA_TRUNCATION;
            sigma * psi.iter().enumerate().map(|(k, p)| p * eps[now - k]).sum::<f64>()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descriptive::acf_of;
    use crate::ingest::intraday_log_returns;
    use crate::realized::{realized_measure, RvKind, RvMeasure};
    use statrs::function::gamma::ln_gamma;

    #[test]
    fn zero_vol_is_flat() {
        let g = simulate_constant_vol(&SimSpec::constant_vol(0.0, 10, 5, 1)).unwrap();
        assert!(g.prices().iter().flatten().all(|p| *p == START_PRICE));
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let a = simulate_constant_vol(&SimSpec::constant_vol(0.01, 20, 10, 42)).unwrap();
        let b = simulate_constant_vol(&SimSpec::constant_vol(0.01, 20, 10, 42)).unwrap();
        let c = simulate_constant_vol(&SimSpec::constant_vol(0.01, 20, 10, 43)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);

        let f1 = simulate_fractional_noise(&SimSpec::fractional_noise(0.3, 200, 9)).unwrap();
        let f2 = simulate_fractional_noise(&SimSpec::fractional_noise(0.3, 200, 9)).unwrap();
        assert_eq!(f1, f2);
    }

    #[test]
    fn wrong_kind_and_bad_params() {
        let spec = SimSpec::fractional_noise(0.2, 10, 1);
        assert!(simulate_constant_vol(&spec).is_err());
        assert!(simulate_fractional_noise(&SimSpec::fractional_noise(0.5, 10, 1)).is_err());
        assert!(simulate_ou_sv(&SimSpec::ou_sv(0.01, vec![], 10, 10, 1)).is_err());
        let bad = vec![OuFactor {
            rate: 0.0,
            vol_of_vol: 0.1,
        }];
        assert!(simulate_ou_sv(&SimSpec::ou_sv(0.01, bad, 10, 10, 1)).is_err());
    }

    #[test]
    fn weekdays_skip_weekends() {
        let days = weekdays(6);
        assert_eq!(days[4].to_string(), "2000-01-07");
        assert_eq!(days[5].to_string(), "2000-01-10");
    }

    #[test]
    fn autocovariance_matches_gamma_formula() {
        let d = 0.37;
        let acv = fractional_autocovariance(d, 1.3, 60);
        for k in [0usize, 1, 5, 59] {
            let kf = k as f64;
            let ln = ln_gamma(1.0 - 2.0 * d) + ln_gamma(kf + d)
                - ln_gamma(d)
                - ln_gamma(1.0 - d)
                - ln_gamma(kf + 1.0 - d);
            let direct = 1.3 * 1.3 * ln.exp();
            assert!((acv[k] - direct).abs() < 1e-10 * direct, "lag {k}");
        }
        assert!((acv[1] / acv[0] - d / (1.0 - d)).abs() < 1e-14);
    }

    #[test]
    fn fallback_moving_average_has_right_lag_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let xs = truncated_ma(0.3, 1.0, 4000, &mut rng);
        let rho1 = acf_of(&xs, 1).unwrap().rho[0];
        assert!((rho1 - 0.3 / 0.7).abs() < 0.07, "{rho1}");
    }

    #[test]
    fn white_noise_at_d_zero() {
        let xs = simulate_fractional_noise(&SimSpec::fractional_noise(0.0, 1003, 3)).unwrap();
        let rho1 = crate::descriptive::acf(&xs, 1).unwrap().rho[0];
        assert!(rho1.abs() < 0.07);
    }

    #[test]
    fn sv_without_vol_of_vol_matches_constant_vol_level() {
        let flat = vec![OuFactor {
            rate: 0.5,
            vol_of_vol: 0.0,
        }];
        for seed in 0..5 {
            let sv = simulate_ou_sv(&SimSpec::ou_sv(0.01, flat.clone(), 113, 300, seed)).unwrap();
            let cv = simulate_constant_vol(&SimSpec::constant_vol(0.01, 113, 300, seed)).unwrap();
            let mean_rs = |g: &IntradayPriceGrid| {
                let s = realized_measure(&intraday_log_returns(g), RvMeasure::raw(RvKind::RealizedStd));
                let (v, _) = s.present();
                v.iter().sum::<f64>() / v.len() as f64
            };
            let (a, b) = (mean_rs(&sv), mean_rs(&cv));
            assert!((a / b - 1.0).abs() < 0.05, "seed {seed}: {a} vs {b}");
        }
    }

    #[test]
    fn prices_positive() {
        let g = simulate_ou_sv(&SimSpec::ou_sv(0.05, SimSpec::default_ou_factors(), 50, 50, 11)).unwrap();
        assert!(g.prices().iter().flatten().all(|p| *p > 0.0));
    }
}
