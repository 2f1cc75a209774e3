//! Minimum capital requirements for long and short futures positions from
//! rescaled returns and a realized-volatility forecast.
//!
//! Requirements are fractions of position value. For a one-day volatility
//! forecast `σ̂` and a quantile `z_q` of the rescaled returns:
//!
//! * short: `exp(σ̂ z_q) - 1` with `z_q` from the upper tail,
//! * long:  `1 - exp(σ̂ z_q)` with `z_q` from the lower tail,
//! * gaussian comparison: `σ̂ Φ⁻¹(p)`, identical for both sides.

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::descriptive::{percentile_sorted, sorted_copy};
use crate::error::{Error, Result};
use crate::memory::horizon_scale;
use crate::normal::normal_inverse_cdf;
use crate::series::DailySeries;

pub const DEFAULT_WINDOW: usize = 20;
pub const DEFAULT_PROBABILITIES: [f64; 4] = [0.90, 0.95, 0.99, 0.995];
/// Fewest rescaled returns an empirical tail quantile is taken from.
pub const MIN_QUANTILE_OBS: usize = 100;

/// Daily returns divided by the same day's realized standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RescaledReturns(DailySeries);

impl RescaledReturns {
    pub fn series(&self) -> &DailySeries {
        &self.0
    }

    pub fn into_series(self) -> DailySeries {
        self.0
    }
}

pub fn rescale(returns: &DailySeries, realized_std: &DailySeries) -> Result<RescaledReturns> {
    if returns.dates() != realized_std.dates() {
        return Err(Error::Alignment(format!(
            "{} has {} dates, {} has {} and they differ",
            returns.label(),
            returns.len(),
            realized_std.label(),
            realized_std.len()
        )));
    }
    let mut zero_vol = 0usize;
    let z = returns
        .values()
        .iter()
        .zip(realized_std.values())
        .map(|(r, s)| match (r, s) {
            (Some(r), Some(s)) if *s > 0.0 => Some(r / s),
            (Some(_), Some(_)) => {
                zero_vol += 1;
                None
            }
            _ => None,
        })
        .collect();
    if zero_vol > 0 {
        log::warn!("rescale: {zero_vol} zero-volatility days left missing");
    }
    Ok(RescaledReturns(DailySeries::with_missing(
        "rescaled_return",
        returns.dates().to_vec(),
        z,
    )?))
}

/// Trailing-mean forecast of the realized standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VolForecast {
    pub dates: Vec<NaiveDate>,
    /// Forecast for each date from the `window` preceding values; `None` for
    /// the first `window` dates.
    pub sigma_hat: Vec<Option<f64>>,
    /// Forecast for the day after the last date.
    pub next: f64,
    pub window: usize,
}

pub fn forecast_sigma(realized_std: &DailySeries, window: usize) -> Result<VolForecast> {
    if window == 0 {
        return Err(Error::Domain("forecast window must be at least 1".into()));
    }
    let n = realized_std.len();
    if n <= window {
        return Err(Error::InsufficientData {
            needed: window + 1,
            got: n,
        });
    }
    let vals = realized_std.values();
    if let Some(v) = vals.iter().flatten().find(|v| **v < 0.0) {
        return Err(Error::validation(format!("negative realized std {v}")));
    }
    let mean_of = |slice: &[Option<f64>]| -> Option<f64> {
        let present: Vec<f64> = slice.iter().flatten().copied().collect();
        (!present.is_empty()).then(|| present.iter().sum::<f64>() / present.len() as f64)
    };
    let sigma_hat = (0..n)
        .map(|t| {
            if t < window {
                None
            } else {
                mean_of(&vals[t - window..t])
            }
        })
        .collect();
    let next = mean_of(&vals[n - window..]).ok_or(Error::InsufficientData { needed: 1, got: 0 })?;
    Ok(VolForecast {
        dates: realized_std.dates().to_vec(),
        sigma_hat,
        next,
        window,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PositionSide {
    Long,
    Short,
}

/// Short side: upper `p` quantile. Long side: lower `1 - p` quantile.
pub fn empirical_quantile(z: &RescaledReturns, p: f64, side: PositionSide) -> Result<f64> {
    let (xs, _) = z.series().present();
    quantile_of(&sorted_copy(&xs), p, side)
}

fn quantile_of(sorted: &[f64], p: f64, side: PositionSide) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("probability {p} not in (0, 1)")));
    }
    if sorted.len() < MIN_QUANTILE_OBS {
        return Err(Error::InsufficientData {
            needed: MIN_QUANTILE_OBS,
            got: sorted.len(),
        });
    }
    Ok(match side {
        PositionSide::Short => percentile_sorted(sorted, p),
        PositionSide::Long => percentile_sorted(sorted, 1.0 - p),
    })
}

pub fn short_capital(sigma_hat: f64, z_q: f64) -> f64 {
    (sigma_hat * z_q).exp_m1()
}

pub fn long_capital(sigma_hat: f64, z_q: f64) -> f64 {
    -(sigma_hat * z_q).exp_m1()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GaussianForm {
    /// `σ̂ Φ⁻¹(p)`
    #[default]
    Linear,
    /// `exp(σ̂ Φ⁻¹(p)) - 1`
    Exp,
}

impl FromStr for GaussianForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Self::Linear),
            "exp" => Ok(Self::Exp),
            _ => Err(Error::Domain(format!("unknown gaussian form `{s}`"))),
        }
    }
}

impl fmt::Display for GaussianForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Linear => "linear",
            Self::Exp => "exp",
        })
    }
}

/// Gaussian comparison requirement, the same for long and short positions.
pub fn gaussian_capital(sigma_hat: f64, p: f64) -> Result<f64> {
    gaussian_capital_with(sigma_hat, p, GaussianForm::Linear)
}

pub fn gaussian_capital_with(sigma_hat: f64, p: f64, form: GaussianForm) -> Result<f64> {
    if !(p > 0.5 && p < 1.0) {
        return Err(Error::Domain(format!("probability {p} not in (0.5, 1)")));
    }
    let x = sigma_hat * normal_inverse_cdf(p)?;
    Ok(match form {
        GaussianForm::Linear => x,
        GaussianForm::Exp => x.exp_m1(),
    })
}

/// Multi-day scaling applied to the forecast variance before reporting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Horizon {
    pub days: u32,
    pub d: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportOptions {
    pub probabilities: Vec<f64>,
    pub window: usize,
    pub gaussian_form: GaussianForm,
    pub horizon: Option<Horizon>,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            probabilities: DEFAULT_PROBABILITIES.to_vec(),
            window: DEFAULT_WINDOW,
            gaussian_form: GaussianForm::Linear,
            horizon: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapitalRow {
    pub probability: f64,
    pub long: f64,
    pub short: f64,
    pub gaussian: f64,
    /// Lower-tail quantile used for the long side; `None` when `σ̂ = 0`
    /// leaves no rescaled returns to take it from.
    pub z_long: Option<f64>,
    pub z_short: Option<f64>,
    /// Set when a tail quantile has the unexpected sign (positive long or
    /// negative short), making that requirement negative.
    pub sign_flag: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapitalReport {
    pub rows: Vec<CapitalRow>,
    /// Forecast realized standard deviation, after any horizon scaling.
    pub sigma_hat_used: f64,
    /// One-day forecast before horizon scaling.
    pub sigma_hat_one_day: f64,
    pub window: usize,
    pub gaussian_form: GaussianForm,
    pub horizon: Option<Horizon>,
    pub last_date: Option<NaiveDate>,
    pub z_count: usize,
    pub z_skipped: usize,
}

impl CapitalReport {
    pub fn probabilities(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.probability).collect()
    }

    pub fn row(&self, p: f64) -> Option<&CapitalRow> {
        self.rows.iter().find(|r| (r.probability - p).abs() < 1e-12)
    }
}

/// Full-sample quantiles of the rescaled returns combined with the trailing
/// volatility forecast for the day after the last observation.
pub fn build_report(
    returns: &DailySeries,
    realized_std: &DailySeries,
    options: &ReportOptions,
) -> Result<CapitalReport> {
    if options.probabilities.is_empty() {
        return Err(Error::Domain("no probabilities requested".into()));
    }
    if let Some(p) = options.probabilities.iter().find(|p| !(**p > 0.5 && **p < 1.0)) {
        return Err(Error::Domain(format!("probability {p} not in (0.5, 1)")));
    }
    let z = rescale(returns, realized_std)?;
    let forecast = forecast_sigma(realized_std, options.window)?;
    let one_day = forecast.next;
    let sigma = match options.horizon {
        Some(h) => horizon_scale(one_day * one_day, h.days, h.d)?.sqrt(),
        None => one_day,
    };
    let (zs, z_skipped) = z.series().present();
    let sorted = sorted_copy(&zs);

    let mut probs = options.probabilities.clone();
    probs.sort_by(f64::total_cmp);
    probs.dedup();
    let mut rows = Vec::with_capacity(probs.len());
    for p in probs {
        let gaussian = gaussian_capital_with(sigma, p, options.gaussian_form)?;
        let row = if sigma == 0.0 && sorted.len() < MIN_QUANTILE_OBS {
            CapitalRow {
                probability: p,
                long: 0.0,
                short: 0.0,
                gaussian,
                z_long: None,
                z_short: None,
                sign_flag: false,
            }
        } else {
            let z_long = quantile_of(&sorted, p, PositionSide::Long)?;
            let z_short = quantile_of(&sorted, p, PositionSide::Short)?;
            CapitalRow {
                probability: p,
                long: long_capital(sigma, z_long),
                short: short_capital(sigma, z_short),
                gaussian,
                z_long: Some(z_long),
                z_short: Some(z_short),
                sign_flag: z_long > 0.0 || z_short < 0.0,
            }
        };
        if row.sign_flag {
            log::warn!("capital: tail quantile with unexpected sign at p = {p}");
        }
        rows.push(row);
    }
    Ok(CapitalReport {
        rows,
        sigma_hat_used: sigma,
        sigma_hat_one_day: one_day,
        window: options.window,
        gaussian_form: options.gaussian_form,
        horizon: options.horizon,
        last_date: returns.dates().last().copied(),
        z_count: zs.len(),
        z_skipped,
    })
}
