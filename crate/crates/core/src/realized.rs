//! Daily return and realized-volatility measures aggregated from intraday
//! log returns, with equal intraday weights and no mean-centering.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::IntradayReturnGrid;
use crate::series::DailySeries;

/// Trading days per year used for annual averages.
pub const TRADING_DAYS_PER_YEAR: u32 = 251;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RvKind {
    /// Σ r²
    SumSquares,
    /// sqrt(Σ r²), the realized standard deviation.
    RealizedStd,
    /// Σ |r|
    SumAbs,
    /// Σ |r|^0.5
    SumSqrtAbs,
}

impl RvKind {
    pub const ALL: [RvKind; 4] = [
        Self::SumSquares,
        Self::RealizedStd,
        Self::SumAbs,
        Self::SumSqrtAbs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::SumSquares => "sum_squares",
            Self::RealizedStd => "realized_std",
            Self::SumAbs => "sum_abs",
            Self::SumSqrtAbs => "sum_sqrt_abs",
        }
    }

    /// Value of the measure for one day's intraday returns.
    pub fn of_day(self, returns: &[f64]) -> f64 {
        match self {
            Self::SumSquares => returns.iter().map(|r| r * r).sum(),
            Self::RealizedStd => returns.iter().map(|r| r * r).sum::<f64>().sqrt(),
            Self::SumAbs => returns.iter().map(|r| r.abs()).sum(),
            Self::SumSqrtAbs => returns.iter().map(|r| r.abs().sqrt()).sum(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RvMeasure {
    pub kind: RvKind,
    pub log_transformed: bool,
}

impl RvMeasure {
    pub const fn new(kind: RvKind, log_transformed: bool) -> Self {
        Self {
            kind,
            log_transformed,
        }
    }

    pub const fn raw(kind: RvKind) -> Self {
        Self::new(kind, false)
    }

    pub const fn ln(kind: RvKind) -> Self {
        Self::new(kind, true)
    }

    /// The eight measures: four raw followed by their logs.
    pub fn all() -> Vec<RvMeasure> {
        let raw = RvKind::ALL.iter().map(|k| Self::raw(*k));
        let logs = RvKind::ALL.iter().map(|k| Self::ln(*k));
        raw.chain(logs).collect()
    }

    pub fn label(&self) -> String {
        if self.log_transformed {
            format!("ln_{}", self.kind.name())
        } else {
            self.kind.name().to_string()
        }
    }
}

impl fmt::Display for RvMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for RvMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (log_transformed, rest) = match s.strip_prefix("ln_") {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let kind = RvKind::ALL
            .into_iter()
            .find(|k| k.name() == rest)
            .ok_or_else(|| Error::Domain(format!("unknown measure `{s}`")))?;
        Ok(Self::new(kind, log_transformed))
    }
}

/// Daily return: the sum of the day's intraday log returns.
pub fn daily_return(grid: &IntradayReturnGrid) -> DailySeries {
    let values = grid.returns().iter().map(|r| r.iter().sum()).collect();
    DailySeries::new("daily_return", grid.days().to_vec(), values).expect("grid invariants hold")
}

/// Applies `measure` to each day. Log variants of a zero-volatility day are
/// recorded as missing.
pub fn realized_measure(grid: &IntradayReturnGrid, measure: RvMeasure) -> DailySeries {
    let mut zero_days = 0usize;
    let values: Vec<Option<f64>> = grid
        .returns()
        .iter()
        .map(|day| {
            let v = measure.kind.of_day(day);
            if !measure.log_transformed {
                Some(v)
            } else if v > 0.0 {
                Some(v.ln())
            } else {
                zero_days += 1;
                None
            }
        })
        .collect();
    if zero_days > 0 {
        log::warn!(
            "{}: {} zero-volatility days have no log value",
            measure,
            zero_days
        );
    }
    DailySeries::with_missing(measure.label(), grid.days().to_vec(), values).expect("grid invariants hold")
}

pub fn annualize_mean(daily_mean: f64, trading_days: u32) -> f64 {
    daily_mean * trading_days as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use chrono::NaiveDate;

    fn grid(rows: Vec<Vec<f64>>) -> IntradayReturnGrid {
        let start = NaiveDate::from_ymd_opt(2001, 1, 1).unwrap();
        let days = start.iter_days().take(rows.len()).collect();
        IntradayReturnGrid::new(days, rows).unwrap()
    }

    fn only(s: &DailySeries) -> f64 {
        s.values()[0].unwrap()
    }

    #[test]
    fn daily_return_examples() {
        assert_abs_diff_eq!(
            only(&daily_return(&grid(vec![vec![0.01, -0.02, 0.01]]))),
            0.0,
            epsilon = 1e-18
        );
        assert_eq!(only(&daily_return(&grid(vec![vec![0.0; 5]]))), 0.0);
        let up = vec![(101.0f64 / 100.0).ln(), (102.0f64 / 101.0).ln()];
        assert_abs_diff_eq!(
            only(&daily_return(&grid(vec![up]))),
            0.019_802_627_296_179_712,
            epsilon = 1e-15
        );
    }

    #[test]
    fn three_interval_day() {
        let g = grid(vec![vec![0.01, -0.02, 0.01]]);
        let m = |k| only(&realized_measure(&g, RvMeasure::raw(k)));
        assert_abs_diff_eq!(m(RvKind::SumSquares), 0.0006, epsilon = 1e-15);
        assert_abs_diff_eq!(m(RvKind::RealizedStd), 0.024_494_897_427_831_781, epsilon = 1e-15);
        assert_abs_diff_eq!(m(RvKind::SumAbs), 0.04, epsilon = 1e-15);
        assert_abs_diff_eq!(m(RvKind::SumSqrtAbs), 0.341_421_356_237_309_5, epsilon = 1e-15);
    }

    #[test]
    fn zero_day_and_log_missing() {
        let g = grid(vec![vec![0.0; 4], vec![0.01, 0.0, 0.0, 0.0]]);
        for k in RvKind::ALL {
            assert_eq!(only(&realized_measure(&g, RvMeasure::raw(k))), 0.0);
            let logged = realized_measure(&g, RvMeasure::ln(k));
            assert_eq!(logged.values()[0], None);
            assert!(logged.values()[1].is_some());
            assert_eq!(logged.missing_count(), 1);
        }
    }

    #[test]
    fn single_interval_collapse() {
        let g = grid(vec![vec![-0.01]]);
        let m = |k| only(&realized_measure(&g, RvMeasure::raw(k)));
        assert_abs_diff_eq!(m(RvKind::RealizedStd), 0.01, epsilon = 1e-18);
        assert_abs_diff_eq!(m(RvKind::SumAbs), 0.01, epsilon = 1e-18);
        assert_abs_diff_eq!(m(RvKind::SumSquares), 1e-4, epsilon = 1e-18);
        assert_abs_diff_eq!(m(RvKind::SumSqrtAbs), 0.1, epsilon = 1e-15);
    }

    #[test]
    fn log_variant_is_ln_of_raw() {
        let g = grid(vec![vec![0.01, -0.02, 0.01]]);
        let raw = only(&realized_measure(&g, RvMeasure::raw(RvKind::SumAbs)));
        let ln = only(&realized_measure(&g, RvMeasure::ln(RvKind::SumAbs)));
        assert_eq!(ln, raw.ln());
    }

    #[test]
    fn measure_labels_round_trip() {
        let all = RvMeasure::all();
        assert_eq!(all.len(), 8);
        for m in all {
            assert_eq!(m.label().parse::<RvMeasure>().unwrap(), m);
        }
        assert!("sum_cubes".parse::<RvMeasure>().is_err());
    }

    #[test]
    fn annualized_means() {
        assert_abs_diff_eq!(
            annualize_mean(0.00071, TRADING_DAYS_PER_YEAR),
            0.17821,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            annualize_mean(0.0001, TRADING_DAYS_PER_YEAR),
            0.0251,
            epsilon = 1e-12
        );
        assert_eq!(annualize_mean(0.0, TRADING_DAYS_PER_YEAR), 0.0);
    }
}
