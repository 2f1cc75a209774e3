//! Daily realized volatility from intraday futures prices, its distribution
//! and long-memory structure, and minimum capital requirements for long and
//! short positions.
//!
//! The pipeline runs [`ingest`] → [`realized`] → [`descriptive`],
//! [`memory`] and [`capital`]. [`simulate`] supplies synthetic data with
//! known properties for checking each stage.

pub mod capital;
pub mod descriptive;
pub mod error;
pub mod ingest;
pub mod memory;
mod normal;
mod ols;
pub mod realized;
pub mod series;
pub mod simulate;

pub use capital::{
    build_report, empirical_quantile, forecast_sigma, gaussian_capital, gaussian_capital_with, long_capital,
    rescale, short_capital, CapitalReport, CapitalRow, GaussianForm, Horizon, PositionSide, ReportOptions,
    RescaledReturns, VolForecast,
};
pub use descriptive::{acf, box_plot, ljung_box, summary, AcfResult, BoxPlot, LjungBoxResult, SummaryStats};
pub use error::{Error, Result};
pub use ingest::{
    build_grid, intraday_log_returns, parse_price_file, ContractSpec, DayRecords, FillPolicy,
    GridDiagnostics, IntradayPriceGrid, IntradayReturnGrid, PriceRecord, TradingCalendar,
};
pub use memory::{
    gph_estimate, horizon_scale, partial_sum_scaling, periodogram, MemoryEstimate, MemoryMethod, Periodogram,
    ScalingConvention, ScalingFit,
};
pub use normal::normal_inverse_cdf;
pub use realized::{annualize_mean, daily_return, realized_measure, RvKind, RvMeasure};
pub use series::DailySeries;
pub use simulate::{
    simulate_constant_vol, simulate_fractional_noise, simulate_ou_sv, OuFactor, SimKind, SimSpec,
};
