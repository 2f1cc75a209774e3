//! Python bindings. Series, grids and contracts are classes; estimators are
//! module functions returning frozen result objects.

use chrono::{NaiveDate, NaiveTime};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyFileNotFoundError, PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use rvcap::capital::{DEFAULT_PROBABILITIES, DEFAULT_WINDOW};
use rvcap::memory::{DEFAULT_DELTA, DEFAULT_T_MAX};
use rvcap::simulate::SimSpec;

create_exception!(
    rvcap,
    RvcapError,
    PyException,
    "Data or numerical failure; message starts with its category."
);

fn py_err(e: rvcap::Error) -> PyErr {
    let msg = format!("{}: {e}", e.category());
    match &e {
        rvcap::Error::Domain(_) => PyValueError::new_err(msg),
        rvcap::Error::Io(io) if io.kind() == std::io::ErrorKind::NotFound => {
            PyFileNotFoundError::new_err(msg)
        }
        rvcap::Error::Io(_) => PyIOError::new_err(msg),
        _ => RvcapError::new_err(msg),
    }
}

fn open(path: &str) -> PyResult<std::fs::File> {
    std::fs::File::open(path).map_err(|e| py_err(e.into()))
}

fn create(path: &str) -> PyResult<std::io::BufWriter<std::fs::File>> {
    std::fs::File::create(path)
        .map(std::io::BufWriter::new)
        .map_err(|e| py_err(e.into()))
}

fn parse<T: std::str::FromStr<Err = rvcap::Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(py_err)
}

#[pyclass(name = "DailySeries", module = "rvcap", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySeries(rvcap::DailySeries);

#[pymethods]
impl PySeries {
    #[new]
    fn new(label: String, dates: Vec<NaiveDate>, values: Vec<Option<f64>>) -> PyResult<Self> {
        rvcap::DailySeries::with_missing(label, dates, values)
            .map(Self)
            .map_err(py_err)
    }

    #[getter]
    fn label(&self) -> &str {
        self.0.label()
    }

    #[getter]
    fn dates(&self) -> Vec<NaiveDate> {
        self.0.dates().to_vec()
    }

    /// Values with `None` for missing days.
    #[getter]
    fn values(&self) -> Vec<Option<f64>> {
        self.0.values().to_vec()
    }

    fn present(&self) -> Vec<f64> {
        self.0.present().0
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "DailySeries(label={:?}, len={}, missing={})",
            self.0.label(),
            self.0.len(),
            self.0.missing_count()
        )
    }

    #[staticmethod]
    fn read_csv(path: &str) -> PyResult<Self> {
        rvcap::DailySeries::read_csv(open(path)?)
            .map(Self)
            .map_err(py_err)
    }

    fn write_csv(&self, path: &str) -> PyResult<()> {
        self.0.write_csv(create(path)?).map_err(py_err)
    }
}

#[pyclass(name = "ContractSpec", module = "rvcap", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyContract(rvcap::ContractSpec);

#[pymethods]
impl PyContract {
    #[new]
    #[pyo3(signature = (name, intervals_per_day, interval_minutes = 5, session_open = None))]
    fn new(
        name: String,
        intervals_per_day: usize,
        interval_minutes: u32,
        session_open: Option<NaiveTime>,
    ) -> PyResult<Self> {
        let mut c = rvcap::ContractSpec::new(name, intervals_per_day, interval_minutes).map_err(py_err)?;
        if let Some(t) = session_open {
            c = c.with_session_open(t);
            c.validate().map_err(py_err)?;
        }
        Ok(Self(c))
    }

    #[staticmethod]
    fn ftse100() -> Self {
        Self(rvcap::ContractSpec::ftse100())
    }

    #[staticmethod]
    fn long_gilt() -> Self {
        Self(rvcap::ContractSpec::long_gilt())
    }

    #[staticmethod]
    fn short_sterling() -> Self {
        Self(rvcap::ContractSpec::short_sterling())
    }

    #[getter]
    fn name(&self) -> &str {
        &self.0.name
    }

    #[getter]
    fn intervals_per_day(&self) -> usize {
        self.0.intervals_per_day
    }

    #[getter]
    fn interval_minutes(&self) -> u32 {
        self.0.interval_minutes
    }

    #[getter]
    fn session_open(&self) -> NaiveTime {
        self.0.session_open
    }

    fn __repr__(&self) -> String {
        format!(
            "ContractSpec(name={:?}, intervals_per_day={}, interval_minutes={})",
            self.0.name, self.0.intervals_per_day, self.0.interval_minutes
        )
    }
}

#[pyclass(name = "TradingCalendar", module = "rvcap", skip_from_py_object)]
#[derive(Clone, Default)]
struct PyCalendar(rvcap::TradingCalendar);

#[pymethods]
impl PyCalendar {
    /// An unbounded calendar with no exclusions.
    #[new]
    fn new() -> Self {
        Self::default()
    }

    /// Parses `holiday`, `halfday` and `range` lines.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        rvcap::TradingCalendar::parse(text.as_bytes())
            .map(Self)
            .map_err(py_err)
    }

    fn add_holiday(&mut self, date: NaiveDate) -> PyResult<()> {
        self.0.add_holiday(date).map_err(py_err)
    }

    fn add_half_day(&mut self, date: NaiveDate) -> PyResult<()> {
        self.0.add_half_day(date).map_err(py_err)
    }

    fn is_trading_day(&self, date: NaiveDate) -> bool {
        self.0.is_trading_day(date)
    }
}

#[pyclass(name = "PriceGrid", module = "rvcap", frozen)]
struct PyPriceGrid(rvcap::IntradayPriceGrid);

#[pymethods]
impl PyPriceGrid {
    #[getter]
    fn intervals(&self) -> usize {
        self.0.intervals()
    }

    #[getter]
    fn days(&self) -> Vec<NaiveDate> {
        self.0.days().to_vec()
    }

    /// One row of `intervals + 1` prices per day.
    #[getter]
    fn prices(&self) -> Vec<Vec<f64>> {
        self.0.prices().to_vec()
    }

    #[getter]
    fn fill_flags(&self) -> Vec<Vec<bool>> {
        self.0.fill_flags().to_vec()
    }

    #[getter]
    fn filled_count(&self) -> usize {
        self.0.filled_count()
    }

    fn log_returns(&self) -> PyReturnGrid {
        PyReturnGrid(rvcap::intraday_log_returns(&self.0))
    }

    #[staticmethod]
    fn read_csv(path: &str) -> PyResult<Self> {
        rvcap::IntradayPriceGrid::read_grid_csv(open(path)?)
            .map(Self)
            .map_err(py_err)
    }

    fn write_csv(&self, path: &str) -> PyResult<()> {
        self.0.write_grid_csv(create(path)?).map_err(py_err)
    }

    /// Writes `date,time,price` rows that `ingest` reads back.
    fn write_price_csv(&self, path: &str, contract: &PyContract) -> PyResult<()> {
        self.0.write_price_csv(&contract.0, create(path)?).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "PriceGrid(days={}, intervals={})",
            self.0.days().len(),
            self.0.intervals()
        )
    }
}

#[pyclass(name = "ReturnGrid", module = "rvcap", frozen)]
struct PyReturnGrid(rvcap::IntradayReturnGrid);

#[pymethods]
impl PyReturnGrid {
    #[new]
    fn new(days: Vec<NaiveDate>, returns: Vec<Vec<f64>>) -> PyResult<Self> {
        rvcap::IntradayReturnGrid::new(days, returns)
            .map(Self)
            .map_err(py_err)
    }

    #[getter]
    fn days(&self) -> Vec<NaiveDate> {
        self.0.days().to_vec()
    }

    #[getter]
    fn returns(&self) -> Vec<Vec<f64>> {
        self.0.returns().to_vec()
    }

    fn daily_return(&self) -> PySeries {
        PySeries(rvcap::daily_return(&self.0))
    }

    /// `measure` is a label such as `"realized_std"` or `"ln_sum_abs"`.
    fn realized_measure(&self, measure: &str) -> PyResult<PySeries> {
        Ok(PySeries(rvcap::realized_measure(&self.0, parse(measure)?)))
    }
}

#[pyclass(name = "SummaryStats", module = "rvcap", frozen, get_all)]
struct PySummary {
    label: String,
    n: usize,
    skipped: usize,
    min: f64,
    q1: f64,
    median: f64,
    q3: f64,
    max: f64,
    mean: f64,
    variance: f64,
    std_dev: f64,
    skewness: Option<f64>,
    excess_kurtosis: Option<f64>,
    skew_se: f64,
    kurt_se: f64,
    percentiles: Vec<(f64, f64)>,
    skew_significant: bool,
    kurtosis_significant: bool,
}

impl From<rvcap::SummaryStats> for PySummary {
    fn from(s: rvcap::SummaryStats) -> Self {
        Self {
            skew_significant: s.skew_significant(),
            kurtosis_significant: s.kurtosis_significant(),
            label: s.label,
            n: s.n,
            skipped: s.skipped,
            min: s.min,
            q1: s.q1,
            median: s.median,
            q3: s.q3,
            max: s.max,
            mean: s.mean,
            variance: s.variance,
            std_dev: s.std_dev,
            skewness: s.skewness,
            excess_kurtosis: s.excess_kurtosis,
            skew_se: s.skew_se,
            kurt_se: s.kurt_se,
            percentiles: s.percentiles,
        }
    }
}

#[pymethods]
impl PySummary {
    fn __repr__(&self) -> String {
        format!(
            "SummaryStats(label={:?}, n={}, mean={}, std_dev={})",
            self.label, self.n, self.mean, self.std_dev
        )
    }
}

#[pyclass(name = "LjungBox", module = "rvcap", frozen, get_all)]
struct PyLjungBox {
    h: usize,
    statistic: f64,
    df: usize,
    p_value: f64,
}

#[pyclass(name = "MemoryEstimate", module = "rvcap", frozen, get_all)]
struct PyMemoryEstimate {
    method: String,
    d: f64,
    se: f64,
    bandwidth_m: usize,
    intercept: f64,
    slope: f64,
    r_squared: f64,
    validity_flag: Option<bool>,
    excluded: usize,
}

impl From<rvcap::MemoryEstimate> for PyMemoryEstimate {
    fn from(m: rvcap::MemoryEstimate) -> Self {
        Self {
            method: match m.method {
                rvcap::MemoryMethod::Gph => "gph",
                rvcap::MemoryMethod::PartialSumScaling => "partial_sum_scaling",
            }
            .into(),
            d: m.d,
            se: m.se,
            bandwidth_m: m.bandwidth_m,
            intercept: m.intercept,
            slope: m.slope,
            r_squared: m.r_squared,
            validity_flag: m.validity_flag,
            excluded: m.excluded,
        }
    }
}

#[pymethods]
impl PyMemoryEstimate {
    fn __repr__(&self) -> String {
        format!(
            "MemoryEstimate(method={:?}, d={}, se={})",
            self.method, self.d, self.se
        )
    }
}

#[pyclass(name = "CapitalRow", module = "rvcap", frozen, get_all)]
struct PyCapitalRow {
    probability: f64,
    long: f64,
    short: f64,
    gaussian: f64,
    z_long: Option<f64>,
    z_short: Option<f64>,
    sign_flag: bool,
}

#[pyclass(name = "CapitalReport", module = "rvcap", frozen, get_all)]
struct PyCapitalReport {
    rows: Vec<Py<PyCapitalRow>>,
    sigma_hat_used: f64,
    sigma_hat_one_day: f64,
    window: usize,
    gaussian_form: String,
    horizon_days: Option<u32>,
    horizon_d: Option<f64>,
    last_date: Option<NaiveDate>,
    z_count: usize,
    z_skipped: usize,
}

/// Parses `date,time,price[,bid,ask]` text and snaps it onto the contract
/// grid. Returns the grid and a dict of removal counts.
#[pyfunction]
#[pyo3(signature = (csv_text, contract, calendar = None, fill = "midquote_then_previous"))]
fn ingest(
    py: Python<'_>,
    csv_text: &str,
    contract: &PyContract,
    calendar: Option<&PyCalendar>,
    fill: &str,
) -> PyResult<(PyPriceGrid, Py<PyDict>)> {
    let cal = calendar.map(|c| c.0.clone()).unwrap_or_default();
    let days = rvcap::parse_price_file(csv_text.as_bytes(), &cal).map_err(py_err)?;
    let (grid, diag) = rvcap::build_grid(&days, &contract.0, &cal, parse(fill)?).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("empty_days_removed", diag.empty_days_removed)?;
    d.set_item("calendar_days_removed", diag.calendar_days_removed)?;
    d.set_item("records_before_open", diag.records_before_open)?;
    Ok((PyPriceGrid(grid), d.unbind()))
}

#[pyfunction]
#[pyo3(signature = (series, probs = Vec::new()))]
fn summary(series: &PySeries, probs: Vec<f64>) -> PyResult<PySummary> {
    rvcap::summary(&series.0, &probs).map(Into::into).map_err(py_err)
}

/// Tukey box-plot numbers as a dict.
#[pyfunction]
fn box_plot<'py>(py: Python<'py>, series: &PySeries) -> PyResult<Bound<'py, PyDict>> {
    let b = rvcap::box_plot(&series.0).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("lower_whisker", b.lower_whisker)?;
    d.set_item("q1", b.q1)?;
    d.set_item("median", b.median)?;
    d.set_item("q3", b.q3)?;
    d.set_item("upper_whisker", b.upper_whisker)?;
    d.set_item("outliers", b.outliers)?;
    Ok(d)
}

/// Autocorrelations for lags `1..=max_lag` and the ±1.96/√n band.
#[pyfunction]
fn acf(series: &PySeries, max_lag: usize) -> PyResult<(Vec<f64>, f64)> {
    let a = rvcap::acf(&series.0, max_lag).map_err(py_err)?;
    Ok((a.rho, a.critical_value))
}

#[pyfunction]
#[pyo3(signature = (series, h = 40))]
fn ljung_box(series: &PySeries, h: usize) -> PyResult<PyLjungBox> {
    let lb = rvcap::ljung_box(&series.0, h).map_err(py_err)?;
    Ok(PyLjungBox {
        h: lb.h,
        statistic: lb.statistic,
        df: lb.df,
        p_value: lb.p_value(),
    })
}

#[pyfunction]
#[pyo3(signature = (series, delta = DEFAULT_DELTA))]
fn gph(series: &PySeries, delta: f64) -> PyResult<PyMemoryEstimate> {
    rvcap::gph_estimate(&series.0, delta)
        .map(Into::into)
        .map_err(py_err)
}

type Scatter = Vec<(usize, f64, f64)>;

/// Returns the estimate and the `(T, ln T, ln var)` scatter.
#[pyfunction]
#[pyo3(signature = (series, t_max = DEFAULT_T_MAX, convention = "paper"))]
fn partial_sum_scaling(
    series: &PySeries,
    t_max: usize,
    convention: &str,
) -> PyResult<(PyMemoryEstimate, Scatter)> {
    let (fit, est) = rvcap::partial_sum_scaling(&series.0, t_max, parse(convention)?).map_err(py_err)?;
    let scatter = fit
        .levels
        .iter()
        .zip(&fit.log_t)
        .zip(&fit.log_var)
        .map(|((t, x), y)| (*t, *x, *y))
        .collect();
    Ok((est.into(), scatter))
}

#[pyfunction]
fn horizon_scale(var_one_day: f64, horizon: u32, d: f64) -> PyResult<f64> {
    rvcap::horizon_scale(var_one_day, horizon, d).map_err(py_err)
}

#[pyfunction]
fn short_capital(sigma_hat: f64, z_q: f64) -> f64 {
    rvcap::short_capital(sigma_hat, z_q)
}

#[pyfunction]
fn long_capital(sigma_hat: f64, z_q: f64) -> f64 {
    rvcap::long_capital(sigma_hat, z_q)
}

#[pyfunction]
#[pyo3(signature = (sigma_hat, p, form = "linear"))]
fn gaussian_capital(sigma_hat: f64, p: f64, form: &str) -> PyResult<f64> {
    rvcap::gaussian_capital_with(sigma_hat, p, parse(form)?).map_err(py_err)
}

#[pyfunction]
fn normal_inverse_cdf(p: f64) -> PyResult<f64> {
    rvcap::normal_inverse_cdf(p).map_err(py_err)
}

#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (returns, realized_std, probs = DEFAULT_PROBABILITIES.to_vec(), window = DEFAULT_WINDOW,
                    gaussian_form = "linear", horizon = None, horizon_d = 0.0))]
fn capital_report(
    py: Python<'_>,
    returns: &PySeries,
    realized_std: &PySeries,
    probs: Vec<f64>,
    window: usize,
    gaussian_form: &str,
    horizon: Option<u32>,
    horizon_d: f64,
) -> PyResult<PyCapitalReport> {
    let options = rvcap::ReportOptions {
        probabilities: probs,
        window,
        gaussian_form: parse(gaussian_form)?,
        horizon: horizon.map(|days| rvcap::Horizon { days, d: horizon_d }),
    };
    let r = rvcap::build_report(&returns.0, &realized_std.0, &options).map_err(py_err)?;
    let rows = r
        .rows
        .iter()
        .map(|row| {
            Py::new(
                py,
                PyCapitalRow {
                    probability: row.probability,
                    long: row.long,
                    short: row.short,
                    gaussian: row.gaussian,
                    z_long: row.z_long,
                    z_short: row.z_short,
                    sign_flag: row.sign_flag,
                },
            )
        })
        .collect::<PyResult<_>>()?;
    Ok(PyCapitalReport {
        rows,
        sigma_hat_used: r.sigma_hat_used,
        sigma_hat_one_day: r.sigma_hat_one_day,
        window: r.window,
        gaussian_form: r.gaussian_form.to_string(),
        horizon_days: r.horizon.map(|h| h.days),
        horizon_d: r.horizon.map(|h| h.d),
        last_date: r.last_date,
        z_count: r.z_count,
        z_skipped: r.z_skipped,
    })
}

#[pyfunction]
fn simulate_constant_vol(
    sigma_daily: f64,
    intervals: usize,
    days: usize,
    seed: u64,
) -> PyResult<PyPriceGrid> {
    rvcap::simulate_constant_vol(&SimSpec::constant_vol(sigma_daily, intervals, days, seed))
        .map(PyPriceGrid)
        .map_err(py_err)
}

/// `factors` are `(rate, vol_of_vol)` pairs; defaults to three factors
/// spanning fast to slow mean reversion.
#[pyfunction]
#[pyo3(signature = (sigma_daily, intervals, days, seed, factors = None))]
fn simulate_ou_sv(
    sigma_daily: f64,
    intervals: usize,
    days: usize,
    seed: u64,
    factors: Option<Vec<(f64, f64)>>,
) -> PyResult<PyPriceGrid> {
    let factors = match factors {
        Some(f) => f
            .into_iter()
            .map(|(rate, vol_of_vol)| rvcap::OuFactor { rate, vol_of_vol })
            .collect(),
        None => SimSpec::default_ou_factors(),
    };
    rvcap::simulate_ou_sv(&SimSpec::ou_sv(sigma_daily, factors, intervals, days, seed))
        .map(PyPriceGrid)
        .map_err(py_err)
}

#[pyfunction]
fn simulate_fractional_noise(d: f64, days: usize, seed: u64) -> PyResult<PySeries> {
    rvcap::simulate_fractional_noise(&SimSpec::fractional_noise(d, days, seed))
        .map(PySeries)
        .map_err(py_err)
}

#[pymodule]
#[pyo3(name = "rvcap")]
fn rvcap_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("RvcapError", m.py().get_type::<RvcapError>())?;
    m.add("TRADING_DAYS_PER_YEAR", rvcap::realized::TRADING_DAYS_PER_YEAR)?;
    m.add_class::<PySeries>()?;
    m.add_class::<PyContract>()?;
    m.add_class::<PyCalendar>()?;
    m.add_class::<PyPriceGrid>()?;
    m.add_class::<PyReturnGrid>()?;
    m.add_class::<PySummary>()?;
    m.add_class::<PyLjungBox>()?;
    m.add_class::<PyMemoryEstimate>()?;
    m.add_class::<PyCapitalRow>()?;
    m.add_class::<PyCapitalReport>()?;
    m.add_function(wrap_pyfunction!(ingest, m)?)?;
    m.add_function(wrap_pyfunction!(summary, m)?)?;
    m.add_function(wrap_pyfunction!(box_plot, m)?)?;
    m.add_function(wrap_pyfunction!(acf, m)?)?;
    m.add_function(wrap_pyfunction!(ljung_box, m)?)?;
    m.add_function(wrap_pyfunction!(gph, m)?)?;
    m.add_function(wrap_pyfunction!(partial_sum_scaling, m)?)?;
    m.add_function(wrap_pyfunction!(horizon_scale, m)?)?;
    m.add_function(wrap_pyfunction!(short_capital, m)?)?;
    m.add_function(wrap_pyfunction!(long_capital, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_capital, m)?)?;
    m.add_function(wrap_pyfunction!(normal_inverse_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(capital_report, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_constant_vol, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_ou_sv, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_fractional_noise, m)?)?;
    Ok(())
}
