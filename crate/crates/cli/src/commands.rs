//! One function per subcommand. Each resolves its settings, writes the
//! resolved values back into the config so the manifest echoes them, and
//! stages its outputs on the [`Run`].

use std::path::Path;
use std::str::FromStr;

use chrono::NaiveTime;
use rvcap::capital::{rescale, DEFAULT_PROBABILITIES, DEFAULT_WINDOW};
use rvcap::memory::{DEFAULT_DELTA, DEFAULT_T_MAX};
use rvcap::simulate::SimSpec;
use rvcap::{
    box_plot, build_grid, build_report, daily_return, intraday_log_returns, parse_price_file,
    realized_measure, simulate_constant_vol, simulate_fractional_noise, simulate_ou_sv, summary,
    ContractSpec, DailySeries, FillPolicy, GaussianForm, Horizon, IntradayPriceGrid, IntradayReturnGrid,
    OuFactor, ReportOptions, RvKind, RvMeasure, ScalingConvention, SimKind, TradingCalendar,
};
use serde::Serialize;

use crate::analysis::{analyze, MemoryBlock, MemorySettings};
use crate::output::Run;
use crate::render;
use crate::CliError;

/// Tail percentiles shown under the summary statistics.
const DEFAULT_PERCENTILES: [f64; 8] = [0.005, 0.01, 0.05, 0.10, 0.90, 0.95, 0.99, 0.995];
const DEFAULT_LB_LAGS: usize = 40;
const DEFAULT_ACF_LAGS: usize = 50;
const DEFAULT_SIM_SIGMA: f64 = 0.01;
const DEFAULT_SIM_DAYS: usize = 1003;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Text,
    Csv,
    Json,
}

fn parse<T: FromStr>(flag: &str, s: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    s.parse()
        .map_err(|e| CliError::usage("usage.invalid_value", format!("--{flag} {s}: {e}")))
}

fn required<T: Clone>(v: &Option<T>, flag: &str) -> Result<T, CliError> {
    v.clone()
        .ok_or_else(|| CliError::usage("usage.missing_argument", format!("--{flag} is required")))
}

fn format(run: &mut Run, allowed: &[Format]) -> Result<Format, CliError> {
    let name = run.cfg.output.format.get_or_insert_with(|| "text".into()).clone();
    let f = match name.as_str() {
        "text" => Format::Text,
        "csv" => Format::Csv,
        "json" => Format::Json,
        other => {
            return Err(CliError::usage(
                "usage.invalid_value",
                format!("--format {other}"),
            ))
        }
    };
    if !allowed.contains(&f) {
        return Err(CliError::usage(
            "usage.invalid_value",
            format!("--format {name} is not available for this command"),
        ));
    }
    Ok(f)
}

fn to_json<T: Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(v).expect("report serializes");
    s.push(b'\n');
    s
}

fn contract(run: &mut Run) -> Result<ContractSpec, CliError> {
    let o = &mut run.cfg.ingest;
    let preset = o.contract.get_or_insert_with(|| "ftse100".into()).clone();
    let base = match preset.to_ascii_lowercase().replace('-', "_").as_str() {
        "ftse100" | "ftse" => ContractSpec::ftse100(),
        "long_gilt" | "gilt" => ContractSpec::long_gilt(),
        "sterling" | "short_sterling" => ContractSpec::short_sterling(),
        other => {
            return Err(CliError::usage(
                "usage.invalid_value",
                format!("--contract {other}"),
            ))
        }
    };
    let intervals = *o.intervals.get_or_insert(base.intervals_per_day);
    let minutes = *o.interval_minutes.get_or_insert(base.interval_minutes);
    let open_text = o
        .session_open
        .get_or_insert_with(|| base.session_open.format("%H:%M:%S").to_string())
        .clone();
    let open = NaiveTime::parse_from_str(&open_text, "%H:%M:%S")
        .or_else(|_| NaiveTime::parse_from_str(&open_text, "%H:%M"))
        .map_err(|e| CliError::usage("usage.invalid_value", format!("--session-open {open_text}: {e}")))?;
    Ok(ContractSpec::new(base.name, intervals, minutes)?.with_session_open(open))
}

fn calendar(run: &mut Run) -> Result<TradingCalendar, CliError> {
    match run.cfg.ingest.calendar.clone() {
        Some(path) => Ok(TradingCalendar::parse(&run.read(&path)?[..])?),
        None => Ok(TradingCalendar::unbounded()),
    }
}

fn price_grid(run: &mut Run) -> Result<IntradayPriceGrid, CliError> {
    let input = required(&run.cfg.ingest.input, "input")?;
    let contract = contract(run)?;
    let calendar = calendar(run)?;
    let fill_name = run
        .cfg
        .ingest
        .fill
        .get_or_insert_with(|| FillPolicy::default().to_string())
        .clone();
    let fill: FillPolicy = parse("fill", &fill_name)?;
    let bytes = run.read(&input)?;
    let days = parse_price_file(&bytes[..], &calendar)?;
    let (grid, diag) = build_grid(&days, &contract, &calendar, fill)?;
    log::info!(
        "{} days on a {}-interval grid, {} slots filled",
        grid.days().len(),
        grid.intervals(),
        grid.filled_count()
    );
    if diag.empty_days_removed + diag.calendar_days_removed > 0 {
        log::warn!(
            "removed {} days without trades and {} calendar exclusions",
            diag.empty_days_removed,
            diag.calendar_days_removed
        );
    }
    if diag.records_before_open > 0 {
        log::warn!(
            "{} records before the session open were ignored",
            diag.records_before_open
        );
    }
    Ok(grid)
}

/// From a grid CSV when given, otherwise by ingesting raw prices.
fn return_grid(run: &mut Run) -> Result<IntradayReturnGrid, CliError> {
    let grid = match run.cfg.inputs.grid.clone() {
        Some(path) => IntradayPriceGrid::read_grid_csv(&run.read(&path)?[..])?,
        None if run.cfg.ingest.input.is_some() => price_grid(run)?,
        None => {
            return Err(CliError::usage(
                "usage.missing_argument",
                "--grid or --input is required",
            ))
        }
    };
    Ok(intraday_log_returns(&grid))
}

fn read_series(run: &mut Run, path: &Path) -> Result<DailySeries, CliError> {
    Ok(DailySeries::read_csv(&run.read(path)?[..])?)
}

fn series_csv(s: &DailySeries) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    s.write_csv(&mut buf)?;
    Ok(buf)
}

fn measures(run: &mut Run) -> Result<Vec<RvMeasure>, CliError> {
    let names = run
        .cfg
        .stats
        .measures
        .get_or_insert_with(|| RvMeasure::all().iter().map(RvMeasure::label).collect())
        .clone();
    names.iter().map(|n| parse("measures", n)).collect()
}

fn percentiles(run: &mut Run) -> Vec<f64> {
    run.cfg
        .stats
        .percentiles
        .get_or_insert_with(|| DEFAULT_PERCENTILES.to_vec())
        .clone()
}

fn memory_settings(run: &mut Run) -> Result<MemorySettings, CliError> {
    let o = &mut run.cfg.memory;
    let convention = o
        .convention
        .get_or_insert_with(|| ScalingConvention::default().to_string())
        .clone();
    Ok(MemorySettings {
        delta: *o.delta.get_or_insert(DEFAULT_DELTA),
        t_max: *o.tmax.get_or_insert(DEFAULT_T_MAX),
        convention: parse("convention", &convention)?,
        lb_lags: *o.lb_lags.get_or_insert(DEFAULT_LB_LAGS),
        acf_lags: *o.acf_lags.get_or_insert(DEFAULT_ACF_LAGS),
    })
}

/// Report options; `estimate_d` supplies the horizon memory parameter when
/// none was configured.
fn report_options(run: &mut Run, estimate_d: Option<f64>) -> Result<ReportOptions, CliError> {
    let o = &mut run.cfg.capital;
    let form_name = o
        .gaussian_form
        .get_or_insert_with(|| GaussianForm::default().to_string())
        .clone();
    let horizon = match o.horizon {
        None => None,
        Some(days) => {
            let d = match (o.horizon_d, estimate_d) {
                (Some(d), _) | (None, Some(d)) => d,
                (None, None) => {
                    return Err(CliError::usage(
                        "usage.missing_argument",
                        "--horizon needs --horizon-d (or use `report`, which estimates it)",
                    ))
                }
            };
            o.horizon_d = Some(d);
            Some(Horizon { days, d })
        }
    };
    Ok(ReportOptions {
        probabilities: o
            .probs
            .get_or_insert_with(|| DEFAULT_PROBABILITIES.to_vec())
            .clone(),
        window: *o.window.get_or_insert(DEFAULT_WINDOW),
        gaussian_form: parse("gaussian-form", &form_name)?,
        horizon,
    })
}

pub fn ingest(run: &mut Run) -> Result<(), CliError> {
    let grid = price_grid(run)?;
    let mut buf = Vec::new();
    grid.write_grid_csv(&mut buf)?;
    let out = run.cfg.output.out.clone();
    run.emit(out.as_deref(), buf);
    Ok(())
}

pub fn rv(run: &mut Run) -> Result<(), CliError> {
    let dir = required(&run.cfg.output.out_dir, "out-dir")?;
    let measures = measures(run)?;
    let grid = return_grid(run)?;
    let r = daily_return(&grid);
    run.emit(Some(&dir.join("daily_return.csv")), series_csv(&r)?);
    for m in measures {
        let s = realized_measure(&grid, m);
        run.emit(Some(&dir.join(format!("{}.csv", m.label()))), series_csv(&s)?);
    }
    Ok(())
}

pub fn stats(run: &mut Run) -> Result<(), CliError> {
    let fmt = format(run, &[Format::Text, Format::Csv, Format::Json])?;
    let probs = percentiles(run);
    let path = required(&run.cfg.inputs.series, "series")?;
    let series = read_series(run, &path)?;
    let s = summary(&series, &probs)?;
    let b = box_plot(&series)?;
    let bytes = match fmt {
        Format::Text => {
            render::summary_table(&format!("Summary statistics: {}", s.label), &[s], &[b]).into_bytes()
        }
        Format::Csv => render::summary_csv(&s, &b).into_bytes(),
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                summary: &'a rvcap::SummaryStats,
                box_plot: &'a rvcap::BoxPlot,
            }
            to_json(&Doc {
                summary: &s,
                box_plot: &b,
            })
        }
    };
    let out = run.cfg.output.out.clone();
    run.emit(out.as_deref(), bytes);
    Ok(())
}

pub fn memory(run: &mut Run) -> Result<(), CliError> {
    let fmt = format(run, &[Format::Text, Format::Csv, Format::Json])?;
    let settings = memory_settings(run)?;
    let path = required(&run.cfg.inputs.series, "series")?;
    let series = read_series(run, &path)?;
    let (block, err) = analyze(&series, &settings);
    if let Some(e) = err {
        return Err(e.into());
    }
    let bytes = match fmt {
        Format::Text => {
            render::memory_table(&format!("Memory: {}", block.label), std::slice::from_ref(&block))
        }
        Format::Csv => render::memory_csv(&block),
        Format::Json => String::from_utf8(to_json(&block)).expect("utf-8"),
    };
    let out = run.cfg.output.out.clone();
    run.emit(out.as_deref(), bytes.into_bytes());
    if let Some(scatter) = run.cfg.output.scatter_out.clone() {
        let csv = render::scatter_csv(&block).expect("scaling fit present");
        run.emit(Some(&scatter), csv.into_bytes());
    }
    Ok(())
}

pub fn capital(run: &mut Run) -> Result<(), CliError> {
    let fmt = format(run, &[Format::Text, Format::Csv, Format::Json])?;
    let options = report_options(run, None)?;
    let returns_path = required(&run.cfg.inputs.returns, "returns")?;
    let rstd_path = required(&run.cfg.inputs.rstd, "rstd")?;
    let returns = read_series(run, &returns_path)?;
    let rstd = read_series(run, &rstd_path)?;
    let report = build_report(&returns, &rstd, &options)?;
    let bytes = match fmt {
        Format::Text => render::capital_table("Minimum capital requirements", &report).into_bytes(),
        Format::Csv => render::capital_csv(&report).into_bytes(),
        Format::Json => to_json(&report),
    };
    let out = run.cfg.output.out.clone();
    run.emit(out.as_deref(), bytes);
    Ok(())
}

fn ou_factors(specs: &[String]) -> Result<Vec<OuFactor>, CliError> {
    specs
        .iter()
        .map(|s| {
            let (rate, vol) = s.split_once(':').ok_or_else(|| {
                CliError::usage(
                    "usage.invalid_value",
                    format!("--ou-factors {s}: expected rate:vol_of_vol"),
                )
            })?;
            Ok(OuFactor {
                rate: parse("ou-factors", rate.trim())?,
                vol_of_vol: parse("ou-factors", vol.trim())?,
            })
        })
        .collect()
}

pub fn simulate(run: &mut Run) -> Result<(), CliError> {
    let contract = contract(run)?;
    let o = &mut run.cfg.simulate;
    let kind: SimKind = parse("kind", o.kind.get_or_insert_with(|| "constant_vol".into()))?;
    let days = *o.days.get_or_insert(DEFAULT_SIM_DAYS);
    let seed = *o.seed.get_or_insert(0);
    let bytes = match kind {
        SimKind::FractionalNoise => {
            let d = *o.d.get_or_insert(0.0);
            series_csv(&simulate_fractional_noise(&SimSpec::fractional_noise(
                d, days, seed,
            ))?)?
        }
        SimKind::ConstantVol | SimKind::OuSuperpositionSv => {
            let sigma = *o.sigma.get_or_insert(DEFAULT_SIM_SIGMA);
            let m = contract.intervals_per_day;
            let grid = if kind == SimKind::ConstantVol {
                simulate_constant_vol(&SimSpec::constant_vol(sigma, m, days, seed))?
            } else {
                let factors = match &o.ou_factors {
                    Some(f) => ou_factors(f)?,
                    None => {
                        let f = SimSpec::default_ou_factors();
                        o.ou_factors =
                            Some(f.iter().map(|f| format!("{}:{}", f.rate, f.vol_of_vol)).collect());
                        f
                    }
                };
                simulate_ou_sv(&SimSpec::ou_sv(sigma, factors, m, days, seed))?
            };
            let mut buf = Vec::new();
            grid.write_price_csv(&contract, &mut buf)?;
            buf
        }
    };
    let out = run.cfg.output.out.clone();
    run.emit(out.as_deref(), bytes);
    Ok(())
}

#[derive(Serialize)]
struct ReportDoc<'a> {
    days: usize,
    intervals: usize,
    first_date: Option<chrono::NaiveDate>,
    last_date: Option<chrono::NaiveDate>,
    returns: &'a [rvcap::SummaryStats],
    measures: &'a [rvcap::SummaryStats],
    memory: &'a MemoryBlock,
    capital: &'a rvcap::CapitalReport,
}

/// The whole chain: grid, daily measures, their distributions, memory in
/// absolute returns and capital requirements.
pub fn report(run: &mut Run) -> Result<(), CliError> {
    let fmt = format(run, &[Format::Text, Format::Json])?;
    let measures = measures(run)?;
    let probs = percentiles(run);
    let settings = memory_settings(run)?;
    let grid = return_grid(run)?;

    let r = daily_return(&grid);
    let rstd = realized_measure(&grid, RvMeasure::raw(RvKind::RealizedStd));
    let z = rescale(&r, &rstd)?.into_series();
    let returns = vec![summary(&r, &probs)?, summary(&z, &probs)?];
    let boxes = vec![box_plot(&r)?, box_plot(&z)?];
    let measure_stats = measures
        .iter()
        .map(|m| summary(&realized_measure(&grid, *m), &[]))
        .collect::<Result<Vec<_>, _>>()?;

    let abs = realized_measure(&grid, RvMeasure::raw(RvKind::SumAbs));
    let (memory, _) = analyze(&abs, &settings);
    let estimated_d = memory.scaling.as_ref().map(|s| s.d);
    if run.cfg.capital.horizon.is_some() && run.cfg.capital.horizon_d.is_none() && estimated_d.is_none() {
        return Err(CliError::numeric(
            "numeric.estimation",
            "horizon scaling needs d, and the scaling-law estimate failed",
        ));
    }
    let options = report_options(run, estimated_d)?;
    let capital = build_report(&r, &rstd, &options)?;

    let bytes = match fmt {
        Format::Text => {
            let mut doc = String::new();
            let dates = grid.days();
            doc.push_str(&format!(
                "Realized volatility report: {} days, {} intervals per day",
                dates.len(),
                grid.intervals()
            ));
            if let (Some(a), Some(b)) = (dates.first(), dates.last()) {
                doc.push_str(&format!(", {a} to {b}"));
            }
            doc.push_str("\n\n");
            doc.push_str(&render::summary_table(
                "Daily returns and rescaled returns (returns in percent)",
                &returns,
                &boxes,
            ));
            doc.push('\n');
            doc.push_str(&render::moments_table(
                "Daily realized volatility measures (raw measures in percent)",
                &measure_stats,
            ));
            doc.push('\n');
            doc.push_str(&render::memory_table(
                "Memory in absolute daily returns",
                std::slice::from_ref(&memory),
            ));
            doc.push('\n');
            doc.push_str(&render::capital_table("Minimum capital requirements", &capital));
            doc.into_bytes()
        }
        Format::Json => to_json(&ReportDoc {
            days: grid.days().len(),
            intervals: grid.intervals(),
            first_date: grid.days().first().copied(),
            last_date: grid.days().last().copied(),
            returns: &returns,
            measures: &measure_stats,
            memory: &memory,
            capital: &capital,
        }),
        Format::Csv => unreachable!("rejected by format()"),
    };
    let out = run.cfg.output.out.clone();
    run.emit(out.as_deref(), bytes);
    if let Some(scatter) = run.cfg.output.scatter_out.clone() {
        if let Some(csv) = render::scatter_csv(&memory) {
            run.emit(Some(&scatter), csv.into_bytes());
        }
    }
    Ok(())
}
