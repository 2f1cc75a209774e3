//! Interval price ingestion: CSV parsing, trading calendar, fixed-grid
//! snapping with gap fill, and intraday log returns.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};
use std::str::FromStr;

use chrono::{Duration, NaiveDate, NaiveTime};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Contract definition: the number of intervals per day and their length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractSpec {
    pub name: String,
    pub intervals_per_day: usize,
    pub interval_minutes: u32,
    /// Time of grid slot 0. Slot `k` sits at `session_open + k * interval_minutes`.
    pub session_open: NaiveTime,
}

impl ContractSpec {
    pub fn new(name: impl Into<String>, intervals_per_day: usize, interval_minutes: u32) -> Result<Self> {
        let spec = Self {
            name: name.into(),
            intervals_per_day,
            interval_minutes,
            session_open: NaiveTime::from_hms_opt(8, 0, 0).expect("valid time"),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_session_open(mut self, open: NaiveTime) -> Self {
        self.session_open = open;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.intervals_per_day < 2 {
            return Err(Error::validation("intervals_per_day must be at least 2"));
        }
        if self.interval_minutes < 1 {
            return Err(Error::validation("interval_minutes must be at least 1"));
        }
        let span = self.interval_minutes as i64 * self.intervals_per_day as i64;
        let secs_left = 86_400
            - self
                .session_open
                .signed_duration_since(NaiveTime::MIN)
                .num_seconds();
        if span * 60 >= secs_left {
            return Err(Error::validation("session grid runs past midnight"));
        }
        Ok(())
    }

    /// FTSE100 index futures, 113 five-minute intervals.
    pub fn ftse100() -> Self {
        Self::new("FTSE100", 113, 5).expect("valid preset")
    }

    /// UK Long Gilt futures, 120 five-minute intervals.
    pub fn long_gilt() -> Self {
        Self::new("UK Long Gilt", 120, 5).expect("valid preset")
    }

    /// Short Sterling futures, 118 five-minute intervals.
    pub fn short_sterling() -> Self {
        Self::new("Sterling", 118, 5).expect("valid preset")
    }

    pub fn slot_time(&self, slot: usize) -> NaiveTime {
        self.session_open + Duration::minutes(self.interval_minutes as i64 * slot as i64)
    }

    /// Latest slot whose time is at or before `t`; `None` before the open.
    pub fn slot_of(&self, t: NaiveTime) -> Option<usize> {
        let offset = t.signed_duration_since(self.session_open).num_seconds();
        if offset < 0 {
            return None;
        }
        let slot = (offset / (self.interval_minutes as i64 * 60)) as usize;
        Some(slot.min(self.intervals_per_day))
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TradingCalendar {
    pub holidays: BTreeSet<NaiveDate>,
    pub half_days: BTreeSet<NaiveDate>,
    pub start: Option<NaiveDate>,
    pub end: Option<NaiveDate>,
}

impl TradingCalendar {
    pub fn unbounded() -> Self {
        Self::default()
    }

    pub fn with_range(start: NaiveDate, end: NaiveDate) -> Result<Self> {
        if start > end {
            return Err(Error::validation(format!(
                "calendar range {start}..{end} is empty"
            )));
        }
        Ok(Self {
            start: Some(start),
            end: Some(end),
            ..Self::default()
        })
    }

    pub fn in_range(&self, date: NaiveDate) -> bool {
        self.start.is_none_or(|s| date >= s) && self.end.is_none_or(|e| date <= e)
    }

    /// Holidays and half days are both removed whole.
    pub fn is_excluded(&self, date: NaiveDate) -> bool {
        self.holidays.contains(&date) || self.half_days.contains(&date)
    }

    pub fn is_trading_day(&self, date: NaiveDate) -> bool {
        self.in_range(date) && !self.is_excluded(date)
    }

    pub fn add_holiday(&mut self, date: NaiveDate) -> Result<()> {
        self.check_in_range(date)?;
        self.holidays.insert(date);
        Ok(())
    }

    pub fn add_half_day(&mut self, date: NaiveDate) -> Result<()> {
        self.check_in_range(date)?;
        self.half_days.insert(date);
        Ok(())
    }

    fn check_in_range(&self, date: NaiveDate) -> Result<()> {
        if self.in_range(date) {
            Ok(())
        } else {
            Err(Error::validation(format!(
                "excluded date {date} outside calendar range"
            )))
        }
    }

    /// Parses `holiday <date>`, `halfday <date>` and an optional
    /// `range <start> <end>` line. `#` starts a comment.
    pub fn parse<R: Read>(source: R) -> Result<Self> {
        let mut cal = Self::default();
        let mut excluded = Vec::new();
        for (idx, line) in BufReader::new(source).lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let mut parts = content.split_whitespace();
            let keyword = parts.next().unwrap_or_default();
            let mut date = || -> Result<NaiveDate> {
                let raw = parts.next().ok_or_else(|| Error::Parse {
                    line: line_no,
                    msg: format!("`{keyword}` needs a date"),
                })?;
                raw.parse().map_err(|e| Error::Parse {
                    line: line_no,
                    msg: format!("bad date `{raw}`: {e}"),
                })
            };
            match keyword {
                "holiday" => excluded.push((date()?, true)),
                "halfday" => excluded.push((date()?, false)),
                "range" => {
                    let (s, e) = (date()?, date()?);
                    if s > e {
                        return Err(Error::Parse {
                            line: line_no,
                            msg: format!("empty range {s}..{e}"),
                        });
                    }
                    cal.start = Some(s);
                    cal.end = Some(e);
                }
                other => {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("unknown keyword `{other}`"),
                    })
                }
            }
        }
        for (d, holiday) in excluded {
            if holiday {
                cal.add_holiday(d)?;
            } else {
                cal.add_half_day(d)?;
            }
        }
        Ok(cal)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FillPolicy {
    /// Midquote of the slot's last bid/ask if present, else the previous slot.
    #[default]
    MidquoteThenPrevious,
    PreviousOnly,
    FailOnGap,
}

impl FromStr for FillPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "midquote_then_previous" => Ok(Self::MidquoteThenPrevious),
            "previous_only" => Ok(Self::PreviousOnly),
            "fail_on_gap" => Ok(Self::FailOnGap),
            _ => Err(Error::Domain(format!("unknown fill policy `{s}`"))),
        }
    }
}

impl fmt::Display for FillPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::MidquoteThenPrevious => "midquote_then_previous",
            Self::PreviousOnly => "previous_only",
            Self::FailOnGap => "fail_on_gap",
        })
    }
}

/// One CSV row. A row may carry only quotes, in which case `price` is `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceRecord {
    pub time: NaiveTime,
    pub price: Option<f64>,
    pub bid: Option<f64>,
    pub ask: Option<f64>,
}

impl PriceRecord {
    pub fn trade(time: NaiveTime, price: f64) -> Self {
        Self {
            time,
            price: Some(price),
            bid: None,
            ask: None,
        }
    }

    fn midquote(&self) -> Option<f64> {
        match (self.bid, self.ask) {
            (Some(b), Some(a)) => Some(0.5 * (b + a)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DayRecords {
    pub date: NaiveDate,
    pub records: Vec<PriceRecord>,
}

fn parse_positive(field: &str, what: &str, line: usize) -> Result<Option<f64>> {
    let field = field.trim();
    if field.is_empty() {
        return Ok(None);
    }
    let v: f64 = field.parse().map_err(|e| Error::Parse {
        line,
        msg: format!("bad {what} `{field}`: {e}"),
    })?;
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::validation(format!(
            "line {line}: {what} {v} is not positive"
        )));
    }
    Ok(Some(v))
}

/// Parses `date,time,price[,bid,ask]` rows, groups them by date and sorts
/// each group by time. Dates outside the calendar range or excluded by it
/// are dropped.
pub fn parse_price_file<R: Read>(source: R, calendar: &TradingCalendar) -> Result<Vec<DayRecords>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(source);
    let headers = rdr.headers()?.clone();
    let names: Vec<&str> = headers.iter().collect();
    let has_quotes = match names.as_slice() {
        ["date", "time", "price"] => false,
        ["date", "time", "price", "bid", "ask"] => true,
        _ => {
            return Err(Error::Parse {
                line: 1,
                msg: format!(
                    "expected header `date,time,price[,bid,ask]`, found `{}`",
                    names.join(",")
                ),
            })
        }
    };
    let width = if has_quotes { 5 } else { 3 };

    let mut by_date: BTreeMap<NaiveDate, Vec<PriceRecord>> = BTreeMap::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map(|p| p.line() as usize).unwrap_or(0);
        if row.len() != width {
            return Err(Error::Parse {
                line,
                msg: format!("expected {width} fields, found {}", row.len()),
            });
        }
        let date: NaiveDate = row[0].parse().map_err(|e| Error::Parse {
            line,
            msg: format!("bad date `{}`: {e}", &row[0]),
        })?;
        let time = NaiveTime::parse_from_str(&row[1], "%H:%M:%S").map_err(|e| Error::Parse {
            line,
            msg: format!("bad time `{}`: {e}", &row[1]),
        })?;
        let price = parse_positive(&row[2], "price", line)?;
        let (bid, ask) = if has_quotes {
            (
                parse_positive(&row[3], "bid", line)?,
                parse_positive(&row[4], "ask", line)?,
            )
        } else {
            (None, None)
        };
        if price.is_none() && (bid.is_none() || ask.is_none()) {
            return Err(Error::Parse {
                line,
                msg: "row has neither a price nor a bid/ask pair".into(),
            });
        }
        if !calendar.is_trading_day(date) {
            continue;
        }
        by_date.entry(date).or_default().push(PriceRecord {
            time,
            price,
            bid,
            ask,
        });
    }

    Ok(by_date
        .into_iter()
        .map(|(date, mut records)| {
            // stable: rows sharing a timestamp keep file order
            records.sort_by_key(|r| r.time);
            DayRecords { date, records }
        })
        .collect())
}

/// Per-day interval prices on a fixed grid of `m + 1` slots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntradayPriceGrid {
    intervals: usize,
    days: Vec<NaiveDate>,
    prices: Vec<Vec<f64>>,
    fill_flags: Vec<Vec<bool>>,
}

impl IntradayPriceGrid {
    pub fn new(
        intervals: usize,
        days: Vec<NaiveDate>,
        prices: Vec<Vec<f64>>,
        fill_flags: Vec<Vec<bool>>,
    ) -> Result<Self> {
        if intervals < 1 {
            return Err(Error::validation("grid needs at least one interval"));
        }
        if days.len() != prices.len() || days.len() != fill_flags.len() {
            return Err(Error::validation("days, prices and fill flags differ in length"));
        }
        if let Some(w) = days.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::validation(format!(
                "grid dates not strictly increasing at {}",
                w[1]
            )));
        }
        for ((day, row), flags) in days.iter().zip(&prices).zip(&fill_flags) {
            if row.len() != intervals + 1 || flags.len() != intervals + 1 {
                return Err(Error::validation(format!(
                    "{day}: expected {} slots, found {}",
                    intervals + 1,
                    row.len()
                )));
            }
            if let Some(p) = row.iter().find(|p| !(**p > 0.0 && p.is_finite())) {
                return Err(Error::validation(format!("{day}: price {p} is not positive")));
            }
        }
        Ok(Self {
            intervals,
            days,
            prices,
            fill_flags,
        })
    }

    /// Grid with every cell observed.
    pub fn observed(intervals: usize, days: Vec<NaiveDate>, prices: Vec<Vec<f64>>) -> Result<Self> {
        let flags = prices.iter().map(|r| vec![false; r.len()]).collect();
        Self::new(intervals, days, prices, flags)
    }

    pub fn intervals(&self) -> usize {
        self.intervals
    }

    pub fn days(&self) -> &[NaiveDate] {
        &self.days
    }

    pub fn prices(&self) -> &[Vec<f64>] {
        &self.prices
    }

    pub fn fill_flags(&self) -> &[Vec<bool>] {
        &self.fill_flags
    }

    pub fn filled_count(&self) -> usize {
        self.fill_flags.iter().flatten().filter(|f| **f).count()
    }

    /// One trade record per slot at the slot's time; feeding these back
    /// through [`build_grid`] reproduces the grid.
    pub fn to_records(&self, contract: &ContractSpec) -> Vec<DayRecords> {
        self.days
            .iter()
            .zip(&self.prices)
            .map(|(date, row)| DayRecords {
                date: *date,
                records: row
                    .iter()
                    .enumerate()
                    .map(|(slot, p)| PriceRecord::trade(contract.slot_time(slot), *p))
                    .collect(),
            })
            .collect()
    }

    /// Writes the grid as a `date,time,price` file readable by
    /// [`parse_price_file`].
    pub fn write_price_csv<W: Write>(&self, contract: &ContractSpec, mut out: W) -> Result<()> {
        if contract.intervals_per_day != self.intervals {
            return Err(Error::validation(format!(
                "contract has {} intervals, grid has {}",
                contract.intervals_per_day, self.intervals
            )));
        }
        writeln!(out, "date,time,price")?;
        for (date, row) in self.days.iter().zip(&self.prices) {
            for (slot, p) in row.iter().enumerate() {
                writeln!(
                    out,
                    "{},{},{}",
                    date,
                    contract.slot_time(slot).format("%H:%M:%S"),
                    p
                )?;
            }
        }
        Ok(())
    }

    /// Writes `date,slot,price,filled` rows.
    pub fn write_grid_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "date,slot,price,filled")?;
        for ((date, row), flags) in self.days.iter().zip(&self.prices).zip(&self.fill_flags) {
            for (slot, (p, f)) in row.iter().zip(flags).enumerate() {
                writeln!(out, "{},{},{},{}", date, slot, p, u8::from(*f))?;
            }
        }
        Ok(())
    }

    pub fn read_grid_csv<R: Read>(source: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["date", "slot", "price", "filled"] {
            return Err(Error::Parse {
                line: 1,
                msg: "expected header `date,slot,price,filled`".into(),
            });
        }
        let mut days: Vec<NaiveDate> = Vec::new();
        let mut prices: Vec<Vec<f64>> = Vec::new();
        let mut flags: Vec<Vec<bool>> = Vec::new();
        for row in rdr.records() {
            let row = row?;
            let line = row.position().map(|p| p.line() as usize).unwrap_or(0);
            let bad = |what: &str| Error::Parse {
                line,
                msg: format!("bad {what}"),
            };
            let date: NaiveDate = row[0].parse().map_err(|_| bad("date"))?;
            let slot: usize = row[1].parse().map_err(|_| bad("slot"))?;
            let price: f64 = row[2].parse().map_err(|_| bad("price"))?;
            let filled = match &row[3] {
                "0" => false,
                "1" => true,
                _ => return Err(bad("filled flag")),
            };
            if days.last() != Some(&date) {
                days.push(date);
                prices.push(Vec::new());
                flags.push(Vec::new());
            }
            let row_prices = prices.last_mut().expect("pushed");
            if slot != row_prices.len() {
                return Err(bad("slot order"));
            }
            row_prices.push(price);
            flags.last_mut().expect("pushed").push(filled);
        }
        let intervals = prices.first().map_or(1, |r| r.len().saturating_sub(1));
        Self::new(intervals, days, prices, flags)
    }
}

/// Counts from grid construction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct GridDiagnostics {
    /// Days removed because no traded price was observed.
    pub empty_days_removed: usize,
    /// Days removed by the calendar.
    pub calendar_days_removed: usize,
    /// Records timestamped before the session open.
    pub records_before_open: usize,
}

/// Snaps each day's records onto the `m + 1` slot grid and fills empty slots.
///
/// Slot 0 is seeded from the day's first observed price when empty, so the
/// overnight gap never enters the intraday returns.
pub fn build_grid(
    days: &[DayRecords],
    contract: &ContractSpec,
    calendar: &TradingCalendar,
    fill: FillPolicy,
) -> Result<(IntradayPriceGrid, GridDiagnostics)> {
    contract.validate()?;
    let m = contract.intervals_per_day;
    let mut diag = GridDiagnostics::default();
    let mut out_days = Vec::new();
    let mut out_prices = Vec::new();
    let mut out_flags = Vec::new();

    let mut sorted: Vec<&DayRecords> = days.iter().collect();
    sorted.sort_by_key(|d| d.date);
    for day in sorted {
        if out_days.last() == Some(&day.date) {
            return Err(Error::validation(format!("duplicate day group {}", day.date)));
        }
        if !calendar.is_trading_day(day.date) {
            diag.calendar_days_removed += 1;
            continue;
        }
        let mut observed: Vec<Option<f64>> = vec![None; m + 1];
        let mut quotes: Vec<Option<f64>> = vec![None; m + 1];
        let mut first_price = None;
        for rec in &day.records {
            let Some(slot) = contract.slot_of(rec.time) else {
                diag.records_before_open += 1;
                continue;
            };
            if let Some(p) = rec.price {
                first_price.get_or_insert(p);
                observed[slot] = Some(p);
            }
            if let Some(q) = rec.midquote() {
                quotes[slot] = Some(q);
            }
        }
        let Some(first_price) = first_price else {
            diag.empty_days_removed += 1;
            continue;
        };

        let mut row = Vec::with_capacity(m + 1);
        let mut flags = Vec::with_capacity(m + 1);
        for slot in 0..=m {
            let (value, filled) = match (observed[slot], fill) {
                (Some(p), _) => (p, false),
                (None, FillPolicy::FailOnGap) => return Err(Error::Gap { date: day.date, slot }),
                (None, _) if slot == 0 => (first_price, true),
                (None, FillPolicy::MidquoteThenPrevious) if quotes[slot].is_some() => {
                    (quotes[slot].expect("checked"), true)
                }
                (None, _) => (row[slot - 1], true),
            };
            row.push(value);
            flags.push(filled);
        }
        out_days.push(day.date);
        out_prices.push(row);
        out_flags.push(flags);
    }
    if diag.empty_days_removed > 0 {
        log::warn!(
            "removed {} days without any observed price",
            diag.empty_days_removed
        );
    }
    let grid = IntradayPriceGrid::new(m, out_days, out_prices, out_flags)?;
    Ok((grid, diag))
}

/// Per-day vectors of `m` intraday log returns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntradayReturnGrid {
    days: Vec<NaiveDate>,
    returns: Vec<Vec<f64>>,
}

impl IntradayReturnGrid {
    pub fn new(days: Vec<NaiveDate>, returns: Vec<Vec<f64>>) -> Result<Self> {
        if days.len() != returns.len() {
            return Err(Error::validation("days and return rows differ in length"));
        }
        if let Some(w) = days.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::validation(format!(
                "dates not strictly increasing at {}",
                w[1]
            )));
        }
        if let Some(first) = returns.first() {
            if first.is_empty() || returns.iter().any(|r| r.len() != first.len()) {
                return Err(Error::validation("return rows must share a non-zero length"));
            }
        }
        if returns.iter().flatten().any(|r| !r.is_finite()) {
            return Err(Error::validation("non-finite intraday return"));
        }
        Ok(Self { days, returns })
    }

    pub fn days(&self) -> &[NaiveDate] {
        &self.days
    }

    pub fn returns(&self) -> &[Vec<f64>] {
        &self.returns
    }

    pub fn intervals(&self) -> usize {
        self.returns.first().map_or(0, Vec::len)
    }
}

pub fn intraday_log_returns(grid: &IntradayPriceGrid) -> IntradayReturnGrid {
    let returns = grid
        .prices
        .iter()
        .map(|row| row.windows(2).map(|w| w[1].ln() - w[0].ln()).collect())
        .collect();
    IntradayReturnGrid {
        days: grid.days.clone(),
        returns,
    }
}
