//! Text tables (percent, three decimals) and CSV renderings.

use std::fmt::Write;

use rvcap::{BoxPlot, CapitalReport, SummaryStats};

use crate::analysis::MemoryBlock;

/// Series whose values are returns or return-scale volatility; tables show
/// them in percent. Log measures and rescaled returns stay as they are.
pub fn is_percent_scale(label: &str) -> bool {
    matches!(
        label,
        "daily_return" | "sum_squares" | "realized_std" | "sum_abs" | "sum_sqrt_abs"
    )
}

pub fn fixed3(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

pub fn prob_label(p: f64) -> String {
    let s = format!("{:.1}", p * 100.0);
    s.strip_suffix(".0").map(str::to_owned).unwrap_or(s)
}

fn csv_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub struct Table {
    title: String,
    header: Vec<String>,
    rows: Vec<(String, Vec<String>)>,
}

impl Table {
    pub fn new(title: impl Into<String>, header: Vec<String>) -> Self {
        Self {
            title: title.into(),
            header,
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, label: impl Into<String>, cells: Vec<String>) {
        self.rows.push((label.into(), cells));
    }

    /// A label-only line, e.g. a block heading.
    pub fn section(&mut self, label: impl Into<String>) {
        self.rows.push((label.into(), Vec::new()));
    }

    pub fn render(&self) -> String {
        let lw = self
            .rows
            .iter()
            .map(|(l, _)| l.chars().count())
            .chain(std::iter::once(0))
            .max()
            .unwrap_or(0);
        let widths: Vec<usize> = (0..self.header.len())
            .map(|j| {
                self.rows
                    .iter()
                    .filter_map(|(_, c)| c.get(j).map(|s| s.chars().count()))
                    .chain(std::iter::once(self.header[j].chars().count()))
                    .max()
                    .unwrap_or(0)
                    .max(8)
            })
            .collect();
        let mut out = String::new();
        if !self.title.is_empty() {
            let _ = writeln!(out, "{}", self.title);
        }
        let _ = write!(out, "{:lw$}", "");
        for (h, w) in self.header.iter().zip(&widths) {
            let _ = write!(out, "  {h:>w$}");
        }
        out.push('\n');
        for (label, cells) in &self.rows {
            let _ = write!(out, "{label:lw$}");
            for (c, w) in cells.iter().zip(&widths) {
                let _ = write!(out, "  {c:>w$}");
            }
            out.truncate(out.trim_end().len());
            out.push('\n');
        }
        out
    }
}

fn starred(v: Option<f64>, significant: bool) -> String {
    match v {
        Some(x) => format!("{}{}", fixed3(x), if significant { "*" } else { "" }),
        None => "n/a".into(),
    }
}

/// Min, quartiles, moments and a percentile block, one column per series.
pub fn summary_table(title: &str, stats: &[SummaryStats], boxes: &[BoxPlot]) -> String {
    let header = stats.iter().map(|s| s.label.clone()).collect();
    let mut t = Table::new(title, header);
    let scale: Vec<f64> = stats
        .iter()
        .map(|s| if is_percent_scale(&s.label) { 100.0 } else { 1.0 })
        .collect();
    let col = |f: &dyn Fn(&SummaryStats) -> f64| -> Vec<String> {
        stats.iter().zip(&scale).map(|(s, k)| fixed3(f(s) * k)).collect()
    };
    t.row("N", stats.iter().map(|s| s.n.to_string()).collect());
    if stats.iter().any(|s| s.skipped > 0) {
        t.row("Missing", stats.iter().map(|s| s.skipped.to_string()).collect());
    }
    t.row("Min", col(&|s| s.min));
    t.row("1st Qtr", col(&|s| s.q1));
    t.row("Median", col(&|s| s.median));
    t.row("3rd Qtr", col(&|s| s.q3));
    t.row("Max", col(&|s| s.max));
    t.row("Mean", col(&|s| s.mean));
    // Percent-of-percent: variance of a percent series divided by 100.
    t.row("Variance", col(&|s| s.variance));
    t.row("Std. Deviation", col(&|s| s.std_dev));
    t.row(
        "Skewness",
        stats
            .iter()
            .map(|s| starred(s.skewness, s.skew_significant()))
            .collect(),
    );
    t.row(
        "Kurtosis",
        stats
            .iter()
            .map(|s| starred(s.excess_kurtosis, s.kurtosis_significant()))
            .collect(),
    );
    if let Some(first) = stats.first() {
        if !first.percentiles.is_empty() {
            t.section("Percentiles");
            for (i, (p, _)) in first.percentiles.iter().enumerate() {
                let cells = stats
                    .iter()
                    .zip(&scale)
                    .map(|(s, k)| {
                        s.percentiles
                            .get(i)
                            .map(|(_, v)| fixed3(v * k))
                            .unwrap_or_default()
                    })
                    .collect();
                t.row(format!("  {}", prob_label(*p)), cells);
            }
        }
    }
    if !boxes.is_empty() {
        t.section("Box plot");
        let bcol = |f: &dyn Fn(&BoxPlot) -> f64| -> Vec<String> {
            boxes.iter().zip(&scale).map(|(b, k)| fixed3(f(b) * k)).collect()
        };
        t.row("  Lower whisker", bcol(&|b| b.lower_whisker));
        t.row("  Upper whisker", bcol(&|b| b.upper_whisker));
        t.row(
            "  Outliers",
            boxes.iter().map(|b| b.outliers.to_string()).collect(),
        );
    }
    let mut out = t.render();
    if let Some(s) = stats.first() {
        let _ = writeln!(
            out,
            "Skewness SE {:.3}, kurtosis SE {:.3}; * marks significance at two standard errors.",
            s.skew_se, s.kurt_se
        );
    }
    out
}

/// Mean, variance, standard deviation, skewness and kurtosis per measure.
pub fn moments_table(title: &str, stats: &[SummaryStats]) -> String {
    let header = stats.iter().map(|s| s.label.clone()).collect();
    let mut t = Table::new(title, header);
    let scale: Vec<f64> = stats
        .iter()
        .map(|s| if is_percent_scale(&s.label) { 100.0 } else { 1.0 })
        .collect();
    let col = |f: &dyn Fn(&SummaryStats) -> f64| -> Vec<String> {
        stats.iter().zip(&scale).map(|(s, k)| fixed3(f(s) * k)).collect()
    };
    t.row("N", stats.iter().map(|s| s.n.to_string()).collect());
    t.row("Mean", col(&|s| s.mean));
    t.row("Variance", col(&|s| s.variance));
    t.row("Std. Deviation", col(&|s| s.std_dev));
    t.row(
        "Skewness",
        stats
            .iter()
            .map(|s| starred(s.skewness, s.skew_significant()))
            .collect(),
    );
    t.row(
        "Kurtosis",
        stats
            .iter()
            .map(|s| starred(s.excess_kurtosis, s.kurtosis_significant()))
            .collect(),
    );
    t.render()
}

pub fn summary_csv(s: &SummaryStats, b: &BoxPlot) -> String {
    let mut out = format!("statistic,{}\n", s.label);
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(out, "{k},{v}");
    };
    kv("n", s.n.to_string());
    kv("missing", s.skipped.to_string());
    kv("min", s.min.to_string());
    kv("q1", s.q1.to_string());
    kv("median", s.median.to_string());
    kv("q3", s.q3.to_string());
    kv("max", s.max.to_string());
    kv("mean", s.mean.to_string());
    kv("variance", s.variance.to_string());
    kv("std_dev", s.std_dev.to_string());
    kv("skewness", csv_opt(s.skewness));
    kv("excess_kurtosis", csv_opt(s.excess_kurtosis));
    kv("skew_se", s.skew_se.to_string());
    kv("kurt_se", s.kurt_se.to_string());
    for (p, v) in &s.percentiles {
        kv(&format!("p{p}"), v.to_string());
    }
    kv("lower_whisker", b.lower_whisker.to_string());
    kv("upper_whisker", b.upper_whisker.to_string());
    kv("outliers", b.outliers.to_string());
    out
}

/// Ljung-Box, log-periodogram and scaling-law estimates, one column per series.
pub fn memory_table(title: &str, blocks: &[MemoryBlock]) -> String {
    let header = blocks.iter().map(|b| b.label.clone()).collect();
    let mut t = Table::new(title, header);
    let cell = |f: &dyn Fn(&MemoryBlock) -> Option<String>| -> Vec<String> {
        blocks
            .iter()
            .map(|b| f(b).unwrap_or_else(|| "n/a".into()))
            .collect()
    };
    let lags = blocks.iter().find_map(|b| b.ljung_box.map(|l| l.h)).unwrap_or(0);
    t.row("N", blocks.iter().map(|b| b.n.to_string()).collect());
    t.row(
        format!("Ljung-Box ({lags})"),
        cell(&|b| b.ljung_box.map(|l| format!("{:.0}", l.statistic))),
    );
    t.row("  p-value", cell(&|b| b.ljung_box_p.map(|p| format!("{p:.4}"))));
    t.row("d_GPH", cell(&|b| b.gph.as_ref().map(|g| fixed3(g.d))));
    t.row(
        "",
        cell(&|b| b.gph.as_ref().map(|g| format!("({})", fixed3(g.se)))),
    );
    t.row(
        "  bandwidth",
        cell(&|b| b.gph.as_ref().map(|g| g.bandwidth_m.to_string())),
    );
    t.row(
        "  delta valid",
        cell(&|b| {
            b.gph
                .as_ref()
                .and_then(|g| g.validity_flag)
                .map(|v| if v { "yes" } else { "no" }.into())
        }),
    );
    t.row("d_A", cell(&|b| b.scaling.as_ref().map(|s| fixed3(s.d))));
    t.row(
        "",
        cell(&|b| b.scaling.as_ref().map(|s| format!("({})", fixed3(s.se)))),
    );
    t.row(
        "  R-squared",
        cell(&|b| b.scaling.as_ref().map(|s| fixed3(s.r_squared))),
    );
    t.row("  convention", cell(&|b| Some(b.convention.to_string())));
    t.render()
}

pub fn memory_csv(b: &MemoryBlock) -> String {
    let mut out = format!("statistic,{}\n", b.label);
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(out, "{k},{v}");
    };
    kv("n", b.n.to_string());
    kv(
        "ljung_box_lags",
        b.ljung_box.map(|l| l.h.to_string()).unwrap_or_default(),
    );
    kv("ljung_box", csv_opt(b.ljung_box.map(|l| l.statistic)));
    kv("ljung_box_p", csv_opt(b.ljung_box_p));
    kv("d_gph", csv_opt(b.gph.as_ref().map(|g| g.d)));
    kv("d_gph_se", csv_opt(b.gph.as_ref().map(|g| g.se)));
    kv(
        "gph_bandwidth",
        b.gph
            .as_ref()
            .map(|g| g.bandwidth_m.to_string())
            .unwrap_or_default(),
    );
    kv("d_a", csv_opt(b.scaling.as_ref().map(|s| s.d)));
    kv("d_a_se", csv_opt(b.scaling.as_ref().map(|s| s.se)));
    kv("d_a_r_squared", csv_opt(b.scaling.as_ref().map(|s| s.r_squared)));
    kv("convention", b.convention.to_string());
    if let Some(acf) = &b.acf {
        for (k, r) in acf.lags() {
            kv(&format!("acf_{k}"), r.to_string());
        }
    }
    out
}

pub fn scatter_csv(b: &MemoryBlock) -> Option<String> {
    let fit = b.scaling_fit.as_ref()?;
    let mut out = String::from("t,log_t,log_var\n");
    for ((t, x), y) in fit.levels.iter().zip(&fit.log_t).zip(&fit.log_var) {
        let _ = writeln!(out, "{t},{x},{y}");
    }
    Some(out)
}

pub fn capital_table(title: &str, r: &CapitalReport) -> String {
    let header = ["Long", "Short", "Normal"].map(String::from).to_vec();
    let mut t = Table::new(title, header);
    for row in &r.rows {
        let flag = if row.sign_flag { " !" } else { "" };
        t.row(
            format!("{}%{flag}", prob_label(row.probability)),
            vec![
                fixed3(row.long * 100.0),
                fixed3(row.short * 100.0),
                fixed3(row.gaussian * 100.0),
            ],
        );
    }
    let mut out = t.render();
    let _ = writeln!(
        out,
        "Values in percent of position. Forecast sigma {} (one day {}), trailing window {}, {} gaussian form.",
        fixed3(r.sigma_hat_used * 100.0),
        fixed3(r.sigma_hat_one_day * 100.0),
        r.window,
        r.gaussian_form
    );
    if let Some(h) = r.horizon {
        let _ = writeln!(
            out,
            "Horizon {} days, variance scaled as T^(d+1) with d = {}.",
            h.days,
            fixed3(h.d)
        );
    }
    if let Some(d) = r.last_date {
        let _ = writeln!(
            out,
            "Forecast for the day after {d}; {} rescaled returns ({} skipped).",
            r.z_count, r.z_skipped
        );
    }
    if r.rows.iter().any(|row| row.sign_flag) {
        let _ = writeln!(
            out,
            "! tail quantile has the unexpected sign; requirement is negative."
        );
    }
    out
}

pub fn capital_csv(r: &CapitalReport) -> String {
    let mut out = String::from("probability,long,short,gaussian,z_long,z_short,sign_flag\n");
    for row in &r.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            row.probability,
            row.long,
            row.short,
            row.gaussian,
            csv_opt(row.z_long),
            csv_opt(row.z_short),
            u8::from(row.sign_flag)
        );
    }
    out
}
