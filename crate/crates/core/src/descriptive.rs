//! Unconditional moments, percentiles and serial-dependence statistics.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::series::DailySeries;

/// Two-standard-error significance multiplier for moment tests.
pub const SIGNIFICANCE_SES: f64 = 2.0;

/// Linear interpolation between order statistics at plotting position
/// `(k - 1) / (n - 1)`. `sorted` must be ascending and non-empty.
pub fn percentile_sorted(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = p.clamp(0.0, 1.0) * (n - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

pub(crate) fn sorted_copy(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

pub fn skew_standard_error(n: usize) -> f64 {
    (6.0 / n as f64).sqrt()
}

pub fn kurtosis_standard_error(n: usize) -> f64 {
    (24.0 / n as f64).sqrt()
}

/// 95% band for sample autocorrelations of white noise.
pub fn acf_critical_value(n: usize) -> f64 {
    1.96 / (n as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryStats {
    pub label: String,
    pub n: usize,
    /// Missing values dropped before computing.
    pub skipped: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
    pub variance: f64,
    pub std_dev: f64,
    /// `None` for a constant series.
    pub skewness: Option<f64>,
    /// Excess kurtosis (normal is 0). `None` for a constant series.
    pub excess_kurtosis: Option<f64>,
    pub skew_se: f64,
    pub kurt_se: f64,
    /// `(probability, value)` pairs in ascending probability.
    pub percentiles: Vec<(f64, f64)>,
}

impl SummaryStats {
    pub fn skew_significant(&self) -> bool {
        self.skewness
            .is_some_and(|s| s.abs() > SIGNIFICANCE_SES * self.skew_se)
    }

    pub fn kurtosis_significant(&self) -> bool {
        self.excess_kurtosis
            .is_some_and(|k| k.abs() > SIGNIFICANCE_SES * self.kurt_se)
    }

    pub fn percentile(&self, p: f64) -> Option<f64> {
        self.percentiles
            .iter()
            .find(|(q, _)| (q - p).abs() < 1e-12)
            .map(|(_, v)| *v)
    }
}

pub fn summary(series: &DailySeries, probs: &[f64]) -> Result<SummaryStats> {
    let (xs, skipped) = series.present();
    summary_of(series.label(), &xs, skipped, probs)
}

pub(crate) fn summary_of(label: &str, xs: &[f64], skipped: usize, probs: &[f64]) -> Result<SummaryStats> {
    let n = xs.len();
    if n < 4 {
        return Err(Error::InsufficientData { needed: 4, got: n });
    }
    if let Some(p) = probs.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
        return Err(Error::Domain(format!("percentile probability {p} not in (0, 1)")));
    }
    let nf = n as f64;
    let mean = xs.iter().sum::<f64>() / nf;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for x in xs {
        let dev = x - mean;
        let sq = dev * dev;
        m2 += sq;
        m3 += sq * dev;
        m4 += sq * sq;
    }
    let variance = m2 / (nf - 1.0);
    let (m2, m3, m4) = (m2 / nf, m3 / nf, m4 / nf);
    let (skewness, excess_kurtosis) = if m2 > 0.0 {
        (Some(m3 / m2.powf(1.5)), Some(m4 / (m2 * m2) - 3.0))
    } else {
        (None, None)
    };

    let sorted = sorted_copy(xs);
    let mut probs = probs.to_vec();
    probs.sort_by(f64::total_cmp);
    probs.dedup();
    let percentiles = probs
        .iter()
        .map(|p| (*p, percentile_sorted(&sorted, *p)))
        .collect();

    Ok(SummaryStats {
        label: label.to_string(),
        n,
        skipped,
        min: sorted[0],
        q1: percentile_sorted(&sorted, 0.25),
        median: percentile_sorted(&sorted, 0.5),
        q3: percentile_sorted(&sorted, 0.75),
        max: sorted[n - 1],
        mean,
        variance,
        std_dev: variance.sqrt(),
        skewness,
        excess_kurtosis,
        skew_se: skew_standard_error(n),
        kurt_se: kurtosis_standard_error(n),
        percentiles,
    })
}

/// Quartiles and Tukey whiskers (furthest points within 1.5 IQR).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoxPlot {
    pub lower_whisker: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub upper_whisker: f64,
    pub outliers: usize,
}

pub fn box_plot(series: &DailySeries) -> Result<BoxPlot> {
    let (xs, _) = series.present();
    if xs.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let sorted = sorted_copy(&xs);
    let q1 = percentile_sorted(&sorted, 0.25);
    let q3 = percentile_sorted(&sorted, 0.75);
    let iqr = q3 - q1;
    let (lo_fence, hi_fence) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let inside: Vec<f64> = sorted
        .iter()
        .copied()
        .filter(|x| *x >= lo_fence && *x <= hi_fence)
        .collect();
    Ok(BoxPlot {
        lower_whisker: inside[0],
        q1,
        median: percentile_sorted(&sorted, 0.5),
        q3,
        upper_whisker: inside[inside.len() - 1],
        outliers: sorted.len() - inside.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AcfResult {
    /// `rho[k - 1]` is the autocorrelation at lag `k`.
    pub rho: Vec<f64>,
    pub n: usize,
    pub critical_value: f64,
}

impl AcfResult {
    pub fn max_lag(&self) -> usize {
        self.rho.len()
    }

    pub fn lags(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.rho.iter().enumerate().map(|(i, r)| (i + 1, *r))
    }
}

pub fn acf(series: &DailySeries, max_lag: usize) -> Result<AcfResult> {
    let (xs, _) = series.present();
    acf_of(&xs, max_lag)
}

pub(crate) fn acf_of(xs: &[f64], max_lag: usize) -> Result<AcfResult> {
    let n = xs.len();
    if max_lag == 0 || 2 * max_lag >= n {
        return Err(Error::Domain(format!(
            "max lag {max_lag} must be in 1..{}",
            n.div_ceil(2)
        )));
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let dev: Vec<f64> = xs.iter().map(|x| x - mean).collect();
    let denom: f64 = dev.iter().map(|d| d * d).sum();
    if denom <= 0.0 {
        return Err(Error::UndefinedAcf);
    }
    let rho = (1..=max_lag)
        .map(|k| {
            dev[k..]
                .iter()
                .zip(&dev[..n - k])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / denom
        })
        .collect();
    Ok(AcfResult {
        rho,
        n,
        critical_value: acf_critical_value(n),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LjungBoxResult {
    pub h: usize,
    pub statistic: f64,
    pub df: usize,
}

impl LjungBoxResult {
    /// Upper-tail chi-square p-value.
    pub fn p_value(&self) -> f64 {
        use statrs::distribution::{ChiSquared, ContinuousCDF};
        ChiSquared::new(self.df as f64)
            .map(|c| c.sf(self.statistic))
            .unwrap_or(f64::NAN)
    }
}

/// `Q = n (n + 2) Σ_{k ≤ h} ρ_k² / (n - k)`.
pub fn ljung_box(series: &DailySeries, h: usize) -> Result<LjungBoxResult> {
    let (xs, _) = series.present();
    ljung_box_of(&xs, h)
}

pub(crate) fn ljung_box_of(xs: &[f64], h: usize) -> Result<LjungBoxResult> {
    let acf = acf_of(xs, h)?;
    let n = acf.n as f64;
    let statistic = n * (n + 2.0) * acf.lags().map(|(k, r)| r * r / (n - k as f64)).sum::<f64>();
    Ok(LjungBoxResult { h, statistic, df: h })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn s(xs: &[f64]) -> DailySeries {
        DailySeries::from_values("x", xs.to_vec()).unwrap()
    }

    #[test]
    fn standard_errors_at_1003() {
        assert_eq!(format!("{:.3}", skew_standard_error(1003)), "0.077");
        // printed as 0.154, i.e. truncated rather than rounded
        assert_eq!((kurtosis_standard_error(1003) * 1000.0).floor() / 1000.0, 0.154);
        assert_abs_diff_eq!(skew_standard_error(1003), 0.0773, epsilon = 5e-5);
        assert_abs_diff_eq!(kurtosis_standard_error(1003), 0.1547, epsilon = 5e-5);
        assert_eq!(format!("{:.3}", acf_critical_value(1003)), "0.062");
    }

    #[test]
    fn symmetric_three_points_need_four() {
        assert!(matches!(
            summary(&s(&[-1.0, 0.0, 1.0]), &[]),
            Err(Error::InsufficientData { needed: 4, got: 3 })
        ));
    }

    #[test]
    fn symmetric_moments() {
        let st = summary(&s(&[-1.0, 0.0, 0.0, 1.0]), &[0.5]).unwrap();
        assert_eq!(st.mean, 0.0);
        assert_abs_diff_eq!(st.variance, 2.0 / 3.0, epsilon = 1e-15);
        assert_eq!(st.skewness, Some(0.0));
        // m2 = 1/2, m4 = 1/2 -> 2 - 3
        assert_abs_diff_eq!(st.excess_kurtosis.unwrap(), -1.0, epsilon = 1e-15);
    }

    #[test]
    fn constant_series_has_undefined_shape() {
        let st = summary(&s(&[3.0; 10]), &[0.1, 0.9]).unwrap();
        assert_eq!(st.variance, 0.0);
        assert_eq!(st.skewness, None);
        assert_eq!(st.excess_kurtosis, None);
        assert!(!st.skew_significant());
    }

    #[test]
    fn percentile_rule() {
        let sorted = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(percentile_sorted(&sorted, 0.0), 1.0);
        assert_eq!(percentile_sorted(&sorted, 0.25), 2.0);
        assert_eq!(percentile_sorted(&sorted, 0.1), 1.4);
        assert_eq!(percentile_sorted(&sorted, 1.0), 5.0);
        assert!(summary(&s(&sorted), &[1.0]).is_err());
    }

    #[test]
    fn summary_skips_missing() {
        let series = DailySeries::with_missing(
            "x",
            DailySeries::from_values("x", vec![0.0; 6])
                .unwrap()
                .dates()
                .to_vec(),
            vec![Some(1.0), None, Some(2.0), Some(3.0), None, Some(4.0)],
        )
        .unwrap();
        let st = summary(&series, &[]).unwrap();
        assert_eq!((st.n, st.skipped), (4, 2));
        assert_eq!(st.mean, 2.5);
    }

    #[test]
    fn acf_alternating() {
        let xs: Vec<f64> = (0..1000).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let a = acf(&s(&xs), 2).unwrap();
        assert!((a.rho[0] + 1.0).abs() < 0.01);
        assert!((a.rho[1] - 1.0).abs() < 0.01);
    }

    #[test]
    fn acf_errors() {
        assert!(matches!(acf(&s(&[2.0; 20]), 3), Err(Error::UndefinedAcf)));
        assert!(matches!(acf(&s(&[1.0, 2.0, 3.0, 4.0]), 2), Err(Error::Domain(_))));
    }

    #[test]
    fn ljung_box_zero_when_uncorrelated() {
        // deviations (1, 0, -1, 0) repeated have rho_1 = 0 and rho_3 = 0
        let xs: Vec<f64> = (0..40).map(|i| [1.0, 0.0, -1.0, 0.0][i % 4]).collect();
        let lb = ljung_box(&s(&xs), 1).unwrap();
        assert_abs_diff_eq!(lb.statistic, 0.0, epsilon = 1e-12);
        let lb3 = ljung_box(&s(&xs), 3).unwrap();
        assert!(lb3.statistic > 0.0);
    }

    #[test]
    fn box_plot_flags_outlier() {
        let b = box_plot(&s(&[1.0, 2.0, 3.0, 4.0, 5.0, 100.0])).unwrap();
        assert_eq!(b.upper_whisker, 5.0);
        assert_eq!(b.lower_whisker, 1.0);
        assert_eq!(b.outliers, 1);
    }
}
