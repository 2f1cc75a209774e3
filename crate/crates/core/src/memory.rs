//! Long-memory estimation: the sample periodogram, log-periodogram (GPH)
//! regression, the partial-sum variance scaling law, and horizon scaling.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ols::fit_line;
use crate::series::DailySeries;

/// Default bandwidth exponent: the regression uses the lowest `n^0.8` frequencies.
pub const DEFAULT_DELTA: f64 = 0.8;
/// Default largest aggregation level for the scaling law.
pub const DEFAULT_T_MAX: usize = 40;
/// Fewest ordinates a log-periodogram regression will run on.
pub const MIN_GPH_ORDINATES: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Periodogram {
    /// `ω_j = 2πj/n`, `j = 1..=n/2`.
    pub frequencies: Vec<f64>,
    pub ordinates: Vec<f64>,
    pub n: usize,
}

/// `I(ω_j) = |Σ_t (x_t - x̄) e^{-iω_j t}|² / (2πn)` at the positive Fourier
/// frequencies, computed with an FFT.
pub fn periodogram(series: &DailySeries) -> Result<Periodogram> {
    let (xs, _) = series.present();
    periodogram_of(&xs)
}

pub(crate) fn periodogram_of(xs: &[f64]) -> Result<Periodogram> {
    let n = xs.len();
    if n < 8 {
        return Err(Error::InsufficientData { needed: 8, got: n });
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex<f64>> = xs.iter().map(|x| Complex::new(x - mean, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let half = n / 2;
    let scale = 1.0 / (2.0 * PI * n as f64);
    let frequencies = (1..=half).map(|j| 2.0 * PI * j as f64 / n as f64).collect();
    let ordinates: Vec<f64> = buf[1..=half].iter().map(|c| c.norm_sqr() * scale).collect();
    if ordinates.iter().all(|v| *v == 0.0) {
        log::warn!("periodogram of a constant series is identically zero");
    }
    Ok(Periodogram {
        frequencies,
        ordinates,
        n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MemoryMethod {
    Gph,
    PartialSumScaling,
}

/// How the partial-sum slope maps to `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingConvention {
    /// `Var = c T^(d + 1)`, so `d = slope - 1`.
    #[default]
    Paper,
    /// `Var ∝ T^(2d + 1)`, so `d = (slope - 1) / 2`.
    Theoretical,
}

impl FromStr for ScalingConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Self::Paper),
            "theoretical" => Ok(Self::Theoretical),
            _ => Err(Error::Domain(format!("unknown scaling convention `{s}`"))),
        }
    }
}

impl fmt::Display for ScalingConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Paper => "paper",
            Self::Theoretical => "theoretical",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MemoryEstimate {
    pub method: MemoryMethod,
    pub d: f64,
    pub se: f64,
    /// Frequencies (GPH) or aggregation levels (scaling) entering the fit.
    pub bandwidth_m: usize,
    pub intercept: f64,
    pub slope: f64,
    pub r_squared: f64,
    /// Whether the bandwidth exponent satisfies `delta < 4d / (1 + 4d)`, the
    /// condition for asymptotic normality of the GPH estimate. Reported only;
    /// `None` for the scaling-law estimate.
    pub validity_flag: Option<bool>,
    /// Points dropped from the regression (zero ordinates or zero variances).
    pub excluded: usize,
}

/// Round-half-up of `n^delta`.
pub fn gph_bandwidth(n: usize, delta: f64) -> usize {
    ((n as f64).powf(delta) + 0.5).floor() as usize
}

/// Asymptotic standard error `π (24 m)^(-1/2)`.
pub fn gph_standard_error(bandwidth: usize) -> f64 {
    PI / (24.0 * bandwidth as f64).sqrt()
}

/// Log-periodogram regression of `ln I(ω_j)` on `ln ω_j` over the lowest
/// `round(n^delta)` frequencies; `d = -slope / 2`.
pub fn gph_estimate(series: &DailySeries, delta: f64) -> Result<MemoryEstimate> {
    let (xs, _) = series.present();
    gph_of(&xs, delta)
}

pub(crate) fn gph_of(xs: &[f64], delta: f64) -> Result<MemoryEstimate> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!("delta {delta} not in (0, 1)")));
    }
    let pg = periodogram_of(xs)?;
    let m = gph_bandwidth(pg.n, delta);
    if m < MIN_GPH_ORDINATES || m > pg.ordinates.len() {
        return Err(Error::Domain(format!(
            "bandwidth {m} must lie in {MIN_GPH_ORDINATES}..={} for n = {}",
            pg.ordinates.len(),
            pg.n
        )));
    }
    let (log_w, log_i): (Vec<f64>, Vec<f64>) = pg.frequencies[..m]
        .iter()
        .zip(&pg.ordinates[..m])
        .filter(|(_, i)| **i > 0.0)
        .map(|(w, i)| (w.ln(), i.ln()))
        .unzip();
    let used = log_w.len();
    let excluded = m - used;
    if excluded > 0 {
        log::warn!("GPH: {excluded} zero ordinates excluded from the band");
    }
    if used < MIN_GPH_ORDINATES {
        return Err(Error::Estimation(format!(
            "only {used} usable periodogram ordinates, need {MIN_GPH_ORDINATES}"
        )));
    }
    let fit = fit_line(&log_w, &log_i).ok_or_else(|| Error::Estimation("degenerate regression".into()))?;
    let d = -fit.slope / 2.0;
    Ok(MemoryEstimate {
        method: MemoryMethod::Gph,
        d,
        se: gph_standard_error(used),
        bandwidth_m: used,
        intercept: fit.intercept,
        slope: fit.slope,
        r_squared: fit.r_squared,
        validity_flag: Some(delta < 4.0 * d / (1.0 + 4.0 * d)),
        excluded,
    })
}

/// Log variance of block sums against log aggregation level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingFit {
    pub levels: Vec<usize>,
    pub log_t: Vec<f64>,
    pub log_var: Vec<f64>,
    pub intercept: f64,
    pub slope: f64,
    pub slope_se: f64,
    pub r_squared: f64,
}

impl ScalingFit {
    /// The scale constant `c` in `Var = c T^slope`.
    pub fn scale_constant(&self) -> f64 {
        self.intercept.exp()
    }
}

fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
}

/// Variance of non-overlapping `level`-day sums; the trailing remainder is dropped.
pub fn block_sum_variance(xs: &[f64], level: usize) -> f64 {
    let sums: Vec<f64> = xs.chunks_exact(level).map(|c| c.iter().sum()).collect();
    if sums.len() < 2 {
        return f64::NAN;
    }
    sample_variance(&sums)
}

pub fn partial_sum_scaling(
    series: &DailySeries,
    t_max: usize,
    convention: ScalingConvention,
) -> Result<(ScalingFit, MemoryEstimate)> {
    let (xs, _) = series.present();
    partial_sum_scaling_of(&xs, t_max, convention)
}

pub(crate) fn partial_sum_scaling_of(
    xs: &[f64],
    t_max: usize,
    convention: ScalingConvention,
) -> Result<(ScalingFit, MemoryEstimate)> {
    if t_max < 3 {
        return Err(Error::Domain(format!("t_max {t_max} must be at least 3")));
    }
    if xs.len() < 10 * t_max {
        return Err(Error::InsufficientData {
            needed: 10 * t_max,
            got: xs.len(),
        });
    }
    let mut levels = Vec::with_capacity(t_max);
    let mut log_t = Vec::with_capacity(t_max);
    let mut log_var = Vec::with_capacity(t_max);
    for level in 1..=t_max {
        let v = block_sum_variance(xs, level);
        if v > 0.0 {
            levels.push(level);
            log_t.push((level as f64).ln());
            log_var.push(v.ln());
        }
    }
    let excluded = t_max - levels.len();
    if excluded > 0 {
        log::warn!("scaling law: {excluded} levels with zero variance excluded");
    }
    let fit = fit_line(&log_t, &log_var)
        .ok_or_else(|| Error::Estimation("fewer than three usable aggregation levels".into()))?;
    let (d, se) = match convention {
        ScalingConvention::Paper => (fit.slope - 1.0, fit.slope_se),
        ScalingConvention::Theoretical => ((fit.slope - 1.0) / 2.0, fit.slope_se / 2.0),
    };
    let estimate = MemoryEstimate {
        method: MemoryMethod::PartialSumScaling,
        d,
        se,
        bandwidth_m: levels.len(),
        intercept: fit.intercept,
        slope: fit.slope,
        r_squared: fit.r_squared,
        validity_flag: None,
        excluded,
    };
    let scaling = ScalingFit {
        levels,
        log_t,
        log_var,
        intercept: fit.intercept,
        slope: fit.slope,
        slope_se: fit.slope_se,
        r_squared: fit.r_squared,
    };
    Ok((scaling, estimate))
}

/// One-day variance scaled to `horizon` days as `var · T^(d + 1)`.
pub fn horizon_scale(var_one_day: f64, horizon: u32, d: f64) -> Result<f64> {
    if horizon < 1 {
        return Err(Error::Domain("horizon must be at least one day".into()));
    }
    if var_one_day.is_nan() || var_one_day < 0.0 {
        return Err(Error::Domain(format!("variance {var_one_day} is negative")));
    }
    Ok(var_one_day * (horizon as f64).powf(d + 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn s(xs: Vec<f64>) -> DailySeries {
        DailySeries::from_values("x", xs).unwrap()
    }

    /// Direct O(n²) DFT, independent of the FFT path.
    fn dft_periodogram(xs: &[f64]) -> Vec<f64> {
        let n = xs.len();
        let mean = xs.iter().sum::<f64>() / n as f64;
        (1..=n / 2)
            .map(|j| {
                let w = 2.0 * PI * j as f64 / n as f64;
                let (mut re, mut im) = (0.0, 0.0);
                for (t, x) in xs.iter().enumerate() {
                    let arg = w * (t + 1) as f64;
                    re += (x - mean) * arg.cos();
                    im -= (x - mean) * arg.sin();
                }
                (re * re + im * im) / (2.0 * PI * n as f64)
            })
            .collect()
    }

    #[test]
    fn fft_matches_direct_dft() {
        let xs: Vec<f64> = (0..101)
            .map(|t| ((t * 37 % 17) as f64).sin() + 0.01 * t as f64)
            .collect();
        let pg = periodogram(&s(xs.clone())).unwrap();
        let direct = dft_periodogram(&xs);
        assert_eq!(pg.ordinates.len(), 50);
        for (a, b) in pg.ordinates.iter().zip(&direct) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        }
    }

    #[test]
    fn cosine_peak_dominates() {
        let n = 256;
        let k = 17;
        let wk = 2.0 * PI * k as f64 / n as f64;
        let xs: Vec<f64> = (1..=n).map(|t| (wk * t as f64).cos()).collect();
        let pg = periodogram(&s(xs)).unwrap();
        let peak = pg.ordinates[k - 1];
        let rest = pg
            .ordinates
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != k - 1)
            .map(|(_, v)| *v)
            .fold(0.0, f64::max);
        assert!(peak / rest.max(f64::MIN_POSITIVE) > 100.0);
    }

    #[test]
    fn zero_series_has_zero_ordinates_and_gph_fails() {
        let pg = periodogram(&s(vec![0.0; 64])).unwrap();
        assert!(pg.ordinates.iter().all(|v| *v == 0.0));
        assert!(matches!(
            gph_estimate(&s(vec![1.5; 1003]), 0.8),
            Err(Error::Estimation(_))
        ));
    }

    #[test]
    fn too_short_for_periodogram() {
        assert!(matches!(
            periodogram(&s(vec![1.0; 7])),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn bandwidth_and_se_at_1003() {
        assert_eq!(gph_bandwidth(1003, 0.8), 252);
        assert_abs_diff_eq!(gph_standard_error(252), 0.0404, epsilon = 5e-5);
        assert_eq!(format!("{:.3}", gph_standard_error(252)), "0.040");
    }

    #[test]
    fn gph_rejects_small_bandwidth() {
        let xs: Vec<f64> = (0..50).map(|t| (t as f64 * 0.7).sin()).collect();
        assert!(matches!(gph_estimate(&s(xs), 0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn scaling_level_one_is_sample_variance() {
        let xs: Vec<f64> = (0..400).map(|t| ((t * 7919) % 101) as f64).collect();
        let (fit, _) = partial_sum_scaling(&s(xs.clone()), 40, ScalingConvention::Paper).unwrap();
        assert_eq!(fit.levels[0], 1);
        assert_abs_diff_eq!(fit.log_var[0], sample_variance(&xs).ln(), epsilon = 1e-14);
    }

    #[test]
    fn scaling_conventions() {
        let xs: Vec<f64> = (0..400).map(|t| ((t * 7919) % 101) as f64).collect();
        let (_, paper) = partial_sum_scaling(&s(xs.clone()), 20, ScalingConvention::Paper).unwrap();
        let (_, theory) = partial_sum_scaling(&s(xs), 20, ScalingConvention::Theoretical).unwrap();
        assert_abs_diff_eq!(theory.d, paper.d / 2.0, epsilon = 1e-15);
        assert_eq!(paper.slope, theory.slope);
    }

    #[test]
    fn scaling_needs_history() {
        let r = partial_sum_scaling(&s(vec![1.0; 399]), 40, ScalingConvention::Paper);
        assert!(matches!(
            r,
            Err(Error::InsufficientData {
                needed: 400,
                got: 399
            })
        ));
    }

    #[test]
    fn block_variance_drops_remainder() {
        let xs = [1.0, 2.0, 3.0, 4.0, 100.0];
        // sums 3 and 7
        assert_eq!(block_sum_variance(&xs, 2), 8.0);
    }

    #[test]
    fn horizon_examples() {
        assert_eq!(horizon_scale(2.5, 1, 0.3).unwrap(), 2.5);
        assert_abs_diff_eq!(horizon_scale(1.0, 4, 0.0).unwrap(), 4.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            horizon_scale(1.0, 40, 0.471).unwrap(),
            227.316_126_630_381_7,
            epsilon = 1e-9
        );
        assert!(horizon_scale(1.0, 0, 0.2).is_err());
    }
}
