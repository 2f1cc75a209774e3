//! Memory diagnostics for one series, tolerant of per-statistic failures.

use rvcap::{
    acf, gph_estimate, ljung_box, partial_sum_scaling, AcfResult, DailySeries, LjungBoxResult,
    MemoryEstimate, ScalingConvention, ScalingFit,
};
use serde::Serialize;

#[derive(Debug, Clone, Copy)]
pub struct MemorySettings {
    pub delta: f64,
    pub t_max: usize,
    pub convention: ScalingConvention,
    pub lb_lags: usize,
    pub acf_lags: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct MemoryBlock {
    pub label: String,
    pub n: usize,
    pub convention: ScalingConvention,
    pub ljung_box: Option<LjungBoxResult>,
    pub ljung_box_p: Option<f64>,
    pub gph: Option<MemoryEstimate>,
    pub scaling: Option<MemoryEstimate>,
    pub scaling_fit: Option<ScalingFit>,
    pub acf: Option<AcfResult>,
    /// Messages for statistics that could not be computed.
    pub errors: Vec<String>,
}

pub fn analyze(series: &DailySeries, s: &MemorySettings) -> (MemoryBlock, Option<rvcap::Error>) {
    let mut first_err = None;
    let mut errors = Vec::new();
    let mut keep = |what: &str, e: rvcap::Error| {
        log::warn!("{}: {what}: {e}", series.label());
        errors.push(format!("{what}: {e}"));
        first_err.get_or_insert(e);
    };
    let (present, _) = series.present();
    let n = present.len();

    let lb = ljung_box(series, s.lb_lags)
        .map_err(|e| keep("ljung_box", e))
        .ok();
    let gph = gph_estimate(series, s.delta).map_err(|e| keep("gph", e)).ok();
    let (fit, scaling) = match partial_sum_scaling(series, s.t_max, s.convention) {
        Ok((f, m)) => (Some(f), Some(m)),
        Err(e) => {
            keep("scaling", e);
            (None, None)
        }
    };
    // Only as many lags as the sample supports.
    let acf_lags = s.acf_lags.min(n.saturating_sub(1) / 2);
    let acf = if acf_lags >= 1 {
        acf(series, acf_lags).map_err(|e| keep("acf", e)).ok()
    } else {
        None
    };
    let block = MemoryBlock {
        label: series.label().to_owned(),
        n,
        convention: s.convention,
        ljung_box_p: lb.map(|l| l.p_value()),
        ljung_box: lb,
        gph,
        scaling,
        scaling_fit: fit,
        acf,
        errors,
    };
    (block, first_err)
}
