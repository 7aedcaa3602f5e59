//! Sliding-window tracking of `Var(omega)` and daily exceedance counts.

use alloc::string::String;
use alloc::vec::Vec;

use chrono::{NaiveDate, NaiveDateTime};

use crate::error::{invalid, Error, Result};
use crate::estimate::{fit_lambda_l, log_abs_cov, MrwFit, DEFAULT_K_MIN};
use crate::preprocess::{coarse_grain, detrend_local, period_std};
use crate::series::Series;

/// Block length of the local detrending prescription.
pub const DETREND_BLOCK: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DetrendMode {
    #[default]
    None,
    /// Remove the least-squares line from consecutive blocks of this many
    /// samples (after coarse-graining to `dt`).
    LocalBlock(usize),
}

impl DetrendMode {
    pub fn local() -> Self {
        DetrendMode::LocalBlock(DETREND_BLOCK)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowScanConfig {
    /// Window width in trading minutes.
    pub window: usize,
    /// Step between consecutive window ends, in trading minutes.
    pub stride: usize,
    /// Sampling interval; windows are coarse-grained to `dt` before fitting.
    pub dt: usize,
    pub detrend: DetrendMode,
    pub k_min: usize,
    /// Largest covariance lag in samples; a tenth of the window by default.
    pub max_lag: Option<usize>,
}

impl WindowScanConfig {
    pub fn new(window: usize, stride: usize) -> Self {
        Self {
            window,
            stride,
            dt: 1,
            detrend: DetrendMode::None,
            k_min: DEFAULT_K_MIN,
            max_lag: None,
        }
    }

    /// Stride of one average trading day of `series`.
    pub fn daily(window: usize, series: &Series) -> Self {
        let sessions = series.session_ranges();
        let stride = if sessions.len() > 1 {
            (series.len() / sessions.len()).max(1)
        } else {
            (window / 4).max(1)
        };
        Self::new(window, stride)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowEstimate {
    /// Series position of the last minute in the window.
    pub end: usize,
    pub end_time: NaiveDateTime,
    pub fit: MrwFit,
    pub dt: usize,
    pub detrend: DetrendMode,
    /// Fitted `L` is not below the window width.
    pub l_exceeds_window: bool,
}

impl WindowEstimate {
    pub fn var_omega(&self) -> f64 {
        self.fit.var_omega
    }

    pub fn date(&self) -> NaiveDate {
        self.end_time.date()
    }

    /// Fit status plus `;L>=window` when the width condition is violated.
    pub fn flag(&self) -> String {
        let mut s = String::from(self.fit.status.as_str());
        if self.l_exceeds_window {
            s.push_str(";L>=window");
        }
        s
    }
}

/// Fits `(lambda2, L)` in every window `[end - window + 1, end]`, stepping
/// `end` by `stride`. Windows whose fit fails are kept with a `no_fit` flag
/// and `Var(omega) = 0`.
pub fn window_scan(series: &Series, config: &WindowScanConfig) -> Result<Vec<WindowEstimate>> {
    window_ends(series, config)?
        .into_iter()
        .map(|end| estimate_at(series, config, end))
        .collect()
}

/// Window end positions visited by [`window_scan`], after validating `config`.
pub fn window_ends(series: &Series, config: &WindowScanConfig) -> Result<Vec<usize>> {
    if config.stride == 0 {
        return Err(invalid!("stride must be positive"));
    }
    if config.dt == 0 {
        return Err(invalid!("dt must be positive"));
    }
    if config.window < 100 * config.dt {
        return Err(invalid!(
            "window {} is below 100 * dt = {}",
            config.window,
            100 * config.dt
        ));
    }
    if config.window > series.len() {
        return Err(invalid!(
            "window {} exceeds series length {}",
            config.window,
            series.len()
        ));
    }
    Ok((config.window - 1..series.len())
        .step_by(config.stride)
        .collect())
}

/// The estimate for the window ending at `end`.
pub fn estimate_at(
    series: &Series,
    config: &WindowScanConfig,
    end: usize,
) -> Result<WindowEstimate> {
    if end >= series.len() || end + 1 < config.window {
        return Err(Error::OutOfRange(end));
    }
    let view = series.window(end + 1 - config.window..end + 1)?;
    let fit = fit_window(&view, config);
    Ok(WindowEstimate {
        end,
        end_time: series.timestamp(end),
        l_exceeds_window: fit.l.is_some_and(|l| l >= config.window as f64),
        fit,
        dt: config.dt,
        detrend: config.detrend,
    })
}

/// Estimate for a single window (the whole of `view`).
pub fn fit_window(view: &Series, config: &WindowScanConfig) -> MrwFit {
    let dt = config.dt as f64;
    let no_fit = || MrwFit::no_fit(config.k_min, dt, 0);
    let Ok(mut coarse) = coarse_grain(view, config.dt) else {
        return no_fit();
    };
    if let DetrendMode::LocalBlock(block) = config.detrend {
        match detrend_local(&coarse, block) {
            Ok(d) => coarse = d,
            Err(_) => return no_fit(),
        }
    }
    let max_lag = config
        .max_lag
        .unwrap_or(coarse.len() / 10)
        .min(coarse.len() / 10);
    if max_lag == 0 {
        return no_fit();
    }
    let curve = match log_abs_cov(&coarse, max_lag) {
        Ok(c) => c,
        Err(_) => return no_fit(),
    };
    fit_lambda_l(&curve, config.k_min, dt)
        .unwrap_or_else(|_| MrwFit::no_fit(config.k_min, dt, curve.excluded_zeros))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DailyCount {
    pub date: NaiveDate,
    pub count: usize,
    /// Unmasked minutes that day.
    pub observed: usize,
}

/// Per trading day, the number of unmasked `|x| > multiple * sigma` where
/// `sigma` is the whole-period standard deviation.
pub fn daily_large_count(series: &Series, multiple: f64) -> Result<Vec<DailyCount>> {
    if !(multiple > 0.0) {
        return Err(invalid!(
            "threshold multiple must be positive, got {multiple}"
        ));
    }
    let threshold = multiple * period_std(series)?;
    Ok(series
        .session_ranges()
        .into_iter()
        .map(|r| {
            let date = series.date(r.start);
            let (mut count, mut observed) = (0, 0);
            for pos in r {
                if let Some(v) = series.get(pos) {
                    observed += 1;
                    if libm::fabs(v) > threshold {
                        count += 1;
                    }
                }
            }
            DailyCount {
                date,
                count,
                observed,
            }
        })
        .collect())
}
