//! Equal-weight average of volatility-normalized issue returns.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{insufficient, invalid, Error, Result};
use crate::preprocess::{deseasonalize, intraday_profile, IntradayProfile, DEFAULT_MIN_BUCKET};
use crate::series::{ReturnSeries, Series};
use crate::stats;

#[derive(Debug, Clone, PartialEq)]
pub struct MarketModeConfig {
    /// Fraction of issues that must be unmasked at a minute for it to count.
    pub coverage: f64,
    pub deseasonalize: bool,
    pub min_bucket: usize,
}

impl Default for MarketModeConfig {
    fn default() -> Self {
        Self {
            coverage: 1.0,
            deseasonalize: true,
            min_bucket: DEFAULT_MIN_BUCKET,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MarketMode {
    pub series: Series,
    /// `(issue_id, sigma_i)` sorted by issue id.
    pub sigmas: Vec<(String, f64)>,
    pub deseasonalized: bool,
    pub profile: Option<IntradayProfile>,
}

impl MarketMode {
    pub fn issue_count(&self) -> usize {
        self.sigmas.len()
    }
}

/// `dM(t) = mean_i dX_i(t) / sigma_i` over the issues unmasked at `t`, where
/// `sigma_i` is the whole-period standard deviation of issue `i`.
pub fn compute_market_mode(
    returns: &[ReturnSeries],
    config: &MarketModeConfig,
) -> Result<MarketMode> {
    if returns.is_empty() {
        return Err(insufficient!("market mode needs at least one issue"));
    }
    if !(config.coverage > 0.0 && config.coverage <= 1.0) {
        return Err(invalid!(
            "coverage must lie in (0, 1], got {}",
            config.coverage
        ));
    }
    let reference = &returns[0].series;
    if let Some(r) = returns
        .iter()
        .find(|r| !r.series.is_aligned_with(reference))
    {
        return Err(Error::CalendarMismatch(alloc::format!(
            "issue {} is not aligned with issue {}",
            r.issue_id,
            returns[0].issue_id
        )));
    }

    // Fixed reduction order makes the average bit-stable under permutation.
    let mut ordered: Vec<&ReturnSeries> = returns.iter().collect();
    ordered.sort_by(|a, b| a.issue_id.cmp(&b.issue_id));

    let mut sigmas = Vec::with_capacity(ordered.len());
    for r in &ordered {
        let vals = r.series.valid_values();
        if vals.len() < 2 {
            return Err(insufficient!(
                "issue {} has {} unmasked returns",
                r.issue_id,
                vals.len()
            ));
        }
        let sd = stats::sample_std(&vals);
        if !(sd > 0.0) {
            return Err(Error::ZeroVariance(r.issue_id.clone()));
        }
        sigmas.push((r.issue_id.clone(), sd));
    }

    let n = ordered.len();
    let required = libm::ceil(config.coverage * n as f64 - 1e-9).max(1.0) as usize;
    let values: Vec<Option<f64>> = (0..reference.len())
        .map(|t| {
            let mut sum = 0.0;
            let mut present = 0usize;
            for (r, (_, sd)) in ordered.iter().zip(&sigmas) {
                if let Some(v) = r.series.get(t) {
                    sum += v / sd;
                    present += 1;
                }
            }
            (present >= required).then(|| sum / present as f64)
        })
        .collect();
    let raw = reference.with_values(values)?;

    let (series, profile) = if config.deseasonalize {
        let profile = intraday_profile(&raw, config.min_bucket)?;
        (deseasonalize(&raw, &profile)?, Some(profile))
    } else {
        (raw, None)
    };
    Ok(MarketMode {
        series,
        sigmas,
        deseasonalized: config.deseasonalize,
        profile,
    })
}
