//! Day-of-week adjustment of news counts and the power law linking
//! `Var(omega)` to cumulative news.

use alloc::vec::Vec;

use chrono::{Datelike, NaiveDate};

use crate::error::{insufficient, invalid, Result};
use crate::regression::ols;
use crate::window::WindowEstimate;

/// Minimum number of joined observations in a coupling fit.
pub const MIN_COUPLING_POINTS: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct NewsSeries {
    pub dates: Vec<NaiveDate>,
    pub raw: Vec<u64>,
    /// Weekday-adjusted counts (equal to `raw` until adjusted).
    pub adjusted: Vec<f64>,
    /// Running sum of `adjusted`.
    pub cumulative: Vec<f64>,
}

impl NewsSeries {
    pub fn new(dates: Vec<NaiveDate>, raw: Vec<u64>) -> Result<Self> {
        if dates.len() != raw.len() {
            return Err(invalid!("dates and counts differ in length"));
        }
        if dates.is_empty() {
            return Err(insufficient!("news series is empty"));
        }
        if let Some(i) = dates.windows(2).position(|w| w[0] >= w[1]) {
            return Err(invalid!(
                "news dates not strictly increasing at row {}",
                i + 1
            ));
        }
        let adjusted: Vec<f64> = raw.iter().map(|&c| c as f64).collect();
        Ok(Self {
            cumulative: running_sum(&adjusted),
            dates,
            raw,
            adjusted,
        })
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    /// Cumulative adjusted count at `date`, if present.
    pub fn cumulative_at(&self, date: NaiveDate) -> Option<f64> {
        self.dates
            .binary_search(&date)
            .ok()
            .map(|i| self.cumulative[i])
    }
}

fn running_sum(xs: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    xs.iter()
        .map(|x| {
            acc += x;
            acc
        })
        .collect()
}

/// `adjusted[d] = x[d] / mean(x on weekday(d)) * mean(x)`, applied to the
/// current adjusted values so repeated application is a no-op.
pub fn deseasonalize_news(news: &NewsSeries) -> Result<NewsSeries> {
    let mut sums = [0.0f64; 7];
    let mut counts = [0usize; 7];
    for (d, x) in news.dates.iter().zip(&news.adjusted) {
        let w = d.weekday().num_days_from_monday() as usize;
        sums[w] += x;
        counts[w] += 1;
    }
    let period_mean = news.adjusted.iter().sum::<f64>() / news.len() as f64;
    let mut means = [0.0f64; 7];
    for w in 0..7 {
        if counts[w] > 0 {
            means[w] = sums[w] / counts[w] as f64;
            if means[w] <= 0.0 {
                return Err(invalid!(
                    "weekday {:?} has zero mean count",
                    chrono::Weekday::try_from(w as u8).unwrap()
                ));
            }
        }
    }
    let adjusted: Vec<f64> = news
        .dates
        .iter()
        .zip(&news.adjusted)
        .map(|(d, x)| x / means[d.weekday().num_days_from_monday() as usize] * period_mean)
        .collect();
    Ok(NewsSeries {
        dates: news.dates.clone(),
        raw: news.raw.clone(),
        cumulative: running_sum(&adjusted),
        adjusted,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewsCoupling {
    pub alpha: f64,
    pub alpha_se: f64,
    pub prefactor: f64,
    pub r2: f64,
    pub start: NaiveDate,
    pub end: NaiveDate,
    /// `(date, Var(omega), cumulative news)` used in the fit.
    pub joined: Vec<(NaiveDate, f64, f64)>,
}

/// Fits `Var(omega) ~ N_n^alpha` over `window` (inclusive), joining each
/// date's last window estimate to that day's cumulative news.
pub fn fit_news_coupling(
    trajectory: &[WindowEstimate],
    news: &NewsSeries,
    window: (NaiveDate, NaiveDate),
) -> Result<NewsCoupling> {
    let pairs: Vec<(NaiveDate, f64)> = trajectory
        .iter()
        .map(|w| (w.date(), w.var_omega()))
        .collect();
    fit_news_coupling_pairs(&pairs, news, window)
}

/// As [`fit_news_coupling`] but from `(date, Var(omega))` pairs in time order.
pub fn fit_news_coupling_pairs(
    var_by_date: &[(NaiveDate, f64)],
    news: &NewsSeries,
    window: (NaiveDate, NaiveDate),
) -> Result<NewsCoupling> {
    let (start, end) = window;
    if start > end {
        return Err(invalid!("fit window starts after it ends"));
    }
    let mut joined: Vec<(NaiveDate, f64, f64)> = Vec::new();
    for &(date, var) in var_by_date {
        if date < start || date > end {
            continue;
        }
        let Some(cum) = news.cumulative_at(date) else {
            continue;
        };
        match joined.last_mut() {
            Some(last) if last.0 == date => *last = (date, var, cum),
            _ => joined.push((date, var, cum)),
        }
    }
    if joined.len() < MIN_COUPLING_POINTS {
        return Err(insufficient!(
            "{} joined dates in window, need {MIN_COUPLING_POINTS}",
            joined.len()
        ));
    }
    if let Some(bad) = joined.iter().find(|j| !(j.1 > 0.0) || !(j.2 > 0.0)) {
        return Err(invalid!(
            "non-positive value on {}: Var(omega)={} cumulative news={}",
            bad.0,
            bad.1,
            bad.2
        ));
    }
    let x: Vec<f64> = joined.iter().map(|j| libm::log(j.2)).collect();
    let y: Vec<f64> = joined.iter().map(|j| libm::log(j.1)).collect();
    let fit = ols(&x, &y)?;
    Ok(NewsCoupling {
        alpha: fit.slope,
        alpha_se: fit.slope_se,
        prefactor: libm::exp(fit.intercept),
        r2: fit.r2,
        start,
        end,
        joined,
    })
}
