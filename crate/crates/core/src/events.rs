//! Main-shock detection and Omori-law fits of the cumulative number of
//! large events before and after it.

use alloc::vec::Vec;
use core::ops::Range;

use chrono::NaiveDateTime;

use crate::error::{insufficient, invalid, Error, Result};
use crate::regression::ols;
use crate::series::Series;
use crate::stats;

/// Events required on a side before it is fitted.
pub const MIN_SIDE_EVENTS: usize = 20;

/// Position of the largest `|x|` in `range`; ties go to the earliest.
pub fn find_main_shock(series: &Series, range: Range<usize>) -> Result<usize> {
    if range.is_empty() {
        return Err(invalid!("empty search range"));
    }
    if range.end > series.len() {
        return Err(Error::OutOfRange(range.end - 1));
    }
    let mut best: Option<(usize, f64)> = None;
    for pos in range {
        if let Some(v) = series.get(pos) {
            let a = libm::fabs(v);
            if best.is_none_or(|(_, b)| a > b) {
                best = Some((pos, a));
            }
        }
    }
    best.map(|(p, _)| p)
        .ok_or_else(|| insufficient!("search range is entirely masked"))
}

/// Large events around a main shock, in signed trading minutes.
#[derive(Debug, Clone, PartialEq)]
pub struct ShockFrame {
    /// Series position of the main shock (0 for frames built from times).
    pub origin: usize,
    pub origin_time: Option<NaiveDateTime>,
    pub threshold_multiple: f64,
    pub sigma_m: f64,
    pub threshold: f64,
    /// Negative times, nearest to the shock first.
    pub before: Vec<f64>,
    /// Positive times, ascending.
    pub after: Vec<f64>,
}

impl ShockFrame {
    /// Frame from signed event times; zero (the shock itself) is dropped.
    pub fn from_times(times: &[f64]) -> Self {
        let mut before: Vec<f64> = times.iter().copied().filter(|&t| t < 0.0).collect();
        let mut after: Vec<f64> = times.iter().copied().filter(|&t| t > 0.0).collect();
        before.sort_by(|a, b| b.total_cmp(a));
        after.sort_by(f64::total_cmp);
        Self {
            origin: 0,
            origin_time: None,
            threshold_multiple: f64::NAN,
            sigma_m: f64::NAN,
            threshold: f64::NAN,
            before,
            after,
        }
    }

    /// `(t, N(t))` at every event on one side, where `N(t)` counts events
    /// with `|t'| <= |t|` on that side.
    pub fn cumulative_before(&self) -> Vec<(f64, usize)> {
        cumulative(&self.before)
    }

    pub fn cumulative_after(&self) -> Vec<(f64, usize)> {
        cumulative(&self.after)
    }
}

fn cumulative(times: &[f64]) -> Vec<(f64, usize)> {
    let mut out = Vec::with_capacity(times.len());
    let mut i = 0;
    while i < times.len() {
        let mut j = i + 1;
        while j < times.len() && times[j] == times[i] {
            j += 1;
        }
        for &t in &times[i..j] {
            out.push((t, j));
        }
        i = j;
    }
    out
}

/// Events `|x(t)| >= multiple * sigma_M` measured from `origin`, where
/// `sigma_M` is the standard deviation over `reference` (the whole series by
/// default). The shock itself is not counted.
pub fn cumulative_frequency(
    series: &Series,
    origin: usize,
    multiple: f64,
    reference: Option<Range<usize>>,
) -> Result<ShockFrame> {
    if origin >= series.len() {
        return Err(Error::OutOfRange(origin));
    }
    if !(multiple > 0.0) {
        return Err(invalid!(
            "threshold multiple must be positive, got {multiple}"
        ));
    }
    let reference = reference.unwrap_or(0..series.len());
    if reference.end > series.len() || reference.is_empty() {
        return Err(invalid!("reference period outside the series"));
    }
    let ref_values: Vec<f64> = series.values()[reference]
        .iter()
        .flatten()
        .copied()
        .collect();
    if ref_values.len() < 2 {
        return Err(insufficient!("reference period has fewer than 2 values"));
    }
    let sigma_m = stats::sample_std(&ref_values);
    let threshold = multiple * sigma_m;
    let mut before = Vec::new();
    let mut after = Vec::new();
    for (pos, v) in series.values().iter().enumerate() {
        let Some(v) = v else { continue };
        if pos == origin || libm::fabs(*v) < threshold {
            continue;
        }
        let t = pos as f64 - origin as f64;
        if t < 0.0 {
            before.push(t);
        } else {
            after.push(t);
        }
    }
    before.reverse();
    Ok(ShockFrame {
        origin,
        origin_time: Some(series.timestamp(origin)),
        threshold_multiple: multiple,
        sigma_m,
        threshold,
        before,
        after,
    })
}

/// Power-law fit of one side, `N(t) ~ |t|^beta`.
#[derive(Debug, Clone, PartialEq)]
pub struct SideFit {
    pub beta: f64,
    pub se: f64,
    pub prefactor: f64,
    pub r2: f64,
    pub events: usize,
    /// Smallest and largest `|t|` in the fit.
    pub t_min: f64,
    pub t_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OmoriFit {
    pub before: Option<SideFit>,
    pub after: Option<SideFit>,
}

impl OmoriFit {
    /// `0 < beta_before < beta_after < 1`; `None` unless both sides fitted.
    pub fn ordering_holds(&self) -> Option<bool> {
        match (&self.before, &self.after) {
            (Some(b), Some(a)) => Some(0.0 < b.beta && b.beta < a.beta && a.beta < 1.0),
            _ => None,
        }
    }
}

/// OLS of `ln N(t)` on `ln |t|` over the event times of each side. Sides
/// with fewer than [`MIN_SIDE_EVENTS`] events are left unfitted.
pub fn fit_omori(frame: &ShockFrame) -> Result<OmoriFit> {
    Ok(OmoriFit {
        before: fit_side(&frame.cumulative_before())?,
        after: fit_side(&frame.cumulative_after())?,
    })
}

fn fit_side(points: &[(f64, usize)]) -> Result<Option<SideFit>> {
    if points.len() < MIN_SIDE_EVENTS {
        return Ok(None);
    }
    let x: Vec<f64> = points.iter().map(|p| libm::log(libm::fabs(p.0))).collect();
    let y: Vec<f64> = points.iter().map(|p| libm::log(p.1 as f64)).collect();
    let fit = ols(&x, &y)?;
    let abs: Vec<f64> = points.iter().map(|p| libm::fabs(p.0)).collect();
    Ok(Some(SideFit {
        beta: fit.slope,
        se: fit.slope_se,
        prefactor: libm::exp(fit.intercept),
        r2: fit.r2,
        events: points.len(),
        t_min: abs.iter().copied().fold(f64::INFINITY, f64::min),
        t_max: abs.iter().copied().fold(0.0, f64::max),
    }))
}
