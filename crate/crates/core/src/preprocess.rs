//! Session-aware log-returns, intraday seasonality removal, local linear
//! detrending and coarse-graining.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::ops::Range;

use crate::calendar::{Session, TradingCalendar};
use crate::error::{insufficient, invalid, Error, Result};
use crate::series::{PriceSeries, ReturnSeries, Series};

const MINUTES_PER_DAY: usize = 1440;

/// Default minimum number of samples per minute-of-day bucket.
pub const DEFAULT_MIN_BUCKET: usize = 30;

/// `value[t] = ln P(t) - ln P(t - dt)` whenever both endpoints are unmasked,
/// lie in the same session and after its opening skip. Everything else is
/// masked, so overnight moves never appear.
pub fn log_returns(prices: &PriceSeries, dt: usize) -> Result<ReturnSeries> {
    if dt == 0 {
        return Err(invalid!("return lag must be at least one minute"));
    }
    let series = &prices.series;
    let sessions = series.usable_session_ranges();
    let longest = sessions.iter().map(|r| r.len()).max().unwrap_or(0);
    if dt >= longest {
        return Err(invalid!(
            "return lag {dt} is not below the longest session length {longest}"
        ));
    }
    let mut out = alloc::vec![None; series.len()];
    let mut computed = 0usize;
    for r in sessions {
        for t in (r.start + dt)..r.end {
            if let (Some(now), Some(then)) = (series.get(t), series.get(t - dt)) {
                out[t] = Some(libm::log(now) - libm::log(then));
                computed += 1;
            }
        }
    }
    if computed == 0 {
        return Err(insufficient!(
            "issue {} has no session with {} consecutive unmasked prices",
            prices.issue_id,
            dt + 1
        ));
    }
    Ok(ReturnSeries {
        issue_id: prices.issue_id.clone(),
        dt,
        series: series.with_values(out)?,
    })
}

/// Standard deviation by minute of day. Sparse minutes are pooled with the
/// preceding populated minute.
#[derive(Debug, Clone, PartialEq)]
pub struct IntradayProfile {
    std: Vec<Option<f64>>,
    count: Vec<usize>,
    min_count: usize,
}

impl IntradayProfile {
    /// A profile with the given deviation at every minute of the day.
    pub fn uniform(std: f64) -> Self {
        Self {
            std: alloc::vec![Some(std); MINUTES_PER_DAY],
            count: alloc::vec![usize::MAX; MINUTES_PER_DAY],
            min_count: 0,
        }
    }

    pub fn std_at(&self, minute_of_day: u16) -> Option<f64> {
        self.std.get(minute_of_day as usize).copied().flatten()
    }

    /// Pooled sample count behind the deviation used at this minute.
    pub fn count_at(&self, minute_of_day: u16) -> usize {
        self.count.get(minute_of_day as usize).copied().unwrap_or(0)
    }

    pub fn min_count(&self) -> usize {
        self.min_count
    }

    /// `(minute_of_day, std)` for every covered minute.
    pub fn entries(&self) -> impl Iterator<Item = (u16, f64)> + '_ {
        self.std
            .iter()
            .enumerate()
            .filter_map(|(m, s)| s.map(|s| (m as u16, s)))
    }
}

struct Group {
    minutes: Vec<usize>,
    count: usize,
}

pub fn intraday_profile(series: &Series, min_count: usize) -> Result<IntradayProfile> {
    if series.session_count() < 2 {
        return Err(insufficient!(
            "intraday profile needs more than one session"
        ));
    }
    let mut buckets: Vec<Vec<f64>> = alloc::vec![Vec::new(); MINUTES_PER_DAY];
    for (pos, v) in series.values().iter().enumerate() {
        if let Some(v) = v {
            buckets[series.minute_of_day(pos) as usize].push(*v);
        }
    }

    let mut groups: Vec<Group> = Vec::new();
    for (minute, b) in buckets.iter().enumerate().filter(|(_, b)| !b.is_empty()) {
        match groups.last_mut() {
            Some(prev) if b.len() < min_count => {
                prev.minutes.push(minute);
                prev.count += b.len();
            }
            _ => groups.push(Group {
                minutes: alloc::vec![minute],
                count: b.len(),
            }),
        }
    }
    // The first group has no earlier neighbor; fold it forward instead.
    while groups.len() > 1 && groups[0].count < min_count {
        let first = groups.remove(0);
        groups[0].count += first.count;
        let mut minutes = first.minutes;
        minutes.append(&mut groups[0].minutes);
        groups[0].minutes = minutes;
    }
    match groups.first() {
        None => return Err(insufficient!("no unmasked values for the intraday profile")),
        Some(g) if g.count < min_count || g.count < 2 => {
            return Err(insufficient!(
                "only {} samples available, bucket minimum is {min_count}",
                g.count
            ))
        }
        _ => {}
    }

    let mut std = alloc::vec![None; MINUTES_PER_DAY];
    let mut count = alloc::vec![0; MINUTES_PER_DAY];
    for g in &groups {
        let n = g.count as f64;
        let mean = g
            .minutes
            .iter()
            .flat_map(|&m| buckets[m].iter())
            .sum::<f64>()
            / n;
        let ss: f64 = g
            .minutes
            .iter()
            .flat_map(|&m| buckets[m].iter())
            .map(|x| (x - mean) * (x - mean))
            .sum();
        let sd = libm::sqrt(ss / (n - 1.0));
        if !(sd > 0.0) || !sd.is_finite() {
            return Err(invalid!(
                "zero intraday deviation around minute-of-day {}",
                g.minutes[0]
            ));
        }
        for &m in &g.minutes {
            std[m] = Some(sd);
            count[m] = g.count;
        }
    }
    Ok(IntradayProfile {
        std,
        count,
        min_count,
    })
}

/// Divides every unmasked value by the profile deviation of its minute of day.
pub fn deseasonalize(series: &Series, profile: &IntradayProfile) -> Result<Series> {
    let values = series
        .values()
        .iter()
        .enumerate()
        .map(|(pos, v)| match v {
            None => Ok(None),
            Some(v) => {
                let minute = series.minute_of_day(pos);
                match profile.std_at(minute) {
                    Some(sd) if sd > 0.0 => Ok(Some(v / sd)),
                    _ => Err(Error::MissingBucket(minute)),
                }
            }
        })
        .collect::<Result<Vec<_>>>()?;
    series.with_values(values)
}

/// Removes the least-squares line from each consecutive block of `block`
/// minutes, restarting at every session. Trailing partial blocks get their
/// own fit when they hold at least two unmasked values.
pub fn detrend_local(series: &Series, block: usize) -> Result<Series> {
    if block < 2 {
        return Err(invalid!("detrend block must be at least 2, got {block}"));
    }
    let mut values = series.values().to_vec();
    detrend_in_place(&mut values, &series.session_ranges(), block);
    series.with_values(values)
}

pub(crate) fn detrend_in_place(
    values: &mut [Option<f64>],
    sessions: &[Range<usize>],
    block: usize,
) {
    for r in sessions {
        let mut start = r.start;
        while start < r.end {
            let end = (start + block).min(r.end);
            remove_line(&mut values[start..end]);
            start = end;
        }
    }
}

fn remove_line(chunk: &mut [Option<f64>]) {
    let pts: Vec<(f64, f64)> = chunk
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.map(|v| (i as f64, v)))
        .collect();
    if pts.len() < 2 {
        return;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    for (i, v) in chunk.iter_mut().enumerate() {
        if let Some(v) = v {
            *v -= my + slope * (i as f64 - mx);
        }
    }
}

/// Sums of `dt` consecutive unmasked values, tiled from the start of every
/// unmasked run inside a session. Each coarse value is stamped with the time
/// of its last minute; sessions are preserved.
pub fn coarse_grain(series: &Series, dt: usize) -> Result<Series> {
    if dt == 0 {
        return Err(invalid!("coarse-graining interval must be positive"));
    }
    if dt == 1 {
        return Ok(series.clone());
    }
    let mut timestamps = Vec::new();
    let mut values = Vec::new();
    let mut sessions = Vec::new();
    for r in series.session_ranges() {
        let start = values.len();
        let mut run_sum = 0.0;
        let mut run_len = 0usize;
        for pos in r.clone() {
            match series.get(pos) {
                Some(v) => {
                    run_sum += v;
                    run_len += 1;
                    if run_len == dt {
                        values.push(Some(run_sum));
                        timestamps.push(series.timestamp(pos));
                        run_sum = 0.0;
                        run_len = 0;
                    }
                }
                None => {
                    run_sum = 0.0;
                    run_len = 0;
                }
            }
        }
        if values.len() > start {
            sessions.push(Session {
                date: series.date(r.start),
                start,
                end: values.len(),
                open_skip: 0,
            });
        }
    }
    if values.is_empty() {
        return Err(insufficient!("no run of {dt} consecutive unmasked values"));
    }
    let calendar = Arc::new(TradingCalendar::from_parts(timestamps, sessions));
    Series::new(calendar, values)
}

/// Unmasked sample standard deviation over the whole series.
pub fn period_std(series: &Series) -> Result<f64> {
    let vals = series.valid_values();
    if vals.len() < 2 {
        return Err(insufficient!(
            "{} unmasked values, need at least 2",
            vals.len()
        ));
    }
    Ok(crate::stats::sample_std(&vals))
}
