//! Masked series aligned to a shared [`TradingCalendar`].

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::ops::Range;

use chrono::{NaiveDate, NaiveDateTime};

use crate::calendar::TradingCalendar;
use crate::error::{invalid, Error, Result};

/// Values on a contiguous stretch of a calendar. `None` marks a masked
/// minute; masked entries never enter any statistic.
#[derive(Debug, Clone)]
pub struct Series {
    calendar: Arc<TradingCalendar>,
    offset: usize,
    values: Vec<Option<f64>>,
}

impl Series {
    pub fn new(calendar: Arc<TradingCalendar>, values: Vec<Option<f64>>) -> Result<Self> {
        if values.len() != calendar.len() {
            return Err(invalid!(
                "series length {} differs from calendar length {}",
                values.len(),
                calendar.len()
            ));
        }
        Ok(Self {
            calendar,
            offset: 0,
            values,
        })
    }

    /// Plain values on a continuous single-session calendar. Non-finite
    /// entries are masked.
    pub fn from_values(values: &[f64]) -> Self {
        Self::from_options(values.iter().map(|&v| v.is_finite().then_some(v)).collect())
    }

    pub fn from_options(values: Vec<Option<f64>>) -> Self {
        Self {
            calendar: Arc::new(TradingCalendar::continuous(values.len())),
            offset: 0,
            values,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    pub fn get(&self, pos: usize) -> Option<f64> {
        self.values.get(pos).copied().flatten()
    }

    pub fn calendar(&self) -> &Arc<TradingCalendar> {
        &self.calendar
    }

    /// Calendar position of series position 0.
    pub fn offset(&self) -> usize {
        self.offset
    }

    pub fn timestamp(&self, pos: usize) -> NaiveDateTime {
        self.calendar.timestamp(self.offset + pos)
    }

    pub fn minute_of_day(&self, pos: usize) -> u16 {
        self.calendar.minute_of_day(self.offset + pos)
    }

    pub fn date(&self, pos: usize) -> NaiveDate {
        self.calendar.sessions()[self.calendar.session_of(self.offset + pos)].date
    }

    /// Session position ranges clipped to this series, relative to position 0.
    pub fn session_ranges(&self) -> Vec<Range<usize>> {
        let lo = self.offset;
        let hi = self.offset + self.values.len();
        self.calendar
            .sessions()
            .iter()
            .filter(|s| s.end > lo && s.start < hi)
            .map(|s| s.start.max(lo) - lo..s.end.min(hi) - lo)
            .collect()
    }

    /// Like [`Series::session_ranges`] but starting each session after its
    /// opening skip.
    pub fn usable_session_ranges(&self) -> Vec<Range<usize>> {
        let lo = self.offset;
        let hi = self.offset + self.values.len();
        self.calendar
            .sessions()
            .iter()
            .filter(|s| s.end > lo && s.first_usable() < hi)
            .map(|s| s.first_usable().max(lo) - lo..s.end.min(hi) - lo)
            .filter(|r| !r.is_empty())
            .collect()
    }

    /// Number of calendar sessions this series touches.
    pub fn session_count(&self) -> usize {
        self.session_ranges().len()
    }

    /// Copy of the positions in `range`, keeping calendar alignment.
    pub fn window(&self, range: Range<usize>) -> Result<Self> {
        if range.start > range.end || range.end > self.len() {
            return Err(Error::OutOfRange(range.end));
        }
        Ok(Self {
            calendar: Arc::clone(&self.calendar),
            offset: self.offset + range.start,
            values: self.values[range].to_vec(),
        })
    }

    /// Same alignment, new values.
    pub fn with_values(&self, values: Vec<Option<f64>>) -> Result<Self> {
        if values.len() != self.values.len() {
            return Err(invalid!("replacement values have a different length"));
        }
        Ok(Self {
            calendar: Arc::clone(&self.calendar),
            offset: self.offset,
            values,
        })
    }

    pub fn valid_values(&self) -> Vec<f64> {
        self.values.iter().flatten().copied().collect()
    }

    pub fn valid_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }

    pub fn is_aligned_with(&self, other: &Series) -> bool {
        self.offset == other.offset
            && self.values.len() == other.values.len()
            && (Arc::ptr_eq(&self.calendar, &other.calendar) || self.calendar == other.calendar)
    }
}

/// Minute prices of one issue. Unmasked prices are strictly positive.
#[derive(Debug, Clone)]
pub struct PriceSeries {
    pub issue_id: String,
    pub series: Series,
}

impl PriceSeries {
    pub fn new(issue_id: impl Into<String>, series: Series) -> Result<Self> {
        let issue_id = issue_id.into();
        if let Some(pos) = series
            .values()
            .iter()
            .position(|v| matches!(v, Some(p) if !(*p > 0.0)))
        {
            return Err(invalid!(
                "issue {issue_id}: non-positive price at position {pos}"
            ));
        }
        Ok(Self { issue_id, series })
    }
}

/// Log-returns of one issue at lag `dt` minutes; never spans a session
/// boundary.
#[derive(Debug, Clone)]
pub struct ReturnSeries {
    pub issue_id: String,
    pub dt: usize,
    pub series: Series,
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveTime;

    #[test]
    fn windows_keep_alignment() {
        let cal = Arc::new(TradingCalendar::weekdays(
            NaiveDate::from_ymd_opt(2008, 10, 6).unwrap(),
            3,
            NaiveTime::from_hms_opt(8, 0, 0).unwrap(),
            5,
        ));
        let s = Series::new(cal, (0..15).map(|i| Some(i as f64)).collect()).unwrap();
        let w = s.window(3..12).unwrap();
        assert_eq!(w.get(0), Some(3.0));
        assert_eq!(w.offset(), 3);
        assert_eq!(w.session_ranges(), alloc::vec![0..2, 2..7, 7..9]);
        assert_eq!(w.minute_of_day(2), 480);
        assert_eq!(w.date(2), NaiveDate::from_ymd_opt(2008, 10, 7).unwrap());
        assert!(s.window(10..16).is_err());
    }

    #[test]
    fn non_finite_is_masked() {
        let s = Series::from_values(&[1.0, f64::NAN, 3.0]);
        assert_eq!(s.valid_count(), 2);
        assert_eq!(s.get(1), None);
    }

    #[test]
    fn price_must_be_positive() {
        let s = Series::from_values(&[1.0, -5.0]);
        assert!(PriceSeries::new("X", s).is_err());
        let s = Series::from_options(alloc::vec![Some(1.0), None]);
        assert!(PriceSeries::new("X", s).is_ok());
    }
}
