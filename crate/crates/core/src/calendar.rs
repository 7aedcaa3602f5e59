//! Trading calendar: the ordered set of minutes on which every series lives.
//!
//! Positions are trading minutes. Overnight gaps are compressed out, so a
//! position difference is elapsed trading time.

use alloc::vec::Vec;
use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, NaiveTime, Timelike, Weekday};

use crate::error::{invalid, Result};

/// One trading day: the half-open position range `start..end` plus the
/// number of minutes to discard after the open.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Session {
    pub date: NaiveDate,
    pub start: usize,
    pub end: usize,
    pub open_skip: usize,
}

impl Session {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }

    /// First position after the opening skip.
    pub fn first_usable(&self) -> usize {
        self.start + self.open_skip
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TradingCalendar {
    timestamps: Vec<NaiveDateTime>,
    sessions: Vec<Session>,
}

fn epoch() -> NaiveDateTime {
    NaiveDate::from_ymd_opt(2000, 1, 3)
        .unwrap()
        .and_hms_opt(0, 0, 0)
        .unwrap()
}

impl TradingCalendar {
    /// Builds sessions by grouping strictly increasing timestamps by date.
    pub fn from_timestamps(timestamps: Vec<NaiveDateTime>) -> Result<Self> {
        if timestamps.is_empty() {
            return Err(invalid!("calendar needs at least one timestamp"));
        }
        if let Some(w) = timestamps.windows(2).position(|w| w[0] >= w[1]) {
            return Err(invalid!(
                "timestamps not strictly increasing at position {}",
                w + 1
            ));
        }
        let mut sessions: Vec<Session> = Vec::new();
        for (i, ts) in timestamps.iter().enumerate() {
            match sessions.last_mut() {
                Some(s) if s.date == ts.date() => s.end = i + 1,
                _ => sessions.push(Session {
                    date: ts.date(),
                    start: i,
                    end: i + 1,
                    open_skip: 0,
                }),
            }
        }
        Ok(Self {
            timestamps,
            sessions,
        })
    }

    /// A single uninterrupted session of `n` minutes, used for simulated
    /// paths whose memory is not broken by market closures.
    pub fn continuous(n: usize) -> Self {
        let start = epoch();
        let timestamps: Vec<NaiveDateTime> = (0..n)
            .map(|i| start + Duration::minutes(i as i64))
            .collect();
        Self {
            timestamps,
            sessions: alloc::vec![Session {
                date: start.date(),
                start: 0,
                end: n,
                open_skip: 0,
            }],
        }
    }

    /// `days` weekday sessions of `minutes` each, opening at `open`.
    pub fn weekdays(first: NaiveDate, days: usize, open: NaiveTime, minutes: usize) -> Self {
        let mut timestamps = Vec::with_capacity(days * minutes);
        let mut sessions = Vec::with_capacity(days);
        let mut date = first;
        while sessions.len() < days {
            if !matches!(date.weekday(), Weekday::Sat | Weekday::Sun) {
                let start = timestamps.len();
                let open_at = date.and_time(open);
                timestamps.extend((0..minutes).map(|m| open_at + Duration::minutes(m as i64)));
                sessions.push(Session {
                    date,
                    start,
                    end: timestamps.len(),
                    open_skip: 0,
                });
            }
            date = date.succ_opt().expect("date overflow");
        }
        Self {
            timestamps,
            sessions,
        }
    }

    /// Applies per-day opening skips. Dates not present in the calendar are
    /// ignored; a skip must leave at least one minute in its session.
    pub fn set_open_skips(&mut self, skips: &[(NaiveDate, usize)]) -> Result<()> {
        for &(date, skip) in skips {
            if let Some(s) = self.sessions.iter_mut().find(|s| s.date == date) {
                if skip >= s.len() {
                    return Err(invalid!(
                        "open skip {skip} on {date} not below session length {}",
                        s.len()
                    ));
                }
                s.open_skip = skip;
            }
        }
        Ok(())
    }

    /// Assembles a calendar from already-validated parts.
    pub(crate) fn from_parts(timestamps: Vec<NaiveDateTime>, sessions: Vec<Session>) -> Self {
        debug_assert!(sessions.last().is_none_or(|s| s.end == timestamps.len()));
        Self {
            timestamps,
            sessions,
        }
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn timestamps(&self) -> &[NaiveDateTime] {
        &self.timestamps
    }

    pub fn timestamp(&self, pos: usize) -> NaiveDateTime {
        self.timestamps[pos]
    }

    pub fn sessions(&self) -> &[Session] {
        &self.sessions
    }

    /// Index of the session containing `pos`.
    pub fn session_of(&self, pos: usize) -> usize {
        self.sessions.partition_point(|s| s.end <= pos)
    }

    pub fn minute_of_day(&self, pos: usize) -> u16 {
        let t = self.timestamps[pos].time();
        (t.hour() * 60 + t.minute()) as u16
    }

    pub fn position_of(&self, ts: NaiveDateTime) -> Option<usize> {
        self.timestamps.binary_search(&ts).ok()
    }

    pub fn longest_session(&self) -> usize {
        self.sessions.iter().map(Session::len).max().unwrap_or(0)
    }
}
