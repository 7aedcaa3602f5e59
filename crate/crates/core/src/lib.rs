//! Multifractal random walk (MRW) toolkit for minute-resolution market data.
//!
//! The crate covers the full crash-precursor pipeline:
//!
//! * [`preprocess`]: session-aware log-returns, intraday de-seasonalization
//!   and local detrending on a shared [`calendar::TradingCalendar`];
//! * [`market_mode`]: the equal-weight average of normalized issue returns;
//! * [`simulate`]: exact synthetic MRW paths and Omori-law event streams;
//! * [`estimate`]: `(lambda2, L)` from the log-absolute-return covariance and
//!   the moment-scaling spectrum `zeta_q`;
//! * [`window`]: the sliding-window `Var(omega)` trajectory;
//! * [`events`]: foreshock/aftershock exponents around a main shock;
//! * [`news`]: the power law linking `Var(omega)` to cumulative news counts.
//!
//! The crate is `no_std` and only needs `alloc`. File formats and the
//! command-line front end live in the `mrw` crate.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]
extern crate alloc;

pub mod calendar;
pub mod error;
pub mod estimate;
pub mod events;
pub mod fft;
pub mod market_mode;
pub mod news;
pub mod preprocess;
pub mod regression;
pub mod series;
pub mod simulate;
pub mod stats;
pub mod window;

pub use calendar::{Session, TradingCalendar};
pub use error::{Error, Result};
pub use estimate::{
    fit_lambda_l, fit_zeta, log_abs_cov, moment_scaling, zeta_theoretical, CovCurve, FitStatus,
    MomentTable, MrwFit, ZetaSpectrum,
};
pub use events::{cumulative_frequency, find_main_shock, fit_omori, OmoriFit, ShockFrame};
pub use market_mode::{compute_market_mode, MarketMode, MarketModeConfig};
pub use news::{
    deseasonalize_news, fit_news_coupling, fit_news_coupling_pairs, NewsCoupling, NewsSeries,
};
pub use preprocess::{
    coarse_grain, deseasonalize, detrend_local, intraday_profile, log_returns, IntradayProfile,
};
pub use series::{PriceSeries, ReturnSeries, Series};
pub use simulate::{
    simulate_mrw, simulate_omega, simulate_omori_events, MrwParams, MrwPath, MrwSimulator,
    OmoriParams,
};
pub use window::{daily_large_count, window_scan, DetrendMode, WindowEstimate, WindowScanConfig};
