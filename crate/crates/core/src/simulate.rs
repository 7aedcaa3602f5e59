//! Synthetic multifractal random walk paths and Omori-law event streams.
//!
//! Log-volatility `omega` is a stationary Gaussian process with mean
//! `-lambda2 ln(L/dt)` and covariance `lambda2 ln rho[k]`; increments are
//! `dX = eps * exp(omega)` with `eps ~ N(0, sigma^2 dt)` white noise.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::{invalid, Error, Result};
use crate::fft::{Complex, Fft};

/// Largest length for which the dense Cholesky fallback is attempted.
pub const DENSE_LIMIT: usize = 1 << 14;

/// Relative tolerance below zero accepted for embedding eigenvalues.
const EIGEN_TOLERANCE: f64 = 1e-10;

/// Named sub-streams derived from one user seed.
pub mod streams {
    pub const OMEGA: u64 = 1;
    pub const NOISE: u64 = 2;
    pub const OMORI_BEFORE: u64 = 3;
    pub const OMORI_AFTER: u64 = 4;
}

/// Deterministic generator for sub-stream `stream` of `seed`.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MrwParams {
    /// Volatility scale per square-root minute.
    pub sigma: f64,
    /// Intermittency coefficient.
    pub lambda2: f64,
    /// Decorrelation length in minutes.
    pub l: f64,
    /// Sampling interval in minutes.
    pub dt: f64,
}

impl MrwParams {
    pub fn new(sigma: f64, lambda2: f64, l: f64, dt: f64) -> Result<Self> {
        let p = Self {
            sigma,
            lambda2,
            l,
            dt,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(invalid!("sigma must be positive, got {}", self.sigma));
        }
        if !(self.lambda2 >= 0.0 && self.lambda2.is_finite()) {
            return Err(invalid!(
                "lambda2 must be non-negative, got {}",
                self.lambda2
            ));
        }
        if !(self.dt >= 1.0) {
            return Err(invalid!("dt must be at least 1 minute, got {}", self.dt));
        }
        if !(self.l > self.dt && self.l.is_finite()) {
            return Err(invalid!(
                "L must exceed dt, got L={} dt={}",
                self.l,
                self.dt
            ));
        }
        Ok(())
    }

    /// `L / ((k+1) dt)` for `k <= L/dt - 1`, otherwise 1.
    pub fn rho(&self, k: usize) -> f64 {
        let k = k as f64;
        if k <= self.l / self.dt - 1.0 {
            self.l / ((k + 1.0) * self.dt)
        } else {
            1.0
        }
    }

    /// `Cov(omega[i], omega[i+k]) = lambda2 ln rho[k]`.
    pub fn omega_covariance(&self, k: usize) -> f64 {
        self.lambda2 * libm::log(self.rho(k))
    }

    /// `Var(omega) = lambda2 ln(L/dt)`.
    pub fn omega_variance(&self) -> f64 {
        self.lambda2 * libm::log(self.l / self.dt)
    }

    /// Number of lags with non-zero covariance.
    pub fn support(&self) -> usize {
        libm::ceil(self.l / self.dt) as usize
    }
}

/// Free-function form of [`MrwParams::rho`].
pub fn rho(params: &MrwParams, k: usize) -> f64 {
    params.rho(k)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthesisMethod {
    /// Zero covariance; every sample is the mean.
    Degenerate,
    CirculantEmbedding,
    DenseCholesky,
}

#[derive(Debug, Clone)]
enum Synthesis {
    Degenerate,
    Circulant { plan: Fft, amplitude: Vec<f64> },
    Dense { lower: Vec<f64> },
}

/// Zero-mean stationary Gaussian sampler for a given autocovariance.
#[derive(Debug, Clone)]
pub struct StationaryGaussian {
    n: usize,
    synthesis: Synthesis,
    min_eigenvalue: f64,
}

impl StationaryGaussian {
    /// `acov[k]` is the covariance at lag `k`; lags past the slice are zero.
    /// Circulant embedding is tried first, falling back to a dense Cholesky
    /// factor when the embedding spectrum is negative and `n <= DENSE_LIMIT`.
    pub fn new(acov: &[f64], n: usize) -> Result<Self> {
        if n < 2 {
            return Err(invalid!("need at least 2 samples, got {n}"));
        }
        if acov.is_empty() {
            return Err(invalid!("autocovariance is empty"));
        }
        if acov.iter().all(|&c| c == 0.0) {
            return Ok(Self {
                n,
                synthesis: Synthesis::Degenerate,
                min_eigenvalue: 0.0,
            });
        }
        let half = acov.len().max(n).max(2) - 1;
        let m = (2 * half).next_power_of_two();
        let mut row = alloc::vec![Complex::ZERO; m];
        for (j, slot) in row.iter_mut().enumerate() {
            let lag = j.min(m - j);
            slot.re = acov.get(lag).copied().unwrap_or(0.0);
        }
        let plan = Fft::new(m);
        plan.forward(&mut row);
        let max = row.iter().map(|z| z.re).fold(f64::MIN, f64::max);
        let min = row.iter().map(|z| z.re).fold(f64::MAX, f64::min);
        if min < -EIGEN_TOLERANCE * max.abs() {
            if n <= DENSE_LIMIT {
                let mut s = Self::dense(acov, n)?;
                s.min_eigenvalue = min;
                return Ok(s);
            }
            return Err(Error::EmbeddingFailed {
                min_eigenvalue: min,
                n,
            });
        }
        let scale = 1.0 / m as f64;
        let amplitude = row
            .iter()
            .map(|z| libm::sqrt(z.re.max(0.0) * scale))
            .collect();
        Ok(Self {
            n,
            synthesis: Synthesis::Circulant { plan, amplitude },
            min_eigenvalue: min,
        })
    }

    /// Dense lower-triangular Cholesky factor of the Toeplitz covariance.
    pub fn dense(acov: &[f64], n: usize) -> Result<Self> {
        if n < 2 {
            return Err(invalid!("need at least 2 samples, got {n}"));
        }
        if n > DENSE_LIMIT {
            return Err(invalid!(
                "dense factorization limited to n <= {DENSE_LIMIT}"
            ));
        }
        let cov = |i: usize, j: usize| acov.get(i.abs_diff(j)).copied().unwrap_or(0.0);
        let idx = |i: usize, j: usize| i * (i + 1) / 2 + j;
        let mut lower = alloc::vec![0.0; n * (n + 1) / 2];
        let tol = EIGEN_TOLERANCE * acov[0].abs().max(f64::MIN_POSITIVE);
        for i in 0..n {
            for j in 0..=i {
                let mut s = cov(i, j);
                for k in 0..j {
                    s -= lower[idx(i, k)] * lower[idx(j, k)];
                }
                if i == j {
                    if s < -tol {
                        return Err(Error::NotPositiveDefinite { pivot: s, row: i });
                    }
                    lower[idx(i, i)] = libm::sqrt(s.max(0.0));
                } else {
                    let d = lower[idx(j, j)];
                    lower[idx(i, j)] = if d > 0.0 { s / d } else { 0.0 };
                }
            }
        }
        Ok(Self {
            n,
            synthesis: Synthesis::Dense { lower },
            min_eigenvalue: f64::NAN,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn method(&self) -> SynthesisMethod {
        match self.synthesis {
            Synthesis::Degenerate => SynthesisMethod::Degenerate,
            Synthesis::Circulant { .. } => SynthesisMethod::CirculantEmbedding,
            Synthesis::Dense { .. } => SynthesisMethod::DenseCholesky,
        }
    }

    /// Smallest eigenvalue of the circulant embedding (NaN if never formed).
    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match &self.synthesis {
            Synthesis::Degenerate => alloc::vec![0.0; self.n],
            Synthesis::Circulant { plan, amplitude } => {
                let mut w: Vec<Complex> = amplitude
                    .iter()
                    .map(|&a| {
                        let re: f64 = StandardNormal.sample(rng);
                        let im: f64 = StandardNormal.sample(rng);
                        Complex::new(a * re, a * im)
                    })
                    .collect();
                plan.forward(&mut w);
                w.iter().take(self.n).map(|z| z.re).collect()
            }
            Synthesis::Dense { lower } => {
                let z: Vec<f64> = (0..self.n).map(|_| StandardNormal.sample(rng)).collect();
                (0..self.n)
                    .map(|i| {
                        let row = &lower[i * (i + 1) / 2..i * (i + 1) / 2 + i + 1];
                        row.iter().zip(&z).map(|(l, z)| l * z).sum()
                    })
                    .collect()
            }
        }
    }
}

/// One simulated path: increments and their log-volatility.
#[derive(Debug, Clone, PartialEq)]
pub struct MrwPath {
    pub dx: Vec<f64>,
    pub omega: Vec<f64>,
}

/// Reusable MRW generator for a fixed `(params, n)`; the covariance
/// factorization is computed once and shared across seeds.
#[derive(Debug, Clone)]
pub struct MrwSimulator {
    params: MrwParams,
    omega: StationaryGaussian,
}

impl MrwSimulator {
    pub fn new(params: MrwParams, n: usize) -> Result<Self> {
        params.validate()?;
        if n < 2 {
            return Err(invalid!("path length must be at least 2, got {n}"));
        }
        if !params.omega_variance().is_finite() {
            return Err(invalid!("lambda2 ln(L/dt) is not finite"));
        }
        let lags = params.support().max(n);
        let acov: Vec<f64> = (0..lags).map(|k| params.omega_covariance(k)).collect();
        let omega = StationaryGaussian::new(&acov, n)?;
        Ok(Self { params, omega })
    }

    pub fn params(&self) -> &MrwParams {
        &self.params
    }

    pub fn method(&self) -> SynthesisMethod {
        self.omega.method()
    }

    pub fn omega(&self, seed: u64) -> Vec<f64> {
        let mean = -self.params.omega_variance();
        let mut rng = substream(seed, streams::OMEGA);
        let mut w = self.omega.sample(&mut rng);
        for v in &mut w {
            *v += mean;
        }
        w
    }

    pub fn path(&self, seed: u64) -> MrwPath {
        let omega = self.omega(seed);
        let sd = self.params.sigma * libm::sqrt(self.params.dt);
        let mut rng = substream(seed, streams::NOISE);
        let dx = omega
            .iter()
            .map(|w| {
                let eps: f64 = StandardNormal.sample(&mut rng);
                sd * eps * libm::exp(*w)
            })
            .collect();
        MrwPath { dx, omega }
    }
}

pub fn simulate_omega(params: &MrwParams, n: usize, seed: u64) -> Result<Vec<f64>> {
    Ok(MrwSimulator::new(*params, n)?.omega(seed))
}

pub fn simulate_mrw(params: &MrwParams, n: usize, seed: u64) -> Result<MrwPath> {
    Ok(MrwSimulator::new(*params, n)?.path(seed))
}

/// Foreshock/aftershock cumulative laws `N(t) = c |t|^beta` on each side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmoriParams {
    pub beta_before: f64,
    pub beta_after: f64,
    pub c_before: f64,
    pub c_after: f64,
    /// Minutes simulated before the main shock.
    pub horizon_before: f64,
    /// Minutes simulated after the main shock.
    pub horizon_after: f64,
    /// Require `0 < beta_before < beta_after < 1`.
    pub strict_ordering: bool,
}

/// Minimum expected number of events per side.
pub const MIN_OMORI_EVENTS: f64 = 20.0;

impl OmoriParams {
    pub fn validate(&self) -> Result<()> {
        for (name, beta) in [
            ("beta_before", self.beta_before),
            ("beta_after", self.beta_after),
        ] {
            if self.strict_ordering {
                if !(beta > 0.0 && beta < 1.0) {
                    return Err(invalid!("{name} must lie in (0, 1), got {beta}"));
                }
            } else if !(beta > 0.0 && beta <= 1.0) {
                return Err(invalid!("{name} must lie in (0, 1], got {beta}"));
            }
        }
        if self.strict_ordering && self.beta_before >= self.beta_after {
            return Err(invalid!(
                "ordering 0 < beta_before < beta_after < 1 violated ({} >= {})",
                self.beta_before,
                self.beta_after
            ));
        }
        for (name, c) in [("c_before", self.c_before), ("c_after", self.c_after)] {
            if !(c > 0.0 && c.is_finite()) {
                return Err(invalid!("{name} must be positive, got {c}"));
            }
        }
        for (name, h) in [
            ("horizon_before", self.horizon_before),
            ("horizon_after", self.horizon_after),
        ] {
            if !(h >= 10.0 && h.is_finite()) {
                return Err(invalid!("{name} must be at least 10 minutes, got {h}"));
            }
        }
        let (eb, ea) = self.expected_counts();
        if eb < MIN_OMORI_EVENTS || ea < MIN_OMORI_EVENTS {
            return Err(invalid!(
                "expected events before/after = {eb:.1}/{ea:.1}; at least {MIN_OMORI_EVENTS} needed on each side"
            ));
        }
        Ok(())
    }

    /// `(c_b H_b^beta_b, c_a H_a^beta_a)`.
    pub fn expected_counts(&self) -> (f64, f64) {
        (
            self.c_before * libm::pow(self.horizon_before, self.beta_before),
            self.c_after * libm::pow(self.horizon_after, self.beta_after),
        )
    }
}

/// Event times in signed minutes from the main shock, ascending, including
/// the shock itself at 0. Each side is an inhomogeneous Poisson process
/// whose compensator is exactly `c |t|^beta`, placed by inverting the
/// compensator at unit-rate exponential arrival times.
pub fn simulate_omori_events(params: &OmoriParams, seed: u64) -> Result<Vec<f64>> {
    params.validate()?;
    let side = |c: f64, beta: f64, horizon: f64, stream: u64| -> Vec<f64> {
        let mut rng = substream(seed, stream);
        let total = c * libm::pow(horizon, beta);
        let mut arrival = 0.0;
        let mut times = Vec::new();
        loop {
            let step: f64 = Exp1.sample(&mut rng);
            arrival += step;
            if arrival > total {
                break;
            }
            times.push(libm::pow(arrival / c, 1.0 / beta));
        }
        times
    };
    let before = side(
        params.c_before,
        params.beta_before,
        params.horizon_before,
        streams::OMORI_BEFORE,
    );
    let after = side(
        params.c_after,
        params.beta_after,
        params.horizon_after,
        streams::OMORI_AFTER,
    );
    let mut events: Vec<f64> = before.iter().rev().map(|t| -t).collect();
    events.push(0.0);
    events.extend(after);
    Ok(events)
}
