//! Observed log-price series on the rescaled window [0, 2π].

use crate::error::{Error, Result};
use crate::float::Real;

/// Log-price observations with time stamps rescaled to radians in [0, 2π].
///
/// The original horizon (in year fractions, e.g. `1/252` for one trading day)
/// is kept alongside so that integrated quantities can be relabelled into the
/// caller's units at the I/O boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries<T> {
    times: Vec<T>,
    log_prices: Vec<T>,
    horizon: T,
}

/// Alignment of the observation times with a uniform sub-grid of [0, 2π].
///
/// When all times are (up to rounding) integer multiples of a common mesh,
/// increments can be embedded in a length-`grid_len` circular buffer and the
/// Fourier coefficients computed with a single FFT.
#[derive(Debug, Clone)]
pub struct GridEmbedding {
    /// Index of each observation on the uniform grid.
    pub positions: Vec<usize>,
    /// Number of grid cells covering [0, 2π).
    pub grid_len: usize,
}

impl<T: Real> PriceSeries<T> {
    /// Builds a series from radian time stamps and log-prices, validating invariants.
    pub fn new(times: Vec<T>, log_prices: Vec<T>, horizon: T) -> Result<Self> {
        if times.len() != log_prices.len() {
            return Err(Error::LengthMismatch {
                times: times.len(),
                prices: log_prices.len(),
            });
        }
        if times.len() < 2 {
            return Err(Error::TooFewObservations {
                n: times.len(),
                min: 2,
            });
        }
        if horizon <= T::zero() {
            return Err(Error::InvalidConfig("horizon must be positive".into()));
        }
        let two_pi = T::two_pi();
        let slack = T::from_f(1e-9);
        if times[0] < -slack {
            return Err(Error::TimeOutOfRange { index: 0 });
        }
        if *times.last().unwrap() > two_pi + slack {
            return Err(Error::TimeOutOfRange {
                index: times.len() - 1,
            });
        }
        for i in 1..times.len() {
            if times[i] <= times[i - 1] {
                return Err(Error::NonMonotoneTimes { index: i });
            }
        }
        Ok(Self {
            times,
            log_prices,
            horizon,
        })
    }

    /// Maps raw time stamps (e.g. seconds from the open) affinely onto [0, 2π]
    /// and takes logs of the (strictly positive) price levels.
    pub fn rescale_to_2pi(raw_times: &[T], prices: &[T], horizon: T) -> Result<Self> {
        if raw_times.len() != prices.len() {
            return Err(Error::LengthMismatch {
                times: raw_times.len(),
                prices: prices.len(),
            });
        }
        if raw_times.len() < 2 {
            return Err(Error::TooFewObservations {
                n: raw_times.len(),
                min: 2,
            });
        }
        for i in 1..raw_times.len() {
            if raw_times[i] <= raw_times[i - 1] {
                return Err(Error::NonMonotoneTimes { index: i });
            }
        }
        for (i, &p) in prices.iter().enumerate() {
            if p <= T::zero() {
                return Err(Error::NonPositivePrice { index: i });
            }
        }
        let t0 = raw_times[0];
        let span = *raw_times.last().unwrap() - t0;
        let scale = T::two_pi() / span;
        let n = raw_times.len();
        let mut times: Vec<T> = raw_times.iter().map(|&t| (t - t0) * scale).collect();
        // pin the endpoints exactly
        times[0] = T::zero();
        times[n - 1] = T::two_pi();
        let log_prices = prices.iter().map(|&p| p.ln()).collect();
        Self::new(times, log_prices, horizon)
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn log_prices(&self) -> &[T] {
        &self.log_prices
    }

    /// Original horizon in the caller's units (year fractions).
    pub fn horizon(&self) -> T {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Number of price increments n.
    pub fn n_increments(&self) -> usize {
        self.times.len() - 1
    }

    /// Mesh ρ(n): the largest gap between consecutive observation times (radians).
    pub fn mesh(&self) -> T {
        let mut m = T::zero();
        for i in 1..self.times.len() {
            let d = self.times[i] - self.times[i - 1];
            if d > m {
                m = d;
            }
        }
        m
    }

    /// Average gap (t_n − t_0)/n in radians.
    pub fn mean_mesh(&self) -> T {
        (*self.times.last().unwrap() - self.times[0]) / T::from_n(self.n_increments())
    }

    /// Log-price increments p(t_{i+1}) − p(t_i).
    pub fn increments(&self) -> Vec<T> {
        self.log_prices
            .windows(2)
            .map(|w| w[1] - w[0])
            .collect()
    }

    /// True when the grid is uniform within `rel_tol` of the mean mesh.
    pub fn is_regular(&self, rel_tol: T) -> bool {
        let mean = self.mean_mesh();
        self.times
            .windows(2)
            .all(|w| ((w[1] - w[0]) - mean).abs() <= rel_tol * mean)
    }

    /// Detects whether all observation times sit on a uniform sub-grid of
    /// [0, 2π] anchored at 0. Returns the integer grid positions if so.
    pub fn grid_embedding(&self) -> Option<GridEmbedding> {
        const MAX_GRID: f64 = 1.6e7;
        let t0 = self.times[0].as_f64();
        let span = self.times.last().unwrap().as_f64() - t0;
        if t0.abs() > 1e-9 || (span - std::f64::consts::TAU).abs() > 1e-9 {
            return None;
        }
        let mut min_gap = f64::INFINITY;
        for w in self.times.windows(2) {
            let d = (w[1] - w[0]).as_f64();
            if d < min_gap {
                min_gap = d;
            }
        }
        let cells = span / min_gap;
        if !(1.0..MAX_GRID).contains(&cells) {
            return None;
        }
        let grid_len = cells.round() as usize;
        let mesh = span / grid_len as f64;
        let mut positions = Vec::with_capacity(self.times.len());
        for &t in &self.times {
            let x = (t.as_f64() - t0) / mesh;
            let p = x.round();
            if (x - p).abs() > 1e-6 {
                return None;
            }
            positions.push(p as usize);
        }
        Some(GridEmbedding { positions, grid_len })
    }

    /// Previous-tick resampling onto a regular `n_obs`-point grid spanning the
    /// window, for estimators that are only defined on uniform grids.
    pub fn previous_tick(&self, n_obs: usize) -> Result<Self> {
        if n_obs < 2 {
            return Err(Error::TooFewObservations { n: n_obs, min: 2 });
        }
        let t0 = self.times[0];
        let span = *self.times.last().unwrap() - t0;
        let step = span / T::from_n(n_obs - 1);
        let mut times = Vec::with_capacity(n_obs);
        let mut prices = Vec::with_capacity(n_obs);
        let mut j = 0usize;
        for i in 0..n_obs {
            let t = t0 + step * T::from_n(i);
            while j + 1 < self.times.len() && self.times[j + 1] <= t + step * T::from_f(1e-9) {
                j += 1;
            }
            times.push(t);
            prices.push(self.log_prices[j]);
        }
        times[n_obs - 1] = *self.times.last().unwrap();
        Self::new(times, prices, self.horizon)
    }
}
