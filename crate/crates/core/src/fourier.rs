//! Fourier coefficients of log-price increments and of the latent volatility.
//!
//! `coeffs_dp` evaluates c_k(dp_n) = (1/2π) Σ_i e^{-ikt_i} (p(t_{i+1}) - p(t_i)).
//! When the observation times sit on a uniform sub-grid of [0, 2π] the sum is a
//! DFT of the (sparsely embedded) increment sequence and is computed with one
//! FFT; otherwise the literal nonuniform sum is used. `coeffs_v` applies the
//! convolution c_k(v) = 2π/(2N+1) Σ_{|s|<=N} c_s(dp) c_{k-s}(dp).

use crate::error::{Error, Result};
use crate::float::Real;
use crate::series::PriceSeries;
use num_complex::Complex;
use rustfft::FftPlanner;

/// Complex coefficient sequence indexed k = -k_max ..= k_max.
#[derive(Debug, Clone)]
pub struct CoeffArray<T> {
    k_max: usize,
    values: Vec<Complex<T>>,
}

impl<T: Real> CoeffArray<T> {
    /// Builds from a vector of length 2·k_max+1 ordered from -k_max to k_max.
    pub fn from_values(k_max: usize, values: Vec<Complex<T>>) -> Result<Self> {
        if values.len() != 2 * k_max + 1 {
            return Err(Error::InvalidConfig(format!(
                "coefficient vector must have length {}, got {}",
                2 * k_max + 1,
                values.len()
            )));
        }
        Ok(Self { k_max, values })
    }

    /// Builds a Hermitian array from the nonnegative-k half.
    pub fn from_nonnegative_half(half: &[Complex<T>]) -> Self {
        let k_max = half.len() - 1;
        let mut values = Vec::with_capacity(2 * k_max + 1);
        for k in (1..=k_max).rev() {
            values.push(half[k].conj());
        }
        values.extend_from_slice(half);
        Self { k_max, values }
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    /// Coefficient at index k; panics when |k| > k_max.
    pub fn get(&self, k: i64) -> Complex<T> {
        let idx = k + self.k_max as i64;
        self.values[idx as usize]
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    /// Largest relative Hermitian-symmetry violation max_k |c(-k) - conj(c(k))|.
    pub fn hermitian_defect(&self) -> T {
        let mut worst = T::zero();
        for k in 0..=self.k_max as i64 {
            let d = self.get(-k) - self.get(k).conj();
            let scale = self.get(k).norm().max(T::one());
            let rel = d.norm() / scale;
            if rel > worst {
                worst = rel;
            }
        }
        worst
    }
}

/// Coefficients of the price increments, FFT-accelerated when the grid allows.
pub fn coeffs_dp<T: Real>(series: &PriceSeries<T>, k_max: usize) -> CoeffArray<T> {
    match series.grid_embedding() {
        Some(embed) => {
            let increments = series.increments();
            let mut buf = vec![Complex::new(T::zero(), T::zero()); embed.grid_len];
            for (i, &d) in increments.iter().enumerate() {
                buf[embed.positions[i]].re += d;
            }
            let mut planner = FftPlanner::new();
            planner.plan_fft_forward(embed.grid_len).process(&mut buf);
            let inv_two_pi = T::one() / T::two_pi();
            let half: Vec<Complex<T>> = (0..=k_max)
                .map(|k| buf[k % embed.grid_len] * inv_two_pi)
                .collect();
            CoeffArray::from_nonnegative_half(&half)
        }
        None => coeffs_dp_direct(series, k_max),
    }
}

/// Literal evaluation of the nonuniform sum; the oracle the FFT path is
/// checked against.
pub fn coeffs_dp_direct<T: Real>(series: &PriceSeries<T>, k_max: usize) -> CoeffArray<T> {
    let times = series.times();
    let increments = series.increments();
    let inv_two_pi = T::one() / T::two_pi();
    let half: Vec<Complex<T>> = (0..=k_max as i64)
        .map(|k| {
            let mut acc = Complex::new(T::zero(), T::zero());
            for (i, &d) in increments.iter().enumerate() {
                let phase = -T::from_f(k as f64) * times[i];
                acc += Complex::from_polar(d, phase);
            }
            acc * inv_two_pi
        })
        .collect();
    CoeffArray::from_nonnegative_half(&half)
}

/// Convolution estimator of the volatility coefficients c_k(v_{n,N}) for
/// |k| <= k_range, using cutting frequency N.
pub fn coeffs_v<T: Real>(
    dp: &CoeffArray<T>,
    cutoff_n: usize,
    k_range: usize,
) -> Result<CoeffArray<T>> {
    let required = cutoff_n + k_range;
    if dp.k_max() < required {
        return Err(Error::InsufficientCoeffs {
            required,
            available: dp.k_max(),
        });
    }
    let n_i = cutoff_n as i64;
    let norm = T::two_pi() / T::from_n(2 * cutoff_n + 1);
    let mut half = Vec::with_capacity(k_range + 1);
    // k = 0 is a sum of |c_s|^2: real and nonnegative by construction
    let mut c0 = T::zero();
    for s in -n_i..=n_i {
        c0 += dp.get(s).norm_sqr();
    }
    half.push(Complex::new(c0 * norm, T::zero()));
    for k in 1..=k_range as i64 {
        let mut acc = Complex::new(T::zero(), T::zero());
        for s in -n_i..=n_i {
            acc += dp.get(s) * dp.get(k - s);
        }
        half.push(acc * norm);
    }
    Ok(CoeffArray::from_nonnegative_half(&half))
}
