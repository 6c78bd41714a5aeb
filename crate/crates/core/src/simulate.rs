//! Discrete-observation simulators for the two stochastic-volatility models
//! used by the Monte Carlo harness, plus Poisson resampling of a fine grid.
//!
//! Euler–Maruyama with full truncation: the square-root diffusions evaluate
//! √max(x, 0) and the drift at max(x, 0), which keeps the variance and
//! vol-of-vol paths from going negative. Each path owns a counter-based RNG
//! stream so simulation is reproducible and embarrassingly parallel.

use crate::error::{Error, Result};
use crate::float::Real;
use crate::series::PriceSeries;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::io::Write;

/// Trading seconds per year: 252 days of 6.5 hours.
pub const SECONDS_PER_YEAR: f64 = 252.0 * 23_400.0;

/// Square-root variance model with leverage:
/// dp = (μ - v/2)dt + √v dW, dv = θ(α - v)dt + γ√v dZ, corr(W,Z) = ρ.
/// Its vol-of-vol is γ²(t) = γ²·v(t).
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct HestonParams<T> {
    pub mu: T,
    /// Mean-reversion speed θ > 0.
    pub theta: T,
    /// Long-run variance α > 0.
    pub alpha: T,
    /// Vol-of-vol scale γ > 0.
    pub gamma: T,
    /// Brownian correlation ρ ∈ [-1, 1].
    pub rho: T,
    pub p0: T,
    pub v0: T,
}

impl<T: Real> Default for HestonParams<T> {
    /// Benchmark calibration used throughout the harness.
    fn default() -> Self {
        Self {
            mu: T::from_f(0.1),
            theta: T::from_f(5.0),
            alpha: T::from_f(0.2),
            gamma: T::from_f(0.5),
            rho: T::from_f(-0.8),
            p0: T::one(),
            v0: T::from_f(0.2),
        }
    }
}

impl<T: Real> HestonParams<T> {
    pub fn validate(&self) -> Result<()> {
        if self.theta <= T::zero() || self.alpha <= T::zero() || self.v0 <= T::zero() {
            return Err(Error::InvalidConfig("theta, alpha, v0 must be positive".into()));
        }
        if self.gamma < T::zero() {
            return Err(Error::InvalidConfig("gamma must be nonnegative".into()));
        }
        if self.rho.abs() > T::one() {
            return Err(Error::InvalidConfig("rho must lie in [-1, 1]".into()));
        }
        Ok(())
    }
}

/// Model with stochastic vol-of-vol:
/// dv = θ(α - v)dt + γ(t) dZ and dγ² = χ(η̄ - γ²)dt + ξ γ(t) dY with Y
/// independent of (W, Z).
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct SvvParams<T> {
    pub mu: T,
    pub theta: T,
    pub alpha: T,
    /// Vol-of-vol mean-reversion χ > 0.
    pub chi: T,
    /// Vol-of-vol long-run level η̄ > 0.
    pub eta_bar: T,
    /// Vol-of-vol-of-vol scale ξ > 0.
    pub xi: T,
    pub rho: T,
    pub p0: T,
    pub v0: T,
    pub g2_0: T,
}

impl<T: Real> Default for SvvParams<T> {
    /// Benchmark calibration used throughout the harness.
    fn default() -> Self {
        Self {
            mu: T::from_f(0.1),
            theta: T::from_f(5.0),
            alpha: T::from_f(0.2),
            chi: T::from_f(7.0),
            eta_bar: T::from_f(0.1),
            xi: T::from_f(0.8),
            rho: T::from_f(-0.8),
            p0: T::one(),
            v0: T::from_f(0.2),
            g2_0: T::from_f(0.1),
        }
    }
}

impl<T: Real> SvvParams<T> {
    pub fn validate(&self) -> Result<()> {
        if self.theta <= T::zero()
            || self.alpha <= T::zero()
            || self.chi <= T::zero()
            || self.eta_bar <= T::zero()
            || self.v0 <= T::zero()
            || self.g2_0 <= T::zero()
        {
            return Err(Error::InvalidConfig(
                "theta, alpha, chi, eta_bar, v0, g2_0 must be positive".into(),
            ));
        }
        if self.xi < T::zero() {
            return Err(Error::InvalidConfig("xi must be nonnegative".into()));
        }
        if self.rho.abs() > T::one() {
            return Err(Error::InvalidConfig("rho must lie in [-1, 1]".into()));
        }
        Ok(())
    }
}

/// Simulated trajectory with its exact (quadrature) ground truth.
#[derive(Debug, Clone)]
pub struct SimPath<T> {
    /// Observed log-prices on the [0, 2π] clock.
    pub series: PriceSeries<T>,
    /// Variance path on the simulation grid.
    pub v_path: Vec<T>,
    /// Vol-of-vol path γ²(t) on the simulation grid.
    pub g2_path: Vec<T>,
    /// Trapezoid integral of γ²(t) over the horizon, in horizon units
    /// (e.g. daily integrated vol-of-vol for horizon 1/252).
    pub true_integrated_volvol: T,
    pub seed: u64,
}

/// Derives the independent RNG stream for one path of an experiment.
pub fn path_rng(master_seed: u64, path_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(path_index.wrapping_add(1));
    rng
}

fn trapezoid<T: Real>(values: &[T], dt: T) -> T {
    let mut acc = (values[0] + values[values.len() - 1]) / T::from_f(2.0);
    for &v in &values[1..values.len() - 1] {
        acc += v;
    }
    acc * dt
}

fn radian_grid<T: Real>(n: usize) -> Vec<T> {
    let step = T::two_pi() / T::from_n(n);
    let mut times: Vec<T> = (0..=n).map(|i| T::from_n(i) * step).collect();
    times[n] = T::two_pi();
    times
}

/// Simulates the square-root model on a uniform `n_steps` grid.
pub fn simulate_heston<T: Real>(
    params: &HestonParams<T>,
    n_steps: usize,
    horizon: T,
    seed: u64,
) -> Result<SimPath<T>> {
    simulate_heston_with_rng(params, n_steps, horizon, seed, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Same as [`simulate_heston`] but drawing from a caller-provided stream.
pub fn simulate_heston_with_rng<T: Real, R: Rng + ?Sized>(
    params: &HestonParams<T>,
    n_steps: usize,
    horizon: T,
    seed: u64,
    rng: &mut R,
) -> Result<SimPath<T>> {
    params.validate()?;
    if n_steps < 2 || horizon <= T::zero() {
        return Err(Error::InvalidConfig("need n_steps >= 2 and horizon > 0".into()));
    }
    let dt = horizon / T::from_n(n_steps);
    let sdt = dt.sqrt();
    let rho_c = (T::one() - params.rho * params.rho).sqrt();
    let half = T::from_f(0.5);
    let mut p = Vec::with_capacity(n_steps + 1);
    let mut v = Vec::with_capacity(n_steps + 1);
    p.push(params.p0);
    v.push(params.v0);
    for i in 0..n_steps {
        let z1 = T::standard_normal(rng);
        let z2 = T::standard_normal(rng);
        let zv = params.rho * z1 + rho_c * z2;
        let vp = v[i].max(T::zero());
        let sv = vp.sqrt();
        p.push(p[i] + (params.mu - half * vp) * dt + sv * sdt * z1);
        v.push(v[i] + params.theta * (params.alpha - vp) * dt + params.gamma * sv * sdt * zv);
    }
    let g2: Vec<T> = v
        .iter()
        .map(|&x| params.gamma * params.gamma * x.max(T::zero()))
        .collect();
    let true_ivv = trapezoid(&g2, dt);
    let series = PriceSeries::new(radian_grid(n_steps), p, horizon)?;
    Ok(SimPath {
        series,
        v_path: v.into_iter().map(|x| x.max(T::zero())).collect(),
        g2_path: g2,
        true_integrated_volvol: true_ivv,
        seed,
    })
}

/// Simulates the stochastic vol-of-vol model on a uniform `n_steps` grid.
pub fn simulate_svv<T: Real>(
    params: &SvvParams<T>,
    n_steps: usize,
    horizon: T,
    seed: u64,
) -> Result<SimPath<T>> {
    simulate_svv_with_rng(params, n_steps, horizon, seed, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Same as [`simulate_svv`] but drawing from a caller-provided stream.
pub fn simulate_svv_with_rng<T: Real, R: Rng + ?Sized>(
    params: &SvvParams<T>,
    n_steps: usize,
    horizon: T,
    seed: u64,
    rng: &mut R,
) -> Result<SimPath<T>> {
    params.validate()?;
    if n_steps < 2 || horizon <= T::zero() {
        return Err(Error::InvalidConfig("need n_steps >= 2 and horizon > 0".into()));
    }
    let dt = horizon / T::from_n(n_steps);
    let sdt = dt.sqrt();
    let rho_c = (T::one() - params.rho * params.rho).sqrt();
    let half = T::from_f(0.5);
    let mut p = Vec::with_capacity(n_steps + 1);
    let mut v = Vec::with_capacity(n_steps + 1);
    let mut g2 = Vec::with_capacity(n_steps + 1);
    p.push(params.p0);
    v.push(params.v0);
    g2.push(params.g2_0);
    for i in 0..n_steps {
        let z1 = T::standard_normal(rng);
        let z2 = T::standard_normal(rng);
        let z3 = T::standard_normal(rng);
        let zv = params.rho * z1 + rho_c * z2;
        let vp = v[i].max(T::zero());
        let gp = g2[i].max(T::zero());
        let sg = gp.sqrt();
        p.push(p[i] + (params.mu - half * vp) * dt + vp.sqrt() * sdt * z1);
        v.push(v[i] + params.theta * (params.alpha - vp) * dt + sg * sdt * zv);
        g2.push(g2[i] + params.chi * (params.eta_bar - gp) * dt + params.xi * sg * sdt * z3);
    }
    let g2_trunc: Vec<T> = g2.iter().map(|&x| x.max(T::zero())).collect();
    let true_ivv = trapezoid(&g2_trunc, dt);
    let series = PriceSeries::new(radian_grid(n_steps), p, horizon)?;
    Ok(SimPath {
        series,
        v_path: v.into_iter().map(|x| x.max(T::zero())).collect(),
        g2_path: g2_trunc,
        true_integrated_volvol: true_ivv,
        seed,
    })
}

/// Resamples a finely simulated path at Poisson observation times.
///
/// Durations are exponential with the given mean (in trading seconds of the
/// path's horizon), cumulated and snapped to the previous fine-grid tick, with
/// duplicates dropped. The surviving observations are mapped back onto
/// [0, 2π]; the horizon is trimmed to the covered window.
pub fn poisson_resample<T: Real>(
    path: &SimPath<T>,
    mean_duration_secs: T,
    seed: u64,
) -> Result<PriceSeries<T>> {
    let n_fine = path.series.n_increments();
    let window_secs = path.series.horizon() * T::from_f(SECONDS_PER_YEAR);
    let mesh_secs = window_secs / T::from_n(n_fine);
    if mean_duration_secs <= mesh_secs {
        return Err(Error::InvalidConfig(format!(
            "mean duration {mean_duration_secs} must exceed the simulation mesh {mesh_secs}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep = vec![0usize];
    let mut t_secs = T::zero();
    loop {
        let u: T = T::one() - T::from_f(rng.gen::<f64>());
        t_secs -= mean_duration_secs * u.ln();
        if t_secs > window_secs {
            break;
        }
        let idx = (t_secs / mesh_secs).floor().as_f64() as usize;
        let idx = idx.min(n_fine);
        if idx > *keep.last().unwrap() {
            keep.push(idx);
        }
    }
    if keep.len() < 2 {
        return Err(Error::TooFewObservations { n: keep.len(), min: 2 });
    }
    let last = *keep.last().unwrap();
    let scale = T::two_pi() / T::from_n(last);
    let mut times: Vec<T> = keep.iter().map(|&i| T::from_n(i) * scale).collect();
    times[0] = T::zero();
    let klen = keep.len();
    times[klen - 1] = T::two_pi();
    let log_prices: Vec<T> = keep.iter().map(|&i| path.series.log_prices()[i]).collect();
    let horizon = path.series.horizon() * T::from_n(last) / T::from_n(n_fine);
    PriceSeries::new(times, log_prices, horizon)
}

/// Writes a simulated path as CSV with columns time, log_price, v, g2.
///
/// `time` is in the original horizon units (year fractions from the open).
pub fn write_path_csv<T: Real, W: Write>(path: &SimPath<T>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["time", "log_price", "v", "g2"])?;
    let horizon = path.series.horizon();
    let two_pi = T::two_pi();
    for i in 0..path.series.len() {
        let t = path.series.times()[i] / two_pi * horizon;
        w.write_record(&[
            format!("{:.9e}", t.as_f64()),
            format!("{:.9e}", path.series.log_prices()[i].as_f64()),
            format!("{:.9e}", path.v_path[i].as_f64()),
            format!("{:.9e}", path.g2_path[i].as_f64()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const DAY: f64 = 1.0 / 252.0;

    #[test]
    fn zero_gamma_gives_zero_volvol() {
        let params = HestonParams { gamma: 0.0, ..HestonParams::default() };
        let path = simulate_heston(&params, 500, DAY, 7).unwrap();
        assert!(path.g2_path.iter().all(|&x| x == 0.0));
        assert_eq!(path.true_integrated_volvol, 0.0);
    }

    #[test]
    fn fixed_seed_is_bitwise_reproducible() {
        let p = HestonParams::<f64>::default();
        let a = simulate_heston(&p, 1000, DAY, 42).unwrap();
        let b = simulate_heston(&p, 1000, DAY, 42).unwrap();
        assert_eq!(a.series.log_prices(), b.series.log_prices());
        assert_eq!(a.v_path, b.v_path);
        let s = SvvParams::<f64>::default();
        let c = simulate_svv(&s, 1000, DAY, 42).unwrap();
        let d = simulate_svv(&s, 1000, DAY, 42).unwrap();
        assert_eq!(c.series.log_prices(), d.series.log_prices());
        assert_eq!(c.g2_path, d.g2_path);
    }

    #[test]
    fn paths_state_nonnegative_for_many_seeds() {
        let p = HestonParams::<f64>::default();
        let s = SvvParams::<f64>::default();
        for seed in 0..100 {
            let a = simulate_heston(&p, 400, DAY, seed).unwrap();
            assert!(a.v_path.iter().all(|&x| x >= 0.0));
            assert!(a.g2_path.iter().all(|&x| x >= 0.0));
            assert!(a.true_integrated_volvol >= 0.0);
            let b = simulate_svv(&s, 400, DAY, seed).unwrap();
            assert!(b.v_path.iter().all(|&x| x >= 0.0));
            assert!(b.g2_path.iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn heston_truth_equals_trapezoid_of_v() {
        let p = HestonParams::<f64>::default();
        let path = simulate_heston(&p, 700, DAY, 3).unwrap();
        let dt = DAY / 700.0;
        let manual = {
            let g: Vec<f64> = path.v_path.iter().map(|&v| 0.25 * v).collect();
            let mut acc = (g[0] + g[g.len() - 1]) / 2.0;
            acc += g[1..g.len() - 1].iter().sum::<f64>();
            acc * dt
        };
        assert_relative_eq!(path.true_integrated_volvol, manual, max_relative = 1e-14);
    }

    #[test]
    fn martingale_sanity_with_zero_drift() {
        let params = HestonParams { mu: 0.0, rho: 0.0, ..HestonParams::default() };
        let n_paths = 3000;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for seed in 0..n_paths {
            let path = simulate_heston(&params, 200, DAY, seed).unwrap();
            let r = path.series.log_prices().last().unwrap() - path.series.log_prices()[0];
            sum += r;
            sumsq += r * r;
        }
        let mean = sum / n_paths as f64;
        let sd = ((sumsq / n_paths as f64 - mean * mean) / n_paths as f64).sqrt();
        assert!(mean.abs() < 3.0 * sd, "mean {mean} vs 3se {}", 3.0 * sd);
    }

    #[test]
    fn long_horizon_variance_reverts_to_alpha() {
        let p = HestonParams::<f64>::default();
        let mut mean_v = 0.0;
        let paths = 8;
        for seed in 0..paths {
            let path = simulate_heston(&p, 60_000, 1.0, seed).unwrap();
            mean_v += path.v_path.iter().sum::<f64>() / path.v_path.len() as f64;
        }
        mean_v /= paths as f64;
        assert_relative_eq!(mean_v, p.alpha, max_relative = 0.1);
    }

    #[test]
    fn svv_deterministic_fixed_point() {
        let params = SvvParams { xi: 0.0, g2_0: 0.1, eta_bar: 0.1, ..SvvParams::default() };
        let path = simulate_svv(&params, 300, DAY, 5).unwrap();
        for &g in &path.g2_path {
            assert_relative_eq!(g, 0.1, max_relative = 1e-12);
        }
        assert_relative_eq!(path.true_integrated_volvol, 0.1 * DAY, max_relative = 1e-12);
    }

    #[test]
    fn poisson_resample_counts_and_durations() {
        // fine mesh of 0.125s: expected observations ≈ 23400/δ
        let p = HestonParams::<f64>::default();
        let path = simulate_heston(&p, 23_400 * 8, DAY, 11).unwrap();
        let obs = poisson_resample(&path, 2.0, 99).unwrap();
        let n = obs.n_increments() as f64;
        assert_relative_eq!(n, 11_700.0, max_relative = 0.1);
        let mean_dur = 23_400.0 * (obs.horizon() / DAY) / n;
        assert_relative_eq!(mean_dur, 2.0, max_relative = 0.1);
        // determinism
        let again = poisson_resample(&path, 2.0, 99).unwrap();
        assert_eq!(obs.times(), again.times());
    }

    #[test]
    fn poisson_resample_rejects_too_small_mean() {
        let p = HestonParams::<f64>::default();
        let path = simulate_heston(&p, 1000, DAY, 1).unwrap();
        let mesh_secs = 23_400.0 / 1000.0;
        assert!(poisson_resample(&path, mesh_secs, 4).is_err());
    }

    #[test]
    fn path_csv_has_expected_shape() {
        let p = HestonParams::<f64>::default();
        let path = simulate_heston(&p, 10, DAY, 2).unwrap();
        let mut buf = Vec::new();
        write_path_csv(&path, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "time,log_price,v,g2");
        assert_eq!(lines.len(), 12);
    }
}
