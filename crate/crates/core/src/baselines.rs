//! Realized vol-of-vol estimators built on pre-estimated spot variance,
//! used as the comparison baselines.
//!
//! Both estimators live on a regular grid t_i = i·T/n (horizon units) and use
//! the local window estimator σ̂²(t_i) = (1/(κρ)) Σ_{m=0}^{κ-1} δ_{i+m-1}²
//! where δ_j = p(t_{j+1}) - p(t_j) and ρ = T/n.
//!
//! Index translation: the sums below run over 1-based anchors i = 1..n-2κ+1;
//! with 0-based increments this means spot[j] (j = 0..n-κ) holds σ̂²(t_{j+1}),
//! built from δ_j..δ_{j+κ-1}. Worked n = 12, κ = 3 example: spot has 10
//! entries; the difference sum pairs spot[j+3] with spot[j] for j = 0..6
//! (seven terms, matching i = 1..n-2κ+1 = 7).

use crate::error::{Error, Result};
use crate::float::Real;
use crate::series::PriceSeries;

/// Local pre-estimates of spot variance and spot quarticity on the grid.
#[derive(Debug, Clone)]
pub struct SpotGridEstimates<T> {
    /// Window length κ.
    pub kappa: usize,
    /// σ̂²(t_i) for anchors i = 1..n-κ+1 (horizon-clock units).
    pub spot_var: Vec<T>,
    /// σ̂⁴(t_i) local quarticity on the same anchors.
    pub spot_quart: Vec<T>,
}

/// Window length κ(n) = ⌈β ρ(n)^{-1/2}⌉ (horizon-clock mesh), at least 2.
pub fn kappa_for<T: Real>(beta: T, n: usize, horizon: T) -> usize {
    let rho = horizon / T::from_n(n);
    ((beta / rho.sqrt()).ceil().as_f64() as usize).max(2)
}

fn check_regular<T: Real>(series: &PriceSeries<T>) -> Result<()> {
    let mean = series.mean_mesh();
    let mut worst = T::zero();
    for w in series.times().windows(2) {
        let dev = ((w[1] - w[0]) - mean).abs() / mean;
        if dev > worst {
            worst = dev;
        }
    }
    if worst > T::from_f(1e-9) {
        return Err(Error::IrregularGrid {
            max_rel_dev: worst.as_f64(),
        });
    }
    Ok(())
}

/// Local-window pre-estimation of spot variance and quarticity.
pub fn spot_variance<T: Real>(series: &PriceSeries<T>, kappa: usize) -> Result<SpotGridEstimates<T>> {
    let n = series.n_increments();
    if kappa < 1 || kappa > n / 4 {
        return Err(Error::InvalidConfig(format!(
            "kappa must lie in [1, n/4] = [1, {}], got {kappa}",
            n / 4
        )));
    }
    check_regular(series)?;
    let rho = series.horizon() / T::from_n(n);
    let incs = series.increments();
    let kf = T::from_n(kappa);
    let var_norm = T::one() / (kf * rho);
    let quart_norm = T::one() / (T::from_f(3.0) * kf * rho * rho);
    let mut spot_var = Vec::with_capacity(n - kappa + 1);
    let mut spot_quart = Vec::with_capacity(n - kappa + 1);
    for j in 0..=(n - kappa) {
        let mut s2 = T::zero();
        let mut s4 = T::zero();
        for m in 0..kappa {
            let d = incs[j + m];
            s2 += d * d;
            s4 += d * d * d * d;
        }
        spot_var.push(var_norm * s2);
        spot_quart.push(quart_norm * s4);
    }
    Ok(SpotGridEstimates {
        kappa,
        spot_var,
        spot_quart,
    })
}

fn difference_sum<T: Real>(spot: &SpotGridEstimates<T>, debias: &[T], n: usize) -> Result<T> {
    let kappa = spot.kappa;
    if n <= 2 * kappa {
        return Err(Error::TooFewObservations { n, min: 2 * kappa + 1 });
    }
    let kf = T::from_n(kappa);
    let mut acc = T::zero();
    // anchors i = 1..n-2κ+1 map to j = 0..n-2κ
    for j in 0..=(n - 2 * kappa) {
        let d = spot.spot_var[j + kappa] - spot.spot_var[j];
        acc += d * d - T::from_f(4.0) / kf * debias[j];
    }
    Ok(T::from_f(1.5) / kf * acc)
}

/// Realized vol-of-vol estimator with the squared-spot-variance debias term.
pub fn asj_estimator<T: Real>(series: &PriceSeries<T>, beta: T) -> Result<T> {
    if beta <= T::zero() {
        return Err(Error::InvalidConfig("beta must be positive".into()));
    }
    let n = series.n_increments();
    let kappa = kappa_for(beta, n, series.horizon());
    let spot = spot_variance(series, kappa)?;
    let debias: Vec<T> = spot.spot_var.iter().map(|&v| v * v).collect();
    difference_sum(&spot, &debias, n)
}

/// Variant replacing the debias term with the local quarticity estimate.
pub fn vetter_estimator<T: Real>(series: &PriceSeries<T>, beta: T) -> Result<T> {
    if beta <= T::zero() {
        return Err(Error::InvalidConfig("beta must be positive".into()));
    }
    let n = series.n_increments();
    let kappa = kappa_for(beta, n, series.horizon());
    let spot = spot_variance(series, kappa)?;
    let debias = spot.spot_quart.clone();
    difference_sum(&spot, &debias, n)
}
