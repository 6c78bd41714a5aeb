//! Small statistical toolbox: normal quantiles, moment statistics and the
//! goodness-of-fit tests used by the harness and the empirics module.

use crate::error::{Error, Result};
use crate::float::Real;
use statrs::distribution::{ContinuousCDF, Normal};

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("standard normal")
}

/// Standard normal CDF.
pub fn normal_cdf<T: Real>(x: T) -> T {
    T::from_f(std_normal().cdf(x.as_f64()))
}

/// Standard normal quantile Φ⁻¹(p), p ∈ (0, 1).
pub fn normal_quantile<T: Real>(p: T) -> Result<T> {
    let pf = p.as_f64();
    if !(0.0..=1.0).contains(&pf) || pf == 0.0 || pf == 1.0 {
        return Err(Error::InvalidConfig(format!(
            "quantile level must lie strictly inside (0,1), got {pf}"
        )));
    }
    Ok(T::from_f(std_normal().inverse_cdf(pf)))
}

/// Sample mean.
pub fn mean<T: Real>(xs: &[T]) -> T {
    xs.iter().copied().sum::<T>() / T::from_n(xs.len())
}

/// Unbiased (n-1) sample variance.
pub fn variance<T: Real>(xs: &[T]) -> T {
    let m = mean(xs);
    let ss: T = xs.iter().map(|&x| (x - m) * (x - m)).sum();
    ss / T::from_n(xs.len() - 1)
}

/// Central moment of order `k`, normalized by n.
fn central_moment<T: Real>(xs: &[T], m: T, k: u32) -> T {
    let s: T = xs.iter().map(|&x| (x - m).powi(k as i32)).sum();
    s / T::from_n(xs.len())
}

/// Moment-based skewness m₃ / m₂^{3/2}; `None` when the sample is degenerate.
pub fn skewness<T: Real>(xs: &[T]) -> Option<T> {
    let m = mean(xs);
    let m2 = central_moment(xs, m, 2);
    if m2 <= T::zero() {
        return None;
    }
    Some(central_moment(xs, m, 3) / m2.powf(T::from_f(1.5)))
}

/// Non-excess kurtosis m₄ / m₂² (normal → 3); `None` when degenerate.
pub fn kurtosis<T: Real>(xs: &[T]) -> Option<T> {
    let m = mean(xs);
    let m2 = central_moment(xs, m, 2);
    if m2 <= T::zero() {
        return None;
    }
    Some(central_moment(xs, m, 4) / (m2 * m2))
}

/// Pearson correlation of two equally long samples.
pub fn pearson<T: Real>(xs: &[T], ys: &[T]) -> Result<T> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch {
            times: xs.len(),
            prices: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::UndersizedSample { n: xs.len(), min: 2 });
    }
    let mx = mean(xs);
    let my = mean(ys);
    let mut sxy = T::zero();
    let mut sxx = T::zero();
    let mut syy = T::zero();
    for (&x, &y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx <= T::zero() || syy <= T::zero() {
        return Err(Error::DegenerateSample("zero variance in correlation".into()));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Result of a goodness-of-fit test.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct GofTest {
    pub statistic: f64,
    pub p_value: f64,
}

/// One-sample Kolmogorov–Smirnov test against the standard normal.
///
/// The p-value uses the asymptotic Kolmogorov distribution with the
/// Stephens finite-sample correction of the argument.
pub fn ks_test_standard_normal<T: Real>(sample: &[T]) -> Result<GofTest> {
    if sample.len() < 8 {
        return Err(Error::UndersizedSample { n: sample.len(), min: 8 });
    }
    let mut z: Vec<f64> = sample.iter().map(|x| x.as_f64()).collect();
    z.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = z.len() as f64;
    let nd = std_normal();
    let mut d = 0.0f64;
    for (i, &x) in z.iter().enumerate() {
        let f = nd.cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    let lambda = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d;
    let mut p = 0.0;
    for j in 1..=100 {
        let jf = j as f64;
        let term = 2.0 * (-1.0f64).powi(j + 1) * (-2.0 * jf * jf * lambda * lambda).exp();
        p += term;
        if term.abs() < 1e-12 {
            break;
        }
    }
    Ok(GofTest {
        statistic: d,
        p_value: p.clamp(0.0, 1.0),
    })
}

fn check_not_constant<T: Real>(sample: &[T]) -> Result<()> {
    if sample.iter().all(|&x| x == sample[0]) {
        return Err(Error::DegenerateSample("constant sample".into()));
    }
    Ok(())
}

/// Jarque–Bera normality test with the asymptotic χ²₂ p-value.
pub fn jarque_bera<T: Real>(sample: &[T]) -> Result<GofTest> {
    if sample.len() < 8 {
        return Err(Error::UndersizedSample { n: sample.len(), min: 8 });
    }
    check_not_constant(sample)?;
    let s = skewness(sample).ok_or_else(|| Error::DegenerateSample("constant sample".into()))?;
    let k = kurtosis(sample).unwrap();
    let n = sample.len() as f64;
    let jb = n / 6.0
        * (s.as_f64().powi(2) + (k.as_f64() - 3.0).powi(2) / 4.0);
    // χ² with 2 degrees of freedom: survival function is exp(-x/2)
    Ok(GofTest {
        statistic: jb,
        p_value: (-jb / 2.0).exp(),
    })
}

/// Anderson–Darling normality test with estimated mean and variance
/// (case 3), using the D'Agostino–Stephens p-value interpolation.
pub fn anderson_darling<T: Real>(sample: &[T]) -> Result<GofTest> {
    let n = sample.len();
    if n < 8 {
        return Err(Error::UndersizedSample { n, min: 8 });
    }
    check_not_constant(sample)?;
    let m = mean(sample).as_f64();
    let sd = variance(sample).as_f64().sqrt();
    if sd <= 0.0 {
        return Err(Error::DegenerateSample("constant sample".into()));
    }
    let mut z: Vec<f64> = sample.iter().map(|x| (x.as_f64() - m) / sd).collect();
    z.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let nd = std_normal();
    let nf = n as f64;
    let mut a2 = 0.0;
    for i in 0..n {
        let fi = nd.cdf(z[i]).clamp(1e-300, 1.0 - 1e-16);
        let fj = nd.cdf(z[n - 1 - i]).clamp(1e-300, 1.0 - 1e-16);
        a2 += (2.0 * i as f64 + 1.0) * (fi.ln() + (1.0 - fj).ln());
    }
    a2 = -nf - a2 / nf;
    let a_star = a2 * (1.0 + 0.75 / nf + 2.25 / (nf * nf));
    let p = if a_star >= 0.6 {
        (1.2937 - 5.709 * a_star + 0.0186 * a_star * a_star).exp()
    } else if a_star > 0.34 {
        (0.9177 - 4.279 * a_star - 1.38 * a_star * a_star).exp()
    } else if a_star > 0.2 {
        1.0 - (-8.318 + 42.796 * a_star - 59.938 * a_star * a_star).exp()
    } else {
        1.0 - (-13.436 + 101.14 * a_star - 223.73 * a_star * a_star).exp()
    };
    Ok(GofTest {
        statistic: a_star,
        p_value: p.clamp(0.0, 1.0),
    })
}
