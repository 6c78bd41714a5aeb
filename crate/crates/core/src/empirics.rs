//! Stylized-fact statistics over daily estimate series: sample moments,
//! autocorrelations with white-noise bands, yearly correlations and
//! log-normality tests.

use crate::error::{Error, Result};
use crate::float::Real;
use crate::stats::{self, GofTest};
use chrono::{Datelike, NaiveDate};
use std::collections::BTreeMap;
use std::io::{Read, Write};

/// A dated daily series (volatility, vol-of-vol, returns, ...).
#[derive(Debug, Clone)]
pub struct DailySeries<T> {
    dates: Vec<NaiveDate>,
    values: Vec<T>,
    label: String,
}

impl<T: Real> DailySeries<T> {
    pub fn new(dates: Vec<NaiveDate>, values: Vec<T>, label: impl Into<String>) -> Result<Self> {
        if dates.len() != values.len() {
            return Err(Error::LengthMismatch {
                times: dates.len(),
                prices: values.len(),
            });
        }
        for i in 1..dates.len() {
            if dates[i] <= dates[i - 1] {
                return Err(Error::NonMonotoneTimes { index: i });
            }
        }
        Ok(Self {
            dates,
            values,
            label: label.into(),
        })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Reads a two-column CSV with header `date,value` (ISO dates).
    pub fn from_csv<R: Read>(reader: R, label: impl Into<String>) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(reader);
        let mut dates = Vec::new();
        let mut values = Vec::new();
        for rec in rd.records() {
            let rec = rec?;
            let date = rec
                .get(0)
                .and_then(|s| NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d").ok())
                .ok_or_else(|| Error::InvalidConfig(format!("bad date in row {rec:?}")))?;
            let value: f64 = rec
                .get(1)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::InvalidConfig(format!("bad value in row {rec:?}")))?;
            dates.push(date);
            values.push(T::from_f(value));
        }
        Self::new(dates, values, label)
    }

    /// Writes the series as `date,value` CSV.
    pub fn to_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["date", "value"])?;
        for (d, v) in self.dates.iter().zip(&self.values) {
            w.write_record(&[d.format("%Y-%m-%d").to_string(), format!("{:.9e}", v.as_f64())])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Standard sample moments; skewness/kurtosis are `None` for degenerate input.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct SampleStats<T> {
    pub mean: T,
    pub median: T,
    pub std: T,
    pub min: T,
    pub max: T,
    pub skewness: Option<T>,
    /// Non-excess convention: a normal sample has kurtosis near 3.
    pub kurtosis: Option<T>,
}

/// Sample statistics of the daily values.
pub fn sample_stats<T: Real>(series: &DailySeries<T>) -> Result<SampleStats<T>> {
    let xs = series.values();
    if xs.len() < 2 {
        return Err(Error::UndersizedSample { n: xs.len(), min: 2 });
    }
    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / T::from_f(2.0)
    };
    Ok(SampleStats {
        mean: stats::mean(xs),
        median,
        std: stats::variance(xs).sqrt(),
        min: sorted[0],
        max: sorted[n - 1],
        skewness: stats::skewness(xs),
        kurtosis: stats::kurtosis(xs),
    })
}

/// One autocorrelation row with the ±1.96/√n white-noise band.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct AcfRow<T> {
    pub lag: usize,
    pub autocorrelation: T,
    pub band: T,
}

/// Sample autocorrelation function up to `max_lag` (< n/4).
pub fn acf<T: Real>(series: &DailySeries<T>, max_lag: usize) -> Result<Vec<AcfRow<T>>> {
    let xs = series.values();
    let n = xs.len();
    if max_lag >= n / 4 {
        return Err(Error::InvalidConfig(format!(
            "max_lag must be below n/4 = {}, got {max_lag}",
            n / 4
        )));
    }
    let m = stats::mean(xs);
    let denom: T = xs.iter().map(|&x| (x - m) * (x - m)).sum();
    if denom <= T::zero() {
        return Err(Error::DegenerateSample("constant series has no ACF".into()));
    }
    let band = T::from_f(1.959963984540054) / T::from_n(n).sqrt();
    let mut rows = Vec::with_capacity(max_lag + 1);
    for lag in 0..=max_lag {
        let mut num = T::zero();
        for t in 0..n - lag {
            num += (xs[t] - m) * (xs[t + lag] - m);
        }
        rows.push(AcfRow {
            lag,
            autocorrelation: num / denom,
            band,
        });
    }
    Ok(rows)
}

/// Per-year correlation row; `None` entries mean the year was under-sized and
/// excluded from the averages.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct YearCorrelations<T> {
    pub year: i32,
    pub n_days: usize,
    pub volvol_vol: Option<T>,
    pub vol_ret: Option<T>,
    pub volvol_ret: Option<T>,
}

/// Yearly correlation table plus whole-sample averages over reported years.
#[derive(Debug, Clone, serde::Serialize)]
pub struct YearlyCorrelations<T> {
    pub rows: Vec<YearCorrelations<T>>,
    pub avg_volvol_vol: Option<T>,
    pub avg_vol_ret: Option<T>,
    pub avg_volvol_ret: Option<T>,
}

/// Year-by-year Pearson correlations of daily vol-of-vol with volatility and
/// returns, aligned on common dates; years with fewer than 30 common days are
/// flagged and excluded from the averages.
pub fn yearly_correlations<T: Real>(
    volvol: &DailySeries<T>,
    vol: &DailySeries<T>,
    returns: &DailySeries<T>,
) -> Result<YearlyCorrelations<T>> {
    let mut by_date: BTreeMap<NaiveDate, (Option<T>, Option<T>, Option<T>)> = BTreeMap::new();
    for (d, &v) in volvol.dates().iter().zip(volvol.values()) {
        by_date.entry(*d).or_default().0 = Some(v);
    }
    for (d, &v) in vol.dates().iter().zip(vol.values()) {
        by_date.entry(*d).or_default().1 = Some(v);
    }
    for (d, &v) in returns.dates().iter().zip(returns.values()) {
        by_date.entry(*d).or_default().2 = Some(v);
    }
    let mut per_year: BTreeMap<i32, (Vec<T>, Vec<T>, Vec<T>)> = BTreeMap::new();
    for (d, (a, b, c)) in by_date {
        if let (Some(a), Some(b), Some(c)) = (a, b, c) {
            let e = per_year.entry(d.year()).or_default();
            e.0.push(a);
            e.1.push(b);
            e.2.push(c);
        }
    }
    if per_year.is_empty() {
        return Err(Error::DegenerateSample("no common dates across the three series".into()));
    }
    let mut rows = Vec::new();
    let mut acc: [Vec<T>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    for (year, (vv, vl, rt)) in per_year {
        let n_days = vv.len();
        if n_days < 30 {
            rows.push(YearCorrelations {
                year,
                n_days,
                volvol_vol: None,
                vol_ret: None,
                volvol_ret: None,
            });
            continue;
        }
        let c1 = stats::pearson(&vv, &vl).ok();
        let c2 = stats::pearson(&vl, &rt).ok();
        let c3 = stats::pearson(&vv, &rt).ok();
        if let Some(x) = c1 {
            acc[0].push(x);
        }
        if let Some(x) = c2 {
            acc[1].push(x);
        }
        if let Some(x) = c3 {
            acc[2].push(x);
        }
        rows.push(YearCorrelations {
            year,
            n_days,
            volvol_vol: c1,
            vol_ret: c2,
            volvol_ret: c3,
        });
    }
    let avg = |v: &Vec<T>| (!v.is_empty()).then(|| stats::mean(v));
    Ok(YearlyCorrelations {
        rows,
        avg_volvol_vol: avg(&acc[0]),
        avg_vol_ret: avg(&acc[1]),
        avg_volvol_ret: avg(&acc[2]),
    })
}

/// Per-year normality tests of the log-values.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct YearNormalityTest {
    pub year: i32,
    pub n_days: usize,
    pub jarque_bera: GofTest,
    pub anderson_darling: GofTest,
    pub reject_jb_5pct: bool,
    pub reject_ad_5pct: bool,
}

/// Jarque–Bera and Anderson–Darling tests on log-values, per calendar year
/// (years with fewer than 30 observations are skipped).
pub fn lognormality_tests<T: Real>(series: &DailySeries<T>) -> Result<Vec<YearNormalityTest>> {
    let mut offending: Vec<String> = Vec::new();
    for (d, &v) in series.dates().iter().zip(series.values()) {
        if v <= T::zero() {
            offending.push(d.format("%Y-%m-%d").to_string());
        }
    }
    if !offending.is_empty() {
        return Err(Error::NonPositiveValue {
            context: offending.join(", "),
        });
    }
    let mut per_year: BTreeMap<i32, Vec<T>> = BTreeMap::new();
    for (d, &v) in series.dates().iter().zip(series.values()) {
        per_year.entry(d.year()).or_default().push(v.ln());
    }
    let mut out = Vec::new();
    for (year, logs) in per_year {
        if logs.len() < 30 {
            continue;
        }
        let jb = stats::jarque_bera(&logs)?;
        let ad = stats::anderson_darling(&logs)?;
        out.push(YearNormalityTest {
            year,
            n_days: logs.len(),
            jarque_bera: jb,
            anderson_darling: ad,
            reject_jb_5pct: jb.p_value < 0.05,
            reject_ad_5pct: ad.p_value < 0.05,
        });
    }
    if out.is_empty() {
        return Err(Error::UndersizedSample {
            n: series.len(),
            min: 30,
        });
    }
    Ok(out)
}
