//! Monte Carlo experiment harness: simulates paths, applies the requested
//! estimators, and aggregates bias/MSE/coverage deterministically.
//!
//! Unit conventions. Fourier estimates live on the [0, 2π] clock internally;
//! for reporting, the harness rescales them (and the matching true values) by
//! the window normalization `horizon/2π` applied to horizon-unit integrals —
//! the scale on which the target bias/MSE figures for these estimators are
//! stated. Realized baselines are reported in plain horizon units. The
//! per-path records carry the reporting-scale values; `unit_note` in the
//! aggregate names the convention.

use crate::error::{Error, Result};
use crate::estimators::{
    eta, quarticity, resolve_bias_constant, volvol_debiased, volvol_raw, DebiasMode,
    EstimatorConfig,
};
use crate::float::Real;
use crate::fourier::{coeffs_dp, coeffs_v, CoeffArray};
use crate::baselines::{asj_estimator, vetter_estimator};
use crate::series::PriceSeries;
use crate::simulate::{
    path_rng, poisson_resample, simulate_heston_with_rng, simulate_svv_with_rng, HestonParams,
    SimPath, SvvParams, SECONDS_PER_YEAR,
};
use crate::stats::normal_quantile;
use crate::tuning::{fejer_cutoff, nyquist_n, variance_cutoff};
use rayon::prelude::*;
use std::io::Write;
use std::time::Instant;

const Z95: f64 = 1.959963984540054;

/// Data-generating process of an experiment.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub enum ModelSpec<T> {
    Heston(HestonParams<T>),
    Svv(SvvParams<T>),
}

/// Observation scheme.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub enum Sampling<T> {
    /// Equally spaced observations with the given mesh in trading seconds.
    Regular { mesh_seconds: T },
    /// Exponential durations with the given mean, snapped to a fine
    /// simulation grid of mesh `fine_mesh_seconds`.
    Poisson {
        mean_duration_seconds: T,
        fine_mesh_seconds: T,
    },
}

/// Estimators an experiment can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    FourierRaw,
    FourierDebiased,
    Asj,
    Vetter,
}

impl EstimatorKind {
    pub fn name(&self) -> &'static str {
        match self {
            EstimatorKind::FourierRaw => "fourier_raw",
            EstimatorKind::FourierDebiased => "fourier_debiased",
            EstimatorKind::Asj => "asj",
            EstimatorKind::Vetter => "vetter",
        }
    }
}

/// Frequency/tuning choices for an experiment.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct TuningSpec<T> {
    /// Fejér constant on the horizon clock (M = ⌊c_M (T/n)^{-1/2}⌋).
    pub c_m: T,
    /// Debias constant policy.
    pub debias: DebiasMode,
    /// Hard override of M (used e.g. for the halved-M rule under Poisson
    /// sampling).
    pub m_override: Option<usize>,
    /// Hard override of L.
    pub l_override: Option<usize>,
    /// Window constant for the realized baselines.
    pub beta: T,
}

impl<T: Real> Default for TuningSpec<T> {
    fn default() -> Self {
        Self {
            c_m: T::from_f(0.05),
            debias: DebiasMode::FiniteSample,
            m_override: None,
            l_override: None,
            beta: T::from_f(0.04),
        }
    }
}

/// Full description of one Monte Carlo experiment.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ExperimentSpec<T> {
    pub model: ModelSpec<T>,
    pub n_paths: usize,
    pub sampling: Sampling<T>,
    pub estimators: Vec<EstimatorKind>,
    pub tuning: TuningSpec<T>,
    /// Horizon in year fractions (one trading day = 1/252).
    pub horizon: T,
    pub master_seed: u64,
}

impl<T: Real> ExperimentSpec<T> {
    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(Error::InvalidConfig("n_paths must be at least 1".into()));
        }
        if self.horizon <= T::zero() {
            return Err(Error::InvalidConfig("horizon must be positive".into()));
        }
        if self.estimators.is_empty() {
            return Err(Error::InvalidConfig("at least one estimator required".into()));
        }
        match self.sampling {
            Sampling::Regular { mesh_seconds } => {
                if mesh_seconds <= T::zero() {
                    return Err(Error::InvalidConfig("mesh must be positive".into()));
                }
            }
            Sampling::Poisson {
                mean_duration_seconds,
                fine_mesh_seconds,
            } => {
                if fine_mesh_seconds <= T::zero() || mean_duration_seconds <= fine_mesh_seconds {
                    return Err(Error::InvalidConfig(
                        "require mean duration > fine mesh > 0".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    fn window_seconds(&self) -> T {
        self.horizon * T::from_f(SECONDS_PER_YEAR)
    }
}

/// One simulated path's outcomes, on each estimator's reporting scale.
#[derive(Debug, Clone, serde::Serialize)]
pub struct PathRecord<T> {
    pub path_index: usize,
    /// True integrated vol-of-vol in horizon units.
    pub true_daily: T,
    /// Point estimates aligned with the spec's estimator list; `None` = failed.
    pub estimates: Vec<Option<T>>,
    /// Failure reasons aligned with the estimator list.
    pub failures: Vec<Option<String>>,
    /// Feasible standard error of the debiased Fourier estimator
    /// (reporting scale), when computed and usable.
    pub std_error: Option<T>,
    /// Standardized error (true-path asymptotic variance), debiased Fourier.
    pub z_unfeasible: Option<T>,
    /// Whether the feasible 95% interval covered the truth.
    pub covered95: Option<bool>,
    /// Whether the debiased point estimate was negative.
    pub negative: Option<bool>,
}

/// Per-estimator aggregate statistics.
#[derive(Debug, Clone, serde::Serialize)]
pub struct KindAggregate<T> {
    pub estimator: String,
    pub unit_note: String,
    pub n_ok: usize,
    pub n_failed: usize,
    pub bias: T,
    pub mse: T,
    /// Sample variance of the errors (MSE − bias² up to rounding).
    pub variance: T,
    /// Share of negative point estimates (debiased Fourier only).
    pub negative_rate: Option<T>,
    /// Empirical coverage of the feasible 95% interval (debiased Fourier only).
    pub coverage95: Option<T>,
}

/// Everything an experiment produces.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ExperimentResult<T> {
    pub spec: ExperimentSpec<T>,
    pub records: Vec<PathRecord<T>>,
    pub aggregates: Vec<KindAggregate<T>>,
    /// Standardized errors of the debiased Fourier estimator.
    pub standardized_errors: Vec<T>,
    pub wall_seconds: f64,
    pub version: String,
}

struct FourierOutcome<T> {
    raw_scaled: T,
    debiased_scaled: T,
    std_error_scaled: Option<T>,
    z_unfeasible: Option<T>,
    covered95: Option<bool>,
    negative: bool,
}

/// Unfeasible asymptotic variance Λ computed from the simulated paths
/// (radian-clock units).
fn unfeasible_lambda<T: Real>(path: &SimPath<T>, config: &EstimatorConfig<T>) -> Result<T> {
    let s = path.series.horizon() / T::two_pi();
    let e = eta(config.c_n / T::PI())?;
    let one_2eta = T::one() + T::from_f(2.0) * e;
    let k_cm = T::from_f(4.0 / 3.0) / config.c_m;
    let k_tilde = T::from_f(16.0 / 15.0) * config.c_m * one_2eta;
    let k_cmcn = T::from_f(16.0 / 105.0) * config.c_m.powi(3) * one_2eta * one_2eta;
    let s3 = s * s * s;
    let mut acc = T::zero();
    for (&v, &g2) in path.v_path.iter().zip(&path.g2_path) {
        let vt = v * s;
        let g2t = g2 * s3;
        let s4 = vt * vt;
        acc += k_cm * g2t * g2t + k_tilde * g2t * s4 + k_cmcn * s4 * s4;
    }
    Ok(acc / T::from_n(path.v_path.len()))
}

fn fourier_pipeline<T: Real>(
    path: &SimPath<T>,
    observed: &PriceSeries<T>,
    tuning: &TuningSpec<T>,
    true_daily: T,
) -> Result<(FourierOutcome<T>, EstimatorConfig<T>, CoeffArray<T>)> {
    let n = observed.n_increments();
    let cutoff_n = nyquist_n(n);
    let cutoff_m = tuning
        .m_override
        .unwrap_or_else(|| fejer_cutoff(tuning.c_m, n, observed.horizon(), cutoff_n));
    let cutoff_l = tuning.l_override.unwrap_or_else(|| variance_cutoff(n, cutoff_m));
    let bias_k = resolve_bias_constant(observed, cutoff_n, cutoff_m, tuning.debias)?;
    let config = EstimatorConfig::new(n, cutoff_n, cutoff_m, cutoff_l, observed.mean_mesh(), bias_k)?;

    let dp = coeffs_dp(observed, cutoff_n + config.k_range());
    let vcoeffs = coeffs_v(&dp, cutoff_n, config.k_range())?;
    let estimate = volvol_debiased(&vcoeffs, &config)?;
    let raw = volvol_raw(&vcoeffs, cutoff_m)?;

    // reporting scale: horizon-unit integrals × horizon/(2π), i.e. the
    // radian-clock integrated value divided by (horizon/2π)
    let s = observed.horizon() / T::two_pi();
    let to_scaled = |integrated_radian: T| integrated_radian / s;
    let true_scaled = true_daily * (path.series.horizon() / T::two_pi());
    let est_scaled = to_scaled(estimate.integrated_volvol);

    let se_scaled = estimate
        .variance_ok
        .then(|| to_scaled(T::two_pi() * estimate.std_error));
    let covered = se_scaled.map(|se| (est_scaled - true_scaled).abs() <= T::from_f(Z95) * se);

    let lam_true = unfeasible_lambda(path, &config)?;
    let z = if lam_true > T::zero() {
        let se_true = to_scaled(T::two_pi() * config.rho.powf(T::from_f(0.25)) * lam_true.sqrt());
        Some((est_scaled - true_scaled) / se_true)
    } else {
        None
    };

    Ok((
        FourierOutcome {
            raw_scaled: to_scaled(T::two_pi() * raw),
            debiased_scaled: est_scaled,
            std_error_scaled: se_scaled,
            z_unfeasible: z,
            covered95: covered,
            negative: estimate.negative_flag,
        },
        config,
        vcoeffs,
    ))
}

fn simulate_for<T: Real>(
    spec: &ExperimentSpec<T>,
    path_index: usize,
) -> Result<(SimPath<T>, PriceSeries<T>)> {
    let window = spec.window_seconds();
    let mut rng = path_rng(spec.master_seed, path_index as u64);
    let (n_steps, resample) = match spec.sampling {
        Sampling::Regular { mesh_seconds } => {
            let n = (window / mesh_seconds).round().as_f64() as usize;
            (n.max(2), None)
        }
        Sampling::Poisson {
            mean_duration_seconds,
            fine_mesh_seconds,
        } => {
            let n = (window / fine_mesh_seconds).round().as_f64() as usize;
            (n.max(2), Some(mean_duration_seconds))
        }
    };
    let path = match spec.model {
        ModelSpec::Heston(p) => {
            simulate_heston_with_rng(&p, n_steps, spec.horizon, spec.master_seed, &mut rng)?
        }
        ModelSpec::Svv(p) => {
            simulate_svv_with_rng(&p, n_steps, spec.horizon, spec.master_seed, &mut rng)?
        }
    };
    let observed = match resample {
        None => path.series.clone(),
        Some(mean_dur) => {
            let seed = spec
                .master_seed
                .rotate_left(17)
                .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(path_index as u64 + 1));
            poisson_resample(&path, mean_dur, seed)?
        }
    };
    Ok((path, observed))
}

fn run_path<T: Real>(spec: &ExperimentSpec<T>, path_index: usize) -> PathRecord<T> {
    let n_kinds = spec.estimators.len();
    let mut record = PathRecord {
        path_index,
        true_daily: T::zero(),
        estimates: vec![None; n_kinds],
        failures: vec![None; n_kinds],
        std_error: None,
        z_unfeasible: None,
        covered95: None,
        negative: None,
    };
    let (path, observed) = match simulate_for(spec, path_index) {
        Ok(x) => x,
        Err(e) => {
            let msg = e.to_string();
            for f in record.failures.iter_mut() {
                *f = Some(msg.clone());
            }
            return record;
        }
    };
    record.true_daily = path.true_integrated_volvol;

    let needs_fourier = spec
        .estimators
        .iter()
        .any(|k| matches!(k, EstimatorKind::FourierRaw | EstimatorKind::FourierDebiased));
    let fourier = if needs_fourier {
        Some(fourier_pipeline(&path, &observed, &spec.tuning, path.true_integrated_volvol))
    } else {
        None
    };

    for (slot, kind) in spec.estimators.iter().enumerate() {
        match kind {
            EstimatorKind::FourierRaw | EstimatorKind::FourierDebiased => match &fourier {
                Some(Ok((out, _, _))) => {
                    record.estimates[slot] = Some(match kind {
                        EstimatorKind::FourierRaw => out.raw_scaled,
                        _ => out.debiased_scaled,
                    });
                    if matches!(kind, EstimatorKind::FourierDebiased) {
                        record.std_error = out.std_error_scaled;
                        record.z_unfeasible = out.z_unfeasible;
                        record.covered95 = out.covered95;
                        record.negative = Some(out.negative);
                    }
                }
                Some(Err(e)) => record.failures[slot] = Some(e.to_string()),
                None => unreachable!(),
            },
            EstimatorKind::Asj | EstimatorKind::Vetter => {
                if !observed.is_regular(T::from_f(1e-9)) {
                    record.failures[slot] =
                        Some("realized baselines require a regular grid".into());
                    continue;
                }
                let r = match kind {
                    EstimatorKind::Asj => asj_estimator(&observed, spec.tuning.beta),
                    _ => vetter_estimator(&observed, spec.tuning.beta),
                };
                match r {
                    Ok(v) => record.estimates[slot] = Some(v),
                    Err(e) => record.failures[slot] = Some(e.to_string()),
                }
            }
        }
    }
    record
}

/// True value on the reporting scale of an estimator kind.
fn true_for_kind<T: Real>(kind: EstimatorKind, true_daily: T, horizon: T) -> T {
    match kind {
        EstimatorKind::FourierRaw | EstimatorKind::FourierDebiased => {
            true_daily * (horizon / T::two_pi())
        }
        _ => true_daily,
    }
}

fn unit_note(kind: EstimatorKind) -> &'static str {
    match kind {
        EstimatorKind::FourierRaw | EstimatorKind::FourierDebiased => {
            "window-normalized integral: horizon units x horizon/(2pi)"
        }
        _ => "horizon units",
    }
}

/// Runs the experiment. Deterministic for a fixed spec and master seed,
/// independently of the worker count: paths are keyed by index and the
/// reduction is performed in index order.
pub fn run_experiment<T: Real>(spec: &ExperimentSpec<T>) -> Result<ExperimentResult<T>> {
    spec.validate()?;
    let started = Instant::now();
    let records: Vec<PathRecord<T>> = (0..spec.n_paths)
        .into_par_iter()
        .map(|i| run_path(spec, i))
        .collect();

    let mut aggregates = Vec::with_capacity(spec.estimators.len());
    for (slot, kind) in spec.estimators.iter().enumerate() {
        let mut errs: Vec<T> = Vec::with_capacity(records.len());
        let mut n_failed = 0usize;
        let mut negatives = 0usize;
        let mut covered = 0usize;
        let mut coverage_n = 0usize;
        for r in &records {
            match r.estimates[slot] {
                Some(est) => {
                    let truth = true_for_kind(*kind, r.true_daily, spec.horizon);
                    errs.push(est - truth);
                    if matches!(kind, EstimatorKind::FourierDebiased) {
                        if r.negative == Some(true) {
                            negatives += 1;
                        }
                        if let Some(c) = r.covered95 {
                            coverage_n += 1;
                            if c {
                                covered += 1;
                            }
                        }
                    }
                }
                None => n_failed += 1,
            }
        }
        let n_ok = errs.len();
        let (bias, mse, variance) = if n_ok == 0 {
            (T::zero(), T::zero(), T::zero())
        } else {
            let nf = T::from_n(n_ok);
            let bias = errs.iter().copied().sum::<T>() / nf;
            let mse = errs.iter().map(|&e| e * e).sum::<T>() / nf;
            let var = errs.iter().map(|&e| (e - bias) * (e - bias)).sum::<T>() / nf;
            (bias, mse, var)
        };
        let is_debiased = matches!(kind, EstimatorKind::FourierDebiased);
        aggregates.push(KindAggregate {
            estimator: kind.name().to_string(),
            unit_note: unit_note(*kind).to_string(),
            n_ok,
            n_failed,
            bias,
            mse,
            variance,
            negative_rate: (is_debiased && n_ok > 0)
                .then(|| T::from_n(negatives) / T::from_n(n_ok)),
            coverage95: (is_debiased && coverage_n > 0)
                .then(|| T::from_n(covered) / T::from_n(coverage_n)),
        });
    }

    let standardized_errors: Vec<T> = records.iter().filter_map(|r| r.z_unfeasible).collect();

    Ok(ExperimentResult {
        spec: spec.clone(),
        records,
        aggregates,
        standardized_errors,
        wall_seconds: started.elapsed().as_secs_f64(),
        version: env!("CARGO_PKG_VERSION").to_string(),
    })
}

/// One row of the c_M sensitivity table.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SensitivityRow<T> {
    pub c_m: T,
    pub mesh_seconds: T,
    pub cutoff_m: usize,
    pub mse: T,
    pub bias: T,
}

/// Sweeps c_M over a grid with common random numbers across the grid.
///
/// The debias constant is calibrated once at the spec's reference c_M and
/// held fixed across the sweep, so the curve isolates the effect of moving
/// the truncation frequency away from the configured operating point.
pub fn sensitivity_c_m<T: Real>(
    spec: &ExperimentSpec<T>,
    grid: &[T],
) -> Result<Vec<SensitivityRow<T>>> {
    spec.validate()?;
    if grid.is_empty() {
        return Err(Error::InvalidConfig("empty c_M grid".into()));
    }
    let mesh_seconds = match spec.sampling {
        Sampling::Regular { mesh_seconds } => mesh_seconds,
        Sampling::Poisson { .. } => {
            return Err(Error::InvalidConfig(
                "sensitivity sweep expects regular sampling".into(),
            ))
        }
    };

    struct PerPath<T> {
        sums: Vec<(T, T)>, // per grid entry: (sum err, sum err²) contributions
    }

    let per_path: Vec<Result<PerPath<T>>> = (0..spec.n_paths)
        .into_par_iter()
        .map(|i| -> Result<PerPath<T>> {
            let (path, observed) = simulate_for(spec, i)?;
            let n = observed.n_increments();
            let cutoff_n = nyquist_n(n);
            let horizon = observed.horizon();
            let m_ref = fejer_cutoff(spec.tuning.c_m, n, horizon, cutoff_n);
            let k_ref = resolve_bias_constant(&observed, cutoff_n, m_ref, spec.tuning.debias)?;
            let ms: Vec<usize> = grid
                .iter()
                .map(|&c| fejer_cutoff(c, n, horizon, cutoff_n))
                .collect();
            let m_max = *ms.iter().max().unwrap();
            let l_max = variance_cutoff(n, m_max);
            let dp = coeffs_dp(&observed, cutoff_n + m_max + l_max);
            let vcoeffs = coeffs_v(&dp, cutoff_n, m_max + l_max)?;
            let s = observed.horizon() / T::two_pi();
            let truth = path.true_integrated_volvol * (path.series.horizon() / T::two_pi());
            let mut sums = Vec::with_capacity(grid.len());
            for &m in &ms {
                let raw = volvol_raw(&vcoeffs, m)?;
                let q4 = quarticity(&vcoeffs, m)?;
                let est = T::two_pi() * (raw - k_ref * q4) / s;
                let err = est - truth;
                sums.push((err, err * err));
            }
            Ok(PerPath { sums })
        })
        .collect();

    let mut err_sum = vec![T::zero(); grid.len()];
    let mut sq_sum = vec![T::zero(); grid.len()];
    let mut n_ok = 0usize;
    for p in per_path {
        let p = p?;
        for (j, &(e, e2)) in p.sums.iter().enumerate() {
            err_sum[j] += e;
            sq_sum[j] += e2;
        }
        n_ok += 1;
    }
    let nf = T::from_n(n_ok.max(1));
    let n = (spec.window_seconds() / mesh_seconds).round().as_f64() as usize;
    let cutoff_n = nyquist_n(n);
    Ok(grid
        .iter()
        .enumerate()
        .map(|(j, &c)| SensitivityRow {
            c_m: c,
            mesh_seconds,
            cutoff_m: fejer_cutoff(c, n, spec.horizon, cutoff_n),
            mse: sq_sum[j] / nf,
            bias: err_sum[j] / nf,
        })
        .collect())
}

/// Pairs sorted standardized errors with standard-normal quantiles at the
/// plotting positions (i − 0.5)/n.
pub fn qq_data<T: Real>(standardized_errors: &[T]) -> Result<Vec<(T, T)>> {
    let n = standardized_errors.len();
    if n < 100 {
        return Err(Error::UndersizedSample { n, min: 100 });
    }
    let mut sorted: Vec<T> = standardized_errors.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if sorted[0] == sorted[n - 1] {
        return Err(Error::DegenerateSample("constant standardized errors".into()));
    }
    let nf = T::from_n(n);
    sorted
        .into_iter()
        .enumerate()
        .map(|(i, e)| {
            let p = (T::from_n(i) + T::from_f(0.5)) / nf;
            Ok((normal_quantile(p)?, e))
        })
        .collect()
}

/// Writes per-path records as CSV.
pub fn write_experiment_csv<T: Real, W: Write>(
    result: &ExperimentResult<T>,
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["path_index".to_string(), "true_daily".to_string()];
    for k in &result.spec.estimators {
        header.push(format!("est_{}", k.name()));
        header.push(format!("err_{}", k.name()));
    }
    header.extend(
        ["std_error", "z_unfeasible", "covered95", "negative", "failures"]
            .iter()
            .map(|s| s.to_string()),
    );
    w.write_record(&header)?;
    let fmt = |x: T| format!("{:.9e}", x.as_f64());
    for r in &result.records {
        let mut row = vec![r.path_index.to_string(), fmt(r.true_daily)];
        for (slot, kind) in result.spec.estimators.iter().enumerate() {
            match r.estimates[slot] {
                Some(e) => {
                    let truth = true_for_kind(*kind, r.true_daily, result.spec.horizon);
                    row.push(fmt(e));
                    row.push(fmt(e - truth));
                }
                None => {
                    row.push(String::new());
                    row.push(String::new());
                }
            }
        }
        row.push(r.std_error.map(fmt).unwrap_or_default());
        row.push(r.z_unfeasible.map(fmt).unwrap_or_default());
        row.push(
            r.covered95
                .map(|c| if c { "1" } else { "0" }.to_string())
                .unwrap_or_default(),
        );
        row.push(
            r.negative
                .map(|c| if c { "1" } else { "0" }.to_string())
                .unwrap_or_default(),
        );
        let failures: Vec<String> = r
            .failures
            .iter()
            .enumerate()
            .filter_map(|(i, f)| {
                f.as_ref()
                    .map(|m| format!("{}: {}", result.spec.estimators[i].name(), m))
            })
            .collect();
        row.push(failures.join("; "));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// JSON summary embedding the resolved spec for reproducibility.
pub fn experiment_summary_json<T: Real>(result: &ExperimentResult<T>) -> serde_json::Value {
    serde_json::json!({
        "spec": result.spec,
        "aggregates": result.aggregates,
        "n_standardized_errors": result.standardized_errors.len(),
        "wall_seconds": result.wall_seconds,
        "version": result.version,
    })
}
