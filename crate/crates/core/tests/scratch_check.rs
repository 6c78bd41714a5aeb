use volvol::mc::{run_experiment, EstimatorKind, ExperimentSpec, ModelSpec, Sampling, TuningSpec};
use volvol::simulate::{HestonParams, SvvParams};

#[test]
#[ignore]
fn pilot_comparison_svv() {
    let spec = ExperimentSpec {
        model: ModelSpec::Svv(SvvParams::<f64>::default()),
        n_paths: 300,
        sampling: Sampling::Regular { mesh_seconds: 1.0 },
        estimators: vec![EstimatorKind::FourierDebiased],
        tuning: TuningSpec {
            c_m: 0.07,
            ..TuningSpec::default()
        },
        horizon: 1.0 / 252.0,
        master_seed: 888111,
    };
    let r = run_experiment(&spec).unwrap();
    let agg = &r.aggregates[0];
    eprintln!(
        "svv 1-sec 300 paths: bias={:+.4e} mse={:.4e} (targets +3.644e-7, 6.199e-9)",
        agg.bias, agg.mse
    );
}

#[test]
#[ignore]
fn pilot_comparison_poisson() {
    let spec = ExperimentSpec {
        model: ModelSpec::Heston(HestonParams::<f64>::default()),
        n_paths: 300,
        sampling: Sampling::Poisson {
            mean_duration_seconds: 2.0,
            fine_mesh_seconds: 0.125,
        },
        estimators: vec![EstimatorKind::FourierDebiased],
        tuning: TuningSpec {
            m_override: Some(60),
            ..TuningSpec::default()
        },
        horizon: 1.0 / 252.0,
        master_seed: 555123,
    };
    let t0 = std::time::Instant::now();
    let r = run_experiment(&spec).unwrap();
    let agg = &r.aggregates[0];
    eprintln!(
        "poisson d=2s 300 paths: bias={:+.4e} mse={:.4e} n_failed={} wall={:.1}s (targets -1.910e-7, 6.888e-10)",
        agg.bias,
        agg.mse,
        agg.n_failed,
        t0.elapsed().as_secs_f64()
    );
}

#[test]
#[ignore]
fn pilot_comparison() {
    let spec = ExperimentSpec {
        model: ModelSpec::Heston(HestonParams::<f64>::default()),
        n_paths: 200,
        sampling: Sampling::Regular { mesh_seconds: 1.0 },
        estimators: vec![EstimatorKind::FourierDebiased],
        tuning: TuningSpec::default(),
        horizon: 1.0 / 252.0,
        master_seed: 20240801,
    };
    let t0 = std::time::Instant::now();
    let r = run_experiment(&spec).unwrap();
    let agg = &r.aggregates[0];
    eprintln!(
        "Heston 1-sec 200 paths: bias={:+.4e} mse={:.4e} n_ok={} neg_rate={:?} cov={:?} wall={:.1}s",
        agg.bias,
        agg.mse,
        agg.n_ok,
        agg.negative_rate,
        agg.coverage95,
        t0.elapsed().as_secs_f64()
    );
    let zs = &r.standardized_errors;
    let zm = zs.iter().sum::<f64>() / zs.len() as f64;
    let zv = zs.iter().map(|z| (z - zm) * (z - zm)).sum::<f64>() / (zs.len() - 1) as f64;
    eprintln!("z: mean={zm:+.3} std={:.3} n={}", zv.sqrt(), zs.len());
}
