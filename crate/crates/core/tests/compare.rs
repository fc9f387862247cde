use riskseq::eval::{compare_models, CompareConfig};
use riskseq::ingest::{Month, MonthlySeries};
use riskseq::numerics::{make_rng, Matrix};
use riskseq::recurrent::TrainConfig;
use riskseq::timeseries::{inverse_difference, simulate_ar};
use riskseq::Error;

/// Default rate whose first differences are AR(2); features and the macro
/// column are unrelated noise.
fn ar_series(seed: u64, n: usize) -> MonthlySeries {
    let mut rng = make_rng(seed);
    let diffs = simulate_ar(&mut rng, 0.0, &[0.5, -0.3], 0.004, n - 1, 100);
    let levels = inverse_difference(&diffs, &[0.15]).unwrap();
    let start = Month::new(2007, 10).unwrap();
    MonthlySeries {
        months: (0..n).map(|i| start.plus(i as i64)).collect(),
        feature_names: vec!["a".into(), "b".into()],
        features: Matrix::from_vec(n, 2, (0..2 * n).map(|_| rng.normal()).collect()).unwrap(),
        default_rate: levels,
        unemp_rate: Some((0..n).map(|_| 5.0 + rng.normal()).collect()),
    }
}

fn small_config() -> CompareConfig {
    CompareConfig {
        train: TrainConfig { hidden_size: 8, epochs: 150, batch_size: 16, ..TrainConfig::default() },
        ..CompareConfig::default()
    }
}

#[test]
fn ar_baseline_is_competitive_on_ar_data() {
    for seed in 0..2 {
        let report = compare_models(&ar_series(seed, 120), &small_config(), seed).unwrap();
        report.check_consistency(1e-12).unwrap();
        let best = report.models.iter().map(|m| m.test_rmse).fold(f64::INFINITY, f64::min);
        let ar = &report.models[2];
        assert!(ar.name.starts_with("AR("));
        assert!(ar.test_rmse <= 1.5 * best, "seed {seed}: {} {} vs best {best}", ar.name, ar.test_rmse);
    }
}

#[test]
fn models_share_months_and_split() {
    let series = ar_series(5, 100);
    let report = compare_models(&series, &small_config(), 5).unwrap();
    assert_eq!(report.split.train_month_count, 80);
    assert_eq!(report.split.test_month_count, 20);
    // lookback 12 needs 11 earlier months; AR(3) on differences needs 4.
    assert_eq!(report.months.first(), Some(&series.months[11]));
    assert_eq!(report.train_evaluated, 80 - 11);
    assert_eq!(report.months.len(), 100 - 11);
    assert!(report.models.iter().all(|m| m.predicted.len() == report.months.len()));

    let mut rmse = Vec::new();
    report.write_rmse_csv(&mut rmse).unwrap();
    let text = String::from_utf8(rmse).unwrap();
    let names: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(&names[..2], &["LSTM(1)", "LSTM(2)"]);
}

#[test]
fn test_months_never_reach_the_fits() {
    let series = ar_series(8, 100);
    let mut altered = series.clone();
    for t in 80..100 {
        altered.default_rate[t] += 0.05;
        altered.unemp_rate.as_mut().unwrap()[t] = 42.0;
        altered.features.set(t, 0, 1e3);
    }
    let a = compare_models(&series, &small_config(), 1).unwrap();
    let b = compare_models(&altered, &small_config(), 1).unwrap();
    assert_eq!(a.ar_model, b.ar_model);
    for (ma, mb) in a.models.iter().zip(&b.models) {
        assert_eq!(ma.train_rmse, mb.train_rmse, "{}", ma.name);
        assert_eq!(&ma.predicted[..a.train_evaluated], &mb.predicted[..b.train_evaluated]);
    }
}

#[test]
fn deterministic_given_seed() {
    let series = ar_series(2, 90);
    let a = compare_models(&series, &small_config(), 3).unwrap();
    let b = compare_models(&series, &small_config(), 3).unwrap();
    assert_eq!(a.models, b.models);
    let c = compare_models(&series, &small_config(), 4).unwrap();
    assert_ne!(a.models[0].predicted, c.models[0].predicted);
}

#[test]
fn gaps_and_missing_macro_are_rejected() {
    let mut series = ar_series(1, 60);
    series.unemp_rate = None;
    assert!(matches!(compare_models(&series, &small_config(), 0), Err(Error::InvalidArgument(_))));

    let mut gapped = ar_series(1, 60);
    for m in gapped.months[30..].iter_mut() {
        *m = m.succ();
    }
    assert!(matches!(compare_models(&gapped, &small_config(), 0), Err(Error::InsufficientHistory(_))));
}
