use proptest::prelude::*;
use trafficcast::evaluation::{
    compare, fit_spec, mape, rolling_prediction, standard_prediction, ExogSplit, Fitted, ModelKind, PredictorSpec,
};
use trafficcast::features::ExogMatrix;
use trafficcast::sarimax::{simulate_arma, ModelOrder, SarimaxPredictor, SeasonalOrder};

fn shifted_series(seed: u64) -> (Vec<f64>, Vec<f64>) {
    let y: Vec<f64> = simulate_arma(&[0.7], &[], 0.25, 400, seed).iter().map(|v| 10.0 + v).collect();
    let (train, test) = y.split_at(300);
    let test: Vec<f64> = test.iter().enumerate().map(|(i, v)| if i >= 50 { v * 1.5 } else { *v }).collect();
    (train.to_vec(), test)
}

fn random_walk() -> PredictorSpec {
    PredictorSpec::arima("rw", ModelOrder::new(0, 1, 0).unwrap())
}

fn ar1() -> PredictorSpec {
    PredictorSpec::arima("ar1", ModelOrder::new(1, 0, 0).unwrap())
}

#[test]
fn random_walk_standard_is_flat() {
    let (train, test) = shifted_series(1);
    let t = standard_prediction(&random_walk(), &train, &test, None).unwrap();
    assert_eq!(t.predictions.len(), test.len());
    assert!(t.predictions.iter().all(|p| *p == *train.last().unwrap()));
}

#[test]
fn rolling_adapts_to_level_shift() {
    let (train, test) = shifted_series(2);
    for spec in [random_walk(), ar1()] {
        let s = standard_prediction(&spec, &train, &test, None).unwrap();
        let r = rolling_prediction(&spec, &train, &test, None).unwrap();
        assert!(mape(&r.predictions, &test).unwrap() < mape(&s.predictions, &test).unwrap(), "{}", spec.name);
    }
}

#[test]
fn modes_agree_on_first_step() {
    let (train, test) = shifted_series(3);
    for spec in [ar1(), PredictorSpec::holt_winters("hw", 12)] {
        let s = standard_prediction(&spec, &train, &test, None).unwrap();
        let r = rolling_prediction(&spec, &train, &test, None).unwrap();
        assert_eq!(s.predictions[0].to_bits(), r.predictions[0].to_bits(), "{}", spec.name);
        let one = rolling_prediction(&spec, &train, &test[..1], None).unwrap();
        assert_eq!(one.predictions, vec![s.predictions[0]]);
    }
}

#[test]
fn rolling_is_causal() {
    for seed in 0..3 {
        let (train, test) = shifted_series(10 + seed);
        for spec in [ar1(), PredictorSpec::holt_winters("hw", 12)] {
            let base = rolling_prediction(&spec, &train, &test[..40], None).unwrap();
            let cut = 25;
            let mut mutated = test[..40].to_vec();
            mutated[cut..].iter_mut().for_each(|v| *v = *v * 3.0 + 7.0);
            let other = rolling_prediction(&spec, &train, &mutated, None).unwrap();
            let a: Vec<u64> = base.predictions[..=cut].iter().map(|v| v.to_bits()).collect();
            let b: Vec<u64> = other.predictions[..=cut].iter().map(|v| v.to_bits()).collect();
            assert_eq!(a, b, "{}", spec.name);
        }
    }
}

#[test]
fn filter_only_matches_direct_rollout() {
    let (train, test) = shifted_series(4);
    let mut spec = PredictorSpec::arima("arma", ModelOrder::new(1, 1, 1).unwrap());
    spec.filter_only = true;
    let trace = rolling_prediction(&spec, &train, &test, None).unwrap();
    let Fitted::Sarimax(model) = fit_spec(&spec, &train, None).unwrap() else {
        unreachable!()
    };
    let mut history = train.clone();
    for (i, &y) in test.iter().enumerate() {
        // independent path: re-filter the whole history each step
        let direct = SarimaxPredictor::new(&model, &history, None).unwrap().forecast(1, None).unwrap()[0];
        assert!((trace.predictions[i] - direct).abs() < 1e-8, "{i}");
        history.push(y);
    }
}

#[test]
fn refit_interval_reduces_to_filtering_when_large() {
    let (train, test) = shifted_series(5);
    let mut a = ar1();
    a.refit_interval = 10_000;
    let mut b = ar1();
    b.filter_only = true;
    let ta = rolling_prediction(&a, &train, &test, None).unwrap();
    let tb = rolling_prediction(&b, &train, &test, None).unwrap();
    assert_eq!(ta, tb);
}

#[test]
fn deterministic_seasonal_series_is_predicted_exactly() {
    let m = 12;
    let y: Vec<f64> = (0..480).map(|t| 20.0 + 0.01 * t as f64 + 3.0 * (std::f64::consts::TAU * t as f64 / m as f64).sin()).collect();
    let (train, test) = y.split_at(400);
    let spec = PredictorSpec::holt_winters("hw", m);
    let s = standard_prediction(&spec, train, test, None).unwrap();
    assert!(mape(&s.predictions, test).unwrap() < 0.1);
}

#[test]
fn sarimax_rolling_uses_exog() {
    let n = 360;
    let noise = simulate_arma(&[0.5], &[], 0.1, n, 6);
    let rows: Vec<Vec<f64>> = (0..n).map(|t| vec![if (t / 12) % 2 == 0 { 1.0 } else { 0.0 }]).collect();
    let y: Vec<f64> = (0..n).map(|t| 5.0 + 2.0 * rows[t][0] + noise[t]).collect();
    let x = ExogMatrix::new(vec!["block".into()], rows).unwrap();
    let (train_x, test_x) = (x.slice(0..300), x.slice(300..n));
    let split = ExogSplit {
        train: &train_x,
        test: &test_x,
    };
    let spec = PredictorSpec {
        kind: ModelKind::Sarimax,
        exog: true,
        refit_interval: 20,
        ..PredictorSpec::arima("sarimax", ModelOrder::new(1, 0, 0).unwrap())
    };
    let r = rolling_prediction(&spec, &y[..300], &y[300..], Some(split)).unwrap();
    assert!(r.warnings.is_empty(), "{:?}", r.warnings);
    assert!(mape(&r.predictions, &y[300..]).unwrap() < 10.0);
    assert!(rolling_prediction(&spec, &y[..300], &y[300..], None).is_err());
}

#[test]
fn compare_reports_every_model() {
    let (train, test) = shifted_series(7);
    let mut broken = ar1();
    broken.name = "needs_exog".into();
    broken.kind = ModelKind::Sarimax;
    broken.exog = true;
    let mut seasonal = PredictorSpec::arima("sarima", ModelOrder::new(1, 0, 0).unwrap());
    seasonal.kind = ModelKind::Sarima;
    seasonal.seasonal = SeasonalOrder::new(1, 0, 0, 12).unwrap();
    seasonal.refit_interval = 25;
    let specs = vec![random_walk(), seasonal, PredictorSpec::holt_winters("hw", 12), broken];
    let report = compare(&specs, &train, &test, None).unwrap();
    assert_eq!(report.rows.len(), 4);
    let names: Vec<&str> = report.rows.iter().map(|r| r.name.as_str()).collect();
    assert_eq!(names, vec!["rw", "sarima", "hw", "needs_exog"]);
    for r in &report.rows[..3] {
        assert!(r.ok());
        assert_eq!(r.standard.as_ref().unwrap().predictions.len(), test.len());
        assert_eq!(r.rolling.as_ref().unwrap().predictions.len(), test.len());
        assert!(r.mape_standard.unwrap() >= 0.0 && r.mape_rolling.unwrap() >= 0.0);
    }
    assert!(report.rows[3].error.as_deref().unwrap().contains("needs_exog"));
}

proptest! {
    #[test]
    fn mape_is_scale_invariant(
        pairs in proptest::collection::vec((0.1f64..100.0, 0.1f64..100.0), 1..50),
        a in prop_oneof![Just(1e-3), Just(1e3), 0.01f64..100.0],
    ) {
        let (p, o): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let ps: Vec<f64> = p.iter().map(|v| a * v).collect();
        let os: Vec<f64> = o.iter().map(|v| a * v).collect();
        let base = mape(&p, &o).unwrap();
        prop_assert!((mape(&ps, &os).unwrap() - base).abs() <= 1e-12 * base.max(1.0));
    }
}
