use sdcnn::kernel::kernels_built;
use sdcnn::trainer::{classification_scores, evaluate_all, sweep_row};
use sdcnn::{
    evaluate, generate_synthetic, make_splits, sweep, train, CsrMatrix, DenseMatrix, Error,
    GraphDataset, KernelMode, Split, SplitConfig, SynthSpec, ThresholdKind, TrainConfig,
};

fn split(ds: GraphDataset, seed: u64) -> GraphDataset {
    make_splits(ds, &SplitConfig { seed, ..SplitConfig::default() }).unwrap()
}

fn noise_sbm(seed: u64) -> GraphDataset {
    let spec = SynthSpec::sbm(100, 2, 0.3, 0.01, seed).with_features(16, 0.0, 1.0);
    split(generate_synthetic(&spec).unwrap(), seed)
}

#[test]
fn separable_features_without_edges() {
    let n = 40;
    let labels: Vec<Option<usize>> = (0..n).map(|i| Some(i % 2)).collect();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let sign = if i % 2 == 0 { -1.0 } else { 1.0 };
            vec![sign * (1.0 + (i as f64) / n as f64), 0.3 * ((i * 7 % 5) as f64 - 2.0)]
        })
        .collect();
    let ds = GraphDataset::new(
        CsrMatrix::zeros(n, n),
        DenseMatrix::from_rows(&rows).unwrap(),
        labels,
        2,
    )
    .unwrap();
    let ds = split(ds, 1);
    let cfg = TrainConfig {
        n_hops: 0,
        max_epochs: 500,
        patience: 500,
        ..TrainConfig::default()
    };
    let (kernel, out) = train(&ds, &cfg).unwrap();
    assert!(out.epochs_run() <= 500);
    let m = evaluate(&out.model, &ds, &kernel, Split::Train).unwrap();
    assert_eq!(m.accuracy, 1.0);
}

#[test]
fn structure_alone_separates_blocks() {
    let ds = noise_sbm(1);
    let cfg = TrainConfig {
        n_hops: 2,
        threshold_mode: ThresholdKind::Pre,
        threshold: 0.0,
        seed: 1,
        ..TrainConfig::default()
    };
    let (kernel, out) = train(&ds, &cfg).unwrap();
    let test = evaluate(&out.model, &ds, &kernel, Split::Test).unwrap();
    assert!(test.accuracy > 0.9, "test accuracy {}", test.accuracy);
}

#[test]
fn training_is_deterministic_and_builds_one_kernel() {
    let ds = noise_sbm(2);
    let cfg = TrainConfig {
        max_epochs: 200,
        seed: 5,
        ..TrainConfig::default()
    };
    let before = kernels_built();
    let (_, a) = train(&ds, &cfg).unwrap();
    assert_eq!(kernels_built() - before, 1);
    let (_, b) = train(&ds, &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.history.len(), a.epochs_run());
    assert!(a.history.iter().all(|e| e.train_loss.is_finite() && e.valid_loss.is_finite()));
}

#[test]
fn early_stopping_keeps_best_validation_weights() {
    let ds = noise_sbm(3);
    let cfg = TrainConfig {
        patience: 5,
        learning_rate: 2.0,
        max_epochs: 400,
        ..TrainConfig::default()
    };
    let (kernel, out) = train(&ds, &cfg).unwrap();
    let best = out.history[out.best_epoch - 1].valid_loss;
    assert!(out.history.iter().all(|e| e.valid_loss >= best));
    let valid = evaluate(&out.model, &ds, &kernel, Split::Valid).unwrap();
    assert!((valid.loss - best).abs() < 1e-12);
}

#[test]
fn huge_learning_rate_diverges() {
    let ds = noise_sbm(4);
    let cfg = TrainConfig {
        learning_rate: 1e6,
        ..TrainConfig::default()
    };
    match train(&ds, &cfg) {
        Err(Error::Diverged { epoch, .. }) => assert!(epoch >= 2),
        other => panic!("expected divergence, got {other:?}"),
    }
}

#[test]
fn missing_splits_rejected() {
    let ds = generate_synthetic(&SynthSpec::path(3)).unwrap();
    assert!(matches!(train(&ds, &TrainConfig::default()), Err(Error::Config(_))));
}

#[test]
fn metrics_match_scalar_oracle() {
    let ds = noise_sbm(5);
    let cfg = TrainConfig {
        max_epochs: 30,
        ..TrainConfig::default()
    };
    let (kernel, out) = train(&ds, &cfg).unwrap();
    let trace = out.model.forward(&kernel.diffuse_features(&ds.features).unwrap()).unwrap();
    let pred = trace.predict();
    for split in Split::ALL {
        let m = evaluate(&out.model, &ds, &kernel, split).unwrap();
        let mask = ds.mask(split);
        let idx: Vec<usize> = (0..ds.n_nodes()).filter(|&i| mask[i]).collect();
        let correct = idx.iter().filter(|&&i| Some(pred[i]) == ds.labels[i]).count();
        assert_eq!(m.accuracy, correct as f64 / idx.len() as f64);
        let mut f1 = 0.0;
        let mut classes = 0.0;
        for c in 0..2 {
            let tp = idx.iter().filter(|&&i| pred[i] == c && ds.labels[i] == Some(c)).count() as f64;
            let fp = idx.iter().filter(|&&i| pred[i] == c && ds.labels[i] != Some(c)).count() as f64;
            let fn_ = idx.iter().filter(|&&i| pred[i] != c && ds.labels[i] == Some(c)).count() as f64;
            if tp + fp + fn_ > 0.0 {
                f1 += 2.0 * tp / (2.0 * tp + fp + fn_);
                classes += 1.0;
            }
        }
        assert!((m.macro_f1 - f1 / classes).abs() < 1e-15);
    }
}

#[test]
fn random_predictions_scored_like_oracle() {
    let truth = [0, 1, 2, 2, 1, 0, 0, 2];
    let pred = [0, 2, 2, 1, 1, 0, 1, 2];
    let (acc, f1) = classification_scores(&truth, &pred);
    assert_eq!(acc, 5.0 / 8.0);
    // per-class F1: c0 = 2*2/(4+0+1), c1 = 2*1/(2+2+1), c2 = 2*2/(4+1+1)
    let expected = (4.0 / 5.0 + 2.0 / 5.0 + 4.0 / 6.0) / 3.0;
    assert!((f1 - expected).abs() < 1e-15);
}

#[test]
fn empty_split_is_input_error() {
    let mut ds = noise_sbm(6);
    let (kernel, out) = train(&ds, &TrainConfig { max_epochs: 5, ..TrainConfig::default() }).unwrap();
    ds.test_mask = vec![false; ds.n_nodes()];
    assert!(matches!(evaluate(&out.model, &ds, &kernel, Split::Test), Err(Error::Input(_))));
}

fn sweep_fixture() -> GraphDataset {
    let spec = SynthSpec::sbm(80, 2, 0.2, 0.02, 9)
        .with_features(4, 0.5, 1.0)
        .with_min_degree(2);
    split(generate_synthetic(&spec).unwrap(), 9)
}

fn quick() -> TrainConfig {
    TrainConfig {
        max_epochs: 60,
        seed: 3,
        ..TrainConfig::default()
    }
}

#[test]
fn single_threshold_sweep_equals_plain_run() {
    let ds = sweep_fixture();
    let report = sweep(&ds, &[0.0], ThresholdKind::None, &quick(), false).unwrap();
    assert_eq!(report.rows.len(), 1);
    let (kernel, out) = train(&ds, &quick()).unwrap();
    let row = &report.rows[0];
    assert_eq!(row.metrics, evaluate_all(&out.model, &ds, &kernel).unwrap());
    assert_eq!(row.epochs, out.epochs_run());
    assert_eq!(row.density, kernel.density());
}

#[test]
fn pre_sweep_densities_reach_identity_floor() {
    let ds = sweep_fixture();
    let thresholds = [0.0, 0.05, 0.1, 0.3, 0.5, 0.7];
    let report = sweep(&ds, &thresholds, ThresholdKind::Pre, &quick(), false).unwrap();
    assert!(report.failures.is_empty());
    let d: Vec<f64> = report.rows.iter().map(|r| r.density).collect();
    assert!(d.windows(2).all(|w| w[0] >= w[1]), "{d:?}");
    assert_eq!(*d.last().unwrap(), 1.0 / (80.0 * 3.0));
    assert!(report.edge_cutoff.unwrap() <= 0.5);
    let thresholds: Vec<f64> = report.rows.iter().map(|r| r.threshold).collect();
    assert_eq!(thresholds, [0.0, 0.05, 0.1, 0.3, 0.5, 0.7]);
}

#[test]
fn zero_pre_threshold_row_equals_unthresholded_row() {
    let ds = sweep_fixture();
    let p = ds.transition_matrix().unwrap();
    let none = sweep_row(&ds, &p, KernelMode::None, &quick()).unwrap();
    let pre = sweep_row(&ds, &p, KernelMode::Pre(0.0), &quick()).unwrap();
    assert_eq!(none.metrics, pre.metrics);
    assert_eq!(none.density, pre.density);
    assert_eq!(none.peak_entries, pre.peak_entries);
    assert_eq!(none.epochs, pre.epochs);
}

#[test]
fn parallel_sweep_matches_sequential() {
    let ds = sweep_fixture();
    let th = [0.0, 0.1, 0.3];
    let a = sweep(&ds, &th, ThresholdKind::Post, &quick(), false).unwrap();
    let b = sweep(&ds, &th, ThresholdKind::Post, &quick(), true).unwrap();
    let mut ca = Vec::new();
    let mut cb = Vec::new();
    a.write_csv(&mut ca).unwrap();
    b.write_csv(&mut cb).unwrap();
    assert_eq!(ca, cb);
}

#[test]
fn sweep_validation_and_failures() {
    let ds = sweep_fixture();
    assert!(matches!(sweep(&ds, &[], ThresholdKind::Pre, &quick(), false), Err(Error::Config(_))));
    assert!(matches!(
        sweep(&ds, &[0.3, 0.1], ThresholdKind::Pre, &quick(), false),
        Err(Error::Config(_))
    ));
    let report = sweep(&ds, &[0.1, 1.5], ThresholdKind::Pre, &quick(), false).unwrap();
    assert_eq!(report.rows.len(), 1);
    assert_eq!(report.failures.len(), 1);
    assert!(report.failures[0].error.contains("threshold 1.5"));
}
