//! Full-batch training, evaluation metrics, and the threshold sweep.

use std::io::Write;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{GraphDataset, Split};
use crate::kernel::{csv_error, DiffusedFeatures, DiffusionKernel, KernelMode};
use crate::model::{Activation, DcnnModel, Gradients};

/// A training loss this many times larger than the first epoch's counts as
/// divergence, as does any non-finite loss.
pub const DIVERGENCE_FACTOR: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdKind {
    #[default]
    None,
    Pre,
    Post,
}

impl ThresholdKind {
    pub fn with_threshold(self, t: f64) -> KernelMode {
        match self {
            ThresholdKind::None => KernelMode::None,
            ThresholdKind::Pre => KernelMode::Pre(t),
            ThresholdKind::Post => KernelMode::Post(t),
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub n_hops: usize,
    pub threshold_mode: ThresholdKind,
    pub threshold: f64,
    pub learning_rate: f64,
    pub max_epochs: usize,
    /// Epochs without a validation-loss improvement before stopping.
    pub patience: usize,
    pub seed: u64,
    pub activation: Activation,
    /// Heavy-ball momentum coefficient; zero is plain gradient descent.
    pub momentum: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            n_hops: 2,
            threshold_mode: ThresholdKind::None,
            threshold: 0.0,
            learning_rate: 0.05,
            max_epochs: 2000,
            patience: 50,
            seed: 0,
            activation: Activation::Tanh,
            momentum: 0.0,
        }
    }
}

impl TrainConfig {
    pub fn kernel_mode(&self) -> KernelMode {
        self.threshold_mode.with_threshold(self.threshold)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::config(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.max_epochs == 0 {
            return Err(Error::config("max_epochs must be >= 1"));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::config(format!(
                "threshold must lie in [0, 1], got {}",
                self.threshold
            )));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::config(format!(
                "momentum must lie in [0, 1), got {}",
                self.momentum
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub valid_loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    /// Weights from the epoch with the lowest validation loss.
    pub model: DcnnModel,
    pub history: Vec<EpochRecord>,
    pub best_epoch: usize,
}

impl TrainOutcome {
    pub fn epochs_run(&self) -> usize {
        self.history.len()
    }
}

/// Builds the kernel for `config` once and trains on it.
pub fn train(dataset: &GraphDataset, config: &TrainConfig) -> Result<(DiffusionKernel, TrainOutcome)> {
    config.validate()?;
    let p = dataset.transition_matrix()?;
    let kernel = DiffusionKernel::build(&p, config.kernel_mode(), config.n_hops)?;
    let outcome = train_with_kernel(dataset, &kernel, config)?;
    Ok((kernel, outcome))
}

/// Full-batch gradient descent on the training mask with early stopping on
/// validation loss. `config.n_hops` and the threshold are taken from the
/// kernel.
pub fn train_with_kernel(
    dataset: &GraphDataset,
    kernel: &DiffusionKernel,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    if !dataset.train_mask.contains(&true) || !dataset.valid_mask.contains(&true) {
        return Err(Error::config("dataset needs non-empty train and valid splits"));
    }
    let diffused = kernel.diffuse_features(&dataset.features)?;
    let mut model = DcnnModel::init(
        kernel.n_hops(),
        dataset.n_features(),
        dataset.n_classes,
        config.activation,
        config.seed,
    );
    let mut velocity = Gradients::zeros_like(&model);
    let mut history = Vec::new();
    let mut best = (f64::INFINITY, 0usize, model.clone());
    let mut first_loss = None;

    for epoch in 1..=config.max_epochs {
        let trace = model.forward(&diffused)?;
        let train_loss = trace.loss(&dataset.labels, &dataset.train_mask)?;
        let reference = *first_loss.get_or_insert(train_loss);
        if !train_loss.is_finite() || train_loss > DIVERGENCE_FACTOR * reference.max(f64::MIN_POSITIVE) {
            return Err(Error::Diverged { epoch, loss: train_loss });
        }
        let valid_loss = trace.loss(&dataset.labels, &dataset.valid_mask)?;
        history.push(EpochRecord {
            epoch,
            train_loss,
            valid_loss,
        });
        if valid_loss < best.0 {
            best = (valid_loss, epoch, model.clone());
        } else if epoch - best.1 >= config.patience {
            break;
        }
        let grads = model.backward(&diffused, &trace, &dataset.labels, &dataset.train_mask)?;
        if !grads.is_finite() {
            return Err(Error::Diverged { epoch, loss: train_loss });
        }
        velocity.accumulate(config.momentum, &grads);
        model.apply_update(&velocity, config.learning_rate);
    }
    Ok(TrainOutcome {
        model: best.2,
        history,
        best_epoch: best.1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub macro_f1: f64,
    pub loss: f64,
}

/// Accuracy and macro-F1 over the classes present in `truth` or `predicted`.
pub fn classification_scores(truth: &[usize], predicted: &[usize]) -> (f64, f64) {
    assert_eq!(truth.len(), predicted.len());
    if truth.is_empty() {
        return (0.0, 0.0);
    }
    let n_classes = truth.iter().chain(predicted).max().map_or(0, |m| m + 1);
    let mut tp = vec![0usize; n_classes];
    let mut fp = vec![0usize; n_classes];
    let mut fn_ = vec![0usize; n_classes];
    for (&t, &p) in truth.iter().zip(predicted) {
        if t == p {
            tp[t] += 1;
        } else {
            fp[p] += 1;
            fn_[t] += 1;
        }
    }
    let accuracy = tp.iter().sum::<usize>() as f64 / truth.len() as f64;
    let present: Vec<usize> = (0..n_classes)
        .filter(|&c| tp[c] + fp[c] + fn_[c] > 0)
        .collect();
    let f1_sum: f64 = present
        .iter()
        .map(|&c| 2.0 * tp[c] as f64 / (2 * tp[c] + fp[c] + fn_[c]) as f64)
        .sum();
    (accuracy, f1_sum / present.len() as f64)
}

/// Metrics of `model` on one split given precomputed diffused features.
pub fn evaluate_diffused(
    model: &DcnnModel,
    dataset: &GraphDataset,
    diffused: &DiffusedFeatures,
    split: Split,
) -> Result<Metrics> {
    let mask = dataset.mask(split);
    if !mask.contains(&true) {
        return Err(Error::input(format!("{} split is empty", split.name())));
    }
    let trace = model.forward(diffused)?;
    let loss = trace.loss(&dataset.labels, mask)?;
    let predicted = trace.predict();
    let (truth, pred): (Vec<usize>, Vec<usize>) = mask
        .iter()
        .enumerate()
        .filter(|(_, m)| **m)
        .map(|(i, _)| (dataset.labels[i].expect("loss checked labels"), predicted[i]))
        .unzip();
    let (accuracy, macro_f1) = classification_scores(&truth, &pred);
    Ok(Metrics {
        accuracy,
        macro_f1,
        loss,
    })
}

pub fn evaluate(
    model: &DcnnModel,
    dataset: &GraphDataset,
    kernel: &DiffusionKernel,
    split: Split,
) -> Result<Metrics> {
    let diffused = kernel.diffuse_features(&dataset.features)?;
    evaluate_diffused(model, dataset, &diffused, split)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SplitMetrics {
    pub train: Metrics,
    pub valid: Metrics,
    pub test: Metrics,
}

pub fn evaluate_all(model: &DcnnModel, dataset: &GraphDataset, kernel: &DiffusionKernel) -> Result<SplitMetrics> {
    let diffused = kernel.diffuse_features(&dataset.features)?;
    Ok(SplitMetrics {
        train: evaluate_diffused(model, dataset, &diffused, Split::Train)?,
        valid: evaluate_diffused(model, dataset, &diffused, Split::Valid)?,
        test: evaluate_diffused(model, dataset, &diffused, Split::Test)?,
    })
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SweepRow {
    pub threshold: f64,
    pub mode: &'static str,
    pub hops: usize,
    pub density: f64,
    pub peak_entries: usize,
    pub metrics: SplitMetrics,
    pub epochs: usize,
    #[serde(skip)]
    pub wall_time: Duration,
}

#[derive(Debug, serde::Serialize)]
pub struct SweepFailure {
    pub threshold: f64,
    pub error: String,
    #[serde(skip)]
    pub source: Error,
}

#[derive(Debug, Default)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub failures: Vec<SweepFailure>,
    /// Largest transition probability: thresholds above it remove every edge.
    pub edge_cutoff: Option<f64>,
}

/// One row of the sweep: build the kernel, train from `config.seed`, score
/// every split.
pub fn sweep_row(
    dataset: &GraphDataset,
    p: &crate::sparse::CsrMatrix,
    mode: KernelMode,
    config: &TrainConfig,
) -> Result<SweepRow> {
    let started = Instant::now();
    let kernel = DiffusionKernel::build(p, mode, config.n_hops)?;
    let outcome = train_with_kernel(dataset, &kernel, config)?;
    let metrics = evaluate_all(&outcome.model, dataset, &kernel)?;
    Ok(SweepRow {
        threshold: mode.threshold(),
        mode: mode.name(),
        hops: kernel.n_hops(),
        density: kernel.density(),
        peak_entries: kernel.ledger().peak_stored_entries,
        metrics,
        epochs: outcome.epochs_run(),
        wall_time: started.elapsed(),
    })
}

/// Retrains from scratch for every threshold. Rows come back in threshold
/// order whether or not they ran in parallel; a failing threshold is
/// recorded and the rest still run.
pub fn sweep(
    dataset: &GraphDataset,
    thresholds: &[f64],
    kind: ThresholdKind,
    config: &TrainConfig,
    parallel: bool,
) -> Result<SweepReport> {
    if thresholds.is_empty() {
        return Err(Error::config("sweep needs at least one threshold"));
    }
    if thresholds.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::config("sweep thresholds must be sorted ascending"));
    }
    config.validate_except_threshold()?;
    let p = dataset.transition_matrix()?;
    let run = |&t: &f64| sweep_row(dataset, &p, kind.with_threshold(t), config).map_err(|e| (t, e));
    let results: Vec<_> = if parallel {
        thresholds.par_iter().map(run).collect()
    } else {
        thresholds.iter().map(run).collect()
    };
    let mut report = SweepReport {
        edge_cutoff: p.max_value(),
        ..SweepReport::default()
    };
    for r in results {
        match r {
            Ok(row) => report.rows.push(row),
            Err((threshold, source)) => report.failures.push(SweepFailure {
                threshold,
                error: format!("threshold {threshold}: {source}"),
                source,
            }),
        }
    }
    Ok(report)
}

impl TrainConfig {
    fn validate_except_threshold(&self) -> Result<()> {
        Self {
            threshold: 0.0,
            ..self.clone()
        }
        .validate()
    }
}

#[derive(serde::Serialize)]
struct CsvRow<'a> {
    threshold: f64,
    mode: &'a str,
    hops: usize,
    density: f64,
    peak_entries: usize,
    train_loss: f64,
    train_accuracy: f64,
    train_macro_f1: f64,
    valid_loss: f64,
    valid_accuracy: f64,
    valid_macro_f1: f64,
    test_loss: f64,
    test_accuracy: f64,
    test_macro_f1: f64,
    epochs: usize,
}

pub const SWEEP_CSV_HEADER: &str = "threshold,mode,hops,density,peak_entries,train_loss,train_accuracy,train_macro_f1,valid_loss,valid_accuracy,valid_macro_f1,test_loss,test_accuracy,test_macro_f1,epochs";

impl SweepReport {
    /// Writes the successful rows. Wall-clock time is left out so repeated
    /// runs produce identical bytes.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        w.write_record(SWEEP_CSV_HEADER.split(',')).map_err(csv_error)?;
        for r in &self.rows {
            let m = &r.metrics;
            w.serialize(CsvRow {
                threshold: r.threshold,
                mode: r.mode,
                hops: r.hops,
                density: r.density,
                peak_entries: r.peak_entries,
                train_loss: m.train.loss,
                train_accuracy: m.train.accuracy,
                train_macro_f1: m.train.macro_f1,
                valid_loss: m.valid.loss,
                valid_accuracy: m.valid.accuracy,
                valid_macro_f1: m.valid.macro_f1,
                test_loss: m.test.loss,
                test_accuracy: m.test.accuracy,
                test_macro_f1: m.test.macro_f1,
                epochs: r.epochs,
            })
            .map_err(csv_error)?;
        }
        w.flush().map_err(|e| Error::Input(e.to_string()))
    }

    /// One JSON object per line: rows (with `seconds`) then failures.
    pub fn write_log<W: Write>(&self, mut out: W) -> Result<()> {
        let io = |e: std::io::Error| Error::Input(e.to_string());
        for r in &self.rows {
            let mut v = serde_json::to_value(r).expect("row serialises");
            v["seconds"] = serde_json::json!(r.wall_time.as_secs_f64());
            v["event"] = serde_json::json!("row");
            writeln!(out, "{v}").map_err(io)?;
        }
        for f in &self.failures {
            let mut v = serde_json::to_value(f).expect("failure serialises");
            v["event"] = serde_json::json!("failure");
            writeln!(out, "{v}").map_err(io)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_predictions() {
        assert_eq!(classification_scores(&[0, 1, 2, 1], &[0, 1, 2, 1]), (1.0, 1.0));
    }

    #[test]
    fn constant_predictions_on_balanced_split() {
        let (acc, f1) = classification_scores(&[0, 0, 1, 1], &[0, 0, 0, 0]);
        assert_eq!(acc, 0.5);
        assert!((f1 - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn config_validation() {
        let ok = TrainConfig::default();
        ok.validate().unwrap();
        for bad in [
            TrainConfig { learning_rate: 0.0, ..ok.clone() },
            TrainConfig { max_epochs: 0, ..ok.clone() },
            TrainConfig { threshold: 1.5, ..ok.clone() },
            TrainConfig { momentum: 1.0, ..ok.clone() },
        ] {
            assert!(matches!(bad.validate(), Err(Error::Config(_))));
        }
    }
}
