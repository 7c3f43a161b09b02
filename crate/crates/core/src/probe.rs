//! Single-layer linear classifier trained with negative log-likelihood on
//! SAN reconstructions, used to measure how much class information
//! survives compression.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::adam::{AdamConfig, AdamState};
use crate::datasets::{Corpus, Split};
use crate::error::{Result, SanError};
use crate::san::{forward, SanModel};
use crate::tensor::Tensor;

const PROBE_FORMAT: &str = "sanlab-probe";
const PROBE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProbe {
    /// `classes x inputs`, row-major.
    weights: Tensor,
    bias: Tensor,
}

impl LinearProbe {
    /// Weights drawn from `N(0, 0.01)`, zero bias.
    pub fn new(classes: usize, inputs: usize, seed: u64) -> Result<Self> {
        if classes < 2 || inputs == 0 {
            return Err(SanError::InvalidConfig(format!(
                "probe needs >= 2 classes and >= 1 input, got {classes} and {inputs}"
            )));
        }
        let normal = Normal::new(0.0, 0.01).expect("valid std");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..classes * inputs)
            .map(|_| normal.sample(&mut rng))
            .collect();
        Ok(Self {
            weights: Tensor::from_rows(classes, inputs, values)?,
            bias: Tensor::zeros(&[classes])?,
        })
    }

    pub fn from_parts(weights: Tensor, bias: Tensor) -> Result<Self> {
        if weights.rank() != 2 || bias.rank() != 1 || weights.extents()[0] != bias.len() {
            return Err(SanError::ShapeMismatch {
                left: weights.extents().to_vec(),
                right: bias.extents().to_vec(),
            });
        }
        if weights
            .values()
            .iter()
            .chain(bias.values())
            .any(|v| !v.is_finite())
        {
            return Err(SanError::Format("probe parameters must be finite".into()));
        }
        Ok(Self { weights, bias })
    }

    pub fn classes(&self) -> usize {
        self.bias.len()
    }

    pub fn inputs(&self) -> usize {
        self.weights.extents()[1]
    }

    pub fn weights(&self) -> &Tensor {
        &self.weights
    }

    pub fn bias(&self) -> &Tensor {
        &self.bias
    }

    fn logits(&self, x: &[f64]) -> Vec<f64> {
        let d = self.inputs();
        self.weights
            .values()
            .chunks(d)
            .zip(self.bias.values())
            .map(|(row, b)| b + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>())
            .collect()
    }

    /// Per-class log-probabilities `z - logsumexp(z)` with `z = Wx + b`.
    pub fn forward(&self, x: &Tensor) -> Result<Vec<f64>> {
        if x.len() != self.inputs() {
            return Err(SanError::ShapeMismatch {
                left: vec![self.inputs()],
                right: x.extents().to_vec(),
            });
        }
        Ok(log_softmax(&self.logits(x.values())))
    }

    pub fn predict(&self, x: &Tensor) -> Result<usize> {
        let lp = self.forward(x)?;
        Ok((0..lp.len())
            .max_by(|&a, &b| lp[a].total_cmp(&lp[b]).then(b.cmp(&a)))
            .expect("at least two classes"))
    }

    /// NLL of `label` and its gradients with respect to weights and bias.
    pub fn nll_gradient(&self, x: &Tensor, label: usize) -> Result<(f64, Tensor, Tensor)> {
        if label >= self.classes() {
            return Err(SanError::IndexOutOfRange {
                index: label,
                len: self.classes(),
            });
        }
        let lp = self.forward(x)?;
        let dz: Vec<f64> = lp
            .iter()
            .enumerate()
            .map(|(c, l)| l.exp() - if c == label { 1.0 } else { 0.0 })
            .collect();
        let mut gw = Tensor::zeros(self.weights.extents())?;
        for (row, &d) in gw.values_mut().chunks_mut(self.inputs()).zip(&dz) {
            for (g, v) in row.iter_mut().zip(x.values()) {
                *g = d * v;
            }
        }
        Ok((-lp[label], gw, Tensor::from_vec(dz)?))
    }

    pub fn accuracy(&self, inputs: &[Tensor], labels: &[usize]) -> Result<f64> {
        if inputs.is_empty() {
            return Err(SanError::EmptyDataset("no examples to score".into()));
        }
        let mut hits = 0;
        for (x, &y) in inputs.iter().zip(labels) {
            hits += usize::from(self.predict(x)? == y);
        }
        Ok(hits as f64 / inputs.len() as f64)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = ProbeFile {
            format: PROBE_FORMAT.into(),
            version: PROBE_VERSION,
            classes: self.classes(),
            inputs: self.inputs(),
            weights: self.weights.values().to_vec(),
            bias: self.bias.values().to_vec(),
        };
        std::fs::write(path, serde_json::to_string_pretty(&file)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file: ProbeFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        if file.format != PROBE_FORMAT || file.version != PROBE_VERSION {
            return Err(SanError::Format(format!(
                "unsupported probe format {} v{}",
                file.format, file.version
            )));
        }
        Self::from_parts(
            Tensor::from_rows(file.classes, file.inputs, file.weights)?,
            Tensor::from_vec(file.bias)?,
        )
    }
}

#[derive(Serialize, Deserialize)]
struct ProbeFile {
    format: String,
    version: u32,
    classes: usize,
    inputs: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
}

pub fn log_softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + z.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
    z.iter().map(|v| v - lse).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            epochs: 5,
            batch_size: 64,
            learning_rate: 0.01,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProbeOutcome {
    pub probe: LinearProbe,
    pub best_epoch: usize,
    /// Validation accuracy after each epoch.
    pub validation_accuracy: Vec<f64>,
    pub test_accuracy: Option<f64>,
}

/// Decodes every example through the frozen SAN.
pub fn reconstruct_all(san: &SanModel, examples: &[Tensor]) -> Result<Vec<Tensor>> {
    examples
        .iter()
        .map(|x| forward(san, x).map(|t| t.xhat))
        .collect()
}

/// Trains a probe on the reconstructions `x̂` of a frozen SAN and keeps the
/// epoch with the best validation accuracy (earliest on ties). Falls back to
/// the training split when the corpus has no validation split.
pub fn train_probe(san: &SanModel, corpus: &Corpus, cfg: &ProbeConfig) -> Result<ProbeOutcome> {
    if !corpus.is_labeled() {
        return Err(SanError::InvalidConfig(
            "probe training needs labels".into(),
        ));
    }
    let train_idx = corpus.indices(Split::Train);
    if train_idx.is_empty() {
        return Err(SanError::EmptyDataset("no training examples".into()));
    }
    let classes = corpus.labels.iter().max().map_or(0, |m| m + 1).max(2);
    let recon = |split: Split| -> Result<(Vec<Tensor>, Vec<usize>)> {
        Ok((
            reconstruct_all(san, &corpus.examples_in(split))?,
            corpus.labels_in(split),
        ))
    };
    let (train_x, train_y) = recon(Split::Train)?;
    let (mut val_x, mut val_y) = recon(Split::Validation)?;
    if val_x.is_empty() {
        val_x = train_x.clone();
        val_y = train_y.clone();
    }
    let (test_x, test_y) = recon(Split::Test)?;
    fit_probe(
        &train_x, &train_y, &val_x, &val_y, &test_x, &test_y, classes, cfg,
    )
}

/// Minibatch Adam on mean NLL over already-prepared inputs.
#[allow(clippy::too_many_arguments)]
pub fn fit_probe(
    train_x: &[Tensor],
    train_y: &[usize],
    val_x: &[Tensor],
    val_y: &[usize],
    test_x: &[Tensor],
    test_y: &[usize],
    classes: usize,
    cfg: &ProbeConfig,
) -> Result<ProbeOutcome> {
    if train_x.is_empty() || val_x.is_empty() {
        return Err(SanError::EmptyDataset(
            "probe train/validation inputs".into(),
        ));
    }
    if cfg.epochs == 0 || cfg.batch_size == 0 {
        return Err(SanError::InvalidConfig(
            "epochs and batch size must be >= 1".into(),
        ));
    }
    let inputs = train_x[0].len();
    let mut probe = LinearProbe::new(classes, inputs, cfg.seed)?;
    let mut adam = AdamState::new(
        &[probe.weights.clone(), probe.bias.clone()],
        AdamConfig {
            learning_rate: cfg.learning_rate,
            ..AdamConfig::default()
        },
    );
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    let mut order: Vec<usize> = (0..train_x.len()).collect();
    let mut best: Option<(LinearProbe, usize, f64)> = None;
    let mut validation_accuracy = Vec::with_capacity(cfg.epochs);

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(cfg.batch_size) {
            let mut gw = Tensor::zeros(probe.weights.extents())?;
            let mut gb = Tensor::zeros(probe.bias.extents())?;
            for &i in chunk {
                let (_, w, b) = probe.nll_gradient(&train_x[i], train_y[i])?;
                gw.add_assign(&w)?;
                gb.add_assign(&b)?;
            }
            let scale = 1.0 / chunk.len() as f64;
            let mut params = [probe.weights, probe.bias];
            adam.step(&mut params, &[gw.scale(scale), gb.scale(scale)])?;
            let [w, b] = params;
            probe = LinearProbe {
                weights: w,
                bias: b,
            };
        }
        let acc = probe.accuracy(val_x, val_y)?;
        validation_accuracy.push(acc);
        if best.as_ref().is_none_or(|(_, _, a)| acc > *a) {
            best = Some((probe.clone(), epoch, acc));
        }
    }
    let (probe, best_epoch, _) = best.expect("at least one epoch");
    let test_accuracy = if test_x.is_empty() {
        None
    } else {
        Some(probe.accuracy(test_x, test_y)?)
    };
    Ok(ProbeOutcome {
        probe,
        best_epoch,
        validation_accuracy,
        test_accuracy,
    })
}
