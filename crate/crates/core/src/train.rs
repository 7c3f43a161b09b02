//! Minibatch training of a SAN with Adam and per-epoch φ̄ validation.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::adam::{AdamConfig, AdamState};
use crate::error::{Result, SanError};
use crate::phi::{evaluate, PhiAggregate};
use crate::san::{backward, forward, loss, KernelInit, SanModel};
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub init_mean: f64,
    pub init_std: f64,
    pub seed: u64,
    pub border_tolerance: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 30,
            batch_size: 2,
            learning_rate: 0.01,
            init_mean: 0.0,
            init_std: 0.1,
            seed: 0,
            border_tolerance: 3,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(SanError::InvalidConfig(
                "epochs and batch size must be >= 1".into(),
            ));
        }
        if self.init_std.is_nan()
            || self.init_std <= 0.0
            || self.learning_rate.is_nan()
            || self.learning_rate < 0.0
        {
            return Err(SanError::InvalidConfig(format!(
                "need init std > 0 and learning rate >= 0, got {} and {}",
                self.init_std, self.learning_rate
            )));
        }
        Ok(())
    }

    pub fn kernel_init(&self) -> KernelInit {
        KernelInit {
            mean: self.init_mean,
            std: self.init_std,
            seed: self.seed,
        }
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.learning_rate,
            ..AdamConfig::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    /// 1-based epoch number.
    pub epoch: usize,
    /// Mean per-example loss observed while training this epoch.
    pub train_loss: f64,
    pub validation: PhiAggregate,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub best: SanModel,
    pub best_epoch: usize,
    pub best_validation: PhiAggregate,
    /// Kernels after every epoch, in order.
    pub history: Vec<EpochRecord>,
}

/// Per-example losses and mean kernel gradients over a batch.
pub fn batch_gradients(model: &SanModel, batch: &[&Tensor]) -> Result<(Vec<f64>, Vec<Tensor>)> {
    let extents = batch
        .first()
        .ok_or_else(|| SanError::EmptyDataset("empty batch".into()))?
        .extents();
    let mut losses = Vec::with_capacity(batch.len());
    let mut sum: Option<Vec<Tensor>> = None;
    for x in batch {
        if x.extents() != extents {
            return Err(SanError::ShapeMismatch {
                left: extents.to_vec(),
                right: x.extents().to_vec(),
            });
        }
        let trace = forward(model, x)?;
        losses.push(loss(&trace, x)?);
        let grads = backward(model, x, &trace)?;
        match &mut sum {
            None => sum = Some(grads),
            Some(acc) => {
                for (a, g) in acc.iter_mut().zip(&grads) {
                    a.add_assign(g)?;
                }
            }
        }
    }
    let scale = 1.0 / batch.len() as f64;
    let grads = sum.unwrap().iter().map(|g| g.scale(scale)).collect();
    Ok((losses, grads))
}

/// Trains `model` and returns the per-epoch snapshot with the lowest
/// validation φ̄ (earliest epoch on ties). The training set is reshuffled
/// every epoch from a generator seeded by `cfg.seed`; the last batch of an
/// epoch may be short. An empty validation set falls back to the training
/// set for selection.
pub fn train(
    model: &SanModel,
    train_set: &[Tensor],
    validation: &[Tensor],
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if train_set.is_empty() {
        return Err(SanError::EmptyDataset("training set".into()));
    }
    let validation = if validation.is_empty() {
        train_set
    } else {
        validation
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);

    let mut current = model.clone();
    let mut adam = AdamState::new(current.kernels(), cfg.adam());
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut best: Option<(SanModel, usize, PhiAggregate)> = None;

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        // summed in example order so the value does not depend on the shuffle
        let mut losses = vec![0.0; train_set.len()];
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<&Tensor> = chunk.iter().map(|&i| &train_set[i]).collect();
            let (batch_losses, grads) = batch_gradients(&current, &batch)?;
            for (&i, l) in chunk.iter().zip(batch_losses) {
                losses[i] = l;
            }
            adam.step(current.kernels_mut(), &grads)?;
        }
        let (_, agg) = evaluate(&current, validation)?;
        history.push(EpochRecord {
            epoch,
            train_loss: losses.iter().sum::<f64>() / train_set.len() as f64,
            validation: agg,
        });
        if best
            .as_ref()
            .is_none_or(|(_, _, b)| agg.phi_bar < b.phi_bar)
        {
            best = Some((current.clone(), epoch, agg));
        }
    }
    let (best, best_epoch, best_validation) = best.expect("at least one epoch");
    Ok(TrainOutcome {
        best,
        best_epoch,
        best_validation,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activation::ActivationKind;

    fn corpus(count: usize, len: usize) -> Vec<Tensor> {
        (0..count)
            .map(|e| {
                Tensor::from_vec(
                    (0..len)
                        .map(|i| ((i * (e + 3)) as f64 * 0.21).sin() + 0.1 * e as f64)
                        .collect(),
                )
                .unwrap()
            })
            .collect()
    }

    fn model(kind: ActivationKind, cfg: &TrainConfig) -> SanModel {
        SanModel::initialized(kind, &[5], &[64], &cfg.kernel_init(), cfg.border_tolerance).unwrap()
    }

    #[test]
    fn zero_learning_rate_keeps_init() {
        let cfg = TrainConfig {
            epochs: 1,
            learning_rate: 0.0,
            ..TrainConfig::default()
        };
        let m = model(ActivationKind::Extrema, &cfg);
        let data = corpus(4, 64);
        let out = train(&m, &data, &data[..2], &cfg).unwrap();
        assert_eq!(out.best.kernels(), m.kernels());
    }

    #[test]
    fn zero_learning_rate_loss_is_constant() {
        let cfg = TrainConfig {
            epochs: 4,
            learning_rate: 0.0,
            batch_size: 4,
            ..TrainConfig::default()
        };
        let m = model(ActivationKind::TopKAbsolutes, &cfg);
        let data = corpus(4, 64);
        let out = train(&m, &data, &data[..2], &cfg).unwrap();
        let first = out.history[0].train_loss;
        assert!(out.history.iter().all(|h| h.train_loss == first));
        assert_eq!(out.best_epoch, 1);
    }

    #[test]
    fn training_is_deterministic_and_shape_preserving() {
        let cfg = TrainConfig {
            epochs: 3,
            seed: 11,
            ..TrainConfig::default()
        };
        let m = model(ActivationKind::ExtremaPoolIndices, &cfg);
        let data = corpus(5, 64);
        let a = train(&m, &data, &data[3..], &cfg).unwrap();
        let b = train(&m, &data, &data[3..], &cfg).unwrap();
        assert_eq!(a.history, b.history);
        assert_eq!(a.best, b.best);
        assert_eq!(a.best.kernel_sizes(), m.kernel_sizes());
        assert_ne!(a.best.kernels(), m.kernels());
        let best = a
            .history
            .iter()
            .map(|h| h.validation.phi_bar)
            .fold(f64::INFINITY, f64::min);
        assert_eq!(a.best_validation.phi_bar, best);
    }

    #[test]
    fn rejects_bad_input() {
        let cfg = TrainConfig::default();
        let m = model(ActivationKind::Relu, &cfg);
        assert!(matches!(
            train(&m, &[], &[], &cfg),
            Err(SanError::EmptyDataset(_))
        ));
        let mut data = corpus(2, 64);
        data.push(Tensor::zeros(&[65]).unwrap());
        let cfg3 = TrainConfig {
            batch_size: 3,
            ..cfg
        };
        assert!(train(&m, &data, &[], &cfg3).is_err());
        assert!(train(&m, &data[..2], &[], &TrainConfig { epochs: 0, ..cfg }).is_err());
    }
}
