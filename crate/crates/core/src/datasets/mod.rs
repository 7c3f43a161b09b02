//! Corpora and the preprocessing protocols that build them.

mod idx;
mod manifest;
mod signal;
mod synth;

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use idx::{
    load_idx_images, mnist_protocol, read_idx_images, read_idx_labels, write_idx_images,
    write_idx_labels, IdxImages,
};
pub use manifest::{load_manifest, write_manifest, ManifestEntry};
pub use signal::{
    load_csv_signal, load_uci_csv, parse_signal, physionet_protocol, uci_protocol, z_score,
    PhysionetCorpus, UciClass, PHYSIONET_SEGMENTS, PHYSIONET_SEGMENT_LEN, UCI_ROW_LEN,
};
pub use synth::{smooth_bump, synth_spike_train, SynthConfig, SynthCorpus};

use crate::error::{Result, SanError};
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Split {
    type Err = SanError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "validation" | "val" => Ok(Split::Validation),
            "test" => Ok(Split::Test),
            _ => Err(SanError::Format(format!("unknown split {s:?}"))),
        }
    }
}

/// Examples with a split assignment and optional class labels.
///
/// Signal corpora hold 1D tensors, image corpora 2D tensors. `labels` is
/// either empty or one class id per example.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub examples: Vec<Tensor>,
    pub labels: Vec<usize>,
    pub splits: Vec<Split>,
    pub provenance: String,
}

impl Corpus {
    pub fn new(
        examples: Vec<Tensor>,
        labels: Vec<usize>,
        splits: Vec<Split>,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        if splits.len() != examples.len() {
            return Err(SanError::Format(format!(
                "{} examples but {} split assignments",
                examples.len(),
                splits.len()
            )));
        }
        if !labels.is_empty() && labels.len() != examples.len() {
            return Err(SanError::Format(format!(
                "{} examples but {} labels",
                examples.len(),
                labels.len()
            )));
        }
        Ok(Self {
            examples,
            labels,
            splits,
            provenance: provenance.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn is_labeled(&self) -> bool {
        !self.labels.is_empty()
    }

    pub fn indices(&self, split: Split) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.splits[i] == split)
            .collect()
    }

    /// Copies of the examples assigned to `split`, in corpus order.
    pub fn examples_in(&self, split: Split) -> Vec<Tensor> {
        self.indices(split)
            .into_iter()
            .map(|i| self.examples[i].clone())
            .collect()
    }

    pub fn labels_in(&self, split: Split) -> Vec<usize> {
        if self.labels.is_empty() {
            return Vec::new();
        }
        self.indices(split)
            .into_iter()
            .map(|i| self.labels[i])
            .collect()
    }

    pub fn count(&self, split: Split) -> usize {
        self.splits.iter().filter(|&&s| s == split).count()
    }
}

/// Seeded shuffle of `0..n` cut into consecutive train/validation/test runs
/// of the given sizes.
pub(crate) fn shuffled_splits(n: usize, train: usize, validation: usize, seed: u64) -> Vec<Split> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut splits = vec![Split::Test; n];
    for (rank, &i) in order.iter().enumerate() {
        if rank < train {
            splits[i] = Split::Train;
        } else if rank < train + validation {
            splits[i] = Split::Validation;
        }
    }
    splits
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_names() {
        for s in [Split::Train, Split::Validation, Split::Test] {
            assert_eq!(s.name().parse::<Split>().unwrap(), s);
        }
        assert!("dev".parse::<Split>().is_err());
    }

    #[test]
    fn shuffled_splits_are_deterministic_and_exhaustive() {
        let a = shuffled_splits(100, 76, 12, 5);
        assert_eq!(a, shuffled_splits(100, 76, 12, 5));
        assert_ne!(a, shuffled_splits(100, 76, 12, 6));
        assert_eq!(a.iter().filter(|&&s| s == Split::Train).count(), 76);
        assert_eq!(a.iter().filter(|&&s| s == Split::Validation).count(), 12);
        assert_eq!(a.iter().filter(|&&s| s == Split::Test).count(), 12);
    }

    #[test]
    fn corpus_validation() {
        let x = Tensor::from_slice(&[1.0]);
        assert!(Corpus::new(vec![x.clone()], vec![], vec![], "t").is_err());
        assert!(Corpus::new(vec![x.clone()], vec![1, 2], vec![Split::Train], "t").is_err());
        let c = Corpus::new(
            vec![x.clone(), x],
            vec![3, 4],
            vec![Split::Test, Split::Train],
            "t",
        )
        .unwrap();
        assert_eq!(c.labels_in(Split::Train), vec![4]);
        assert_eq!(c.indices(Split::Test), vec![0]);
    }
}
