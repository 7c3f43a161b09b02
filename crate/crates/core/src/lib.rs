//! Sparsely activated networks (SANs): one-level convolutional autoencoders
//! whose activation maps are cut down to isolated spikes, scored by φ, the
//! joint measure of compression and reconstruction error.
//!
//! - [`numerics`]: same-size cross-correlation, its adjoint, kernel gradients
//! - [`activation`]: the five sparse activations and their sparsity rules
//! - [`san`]: model, forward pass, reconstruction loss and manual backward pass
//! - [`train`] and [`adam`]: minibatch training with per-epoch φ̄ validation
//! - [`sparse`]: compressed form (sparse maps) and its text file format
//! - [`phi`]: the φ metric, φ̄ aggregates and model selection
//! - [`datasets`]: CSV/IDX ingestion, segmentation protocols, synthetic data
//! - [`probe`]: linear classifier over reconstructions

pub mod activation;
pub mod adam;
pub mod datasets;
pub mod error;
pub mod numerics;
pub mod phi;
pub mod probe;
pub mod san;
pub mod sparse;
pub mod tensor;
pub mod train;

pub use activation::{derive_sparsity_param, ActivationKind, SparsityParam};
pub use adam::{AdamConfig, AdamState};
pub use datasets::{Corpus, Split};
pub use error::{Result, SanError};
pub use numerics::{adjoint_xcorr_same, mae, nnz, xcorr_kernel_grad, xcorr_same};
pub use phi::{
    phi_bar, phi_report, select_model, weights_count, Candidate, PhiAggregate, PhiReport,
};
pub use probe::{train_probe, LinearProbe, ProbeConfig, ProbeOutcome};
pub use san::{backward, forward, loss, ForwardTrace, KernelInit, SanModel};
pub use sparse::{decode, encode, SparseMap};
pub use tensor::Tensor;
pub use train::{train, EpochRecord, TrainConfig, TrainOutcome};
