//! The φ metric: the Euclidean norm of inverse compression ratio and
//! normalized reconstruction loss, its dataset mean φ̄, and φ̄-based model
//! selection.
//!
//! A model stores `W` kernel weights plus `rank + 1` symbols (coordinates and
//! amplitude) per nonzero activation, so for an input of `n` samples
//! `CR⁻¹ = (W + (rank + 1) A) / n`. The normalized loss divides the MAE of the
//! reconstruction by the MAE of predicting all zeros.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SanError};
use crate::numerics::{mae, nnz};
use crate::san::{forward, ForwardTrace, SanModel};
use crate::tensor::Tensor;

/// Total number of scalar kernel parameters.
pub fn weights_count(model: &SanModel) -> usize {
    model.kernels().iter().map(Tensor::len).sum()
}

/// Per-example compression and fidelity record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiReport {
    pub weights: usize,
    pub activations: usize,
    pub cr_inv: f64,
    pub l_tilde: f64,
    pub phi: f64,
}

impl PhiReport {
    pub fn new(
        weights: usize,
        activations: usize,
        samples: usize,
        rank: usize,
        l_tilde: f64,
    ) -> Self {
        let cr_inv = (weights + (rank + 1) * activations) as f64 / samples as f64;
        Self {
            weights,
            activations,
            cr_inv,
            l_tilde,
            phi: cr_inv.hypot(l_tilde),
        }
    }
}

/// `mae(xhat, x) / mae(0, x)`. An all-zero input scores 0 when reconstructed
/// exactly and +inf otherwise.
pub fn normalized_loss(xhat: &Tensor, x: &Tensor) -> Result<f64> {
    let err = mae(xhat, x)?;
    let base = x.values().iter().map(|v| v.abs()).sum::<f64>() / x.len() as f64;
    Ok(if base > 0.0 {
        err / base
    } else if err == 0.0 {
        0.0
    } else {
        f64::INFINITY
    })
}

pub fn phi_report(model: &SanModel, x: &Tensor, trace: &ForwardTrace) -> Result<PhiReport> {
    trace.xhat.same_shape(x)?;
    let activations = trace.alpha.iter().map(nnz).sum();
    let l_tilde = normalized_loss(&trace.xhat, x)?;
    Ok(PhiReport::new(
        weights_count(model),
        activations,
        x.len(),
        x.rank(),
        l_tilde,
    ))
}

/// Arithmetic means over a set of per-example reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiAggregate {
    pub phi_bar: f64,
    pub cr_inv: f64,
    pub l_tilde: f64,
    pub weights: usize,
    pub activations: f64,
    pub count: usize,
}

pub fn phi_bar(reports: &[PhiReport]) -> Result<PhiAggregate> {
    if reports.is_empty() {
        return Err(SanError::EmptyDataset("no reports to aggregate".into()));
    }
    let l = reports.len() as f64;
    let mean = |f: fn(&PhiReport) -> f64| reports.iter().map(f).sum::<f64>() / l;
    Ok(PhiAggregate {
        phi_bar: mean(|r| r.phi),
        cr_inv: mean(|r| r.cr_inv),
        l_tilde: mean(|r| r.l_tilde),
        weights: reports[0].weights,
        activations: mean(|r| r.activations as f64),
        count: reports.len(),
    })
}

/// Runs the model over `examples` and returns per-example reports plus their
/// aggregate.
pub fn evaluate(model: &SanModel, examples: &[Tensor]) -> Result<(Vec<PhiReport>, PhiAggregate)> {
    let reports = examples
        .iter()
        .map(|x| phi_report(model, x, &forward(model, x)?))
        .collect::<Result<Vec<_>>>()?;
    let agg = phi_bar(&reports)?;
    Ok((reports, agg))
}

/// A trained snapshot competing in model selection.
#[derive(Debug, Clone)]
pub struct Candidate<T> {
    pub kernel_size: usize,
    pub epoch: usize,
    pub validation: PhiAggregate,
    pub snapshot: T,
}

/// Picks the candidate with the lowest validation φ̄; ties go to the smaller
/// kernel and then the earlier epoch.
pub fn select_model<T>(candidates: Vec<Candidate<T>>) -> Result<Candidate<T>> {
    candidates
        .into_iter()
        .min_by(|a, b| {
            a.validation
                .phi_bar
                .total_cmp(&b.validation.phi_bar)
                .then(a.kernel_size.cmp(&b.kernel_size))
                .then(a.epoch.cmp(&b.epoch))
        })
        .ok_or_else(|| SanError::EmptyDataset("no candidates to select from".into()))
}
