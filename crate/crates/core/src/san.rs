//! The sparsely activated network: `q` kernels, a sparse activation, and the
//! encode/decode pair `s = x ⋆ w`, `alpha = act(s)`, `x̂ = Σ adjoint(alpha, w)`.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::activation::{self, derive_sparsity_param, ActivationKind, SparsityParam};
use crate::error::{Result, SanError};
use crate::numerics::{adjoint_xcorr_same, mae, xcorr_kernel_grad, xcorr_same};
use crate::tensor::Tensor;

const MODEL_FORMAT: &str = "sanlab-model";
const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct SanModel {
    kernels: Vec<Tensor>,
    activation: ActivationKind,
    sparsity: Vec<SparsityParam>,
}

impl SanModel {
    pub fn new(
        kernels: Vec<Tensor>,
        activation: ActivationKind,
        sparsity: Vec<SparsityParam>,
    ) -> Result<Self> {
        if kernels.is_empty() {
            return Err(SanError::InvalidConfig(
                "a model needs at least one kernel".into(),
            ));
        }
        if sparsity.len() != kernels.len() {
            return Err(SanError::InvalidConfig(format!(
                "{} kernels but {} sparsity parameters",
                kernels.len(),
                sparsity.len()
            )));
        }
        let rank = kernels[0].rank();
        if let Some(k) = kernels.iter().find(|k| k.rank() != rank) {
            return Err(SanError::RankMismatch {
                left: rank,
                right: k.rank(),
            });
        }
        for (k, p) in kernels.iter().zip(&sparsity) {
            let ok = match (activation, p) {
                (ActivationKind::Identity | ActivationKind::Relu, SparsityParam::None) => true,
                (ActivationKind::TopKAbsolutes, SparsityParam::K { k }) => *k >= 1,
                (ActivationKind::ExtremaPoolIndices, SparsityParam::PoolSize { m }) => {
                    *m >= 1 && k.extents().iter().all(|e| e == m)
                }
                (ActivationKind::Extrema, SparsityParam::MinDistance { med, .. }) => *med >= 1,
                _ => false,
            };
            if !ok {
                return Err(SanError::InvalidSparsity(format!(
                    "{p:?} is inconsistent with {activation} and kernel extents {:?}",
                    k.extents()
                )));
            }
        }
        Ok(Self {
            kernels,
            activation,
            sparsity,
        })
    }

    /// Builds a model with normally initialized square kernels of the given
    /// sizes and sparsity parameters derived for inputs of `input_extents`.
    pub fn initialized(
        activation: ActivationKind,
        sizes: &[usize],
        input_extents: &[usize],
        init: &KernelInit,
        border_tolerance: usize,
    ) -> Result<Self> {
        let rank = input_extents.len();
        let kernels = init_kernels(sizes, rank, init)?;
        let sparsity = sizes
            .iter()
            .map(|&m| derive_sparsity_param(activation, m, input_extents, border_tolerance))
            .collect::<Result<Vec<_>>>()?;
        Self::new(kernels, activation, sparsity)
    }

    pub fn kernels(&self) -> &[Tensor] {
        &self.kernels
    }

    pub fn kernels_mut(&mut self) -> &mut [Tensor] {
        &mut self.kernels
    }

    pub fn activation(&self) -> ActivationKind {
        self.activation
    }

    pub fn sparsity(&self) -> &[SparsityParam] {
        &self.sparsity
    }

    pub fn q(&self) -> usize {
        self.kernels.len()
    }

    pub fn rank(&self) -> usize {
        self.kernels[0].rank()
    }

    /// Kernel extent along the first axis of each kernel.
    pub fn kernel_sizes(&self) -> Vec<usize> {
        self.kernels.iter().map(|k| k.extents()[0]).collect()
    }

    fn check_input(&self, x: &Tensor) -> Result<()> {
        if x.rank() != self.rank() {
            return Err(SanError::RankMismatch {
                left: self.rank(),
                right: x.rank(),
            });
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = ModelFile {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            rank: self.rank(),
            q: self.q(),
            activation: self.activation,
            kernels: self
                .kernels
                .iter()
                .zip(&self.sparsity)
                .map(|(k, p)| KernelEntry {
                    extents: k.extents().to_vec(),
                    sparsity: *p,
                    values: k.values().to_vec(),
                })
                .collect(),
        };
        std::fs::write(path, serde_json::to_string_pretty(&file)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        if file.format != MODEL_FORMAT || file.version != MODEL_VERSION {
            return Err(SanError::Format(format!(
                "unsupported model format {} v{}",
                file.format, file.version
            )));
        }
        if file.q != file.kernels.len() {
            return Err(SanError::Format(format!(
                "header declares q = {} but {} kernels follow",
                file.q,
                file.kernels.len()
            )));
        }
        let mut kernels = Vec::with_capacity(file.q);
        let mut sparsity = Vec::with_capacity(file.q);
        for entry in file.kernels {
            if entry.extents.len() != file.rank {
                return Err(SanError::Format(format!(
                    "kernel extents {:?} do not match rank {}",
                    entry.extents, file.rank
                )));
            }
            kernels.push(Tensor::new(entry.extents, entry.values)?);
            sparsity.push(entry.sparsity);
        }
        Self::new(kernels, file.activation, sparsity)
    }
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    rank: usize,
    q: usize,
    activation: ActivationKind,
    kernels: Vec<KernelEntry>,
}

#[derive(Serialize, Deserialize)]
struct KernelEntry {
    extents: Vec<usize>,
    sparsity: SparsityParam,
    values: Vec<f64>,
}

/// Normal initialization `w ~ N(mean, std)` from a seeded generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelInit {
    pub mean: f64,
    pub std: f64,
    pub seed: u64,
}

impl Default for KernelInit {
    fn default() -> Self {
        Self {
            mean: 0.0,
            std: 0.1,
            seed: 0,
        }
    }
}

/// Draws one square kernel of extent `m` per axis for every entry of `sizes`.
pub fn init_kernels(sizes: &[usize], rank: usize, init: &KernelInit) -> Result<Vec<Tensor>> {
    if init.std.is_nan() || init.std <= 0.0 || !init.mean.is_finite() {
        return Err(SanError::InvalidConfig(format!(
            "kernel init needs finite mean and std > 0, got N({}, {})",
            init.mean, init.std
        )));
    }
    let normal =
        Normal::new(init.mean, init.std).map_err(|e| SanError::InvalidConfig(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(init.seed);
    sizes
        .iter()
        .map(|&m| {
            let extents = vec![m; rank];
            let n = extents.iter().product();
            let values = (0..n).map(|_| normal.sample(&mut rng)).collect();
            Tensor::new(extents, values)
        })
        .collect()
}

/// Intermediate maps of one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace {
    pub s: Vec<Tensor>,
    pub alpha: Vec<Tensor>,
    pub r: Vec<Tensor>,
    pub xhat: Tensor,
}

/// Sums the decoded contributions of every kernel.
pub(crate) fn synthesize(kernels: &[Tensor], alphas: &[Tensor]) -> Result<(Vec<Tensor>, Tensor)> {
    let r = kernels
        .iter()
        .zip(alphas)
        .map(|(w, a)| adjoint_xcorr_same(a, w))
        .collect::<Result<Vec<_>>>()?;
    let mut xhat = r[0].clone();
    for ri in &r[1..] {
        xhat.add_assign(ri)?;
    }
    Ok((r, xhat))
}

pub fn forward(model: &SanModel, x: &Tensor) -> Result<ForwardTrace> {
    model.check_input(x)?;
    let mut s = Vec::with_capacity(model.q());
    let mut alpha = Vec::with_capacity(model.q());
    for (w, &p) in model.kernels.iter().zip(&model.sparsity) {
        let si = xcorr_same(x, w)?;
        alpha.push(activation::apply(model.activation, &si, p)?);
        s.push(si);
    }
    let (r, xhat) = synthesize(&model.kernels, &alpha)?;
    Ok(ForwardTrace { s, alpha, r, xhat })
}

/// Mean absolute reconstruction error.
pub fn loss(trace: &ForwardTrace, x: &Tensor) -> Result<f64> {
    mae(&trace.xhat, x)
}

/// Kernel gradients of the reconstruction loss.
///
/// The set of indices each activation selected is held fixed, so gradients
/// reach `s` only through selected entries (ReLU: `s > 0`; Identity:
/// everywhere). The MAE subgradient uses `sign(0) = 0`.
pub fn backward(model: &SanModel, x: &Tensor, trace: &ForwardTrace) -> Result<Vec<Tensor>> {
    if trace.alpha.len() != model.q() || trace.s.len() != model.q() {
        return Err(SanError::InvalidConfig(format!(
            "trace holds {} maps for a model with {} kernels",
            trace.alpha.len(),
            model.q()
        )));
    }
    let n = x.len() as f64;
    let residual = trace.xhat.sub(x)?;
    let g_xhat = residual.map(|d| {
        if d > 0.0 {
            1.0 / n
        } else if d < 0.0 {
            -1.0 / n
        } else {
            0.0
        }
    });

    let mut grads = Vec::with_capacity(model.q());
    for (w, alpha) in model.kernels.iter().zip(&trace.alpha) {
        alpha.same_shape(x)?;
        // decode: <g, adjoint(alpha, w)> = <alpha, g ⋆ w>
        let mut grad = xcorr_kernel_grad(&g_xhat, alpha, w.extents())?;
        let mut g_alpha = xcorr_same(&g_xhat, w)?;
        if model.activation != ActivationKind::Identity {
            for (g, &a) in g_alpha.values_mut().iter_mut().zip(alpha.values()) {
                if a == 0.0 {
                    *g = 0.0;
                }
            }
        }
        grad.add_assign(&xcorr_kernel_grad(x, &g_alpha, w.extents())?)?;
        grads.push(grad);
    }
    Ok(grads)
}
