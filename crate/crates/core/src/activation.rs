//! Sparse activation functions mapping a similarity map `s` to an
//! activation map `alpha`, and the rules tying each sparsity parameter to
//! the kernel size.
//!
//! Every selection keeps the signed value of `s` at the chosen indices and
//! writes exact zeros elsewhere. Ties always resolve to the lowest flat
//! index.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SanError};
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ActivationKind {
    Identity,
    Relu,
    TopKAbsolutes,
    ExtremaPoolIndices,
    Extrema,
}

impl ActivationKind {
    pub const ALL: [ActivationKind; 5] = [
        ActivationKind::Identity,
        ActivationKind::Relu,
        ActivationKind::TopKAbsolutes,
        ActivationKind::ExtremaPoolIndices,
        ActivationKind::Extrema,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ActivationKind::Identity => "Identity",
            ActivationKind::Relu => "Relu",
            ActivationKind::TopKAbsolutes => "TopKAbsolutes",
            ActivationKind::ExtremaPoolIndices => "ExtremaPoolIndices",
            ActivationKind::Extrema => "Extrema",
        }
    }
}

impl fmt::Display for ActivationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ActivationKind {
    type Err = SanError;

    fn from_str(s: &str) -> Result<Self> {
        ActivationKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| SanError::Format(format!("unknown activation kind {s:?}")))
    }
}

/// Per-kernel sparsity parameter `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum SparsityParam {
    None,
    K { k: usize },
    PoolSize { m: usize },
    MinDistance { med: usize, border_tolerance: usize },
}

/// Derives the sparsity parameter for a kernel of extent `m` per axis.
///
/// Top-k keeps `prod(floor(n_axis / m))` entries so that it emits the same
/// number of activations as pooling with window `m`; extrema use `med = m`.
pub fn derive_sparsity_param(
    kind: ActivationKind,
    m: usize,
    input_extents: &[usize],
    border_tolerance: usize,
) -> Result<SparsityParam> {
    if m == 0 {
        return Err(SanError::InvalidSparsity("kernel size must be >= 1".into()));
    }
    match kind {
        ActivationKind::Identity | ActivationKind::Relu => Ok(SparsityParam::None),
        ActivationKind::TopKAbsolutes => {
            let k: usize = input_extents.iter().map(|n| n / m).product();
            if k == 0 {
                return Err(SanError::InvalidSparsity(format!(
                    "kernel size {m} leaves no top-k budget for extents {input_extents:?}"
                )));
            }
            Ok(SparsityParam::K { k })
        }
        ActivationKind::ExtremaPoolIndices => {
            if input_extents.iter().any(|&n| n < m) {
                return Err(SanError::InvalidSparsity(format!(
                    "pool size {m} exceeds extents {input_extents:?}"
                )));
            }
            Ok(SparsityParam::PoolSize { m })
        }
        ActivationKind::Extrema => Ok(SparsityParam::MinDistance {
            med: m,
            border_tolerance,
        }),
    }
}

/// Applies `kind` with parameter `param` to a similarity map.
pub fn apply(kind: ActivationKind, s: &Tensor, param: SparsityParam) -> Result<Tensor> {
    match (kind, param) {
        (ActivationKind::Identity, SparsityParam::None) => Ok(identity(s)),
        (ActivationKind::Relu, SparsityParam::None) => Ok(relu(s)),
        (ActivationKind::TopKAbsolutes, SparsityParam::K { k }) => topk_absolutes(s, k),
        (ActivationKind::ExtremaPoolIndices, SparsityParam::PoolSize { m }) => {
            extrema_pool_indices(s, m)
        }
        (
            ActivationKind::Extrema,
            SparsityParam::MinDistance {
                med,
                border_tolerance,
            },
        ) => extrema(s, med, border_tolerance),
        (kind, param) => Err(SanError::InvalidSparsity(format!(
            "{param:?} does not parameterize {kind}"
        ))),
    }
}

pub fn identity(s: &Tensor) -> Tensor {
    s.clone()
}

pub fn relu(s: &Tensor) -> Tensor {
    s.map(|v| if v > 0.0 { v } else { 0.0 })
}

/// Descending `|s|`, then ascending index.
#[inline]
fn by_magnitude(values: &[f64], a: usize, b: usize) -> Ordering {
    values[b].abs().total_cmp(&values[a].abs()).then(a.cmp(&b))
}

fn keep_indices(s: &Tensor, indices: impl IntoIterator<Item = usize>) -> Tensor {
    let mut alpha = Tensor::zeros(s.extents()).expect("extents already validated");
    for i in indices {
        alpha[i] = s[i];
    }
    alpha
}

/// Keeps the `k` entries of largest magnitude.
pub fn topk_absolutes(s: &Tensor, k: usize) -> Result<Tensor> {
    let n = s.len();
    if k == 0 || k > n {
        return Err(SanError::InvalidSparsity(format!(
            "k = {k} outside 1..={n}"
        )));
    }
    let values = s.values();
    let mut order: Vec<usize> = (0..n).collect();
    if k < n {
        order.select_nth_unstable_by(k - 1, |&a, &b| by_magnitude(values, a, b));
    }
    Ok(keep_indices(s, order[..k].iter().copied()))
}

/// Max-pools `|s|` over non-overlapping `m`-wide windows (per axis) and
/// unpools the signed winners. A trailing remainder shorter than `m` is
/// dropped.
pub fn extrema_pool_indices(s: &Tensor, m: usize) -> Result<Tensor> {
    let (rows, cols) = s.dims2();
    let wr = if s.rank() == 2 { m } else { 1 };
    if m == 0 || wr > rows || m > cols {
        return Err(SanError::InvalidSparsity(format!(
            "pool size {m} invalid for extents {:?}",
            s.extents()
        )));
    }
    let values = s.values();
    let mut winners = Vec::with_capacity((rows / wr) * (cols / m));
    for br in 0..rows / wr {
        for bc in 0..cols / m {
            let mut best = (br * wr) * cols + bc * m;
            for r in br * wr..(br + 1) * wr {
                for c in bc * m..(bc + 1) * m {
                    let idx = r * cols + c;
                    if values[idx].abs() > values[best].abs() {
                        best = idx;
                    }
                }
            }
            winners.push(best);
        }
    }
    Ok(keep_indices(s, winners))
}

/// Peak/valley detection with greedy minimum-distance suppression.
///
/// Candidates in 1D are the interior sign changes of the discrete derivative
/// (a plateau contributes its last sample for peaks and its first for
/// valleys), plus samples closer than `border_tolerance` to either end that
/// are strict extrema of the window of that radius around them. In 2D a
/// candidate is a strict extremum of its in-bounds 3x3 neighbourhood.
///
/// Candidates are visited by descending `|s|`; one is accepted when no
/// accepted index lies within (Chebyshev) distance `med`.
pub fn extrema(s: &Tensor, med: usize, border_tolerance: usize) -> Result<Tensor> {
    if med == 0 {
        return Err(SanError::InvalidSparsity("med must be >= 1".into()));
    }
    let mut candidates = match s.rank() {
        1 => candidates_1d(s.values(), border_tolerance),
        _ => {
            let (rows, cols) = s.dims2();
            candidates_2d(s.values(), rows, cols)
        }
    };
    let values = s.values();
    candidates.sort_by(|&a, &b| by_magnitude(values, a, b));

    let (rows, cols) = s.dims2();
    let mut blocked = vec![false; s.len()];
    let mut accepted = Vec::new();
    for idx in candidates {
        if blocked[idx] {
            continue;
        }
        accepted.push(idx);
        let (r, c) = (idx / cols, idx % cols);
        let (r_lo, r_hi) = (r.saturating_sub(med), (r + med).min(rows - 1));
        let (c_lo, c_hi) = (c.saturating_sub(med), (c + med).min(cols - 1));
        for rr in r_lo..=r_hi {
            blocked[rr * cols + c_lo..=rr * cols + c_hi].fill(true);
        }
    }
    Ok(keep_indices(s, accepted))
}

fn candidates_1d(s: &[f64], border_tolerance: usize) -> Vec<usize> {
    let n = s.len();
    let mut out = Vec::new();
    for t in 0..n {
        let interior = t > 0 && t + 1 < n && {
            let back = s[t] - s[t - 1];
            let fwd = s[t + 1] - s[t];
            (back >= 0.0 && fwd < 0.0) || (back < 0.0 && fwd >= 0.0)
        };
        let near_edge = t < border_tolerance || n - 1 - t < border_tolerance;
        if interior || (near_edge && is_window_extremum(s, t, border_tolerance)) {
            out.push(t);
        }
    }
    out
}

fn is_window_extremum(s: &[f64], t: usize, radius: usize) -> bool {
    let lo = t.saturating_sub(radius);
    let hi = (t + radius).min(s.len() - 1);
    let mut others = (lo..=hi).filter(|&u| u != t);
    let v = s[t];
    others.clone().all(|u| v > s[u]) || others.all(|u| v < s[u])
}

fn candidates_2d(s: &[f64], rows: usize, cols: usize) -> Vec<usize> {
    let mut out = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let v = s[r * cols + c];
            let (mut above, mut below) = (true, true);
            for rr in r.saturating_sub(1)..=(r + 1).min(rows - 1) {
                for cc in c.saturating_sub(1)..=(c + 1).min(cols - 1) {
                    if rr == r && cc == c {
                        continue;
                    }
                    let u = s[rr * cols + cc];
                    above &= v > u;
                    below &= v < u;
                }
            }
            if (above || below) && (rows > 1 || cols > 1) {
                out.push(r * cols + c);
            }
        }
    }
    out
}
