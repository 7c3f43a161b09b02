//! Reference implementations used as independent oracles by the
//! integration tests. Nothing here calls into the code paths it checks
//! except `forward`/`loss`, which the finite-difference oracle treats as a
//! black box.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sanlab_core::{forward, loss, ActivationKind, SanModel, SparsityParam, Tensor};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_tensor(rng: &mut ChaCha8Rng, extents: &[usize]) -> Tensor {
    let n = extents.iter().product();
    Tensor::new(
        extents.to_vec(),
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect(),
    )
    .unwrap()
}

/// Random values bounded away from zero, so every entry has nonzero support.
pub fn dense_tensor(rng: &mut ChaCha8Rng, extents: &[usize]) -> Tensor {
    let mut t = random_tensor(rng, extents);
    for v in t.values_mut() {
        *v = v.signum() * (0.05 + v.abs());
    }
    t
}

/// Direct summation of the padded cross-correlation, written per output
/// index with explicit bounds checks.
pub fn naive_xcorr(x: &Tensor, w: &Tensor) -> Tensor {
    let (rows, cols) = dims(x);
    let (kr, kc) = dims(w);
    let (pr, pc) = ((kr - 1) / 2, (kc - 1) / 2);
    let mut out = vec![0.0; rows * cols];
    for r in 0..rows as isize {
        for c in 0..cols as isize {
            let mut acc = 0.0;
            for i in 0..kr as isize {
                for j in 0..kc as isize {
                    let (u, v) = (r + i - pr as isize, c + j - pc as isize);
                    if u >= 0 && v >= 0 && u < rows as isize && v < cols as isize {
                        acc += x.values()[u as usize * cols + v as usize]
                            * w.values()[i as usize * kc + j as usize];
                    }
                }
            }
            out[r as usize * cols + c as usize] = acc;
        }
    }
    Tensor::new(x.extents().to_vec(), out).unwrap()
}

fn dims(t: &Tensor) -> (usize, usize) {
    match t.extents() {
        [n] => (1, *n),
        [r, c] => (*r, *c),
        _ => unreachable!(),
    }
}

/// Central finite differences of the full reconstruction loss with respect
/// to every kernel entry, flattened in kernel order.
pub fn fd_loss_gradient(model: &SanModel, x: &Tensor, h: f64) -> Vec<f64> {
    let mut grads = Vec::new();
    for k in 0..model.q() {
        for e in 0..model.kernels()[k].len() {
            let eval = |delta: f64| {
                let mut m = model.clone();
                m.kernels_mut()[k][e] += delta;
                loss(&forward(&m, x).unwrap(), x).unwrap()
            };
            grads.push((eval(h) - eval(-h)) / (2.0 * h));
        }
    }
    grads
}

/// True when perturbing any kernel entry by `±h` changes which indices the
/// activation selects or flips the sign of any residual `x̂ - x`; the loss is
/// then not smooth across the finite-difference stencil.
pub fn stencil_crosses_kink(model: &SanModel, x: &Tensor, h: f64) -> bool {
    let signature = |m: &SanModel| {
        let trace = forward(m, x).unwrap();
        let support: Vec<bool> = trace
            .alpha
            .iter()
            .flat_map(|a| a.values().iter().map(|&v| v != 0.0).collect::<Vec<_>>())
            .collect();
        let relu_mask: Vec<bool> = trace
            .s
            .iter()
            .flat_map(|s| s.values().iter().map(|&v| v > 0.0).collect::<Vec<_>>())
            .collect();
        let signs: Vec<i8> = trace
            .xhat
            .values()
            .iter()
            .zip(x.values())
            .map(|(a, b)| (a - b).partial_cmp(&0.0).unwrap() as i8)
            .collect();
        (support, relu_mask, signs)
    };
    let base = signature(model);
    // an exactly-zero residual sits on the kink itself
    if base.2.contains(&0) {
        return true;
    }
    for k in 0..model.q() {
        for e in 0..model.kernels()[k].len() {
            for delta in [h, -h] {
                let mut m = model.clone();
                m.kernels_mut()[k][e] += delta;
                if signature(&m) != base {
                    return true;
                }
            }
        }
    }
    false
}

/// ‖a - b‖ / max(‖a‖, ‖b‖), or the absolute difference when both vanish.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    let scale = na.max(nb);
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// Brute-force extrema: enumerate candidates by direct neighbour comparison,
/// then repeatedly take the largest remaining `|s|` (lowest index on ties)
/// and delete every candidate within distance `med` of it.
pub fn extrema_oracle(s: &[f64], med: usize, border: usize) -> Vec<f64> {
    let n = s.len();
    let mut remaining: Vec<usize> = (0..n)
        .filter(|&t| {
            let interior = t >= 1 && t + 1 < n && {
                let peak = s[t] >= s[t - 1] && s[t] > s[t + 1];
                let valley = s[t] < s[t - 1] && s[t] <= s[t + 1];
                peak || valley
            };
            let edge = t < border || t + border >= n;
            let edge_ok = edge && {
                let lo = t.saturating_sub(border);
                let hi = (t + border).min(n - 1);
                let nb: Vec<f64> = (lo..=hi).filter(|&u| u != t).map(|u| s[u]).collect();
                nb.iter().all(|&v| s[t] > v) || nb.iter().all(|&v| s[t] < v)
            };
            interior || edge_ok
        })
        .collect();
    let mut out = vec![0.0; n];
    while !remaining.is_empty() {
        let mut best = remaining[0];
        for &c in &remaining {
            if s[c].abs() > s[best].abs() {
                best = c;
            }
        }
        out[best] = s[best];
        remaining.retain(|&c| c.abs_diff(best) > med);
    }
    out
}

/// Random activation-consistent SAN with `q` kernels of odd or even size.
pub fn random_model(
    rng: &mut ChaCha8Rng,
    kind: ActivationKind,
    sizes: &[usize],
    input: &[usize],
) -> SanModel {
    let kernels: Vec<Tensor> = sizes
        .iter()
        .map(|&m| random_tensor(rng, &vec![m; input.len()]))
        .collect();
    let sparsity = sizes
        .iter()
        .map(|&m| match kind {
            ActivationKind::Identity | ActivationKind::Relu => SparsityParam::None,
            ActivationKind::TopKAbsolutes => SparsityParam::K {
                k: input.iter().map(|n| n / m).product::<usize>().max(1),
            },
            ActivationKind::ExtremaPoolIndices => SparsityParam::PoolSize { m },
            ActivationKind::Extrema => SparsityParam::MinDistance {
                med: m,
                border_tolerance: rng.random_range(0..3),
            },
        })
        .collect();
    SanModel::new(kernels, kind, sparsity).unwrap()
}
