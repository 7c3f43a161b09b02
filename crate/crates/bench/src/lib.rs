//! Deterministic fixtures shared by the benchmarks.

use sanlab_core::{ActivationKind, KernelInit, SanModel, Tensor};

/// A quasi-periodic signal with no exact zeros.
pub fn signal(n: usize) -> Tensor {
    Tensor::from_vec(
        (0..n)
            .map(|i| {
                let t = i as f64;
                (t * 0.037).sin() + 0.5 * (t * 0.291).cos() + 1e-3
            })
            .collect(),
    )
    .expect("n >= 1")
}

pub fn image(rows: usize, cols: usize) -> Tensor {
    let values = (0..rows * cols)
        .map(|i| ((i * 37 % 256) as f64 / 255.0).powi(2))
        .collect();
    Tensor::from_rows(rows, cols, values).expect("rows, cols >= 1")
}

pub fn model(kind: ActivationKind, sizes: &[usize], input: &[usize]) -> SanModel {
    let init = KernelInit {
        seed: 7,
        ..KernelInit::default()
    };
    SanModel::initialized(kind, sizes, input, &init, 3).expect("valid benchmark model")
}
