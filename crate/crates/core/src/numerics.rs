//! Same-size cross-correlation, its exact adjoint, the kernel gradient, and
//! the scalar reductions used by the loss and the compression metric.
//!
//! Padding is "same": along an axis with kernel extent `m` the input is
//! padded with `(m - 1) / 2` zeros on the left and the rest on the right, so
//! even kernels carry the extra zero on the right.

use crate::error::{Result, SanError};
use crate::tensor::{check_extents, Tensor};

fn left_pad(m: usize) -> usize {
    (m - 1) / 2
}

fn check_kernel_fits(input: &[usize], kernel: &[usize]) -> Result<()> {
    check_extents(kernel)?;
    if input.len() != kernel.len() {
        return Err(SanError::RankMismatch {
            left: input.len(),
            right: kernel.len(),
        });
    }
    if kernel.iter().zip(input).any(|(k, n)| k > n) {
        return Err(SanError::KernelTooLarge {
            kernel: kernel.to_vec(),
            input: input.to_vec(),
        });
    }
    Ok(())
}

/// Range of kernel taps `j` for which `c + j - pad` lands inside `0..len`.
#[inline]
fn tap_range(c: usize, pad: usize, taps: usize, len: usize) -> (usize, usize) {
    let lo = pad.saturating_sub(c);
    let hi = taps.min(len + pad - c);
    (lo, hi)
}

/// Cross-correlation with "same" zero padding and no bias:
/// `out[t] = sum_j x[t + j - pad] * w[j]`.
pub fn xcorr_same(x: &Tensor, w: &Tensor) -> Result<Tensor> {
    check_kernel_fits(x.extents(), w.extents())?;
    let (rows, cols) = x.dims2();
    let (kr, kc) = w.dims2();
    let (pr, pc) = (left_pad(kr), left_pad(kc));
    let xv = x.values();
    let wv = w.values();
    let mut out = Tensor::zeros(x.extents())?;
    let ov = out.values_mut();
    for r in 0..rows {
        let (i_lo, i_hi) = tap_range(r, pr, kr, rows);
        for c in 0..cols {
            let (j_lo, j_hi) = tap_range(c, pc, kc, cols);
            let mut acc = 0.0;
            for i in i_lo..i_hi {
                let xrow = &xv[(r + i - pr) * cols..][..cols];
                let wrow = &wv[i * kc..][..kc];
                for j in j_lo..j_hi {
                    acc += xrow[c + j - pc] * wrow[j];
                }
            }
            ov[r * cols + c] = acc;
        }
    }
    Ok(out)
}

/// Transpose of [`xcorr_same`] with respect to its input: every entry of `a`
/// stamps an un-reversed, scaled copy of `w` centred at its own index.
/// Zero entries of `a` are skipped, so the cost scales with the number of
/// nonzeros.
pub fn adjoint_xcorr_same(a: &Tensor, w: &Tensor) -> Result<Tensor> {
    check_kernel_fits(a.extents(), w.extents())?;
    let (rows, cols) = a.dims2();
    let (kr, kc) = w.dims2();
    let (pr, pc) = (left_pad(kr), left_pad(kc));
    let wv = w.values();
    let mut out = Tensor::zeros(a.extents())?;
    let ov = out.values_mut();
    for (idx, &amp) in a.values().iter().enumerate() {
        if amp == 0.0 {
            continue;
        }
        let (r, c) = (idx / cols, idx % cols);
        let (i_lo, i_hi) = tap_range(r, pr, kr, rows);
        let (j_lo, j_hi) = tap_range(c, pc, kc, cols);
        for i in i_lo..i_hi {
            let orow = &mut ov[(r + i - pr) * cols..][..cols];
            let wrow = &wv[i * kc..][..kc];
            for j in j_lo..j_hi {
                orow[c + j - pc] += amp * wrow[j];
            }
        }
    }
    Ok(out)
}

/// Gradient of `<upstream, xcorr_same(input, w)>` with respect to `w`,
/// returned with `kernel_extents`.
pub fn xcorr_kernel_grad(
    input: &Tensor,
    upstream: &Tensor,
    kernel_extents: &[usize],
) -> Result<Tensor> {
    input.same_shape(upstream)?;
    check_kernel_fits(input.extents(), kernel_extents)?;
    let (rows, cols) = input.dims2();
    let (kr, kc) = match kernel_extents {
        [m] => (1, *m),
        [a, b] => (*a, *b),
        _ => unreachable!(),
    };
    let (pr, pc) = (left_pad(kr), left_pad(kc));
    let xv = input.values();
    let mut grad = Tensor::zeros(kernel_extents)?;
    let gv = grad.values_mut();
    for (idx, &u) in upstream.values().iter().enumerate() {
        if u == 0.0 {
            continue;
        }
        let (r, c) = (idx / cols, idx % cols);
        let (i_lo, i_hi) = tap_range(r, pr, kr, rows);
        let (j_lo, j_hi) = tap_range(c, pc, kc, cols);
        for i in i_lo..i_hi {
            let xrow = &xv[(r + i - pr) * cols..][..cols];
            let grow = &mut gv[i * kc..][..kc];
            for j in j_lo..j_hi {
                grow[j] += u * xrow[c + j - pc];
            }
        }
    }
    Ok(grad)
}

/// Mean absolute error over all entries.
pub fn mae(a: &Tensor, b: &Tensor) -> Result<f64> {
    a.same_shape(b)?;
    let total: f64 = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).abs())
        .sum();
    Ok(total / a.len() as f64)
}

/// Number of entries that are exactly nonzero.
pub fn nnz(a: &Tensor) -> usize {
    a.values().iter().filter(|&&v| v != 0.0).count()
}
