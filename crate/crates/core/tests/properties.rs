mod common;

use common::{dense_tensor, extrema_oracle, naive_xcorr, random_tensor, rng};
use proptest::prelude::*;
use sanlab_core::activation::{extrema, extrema_pool_indices, relu, topk_absolutes};
use sanlab_core::{
    adjoint_xcorr_same, decode, encode, forward, nnz, xcorr_kernel_grad, xcorr_same,
    ActivationKind, KernelInit, SanModel, Tensor,
};

fn signal(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, 1..=max_len)
}

fn signal_with_kernel() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..=40).prop_flat_map(|n| {
        (
            prop::collection::vec(-5.0f64..5.0, n),
            prop::collection::vec(-5.0f64..5.0, 1..=n.min(9)),
        )
    })
}

fn image_with_kernel() -> impl Strategy<Value = (usize, usize, usize, Vec<f64>, Vec<f64>)> {
    (1usize..=10, 1usize..=10).prop_flat_map(|(r, c)| {
        let m_max = r.min(c).min(5);
        (1usize..=m_max).prop_flat_map(move |m| {
            (
                Just(r),
                Just(c),
                Just(m),
                prop::collection::vec(-5.0f64..5.0, r * c),
                prop::collection::vec(-5.0f64..5.0, m * m),
            )
        })
    })
}

fn close(a: &Tensor, b: &Tensor, tol: f64) -> bool {
    a.extents() == b.extents()
        && a.values()
            .iter()
            .zip(b.values())
            .all(|(x, y)| (x - y).abs() <= tol)
}

proptest! {
    #[test]
    fn xcorr_matches_direct_summation((x, w) in signal_with_kernel()) {
        let (x, w) = (Tensor::from_slice(&x), Tensor::from_slice(&w));
        prop_assert!(close(&xcorr_same(&x, &w).unwrap(), &naive_xcorr(&x, &w), 1e-10));
    }

    #[test]
    fn xcorr_2d_matches_direct_summation((r, c, m, x, w) in image_with_kernel()) {
        let x = Tensor::from_rows(r, c, x).unwrap();
        let w = Tensor::from_rows(m, m, w).unwrap();
        prop_assert!(close(&xcorr_same(&x, &w).unwrap(), &naive_xcorr(&x, &w), 1e-10));
    }

    #[test]
    fn xcorr_is_linear_in_signal((x, w) in signal_with_kernel(), a in -3.0f64..3.0) {
        let (x, w) = (Tensor::from_slice(&x), Tensor::from_slice(&w));
        let y = x.map(|v| v.sin());
        let lhs = xcorr_same(&x.scale(a).add(&y).unwrap(), &w).unwrap();
        let rhs = xcorr_same(&x, &w).unwrap().scale(a).add(&xcorr_same(&y, &w).unwrap()).unwrap();
        prop_assert!(close(&lhs, &rhs, 1e-9));
    }

    #[test]
    fn adjoint_identity_1d((y, w) in signal_with_kernel()) {
        let (y, w) = (Tensor::from_slice(&y), Tensor::from_slice(&w));
        let x = y.map(|v| (3.0 * v).cos());
        let lhs = xcorr_same(&x, &w).unwrap().dot(&y).unwrap();
        let rhs = x.dot(&adjoint_xcorr_same(&y, &w).unwrap()).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + x.norm() * y.norm() * w.norm()));
    }

    #[test]
    fn adjoint_identity_2d((r, c, m, y, w) in image_with_kernel()) {
        let y = Tensor::from_rows(r, c, y).unwrap();
        let w = Tensor::from_rows(m, m, w).unwrap();
        let x = y.map(|v| (3.0 * v).cos());
        let lhs = xcorr_same(&x, &w).unwrap().dot(&y).unwrap();
        let rhs = x.dot(&adjoint_xcorr_same(&y, &w).unwrap()).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + x.norm() * y.norm() * w.norm()));
    }

    #[test]
    fn kernel_grad_is_bilinear_derivative((x, w) in signal_with_kernel()) {
        // <u, xcorr(x, w)> is linear in w, so its gradient g satisfies <g, w> = <u, xcorr(x, w)>
        let (x, w) = (Tensor::from_slice(&x), Tensor::from_slice(&w));
        let u = x.map(|v| v * v - 1.0);
        let g = xcorr_kernel_grad(&x, &u, w.extents()).unwrap();
        let lhs = g.dot(&w).unwrap();
        let rhs = u.dot(&xcorr_same(&x, &w).unwrap()).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + u.norm() * x.norm() * w.norm()));
    }

    #[test]
    fn relu_keeps_positive_part(s in signal(64)) {
        let s = Tensor::from_slice(&s);
        let a = relu(&s);
        for (v, o) in a.values().iter().zip(s.values()) {
            prop_assert_eq!(*v, o.max(0.0));
        }
    }

    #[test]
    fn topk_count_and_dominance(s in signal(64), frac in 0.0f64..1.0) {
        let s = Tensor::from_slice(&s);
        let k = 1 + ((s.len() - 1) as f64 * frac) as usize;
        let a = topk_absolutes(&s, k).unwrap();
        prop_assert!(nnz(&a) <= k);
        let min_kept = kept_magnitudes(&s, &a).into_iter().fold(f64::INFINITY, f64::min);
        for i in 0..s.len() {
            if a[i] != 0.0 {
                prop_assert_eq!(a[i], s[i]);
            } else if s[i] != 0.0 && nnz(&a) == k {
                prop_assert!(s[i].abs() <= min_kept);
            }
        }
    }

    #[test]
    fn pool_count_and_window_maxima(s in signal(64), m in 1usize..=8) {
        prop_assume!(m <= s.len());
        let s = Tensor::from_slice(&s);
        let a = extrema_pool_indices(&s, m).unwrap();
        prop_assert!(nnz(&a) <= s.len() / m);
        for w in 0..s.len() / m {
            let window = &s.values()[w * m..(w + 1) * m];
            let winners: Vec<usize> = (w * m..(w + 1) * m).filter(|&i| a[i] != 0.0).collect();
            prop_assert!(winners.len() <= 1);
            let peak = window.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
            for &i in &winners {
                prop_assert_eq!(a[i], s[i]);
                prop_assert_eq!(s[i].abs(), peak);
            }
        }
        for i in (s.len() / m) * m..s.len() {
            prop_assert_eq!(a[i], 0.0);
        }
    }

    #[test]
    fn extrema_separation_and_packing(s in signal(80), med in 1usize..=6, b in 0usize..=3) {
        let s = Tensor::from_slice(&s);
        let a = extrema(&s, med, b).unwrap();
        let kept: Vec<usize> = (0..s.len()).filter(|&i| a[i] != 0.0).collect();
        for w in kept.windows(2) {
            prop_assert!(w[1] - w[0] > med);
        }
        for &i in &kept {
            prop_assert_eq!(a[i], s[i]);
        }
        prop_assert!(kept.len() <= s.len().div_ceil(med + 1));
    }

    #[test]
    fn extrema_matches_oracle(s in prop::collection::vec(-3i32..=3, 1..=30), med in 1usize..=4, b in 0usize..=3) {
        let v: Vec<f64> = s.iter().map(|&x| x as f64).collect();
        let got = extrema(&Tensor::from_slice(&v), med, b).unwrap();
        prop_assert_eq!(got.into_values(), extrema_oracle(&v, med, b));
    }

    #[test]
    fn extrema_2d_separation(seed in any::<u64>(), rows in 1usize..=12, cols in 1usize..=12, med in 1usize..=4) {
        let mut r = rng(seed);
        let s = random_tensor(&mut r, &[rows, cols]);
        let a = extrema(&s, med, 0).unwrap();
        let kept: Vec<(usize, usize)> = (0..s.len()).filter(|&i| a[i] != 0.0).map(|i| (i / cols, i % cols)).collect();
        for (i, p) in kept.iter().enumerate() {
            for q in &kept[i + 1..] {
                prop_assert!(p.0.abs_diff(q.0).max(p.1.abs_diff(q.1)) > med);
            }
        }
        prop_assert!(kept.len() <= rows.div_ceil(med + 1) * cols.div_ceil(med + 1));
    }

    #[test]
    fn sparse_round_trip_is_exact(seed in any::<u64>(), kind_idx in 0usize..5, m in 1usize..=7) {
        let kind = ActivationKind::ALL[kind_idx];
        let mut r = rng(seed);
        let x = dense_tensor(&mut r, &[48]);
        let init = KernelInit { mean: 0.0, std: 0.3, seed };
        let model = SanModel::initialized(kind, &[m, m + 1], &[48], &init, 2).unwrap();
        let maps = encode(&model, &x).unwrap();
        let y = decode(&model, &maps).unwrap();
        prop_assert_eq!(y.into_values(), forward(&model, &x).unwrap().xhat.into_values());
        let text = sanlab_core::sparse::maps_to_string(&maps);
        let back = sanlab_core::sparse::maps_from_str(&text, std::path::Path::new("mem")).unwrap();
        prop_assert_eq!(back, maps);
    }
}

fn kept_magnitudes(s: &Tensor, a: &Tensor) -> Vec<f64> {
    (0..s.len())
        .filter(|&i| a[i] != 0.0)
        .map(|i| s[i].abs())
        .collect()
}

#[test]
fn adjoint_of_impulse_is_stamped_kernel() {
    let w = Tensor::from_slice(&[1.0, 2.0, 3.0, 4.0]);
    let mut a = Tensor::zeros(&[9]).unwrap();
    a[4] = 1.0;
    let y = adjoint_xcorr_same(&a, &w).unwrap();
    // left pad 1: output 4 reads inputs 3..=6
    assert_eq!(y.values(), &[0.0, 0.0, 0.0, 1.0, 2.0, 3.0, 4.0, 0.0, 0.0]);
}
