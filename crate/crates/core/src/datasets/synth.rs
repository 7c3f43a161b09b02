//! Synthetic spike trains: a known bump stamped at well-separated random
//! positions, plus Gaussian noise. The generator bump is the ground truth a
//! trained kernel should recover.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::datasets::{Corpus, Split};
use crate::error::{Result, SanError};
use crate::numerics::adjoint_xcorr_same;
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub length: usize,
    pub bump_width: usize,
    /// Bumps per example.
    pub count: usize,
    /// Minimum distance between bump positions; must be >= `bump_width`.
    pub separation: usize,
    pub noise_std: f64,
    /// Peak heights of the stamped bumps, drawn uniformly from this range
    /// and given a random sign.
    pub amplitude: (f64, f64),
    pub train: usize,
    pub validation: usize,
    pub test: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            length: 400,
            bump_width: 15,
            count: 9,
            separation: 40,
            noise_std: 0.05,
            amplitude: (1.0, 2.0),
            train: 16,
            validation: 4,
            test: 4,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub corpus: Corpus,
    /// Unit-norm generator bump.
    pub bump: Tensor,
    /// Spike indices per example; the decode of a unit spike at `t`
    /// centres the bump on `t`.
    pub spikes: Vec<Vec<usize>>,
    /// Clean (noise-free) signals.
    pub clean: Vec<Tensor>,
}

/// A smooth, asymmetric, unit-norm bump of `width` samples.
pub fn smooth_bump(width: usize) -> Tensor {
    let raw: Vec<f64> = (0..width)
        .map(|j| {
            let u = (j as f64 + 0.5) / width as f64;
            (std::f64::consts::PI * u).sin() * (-1.5 * u).exp()
        })
        .collect();
    let t = Tensor::from_vec(raw).expect("width >= 1");
    let norm = t.norm();
    t.scale(1.0 / norm)
}

pub fn synth_spike_train(cfg: &SynthConfig) -> Result<SynthCorpus> {
    let m = cfg.bump_width;
    if m == 0 || m > cfg.length {
        return Err(SanError::InvalidConfig(format!(
            "bump width {m} must be in 1..={}",
            cfg.length
        )));
    }
    if cfg.separation < m {
        return Err(SanError::InvalidConfig(format!(
            "separation {} is smaller than the bump width {m}",
            cfg.separation
        )));
    }
    let needed = cfg.count.saturating_sub(1) * cfg.separation;
    let room = cfg.length - m;
    if needed > room {
        return Err(SanError::InvalidConfig(format!(
            "cannot place {} bumps {} apart in {} samples",
            cfg.count, cfg.separation, cfg.length
        )));
    }
    if cfg.noise_std.is_nan()
        || cfg.noise_std < 0.0
        || cfg.amplitude.0.is_nan()
        || cfg.amplitude.0 > cfg.amplitude.1
    {
        return Err(SanError::InvalidConfig(
            "bad noise or amplitude range".into(),
        ));
    }
    let slack = room - needed;
    let pad = (m - 1) / 2;
    let bump = smooth_bump(m);
    let bump_peak = bump.values().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let noise = Normal::new(0.0, cfg.noise_std.max(f64::MIN_POSITIVE))
        .map_err(|e| SanError::InvalidConfig(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let total = cfg.train + cfg.validation + cfg.test;
    let mut examples = Vec::with_capacity(total);
    let mut clean = Vec::with_capacity(total);
    let mut spikes = Vec::with_capacity(total);
    for _ in 0..total {
        let mut offsets: Vec<usize> = (0..cfg.count)
            .map(|_| rng.random_range(0..=slack))
            .collect();
        offsets.sort_unstable();
        let positions: Vec<usize> = offsets
            .iter()
            .enumerate()
            .map(|(i, o)| pad + o + i * cfg.separation)
            .collect();
        let mut train = Tensor::zeros(&[cfg.length])?;
        for &t in &positions {
            let magnitude = rng.random_range(cfg.amplitude.0..=cfg.amplitude.1);
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            train[t] = sign * magnitude / bump_peak;
        }
        let x = adjoint_xcorr_same(&train, &bump)?;
        let mut noisy = x.clone();
        if cfg.noise_std > 0.0 {
            for v in noisy.values_mut() {
                *v += noise.sample(&mut rng);
            }
        }
        clean.push(x);
        examples.push(noisy);
        spikes.push(positions);
    }
    let splits = std::iter::repeat_n(Split::Train, cfg.train)
        .chain(std::iter::repeat_n(Split::Validation, cfg.validation))
        .chain(std::iter::repeat_n(Split::Test, cfg.test))
        .collect();
    Ok(SynthCorpus {
        corpus: Corpus::new(examples, vec![], splits, "synthetic-spike-train")?,
        bump,
        spikes,
        clean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn argmax_abs(v: &[f64]) -> usize {
        (0..v.len())
            .max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs()).then(b.cmp(&a)))
            .unwrap()
    }

    #[test]
    fn empty_noise_free_is_zero() {
        let cfg = SynthConfig {
            count: 0,
            noise_std: 0.0,
            ..SynthConfig::default()
        };
        let s = synth_spike_train(&cfg).unwrap();
        for x in &s.corpus.examples {
            assert!(x.values().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn single_bump_lands_on_its_stamp() {
        let cfg = SynthConfig {
            count: 1,
            noise_std: 0.0,
            ..SynthConfig::default()
        };
        let s = synth_spike_train(&cfg).unwrap();
        let pad = (cfg.bump_width - 1) / 2;
        let peak = argmax_abs(s.bump.values());
        for (x, spikes) in s.corpus.examples.iter().zip(&s.spikes) {
            assert_eq!(spikes.len(), 1);
            assert_eq!(argmax_abs(x.values()), spikes[0] - pad + peak);
        }
    }

    #[test]
    fn spikes_are_separated_and_in_range() {
        let cfg = SynthConfig::default();
        let s = synth_spike_train(&cfg).unwrap();
        let pad = (cfg.bump_width - 1) / 2;
        for sp in &s.spikes {
            assert_eq!(sp.len(), cfg.count);
            assert!(sp.windows(2).all(|w| w[1] - w[0] >= cfg.separation));
            assert!(sp[0] >= pad && sp[sp.len() - 1] - pad + cfg.bump_width <= cfg.length);
        }
        assert!((s.bump.norm() - 1.0).abs() < 1e-12);
        assert_eq!(s.corpus.count(Split::Train), cfg.train);
    }

    #[test]
    fn impossible_packing() {
        let cfg = SynthConfig {
            length: 100,
            count: 4,
            separation: 40,
            ..SynthConfig::default()
        };
        assert!(synth_spike_train(&cfg).is_err());
        let cfg = SynthConfig {
            separation: 10,
            ..SynthConfig::default()
        };
        assert!(synth_spike_train(&cfg).is_err());
    }

    #[test]
    fn seeded() {
        let a = synth_spike_train(&SynthConfig::default()).unwrap();
        let b = synth_spike_train(&SynthConfig::default()).unwrap();
        assert_eq!(a.corpus, b.corpus);
        let c = synth_spike_train(&SynthConfig {
            seed: 1,
            ..SynthConfig::default()
        })
        .unwrap();
        assert_ne!(a.corpus, c.corpus);
    }

    #[test]
    fn truth_initialized_extrema_san_reaches_noise_floor() {
        use crate::activation::{ActivationKind, SparsityParam};
        use crate::phi::normalized_loss;
        use crate::san::{forward, SanModel};

        let cfg = SynthConfig::default();
        let data = synth_spike_train(&cfg).unwrap();
        let model = SanModel::new(
            vec![data.bump.clone()],
            ActivationKind::Extrema,
            vec![SparsityParam::MinDistance {
                med: cfg.bump_width,
                border_tolerance: 3,
            }],
        )
        .unwrap();
        let expected_abs_noise = cfg.noise_std * (2.0 / std::f64::consts::PI).sqrt();
        for x in &data.corpus.examples {
            let xhat = forward(&model, x).unwrap().xhat;
            let floor = expected_abs_noise
                / crate::numerics::mae(&Tensor::zeros(x.extents()).unwrap(), x).unwrap();
            let l = normalized_loss(&xhat, x).unwrap();
            assert!(l < 2.0 * floor, "L~ {l} vs noise floor {floor}");
        }
    }
}
