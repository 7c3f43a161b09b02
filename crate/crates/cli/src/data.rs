//! Dataset resolution for every subcommand.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use sanlab_core::datasets::{
    load_csv_signal, load_manifest, load_uci_csv, mnist_protocol, physionet_protocol,
    synth_spike_train, uci_protocol, SynthConfig,
};
use sanlab_core::Corpus;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Protocol {
    /// One-channel CSV signal cut into twelve z-scored 1000-sample segments.
    Physionet,
    /// UCI epileptic seizure CSV with 178-sample rows.
    Uci,
    /// Directory holding the four MNIST IDX files.
    Mnist,
    /// CSV manifest of `path,split,label` rows.
    Manifest,
    /// Seeded synthetic spike trains; `--data` is not used.
    Synth,
}

impl Protocol {
    /// Kernels per SAN when `--q` is not given.
    pub fn default_q(self) -> usize {
        match self {
            Protocol::Uci | Protocol::Mnist => 2,
            Protocol::Physionet | Protocol::Manifest | Protocol::Synth => 1,
        }
    }

    pub fn default_border_tolerance(self) -> usize {
        match self {
            Protocol::Uci | Protocol::Mnist => 2,
            Protocol::Physionet | Protocol::Manifest | Protocol::Synth => 3,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Dataset layout.
    #[arg(long, value_enum, default_value_t = Protocol::Physionet)]
    pub protocol: Protocol,
    /// Dataset file or directory.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// MNIST images moved from the end of the training file to validation.
    #[arg(long, default_value_t = 10_000)]
    pub mnist_validation: usize,
}

pub struct Dataset {
    pub name: String,
    pub corpus: Corpus,
}

impl DataArgs {
    fn path(&self) -> Result<&Path> {
        match &self.data {
            Some(p) => Ok(p),
            None => bail!("--data is required for the {:?} protocol", self.protocol),
        }
    }

    /// Loads the corpus. `seed` drives the UCI split and the synthetic
    /// generator.
    pub fn load(&self, seed: u64) -> Result<Dataset> {
        let corpus = match self.protocol {
            Protocol::Physionet => {
                let path = self.path()?;
                let signal = load_csv_signal(path)?;
                let out = physionet_protocol(&signal, &path.display().to_string())?;
                for s in &out.dropped {
                    eprintln!(
                        "warning: segment {} has zero variance and was dropped",
                        s + 1
                    );
                }
                out.corpus
            }
            Protocol::Uci => uci_protocol(&load_uci_csv(self.path()?)?, seed)?,
            Protocol::Mnist => mnist_protocol(self.path()?, self.mnist_validation)?,
            Protocol::Manifest => load_manifest(self.path()?)?,
            Protocol::Synth => {
                synth_spike_train(&SynthConfig {
                    seed,
                    ..SynthConfig::default()
                })?
                .corpus
            }
        };
        if corpus.is_empty() {
            bail!("dataset is empty");
        }
        let name = match (&self.data, self.protocol) {
            (_, Protocol::Synth) | (None, _) => format!("{:?}", self.protocol).to_lowercase(),
            (Some(p), _) => p
                .file_stem()
                .or_else(|| p.file_name())
                .map(|s| s.to_string_lossy().into_owned())
                .with_context(|| format!("cannot name dataset {}", p.display()))?,
        };
        Ok(Dataset { name, corpus })
    }
}
