//! `sanlab`: train, sweep and inspect sparsely activated networks.

mod commands;
mod data;
mod report;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand};
use sanlab_core::{ActivationKind, Split, TrainConfig};

use crate::data::DataArgs;

#[derive(Debug, Parser)]
#[command(name = "sanlab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train every (activation, kernel size) pair and report the best size per activation.
    Sweep(SweepArgs),
    /// Train one configuration and save its best snapshot.
    Train(TrainArgs),
    /// Evaluate a saved model on one split.
    Eval(EvalArgs),
    /// Write input, reconstruction and activation maps of one example.
    Reconstruct(ReconstructArgs),
    /// Write a model's kernels as CSV and SVG.
    ExportKernels(ExportArgs),
}

#[derive(Debug, Clone, Args)]
struct Hyper {
    /// Kernels per SAN (default: 2 for uci and mnist, else 1).
    #[arg(long)]
    q: Option<usize>,
    #[arg(long, default_value_t = 30)]
    epochs: usize,
    #[arg(long, default_value_t = 2)]
    batch: usize,
    #[arg(long, default_value_t = 0.01)]
    lr: f64,
    #[arg(long, env = "SANLAB_SEED", default_value_t = 0)]
    seed: u64,
    /// Extrema border tolerance (default: 2 for uci and mnist, else 3).
    #[arg(long)]
    border_tol: Option<usize>,
}

impl Hyper {
    fn config(&self, data: &DataArgs) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch,
            learning_rate: self.lr,
            seed: self.seed,
            border_tolerance: self
                .border_tol
                .unwrap_or(data.protocol.default_border_tolerance()),
            ..TrainConfig::default()
        }
    }

    fn q(&self, data: &DataArgs) -> usize {
        self.q.unwrap_or(data.protocol.default_q())
    }
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Comma-separated activations (default: all five).
    #[arg(long, value_delimiter = ',', value_parser = parse_activation)]
    activation: Vec<ActivationKind>,
    /// `a,b,c` or `start:end[:stride]` (default: a ladder from 1 to 250
    /// capped at the input size).
    #[arg(long, value_parser = parse_kernel_sizes)]
    kernel_sizes: Option<KernelSizes>,
    #[command(flatten)]
    hyper: Hyper,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, default_value = "sweep-out")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, value_parser = parse_activation)]
    activation: ActivationKind,
    /// Size of every kernel (a single value).
    #[arg(long, value_parser = parse_kernel_sizes)]
    kernel_sizes: KernelSizes,
    #[command(flatten)]
    hyper: Hyper,
    #[arg(long, default_value = "model.json")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value = "validation")]
    split: Split,
    #[arg(long, env = "SANLAB_SEED", default_value_t = 0)]
    seed: u64,
    /// Per-example CSV destination.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReconstructArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value = "test")]
    split: Split,
    /// Position of the example within the split.
    #[arg(long, default_value_t = 0)]
    index: usize,
    #[arg(long, env = "SANLAB_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "reconstruction")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ExportArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value = "kernels")]
    out: PathBuf,
}

#[derive(Debug, Clone)]
struct KernelSizes(Vec<usize>);

fn parse_activation(s: &str) -> Result<ActivationKind, String> {
    ActivationKind::ALL
        .into_iter()
        .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
        .ok_or_else(|| {
            let names: Vec<&str> = ActivationKind::ALL.iter().map(|k| k.name()).collect();
            format!(
                "unknown activation {s:?}, expected one of {}",
                names.join(", ")
            )
        })
}

fn parse_kernel_sizes(s: &str) -> Result<KernelSizes, String> {
    let num = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| format!("invalid kernel size {t:?}"))
    };
    let sizes = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let (start, end, stride) = match parts.as_slice() {
            [a, b] => (num(a)?, num(b)?, 1),
            [a, b, c] => (num(a)?, num(b)?, num(c)?),
            _ => return Err(format!("expected start:end[:stride], got {s:?}")),
        };
        if stride == 0 {
            return Err("stride must be >= 1".into());
        }
        (start..=end).step_by(stride).collect()
    } else {
        s.split(',')
            .filter(|t| !t.trim().is_empty())
            .map(num)
            .collect::<Result<Vec<_>, _>>()?
    };
    if sizes.is_empty() {
        return Err("the kernel size list is empty".into());
    }
    if sizes.contains(&0) {
        return Err("kernel sizes must be >= 1".into());
    }
    Ok(KernelSizes(sizes))
}

fn usage_error(kind: ErrorKind, msg: impl std::fmt::Display) -> ! {
    Cli::command().error(kind, msg).exit()
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Sweep(a) => {
            let activations = if a.activation.is_empty() {
                ActivationKind::ALL.to_vec()
            } else {
                a.activation.clone()
            };
            commands::sweep(&commands::SweepSpec {
                data: &a.data,
                activations: &activations,
                kernel_sizes: a.kernel_sizes.as_ref().map(|k| k.0.as_slice()),
                q: a.hyper.q(&a.data),
                cfg: a.hyper.config(&a.data),
                jobs: a.jobs,
                out: &a.out,
            })
        }
        Command::Train(a) => {
            let [m] = a.kernel_sizes.0[..] else {
                usage_error(
                    ErrorKind::ValueValidation,
                    "train takes a single kernel size; use --q for the number of kernels",
                )
            };
            commands::train_model(
                &a.data,
                a.activation,
                m,
                a.hyper.q(&a.data),
                &a.hyper.config(&a.data),
                &a.out,
            )
        }
        Command::Eval(a) => commands::eval(&a.data, &a.model, a.split, a.seed, a.out.as_deref()),
        Command::Reconstruct(a) => {
            commands::reconstruct(&a.data, &a.model, a.split, a.index, a.seed, &a.out)
        }
        Command::ExportKernels(a) => commands::export_kernels(&a.model, &a.out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
