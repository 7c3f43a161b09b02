//! Subcommand implementations.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use sanlab_core::phi::evaluate;
use sanlab_core::{
    forward, select_model, train, ActivationKind, Candidate, PhiAggregate, SanModel, Split, Tensor,
    TrainConfig, TrainOutcome,
};

use crate::data::{DataArgs, Dataset};
use crate::report::{example_rows, kernels_csv, tensor_csv, Row, HEADER};
use crate::svg::{heatmap_row, kernel_grid, line_panels, Series};

pub fn input_extents(ds: &Dataset) -> Result<Vec<usize>> {
    let first = ds.corpus.examples[0].extents().to_vec();
    if let Some(x) = ds.corpus.examples.iter().find(|x| x.extents() != first) {
        bail!(
            "examples must share one shape, found {:?} and {:?}",
            first,
            x.extents()
        );
    }
    Ok(first)
}

fn kernel_size(model: &SanModel) -> usize {
    model.kernels()[0].extents()[0]
}

fn split_or_fallback(ds: &Dataset, preferred: Split, fallback: Split) -> (Split, Vec<Tensor>) {
    let xs = ds.corpus.examples_in(preferred);
    if xs.is_empty() {
        (fallback, ds.corpus.examples_in(fallback))
    } else {
        (preferred, xs)
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

pub fn train_one(
    ds: &Dataset,
    kind: ActivationKind,
    m: usize,
    q: usize,
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    let extents = input_extents(ds)?;
    let model = SanModel::initialized(
        kind,
        &vec![m; q],
        &extents,
        &cfg.kernel_init(),
        cfg.border_tolerance,
    )?;
    let train_set = ds.corpus.examples_in(Split::Train);
    if train_set.is_empty() {
        bail!("dataset {} has no training examples", ds.name);
    }
    Ok(train(
        &model,
        &train_set,
        &ds.corpus.examples_in(Split::Validation),
        cfg,
    )?)
}

fn history_rows(ds: &Dataset, kind: ActivationKind, m: usize, outcome: &TrainOutcome) -> String {
    outcome
        .history
        .iter()
        .map(|h| {
            Row {
                dataset: &ds.name,
                activation: kind.name(),
                m,
                epoch: h.epoch,
                split: Split::Validation.name(),
            }
            .aggregate(&h.validation)
        })
        .collect()
}

/// Kernel sizes swept when none are given, capped at the smallest input
/// extent.
pub const DEFAULT_LADDER: [usize; 13] = [1, 2, 3, 5, 8, 12, 19, 30, 47, 74, 117, 184, 250];

pub struct SweepSpec<'a> {
    pub data: &'a DataArgs,
    pub activations: &'a [ActivationKind],
    pub kernel_sizes: Option<&'a [usize]>,
    pub q: usize,
    pub cfg: TrainConfig,
    pub jobs: usize,
    pub out: &'a Path,
}

struct Cell {
    model: SanModel,
    test_split: Split,
    test: PhiAggregate,
}

/// Trains one SAN per (activation, m), selects the best m per activation on
/// validation φ̄ and reports it on the test split. Every finished cell writes
/// its own history and model files; the report gains one row per activation
/// as soon as that activation's cells are done.
pub fn sweep(spec: &SweepSpec) -> Result<()> {
    let ds = spec.data.load(spec.cfg.seed)?;
    let kernel_sizes: Vec<usize> = match spec.kernel_sizes {
        Some(k) => k.to_vec(),
        None => {
            let cap = input_extents(&ds)?.into_iter().min().unwrap_or(1);
            DEFAULT_LADDER.into_iter().filter(|&m| m <= cap).collect()
        }
    };
    for dir in ["cells", "models", "kernels"] {
        create_dir(&spec.out.join(dir))?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.jobs)
        .build()
        .context("building worker pool")?;

    let report_path = spec.out.join("report.csv");
    let mut report = fs::File::create(&report_path)
        .with_context(|| format!("creating {}", report_path.display()))?;
    writeln!(report, "{HEADER}")?;
    let mut table = String::from("| activation | m* | CR^-1 | L~ | phi |\n|---|---|---|---|---|\n");

    for &kind in spec.activations {
        let cells: Vec<Result<Candidate<Cell>>> = pool.install(|| {
            kernel_sizes
                .par_iter()
                .map(|&m| run_cell(&ds, spec, kind, m))
                .collect()
        });
        let cells = cells.into_iter().collect::<Result<Vec<_>>>()?;
        let best = select_model(cells)?;
        let row = Row {
            dataset: &ds.name,
            activation: kind.name(),
            m: best.kernel_size,
            epoch: best.epoch,
            split: best.snapshot.test_split.name(),
        }
        .aggregate(&best.snapshot.test);
        report.write_all(row.as_bytes())?;
        report.flush()?;
        table.push_str(&format!(
            "| {} | {} | {:.2} | {:.2} | {:.2} |\n",
            kind.name(),
            best.kernel_size,
            best.snapshot.test.cr_inv,
            best.snapshot.test.l_tilde,
            best.snapshot.test.phi_bar
        ));
        let kernels = best.snapshot.model.kernels();
        write(
            &spec
                .out
                .join("kernels")
                .join(format!("{}.csv", kind.name())),
            kernels_csv(kernels),
        )?;
        write(
            &spec
                .out
                .join("kernels")
                .join(format!("{}.svg", kind.name())),
            kernel_grid(kernels),
        )?;
    }
    write(&spec.out.join("table.md"), table)?;
    Ok(())
}

fn run_cell(
    ds: &Dataset,
    spec: &SweepSpec,
    kind: ActivationKind,
    m: usize,
) -> Result<Candidate<Cell>> {
    let outcome = train_one(ds, kind, m, spec.q, &spec.cfg)
        .with_context(|| format!("{} m={m}", kind.name()))?;
    let (test_split, test_set) = split_or_fallback(ds, Split::Test, Split::Validation);
    let test_set = if test_set.is_empty() {
        ds.corpus.examples_in(Split::Train)
    } else {
        test_set
    };
    let (_, test) = evaluate(&outcome.best, &test_set)?;
    let stem = format!("{}_m{m}", kind.name());
    let mut rows = format!("{HEADER}\n");
    rows.push_str(&history_rows(ds, kind, m, &outcome));
    rows.push_str(
        &Row {
            dataset: &ds.name,
            activation: kind.name(),
            m,
            epoch: outcome.best_epoch,
            split: test_split.name(),
        }
        .aggregate(&test),
    );
    write(&spec.out.join("cells").join(format!("{stem}.csv")), rows)?;
    outcome
        .best
        .save(&spec.out.join("models").join(format!("{stem}.json")))?;
    Ok(Candidate {
        kernel_size: m,
        epoch: outcome.best_epoch,
        validation: outcome.best_validation,
        snapshot: Cell {
            model: outcome.best,
            test_split,
            test,
        },
    })
}

/// Trains a single configuration, saves the best snapshot to `out` and its
/// per-epoch validation history next to it.
pub fn train_model(
    data: &DataArgs,
    kind: ActivationKind,
    m: usize,
    q: usize,
    cfg: &TrainConfig,
    out: &Path,
) -> Result<()> {
    let ds = data.load(cfg.seed)?;
    let outcome = train_one(&ds, kind, m, q, cfg)?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    outcome.best.save(out)?;
    let history = history_path(out);
    write(
        &history,
        format!("{HEADER}\n{}", history_rows(&ds, kind, m, &outcome)),
    )?;
    println!(
        "best epoch {} validation phi_bar {} (model {}, history {})",
        outcome.best_epoch,
        outcome.best_validation.phi_bar,
        out.display(),
        history.display()
    );
    Ok(())
}

pub fn history_path(model: &Path) -> PathBuf {
    model.with_extension("history.csv")
}

/// Prints the aggregate row for `split` and optionally writes per-example
/// rows.
pub fn eval(
    data: &DataArgs,
    model_path: &Path,
    split: Split,
    seed: u64,
    out: Option<&Path>,
) -> Result<()> {
    let model = SanModel::load(model_path)?;
    let ds = data.load(seed)?;
    let examples = ds.corpus.examples_in(split);
    if examples.is_empty() {
        bail!("dataset {} has no {split} examples", ds.name);
    }
    let (reports, agg) = evaluate(&model, &examples)?;
    if let Some(path) = out {
        write(path, example_rows(&reports))?;
    }
    print!(
        "{HEADER}\n{}",
        Row {
            dataset: &ds.name,
            activation: model.activation().name(),
            m: kernel_size(&model),
            epoch: 0,
            split: split.name(),
        }
        .aggregate(&agg)
    );
    Ok(())
}

/// Writes `x`, `x̂`, per-kernel `α` and `r` as CSV plus an overview figure.
pub fn reconstruct(
    data: &DataArgs,
    model_path: &Path,
    split: Split,
    index: usize,
    seed: u64,
    out: &Path,
) -> Result<()> {
    let model = SanModel::load(model_path)?;
    let ds = data.load(seed)?;
    let examples = ds.corpus.examples_in(split);
    let Some(x) = examples.get(index) else {
        bail!(
            "{split} split of {} holds {} examples, index {index} is out of range",
            ds.name,
            examples.len()
        );
    };
    let trace = forward(&model, x)?;
    create_dir(out)?;
    write(&out.join("x.csv"), tensor_csv(x))?;
    write(&out.join("xhat.csv"), tensor_csv(&trace.xhat))?;
    for (k, (a, r)) in trace.alpha.iter().zip(&trace.r).enumerate() {
        write(&out.join(format!("alpha_{k}.csv")), tensor_csv(a))?;
        write(&out.join(format!("r_{k}.csv")), tensor_csv(r))?;
    }
    let svg = if x.rank() == 1 {
        let titles: Vec<String> = (0..model.q()).map(|k| format!("kernel {k}")).collect();
        let mut panels = vec![(
            "input and reconstruction",
            vec![
                Series {
                    label: "x",
                    values: x.values(),
                },
                Series {
                    label: "x hat",
                    values: trace.xhat.values(),
                },
            ],
        )];
        for (k, title) in titles.iter().enumerate() {
            panels.push((
                title.as_str(),
                vec![
                    Series {
                        label: "alpha",
                        values: trace.alpha[k].values(),
                    },
                    Series {
                        label: "r",
                        values: trace.r[k].values(),
                    },
                ],
            ));
        }
        line_panels(&panels)
    } else {
        let titles: Vec<(String, String)> = (0..model.q())
            .map(|k| (format!("alpha {k}"), format!("r {k}")))
            .collect();
        let mut panels: Vec<(&str, &Tensor)> = vec![("x", x), ("x hat", &trace.xhat)];
        for (k, (ta, tr)) in titles.iter().enumerate() {
            panels.push((ta, &trace.alpha[k]));
            panels.push((tr, &trace.r[k]));
        }
        heatmap_row(&panels)
    };
    write(&out.join("reconstruction.svg"), svg)?;
    Ok(())
}

pub fn export_kernels(model_path: &Path, out: &Path) -> Result<()> {
    let model = SanModel::load(model_path)?;
    create_dir(out)?;
    write(&out.join("kernels.csv"), kernels_csv(model.kernels()))?;
    write(&out.join("kernels.svg"), kernel_grid(model.kernels()))?;
    Ok(())
}
