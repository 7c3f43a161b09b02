use std::path::Path;

use crate::datasets::{shuffled_splits, Corpus, Split};
use crate::error::{Result, SanError};
use crate::tensor::Tensor;

pub const PHYSIONET_SEGMENTS: usize = 12;
pub const PHYSIONET_SEGMENT_LEN: usize = 1000;
pub const UCI_ROW_LEN: usize = 178;

/// Parses one real number per line, or a single comma-separated row.
/// Blank lines are ignored.
pub fn parse_signal(text: &str, path: &Path) -> Result<Tensor> {
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        for token in line.split(',') {
            let token = token.trim();
            if token.is_empty() {
                continue;
            }
            let v: f64 = token.parse().map_err(|_| SanError::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                msg: format!("cannot parse {token:?} as a number"),
            })?;
            values.push(v);
        }
    }
    if values.is_empty() {
        return Err(SanError::EmptyDataset(format!(
            "{} holds no samples",
            path.display()
        )));
    }
    Tensor::from_vec(values)
}

pub fn load_csv_signal(path: &Path) -> Result<Tensor> {
    let text = std::fs::read_to_string(path)?;
    parse_signal(&text, path)
}

/// Subtracts the mean and divides by the population standard deviation.
/// Returns `None` for a constant signal.
pub fn z_score(values: &[f64]) -> Option<Vec<f64>> {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    if std.is_nan() || std <= 0.0 {
        return None;
    }
    Some(values.iter().map(|v| (v - mean) / std).collect())
}

#[derive(Debug, Clone)]
pub struct PhysionetCorpus {
    pub corpus: Corpus,
    /// Zero-based positions (0..12) of segments dropped for zero variance.
    pub dropped: Vec<usize>,
}

/// Cuts the first 12000 samples into twelve 1000-sample segments, assigns
/// 6/2/4 of them to train/validation/test in order, and z-scores each.
pub fn physionet_protocol(signal: &Tensor, provenance: &str) -> Result<PhysionetCorpus> {
    let needed = PHYSIONET_SEGMENTS * PHYSIONET_SEGMENT_LEN;
    if signal.rank() != 1 {
        return Err(SanError::RankMismatch {
            left: 1,
            right: signal.rank(),
        });
    }
    if signal.len() < needed {
        return Err(SanError::TooShort {
            len: signal.len(),
            needed,
        });
    }
    let mut examples = Vec::new();
    let mut splits = Vec::new();
    let mut dropped = Vec::new();
    for (i, seg) in signal.values()[..needed]
        .chunks(PHYSIONET_SEGMENT_LEN)
        .enumerate()
    {
        let split = match i {
            0..=5 => Split::Train,
            6..=7 => Split::Validation,
            _ => Split::Test,
        };
        match z_score(seg) {
            Some(z) => {
                examples.push(Tensor::from_vec(z)?);
                splits.push(split);
            }
            None => dropped.push(i),
        }
    }
    Ok(PhysionetCorpus {
        corpus: Corpus::new(examples, vec![], splits, provenance)?,
        dropped,
    })
}

/// Merged three-class labelling of the five original recording classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UciClass {
    Epilepsy = 0,
    Tumor = 1,
    Eyes = 2,
}

impl UciClass {
    pub fn from_original(label: u32) -> Option<Self> {
        match label {
            1 => Some(UciClass::Epilepsy),
            2 | 3 => Some(UciClass::Tumor),
            4 | 5 => Some(UciClass::Eyes),
            _ => None,
        }
    }
}

/// Reads the epileptic-seizure CSV export: an optional header, an optional
/// leading row-id column, 178 samples, and a trailing label in 1..=5.
pub fn load_uci_csv(path: &Path) -> Result<Vec<(Vec<f64>, u32)>> {
    let text = std::fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line
            .split(',')
            .map(|f| f.trim().trim_matches('"'))
            .collect();
        let perr = |msg: String| SanError::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            msg,
        };
        let body = match fields.len() {
            n if n == UCI_ROW_LEN + 2 => &fields[1..],
            n if n == UCI_ROW_LEN + 1 => &fields[..],
            n => {
                return Err(perr(format!(
                    "expected {} or {} fields, got {n}",
                    UCI_ROW_LEN + 1,
                    UCI_ROW_LEN + 2
                )))
            }
        };
        let parsed: Option<Vec<f64>> = body[..UCI_ROW_LEN].iter().map(|f| f.parse().ok()).collect();
        let label = body[UCI_ROW_LEN].parse::<u32>().ok();
        match (parsed, label) {
            (Some(v), Some(l)) => rows.push((v, l)),
            _ if i == 0 => continue, // header
            _ => return Err(perr("unparsable row".into())),
        }
    }
    if rows.is_empty() {
        return Err(SanError::EmptyDataset(path.display().to_string()));
    }
    Ok(rows)
}

/// Merges classes, scales every value by the global min and max into
/// `[0, 1]`, and splits 76/12/12 by seeded shuffle.
pub fn uci_protocol(rows: &[(Vec<f64>, u32)], seed: u64) -> Result<Corpus> {
    if rows.is_empty() {
        return Err(SanError::EmptyDataset("no UCI rows".into()));
    }
    let mut labels = Vec::with_capacity(rows.len());
    for (values, label) in rows {
        if values.len() != UCI_ROW_LEN {
            return Err(SanError::Format(format!(
                "UCI rows must hold {UCI_ROW_LEN} samples, got {}",
                values.len()
            )));
        }
        let class = UciClass::from_original(*label)
            .ok_or_else(|| SanError::Format(format!("unknown UCI label {label}")))?;
        labels.push(class as usize);
    }
    let all = rows.iter().flat_map(|(v, _)| v.iter().copied());
    let (lo, hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if hi <= lo {
        return Err(SanError::Format("UCI corpus has no dynamic range".into()));
    }
    let examples = rows
        .iter()
        .map(|(v, _)| Tensor::from_vec(v.iter().map(|x| (x - lo) / (hi - lo)).collect()))
        .collect::<Result<Vec<_>>>()?;
    let n = rows.len();
    let train = (0.76 * n as f64).round() as usize;
    let validation = ((0.12 * n as f64).round() as usize).min(n - train);
    let splits = shuffled_splits(n, train, validation, seed);
    Corpus::new(examples, labels, splits, "uci-epileptic-seizure")
}
