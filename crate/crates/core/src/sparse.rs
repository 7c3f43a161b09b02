//! Compressed representation: per-kernel sparse activation maps and the
//! kernels that decode them.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Result, SanError};
use crate::san::{forward, synthesize, SanModel};
use crate::tensor::{check_extents, Tensor};

const MAPS_HEADER: &str = "sanlab-sparse-maps 1";

/// Nonzero entries of an activation map as `(flat index, value)` pairs in
/// strictly increasing index order.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMap {
    extents: Vec<usize>,
    entries: Vec<(usize, f64)>,
}

impl SparseMap {
    pub fn new(extents: Vec<usize>, entries: Vec<(usize, f64)>) -> Result<Self> {
        let len = check_extents(&extents)?;
        let mut prev = None;
        for &(i, v) in &entries {
            if i >= len {
                return Err(SanError::IndexOutOfRange { index: i, len });
            }
            if prev.is_some_and(|p| i <= p) {
                return Err(SanError::Format(format!(
                    "sparse map indices must increase strictly, saw {i} after {}",
                    prev.unwrap()
                )));
            }
            if v == 0.0 || !v.is_finite() {
                return Err(SanError::Format(format!(
                    "sparse map entry {i} has non-storable value {v}"
                )));
            }
            prev = Some(i);
        }
        Ok(Self { extents, entries })
    }

    pub fn from_dense(alpha: &Tensor) -> Self {
        Self {
            extents: alpha.extents().to_vec(),
            entries: alpha
                .values()
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != 0.0)
                .map(|(i, &v)| (i, v))
                .collect(),
        }
    }

    pub fn to_dense(&self) -> Tensor {
        let mut t = Tensor::zeros(&self.extents).expect("validated extents");
        for &(i, v) in &self.entries {
            t[i] = v;
        }
        t
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }
}

pub fn encode(model: &SanModel, x: &Tensor) -> Result<Vec<SparseMap>> {
    Ok(forward(model, x)?
        .alpha
        .iter()
        .map(SparseMap::from_dense)
        .collect())
}

/// Reconstructs `x̂ = Σ adjoint(alpha_i, w_i)`; bit-identical to the `xhat`
/// of a forward pass that produced the same maps.
pub fn decode(model: &SanModel, maps: &[SparseMap]) -> Result<Tensor> {
    if maps.len() != model.q() {
        return Err(SanError::InvalidConfig(format!(
            "{} maps for a model with {} kernels",
            maps.len(),
            model.q()
        )));
    }
    let alphas: Vec<Tensor> = maps.iter().map(SparseMap::to_dense).collect();
    Ok(synthesize(model.kernels(), &alphas)?.1)
}

/// Text form:
///
/// ```text
/// sanlab-sparse-maps 1
/// maps <q>
/// map <i> extents <e0> [<e1>] entries <count>
/// <index> <value>
/// ...
/// ```
///
/// Values use the shortest decimal that parses back to the same `f64`.
pub fn maps_to_string(maps: &[SparseMap]) -> String {
    let mut out = String::new();
    writeln!(out, "{MAPS_HEADER}").unwrap();
    writeln!(out, "maps {}", maps.len()).unwrap();
    for (i, map) in maps.iter().enumerate() {
        let extents: Vec<String> = map.extents.iter().map(usize::to_string).collect();
        writeln!(
            out,
            "map {i} extents {} entries {}",
            extents.join(" "),
            map.entries.len()
        )
        .unwrap();
        for (idx, v) in &map.entries {
            writeln!(out, "{idx} {v:?}").unwrap();
        }
    }
    out
}

pub fn maps_from_str(text: &str, path: &Path) -> Result<Vec<SparseMap>> {
    let err = |line: usize, msg: String| SanError::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let mut next = |what: &str| {
        lines
            .next()
            .ok_or_else(|| err(0, format!("unexpected end of file, expected {what}")))
    };
    let (ln, header) = next("header")?;
    if header != MAPS_HEADER {
        return Err(err(ln, format!("bad header {header:?}")));
    }
    let (ln, count_line) = next("map count")?;
    let count: usize = count_line
        .strip_prefix("maps ")
        .and_then(|c| c.parse().ok())
        .ok_or_else(|| err(ln, format!("expected `maps <q>`, got {count_line:?}")))?;
    let mut maps = Vec::with_capacity(count);
    for i in 0..count {
        let (ln, head) = next("map header")?;
        let tokens: Vec<&str> = head.split_whitespace().collect();
        let bad = || err(ln, format!("malformed map header {head:?}"));
        if tokens.len() < 6 || tokens[0] != "map" || tokens[2] != "extents" {
            return Err(bad());
        }
        if tokens[1].parse::<usize>().ok() != Some(i) {
            return Err(bad());
        }
        let entries_at = tokens
            .iter()
            .position(|&t| t == "entries")
            .ok_or_else(bad)?;
        let extents = tokens[3..entries_at]
            .iter()
            .map(|t| t.parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| bad())?;
        let n: usize = tokens
            .get(entries_at + 1)
            .and_then(|t| t.parse().ok())
            .ok_or_else(bad)?;
        let mut entries = Vec::with_capacity(n);
        for _ in 0..n {
            let (ln, row) = next("map entry")?;
            let mut parts = row.split_whitespace();
            let parsed = match (parts.next(), parts.next(), parts.next()) {
                (Some(a), Some(b), None) => a.parse::<usize>().ok().zip(b.parse::<f64>().ok()),
                _ => None,
            };
            entries.push(parsed.ok_or_else(|| err(ln, format!("malformed entry {row:?}")))?);
        }
        maps.push(SparseMap::new(extents, entries).map_err(|e| err(ln, e.to_string()))?);
    }
    Ok(maps)
}

pub fn write_maps(path: &Path, maps: &[SparseMap]) -> Result<()> {
    std::fs::write(path, maps_to_string(maps))?;
    Ok(())
}

pub fn read_maps(path: &Path) -> Result<Vec<SparseMap>> {
    let text = std::fs::read_to_string(path)?;
    maps_from_str(&text, path)
}
