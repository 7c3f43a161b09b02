//! Dense rank-1 and rank-2 tensors of `f64` stored in row-major order.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SanError};

/// A dense 1D signal or 2D image.
///
/// Values are stored row-major; for rank 2 the extents are `[rows, cols]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTensor", into = "RawTensor")]
pub struct Tensor {
    extents: Vec<usize>,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawTensor {
    extents: Vec<usize>,
    values: Vec<f64>,
}

impl TryFrom<RawTensor> for Tensor {
    type Error = SanError;

    fn try_from(raw: RawTensor) -> Result<Self> {
        Tensor::new(raw.extents, raw.values)
    }
}

impl From<Tensor> for RawTensor {
    fn from(t: Tensor) -> Self {
        RawTensor {
            extents: t.extents,
            values: t.values,
        }
    }
}

pub(crate) fn check_extents(extents: &[usize]) -> Result<usize> {
    if extents.is_empty() || extents.len() > 2 {
        return Err(SanError::BadRank(extents.len()));
    }
    if extents.contains(&0) {
        return Err(SanError::ZeroExtent(extents.to_vec()));
    }
    Ok(extents.iter().product())
}

impl Tensor {
    pub fn new(extents: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        let expected = check_extents(&extents)?;
        if values.len() != expected {
            return Err(SanError::LengthMismatch {
                extents,
                expected,
                actual: values.len(),
            });
        }
        Ok(Self { extents, values })
    }

    pub fn zeros(extents: &[usize]) -> Result<Self> {
        let n = check_extents(extents)?;
        Ok(Self {
            extents: extents.to_vec(),
            values: vec![0.0; n],
        })
    }

    pub fn filled(extents: &[usize], value: f64) -> Result<Self> {
        let mut t = Self::zeros(extents)?;
        t.values.fill(value);
        Ok(t)
    }

    /// Rank-1 tensor from a slice. Panics on an empty slice.
    pub fn from_slice(values: &[f64]) -> Self {
        Self::new(vec![values.len()], values.to_vec()).expect("non-empty 1D tensor")
    }

    pub fn from_vec(values: Vec<f64>) -> Result<Self> {
        Self::new(vec![values.len()], values)
    }

    pub fn from_rows(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        Self::new(vec![rows, cols], values)
    }

    pub fn rank(&self) -> usize {
        self.extents.len()
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false; tensors hold at least one value.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Rows and columns, treating a 1D tensor as a single row.
    pub(crate) fn dims2(&self) -> (usize, usize) {
        match self.extents[..] {
            [n] => (1, n),
            [r, c] => (r, c),
            _ => unreachable!("rank checked at construction"),
        }
    }

    pub fn same_shape(&self, other: &Tensor) -> Result<()> {
        if self.extents != other.extents {
            return Err(SanError::ShapeMismatch {
                left: self.extents.clone(),
                right: other.extents.clone(),
            });
        }
        Ok(())
    }

    pub fn dot(&self, other: &Tensor) -> Result<f64> {
        self.same_shape(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum())
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Tensor {
        Tensor {
            extents: self.extents.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scale(&self, k: f64) -> Tensor {
        self.map(|v| v * k)
    }

    pub fn add_assign(&mut self, other: &Tensor) -> Result<()> {
        self.same_shape(other)?;
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += b;
        }
        Ok(())
    }

    pub fn add(&self, other: &Tensor) -> Result<Tensor> {
        let mut out = self.clone();
        out.add_assign(other)?;
        Ok(out)
    }

    pub fn sub(&self, other: &Tensor) -> Result<Tensor> {
        self.same_shape(other)?;
        Ok(Tensor {
            extents: self.extents.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// Cosine similarity of the flattened values; 0 when either side is all zeros.
    pub fn cosine(&self, other: &Tensor) -> Result<f64> {
        let d = self.dot(other)?;
        let denom = self.norm() * other.norm();
        Ok(if denom == 0.0 { 0.0 } else { d / denom })
    }
}

impl std::ops::Index<usize> for Tensor {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

impl std::ops::IndexMut<usize> for Tensor {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.values[i]
    }
}
