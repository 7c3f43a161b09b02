//! IDX binary layout: big-endian magic, big-endian u32 dimensions, then
//! unsigned bytes. Images use magic 0x00000803 with three dimensions
//! (count, rows, cols); labels use 0x00000801 with one.

use std::path::Path;

use crate::datasets::{Corpus, Split};
use crate::error::{Result, SanError};
use crate::tensor::Tensor;

const IMAGES_MAGIC: u32 = 0x0000_0803;
const LABELS_MAGIC: u32 = 0x0000_0801;

/// Raw image bytes as stored on disk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxImages {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
}

impl IdxImages {
    pub fn image(&self, i: usize) -> &[u8] {
        let size = self.rows * self.cols;
        &self.pixels[i * size..(i + 1) * size]
    }

    /// Image `i` as a `rows x cols` tensor scaled to `[0, 1]`.
    pub fn tensor(&self, i: usize) -> Tensor {
        let values = self
            .image(i)
            .iter()
            .map(|&b| f64::from(b) / 255.0)
            .collect();
        Tensor::from_rows(self.rows, self.cols, values).expect("non-empty image")
    }
}

fn header(bytes: &[u8], magic: u32, dims: usize, what: &str) -> Result<Vec<usize>> {
    let need = 4 * (1 + dims);
    if bytes.len() < need {
        return Err(SanError::Format(format!("{what}: truncated header")));
    }
    let word = |i: usize| u32::from_be_bytes(bytes[4 * i..4 * i + 4].try_into().unwrap());
    if word(0) != magic {
        return Err(SanError::Format(format!(
            "{what}: magic {:#010x}, expected {magic:#010x}",
            word(0)
        )));
    }
    Ok((1..=dims).map(|i| word(i) as usize).collect())
}

pub fn read_idx_images(path: &Path) -> Result<IdxImages> {
    let bytes = std::fs::read(path)?;
    let what = path.display().to_string();
    let dims = header(&bytes, IMAGES_MAGIC, 3, &what)?;
    let (count, rows, cols) = (dims[0], dims[1], dims[2]);
    let body = &bytes[16..];
    let expected = count * rows * cols;
    if body.len() < expected {
        return Err(SanError::Format(format!(
            "{what}: truncated, {} of {expected} pixel bytes",
            body.len()
        )));
    }
    if rows == 0 || cols == 0 {
        return Err(SanError::Format(format!("{what}: zero-sized images")));
    }
    Ok(IdxImages {
        count,
        rows,
        cols,
        pixels: body[..expected].to_vec(),
    })
}

pub fn read_idx_labels(path: &Path) -> Result<Vec<u8>> {
    let bytes = std::fs::read(path)?;
    let what = path.display().to_string();
    let count = header(&bytes, LABELS_MAGIC, 1, &what)?[0];
    let body = &bytes[8..];
    if body.len() < count {
        return Err(SanError::Format(format!(
            "{what}: truncated, {} of {count} labels",
            body.len()
        )));
    }
    Ok(body[..count].to_vec())
}

pub fn write_idx_images(path: &Path, images: &IdxImages) -> Result<()> {
    let mut out = Vec::with_capacity(16 + images.pixels.len());
    for word in [
        IMAGES_MAGIC,
        images.count as u32,
        images.rows as u32,
        images.cols as u32,
    ] {
        out.extend_from_slice(&word.to_be_bytes());
    }
    out.extend_from_slice(&images.pixels);
    std::fs::write(path, out)?;
    Ok(())
}

pub fn write_idx_labels(path: &Path, labels: &[u8]) -> Result<()> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    std::fs::write(path, out)?;
    Ok(())
}

/// Loads an image/label file pair into a labelled corpus with every example
/// assigned to `split`.
pub fn load_idx_images(images: &Path, labels: &Path, split: Split) -> Result<Corpus> {
    let imgs = read_idx_images(images)?;
    let labs = read_idx_labels(labels)?;
    if imgs.count != labs.len() {
        return Err(SanError::Format(format!(
            "{} images but {} labels",
            imgs.count,
            labs.len()
        )));
    }
    let examples = (0..imgs.count).map(|i| imgs.tensor(i)).collect();
    Corpus::new(
        examples,
        labs.iter().map(|&l| usize::from(l)).collect(),
        vec![split; imgs.count],
        images.display().to_string(),
    )
}

/// Standard MNIST-style layout: the last `validation` images of the training
/// file become the validation split, the test file becomes the test split.
pub fn mnist_protocol(dir: &Path, validation: usize) -> Result<Corpus> {
    let mut train = load_idx_images(
        &dir.join("train-images-idx3-ubyte"),
        &dir.join("train-labels-idx1-ubyte"),
        Split::Train,
    )?;
    let test = load_idx_images(
        &dir.join("t10k-images-idx3-ubyte"),
        &dir.join("t10k-labels-idx1-ubyte"),
        Split::Test,
    )?;
    let n = train.len();
    if validation > n {
        return Err(SanError::InvalidConfig(format!(
            "validation size {validation} exceeds {n} training images"
        )));
    }
    for s in &mut train.splits[n - validation..] {
        *s = Split::Validation;
    }
    train.examples.extend(test.examples);
    train.labels.extend(test.labels);
    train.splits.extend(test.splits);
    train.provenance = dir.display().to_string();
    Ok(train)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture(
        dir: &Path,
        pixels: Vec<u8>,
        count: usize,
    ) -> (std::path::PathBuf, std::path::PathBuf) {
        let ip = dir.join("img");
        let lp = dir.join("lab");
        write_idx_images(
            &ip,
            &IdxImages {
                count,
                rows: 28,
                cols: 28,
                pixels,
            },
        )
        .unwrap();
        write_idx_labels(&lp, &(0..count as u8).collect::<Vec<_>>()).unwrap();
        (ip, lp)
    }

    #[test]
    fn all_white_and_all_black() {
        let dir = tempfile::tempdir().unwrap();
        let (ip, lp) = fixture(dir.path(), vec![255; 784], 1);
        let c = load_idx_images(&ip, &lp, Split::Train).unwrap();
        assert_eq!(c.examples[0].extents(), &[28, 28]);
        assert!(c.examples[0].values().iter().all(|&v| v == 1.0));
        let (ip, lp) = fixture(dir.path(), vec![0; 784], 1);
        let c = load_idx_images(&ip, &lp, Split::Train).unwrap();
        assert!(c.examples[0].values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn two_image_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut pixels: Vec<u8> = (0..2 * 784).map(|i| (i % 251) as u8).collect();
        pixels[0] = 17;
        *pixels.last_mut().unwrap() = 200;
        let (ip, lp) = fixture(dir.path(), pixels.clone(), 2);
        let raw = read_idx_images(&ip).unwrap();
        assert_eq!(raw.pixels, pixels);
        let c = load_idx_images(&ip, &lp, Split::Test).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.labels, vec![0, 1]);
        assert_eq!(c.examples[0][0], 17.0 / 255.0);
        assert_eq!(c.examples[1][783], 200.0 / 255.0);
        let bytes = std::fs::read(&ip).unwrap();
        assert_eq!(&bytes[..4], &[0, 0, 8, 3]);
    }

    #[test]
    fn rejects_bad_files() {
        let dir = tempfile::tempdir().unwrap();
        let (ip, lp) = fixture(dir.path(), vec![1; 784 * 2], 2);
        // labels used as images: wrong magic
        assert!(read_idx_images(&lp).is_err());
        assert!(read_idx_labels(&ip).is_err());
        // truncated body
        let bytes = std::fs::read(&ip).unwrap();
        let cut = dir.path().join("cut");
        std::fs::write(&cut, &bytes[..bytes.len() - 1]).unwrap();
        assert!(read_idx_images(&cut).is_err());
        std::fs::write(&cut, &bytes[..10]).unwrap();
        assert!(read_idx_images(&cut).is_err());
        // count mismatch
        let lp1 = dir.path().join("lab1");
        write_idx_labels(&lp1, &[3]).unwrap();
        assert!(load_idx_images(&ip, &lp1, Split::Train).is_err());
    }
}
