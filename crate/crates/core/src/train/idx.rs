//! IDX container parsing for MNIST-family image/label files.
//!
//! Images use magic `0x00000803` followed by big-endian dims `[n, h, w]` and
//! `n·h·w` pixel bytes; labels use magic `0x00000801` followed by `[n]` and
//! `n` class bytes. Gzip-compressed files (magic `1f 8b`) are decompressed
//! transparently.

use std::io::Read;
use std::path::Path;

use flate2::read::GzDecoder;

use crate::error::{Error, Result};

pub const IDX_IMAGE_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABEL_MAGIC: u32 = 0x0000_0801;

/// An image-classification dataset loaded from a pair of IDX files.
#[derive(Debug, Clone)]
pub struct IdxDataset {
    /// Pixel intensities, one `h·w` block per image, row-major.
    pub images: Vec<u8>,
    /// Class id per image.
    pub labels: Vec<u8>,
    pub n_images: usize,
    pub height: usize,
    pub width: usize,
    pub n_classes: usize,
}

impl IdxDataset {
    /// Pixels of image `i` as a byte slice of length `h·w`.
    pub fn image(&self, i: usize) -> &[u8] {
        let size = self.height * self.width;
        &self.images[i * size..(i + 1) * size]
    }

    /// Flattened input dimension `h·w`.
    pub fn input_dim(&self) -> usize {
        self.height * self.width
    }

    /// Builds a dataset from parts, validating the container invariants.
    pub fn from_parts(
        images: Vec<u8>,
        labels: Vec<u8>,
        height: usize,
        width: usize,
    ) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::invalid("image dimensions must be positive"));
        }
        if labels.is_empty() {
            return Err(Error::invalid("dataset must contain at least one example"));
        }
        if images.len() != labels.len() * height * width {
            return Err(Error::IdxCountMismatch {
                images: images.len() / (height * width),
                labels: labels.len(),
            });
        }
        let n_classes = *labels.iter().max().expect("non-empty") as usize + 1;
        Ok(IdxDataset {
            n_images: labels.len(),
            images,
            labels,
            height,
            width,
            n_classes,
        })
    }
}

/// Reads a whole file, decompressing if it starts with the gzip magic.
fn read_maybe_gzipped(path: &Path) -> Result<Vec<u8>> {
    let raw = std::fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    if raw.len() >= 2 && raw[0] == 0x1f && raw[1] == 0x8b {
        let mut out = Vec::new();
        GzDecoder::new(raw.as_slice())
            .read_to_end(&mut out)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

struct BeReader<'a> {
    path: &'a Path,
    bytes: &'a [u8],
    offset: usize,
}

impl<'a> BeReader<'a> {
    fn u32(&mut self) -> Result<u32> {
        let end = self.offset + 4;
        if end > self.bytes.len() {
            return Err(Error::IdxTruncated {
                path: self.path.display().to_string(),
                offset: self.offset,
                needed: end - self.bytes.len(),
            });
        }
        let v = u32::from_be_bytes(self.bytes[self.offset..end].try_into().expect("4 bytes"));
        self.offset = end;
        Ok(v)
    }

    fn payload(&mut self, len: usize) -> Result<&'a [u8]> {
        let end = self.offset + len;
        if end > self.bytes.len() {
            return Err(Error::IdxTruncated {
                path: self.path.display().to_string(),
                offset: self.offset,
                needed: end - self.bytes.len(),
            });
        }
        let slice = &self.bytes[self.offset..end];
        self.offset = end;
        Ok(slice)
    }
}

/// Loads an image/label file pair into a dataset.
pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<IdxDataset> {
    let image_bytes = read_maybe_gzipped(images_path)?;
    let mut r = BeReader { path: images_path, bytes: &image_bytes, offset: 0 };
    let magic = r.u32()?;
    if magic != IDX_IMAGE_MAGIC {
        return Err(Error::IdxMagic {
            path: images_path.display().to_string(),
            expected: IDX_IMAGE_MAGIC,
            got: magic,
        });
    }
    let n = r.u32()? as usize;
    let h = r.u32()? as usize;
    let w = r.u32()? as usize;
    let images = r.payload(n * h * w)?.to_vec();

    let label_bytes = read_maybe_gzipped(labels_path)?;
    let mut r = BeReader { path: labels_path, bytes: &label_bytes, offset: 0 };
    let magic = r.u32()?;
    if magic != IDX_LABEL_MAGIC {
        return Err(Error::IdxMagic {
            path: labels_path.display().to_string(),
            expected: IDX_LABEL_MAGIC,
            got: magic,
        });
    }
    let n_labels = r.u32()? as usize;
    if n_labels != n {
        return Err(Error::IdxCountMismatch { images: n, labels: n_labels });
    }
    let labels = r.payload(n_labels)?.to_vec();

    IdxDataset::from_parts(images, labels, h, w)
}

/// Serializes images in IDX format (uncompressed).
pub fn encode_idx_images(images: &[u8], n: usize, h: usize, w: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + images.len());
    out.extend_from_slice(&IDX_IMAGE_MAGIC.to_be_bytes());
    out.extend_from_slice(&(n as u32).to_be_bytes());
    out.extend_from_slice(&(h as u32).to_be_bytes());
    out.extend_from_slice(&(w as u32).to_be_bytes());
    out.extend_from_slice(images);
    out
}

/// Serializes labels in IDX format (uncompressed).
pub fn encode_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&IDX_LABEL_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_pair(dir: &Path, images: &[u8], labels: &[u8]) -> (std::path::PathBuf, std::path::PathBuf) {
        let ip = dir.join("images-idx3-ubyte");
        let lp = dir.join("labels-idx1-ubyte");
        std::fs::write(&ip, images).unwrap();
        std::fs::write(&lp, labels).unwrap();
        (ip, lp)
    }

    #[test]
    fn parses_minimal_pair() {
        // 2 images of 2x2 plus matching labels.
        let dir = tempfile::tempdir().unwrap();
        let images = encode_idx_images(&[1, 2, 3, 4, 5, 6, 7, 8], 2, 2, 2);
        let labels = encode_idx_labels(&[0, 1]);
        let (ip, lp) = write_pair(dir.path(), &images, &labels);
        let ds = load_idx(&ip, &lp).unwrap();
        assert_eq!(ds.n_images, 2);
        assert_eq!((ds.height, ds.width), (2, 2));
        assert_eq!(ds.image(1), &[5, 6, 7, 8]);
        assert_eq!(ds.labels, vec![0, 1]);
        assert_eq!(ds.n_classes, 2);
    }

    #[test]
    fn rejects_bad_magic() {
        let dir = tempfile::tempdir().unwrap();
        let mut images = encode_idx_images(&[0; 4], 1, 2, 2);
        images[3] = 0x42;
        let labels = encode_idx_labels(&[0]);
        let (ip, lp) = write_pair(dir.path(), &images, &labels);
        match load_idx(&ip, &lp) {
            Err(Error::IdxMagic { got, .. }) => assert_eq!(got, 0x0000_0842),
            other => panic!("expected magic error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_truncated_payload() {
        let dir = tempfile::tempdir().unwrap();
        let mut images = encode_idx_images(&[0; 8], 2, 2, 2);
        images.truncate(images.len() - 3);
        let labels = encode_idx_labels(&[0, 1]);
        let (ip, lp) = write_pair(dir.path(), &images, &labels);
        match load_idx(&ip, &lp) {
            Err(Error::IdxTruncated { needed, .. }) => assert_eq!(needed, 3),
            other => panic!("expected truncation error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_count_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let images = encode_idx_images(&[0; 8], 2, 2, 2);
        let labels = encode_idx_labels(&[0, 1, 1]);
        let (ip, lp) = write_pair(dir.path(), &images, &labels);
        assert!(matches!(
            load_idx(&ip, &lp),
            Err(Error::IdxCountMismatch { images: 2, labels: 3 })
        ));
    }

    #[test]
    fn gzip_detected_and_decompressed() {
        let dir = tempfile::tempdir().unwrap();
        let images = encode_idx_images(&[9, 8, 7, 6], 1, 2, 2);
        let labels = encode_idx_labels(&[3]);

        let gz = |bytes: &[u8], path: &Path| {
            let file = std::fs::File::create(path).unwrap();
            let mut enc = flate2::write::GzEncoder::new(file, flate2::Compression::default());
            enc.write_all(bytes).unwrap();
            enc.finish().unwrap();
        };
        let ip = dir.path().join("images.gz");
        let lp = dir.path().join("labels.gz");
        gz(&images, &ip);
        gz(&labels, &lp);

        let ds = load_idx(&ip, &lp).unwrap();
        assert_eq!(ds.image(0), &[9, 8, 7, 6]);
        assert_eq!(ds.labels, vec![3]);
        assert_eq!(ds.n_classes, 4);
    }

    #[test]
    fn missing_file_error_names_path() {
        let dir = tempfile::tempdir().unwrap();
        let images = encode_idx_images(&[0; 4], 1, 2, 2);
        let ip = dir.path().join("ok-images");
        std::fs::write(&ip, images).unwrap();
        let missing = dir.path().join("no-such-labels");
        let err = load_idx(&ip, &missing).unwrap_err();
        assert!(err.to_string().contains("no-such-labels"), "{err}");
    }
}
