//! IDX files as used by MNIST: a big-endian header (magic, then one `u32`
//! per dimension) followed by raw `u8` data. Gzip-compressed files are
//! detected by their magic bytes and inflated transparently.

use std::fs;
use std::io::Read;
use std::path::Path;

use flate2::read::GzDecoder;

use crate::error::{Error, Result};

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdxImages {
    pub rows: usize,
    pub cols: usize,
    /// Row-major pixels, `n * rows * cols` bytes.
    pub pixels: Vec<u8>,
}

impl IdxImages {
    pub fn len(&self) -> usize {
        self.pixels.len() / (self.rows * self.cols).max(1)
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn image(&self, i: usize) -> &[u8] {
        let n = self.rows * self.cols;
        &self.pixels[i * n..(i + 1) * n]
    }

    /// Each image as a vector of intensities scaled into `[0, 1]`.
    pub fn to_unit_rows(&self) -> Vec<Vec<f64>> {
        (0..self.len())
            .map(|i| self.image(i).iter().map(|&b| f64::from(b) / 255.0).collect())
            .collect()
    }
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    let raw = fs::read(path).map_err(|e| Error::io(path, e))?;
    if raw.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        GzDecoder::new(raw.as_slice())
            .read_to_end(&mut out)
            .map_err(|e| Error::io(path, e))?;
        return Ok(out);
    }
    Ok(raw)
}

fn be_u32(bytes: &[u8], offset: usize) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::Format {
            offset,
            message: "file ends inside the header".into(),
        })
}

fn check_magic(bytes: &[u8], expected: u32) -> Result<()> {
    let magic = be_u32(bytes, 0)?;
    if magic != expected {
        return Err(Error::Format {
            offset: 0,
            message: format!("magic 0x{magic:08x}, expected 0x{expected:08x}"),
        });
    }
    Ok(())
}

fn check_payload(bytes: &[u8], header: usize, expected: usize) -> Result<()> {
    let have = bytes.len() - header;
    if have < expected {
        return Err(Error::Format {
            offset: bytes.len(),
            message: format!("truncated data: {have} of {expected} bytes present"),
        });
    }
    if have > expected {
        return Err(Error::Format {
            offset: header + expected,
            message: format!("{} trailing bytes", have - expected),
        });
    }
    Ok(())
}

pub fn parse_idx_images(bytes: &[u8]) -> Result<IdxImages> {
    check_magic(bytes, IMAGES_MAGIC)?;
    let n = be_u32(bytes, 4)? as usize;
    let rows = be_u32(bytes, 8)? as usize;
    let cols = be_u32(bytes, 12)? as usize;
    check_payload(bytes, 16, n * rows * cols)?;
    Ok(IdxImages {
        rows,
        cols,
        pixels: bytes[16..].to_vec(),
    })
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    check_magic(bytes, LABELS_MAGIC)?;
    let n = be_u32(bytes, 4)? as usize;
    check_payload(bytes, 8, n)?;
    Ok(bytes[8..].to_vec())
}

pub fn read_idx_images(path: impl AsRef<Path>) -> Result<IdxImages> {
    parse_idx_images(&read_bytes(path.as_ref())?)
}

pub fn read_idx_labels(path: impl AsRef<Path>) -> Result<Vec<u8>> {
    parse_idx_labels(&read_bytes(path.as_ref())?)
}

pub fn encode_idx_images(images: &IdxImages) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + images.pixels.len());
    for v in [
        IMAGES_MAGIC,
        images.len() as u32,
        images.rows as u32,
        images.cols as u32,
    ] {
        out.extend_from_slice(&v.to_be_bytes());
    }
    out.extend_from_slice(&images.pixels);
    out
}

pub fn encode_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

pub fn write_idx_images(path: impl AsRef<Path>, images: &IdxImages) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_idx_images(images)).map_err(|e| Error::io(path, e))
}

pub fn write_idx_labels(path: impl AsRef<Path>, labels: &[u8]) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_idx_labels(labels)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> IdxImages {
        IdxImages {
            rows: 2,
            cols: 3,
            pixels: vec![0, 255, 51, 102, 1, 254, 10, 20, 30, 40, 50, 60],
        }
    }

    #[test]
    fn golden_bytes() {
        let bytes = encode_idx_images(&fixture());
        assert_eq!(&bytes[..16], &[0, 0, 8, 3, 0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0, 3]);
        let parsed = parse_idx_images(&bytes).unwrap();
        assert_eq!(parsed.len(), 2);
        let rows = parsed.to_unit_rows();
        assert_eq!(rows[0], vec![0.0, 1.0, 0.2, 0.4, 1.0 / 255.0, 254.0 / 255.0]);
        assert_eq!(parsed.image(1), &[10, 20, 30, 40, 50, 60]);

        let lb = encode_idx_labels(&[9, 6]);
        assert_eq!(lb, vec![0, 0, 8, 1, 0, 0, 0, 2, 9, 6]);
        assert_eq!(parse_idx_labels(&lb).unwrap(), vec![9, 6]);
    }

    #[test]
    fn wrong_magic() {
        let mut bytes = encode_idx_images(&fixture());
        bytes[3] = 0x02;
        match parse_idx_images(&bytes) {
            Err(Error::Format { offset: 0, message }) => assert!(message.contains("0x00000802")),
            other => panic!("{other:?}"),
        }
        assert!(parse_idx_labels(&encode_idx_images(&fixture())).is_err());
    }

    #[test]
    fn truncation_reports_offset() {
        let bytes = encode_idx_images(&fixture());
        match parse_idx_images(&bytes[..bytes.len() - 2]) {
            Err(Error::Format { offset, .. }) => assert_eq!(offset, bytes.len() - 2),
            other => panic!("{other:?}"),
        }
        match parse_idx_images(&bytes[..10]) {
            Err(Error::Format { offset, .. }) => assert_eq!(offset, 8),
            other => panic!("{other:?}"),
        }
        let mut long = encode_idx_labels(&[1, 2]);
        long.push(7);
        assert!(matches!(parse_idx_labels(&long), Err(Error::Format { offset: 10, .. })));
    }

    #[test]
    fn files_and_gzip() {
        let dir = tempfile::tempdir().unwrap();
        let plain = dir.path().join("img");
        write_idx_images(&plain, &fixture()).unwrap();
        assert_eq!(read_idx_images(&plain).unwrap(), fixture());

        let gz = dir.path().join("lab.gz");
        let mut enc = flate2::write::GzEncoder::new(Vec::new(), flate2::Compression::default());
        std::io::Write::write_all(&mut enc, &encode_idx_labels(&[3, 1, 4])).unwrap();
        fs::write(&gz, enc.finish().unwrap()).unwrap();
        assert_eq!(read_idx_labels(&gz).unwrap(), vec![3, 1, 4]);

        match read_idx_labels(dir.path().join("missing")) {
            Err(Error::Io { path, .. }) => assert!(path.ends_with("missing")),
            other => panic!("{other:?}"),
        }
    }
}
