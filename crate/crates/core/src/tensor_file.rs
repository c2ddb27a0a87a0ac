//! Binary tensor file.
//!
//! ```text
//! offset  size      field
//! 0       8         magic b"NTF3TNSR"
//! 8       4         format version, u32 little-endian (1)
//! 12      4         metadata length M, u32 little-endian
//! 16      M         metadata, UTF-8 JSON object
//! 16+M    24        dims I, J, K, three u64 little-endian
//! 40+M    8*I*J*K   values, f64 little-endian, index (i*J + j)*K + k
//! ```
//!
//! Values round-trip bit-exactly.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::DenseTensor3;

pub const MAGIC: &[u8; 8] = b"NTF3TNSR";
pub const VERSION: u32 = 1;

pub fn write_tensor<W: Write>(
    mut w: W,
    t: &DenseTensor3,
    metadata: &serde_json::Value,
) -> std::io::Result<()> {
    let meta = serde_json::to_vec(metadata).map_err(std::io::Error::other)?;
    let meta_len =
        u32::try_from(meta.len()).map_err(|_| std::io::Error::other("metadata too large"))?;
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&meta_len.to_le_bytes())?;
    w.write_all(&meta)?;
    let (i, j, k) = t.dims();
    for d in [i, j, k] {
        w.write_all(&(d as u64).to_le_bytes())?;
    }
    for v in t.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()
}

/// Returns the tensor and its metadata object.
pub fn read_tensor<R: Read>(mut r: R, path: &Path) -> Result<(DenseTensor3, serde_json::Value)> {
    let bad = |reason: String| Error::InvalidTensorFile {
        path: path.to_path_buf(),
        reason,
    };
    let mut read = |buf: &mut [u8], what: &str| {
        r.read_exact(buf).map_err(|e| {
            if e.kind() == std::io::ErrorKind::UnexpectedEof {
                bad(format!("truncated while reading {what}"))
            } else {
                Error::io(path, e)
            }
        })
    };
    let mut magic = [0u8; 8];
    read(&mut magic, "magic")?;
    if &magic != MAGIC {
        return Err(bad("bad magic bytes".into()));
    }
    let mut word = [0u8; 4];
    read(&mut word, "version")?;
    let version = u32::from_le_bytes(word);
    if version != VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    read(&mut word, "metadata length")?;
    let mut meta = vec![0u8; u32::from_le_bytes(word) as usize];
    read(&mut meta, "metadata")?;
    let metadata = serde_json::from_slice(&meta).map_err(|e| bad(format!("metadata: {e}")))?;
    let mut dims = [0usize; 3];
    for d in &mut dims {
        let mut b = [0u8; 8];
        read(&mut b, "dims")?;
        *d = usize::try_from(u64::from_le_bytes(b))
            .map_err(|_| bad("dimension too large".into()))?;
    }
    let n = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| bad("dimension product overflows".into()))?;
    let mut raw = vec![
        0u8;
        n.checked_mul(8)
            .ok_or_else(|| bad("tensor too large".into()))?
    ];
    read(&mut raw, "values")?;
    let mut rest = [0u8; 1];
    if r.read(&mut rest).map_err(|e| Error::io(path, e))? != 0 {
        return Err(bad("trailing bytes after values".into()));
    }
    let values = raw
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    let t = DenseTensor3::from_vec((dims[0], dims[1], dims[2]), values)
        .map_err(|e| bad(e.to_string()))?;
    Ok((t, metadata))
}

pub fn save(path: &Path, t: &DenseTensor3, metadata: &serde_json::Value) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_tensor(std::io::BufWriter::new(f), t, metadata).map_err(|e| Error::io(path, e))
}

pub fn load(path: &Path) -> Result<(DenseTensor3, serde_json::Value)> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_tensor(std::io::BufReader::new(f), path)
}
