//! Matrix dumps: a compact binary format for reloading and CSV for reading.
//!
//! Binary layout, all little-endian:
//!
//! ```text
//! offset  size  field
//! 0       8     magic  b"SKSPMAT1"
//! 8       8     rows   u64
//! 16      8     cols   u64
//! 24      8*r*c values f64, column-major
//! ```

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use ndarray::{Array1, Array2, ShapeBuilder};
use serde::{Deserialize, Serialize};

use crate::corpus::SkillVocabulary;
use crate::error::{Error, Result};
use crate::simmatrix::{SkillSimilarityMatrix, ThetaScope};

pub const MAGIC: &[u8; 8] = b"SKSPMAT1";
const HEADER_LEN: usize = 24;

pub fn encode_matrix(data: &Array2<f64>) -> Vec<u8> {
    let (rows, cols) = data.dim();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * rows * cols);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(rows as u64).to_le_bytes());
    out.extend_from_slice(&(cols as u64).to_le_bytes());
    for col in data.columns() {
        for v in col {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn decode_matrix(bytes: &[u8]) -> Result<Array2<f64>> {
    if bytes.len() < HEADER_LEN || &bytes[..8] != MAGIC {
        return Err(Error::MatrixFormat("bad magic".into()));
    }
    let rows = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    let cols = u64::from_le_bytes(bytes[16..24].try_into().unwrap()) as usize;
    let expected = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(8))
        .and_then(|n| n.checked_add(HEADER_LEN))
        .ok_or_else(|| Error::MatrixFormat("dimensions overflow".into()))?;
    if bytes.len() != expected {
        return Err(Error::MatrixFormat(format!(
            "expected {expected} bytes for {rows}x{cols}, found {}",
            bytes.len()
        )));
    }
    let values: Vec<f64> = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Array2::from_shape_vec((rows, cols).f(), values)
        .map_err(|e| Error::MatrixFormat(e.to_string()))
}

pub fn write_matrix(path: &Path, data: &Array2<f64>) -> Result<()> {
    fs::write(path, encode_matrix(data))?;
    Ok(())
}

pub fn read_matrix(path: &Path) -> Result<Array2<f64>> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode_matrix(&bytes)
}

/// Writes a labelled matrix as CSV with an empty top-left header cell.
pub fn write_matrix_csv<W: Write>(
    writer: W,
    row_labels: &[String],
    col_labels: &[String],
    data: &Array2<f64>,
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let io_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    let mut header = vec![String::new()];
    header.extend(col_labels.iter().cloned());
    wtr.write_record(&header).map_err(io_err)?;
    for (label, row) in row_labels.iter().zip(data.rows()) {
        let mut rec = vec![label.clone()];
        rec.extend(row.iter().map(|v| v.to_string()));
        wtr.write_record(&rec).map_err(io_err)?;
    }
    wtr.flush()?;
    Ok(())
}

pub const THETA_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaMeta {
    pub format_version: u32,
    pub corpus_hash: String,
    pub scope: ThetaScope,
    pub threshold: f64,
    pub skill_frequencies: Vec<f64>,
}

/// File locations of a Θ cache rooted at `base` (`base.bin`, …).
#[derive(Debug, Clone)]
pub struct ThetaFiles {
    pub matrix: PathBuf,
    pub vocabulary: PathBuf,
    pub meta: PathBuf,
}

impl ThetaFiles {
    pub fn new(base: &Path) -> Self {
        let with = |ext: &str| {
            let mut p = base.as_os_str().to_owned();
            p.push(ext);
            PathBuf::from(p)
        };
        Self {
            matrix: with(".bin"),
            vocabulary: with(".vocab.txt"),
            meta: with(".meta.json"),
        }
    }

    pub fn exists(&self) -> bool {
        self.matrix.exists() && self.vocabulary.exists() && self.meta.exists()
    }
}

pub fn save_theta(
    files: &ThetaFiles,
    theta: &SkillSimilarityMatrix,
    vocabulary: &SkillVocabulary,
    corpus_hash: &str,
    scope: ThetaScope,
    threshold: f64,
) -> Result<()> {
    write_matrix(&files.matrix, &theta.data)?;
    let mut vocab = String::new();
    for name in vocabulary.names() {
        vocab.push_str(name);
        vocab.push('\n');
    }
    fs::write(&files.vocabulary, vocab)?;
    let meta = ThetaMeta {
        format_version: THETA_FORMAT_VERSION,
        corpus_hash: corpus_hash.to_string(),
        scope,
        threshold,
        skill_frequencies: theta.skill_frequencies.to_vec(),
    };
    fs::write(&files.meta, serde_json::to_vec_pretty(&meta)?)?;
    Ok(())
}

/// Loads a cached Θ, rejecting it unless it was built from the same corpus
/// content with the same scope and threshold.
pub fn load_theta(
    files: &ThetaFiles,
    vocabulary: &SkillVocabulary,
    corpus_hash: &str,
    scope: ThetaScope,
    threshold: f64,
) -> Result<SkillSimilarityMatrix> {
    let meta: ThetaMeta = serde_json::from_slice(&fs::read(&files.meta)?)?;
    if meta.format_version != THETA_FORMAT_VERSION {
        return Err(Error::CacheMismatch(format!(
            "format version {} (expected {THETA_FORMAT_VERSION})",
            meta.format_version
        )));
    }
    if meta.corpus_hash != corpus_hash {
        return Err(Error::CacheMismatch("corpus content changed".into()));
    }
    if meta.scope != scope || meta.threshold != threshold {
        return Err(Error::CacheMismatch(format!(
            "cache built with scope {:?} threshold {}, requested {:?} {}",
            meta.scope, meta.threshold, scope, threshold
        )));
    }
    let raw = fs::read(&files.vocabulary)?;
    let names: Vec<&str> = std::str::from_utf8(&raw)
        .map_err(|e| Error::MatrixFormat(e.to_string()))?
        .lines()
        .collect();
    if names.len() != vocabulary.len()
        || names.iter().zip(vocabulary.names()).any(|(a, b)| a != b)
    {
        return Err(Error::CacheMismatch("vocabulary differs".into()));
    }
    let data = read_matrix(&files.matrix)?;
    let m = vocabulary.len();
    if data.dim() != (m, m) || meta.skill_frequencies.len() != m {
        return Err(Error::CacheMismatch(format!(
            "matrix is {:?}, vocabulary has {m} skills",
            data.dim()
        )));
    }
    Ok(SkillSimilarityMatrix {
        data,
        skill_frequencies: Array1::from(meta.skill_frequencies),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    #[test]
    fn header_layout() {
        let m = array![[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]];
        let bytes = encode_matrix(&m);
        assert_eq!(&bytes[..8], MAGIC);
        assert_eq!(u64::from_le_bytes(bytes[8..16].try_into().unwrap()), 2);
        assert_eq!(u64::from_le_bytes(bytes[16..24].try_into().unwrap()), 3);
        // column-major: second stored value is row 1, col 0
        assert_eq!(f64::from_le_bytes(bytes[32..40].try_into().unwrap()), 4.0);
        assert_eq!(bytes.len(), 24 + 6 * 8);
    }

    #[test]
    fn rejects_truncated_and_bad_magic() {
        let mut bytes = encode_matrix(&array![[1.0]]);
        bytes.pop();
        assert!(decode_matrix(&bytes).is_err());
        assert!(decode_matrix(b"NOTAMAT!\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0").is_err());
    }

    #[test]
    fn csv_dump() {
        let mut out = Vec::new();
        write_matrix_csv(
            &mut out,
            &["d1".into(), "d2".into()],
            &["x".into(), "y".into()],
            &array![[1.5, 0.0], [0.75, 1.5]],
        )
        .unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), ",x,y\nd1,1.5,0\nd2,0.75,1.5\n");
    }

    #[test]
    fn theta_cache_rejects_stale_hash() {
        let dir = tempfile::tempdir().unwrap();
        let files = ThetaFiles::new(&dir.path().join("theta"));
        let mut vocab = SkillVocabulary::new();
        vocab.intern("a").unwrap();
        vocab.intern("b").unwrap();
        let theta = SkillSimilarityMatrix::identity(2);
        save_theta(&files, &theta, &vocab, "abc", ThetaScope::Market, 1.0).unwrap();
        let back = load_theta(&files, &vocab, "abc", ThetaScope::Market, 1.0).unwrap();
        assert_eq!(back, theta);
        assert!(matches!(
            load_theta(&files, &vocab, "def", ThetaScope::Market, 1.0),
            Err(Error::CacheMismatch(_))
        ));
        assert!(matches!(
            load_theta(&files, &vocab, "abc", ThetaScope::Pooled, 1.0),
            Err(Error::CacheMismatch(_))
        ));
    }

    proptest! {
        #[test]
        fn binary_round_trip(rows in 0usize..6, cols in 0usize..6, seed in any::<u64>()) {
            let m = Array2::from_shape_fn((rows, cols), |(i, j)| {
                f64::from_bits(seed.wrapping_mul(31 + i as u64).wrapping_add(j as u64) >> 2)
            });
            let back = decode_matrix(&encode_matrix(&m)).unwrap();
            prop_assert_eq!(back.dim(), m.dim());
            for (a, b) in back.iter().zip(m.iter()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}
