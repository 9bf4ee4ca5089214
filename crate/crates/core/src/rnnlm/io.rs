//! Binary model file.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! "CSLM" u16 version
//! config   u32 hidden, u32 classes, u32 bptt, u8 flags, f64 lr0, f64 threshold,
//!          u32 max_epochs, u64 seed
//! vocab    u32 n, then n x (str word, u64 count, u8 flags)
//! classes  n x u32 class id
//! pos tags u32 t, then t x str
//! cs       u32 2, then "Yes", "No"
//! weights  6 blocks x (u32 rows, u32 cols, rows*cols f64 row-major)
//! trailer  SHA-256 of everything above
//! ```
//!
//! `str` is a u32 byte length followed by UTF-8 bytes. The flags byte of the
//! config holds pos, cs, use_word and carry_state in bits 0..4; the flags of
//! a vocabulary entry hold `augmented` in bit 0. Weight blocks are stored in
//! `W_word W_pos W_cs R U_c U_w` order with the shapes documented on
//! [`RnnParams`](super::RnnParams).

use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::{ClassMap, FactorSet, Matrix, RnnConfig, RnnModel, RnnParams};
use crate::corpus::{VocabEntry, Vocabulary};
use crate::error::{Error, Result};

pub const MODEL_MAGIC: &[u8; 4] = b"CSLM";
pub const MODEL_VERSION: u16 = 1;

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, x: u8) {
        self.0.push(x);
    }
    fn u16(&mut self, x: u16) {
        self.0.extend_from_slice(&x.to_le_bytes());
    }
    fn u32(&mut self, x: usize) {
        let x = u32::try_from(x).expect("model dimensions fit in u32");
        self.0.extend_from_slice(&x.to_le_bytes());
    }
    fn u64(&mut self, x: u64) {
        self.0.extend_from_slice(&x.to_le_bytes());
    }
    fn f64(&mut self, x: f64) {
        self.0.extend_from_slice(&x.to_le_bytes());
    }
    fn str(&mut self, s: &str) {
        self.u32(s.len());
        self.0.extend_from_slice(s.as_bytes());
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::ModelFile(format!("truncated at byte {}", self.pos)))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().expect("slice has length N"))
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.array()?))
    }
    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.array()?) as usize)
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.array()?))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.array()?))
    }
    fn str(&mut self) -> Result<String> {
        let n = self.u32()?;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| Error::ModelFile("string is not UTF-8".into()))
    }
}

impl RnnModel {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer(Vec::new());
        w.0.extend_from_slice(MODEL_MAGIC);
        w.u16(MODEL_VERSION);

        let c = &self.config;
        w.u32(c.hidden_size);
        w.u32(c.n_classes);
        w.u32(c.bptt_steps);
        w.u8(c.factors.pos as u8 | (c.factors.cs as u8) << 1 | (c.use_word as u8) << 2 | (c.carry_state as u8) << 3);
        w.f64(c.lr0);
        w.f64(c.lr_halve_threshold);
        w.u32(c.max_epochs);
        w.u64(c.seed);

        w.u32(self.vocab.len());
        for e in self.vocab.entries() {
            w.str(&e.word);
            w.u64(e.count);
            w.u8(e.augmented as u8);
        }
        for &class in self.classes.assignment() {
            w.u32(class as usize);
        }
        w.u32(self.pos_tags.len());
        for t in &self.pos_tags {
            w.str(t);
        }
        w.u32(2);
        w.str("Yes");
        w.str("No");
        for block in self.params.blocks() {
            w.u32(block.rows());
            w.u32(block.cols());
            for &x in block.data() {
                w.f64(x);
            }
        }
        let digest = Sha256::digest(&w.0);
        w.0.extend_from_slice(&digest);
        w.0
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < MODEL_MAGIC.len() + 2 + 32 || &bytes[..4] != MODEL_MAGIC {
            return Err(Error::ModelFile("missing CSLM header".into()));
        }
        let (body, trailer) = bytes.split_at(bytes.len() - 32);
        if Sha256::digest(body).as_slice() != trailer {
            return Err(Error::ModelFile("checksum mismatch".into()));
        }
        let mut r = Reader { buf: body, pos: 4 };
        let version = r.u16()?;
        if version != MODEL_VERSION {
            return Err(Error::ModelFile(format!("unsupported version {version}")));
        }

        let hidden_size = r.u32()?;
        let n_classes = r.u32()?;
        let bptt_steps = r.u32()?;
        let flags = r.u8()?;
        let config = RnnConfig {
            hidden_size,
            n_classes,
            bptt_steps,
            factors: FactorSet {
                pos: flags & 1 != 0,
                cs: flags & 2 != 0,
            },
            use_word: flags & 4 != 0,
            carry_state: flags & 8 != 0,
            lr0: r.f64()?,
            lr_halve_threshold: r.f64()?,
            max_epochs: r.u32()?,
            seed: r.u64()?,
        };

        let n = r.u32()?;
        let mut entries = Vec::with_capacity(n.min(body.len()));
        for _ in 0..n {
            entries.push(VocabEntry {
                word: r.str()?,
                count: r.u64()?,
                augmented: r.u8()? & 1 != 0,
            });
        }
        let vocab = Vocabulary::from_ordered(entries).map_err(|e| Error::ModelFile(e.to_string()))?;
        if vocab.len() != n {
            return Err(Error::ModelFile("vocabulary lacks special tokens".into()));
        }
        let class_of = (0..n).map(|_| r.u32().map(|c| c as u32)).collect::<Result<Vec<_>>>()?;
        let classes = ClassMap::from_assignment(class_of, n_classes).map_err(|e| Error::ModelFile(e.to_string()))?;
        let t = r.u32()?;
        let pos_tags = (0..t).map(|_| r.str()).collect::<Result<Vec<_>>>()?;
        let cs: Vec<String> = (0..r.u32()?).map(|_| r.str()).collect::<Result<_>>()?;
        if cs != ["Yes", "No"] {
            return Err(Error::ModelFile(format!("unexpected CS inventory {cs:?}")));
        }

        let mut params = RnnParams::zeros(0, 0, 0, 0);
        for block in params.blocks_mut() {
            let rows = r.u32()?;
            let cols = r.u32()?;
            let len = rows
                .checked_mul(cols)
                .filter(|&l| l <= body.len() / 8)
                .ok_or_else(|| Error::ModelFile("weight block too large".into()))?;
            let data = (0..len).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
            *block = Matrix::from_vec(rows, cols, data).expect("length checked");
        }
        if r.pos != body.len() {
            return Err(Error::ModelFile("trailing bytes before checksum".into()));
        }
        RnnModel::from_parts(config, vocab, classes, pos_tags, params).map_err(|e| Error::ModelFile(e.to_string()))
    }
}

pub fn write_model(model: &RnnModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, model.to_bytes()).map_err(|e| Error::file(path, e))
}

pub fn read_model(path: impl AsRef<Path>) -> Result<RnnModel> {
    let path = path.as_ref();
    RnnModel::from_bytes(&fs::read(path).map_err(|e| Error::file(path, e))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_vocab, Sentence};

    fn model() -> RnnModel {
        let corpus = vec![Sentence::from_words(&["a", "b", "c", "a"])];
        let vocab = build_vocab(&corpus, &["xyz"]);
        let config = RnnConfig {
            hidden_size: 3,
            n_classes: 2,
            carry_state: true,
            factors: FactorSet { pos: true, cs: false },
            ..RnnConfig::default()
        };
        RnnModel::new(config, vocab, vec!["N".into(), "V".into()]).unwrap()
    }

    #[test]
    fn round_trip() {
        let m = model();
        let bytes = m.to_bytes();
        assert_eq!(&bytes[..4], b"CSLM");
        assert_eq!(u16::from_le_bytes([bytes[4], bytes[5]]), MODEL_VERSION);
        let back = RnnModel::from_bytes(&bytes).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.to_bytes(), bytes);
    }

    #[test]
    fn corruption_detected() {
        let bytes = model().to_bytes();
        let mut flipped = bytes.clone();
        flipped[40] ^= 1;
        assert!(matches!(RnnModel::from_bytes(&flipped), Err(Error::ModelFile(m)) if m.contains("checksum")));
        assert!(RnnModel::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        assert!(RnnModel::from_bytes(b"ARPA").is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.cslm");
        let m = model();
        write_model(&m, &path).unwrap();
        assert_eq!(read_model(&path).unwrap(), m);
        assert!(read_model(dir.path().join("missing")).is_err());
    }
}
