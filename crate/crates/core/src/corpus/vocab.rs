use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::Sentence;
use crate::error::{Error, Result};

pub const UNK: &str = "<unk>";
pub const EOS: &str = "</s>";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VocabEntry {
    pub word: String,
    pub count: u64,
    /// Injected from an outside word list rather than learned from training text.
    pub augmented: bool,
}

/// Dense word ↔ id map. Ids follow descending count, ties broken by word.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    entries: Vec<VocabEntry>,
    index: HashMap<String, u32>,
    unk: u32,
    eos: u32,
}

/// Counts every surface in `train` (plus one `</s>` per sentence) and adds the
/// `augment` words, flagged, so they are never out of vocabulary.
pub fn build_vocab<S: AsRef<str>>(train: &[Sentence], augment: &[S]) -> Vocabulary {
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for s in train {
        for w in s.surfaces() {
            *counts.entry(w).or_default() += 1;
        }
    }
    *counts.entry(EOS).or_default() += train.len() as u64;
    counts.entry(UNK).or_default();

    let mut entries: Vec<VocabEntry> = counts
        .into_iter()
        .map(|(w, c)| VocabEntry {
            word: w.to_owned(),
            count: c,
            augmented: false,
        })
        .collect();
    let mut seen: HashMap<String, usize> = entries.iter().enumerate().map(|(i, e)| (e.word.clone(), i)).collect();
    for w in augment {
        let w = w.as_ref();
        if w == UNK || w == EOS {
            continue;
        }
        match seen.get(w) {
            Some(&i) => entries[i].augmented = true,
            None => {
                seen.insert(w.to_owned(), entries.len());
                entries.push(VocabEntry {
                    word: w.to_owned(),
                    count: 0,
                    augmented: true,
                });
            }
        }
    }
    Vocabulary::from_unsorted(entries)
}

impl Vocabulary {
    fn from_unsorted(mut entries: Vec<VocabEntry>) -> Self {
        entries.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.word.cmp(&b.word)));
        Self::from_ordered(entries).expect("specials are always present")
    }

    /// Takes entries in id order. Specials are added at the end when missing.
    pub fn from_ordered(mut entries: Vec<VocabEntry>) -> Result<Self> {
        for special in [UNK, EOS] {
            if !entries.iter().any(|e| e.word == special) {
                entries.push(VocabEntry {
                    word: special.to_owned(),
                    count: 0,
                    augmented: false,
                });
            }
        }
        let mut index = HashMap::with_capacity(entries.len());
        for (i, e) in entries.iter().enumerate() {
            if e.word.is_empty() || e.word.chars().any(char::is_whitespace) {
                return Err(Error::InvalidArgument(format!(
                    "vocabulary word {:?} is empty or contains whitespace",
                    e.word
                )));
            }
            if index.insert(e.word.clone(), i as u32).is_some() {
                return Err(Error::InvalidArgument(format!(
                    "duplicate vocabulary word {:?}",
                    e.word
                )));
            }
        }
        let unk = index[UNK];
        let eos = index[EOS];
        Ok(Vocabulary {
            entries,
            index,
            unk,
            eos,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn id(&self, word: &str) -> Option<u32> {
        self.index.get(word).copied()
    }

    pub fn id_or_unk(&self, word: &str) -> u32 {
        self.id(word).unwrap_or(self.unk)
    }

    pub fn word(&self, id: u32) -> &str {
        &self.entries[id as usize].word
    }

    pub fn count(&self, id: u32) -> u64 {
        self.entries[id as usize].count
    }

    pub fn entries(&self) -> &[VocabEntry] {
        &self.entries
    }

    pub fn unk(&self) -> u32 {
        self.unk
    }

    pub fn eos(&self) -> u32 {
        self.eos
    }

    pub fn is_special(&self, id: u32) -> bool {
        id == self.unk || id == self.eos
    }

    /// `word<TAB>count<TAB>flags` per entry in id order. Flags are `special`,
    /// `augmented` or `-`.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (i, e) in self.entries.iter().enumerate() {
            let flags = if self.is_special(i as u32) {
                "special"
            } else if e.augmented {
                "augmented"
            } else {
                "-"
            };
            writeln!(out, "{}\t{}\t{}", e.word, e.count, flags).unwrap();
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<Self> {
        let bad = |line: usize, message: String| Error::Format {
            what: "vocabulary",
            line,
            message,
        };
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let [word, count, flags] = fields[..] else {
                return Err(bad(i + 1, format!("expected 3 fields, got {}", fields.len())));
            };
            let count = count
                .parse()
                .map_err(|e| bad(i + 1, format!("bad count {count:?}: {e}")))?;
            let augmented = match flags {
                "augmented" => true,
                "-" | "special" => false,
                other => return Err(bad(i + 1, format!("unknown flag {other:?}"))),
            };
            entries.push(VocabEntry {
                word: word.to_owned(),
                count,
                augmented,
            });
        }
        Self::from_ordered(entries)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_tsv(&fs::read_to_string(path).map_err(|e| Error::file(path, e))?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_tsv()).map_err(|e| Error::file(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn counts_and_specials() {
        let v = build_vocab::<&str>(&[Sentence::from_words(&["a", "b", "a"])], &[]);
        let a = v.id("a").unwrap();
        let b = v.id("b").unwrap();
        assert_eq!(v.count(a), 2);
        assert_eq!(v.count(b), 1);
        assert_eq!(v.count(v.eos()), 1);
        assert_eq!(v.count(v.unk()), 0);
        assert_eq!(v.len(), 4);
        // a:2, then "</s>" < "b" at count 1, then <unk>:0
        let order: Vec<&str> = (0..4).map(|i| v.word(i)).collect();
        assert_eq!(order, vec!["a", "</s>", "b", "<unk>"]);
    }

    #[test]
    fn augmented_word_has_zero_count() {
        let v = build_vocab(&[Sentence::from_words(&["a"])], &["z"]);
        let z = v.id("z").unwrap();
        assert_eq!(v.count(z), 0);
        assert!(v.entries()[z as usize].augmented);
        assert!(!v.entries()[v.id("a").unwrap() as usize].augmented);
    }

    #[test]
    fn tsv_round_trip() {
        let v = build_vocab(&[Sentence::from_words(&["x", "y", "x"])], &["q", "x"]);
        let back = Vocabulary::from_tsv(&v.to_tsv()).unwrap();
        assert_eq!(back, v);
        assert!(v.to_tsv().contains("q\t0\taugmented\n"));
    }

    #[test]
    fn tsv_rejects_garbage() {
        assert!(Vocabulary::from_tsv("a\t1\n").is_err());
        assert!(Vocabulary::from_tsv("a\tx\t-\n").is_err());
        assert!(Vocabulary::from_tsv("a\t1\t-\na\t2\t-\n").is_err());
    }

    proptest! {
        #[test]
        fn ids_are_a_bijection(
            corpus in proptest::collection::vec(proptest::collection::vec("[a-e]{1,2}", 1..6), 0..8),
            augment in proptest::collection::vec("[d-h]{1,2}", 0..4),
        ) {
            let sentences: Vec<Sentence> = corpus.iter().map(|s| Sentence::from_words(s)).collect();
            let v = build_vocab(&sentences, &augment);
            for id in 0..v.len() as u32 {
                prop_assert_eq!(v.id(v.word(id)), Some(id));
            }
            for e in v.entries() {
                let special = e.word == UNK || e.word == EOS;
                prop_assert!(special || e.count >= 1 || e.augmented);
            }
            for w in &augment {
                prop_assert!(v.id(w).is_some());
            }
            let counts: Vec<u64> = v.entries().iter().map(|e| e.count).collect();
            prop_assert!(counts.windows(2).all(|w| w[0] >= w[1]));
        }
    }
}
