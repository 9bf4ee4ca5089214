use std::collections::HashSet;
use std::fmt;

use super::{is_latin_letter, Sentence};

/// Sentence, word and unique-word counts split by script class. A word
/// containing any Latin letter counts as Latin (the embedded language);
/// everything else counts as native.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CorpusStats {
    pub sentences: usize,
    pub words_native: usize,
    pub words_latin: usize,
    pub unique_native: usize,
    pub unique_latin: usize,
}

pub fn corpus_stats(corpus: &[Sentence]) -> CorpusStats {
    let mut stats = CorpusStats {
        sentences: corpus.len(),
        ..Default::default()
    };
    let mut native = HashSet::new();
    let mut latin = HashSet::new();
    for w in corpus.iter().flat_map(Sentence::surfaces) {
        if w.chars().any(is_latin_letter) {
            stats.words_latin += 1;
            latin.insert(w);
        } else {
            stats.words_native += 1;
            native.insert(w);
        }
    }
    stats.unique_native = native.len();
    stats.unique_latin = latin.len();
    stats
}

impl fmt::Display for CorpusStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "sentences: {}", self.sentences)?;
        writeln!(f, "words_native: {}", self.words_native)?;
        writeln!(f, "words_latin: {}", self.words_latin)?;
        writeln!(f, "unique_native: {}", self.unique_native)?;
        writeln!(f, "unique_latin: {}", self.unique_latin)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_corpus;

    #[test]
    fn splits_by_script() {
        let corpus = parse_corpus("मेरा computer नया है\nमेरा phone|P:NN google\n").unwrap();
        let s = corpus_stats(&corpus);
        assert_eq!(
            s,
            CorpusStats {
                sentences: 2,
                words_native: 4,
                words_latin: 3,
                unique_native: 3,
                unique_latin: 3,
            }
        );
        let text = s.to_string();
        assert!(text.starts_with("sentences: 2\nwords_native: 4\n"));
        assert_eq!(text.lines().count(), 5);
    }
}
