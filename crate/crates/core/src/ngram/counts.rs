use std::collections::BTreeMap;

use crate::corpus::{Sentence, Vocabulary};
use crate::error::{Error, Result};

/// Raw n-gram counts for orders `1..=order`.
///
/// `table[m]` maps a context of length `m` to successor counts. There is no
/// sentence-start token: a word at position `i` is counted only with contexts
/// of length at most `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NgramCounts {
    pub order: usize,
    pub table: Vec<BTreeMap<Vec<u32>, BTreeMap<u32, u64>>>,
    /// N-grams (lengths `1..=order`) that open a sentence, with how often.
    pub initial: BTreeMap<Vec<u32>, u64>,
}

pub fn count_ngrams(corpus: &[Sentence], vocab: &Vocabulary, order: usize) -> Result<NgramCounts> {
    if order == 0 {
        return Err(Error::InvalidArgument("n-gram order must be at least 1".into()));
    }
    let mut table = vec![BTreeMap::<Vec<u32>, BTreeMap<u32, u64>>::new(); order];
    let mut initial = BTreeMap::new();
    for sentence in corpus {
        let ids: Vec<u32> = sentence
            .surfaces()
            .map(|w| vocab.id_or_unk(w))
            .chain(std::iter::once(vocab.eos()))
            .collect();
        for (i, &w) in ids.iter().enumerate() {
            for m in 0..order.min(i + 1) {
                *table[m]
                    .entry(ids[i - m..i].to_vec())
                    .or_default()
                    .entry(w)
                    .or_default() += 1;
            }
        }
        for len in 1..=order.min(ids.len()) {
            *initial.entry(ids[..len].to_vec()).or_default() += 1;
        }
    }
    Ok(NgramCounts { order, table, initial })
}

impl NgramCounts {
    pub fn count(&self, context: &[u32], word: u32) -> u64 {
        self.table
            .get(context.len())
            .and_then(|t| t.get(context))
            .and_then(|s| s.get(&word))
            .copied()
            .unwrap_or(0)
    }

    pub fn context_total(&self, context: &[u32]) -> u64 {
        self.table
            .get(context.len())
            .and_then(|t| t.get(context))
            .map_or(0, |s| s.values().sum())
    }

    pub fn is_empty(&self) -> bool {
        self.table.iter().all(BTreeMap::is_empty)
    }
}
