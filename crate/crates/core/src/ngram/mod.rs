//! Backoff n-gram language model: counting, smoothing, lookup and ARPA I/O.
//!
//! Probabilities are stored as log10 values the way ARPA files hold them: an
//! explicit entry for every seen n-gram plus a backoff weight on each context
//! that owns an explicit distribution. All three smoothing modes are
//! interpolated with the next lower order, and the unigram level is
//! interpolated with the uniform distribution over the vocabulary, so every
//! in-vocabulary word gets a finite probability whenever the smoothing leaves
//! any mass for unseen events.

mod arpa;
mod counts;
mod estimate;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

pub use arpa::{read_arpa, write_arpa};
pub use counts::{count_ngrams, NgramCounts};
pub use estimate::estimate;

use crate::corpus::{Sentence, Vocabulary};
use crate::error::Result;
use crate::eval::{perplexity, EvalReport};
use crate::lm::{OovMode, SentenceScorer};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Smoothing {
    /// Relative frequencies mixed with weight `floor` into the lower order.
    /// `floor = 0` is plain maximum likelihood.
    Mle { floor: f64 },
    /// Interpolated Witten-Bell.
    WittenBell,
    /// Interpolated modified Kneser-Ney with three discounts per order.
    #[default]
    KneserNey,
}

impl fmt::Display for Smoothing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Smoothing::Mle { floor } if *floor == 0.0 => f.write_str("mle"),
            Smoothing::Mle { floor } => write!(f, "mle:{floor}"),
            Smoothing::WittenBell => f.write_str("wb"),
            Smoothing::KneserNey => f.write_str("kn"),
        }
    }
}

impl FromStr for Smoothing {
    type Err = String;

    /// `mle`, `mle:<floor>`, `wb` or `kn`.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "mle" => Ok(Smoothing::Mle { floor: 0.0 }),
            "wb" => Ok(Smoothing::WittenBell),
            "kn" => Ok(Smoothing::KneserNey),
            other => {
                let floor = other
                    .strip_prefix("mle:")
                    .and_then(|f| f.parse::<f64>().ok())
                    .filter(|f| (0.0..1.0).contains(f))
                    .ok_or_else(|| format!("unknown smoothing {other:?} (mle|mle:<floor>|wb|kn)"))?;
                Ok(Smoothing::Mle { floor })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NgramEntry {
    pub log10_prob: f64,
    /// Present when the n-gram is itself a context with an explicit
    /// distribution.
    pub log10_backoff: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct NgramModel {
    pub(crate) order: usize,
    pub(crate) vocab: Vocabulary,
    pub(crate) smoothing: Option<Smoothing>,
    /// `grams[n - 1]` holds the n-grams.
    pub(crate) grams: Vec<HashMap<Vec<u32>, NgramEntry>>,
    pub(crate) warnings: Vec<String>,
}

impl NgramModel {
    pub(crate) fn from_parts(
        order: usize,
        vocab: Vocabulary,
        smoothing: Option<Smoothing>,
        grams: Vec<HashMap<Vec<u32>, NgramEntry>>,
        warnings: Vec<String>,
    ) -> Self {
        NgramModel {
            order,
            vocab,
            smoothing,
            grams,
            warnings,
        }
    }

    /// Counts `corpus` and estimates a model over `vocab`.
    pub fn train(corpus: &[Sentence], vocab: &Vocabulary, order: usize, smoothing: Smoothing) -> Result<Self> {
        let counts = count_ngrams(corpus, vocab, order)?;
        Ok(estimate(&counts, vocab, smoothing))
    }

    /// Unigram model giving every vocabulary entry probability `1/|V|`.
    pub fn uniform(vocab: Vocabulary) -> Self {
        let lp = -(vocab.len() as f64).log10();
        let unigrams = (0..vocab.len() as u32)
            .map(|id| {
                (
                    vec![id],
                    NgramEntry {
                        log10_prob: lp,
                        log10_backoff: None,
                    },
                )
            })
            .collect();
        NgramModel::from_parts(1, vocab, None, vec![unigrams], Vec::new())
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn smoothing(&self) -> Option<Smoothing> {
        self.smoothing
    }

    /// Problems met during estimation, e.g. Kneser-Ney discounts that could
    /// not be estimated for some order.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn entry(&self, ngram: &[u32]) -> Option<&NgramEntry> {
        self.grams.get(ngram.len().checked_sub(1)?)?.get(ngram)
    }

    /// Number of explicit n-grams of each order.
    pub fn ngram_counts(&self) -> Vec<usize> {
        self.grams.iter().map(HashMap::len).collect()
    }

    #[cfg(test)]
    pub(crate) fn grams(&self) -> &[HashMap<Vec<u32>, NgramEntry>] {
        &self.grams
    }

    /// log10 P(word | history) by the backoff recursion. Only the last
    /// `order - 1` history words matter.
    pub fn log10_prob(&self, history: &[u32], word: u32) -> f64 {
        let keep = history.len().min(self.order - 1);
        let history = &history[history.len() - keep..];
        let mut key = Vec::with_capacity(keep + 1);
        let mut backoff = 0.0;
        for start in 0..=keep {
            let context = &history[start..];
            key.clear();
            key.extend_from_slice(context);
            key.push(word);
            if let Some(e) = self.grams[context.len()].get(&key) {
                return backoff + e.log10_prob;
            }
            if !context.is_empty() {
                if let Some(bow) = self.grams[context.len() - 1].get(context).and_then(|e| e.log10_backoff) {
                    backoff += bow;
                }
            }
        }
        f64::NEG_INFINITY
    }

    pub fn ppl(&self, test: &[Sentence], oov_mode: OovMode, corpus_id: &str) -> Result<EvalReport> {
        perplexity(self, test, oov_mode, corpus_id)
    }
}

impl SentenceScorer for NgramModel {
    fn model_id(&self) -> String {
        match self.smoothing {
            Some(s) => format!("ngram-o{}-{}", self.order, s),
            None => format!("ngram-o{}", self.order),
        }
    }

    fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    fn sentence_log10_probs(&self, sentence: &Sentence) -> Vec<f64> {
        let mut history: Vec<u32> = Vec::with_capacity(sentence.len() + 1);
        let mut out = Vec::with_capacity(sentence.len() + 1);
        let ids = sentence
            .surfaces()
            .map(|w| self.vocab.id_or_unk(w))
            .chain(std::iter::once(self.vocab.eos()));
        for id in ids {
            out.push(self.log10_prob(&history, id));
            history.push(id);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::build_vocab;

    fn words(w: &[&str]) -> Sentence {
        Sentence::from_words(w)
    }

    #[test]
    fn smoothing_parse() {
        assert_eq!("kn".parse::<Smoothing>().unwrap(), Smoothing::KneserNey);
        assert_eq!("mle:0.25".parse::<Smoothing>().unwrap(), Smoothing::Mle { floor: 0.25 });
        assert!("mle:1.5".parse::<Smoothing>().is_err());
        assert!("gt".parse::<Smoothing>().is_err());
        for s in ["kn", "wb", "mle", "mle:0.1"] {
            assert_eq!(s.parse::<Smoothing>().unwrap().to_string(), s);
        }
    }

    #[test]
    fn uniform_unigram() {
        let corpus: Vec<Sentence> = (0..8).map(|i| words(&[&format!("w{i}")])).collect();
        let vocab = build_vocab::<&str>(&corpus, &[]);
        assert_eq!(vocab.len(), 10);
        let m = NgramModel::uniform(vocab);
        for id in 0..10 {
            assert!((m.log10_prob(&[3, 4], id) + 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn full_order_hit_returns_stored_value() {
        let corpus = vec![words(&["a", "b", "c", "a", "b", "d"])];
        let vocab = build_vocab::<&str>(&corpus, &[]);
        let m = NgramModel::train(&corpus, &vocab, 3, Smoothing::WittenBell).unwrap();
        let ids: Vec<u32> = ["a", "b", "c"].iter().map(|w| vocab.id(w).unwrap()).collect();
        let stored = m.entry(&ids).unwrap().log10_prob;
        assert_eq!(m.log10_prob(&ids[..2], ids[2]), stored);
        // a longer history is truncated to the last two words
        assert_eq!(m.log10_prob(&[ids[2], ids[0], ids[1]], ids[2]), stored);
    }

    #[test]
    fn scores_sentence_with_eos() {
        let corpus = vec![words(&["a", "b"])];
        let vocab = build_vocab::<&str>(&corpus, &[]);
        let m = NgramModel::train(&corpus, &vocab, 2, Smoothing::Mle { floor: 0.0 }).unwrap();
        let lp = m.sentence_log10_probs(&words(&["a", "b"]));
        assert_eq!(lp.len(), 3);
        // P(a) = 1/3 at the unigram level, then P(b|a) = P(</s>|b) = 1
        assert!((lp[0] - (1.0f64 / 3.0).log10()).abs() < 1e-12);
        assert_eq!(&lp[1..], &[0.0, 0.0]);
    }
}
