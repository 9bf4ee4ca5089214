//! What every language model in the crate exposes to the evaluation code.

use std::fmt;
use std::str::FromStr;

use crate::corpus::{Sentence, Vocabulary};
use crate::error::Result;
use crate::eval::{perplexity, EvalReport};

/// How out-of-vocabulary test tokens are scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum OovMode {
    /// Skip OOV tokens in the sum and the token count; report how many.
    #[default]
    Exclude,
    /// Score OOV tokens as `<unk>`.
    MapUnk,
}

impl fmt::Display for OovMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OovMode::Exclude => "exclude",
            OovMode::MapUnk => "map_unk",
        })
    }
}

impl FromStr for OovMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exclude" => Ok(OovMode::Exclude),
            "map_unk" | "map-unk" => Ok(OovMode::MapUnk),
            other => Err(format!("unknown OOV mode {other:?} (exclude|map_unk)")),
        }
    }
}

/// A trained model that can score sentences.
pub trait SentenceScorer: Send + Sync {
    /// Short descriptive identifier written into reports.
    fn model_id(&self) -> String;

    fn vocab(&self) -> &Vocabulary;

    /// log10 probability of every token of `sentence` followed by `</s>`,
    /// `len + 1` values in all. OOV tokens are scored (and fed forward as
    /// history) as `<unk>`; the caller decides whether to count them.
    fn sentence_log10_probs(&self, sentence: &Sentence) -> Vec<f64>;

    /// Perplexity of `test` in order. Models whose scoring depends on the
    /// order of sentences override this.
    fn evaluate(&self, test: &[Sentence], oov_mode: OovMode, corpus_id: &str) -> Result<EvalReport> {
        perplexity(self, test, oov_mode, corpus_id)
    }
}
