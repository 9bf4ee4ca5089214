//! Reference scorers that materialize the full next-word distribution.
//!
//! These re-derive every probability from the stored parameters with their
//! own code: a recursive backoff walk in probability space for n-grams and a
//! loop-nest forward pass with log-sum-exp softmaxes for the network.

// The loop nests mirror the formulas index by index on purpose.
#![allow(clippy::needless_range_loop)]

use crate::corpus::Sentence;
use crate::error::{Error, Result};
use crate::ngram::NgramModel;
use crate::rnnlm::{RnnModel, RnnParams, StepInput, CS_ABSENT};

/// Models the exhaustive scorer understands.
#[derive(Debug, Clone, Copy)]
pub enum AnyModel<'a> {
    Ngram(&'a NgramModel),
    Rnn(&'a RnnModel),
}

const NORMALIZATION_TOLERANCE: f64 = 1e-6;

fn ngram_prob(m: &NgramModel, history: &[u32], w: u32) -> f64 {
    if history.len() + 1 > m.order() {
        return ngram_prob(m, &history[1..], w);
    }
    let mut gram = history.to_vec();
    gram.push(w);
    if let Some(e) = m.entry(&gram) {
        return 10f64.powf(e.log10_prob);
    }
    if history.is_empty() {
        return 0.0;
    }
    let bow = m
        .entry(history)
        .and_then(|e| e.log10_backoff)
        .map_or(1.0, |b| 10f64.powf(b));
    bow * ngram_prob(m, &history[1..], w)
}

/// P(w | history) for every vocabulary id.
pub fn ngram_distribution(m: &NgramModel, history: &[u32]) -> Vec<f64> {
    (0..m.vocab().len() as u32).map(|w| ngram_prob(m, history, w)).collect()
}

fn log_softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + z.iter().map(|x| (x - max).exp()).sum::<f64>().ln();
    z.iter().map(|x| x - lse).collect()
}

/// Hidden state after consuming `input` from `prev`.
pub fn rnn_step(p: &RnnParams, use_word: bool, prev: &[f64], input: StepInput) -> Vec<f64> {
    let h = prev.len();
    let mut next = vec![0.0; h];
    for i in 0..h {
        let mut a = p.pos_in.get(input.pos as usize, i) + p.cs_in.get(input.cs as usize, i);
        if use_word {
            a += p.word_in.get(input.word as usize, i);
        }
        for j in 0..h {
            a += p.recurrent.get(i, j) * prev[j];
        }
        next[i] = 1.0 / (1.0 + (-a).exp());
    }
    next
}

/// Natural-log probability of every word given a hidden state, with the
/// class structure of `model` and the weights `p`.
pub fn rnn_log_distribution(model: &RnnModel, p: &RnnParams, state: &[f64]) -> Vec<f64> {
    let cm = model.classes();
    let h = state.len();
    let class_z: Vec<f64> = (0..cm.n_classes())
        .map(|k| (0..h).map(|i| state[i] * p.class_out.get(i, k)).sum())
        .collect();
    let class_lp = log_softmax(&class_z);
    let mut out = vec![f64::NEG_INFINITY; p.vocab_size()];
    for k in 0..cm.n_classes() {
        let members = cm.members(k as u32);
        let z: Vec<f64> = members
            .iter()
            .map(|&w| (0..h).map(|i| state[i] * p.word_out.get(i, w as usize)).sum())
            .collect();
        for (&w, lp) in members.iter().zip(log_softmax(&z)) {
            out[w as usize] = class_lp[k] + lp;
        }
    }
    out
}

/// Scores `sentence` token by token (OOV words as `<unk>`), checking that
/// each full distribution sums to 1. Returns log10 probabilities, one per
/// word plus `</s>`.
pub fn exhaustive_token_log10probs(model: AnyModel, sentence: &Sentence) -> Result<Vec<f64>> {
    let vocab = match model {
        AnyModel::Ngram(m) => m.vocab(),
        AnyModel::Rnn(m) => m.vocab(),
    };
    let targets: Vec<u32> = sentence
        .surfaces()
        .map(|w| vocab.id_or_unk(w))
        .chain(std::iter::once(vocab.eos()))
        .collect();
    let check = |sum: f64| {
        if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE || !sum.is_finite() {
            Err(Error::Unnormalized { sum })
        } else {
            Ok(())
        }
    };
    let mut out = Vec::with_capacity(targets.len());
    match model {
        AnyModel::Ngram(m) => {
            for (t, &w) in targets.iter().enumerate() {
                let dist = ngram_distribution(m, &targets[..t]);
                check(dist.iter().sum())?;
                out.push(dist[w as usize].log10());
            }
        }
        AnyModel::Rnn(m) => {
            let p = &m.params;
            let mut state = vec![0.5; p.hidden_size()];
            let mut input = StepInput {
                word: vocab.eos(),
                pos: p.n_pos_tags() as u32,
                cs: CS_ABSENT,
            };
            for (t, &w) in targets.iter().enumerate() {
                state = rnn_step(p, m.config.use_word, &state, input);
                let dist = rnn_log_distribution(m, p, &state);
                check(dist.iter().map(|x| x.exp()).sum())?;
                out.push(dist[w as usize] / std::f64::consts::LN_10);
                if t < sentence.len() {
                    input = m.input_of(&sentence.tokens[t]);
                }
            }
        }
    }
    Ok(out)
}

/// Total log10 probability of `sentence` including `</s>`.
pub fn exhaustive_logprob(model: AnyModel, sentence: &Sentence) -> Result<f64> {
    Ok(exhaustive_token_log10probs(model, sentence)?.iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::build_vocab;
    use crate::lm::SentenceScorer;
    use crate::ngram::Smoothing;
    use crate::oracle::MarkovSource;
    use crate::rnnlm::{FactorSet, RnnConfig};

    fn words(s: &str) -> Sentence {
        Sentence::from_words(&s.split(' ').collect::<Vec<_>>())
    }

    #[test]
    fn uniform_closed_form() {
        let train: Vec<Sentence> = (0..8).map(|i| words(&format!("x{i}"))).collect();
        let m = NgramModel::uniform(build_vocab::<&str>(&train, &[]));
        let lp = exhaustive_logprob(AnyModel::Ngram(&m), &words("x1 x2 x3")).unwrap();
        // four tokens (three words and `</s>`) at log10(1/10) each
        assert!((lp + 4.0).abs() < 1e-12);
    }

    #[test]
    fn deterministic_source_scores_zero() {
        let corpus = MarkovSource::cycle(4, 8).unwrap().gen_corpus(800, 1);
        let vocab = build_vocab::<&str>(&corpus, &[]);
        let m = NgramModel::train(&corpus, &vocab, 3, Smoothing::Mle { floor: 0.0 }).unwrap();
        // every sentence is w0 w1 w2 w3 w0 w1 w2 w3: after the first word the
        // path is certain except that `w2 w3` is followed by w0 or `</s>`
        // equally often
        let lps = exhaustive_token_log10probs(AnyModel::Ngram(&m), &corpus[0]).unwrap();
        let toks = &corpus[0].tokens;
        assert_eq!(lps.len(), toks.len() + 1);
        for (i, lp) in lps.iter().enumerate().skip(1) {
            let want = if toks[i - 1].surface == "w3" {
                0.5f64.log10()
            } else {
                0.0
            };
            assert!((lp - want).abs() < 1e-12, "{i}: {lps:?}");
        }
    }

    #[test]
    fn ngram_fast_path_agrees() {
        let corpus = MarkovSource::uniform(6, 7).unwrap().gen_corpus(300, 2);
        let vocab = build_vocab(&corpus[..30], &["zz"]);
        for smoothing in [
            Smoothing::KneserNey,
            Smoothing::WittenBell,
            Smoothing::Mle { floor: 0.3 },
        ] {
            let m = NgramModel::train(&corpus[..30], &vocab, 3, smoothing).unwrap();
            for s in &corpus[30..] {
                let fast: f64 = m.sentence_log10_probs(s).iter().sum();
                let slow = exhaustive_logprob(AnyModel::Ngram(&m), s).unwrap();
                assert!((fast - slow).abs() < 1e-10, "{smoothing}: {fast} vs {slow}");
            }
        }
    }

    #[test]
    fn rnn_fast_path_agrees() {
        let corpus = crate::corpus::parse_corpus("a|P:N|C:No b|P:V|C:Yes c\nb|P:N a|C:No\nc c a b|P:X").unwrap();
        let vocab = build_vocab::<&str>(&corpus[..2], &[]);
        let config = RnnConfig {
            hidden_size: 5,
            n_classes: 2,
            factors: FactorSet::ALL,
            seed: 11,
            ..RnnConfig::default()
        };
        let mut m = RnnModel::new(config, vocab, vec!["N".into(), "V".into()]).unwrap();
        for b in m.params.blocks_mut() {
            for x in b.data_mut() {
                *x *= 20.0;
            }
        }
        for s in &corpus {
            let fast = m.sentence_log10_probs(s);
            let slow = exhaustive_token_log10probs(AnyModel::Rnn(&m), s).unwrap();
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).abs() < 1e-10, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn broken_model_is_rejected() {
        let train = vec![words("a b")];
        let vocab = build_vocab::<&str>(&train, &[]);
        let text = NgramModel::train(&train, &vocab, 1, Smoothing::WittenBell)
            .unwrap()
            .to_arpa()
            .lines()
            .map(|l| {
                if l.ends_with("\ta") {
                    "-0.01\ta".to_owned()
                } else {
                    l.to_owned()
                }
            })
            .collect::<Vec<_>>()
            .join("\n");
        let m = NgramModel::from_arpa(&text).unwrap();
        assert!(matches!(
            exhaustive_logprob(AnyModel::Ngram(&m), &words("a")),
            Err(Error::Unnormalized { .. })
        ));
    }
}
