use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::MarkovSource;
use crate::corpus::{CsLabel, FactoredToken, Sentence};
use crate::error::{Error, Result};

/// Parallel native / code-switched text with known switch sites.
///
/// A Markov chain over word classes drives both sides. Each position emits
/// a native word of its class, chosen uniformly; in a switchable class the
/// mixed side replaces it, with probability `switch_prob[class]`, by a
/// uniformly chosen word from that class's foreign inventory. Tokens carry
/// the class as their POS tag and the true switch flag as their CS label on
/// both sides.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchSource {
    /// States are the class tags.
    pub classes: MarkovSource,
    pub native: Vec<Vec<String>>,
    pub foreign: Vec<Vec<String>>,
    pub switch_prob: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwitchCorpus {
    pub native: Vec<Sentence>,
    pub mixed: Vec<Sentence>,
}

/// Consonants and vowel signs for native (Devanagari) words.
const CONSONANTS: [char; 16] = [
    'क', 'ख', 'ग', 'च', 'ज', 'ट', 'ड', 'त', 'द', 'न', 'प', 'ब', 'म', 'र', 'ल', 'स',
];
const MATRAS: [&str; 6] = ["", "\u{093E}", "\u{093F}", "\u{0940}", "\u{0941}", "\u{0947}"];

/// Distinct for distinct `i`: two syllables plus a disambiguating third.
fn native_word(i: usize) -> String {
    let syll = |k: usize| format!("{}{}", CONSONANTS[k % 16], MATRAS[(k / 16) % 6]);
    let n = 16 * 6;
    format!("{}{}{}", syll(i % n), syll((i / n) % n), syll(i / (n * n) + 7))
}

fn foreign_word(i: usize) -> String {
    const C: &[u8] = b"bcdfghklmnprstvz";
    const V: &[u8] = b"aeiou";
    let mut w = String::new();
    let mut k = i;
    for _ in 0..3 {
        w.push(C[k % C.len()] as char);
        k /= C.len();
        w.push(V[k % V.len()] as char);
        k /= V.len();
    }
    w
}

impl SwitchSource {
    pub fn new(
        classes: MarkovSource,
        native: Vec<Vec<String>>,
        foreign: Vec<Vec<String>>,
        switch_prob: Vec<f64>,
    ) -> Result<Self> {
        let k = classes.n_states();
        if native.len() != k || foreign.len() != k || switch_prob.len() != k {
            return Err(Error::InvalidArgument(format!("expected {k} classes throughout")));
        }
        for c in 0..k {
            if native[c].is_empty() {
                return Err(Error::InvalidArgument(format!("class {c} has no native words")));
            }
            if !(0.0..=1.0).contains(&switch_prob[c]) || (switch_prob[c] > 0.0 && foreign[c].is_empty()) {
                return Err(Error::InvalidArgument(format!("class {c}: bad switch setup")));
            }
        }
        Ok(SwitchSource {
            classes,
            native,
            foreign,
            switch_prob,
        })
    }

    /// Eight classes `C0..C7` of `words_per_class` native words. Class `i`
    /// is followed by class `(3i + 1) mod 8` with probability 0.6, by
    /// `(5i + 2) mod 8` with 0.25, and uniformly otherwise. Classes `C0..C3`
    /// switch with probability `rho` and share `n_foreign` foreign words
    /// equally. Sentences have 6 to 14 tokens.
    pub fn standard(rho: f64, n_foreign: usize, words_per_class: usize) -> Result<Self> {
        const K: usize = 8;
        const SWITCHABLE: usize = 4;
        let transition = (0..K)
            .map(|i| {
                let mut row = vec![0.15 / K as f64; K];
                row[(3 * i + 1) % K] += 0.6;
                row[(5 * i + 2) % K] += 0.25;
                row
            })
            .collect();
        let tags = (0..K).map(|i| format!("C{i}")).collect();
        let chain = MarkovSource::new(tags, transition, vec![1.0 / K as f64; K], 6, 14)?;
        let native = (0..K)
            .map(|c| {
                (0..words_per_class)
                    .map(|j| native_word(c * words_per_class + j))
                    .collect()
            })
            .collect();
        let mut foreign = vec![Vec::new(); K];
        for i in 0..n_foreign {
            foreign[i % SWITCHABLE].push(foreign_word(i));
        }
        let switch_prob = (0..K).map(|c| if c < SWITCHABLE { rho } else { 0.0 }).collect();
        Self::new(chain, native, foreign, switch_prob)
    }

    pub fn gen_corpus(&self, n_tokens: usize, seed: u64) -> SwitchCorpus {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut native = Vec::new();
        let mut mixed = Vec::new();
        for classes in self.classes.sample_states(n_tokens, &mut rng) {
            let mut n = Vec::with_capacity(classes.len());
            let mut m = Vec::with_capacity(classes.len());
            for c in classes {
                let tag = self.classes.words[c].as_str();
                let word = &self.native[c][rng.gen_range(0..self.native[c].len())];
                let switched = self.switch_prob[c] > 0.0 && rng.gen_bool(self.switch_prob[c]);
                let label = if switched { CsLabel::Yes } else { CsLabel::No };
                n.push(FactoredToken::new(word.as_str(), Some(tag), Some(label)));
                let surface = if switched {
                    &self.foreign[c][rng.gen_range(0..self.foreign[c].len())]
                } else {
                    word
                };
                m.push(FactoredToken::new(surface.as_str(), Some(tag), Some(label)));
            }
            native.push(Sentence::new(n));
            mixed.push(Sentence::new(m));
        }
        SwitchCorpus { native, mixed }
    }
}
