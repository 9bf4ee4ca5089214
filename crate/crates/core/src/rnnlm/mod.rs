//! Factored recurrent-network language model with a class-factorized output.
//!
//! At step `t` the input is the previous token: its word row, its POS row and
//! its CS row are summed with the recurrent term and squashed,
//!
//! ```text
//! s_t = sigmoid(W_word[w_{t-1}] + W_pos[p_{t-1}] + W_cs[c_{t-1}] + R s_{t-1})
//! P(w_t) = softmax(U_c^T s_t)[class(w_t)] * softmax over class members(U_w^T s_t)[w_t]
//! ```
//!
//! Factors that are disabled or missing use the block's dedicated `absent`
//! row. Each sentence starts from the state `0.5 * 1` (the image of a zero
//! pre-activation) with `</s>` as the previous word and both factors absent.
//! Log probabilities are natural internally and log10 at the scorer boundary.

mod classes;
mod gradcheck;
mod io;
mod params;
mod train;

use std::fmt;
use std::str::FromStr;

pub use classes::{assign_classes, ClassMap};
pub use gradcheck::{grad_check, GradCheckReport};
pub use io::{read_model, write_model, MODEL_MAGIC, MODEL_VERSION};
pub use params::{Matrix, RnnParams, BLOCK_NAMES, CS_ABSENT, CS_NO, CS_YES};
pub use train::{pos_inventory, train, train_with_vocab, EpochLog, Trained};

use crate::corpus::{CsLabel, FactoredToken, Sentence, Vocabulary};
use crate::error::{Error, Result};
use crate::eval::{perplexity, EvalReport};
use crate::lm::{OovMode, SentenceScorer};

/// Which factors feed the input layer besides the word itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct FactorSet {
    pub pos: bool,
    pub cs: bool,
}

impl FactorSet {
    pub const NONE: FactorSet = FactorSet { pos: false, cs: false };
    pub const ALL: FactorSet = FactorSet { pos: true, cs: true };
}

impl fmt::Display for FactorSet {
    /// `none`, `pos`, `cs` or `pos+cs`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match (self.pos, self.cs) {
            (false, false) => "none",
            (true, false) => "pos",
            (false, true) => "cs",
            (true, true) => "pos+cs",
        })
    }
}

impl FromStr for FactorSet {
    type Err = String;

    /// A `+` or `,` separated list of `pos`, `cs`; `none` or empty for neither.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let mut set = FactorSet::NONE;
        for part in s.split(['+', ',']).map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "pos" => set.pos = true,
                "cs" => set.cs = true,
                "none" => {}
                other => return Err(format!("unknown factor {other:?} (pos|cs|none)")),
            }
        }
        Ok(set)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RnnConfig {
    pub hidden_size: usize,
    pub n_classes: usize,
    /// Steps an error is propagated through, counting the current one.
    pub bptt_steps: usize,
    pub factors: FactorSet,
    /// When false the previous word's own row is left out of the input.
    pub use_word: bool,
    /// Keep the hidden state across sentence boundaries.
    pub carry_state: bool,
    pub lr0: f64,
    /// Minimum ratio of consecutive validation perplexities that counts as
    /// progress.
    pub lr_halve_threshold: f64,
    pub max_epochs: usize,
    pub seed: u64,
}

impl Default for RnnConfig {
    fn default() -> Self {
        RnnConfig {
            hidden_size: 300,
            n_classes: 50,
            bptt_steps: 5,
            factors: FactorSet::ALL,
            use_word: true,
            carry_state: false,
            lr0: 0.1,
            lr_halve_threshold: 1.003,
            max_epochs: 30,
            seed: 1,
        }
    }
}

impl RnnConfig {
    pub fn validate(&self, vocab_size: usize) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.hidden_size == 0 {
            return fail("hidden_size must be at least 1".into());
        }
        if self.bptt_steps == 0 {
            return fail("bptt_steps must be at least 1".into());
        }
        if self.n_classes == 0 || self.n_classes > vocab_size {
            return fail(format!(
                "n_classes = {} must be between 1 and the vocabulary size {vocab_size}",
                self.n_classes
            ));
        }
        if !(self.lr0 > 0.0 && self.lr0.is_finite()) {
            return fail(format!("lr0 = {} must be positive", self.lr0));
        }
        if !(self.lr_halve_threshold > 0.0 && self.lr_halve_threshold.is_finite()) {
            return fail(format!(
                "lr_halve_threshold = {} must be positive",
                self.lr_halve_threshold
            ));
        }
        if self.max_epochs == 0 {
            return fail("max_epochs must be at least 1".into());
        }
        Ok(())
    }

    /// `key = value` pairs in a fixed order; values use shortest round-trip
    /// formatting so the text form is lossless.
    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        vec![
            ("hidden_size", self.hidden_size.to_string()),
            ("n_classes", self.n_classes.to_string()),
            ("bptt_steps", self.bptt_steps.to_string()),
            ("factors", self.factors.to_string()),
            ("use_word", self.use_word.to_string()),
            ("carry_state", self.carry_state.to_string()),
            ("lr0", self.lr0.to_string()),
            ("lr_halve_threshold", self.lr_halve_threshold.to_string()),
            ("max_epochs", self.max_epochs.to_string()),
            ("seed", self.seed.to_string()),
        ]
    }

    /// Applies one `key = value` setting. Returns false for unknown keys.
    pub fn set(&mut self, key: &str, value: &str) -> Result<bool> {
        fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::Config(format!("bad value {value:?} for {key}")))
        }
        match key {
            "hidden_size" => self.hidden_size = parse(key, value)?,
            "n_classes" => self.n_classes = parse(key, value)?,
            "bptt_steps" => self.bptt_steps = parse(key, value)?,
            "factors" => {
                self.factors = value
                    .parse()
                    .map_err(|e: String| Error::Config(format!("{key}: {e}")))?
            }
            "use_word" => self.use_word = parse(key, value)?,
            "carry_state" => self.carry_state = parse(key, value)?,
            "lr0" => self.lr0 = parse(key, value)?,
            "lr_halve_threshold" => self.lr_halve_threshold = parse(key, value)?,
            "max_epochs" => self.max_epochs = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            _ => return Ok(false),
        }
        Ok(true)
    }

    /// Canonical one-line form of every setting except `skip`.
    pub fn fingerprint_without(&self, skip: &[&str]) -> String {
        self.to_pairs()
            .into_iter()
            .filter(|(k, _)| !skip.contains(k))
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(";")
    }

    pub fn fingerprint(&self) -> String {
        self.fingerprint_without(&[])
    }
}

/// Resolved ids of one input token.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepInput {
    pub word: u32,
    /// POS row; `n_pos_tags` is the absent row.
    pub pos: u32,
    /// One of [`CS_YES`], [`CS_NO`], [`CS_ABSENT`].
    pub cs: u32,
}

/// Output of one forward step.
#[derive(Debug, Clone, PartialEq)]
pub struct Forward {
    pub state: Vec<f64>,
    pub class_probs: Vec<f64>,
}

/// A trained (or freshly initialized) network with everything needed to
/// score text.
#[derive(Debug, Clone, PartialEq)]
pub struct RnnModel {
    pub config: RnnConfig,
    vocab: Vocabulary,
    classes: ClassMap,
    /// Sorted; the position of a tag is its row in `W_pos`.
    pos_tags: Vec<String>,
    pub params: RnnParams,
}

impl RnnModel {
    /// Fresh model with seeded random weights.
    pub fn new(config: RnnConfig, vocab: Vocabulary, pos_tags: Vec<String>) -> Result<Self> {
        config.validate(vocab.len())?;
        let classes = assign_classes(&vocab, config.n_classes)?;
        let params = RnnParams::init(
            vocab.len(),
            pos_tags.len(),
            config.hidden_size,
            config.n_classes,
            config.seed,
        );
        Self::from_parts(config, vocab, classes, pos_tags, params)
    }

    /// Checks that all parts agree on sizes.
    pub fn from_parts(
        config: RnnConfig,
        vocab: Vocabulary,
        classes: ClassMap,
        mut pos_tags: Vec<String>,
        params: RnnParams,
    ) -> Result<Self> {
        config.validate(vocab.len())?;
        let want = RnnParams::zeros(vocab.len(), pos_tags.len(), config.hidden_size, config.n_classes);
        for ((have, want), name) in params.blocks().iter().zip(want.blocks()).zip(BLOCK_NAMES) {
            if (have.rows(), have.cols()) != (want.rows(), want.cols()) {
                return Err(Error::Config(format!(
                    "{name} is {}x{}, expected {}x{}",
                    have.rows(),
                    have.cols(),
                    want.rows(),
                    want.cols()
                )));
            }
        }
        if classes.assignment().len() != vocab.len() || classes.n_classes() != config.n_classes {
            return Err(Error::Config("class map does not match the vocabulary".into()));
        }
        let n = pos_tags.len();
        pos_tags.sort();
        pos_tags.dedup();
        if pos_tags.len() != n {
            return Err(Error::Config("duplicate POS tags".into()));
        }
        Ok(RnnModel {
            config,
            vocab,
            classes,
            pos_tags,
            params,
        })
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn classes(&self) -> &ClassMap {
        &self.classes
    }

    pub fn pos_tags(&self) -> &[String] {
        &self.pos_tags
    }

    pub fn absent_pos(&self) -> u32 {
        self.pos_tags.len() as u32
    }

    /// Input ids for `token`. OOV words map to `<unk>`; unknown or disabled
    /// factors map to the absent rows.
    pub fn input_of(&self, token: &FactoredToken) -> StepInput {
        let pos = match (&token.pos, self.config.factors.pos) {
            (Some(tag), true) => self.pos_tags.binary_search(tag).map_or(self.absent_pos(), |i| i as u32),
            _ => self.absent_pos(),
        };
        let cs = match (token.cs, self.config.factors.cs) {
            (Some(CsLabel::Yes), true) => CS_YES,
            (Some(CsLabel::No), true) => CS_NO,
            _ => CS_ABSENT,
        };
        StepInput {
            word: self.vocab.id_or_unk(&token.surface),
            pos,
            cs,
        }
    }

    /// Input before the first word of a sentence.
    pub fn start_input(&self) -> StepInput {
        StepInput {
            word: self.vocab.eos(),
            pos: self.absent_pos(),
            cs: CS_ABSENT,
        }
    }

    pub fn initial_state(&self) -> Vec<f64> {
        vec![0.5; self.config.hidden_size]
    }

    /// `(inputs, targets)` for a sentence: inputs start with
    /// [`start_input`](Self::start_input), targets end with `</s>`.
    pub fn sequence(&self, sentence: &Sentence) -> (Vec<StepInput>, Vec<u32>) {
        let mut inputs = Vec::with_capacity(sentence.len() + 1);
        inputs.push(self.start_input());
        inputs.extend(sentence.tokens.iter().map(|t| self.input_of(t)));
        let targets = sentence
            .surfaces()
            .map(|w| self.vocab.id_or_unk(w))
            .chain(std::iter::once(self.vocab.eos()))
            .collect();
        (inputs, targets)
    }

    fn check_input(&self, input: StepInput) -> Result<()> {
        let checks = [
            ("word", input.word as usize, self.vocab.len()),
            ("POS row", input.pos as usize, self.pos_tags.len() + 1),
            ("CS row", input.cs as usize, 3),
        ];
        for (what, id, size) in checks {
            if id >= size {
                return Err(Error::IdOutOfRange { what, id, size });
            }
        }
        Ok(())
    }

    /// One step: the new hidden state and the class distribution.
    pub fn forward(&self, state: &[f64], input: StepInput) -> Result<Forward> {
        self.check_input(input)?;
        if state.len() != self.config.hidden_size {
            return Err(Error::LengthMismatch {
                expected: self.config.hidden_size,
                got: state.len(),
            });
        }
        let mut next = vec![0.0; state.len()];
        hidden_step(&self.params, self.config.use_word, state, input, &mut next);
        let mut class_probs = vec![0.0; self.classes.n_classes()];
        class_distribution(&self.params, &next, &mut class_probs);
        Ok(Forward {
            state: next,
            class_probs,
        })
    }

    /// Distribution over the members of `class` (in member order) given a
    /// hidden state.
    pub fn word_probs(&self, state: &[f64], class: u32) -> Vec<f64> {
        let members = self.classes.members(class);
        let mut out = vec![0.0; members.len()];
        member_distribution(&self.params, state, members, &mut out);
        out
    }

    /// Natural-log probability of `target` after consuming `input`, and the
    /// advanced state.
    pub fn token_logprob(&self, state: &[f64], input: StepInput, target: u32) -> Result<(f64, Vec<f64>)> {
        if target as usize >= self.vocab.len() {
            return Err(Error::IdOutOfRange {
                what: "word",
                id: target as usize,
                size: self.vocab.len(),
            });
        }
        let f = self.forward(state, input)?;
        let class = self.classes.class_of(target);
        let within = self.word_probs(&f.state, class)[self.classes.slot(target)];
        Ok((f.class_probs[class as usize].ln() + within.ln(), f.state))
    }

    /// Natural-log probabilities of the words of `sentence` and `</s>`,
    /// starting from `state` (the reset state unless state is carried).
    pub fn sentence_ln_probs_from(&self, state: &mut Vec<f64>, sentence: &Sentence) -> Vec<f64> {
        let (inputs, targets) = self.sequence(sentence);
        let mut scratch = Scratch::new(&self.params);
        let mut out = Vec::with_capacity(targets.len());
        for (input, &target) in inputs.iter().zip(&targets) {
            hidden_step(&self.params, self.config.use_word, state, *input, &mut scratch.state);
            std::mem::swap(state, &mut scratch.state);
            out.push(target_ln_prob(&self.params, &self.classes, state, target, &mut scratch));
        }
        out
    }

    pub fn sentence_ln_probs(&self, sentence: &Sentence) -> Vec<f64> {
        self.sentence_ln_probs_from(&mut self.initial_state(), sentence)
    }

    /// Perplexity with the shared accounting. With `carry_state` the hidden
    /// state flows from one test sentence into the next.
    pub fn ppl(&self, test: &[Sentence], oov_mode: OovMode, corpus_id: &str) -> Result<EvalReport> {
        rnn_ppl(self, test, oov_mode, corpus_id)
    }
}

pub fn rnn_ppl(model: &RnnModel, test: &[Sentence], oov_mode: OovMode, corpus_id: &str) -> Result<EvalReport> {
    if !model.config.carry_state {
        return perplexity(model, test, oov_mode, corpus_id);
    }
    let carried = Carried {
        model,
        state: std::sync::Mutex::new(model.initial_state()),
    };
    perplexity(&carried, test, oov_mode, corpus_id)
}

/// Scores sentences in call order, threading the hidden state through.
struct Carried<'a> {
    model: &'a RnnModel,
    state: std::sync::Mutex<Vec<f64>>,
}

impl SentenceScorer for Carried<'_> {
    fn model_id(&self) -> String {
        self.model.model_id()
    }
    fn vocab(&self) -> &Vocabulary {
        &self.model.vocab
    }
    fn sentence_log10_probs(&self, sentence: &Sentence) -> Vec<f64> {
        let mut state = self.state.lock().expect("scorer state poisoned");
        to_log10(self.model.sentence_ln_probs_from(&mut state, sentence))
    }
}

fn to_log10(mut v: Vec<f64>) -> Vec<f64> {
    for x in &mut v {
        *x /= std::f64::consts::LN_10;
    }
    v
}

impl SentenceScorer for RnnModel {
    fn model_id(&self) -> String {
        let factors = match (self.config.use_word, self.config.factors) {
            (true, FactorSet::NONE) => "word".to_owned(),
            (true, f) => format!("word+{f}"),
            (false, f) => f.to_string(),
        };
        format!(
            "rnn-h{}-c{}-{}",
            self.config.hidden_size, self.config.n_classes, factors
        )
    }

    fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    fn sentence_log10_probs(&self, sentence: &Sentence) -> Vec<f64> {
        to_log10(self.sentence_ln_probs(sentence))
    }

    fn evaluate(&self, test: &[Sentence], oov_mode: OovMode, corpus_id: &str) -> Result<EvalReport> {
        rnn_ppl(self, test, oov_mode, corpus_id)
    }
}

// Numeric kernels shared by scoring and training.

pub(crate) struct Scratch {
    pub state: Vec<f64>,
    pub class_probs: Vec<f64>,
    pub word_probs: Vec<f64>,
}

impl Scratch {
    pub fn new(params: &RnnParams) -> Self {
        Scratch {
            state: vec![0.0; params.hidden_size()],
            class_probs: vec![0.0; params.n_classes()],
            word_probs: Vec::new(),
        }
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub(crate) fn hidden_step(p: &RnnParams, use_word: bool, prev: &[f64], input: StepInput, out: &mut [f64]) {
    let pos = p.pos_in.row(input.pos as usize);
    let cs = p.cs_in.row(input.cs as usize);
    for (i, o) in out.iter_mut().enumerate() {
        let r = p.recurrent.row(i);
        let mut x = pos[i] + cs[i];
        if use_word {
            x += p.word_in.get(input.word as usize, i);
        }
        x += r.iter().zip(prev).map(|(a, b)| a * b).sum::<f64>();
        *o = sigmoid(x);
    }
}

fn softmax_in_place(z: &mut [f64]) {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in z.iter_mut() {
        *v /= sum;
    }
}

pub(crate) fn class_distribution(p: &RnnParams, state: &[f64], out: &mut [f64]) {
    out.fill(0.0);
    for (i, &s) in state.iter().enumerate() {
        for (o, &u) in out.iter_mut().zip(p.class_out.row(i)) {
            *o += s * u;
        }
    }
    softmax_in_place(out);
}

pub(crate) fn member_distribution(p: &RnnParams, state: &[f64], members: &[u32], out: &mut [f64]) {
    out.fill(0.0);
    for (i, &s) in state.iter().enumerate() {
        let row = p.word_out.row(i);
        for (o, &m) in out.iter_mut().zip(members) {
            *o += s * row[m as usize];
        }
    }
    softmax_in_place(out);
}

/// ln P(target | state); fills `scratch.class_probs` and `scratch.word_probs`.
pub(crate) fn target_ln_prob(
    p: &RnnParams,
    classes: &ClassMap,
    state: &[f64],
    target: u32,
    scratch: &mut Scratch,
) -> f64 {
    let class = classes.class_of(target);
    let members = classes.members(class);
    class_distribution(p, state, &mut scratch.class_probs);
    scratch.word_probs.resize(members.len(), 0.0);
    member_distribution(p, state, members, &mut scratch.word_probs);
    scratch.class_probs[class as usize].ln() + scratch.word_probs[classes.slot(target)].ln()
}
