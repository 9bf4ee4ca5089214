use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use super::{hidden_step, target_ln_prob, ClassMap, RnnConfig, RnnModel, RnnParams, Scratch, StepInput};
use crate::corpus::{build_vocab, Sentence, Vocabulary};
use crate::error::{Error, Result};
use crate::lm::OovMode;

#[derive(Debug, Clone, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    pub lr: f64,
    /// Perplexity of the training tokens as seen during the epoch.
    pub train_ppl: f64,
    pub valid_ppl: f64,
}

impl fmt::Display for EpochLog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "epoch={} lr={} train_ppl={} valid_ppl={}",
            self.epoch, self.lr, self.train_ppl, self.valid_ppl
        )
    }
}

#[derive(Debug, Clone)]
pub struct Trained {
    pub model: RnnModel,
    pub log: Vec<EpochLog>,
}

/// Sorted distinct POS tags of a corpus.
pub fn pos_inventory(corpus: &[Sentence]) -> Vec<String> {
    corpus
        .iter()
        .flat_map(|s| s.tokens.iter().filter_map(|t| t.pos.clone()))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

/// Builds the vocabulary (with `augment` words) and tag inventory from
/// `train`, then trains.
pub fn train<S: AsRef<str>>(
    config: &RnnConfig,
    train: &[Sentence],
    valid: &[Sentence],
    augment: &[S],
) -> Result<Trained> {
    let vocab = build_vocab(train, augment);
    let tags = if config.factors.pos {
        pos_inventory(train)
    } else {
        Vec::new()
    };
    train_with_vocab(config, vocab, tags, train, valid)
}

/// Per-token SGD with truncated BPTT.
///
/// After each epoch the validation perplexity decides the schedule: a worse
/// epoch is rolled back to the best weights; once an epoch improves by less
/// than `lr_halve_threshold` the rate is halved every epoch, and the next
/// such epoch ends training. The best weights seen are returned.
pub fn train_with_vocab(
    config: &RnnConfig,
    vocab: Vocabulary,
    pos_tags: Vec<String>,
    train: &[Sentence],
    valid: &[Sentence],
) -> Result<Trained> {
    if train.is_empty() || valid.is_empty() {
        return Err(Error::InvalidArgument(
            "training and validation corpora must be nonempty".into(),
        ));
    }
    let mut model = RnnModel::new(config.clone(), vocab, pos_tags)?;
    let data: Vec<(Vec<StepInput>, Vec<u32>)> = train.iter().map(|s| model.sequence(s)).collect();

    let mut lr = config.lr0;
    let mut halving = false;
    let mut best = f64::INFINITY;
    let mut prev = f64::INFINITY;
    let mut best_params = model.params.clone();
    let mut log = Vec::new();
    for epoch in 1..=config.max_epochs {
        let mut runner = Runner::new(&model);
        let (loss, tokens) = runner.run(&mut model.params, &model.classes, &model.config, &data, Update::Sgd(lr));
        let train_ppl = (loss / tokens as f64).exp();
        let valid_ppl = match model.ppl(valid, OovMode::Exclude, "valid") {
            Ok(r) if r.ppl.is_finite() => r.ppl,
            Ok(_) | Err(Error::NonFinite { .. }) => {
                return Err(Error::Divergence {
                    epoch,
                    valid_ppl: f64::NAN,
                })
            }
            Err(e) => return Err(e),
        };
        let entry = EpochLog {
            epoch,
            lr,
            train_ppl,
            valid_ppl,
        };
        log::info!("{entry}");
        log.push(entry);

        if valid_ppl < best {
            best = valid_ppl;
            best_params = model.params.clone();
        } else {
            model.params = best_params.clone();
        }
        if prev / valid_ppl < config.lr_halve_threshold {
            if halving {
                break;
            }
            halving = true;
        }
        if halving {
            lr /= 2.0;
        }
        prev = valid_ppl;
    }
    model.params = best_params;
    Ok(Trained { model, log })
}

/// Sum of the truncated-BPTT gradients of `-ln P` over every token of
/// `corpus`, with the weights held fixed, and the total loss.
pub(crate) fn truncated_gradient(model: &RnnModel, corpus: &[Sentence]) -> (f64, RnnParams) {
    let data: Vec<(Vec<StepInput>, Vec<u32>)> = corpus.iter().map(|s| model.sequence(s)).collect();
    let p = &model.params;
    let mut grad = RnnParams::zeros(p.vocab_size(), p.n_pos_tags(), p.hidden_size(), p.n_classes());
    let mut params = model.params.clone();
    let mut runner = Runner::new(model);
    let (loss, _) = runner.run(
        &mut params,
        &model.classes,
        &model.config,
        &data,
        Update::Accumulate(&mut grad),
    );
    (loss, grad)
}

enum Update<'a> {
    Sgd(f64),
    Accumulate(&'a mut RnnParams),
}

struct Step {
    input: StepInput,
    prev: Vec<f64>,
    state: Vec<f64>,
}

/// Buffers for one pass over the data.
struct Runner {
    hist: VecDeque<Step>,
    scratch: Scratch,
    ds: Vec<f64>,
    /// `dx[k]` is the pre-activation error `k` steps back.
    dx: Vec<Vec<f64>>,
    dz: Vec<f64>,
    dy: Vec<f64>,
}

impl Runner {
    fn new(model: &RnnModel) -> Self {
        let h = model.config.hidden_size;
        Runner {
            hist: VecDeque::with_capacity(model.config.bptt_steps + 1),
            scratch: Scratch::new(&model.params),
            ds: vec![0.0; h],
            dx: vec![vec![0.0; h]; model.config.bptt_steps],
            dz: Vec::new(),
            dy: Vec::new(),
        }
    }

    /// Returns the summed loss (nats) and the number of tokens.
    fn run(
        &mut self,
        params: &mut RnnParams,
        classes: &ClassMap,
        config: &RnnConfig,
        data: &[(Vec<StepInput>, Vec<u32>)],
        mut update: Update,
    ) -> (f64, usize) {
        let mut loss = 0.0;
        let mut tokens = 0;
        let mut state = vec![0.5; config.hidden_size];
        for (si, (inputs, targets)) in data.iter().enumerate() {
            if !config.carry_state || si == 0 {
                state.fill(0.5);
                self.hist.clear();
            }
            for (input, &target) in inputs.iter().zip(targets) {
                let mut step = match self.hist.len() == config.bptt_steps {
                    true => self.hist.pop_front().expect("history is full"),
                    false => Step {
                        input: *input,
                        prev: vec![0.0; config.hidden_size],
                        state: vec![0.0; config.hidden_size],
                    },
                };
                step.input = *input;
                step.prev.copy_from_slice(&state);
                hidden_step(params, config.use_word, &state, *input, &mut step.state);
                state.copy_from_slice(&step.state);
                self.hist.push_back(step);

                loss -= target_ln_prob(params, classes, &state, target, &mut self.scratch);
                tokens += 1;
                self.backward(params, classes, target);
                match &mut update {
                    Update::Sgd(lr) => self.apply(params, classes, target, config.use_word, -*lr),
                    Update::Accumulate(grad) => self.apply(grad, classes, target, config.use_word, 1.0),
                }
            }
        }
        (loss, tokens)
    }

    /// Errors of the output layer and of every pre-activation in the
    /// window, from the probabilities left in `scratch`.
    fn backward(&mut self, p: &RnnParams, classes: &ClassMap, target: u32) {
        let class = classes.class_of(target);
        let members = classes.members(class);
        self.dz.clear();
        self.dz.extend_from_slice(&self.scratch.class_probs);
        self.dz[class as usize] -= 1.0;
        self.dy.clear();
        self.dy.extend_from_slice(&self.scratch.word_probs);
        self.dy[classes.slot(target)] -= 1.0;

        for (i, d) in self.ds.iter_mut().enumerate() {
            let uc = p.class_out.row(i);
            let uw = p.word_out.row(i);
            let mut acc: f64 = uc.iter().zip(&self.dz).map(|(u, g)| u * g).sum();
            acc += members
                .iter()
                .zip(&self.dy)
                .map(|(&m, g)| uw[m as usize] * g)
                .sum::<f64>();
            *d = acc;
        }
        let n = self.hist.len();
        for (k, step) in self.hist.iter().rev().enumerate() {
            let dx = &mut self.dx[k];
            for ((d, &g), &s) in dx.iter_mut().zip(&self.ds).zip(&step.state) {
                *d = g * s * (1.0 - s);
            }
            if k + 1 < n {
                self.ds.fill(0.0);
                for (i, &d) in dx.iter().enumerate() {
                    for (acc, &r) in self.ds.iter_mut().zip(p.recurrent.row(i)) {
                        *acc += r * d;
                    }
                }
            }
        }
    }

    /// `target += scale * gradient` for the token just processed.
    fn apply(&self, target: &mut RnnParams, classes: &ClassMap, word: u32, use_word: bool, scale: f64) {
        let s = &self.hist.back().expect("at least one step").state;
        let members = classes.members(classes.class_of(word));
        for (i, &si) in s.iter().enumerate() {
            let f = scale * si;
            for (u, &g) in target.class_out.row_mut(i).iter_mut().zip(&self.dz) {
                *u += f * g;
            }
            let row = target.word_out.row_mut(i);
            for (&m, &g) in members.iter().zip(&self.dy) {
                row[m as usize] += f * g;
            }
        }
        for (step, dx) in self.hist.iter().rev().zip(&self.dx) {
            let rows = [
                (use_word, &mut target.word_in, step.input.word),
                (true, &mut target.pos_in, step.input.pos),
                (true, &mut target.cs_in, step.input.cs),
            ];
            for (on, block, r) in rows {
                if on {
                    for (w, &d) in block.row_mut(r as usize).iter_mut().zip(dx) {
                        *w += scale * d;
                    }
                }
            }
            for (i, &d) in dx.iter().enumerate() {
                let f = scale * d;
                for (w, &sp) in target.recurrent.row_mut(i).iter_mut().zip(&step.prev) {
                    *w += f * sp;
                }
            }
        }
    }
}
