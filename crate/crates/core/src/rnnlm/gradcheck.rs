use std::fmt;

use super::train::{pos_inventory, truncated_gradient};
use super::{RnnConfig, RnnModel, BLOCK_NAMES};
use crate::corpus::{build_vocab, Sentence};
use crate::error::Result;
use crate::oracle::{fd_gradient, rnn_truncated_loss};

/// Step for the central differences.
pub const FD_STEP: f64 = 1e-5;

/// Gradient entries below this magnitude are compared absolutely: the
/// relative error is `|a - n| / max(|a|, |n|, GRAD_FLOOR)`.
pub const GRAD_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct BlockError {
    pub name: &'static str,
    pub n_weights: usize,
    pub max_abs_error: f64,
    pub max_rel_error: f64,
    /// Largest gradient magnitude in the block.
    pub max_grad: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub blocks: Vec<BlockError>,
    pub loss: f64,
}

impl GradCheckReport {
    pub fn max_rel_error(&self) -> f64 {
        self.blocks.iter().map(|b| b.max_rel_error).fold(0.0, f64::max)
    }
}

impl fmt::Display for GradCheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.blocks {
            writeln!(
                f,
                "{}\tn={}\tmax_abs={:e}\tmax_rel={:e}\tmax_grad={:e}",
                b.name, b.n_weights, b.max_abs_error, b.max_rel_error, b.max_grad
            )?;
        }
        write!(f, "max_rel_error={:e}", self.max_rel_error())
    }
}

/// Builds a seeded model for `corpus` and checks it with
/// [`grad_check_model`].
pub fn grad_check(config: &RnnConfig, corpus: &[Sentence]) -> Result<GradCheckReport> {
    let vocab = build_vocab::<&str>(corpus, &[]);
    let tags = if config.factors.pos {
        pos_inventory(corpus)
    } else {
        Vec::new()
    };
    let model = RnnModel::new(config.clone(), vocab, tags)?;
    Ok(grad_check_model(&model, corpus))
}

/// Compares the truncated-BPTT gradient of the summed loss with central
/// differences of the same truncated objective, block by block.
pub fn grad_check_model(model: &RnnModel, corpus: &[Sentence]) -> GradCheckReport {
    let (loss, analytic) = truncated_gradient(model, corpus);
    let numeric = fd_gradient(
        |x| rnn_truncated_loss(model, corpus, x),
        &model.params.to_flat(),
        FD_STEP,
    );
    let mut offset = 0;
    let blocks = analytic
        .blocks()
        .iter()
        .zip(BLOCK_NAMES)
        .map(|(block, name)| {
            let a = block.data();
            let n = &numeric[offset..offset + a.len()];
            offset += a.len();
            let mut e = BlockError {
                name,
                n_weights: a.len(),
                max_abs_error: 0.0,
                max_rel_error: 0.0,
                max_grad: 0.0,
            };
            for (&x, &y) in a.iter().zip(n) {
                let diff = (x - y).abs();
                e.max_abs_error = e.max_abs_error.max(diff);
                e.max_rel_error = e.max_rel_error.max(diff / x.abs().max(y.abs()).max(GRAD_FLOOR));
                e.max_grad = e.max_grad.max(x.abs());
            }
            e
        })
        .collect();
    GradCheckReport { blocks, loss }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_corpus;
    use crate::rnnlm::{FactorSet, RnnParams};

    fn corpus() -> Vec<Sentence> {
        parse_corpus(
            "a|P:N|C:No b|P:V|C:Yes c|P:N|C:No d|P:A|C:Yes\n\
             b|P:V|C:No a|P:N|C:No e|P:UNK|C:Yes\n\
             c|P:N|C:No c|P:N|C:No a|P:N|C:Yes b|P:V|C:No f|P:A|C:No",
        )
        .unwrap()
    }

    fn config(bptt: usize) -> RnnConfig {
        RnnConfig {
            hidden_size: 4,
            n_classes: 3,
            bptt_steps: bptt,
            factors: FactorSet::ALL,
            seed: 5,
            ..RnnConfig::default()
        }
    }

    #[test]
    fn random_model_all_blocks() {
        for bptt in [1, 2, 5] {
            let r = grad_check(&config(bptt), &corpus()).unwrap();
            assert!(r.max_rel_error() < 1e-4, "bptt {bptt}\n{r}");
            assert!(r.blocks.iter().all(|b| b.max_grad > 0.0), "{r}");
        }
    }

    #[test]
    fn zero_model() {
        let c = corpus();
        let vocab = build_vocab::<&str>(&c, &[]);
        let mut m = RnnModel::new(config(3), vocab, pos_inventory(&c)).unwrap();
        let p = &m.params;
        m.params = RnnParams::zeros(p.vocab_size(), p.n_pos_tags(), p.hidden_size(), p.n_classes());
        let r = grad_check_model(&m, &c);
        assert!(r.max_rel_error() < 1e-6, "{r}");
    }

    #[test]
    fn carried_state() {
        let r = grad_check(
            &RnnConfig {
                carry_state: true,
                ..config(4)
            },
            &corpus(),
        )
        .unwrap();
        assert!(r.max_rel_error() < 1e-4, "{r}");
    }

    #[test]
    fn one_step_truncation_matches_single_step_gradient() {
        // each target depends on the weights through a single step
        let mut cfg = config(1);
        cfg.use_word = false;
        let r = grad_check(&cfg, &corpus()).unwrap();
        assert!(r.max_rel_error() < 1e-4, "{r}");
        assert_eq!(r.blocks[0].max_grad, 0.0);
    }
}
