use super::exhaustive::{rnn_log_distribution, rnn_step};
use crate::corpus::Sentence;
use crate::rnnlm::{RnnModel, RnnParams, StepInput};

/// Central differences `(f(x + h e_i) - f(x - h e_i)) / 2h` for every `i`.
pub fn fd_gradient(mut f: impl FnMut(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Summed truncated-BPTT loss of `model` on `corpus` as a function of the
/// weights `flat`.
///
/// Each target's loss is computed by re-running the last `bptt_steps` steps
/// with `flat` from the hidden state that `model.params` produced just before
/// that window; that state is a constant. The gradient of this function is
/// exactly the truncated-BPTT gradient at `flat == model.params`.
pub fn rnn_truncated_loss(model: &RnnModel, corpus: &[Sentence], flat: &[f64]) -> f64 {
    let base = &model.params;
    let mut p: RnnParams = base.clone();
    p.set_flat(flat);
    let use_word = model.config.use_word;
    let window = model.config.bptt_steps;

    // One stream of (input, target) with the base states before each step;
    // a reset cuts the stream so no window reaches across it.
    let mut loss = 0.0;
    let mut inputs: Vec<StepInput> = Vec::new();
    let mut before: Vec<Vec<f64>> = Vec::new();
    let mut state = vec![0.5; base.hidden_size()];
    for (si, sentence) in corpus.iter().enumerate() {
        if !model.config.carry_state || si == 0 {
            state = vec![0.5; base.hidden_size()];
            inputs.clear();
            before.clear();
        }
        let (ins, targets) = model.sequence(sentence);
        for (input, target) in ins.into_iter().zip(targets) {
            inputs.push(input);
            before.push(state.clone());
            state = rnn_step(base, use_word, &state, input);

            let t = inputs.len();
            let start = t.saturating_sub(window);
            let mut s = before[start].clone();
            for &inp in &inputs[start..t] {
                s = rnn_step(&p, use_word, &s, inp);
            }
            loss -= rnn_log_distribution(model, &p, &s)[target as usize];
        }
    }
    loss
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_is_exact_up_to_rounding() {
        let f = |x: &[f64]| 3.0 * x[0] * x[0] - 2.0 * x[0] * x[1] + x[1];
        let g = fd_gradient(f, &[1.5, -0.5], 1e-5);
        assert!((g[0] - (6.0 * 1.5 + 1.0)).abs() < 1e-8);
        assert!((g[1] - (-3.0 + 1.0)).abs() < 1e-8);
    }

    #[test]
    fn linear_is_exact() {
        let w = [0.5, -2.0, 4.0];
        let f = |x: &[f64]| x.iter().zip(&w).map(|(a, b)| a * b).sum();
        let g = fd_gradient(f, &[0.0; 3], 0.25);
        assert_eq!(g, w);
    }
}
