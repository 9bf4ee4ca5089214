//! Ground truth for the test suites: synthetic sources with known entropy,
//! brute-force scorers and numeric gradients. Nothing here shares scoring
//! code with the models it checks.

mod exhaustive;
mod fd;
mod markov;
mod switch;

pub use exhaustive::{
    exhaustive_logprob, exhaustive_token_log10probs, ngram_distribution, rnn_log_distribution, rnn_step, AnyModel,
};
pub use fd::{fd_gradient, rnn_truncated_loss};
pub use markov::MarkovSource;
pub use switch::{SwitchCorpus, SwitchSource};
