//! Language modeling for code-switched text.
//!
//! The crate provides a class-factorized recurrent network language model
//! whose input carries POS and code-switch factors alongside the previous
//! word, a backoff n-gram baseline with ARPA I/O, the alignment procedure that
//! derives code-switch labels from parallel native/mixed sentences, and the
//! evaluation protocol (perplexity, k-fold cross-validation, sweeps).

pub mod corpus;
pub mod error;
pub mod eval;
pub mod factors;
pub mod lm;
pub mod ngram;
pub mod oracle;
pub mod rnnlm;

pub use error::{Error, ErrorKind, Result};
