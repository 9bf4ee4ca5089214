//! `cslm`: the language-modeling pipeline from raw text to perplexity tables.
//!
//! Exit status is 0 on success, 1 for usage errors, 2 for data errors and 3
//! for numeric failures. Failures print a single line to stderr:
//! `cslm: error[<kind>]: <message>`.

mod commands;
mod config;
mod manifest;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use cslm::error::ErrorKind;
use cslm::eval::SweepAxis;
use cslm::lm::OovMode;

use crate::config::Settings;

/// A mistake in how the program was invoked.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Debug, Parser)]
#[command(name = "cslm", version, about = "Factored language models for code-switched text")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MarkovKind {
    /// `states^2` states, each followed uniformly by `states` others.
    Shift,
    /// Every word equally likely at every step.
    Uniform,
    /// A fixed cycle: zero entropy.
    Cycle,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Normalize raw text into a corpus with one sentence per line.
    Prepare {
        #[arg(long, value_name = "FILE")]
        input: PathBuf,
        #[arg(long, value_name = "FILE")]
        output: PathBuf,
        /// Also write the corpus statistics here.
        #[arg(long, value_name = "FILE")]
        stats: Option<PathBuf>,
    },
    /// Derive CS labels for parallel native / code-switched corpora.
    TagCs {
        #[arg(long, value_name = "FILE")]
        native: PathBuf,
        #[arg(long, value_name = "FILE")]
        mixed: PathBuf,
        #[arg(long, value_name = "FILE")]
        out_native: PathBuf,
        #[arg(long, value_name = "FILE")]
        out_mixed: PathBuf,
        /// Whitespace-separated POS tags; tags outside it are reported.
        #[arg(long, value_name = "FILE")]
        tagset: Option<PathBuf>,
    },
    /// Build a vocabulary file.
    Vocab {
        #[arg(long, value_name = "FILE")]
        train: PathBuf,
        #[arg(long, value_name = "FILE")]
        augment: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        output: PathBuf,
    },
    /// Train a backoff n-gram model and write it in ARPA format.
    TrainNgram(Settings),
    /// Train the factored recurrent model.
    TrainRnn(Settings),
    /// Perplexity of a model (ARPA or recurrent) on a test corpus.
    Ppl {
        #[arg(long, value_name = "FILE")]
        model: PathBuf,
        #[arg(long, value_name = "FILE")]
        test: PathBuf,
        #[arg(long, default_value = "exclude")]
        oov_mode: OovMode,
        /// Write the full key: value report here.
        #[arg(long, value_name = "FILE")]
        report: Option<PathBuf>,
    },
    /// k-fold cross-validation on a parallel corpus: train on the native
    /// side of the other folds, test on the mixed side of each fold.
    Crossval {
        #[command(flatten)]
        settings: Settings,
        /// Parallel fold jobs (0: one per core).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Train one recurrent model per grid value of a hyperparameter.
    Sweep {
        #[command(flatten)]
        settings: Settings,
        /// `hidden_size` or `n_classes`.
        #[arg(long)]
        axis: SweepAxis,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        grid: Vec<usize>,
        /// Parallel training jobs (0: one per core).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Perplexity of every model on every test set.
    Bench {
        #[arg(long = "model", value_name = "FILE", required = true)]
        models: Vec<PathBuf>,
        /// `NAME=FILE`, or just `FILE`.
        #[arg(long = "test", value_name = "NAME=FILE", required = true)]
        tests: Vec<String>,
        #[arg(long, default_value = "exclude")]
        oov_mode: OovMode,
        /// Write `<prefix>.tsv` and `<prefix>.report`.
        #[arg(long, value_name = "PREFIX")]
        output: Option<PathBuf>,
    },
    /// Generate synthetic corpora with known statistics.
    #[command(subcommand)]
    Synth(Synth),
}

#[derive(Debug, Subcommand)]
enum Synth {
    /// First-order Markov text.
    Markov {
        #[arg(long, value_enum, default_value = "shift")]
        source: MarkovKind,
        /// Successors per state for `shift` (16 states, 2 bits per token
        /// at 4); number of states otherwise.
        #[arg(long, default_value_t = 4)]
        states: usize,
        #[arg(long, default_value_t = 1000)]
        sentence_len: usize,
        #[arg(long)]
        tokens: usize,
        /// Defaults to $CSLM_SEED, then 1.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_name = "FILE")]
        output: PathBuf,
    },
    /// Parallel native / code-switched text with true POS and CS labels.
    Switch {
        #[arg(long)]
        tokens: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Switch probability in the switchable classes.
        #[arg(long, default_value_t = 0.3)]
        rho: f64,
        /// Size of the foreign inventory.
        #[arg(long, default_value_t = 200)]
        foreign: usize,
        #[arg(long, default_value_t = 60)]
        words_per_class: usize,
        #[arg(long, value_name = "FILE")]
        native_out: PathBuf,
        #[arg(long, value_name = "FILE")]
        mixed_out: PathBuf,
    },
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Prepare { input, output, stats } => commands::prepare(&input, &output, stats.as_deref()),
        Command::TagCs {
            native,
            mixed,
            out_native,
            out_mixed,
            tagset,
        } => commands::tag_cs(&native, &mixed, &out_native, &out_mixed, tagset.as_deref()),
        Command::Vocab { train, augment, output } => commands::vocab(&train, augment.as_deref(), &output),
        Command::TrainNgram(s) => commands::train_ngram(&s),
        Command::TrainRnn(s) => commands::train_rnn(&s),
        Command::Ppl {
            model,
            test,
            oov_mode,
            report,
        } => commands::ppl(&model, &test, oov_mode, report.as_deref()),
        Command::Crossval { settings, jobs } => commands::crossval_cmd(&settings, jobs),
        Command::Sweep {
            settings,
            axis,
            grid,
            jobs,
        } => commands::sweep_cmd(&settings, axis, &grid, jobs),
        Command::Bench {
            models,
            tests,
            oov_mode,
            output,
        } => commands::bench(&models, &tests, oov_mode, output.as_deref()),
        Command::Synth(Synth::Markov {
            source,
            states,
            sentence_len,
            tokens,
            seed,
            output,
        }) => commands::synth_markov(source, states, sentence_len, tokens, seed, &output),
        Command::Synth(Synth::Switch {
            tokens,
            seed,
            rho,
            foreign,
            words_per_class,
            native_out,
            mixed_out,
        }) => commands::synth_switch(tokens, seed, rho, foreign, words_per_class, &native_out, &mixed_out),
    }
}

fn classify(err: &anyhow::Error) -> ErrorKind {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<cslm::error::Error>() {
            return e.kind();
        }
        if cause.is::<UsageError>() {
            return ErrorKind::Usage;
        }
    }
    ErrorKind::Data
}

fn fail(kind: ErrorKind, message: &str) -> ExitCode {
    let (name, code) = match kind {
        ErrorKind::Usage => ("usage", 1),
        ErrorKind::Data => ("data", 2),
        ErrorKind::Numeric => ("numeric", 3),
    };
    let one_line = message.split_whitespace().collect::<Vec<_>>().join(" ");
    eprintln!("cslm: error[{name}]: {one_line}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind as Clap;
            return match e.kind() {
                Clap::DisplayHelp | Clap::DisplayVersion => {
                    let _ = e.print();
                    ExitCode::SUCCESS
                }
                _ => {
                    let text = e.to_string();
                    let first = text.lines().next().unwrap_or("");
                    fail(ErrorKind::Usage, first.trim_start_matches("error: "))
                }
            };
        }
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .format_target(false)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(classify(&e), &format!("{e:#}")),
    }
}
