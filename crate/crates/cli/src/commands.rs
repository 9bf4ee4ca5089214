use std::collections::HashSet;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};

use cslm::corpus::{build_vocab, corpus_stats, normalize_text, read_corpus, split_kfold, write_corpus, Sentence};
use cslm::eval::{
    benchmark_matrix, crossval, foreign_words, sweep, NgramRecipe, Recipe, RnnRecipe, SweepAxis, SweepData,
};
use cslm::factors::{tag_parallel, validate_pos};
use cslm::lm::{OovMode, SentenceScorer};
use cslm::ngram::{read_arpa, write_arpa, NgramModel};
use cslm::oracle::{MarkovSource, SwitchSource};
use cslm::rnnlm::{read_model, train, write_model, MODEL_MAGIC};

use crate::config::{env_seed, RecipeKind, RunConfig, Settings};
use crate::manifest::Manifest;
use crate::{MarkovKind, UsageError};

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// `<prefix>.<ext>`.
fn with_suffix(prefix: &Path, ext: &str) -> PathBuf {
    let mut name = prefix.as_os_str().to_owned();
    name.push(".");
    name.push(ext);
    PathBuf::from(name)
}

fn config_manifest(command: &str, cfg: &RunConfig) -> Manifest {
    let text = cfg.to_text();
    let fingerprint = hex::encode(Sha256::digest(text.as_bytes()));
    let mut m = Manifest::new(command);
    m.field("seed", cfg.rnn.seed).config(&fingerprint, &text);
    m
}

/// Whitespace-separated words of the augment file, if any.
fn read_augment(cfg: &RunConfig) -> Result<Vec<String>> {
    match &cfg.augment {
        None => Ok(Vec::new()),
        Some(p) => Ok(fs::read_to_string(p)
            .with_context(|| format!("reading {}", p.display()))?
            .split_whitespace()
            .map(str::to_owned)
            .collect()),
    }
}

fn add_inputs(m: &mut Manifest, cfg: &RunConfig) -> Result<()> {
    for (label, path) in cfg.paths() {
        if label != "output" {
            m.input(label, path)?;
        }
    }
    Ok(())
}

/// Loads a recurrent model file or an ARPA file, told apart by the magic.
pub fn load_model(path: &Path) -> Result<Box<dyn SentenceScorer>> {
    let mut magic = [0u8; 4];
    let n = fs::File::open(path)
        .and_then(|mut f| f.read(&mut magic))
        .with_context(|| format!("reading {}", path.display()))?;
    if n == 4 && &magic == MODEL_MAGIC {
        Ok(Box::new(read_model(path)?))
    } else {
        Ok(Box::new(read_arpa(path)?))
    }
}

pub fn prepare(input: &Path, output: &Path, stats: Option<&Path>) -> Result<()> {
    let raw = fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
    let sentences = normalize_text(&raw);
    write_corpus(output, &sentences)?;
    let report = corpus_stats(&sentences).to_string();
    print!("{report}");
    let mut m = Manifest::new("prepare");
    m.input("raw", input)?.output("corpus", output)?;
    if let Some(p) = stats {
        write_text(p, &report)?;
        m.output("stats", p)?;
    }
    m.write_beside(output)?;
    Ok(())
}

pub fn tag_cs(native: &Path, mixed: &Path, out_native: &Path, out_mixed: &Path, tagset: Option<&Path>) -> Result<()> {
    let (n, m) = tag_parallel(&read_corpus(native)?, &read_corpus(mixed)?)?;
    if let Some(p) = tagset {
        let tags: HashSet<String> = fs::read_to_string(p)
            .with_context(|| format!("reading {}", p.display()))?
            .split_whitespace()
            .map(str::to_owned)
            .collect();
        for (side, corpus) in [("native", &n), ("mixed", &m)] {
            for (i, s) in corpus.iter().enumerate() {
                for w in validate_pos(s, &tags) {
                    log::warn!("{side} sentence {}: {w}", i + 1);
                }
            }
        }
    }
    write_corpus(out_native, &n)?;
    write_corpus(out_mixed, &m)?;
    let yes = |c: &[Sentence]| {
        c.iter()
            .flat_map(|s| &s.tokens)
            .filter(|t| t.cs == Some(cslm::corpus::CsLabel::Yes))
            .count()
    };
    println!("pairs={} yes_native={} yes_mixed={}", n.len(), yes(&n), yes(&m));
    let mut man = Manifest::new("tag-cs");
    man.input("native", native)?
        .input("mixed", mixed)?
        .output("native", out_native)?
        .output("mixed", out_mixed)?;
    if let Some(p) = tagset {
        man.input("tagset", p)?;
    }
    man.write_beside(out_mixed)?;
    Ok(())
}

pub fn vocab(train_path: &Path, augment: Option<&Path>, output: &Path) -> Result<()> {
    let cfg = RunConfig {
        augment: augment.map(Path::to_path_buf),
        ..RunConfig::default()
    };
    let v = build_vocab(&read_corpus(train_path)?, &read_augment(&cfg)?);
    v.write(output)?;
    println!("size={}", v.len());
    let mut m = Manifest::new("vocab");
    m.input("train", train_path)?;
    if let Some(p) = augment {
        m.input("augment", p)?;
    }
    m.output("vocab", output)?.write_beside(output)?;
    Ok(())
}

pub fn train_ngram(settings: &Settings) -> Result<()> {
    let cfg = settings.resolve()?;
    let train_path = cfg.require("train", &cfg.train)?;
    let output = cfg.require("output", &cfg.output)?;
    let corpus = read_corpus(train_path)?;
    let vocab = build_vocab(&corpus, &read_augment(&cfg)?);
    let model = NgramModel::train(&corpus, &vocab, cfg.order, cfg.smoothing)?;
    write_arpa(&model, output)?;
    println!(
        "order={} smoothing={} ngrams={:?}",
        model.order(),
        cfg.smoothing,
        model.ngram_counts()
    );
    let mut m = config_manifest("train-ngram", &cfg);
    add_inputs(&mut m, &cfg)?;
    m.output("model", output)?.write_beside(output)?;
    Ok(())
}

pub fn train_rnn(settings: &Settings) -> Result<()> {
    let cfg = settings.resolve()?;
    let train_path = cfg.require("train", &cfg.train)?;
    let valid_path = cfg.require("valid", &cfg.valid)?;
    let output = cfg.require("output", &cfg.output)?;
    let trained = train(
        &cfg.rnn,
        &read_corpus(train_path)?,
        &read_corpus(valid_path)?,
        &read_augment(&cfg)?,
    )?;
    write_model(&trained.model, output)?;
    let best = trained.log.iter().map(|e| e.valid_ppl).fold(f64::INFINITY, f64::min);
    println!("epochs={} best_valid_ppl={best}", trained.log.len());
    let mut m = config_manifest("train-rnn", &cfg);
    add_inputs(&mut m, &cfg)?;
    m.output("model", output)?.write_beside(output)?;
    Ok(())
}

pub fn ppl(model_path: &Path, test: &Path, oov_mode: OovMode, report: Option<&Path>) -> Result<()> {
    let model = load_model(model_path)?;
    let corpus_id = test.display().to_string();
    let r = model.evaluate(&read_corpus(test)?, oov_mode, &corpus_id)?;
    println!("{}", r.summary_line());
    if let Some(p) = report {
        write_text(p, &r.to_string())?;
        let mut m = Manifest::new("ppl");
        m.field("oov_mode", oov_mode)
            .input("model", model_path)?
            .input("test", test)?
            .output("report", p)?;
        m.write_beside(p)?;
    }
    Ok(())
}

pub fn crossval_cmd(settings: &Settings, jobs: usize) -> Result<()> {
    let cfg = settings.resolve()?;
    let native = read_corpus(cfg.require("native", &cfg.native)?)?;
    let mixed = read_corpus(cfg.require("mixed", &cfg.mixed)?)?;
    let plan = split_kfold(&native, cfg.folds, cfg.rnn.seed)?;
    let recipe: Box<dyn Recipe> = match cfg.recipe {
        RecipeKind::Ngram => Box::new(NgramRecipe {
            order: cfg.order,
            smoothing: cfg.smoothing,
        }),
        RecipeKind::Rnn => Box::new(RnnRecipe {
            config: cfg.rnn.clone(),
        }),
    };
    let result = crossval(&native, &mixed, &plan, recipe.as_ref(), cfg.oov_mode, jobs)?;
    print!("{}{result}", result.to_tsv());
    if let Some(prefix) = &cfg.output {
        let tsv = with_suffix(prefix, "tsv");
        let report = with_suffix(prefix, "report");
        let mut records = String::new();
        for f in &result.folds {
            records.push_str(&format!("{f}\n"));
        }
        records.push_str(&result.to_string());
        write_text(&tsv, &result.to_tsv())?;
        write_text(&report, &records)?;
        let mut m = config_manifest("crossval", &cfg);
        add_inputs(&mut m, &cfg)?;
        m.output("table", &tsv)?.output("report", &report)?;
        m.write_beside(prefix)?;
    }
    Ok(())
}

pub fn sweep_cmd(settings: &Settings, axis: SweepAxis, grid: &[usize], jobs: usize) -> Result<()> {
    let cfg = settings.resolve()?;
    let train_set = read_corpus(cfg.require("train", &cfg.train)?)?;
    let valid = read_corpus(cfg.require("valid", &cfg.valid)?)?;
    let test = match &cfg.test {
        Some(p) => read_corpus(p)?,
        None => valid.clone(),
    };
    let augment = read_augment(&cfg)?;
    let data = SweepData {
        train: &train_set,
        valid: &valid,
        test: &test,
        augment: &augment,
    };
    let result = sweep(axis, grid, &cfg.rnn, data, cfg.oov_mode, jobs)?;
    print!("{}{result}", result.to_tsv());
    if let Some(prefix) = &cfg.output {
        let tsv = with_suffix(prefix, "tsv");
        let report = with_suffix(prefix, "report");
        write_text(&tsv, &result.to_tsv())?;
        write_text(&report, &format!("{}{result}", result.records()))?;
        let mut m = config_manifest("sweep", &cfg);
        m.field("axis", axis)
            .field("grid", grid.iter().map(usize::to_string).collect::<Vec<_>>().join(","));
        add_inputs(&mut m, &cfg)?;
        m.output("table", &tsv)?.output("report", &report)?;
        m.write_beside(prefix)?;
    }
    Ok(())
}

pub fn bench(models: &[PathBuf], tests: &[String], oov_mode: OovMode, output: Option<&Path>) -> Result<()> {
    let loaded: Vec<(String, Box<dyn SentenceScorer>)> = models
        .iter()
        .map(|p| Ok((p.display().to_string(), load_model(p)?)))
        .collect::<Result<_>>()?;
    let mut sets: Vec<(String, PathBuf, Vec<Sentence>)> = Vec::new();
    for spec in tests {
        let (name, path) = match spec.split_once('=') {
            Some((n, p)) => (n.to_owned(), PathBuf::from(p)),
            None => (spec.clone(), PathBuf::from(spec)),
        };
        let corpus = read_corpus(&path)?;
        sets.push((name, path, corpus));
    }
    let model_refs: Vec<(&str, &dyn SentenceScorer)> = loaded.iter().map(|(n, m)| (n.as_str(), m.as_ref())).collect();
    let set_refs: Vec<(&str, &[Sentence])> = sets.iter().map(|(n, _, c)| (n.as_str(), c.as_slice())).collect();
    let matrix = benchmark_matrix(&model_refs, &set_refs, oov_mode)?;
    print!("{}", matrix.to_tsv());
    if let Some(prefix) = output {
        let tsv = with_suffix(prefix, "tsv");
        let report = with_suffix(prefix, "report");
        write_text(&tsv, &matrix.to_tsv())?;
        write_text(&report, &matrix.records())?;
        let mut m = Manifest::new("bench");
        m.field("oov_mode", oov_mode);
        for (i, p) in models.iter().enumerate() {
            m.input(&format!("model{i}"), p)?;
        }
        for (name, path, _) in &sets {
            m.input(&format!("test.{name}"), path)?;
        }
        m.output("table", &tsv)?.output("report", &report)?;
        m.write_beside(prefix)?;
    }
    Ok(())
}

fn seed_or_env(seed: Option<u64>) -> Result<u64> {
    Ok(match seed {
        Some(s) => s,
        None => env_seed()?.unwrap_or(1),
    })
}

pub fn synth_markov(
    kind: MarkovKind,
    states: usize,
    sentence_len: usize,
    tokens: usize,
    seed: Option<u64>,
    output: &Path,
) -> Result<()> {
    if tokens == 0 {
        return Err(UsageError("--tokens must be at least 1".into()).into());
    }
    let seed = seed_or_env(seed)?;
    let source = match kind {
        MarkovKind::Shift => MarkovSource::shift_chain(states, sentence_len)?,
        MarkovKind::Uniform => MarkovSource::uniform(states, sentence_len)?,
        MarkovKind::Cycle => MarkovSource::cycle(states, sentence_len)?,
    };
    write_corpus(output, &source.gen_corpus(tokens, seed))?;
    let bits = source.entropy_bits()?;
    println!("entropy_bits={bits} ppl={}", 2f64.powf(bits));
    let mut m = Manifest::new("synth markov");
    m.field("source", format!("{kind:?}").to_lowercase())
        .field("states", states)
        .field("sentence_len", sentence_len)
        .field("tokens", tokens)
        .field("seed", seed)
        .output("corpus", output)?;
    m.write_beside(output)?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn synth_switch(
    tokens: usize,
    seed: Option<u64>,
    rho: f64,
    foreign: usize,
    words_per_class: usize,
    native_out: &Path,
    mixed_out: &Path,
) -> Result<()> {
    if tokens == 0 {
        return Err(UsageError("--tokens must be at least 1".into()).into());
    }
    let seed = seed_or_env(seed)?;
    let corpus = SwitchSource::standard(rho, foreign, words_per_class)?.gen_corpus(tokens, seed);
    write_corpus(native_out, &corpus.native)?;
    write_corpus(mixed_out, &corpus.mixed)?;
    let foreign_seen = foreign_words(corpus.native.iter().zip(&corpus.mixed)).len();
    println!("sentences={} foreign_types={foreign_seen}", corpus.native.len());
    let mut m = Manifest::new("synth switch");
    m.field("tokens", tokens)
        .field("seed", seed)
        .field("rho", rho)
        .field("foreign", foreign)
        .field("words_per_class", words_per_class)
        .output("native", native_out)?
        .output("mixed", mixed_out)?;
    m.write_beside(mixed_out)?;
    Ok(())
}
