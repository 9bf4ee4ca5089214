//! Perplexity accounting and the experiment protocol built on it.
//!
//! Every number reported by the crate goes through [`perplexity`], so n-gram
//! and recurrent models share one definition: log10 probabilities summed over
//! scored tokens (each sentence contributes its words plus `</s>`), and
//! `PPL = 10^(-sum / N)`.

use std::collections::HashSet;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rayon::prelude::*;

use crate::corpus::{build_vocab, FoldPlan, Sentence};
use crate::error::{Error, Result};
use crate::lm::{OovMode, SentenceScorer};
use crate::ngram::{NgramModel, Smoothing};
use crate::rnnlm::{self, RnnConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub ppl: f64,
    pub total_log10prob: f64,
    pub n_scored: usize,
    pub n_oov: usize,
    pub oov_mode: OovMode,
    pub model_id: String,
    pub corpus_id: String,
}

impl EvalReport {
    pub fn from_totals(
        total_log10prob: f64,
        n_scored: usize,
        n_oov: usize,
        oov_mode: OovMode,
        model_id: impl Into<String>,
        corpus_id: impl Into<String>,
    ) -> Result<Self> {
        if n_scored == 0 {
            return Err(Error::NoScoredTokens);
        }
        Ok(EvalReport {
            ppl: 10f64.powf(-total_log10prob / n_scored as f64),
            total_log10prob,
            n_scored,
            n_oov,
            oov_mode,
            model_id: model_id.into(),
            corpus_id: corpus_id.into(),
        })
    }

    /// `ppl=<v> scored=<n> oov=<n>`.
    pub fn summary_line(&self) -> String {
        format!("ppl={} scored={} oov={}", self.ppl, self.n_scored, self.n_oov)
    }
}

impl fmt::Display for EvalReport {
    /// One `key: value` line per field.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "model: {}", self.model_id)?;
        writeln!(f, "corpus: {}", self.corpus_id)?;
        writeln!(f, "oov_mode: {}", self.oov_mode)?;
        writeln!(f, "ppl: {}", self.ppl)?;
        writeln!(f, "total_log10prob: {}", self.total_log10prob)?;
        writeln!(f, "scored: {}", self.n_scored)?;
        writeln!(f, "oov: {}", self.n_oov)
    }
}

/// Scores `test` with `scorer`. In [`OovMode::Exclude`] OOV words are left
/// out of the sum and of `N` but counted in `n_oov`; `</s>` is always scored.
pub fn perplexity<M: SentenceScorer + ?Sized>(
    scorer: &M,
    test: &[Sentence],
    oov_mode: OovMode,
    corpus_id: &str,
) -> Result<EvalReport> {
    let vocab = scorer.vocab();
    let mut total = 0.0;
    let mut n_scored = 0;
    let mut n_oov = 0;
    for (si, sentence) in test.iter().enumerate() {
        let lps = scorer.sentence_log10_probs(sentence);
        debug_assert_eq!(lps.len(), sentence.len() + 1);
        let oov = sentence
            .surfaces()
            .map(|w| vocab.id(w).is_none())
            .chain(std::iter::once(false));
        for (pos, (lp, is_oov)) in lps.into_iter().zip(oov).enumerate() {
            if is_oov {
                n_oov += 1;
                if oov_mode == OovMode::Exclude {
                    continue;
                }
            }
            if !lp.is_finite() {
                return Err(Error::NonFinite {
                    sentence: si,
                    position: pos,
                });
            }
            total += lp;
            n_scored += 1;
        }
    }
    EvalReport::from_totals(total, n_scored, n_oov, oov_mode, scorer.model_id(), corpus_id)
}

/// Thread pool bounded to `jobs` workers (0 means rayon's default).
pub(crate) fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))
}

/// How to build a model for one cross-validation fold.
pub trait Recipe: Sync {
    fn name(&self) -> String;

    /// `augment` lists the foreign words seen on the mixed side of the
    /// training folds; `valid` is disjoint from `train`.
    fn fit(&self, train: &[Sentence], augment: &[String], valid: &[Sentence]) -> Result<Box<dyn SentenceScorer>>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossvalResult {
    pub recipe: String,
    pub folds: Vec<EvalReport>,
    /// Arithmetic mean of the fold perplexities.
    pub mean_ppl: f64,
    pub geometric_mean_ppl: f64,
    /// Number of times each sentence was evaluated.
    pub eval_counts: Vec<usize>,
}

impl CrossvalResult {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("fold\tppl\tscored\toov\n");
        for (i, r) in self.folds.iter().enumerate() {
            writeln!(out, "{i}\t{}\t{}\t{}", r.ppl, r.n_scored, r.n_oov).unwrap();
        }
        writeln!(out, "mean\t{}", self.mean_ppl).unwrap();
        writeln!(out, "geomean\t{}", self.geometric_mean_ppl).unwrap();
        out
    }
}

impl fmt::Display for CrossvalResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, r) in self.folds.iter().enumerate() {
            writeln!(f, "fold: {i}")?;
            writeln!(f, "{r}")?;
        }
        writeln!(f, "recipe: {}", self.recipe)?;
        writeln!(f, "mean_ppl: {}", self.mean_ppl)?;
        writeln!(f, "geometric_mean_ppl: {}", self.geometric_mean_ppl)
    }
}

pub fn arithmetic_mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn geometric_mean(xs: &[f64]) -> f64 {
    (xs.iter().map(|x| x.ln()).sum::<f64>() / xs.len() as f64).exp()
}

/// Every `VALID_STRIDE`-th training sentence is held out for validation.
const VALID_STRIDE: usize = 10;

/// k-fold cross-validation over a parallel corpus.
///
/// For fold `i` the model is fit on the native side of the other folds and
/// evaluated on the mixed side of fold `i`. Folds run in parallel on at most
/// `jobs` threads; results are returned in fold order.
pub fn crossval(
    native: &[Sentence],
    mixed: &[Sentence],
    plan: &FoldPlan,
    recipe: &dyn Recipe,
    oov_mode: OovMode,
    jobs: usize,
) -> Result<CrossvalResult> {
    if native.len() != mixed.len() {
        return Err(Error::LengthMismatch {
            expected: native.len(),
            got: mixed.len(),
        });
    }
    if plan.assignments.len() != native.len() {
        return Err(Error::InvalidArgument(format!(
            "fold plan covers {} sentences, corpus has {}",
            plan.assignments.len(),
            native.len()
        )));
    }
    let run_fold = |fold: usize| -> Result<EvalReport> {
        let train_idx = plan.train_indices(fold);
        let mut train = Vec::new();
        let mut valid = Vec::new();
        for (j, &i) in train_idx.iter().enumerate() {
            if j % VALID_STRIDE == VALID_STRIDE - 1 {
                valid.push(native[i].clone());
            } else {
                train.push(native[i].clone());
            }
        }
        let augment = foreign_words(train_idx.iter().map(|&i| (&native[i], &mixed[i])));
        let test: Vec<Sentence> = plan.test_indices(fold).iter().map(|&i| mixed[i].clone()).collect();
        let model = recipe.fit(&train, &augment, &valid)?;
        model.evaluate(&test, oov_mode, &format!("fold{fold}"))
    };
    let reports: Vec<Result<EvalReport>> = pool(jobs)?.install(|| (0..plan.k).into_par_iter().map(run_fold).collect());
    let mut folds = Vec::with_capacity(plan.k);
    for (fold, r) in reports.into_iter().enumerate() {
        folds.push(r.map_err(|e| Error::Fold {
            fold,
            source: Box::new(e),
        })?);
    }
    let mut eval_counts = vec![0; native.len()];
    for fold in 0..plan.k {
        for i in plan.test_indices(fold) {
            eval_counts[i] += 1;
        }
    }
    let ppls: Vec<f64> = folds.iter().map(|r| r.ppl).collect();
    Ok(CrossvalResult {
        recipe: recipe.name(),
        mean_ppl: arithmetic_mean(&ppls),
        geometric_mean_ppl: geometric_mean(&ppls),
        folds,
        eval_counts,
    })
}

/// Words of the mixed side that do not occur in the paired native sentence,
/// deduplicated in first-seen order.
pub fn foreign_words<'a>(pairs: impl Iterator<Item = (&'a Sentence, &'a Sentence)>) -> Vec<String> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (native, mixed) in pairs {
        let native_words: HashSet<&str> = native.surfaces().collect();
        for w in mixed.surfaces() {
            if !native_words.contains(w) && seen.insert(w.to_owned()) {
                out.push(w.to_owned());
            }
        }
    }
    out
}

/// Perplexity of every model on every test set.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkMatrix {
    pub models: Vec<String>,
    pub testsets: Vec<String>,
    /// `cells[m][t]`.
    pub cells: Vec<Vec<EvalReport>>,
}

pub fn benchmark_matrix(
    models: &[(&str, &dyn SentenceScorer)],
    testsets: &[(&str, &[Sentence])],
    oov_mode: OovMode,
) -> Result<BenchmarkMatrix> {
    let cells = models
        .iter()
        .map(|(_, m)| {
            testsets
                .iter()
                .map(|(name, test)| m.evaluate(test, oov_mode, name))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BenchmarkMatrix {
        models: models.iter().map(|(n, _)| n.to_string()).collect(),
        testsets: testsets.iter().map(|(n, _)| n.to_string()).collect(),
        cells,
    })
}

impl BenchmarkMatrix {
    /// Models as rows, test sets as columns.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("model");
        for t in &self.testsets {
            write!(out, "\t{t}").unwrap();
        }
        out.push('\n');
        for (name, row) in self.models.iter().zip(&self.cells) {
            out.push_str(name);
            for r in row {
                write!(out, "\t{}", r.ppl).unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// One `key: value` block per cell.
    pub fn records(&self) -> String {
        let mut out = String::new();
        for (name, row) in self.models.iter().zip(&self.cells) {
            for r in row {
                writeln!(out, "row: {name}\n{r}").unwrap();
            }
        }
        out
    }
}

/// Backoff n-gram models; the validation set is not used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NgramRecipe {
    pub order: usize,
    pub smoothing: Smoothing,
}

impl Recipe for NgramRecipe {
    fn name(&self) -> String {
        format!("ngram-o{}-{}", self.order, self.smoothing)
    }

    fn fit(&self, train: &[Sentence], augment: &[String], _valid: &[Sentence]) -> Result<Box<dyn SentenceScorer>> {
        let vocab = build_vocab(train, augment);
        Ok(Box::new(NgramModel::train(train, &vocab, self.order, self.smoothing)?))
    }
}

/// Factored recurrent models trained from `config`.
#[derive(Debug, Clone, PartialEq)]
pub struct RnnRecipe {
    pub config: RnnConfig,
}

impl Recipe for RnnRecipe {
    fn name(&self) -> String {
        format!("rnn {}", self.config.fingerprint())
    }

    fn fit(&self, train: &[Sentence], augment: &[String], valid: &[Sentence]) -> Result<Box<dyn SentenceScorer>> {
        Ok(Box::new(rnnlm::train(&self.config, train, valid, augment)?.model))
    }
}

/// Hyperparameter varied by [`sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepAxis {
    HiddenSize,
    Classes,
}

impl SweepAxis {
    /// The configuration key the axis sets.
    pub fn key(self) -> &'static str {
        match self {
            SweepAxis::HiddenSize => "hidden_size",
            SweepAxis::Classes => "n_classes",
        }
    }

    fn apply(self, config: &RnnConfig, value: usize) -> RnnConfig {
        let mut c = config.clone();
        match self {
            SweepAxis::HiddenSize => c.hidden_size = value,
            SweepAxis::Classes => c.n_classes = value,
        }
        c
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "hidden_size" | "hidden" => Ok(SweepAxis::HiddenSize),
            "n_classes" | "classes" => Ok(SweepAxis::Classes),
            other => Err(format!("unknown sweep axis {other:?} (hidden_size|n_classes)")),
        }
    }
}

/// Corpora shared by every point of a sweep.
#[derive(Debug, Clone, Copy)]
pub struct SweepData<'a> {
    pub train: &'a [Sentence],
    /// Drives the learning-rate schedule.
    pub valid: &'a [Sentence],
    /// Scored for the table; may be `valid` itself.
    pub test: &'a [Sentence],
    pub augment: &'a [String],
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: usize,
    /// A failed point keeps its error message; the sweep goes on.
    pub report: std::result::Result<EvalReport, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axis: SweepAxis,
    /// Configuration of every point without the swept key.
    pub fingerprint: String,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    /// The point with the lowest perplexity; the earliest one wins ties.
    pub fn best(&self) -> Option<&SweepPoint> {
        let mut best: Option<(&SweepPoint, f64)> = None;
        for p in &self.points {
            if let Ok(r) = &p.report {
                if best.is_none_or(|(_, ppl)| r.ppl < ppl) {
                    best = Some((p, r.ppl));
                }
            }
        }
        best.map(|(p, _)| p)
    }

    /// `axis<TAB>ppl` with a header, one row per grid point; failed points
    /// read `NaN`.
    pub fn to_tsv(&self) -> String {
        let mut out = format!("{}\tppl\n", self.axis);
        for p in &self.points {
            let ppl = p.report.as_ref().map_or(f64::NAN, |r| r.ppl);
            writeln!(out, "{}\t{}", p.value, ppl).unwrap();
        }
        out
    }

    /// One `key: value` block per grid point.
    pub fn records(&self) -> String {
        let mut out = String::new();
        for p in &self.points {
            writeln!(out, "{}: {}", self.axis, p.value).unwrap();
            match &p.report {
                Ok(r) => writeln!(out, "{r}").unwrap(),
                Err(e) => writeln!(out, "error: {e}\n").unwrap(),
            }
        }
        out
    }
}

impl fmt::Display for SweepResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "axis: {}", self.axis)?;
        writeln!(f, "fixed: {}", self.fingerprint)?;
        match self.best() {
            Some(p) => writeln!(f, "best: {}", p.value),
            None => writeln!(f, "best: none"),
        }
    }
}

/// Trains one model per grid value with everything else fixed and scores
/// each on `data.test`. Points train independently on at most `jobs`
/// threads.
pub fn sweep(
    axis: SweepAxis,
    grid: &[usize],
    base: &RnnConfig,
    data: SweepData<'_>,
    oov_mode: OovMode,
    jobs: usize,
) -> Result<SweepResult> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("sweep grid is empty".into()));
    }
    let run = |&value: &usize| -> SweepPoint {
        let config = axis.apply(base, value);
        let report = rnnlm::train(&config, data.train, data.valid, data.augment)
            .and_then(|t| t.model.evaluate(data.test, oov_mode, &format!("{axis}={value}")));
        if let Err(e) = &report {
            log::warn!("{axis}={value}: {e}");
        }
        SweepPoint {
            value,
            report: report.map_err(|e| e.to_string()),
        }
    };
    let points = pool(jobs)?.install(|| grid.par_iter().map(run).collect());
    Ok(SweepResult {
        axis,
        fingerprint: base.fingerprint_without(&[axis.key()]),
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_vocab, split_kfold, Vocabulary};
    use crate::ngram::{NgramModel, Smoothing};
    use crate::oracle::MarkovSource;

    /// Assigns fixed probabilities by position, for closed-form checks.
    struct Fixed {
        vocab: Vocabulary,
        probs: Vec<f64>,
    }

    impl SentenceScorer for Fixed {
        fn model_id(&self) -> String {
            "fixed".into()
        }
        fn vocab(&self) -> &Vocabulary {
            &self.vocab
        }
        fn sentence_log10_probs(&self, s: &Sentence) -> Vec<f64> {
            (0..=s.len()).map(|i| self.probs[i].log10()).collect()
        }
    }

    fn sentences(lines: &[&str]) -> Vec<Sentence> {
        lines
            .iter()
            .map(|l| Sentence::from_words(&l.split(' ').collect::<Vec<_>>()))
            .collect()
    }

    #[test]
    fn two_token_closed_form() {
        let test = sentences(&["a"]);
        let m = Fixed {
            vocab: build_vocab::<&str>(&test, &[]),
            probs: vec![0.5, 0.25],
        };
        let r = perplexity(&m, &test, OovMode::Exclude, "t").unwrap();
        assert_eq!(r.n_scored, 2);
        assert!((r.ppl - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(r.summary_line(), format!("ppl={} scored=2 oov=0", r.ppl));
    }

    #[test]
    fn uniform_over_fifty() {
        let train: Vec<Sentence> = (0..48).map(|i| Sentence::from_words(&[format!("w{i}")])).collect();
        let vocab = build_vocab::<&str>(&train, &[]);
        assert_eq!(vocab.len(), 50);
        let m = NgramModel::uniform(vocab);
        let r = perplexity(&m, &sentences(&["w1 w2 w3", "w7"]), OovMode::Exclude, "t").unwrap();
        assert!((r.ppl - 50.0).abs() < 1e-9);
    }

    #[test]
    fn oov_accounting() {
        let train = sentences(&["a b"]);
        let m = NgramModel::uniform(build_vocab::<&str>(&train, &[]));
        let test = sentences(&["a zz b"]);
        let ex = perplexity(&m, &test, OovMode::Exclude, "t").unwrap();
        assert_eq!((ex.n_scored, ex.n_oov), (3, 1));
        let mu = perplexity(&m, &test, OovMode::MapUnk, "t").unwrap();
        assert_eq!((mu.n_scored, mu.n_oov), (4, 1));
    }

    #[test]
    fn empty_test_is_an_error() {
        let m = NgramModel::uniform(build_vocab::<&str>(&sentences(&["a"]), &[]));
        assert!(matches!(
            perplexity(&m, &[], OovMode::Exclude, "t"),
            Err(Error::NoScoredTokens)
        ));
    }

    #[test]
    fn non_finite_is_reported() {
        let train = sentences(&["a b"]);
        let vocab = build_vocab::<&str>(&train, &[]);
        let m = NgramModel::train(&train, &vocab, 2, Smoothing::Mle { floor: 0.0 }).unwrap();
        let err = perplexity(&m, &sentences(&["b a"]), OovMode::Exclude, "t").unwrap_err();
        assert!(matches!(err, Error::NonFinite { sentence: 0, .. }));
    }

    #[test]
    fn report_identity_and_order_invariance() {
        let train = sentences(&["a b c", "b c a", "c a b a"]);
        let vocab = build_vocab::<&str>(&train, &[]);
        let m = NgramModel::train(&train, &vocab, 3, Smoothing::WittenBell).unwrap();
        let mut test = sentences(&["a c", "b b a", "c"]);
        let r1 = perplexity(&m, &test, OovMode::Exclude, "t").unwrap();
        let check = 10f64.powf(-r1.total_log10prob / r1.n_scored as f64);
        assert!((r1.ppl - check).abs() <= 1e-10 * check);
        test.reverse();
        let r2 = perplexity(&m, &test, OovMode::Exclude, "t").unwrap();
        assert!((r1.ppl - r2.ppl).abs() <= 1e-12 * r1.ppl);
    }

    #[test]
    fn means() {
        assert_eq!(arithmetic_mean(&[10.0, 20.0, 30.0]), 20.0);
        assert!((geometric_mean(&[2.0, 8.0]) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn foreign_words_are_mixed_only() {
        let n = sentences(&["a b c"]);
        let m = sentences(&["a X c Y"]);
        assert_eq!(foreign_words(n.iter().zip(&m)), vec!["X", "Y"]);
    }

    struct Unigram;

    impl Recipe for Unigram {
        fn name(&self) -> String {
            "unigram-wb".into()
        }
        fn fit(&self, train: &[Sentence], augment: &[String], _valid: &[Sentence]) -> Result<Box<dyn SentenceScorer>> {
            let vocab = build_vocab(train, augment);
            Ok(Box::new(NgramModel::train(train, &vocab, 1, Smoothing::WittenBell)?))
        }
    }

    #[test]
    fn crossval_evaluates_each_sentence_once() {
        let native = sentences(&["a b", "b c", "c a", "a a", "b b", "c c"]);
        let mixed = sentences(&["a X", "b c", "Y a", "a a", "b Z", "c c"]);
        let plan = split_kfold(&native, 3, 5).unwrap();
        let r = crossval(&native, &mixed, &plan, &Unigram, OovMode::Exclude, 2).unwrap();
        assert_eq!(r.eval_counts, vec![1; 6]);
        assert_eq!(r.folds.len(), 3);
        let scored: usize = r.folds.iter().map(|f| f.n_scored + f.n_oov).sum();
        assert_eq!(scored, 6 * 3);
        let hand = (r.folds[0].ppl + r.folds[1].ppl + r.folds[2].ppl) / 3.0;
        assert!((r.mean_ppl - hand).abs() < 1e-10);
        // parallelism does not change the numbers
        let serial = crossval(&native, &mixed, &plan, &Unigram, OovMode::Exclude, 1).unwrap();
        assert_eq!(r, serial);
    }

    #[test]
    fn crossval_failure_names_fold() {
        struct Broken;
        impl Recipe for Broken {
            fn name(&self) -> String {
                "broken".into()
            }
            fn fit(&self, _: &[Sentence], _: &[String], _: &[Sentence]) -> Result<Box<dyn SentenceScorer>> {
                Err(Error::InvalidArgument("nope".into()))
            }
        }
        let native = sentences(&["a", "b", "c"]);
        let plan = split_kfold(&native, 3, 1).unwrap();
        let err = crossval(&native, &native, &plan, &Broken, OovMode::Exclude, 1).unwrap_err();
        assert!(matches!(err, Error::Fold { fold: 0, .. }));
    }

    #[test]
    fn benchmark_cells_match_standalone_runs() {
        let train = sentences(&["a b c", "b c a"]);
        let vocab = build_vocab::<&str>(&train, &[]);
        let kn = NgramModel::train(&train, &vocab, 2, Smoothing::WittenBell).unwrap();
        let uni = NgramModel::uniform(vocab);
        let t1 = sentences(&["a b"]);
        let t2 = sentences(&["c a b", "b"]);
        let m = benchmark_matrix(
            &[("wb", &kn), ("uniform", &uni)],
            &[("t1", &t1), ("t2", &t2)],
            OovMode::Exclude,
        )
        .unwrap();
        assert_eq!(m.cells.len() * m.cells[0].len(), 4);
        assert_eq!(m.cells[0][1], perplexity(&kn, &t2, OovMode::Exclude, "t2").unwrap());
        assert_eq!(m.to_tsv().lines().count(), 3);
    }

    fn sweep_config() -> RnnConfig {
        RnnConfig {
            hidden_size: 8,
            n_classes: 4,
            bptt_steps: 3,
            factors: crate::rnnlm::FactorSet::NONE,
            max_epochs: 6,
            seed: 2,
            ..RnnConfig::default()
        }
    }

    #[test]
    fn sweep_single_point_and_failures() {
        let corpus = MarkovSource::shift_chain(2, 6).unwrap().gen_corpus(600, 4);
        let data = SweepData {
            train: &corpus[10..],
            valid: &corpus[..10],
            test: &corpus[..10],
            augment: &[],
        };
        let one = sweep(SweepAxis::Classes, &[3], &sweep_config(), data, OovMode::Exclude, 1).unwrap();
        assert_eq!(one.best().unwrap().value, 3);

        // more classes than words fails alone
        let r = sweep(
            SweepAxis::Classes,
            &[2, 10_000, 5],
            &sweep_config(),
            data,
            OovMode::Exclude,
            2,
        )
        .unwrap();
        assert_eq!(r.points.len(), 3);
        assert_eq!(r.to_tsv().lines().count(), 4);
        assert!(r.points[1].report.is_err());
        assert!(r.points[0].report.is_ok() && r.points[2].report.is_ok());
        assert_ne!(r.best().unwrap().value, 10_000);
        assert!(!r.fingerprint.contains("n_classes"));
        assert!(r.fingerprint.contains("hidden_size=8"));
        assert!(sweep(SweepAxis::Classes, &[], &sweep_config(), data, OovMode::Exclude, 1).is_err());
    }

    #[test]
    fn sweep_prefers_capacity_on_structured_data() {
        let corpus = MarkovSource::shift_chain(2, 10).unwrap().gen_corpus(4000, 9);
        let data = SweepData {
            train: &corpus[40..],
            valid: &corpus[..40],
            test: &corpus[..40],
            augment: &[],
        };
        let base = RnnConfig {
            max_epochs: 10,
            ..sweep_config()
        };
        let r = sweep(SweepAxis::HiddenSize, &[1, 32], &base, data, OovMode::Exclude, 2).unwrap();
        assert_eq!(r.best().unwrap().value, 32, "{}", r.to_tsv());
    }

    #[test]
    fn sweep_axis_names() {
        assert_eq!("hidden_size".parse::<SweepAxis>().unwrap(), SweepAxis::HiddenSize);
        assert_eq!("classes".parse::<SweepAxis>().unwrap(), SweepAxis::Classes);
        assert!("lr".parse::<SweepAxis>().is_err());
    }

    #[test]
    fn recipes_fit_models() {
        let corpus = MarkovSource::uniform(5, 6).unwrap().gen_corpus(600, 1);
        let plan = split_kfold(&corpus, 3, 1).unwrap();
        let ng = NgramRecipe {
            order: 2,
            smoothing: Smoothing::KneserNey,
        };
        let r = crossval(&corpus, &corpus, &plan, &ng, OovMode::Exclude, 1).unwrap();
        // a uniform 5-word source with an end marker stays near 6
        assert!(r.mean_ppl > 4.0 && r.mean_ppl < 8.0, "{r}");
        let rnn = RnnRecipe {
            config: RnnConfig {
                max_epochs: 2,
                ..sweep_config()
            },
        };
        let r = crossval(&corpus, &corpus, &plan, &rnn, OovMode::Exclude, 3).unwrap();
        assert_eq!(r.folds.len(), 3);
        assert!(r.folds.iter().all(|f| f.model_id.starts_with("rnn-h8-c4")));
    }
}
