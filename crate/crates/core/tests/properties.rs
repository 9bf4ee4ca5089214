//! Cross-module properties over the public API.

use proptest::prelude::*;

use cslm::corpus::{build_vocab, split_kfold, Sentence};
use cslm::eval::{crossval, NgramRecipe};
use cslm::factors::tag_parallel;
use cslm::lm::{OovMode, SentenceScorer};
use cslm::ngram::{read_arpa, write_arpa, NgramModel, Smoothing};
use cslm::oracle::{exhaustive_token_log10probs, AnyModel, MarkovSource, SwitchSource};
use cslm::rnnlm::{pos_inventory, read_model, write_model, FactorSet, RnnConfig, RnnModel};

fn smoothing() -> impl Strategy<Value = Smoothing> {
    prop_oneof![
        Just(Smoothing::KneserNey),
        Just(Smoothing::WittenBell),
        (0.01f64..0.5).prop_map(|floor| Smoothing::Mle { floor }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn report_identity(seed in any::<u64>(), order in 1usize..5, sm in smoothing()) {
        let src = MarkovSource::uniform(6, 5).unwrap();
        let train = src.gen_corpus(300, seed);
        let test = src.gen_corpus(60, seed ^ 1);
        let m = NgramModel::train(&train, &build_vocab::<&str>(&train, &[]), order, sm).unwrap();
        for mode in [OovMode::Exclude, OovMode::MapUnk] {
            let r = m.evaluate(&test, mode, "t").unwrap();
            let want = 10f64.powf(-r.total_log10prob / r.n_scored as f64);
            prop_assert!((r.ppl - want).abs() <= 1e-10 * want);
        }
    }

    #[test]
    fn crossval_scores_every_sentence_once(n in 6usize..60, k in 2usize..6, seed in any::<u64>()) {
        prop_assume!(k <= n);
        let corpus = MarkovSource::uniform(5, 4).unwrap().gen_corpus(4 * n, seed);
        let plan = split_kfold(&corpus, k, seed).unwrap();
        let recipe = NgramRecipe { order: 2, smoothing: Smoothing::WittenBell };
        let r = crossval(&corpus, &corpus, &plan, &recipe, OovMode::MapUnk, 1).unwrap();
        prop_assert!(r.eval_counts.iter().all(|&c| c == 1));
        let scored: usize = r.folds.iter().map(|f| f.n_scored).sum();
        prop_assert_eq!(scored, corpus.iter().map(|s| s.len() + 1).sum::<usize>());
        let mean = r.folds.iter().map(|f| f.ppl).sum::<f64>() / k as f64;
        prop_assert!((r.mean_ppl - mean).abs() <= 1e-12 * mean);
    }

    /// Switch sites are single-word substitutions, so alignment recovers the
    /// generator's labels on both sides.
    #[test]
    fn derived_labels_match_ground_truth(seed in any::<u64>(), rho in 0.0f64..1.0) {
        let c = SwitchSource::standard(rho, 30, 5).unwrap().gen_corpus(400, seed);
        let (n, m) = tag_parallel(&c.native.iter().map(Sentence::bare).collect::<Vec<_>>(),
                                  &c.mixed.iter().map(Sentence::bare).collect::<Vec<_>>()).unwrap();
        for (derived, truth) in n.iter().chain(&m).zip(c.native.iter().chain(&c.mixed)) {
            let a: Vec<_> = derived.tokens.iter().map(|t| t.cs).collect();
            let b: Vec<_> = truth.tokens.iter().map(|t| t.cs).collect();
            prop_assert_eq!(a, b);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn ngram_fast_path_matches_exhaustive(seed in any::<u64>(), order in 1usize..5, sm in smoothing()) {
        let src = MarkovSource::shift_chain(2, 6).unwrap();
        let train = src.gen_corpus(200, seed);
        let m = NgramModel::train(&train, &build_vocab(&train, &["extra"]), order, sm).unwrap();
        for s in src.gen_corpus(40, seed ^ 7) {
            let fast = m.sentence_log10_probs(&s);
            let slow = exhaustive_token_log10probs(AnyModel::Ngram(&m), &s).unwrap();
            for (a, b) in fast.iter().zip(&slow) {
                prop_assert!((a - b).abs() <= 1e-10, "{} vs {}", a, b);
            }
        }
    }

    #[test]
    fn rnn_fast_path_matches_exhaustive(seed in any::<u64>(), h in 1usize..9, c in 1usize..6, pos: bool, cs: bool) {
        let data = SwitchSource::standard(0.4, 12, 3).unwrap().gen_corpus(120, seed);
        let vocab = build_vocab::<&str>(&data.mixed, &[]);
        let config = RnnConfig {
            hidden_size: h,
            n_classes: c,
            factors: FactorSet { pos, cs },
            seed,
            ..RnnConfig::default()
        };
        let mut model = RnnModel::new(config, vocab, pos_inventory(&data.mixed)).unwrap();
        let scaled: Vec<f64> = model.params.to_flat().iter().map(|x| 20.0 * x).collect();
        model.params.set_flat(&scaled);
        for s in &data.mixed[..5] {
            let fast = model.sentence_log10_probs(s);
            let slow = exhaustive_token_log10probs(AnyModel::Rnn(&model), s).unwrap();
            for (a, b) in fast.iter().zip(&slow) {
                prop_assert!((a - b).abs() <= 1e-10, "{} vs {}", a, b);
            }
        }
    }
}

#[test]
fn files_preserve_scores() {
    let dir = tempfile::tempdir().unwrap();
    let data = SwitchSource::standard(0.3, 20, 4).unwrap().gen_corpus(1500, 3);
    let vocab = build_vocab::<&str>(&data.native, &[]);

    let ngram = NgramModel::train(&data.native, &vocab, 3, Smoothing::KneserNey).unwrap();
    let arpa = dir.path().join("m.arpa");
    write_arpa(&ngram, &arpa).unwrap();
    let back = read_arpa(&arpa).unwrap();
    for s in &data.mixed[..30] {
        for (a, b) in ngram.sentence_log10_probs(s).iter().zip(back.sentence_log10_probs(s)) {
            assert!((a - b).abs() <= 1e-6 || a == &b);
        }
    }

    let config = RnnConfig {
        hidden_size: 6,
        n_classes: 3,
        max_epochs: 2,
        ..RnnConfig::default()
    };
    let trained = cslm::rnnlm::train::<&str>(&config, &data.native[10..], &data.native[..10], &[]).unwrap();
    let path = dir.path().join("m.cslm");
    write_model(&trained.model, &path).unwrap();
    let back = read_model(&path).unwrap();
    for s in &data.mixed[..30] {
        assert_eq!(trained.model.sentence_log10_probs(s), back.sentence_log10_probs(s));
    }
    let bytes = std::fs::read(&path).unwrap();
    assert_eq!(&bytes[..4], b"CSLM");
}
