use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{NgramEntry, NgramModel};
use crate::corpus::{VocabEntry, Vocabulary};
use crate::error::{Error, Result};

/// log10(0) as written in ARPA files.
const LOG_ZERO: f64 = -99.0;

fn fmt_log(x: f64) -> String {
    if x <= LOG_ZERO {
        format!("{LOG_ZERO}")
    } else {
        format!("{x}")
    }
}

fn parse_log(s: &str) -> Option<f64> {
    let x: f64 = s.parse().ok()?;
    if x.is_nan() {
        return None;
    }
    Some(if x <= LOG_ZERO { f64::NEG_INFINITY } else { x })
}

impl NgramModel {
    /// ARPA text. Unigrams are written in vocabulary id order so that the
    /// vocabulary can be rebuilt from the file.
    pub fn to_arpa(&self) -> String {
        let mut out = String::from("\n\\data\\\n");
        for (i, g) in self.grams.iter().enumerate() {
            writeln!(out, "ngram {}={}", i + 1, g.len()).unwrap();
        }
        for (i, grams) in self.grams.iter().enumerate() {
            writeln!(out, "\n\\{}-grams:", i + 1).unwrap();
            let mut sorted: Vec<(&Vec<u32>, &NgramEntry)> = grams.iter().collect();
            sorted.sort_unstable_by(|a, b| a.0.cmp(b.0));
            for (gram, e) in sorted {
                let words: Vec<&str> = gram.iter().map(|&id| self.vocab.word(id)).collect();
                write!(out, "{}\t{}", fmt_log(e.log10_prob), words.join(" ")).unwrap();
                if let Some(b) = e.log10_backoff {
                    write!(out, "\t{}", fmt_log(b)).unwrap();
                }
                out.push('\n');
            }
        }
        out.push_str("\n\\end\\\n");
        out
    }

    pub fn from_arpa(text: &str) -> Result<Self> {
        let bad = |line: usize, message: String| Error::Format {
            what: "ARPA",
            line,
            message,
        };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());

        match lines.next() {
            Some((_, "\\data\\")) => {}
            Some((n, other)) => return Err(bad(n, format!("expected \\data\\, found {other:?}"))),
            None => return Err(bad(0, "empty file".into())),
        }

        let mut declared: Vec<usize> = Vec::new();
        let mut pending = None;
        for (n, line) in lines.by_ref() {
            if let Some(spec) = line.strip_prefix("ngram ") {
                let (order, count) = spec
                    .split_once('=')
                    .ok_or_else(|| bad(n, format!("malformed count line {line:?}")))?;
                let order: usize = order.trim().parse().map_err(|_| bad(n, "bad order".into()))?;
                let count: usize = count.trim().parse().map_err(|_| bad(n, "bad count".into()))?;
                if order != declared.len() + 1 {
                    return Err(bad(n, format!("ngram orders out of sequence at {order}")));
                }
                declared.push(count);
            } else {
                pending = Some((n, line));
                break;
            }
        }
        if declared.is_empty() {
            return Err(bad(0, "no ngram count lines".into()));
        }
        let order = declared.len();

        let mut vocab_words: Vec<String> = Vec::new();
        let mut index: HashMap<String, u32> = HashMap::new();
        let mut raw: Vec<Vec<(Vec<u32>, NgramEntry)>> = vec![Vec::new(); order];
        let mut section: Option<usize> = None;
        let mut finished = false;
        for (n, line) in pending.into_iter().chain(lines) {
            if line == "\\end\\" {
                finished = true;
                break;
            }
            if let Some(header) = line.strip_prefix('\\').and_then(|h| h.strip_suffix("-grams:")) {
                let k: usize = header.parse().map_err(|_| bad(n, format!("bad section {line:?}")))?;
                if k != section.map_or(1, |s| s + 2) || k > order {
                    return Err(bad(n, format!("unexpected section {line:?}")));
                }
                section = Some(k - 1);
                continue;
            }
            let Some(s) = section else {
                return Err(bad(n, format!("entry outside any section: {line:?}")));
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            let words_n = s + 1;
            if fields.len() != words_n + 1 && fields.len() != words_n + 2 {
                return Err(bad(n, format!("expected {} fields, got {}", words_n + 1, fields.len())));
            }
            let log10_prob = parse_log(fields[0]).ok_or_else(|| bad(n, format!("bad logprob {:?}", fields[0])))?;
            let log10_backoff = match fields.get(words_n + 1) {
                Some(b) => Some(parse_log(b).ok_or_else(|| bad(n, format!("bad backoff {b:?}")))?),
                None => None,
            };
            let mut gram = Vec::with_capacity(words_n);
            for &w in &fields[1..=words_n] {
                let id = match index.get(w) {
                    Some(&id) => id,
                    None if s == 0 => {
                        let id = vocab_words.len() as u32;
                        index.insert(w.to_owned(), id);
                        vocab_words.push(w.to_owned());
                        id
                    }
                    None => return Err(bad(n, format!("word {w:?} missing from unigrams"))),
                };
                gram.push(id);
            }
            raw[s].push((
                gram,
                NgramEntry {
                    log10_prob,
                    log10_backoff,
                },
            ));
        }
        if !finished {
            return Err(bad(0, "missing \\end\\".into()));
        }
        for (k, (entries, &want)) in raw.iter().zip(&declared).enumerate() {
            if entries.len() != want {
                return Err(bad(
                    0,
                    format!("{}-grams: header says {want}, found {}", k + 1, entries.len()),
                ));
            }
        }

        let vocab = Vocabulary::from_ordered(
            vocab_words
                .into_iter()
                .map(|word| VocabEntry {
                    word,
                    count: 0,
                    augmented: false,
                })
                .collect(),
        )?;
        let mut grams: Vec<HashMap<Vec<u32>, NgramEntry>> = raw.into_iter().map(|v| v.into_iter().collect()).collect();
        // Specials added by the vocabulary need a unigram to stay scorable.
        for id in grams[0].len() as u32..vocab.len() as u32 {
            grams[0].insert(
                vec![id],
                NgramEntry {
                    log10_prob: f64::NEG_INFINITY,
                    log10_backoff: None,
                },
            );
        }
        Ok(NgramModel::from_parts(order, vocab, None, grams, Vec::new()))
    }
}

pub fn write_arpa(model: &NgramModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, model.to_arpa()).map_err(|e| Error::file(path, e))
}

pub fn read_arpa(path: impl AsRef<Path>) -> Result<NgramModel> {
    let path = path.as_ref();
    NgramModel::from_arpa(&fs::read_to_string(path).map_err(|e| Error::file(path, e))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_vocab, Sentence};
    use crate::ngram::Smoothing;

    const TINY: &str = "
\\data\\
ngram 1=4
ngram 2=2

\\1-grams:
-0.3010299956639812\ta\t-0.5
-0.6020599913279624\t</s>
-0.6020599913279624\tb
-99\t<unk>

\\2-grams:
-0.1\ta b
-0.2\ta </s>

\\end\\
";

    #[test]
    fn parses_hand_written_file() {
        let m = NgramModel::from_arpa(TINY).unwrap();
        assert_eq!(m.order(), 2);
        assert_eq!(m.ngram_counts(), vec![4, 2]);
        let v = m.vocab();
        let (a, b) = (v.id("a").unwrap(), v.id("b").unwrap());
        assert_eq!(m.log10_prob(&[a], b), -0.1);
        // unseen (a, a) backs off: -0.5 + log10 P(a)
        assert!((m.log10_prob(&[a], a) - (-0.5 + 0.5f64.log10())).abs() < 1e-15);
        assert_eq!(m.log10_prob(&[], v.unk()), f64::NEG_INFINITY);
    }

    #[test]
    fn rejects_broken_files() {
        assert!(NgramModel::from_arpa("").is_err());
        assert!(NgramModel::from_arpa(&TINY.replace("ngram 2=2", "ngram 2=3")).is_err());
        assert!(NgramModel::from_arpa(&TINY.replace("\\end\\", "")).is_err());
        assert!(NgramModel::from_arpa(&TINY.replace("-0.1\ta b", "-0.1\ta zz")).is_err());
        assert!(NgramModel::from_arpa(&TINY.replace("-0.1\ta b", "x\ta b")).is_err());
    }

    #[test]
    fn round_trip_preserves_everything() {
        let corpus: Vec<Sentence> = ["a b c a", "b c a b d", "c a", "d d a b c"]
            .iter()
            .map(|s| Sentence::from_words(&s.split(' ').collect::<Vec<_>>()))
            .collect();
        let vocab = build_vocab(&corpus, &["zz"]);
        for smoothing in [
            Smoothing::KneserNey,
            Smoothing::WittenBell,
            Smoothing::Mle { floor: 0.0 },
        ] {
            let m = NgramModel::train(&corpus, &vocab, 3, smoothing).unwrap();
            let text = m.to_arpa();
            let back = NgramModel::from_arpa(&text).unwrap();
            assert_eq!(back.vocab().entries().len(), vocab.len());
            for id in 0..vocab.len() as u32 {
                assert_eq!(back.vocab().word(id), vocab.word(id));
            }
            for (orig, read) in m.grams().iter().zip(back.grams()) {
                assert_eq!(orig.len(), read.len());
                for (g, e) in orig {
                    let r = read[g];
                    assert_eq!(r.log10_prob, e.log10_prob);
                    assert_eq!(r.log10_backoff, e.log10_backoff);
                }
            }
            assert_eq!(back.to_arpa(), text);
        }
    }
}
