//! Factored sentences, their on-disk line format, text normalization,
//! vocabularies and fold plans.
//!
//! A factored corpus file holds one sentence per line. Tokens are separated
//! by spaces and each token has the shape
//!
//! ```text
//! surface[|P:tag][|C:Yes|C:No]
//! ```
//!
//! with the fields in that fixed order. The sentence-end token `</s>` is never
//! written; loaders and scorers append it implicitly.

mod folds;
mod normalize;
mod stats;
mod vocab;

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

pub use folds::{split_kfold, FoldPlan};
pub use normalize::{emit_plain, is_latin_letter, normalize_text};
pub use stats::{corpus_stats, CorpusStats};
pub use vocab::{build_vocab, VocabEntry, Vocabulary, EOS, UNK};

use crate::error::{Error, Result};

/// Code-switch factor value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CsLabel {
    Yes,
    No,
}

impl CsLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            CsLabel::Yes => "Yes",
            CsLabel::No => "No",
        }
    }
}

impl fmt::Display for CsLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CsLabel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "Yes" => Ok(CsLabel::Yes),
            "No" => Ok(CsLabel::No),
            other => Err(format!("unknown CS label {other:?}")),
        }
    }
}

/// A surface word together with its optional POS and code-switch factors.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FactoredToken {
    pub surface: String,
    pub pos: Option<String>,
    pub cs: Option<CsLabel>,
}

impl FactoredToken {
    pub fn word(surface: impl Into<String>) -> Self {
        FactoredToken {
            surface: surface.into(),
            pos: None,
            cs: None,
        }
    }

    pub fn new(surface: impl Into<String>, pos: Option<&str>, cs: Option<CsLabel>) -> Self {
        FactoredToken {
            surface: surface.into(),
            pos: pos.map(str::to_owned),
            cs,
        }
    }
}

impl fmt::Display for FactoredToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.surface)?;
        if let Some(pos) = &self.pos {
            write!(f, "|P:{pos}")?;
        }
        if let Some(cs) = self.cs {
            write!(f, "|C:{cs}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Sentence {
    pub tokens: Vec<FactoredToken>,
}

impl Sentence {
    pub fn new(tokens: Vec<FactoredToken>) -> Self {
        Sentence { tokens }
    }

    /// Bare-word sentence without factors.
    pub fn from_words<S: AsRef<str>>(words: &[S]) -> Self {
        Sentence {
            tokens: words.iter().map(|w| FactoredToken::word(w.as_ref())).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn surfaces(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.surface.as_str())
    }

    /// Copy of the sentence with every factor removed.
    pub fn bare(&self) -> Sentence {
        Sentence {
            tokens: self
                .tokens
                .iter()
                .map(|t| FactoredToken::word(t.surface.clone()))
                .collect(),
        }
    }
}

/// Parses one factored line. Errors report line 1; use [`parse_corpus`] for
/// multi-line input with real line numbers.
pub fn parse_factored_line(line: &str) -> Result<Sentence> {
    parse_line_at(line, 1)
}

pub fn emit_factored_line(sentence: &Sentence) -> String {
    let mut out = String::new();
    for (i, tok) in sentence.tokens.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&tok.to_string());
    }
    out
}

fn parse_error(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

pub(crate) fn parse_line_at(line: &str, lineno: usize) -> Result<Sentence> {
    let mut tokens = Vec::new();
    let mut start: Option<(usize, usize)> = None;
    // Walk chars so that reported columns count characters, not bytes.
    let chars = line.char_indices().chain(std::iter::once((line.len(), ' ')));
    for (column, (byte, ch)) in (1..).zip(chars) {
        if ch.is_whitespace() {
            if let Some((b, c)) = start.take() {
                tokens.push(parse_token(&line[b..byte], lineno, c)?);
            }
        } else if start.is_none() {
            start = Some((byte, column));
        }
    }
    if tokens.is_empty() {
        return Err(parse_error(lineno, 1, "empty sentence"));
    }
    Ok(Sentence { tokens })
}

fn parse_token(text: &str, line: usize, column: usize) -> Result<FactoredToken> {
    let mut fields = text.split('|');
    let surface = fields.next().unwrap_or_default();
    if surface.is_empty() {
        return Err(parse_error(line, column, "empty surface"));
    }
    let mut token = FactoredToken::word(surface);
    let mut col = column + surface.chars().count();
    for field in fields {
        let field_col = col + 1;
        if let Some(tag) = field.strip_prefix("P:") {
            if token.pos.is_some() || token.cs.is_some() {
                return Err(parse_error(line, field_col, "P: field repeated or after C:"));
            }
            if tag.is_empty() {
                return Err(parse_error(line, field_col, "empty POS tag"));
            }
            token.pos = Some(tag.to_owned());
        } else if let Some(label) = field.strip_prefix("C:") {
            if token.cs.is_some() {
                return Err(parse_error(line, field_col, "C: field repeated"));
            }
            token.cs = Some(
                label
                    .parse()
                    .map_err(|_| parse_error(line, field_col, format!("unknown CS label {label:?}")))?,
            );
        } else {
            return Err(parse_error(
                line,
                field_col,
                format!("malformed field prefix in {field:?}"),
            ));
        }
        col += 1 + field.chars().count();
    }
    Ok(token)
}

/// Parses a whole factored corpus. Blank lines are skipped; line numbers in
/// errors refer to the original text.
pub fn parse_corpus(text: &str) -> Result<Vec<Sentence>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| parse_line_at(l, i + 1))
        .collect()
}

pub fn emit_corpus(sentences: &[Sentence]) -> String {
    let mut out = String::new();
    for s in sentences {
        out.push_str(&emit_factored_line(s));
        out.push('\n');
    }
    out
}

pub fn read_corpus(path: impl AsRef<Path>) -> Result<Vec<Sentence>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
    parse_corpus(&text)
}

pub fn write_corpus(path: impl AsRef<Path>, sentences: &[Sentence]) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, emit_corpus(sentences)).map_err(|e| Error::file(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_full_factors() {
        let s = parse_factored_line("mera|P:PRP|C:No computer|P:NN|C:Yes").unwrap();
        assert_eq!(
            s.tokens,
            vec![
                FactoredToken::new("mera", Some("PRP"), Some(CsLabel::No)),
                FactoredToken::new("computer", Some("NN"), Some(CsLabel::Yes)),
            ]
        );
    }

    #[test]
    fn parses_bare_words() {
        let s = parse_factored_line("mera computer").unwrap();
        assert_eq!(s, Sentence::from_words(&["mera", "computer"]));
    }

    #[test]
    fn rejects_unknown_cs_label() {
        let err = parse_factored_line("x|C:Maybe").unwrap_err();
        assert!(err.to_string().contains("unknown CS label"), "{err}");
        match err {
            Error::Parse { line, column, .. } => assert_eq!((line, column), (1, 3)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_malformed_fields() {
        for bad in ["|P:NN", "a|X:1", "a|C:No|P:NN", "a|P:", "a|P:NN|P:VB", ""] {
            assert!(parse_factored_line(bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn error_reports_line_and_column() {
        let err = parse_corpus("a b\n\nc dé|Q:x\n").unwrap_err();
        match err {
            Error::Parse { line, column, .. } => assert_eq!((line, column), (3, 6)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.txt");
        let corpus = vec![
            parse_factored_line("a|P:NN b|C:Yes").unwrap(),
            Sentence::from_words(&["c"]),
        ];
        write_corpus(&path, &corpus).unwrap();
        assert_eq!(read_corpus(&path).unwrap(), corpus);
    }

    fn arb_token() -> impl Strategy<Value = FactoredToken> {
        (
            "[a-zक-ह0-9<>:]{1,6}",
            proptest::option::of("[A-Z_:]{1,4}"),
            proptest::option::of(prop_oneof![Just(CsLabel::Yes), Just(CsLabel::No)]),
        )
            .prop_map(|(s, p, c)| FactoredToken {
                surface: s,
                pos: p,
                cs: c,
            })
    }

    proptest! {
        #[test]
        fn parse_emit_round_trip(tokens in proptest::collection::vec(arb_token(), 1..8)) {
            let s = Sentence::new(tokens);
            let line = emit_factored_line(&s);
            let parsed = parse_factored_line(&line).unwrap();
            prop_assert_eq!(&parsed, &s);
            prop_assert_eq!(emit_factored_line(&parsed), line);
        }
    }
}
