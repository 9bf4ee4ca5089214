use unicode_general_category::{get_general_category, GeneralCategory};

use super::Sentence;

/// Sentence terminators. `|` stands in for the danda in romanised text; the
/// Devanagari danda and double danda are accepted as well.
fn is_sentence_final(ch: char) -> bool {
    matches!(ch, '.' | '?' | '!' | '|' | '\u{0964}' | '\u{0965}')
}

/// Letters, digits and combining marks of any script are word material.
/// Marks must survive or Devanagari words lose their viramas and nuktas.
fn is_word_char(ch: char) -> bool {
    ch.is_alphanumeric()
        || matches!(
            get_general_category(ch),
            GeneralCategory::NonspacingMark | GeneralCategory::SpacingMark | GeneralCategory::EnclosingMark
        )
}

pub fn is_latin_letter(ch: char) -> bool {
    matches!(ch,
        'A'..='Z'
        | 'a'..='z'
        | '\u{00C0}'..='\u{00D6}'
        | '\u{00D8}'..='\u{00F6}'
        | '\u{00F8}'..='\u{024F}'
        | '\u{1E00}'..='\u{1EFF}'
        | '\u{2C60}'..='\u{2C7F}'
        | '\u{A720}'..='\u{A7FF}'
        | '\u{FF21}'..='\u{FF3A}'
        | '\u{FF41}'..='\u{FF5A}')
}

/// Turns raw text into word-only sentences.
///
/// Rules, in order: characters that are neither word material nor sentence
/// terminators are deleted (whitespace is kept as a separator); sentences end
/// at terminators and at line breaks; whitespace runs collapse; Latin letters
/// are lowercased; empty sentences are dropped.
pub fn normalize_text(raw: &str) -> Vec<Sentence> {
    let mut out = Vec::new();
    let mut current = String::new();
    let flush = |buf: &mut String, out: &mut Vec<Sentence>| {
        let words: Vec<&str> = buf.split_whitespace().collect();
        if !words.is_empty() {
            out.push(Sentence::from_words(&words));
        }
        buf.clear();
    };
    for line in raw.lines() {
        for ch in line.chars() {
            if is_sentence_final(ch) {
                flush(&mut current, &mut out);
            } else if ch.is_whitespace() {
                current.push(' ');
            } else if is_word_char(ch) {
                if is_latin_letter(ch) {
                    current.extend(ch.to_lowercase());
                } else {
                    current.push(ch);
                }
            }
        }
        flush(&mut current, &mut out);
    }
    out
}

/// One sentence per line, words joined by single spaces.
pub fn emit_plain(sentences: &[Sentence]) -> String {
    let mut out = String::new();
    for s in sentences {
        let words: Vec<&str> = s.surfaces().collect();
        out.push_str(&words.join(" "));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn words(s: &[Sentence]) -> Vec<Vec<String>> {
        s.iter().map(|s| s.surfaces().map(str::to_owned).collect()).collect()
    }

    #[test]
    fn normal_text_unchanged() {
        assert_eq!(words(&normalize_text("abc def")), vec![vec!["abc", "def"]]);
    }

    #[test]
    fn strips_emoji_and_punctuation() {
        assert_eq!(
            words(&normalize_text("Internet   use KARO!!! 😀")),
            vec![vec!["internet", "use", "karo"]]
        );
    }

    #[test]
    fn empty_input() {
        assert!(normalize_text("").is_empty());
        assert!(normalize_text(" !!. \n ?").is_empty());
    }

    #[test]
    fn keeps_devanagari_marks() {
        let s = normalize_text("मुझे इंटरनेट चाहिए। Thank you");
        assert_eq!(words(&s), vec![vec!["मुझे", "इंटरनेट", "चाहिए"], vec!["thank", "you"]]);
    }

    #[test]
    fn splits_on_terminators_and_lines() {
        let s = normalize_text("a b? c|d\ne, f");
        assert_eq!(words(&s), vec![vec!["a", "b"], vec!["c"], vec!["d"], vec!["e", "f"]]);
    }

    #[test]
    fn lowercases_latin_only() {
        assert_eq!(words(&normalize_text("ÉCOLE Ωmega")), vec![vec!["école", "Ωmega"]]);
    }

    proptest! {
        #[test]
        fn idempotent(raw in "\\PC{0,60}") {
            let once = normalize_text(&raw);
            let twice = normalize_text(&emit_plain(&once));
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn tokens_are_clean(raw in "\\PC{0,60}") {
            for s in normalize_text(&raw) {
                prop_assert!(!s.is_empty());
                for t in &s.tokens {
                    prop_assert!(!t.surface.is_empty());
                    prop_assert!(!t.surface.contains('|'));
                    prop_assert!(!t.surface.chars().any(char::is_whitespace));
                }
            }
        }
    }
}
