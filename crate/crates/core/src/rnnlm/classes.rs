use crate::corpus::Vocabulary;
use crate::error::{Error, Result};

/// Partition of the vocabulary into output classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassMap {
    class_of: Vec<u32>,
    members: Vec<Vec<u32>>,
    /// Index of each word inside its class's member list.
    slot: Vec<u32>,
}

impl ClassMap {
    /// Builds the map from a per-word class id. Every class in
    /// `0..n_classes` must be nonempty.
    pub fn from_assignment(class_of: Vec<u32>, n_classes: usize) -> Result<Self> {
        let mut members = vec![Vec::new(); n_classes];
        let mut slot = Vec::with_capacity(class_of.len());
        for (w, &c) in class_of.iter().enumerate() {
            let list = members.get_mut(c as usize).ok_or(Error::IdOutOfRange {
                what: "class map",
                id: c as usize,
                size: n_classes,
            })?;
            slot.push(list.len() as u32);
            list.push(w as u32);
        }
        if let Some(c) = members.iter().position(Vec::is_empty) {
            return Err(Error::Config(format!("class {c} has no members")));
        }
        Ok(ClassMap {
            class_of,
            members,
            slot,
        })
    }

    pub fn n_classes(&self) -> usize {
        self.members.len()
    }

    pub fn class_of(&self, word: u32) -> u32 {
        self.class_of[word as usize]
    }

    pub fn members(&self, class: u32) -> &[u32] {
        &self.members[class as usize]
    }

    pub fn slot(&self, word: u32) -> usize {
        self.slot[word as usize] as usize
    }

    pub fn assignment(&self) -> &[u32] {
        &self.class_of
    }
}

/// Frequency binning on square-root counts.
///
/// Words are taken by descending count (ties by id). A word goes to the
/// bucket containing the cumulative mass before it, `floor(cum * C / total)`,
/// clamped so class ids rise by at most one per word and so that enough words
/// remain to fill the later classes. This yields exactly `n_classes`
/// nonempty classes. With no counts at all every word gets mass 1.
pub fn assign_classes(vocab: &Vocabulary, n_classes: usize) -> Result<ClassMap> {
    let v = vocab.len();
    if n_classes == 0 || n_classes > v {
        return Err(Error::Config(format!(
            "n_classes = {n_classes} must be between 1 and the vocabulary size {v}"
        )));
    }
    let mut order: Vec<u32> = (0..v as u32).collect();
    order.sort_by_key(|&w| (std::cmp::Reverse(vocab.count(w)), w));
    let mut mass: Vec<f64> = order.iter().map(|&w| (vocab.count(w) as f64).sqrt()).collect();
    let mut total: f64 = mass.iter().sum();
    if total == 0.0 {
        mass.fill(1.0);
        total = v as f64;
    }

    let mut class_of = vec![0u32; v];
    let mut cum = 0.0;
    let mut prev = 0usize;
    for (i, &w) in order.iter().enumerate() {
        let bucket = (cum * n_classes as f64 / total + 1e-9).floor() as usize;
        let lowest = (n_classes + i).saturating_sub(v);
        let c = if i == 0 {
            0
        } else {
            bucket.clamp(prev, prev + 1).max(lowest).min(n_classes - 1)
        };
        class_of[w as usize] = c as u32;
        prev = c;
        cum += mass[i];
    }
    ClassMap::from_assignment(class_of, n_classes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_vocab, Sentence, VocabEntry};
    use proptest::prelude::*;

    fn vocab_with_counts(counts: &[u64]) -> Vocabulary {
        let mut entries: Vec<VocabEntry> = counts
            .iter()
            .enumerate()
            .map(|(i, &count)| VocabEntry {
                word: format!("w{}", i + 1),
                count,
                augmented: count == 0,
            })
            .collect();
        for special in ["</s>", "<unk>"] {
            entries.push(VocabEntry {
                word: special.into(),
                count: 0,
                augmented: false,
            });
        }
        Vocabulary::from_ordered(entries).unwrap()
    }

    fn words_of(v: &Vocabulary, cm: &ClassMap, c: u32) -> Vec<String> {
        cm.members(c).iter().map(|&w| v.word(w).to_owned()).collect()
    }

    #[test]
    fn sqrt_mass_split() {
        // sqrt masses 3 | 1 1 1 (+ two zero-count specials)
        let v = vocab_with_counts(&[9, 1, 1, 1]);
        let cm = assign_classes(&v, 2).unwrap();
        assert_eq!(words_of(&v, &cm, 0), vec!["w1"]);
        assert_eq!(words_of(&v, &cm, 1), vec!["w2", "w3", "w4", "</s>", "<unk>"]);
    }

    #[test]
    fn degenerate_class_counts() {
        let v = vocab_with_counts(&[5, 3, 2]);
        let one = assign_classes(&v, 1).unwrap();
        assert_eq!(one.members(0).len(), v.len());
        let all = assign_classes(&v, v.len()).unwrap();
        assert!((0..v.len() as u32).all(|c| all.members(c).len() == 1));
        assert!(assign_classes(&v, v.len() + 1).is_err());
        assert!(assign_classes(&v, 0).is_err());
    }

    #[test]
    fn rejects_empty_class() {
        assert!(ClassMap::from_assignment(vec![0, 0, 2], 3).is_err());
        assert!(ClassMap::from_assignment(vec![0, 5], 2).is_err());
    }

    proptest! {
        #[test]
        fn exact_partition(
            counts in proptest::collection::vec(0u64..50, 1..40),
            c in 1usize..50,
        ) {
            let v = vocab_with_counts(&counts);
            let c = c.min(v.len());
            let cm = assign_classes(&v, c).unwrap();
            prop_assert_eq!(cm.n_classes(), c);
            let mut seen = vec![false; v.len()];
            for k in 0..c as u32 {
                prop_assert!(!cm.members(k).is_empty());
                for (j, &w) in cm.members(k).iter().enumerate() {
                    prop_assert!(!seen[w as usize]);
                    seen[w as usize] = true;
                    prop_assert_eq!(cm.class_of(w), k);
                    prop_assert_eq!(cm.slot(w), j);
                }
            }
            prop_assert!(seen.iter().all(|&s| s));
            // deterministic
            prop_assert_eq!(assign_classes(&v, c).unwrap(), cm);
        }
    }

    #[test]
    fn frequent_words_get_small_classes() {
        let corpus = vec![Sentence::from_words(&["a", "a", "a", "a", "b", "c", "d", "e"])];
        let v = build_vocab::<&str>(&corpus, &[]);
        let cm = assign_classes(&v, 3).unwrap();
        let a = v.id("a").unwrap();
        assert_eq!(cm.class_of(a), 0);
        assert!(cm.members(0).len() <= cm.members(2).len());
    }
}
