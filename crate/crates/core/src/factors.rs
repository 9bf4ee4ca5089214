//! Code-switch factor derivation from parallel native / code-switched
//! sentence pairs, and POS tag validation.
//!
//! A pair is aligned on exact surface matches. Among all longest common
//! subsequences the aligner picks one that leaves the most mismatched tokens
//! pairable, then pairs each gap between consecutive matches left to right:
//! the first `min(a, b)` tokens of the two runs become substitutions and the
//! remainder become deletions (native side) or insertions (mixed side).

use std::collections::HashSet;

use crate::corpus::{CsLabel, Sentence};
use crate::error::{Error, Result};

/// Tag a tagger emits when it cannot label a token.
pub const UNK_TAG: &str = "UNK";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinkKind {
    Match,
    Substitution,
    Insertion,
    Deletion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AlignmentLink {
    pub native: Option<usize>,
    pub mixed: Option<usize>,
    pub kind: LinkKind,
}

impl AlignmentLink {
    fn matched(n: usize, m: usize) -> Self {
        AlignmentLink {
            native: Some(n),
            mixed: Some(m),
            kind: LinkKind::Match,
        }
    }

    fn substitution(n: usize, m: usize) -> Self {
        AlignmentLink {
            native: Some(n),
            mixed: Some(m),
            kind: LinkKind::Substitution,
        }
    }

    fn deletion(n: usize) -> Self {
        AlignmentLink {
            native: Some(n),
            mixed: None,
            kind: LinkKind::Deletion,
        }
    }

    fn insertion(m: usize) -> Self {
        AlignmentLink {
            native: None,
            mixed: Some(m),
            kind: LinkKind::Insertion,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Native,
    Mixed,
}

/// One CS label per token of the labeled sentence.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CsLabeling {
    pub labels: Vec<CsLabel>,
}

impl CsLabeling {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn yes_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l == CsLabel::Yes).count()
    }
}

pub fn align_pair(native: &Sentence, mixed: &Sentence) -> Vec<AlignmentLink> {
    let a: Vec<&str> = native.surfaces().collect();
    let b: Vec<&str> = mixed.surfaces().collect();
    let (n, m) = (a.len(), b.len());

    // best[i][j] = (matches, pairable mismatches) over suffixes a[i..], b[j..]
    let width = m + 1;
    let mut best = vec![(0u32, 0u32); (n + 1) * width];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            let diag = best[(i + 1) * width + j + 1];
            let step = if a[i] == b[j] {
                (diag.0 + 1, diag.1)
            } else {
                (diag.0, diag.1 + 1)
            };
            best[i * width + j] = step.max(best[(i + 1) * width + j]).max(best[i * width + j + 1]);
        }
    }

    let mut matches = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < n && j < m {
        let here = best[i * width + j];
        let diag = best[(i + 1) * width + j + 1];
        if a[i] == b[j] && here == (diag.0 + 1, diag.1) {
            matches.push((i, j));
            i += 1;
            j += 1;
        } else if a[i] != b[j] && here == (diag.0, diag.1 + 1) {
            i += 1;
            j += 1;
        } else if here == best[(i + 1) * width + j] {
            i += 1;
        } else {
            j += 1;
        }
    }

    let mut links = Vec::with_capacity(n.max(m));
    let (mut ni, mut mi) = (0, 0);
    for (mn, mm) in matches.into_iter().chain(std::iter::once((n, m))) {
        pair_gap(ni..mn, mi..mm, &mut links);
        if mn < n && mm < m {
            links.push(AlignmentLink::matched(mn, mm));
        }
        ni = mn + 1;
        mi = mm + 1;
    }
    links
}

fn pair_gap(native: std::ops::Range<usize>, mixed: std::ops::Range<usize>, links: &mut Vec<AlignmentLink>) {
    let paired = native.len().min(mixed.len());
    for k in 0..paired {
        links.push(AlignmentLink::substitution(native.start + k, mixed.start + k));
    }
    links.extend((native.start + paired..native.end).map(AlignmentLink::deletion));
    links.extend((mixed.start + paired..mixed.end).map(AlignmentLink::insertion));
}

/// Tokens in match links are `No`; every other token on `side` is `Yes`.
pub fn derive_cs_labels(links: &[AlignmentLink], side: Side) -> CsLabeling {
    let index = |l: &AlignmentLink| match side {
        Side::Native => l.native,
        Side::Mixed => l.mixed,
    };
    let len = links.iter().filter_map(index).count();
    let mut labels = vec![CsLabel::Yes; len];
    for link in links {
        if let (Some(i), LinkKind::Match) = (index(link), link.kind) {
            labels[i] = CsLabel::No;
        }
    }
    CsLabeling { labels }
}

/// Carries native-side labels over to the mixed sentence: matched and
/// substituted tokens inherit their partner's label, inserted tokens are `Yes`.
pub fn project_labels(
    native: &Sentence,
    native_labels: &CsLabeling,
    mixed: &Sentence,
    links: &[AlignmentLink],
) -> Result<CsLabeling> {
    if native_labels.len() != native.len() {
        return Err(Error::LengthMismatch {
            expected: native.len(),
            got: native_labels.len(),
        });
    }
    let mut labels = vec![None; mixed.len()];
    for link in links {
        let Some(m) = link.mixed else { continue };
        let slot = labels.get_mut(m).ok_or(Error::IdOutOfRange {
            what: "mixed sentence",
            id: m,
            size: mixed.len(),
        })?;
        *slot = Some(match (link.kind, link.native) {
            (LinkKind::Insertion, _) | (_, None) => CsLabel::Yes,
            (_, Some(n)) => *native_labels.labels.get(n).ok_or(Error::IdOutOfRange {
                what: "native sentence",
                id: n,
                size: native.len(),
            })?,
        });
    }
    let covered = labels.iter().filter(|l| l.is_some()).count();
    if covered != mixed.len() {
        return Err(Error::LengthMismatch {
            expected: mixed.len(),
            got: covered,
        });
    }
    Ok(CsLabeling {
        labels: labels.into_iter().flatten().collect(),
    })
}

/// Copy of `sentence` with its CS fields replaced by `labeling`.
pub fn apply_cs(sentence: &Sentence, labeling: &CsLabeling) -> Result<Sentence> {
    if labeling.len() != sentence.len() {
        return Err(Error::LengthMismatch {
            expected: sentence.len(),
            got: labeling.len(),
        });
    }
    let mut out = sentence.clone();
    for (tok, &label) in out.tokens.iter_mut().zip(&labeling.labels) {
        tok.cs = Some(label);
    }
    Ok(out)
}

/// Aligns one pair and returns both sentences with CS fields filled. The
/// native side is labeled from the alignment; the mixed side by projection.
pub fn tag_pair(native: &Sentence, mixed: &Sentence) -> Result<(Sentence, Sentence)> {
    let links = align_pair(native, mixed);
    let native_labels = derive_cs_labels(&links, Side::Native);
    let mixed_labels = project_labels(native, &native_labels, mixed, &links)?;
    Ok((apply_cs(native, &native_labels)?, apply_cs(mixed, &mixed_labels)?))
}

/// [`tag_pair`] over two parallel corpora with the same sentence count.
pub fn tag_parallel(native: &[Sentence], mixed: &[Sentence]) -> Result<(Vec<Sentence>, Vec<Sentence>)> {
    if native.len() != mixed.len() {
        return Err(Error::InvalidArgument(format!(
            "parallel corpora differ in length: {} native vs {} mixed sentences",
            native.len(),
            mixed.len()
        )));
    }
    let mut out_native = Vec::with_capacity(native.len());
    let mut out_mixed = Vec::with_capacity(mixed.len());
    for (n, m) in native.iter().zip(mixed) {
        let (tn, tm) = tag_pair(n, m)?;
        out_native.push(tn);
        out_mixed.push(tm);
    }
    Ok((out_native, out_mixed))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PosWarning {
    pub position: usize,
    pub tag: String,
}

impl std::fmt::Display for PosWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "token {}: tag {:?} not in tagset", self.position, self.tag)
    }
}

/// Flags POS tags outside `tagset`. `UNK` is always accepted and untagged
/// tokens are ignored.
pub fn validate_pos(sentence: &Sentence, tagset: &HashSet<String>) -> Vec<PosWarning> {
    sentence
        .tokens
        .iter()
        .enumerate()
        .filter_map(|(position, t)| {
            let tag = t.pos.as_deref()?;
            (tag != UNK_TAG && !tagset.contains(tag)).then(|| PosWarning {
                position,
                tag: tag.to_owned(),
            })
        })
        .collect()
}
