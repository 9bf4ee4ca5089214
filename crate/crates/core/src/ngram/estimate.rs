use std::collections::{BTreeMap, HashMap};

use super::{NgramCounts, NgramEntry, NgramModel, Smoothing};
use crate::corpus::Vocabulary;

type Level = BTreeMap<Vec<u32>, BTreeMap<u32, u64>>;

#[derive(Debug, Clone, Copy)]
enum Method {
    Mle(f64),
    WittenBell,
    /// Discounts for counts 1, 2 and 3+.
    KneserNey([f64; 3]),
}

/// Estimates a smoothed model from counts.
///
/// Kneser-Ney uses raw counts at the highest order and continuation counts
/// (number of distinct left neighbours, with sentence start counting as one
/// neighbour) below it. When an order's count-of-counts cannot support the
/// discount estimates, that order falls back to Witten-Bell and a warning is
/// recorded on the model.
pub fn estimate(counts: &NgramCounts, vocab: &Vocabulary, smoothing: Smoothing) -> NgramModel {
    let order = counts.order;
    let mut warnings = Vec::new();
    let mut model = NgramModel::from_parts(
        order,
        vocab.clone(),
        Some(smoothing),
        vec![HashMap::new(); order],
        Vec::new(),
    );
    let uniform = 1.0 / vocab.len() as f64;

    for n in 1..=order {
        let continuation;
        let level: &Level = if smoothing == Smoothing::KneserNey && n < order {
            continuation = continuation_counts(counts, n);
            &continuation
        } else {
            &counts.table[n - 1]
        };
        let method = match smoothing {
            Smoothing::Mle { floor } => Method::Mle(floor),
            Smoothing::WittenBell => Method::WittenBell,
            Smoothing::KneserNey => match kn_discounts(level) {
                Ok(d) => Method::KneserNey(d),
                Err(why) => {
                    let msg = format!("order {n}: {why}; using Witten-Bell for this order");
                    log::warn!("{msg}");
                    warnings.push(msg);
                    Method::WittenBell
                }
            },
        };

        let mut entries: HashMap<Vec<u32>, NgramEntry> = HashMap::new();
        let mut backoffs: Vec<(Vec<u32>, f64)> = Vec::new();
        for (context, successors) in level {
            let total: u64 = successors.values().sum();
            let (gamma, explicit) = context_parameters(method, successors, total);
            let lower = |w: u32| -> f64 {
                if n == 1 {
                    uniform
                } else {
                    10f64.powf(model.log10_prob(&context[1..], w))
                }
            };
            for (&w, &c) in successors {
                let mut key = context.clone();
                key.push(w);
                let p = explicit(c) + gamma * lower(w);
                entries.insert(
                    key,
                    NgramEntry {
                        log10_prob: p.log10(),
                        log10_backoff: None,
                    },
                );
            }
            if n == 1 {
                for w in 0..vocab.len() as u32 {
                    entries.entry(vec![w]).or_insert(NgramEntry {
                        log10_prob: (gamma * uniform).log10(),
                        log10_backoff: None,
                    });
                }
            } else {
                backoffs.push((context.clone(), gamma.log10()));
            }
        }
        if n == 1 && level.is_empty() {
            for w in 0..vocab.len() as u32 {
                entries.insert(
                    vec![w],
                    NgramEntry {
                        log10_prob: uniform.log10(),
                        log10_backoff: None,
                    },
                );
            }
        }
        model.grams[n - 1] = entries;
        for (context, bow) in backoffs {
            let holder = model.grams[n - 2]
                .get_mut(&context)
                .expect("every context with successors is itself a seen n-gram");
            holder.log10_backoff = Some(bow);
        }
    }
    model.warnings = warnings;
    model
}

/// Returns `(gamma, explicit)` for one context: the mass handed to the lower
/// order and the discounted own-count term as a function of the count.
fn context_parameters(method: Method, successors: &BTreeMap<u32, u64>, total: u64) -> (f64, Box<dyn Fn(u64) -> f64>) {
    let total_f = total as f64;
    match method {
        Method::Mle(floor) => (floor, Box::new(move |c| (1.0 - floor) * c as f64 / total_f)),
        Method::WittenBell => {
            let types = successors.len() as f64;
            let denom = total_f + types;
            (types / denom, Box::new(move |c| c as f64 / denom))
        }
        Method::KneserNey(d) => {
            let mut buckets = [0u64; 3];
            for &c in successors.values() {
                buckets[(c.min(3) - 1) as usize] += 1;
            }
            let reserved: f64 = (0..3).map(|k| d[k] * buckets[k] as f64).sum();
            (
                reserved / total_f,
                Box::new(move |c| (c as f64 - d[(c.min(3) - 1) as usize]) / total_f),
            )
        }
    }
}

/// Modified Kneser-Ney discounts from the count-of-counts n1..n4:
/// `Y = n1/(n1 + 2 n2)`, `D_k = k - (k+1) Y n_{k+1} / n_k`.
fn kn_discounts(level: &Level) -> Result<[f64; 3], String> {
    let mut n = [0u64; 5];
    for &c in level.values().flat_map(BTreeMap::values) {
        if (1..=4).contains(&c) {
            n[c as usize] += 1;
        }
    }
    if let Some(k) = (1..=4).find(|&k| n[k] == 0) {
        return Err(format!("no n-grams with adjusted count {k}"));
    }
    let nf = n.map(|x| x as f64);
    let y = nf[1] / (nf[1] + 2.0 * nf[2]);
    let mut d = [0.0; 3];
    for k in 1..=3 {
        let kf = k as f64;
        d[k - 1] = kf - (kf + 1.0) * y * nf[k + 1] / nf[k];
        if !(d[k - 1] > 0.0 && d[k - 1] <= kf) {
            return Err(format!("discount D{k} = {} out of range", d[k - 1]));
        }
    }
    Ok(d)
}

/// Adjusted counts for order `n < max order`: for each n-gram, the number of
/// distinct words seen directly before it, plus one if it opens a sentence.
fn continuation_counts(counts: &NgramCounts, n: usize) -> Level {
    let mut level: Level = BTreeMap::new();
    // (n+1)-grams are stored under contexts of length n
    for (context, successors) in &counts.table[n] {
        for &w in successors.keys() {
            let mut suffix = context[1..].to_vec();
            suffix.push(w);
            let (ctx, last) = suffix.split_at(n - 1);
            *level.entry(ctx.to_vec()).or_default().entry(last[0]).or_default() += 1;
        }
    }
    for gram in counts.initial.keys().filter(|g| g.len() == n) {
        let (ctx, last) = gram.split_at(n - 1);
        *level.entry(ctx.to_vec()).or_default().entry(last[0]).or_default() += 1;
    }
    level
}
