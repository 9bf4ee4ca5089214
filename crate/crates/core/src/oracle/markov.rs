use nalgebra::{DMatrix, DVector};
use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::Sentence;
use crate::error::{Error, Result};

/// First-order Markov chain over words. Every sentence starts afresh from
/// `initial`; sentence lengths are uniform in `min_len..=max_len`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovSource {
    pub words: Vec<String>,
    pub transition: Vec<Vec<f64>>,
    pub initial: Vec<f64>,
    pub min_len: usize,
    pub max_len: usize,
}

fn check_distribution(what: &str, p: &[f64], n: usize) -> Result<()> {
    let sum: f64 = p.iter().sum();
    if p.len() != n || p.iter().any(|&x| x.is_nan() || x < 0.0) || (sum - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "{what} is not a distribution over {n} states (sum {sum})"
        )));
    }
    Ok(())
}

impl MarkovSource {
    pub fn new(
        words: Vec<String>,
        transition: Vec<Vec<f64>>,
        initial: Vec<f64>,
        min_len: usize,
        max_len: usize,
    ) -> Result<Self> {
        let n = words.len();
        if n == 0 || transition.len() != n {
            return Err(Error::InvalidArgument("transition matrix must be n x n, n >= 1".into()));
        }
        for (i, row) in transition.iter().enumerate() {
            check_distribution(&format!("transition row {i}"), row, n)?;
        }
        check_distribution("initial", &initial, n)?;
        if min_len == 0 || min_len > max_len {
            return Err(Error::InvalidArgument(format!(
                "bad sentence length range {min_len}..={max_len}"
            )));
        }
        Ok(MarkovSource {
            words,
            transition,
            initial,
            min_len,
            max_len,
        })
    }

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("w{i}")).collect()
    }

    /// Every state is equally likely after every state.
    pub fn uniform(n: usize, sentence_len: usize) -> Result<Self> {
        let row = vec![1.0 / n as f64; n];
        Self::new(Self::names(n), vec![row.clone(); n], row, sentence_len, sentence_len)
    }

    /// `w0 -> w1 -> ... -> w{n-1} -> w0` with certainty, starting at `w0`.
    pub fn cycle(n: usize, sentence_len: usize) -> Result<Self> {
        let transition = (0..n)
            .map(|i| (0..n).map(|j| if j == (i + 1) % n { 1.0 } else { 0.0 }).collect())
            .collect();
        let mut initial = vec![0.0; n];
        initial[0] = 1.0;
        Self::new(Self::names(n), transition, initial, sentence_len, sentence_len)
    }

    /// State `i` moves to `(fanout * i + k) mod n`, `k < fanout`, each with
    /// probability `1/fanout`. For `n = fanout^2` the chain is doubly
    /// stochastic and mixes in two steps; the entropy rate is
    /// `log2(fanout)` bits. Sentences start from the stationary (uniform)
    /// distribution.
    pub fn shift_chain(fanout: usize, sentence_len: usize) -> Result<Self> {
        let n = fanout * fanout;
        let transition = (0..n)
            .map(|i| {
                let mut row = vec![0.0; n];
                for k in 0..fanout {
                    row[(fanout * i + k) % n] += 1.0 / fanout as f64;
                }
                row
            })
            .collect();
        Self::new(
            Self::names(n),
            transition,
            vec![1.0 / n as f64; n],
            sentence_len,
            sentence_len,
        )
    }

    pub fn n_states(&self) -> usize {
        self.words.len()
    }

    /// Solves `pi P = pi`, `sum pi = 1`.
    pub fn stationary(&self) -> Result<Vec<f64>> {
        let n = self.n_states();
        let mut a = DMatrix::from_fn(n, n, |i, j| self.transition[j][i] - if i == j { 1.0 } else { 0.0 });
        for j in 0..n {
            a[(n - 1, j)] = 1.0;
        }
        let mut b = DVector::zeros(n);
        b[n - 1] = 1.0;
        let pi = a
            .lu()
            .solve(&b)
            .ok_or_else(|| Error::InvalidArgument("chain has no unique stationary distribution".into()))?;
        Ok(pi.iter().copied().collect())
    }

    /// Entropy rate `sum_i pi_i sum_j -p_ij log2 p_ij` in bits per token.
    pub fn entropy_bits(&self) -> Result<f64> {
        let pi = self.stationary()?;
        Ok(pi
            .iter()
            .zip(&self.transition)
            .map(|(&p_i, row)| p_i * row.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum::<f64>())
            .sum())
    }

    /// Perplexity of the source itself, `2^H`.
    pub fn perplexity(&self) -> Result<f64> {
        Ok(self.entropy_bits()?.exp2())
    }

    /// State sequences of about `n_tokens` tokens in total, one list per
    /// sentence.
    pub(crate) fn sample_states(&self, n_tokens: usize, rng: &mut impl Rng) -> Vec<Vec<usize>> {
        let initial = WeightedIndex::new(&self.initial).expect("validated distribution");
        let rows: Vec<WeightedIndex<f64>> = self
            .transition
            .iter()
            .map(|r| WeightedIndex::new(r).expect("validated distribution"))
            .collect();
        let mut out = Vec::new();
        let mut produced = 0;
        while produced < n_tokens {
            let len = rng.gen_range(self.min_len..=self.max_len).min(n_tokens - produced);
            let mut s = Vec::with_capacity(len);
            let mut state = initial.sample(rng);
            s.push(state);
            while s.len() < len {
                state = rows[state].sample(rng);
                s.push(state);
            }
            produced += len;
            out.push(s);
        }
        out
    }

    /// Exactly `n_tokens` words; the last sentence may be short.
    pub fn gen_corpus(&self, n_tokens: usize, seed: u64) -> Vec<Sentence> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_states(n_tokens, &mut rng)
            .into_iter()
            .map(|s| Sentence::from_words(&s.iter().map(|&i| self.words[i].as_str()).collect::<Vec<_>>()))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_entropies() {
        assert!((MarkovSource::uniform(4, 10).unwrap().entropy_bits().unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(MarkovSource::cycle(5, 10).unwrap().entropy_bits().unwrap(), 0.0);
        let s = MarkovSource::shift_chain(4, 100).unwrap();
        assert_eq!(s.n_states(), 16);
        assert!((s.entropy_bits().unwrap() - 2.0).abs() < 1e-12);
        assert!((s.perplexity().unwrap() - 4.0).abs() < 1e-12);
        for p in s.stationary().unwrap() {
            assert!((p - 1.0 / 16.0).abs() < 1e-12);
        }
    }

    #[test]
    fn stationary_of_asymmetric_chain() {
        // two states: pi = (b, a) / (a + b) for P = [[1-a, a], [b, 1-b]]
        let (a, b) = (0.3, 0.1);
        let s = MarkovSource::new(
            vec!["x".into(), "y".into()],
            vec![vec![1.0 - a, a], vec![b, 1.0 - b]],
            vec![0.5, 0.5],
            1,
            3,
        )
        .unwrap();
        let pi = s.stationary().unwrap();
        assert!((pi[0] - b / (a + b)).abs() < 1e-12);
        let h = |p: f64| -p * p.log2() - (1.0 - p) * (1.0 - p).log2();
        let expected = pi[0] * h(a) + pi[1] * h(b);
        assert!((s.entropy_bits().unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_rows() {
        let bad = MarkovSource::new(vec!["a".into()], vec![vec![0.9]], vec![1.0], 1, 1);
        assert!(bad.is_err());
        assert!(MarkovSource::new(vec!["a".into()], vec![vec![1.0]], vec![1.0], 2, 1).is_err());
    }

    #[test]
    fn cycle_is_periodic() {
        let c = MarkovSource::cycle(3, 7).unwrap().gen_corpus(21, 1);
        assert_eq!(c.len(), 3);
        for s in &c {
            let words: Vec<&str> = s.surfaces().collect();
            assert_eq!(words, ["w0", "w1", "w2", "w0", "w1", "w2", "w0"]);
        }
    }

    #[test]
    fn reproducible_and_sized() {
        let s = MarkovSource::shift_chain(4, 50).unwrap();
        let a = s.gen_corpus(1234, 9);
        assert_eq!(a, s.gen_corpus(1234, 9));
        assert_ne!(a, s.gen_corpus(1234, 10));
        assert_eq!(a.iter().map(Sentence::len).sum::<usize>(), 1234);
    }

    #[test]
    fn empirical_bigrams_match_transitions() {
        let s = MarkovSource::shift_chain(4, 1000).unwrap();
        let corpus = s.gen_corpus(100_000, 7);
        let n = s.n_states();
        let mut counts = vec![vec![0u64; n]; n];
        let id = |w: &str| w[1..].parse::<usize>().unwrap();
        for sent in &corpus {
            let ids: Vec<usize> = sent.surfaces().map(id).collect();
            for pair in ids.windows(2) {
                counts[pair[0]][pair[1]] += 1;
            }
        }
        for (i, row) in counts.iter().enumerate() {
            let total: u64 = row.iter().sum();
            for (j, &c) in row.iter().enumerate() {
                let p = c as f64 / total as f64;
                assert!((p - s.transition[i][j]).abs() < 0.02, "p[{i}][{j}] = {p}");
            }
        }
    }
}
