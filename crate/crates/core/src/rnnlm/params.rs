use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// `None` if `data.len() != rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Option<Self> {
        (data.len() == rows * cols).then_some(Matrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
}

pub const BLOCK_NAMES: [&str; 6] = ["W_word", "W_pos", "W_cs", "R", "U_c", "U_w"];

/// Rows of the CS input block.
pub const CS_YES: u32 = 0;
pub const CS_NO: u32 = 1;
pub const CS_ABSENT: u32 = 2;

/// All weights of the factored network. There are no bias vectors; the
/// `absent` rows of the factor blocks play that role for untagged input.
#[derive(Debug, Clone, PartialEq)]
pub struct RnnParams {
    /// `|V| x H`, row per previous word.
    pub word_in: Matrix,
    /// `(T + 1) x H`; the last row is the absent tag.
    pub pos_in: Matrix,
    /// `3 x H`: Yes, No, absent.
    pub cs_in: Matrix,
    /// `H x H`; `(R s)_i = sum_j R[i][j] s_j`.
    pub recurrent: Matrix,
    /// `H x C`.
    pub class_out: Matrix,
    /// `H x |V|`.
    pub word_out: Matrix,
}

impl RnnParams {
    pub fn zeros(vocab_size: usize, n_pos_tags: usize, hidden: usize, n_classes: usize) -> Self {
        RnnParams {
            word_in: Matrix::zeros(vocab_size, hidden),
            pos_in: Matrix::zeros(n_pos_tags + 1, hidden),
            cs_in: Matrix::zeros(3, hidden),
            recurrent: Matrix::zeros(hidden, hidden),
            class_out: Matrix::zeros(hidden, n_classes),
            word_out: Matrix::zeros(hidden, vocab_size),
        }
    }

    /// Uniform(-0.1, 0.1). Each block draws from its own stream of the
    /// seeded generator, so a block's values depend only on its shape.
    pub fn init(vocab_size: usize, n_pos_tags: usize, hidden: usize, n_classes: usize, seed: u64) -> Self {
        let mut p = Self::zeros(vocab_size, n_pos_tags, hidden, n_classes);
        for (stream, block) in p.blocks_mut().into_iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream as u64);
            for x in block.data_mut() {
                *x = rng.gen_range(-0.1..0.1);
            }
        }
        p
    }

    /// In [`BLOCK_NAMES`] order.
    pub fn blocks(&self) -> [&Matrix; 6] {
        [
            &self.word_in,
            &self.pos_in,
            &self.cs_in,
            &self.recurrent,
            &self.class_out,
            &self.word_out,
        ]
    }

    pub fn blocks_mut(&mut self) -> [&mut Matrix; 6] {
        [
            &mut self.word_in,
            &mut self.pos_in,
            &mut self.cs_in,
            &mut self.recurrent,
            &mut self.class_out,
            &mut self.word_out,
        ]
    }

    pub fn hidden_size(&self) -> usize {
        self.recurrent.rows
    }

    pub fn n_classes(&self) -> usize {
        self.class_out.cols
    }

    pub fn vocab_size(&self) -> usize {
        self.word_in.rows
    }

    /// Number of POS tags, not counting the absent row.
    pub fn n_pos_tags(&self) -> usize {
        self.pos_in.rows - 1
    }

    pub fn is_finite(&self) -> bool {
        self.blocks().iter().all(|b| b.data.iter().all(|x| x.is_finite()))
    }

    pub fn n_weights(&self) -> usize {
        self.blocks().iter().map(|b| b.data.len()).sum()
    }

    /// All weights, blocks concatenated in [`BLOCK_NAMES`] order.
    pub fn to_flat(&self) -> Vec<f64> {
        self.blocks().iter().flat_map(|b| b.data.iter().copied()).collect()
    }

    /// Inverse of [`to_flat`](Self::to_flat).
    ///
    /// # Panics
    /// If `flat` does not have [`n_weights`](Self::n_weights) entries.
    pub fn set_flat(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.n_weights(), "flat parameter length");
        let mut rest = flat;
        for b in self.blocks_mut() {
            let (head, tail) = rest.split_at(b.data.len());
            b.data.copy_from_slice(head);
            rest = tail;
        }
    }
}
