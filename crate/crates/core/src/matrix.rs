use std::fmt;

use crate::error::{invalid, Result};

/// Binary placement matrix `x_{m,f}`: row `m` is the cache of F-AP `m`.
///
/// Rows are stored as packed 64-bit words so that Hamming distances, cluster
/// unions and row counts are word operations.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CacheMatrix {
    rows: usize,
    cols: usize,
    words: usize,
    bits: Vec<u64>,
}

impl CacheMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words = cols.div_ceil(64);
        Self {
            rows,
            cols,
            words,
            bits: vec![0; rows * words],
        }
    }

    /// Builds a matrix from 0/1 rows.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut x = Self::zeros(rows.len(), cols);
        for (m, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(invalid("ragged cache matrix rows"));
            }
            for (f, &b) in row.iter().enumerate() {
                match b {
                    0 => {}
                    1 => x.set(m, f, true),
                    _ => return Err(invalid(format!("entry ({m}, {f}) is {b}, not binary"))),
                }
            }
        }
        Ok(x)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, m: usize, f: usize) -> bool {
        debug_assert!(m < self.rows && f < self.cols);
        self.bits[m * self.words + f / 64] >> (f % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, m: usize, f: usize, value: bool) {
        debug_assert!(m < self.rows && f < self.cols);
        let w = &mut self.bits[m * self.words + f / 64];
        if value {
            *w |= 1 << (f % 64);
        } else {
            *w &= !(1 << (f % 64));
        }
    }

    /// Packed words of row `m`; bits past `cols` are always zero.
    pub fn row_words(&self, m: usize) -> &[u64] {
        &self.bits[m * self.words..(m + 1) * self.words]
    }

    pub(crate) fn row_words_mut(&mut self, m: usize) -> &mut [u64] {
        &mut self.bits[m * self.words..(m + 1) * self.words]
    }

    pub fn words_per_row(&self) -> usize {
        self.words
    }

    /// Number of contents cached by F-AP `m`.
    pub fn row_count(&self, m: usize) -> usize {
        self.row_words(m).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Indices of the contents cached by F-AP `m`, ascending.
    pub fn row_iter(&self, m: usize) -> impl Iterator<Item = usize> + '_ {
        set_bits(self.row_words(m))
    }

    /// Manhattan (Hamming) distance `||X - Y||_1`.
    pub fn hamming(&self, other: &Self) -> Result<usize> {
        if self.shape() != other.shape() {
            return Err(invalid("Hamming distance between matrices of different shapes"));
        }
        Ok(self
            .bits
            .iter()
            .zip(&other.bits)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum())
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        (0..self.rows)
            .map(|m| (0..self.cols).map(|f| self.get(m, f) as u8).collect())
            .collect()
    }
}

/// Iterates the indices of set bits in packed words.
pub(crate) fn set_bits(words: &[u64]) -> impl Iterator<Item = usize> + '_ {
    words.iter().enumerate().flat_map(|(i, &w)| {
        let mut w = w;
        std::iter::from_fn(move || {
            if w == 0 {
                return None;
            }
            let b = w.trailing_zeros() as usize;
            w &= w - 1;
            Some(i * 64 + b)
        })
    })
}

impl fmt::Debug for CacheMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CacheMatrix {}x{} [", self.rows, self.cols)?;
        for m in 0..self.rows {
            let row: String = (0..self.cols).map(|c| if self.get(m, c) { '1' } else { '0' }).collect();
            writeln!(f, "  {row}")?;
        }
        write!(f, "]")
    }
}
