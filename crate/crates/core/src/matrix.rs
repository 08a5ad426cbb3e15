//! Dense matrix carriers: bit matrices for 0/1 relation matrices and
//! integer matrices for everything that needs signed entries.

use std::fmt;

/// Dense 0/1 matrix, one `u64` word per 64 columns, rows word-aligned.
#[derive(Clone, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    words: Vec<u64>,
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitMatrix({}x{})", self.rows, self.cols)
    }
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = cols.div_ceil(64);
        BitMatrix {
            rows,
            cols,
            stride,
            words: vec![0; rows * stride],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// All-ones matrix `J`.
    pub fn ones(rows: usize, cols: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.set(r, c, true);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Words per row.
    pub fn stride(&self) -> usize {
        self.stride
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        debug_assert!(r < self.rows && c < self.cols);
        (self.words[r * self.stride + c / 64] >> (c % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        debug_assert!(r < self.rows && c < self.cols);
        let w = &mut self.words[r * self.stride + c / 64];
        if value {
            *w |= 1 << (c % 64);
        } else {
            *w &= !(1 << (c % 64));
        }
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[u64] {
        &self.words[r * self.stride..(r + 1) * self.stride]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.words[r * self.stride..(r + 1) * self.stride]
    }

    /// The whole row-major word buffer.
    pub fn words_mut(&mut self) -> &mut [u64] {
        &mut self.words
    }

    pub fn row_count(&self, r: usize) -> usize {
        self.row(r).iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Column indices of the ones in row `r`, increasing.
    pub fn row_ones(&self, r: usize) -> impl Iterator<Item = usize> + '_ {
        ones_in(self.row(r))
    }

    /// Common row sum if every row has the same number of ones.
    pub fn constant_row_sum(&self) -> Option<usize> {
        let first = (self.rows > 0).then(|| self.row_count(0))?;
        (1..self.rows).all(|r| self.row_count(r) == first).then_some(first)
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && (0..self.rows).all(|r| self.row_ones(r).all(|c| self.get(c, r)))
    }

    pub fn has_zero_diagonal(&self) -> bool {
        (0..self.rows.min(self.cols)).all(|i| !self.get(i, i))
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Bitwise union; panics on shape mismatch.
    pub fn or(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.words.iter_mut().zip(&other.words) {
            *a |= *b;
        }
        out
    }

    pub fn is_disjoint_from(&self, other: &BitMatrix) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0)
    }

    /// Submatrix keeping the given rows and columns, in the given order.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> BitMatrix {
        let mut out = BitMatrix::zeros(rows.len(), cols.len());
        for (i, &r) in rows.iter().enumerate() {
            for (j, &c) in cols.iter().enumerate() {
                if self.get(r, c) {
                    out.set(i, j, true);
                }
            }
        }
        out
    }

    pub fn to_int(&self) -> IntMatrix {
        let mut m = IntMatrix::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            for c in self.row_ones(r) {
                m.set(r, c, 1);
            }
        }
        m
    }
}

/// Set-bit positions of a word slice, increasing.
pub fn ones_in(words: &[u64]) -> impl Iterator<Item = usize> + '_ {
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

/// Dense matrix of machine integers. Used for `mat` files and for the
/// integer combinations of relation matrices; exact elimination converts
/// to arbitrary precision internally.
#[derive(Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "IntMatrix({}x{})", self.rows, self.cols)?;
        if self.rows * self.cols <= 400 {
            for r in 0..self.rows {
                writeln!(f, "  {:?}", self.row(r))?;
            }
        }
        Ok(())
    }
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    /// Builds from row vectors; `None` if the rows are ragged.
    pub fn from_rows(rows: Vec<Vec<i64>>) -> Option<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return None;
        }
        let n = rows.len();
        Some(IntMatrix {
            rows: n,
            cols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> i64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        IntMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> i64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: i64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[i64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn entries(&self) -> &[i64] {
        &self.data
    }

    pub fn transpose(&self) -> IntMatrix {
        IntMatrix::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    /// Converts a matrix whose entries are all 0 or 1.
    pub fn to_bits(&self) -> Option<BitMatrix> {
        let mut m = BitMatrix::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                match self.get(r, c) {
                    0 => {}
                    1 => m.set(r, c, true),
                    _ => return None,
                }
            }
        }
        Some(m)
    }

    /// Applies row and column permutations: `out[i][j] = self[rp[i]][cp[j]]`.
    pub fn permuted(&self, row_perm: &[usize], col_perm: &[usize]) -> IntMatrix {
        IntMatrix::from_fn(self.rows, self.cols, |r, c| self.get(row_perm[r], col_perm[c]))
    }

    /// Product with overflow checking.
    pub fn checked_mul(&self, other: &IntMatrix) -> Option<IntMatrix> {
        if self.cols != other.rows {
            return None;
        }
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a == 0 {
                    continue;
                }
                for c in 0..other.cols {
                    let v = a.checked_mul(other.get(k, c))?;
                    let idx = r * other.cols + c;
                    out.data[idx] = out.data[idx].checked_add(v)?;
                }
            }
        }
        Some(out)
    }
}
