//! Exact rank: over GF(p) by dense packed Gaussian elimination, and over
//! the rationals by fraction-free (Bareiss) elimination on big integers.
//!
//! Storage for GF(p):
//! * `p = 2`: 64 entries per `u64`, row operations are word XORs;
//! * odd `p < 128`: one residue per byte lane; the `p - 1` multiples of the
//!   normalized pivot row are tabulated once per pivot so each row update is
//!   a lane-wise add followed by a single conditional subtract;
//! * larger `p`: `u32` lanes with a 64-bit multiply-reduce.
//!
//! The pivot is the first row (in row order) with a nonzero entry in the
//! leftmost column that still has one.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::arith::is_prime;
use crate::matrix::{BitMatrix, IntMatrix};

pub const DEFAULT_MAX_DIM: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RankError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("modulus {0} does not fit a 32-bit lane")]
    ModulusTooLarge(u64),
    #[error("matrix {rows}x{cols} exceeds the dimension limit {limit}")]
    TooLarge { rows: usize, cols: usize, limit: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankModulus {
    Prime(u64),
    Rational,
}

impl Serialize for RankModulus {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            RankModulus::Prime(p) => s.serialize_u64(*p),
            RankModulus::Rational => s.serialize_str("rational"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RankReport {
    pub rank: usize,
    pub modulus: RankModulus,
    #[serde(serialize_with = "secs")]
    pub elapsed: Duration,
}

fn secs<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64())
}

enum Lanes {
    Bits(BitMatrix),
    Bytes(Vec<u8>),
    Words(Vec<u32>),
}

/// Residues of an integer matrix modulo a prime, in packed row-major form.
pub struct PackedMatrix {
    rows: usize,
    cols: usize,
    p: u64,
    lanes: Lanes,
}

impl PackedMatrix {
    pub fn from_int(m: &IntMatrix, p: u64) -> Result<Self, RankError> {
        if !is_prime(p) {
            return Err(RankError::NotPrime(p));
        }
        let (rows, cols) = (m.rows(), m.cols());
        let residue = |v: i64| v.rem_euclid(p as i64) as u64;
        let lanes = if p == 2 {
            let mut b = BitMatrix::zeros(rows, cols);
            for r in 0..rows {
                for (c, &v) in m.row(r).iter().enumerate() {
                    if residue(v) == 1 {
                        b.set(r, c, true);
                    }
                }
            }
            Lanes::Bits(b)
        } else if p < 128 {
            Lanes::Bytes(m.entries().iter().map(|&v| residue(v) as u8).collect())
        } else if p < (1 << 32) {
            Lanes::Words(m.entries().iter().map(|&v| residue(v) as u32).collect())
        } else {
            return Err(RankError::ModulusTooLarge(p));
        };
        Ok(PackedMatrix { rows, cols, p, lanes })
    }

    pub fn from_bits(m: &BitMatrix, p: u64) -> Result<Self, RankError> {
        if !is_prime(p) {
            return Err(RankError::NotPrime(p));
        }
        let (rows, cols) = (m.rows(), m.cols());
        let lanes = if p == 2 {
            Lanes::Bits(m.clone())
        } else {
            let mut bytes = vec![0u8; rows * cols];
            for r in 0..rows {
                for c in m.row_ones(r) {
                    bytes[r * cols + c] = 1;
                }
            }
            if p < 128 {
                Lanes::Bytes(bytes)
            } else {
                Lanes::Words(bytes.into_iter().map(u32::from).collect())
            }
        };
        Ok(PackedMatrix { rows, cols, p, lanes })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    /// Residue at `(r, c)`, in `[0, p)`.
    pub fn get(&self, r: usize, c: usize) -> u64 {
        match &self.lanes {
            Lanes::Bits(b) => b.get(r, c) as u64,
            Lanes::Bytes(v) => v[r * self.cols + c] as u64,
            Lanes::Words(v) => v[r * self.cols + c] as u64,
        }
    }

    /// Rank over GF(p); consumes the matrix (elimination is in place).
    pub fn into_rank(self) -> usize {
        let (rows, cols, p) = (self.rows, self.cols, self.p);
        match self.lanes {
            Lanes::Bits(b) => rank_gf2(b),
            Lanes::Bytes(v) => rank_bytes(v, rows, cols, p as u8),
            Lanes::Words(v) => rank_words(v, rows, cols, p as u32),
        }
    }
}

fn rank_gf2(mut m: BitMatrix) -> usize {
    let (rows, cols, stride) = (m.rows(), m.cols(), m.stride());
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let (w, bit) = (col / 64, 1u64 << (col % 64));
        let Some(piv) = (rank..rows).find(|&r| m.row(r)[w] & bit != 0) else {
            continue;
        };
        if piv != rank {
            for j in 0..stride {
                let (a, b) = (m.row(rank)[j], m.row(piv)[j]);
                m.row_mut(rank)[j] = b;
                m.row_mut(piv)[j] = a;
            }
        }
        let pivot: Vec<u64> = m.row(rank)[w..].to_vec();
        let below = &mut m.words_mut()[(rank + 1) * stride..];
        below.par_chunks_mut(stride).for_each(|row| {
            if row[w] & bit != 0 {
                for (x, y) in row[w..].iter_mut().zip(&pivot) {
                    *x ^= *y;
                }
            }
        });
        rank += 1;
    }
    rank
}

fn inv_mod(a: u64, p: u64) -> u64 {
    // Fermat; p is prime and a != 0.
    let mut result = 1u64;
    let mut base = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    result
}

fn rank_bytes(mut v: Vec<u8>, rows: usize, cols: usize, p: u8) -> usize {
    let mut rank = 0;
    let mut multiples: Vec<Vec<u8>> = Vec::new();
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(piv) = (rank..rows).find(|&r| v[r * cols + col] != 0) else {
            continue;
        };
        if piv != rank {
            let (a, b) = v.split_at_mut(piv * cols);
            a[rank * cols..(rank + 1) * cols].swap_with_slice(&mut b[..cols]);
        }
        let inv = inv_mod(v[rank * cols + col] as u64, p as u64) as u16;
        let pivot: Vec<u8> = v[rank * cols + col..(rank + 1) * cols]
            .iter()
            .map(|&x| ((x as u16 * inv) % p as u16) as u8)
            .collect();
        // multiples[f] = f * pivot mod p
        multiples.clear();
        multiples.extend((0..p as u16).map(|f| pivot.iter().map(|&x| ((x as u16 * f) % p as u16) as u8).collect()));
        let below = &mut v[(rank + 1) * cols..];
        below.par_chunks_mut(cols).for_each(|row| {
            let lead = row[col];
            if lead == 0 {
                return;
            }
            let add = &multiples[(p - lead) as usize];
            for (x, &y) in row[col..].iter_mut().zip(add) {
                let s = *x + y;
                *x = s.min(s.wrapping_sub(p));
            }
        });
        rank += 1;
    }
    rank
}

fn rank_words(mut v: Vec<u32>, rows: usize, cols: usize, p: u32) -> usize {
    let p64 = p as u64;
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(piv) = (rank..rows).find(|&r| v[r * cols + col] != 0) else {
            continue;
        };
        if piv != rank {
            let (a, b) = v.split_at_mut(piv * cols);
            a[rank * cols..(rank + 1) * cols].swap_with_slice(&mut b[..cols]);
        }
        let inv = inv_mod(v[rank * cols + col] as u64, p64);
        let pivot: Vec<u32> = v[rank * cols + col..(rank + 1) * cols]
            .iter()
            .map(|&x| (x as u64 * inv % p64) as u32)
            .collect();
        let below = &mut v[(rank + 1) * cols..];
        below.par_chunks_mut(cols).for_each(|row| {
            let lead = row[col] as u64;
            if lead == 0 {
                return;
            }
            let f = p64 - lead;
            for (x, &y) in row[col..].iter_mut().zip(&pivot) {
                *x = ((*x as u64 + f * y as u64) % p64) as u32;
            }
        });
        rank += 1;
    }
    rank
}

/// Rank computations with a configurable dimension cap.
#[derive(Debug, Clone, Copy)]
pub struct Ranker {
    pub max_dim: usize,
}

impl Default for Ranker {
    fn default() -> Self {
        Ranker {
            max_dim: DEFAULT_MAX_DIM,
        }
    }
}

impl Ranker {
    fn check(&self, rows: usize, cols: usize) -> Result<(), RankError> {
        if rows > self.max_dim || cols > self.max_dim {
            return Err(RankError::TooLarge {
                rows,
                cols,
                limit: self.max_dim,
            });
        }
        Ok(())
    }

    pub fn rank_mod_p(&self, m: &IntMatrix, p: u64) -> Result<RankReport, RankError> {
        self.check(m.rows(), m.cols())?;
        let start = Instant::now();
        let rank = PackedMatrix::from_int(m, p)?.into_rank();
        Ok(RankReport {
            rank,
            modulus: RankModulus::Prime(p),
            elapsed: start.elapsed(),
        })
    }

    pub fn rank_mod_p_bits(&self, m: &BitMatrix, p: u64) -> Result<RankReport, RankError> {
        self.check(m.rows(), m.cols())?;
        let start = Instant::now();
        let rank = PackedMatrix::from_bits(m, p)?.into_rank();
        Ok(RankReport {
            rank,
            modulus: RankModulus::Prime(p),
            elapsed: start.elapsed(),
        })
    }

    pub fn rank_rational(&self, m: &IntMatrix) -> Result<RankReport, RankError> {
        self.check(m.rows(), m.cols())?;
        let start = Instant::now();
        let rows: Vec<Vec<BigInt>> = (0..m.rows())
            .map(|r| m.row(r).iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        Ok(RankReport {
            rank: bareiss_rank(rows, m.cols()),
            modulus: RankModulus::Rational,
            elapsed: start.elapsed(),
        })
    }

    /// Rank of a rational matrix given as rows; each row is cleared of
    /// denominators first, which does not change the rank.
    pub fn rank_rational_q(&self, rows: &[Vec<BigRational>]) -> Result<RankReport, RankError> {
        let cols = rows.first().map_or(0, Vec::len);
        self.check(rows.len(), cols)?;
        let start = Instant::now();
        let int_rows = rows
            .iter()
            .map(|row| {
                let lcm = row.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
                row.iter()
                    .map(|x| (x * BigRational::from_integer(lcm.clone())).to_integer())
                    .collect()
            })
            .collect();
        Ok(RankReport {
            rank: bareiss_rank(int_rows, cols),
            modulus: RankModulus::Rational,
            elapsed: start.elapsed(),
        })
    }
}

pub fn rank_mod_p(m: &IntMatrix, p: u64) -> Result<RankReport, RankError> {
    Ranker::default().rank_mod_p(m, p)
}

pub fn rank_mod_p_bits(m: &BitMatrix, p: u64) -> Result<RankReport, RankError> {
    Ranker::default().rank_mod_p_bits(m, p)
}

pub fn rank_rational(m: &IntMatrix) -> Result<RankReport, RankError> {
    Ranker::default().rank_rational(m)
}

pub fn rank_rational_q(rows: &[Vec<BigRational>]) -> Result<RankReport, RankError> {
    Ranker::default().rank_rational_q(rows)
}

/// Fraction-free elimination; every division is exact.
fn bareiss_rank(mut m: Vec<Vec<BigInt>>, cols: usize) -> usize {
    let rows = m.len();
    let mut rank = 0;
    let mut prev = BigInt::one();
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(piv) = (rank..rows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, piv);
        let (top, bottom) = m.split_at_mut(rank + 1);
        let pivot_row = &top[rank];
        let pv = &pivot_row[col];
        for row in bottom.iter_mut() {
            let lead = std::mem::take(&mut row[col]);
            for j in col + 1..cols {
                let num = pv * &row[j] - &lead * &pivot_row[j];
                debug_assert!((&num % &prev).is_zero());
                row[j] = if prev.is_one() { num } else { num / &prev };
            }
        }
        prev = pv.clone();
        rank += 1;
    }
    rank
}
