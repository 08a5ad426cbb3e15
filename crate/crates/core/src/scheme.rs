//! Symmetric association schemes over exact arithmetic.
//!
//! Intersection numbers are read off by counting, for every ordered pair
//! `(x, y)`, the `z` with `x R_i z` and `z R_j y`; the scheme is valid iff
//! that count depends only on the class of `(x, y)`. This is the matrix
//! identity `A_i A_j = sum_k p_ij^k A_k` checked entry by entry.
//!
//! Eigenmatrices are derived for metric schemes only: the spectrum of `A_1`
//! is the root set of the characteristic polynomial of its tridiagonal
//! intersection matrix, and the rows of `P` follow from the three-term
//! recurrence. `Q = n P^-1`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::arith::is_prime;
use crate::matrix::BitMatrix;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SchemeError {
    #[error("no relation matrices given")]
    Empty,
    #[error("relation {index} is {rows}x{cols}, expected {n}x{n}")]
    Shape {
        index: usize,
        rows: usize,
        cols: usize,
        n: usize,
    },
    #[error("A_0 is not the identity")]
    NotIdentity,
    #[error("entry ({x}, {y}) is covered by {count} relations, expected exactly one")]
    NotPartition { x: usize, y: usize, count: usize },
    #[error("A_{0} is not symmetric")]
    NotSymmetric(usize),
    #[error("p_{i}{j}^{k} is not constant: pair ({x}, {y}) gives {found}, an earlier pair gave {expected}")]
    NotConstant {
        i: usize,
        j: usize,
        k: usize,
        x: usize,
        y: usize,
        expected: u64,
        found: u64,
    },
    #[error("scheme is not metric with respect to A_1: {0}")]
    NotMetric(String),
    #[error("A_1 has {found} distinct integral eigenvalues, expected {expected}")]
    NonIntegralSpectrum { found: usize, expected: usize },
    #[error("multiplicity f_{index} = {value} is not a positive integer")]
    BadMultiplicity { index: usize, value: String },
    #[error("d = {0} is odd; the congruence needs d even")]
    OddRank(usize),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("scheme has {found} classes, expected {expected}")]
    ClassCount { found: usize, expected: usize },
}

/// A verified symmetric association scheme with its intersection numbers.
#[derive(Debug, Clone)]
pub struct SchemeData {
    n: usize,
    relations: Vec<BitMatrix>,
    /// `class[x * n + y]` is the `i` with `x R_i y`.
    class: Vec<u8>,
    /// `p[i][j][k] = p_ij^k`.
    p: Vec<Vec<Vec<u64>>>,
}

impl SchemeData {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of non-identity classes.
    pub fn classes(&self) -> usize {
        self.relations.len() - 1
    }

    pub fn relations(&self) -> &[BitMatrix] {
        &self.relations
    }

    #[inline]
    pub fn class_of(&self, x: usize, y: usize) -> usize {
        self.class[x * self.n + y] as usize
    }

    pub fn intersection_number(&self, i: usize, j: usize, k: usize) -> u64 {
        self.p[i][j][k]
    }

    pub fn intersection_numbers(&self) -> &[Vec<Vec<u64>>] {
        &self.p
    }

    /// Valency of class `i`, i.e. `p_ii^0`.
    pub fn valency(&self, i: usize) -> u64 {
        self.p[i][i][0]
    }
}

/// Verifies the axioms and computes all `p_ij^k`.
pub fn verify_scheme_axioms(relations: Vec<BitMatrix>) -> Result<SchemeData, SchemeError> {
    let first = relations.first().ok_or(SchemeError::Empty)?;
    let n = first.rows();
    for (index, m) in relations.iter().enumerate() {
        if m.rows() != n || m.cols() != n {
            return Err(SchemeError::Shape {
                index,
                rows: m.rows(),
                cols: m.cols(),
                n,
            });
        }
    }
    if *first != BitMatrix::identity(n) {
        return Err(SchemeError::NotIdentity);
    }
    let classes = relations.len();
    assert!(classes <= u8::MAX as usize);
    let mut class = vec![u8::MAX; n * n];
    for x in 0..n {
        for (i, m) in relations.iter().enumerate() {
            for y in m.row_ones(x) {
                let slot = &mut class[x * n + y];
                if *slot != u8::MAX {
                    let count = relations.iter().filter(|m| m.get(x, y)).count();
                    return Err(SchemeError::NotPartition { x, y, count });
                }
                *slot = i as u8;
            }
        }
        if let Some(y) = (0..n).find(|&y| class[x * n + y] == u8::MAX) {
            return Err(SchemeError::NotPartition { x, y, count: 0 });
        }
    }
    if let Some(i) = (0..classes).find(|&i| !relations[i].is_symmetric()) {
        return Err(SchemeError::NotSymmetric(i));
    }

    // Row x of A_i and column y of A_j (= row y, by symmetry).
    // (count, x, y) of the first pair seen, per (i, j, k).
    type Seen = Option<(u64, usize, usize)>;
    let counts_for_row = |x: usize| -> Result<Vec<Seen>, SchemeError> {
        // table[(i * c + j) * c + k]
        let mut table: Vec<Seen> = vec![None; classes * classes * classes];
        for y in 0..n {
            let k = class[x * n + y] as usize;
            for i in 0..classes {
                let ri = relations[i].row(x);
                for j in 0..classes {
                    let rj = relations[j].row(y);
                    let c: u64 = ri.iter().zip(rj).map(|(a, b)| (a & b).count_ones() as u64).sum();
                    let slot = &mut table[(i * classes + j) * classes + k];
                    match slot {
                        None => *slot = Some((c, x, y)),
                        Some((e, _, _)) if *e != c => {
                            return Err(SchemeError::NotConstant {
                                i,
                                j,
                                k,
                                x,
                                y,
                                expected: *e,
                                found: c,
                            })
                        }
                        _ => {}
                    }
                }
            }
        }
        Ok(table)
    };
    let tables: Vec<Vec<Option<(u64, usize, usize)>>> =
        (0..n).into_par_iter().map(counts_for_row).collect::<Result<_, _>>()?;
    let mut merged: Vec<Option<u64>> = vec![None; classes * classes * classes];
    for t in &tables {
        for (idx, entry) in t.iter().enumerate() {
            if let Some((c, x, y)) = *entry {
                match merged[idx] {
                    None => merged[idx] = Some(c),
                    Some(e) if e != c => {
                        let (i, j, k) = (idx / (classes * classes), (idx / classes) % classes, idx % classes);
                        return Err(SchemeError::NotConstant {
                            i,
                            j,
                            k,
                            x,
                            y,
                            expected: e,
                            found: c,
                        });
                    }
                    _ => {}
                }
            }
        }
    }
    let p = (0..classes)
        .map(|i| {
            (0..classes)
                .map(|j| {
                    (0..classes)
                        .map(|k| merged[(i * classes + j) * classes + k].unwrap_or(0))
                        .collect()
                })
                .collect()
        })
        .collect();
    Ok(SchemeData { n, relations, class, p })
}

/// Distance relations `A_0, ..., A_D` of a connected graph, `D` its diameter.
/// Unreachable pairs put in a final class of their own.
pub fn graph_distance_relations(adj: &BitMatrix) -> Vec<BitMatrix> {
    let n = adj.rows();
    let mut dist = vec![usize::MAX; n * n];
    for s in 0..n {
        let row = &mut dist[s * n..(s + 1) * n];
        row[s] = 0;
        let mut frontier = vec![s];
        let mut level = 0;
        while !frontier.is_empty() {
            level += 1;
            let mut next = Vec::new();
            for &u in &frontier {
                for v in adj.row_ones(u) {
                    if row[v] == usize::MAX {
                        row[v] = level;
                        next.push(v);
                    }
                }
            }
            frontier = next;
        }
    }
    let finite_max = dist.iter().filter(|&&d| d != usize::MAX).max().copied().unwrap_or(0);
    let has_inf = dist.contains(&usize::MAX);
    let classes = finite_max + 1 + has_inf as usize;
    let mut mats = vec![BitMatrix::zeros(n, n); classes];
    for x in 0..n {
        for y in 0..n {
            let d = dist[x * n + y];
            let c = if d == usize::MAX { classes - 1 } else { d };
            mats[c].set(x, y, true);
        }
    }
    mats
}

/// Eigenmatrices of a metric scheme, eigenvalues of `A_1` in decreasing order.
#[derive(Debug, Clone)]
pub struct Eigenmatrices {
    pub n: usize,
    pub eigenvalues: Vec<BigInt>,
    /// Characteristic polynomial of the intersection matrix, low-to-high.
    pub char_poly: Vec<BigInt>,
    /// `p[i][j]`: eigenvalue of `A_j` on the `i`-th eigenspace.
    pub p: Vec<Vec<BigRational>>,
    pub q: Vec<Vec<BigRational>>,
    pub multiplicities: Vec<u64>,
}

impl Eigenmatrices {
    /// `E_j = (1/n) sum_i Q_ij A_i` as rational rows. Dense; for small schemes.
    pub fn idempotent(&self, scheme: &SchemeData, j: usize) -> Vec<Vec<BigRational>> {
        let n = scheme.n();
        let scale = BigRational::from_integer(BigInt::from(n));
        let coeff: Vec<BigRational> = (0..self.q.len()).map(|i| &self.q[i][j] / &scale).collect();
        (0..n)
            .map(|x| (0..n).map(|y| coeff[scheme.class_of(x, y)].clone()).collect())
            .collect()
    }

    /// Column `j` of `Q`.
    pub fn q_column(&self, j: usize) -> Vec<BigRational> {
        self.q.iter().map(|row| row[j].clone()).collect()
    }
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Builds `P`, `Q` and the multiplicities for a metric scheme whose
/// relations are ordered by distance in `A_1`.
pub fn eigenmatrices_metric(s: &SchemeData) -> Result<Eigenmatrices, SchemeError> {
    let d = s.classes();
    if d == 0 {
        return Err(SchemeError::NotMetric("no non-identity class".into()));
    }
    // a_j = p_1j^j, b_j = p_1,j+1^j, c_j = p_1,j-1^j
    let p1 = |j: usize, k: usize| s.intersection_number(1, j, k);
    for j in 0..=d {
        for k in 0..=d {
            if j.abs_diff(k) > 1 && p1(j, k) != 0 {
                return Err(SchemeError::NotMetric(format!("p_1{j}^{k} = {} is nonzero", p1(j, k))));
            }
        }
        if j < d && p1(j, j + 1) == 0 {
            return Err(SchemeError::NotMetric(format!("p_1{j}^{} is zero", j + 1)));
        }
    }
    // Intersection matrix L[k][j] = p_1j^k, tridiagonal.
    let l = |k: usize, j: usize| BigInt::from(p1(j, k));
    // Characteristic polynomial det(xI - L) by the continuant recurrence.
    let mut prev: Vec<BigInt> = vec![BigInt::one()];
    let mut cur: Vec<BigInt> = vec![-l(0, 0), BigInt::one()];
    for m in 1..=d {
        let diag = l(m, m);
        let off = l(m, m - 1) * l(m - 1, m);
        let mut next = vec![BigInt::zero(); cur.len() + 1];
        for (i, c) in cur.iter().enumerate() {
            next[i + 1] += c;
            next[i] -= &diag * c;
        }
        for (i, c) in prev.iter().enumerate() {
            next[i] -= &off * c;
        }
        prev = cur;
        cur = next;
    }
    let char_poly = cur;
    let k = s.valency(1) as i64;
    let mut eigenvalues: Vec<BigInt> = (-k..=k)
        .rev()
        .map(BigInt::from)
        .filter(|x| eval(&char_poly, x).is_zero())
        .collect();
    if eigenvalues.len() != d + 1 {
        return Err(SchemeError::NonIntegralSpectrum {
            found: eigenvalues.len(),
            expected: d + 1,
        });
    }
    eigenvalues.sort_by(|a, b| b.cmp(a));

    let p_mat: Vec<Vec<BigRational>> = eigenvalues
        .iter()
        .map(|theta| {
            let theta = BigRational::from_integer(theta.clone());
            let mut row = vec![rat(1), theta.clone()];
            for j in 1..d {
                let a = rat(p1(j, j) as i64);
                let b = rat(p1(j, j - 1) as i64);
                let c = rat(p1(j, j + 1) as i64);
                let next = ((&theta - a) * &row[j] - b * &row[j - 1]) / c;
                row.push(next);
            }
            row
        })
        .collect();
    let n = s.n();
    let inv = invert(&p_mat).ok_or_else(|| SchemeError::NotMetric("P is singular".into()))?;
    let scale = rat(n as i64);
    let q: Vec<Vec<BigRational>> = inv
        .into_iter()
        .map(|row| row.into_iter().map(|x| x * &scale).collect())
        .collect();
    let multiplicities = q[0]
        .iter()
        .enumerate()
        .map(|(index, f)| {
            f.is_integer()
                .then(|| f.to_integer())
                .filter(|v| v.is_positive())
                .and_then(|v| v.to_u64())
                .ok_or(SchemeError::BadMultiplicity {
                    index,
                    value: f.to_string(),
                })
        })
        .collect::<Result<Vec<u64>, _>>()?;
    Ok(Eigenmatrices {
        n,
        eigenvalues,
        char_poly,
        p: p_mat,
        q,
        multiplicities,
    })
}

fn eval(poly: &[BigInt], x: &BigInt) -> BigInt {
    poly.iter().rev().fold(BigInt::zero(), |acc, c| acc * x + c)
}

/// Gauss-Jordan inverse over the rationals.
pub fn invert(m: &[Vec<BigRational>]) -> Option<Vec<Vec<BigRational>>> {
    let n = m.len();
    let mut a: Vec<Vec<BigRational>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { rat(1) } else { rat(0) }));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        let inv = a[col][col].recip();
        for x in a[col].iter_mut() {
            *x *= &inv;
        }
        let pivot = a[col].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r != col && !row[col].is_zero() {
                let f = row[col].clone();
                for (x, y) in row.iter_mut().zip(&pivot) {
                    *x -= &f * y;
                }
            }
        }
    }
    Some(a.into_iter().map(|row| row[n..].to_vec()).collect())
}

pub fn mat_mul(a: &[Vec<BigRational>], b: &[Vec<BigRational>]) -> Vec<Vec<BigRational>> {
    a.iter()
        .map(|row| {
            (0..b[0].len())
                .map(|j| row.iter().zip(b).fold(rat(0), |acc, (x, brow)| acc + x * &brow[j]))
                .collect()
        })
        .collect()
}

/// `f_d` of the dual polar graph of H(2d-1, q^2), evaluated from both
/// closed forms `q^2d (q^(1-2d) + 1)/(q+1)` and `q^(2d-1) - q (q^(2d-2) - 1)/(q+1)`.
pub fn multiplicity_f_d(q: u64, d: u32) -> BigInt {
    let q = BigInt::from(q);
    let one = BigInt::one();
    // q^2d (q^(1-2d) + 1) = q + q^2d
    let first = (&q + q.pow(2 * d)) / (&q + &one);
    let second = q.pow(2 * d - 1) - &q * (q.pow(2 * d - 2) - &one) / (&q + &one);
    assert_eq!(first, second);
    second
}

#[derive(Debug, Clone, Serialize)]
pub struct CongruenceReport {
    pub d: usize,
    pub q: u64,
    pub n: usize,
    /// Coefficient of `A_i` in `n p^(d-1) E_d`, `i = 0..=d`.
    pub coefficients: Vec<String>,
    pub integral: bool,
    pub congruent: bool,
    pub rank_bound: u64,
}

/// Coefficients `f_d (-1)^i p^(d-1-i)` of `n p^(d-1) E_d` in the basis
/// `A_0, ..., A_d` of the dual polar scheme of H(2d-1, p^2). The last one
/// is `f_d / p` and need not be an integer in general.
pub fn scaled_idempotent_coefficients(p: u64, d: usize) -> Vec<BigRational> {
    let f_d = BigRational::from_integer(multiplicity_f_d(p, d as u32));
    let p = rat(p as i64);
    (0..=d)
        .map(|i| {
            let sign = if i % 2 == 0 { rat(1) } else { rat(-1) };
            &f_d * sign * p.pow(d as i32 - 1 - i as i32)
        })
        .collect()
}

/// Checks that `n p^(d-1) E_d` is an integer matrix congruent to `A_d`
/// mod `p`, entry by entry. When it is, `rank_p(A_d) <= rank E_d = f_d`.
pub fn idempotent_congruence_check(s: &SchemeData, p: u64, d: usize) -> Result<CongruenceReport, SchemeError> {
    if d % 2 == 1 {
        return Err(SchemeError::OddRank(d));
    }
    if !is_prime(p) {
        return Err(SchemeError::NotPrime(p));
    }
    if s.classes() != d {
        return Err(SchemeError::ClassCount {
            found: s.classes(),
            expected: d,
        });
    }
    let coeffs = scaled_idempotent_coefficients(p, d);
    let integral = coeffs.iter().all(BigRational::is_integer);
    let congruent = integral && {
        let modulus = BigInt::from(p);
        let residues: Vec<u64> = coeffs
            .iter()
            .map(|c| {
                let r = ((c.to_integer() % &modulus) + &modulus) % &modulus;
                r.to_u64().unwrap()
            })
            .collect();
        let n = s.n();
        let a_d = &s.relations()[d];
        (0..n)
            .into_par_iter()
            .all(|x| (0..n).all(|y| residues[s.class_of(x, y)] == a_d.get(x, y) as u64))
    };
    Ok(CongruenceReport {
        d,
        q: p,
        n: s.n(),
        coefficients: coeffs.iter().map(ToString::to_string).collect(),
        integral,
        congruent,
        rank_bound: multiplicity_f_d(p, d as u32).to_u64().unwrap(),
    })
}
