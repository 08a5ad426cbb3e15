//! The Hermitian polar space H(2d-1, q^2).
//!
//! The ambient space is GF(q^2)^(2d) with the form `f(x, y) = sum x_i y_i^q`.
//! Generators (maximal totally isotropic subspaces, of dimension `d`) are
//! enumerated by extending totally isotropic flags: for a totally isotropic
//! `S`, the form restricted to `S^perp` has radical `S`, so any complement
//! `C` of `S` inside `S^perp` is non-degenerate and the one-dimensional
//! extensions of `S` correspond exactly to the isotropic points of `C`.

use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;
use thiserror::Error;

use crate::arith::prime_power;
use crate::field::{Field, FieldElement, FieldError};
use crate::matrix::BitMatrix;

pub const DEFAULT_GENERATOR_CAP: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HermitianError {
    #[error("q = {0} is not a prime power")]
    NotPrimePower(u64),
    #[error("d must be at least 1")]
    ZeroRank,
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("vector length {got} does not match ambient dimension {expected}")]
    LengthMismatch { got: usize, expected: usize },
    #[error("the zero subspace has no isotropy type")]
    ZeroSubspace,
    #[error("more than {cap} generators")]
    CapExceeded { cap: usize },
}

pub type Vector = Vec<FieldElement>;

/// H(2d-1, q^2) with the identity Gram matrix.
#[derive(Debug, Clone)]
pub struct HermitianSpace {
    d: usize,
    q: u32,
    field: Field,
    conj: Vec<FieldElement>,
}

impl HermitianSpace {
    pub fn new(d: usize, q: u64) -> Result<Self, HermitianError> {
        if d == 0 {
            return Err(HermitianError::ZeroRank);
        }
        let (p, t) = prime_power(q).ok_or(HermitianError::NotPrimePower(q))?;
        let field = Field::new(p, 2 * t)?;
        let conj = field.conj_table(q as u32)?;
        Ok(HermitianSpace {
            d,
            q: q as u32,
            field,
            conj,
        })
    }

    /// Generators have dimension `d`; the ambient space has dimension `2d`.
    pub fn rank(&self) -> usize {
        self.d
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn dim(&self) -> usize {
        2 * self.d
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    #[inline]
    pub fn conj(&self, x: FieldElement) -> FieldElement {
        self.conj[x.index() as usize]
    }

    pub fn form(&self, x: &[FieldElement], y: &[FieldElement]) -> Result<FieldElement, HermitianError> {
        for v in [x, y] {
            if v.len() != self.dim() {
                return Err(HermitianError::LengthMismatch {
                    got: v.len(),
                    expected: self.dim(),
                });
            }
            for &e in v {
                self.field.check(e)?;
            }
        }
        Ok(self.form_raw(x, y))
    }

    #[inline]
    fn form_raw(&self, x: &[FieldElement], y: &[FieldElement]) -> FieldElement {
        let f = &self.field;
        x.iter()
            .zip(y)
            .fold(f.zero(), |acc, (&a, &b)| f.add(acc, f.mul(a, self.conj(b))))
    }

    pub fn is_totally_isotropic(&self, s: &Subspace) -> Result<bool, HermitianError> {
        if s.dim() == 0 {
            return Err(HermitianError::ZeroSubspace);
        }
        if s.ambient_dim() != self.dim() {
            return Err(HermitianError::LengthMismatch {
                got: s.ambient_dim(),
                expected: self.dim(),
            });
        }
        let b = s.basis();
        Ok((0..b.len()).all(|i| (i..b.len()).all(|j| self.form_raw(&b[i], &b[j]).is_zero())))
    }

    /// Basis of `{x : f(x, s) = 0 for all s in S}`.
    pub fn perp(&self, s: &Subspace) -> Vec<Vector> {
        // f(x, s) = sum x_j conj(s_j): the kernel of the conjugated basis.
        let rows: Vec<Vector> = s
            .basis()
            .iter()
            .map(|v| v.iter().map(|&e| self.conj(e)).collect())
            .collect();
        kernel(&self.field, rows, self.dim())
    }

    /// Enumerates all generators, sorted by canonical basis.
    pub fn enumerate_generators(&self, cap: usize) -> Result<GeneratorSet, HermitianError> {
        let n = self.dim();
        let everything: Vec<Vector> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { FieldElement::ONE } else { FieldElement::ZERO })
                    .collect()
            })
            .collect();
        let starts: Vec<Vector> = projective_points(&self.field, &everything)
            .filter(|v| self.form_raw(v, v).is_zero())
            .collect();
        let found: Result<Vec<BTreeSet<Vec<u32>>>, HermitianError> = starts
            .par_iter()
            .map(|v| {
                let mut out = BTreeSet::new();
                let s = Subspace::span(&self.field, n, std::slice::from_ref(v));
                self.extend(s, &mut out, cap)?;
                Ok(out)
            })
            .collect();
        let mut all = BTreeSet::new();
        for part in found? {
            all.extend(part);
            if all.len() > cap {
                return Err(HermitianError::CapExceeded { cap });
            }
        }
        let items: Vec<Subspace> = all.into_iter().map(|key| Subspace::from_key(&key, self.d, n)).collect();
        Ok(GeneratorSet::new(items))
    }

    fn extend(&self, s: Subspace, out: &mut BTreeSet<Vec<u32>>, cap: usize) -> Result<(), HermitianError> {
        if s.dim() == self.d {
            out.insert(s.key());
            if out.len() > cap {
                return Err(HermitianError::CapExceeded { cap });
            }
            return Ok(());
        }
        let complement = complement_in(&self.field, &s, self.perp(&s));
        for v in projective_points(&self.field, &complement) {
            if self.form_raw(&v, &v).is_zero() {
                let mut gens = s.basis().to_vec();
                gens.push(v);
                self.extend(Subspace::span(&self.field, self.dim(), &gens), out, cap)?;
            }
        }
        Ok(())
    }
}

/// A subspace, stored as its reduced row-echelon basis.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subspace {
    ambient: usize,
    basis: Vec<Vector>,
}

impl Subspace {
    pub fn span(field: &Field, ambient: usize, vectors: &[Vector]) -> Subspace {
        let mut rows = vectors.to_vec();
        let r = rref(field, &mut rows);
        rows.truncate(r);
        Subspace { ambient, basis: rows }
    }

    fn from_key(key: &[u32], dim: usize, ambient: usize) -> Subspace {
        let basis = (0..dim)
            .map(|i| {
                key[i * ambient..(i + 1) * ambient]
                    .iter()
                    .map(|&e| FieldElement::from_raw(e))
                    .collect()
            })
            .collect();
        Subspace { ambient, basis }
    }

    /// Flattened element indices of the canonical basis.
    pub fn key(&self) -> Vec<u32> {
        self.basis.iter().flatten().map(|e| e.index()).collect()
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn basis(&self) -> &[Vector] {
        &self.basis
    }

    /// Pivot column of each basis row.
    pub fn pivots(&self) -> Vec<usize> {
        self.basis
            .iter()
            .map(|r| r.iter().position(|e| !e.is_zero()).expect("rref rows are nonzero"))
            .collect()
    }

    pub fn contains(&self, field: &Field, v: &[FieldElement]) -> bool {
        let mut rows = self.basis.clone();
        rows.push(v.to_vec());
        rref(field, &mut rows) == self.dim()
    }

    /// `dim(self ∩ other) = dim self + dim other - dim(self + other)`.
    pub fn intersection_dim(&self, field: &Field, other: &Subspace) -> usize {
        let mut rows: Vec<Vector> = self.basis.iter().chain(&other.basis).cloned().collect();
        self.dim() + other.dim() - rref(field, &mut rows)
    }

    /// Every vector of the subspace (including zero); for small checks only.
    pub fn vectors(&self, field: &Field) -> Vec<Vector> {
        let mut out = vec![vec![field.zero(); self.ambient]];
        for b in &self.basis {
            let mut next = Vec::with_capacity(out.len() * field.order() as usize);
            for v in &out {
                for c in field.elements() {
                    next.push(v.iter().zip(b).map(|(&x, &y)| field.add(x, field.mul(c, y))).collect());
                }
            }
            out = next;
        }
        out
    }
}

/// In-place reduced row echelon form; returns the rank and leaves the
/// nonzero rows first.
pub fn rref(field: &Field, rows: &mut [Vector]) -> usize {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..ncols {
        let Some(piv) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, piv);
        let inv = field.inv(rows[rank][col]).expect("pivot is nonzero");
        for e in rows[rank].iter_mut() {
            *e = field.mul(*e, inv);
        }
        let pivot = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r == rank || row[col].is_zero() {
                continue;
            }
            let f = field.neg(row[col]);
            for (x, &y) in row.iter_mut().zip(&pivot).skip(col) {
                *x = field.add(*x, field.mul(f, y));
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// Basis of the right kernel `{x : M x = 0}`.
pub fn kernel(field: &Field, mut rows: Vec<Vector>, ncols: usize) -> Vec<Vector> {
    let r = rref(field, &mut rows);
    rows.truncate(r);
    let pivots: Vec<usize> = rows
        .iter()
        .map(|row| row.iter().position(|e| !e.is_zero()).unwrap())
        .collect();
    (0..ncols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![field.zero(); ncols];
            v[free] = field.one();
            for (row, &pc) in rows.iter().zip(&pivots) {
                v[pc] = field.neg(row[free]);
            }
            v
        })
        .collect()
}

/// Vectors from `candidates` extending `s` to a basis of `span(s, candidates)`,
/// i.e. a complement of `s` there.
fn complement_in(field: &Field, s: &Subspace, candidates: Vec<Vector>) -> Vec<Vector> {
    let mut acc = s.basis().to_vec();
    let mut picked = Vec::new();
    for v in candidates {
        let mut trial = acc.clone();
        trial.push(v.clone());
        if rref(field, &mut trial) > acc.len() {
            acc.push(v.clone());
            picked.push(v);
        }
    }
    picked
}

/// One representative per projective point of `span(basis)`: coefficient
/// vectors whose first nonzero entry is 1.
fn projective_points<'a>(field: &'a Field, basis: &'a [Vector]) -> impl Iterator<Item = Vector> + 'a {
    let k = basis.len();
    let q = field.order() as u64;
    let n = basis.first().map_or(0, Vec::len);
    (0..k).flat_map(move |lead| {
        let tail = k - lead - 1;
        (0..q.pow(tail as u32)).map(move |mut code| {
            let mut v = basis[lead].clone();
            for b in &basis[lead + 1..] {
                let c = FieldElement::from_raw((code % q) as u32);
                code /= q;
                if c.is_zero() {
                    continue;
                }
                for j in 0..n {
                    v[j] = field.add(v[j], field.mul(c, b[j]));
                }
            }
            v
        })
    })
}

/// Generators in canonical order, with a reverse index.
#[derive(Debug, Clone)]
pub struct GeneratorSet {
    items: Vec<Subspace>,
    index: HashMap<Vec<u32>, usize>,
}

impl GeneratorSet {
    fn new(items: Vec<Subspace>) -> Self {
        let index = items.iter().enumerate().map(|(i, s)| (s.key(), i)).collect();
        GeneratorSet { items, index }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[Subspace] {
        &self.items
    }

    pub fn position(&self, s: &Subspace) -> Option<usize> {
        self.index.get(&s.key()).copied()
    }

    /// `A_i[a][b] = 1` iff `dim(a ∩ b) = d - i`, for `i = 0..=d`.
    pub fn relation_matrices(&self, space: &HermitianSpace) -> Vec<BitMatrix> {
        let n = self.items.len();
        let d = space.rank();
        let field = space.field();
        let rows: Vec<Vec<u8>> = (0..n)
            .into_par_iter()
            .map(|a| {
                (0..n)
                    .map(|b| {
                        if a == b {
                            0
                        } else {
                            (d - self.items[a].intersection_dim(field, &self.items[b])) as u8
                        }
                    })
                    .collect()
            })
            .collect();
        let mut mats = vec![BitMatrix::zeros(n, n); d + 1];
        for (a, row) in rows.iter().enumerate() {
            for (b, &i) in row.iter().enumerate() {
                mats[i as usize].set(a, b, true);
            }
        }
        mats
    }
}

/// `prod_{i=1..d} (q^(2i-1) + 1)`; used only as a cross-check of the enumeration.
pub fn expected_generator_count(q: u64, d: u32) -> u64 {
    (1..=d).map(|i| q.pow(2 * i - 1) + 1).product()
}
