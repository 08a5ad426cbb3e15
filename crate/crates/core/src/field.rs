//! Arithmetic in small finite fields GF(p^k).
//!
//! An element is stored as the base-`p` integer whose digits are its
//! coefficients over the polynomial basis `1, x, ..., x^(k-1)`, so every
//! element has exactly one representation and equality is bitwise.
//! Multiplication goes through discrete log/exp tables; addition for odd
//! characteristic goes through a digit loop (or a table for small fields).

use std::fmt;

use thiserror::Error;

use crate::arith::is_prime;

/// Largest field order handled here.
pub const MAX_FIELD_ORDER: u64 = 1 << 16;

/// Orders up to this size get a precomputed addition table.
const ADD_TABLE_MAX: u32 = 1024;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("field order {p}^{k} exceeds the supported maximum {MAX_FIELD_ORDER}")]
    TooLarge { p: u64, k: u32 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("element {0} does not belong to this field")]
    ForeignElement(u32),
    #[error("coefficient vector has length {got}, expected {expected}")]
    BadLength { got: usize, expected: usize },
    #[error("field order {order} is not the square of {q}")]
    NotQuadratic { order: u32, q: u32 },
}

/// An element of some [`Field`], identified by its coefficient encoding.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FieldElement(u32);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    /// The base-`p` encoding of the coefficient vector.
    #[inline]
    pub fn index(self) -> u32 {
        self.0
    }

    /// Wraps an index already known to belong to the field in use.
    #[inline]
    pub(crate) fn from_raw(index: u32) -> FieldElement {
        FieldElement(index)
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// GF(p^k) with a fixed defining polynomial.
#[derive(Clone)]
pub struct Field {
    p: u32,
    k: u32,
    order: u32,
    /// Monic modulus, coefficients low-to-high, length k+1.
    modulus: Vec<u32>,
    exp: Vec<FieldElement>,
    log: Vec<u32>,
    add_table: Option<Vec<u16>>,
    neg: Vec<FieldElement>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("p", &self.p)
            .field("k", &self.k)
            .field("modulus", &self.modulus)
            .finish()
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.modulus == other.modulus
    }
}

impl Eq for Field {}

impl Field {
    /// Builds GF(p^k) using the lexicographically least monic irreducible
    /// polynomial of degree `k` (coefficients compared low-to-high).
    pub fn new(p: u64, k: u32) -> Result<Field, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if k == 0 {
            return Err(FieldError::ZeroDegree);
        }
        let order = (p as u128).checked_pow(k).filter(|&o| o <= MAX_FIELD_ORDER as u128);
        let order = match order {
            Some(o) => o as u32,
            None => return Err(FieldError::TooLarge { p, k }),
        };
        let p = p as u32;
        let modulus = least_irreducible(p, k);
        let mut field = Field {
            p,
            k,
            order,
            modulus,
            exp: Vec::new(),
            log: Vec::new(),
            add_table: None,
            neg: Vec::new(),
        };
        field.neg = (0..order)
            .map(|x| {
                let digits = field.digits(FieldElement(x));
                field.encode_digits(digits.iter().map(|&c| (p - c) % p))
            })
            .collect();
        field.build_log_tables();
        if p != 2 && order <= ADD_TABLE_MAX {
            let mut table = vec![0u16; (order * order) as usize];
            for a in 0..order {
                for b in 0..order {
                    table[(a * order + b) as usize] = field.add_digits(FieldElement(a), FieldElement(b)).0 as u16;
                }
            }
            field.add_table = Some(table);
        }
        Ok(field)
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.k
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Defining polynomial, coefficients low-to-high (monic, length `k+1`).
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement::ZERO
    }

    pub fn one(&self) -> FieldElement {
        FieldElement::ONE
    }

    /// The class of `x` in the polynomial basis, i.e. the generator of the
    /// extension (equals the residue `0` in a prime field, where `x` is the modulus).
    pub fn generator(&self) -> FieldElement {
        if self.k == 1 {
            FieldElement::ZERO
        } else {
            FieldElement(self.p)
        }
    }

    pub fn contains(&self, x: FieldElement) -> bool {
        x.0 < self.order
    }

    pub fn check(&self, x: FieldElement) -> Result<FieldElement, FieldError> {
        if self.contains(x) {
            Ok(x)
        } else {
            Err(FieldError::ForeignElement(x.0))
        }
    }

    /// Element with the given coefficients (low-to-high), each reduced mod `p`.
    pub fn element(&self, coeffs: &[u32]) -> Result<FieldElement, FieldError> {
        if coeffs.len() != self.k as usize {
            return Err(FieldError::BadLength {
                got: coeffs.len(),
                expected: self.k as usize,
            });
        }
        Ok(self.encode_digits(coeffs.iter().map(|&c| c % self.p)))
    }

    pub fn from_index(&self, index: u32) -> Result<FieldElement, FieldError> {
        self.check(FieldElement(index))
    }

    /// Image of an integer under the prime-field embedding.
    pub fn from_int(&self, n: i64) -> FieldElement {
        FieldElement(n.rem_euclid(self.p as i64) as u32)
    }

    pub fn coeffs(&self, x: FieldElement) -> Vec<u32> {
        self.digits(x)
    }

    /// All elements in index order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> {
        (0..self.order).map(FieldElement)
    }

    #[inline]
    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if self.p == 2 {
            return FieldElement(a.0 ^ b.0);
        }
        match &self.add_table {
            Some(t) => FieldElement(t[(a.0 * self.order + b.0) as usize] as u32),
            None => self.add_digits(a, b),
        }
    }

    #[inline]
    pub fn neg(&self, a: FieldElement) -> FieldElement {
        self.neg[a.0 as usize]
    }

    #[inline]
    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if a.0 == 0 || b.0 == 0 {
            return FieldElement::ZERO;
        }
        let n = self.order - 1;
        let s = self.log[a.0 as usize] + self.log[b.0 as usize];
        self.exp[(if s >= n { s - n } else { s }) as usize]
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement, FieldError> {
        if a.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        let n = self.order - 1;
        let l = self.log[a.0 as usize];
        Ok(self.exp[((n - l) % n) as usize])
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, FieldError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: FieldElement, e: u64) -> FieldElement {
        if e == 0 {
            return FieldElement::ONE;
        }
        if a.is_zero() {
            return FieldElement::ZERO;
        }
        let n = (self.order - 1) as u64;
        let l = self.log[a.0 as usize] as u64;
        self.exp[((l * (e % n)) % n) as usize]
    }

    /// Discrete logarithm with respect to the primitive element used by the tables.
    pub fn log(&self, a: FieldElement) -> Option<u32> {
        (!a.is_zero()).then(|| self.log[a.0 as usize])
    }

    /// The absolute Frobenius automorphism `x -> x^p`, computed by
    /// multiplication so it does not depend on the log tables.
    pub fn frobenius(&self, a: FieldElement) -> FieldElement {
        let mut acc = FieldElement::ONE;
        for _ in 0..self.p {
            acc = self.mul_poly(acc, a);
        }
        acc
    }

    /// Subfield order `q` with `q^2 = |F|`, if the order is a square.
    pub fn subfield_order(&self) -> Option<u32> {
        self.k.is_multiple_of(2).then(|| self.p.pow(self.k / 2))
    }

    /// `x -> x^q` on GF(q^2): `k/2` applications of the Frobenius map.
    pub fn conj(&self, x: FieldElement, q: u32) -> Result<FieldElement, FieldError> {
        if self.subfield_order() != Some(q) {
            return Err(FieldError::NotQuadratic { order: self.order, q });
        }
        let x = self.check(x)?;
        Ok((0..self.k / 2).fold(x, |y, _| self.frobenius(y)))
    }

    /// Conjugation table indexed by element index.
    pub fn conj_table(&self, q: u32) -> Result<Vec<FieldElement>, FieldError> {
        self.elements().map(|x| self.conj(x, q)).collect()
    }

    fn digits(&self, x: FieldElement) -> Vec<u32> {
        let mut v = x.0;
        (0..self.k)
            .map(|_| {
                let d = v % self.p;
                v /= self.p;
                d
            })
            .collect()
    }

    fn encode_digits(&self, digits: impl DoubleEndedIterator<Item = u32>) -> FieldElement {
        FieldElement(digits.rev().fold(0, |acc, d| acc * self.p + d))
    }

    fn add_digits(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let (mut x, mut y) = (a.0, b.0);
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.k {
            out += ((x % self.p + y % self.p) % self.p) * place;
            x /= self.p;
            y /= self.p;
            place *= self.p;
        }
        FieldElement(out)
    }

    /// Schoolbook product reduced by the modulus.
    fn mul_poly(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let k = self.k as usize;
        let p = self.p as u64;
        let da = self.digits(a);
        let db = self.digits(b);
        let mut prod = vec![0u64; 2 * k];
        for (i, &x) in da.iter().enumerate() {
            for (j, &y) in db.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p;
            }
        }
        for deg in (k..2 * k).rev() {
            let c = prod[deg];
            if c == 0 {
                continue;
            }
            for (i, &m) in self.modulus.iter().enumerate() {
                let idx = deg - k + i;
                prod[idx] = (prod[idx] + (p - c) * m as u64) % p;
            }
        }
        self.encode_digits(prod[..k].iter().map(|&c| c as u32))
    }

    fn build_log_tables(&mut self) {
        let n = self.order - 1;
        let mut exp = Vec::with_capacity(n as usize);
        for g in 1..self.order {
            let g = FieldElement(g);
            exp.clear();
            let mut x = FieldElement::ONE;
            loop {
                exp.push(x);
                x = self.mul_poly(x, g);
                if x == FieldElement::ONE {
                    break;
                }
            }
            if exp.len() == n as usize {
                break;
            }
        }
        debug_assert_eq!(exp.len(), n as usize);
        let mut log = vec![0u32; self.order as usize];
        for (i, x) in exp.iter().enumerate() {
            log[x.0 as usize] = i as u32;
        }
        self.exp = exp;
        self.log = log;
    }
}

/// Lexicographically least (low-to-high) monic irreducible polynomial of degree `k`.
fn least_irreducible(p: u32, k: u32) -> Vec<u32> {
    if k == 1 {
        return vec![0, 1];
    }
    let count = p.pow(k);
    // Counting the low coefficient as the least significant digit walks the
    // candidates in colexicographic order, so decode with c_0 most significant.
    for code in 0..count {
        let mut lower = vec![0u32; k as usize];
        let mut v = code;
        for slot in lower.iter_mut().rev() {
            *slot = v % p;
            v /= p;
        }
        let mut poly = lower;
        poly.push(1);
        if is_irreducible(&poly, p) {
            return poly;
        }
    }
    unreachable!("an irreducible polynomial of every degree exists")
}

/// Trial division by every monic polynomial of degree `1..=deg/2`.
pub(crate) fn is_irreducible(poly: &[u32], p: u32) -> bool {
    let deg = poly.len() - 1;
    if deg <= 1 {
        return deg == 1;
    }
    for d in 1..=deg / 2 {
        let count = p.pow(d as u32);
        for code in 0..count {
            let mut divisor: Vec<u32> = Vec::with_capacity(d + 1);
            let mut v = code;
            for _ in 0..d {
                divisor.push(v % p);
                v /= p;
            }
            divisor.push(1);
            if poly_rem_is_zero(poly, &divisor, p) {
                return false;
            }
        }
    }
    true
}

fn poly_rem_is_zero(num: &[u32], monic_div: &[u32], p: u32) -> bool {
    let mut r: Vec<u64> = num.iter().map(|&c| c as u64).collect();
    let dd = monic_div.len() - 1;
    let p = p as u64;
    for deg in (dd..r.len()).rev() {
        let c = r[deg] % p;
        if c == 0 {
            continue;
        }
        for (i, &m) in monic_div.iter().enumerate() {
            let idx = deg - dd + i;
            r[idx] = (r[idx] + (p - c) * m as u64) % p;
        }
    }
    r[..dd].iter().all(|&c| c % p == 0)
}
