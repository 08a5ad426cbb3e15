//! Clique bounds from p-ranks and the legacy counting bounds they are
//! compared against. Everything is exact big-integer arithmetic.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::arith::is_prime;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BoundError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("d = {0} must be even and at least 2")]
    BadRank(u32),
    #[error("exponent t must be at least 1")]
    ZeroExponent,
    #[error("the octagon O(2^t) exists only for odd t, got t = {0}")]
    EvenOctagonExponent(u32),
    #[error("formula {name} is not an integer at p = {p}")]
    NonIntegral { name: String, p: u64 },
    #[error("unknown rank formula {0:?}")]
    UnknownFormula(String),
    #[error("parameter {0} must be positive")]
    NonPositive(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundFamily {
    Lemma1,
    Thm1a,
    Thm1b,
    Thm1c,
    Thm2,
    CountingSpread,
    CountingOvoid,
    OddD,
    Debeule,
}

impl fmt::Display for BoundFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            BoundFamily::Lemma1 => "lemma1",
            BoundFamily::Thm1a => "thm1a",
            BoundFamily::Thm1b => "thm1b",
            BoundFamily::Thm1c => "thm1c",
            BoundFamily::Thm2 => "thm2",
            BoundFamily::CountingSpread => "counting_spread",
            BoundFamily::CountingOvoid => "counting_ovoid",
            BoundFamily::OddD => "odd_d",
            BoundFamily::Debeule => "debeule",
        };
        f.write_str(name)
    }
}

/// Parameters a bound was evaluated at; absent ones are omitted from JSON.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct BoundParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundReport {
    pub family: BoundFamily,
    pub params: BoundParams,
    #[serde(serialize_with = "serialize_big")]
    pub value: BigInt,
}

/// JSON numbers while the value fits in a `u64`, decimal strings beyond.
pub fn serialize_big<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    match v.to_u64() {
        Some(x) => s.serialize_u64(x),
        None => s.serialize_str(&v.to_string()),
    }
}

fn big(x: u64) -> BigInt {
    BigInt::from(x)
}

fn check_prime(p: u64) -> Result<(), BoundError> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(BoundError::NotPrime(p))
    }
}

/// The rank clique bound in its two-case form: a clique `Y` satisfies `|Y| <= rank + 1` when
/// `p | |Y| - 1` and `|Y| <= rank` otherwise.
pub fn clique_size_admissible(size: u64, rank: u64, p: u64) -> bool {
    if size == 0 {
        return true;
    }
    if (size - 1).is_multiple_of(p) {
        size <= rank + 1
    } else {
        size <= rank
    }
}

/// The largest clique size the two cases allow: `r + 1` is only consistent
/// with `p | r`, otherwise the bound is `r`.
pub fn clique_bound_from_rank(r: u64, p: u64) -> u64 {
    if r.is_multiple_of(p) {
        r + 1
    } else {
        r
    }
}

pub fn lemma1_bound(r: u64, p: u64) -> Result<BoundReport, BoundError> {
    check_prime(p)?;
    Ok(BoundReport {
        family: BoundFamily::Lemma1,
        params: BoundParams {
            p: Some(p),
            rank: Some(r),
            ..Default::default()
        },
        value: big(clique_bound_from_rank(r, p)),
    })
}

/// `rank_p(A(p^t)) = rank_p(A(p))^t`.
pub fn steinberg_lift(r_prime: u64, t: u32) -> BigInt {
    big(r_prime).pow(t)
}

fn exact_div(num: BigInt, den: BigInt, name: &str, p: u64) -> Result<BigInt, BoundError> {
    let (q, r) = num.div_rem(&den);
    if r.is_zero() {
        Ok(q)
    } else {
        Err(BoundError::NonIntegral { name: name.into(), p })
    }
}

/// `p^(2d-1) - p (p^(2d-2) - 1)/(p+1)`, the multiplicity `f_d` at `q = p`.
fn thm1c_base(p: u64, d: u32) -> BigInt {
    let p = big(p);
    p.pow(2 * d - 1) - &p * (p.pow(2 * d - 2) - BigInt::one()) / (&p + BigInt::one())
}

/// Partial spreads of H(2d-1, q^2), `q = p^t`, `d` even.
pub fn theorem1_bound(p: u64, t: u32, d: u32) -> Result<BoundReport, BoundError> {
    check_prime(p)?;
    if t == 0 {
        return Err(BoundError::ZeroExponent);
    }
    if d < 2 || d % 2 == 1 {
        return Err(BoundError::BadRank(d));
    }
    let (family, value) = match (d, p) {
        (2, 3) => (BoundFamily::Thm1b, big(19).pow(t)),
        (2, _) => {
            let base = published_rank_formula("h3_lines", p)?;
            (BoundFamily::Thm1a, base.pow(t) + 1)
        }
        _ => (BoundFamily::Thm1c, thm1c_base(p, d).pow(t) + 1),
    };
    Ok(BoundReport {
        family,
        params: BoundParams {
            p: Some(p),
            t: Some(t),
            d: Some(d),
            ..Default::default()
        },
        value,
    })
}

/// Branch (a) evaluated even at `p = 3`, for comparison tables.
pub fn theorem1a_value(p: u64, t: u32) -> Result<BigInt, BoundError> {
    Ok(published_rank_formula("h3_lines", p)?.pow(t) + 1)
}

/// Partial ovoids of the Ree-Tits octagon O(2^t), `t` odd.
pub fn theorem2_bound(t: u32) -> Result<BoundReport, BoundError> {
    if t == 0 {
        return Err(BoundError::ZeroExponent);
    }
    if t.is_multiple_of(2) {
        return Err(BoundError::EvenOctagonExponent(t));
    }
    Ok(BoundReport {
        family: BoundFamily::Thm2,
        params: BoundParams {
            p: Some(2),
            t: Some(t),
            ..Default::default()
        },
        value: steinberg_lift(26, t) + 1,
    })
}

/// Legacy partial-spread bounds for H(2d-1, q^2): the double-counting bound
/// `q^(2d-1) + 1`, plus `q^d + 1` for odd `d` and `(q^3 + q + 2)/2` for `d = 2`.
pub fn baseline_spread_bounds(q: u64, d: u32) -> Result<Vec<BoundReport>, BoundError> {
    if q < 2 {
        return Err(BoundError::NonPositive("q"));
    }
    if d == 0 {
        return Err(BoundError::NonPositive("d"));
    }
    let params = BoundParams {
        q: Some(q),
        d: Some(d),
        ..Default::default()
    };
    let qb = big(q);
    let mut out = vec![BoundReport {
        family: BoundFamily::CountingSpread,
        params: params.clone(),
        value: qb.pow(2 * d - 1) + 1,
    }];
    if d % 2 == 1 {
        out.push(BoundReport {
            family: BoundFamily::OddD,
            params: params.clone(),
            value: qb.pow(d) + 1,
        });
    }
    if d == 2 {
        out.push(BoundReport {
            family: BoundFamily::Debeule,
            params,
            value: debeule(q),
        });
    }
    Ok(out)
}

/// `(q^3 + q + 2)/2`; always an integer since `q^3 + q` is even.
pub fn debeule(q: u64) -> BigInt {
    (big(q).pow(3) + q + 2u32) / 2u32
}

/// Counting bound `(sr)^2 + 1` for partial ovoids of a generalized octagon.
pub fn baseline_ovoid_bound(s: u64, r: u64) -> Result<BoundReport, BoundError> {
    if s == 0 {
        return Err(BoundError::NonPositive("s"));
    }
    if r == 0 {
        return Err(BoundError::NonPositive("r"));
    }
    Ok(BoundReport {
        family: BoundFamily::CountingOvoid,
        params: BoundParams {
            s: Some(s),
            r: Some(r),
            ..Default::default()
        },
        value: (big(s) * r).pow(2) + 1,
    })
}

pub const RANK_FORMULAS: [&str; 4] = ["h3_lines", "h5_generators", "triality_hexagon", "h5_multiplicity_bound"];

/// Closed-form p-ranks at `t = 1`:
/// - `h3_lines`: `(2p^3 + p)/3`
/// - `h5_generators`: `(11p^5 + 5p^3 + 4p)/20`
/// - `triality_hexagon`: `(4p^5 + p)/5`
/// - `h5_multiplicity_bound`: `p^5 - p^4 + p^3 - p^2 + p`
pub fn published_rank_formula(name: &str, p: u64) -> Result<BigInt, BoundError> {
    check_prime(p)?;
    let pb = big(p);
    let pw = |e: u32| pb.pow(e);
    match name {
        "h3_lines" => exact_div(2 * pw(3) + p, big(3), name, p),
        "h5_generators" => exact_div(11 * pw(5) + 5 * pw(3) + 4 * &pb, big(20), name, p),
        "triality_hexagon" => exact_div(4 * pw(5) + p, big(5), name, p),
        "h5_multiplicity_bound" => Ok(pw(5) - pw(4) + pw(3) - pw(2) + p),
        _ => Err(BoundError::UnknownFormula(name.into())),
    }
}

/// One row of the `d = 2` comparison between `((2p^3+p)/3)^t + 1` and `(q^3+q+2)/2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CrossoverRow {
    pub p: u64,
    pub t: u32,
    pub q: u64,
    #[serde(serialize_with = "serialize_big")]
    pub theorem1a: BigInt,
    #[serde(serialize_with = "serialize_big")]
    pub debeule: BigInt,
    /// Strictly smaller legacy bound.
    pub debeule_better: bool,
}

pub fn crossover_table(primes: &[u64], max_t: u32) -> Result<Vec<CrossoverRow>, BoundError> {
    let mut rows = Vec::new();
    for &p in primes {
        for t in 1..=max_t {
            let q = p.checked_pow(t).ok_or(BoundError::NonPositive("q (overflow)"))?;
            let a = theorem1a_value(p, t)?;
            let b = debeule(q);
            rows.push(CrossoverRow {
                p,
                t,
                q,
                debeule_better: b < a,
                theorem1a: a,
                debeule: b,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn primes_below(n: u64) -> Vec<u64> {
        (2..n).filter(|&p| is_prime(p)).collect()
    }

    #[test]
    fn lemma1_examples() {
        assert_eq!(clique_bound_from_rank(6, 2), 7);
        assert_eq!(clique_bound_from_rank(19, 3), 19);
        assert_eq!(clique_bound_from_rank(26, 2), 27);
        assert_eq!(lemma1_bound(26, 2).unwrap().value, big(27));
        assert_eq!(lemma1_bound(26, 4).unwrap_err(), BoundError::NotPrime(4));
    }

    #[test]
    fn collapse_is_the_max_of_the_two_cases() {
        for p in [2, 3, 5, 7] {
            for r in 0..60 {
                let best = (0..=r + 2).filter(|&y| clique_size_admissible(y, r, p)).max().unwrap();
                assert_eq!(best, clique_bound_from_rank(r, p), "r={r} p={p}");
            }
        }
    }

    #[test]
    fn steinberg() {
        assert_eq!(steinberg_lift(6, 2), big(36));
        assert_eq!(steinberg_lift(26, 3), big(17576));
        assert_eq!(steinberg_lift(19, 1), big(19));
        assert_eq!(steinberg_lift(26, 41).to_string(), big(26).pow(41).to_string());
    }

    #[test]
    fn theorem1_values() {
        let v = |p, t, d| theorem1_bound(p, t, d).unwrap();
        assert_eq!(v(2, 1, 2).value, big(7));
        assert_eq!(v(2, 1, 2).family, BoundFamily::Thm1a);
        assert_eq!(v(2, 2, 2).value, big(37));
        assert_eq!(v(3, 1, 2).value, big(19));
        assert_eq!(v(3, 2, 2).value, big(361));
        assert_eq!(v(3, 2, 2).family, BoundFamily::Thm1b);
        // 2^7 - 2 (2^6 - 1)/3 + 1
        assert_eq!(v(2, 1, 4).value, big(128 - 42 + 1));
        assert_eq!(v(2, 1, 4).family, BoundFamily::Thm1c);
        assert_eq!(theorem1_bound(2, 1, 3).unwrap_err(), BoundError::BadRank(3));
        assert_eq!(theorem1_bound(2, 0, 2).unwrap_err(), BoundError::ZeroExponent);
        assert_eq!(theorem1_bound(6, 1, 2).unwrap_err(), BoundError::NotPrime(6));
    }

    #[test]
    fn theorem1_routes_agree() {
        for p in [2, 3, 5, 7] {
            let r = published_rank_formula("h3_lines", p).unwrap().to_u64().unwrap();
            assert_eq!(
                theorem1_bound(p, 1, 2).unwrap().value,
                big(clique_bound_from_rank(r, p))
            );
        }
    }

    #[test]
    fn p_divides_h3_rank_iff_p_is_not_3() {
        for p in primes_below(100) {
            let r = published_rank_formula("h3_lines", p).unwrap();
            assert_eq!((r % p).is_zero(), p != 3, "p={p}");
        }
    }

    #[test]
    fn thm1c_base_is_the_multiplicity() {
        for (p, d) in [(2, 2), (3, 2), (2, 3), (5, 4)] {
            assert_eq!(thm1c_base(p, d), crate::scheme::multiplicity_f_d(p, d));
        }
    }

    #[test]
    fn theorem2_values() {
        assert_eq!(theorem2_bound(1).unwrap().value, big(27));
        assert_eq!(theorem2_bound(3).unwrap().value, big(17577));
        assert_eq!(theorem2_bound(2).unwrap_err(), BoundError::EvenOctagonExponent(2));
    }

    #[test]
    fn baselines() {
        let b = baseline_spread_bounds(2, 2).unwrap();
        assert_eq!(b[0].family, BoundFamily::CountingSpread);
        assert_eq!(b[0].value, big(9));
        assert_eq!(b[1].family, BoundFamily::Debeule);
        assert_eq!(b[1].value, big(6));
        let b = baseline_spread_bounds(4, 2).unwrap();
        assert_eq!(b[1].value, big(35));
        let b = baseline_spread_bounds(2, 3).unwrap();
        assert_eq!(
            b.iter().map(|r| r.family).collect::<Vec<_>>(),
            [BoundFamily::CountingSpread, BoundFamily::OddD]
        );
        assert_eq!(b[1].value, big(9));
        assert_eq!(baseline_ovoid_bound(2, 4).unwrap().value, big(65));
    }

    #[test]
    fn crossover_matches_the_remark() {
        let table = crossover_table(&primes_below(30), 6).unwrap();
        for row in &table {
            let expected = (row.p == 2 && row.t <= 2) || row.t == 1;
            assert_eq!(row.debeule_better, expected, "{row:?}");
        }
        let q4 = table.iter().find(|r| r.p == 2 && r.t == 2).unwrap();
        assert_eq!((q4.debeule.clone(), q4.theorem1a.clone()), (big(35), big(37)));
    }

    #[test]
    fn thm1_never_exceeds_counting_bound() {
        for p in primes_below(20) {
            for t in 1..5 {
                for d in [2, 4, 6] {
                    let q = p.pow(t);
                    let new = theorem1_bound(p, t, d).unwrap().value;
                    let counting = &baseline_spread_bounds(q, d).unwrap()[0].value;
                    assert!(new <= *counting, "p={p} t={t} d={d}");
                }
            }
        }
    }

    #[test]
    fn rank_formulas() {
        let f = |n, p| published_rank_formula(n, p).unwrap();
        assert_eq!(f("h3_lines", 2), big(6));
        assert_eq!(f("h3_lines", 3), big(19));
        assert_eq!(f("h5_generators", 2), big(20));
        assert_eq!(f("triality_hexagon", 2), big(26));
        assert_eq!(f("h5_multiplicity_bound", 2), big(22));
        assert_eq!(
            published_rank_formula("nope", 2).unwrap_err(),
            BoundError::UnknownFormula("nope".into())
        );
        assert_eq!(
            published_rank_formula("h3_lines", 9).unwrap_err(),
            BoundError::NotPrime(9)
        );
    }

    #[test]
    fn rank_formulas_are_integral_at_every_prime() {
        // p^k = p mod k for k = 3, 5 makes each numerator divisible.
        for p in primes_below(100) {
            for name in RANK_FORMULAS {
                assert!(published_rank_formula(name, p).is_ok(), "{name} p={p}");
            }
        }
    }

    #[test]
    fn json_shape() {
        let r = theorem2_bound(3).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["family"], "thm2");
        assert_eq!(v["value"], 17577);
        let huge = BoundReport {
            value: steinberg_lift(26, 30),
            ..r
        };
        let v = serde_json::to_value(&huge).unwrap();
        assert_eq!(v["value"], big(26).pow(30).to_string());
    }
}
