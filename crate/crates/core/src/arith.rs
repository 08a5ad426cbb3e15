//! Small integer helpers shared across modules.

/// Deterministic trial-division primality test; inputs here are small.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) {
        return false;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Returns `(p, t)` with `q = p^t` if `q` is a prime power.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q.is_multiple_of(*d))?;
    let mut rest = q;
    let mut t = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        t += 1;
    }
    (rest == 1).then_some((p, t))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes_below_50() {
        let got: Vec<u64> = (0..50).filter(|&n| is_prime(n)).collect();
        assert_eq!(got, [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47]);
    }

    #[test]
    fn prime_powers() {
        assert_eq!(prime_power(81), Some((3, 4)));
        assert_eq!(prime_power(16), Some((2, 4)));
        assert_eq!(prime_power(7), Some((7, 1)));
        assert_eq!(prime_power(12), None);
        assert_eq!(prime_power(1), None);
    }
}
