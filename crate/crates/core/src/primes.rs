//! Primality and factorization helpers on machine-sized integers.

/// Deterministic Miller-Rabin for u64.
pub(crate) fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    // these witnesses decide primality for all n < 2^64
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod_u128(a as u128, d, n as u128);
        if x == 1 || x == (n - 1) as u128 {
            continue;
        }
        for _ in 0..s - 1 {
            x = mul_mod_u128(x, x, n as u128);
            if x == (n - 1) as u128 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn mul_mod_u128(a: u128, b: u128, m: u128) -> u128 {
    // operands here stay below 2^64, so the product fits u128
    (a * b) % m
}

fn pow_mod_u128(mut base: u128, mut exp: u64, m: u128) -> u128 {
    let mut acc = 1u128 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod_u128(acc, base, m);
        }
        base = mul_mod_u128(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Factor n into (prime, multiplicity) pairs, primes ascending.
///
/// Trial division only; callers pass values bounded by the field-order
/// budget (≤ 2^24) or by q-1 at desk scale, so this is plenty.
pub(crate) fn factor_u64(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primality_smoke() {
        let primes = [2u64, 3, 5, 7, 11, 13, 101, 7919, 1_000_003];
        for p in primes {
            assert!(is_prime_u64(p), "{p}");
        }
        for c in [0u64, 1, 4, 9, 91, 1_000_001, 7917] {
            assert!(!is_prime_u64(c), "{c}");
        }
    }

    #[test]
    fn factoring() {
        assert_eq!(factor_u64(1), vec![]);
        assert_eq!(factor_u64(24), vec![(2, 3), (3, 1)]);
        // 2^24 - 1
        assert_eq!(
            factor_u64(16_777_215),
            vec![(3, 2), (5, 1), (7, 1), (13, 1), (17, 1), (241, 1)]
        );
    }
}
