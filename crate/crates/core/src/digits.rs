//! Base-b digit expansions and the weight statistics σ and ρ.
//!
//! For t = Σ aᵢ·bⁱ with digits aᵢ ∈ [0, b-1]:
//! * the b-weight is σ_b(t) = Σ aᵢ,
//! * ρ_p(t) = Π aᵢ! (base p), always coprime to p since every digit is < p.
//!
//! All values are arbitrary-precision; q^ℓ - 1 overflows machine words
//! almost immediately at the levels the solvability search visits.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::{Error, Result};

/// A base-b expansion of a non-negative integer, least-significant digit
/// first, zero-padded to `width`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigitExpansion {
    value: BigUint,
    base: BigUint,
    digits: Vec<BigUint>,
}

impl DigitExpansion {
    pub fn value(&self) -> &BigUint {
        &self.value
    }

    pub fn base(&self) -> &BigUint {
        &self.base
    }

    /// Digits in [0, base-1], least-significant first.
    pub fn digits(&self) -> &[BigUint] {
        &self.digits
    }

    pub fn width(&self) -> usize {
        self.digits.len()
    }

    /// Σ digits[k]·base^k; the inverse of [`expand`].
    pub fn recompose(&self) -> BigUint {
        let mut acc = BigUint::zero();
        for d in self.digits.iter().rev() {
            acc = acc * &self.base + d;
        }
        acc
    }
}

/// Expand `t` in base `base`, optionally zero-padded to `width` digits.
///
/// Without `width` the expansion has max(1, minimal significant length)
/// digits, so 0 expands to the single digit [0].
pub fn expand(t: &BigUint, base: &BigUint, width: Option<usize>) -> Result<DigitExpansion> {
    if *base < BigUint::from(2u32) {
        return Err(Error::Range(format!("digit base must be >= 2, got {base}")));
    }
    let mut digits = Vec::new();
    let mut rest = t.clone();
    while !rest.is_zero() {
        let (q, r) = rest.div_rem(base);
        digits.push(r);
        rest = q;
    }
    if digits.is_empty() {
        digits.push(BigUint::zero());
    }
    if let Some(w) = width {
        if digits.len() > w {
            return Err(Error::Range(format!(
                "width {w} too small: {t} needs {} base-{base} digits",
                digits.len()
            )));
        }
        digits.resize(w, BigUint::zero());
    }
    Ok(DigitExpansion {
        value: t.clone(),
        base: base.clone(),
        digits,
    })
}

/// The base-b digit sum σ_b(t); zero iff t = 0.
pub fn weight(t: &BigUint, base: &BigUint) -> BigUint {
    let mut acc = BigUint::zero();
    let mut rest = t.clone();
    while !rest.is_zero() {
        let (q, r) = rest.div_rem(base);
        acc += r;
        rest = q;
    }
    acc
}

/// ρ_p(t) = Π (base-p digits of t)!, a p-adic unit.
pub fn rho(t: &BigUint, p: &BigUint) -> BigUint {
    let mut acc = BigUint::one();
    let mut rest = t.clone();
    while !rest.is_zero() {
        let (q, r) = rest.div_rem(p);
        acc *= factorial(&r);
        rest = q;
    }
    acc
}

fn factorial(n: &BigUint) -> BigUint {
    let mut acc = BigUint::one();
    let mut k = BigUint::one();
    while k <= *n {
        acc *= &k;
        k += 1u32;
    }
    acc
}

/// σ_b of a vector: the sum of the per-coordinate digit sums.
pub fn vector_weight(u: &[BigUint], base: &BigUint) -> BigUint {
    u.iter().map(|t| weight(t, base)).sum()
}

/// Machine-word digit sum, for enumeration loops whose bounds are
/// budget-checked to fit u64.
pub(crate) fn weight_u64(mut t: u64, base: u64) -> u64 {
    debug_assert!(base >= 2);
    let mut acc = 0;
    while t > 0 {
        acc += t % base;
        t /= base;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    #[test]
    fn expand_examples() {
        let e = expand(&big(6), &big(2), None).unwrap();
        assert_eq!(e.digits(), &[big(0), big(1), big(1)]);
        assert_eq!(e.width(), 3);

        let e = expand(&big(0), &big(7), None).unwrap();
        assert_eq!(e.digits(), &[big(0)]);

        let e = expand(&big(8), &big(3), Some(3)).unwrap();
        assert_eq!(e.digits(), &[big(2), big(2), big(0)]);
    }

    #[test]
    fn expand_width_too_small() {
        assert!(matches!(
            expand(&big(8), &big(3), Some(1)),
            Err(Error::Range(_))
        ));
    }

    #[test]
    fn expand_bad_base() {
        assert!(expand(&big(5), &big(1), None).is_err());
    }

    #[test]
    fn weight_examples() {
        assert_eq!(weight(&big(4), &big(7)), big(4));
        assert_eq!(weight(&big(6), &big(3)), big(2));
        // q^ℓ - 1 has all digits q-1: weight(8, 3) = 2·2
        assert_eq!(weight(&big(8), &big(3)), big(4));
        assert_eq!(weight(&big(0), &big(5)), big(0));
    }

    #[test]
    fn rho_examples() {
        assert_eq!(rho(&big(4), &big(7)), big(24));
        // 7 = 21₃ → 2!·1!
        assert_eq!(rho(&big(7), &big(3)), big(2));
        assert_eq!(rho(&big(0), &big(5)), big(1));
    }

    #[test]
    fn vector_weight_examples() {
        assert_eq!(vector_weight(&[big(0), big(2)], &big(7)), big(2));
        assert_eq!(vector_weight(&[], &big(5)), big(0));
        assert_eq!(vector_weight(&[big(4)], &big(7)), big(4));
    }

    #[test]
    fn weight_u64_matches_big() {
        for t in 0..2000u64 {
            for b in [2u64, 3, 5, 7, 9] {
                assert_eq!(weight_u64(t, b), weight(&big(t), &big(b)).try_into().unwrap());
            }
        }
    }

    proptest! {
        // carries only decrease the digit sum
        #[test]
        fn weight_subadditive(a in 0u64..1u64 << 40, b in 0u64..1u64 << 40,
                              p in prop::sample::select(vec![2u64, 3, 5, 7, 11, 13])) {
            let (pa, pb) = (weight(&big(a), &big(p)), weight(&big(b), &big(p)));
            prop_assert!(weight(&big(a + b), &big(p)) <= pa + pb);
        }

        #[test]
        fn expand_round_trip(t in 0u64..1u64 << 48, base in 2u64..64, pad in 0usize..4) {
            let e = expand(&big(t), &big(base), None).unwrap();
            prop_assert_eq!(e.recompose(), big(t));
            let w = e.width() + pad;
            let e = expand(&big(t), &big(base), Some(w)).unwrap();
            prop_assert_eq!(e.width(), w);
            prop_assert_eq!(e.recompose(), big(t));
            prop_assert!(e.digits().iter().all(|d| *d < big(base)));
        }

        // σ_p(t) ≡ t mod (p-1)
        #[test]
        fn weight_congruent_mod_p_minus_1(t in 0u64..1u64 << 48,
                                          p in prop::sample::select(vec![3u64, 5, 7, 11, 13])) {
            let w: u64 = weight(&big(t), &big(p)).try_into().unwrap();
            prop_assert_eq!(w % (p - 1), t % (p - 1));
        }

        // every base-p digit is < p, so ρ is coprime to p
        #[test]
        fn rho_is_p_unit(t in 0u64..1u64 << 48,
                         p in prop::sample::select(vec![2u64, 3, 5, 7, 11, 13])) {
            let r = rho(&big(t), &big(p));
            prop_assert!(!(r % big(p)).is_zero());
        }
    }
}
