//! Finite fields F_{p^d} with deterministic defining polynomials, and the
//! tower F_p ⊆ F_q ⊆ F_{q^ℓ} with an explicit norm-compatible embedding.
//!
//! Defining polynomials are searched in the Conway word order (the
//! alternating-sign coefficient tuple, constant term last) for the first
//! monic polynomial whose canonical root x is primitive; the top field of
//! a tower additionally requires P_f(G^{(q^ℓ-1)/(q-1)}) = 0, so that the
//! canonical generator of F_q embeds as a norm of the top generator.
//! This reproduces the classical Conway polynomials on the small fields
//! used here (x²+2x+2 for F_9, x³+x+1 for F_8, x - g in degree 1).

use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::primes::{factor_u64, is_prime_u64};
use crate::{Budgets, Error, Result};

/// Which field an element belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldTag {
    pub p: u64,
    pub degree: u32,
}

/// Coordinates over F_p in the power basis of the defining polynomial.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldElement {
    tag: FieldTag,
    coords: Vec<u64>,
}

impl FieldElement {
    pub fn tag(&self) -> FieldTag {
        self.tag
    }

    pub fn coords(&self) -> &[u64] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }
}

/// F_{p^d} = F_p[x]/(P) for the canonical monic P of degree d.
#[derive(Debug, Clone)]
pub struct Fq {
    p: u64,
    degree: usize,
    /// c_0..c_{d-1} of P = x^d + c_{d-1}x^{d-1} + … + c_0.
    modulus: Vec<u64>,
    /// p^d - 1.
    unit_order: u64,
    unit_factors: Vec<(u64, u32)>,
    /// Tr(x^k) for k < d, so traces to F_p are a dot product.
    trace_coeffs: Vec<u64>,
    dlog_table: Arc<OnceLock<Vec<u32>>>,
    bsgs_table: Arc<OnceLock<HashMap<Vec<u64>, u64>>>,
}

impl Fq {
    /// The canonical field of order p^degree.
    pub fn new(p: u64, degree: usize, budgets: &Budgets) -> Result<Fq> {
        check_field_size(p, degree, budgets)?;
        let modulus = search_polynomial(p, degree, None)
            .ok_or_else(|| Error::State(format!("no primitive polynomial of degree {degree} over F_{p}")))?;
        Ok(Self::from_modulus(p, modulus))
    }

    /// The canonical degree-d field whose generator G satisfies
    /// P_base(G^{(p^d-1)/(p^e-1)}) = 0 for the given base field.
    pub fn new_compatible(p: u64, degree: usize, base: &Fq, budgets: &Budgets) -> Result<Fq> {
        check_field_size(p, degree, budgets)?;
        assert_eq!(base.p, p);
        assert_eq!(degree % base.degree, 0, "base degree must divide top degree");
        let modulus = search_polynomial(p, degree, Some(base))
            .ok_or_else(|| Error::State(format!("no compatible primitive polynomial of degree {degree} over F_{p}")))?;
        Ok(Self::from_modulus(p, modulus))
    }

    fn from_modulus(p: u64, modulus: Vec<u64>) -> Fq {
        let degree = modulus.len();
        let unit_order = pow_checked(p, degree as u32).expect("budget-checked") - 1;
        let unit_factors = factor_u64(unit_order);
        let trace_coeffs = newton_trace_coeffs(p, &modulus);
        Fq {
            p,
            degree,
            modulus,
            unit_order,
            unit_factors,
            trace_coeffs,
            dlog_table: Arc::new(OnceLock::new()),
            bsgs_table: Arc::new(OnceLock::new()),
        }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn tag(&self) -> FieldTag {
        FieldTag { p: self.p, degree: self.degree as u32 }
    }

    /// Coefficients c_0..c_{d-1} of the defining polynomial.
    pub fn modulus_coeffs(&self) -> &[u64] {
        &self.modulus
    }

    pub fn order(&self) -> u64 {
        self.unit_order + 1
    }

    /// p^d - 1, the order of the unit group.
    pub fn unit_order(&self) -> u64 {
        self.unit_order
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement { tag: self.tag(), coords: vec![0; self.degree] }
    }

    pub fn one(&self) -> FieldElement {
        self.from_int(1)
    }

    pub fn from_int(&self, k: u64) -> FieldElement {
        let mut coords = vec![0; self.degree];
        coords[0] = k % self.p;
        FieldElement { tag: self.tag(), coords }
    }

    /// Element from raw coordinates (entries reduced mod p, padded to d).
    pub fn from_coords(&self, coords: &[u64]) -> Result<FieldElement> {
        if coords.len() > self.degree {
            return Err(Error::Range(format!(
                "{} coordinates for a degree-{} field",
                coords.len(),
                self.degree
            )));
        }
        let mut c = vec![0; self.degree];
        for (i, x) in coords.iter().enumerate() {
            c[i] = x % self.p;
        }
        Ok(FieldElement { tag: self.tag(), coords: c })
    }

    /// The canonical primitive root: the class of x (which in degree 1
    /// is the least primitive root of F_p).
    pub fn generator(&self) -> FieldElement {
        if self.degree == 1 {
            // x ≡ -c_0
            self.from_int(self.p - self.modulus[0] % self.p)
        } else {
            let mut coords = vec![0; self.degree];
            coords[1] = 1;
            FieldElement { tag: self.tag(), coords }
        }
    }

    fn check(&self, a: &FieldElement) {
        debug_assert_eq!(a.tag, self.tag(), "element from a different field");
    }

    pub fn add(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        self.check(a);
        self.check(b);
        let coords = a
            .coords
            .iter()
            .zip(&b.coords)
            .map(|(x, y)| (x + y) % self.p)
            .collect();
        FieldElement { tag: self.tag(), coords }
    }

    pub fn neg(&self, a: &FieldElement) -> FieldElement {
        self.check(a);
        let coords = a.coords.iter().map(|&x| (self.p - x) % self.p).collect();
        FieldElement { tag: self.tag(), coords }
    }

    pub fn sub(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        self.check(a);
        self.check(b);
        let coords = poly_mulmod(self.p, &self.modulus, &a.coords, &b.coords);
        FieldElement { tag: self.tag(), coords }
    }

    /// Multiplication by the class of x: a coefficient shift plus one
    /// reduction step, O(d).
    pub fn mul_by_x(&self, a: &FieldElement) -> FieldElement {
        self.check(a);
        let d = self.degree;
        let lead = a.coords[d - 1];
        let mut coords = vec![0; d];
        for i in (1..d).rev() {
            coords[i] = a.coords[i - 1];
        }
        if lead != 0 {
            for i in 0..d {
                coords[i] = (coords[i] + (self.p - self.modulus[i]) % self.p * lead) % self.p;
            }
        }
        FieldElement { tag: self.tag(), coords }
    }

    pub fn pow(&self, a: &FieldElement, mut e: u128) -> FieldElement {
        self.check(a);
        let mut acc = self.one();
        let mut base = a.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    pub fn pow_big(&self, a: &FieldElement, e: &BigUint) -> FieldElement {
        if a.is_zero() {
            return if e == &BigUint::from(0u32) { self.one() } else { self.zero() };
        }
        let reduced = (e % BigUint::from(self.unit_order))
            .to_u128()
            .expect("reduced exponent fits");
        self.pow(a, reduced)
    }

    pub fn inv(&self, a: &FieldElement) -> Result<FieldElement> {
        self.check(a);
        if a.is_zero() {
            return Err(Error::Domain("inversion of zero".into()));
        }
        Ok(self.pow(a, (self.unit_order - 1) as u128))
    }

    /// Tr_{F_{p^d}/F_p} as a value in [0, p).
    pub fn trace_to_prime(&self, a: &FieldElement) -> u64 {
        self.check(a);
        let mut acc: u128 = 0;
        for (c, t) in a.coords.iter().zip(&self.trace_coeffs) {
            acc += (*c as u128) * (*t as u128);
        }
        (acc % self.p as u128) as u64
    }

    /// Mixed-radix encoding Σ coords[i]·p^i, a bijection onto [0, p^d).
    pub fn encode(&self, a: &FieldElement) -> u64 {
        self.check(a);
        let mut acc = 0u64;
        for c in a.coords.iter().rev() {
            acc = acc * self.p + c;
        }
        acc
    }

    pub fn decode(&self, mut idx: u64) -> FieldElement {
        let mut coords = vec![0; self.degree];
        for c in coords.iter_mut() {
            *c = idx % self.p;
            idx /= self.p;
        }
        debug_assert_eq!(idx, 0);
        FieldElement { tag: self.tag(), coords }
    }

    /// Discrete log w.r.t. the canonical generator: full table for small
    /// fields, baby-step/giant-step above the table budget.
    pub fn dlog(&self, a: &FieldElement, budgets: &Budgets) -> Result<u64> {
        self.check(a);
        if a.is_zero() {
            return Err(Error::Domain("discrete log of zero".into()));
        }
        if (self.order() as u128) <= budgets.dlog_table {
            let table = self.dlog_table.get_or_init(|| self.build_dlog_table());
            let v = table[self.encode(a) as usize];
            debug_assert_ne!(v, u32::MAX);
            return Ok(v as u64);
        }
        // baby-step giant-step with a cached baby table
        let m = (self.unit_order as f64).sqrt().ceil() as u64 + 1;
        let baby = self.bsgs_table.get_or_init(|| {
            let mut map = HashMap::with_capacity(m as usize);
            let mut cur = self.one();
            for j in 0..m {
                map.entry(cur.coords.clone()).or_insert(j);
                cur = self.mul(&cur, &self.generator());
            }
            map
        });
        let giant = self.pow(
            &self.inv(&self.generator()).expect("generator is a unit"),
            m as u128,
        );
        let mut cur = a.clone();
        for i in 0..=m {
            if let Some(&j) = baby.get(&cur.coords) {
                return Ok((i * m + j) % self.unit_order);
            }
            cur = self.mul(&cur, &giant);
        }
        Err(Error::State("BSGS failed to find a discrete log".into()))
    }

    fn build_dlog_table(&self) -> Vec<u32> {
        let mut table = vec![u32::MAX; self.order() as usize];
        let g = self.generator();
        let mut cur = self.one();
        for e in 0..self.unit_order {
            table[self.encode(&cur) as usize] = e as u32;
            cur = self.mul(&cur, &g);
        }
        debug_assert_eq!(cur, self.one());
        table
    }

    /// Order of the canonical root is exactly p^d - 1 (true by search).
    fn canonical_root_is_primitive(&self) -> bool {
        element_order_is_maximal(self.p, &self.modulus, self.unit_order, &self.unit_factors)
    }
}

fn check_field_size(p: u64, degree: usize, budgets: &Budgets) -> Result<()> {
    if !is_prime_u64(p) {
        return Err(Error::Invalid(format!("p = {p} is not prime")));
    }
    if degree == 0 {
        return Err(Error::Invalid("field degree must be >= 1".into()));
    }
    let needed: u128 = (p as u128)
        .checked_pow(degree as u32)
        .ok_or(Error::Budget { what: "field order", needed: u128::MAX, limit: budgets.field_order })?;
    budgets.check("field order", needed, budgets.field_order)?;
    if needed > u64::MAX as u128 / 2 {
        return Err(Error::Budget { what: "field order", needed, limit: u64::MAX as u128 / 2 });
    }
    Ok(())
}

fn pow_checked(p: u64, e: u32) -> Option<u64> {
    (p as u128).checked_pow(e).and_then(|v| u64::try_from(v).ok())
}

/// Tr(x^k) for k < d via Newton's identities on the power sums of the
/// roots of the defining polynomial.
fn newton_trace_coeffs(p: u64, modulus: &[u64]) -> Vec<u64> {
    let d = modulus.len();
    let mut s = vec![0u64; d];
    s[0] = (d as u64) % p;
    for k in 1..d {
        // s_k + Σ_{i=1}^{k-1} c_{d-i}·s_{k-i} + k·c_{d-k} = 0
        let mut acc = ((k as u128) * (modulus[d - k] as u128)) % p as u128;
        for i in 1..k {
            acc = (acc + (modulus[d - i] as u128) * (s[k - i] as u128)) % p as u128;
        }
        s[k] = ((p as u128 - acc) % p as u128) as u64;
    }
    s
}

fn poly_mulmod(p: u64, modulus: &[u64], a: &[u64], b: &[u64]) -> Vec<u64> {
    let d = modulus.len();
    let mut tmp = vec![0u128; 2 * d - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            tmp[i + j] = (tmp[i + j] + (x as u128) * (y as u128)) % p as u128;
        }
    }
    // fold x^{d+k} = -(Σ c_i x^i)·x^k
    for k in (d..2 * d - 1).rev() {
        let lead = tmp[k];
        if lead == 0 {
            continue;
        }
        tmp[k] = 0;
        for i in 0..d {
            let c = (p - modulus[i] % p) % p;
            tmp[k - d + i] = (tmp[k - d + i] + lead * (c as u128)) % p as u128;
        }
    }
    tmp[..d].iter().map(|&x| x as u64).collect()
}

/// Does the class of x have multiplicative order exactly p^d - 1 in
/// F_p[x]/(P)?  That forces P irreducible and x primitive at once.
fn element_order_is_maximal(p: u64, modulus: &[u64], unit_order: u64, factors: &[(u64, u32)]) -> bool {
    let d = modulus.len();
    let mut x = vec![0u64; d];
    if d == 1 {
        x[0] = (p - modulus[0] % p) % p;
    } else {
        x[1] = 1;
    }
    let one = {
        let mut o = vec![0u64; d];
        o[0] = 1;
        o
    };
    let powmod = |e: u64| -> Vec<u64> {
        let mut acc = one.clone();
        let mut base = x.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = poly_mulmod(p, modulus, &acc, &base);
            }
            base = poly_mulmod(p, modulus, &base, &base);
            e >>= 1;
        }
        acc
    };
    if powmod(unit_order) != one {
        return false;
    }
    factors.iter().all(|&(r, _)| powmod(unit_order / r) != one)
}

/// First polynomial in Conway word order whose canonical root is
/// primitive and (when `base` is given) whose generator powers down to a
/// root of the base polynomial.
fn search_polynomial(p: u64, degree: usize, base: Option<&Fq>) -> Option<Vec<u64>> {
    let unit_order = pow_checked(p, degree as u32)? - 1;
    let factors = factor_u64(unit_order);
    // word (a_{d-1}, …, a_0), coefficient c_i = (-1)^{d-i}·a_i mod p
    let mut word = vec![0u64; degree];
    loop {
        let mut modulus = vec![0u64; degree];
        for i in 0..degree {
            let sign_flip = (degree - i) % 2 == 1;
            let a = word[degree - 1 - i];
            // word index degree-1-i holds a_i
            let a_i = a;
            modulus[i] = if sign_flip && a_i != 0 { p - a_i } else { a_i };
        }
        if modulus[0] != 0 && element_order_is_maximal(p, &modulus, unit_order, &factors) {
            let compatible = match base {
                None => true,
                Some(base_fq) => {
                    let ratio = unit_order / base_fq.unit_order();
                    generator_power_is_base_root(p, &modulus, ratio, base_fq)
                }
            };
            if compatible {
                return Some(modulus);
            }
        }
        // increment the word lexicographically, a_{d-1} most significant
        let mut idx = degree;
        loop {
            if idx == 0 {
                return None;
            }
            idx -= 1;
            word[idx] += 1;
            if word[idx] < p {
                break;
            }
            word[idx] = 0;
        }
        // idx runs from least-significant side: word[degree-1] is a_0
        let _ = idx;
    }
}

/// Check P_base(x^ratio) ≡ 0 in F_p[x]/(modulus).
fn generator_power_is_base_root(p: u64, modulus: &[u64], ratio: u64, base: &Fq) -> bool {
    let d = modulus.len();
    let mut x = vec![0u64; d];
    if d == 1 {
        x[0] = (p - modulus[0] % p) % p;
    } else {
        x[1] = 1;
    }
    let mut y = {
        let mut acc = vec![0u64; d];
        acc[0] = 1;
        let mut base_pow = x;
        let mut e = ratio;
        while e > 0 {
            if e & 1 == 1 {
                acc = poly_mulmod(p, modulus, &acc, &base_pow);
            }
            base_pow = poly_mulmod(p, modulus, &base_pow, &base_pow);
            e >>= 1;
        }
        acc
    };
    // Horner: P_base(y) = y^e + c_{e-1}y^{e-1} + … + c_0
    let e = base.degree();
    let mut acc = y.clone(); // y^1 coefficient accumulator starts as y + c_{e-1}
    acc[0] = (acc[0] + base.modulus_coeffs()[e - 1]) % p;
    for k in (0..e - 1).rev() {
        acc = poly_mulmod(p, modulus, &acc, &y);
        acc[0] = (acc[0] + base.modulus_coeffs()[k]) % p;
    }
    let _ = &mut y;
    acc.iter().all(|&c| c == 0)
}

/// The tower F_p ⊆ F_q ⊆ F_{q^ℓ} with the embedding g ↦ G^{(q^ℓ-1)/(q-1)}.
#[derive(Debug, Clone)]
pub struct FieldTower {
    p: u64,
    f: u32,
    ell: u32,
    prime: Fq,
    base: Fq,
    top: Fq,
}

/// Build the tower for (p, f, ℓ); deterministic and verified.
pub fn build_tower(p: u64, f: u32, ell: u32, budgets: &Budgets) -> Result<FieldTower> {
    if f == 0 || ell == 0 {
        return Err(Error::Invalid("tower degrees must be >= 1".into()));
    }
    let prime = Fq::new(p, 1, budgets)?;
    let base = if f == 1 { prime.clone() } else { Fq::new(p, f as usize, budgets)? };
    let top_degree = (f * ell) as usize;
    let top = if ell == 1 {
        base.clone()
    } else {
        Fq::new_compatible(p, top_degree, &base, budgets)?
    };
    let tower = FieldTower { p, f, ell, prime, base, top };
    debug_assert!(tower.top.canonical_root_is_primitive());
    Ok(tower)
}

impl FieldTower {
    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn f(&self) -> u32 {
        self.f
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    pub fn prime_field(&self) -> &Fq {
        &self.prime
    }

    /// F_q.
    pub fn base_field(&self) -> &Fq {
        &self.base
    }

    /// F_{q^ℓ}.
    pub fn top_field(&self) -> &Fq {
        &self.top
    }

    /// (q^ℓ-1)/(q-1), the exponent realizing the embedding.
    pub fn embed_exponent(&self) -> u64 {
        self.top.unit_order() / self.base.unit_order()
    }

    /// Embed F_q into F_{q^ℓ}: 0 ↦ 0 and g^k ↦ G^{k·(q^ℓ-1)/(q-1)}.
    pub fn embed(&self, a: &FieldElement, budgets: &Budgets) -> Result<FieldElement> {
        debug_assert_eq!(a.tag(), self.base.tag());
        if self.ell == 1 {
            return Ok(a.clone());
        }
        if a.is_zero() {
            return Ok(self.top.zero());
        }
        let k = self.base.dlog(a, budgets)?;
        Ok(self
            .top
            .pow(&self.top.generator(), (k as u128) * (self.embed_exponent() as u128)))
    }

    /// Un-embed an element of the top field known to lie in F_q.
    pub fn project_to_base(&self, a: &FieldElement, budgets: &Budgets) -> Result<FieldElement> {
        debug_assert_eq!(a.tag(), self.top.tag());
        if self.ell == 1 {
            return Ok(a.clone());
        }
        if a.is_zero() {
            return Ok(self.base.zero());
        }
        let e = self.top.dlog(a, budgets)?;
        let r = self.embed_exponent();
        if e % r != 0 {
            return Err(Error::Domain("element does not lie in the base field".into()));
        }
        Ok(self.base.pow(&self.base.generator(), (e / r) as u128))
    }

    /// Tr down to F_q or F_p: Σ_k x^{(q_t)^k} over the relative Frobenius
    /// orbit; the result is verified to be Frobenius-fixed.
    pub fn trace_to_base(
        &self,
        a: &FieldElement,
        target: FieldTag,
        budgets: &Budgets,
    ) -> Result<FieldElement> {
        let target_fq = self.target_field(target)?;
        debug_assert_eq!(a.tag(), self.top.tag());
        let qt = pow_checked(self.p, target_fq.degree() as u32).expect("subfield order fits") as u128;
        let ratio = self.top.degree() / target_fq.degree();
        let mut acc = self.top.zero();
        let mut cur = a.clone();
        for _ in 0..ratio {
            acc = self.top.add(&acc, &cur);
            cur = self.top.pow(&cur, qt);
        }
        debug_assert_eq!(cur, *a);
        debug_assert_eq!(self.top.pow(&acc, qt), acc, "trace must be Frobenius-fixed");
        self.land_in(acc, target_fq, budgets)
    }

    /// Norm down to F_q or F_p: for nonzero x this is x^{(Q-1)/(q_t-1)}.
    pub fn norm_to_base(
        &self,
        a: &FieldElement,
        target: FieldTag,
        budgets: &Budgets,
    ) -> Result<FieldElement> {
        let target_fq = self.target_field(target)?;
        debug_assert_eq!(a.tag(), self.top.tag());
        if a.is_zero() {
            return Ok(target_fq.zero());
        }
        let qt = pow_checked(self.p, target_fq.degree() as u32).expect("subfield order fits");
        let exp = (self.top.order() - 1) / (qt - 1);
        let acc = self.top.pow(a, exp as u128);
        self.land_in(acc, target_fq, budgets)
    }

    fn target_field(&self, target: FieldTag) -> Result<&Fq> {
        if target == self.base.tag() {
            Ok(&self.base)
        } else if target == self.prime.tag() {
            Ok(&self.prime)
        } else {
            Err(Error::Domain(format!(
                "incompatible target field tag {target:?} for this tower"
            )))
        }
    }

    fn land_in(&self, a: FieldElement, target: &Fq, budgets: &Budgets) -> Result<FieldElement> {
        if target.degree() == self.top.degree() {
            return Ok(a);
        }
        if target.degree() == 1 {
            // F_p sits as the constants of the power basis
            if a.coords()[1..].iter().any(|&c| c != 0) {
                return Err(Error::Domain("value is not a prime-field constant".into()));
            }
            return target.from_coords(&[a.coords()[0]]);
        }
        self.project_to_base(&a, budgets)
    }
}
