//! The p-adic rings behind the sums: the unramified extension
//! W = Z_p[ζ_{q-1}] mod p^K (coordinates in the lifted power basis of the
//! field's defining polynomial) and the ramified tower O = W[π]/E(π) with
//! E(π) = ((1+π)^p - 1)/π, so ζ_p = 1 + π and p ~ π^{p-1}.
//!
//! Elements carry their own precision.  W-elements are exact mod p^prec;
//! tower elements additionally carry a π-adic precision prec_pi (≤
//! (p-1)·prec of the coordinates), which divisions by p and π decrease.
//!
//! v_π(Σ w_i π^i) = min_i (i + (p-1)·v_p(w_i)): the terms have pairwise
//! distinct valuations mod p-1, so the ultrametric minimum is exact, and
//! v_p of a W-element is the minimum over its power-basis coordinates
//! because the basis stays a basis mod p (the extension is unramified;
//! cross-checked against norm-based valuations in the tests).

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::finite_field::{FieldElement, Fq};
use crate::{Error, Result, Valuation};

/// Z_p[ζ_{q-1}] truncated at per-element precision p^prec.
#[derive(Debug, Clone)]
pub struct UnramifiedRing {
    p: u64,
    degree: usize,
    /// Naive integer lift of the field modulus c_0..c_{d-1}.
    modulus: Vec<BigUint>,
    field: Fq,
}

/// Coordinates mod p^prec in the lifted power basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnramifiedElement {
    coords: Vec<BigUint>,
    prec: usize,
}

impl UnramifiedElement {
    pub fn coords(&self) -> &[BigUint] {
        &self.coords
    }

    pub fn prec(&self) -> usize {
        self.prec
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }
}

impl UnramifiedRing {
    pub fn new(field: &Fq) -> UnramifiedRing {
        UnramifiedRing {
            p: field.p(),
            degree: field.degree(),
            modulus: field.modulus_coeffs().iter().map(|&c| BigUint::from(c)).collect(),
            field: field.clone(),
        }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn field(&self) -> &Fq {
        &self.field
    }

    pub fn pk(&self, prec: usize) -> BigUint {
        BigUint::from(self.p).pow(prec as u32)
    }

    pub fn zero(&self, prec: usize) -> UnramifiedElement {
        UnramifiedElement { coords: vec![BigUint::zero(); self.degree], prec }
    }

    pub fn one(&self, prec: usize) -> UnramifiedElement {
        self.from_biguint(&BigUint::one(), prec)
    }

    pub fn from_biguint(&self, x: &BigUint, prec: usize) -> UnramifiedElement {
        let mut coords = vec![BigUint::zero(); self.degree];
        coords[0] = x % self.pk(prec);
        UnramifiedElement { coords, prec }
    }

    pub fn from_bigint(&self, x: &BigInt, prec: usize) -> UnramifiedElement {
        let pk = BigInt::from(self.pk(prec));
        let r = x.mod_floor(&pk).to_biguint().expect("mod_floor non-negative");
        self.from_biguint(&r, prec)
    }

    /// Naive (digit-wise) lift of a residue-field element.
    pub fn lift(&self, a: &FieldElement, prec: usize) -> UnramifiedElement {
        debug_assert_eq!(a.tag(), self.field.tag());
        UnramifiedElement {
            coords: a.coords().iter().map(|&c| BigUint::from(c) % self.pk(prec)).collect(),
            prec,
        }
    }

    /// Reduction mod p back into the residue field.
    pub fn reduce(&self, a: &UnramifiedElement) -> FieldElement {
        let coords: Vec<u64> = a
            .coords
            .iter()
            .map(|c| (c % self.p).try_into().expect("residue fits"))
            .collect();
        self.field.from_coords(&coords).expect("coords have field length")
    }

    fn prec_min(a: &UnramifiedElement, b: &UnramifiedElement) -> usize {
        a.prec.min(b.prec)
    }

    fn renorm(&self, mut coords: Vec<BigUint>, prec: usize) -> UnramifiedElement {
        let pk = self.pk(prec);
        for c in coords.iter_mut() {
            *c %= &pk;
        }
        UnramifiedElement { coords, prec }
    }

    pub fn add(&self, a: &UnramifiedElement, b: &UnramifiedElement) -> UnramifiedElement {
        let prec = Self::prec_min(a, b);
        let coords = a.coords.iter().zip(&b.coords).map(|(x, y)| x + y).collect();
        self.renorm(coords, prec)
    }

    pub fn neg(&self, a: &UnramifiedElement) -> UnramifiedElement {
        let pk = self.pk(a.prec);
        let coords = a.coords.iter().map(|x| (&pk - x) % &pk).collect();
        UnramifiedElement { coords, prec: a.prec }
    }

    pub fn sub(&self, a: &UnramifiedElement, b: &UnramifiedElement) -> UnramifiedElement {
        let prec = Self::prec_min(a, b);
        let pk = self.pk(prec);
        let coords = a
            .coords
            .iter()
            .zip(&b.coords)
            .map(|(x, y)| (x % &pk + (&pk - y % &pk)) % &pk)
            .collect();
        UnramifiedElement { coords, prec }
    }

    pub fn mul(&self, a: &UnramifiedElement, b: &UnramifiedElement) -> UnramifiedElement {
        let prec = Self::prec_min(a, b);
        let pk = self.pk(prec);
        let d = self.degree;
        let mut tmp = vec![BigUint::zero(); 2 * d - 1];
        for (i, x) in a.coords.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coords.iter().enumerate() {
                tmp[i + j] = (&tmp[i + j] + x * y) % &pk;
            }
        }
        for k in (d..2 * d - 1).rev() {
            if tmp[k].is_zero() {
                continue;
            }
            let lead = std::mem::replace(&mut tmp[k], BigUint::zero());
            for i in 0..d {
                if self.modulus[i].is_zero() {
                    continue;
                }
                let sub = (&lead * &self.modulus[i]) % &pk;
                tmp[k - d + i] = (&tmp[k - d + i] + (&pk - sub)) % &pk;
            }
        }
        tmp.truncate(d);
        UnramifiedElement { coords: tmp, prec }
    }

    pub fn scale(&self, a: &UnramifiedElement, k: &BigUint) -> UnramifiedElement {
        let coords = a.coords.iter().map(|x| x * k).collect();
        self.renorm(coords, a.prec)
    }

    pub fn pow(&self, a: &UnramifiedElement, e: &BigUint) -> UnramifiedElement {
        let mut acc = self.one(a.prec);
        let mut base = a.clone();
        let bits = e.bits();
        for i in 0..bits {
            if e.bit(i) {
                acc = self.mul(&acc, &base);
            }
            if i + 1 < bits {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    /// min_i v_p(coord_i), exact below the element's precision.
    pub fn v_p(&self, a: &UnramifiedElement) -> Valuation {
        let mut best: Option<u64> = None;
        let p = BigUint::from(self.p);
        for c in &a.coords {
            if c.is_zero() {
                continue;
            }
            let mut v = 0u64;
            let mut x = c.clone();
            while (&x % &p).is_zero() {
                x /= &p;
                v += 1;
            }
            best = Some(best.map_or(v, |b| b.min(v)));
        }
        match best {
            Some(v) => Valuation::Exact(v),
            None => Valuation::AtLeast(a.prec as u64),
        }
    }

    /// The Teichmüller lift: the unique root of x^q = x reducing to `a`,
    /// reached by iterating x ↦ x^q from the naive lift.
    pub fn teichmuller(&self, a: &FieldElement, prec: usize) -> Result<UnramifiedElement> {
        if a.is_zero() {
            return Err(Error::Domain("Teichmüller lift of zero".into()));
        }
        let q = BigUint::from(self.field.order());
        let mut x = self.lift(a, prec);
        for _ in 0..prec {
            let next = self.pow(&x, &q);
            if next == x {
                break;
            }
            x = next;
        }
        debug_assert_eq!(self.pow(&x, &q), x);
        debug_assert_eq!(self.reduce(&x), *a);
        Ok(x)
    }

    /// Inverse of a unit (v_p = 0) by Newton iteration from the residue
    /// field inverse.
    pub fn invert_unit(&self, a: &UnramifiedElement) -> Result<UnramifiedElement> {
        let residue = self.reduce(a);
        if residue.is_zero() {
            return Err(Error::Domain("inversion of a non-unit".into()));
        }
        let inv0 = self.field.inv(&residue)?;
        let mut y = self.lift(&inv0, a.prec);
        let two = self.from_biguint(&BigUint::from(2u32), a.prec);
        let steps = usize::BITS - a.prec.leading_zeros();
        for _ in 0..=steps {
            let correction = self.sub(&two, &self.mul(a, &y));
            y = self.mul(&y, &correction);
        }
        debug_assert!(self.sub(&self.mul(a, &y), &self.one(a.prec)).is_zero());
        Ok(y)
    }

    /// Exact division by p: every coordinate must be divisible; the
    /// precision drops by one digit.
    pub fn div_exact_by_p(&self, a: &UnramifiedElement) -> Result<UnramifiedElement> {
        if a.prec == 0 {
            return Err(Error::Precision {
                context: "division by p".into(),
                needed: 1,
                have: 0,
            });
        }
        let p = BigUint::from(self.p);
        let mut coords = Vec::with_capacity(a.coords.len());
        for c in &a.coords {
            let (q, r) = c.div_rem(&p);
            if !r.is_zero() {
                return Err(Error::Domain("coordinate not divisible by p".into()));
            }
            coords.push(q);
        }
        Ok(UnramifiedElement { coords, prec: a.prec - 1 })
    }
}

/// The ramified quotient O = W[π]/E(π), elements as coefficients of
/// π^0..π^{p-2} with a π-adic precision.
#[derive(Debug, Clone)]
pub struct TowerRing {
    w: UnramifiedRing,
    /// C(p,1..p-1), the reduction π^{p-1} = -Σ C(p,j)·π^{j-1}.
    binomials: Vec<BigUint>,
}

#[derive(Debug, Clone)]
pub struct TowerElement {
    coeffs: Vec<UnramifiedElement>,
    prec_pi: usize,
}

impl TowerElement {
    pub fn coeffs(&self) -> &[UnramifiedElement] {
        &self.coeffs
    }

    /// π-adic precision: the value is known mod π^{prec_pi}.
    pub fn prec_pi(&self) -> usize {
        self.prec_pi
    }

    pub fn coord_prec(&self) -> usize {
        self.coeffs.iter().map(|c| c.prec()).min().unwrap_or(0)
    }
}

impl TowerRing {
    pub fn new(w: UnramifiedRing) -> TowerRing {
        let p = w.p();
        let mut binomials = Vec::with_capacity(p as usize - 1);
        let mut c = BigUint::one();
        for j in 1..p {
            // C(p, j) = C(p, j-1)·(p-j+1)/j
            c = c * BigUint::from(p - j + 1) / BigUint::from(j);
            binomials.push(c.clone());
        }
        TowerRing { w, binomials }
    }

    pub fn w(&self) -> &UnramifiedRing {
        &self.w
    }

    pub fn p(&self) -> u64 {
        self.w.p()
    }

    fn width(&self) -> usize {
        self.p() as usize - 1
    }

    fn full_pi_prec(&self, coord_prec: usize) -> usize {
        (self.p() as usize - 1) * coord_prec
    }

    pub fn zero(&self, prec: usize) -> TowerElement {
        TowerElement {
            coeffs: vec![self.w.zero(prec); self.width()],
            prec_pi: self.full_pi_prec(prec),
        }
    }

    pub fn one(&self, prec: usize) -> TowerElement {
        self.from_w(&self.w.one(prec))
    }

    /// A W-element as the π⁰ coefficient.
    pub fn from_w(&self, a: &UnramifiedElement) -> TowerElement {
        let mut out = self.zero(a.prec());
        out.coeffs[0] = a.clone();
        out
    }

    pub fn from_bigint(&self, x: &BigInt, prec: usize) -> TowerElement {
        self.from_w(&self.w.from_bigint(x, prec))
    }

    /// π itself (for p = 2 this reduces to the constant -2).
    pub fn pi(&self, prec: usize) -> TowerElement {
        self.pi_power(1, prec)
    }

    pub fn pi_power(&self, k: usize, prec: usize) -> TowerElement {
        let mut acc = self.one(prec);
        for _ in 0..k {
            acc = self.mul_by_pi(&acc);
        }
        acc
    }

    pub fn add(&self, a: &TowerElement, b: &TowerElement) -> TowerElement {
        let coeffs = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(x, y)| self.w.add(x, y))
            .collect();
        TowerElement { coeffs, prec_pi: a.prec_pi.min(b.prec_pi) }
    }

    pub fn sub(&self, a: &TowerElement, b: &TowerElement) -> TowerElement {
        let coeffs = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(x, y)| self.w.sub(x, y))
            .collect();
        TowerElement { coeffs, prec_pi: a.prec_pi.min(b.prec_pi) }
    }

    pub fn neg(&self, a: &TowerElement) -> TowerElement {
        TowerElement {
            coeffs: a.coeffs.iter().map(|x| self.w.neg(x)).collect(),
            prec_pi: a.prec_pi,
        }
    }

    /// Scale every coefficient by a W-element (e.g. a root of unity).
    pub fn scale_w(&self, a: &TowerElement, s: &UnramifiedElement) -> TowerElement {
        TowerElement {
            coeffs: a.coeffs.iter().map(|x| self.w.mul(x, s)).collect(),
            prec_pi: a.prec_pi.min(self.full_pi_prec(s.prec())),
        }
    }

    pub fn scale_int(&self, a: &TowerElement, k: &BigUint) -> TowerElement {
        TowerElement {
            coeffs: a.coeffs.iter().map(|x| self.w.scale(x, k)).collect(),
            prec_pi: a.prec_pi,
        }
    }

    pub fn mul(&self, a: &TowerElement, b: &TowerElement) -> TowerElement {
        let width = self.width();
        let prec = a.coord_prec().min(b.coord_prec());
        let mut tmp = vec![self.w.zero(prec); 2 * width - 1];
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                let prod = self.w.mul(x, y);
                tmp[i + j] = self.w.add(&tmp[i + j], &prod);
            }
        }
        self.reduce_pi_poly(tmp, a.prec_pi.min(b.prec_pi))
    }

    /// Fold π^{p-1+k} = -Σ_j C(p,j)·π^{j-1+k} until degree < p-1.
    fn reduce_pi_poly(&self, mut tmp: Vec<UnramifiedElement>, prec_pi: usize) -> TowerElement {
        let width = self.width();
        for k in (width..tmp.len()).rev() {
            if tmp[k].is_zero() {
                continue;
            }
            let lead = tmp[k].clone();
            tmp[k] = self.w.zero(lead.prec());
            for (j, c) in self.binomials.iter().enumerate() {
                // subtract C(p, j+1)·lead·π^{k-width+j}
                let sub = self.w.scale(&lead, c);
                let idx = k - width + j;
                tmp[idx] = self.w.sub(&tmp[idx], &sub);
            }
        }
        tmp.truncate(width);
        let coord_prec = tmp.iter().map(|c| c.prec()).min().unwrap_or(0);
        TowerElement {
            coeffs: tmp,
            prec_pi: prec_pi.min(self.full_pi_prec(coord_prec)),
        }
    }

    pub fn mul_by_pi(&self, a: &TowerElement) -> TowerElement {
        let width = self.width();
        let prec = a.coord_prec();
        let mut tmp = vec![self.w.zero(prec); width + 1];
        for (i, x) in a.coeffs.iter().enumerate() {
            tmp[i + 1] = x.clone();
        }
        self.reduce_pi_poly(tmp, a.prec_pi)
    }

    pub fn pow(&self, a: &TowerElement, e: &BigUint) -> TowerElement {
        let mut acc = self.one(a.coord_prec());
        acc.prec_pi = acc.prec_pi.min(a.prec_pi);
        let mut base = a.clone();
        let bits = e.bits();
        for i in 0..bits {
            if e.bit(i) {
                acc = self.mul(&acc, &base);
            }
            if i + 1 < bits {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    /// ζ_p^t = (1+π)^t.
    pub fn zeta_p_power(&self, t: u64) -> TowerElement {
        self.zeta_p_power_at(t, 1)
    }

    pub fn zeta_p_power_at(&self, t: u64, prec: usize) -> TowerElement {
        let one = self.one(prec);
        let base = self.add(&one, &self.pi(prec));
        self.pow(&base, &BigUint::from(t % self.p()))
    }

    /// v_π via the coordinate formula; exact below prec_pi, otherwise the
    /// "at least" marker at prec_pi.
    pub fn v_pi(&self, a: &TowerElement) -> Valuation {
        let p_minus_1 = self.width() as u64;
        let mut best_exact: Option<u64> = None;
        for (i, w) in a.coeffs.iter().enumerate() {
            if let Valuation::Exact(v) = self.w.v_p(w) {
                let cand = i as u64 + p_minus_1 * v;
                best_exact = Some(best_exact.map_or(cand, |b| b.min(cand)));
            }
        }
        match best_exact {
            Some(v) if (v as usize) < a.prec_pi => Valuation::Exact(v),
            _ => Valuation::AtLeast(a.prec_pi as u64),
        }
    }

    pub fn is_zero_to_precision(&self, a: &TowerElement) -> bool {
        matches!(self.v_pi(a), Valuation::AtLeast(_))
    }

    /// Inverse of a unit (v_π = 0) by Newton iteration.
    pub fn invert_unit(&self, a: &TowerElement) -> Result<TowerElement> {
        if self.v_pi(a) != Valuation::Exact(0) {
            return Err(Error::Domain("tower inversion requires v_π = 0".into()));
        }
        let residue = self.w.reduce(&a.coeffs[0]);
        let inv0 = self.w.field().inv(&residue)?;
        let prec = a.coord_prec();
        let mut y = self.from_w(&self.w.lift(&inv0, prec));
        y.prec_pi = y.prec_pi.min(a.prec_pi);
        let two = self.from_bigint(&BigInt::from(2), prec);
        let steps = usize::BITS - a.prec_pi.leading_zeros();
        for _ in 0..=steps {
            let correction = self.sub(&two, &self.mul(a, &y));
            y = self.mul(&y, &correction);
        }
        debug_assert!(self.is_zero_to_precision(&self.sub(&self.mul(a, &y), &self.one(prec))));
        Ok(y)
    }

    /// Exact division by p (coordinate-wise); costs one coordinate digit
    /// and p-1 of π-precision.
    pub fn div_exact_by_p(&self, a: &TowerElement) -> Result<TowerElement> {
        let coeffs = a
            .coeffs
            .iter()
            .map(|c| self.w.div_exact_by_p(c))
            .collect::<Result<Vec<_>>>()?;
        let coord_prec = coeffs.iter().map(|c| c.prec()).min().unwrap_or(0);
        let prec_pi = a
            .prec_pi
            .saturating_sub(self.width())
            .min(self.full_pi_prec(coord_prec));
        Ok(TowerElement { coeffs, prec_pi })
    }

    /// Exact division by π, using p/π = -(C(p,2) + C(p,3)π + … + π^{p-2});
    /// requires v_π ≥ 1.
    pub fn div_exact_by_pi(&self, a: &TowerElement) -> Result<TowerElement> {
        let head = self.w.div_exact_by_p(&a.coeffs[0]).map_err(|_| {
            Error::Domain("division by π requires v_π >= 1".into())
        })?;
        let prec = head.prec().min(a.coord_prec());
        // shifted part Σ_{i≥1} w_i π^{i-1}
        let mut coeffs: Vec<UnramifiedElement> = a.coeffs[1..]
            .iter()
            .map(|c| self.renorm_w(c, prec))
            .collect();
        coeffs.push(self.w.zero(prec));
        // minus (w_0/p)·(C(p,2) + C(p,3)π + … + C(p,p-1)π^{p-3} + π^{p-2}),
        // since p/π = -Σ_{j=2}^{p} C(p,j)·π^{j-2}
        for j in 1..self.width() {
            let c = &self.binomials[j]; // C(p, j+1)
            let sub = self.w.scale(&head, c);
            coeffs[j - 1] = self.w.sub(&coeffs[j - 1], &sub);
        }
        let last = self.width() - 1;
        coeffs[last] = self.w.sub(&coeffs[last], &head);
        let prec_pi = a
            .prec_pi
            .saturating_sub(1)
            .min(self.full_pi_prec(prec));
        Ok(TowerElement { coeffs, prec_pi })
    }

    fn renorm_w(&self, c: &UnramifiedElement, prec: usize) -> UnramifiedElement {
        let z = self.w.zero(prec);
        self.w.add(c, &z)
    }

    /// Exact division by a positive integer k = p^v·k'; k' is inverted as
    /// a unit, then v exact divisions by p.
    pub fn div_exact_by_int(&self, a: &TowerElement, k: &BigUint) -> Result<TowerElement> {
        if k.is_zero() {
            return Err(Error::Domain("division by zero".into()));
        }
        let p = BigUint::from(self.p());
        let mut unit = k.clone();
        let mut v = 0;
        while (&unit % &p).is_zero() {
            unit /= &p;
            v += 1;
        }
        let mut out = a.clone();
        if !unit.is_one() {
            let u = self.w.from_biguint(&unit, a.coord_prec());
            let u_inv = self.w.invert_unit(&u)?;
            out = self.scale_w(&out, &u_inv);
        }
        for _ in 0..v {
            out = self.div_exact_by_p(&out)?;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_field::Fq;
    use crate::Budgets;

    fn w_for(p: u64, d: usize) -> UnramifiedRing {
        UnramifiedRing::new(&Fq::new(p, d, &Budgets::default()).unwrap())
    }

    #[test]
    fn teichmuller_f7() {
        let w = w_for(7, 1);
        let f = w.field().clone();
        let t = w.teichmuller(&f.from_int(2), 2).unwrap();
        assert_eq!(t.coords()[0], BigUint::from(30u32));
        let t1 = w.teichmuller(&f.from_int(1), 2).unwrap();
        assert_eq!(t1.coords()[0], BigUint::from(1u32));
        let t6 = w.teichmuller(&f.from_int(6), 2).unwrap();
        assert_eq!(t6.coords()[0], BigUint::from(48u32));
        assert!(w.teichmuller(&f.zero(), 2).is_err());
    }

    #[test]
    fn teichmuller_is_multiplicative_and_has_order_q_minus_1() {
        for (p, d) in [(3u64, 2usize), (5, 1), (2, 3)] {
            let w = w_for(p, d);
            let f = w.field().clone();
            let g = f.generator();
            let prec = 6;
            let zeta = w.teichmuller(&g, prec).unwrap();
            let unit_order = f.unit_order();
            assert_eq!(w.pow(&zeta, &BigUint::from(unit_order)), w.one(prec));
            for (r, _) in crate::primes::factor_u64(unit_order) {
                assert_ne!(w.pow(&zeta, &BigUint::from(unit_order / r)), w.one(prec));
            }
            for (i, j) in [(1u64, 1u64), (2, 3), (5, 4)] {
                let a = f.pow(&g, i as u128);
                let b = f.pow(&g, j as u128);
                let lhs = w.mul(&w.teichmuller(&a, prec).unwrap(), &w.teichmuller(&b, prec).unwrap());
                let rhs = w.teichmuller(&f.mul(&a, &b), prec).unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn invert_unit_w() {
        let w = w_for(7, 1);
        let a = w.from_biguint(&BigUint::from(24u32), 2);
        let inv = w.invert_unit(&a).unwrap();
        assert_eq!(inv.coords()[0], BigUint::from(47u32));
        let one = w.one(3);
        assert_eq!(w.invert_unit(&one).unwrap(), one);
    }

    fn tower(p: u64, d: usize) -> TowerRing {
        TowerRing::new(w_for(p, d))
    }

    #[test]
    fn pi_valuations() {
        let t = tower(3, 1);
        let prec = 4;
        assert_eq!(t.v_pi(&t.pi(prec)), Valuation::Exact(1));
        let p_elem = t.from_bigint(&BigInt::from(3), prec);
        assert_eq!(t.v_pi(&p_elem), Valuation::Exact(2));
        // ζ_p - 1 = π
        let zp = t.zeta_p_power_at(1, prec);
        let diff = t.sub(&zp, &t.one(prec));
        assert_eq!(t.v_pi(&diff), Valuation::Exact(1));
        // zero is only bounded below
        assert_eq!(t.v_pi(&t.zero(prec)), Valuation::AtLeast(2 * prec as u64));
    }

    #[test]
    fn p2_tower_is_z2_with_pi_minus_2() {
        let t = tower(2, 1);
        let prec = 5;
        let pi = t.pi(prec);
        assert_eq!(pi.coeffs()[0].coords()[0], BigUint::from(30u32)); // -2 mod 32
        assert_eq!(t.v_pi(&pi), Valuation::Exact(1));
        let zeta = t.zeta_p_power_at(1, prec);
        assert_eq!(zeta.coeffs()[0].coords()[0], BigUint::from(31u32)); // -1
        assert!(t.is_zero_to_precision(&t.sub(&t.mul(&zeta, &zeta), &t.one(prec))));
    }

    #[test]
    fn zeta_p_sums_and_order() {
        for p in [2u64, 3, 5, 7] {
            let t = tower(p, 1);
            let prec = 5;
            // (1+π)^p = 1 exactly in the quotient
            let zeta = t.zeta_p_power_at(1, prec);
            let zp = t.pow(&zeta, &BigUint::from(p));
            let diff = t.sub(&zp, &t.one(prec));
            assert!(diff.coeffs().iter().all(|c| c.is_zero()), "p = {p}");
            // Σ_t (1+π)^t = 0 exactly
            let mut acc = t.zero(prec);
            for k in 0..p {
                acc = t.add(&acc, &t.zeta_p_power_at(k, prec));
            }
            assert!(acc.coeffs().iter().all(|c| c.is_zero()), "p = {p}");
        }
    }

    #[test]
    fn valuation_multiplicativity_and_ultrametric() {
        let t = tower(5, 1);
        let prec = 6;
        let a = t.scale_int(&t.pi_power(3, prec), &BigUint::from(7u32));
        let b = t.pi_power(2, prec);
        let prod = t.mul(&a, &b);
        assert_eq!(t.v_pi(&prod), Valuation::Exact(5));
        let sum = t.add(&a, &b);
        assert_eq!(t.v_pi(&sum), Valuation::Exact(2));
    }

    #[test]
    fn tower_inversion() {
        let t = tower(7, 1);
        let prec = 4;
        let x = t.add(&t.one(prec), &t.pi(prec));
        let inv = t.invert_unit(&x).unwrap();
        let check = t.sub(&t.mul(&x, &inv), &t.one(prec));
        assert!(t.is_zero_to_precision(&check));
        // (1+π)^{-1} = (1+π)^{p-1}
        let expect = t.pow(&x, &BigUint::from(6u32));
        let diff = t.sub(&inv, &expect);
        assert!(t.is_zero_to_precision(&diff));
        // non-units are rejected
        assert!(t.invert_unit(&t.pi(prec)).is_err());
    }

    #[test]
    fn division_by_pi_and_p() {
        for p in [2u64, 3, 5] {
            let t = tower(p, 1);
            let prec = 6;
            for k in 1..4usize {
                let x = t.pi_power(k, prec);
                let y = t.div_exact_by_pi(&x).unwrap();
                let diff = t.sub(&y, &t.pi_power(k - 1, prec));
                assert!(t.is_zero_to_precision(&diff), "p={p} k={k}");
                assert!(y.prec_pi() < x.prec_pi());
                assert_eq!(t.v_pi(&y), Valuation::Exact(k as u64 - 1));
            }
            // (p·x)/p = x
            let x = t.add(&t.one(prec), &t.pi(prec));
            let px = t.scale_int(&x, &BigUint::from(p));
            let back = t.div_exact_by_p(&px).unwrap();
            let diff = t.sub(&back, &x);
            assert!(t.is_zero_to_precision(&diff));
        }
    }

    #[test]
    fn division_by_integers() {
        let t = tower(3, 1);
        let prec = 6;
        let x = t.add(&t.one(prec), &t.pi(prec));
        let six_x = t.scale_int(&x, &BigUint::from(6u32));
        let back = t.div_exact_by_int(&six_x, &BigUint::from(6u32)).unwrap();
        let diff = t.sub(&back, &x);
        assert!(t.is_zero_to_precision(&diff));
    }
}
