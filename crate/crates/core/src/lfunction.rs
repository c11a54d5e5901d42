//! L-functions: the series exp(Σ S_ℓ·T^ℓ/ℓ), rational reconstruction,
//! q-adic Newton polygons, and the slope bound μ(F,b) ≥ s_p(D,b).
//!
//! The series is built from the logarithmic-derivative recurrence
//! k·c_k = Σ_{j=1}^{k} S_j·c_{k-j} (division by k is exact in the tower,
//! with tracked precision loss).  The denominator of L = B/A is the
//! monic-at-0 recurrence the coefficients satisfy beyond index s, solved
//! by valuation-pivoted elimination; the Newton polygon of a polynomial
//! Π(1-γT) has slopes v_π(γ) with multiplicity, so μ needs no root
//! finding.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;

use crate::charsum::{CharSumResult, Evaluator};
use crate::density::DensityCertificate;
use crate::padic::{TowerElement, TowerRing};
use crate::{Error, Result, Valuation};

/// c_0 = 1, c_1, …, c_L of exp(Σ_{ℓ≤L} S_ℓ T^ℓ/ℓ).
#[derive(Debug, Clone)]
pub struct LSeries {
    pub coeffs: Vec<TowerElement>,
    pub sums: Vec<CharSumResult>,
}

impl LSeries {
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }
}

/// Evaluate S_1..S_L and integrate the exponential recurrence.
pub fn build_series(evaluator: &mut Evaluator, length: usize, precision: usize) -> Result<LSeries> {
    let ring = evaluator.ring().clone();
    let mut sums = Vec::with_capacity(length);
    for level in 1..=length {
        sums.push(evaluator.evaluate(level, precision)?);
    }
    let mut coeffs = vec![ring.one(precision)];
    for k in 1..=length {
        let mut acc = ring.zero(precision);
        for j in 1..=k {
            let term = ring.mul(&sums[j - 1].value, &coeffs[k - j]);
            acc = ring.add(&acc, &term);
        }
        let coeff = ring
            .div_exact_by_int(&acc, &BigUint::from(k as u64))
            .map_err(|_| Error::Precision {
                context: format!("series coefficient c_{k}"),
                needed: precision + 1,
                have: precision,
            })?;
        coeffs.push(coeff);
    }
    Ok(LSeries { coeffs, sums })
}

/// k·c_k - Σ_j S_j·c_{k-j}, which must vanish to precision for every k.
pub fn log_derivative_residuals(ring: &TowerRing, series: &LSeries) -> Vec<TowerElement> {
    (1..series.coeffs.len())
        .map(|k| {
            let mut acc = ring.scale_int(&series.coeffs[k], &BigUint::from(k as u64));
            for j in 1..=k {
                let term = ring.mul(&series.sums[j - 1].value, &series.coeffs[k - j]);
                acc = ring.sub(&acc, &term);
            }
            acc
        })
        .collect()
}

/// Reconstruction output: coefficient lists, Newton polygons (in v_π
/// units), the reciprocal-root valuation multisets, and μ.
#[derive(Debug, Clone)]
pub struct LFunctionResult {
    /// 1 + b_1T + … + b_sT^s (the factor carrying the β's).
    pub numerator: Vec<TowerElement>,
    /// 1 + a_1T + … + a_tT^t (the factor carrying the α's).
    pub denominator: Vec<TowerElement>,
    /// Lower-hull vertices (index, v_π).
    pub num_polygon: Vec<(usize, u64)>,
    pub den_polygon: Vec<(usize, u64)>,
    /// v_q of the numerator / denominator reciprocal roots, ascending.
    pub beta_vq: Vec<BigRational>,
    pub alpha_vq: Vec<BigRational>,
    /// min of all of them; `None` encodes +∞ (L ≡ 1).
    pub mu: Option<BigRational>,
}

/// Solve for L = numerator/denominator with the given degrees and verify
/// the identity against every available series coefficient.
pub fn reconstruct_rational(
    ring: &TowerRing,
    series: &LSeries,
    num_degree: usize,
    den_degree: usize,
) -> Result<LFunctionResult> {
    let len = series.coeffs.len();
    if len < num_degree + 2 * den_degree + 1 {
        return Err(Error::Invalid(format!(
            "need at least {} series coefficients for degrees ({num_degree},{den_degree}), have {len}",
            num_degree + 2 * den_degree + 1
        )));
    }
    let c = &series.coeffs;
    let prec = c.iter().map(|x| x.coord_prec()).min().unwrap_or(0);

    // denominator from the recurrence Σ_{i=0}^{t} a_i·c_{k-i} = 0,
    // k = s+1..s+t, a_0 = 1
    let t = den_degree;
    let s = num_degree;
    let denominator = if t == 0 {
        vec![ring.one(prec)]
    } else {
        let mut matrix: Vec<Vec<TowerElement>> = (0..t)
            .map(|row| {
                let k = s + 1 + row;
                (0..t).map(|col| c[k - (col + 1)].clone()).collect()
            })
            .collect();
        let mut rhs: Vec<TowerElement> =
            (0..t).map(|row| ring.neg(&c[s + 1 + row])).collect();
        solve_local(ring, &mut matrix, &mut rhs)?;
        let mut den = vec![ring.one(prec)];
        den.extend(rhs);
        den
    };

    // numerator b_k = Σ_{i=0}^{min(k,t)} a_i·c_{k-i}
    let numerator: Vec<TowerElement> = (0..=s)
        .map(|k| {
            let mut acc = ring.zero(prec);
            for i in 0..=k.min(t) {
                let term = ring.mul(&denominator[i], &c[k - i]);
                acc = ring.add(&acc, &term);
            }
            acc
        })
        .collect();

    // the identity must continue to hold for every remaining coefficient
    for k in s + 1..len {
        let mut acc = ring.zero(prec);
        for i in 0..=k.min(t) {
            let term = ring.mul(&denominator[i], &c[k - i]);
            acc = ring.add(&acc, &term);
        }
        if let Valuation::Exact(_) = ring.v_pi(&acc) {
            return Err(Error::Domain(format!(
                "reconstruction mismatch at series index {k}: degrees ({s},{t}) are inconsistent"
            )));
        }
    }

    let num_polygon = newton_polygon(ring, &numerator)?;
    let den_polygon = newton_polygon(ring, &denominator)?;
    let normalizer = BigInt::from(ring.w().degree() as u64 * (ring.p() - 1));
    let beta_vq = polygon_slopes(&num_polygon, &normalizer);
    let alpha_vq = polygon_slopes(&den_polygon, &normalizer);
    let mu = beta_vq.iter().chain(alpha_vq.iter()).min().cloned();
    Ok(LFunctionResult {
        numerator,
        denominator,
        num_polygon,
        den_polygon,
        beta_vq,
        alpha_vq,
        mu,
    })
}

/// Try all degree pairs with s+t ≤ cap (total ascending, then smaller
/// denominator first) until one reconstructs consistently.
pub fn detect_and_reconstruct(
    ring: &TowerRing,
    series: &LSeries,
    cap: usize,
) -> Result<LFunctionResult> {
    let mut last = None;
    for total in 0..=cap {
        for t in 0..=total {
            let s = total - t;
            if series.coeffs.len() < s + 2 * t + 1 {
                continue;
            }
            match reconstruct_rational(ring, series, s, t) {
                Ok(result) => return Ok(result),
                Err(e) => last = Some(e),
            }
        }
    }
    Err(last.unwrap_or_else(|| {
        Error::Invalid(format!("no degrees with s+t <= {cap} fit the series"))
    }))
}

/// Gaussian elimination over the local ring with minimal-v_π pivoting;
/// entries are divided by the pivot through exact π-shifts and a unit
/// inverse.  Fails with a precision error when no pivot has a certified
/// valuation.
fn solve_local(
    ring: &TowerRing,
    matrix: &mut [Vec<TowerElement>],
    rhs: &mut [TowerElement],
) -> Result<()> {
    let t = matrix.len();
    for col in 0..t {
        // pivot row: minimal exact v_π in this column
        let mut pivot_row = None;
        let mut pivot_val = u64::MAX;
        for (row, m_row) in matrix.iter().enumerate().skip(col) {
            if let Valuation::Exact(v) = ring.v_pi(&m_row[col]) {
                if v < pivot_val {
                    pivot_val = v;
                    pivot_row = Some(row);
                }
            }
        }
        let Some(pivot_row) = pivot_row else {
            return Err(Error::Precision {
                context: format!("denominator solve: column {col} is zero to precision"),
                needed: 0,
                have: 0,
            });
        };
        matrix.swap(col, pivot_row);
        rhs.swap(col, pivot_row);

        let pivot = matrix[col][col].clone();
        let pivot_unit = shift_down(ring, &pivot, pivot_val)?;
        let pivot_inv = ring.invert_unit(&pivot_unit)?;
        for row in 0..t {
            if row == col {
                continue;
            }
            let entry = matrix[row][col].clone();
            match ring.v_pi(&entry) {
                Valuation::AtLeast(v) if v >= entry.prec_pi() as u64 => {
                    // already zero to precision
                    continue;
                }
                _ => {}
            }
            let factor = ring.mul(&shift_down(ring, &entry, pivot_val)?, &pivot_inv);
            for k in col..t {
                let sub = ring.mul(&factor, &matrix[col][k]);
                matrix[row][k] = ring.sub(&matrix[row][k], &sub);
            }
            let sub = ring.mul(&factor, &rhs[col]);
            rhs[row] = ring.sub(&rhs[row], &sub);
        }
    }
    // diagonal solve
    for col in 0..t {
        let pivot = matrix[col][col].clone();
        let v = match ring.v_pi(&pivot) {
            Valuation::Exact(v) => v,
            Valuation::AtLeast(_) => {
                return Err(Error::Precision {
                    context: format!("denominator solve: pivot {col} lost to precision"),
                    needed: 0,
                    have: 0,
                })
            }
        };
        let shifted_rhs = shift_down(ring, &rhs[col], v).map_err(|_| Error::Precision {
            context: format!("denominator solve: rhs {col} not divisible by pivot"),
            needed: 0,
            have: 0,
        })?;
        let unit = ring.invert_unit(&shift_down(ring, &pivot, v)?)?;
        rhs[col] = ring.mul(&shifted_rhs, &unit);
    }
    Ok(())
}

fn shift_down(ring: &TowerRing, x: &TowerElement, v: u64) -> Result<TowerElement> {
    let mut out = x.clone();
    for _ in 0..v {
        out = ring.div_exact_by_pi(&out)?;
    }
    Ok(out)
}

/// Lower convex hull of (k, v_π(c_k)).  Coefficients that vanish to
/// precision are allowed only above the hull; a trailing one is a
/// precision error (degree uncertifiable).
fn newton_polygon(ring: &TowerRing, poly: &[TowerElement]) -> Result<Vec<(usize, u64)>> {
    let mut points: Vec<(usize, u64)> = Vec::new();
    let mut markers: Vec<(usize, u64)> = Vec::new();
    for (k, coeff) in poly.iter().enumerate() {
        match ring.v_pi(coeff) {
            Valuation::Exact(v) => points.push((k, v)),
            Valuation::AtLeast(v) => markers.push((k, v)),
        }
    }
    if let Some((k, _)) = markers.iter().find(|(k, _)| *k == poly.len() - 1) {
        if poly.len() > 1 {
            return Err(Error::Precision {
                context: format!("leading coefficient {k} of a polygon vanishes to precision"),
                needed: 0,
                have: 0,
            });
        }
    }
    // monotone chain on indices (already sorted)
    let mut hull: Vec<(usize, u64)> = Vec::new();
    for &(x, y) in &points {
        while hull.len() >= 2 {
            let (x1, y1) = hull[hull.len() - 2];
            let (x2, y2) = hull[hull.len() - 1];
            // keep the hull lower-convex: drop (x2,y2) if (x,y) turns
            // below or straight
            let lhs = (y2 as i128 - y1 as i128) * (x as i128 - x1 as i128);
            let rhs = (y as i128 - y1 as i128) * (x2 as i128 - x1 as i128);
            if lhs >= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push((x, y));
    }
    // markers must not dip below the hull
    for &(k, bound) in &markers {
        if k == poly.len() - 1 && poly.len() == 1 {
            continue;
        }
        let hull_value = hull_at(&hull, k);
        if let Some(hv) = hull_value {
            if (bound as i128) < hv {
                return Err(Error::Precision {
                    context: format!(
                        "coefficient {k} only bounded below {bound}, hull needs {hv}"
                    ),
                    needed: 0,
                    have: 0,
                });
            }
        }
    }
    Ok(hull)
}

fn hull_at(hull: &[(usize, u64)], k: usize) -> Option<i128> {
    for w in hull.windows(2) {
        let (x1, y1) = w[0];
        let (x2, y2) = w[1];
        if x1 <= k && k <= x2 {
            // ceil of the line value is a safe lower requirement
            let num = y1 as i128 * (x2 - x1) as i128
                + (k - x1) as i128 * (y2 as i128 - y1 as i128);
            return Some(num.div_euclid((x2 - x1) as i128));
        }
    }
    None
}

/// Slopes of the hull with multiplicity, normalized from v_π to v_q.
fn polygon_slopes(hull: &[(usize, u64)], normalizer: &BigInt) -> Vec<BigRational> {
    let mut out = Vec::new();
    for w in hull.windows(2) {
        let (x1, y1) = w[0];
        let (x2, y2) = w[1];
        let slope = BigRational::new(
            BigInt::from(y2 as i64 - y1 as i64),
            BigInt::from((x2 - x1) as i64) * normalizer,
        );
        for _ in x1..x2 {
            out.push(slope.clone());
        }
    }
    out.sort();
    out
}

/// Expand numerator/denominator back into a power series and compare
/// with the built coefficients (round-trip check).
pub fn expansion_matches(ring: &TowerRing, series: &LSeries, result: &LFunctionResult) -> bool {
    let len = series.coeffs.len();
    let t = result.denominator.len() - 1;
    for k in 0..len {
        let mut acc = ring.zero(series.coeffs[k].coord_prec());
        for i in 0..=k.min(t) {
            let term = ring.mul(&result.denominator[i], &series.coeffs[k - i]);
            acc = ring.add(&acc, &term);
        }
        let expect = if k < result.numerator.len() {
            result.numerator[k].clone()
        } else {
            ring.zero(acc.coord_prec())
        };
        if ring.v_pi(&ring.sub(&acc, &expect)).is_exact() {
            return false;
        }
    }
    true
}

#[derive(Debug, Clone)]
pub struct MuReport {
    /// `None` is +∞.
    pub mu: Option<BigRational>,
    pub s_p: BigRational,
    pub holds: bool,
}

/// μ(F,b) ≥ s_p(D,b); an identically-1 L-function passes vacuously.
pub fn verify_mu(result: &LFunctionResult, certificate: &DensityCertificate) -> MuReport {
    let holds = match &result.mu {
        None => true,
        Some(mu) => mu >= &certificate.density,
    };
    MuReport { mu: result.mu.clone(), s_p: certificate.density.clone(), holds }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charsum::{recommended_precision, LaurentPolynomial};
    use crate::density;
    use crate::exponent_system::ProblemSpec;
    use crate::Budgets;
    use num_bigint::BigUint;

    fn bigs(v: &[u64]) -> Vec<BigUint> {
        v.iter().copied().map(BigUint::from).collect()
    }

    fn rows(v: &[&[i64]]) -> Vec<Vec<BigInt>> {
        v.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
    }

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn gauss_case_reconstructs_degree_1_0() {
        let spec = ProblemSpec::new(7, 1, rows(&[&[1]]), bigs(&[2])).unwrap();
        let budgets = Budgets::default();
        let poly = LaurentPolynomial::with_unit_coefficients(spec.clone());
        let mut ev = Evaluator::new(poly, &budgets).unwrap();
        let ring = ev.ring().clone();
        let precision = recommended_precision(7, 16);
        let series = build_series(&mut ev, 3, precision).unwrap();
        // c_1 = S_1 always
        let diff = ring.sub(&series.coeffs[1], &series.sums[0].value);
        assert!(!ring.v_pi(&diff).is_exact());

        let result = reconstruct_rational(&ring, &series, 1, 0).unwrap();
        assert_eq!(result.denominator.len(), 1);
        assert_eq!(result.num_polygon, vec![(0, 0), (1, 4)]);
        assert_eq!(result.mu, Some(ratio(2, 3)));
        assert!(expansion_matches(&ring, &series, &result));

        // detection finds the same degrees
        let detected = detect_and_reconstruct(&ring, &series, 4).unwrap();
        assert_eq!(detected.num_polygon, result.num_polygon);

        let cert = density::density(&spec, &budgets).unwrap().unwrap();
        let rep = verify_mu(&result, &cert);
        assert!(rep.holds);
        assert_eq!(rep.mu, Some(cert.density.clone()));
    }

    #[test]
    fn constant_series_is_identity() {
        // a spec with Λ = ∅ has every S_ℓ = 0, so L = 1 and μ = +∞
        let spec = ProblemSpec::new(7, 1, rows(&[&[1, 1]]), bigs(&[1, 2])).unwrap();
        let budgets = Budgets::default();
        let poly = LaurentPolynomial::with_unit_coefficients(spec.clone());
        let mut ev = Evaluator::new(poly, &budgets).unwrap();
        let ring = ev.ring().clone();
        let series = build_series(&mut ev, 3, 6).unwrap();
        let result = detect_and_reconstruct(&ring, &series, 4).unwrap();
        assert_eq!(result.numerator.len(), 1);
        assert_eq!(result.denominator.len(), 1);
        assert_eq!(result.mu, None);
        let cert = crate::density::DensityCertificate {
            density: ratio(1, 2),
            level: 2,
            witness: crate::exponent_system::SolutionVector::new(
                &ProblemSpec::new(3, 1, rows(&[&[2]]), bigs(&[1])).unwrap(),
                bigs(&[2]),
                2,
            )
            .unwrap(),
            cycle: vec![],
            bound_used: BigUint::from(1u32),
        };
        assert!(verify_mu(&result, &cert).holds);
    }

    #[test]
    fn log_derivative_residuals_vanish() {
        let spec = ProblemSpec::new(3, 1, rows(&[&[2]]), bigs(&[1])).unwrap();
        let budgets = Budgets::default();
        let poly = LaurentPolynomial::with_unit_coefficients(spec);
        let mut ev = Evaluator::new(poly, &budgets).unwrap();
        let ring = ev.ring().clone();
        let series = build_series(&mut ev, 4, 10).unwrap();
        for r in log_derivative_residuals(&ring, &series) {
            assert!(!ring.v_pi(&r).is_exact());
        }
    }

    #[test]
    fn quadratic_example_detects_small_degrees() {
        // m = 1, F = x + x², b = 2 over F_7
        let spec = ProblemSpec::new(7, 1, rows(&[&[1], &[2]]), bigs(&[2])).unwrap();
        let budgets = Budgets::default();
        let poly = LaurentPolynomial::with_unit_coefficients(spec.clone());
        let mut ev = Evaluator::new(poly, &budgets).unwrap();
        let ring = ev.ring().clone();
        let series = build_series(&mut ev, 6, recommended_precision(7, 30)).unwrap();
        let result = detect_and_reconstruct(&ring, &series, 4).unwrap();
        assert!(result.numerator.len() - 1 + result.denominator.len() - 1 <= 4);
        assert!(expansion_matches(&ring, &series, &result));
        let cert = density::density(&spec, &budgets).unwrap().unwrap();
        assert!(verify_mu(&result, &cert).holds);
    }
}
