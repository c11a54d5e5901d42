//! Solvability of the congruence systems: is Λ(D,b) = {ℓ : L(D,q^ℓ,b_ℓ) ≠ ∅}
//! non-empty, and what is its generator?
//!
//! The system Σᵢ vᵢ·dᵢ = b·x over ℤ[x] is reduced by division-free
//! Gaussian elimination (Bézout-combining the equations per variable) to
//! an effectively diagonal system plus residual equations 0 = βⱼ·x; the
//! set Λ(D,b) is non-empty iff q-1 divides every βⱼ, and then equals
//! ℓ₀·ℤ≥1 where ℓ₀ is the multiplicative order of q modulo Π r^{e+f_r}
//! over the primes r^e ∥ q-1, with f_r minimal such that
//! Σ vᵢ·dᵢ ≡ r^{f_r}·b mod r^{e+f_r} is solvable.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::exponent_system::{ProblemSpec, SolutionVector};
use crate::primes::factor_u64;
use crate::{Error, Result};

/// One pivot row of the effectively diagonal system: the equation
/// `Σ coeffs[i]·v_i = rhs·x`, whose leading variable is `var`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PivotRow {
    pub var: usize,
    pub coeffs: Vec<BigInt>,
    pub rhs: BigInt,
}

/// Output of the division-free elimination.
#[derive(Debug, Clone)]
pub struct EliminationResult {
    /// Pivot rows in ascending pivot-variable order; coeffs[var] > 0 and
    /// coeffs[i] = 0 for every earlier pivot variable i.
    pub diagonal_system: Vec<PivotRow>,
    /// Right-hand sides β_j of the equations 0 = β_j·x.
    pub residuals: Vec<BigInt>,
    /// Row-operation record: row r of the final system (pivots first,
    /// then residuals) equals Σ_j transform[r][j]·(original equation j).
    pub transform: Vec<Vec<BigInt>>,
    /// Product of the pivot entries: the N with C·Δ = N·I in the
    /// back-substitution argument.
    pub scale_n: BigInt,
}

impl EliminationResult {
    /// Re-derives the final system from the transform and the original
    /// equations; used to check the record is exact.
    pub fn verify(&self, spec: &ProblemSpec) -> bool {
        let n = spec.n();
        let rows: Vec<(Vec<BigInt>, BigInt)> = self
            .diagonal_system
            .iter()
            .map(|p| (p.coeffs.clone(), p.rhs.clone()))
            .chain(
                self.residuals
                    .iter()
                    .map(|b| (vec![BigInt::zero(); n], b.clone())),
            )
            .collect();
        if rows.len() != self.transform.len() {
            return false;
        }
        for (row, t) in rows.iter().zip(&self.transform) {
            let mut coeffs = vec![BigInt::zero(); n];
            let mut rhs = BigInt::zero();
            for (j, c) in t.iter().enumerate() {
                for i in 0..n {
                    coeffs[i] += c * &spec.exponents()[i][j];
                }
                rhs += c * BigInt::from(spec.twist()[j].clone());
            }
            if coeffs != row.0 || rhs != row.1 {
                return false;
            }
        }
        true
    }
}

/// Solvability verdict, residuals, and (when solvable) the generator of
/// Λ(D,b) with its per-prime minimal exponents.
#[derive(Debug, Clone)]
pub struct SolvabilityReport {
    pub solvable: bool,
    pub residuals: Vec<BigInt>,
    pub generator: Option<BigUint>,
    /// (r, e = v_r(q-1), minimal feasible f_r) per prime r | q-1.
    pub per_prime: Vec<(u64, u32, u32)>,
}

/// Division-free Gaussian elimination on Σ vᵢ·dᵢ = b·x.
///
/// For each variable in turn, the active equations are folded left to
/// right through the extended gcd of their vᵢ-coefficients; the folded
/// equation (pivot forced positive) eliminates vᵢ from the rest.
pub fn eliminate(spec: &ProblemSpec) -> EliminationResult {
    let n = spec.n();
    let m = spec.m();

    // equation j: coeffs over v_1..v_n, rhs multiple of x, transform row
    struct Eq {
        coeffs: Vec<BigInt>,
        rhs: BigInt,
        t: Vec<BigInt>,
    }
    let mut active: Vec<Eq> = (0..m)
        .map(|j| {
            let mut t = vec![BigInt::zero(); m];
            t[j] = BigInt::one();
            Eq {
                coeffs: (0..n).map(|i| spec.exponents()[i][j].clone()).collect(),
                rhs: BigInt::from(spec.twist()[j].clone()),
                t,
            }
        })
        .collect();

    let mut pivots: Vec<(usize, Eq)> = Vec::new();

    for var in 0..n {
        if active.iter().all(|e| e.coeffs[var].is_zero()) {
            continue;
        }
        // fold: pivot = Σ λ_j·eq_j with Σ λ_j·(coeff of v_var) = gcd
        let mut pivot = Eq {
            coeffs: vec![BigInt::zero(); n],
            rhs: BigInt::zero(),
            t: vec![BigInt::zero(); m],
        };
        let mut lambda: Vec<BigInt> = Vec::with_capacity(active.len());
        let mut g = BigInt::zero();
        for eq in &active {
            let c = &eq.coeffs[var];
            if c.is_zero() {
                lambda.push(BigInt::zero());
                continue;
            }
            let ext = g.extended_gcd(c);
            for i in 0..n {
                pivot.coeffs[i] = &ext.x * &pivot.coeffs[i] + &ext.y * &eq.coeffs[i];
            }
            pivot.rhs = &ext.x * &pivot.rhs + &ext.y * &eq.rhs;
            for j in 0..m {
                pivot.t[j] = &ext.x * &pivot.t[j] + &ext.y * &eq.t[j];
            }
            for l in lambda.iter_mut() {
                *l = &ext.x * &*l;
            }
            lambda.push(ext.y.clone());
            g = ext.gcd;
        }
        if g.is_negative() {
            // force a positive pivot
            for c in pivot.coeffs.iter_mut() {
                *c = -&*c;
            }
            pivot.rhs = -pivot.rhs;
            for c in pivot.t.iter_mut() {
                *c = -&*c;
            }
            for l in lambda.iter_mut() {
                *l = -&*l;
            }
            g = -g;
        }
        debug_assert_eq!(pivot.coeffs[var], g);
        // the pivot replaces one contributing equation (λ ≠ 0 keeps the
        // row operations invertible over Q); the rest lose v_var
        let replaced = lambda
            .iter()
            .position(|l| !l.is_zero())
            .expect("fold used at least one equation");
        active.remove(replaced);
        for eq in active.iter_mut() {
            if eq.coeffs[var].is_zero() {
                continue;
            }
            let factor = &eq.coeffs[var] / &g;
            for i in 0..n {
                eq.coeffs[i] -= &factor * &pivot.coeffs[i];
            }
            eq.rhs -= &factor * &pivot.rhs;
            for j in 0..m {
                eq.t[j] -= &factor * &pivot.t[j];
            }
        }
        pivots.push((var, pivot));
    }

    let scale_n = pivots
        .iter()
        .fold(BigInt::one(), |acc, (var, eq)| acc * &eq.coeffs[*var]);

    let mut diagonal_system = Vec::with_capacity(pivots.len());
    let mut transform = Vec::with_capacity(m);
    for (var, eq) in pivots {
        diagonal_system.push(PivotRow { var, coeffs: eq.coeffs, rhs: eq.rhs });
        transform.push(eq.t);
    }
    let mut residuals = Vec::new();
    for mut eq in active {
        debug_assert!(eq.coeffs.iter().all(|c| c.is_zero()));
        // 0 = β·x and 0 = -β·x are the same constraint; report β ≥ 0
        if eq.rhs.is_negative() {
            eq.rhs = -eq.rhs;
            for c in eq.t.iter_mut() {
                *c = -&*c;
            }
        }
        residuals.push(eq.rhs);
        transform.push(eq.t);
    }

    EliminationResult { diagonal_system, residuals, transform, scale_n }
}

/// Λ(D,b) ≠ ∅ iff q-1 divides every residual β_j.
///
/// b = 0 short-circuits to solvable (u = 0 works at every level).
pub fn is_solvable(spec: &ProblemSpec) -> SolvabilityReport {
    if spec.twist_is_zero() {
        return SolvabilityReport {
            solvable: true,
            residuals: Vec::new(),
            generator: Some(BigUint::one()),
            per_prime: Vec::new(),
        };
    }
    let elim = eliminate(spec);
    let q_minus_1 = BigInt::from(spec.q() - 1u32);
    let solvable = elim
        .residuals
        .iter()
        .all(|beta| beta.mod_floor(&q_minus_1).is_zero());
    SolvabilityReport {
        solvable,
        residuals: elim.residuals,
        generator: None,
        per_prime: Vec::new(),
    }
}

/// Full report: solvability plus the exact generator when solvable.
pub fn report(spec: &ProblemSpec) -> Result<SolvabilityReport> {
    let mut rep = is_solvable(spec);
    if rep.solvable && rep.generator.is_none() {
        let (gen, per_prime) = generator_with_details(spec)?;
        rep.generator = Some(gen);
        rep.per_prime = per_prime;
    }
    Ok(rep)
}

/// The generator ℓ₀ with Λ(D,b) = ℓ₀·ℤ≥1; state error when Λ is empty.
pub fn lambda_generator(spec: &ProblemSpec) -> Result<BigUint> {
    if !is_solvable(spec).solvable {
        return Err(Error::State(
            "lambda_generator called on an unsolvable system".into(),
        ));
    }
    Ok(generator_with_details(spec)?.0)
}

fn generator_with_details(spec: &ProblemSpec) -> Result<(BigUint, Vec<(u64, u32, u32)>)> {
    if spec.twist_is_zero() {
        return Ok((BigUint::one(), Vec::new()));
    }
    let q_minus_1: u64 = (spec.q() - 1u32).try_into().map_err(|_| Error::Budget {
        what: "factoring q-1",
        needed: u128::MAX,
        limit: u64::MAX as u128,
    })?;

    // diagonalize A (m×n, A[j][i] = d_{i,j}) as U·A·V = S
    let matrix: Vec<Vec<BigInt>> = (0..spec.m())
        .map(|j| (0..spec.n()).map(|i| spec.exponents()[i][j].clone()).collect())
        .collect();
    let snf = smith_diagonalize(&matrix);
    let ub = mat_vec(&snf.u, &spec.twist().iter().cloned().map(BigInt::from).collect::<Vec<_>>());

    let mut modulus = BigUint::one();
    let mut per_prime = Vec::new();
    for (r, e) in factor_u64(q_minus_1) {
        let f_r = minimal_exponent(&snf, &ub, r, e).ok_or_else(|| {
            Error::State("no feasible exponent found for a solvable system".into())
        })?;
        modulus *= BigUint::from(r).pow(e + f_r);
        per_prime.push((r, e, f_r));
    }
    let generator = multiplicative_order(spec.q(), &modulus);
    Ok((generator, per_prime))
}

/// Minimal f ≥ 0 with Σ vᵢ·dᵢ ≡ r^f·b (mod r^{e+f}) solvable, decided on
/// the diagonalized system: row k needs min(v_r(s_k), e+f) ≤ f + v_r((Ub)_k),
/// and zero rows need v_r((Ub)_k) ≥ e.  Feasibility is reached at latest
/// when f = max_k v_r(s_k).
fn minimal_exponent(snf: &SmithLike, ub: &[BigInt], r: u64, e: u32) -> Option<u32> {
    let v_r = |x: &BigInt| -> Option<u32> {
        if x.is_zero() {
            return None; // +∞
        }
        let r = BigInt::from(r);
        let mut x = x.abs();
        let mut v = 0;
        while (&x % &r).is_zero() {
            x /= &r;
            v += 1;
        }
        Some(v)
    };
    let rows = snf.u.len();
    let mut bound = 0;
    for k in 0..rows.min(snf.diag.len()) {
        if let Some(v) = v_r(&snf.diag[k]) {
            bound = bound.max(v);
        }
    }
    'search: for f in 0..=bound {
        for k in 0..rows {
            let s_val = if k < snf.diag.len() { v_r(&snf.diag[k]) } else { None };
            let rhs_val = v_r(&ub[k]);
            match s_val {
                Some(vs) => {
                    let lhs = vs.min(e + f);
                    let ok = match rhs_val {
                        None => true,
                        Some(vb) => lhs <= f + vb,
                    };
                    if !ok {
                        continue 'search;
                    }
                }
                None => {
                    // zero row: r^{e+f} must divide r^f·(Ub)_k
                    let ok = matches!(rhs_val, None) || rhs_val.unwrap() >= e;
                    if !ok {
                        continue 'search;
                    }
                }
            }
        }
        return Some(f);
    }
    None
}

/// Order of q modulo M (M ≥ 1 with gcd(q, M) = 1), via the factored
/// prime powers of M.
fn multiplicative_order(q: &BigUint, modulus: &BigUint) -> BigUint {
    if modulus.is_one() {
        return BigUint::one();
    }
    let m_u64: u64 = modulus.try_into().expect("modulus built from u64 prime powers");
    let mut order = BigUint::one();
    for (r, k) in factor_u64(m_u64) {
        let rk = BigUint::from(r).pow(k);
        // t starts at φ(r^k) and is reduced prime by prime
        let mut t_factors = factor_u64(r - 1);
        if k > 1 {
            t_factors.push((r, k - 1));
        }
        let mut t = (r - 1) as u128 * (r as u128).pow(k - 1);
        for (ell, _) in t_factors {
            while t % ell as u128 == 0
                && q.modpow(&BigUint::from(t / ell as u128), &rk).is_one()
            {
                t /= ell as u128;
            }
        }
        order = order.lcm(&BigUint::from(t));
    }
    debug_assert!(q.modpow(&order, modulus).is_one());
    order
}

/// Square-system shortcut: when n = m and gcd(det D, q-1) = 1 there are
/// infinitely many solvable levels; otherwise inconclusive.
pub fn square_system_shortcut(spec: &ProblemSpec) -> Result<Option<bool>> {
    if spec.n() != spec.m() {
        return Err(Error::Domain(format!(
            "square-system shortcut requires n = m, got n = {}, m = {}",
            spec.n(),
            spec.m()
        )));
    }
    let det = bareiss_determinant(spec.exponents());
    let q_minus_1 = BigInt::from(spec.q() - 1u32);
    if det.gcd(&q_minus_1).is_one() {
        Ok(Some(true))
    } else {
        Ok(None)
    }
}

/// An explicit member of L(D, q^ℓ, b_ℓ), solved per diagonal row after
/// the Smith-style reduction; domain error when the level is not in Λ.
pub fn construct_solution(spec: &ProblemSpec, level: usize) -> Result<SolutionVector> {
    let n = spec.n();
    let modulus = BigInt::from(spec.modulus(level));
    let matrix: Vec<Vec<BigInt>> = (0..spec.m())
        .map(|j| (0..n).map(|i| spec.exponents()[i][j].clone()).collect())
        .collect();
    let snf = smith_diagonalize(&matrix);
    let rhs: Vec<BigInt> = spec
        .twist_at_level(level)
        .into_iter()
        .map(|b| -BigInt::from(b))
        .collect();
    let c = mat_vec(&snf.u, &rhs);

    let mut y = vec![BigInt::zero(); n];
    for k in 0..spec.m() {
        let target = c[k].mod_floor(&modulus);
        if k < snf.diag.len() && !snf.diag[k].is_zero() {
            let g = snf.diag[k].gcd(&modulus);
            if !(&target % &g).is_zero() {
                return Err(Error::Domain(format!(
                    "level {level} is not solvable: diagonal row {k} fails gcd divisibility"
                )));
            }
            let reduced_mod = &modulus / &g;
            let inv = mod_inverse(&(&snf.diag[k] / &g), &reduced_mod).ok_or_else(|| {
                Error::State("reduced diagonal entry must be invertible".into())
            })?;
            y[k] = ((&target / &g) * inv).mod_floor(&reduced_mod);
        } else if !target.is_zero() {
            return Err(Error::Domain(format!(
                "level {level} is not solvable: residual row {k} nonzero"
            )));
        }
    }
    let u_int = mat_vec(&snf.v, &y);
    let entries = u_int
        .iter()
        .map(|x| x.mod_floor(&modulus).to_biguint().expect("mod_floor is non-negative"))
        .collect();
    SolutionVector::new(spec, entries, level)
}

fn mod_inverse(a: &BigInt, modulus: &BigInt) -> Option<BigInt> {
    if modulus.is_one() {
        return Some(BigInt::zero());
    }
    let ext = a.extended_gcd(modulus);
    if ext.gcd.is_one() {
        Some(ext.x.mod_floor(modulus))
    } else {
        None
    }
}

fn mat_vec(mat: &[Vec<BigInt>], v: &[BigInt]) -> Vec<BigInt> {
    mat.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

struct SmithLike {
    /// Left unimodular transform (rows × rows).
    u: Vec<Vec<BigInt>>,
    /// Right unimodular transform (cols × cols).
    v: Vec<Vec<BigInt>>,
    /// Positive diagonal entries of U·A·V, one per pivot.
    diag: Vec<BigInt>,
}

/// Unimodular diagonalization U·A·V = diag(s_1, …, s_rank, 0, …); the
/// divisibility chain of full Smith form is not needed by the callers.
fn smith_diagonalize(a: &[Vec<BigInt>]) -> SmithLike {
    let rows = a.len();
    let cols = if rows > 0 { a[0].len() } else { 0 };
    let mut m: Vec<Vec<BigInt>> = a.to_vec();
    let mut u: Vec<Vec<BigInt>> = identity(rows);
    let mut v: Vec<Vec<BigInt>> = identity(cols);

    let mut t = 0;
    while t < rows && t < cols {
        // find a nonzero pivot in the trailing submatrix
        let Some((pi, pj)) = (t..rows)
            .flat_map(|i| (t..cols).map(move |j| (i, j)))
            .filter(|&(i, j)| !m[i][j].is_zero())
            .min_by_key(|&(i, j)| (m[i][j].abs(), i, j))
        else {
            break;
        };
        m.swap(t, pi);
        u.swap(t, pi);
        swap_cols(&mut m, t, pj);
        swap_cols_square(&mut v, t, pj);

        loop {
            let mut clean = true;
            for i in t + 1..rows {
                if !m[i][t].is_zero() {
                    let q = div_nearest(&m[i][t], &m[t][t]);
                    row_sub(&mut m, i, t, &q);
                    row_sub(&mut u, i, t, &q);
                    if !m[i][t].is_zero() {
                        m.swap(t, i);
                        u.swap(t, i);
                        clean = false;
                    }
                }
            }
            for j in t + 1..cols {
                if !m[t][j].is_zero() {
                    let q = div_nearest(&m[t][j], &m[t][t]);
                    col_sub(&mut m, j, t, &q);
                    col_sub(&mut v, j, t, &q);
                    if !m[t][j].is_zero() {
                        swap_cols(&mut m, t, j);
                        swap_cols_square(&mut v, t, j);
                        clean = false;
                    }
                }
            }
            if clean {
                break;
            }
        }
        if m[t][t].is_negative() {
            for x in m[t].iter_mut() {
                *x = -&*x;
            }
            for x in u[t].iter_mut() {
                *x = -&*x;
            }
        }
        t += 1;
    }

    let diag = (0..t).map(|k| m[k][k].clone()).collect();
    SmithLike { u, v, diag }
}

fn identity(n: usize) -> Vec<Vec<BigInt>> {
    (0..n)
        .map(|i| {
            let mut row = vec![BigInt::zero(); n];
            row[i] = BigInt::one();
            row
        })
        .collect()
}

fn swap_cols(m: &mut [Vec<BigInt>], a: usize, b: usize) {
    for row in m.iter_mut() {
        row.swap(a, b);
    }
}

// v is maintained as A·V, i.e. columns of v are combined like columns of m
fn swap_cols_square(v: &mut [Vec<BigInt>], a: usize, b: usize) {
    swap_cols(v, a, b);
}

fn row_sub(m: &mut [Vec<BigInt>], i: usize, t: usize, q: &BigInt) {
    if q.is_zero() {
        return;
    }
    let row_t = m[t].clone();
    for (x, y) in m[i].iter_mut().zip(&row_t) {
        *x -= q * y;
    }
}

fn col_sub(m: &mut [Vec<BigInt>], j: usize, t: usize, q: &BigInt) {
    if q.is_zero() {
        return;
    }
    for row in m.iter_mut() {
        let sub = q * &row[t];
        row[j] -= sub;
    }
}

/// Rounded division keeps the remainder small so the gcd loop converges.
fn div_nearest(a: &BigInt, b: &BigInt) -> BigInt {
    let (q, r) = a.div_rem(b);
    let double_r = BigInt::from(2) * r.abs();
    if double_r > b.abs() {
        if (a.is_negative()) == (b.is_negative()) {
            q + 1
        } else {
            q - 1
        }
    } else {
        q
    }
}

/// Fraction-free determinant of the (square) exponent matrix.
fn bareiss_determinant(rows: &[Vec<BigInt>]) -> BigInt {
    let n = rows.len();
    let mut m: Vec<Vec<BigInt>> = rows.to_vec();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if m[k][k].is_zero() {
            let Some(swap) = (k + 1..n).find(|&i| !m[i][k].is_zero()) else {
                return BigInt::zero();
            };
            m.swap(k, swap);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = num / &prev;
            }
            m[i][k] = BigInt::zero();
        }
        prev = m[k][k].clone();
    }
    sign * m[n - 1][n - 1].clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent_system::is_member;

    fn bigs(v: &[u64]) -> Vec<BigUint> {
        v.iter().copied().map(BigUint::from).collect()
    }

    fn rows(v: &[&[i64]]) -> Vec<Vec<BigInt>> {
        v.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
    }

    #[test]
    fn eliminate_examples() {
        // v = x and v = 2x: one pivot, residual 0 = (2-1)x
        let spec = ProblemSpec::new(7, 1, rows(&[&[1, 1]]), bigs(&[1, 2])).unwrap();
        let elim = eliminate(&spec);
        assert_eq!(elim.diagonal_system.len(), 1);
        assert_eq!(elim.residuals, vec![BigInt::from(1)]);
        assert!(elim.verify(&spec));

        let spec = ProblemSpec::new(7, 1, rows(&[&[1, 1]]), bigs(&[1, 1])).unwrap();
        let elim = eliminate(&spec);
        assert_eq!(elim.residuals, vec![BigInt::zero()]);
        assert!(elim.verify(&spec));

        // unimodular square system: full pivot set, no residuals
        let spec = ProblemSpec::new(7, 1, rows(&[&[1, 0], &[1, 1]]), bigs(&[3, 4])).unwrap();
        let elim = eliminate(&spec);
        assert_eq!(elim.diagonal_system.len(), 2);
        assert!(elim.residuals.is_empty());
        assert!(elim.verify(&spec));
        for row in &elim.diagonal_system {
            assert!(row.coeffs[row.var].is_positive());
        }
    }

    #[test]
    fn is_solvable_examples() {
        let spec = ProblemSpec::new(7, 1, rows(&[&[1, 1]]), bigs(&[1, 2])).unwrap();
        assert!(!is_solvable(&spec).solvable);

        let spec = ProblemSpec::new(7, 1, rows(&[&[1, 1]]), bigs(&[1, 1])).unwrap();
        assert!(is_solvable(&spec).solvable);

        let spec = ProblemSpec::new(3, 1, rows(&[&[2]]), bigs(&[1])).unwrap();
        let rep = report(&spec).unwrap();
        assert!(rep.solvable);
        assert_eq!(rep.generator, Some(BigUint::from(2u32)));
    }

    #[test]
    fn generator_examples() {
        let spec = ProblemSpec::new(3, 1, rows(&[&[2]]), bigs(&[1])).unwrap();
        assert_eq!(lambda_generator(&spec).unwrap(), BigUint::from(2u32));
        let rep = report(&spec).unwrap();
        assert_eq!(rep.per_prime, vec![(2, 1, 1)]);

        let spec = ProblemSpec::new(7, 1, rows(&[&[1], &[2]]), bigs(&[2])).unwrap();
        assert_eq!(lambda_generator(&spec).unwrap(), BigUint::one());

        let spec = ProblemSpec::new(7, 1, rows(&[&[1]]), bigs(&[2])).unwrap();
        assert_eq!(lambda_generator(&spec).unwrap(), BigUint::one());

        // unsolvable: state error
        let spec = ProblemSpec::new(7, 1, rows(&[&[1, 1]]), bigs(&[1, 2])).unwrap();
        assert!(matches!(lambda_generator(&spec), Err(Error::State(_))));
    }

    #[test]
    fn zero_twist_is_trivially_solvable() {
        let spec = ProblemSpec::new(5, 1, rows(&[&[3]]), bigs(&[0])).unwrap();
        let rep = report(&spec).unwrap();
        assert!(rep.solvable);
        assert_eq!(rep.generator, Some(BigUint::one()));
    }

    #[test]
    fn square_shortcut_examples() {
        let spec = ProblemSpec::new(7, 1, rows(&[&[1, 0], &[0, 1]]), bigs(&[1, 2])).unwrap();
        assert_eq!(square_system_shortcut(&spec).unwrap(), Some(true));

        let spec = ProblemSpec::new(7, 1, rows(&[&[2, 0], &[0, 3]]), bigs(&[1, 2])).unwrap();
        assert_eq!(square_system_shortcut(&spec).unwrap(), None);

        let spec = ProblemSpec::new(2, 2, rows(&[&[1, 1], &[1, 2]]), bigs(&[1, 1])).unwrap();
        assert_eq!(square_system_shortcut(&spec).unwrap(), Some(true));

        let spec = ProblemSpec::new(7, 1, rows(&[&[1], &[2]]), bigs(&[1])).unwrap();
        assert!(square_system_shortcut(&spec).is_err());
    }

    #[test]
    fn construct_solution_at_generator() {
        let spec = ProblemSpec::new(3, 1, rows(&[&[2]]), bigs(&[1])).unwrap();
        let sv = construct_solution(&spec, 2).unwrap();
        assert!(is_member(&spec, sv.entries(), 2).unwrap());
        // level 1 is not in Λ
        assert!(construct_solution(&spec, 1).is_err());

        let spec = ProblemSpec::new(7, 1, rows(&[&[1], &[2]]), bigs(&[2])).unwrap();
        let sv = construct_solution(&spec, 1).unwrap();
        assert!(is_member(&spec, sv.entries(), 1).unwrap());
    }

    #[test]
    fn smith_diagonalize_is_exact() {
        let a = rows(&[&[2, 4, 4], &[-6, 6, 12], &[10, -4, -16]]);
        let snf = smith_diagonalize(&a);
        // U·A·V must be diagonal with the reported entries
        let prod = mat_mul(&mat_mul(&snf.u, &a), &snf.v);
        for (i, row) in prod.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                if i == j && i < snf.diag.len() {
                    assert_eq!(*x, snf.diag[i]);
                } else {
                    assert!(x.is_zero(), "off-diagonal entry {x} at ({i},{j})");
                }
            }
        }
        fn mat_mul(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
            let n = a.len();
            let k = b.len();
            let m = b[0].len();
            let mut out = vec![vec![BigInt::zero(); m]; n];
            for i in 0..n {
                for t in 0..k {
                    for j in 0..m {
                        let add = &a[i][t] * &b[t][j];
                        out[i][j] += add;
                    }
                }
            }
            out
        }
    }

    #[test]
    fn determinant_matches_small_cases() {
        assert_eq!(bareiss_determinant(&rows(&[&[1, 0], &[0, 1]])), BigInt::one());
        assert_eq!(bareiss_determinant(&rows(&[&[2, 0], &[0, 3]])), BigInt::from(6));
        assert_eq!(bareiss_determinant(&rows(&[&[1, 2], &[2, 4]])), BigInt::zero());
        assert_eq!(
            bareiss_determinant(&rows(&[&[0, 1, 2], &[1, 0, 3], &[4, -3, 8]])),
            BigInt::from(-2)
        );
    }
}
