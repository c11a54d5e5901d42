//! The p-density s_p(D,b) and its attainment certificate.
//!
//! States are the integer vectors of the box Π[D_j^-, D_j^+]; there is an
//! edge c → c' for every digit column a ∈ {0,…,q-1}^n with
//! Σ aᵢ·dᵢ = q·c' - c - b, weighted by the minimal Σ σ_p(aᵢ) over such
//! columns.  Closed walks of length ℓ correspond exactly to members of
//! L(D, q^ℓ, b_ℓ) (walk weight = σ_p of the member when minimal digit
//! witnesses are used), so
//!
//!   s_p(D,b) = (minimum cycle mean) / (f·(p-1)),
//!
//! computed by Karp's dynamic program with exact integer cross-multiplied
//! comparisons, never floats.  The witness member is rebuilt from the
//! cycle's edge digit columns.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::digits;
use crate::exponent_system::{box_bounds, ProblemSpec, SolutionVector};
use crate::{Budgets, Error, Result};

const INF: u64 = u64::MAX / 4;

/// Exact minimum of σ_p over L(D, q^ℓ, b_ℓ) with the full minimizer set.
#[derive(Debug, Clone)]
pub struct SigmaMin {
    pub sigma: BigUint,
    /// Every u attaining the minimum (the set G of the leading-term
    /// congruence), in lexicographic order.
    pub minimizers: Vec<SolutionVector>,
}

/// Brute-force scan of all (q^ℓ)^n candidates; `None` when L is empty.
pub fn sigma_min_bruteforce(
    spec: &ProblemSpec,
    level: usize,
    budgets: &Budgets,
) -> Result<Option<SigmaMin>> {
    if spec.twist_is_zero() {
        return Err(Error::Domain("σ-minimum scan requires b ≠ 0".into()));
    }
    let q_level: u64 = spec
        .q_pow(level)
        .to_u64()
        .ok_or(Error::Budget { what: "enumeration radix q^ℓ", needed: u128::MAX, limit: budgets.enum_candidates })?;
    let candidates = (q_level as u128).checked_pow(spec.n() as u32).ok_or(Error::Budget {
        what: "enumeration candidates",
        needed: u128::MAX,
        limit: budgets.enum_candidates,
    })?;
    budgets.check("enumeration candidates", candidates, budgets.enum_candidates)?;

    let n = spec.n();
    let m = spec.m();
    let p = spec.p();
    let modulus = (q_level - 1) as i128;
    let d: Vec<Vec<i128>> = exponents_i128(spec)?;
    let b_level: Vec<i128> = spec
        .twist_at_level(level)
        .iter()
        .map(|b| b.to_i128().expect("b_ℓ < q^ℓ-1 fits"))
        .collect();

    // odometer over u with incremental congruence sums; u_n varies fastest
    let mut u = vec![0u64; n];
    let mut sums: Vec<i128> = b_level.clone();
    let mut weights = vec![0u64; n];
    let mut best: Option<u64> = None;
    let mut minimizers: Vec<Vec<u64>> = Vec::new();
    loop {
        if sums.iter().all(|s| s.rem_euclid(modulus) == 0) {
            let w: u64 = weights.iter().sum();
            if best.map_or(true, |b| w < b) {
                best = Some(w);
                minimizers.clear();
                minimizers.push(u.clone());
            } else if best == Some(w) {
                minimizers.push(u.clone());
            }
        }
        // increment, last coordinate fastest
        let mut i = n;
        loop {
            if i == 0 {
                let sigma = BigUint::from(best.map_or(0, |b| b));
                if best.is_none() {
                    return Ok(None);
                }
                let minimizers = minimizers
                    .into_iter()
                    .map(|v| {
                        SolutionVector::new(
                            spec,
                            v.into_iter().map(BigUint::from).collect(),
                            level,
                        )
                    })
                    .collect::<Result<Vec<_>>>()?;
                return Ok(Some(SigmaMin { sigma, minimizers }));
            }
            i -= 1;
            if u[i] + 1 < q_level {
                u[i] += 1;
                weights[i] = digits::weight_u64(u[i], p);
                for j in 0..m {
                    sums[j] += d[i][j];
                }
                break;
            }
            // roll over q^ℓ-1 steps of d[i][j]
            for j in 0..m {
                sums[j] -= d[i][j] * (q_level as i128 - 1);
            }
            u[i] = 0;
            weights[i] = 0;
        }
    }
}

fn exponents_i128(spec: &ProblemSpec) -> Result<Vec<Vec<i128>>> {
    spec.exponents()
        .iter()
        .map(|row| {
            row.iter()
                .map(|x| {
                    x.to_i128().ok_or(Error::Budget {
                        what: "exponent magnitude",
                        needed: u128::MAX,
                        limit: i64::MAX as u128,
                    })
                })
                .collect()
        })
        .collect()
}

/// One transition of the Φ-state graph.
#[derive(Debug, Clone)]
pub struct PhiEdge {
    pub to: usize,
    /// Minimal Σ σ_p(aᵢ) over digit columns realizing the transition.
    pub weight: u64,
    /// The lexicographically least minimal digit column.
    pub digits: Vec<u64>,
}

#[derive(Debug, Clone)]
pub struct PhiGraph {
    spec: ProblemSpec,
    q: u64,
    states: Vec<Vec<i64>>,
    /// Adjacency by source state, targets ascending.
    edges: Vec<Vec<PhiEdge>>,
}

impl PhiGraph {
    pub fn states(&self) -> &[Vec<i64>] {
        &self.states
    }

    pub fn edges(&self) -> &[Vec<PhiEdge>] {
        &self.edges
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    fn edge(&self, from: usize, to: usize) -> Option<&PhiEdge> {
        self.edges[from].iter().find(|e| e.to == to)
    }
}

/// Minimal-weight digit columns per achievable target Σ aᵢ·dᵢ, solved by
/// full enumeration below the budget and by a per-coordinate bounded
/// knapsack DP above it.
enum TargetOracle {
    Map(HashMap<Vec<i64>, (u64, Vec<u64>)>),
    Dp(DpTables),
}

struct DpTables {
    lo: Vec<i64>,
    sizes: Vec<usize>,
    /// dist[i] over targets reachable with digit columns i..n.
    dist: Vec<Vec<u64>>,
    d: Vec<Vec<i64>>,
    q: u64,
    p: u64,
}

impl DpTables {
    fn index(&self, t: &[i64]) -> Option<usize> {
        let mut idx = 0usize;
        for (j, &x) in t.iter().enumerate() {
            let off = x - self.lo[j];
            if off < 0 || off as usize >= self.sizes[j] {
                return None;
            }
            idx = idx * self.sizes[j] + off as usize;
        }
        Some(idx)
    }

    fn query(&self, t: &[i64]) -> Option<(u64, Vec<u64>)> {
        let idx = self.index(t)?;
        let total = self.dist[0][idx];
        if total >= INF {
            return None;
        }
        // lexicographically least witness by greedy forward choice
        let n = self.d.len();
        let mut digits = Vec::with_capacity(n);
        let mut rest: Vec<i64> = t.to_vec();
        let mut need = total;
        for i in 0..n {
            let mut chosen = None;
            'digit: for a in 0..self.q {
                let w = digits::weight_u64(a, self.p);
                if w > need {
                    continue;
                }
                let next: Vec<i64> = rest
                    .iter()
                    .zip(&self.d[i])
                    .map(|(x, dd)| x - a as i64 * dd)
                    .collect();
                if let Some(nidx) = self.index(&next) {
                    if self.dist[i + 1][nidx] == need - w {
                        digits.push(a);
                        rest = next;
                        need -= w;
                        chosen = Some(a);
                        break 'digit;
                    }
                }
            }
            debug_assert!(chosen.is_some());
            chosen?;
        }
        Some((total, digits))
    }
}

fn build_target_oracle(spec: &ProblemSpec, q: u64, budgets: &Budgets) -> Result<TargetOracle> {
    let n = spec.n();
    let m = spec.m();
    let d: Vec<Vec<i64>> = spec
        .exponents()
        .iter()
        .map(|row| {
            row.iter()
                .map(|x| {
                    x.to_i64().ok_or(Error::Budget {
                        what: "exponent magnitude",
                        needed: u128::MAX,
                        limit: i64::MAX as u128,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let column_count = (q as u128).checked_pow(n as u32);

    if let Some(count) = column_count {
        if count <= budgets.edge_enum {
            // enumerate digit columns in lexicographic order
            let mut map: HashMap<Vec<i64>, (u64, Vec<u64>)> = HashMap::new();
            let mut a = vec![0u64; n];
            loop {
                let mut target = vec![0i64; m];
                let mut w = 0u64;
                for i in 0..n {
                    w += digits::weight_u64(a[i], spec.p());
                    for j in 0..m {
                        target[j] += a[i] as i64 * d[i][j];
                    }
                }
                match map.get(&target) {
                    Some((bw, _)) if *bw <= w => {}
                    _ => {
                        map.insert(target, (w, a.clone()));
                    }
                }
                let mut i = n;
                loop {
                    if i == 0 {
                        return Ok(TargetOracle::Map(map));
                    }
                    i -= 1;
                    a[i] += 1;
                    if a[i] < q {
                        break;
                    }
                    a[i] = 0;
                }
            }
        }
    }

    // bounded-knapsack DP over the reachable target range
    let mut lo = vec![0i64; m];
    let mut hi = vec![0i64; m];
    for row in &d {
        for (j, &x) in row.iter().enumerate() {
            if x > 0 {
                hi[j] += x * (q as i64 - 1);
            } else {
                lo[j] += x * (q as i64 - 1);
            }
        }
    }
    let sizes: Vec<usize> = lo
        .iter()
        .zip(&hi)
        .map(|(l, h)| (h - l + 1) as usize)
        .collect();
    let total: u128 = sizes.iter().map(|&s| s as u128).product();
    budgets.check("edge DP table", total * (n as u128 + 1), budgets.edge_enum.max(8_000_000))?;
    let total = total as usize;

    let mut tables = DpTables {
        lo,
        sizes,
        dist: vec![vec![INF; total]; n + 1],
        d,
        q,
        p: spec.p(),
    };
    let zero_idx = tables.index(&vec![0i64; m]).expect("0 is in range");
    tables.dist[n][zero_idx] = 0;
    for i in (0..n).rev() {
        // dist_i[τ] = min_a σ_p(a) + dist_{i+1}[τ - a·d_i]
        let mut t = tables.lo.clone();
        let mut idx_iter = 0usize;
        loop {
            let mut best = INF;
            for a in 0..q {
                let w = digits::weight_u64(a, tables.p);
                if w >= best {
                    continue;
                }
                let next: Vec<i64> = t
                    .iter()
                    .zip(&tables.d[i])
                    .map(|(x, dd)| x - a as i64 * dd)
                    .collect();
                if let Some(nidx) = tables.index(&next) {
                    let cand = tables.dist[i + 1][nidx].saturating_add(w);
                    if cand < best {
                        best = cand;
                    }
                }
            }
            tables.dist[i][idx_iter] = best;
            // advance τ through the box in row-major order
            idx_iter += 1;
            let mut j = m;
            let mut done = true;
            while j > 0 {
                j -= 1;
                t[j] += 1;
                if t[j] <= tables.hi_at(j) {
                    done = false;
                    break;
                }
                t[j] = tables.lo[j];
            }
            if done {
                break;
            }
        }
        debug_assert_eq!(idx_iter, total);
    }
    Ok(TargetOracle::Dp(tables))
}

impl DpTables {
    fn hi_at(&self, j: usize) -> i64 {
        self.lo[j] + self.sizes[j] as i64 - 1
    }
}

impl TargetOracle {
    fn query(&self, target: &[i64]) -> Option<(u64, Vec<u64>)> {
        match self {
            TargetOracle::Map(map) => map.get(target).cloned(),
            TargetOracle::Dp(dp) => dp.query(target),
        }
    }
}

/// Build the Φ-state graph; requires b ≠ 0 and a box within budget.
pub fn build_phi_graph(spec: &ProblemSpec, budgets: &Budgets) -> Result<PhiGraph> {
    if spec.twist_is_zero() {
        return Err(Error::Domain("Φ-graph requires b ≠ 0".into()));
    }
    let q: u64 = spec.q().to_u64().ok_or(Error::Budget {
        what: "graph radix q",
        needed: u128::MAX,
        limit: budgets.graph_states,
    })?;
    let bounds = box_bounds(spec);
    let card = bounds.cardinality();
    budgets.check(
        "graph states",
        card.to_u128().unwrap_or(u128::MAX),
        budgets.graph_states,
    )?;

    let m = spec.m();
    let lo: Vec<i64> = bounds
        .lower()
        .iter()
        .map(|x| x.to_i64().expect("box bound fits i64 given the state budget"))
        .collect();
    let hi: Vec<i64> = bounds
        .upper()
        .iter()
        .map(|x| x.to_i64().expect("box bound fits i64 given the state budget"))
        .collect();
    let b: Vec<i64> = spec
        .twist()
        .iter()
        .map(|x| x.to_i64().expect("twist < q fits"))
        .collect();

    // states in lexicographic order, so state ids sort like state vectors
    let mut states = Vec::new();
    let mut cur = lo.clone();
    loop {
        states.push(cur.clone());
        let mut j = m;
        let mut done = true;
        while j > 0 {
            j -= 1;
            cur[j] += 1;
            if cur[j] <= hi[j] {
                done = false;
                break;
            }
            cur[j] = lo[j];
        }
        if done {
            break;
        }
    }
    let oracle = build_target_oracle(spec, q, budgets)?;

    let mut edges: Vec<Vec<PhiEdge>> = vec![Vec::new(); states.len()];
    for (to, c_next) in states.iter().enumerate() {
        for (from, c) in states.iter().enumerate() {
            // target Σ aᵢ·dᵢ = q·c' - c - b
            let target: Vec<i64> = (0..m)
                .map(|j| q as i64 * c_next[j] - c[j] - b[j])
                .collect();
            if let Some((weight, digit_col)) = oracle.query(&target) {
                edges[from].push(PhiEdge { to, weight, digits: digit_col });
            }
        }
    }
    for adj in edges.iter_mut() {
        adj.sort_by_key(|e| e.to);
    }
    Ok(PhiGraph { spec: spec.clone(), q, states, edges })
}

/// A minimum-mean cycle with its exact rational mean.
#[derive(Debug, Clone)]
pub struct MinMeanCycle {
    pub mean: BigRational,
    /// State ids along the cycle (first state not repeated at the end);
    /// ties broken by least (length, state sequence).
    pub cycle: Vec<usize>,
}

/// Karp's algorithm with an artificial source; `None` iff acyclic.
pub fn min_mean_cycle(graph: &PhiGraph) -> Option<MinMeanCycle> {
    let v = graph.state_count();
    if v == 0 {
        return None;
    }
    let rounds = v + 1; // walk lengths 1..=v+1 from the artificial source
    let mut dist = vec![vec![INF; v]; rounds + 1];
    for x in dist[1].iter_mut() {
        *x = 0;
    }
    for k in 2..=rounds {
        for from in 0..v {
            if dist[k - 1][from] >= INF {
                continue;
            }
            let base = dist[k - 1][from];
            for e in &graph.edges[from] {
                let cand = base + e.weight;
                if cand < dist[k][e.to] {
                    dist[k][e.to] = cand;
                }
            }
        }
    }

    // λ* = min_v max_k (D_{rounds}(v) - D_k(v)) / (rounds - k)
    let mut best: Option<(i64, i64)> = None; // (numerator, denominator), mean = num/den
    for node in 0..v {
        if dist[rounds][node] >= INF {
            continue;
        }
        let mut worst: Option<(i64, i64)> = None;
        for k in 1..rounds {
            if dist[k][node] >= INF {
                continue;
            }
            let num = dist[rounds][node] as i64 - dist[k][node] as i64;
            let den = (rounds - k) as i64;
            let better = match worst {
                None => true,
                Some((wn, wd)) => (num as i128) * (wd as i128) > (wn as i128) * (den as i128),
            };
            if better {
                worst = Some((num, den));
            }
        }
        let (num, den) = worst.expect("k = rounds-1 is reachable when D_rounds is");
        let better = match best {
            None => true,
            Some((bn, bd)) => (num as i128) * (bd as i128) < (bn as i128) * (den as i128),
        };
        if better {
            best = Some((num, den));
        }
    }
    let (num, den) = best?;
    let mean = BigRational::new(BigInt::from(num), BigInt::from(den));

    let cycle = extract_lex_min_cycle(graph, &mean);
    debug_assert!(!cycle.is_empty());
    Some(MinMeanCycle { mean, cycle })
}

/// In shifted weights w' = L·w - W every cycle has weight ≥ 0 and the
/// minimum-mean cycles are exactly the zero-weight ones, which all lie in
/// the tight subgraph of a shortest-walk potential.  The certificate is
/// the least (length, state sequence) cycle there.
fn extract_lex_min_cycle(graph: &PhiGraph, mean: &BigRational) -> Vec<usize> {
    let v = graph.state_count();
    let w_num = mean.numer().to_i64().expect("cycle weight fits i64");
    let w_den = mean.denom().to_i64().expect("cycle length fits i64");
    let shifted = |w: u64| -> i64 { w as i64 * w_den - w_num };

    // Bellman-Ford potentials from an artificial zero-source
    let mut h = vec![0i64; v];
    for _ in 0..v {
        let mut changed = false;
        for from in 0..v {
            for e in &graph.edges[from] {
                let cand = h[from] + shifted(e.weight);
                if cand < h[e.to] {
                    h[e.to] = cand;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let tight: Vec<Vec<usize>> = (0..v)
        .map(|from| {
            graph.edges[from]
                .iter()
                .filter(|e| h[from] + shifted(e.weight) == h[e.to])
                .map(|e| e.to)
                .collect()
        })
        .collect();

    // shortest cycle length in the tight subgraph
    let mut best_len = usize::MAX;
    let mut starts = Vec::new();
    for s in 0..v {
        if let Some(len) = shortest_cycle_through(&tight, s) {
            if len < best_len {
                best_len = len;
                starts.clear();
            }
            if len == best_len {
                starts.push(s);
            }
        }
    }
    debug_assert_ne!(best_len, usize::MAX, "a zero cycle must exist");

    // smallest feasible start, then greedy smallest next with exact-length
    // completion back to the start
    let s = starts[0];
    let mut reach = vec![vec![false; v]; best_len + 1];
    reach[0][s] = true;
    for k in 1..=best_len {
        for from in 0..v {
            if tight[from].iter().any(|&to| reach[k - 1][to]) {
                reach[k][from] = true;
            }
        }
    }
    let mut cycle = vec![s];
    let mut cur = s;
    for step in 0..best_len - 1 {
        let remaining = best_len - step - 1;
        let next = tight[cur]
            .iter()
            .copied()
            .find(|&to| reach[remaining][to])
            .expect("completion exists by construction");
        cycle.push(next);
        cur = next;
    }
    debug_assert!(tight[cur].contains(&s));
    cycle
}

fn shortest_cycle_through(tight: &[Vec<usize>], s: usize) -> Option<usize> {
    // BFS from s; first return to s gives the shortest cycle through it
    let v = tight.len();
    let mut dist = vec![usize::MAX; v];
    let mut queue = std::collections::VecDeque::new();
    for &to in &tight[s] {
        if to == s {
            return Some(1);
        }
        if dist[to] == usize::MAX {
            dist[to] = 1;
            queue.push_back(to);
        }
    }
    while let Some(u) = queue.pop_front() {
        for &to in &tight[u] {
            if to == s {
                return Some(dist[u] + 1);
            }
            if dist[to] == usize::MAX {
                dist[to] = dist[u] + 1;
                queue.push_back(to);
            }
        }
    }
    None
}

/// The density with its attainment witness.
#[derive(Debug, Clone)]
pub struct DensityCertificate {
    /// s_p(D,b), an exact rational.
    pub density: BigRational,
    /// The attaining level ℓ*.
    pub level: usize,
    /// A member u* at level ℓ* with σ_p(u*)/(f·ℓ*·(p-1)) = density.
    pub witness: SolutionVector,
    /// The state cycle realizing the minimum mean.
    pub cycle: Vec<Vec<BigInt>>,
    /// Box cardinality: the proven bound on ℓ*.
    pub bound_used: BigUint,
}

/// s_p(D,b) with certificate; `None` iff Λ(D,b) = ∅.  b = 0 returns the
/// zero density with the trivial witness u = 0 at level 1.
pub fn density(spec: &ProblemSpec, budgets: &Budgets) -> Result<Option<DensityCertificate>> {
    if spec.twist_is_zero() {
        let witness = SolutionVector::new(spec, vec![BigUint::zero(); spec.n()], 1)?;
        return Ok(Some(DensityCertificate {
            density: BigRational::zero(),
            level: 1,
            witness,
            cycle: Vec::new(),
            bound_used: box_bounds(spec).cardinality(),
        }));
    }
    let graph = build_phi_graph(spec, budgets)?;
    let Some(mmc) = min_mean_cycle(&graph) else {
        return Ok(None);
    };
    let normalizer = BigRational::from_integer(BigInt::from(
        spec.f() as u64 * (spec.p() - 1),
    ));
    let density_value = &mmc.mean / &normalizer;
    let witness = witness_from_cycle(&graph, &mmc.cycle)?;
    let level = mmc.cycle.len();
    debug_assert_eq!(
        BigRational::new(
            BigInt::from(witness.p_weight().clone()),
            BigInt::from(level as u64 * spec.f() as u64 * (spec.p() - 1)),
        ),
        density_value
    );
    let cycle = mmc
        .cycle
        .iter()
        .map(|&id| graph.states[id].iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    Ok(Some(DensityCertificate {
        density: density_value,
        level,
        witness,
        cycle,
        bound_used: box_bounds(spec).cardinality(),
    }))
}

/// Lay the cycle's digit columns out as base-q digits: step k of the
/// cycle provides digit k of every coordinate.
fn witness_from_cycle(graph: &PhiGraph, cycle: &[usize]) -> Result<SolutionVector> {
    let spec = &graph.spec;
    let n = spec.n();
    let level = cycle.len();
    let q = BigUint::from(graph.q);
    let mut entries = vec![BigUint::zero(); n];
    let mut q_pow = BigUint::one();
    for k in 0..level {
        let from = cycle[k];
        let to = cycle[(k + 1) % level];
        let edge = graph
            .edge(from, to)
            .ok_or_else(|| Error::State("cycle edge missing from graph".into()))?;
        for i in 0..n {
            entries[i] += BigUint::from(edge.digits[i]) * &q_pow;
        }
        q_pow *= &q;
    }
    SolutionVector::new(spec, entries, level)
}

/// σ(D, q^ℓ, b_ℓ) by min-plus matrix power over the Φ-graph (exact, no
/// enumeration of u), with one witness; `None` when the level is empty.
pub fn sigma_at_level(
    spec: &ProblemSpec,
    level: usize,
    budgets: &Budgets,
) -> Result<Option<(BigUint, SolutionVector)>> {
    let graph = build_phi_graph(spec, budgets)?;
    sigma_at_level_on(&graph, level)
}

pub fn sigma_at_level_on(graph: &PhiGraph, level: usize) -> Result<Option<(BigUint, SolutionVector)>> {
    assert!(level >= 1);
    let v = graph.state_count();
    let mut base = vec![vec![INF; v]; v];
    for (from, adj) in graph.edges.iter().enumerate() {
        for e in adj {
            base[from][e.to] = base[from][e.to].min(e.weight);
        }
    }
    let power = minplus_power(&base, level);
    let best = (0..v)
        .map(|i| (power[i][i], i))
        .min()
        .filter(|&(w, _)| w < INF);
    let Some((sigma, start)) = best else {
        return Ok(None);
    };

    // rebuild one optimal closed walk from `start` by exact-length DP
    let mut dist = vec![vec![INF; v]; level + 1];
    dist[0][start] = 0;
    for k in 1..=level {
        for from in 0..v {
            if dist[k - 1][from] >= INF {
                continue;
            }
            for e in &graph.edges[from] {
                let cand = dist[k - 1][from] + e.weight;
                if cand < dist[k][e.to] {
                    dist[k][e.to] = cand;
                }
            }
        }
    }
    debug_assert_eq!(dist[level][start], sigma);
    // walk backwards choosing the smallest feasible predecessor
    let mut seq = vec![0usize; level + 1];
    seq[level] = start;
    for k in (1..=level).rev() {
        let to = seq[k];
        let need = if k == level { sigma } else { dist[k][to] };
        let mut found = None;
        'pred: for from in 0..v {
            if dist[k - 1][from] >= INF {
                continue;
            }
            for e in &graph.edges[from] {
                if e.to == to && dist[k - 1][from] + e.weight == need {
                    found = Some(from);
                    break 'pred;
                }
            }
        }
        seq[k - 1] = found.ok_or_else(|| Error::State("walk reconstruction failed".into()))?;
    }
    debug_assert_eq!(seq[0], start);
    let witness = witness_from_cycle(graph, &seq[..level])?;
    debug_assert_eq!(*witness.p_weight(), BigUint::from(sigma));
    Ok(Some((BigUint::from(sigma), witness)))
}

fn minplus_mul(a: &[Vec<u64>], b: &[Vec<u64>]) -> Vec<Vec<u64>> {
    let v = a.len();
    let mut out = vec![vec![INF; v]; v];
    for i in 0..v {
        for t in 0..v {
            let aw = a[i][t];
            if aw >= INF {
                continue;
            }
            for j in 0..v {
                let bw = b[t][j];
                if bw >= INF {
                    continue;
                }
                let cand = aw + bw;
                if cand < out[i][j] {
                    out[i][j] = cand;
                }
            }
        }
    }
    out
}

fn minplus_power(base: &[Vec<u64>], e: usize) -> Vec<Vec<u64>> {
    assert!(e >= 1);
    let mut result: Option<Vec<Vec<u64>>> = None;
    let mut sq = base.to_vec();
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            result = Some(match result {
                None => sq.clone(),
                Some(r) => minplus_mul(&r, &sq),
            });
        }
        e >>= 1;
        if e > 0 {
            sq = minplus_mul(&sq, &sq);
        }
    }
    result.expect("e >= 1")
}

/// Which levels ℓ ≤ horizon have solutions, by boolean closed-walk
/// reachability on the Φ-graph (independent of the elimination route).
pub fn solvable_levels_up_to(
    spec: &ProblemSpec,
    horizon: usize,
    budgets: &Budgets,
) -> Result<Vec<usize>> {
    if spec.twist_is_zero() {
        return Ok((1..=horizon).collect());
    }
    let graph = build_phi_graph(spec, budgets)?;
    let v = graph.state_count();
    let words = v.div_ceil(64);
    let adj: Vec<Vec<u64>> = (0..v)
        .map(|from| {
            let mut row = vec![0u64; words];
            for e in &graph.edges[from] {
                row[e.to / 64] |= 1 << (e.to % 64);
            }
            row
        })
        .collect();
    let mut cur = adj.clone();
    let mut out = Vec::new();
    for level in 1..=horizon {
        if level > 1 {
            // cur = cur·adj over the boolean semiring
            let mut next = vec![vec![0u64; words]; v];
            for i in 0..v {
                for t in 0..v {
                    if cur[i][t / 64] >> (t % 64) & 1 == 1 {
                        for w in 0..words {
                            next[i][w] |= adj[t][w];
                        }
                    }
                }
            }
            cur = next;
        }
        if (0..v).any(|i| cur[i][i / 64] >> (i % 64) & 1 == 1) {
            out.push(level);
        }
    }
    Ok(out)
}

/// The closed-form bound (f(p-1) - σ_p(b)) / (f(p-1)·max_i σ_p(d_i)),
/// with σ_p(d_i) = Σ_j σ_p(|d_ij|).  Proven for m = 1; the coordinate-wise
/// extension to m > 1 is flagged as heuristic.
#[derive(Debug, Clone)]
pub struct PracticalBound {
    pub bound: BigRational,
    pub heuristic: bool,
}

pub fn practical_lower_bound(spec: &ProblemSpec) -> PracticalBound {
    let p = BigUint::from(spec.p());
    let fp1 = BigInt::from(spec.f() as u64 * (spec.p() - 1));
    let sigma_b: BigUint = spec.twist().iter().map(|b| digits::weight(b, &p)).sum();
    let max_d: BigUint = spec
        .exponents()
        .iter()
        .map(|row| {
            row.iter()
                .map(|d| digits::weight(&d.abs().to_biguint().expect("abs"), &p))
                .sum::<BigUint>()
        })
        .max()
        .unwrap_or_else(BigUint::zero);
    let heuristic = spec.m() > 1;
    if max_d.is_zero() {
        return PracticalBound { bound: BigRational::zero(), heuristic: true };
    }
    let numer = &fp1 - BigInt::from(sigma_b);
    let denom = &fp1 * BigInt::from(max_d);
    PracticalBound { bound: BigRational::new(numer, denom), heuristic }
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

    fn budgets() -> Budgets {
        Budgets::default()
    }

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn brute_force_examples() {
        let spec = ProblemSpec::new(7, 1, rows(&[&[1], &[2]]), bigs(&[2])).unwrap();
        let got = sigma_min_bruteforce(&spec, 1, &budgets()).unwrap().unwrap();
        assert_eq!(got.sigma, BigUint::from(2u32));
        assert_eq!(got.minimizers.len(), 1);
        assert_eq!(got.minimizers[0].entries(), &bigs(&[0, 2]));

        let spec = ProblemSpec::new(7, 1, rows(&[&[1]]), bigs(&[2])).unwrap();
        let got = sigma_min_bruteforce(&spec, 1, &budgets()).unwrap().unwrap();
        assert_eq!(got.sigma, BigUint::from(4u32));
        assert_eq!(got.minimizers[0].entries(), &bigs(&[4]));

        let spec = ProblemSpec::new(3, 1, rows(&[&[2]]), bigs(&[1])).unwrap();
        assert!(sigma_min_bruteforce(&spec, 1, &budgets()).unwrap().is_none());
    }

    #[test]
    fn graph_example_q3() {
        let spec = ProblemSpec::new(3, 1, rows(&[&[2]]), bigs(&[1])).unwrap();
        let g = build_phi_graph(&spec, &budgets()).unwrap();
        assert_eq!(g.states(), &[vec![0], vec![1], vec![2]]);
        // edges: 0→1 (w=1, a=1), 1→2 (w=2, a=2), 2→1 (w=0, a=0)
        let all: Vec<(usize, usize, u64, Vec<u64>)> = g
            .edges()
            .iter()
            .enumerate()
            .flat_map(|(from, adj)| {
                adj.iter().map(move |e| (from, e.to, e.weight, e.digits.clone()))
            })
            .collect();
        assert_eq!(
            all,
            vec![
                (0, 1, 1, vec![1]),
                (1, 2, 2, vec![2]),
                (2, 1, 0, vec![0]),
            ]
        );
    }

    #[test]
    fn graph_example_q7_gauss() {
        let spec = ProblemSpec::new(7, 1, rows(&[&[1]]), bigs(&[2])).unwrap();
        let g = build_phi_graph(&spec, &budgets()).unwrap();
        assert_eq!(g.states(), &[vec![0], vec![1]]);
        let all: Vec<(usize, usize, u64)> = g
            .edges()
            .iter()
            .enumerate()
            .flat_map(|(from, adj)| adj.iter().map(move |e| (from, e.to, e.weight)))
            .collect();
        assert_eq!(all, vec![(0, 1, 5), (1, 1, 4)]);
    }

    #[test]
    fn min_mean_cycle_examples() {
        let spec = ProblemSpec::new(3, 1, rows(&[&[2]]), bigs(&[1])).unwrap();
        let g = build_phi_graph(&spec, &budgets()).unwrap();
        let mmc = min_mean_cycle(&g).unwrap();
        assert_eq!(mmc.mean, ratio(1, 1));
        assert_eq!(mmc.cycle, vec![1, 2]);

        let spec = ProblemSpec::new(7, 1, rows(&[&[1]]), bigs(&[2])).unwrap();
        let g = build_phi_graph(&spec, &budgets()).unwrap();
        let mmc = min_mean_cycle(&g).unwrap();
        assert_eq!(mmc.mean, ratio(4, 1));
        assert_eq!(mmc.cycle, vec![1]);

        // unsolvable system: acyclic graph
        let spec = ProblemSpec::new(7, 1, rows(&[&[1, 1]]), bigs(&[1, 2])).unwrap();
        let g = build_phi_graph(&spec, &budgets()).unwrap();
        assert!(min_mean_cycle(&g).is_none());
    }

    #[test]
    fn density_examples() {
        let spec = ProblemSpec::new(3, 1, rows(&[&[2]]), bigs(&[1])).unwrap();
        let cert = density(&spec, &budgets()).unwrap().unwrap();
        assert_eq!(cert.density, ratio(1, 2));
        assert_eq!(cert.level, 2);
        assert_eq!(cert.witness.entries(), &bigs(&[2]));
        assert!(is_member(&spec, cert.witness.entries(), cert.level).unwrap());

        let spec = ProblemSpec::new(7, 1, rows(&[&[1]]), bigs(&[2])).unwrap();
        let cert = density(&spec, &budgets()).unwrap().unwrap();
        assert_eq!(cert.density, ratio(2, 3));
        assert_eq!(cert.level, 1);
        assert_eq!(cert.witness.entries(), &bigs(&[4]));

        let spec = ProblemSpec::new(7, 1, rows(&[&[1], &[2]]), bigs(&[2])).unwrap();
        let cert = density(&spec, &budgets()).unwrap().unwrap();
        assert!(cert.density <= ratio(1, 3));
        // σ(ℓ=1) = 2 means density ≤ 2/6; the certificate is the true min
        let bound = practical_lower_bound(&spec);
        assert!(cert.density >= bound.bound);

        let spec = ProblemSpec::new(7, 1, rows(&[&[1, 1]]), bigs(&[1, 2])).unwrap();
        assert!(density(&spec, &budgets()).unwrap().is_none());
    }

    #[test]
    fn density_zero_twist() {
        let spec = ProblemSpec::new(7, 1, rows(&[&[1], &[2]]), bigs(&[0])).unwrap();
        let cert = density(&spec, &budgets()).unwrap().unwrap();
        assert!(cert.density.is_zero());
        assert_eq!(cert.level, 1);
        assert!(cert.witness.p_weight().is_zero());
    }

    #[test]
    fn practical_bound_examples() {
        let spec = ProblemSpec::new(7, 1, rows(&[&[1], &[2]]), bigs(&[2])).unwrap();
        let b = practical_lower_bound(&spec);
        assert_eq!(b.bound, ratio(1, 3));
        assert!(!b.heuristic);

        let spec = ProblemSpec::new(2, 3, rows(&[&[1], &[2], &[3]]), bigs(&[1])).unwrap();
        let b = practical_lower_bound(&spec);
        assert_eq!(b.bound, ratio(1, 3));

        let spec = ProblemSpec::new(5, 1, rows(&[&[1, 1], &[2, -1]]), bigs(&[1, 2])).unwrap();
        assert!(practical_lower_bound(&spec).heuristic);
    }

    #[test]
    fn sigma_at_level_matches_bruteforce() {
        let cases: Vec<(u64, u32, Vec<Vec<BigInt>>, Vec<BigUint>)> = vec![
            (7, 1, rows(&[&[1], &[2]]), bigs(&[2])),
            (3, 1, rows(&[&[2]]), bigs(&[1])),
            (2, 3, rows(&[&[1], &[2], &[3]]), bigs(&[1])),
            (5, 1, rows(&[&[1], &[-1]]), bigs(&[3])),
            (3, 2, rows(&[&[2], &[3]]), bigs(&[5])),
        ];
        for (p, f, d, b) in cases {
            let spec = ProblemSpec::new(p, f, d, b).unwrap();
            for level in 1..=3usize {
                let q_level = spec.q_pow(level);
                if q_level.to_u64().map_or(true, |x| {
                    (x as u128).pow(spec.n() as u32) > 2_000_000
                }) {
                    continue;
                }
                let brute = sigma_min_bruteforce(&spec, level, &budgets()).unwrap();
                let graph = sigma_at_level(&spec, level, &budgets()).unwrap();
                match (brute, graph) {
                    (None, None) => {}
                    (Some(b), Some((sigma, witness))) => {
                        assert_eq!(b.sigma, sigma, "p={p} f={f} ℓ={level}");
                        assert_eq!(*witness.p_weight(), sigma);
                    }
                    (b, g) => panic!("mismatch at p={p} f={f} ℓ={level}: {b:?} vs {g:?}"),
                }
            }
        }
    }

    #[test]
    fn dp_oracle_matches_enumeration() {
        let spec = ProblemSpec::new(3, 1, rows(&[&[2], &[-1]]), bigs(&[1])).unwrap();
        let q = 3u64;
        let enum_oracle = build_target_oracle(&spec, q, &budgets()).unwrap();
        let mut dp_budgets = budgets();
        dp_budgets.edge_enum = 1; // force the DP path
        let dp_oracle = build_target_oracle(&spec, q, &dp_budgets).unwrap();
        for t in -10i64..=10 {
            let a = enum_oracle.query(&[t]);
            let b = dp_oracle.query(&[t]);
            assert_eq!(a, b, "target {t}");
        }
    }

    #[test]
    fn solvable_levels_match_generator() {
        let spec = ProblemSpec::new(3, 1, rows(&[&[2]]), bigs(&[1])).unwrap();
        let levels = solvable_levels_up_to(&spec, 8, &budgets()).unwrap();
        assert_eq!(levels, vec![2, 4, 6, 8]);

        let spec = ProblemSpec::new(7, 1, rows(&[&[1, 1]]), bigs(&[1, 2])).unwrap();
        assert!(solvable_levels_up_to(&spec, 8, &budgets()).unwrap().is_empty());
    }
}
