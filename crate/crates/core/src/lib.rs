//! Exact arithmetic for twisted exponential sums over finite fields.
//!
//! Everything here is integer-exact: arbitrary-precision integers and
//! rationals, finite fields `F_{p^f}` with an explicit tower embedding,
//! and the ramified p-adic ring `W[π]` with `(1+π)^p = 1`, in which the
//! sums `S_ℓ(F,b)` are evaluated and their `π`-adic valuations certified.
//!
//! The main entry points, bottom-up:
//!
//! * [`digits`] — base-b expansions and the weight statistics σ_p, ρ_p.
//! * [`exponent_system`] — the problem data (p, f, D, b), membership in
//!   the solution sets `L(D, q^ℓ, b_ℓ)`, the Frobenius digit shift and
//!   the quotient maps φ_ℓ, Φ_u.
//! * [`solvability`] — whether any level has solutions, and the exact
//!   generator ℓ₀ of the solvable levels.
//! * [`density`] — the p-density s_p(D,b) as a minimum-mean-cycle over
//!   the Φ-state graph, with an attainment certificate.
//! * [`finite_field`], [`padic`] — field towers and the ring `W[π]`.
//! * [`charsum`] — exact evaluation of `S_ℓ(F,b)`, the valuation bound
//!   `v_q(S_ℓ) ≥ ℓ·s_p(D,b)`, and the leading-term congruence.
//! * [`lfunction`] — L-series, rational reconstruction, Newton polygons
//!   and the bound μ(F,b) ≥ s_p(D,b).

pub mod charsum;
pub mod density;
pub mod digits;
pub mod exponent_system;
pub mod finite_field;
pub mod lfunction;
pub mod padic;
pub mod solvability;

mod error;
mod primes;

pub use error::{Error, Result};

/// Resource limits for the enumeration-heavy operations.
///
/// Every operation that may enumerate a large set checks against these
/// before starting and returns [`Error::Budget`] instead of running away.
#[derive(Debug, Clone)]
pub struct Budgets {
    /// Max candidates for the brute-force scan over `{0..q^ℓ-1}^n`.
    pub enum_candidates: u128,
    /// Max states of the Φ-graph (box cardinality).
    pub graph_states: u128,
    /// Max digit vectors enumerated per edge-weight subproblem before
    /// switching to the per-coordinate DP.
    pub edge_enum: u128,
    /// Max points of the sum enumeration `(q^ℓ - 1)^m`.
    pub sum_points: u128,
    /// Max finite-field order `p^{fℓ}` that will be constructed.
    pub field_order: u128,
    /// Field order up to which discrete logs use a full table.
    pub dlog_table: u128,
    /// Hard cap on the p-adic working precision K (after retries).
    pub precision_cap: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            enum_candidates: 100_000_000,
            graph_states: 10_000,
            edge_enum: 100_000,
            sum_points: 10_000_000,
            field_order: 1 << 24,
            dlog_table: 1 << 20,
            precision_cap: 256,
        }
    }
}

impl Budgets {
    pub(crate) fn check(&self, what: &'static str, needed: u128, limit: u128) -> Result<()> {
        if needed > limit {
            Err(Error::Budget { what, needed, limit })
        } else {
            Ok(())
        }
    }
}

/// A π-adic valuation that is either certified exact or only known to be
/// at least the stated amount (the working precision was exhausted).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Valuation {
    Exact(u64),
    AtLeast(u64),
}

impl Valuation {
    /// The certified lower bound (the value itself when exact).
    pub fn lower_bound(&self) -> u64 {
        match *self {
            Valuation::Exact(v) | Valuation::AtLeast(v) => v,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Valuation::Exact(_))
    }
}

impl std::fmt::Display for Valuation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Valuation::Exact(v) => write!(f, "{v}"),
            Valuation::AtLeast(v) => write!(f, ">={v}"),
        }
    }
}
