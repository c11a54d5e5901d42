//! Serializable report shapes.  Exact rationals are "num/den" strings,
//! arbitrary-precision integers are decimal strings; small structural
//! integers (p, f, levels, degrees) stay JSON numbers.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use pdensity_core::charsum::{BoundReport, CharSumResult, CongruenceReport, RationalBound};
use pdensity_core::density::{DensityCertificate, PracticalBound};
use pdensity_core::lfunction::{LFunctionResult, MuReport};
use pdensity_core::padic::TowerElement;
use pdensity_core::solvability::SolvabilityReport;
use pdensity_core::Valuation;

pub fn rational_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn big_string(x: &BigUint) -> String {
    x.to_string()
}

pub fn bigint_string(x: &BigInt) -> String {
    x.to_string()
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", content = "value")]
pub enum ValuationOut {
    #[serde(rename = "exact")]
    Exact(u64),
    #[serde(rename = "at_least")]
    AtLeast(u64),
}

impl From<Valuation> for ValuationOut {
    fn from(v: Valuation) -> Self {
        match v {
            Valuation::Exact(x) => ValuationOut::Exact(x),
            Valuation::AtLeast(x) => ValuationOut::AtLeast(x),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", content = "value")]
pub enum RationalOut {
    #[serde(rename = "exact")]
    Exact(String),
    #[serde(rename = "at_least")]
    AtLeast(String),
}

impl From<&RationalBound> for RationalOut {
    fn from(v: &RationalBound) -> Self {
        match v {
            RationalBound::Exact(r) => RationalOut::Exact(rational_string(r)),
            RationalBound::AtLeast(r) => RationalOut::AtLeast(rational_string(r)),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SolvableOut {
    pub solvable: bool,
    pub residuals: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator_big: Option<String>,
    pub per_prime: Vec<PerPrimeOut>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PerPrimeOut {
    pub r: u64,
    pub e: u32,
    pub f: u32,
}

impl From<&SolvabilityReport> for SolvableOut {
    fn from(rep: &SolvabilityReport) -> Self {
        let (generator, generator_big) = match &rep.generator {
            None => (None, None),
            Some(g) => match g.to_u64() {
                Some(small) => (Some(small), None),
                None => (None, Some(big_string(g))),
            },
        };
        SolvableOut {
            solvable: rep.solvable,
            residuals: rep.residuals.iter().map(bigint_string).collect(),
            generator,
            generator_big,
            per_prime: rep
                .per_prime
                .iter()
                .map(|&(r, e, f)| PerPrimeOut { r, e, f })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct LowerBoundOut {
    pub value: String,
    pub heuristic: bool,
}

impl From<&PracticalBound> for LowerBoundOut {
    fn from(b: &PracticalBound) -> Self {
        LowerBoundOut { value: rational_string(&b.bound), heuristic: b.heuristic }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DensityOut {
    pub density: String,
    pub level: u64,
    pub witness: Vec<String>,
    pub witness_weight: String,
    pub cycle: Vec<Vec<String>>,
    pub bound_used: String,
    pub lower_bound: LowerBoundOut,
}

pub fn density_out(cert: &DensityCertificate, bound: &PracticalBound) -> DensityOut {
    DensityOut {
        density: rational_string(&cert.density),
        level: cert.level as u64,
        witness: cert.witness.entries().iter().map(big_string).collect(),
        witness_weight: big_string(cert.witness.p_weight()),
        cycle: cert
            .cycle
            .iter()
            .map(|state| state.iter().map(bigint_string).collect())
            .collect(),
        bound_used: big_string(&cert.bound_used),
        lower_bound: bound.into(),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SigmaOut {
    pub ell: u64,
    /// `None` when L(D, q^ℓ, b_ℓ) is empty.
    pub sigma: Option<String>,
    pub witness: Option<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TowerElementOut {
    /// Coefficients of π^0..π^{p-2}, each a coordinate list over the
    /// lifted power basis.
    pub pi_coeffs: Vec<Vec<String>>,
    pub coord_precision: u64,
    pub pi_precision: u64,
}

pub fn tower_element_out(x: &TowerElement) -> TowerElementOut {
    TowerElementOut {
        pi_coeffs: x
            .coeffs()
            .iter()
            .map(|c| c.coords().iter().map(big_string).collect())
            .collect(),
        coord_precision: x.coord_prec() as u64,
        pi_precision: x.prec_pi() as u64,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SumOut {
    pub ell: u64,
    pub v_pi: ValuationOut,
    pub v_q: RationalOut,
    pub precision: u64,
    pub value: TowerElementOut,
}

pub fn sum_out(r: &CharSumResult) -> SumOut {
    SumOut {
        ell: r.level as u64,
        v_pi: r.v_pi.into(),
        v_q: (&r.v_q).into(),
        precision: r.precision as u64,
        value: tower_element_out(&r.value),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BoundOut {
    pub ell: u64,
    pub lhs_v_q: RationalOut,
    pub rhs: String,
    pub holds: bool,
    pub marker_dominated: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_level: Option<String>,
}

pub fn bound_out(r: &BoundReport) -> BoundOut {
    BoundOut {
        ell: r.level as u64,
        lhs_v_q: (&r.lhs).into(),
        rhs: rational_string(&r.rhs),
        holds: r.holds,
        marker_dominated: r.marker_dominated,
        sigma_level: r.sigma_level.as_ref().map(big_string),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CongruenceOut {
    pub ell: u64,
    pub sigma: Option<u64>,
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unit_nonzero: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_valuation: Option<bool>,
    pub v_pi: ValuationOut,
}

pub fn congruence_out(r: &CongruenceReport) -> CongruenceOut {
    CongruenceOut {
        ell: r.level as u64,
        sigma: r.sigma,
        holds: r.holds,
        unit_nonzero: r.unit_nonzero,
        exact_valuation: r.exact_valuation,
        v_pi: r.v_pi.into(),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct LFunctionOut {
    pub num_degree: u64,
    pub den_degree: u64,
    pub numerator: Vec<TowerElementOut>,
    pub denominator: Vec<TowerElementOut>,
    pub num_polygon: Vec<(u64, u64)>,
    pub den_polygon: Vec<(u64, u64)>,
    pub beta_v_q: Vec<String>,
    pub alpha_v_q: Vec<String>,
    /// `None` encodes μ = +∞ (L ≡ 1).
    pub mu: Option<String>,
}

pub fn lfunction_out(r: &LFunctionResult) -> LFunctionOut {
    LFunctionOut {
        num_degree: (r.numerator.len() - 1) as u64,
        den_degree: (r.denominator.len() - 1) as u64,
        numerator: r.numerator.iter().map(tower_element_out).collect(),
        denominator: r.denominator.iter().map(tower_element_out).collect(),
        num_polygon: r.num_polygon.iter().map(|&(a, b)| (a as u64, b)).collect(),
        den_polygon: r.den_polygon.iter().map(|&(a, b)| (a as u64, b)).collect(),
        beta_v_q: r.beta_vq.iter().map(rational_string).collect(),
        alpha_v_q: r.alpha_vq.iter().map(rational_string).collect(),
        mu: r.mu.as_ref().map(rational_string),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MuOut {
    pub mu: Option<String>,
    pub s_p: String,
    pub holds: bool,
}

pub fn mu_out(r: &MuReport) -> MuOut {
    MuOut {
        mu: r.mu.as_ref().map(rational_string),
        s_p: rational_string(&r.s_p),
        holds: r.holds,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct VerifyOut {
    pub solvable: SolvableOut,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density: Option<DensityOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub attainment: Option<AttainmentOut>,
    pub levels: Vec<VerifyLevelOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lfunction: Option<LFunctionOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<MuOut>,
    pub all_pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct VerifyLevelOut {
    pub ell: u64,
    pub sum: SumOut,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<BoundOut>,
    pub congruence: Option<CongruenceOut>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct AttainmentOut {
    pub coefficients: Vec<Vec<u64>>,
    pub sigma: u64,
    pub v_pi: u64,
    pub candidates_tried: u64,
}
