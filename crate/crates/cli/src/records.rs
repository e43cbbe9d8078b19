//! Serialisable output records.
//!
//! Every JSON document is an [`Envelope`] around one record. Reals go
//! through [`Real`] so that infinities survive as `"inf"`; rationals are
//! `"p/q"` strings.

use std::fmt;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub const SCHEMA: &str = "qcorr/1";

/// An `f64` whose non-finite values serialise as `"inf"`, `"-inf"`, `"nan"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Real(pub f64);

impl From<f64> for Real {
    fn from(v: f64) -> Self {
        Real(v)
    }
}

pub fn reals(v: &[f64]) -> Vec<Real> {
    v.iter().map(|&x| Real(x)).collect()
}

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v = self.0;
        if v.is_nan() {
            s.serialize_str("nan")
        } else if v == f64::INFINITY {
            s.serialize_str("inf")
        } else if v == f64::NEG_INFINITY {
            s.serialize_str("-inf")
        } else {
            s.serialize_f64(v)
        }
    }
}

struct RealVisitor;

impl Visitor<'_> for RealVisitor {
    type Value = Real;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a number or one of \"inf\", \"-inf\", \"nan\"")
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<Real, E> {
        Ok(Real(v))
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Real, E> {
        Ok(Real(v as f64))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Real, E> {
        Ok(Real(v as f64))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Real, E> {
        match v {
            "inf" => Ok(Real(f64::INFINITY)),
            "-inf" => Ok(Real(f64::NEG_INFINITY)),
            "nan" => Ok(Real(f64::NAN)),
            _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
        }
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Real, D::Error> {
        d.deserialize_any(RealVisitor)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub schema: String,
    pub command: String,
    pub seed: u64,
    #[serde(flatten)]
    pub body: T,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermalRecord {
    pub levels: Vec<Real>,
    pub beta: Real,
    pub populations: Vec<Real>,
    /// `None` at zero temperature.
    pub partition_function: Option<Real>,
    pub energy: Real,
    pub entropy: Real,
    /// `None` at zero or infinite temperature.
    pub free_energy: Option<Real>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyRecord {
    pub dim: usize,
    pub eigenvalues: Vec<Real>,
    pub entropy: Real,
    /// `S(ρ‖τ(β))` when a Hamiltonian and temperature are given.
    pub relative_entropy: Option<Real>,
    /// `β(F(ρ) − F(τ(β)))`, same condition.
    pub free_energy_gap: Option<Real>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MutualInfoRecord {
    pub d_a: usize,
    pub d_b: usize,
    pub s_a: Real,
    pub s_b: Real,
    pub s_ab: Real,
    pub mutual_information: Real,
    pub conditional_entropy: Real,
    pub entangled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErgotropyRecord {
    pub value: Real,
    pub energy: Real,
    pub passive_energy: Real,
    pub passive_populations: Vec<Real>,
    pub optimal_permutation: Vec<usize>,
    pub passive: bool,
    pub completely_passive: bool,
    pub fitted_beta: Option<Real>,
    pub fit_residual: Real,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatReportRecord {
    pub dq_a: Real,
    pub dq_b: Real,
    pub ds_a: Real,
    pub ds_b: Real,
    pub di: Real,
    pub beta_a: Real,
    pub beta_b: Real,
    pub clausius_lhs: Real,
    pub energy_leak: Real,
    pub flow: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatFlowRecord {
    pub beta_a: Real,
    pub beta_b: Real,
    pub coherence_fraction: Real,
    pub coherence: Real,
    pub initial_mutual_information: Real,
    /// Best anomalous exchange angle on the grid, if any.
    pub angle: Option<Real>,
    pub grid: Option<HeatReportRecord>,
    /// Result of the unitary search when requested and successful.
    pub search: Option<HeatReportRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionRow {
    pub sample: usize,
    pub total_beta_w: Real,
    pub rel_entropy_r: Real,
    pub rel_entropy_a: Real,
    pub rel_entropy_b: Real,
    pub i_sr: Real,
    pub i_ab: Real,
    pub identity_residual: Real,
    pub bound_respected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rows<T> {
    pub rows: Vec<T>,
}

/// One protocol run; also the row type of `sweep`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolRecord {
    pub beta: Real,
    pub w_budget: Real,
    pub beta_i: Real,
    pub w_i: Real,
    pub w_ii: Real,
    pub achieved_i: Real,
    pub bound_i: Real,
    pub threshold: Real,
    pub regime: String,
    pub saturation: Real,
    pub feasibility: String,
    pub residual: Option<Real>,
    pub violated_constraint: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub ordering: String,
    pub rho00: String,
    pub d1_sq: String,
    pub d2_sq: String,
    pub in_interval: bool,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateRecord {
    pub ordering: String,
    pub rho00: String,
    pub d1_sq: String,
    pub d2_sq: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XStateRecord {
    pub a_i: String,
    pub b_i: String,
    pub a: String,
    pub b: String,
    pub diagonal: Vec<String>,
    pub candidates: Vec<CandidateRecord>,
    pub interval: Vec<String>,
    /// Common denominator of the candidates and the interval ends.
    pub common_denominator: String,
    pub candidate_numerators: Vec<String>,
    pub interval_numerators: Vec<String>,
    pub status: String,
    pub certificate: Option<CertificateRecord>,
    pub violated_constraint: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubadditivityRecord {
    pub passes: bool,
    pub lhs: Real,
    pub rhs: Real,
    pub margin: Real,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchRecord {
    pub status: String,
    pub residual: Real,
    pub per_start_residuals: Vec<Real>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityRecord {
    pub beta: Real,
    pub beta_i: Real,
    pub status: String,
    pub subadditivity: SubadditivityRecord,
    /// Exact analysis, two qubits only.
    pub xstate: Option<XStateRecord>,
    pub search: Option<SearchRecord>,
}
