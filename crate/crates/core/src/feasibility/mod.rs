//! Existence of unitaries that take a cooled thermal product state to a
//! state whose marginals are both thermal at the ambient temperature.
//!
//! Three levels of evidence are offered:
//!
//! - [`subadditivity_feasible`]: an entropic necessary condition; its failure
//!   certifies that no such unitary exists.
//! - [`xstate`]: an exact rational case analysis for two qubits restricted
//!   to X-shaped final states.
//! - [`search`]: numerical search over the full unitary group.

pub mod search;
pub mod xstate;

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::states::{self, InverseTemperature, LocalHamiltonian};

pub use search::{
    marginal_residual, max_mutual_information_unitary, search_correlating_unitary, CorrelatingSearch, MaxCorrelation,
    CERTIFICATION_THRESHOLD,
};
pub use xstate::{admissible_orderings, xstate_feasibility, EigenOrdering, XStateAnalysis, XStateCertificate, XStateProblem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeasibilityStatus {
    FeasibleCertified,
    InfeasibleCertified,
    InfeasibleWithinAnsatz,
    Unknown,
}

impl FeasibilityStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::FeasibleCertified => "feasible_certified",
            Self::InfeasibleCertified => "infeasible_certified",
            Self::InfeasibleWithinAnsatz => "infeasible_within_ansatz",
            Self::Unknown => "unknown",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Certificate {
    XState(XStateCertificate),
    Unitary(CMat),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityVerdict {
    pub status: FeasibilityStatus,
    pub certificate: Option<Certificate>,
    pub violated_constraint: Option<String>,
    /// Best marginal distance reached by a numerical search.
    pub residual: Option<f64>,
}

impl FeasibilityVerdict {
    pub fn unknown(residual: f64, reason: impl Into<String>) -> Self {
        Self {
            status: FeasibilityStatus::Unknown,
            certificate: None,
            violated_constraint: Some(reason.into()),
            residual: Some(residual),
        }
    }
}

/// Result of the subadditivity test
/// `|S(τ_A(β)) − S(τ_B(β))| ≤ S(τ_A(β_I)) + S(τ_B(β_I))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubadditivityCheck {
    pub passes: bool,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`; negative when the test fails.
    pub margin: f64,
}

impl SubadditivityCheck {
    /// A failure is a proof that no unitary reaches the thermal targets.
    pub fn verdict(&self) -> Option<FeasibilityVerdict> {
        (!self.passes).then(|| FeasibilityVerdict {
            status: FeasibilityStatus::InfeasibleCertified,
            certificate: None,
            violated_constraint: Some(format!(
                "subadditivity: |S_A(beta) - S_B(beta)| = {} exceeds S_A(beta_I) + S_B(beta_I) = {}",
                self.lhs, self.rhs
            )),
            residual: None,
        })
    }
}

/// Necessary condition for thermal-at-`β` marginals on the orbit of
/// `τ_A(β_I) ⊗ τ_B(β_I)`.
pub fn subadditivity_feasible(
    h_a: &LocalHamiltonian,
    h_b: &LocalHamiltonian,
    beta: InverseTemperature,
    beta_i: InverseTemperature,
) -> Result<SubadditivityCheck> {
    if beta_i.value() < beta.value() {
        return Err(Error::InvalidTemperature(format!(
            "cooled inverse temperature {} is below the ambient {}",
            beta_i.value(),
            beta.value()
        )));
    }
    let s = |h: &LocalHamiltonian, b: InverseTemperature| states::von_neumann_entropy(&states::thermal_state(h, b));
    let lhs = (s(h_a, beta) - s(h_b, beta)).abs();
    let rhs = s(h_a, beta_i) + s(h_b, beta_i);
    Ok(SubadditivityCheck { passes: lhs <= rhs + 1e-12, lhs, rhs, margin: rhs - lhs })
}
