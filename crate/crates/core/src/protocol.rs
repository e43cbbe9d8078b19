//! Converting work into correlations between two systems that start in
//! equilibrium with an ambient bath at inverse temperature `β`.
//!
//! The two-step protocol first cools the joint system `S = AB` to `β_I ≥ β`
//! (priced at its free-energy cost, the bath absorbing the entropy), then
//! applies a global unitary that returns both marginals to `τ(β)`. All the
//! entropy removed in the first step reappears as mutual information.

use crate::error::{Error, Result};
use crate::feasibility::{self, Certificate, FeasibilityStatus, FeasibilityVerdict};
use crate::linalg::{self, CMat};
use crate::optimize::SearchConfig;
use crate::states::{
    self, BipartiteState, DensityMatrix, Divergence, Hamiltonian, InverseTemperature, JointHamiltonian, LocalHamiltonian,
    Side,
};

/// Spectral distance allowed between a claimed final state and the orbit of
/// the initial thermal product.
pub const ORBIT_TOL: f64 = 1e-8;

/// Slack on the regime threshold `βW > S(τ_S(β))`.
pub const THRESHOLD_SLACK: f64 = 1e-12;

/// Budget residual at which the `β_I` bisection stops.
pub const BISECTION_TOL: f64 = 1e-9;

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidTemperature(format!("ambient inverse temperature must be positive and finite, got {beta}")))
    }
}

/// `Tr(H(ρ − τ(β)))`, the average work needed to prepare `ρ` from
/// equilibrium.
pub fn work_cost_out_of_equilibrium<H: Hamiltonian + ?Sized>(final_state: &DensityMatrix, h: &H, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let tau = states::thermal_state(h, InverseTemperature::Finite(beta));
    Ok(states::internal_energy(final_state, h)? - h.expectation(tau.matrix()))
}

/// Terms of `βW = S(ρ_R‖τ_R) + S(ρ_A‖τ_A) + S(ρ_B‖τ_B) + I(S:R) + I(A:B)` for
/// a state reached unitarily from `τ_A ⊗ τ_B ⊗ τ_R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkDecomposition {
    pub total_beta_w: f64,
    pub rel_entropy_r: Divergence,
    pub rel_entropy_a: f64,
    pub rel_entropy_b: f64,
    pub i_sr: f64,
    pub i_ab: f64,
}

impl WorkDecomposition {
    pub fn sum_of_terms(&self) -> f64 {
        self.rel_entropy_r.value() + self.rel_entropy_a + self.rel_entropy_b + self.i_sr + self.i_ab
    }

    /// `|total_beta_w − sum_of_terms|`.
    pub fn identity_residual(&self) -> f64 {
        (self.total_beta_w - self.sum_of_terms()).abs()
    }
}

/// Splits `β` times the work cost of `final_state` over `A ⊗ B ⊗ R` into
/// relative entropies and mutual informations. `dims` are `[d_A, d_B, d_R]`;
/// a trivial reservoir has `d_R = 1`.
pub fn work_decomposition(
    beta: f64,
    final_state: &DensityMatrix,
    dims: [usize; 3],
    h_a: &LocalHamiltonian,
    h_b: &LocalHamiltonian,
    h_r: &LocalHamiltonian,
) -> Result<WorkDecomposition> {
    check_beta(beta)?;
    let [d_a, d_b, d_r] = dims;
    if d_a * d_b * d_r != final_state.dim() {
        return Err(Error::DimensionMismatch { expected: d_a * d_b * d_r, got: final_state.dim() });
    }
    for (h, d) in [(h_a, d_a), (h_b, d_b), (h_r, d_r)] {
        if h.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, got: h.dim() });
        }
    }
    let b = InverseTemperature::Finite(beta);
    let taus = [states::thermal_state(h_a, b), states::thermal_state(h_b, b), states::thermal_state(h_r, b)];

    let mut initial_spectrum: Vec<f64> = Vec::with_capacity(final_state.dim());
    for pa in taus[0].populations() {
        for pb in taus[1].populations() {
            for pr in taus[2].populations() {
                initial_spectrum.push(pa * pb * pr);
            }
        }
    }
    initial_spectrum.sort_by(f64::total_cmp);
    let distance = final_state
        .eigenvalues()
        .iter()
        .zip(&initial_spectrum)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    if distance > ORBIT_TOL {
        return Err(Error::NotOnOrbit { distance });
    }

    let m = final_state.matrix();
    let reduce = |keep: &[usize]| DensityMatrix::trusted(linalg::partial_trace(m, &dims, keep));
    let (rho_a, rho_b, rho_r, rho_s) = (reduce(&[0]), reduce(&[1]), reduce(&[2]), reduce(&[0, 1]));
    let entropy = states::von_neumann_entropy;
    let s_total = entropy(final_state);
    let s_s = entropy(&rho_s);

    let mut beta_w = 0.0;
    for ((rho, tau), h) in [&rho_a, &rho_b, &rho_r].into_iter().zip(&taus).zip([h_a, h_b, h_r]) {
        beta_w += beta * (h.expectation(rho.matrix()) - h.expectation(tau.matrix()));
    }
    Ok(WorkDecomposition {
        total_beta_w: beta_w,
        rel_entropy_r: states::relative_entropy(&rho_r, &taus[2])?,
        rel_entropy_a: states::relative_entropy(&rho_a, &taus[0])?.value(),
        rel_entropy_b: states::relative_entropy(&rho_b, &taus[1])?.value(),
        i_sr: (s_s + entropy(&rho_r) - s_total).max(0.0),
        i_ab: (entropy(&rho_a) + entropy(&rho_b) - s_s).max(0.0),
    })
}

/// Upper bound `βW` on the mutual information created with work `W`.
pub fn correlation_bound(w: f64, beta: f64) -> f64 {
    beta * w
}

/// `F(τ(β_I)) − F(τ(β))`, both free energies taken at the ambient
/// temperature `1/β`.
pub fn cooling_cost<H: Hamiltonian + ?Sized>(h: &H, beta: f64, beta_i: InverseTemperature) -> Result<f64> {
    check_beta(beta)?;
    if beta_i.value() < beta {
        return Err(Error::InvalidTemperature(format!(
            "cooled inverse temperature {} is below the ambient {beta}",
            beta_i.value()
        )));
    }
    if beta_i == InverseTemperature::Finite(beta) {
        return Ok(0.0);
    }
    let t = 1.0 / beta;
    let cold = states::free_energy(&states::thermal_state(h, beta_i), h, t)?;
    let warm = states::free_energy(&states::thermal_state(h, InverseTemperature::Finite(beta)), h, t)?;
    Ok((cold - warm).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `βW ≤ S(τ_S(β))`: cooling plus a marginal-restoring unitary can turn
    /// the whole budget into correlations.
    LowEnergy,
    /// Above the threshold even the ground state cannot absorb the budget.
    HighEnergy,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::LowEnergy => "low_energy",
            Self::HighEnergy => "high_energy",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolReport {
    pub w_budget: f64,
    pub beta: f64,
    pub beta_i: InverseTemperature,
    /// Cooling cost.
    pub w_i: f64,
    /// Energy left for the correlating unitary.
    pub w_ii: f64,
    pub achieved_i: f64,
    /// `β·W_budget`.
    pub bound_i: f64,
    /// `S(τ_S(β))`, the regime threshold on `βW`.
    pub threshold: f64,
    pub regime: Regime,
    /// `achieved_i / bound_i`, 1 at zero budget.
    pub saturation: f64,
    pub feasibility: FeasibilityVerdict,
    /// Step-II unitary actually applied.
    pub unitary: CMat,
}

fn smallest_gap(hs: &[&LocalHamiltonian]) -> Option<f64> {
    hs.iter().filter_map(|h| h.min_gap()).fold(None, |acc: Option<f64>, g| Some(acc.map_or(g, |a| a.min(g))))
}

/// `β_I` with `S(τ_S(β)) − S(τ_S(β_I)) = βW`, by bisection on
/// `[β, 10⁶/ω_min]`; infinite when the budget is not used up there.
fn solve_cooling_target(joint: &JointHamiltonian, beta: f64, beta_w: f64, omega_min: Option<f64>) -> InverseTemperature {
    let entropy_at = |b: f64| states::von_neumann_entropy(&states::thermal_state(joint, InverseTemperature::Finite(b)));
    let s0 = entropy_at(beta);
    let residual = |b: f64| s0 - entropy_at(b) - beta_w;
    let Some(omega) = omega_min else {
        return InverseTemperature::Infinite;
    };
    let mut hi = (1e6 / omega).max(beta);
    if residual(hi) < -BISECTION_TOL {
        return InverseTemperature::Infinite;
    }
    let mut lo = beta;
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        let r = residual(mid);
        if r < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if r.abs() <= 1e-3 * BISECTION_TOL || hi - lo <= 4.0 * f64::EPSILON * hi {
            return InverseTemperature::Finite(mid);
        }
    }
    InverseTemperature::Finite(0.5 * (lo + hi))
}

/// Cools `S = AB` to the `β_I` that spends the right share of `w_budget`, then
/// searches for a unitary returning both marginals to `τ(β)`.
///
/// Above the threshold `S(τ_S(β))` the system is cooled to its ground state
/// and the remaining energy feeds a mutual-information maximisation capped
/// at `W_II`; the verdict is then `Unknown` because thermal marginals can no
/// longer absorb the full budget. When the marginal search fails below the
/// threshold the same capped maximisation supplies the reported
/// correlations and the verdict stays `Unknown`.
pub fn run_two_step_protocol(
    h_a: &LocalHamiltonian,
    h_b: &LocalHamiltonian,
    beta: f64,
    w_budget: f64,
    search: &SearchConfig,
) -> Result<ProtocolReport> {
    check_beta(beta)?;
    search.validate()?;
    if !(w_budget >= 0.0) || !w_budget.is_finite() {
        return Err(Error::InvalidParameter(format!("work budget must be finite and non-negative, got {w_budget}")));
    }
    let joint = JointHamiltonian::noninteracting(h_a.clone(), h_b.clone());
    let ambient = InverseTemperature::Finite(beta);
    let tau_a = states::thermal_state(h_a, ambient);
    let tau_b = states::thermal_state(h_b, ambient);
    let threshold = states::von_neumann_entropy(&states::thermal_state(&joint, ambient));
    let bound_i = correlation_bound(w_budget, beta);
    let regime = if bound_i > threshold + THRESHOLD_SLACK { Regime::HighEnergy } else { Regime::LowEnergy };
    let d = joint.dim();

    if w_budget == 0.0 {
        let identity = CMat::identity(d, d);
        return Ok(ProtocolReport {
            w_budget,
            beta,
            beta_i: ambient,
            w_i: 0.0,
            w_ii: 0.0,
            achieved_i: 0.0,
            bound_i,
            threshold,
            regime,
            saturation: 1.0,
            feasibility: FeasibilityVerdict {
                status: FeasibilityStatus::FeasibleCertified,
                certificate: Some(Certificate::Unitary(identity.clone())),
                violated_constraint: None,
                residual: Some(0.0),
            },
            unitary: identity,
        });
    }

    let beta_i = match regime {
        Regime::HighEnergy => InverseTemperature::Infinite,
        Regime::LowEnergy => solve_cooling_target(&joint, beta, bound_i, smallest_gap(&[h_a, h_b])),
    };
    let w_i = cooling_cost(&joint, beta, beta_i)?;
    let w_ii = w_budget - w_i;
    let cooled = BipartiteState::product(&states::thermal_state(h_a, beta_i), &states::thermal_state(h_b, beta_i));

    let capped = |cap: f64| feasibility::max_mutual_information_unitary(&cooled, h_a, h_b, cap.max(0.0), search);
    let (unitary, achieved_i, verdict) = match regime {
        Regime::LowEnergy => {
            let found = feasibility::search_correlating_unitary(cooled.state(), &tau_a, &tau_b, search)?;
            if found.verdict.status == FeasibilityStatus::FeasibleCertified {
                let fin = cooled.evolve_unchecked(&found.unitary);
                (found.unitary, states::mutual_information(&fin), found.verdict)
            } else {
                let best = capped(w_ii)?;
                (best.unitary, best.achieved_i, found.verdict)
            }
        }
        Regime::HighEnergy => {
            let best = capped(w_ii)?;
            let residual = best_residual(&best.final_state, &tau_a, &tau_b);
            let verdict = FeasibilityVerdict::unknown(
                residual,
                format!(
                    "beta*W = {bound_i} exceeds S(tau_S(beta)) = {threshold}; step II maximises correlations under the energy cap"
                ),
            );
            (best.unitary, best.achieved_i, verdict)
        }
    };

    Ok(ProtocolReport {
        w_budget,
        beta,
        beta_i,
        w_i,
        w_ii,
        achieved_i,
        bound_i,
        threshold,
        regime,
        saturation: achieved_i / bound_i,
        feasibility: verdict,
        unitary,
    })
}

fn best_residual(s: &BipartiteState, tau_a: &DensityMatrix, tau_b: &DensityMatrix) -> f64 {
    linalg::trace_norm_hermitian(&(s.marginal(Side::Left).matrix() - tau_a.matrix()))
        + linalg::trace_norm_hermitian(&(s.marginal(Side::Right).matrix() - tau_b.matrix()))
}
