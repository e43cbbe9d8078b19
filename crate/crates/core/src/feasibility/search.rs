//! Numerical searches over the unitary group.
//!
//! Unitaries are parametrised as `exp(−iG)` with `G` Hermitian and encoded by
//! `d²` reals (see [`linalg::hermitian_from_params`]). Every start except
//! the first begins at a generator with coordinates uniform in
//! `[-init_scale, init_scale]`; start 0 begins at the identity.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{Certificate, FeasibilityStatus, FeasibilityVerdict};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::optimize::{self, LocalOptions, SearchConfig};
use crate::passivity::{self, THERMAL_FIT_TOL};
use crate::states::{self, BipartiteState, DensityMatrix, Hamiltonian, InverseTemperature, JointHamiltonian, LocalHamiltonian};

/// Residuals below this certify that the targets are reached.
pub const CERTIFICATION_THRESHOLD: f64 = 1e-8;

fn starting_point(config: &SearchConfig, n: usize) -> impl Fn(usize, &mut ChaCha8Rng) -> Vec<f64> + Sync + '_ {
    move |start, rng| {
        if start == 0 {
            vec![0.0; n]
        } else {
            (0..n).map(|_| rng.random_range(-config.init_scale..=config.init_scale)).collect()
        }
    }
}

fn local_options(config: &SearchConfig, stop_below: f64) -> LocalOptions {
    LocalOptions { max_iterations: config.max_iterations, step: 0.25 * config.init_scale, stop_below, ..Default::default() }
}

/// `‖Tr_B ρ − target_A‖₁ + ‖Tr_A ρ − target_B‖₁`.
pub fn marginal_residual(state: &CMat, d_a: usize, d_b: usize, target_a: &CMat, target_b: &CMat) -> f64 {
    let ra = linalg::partial_trace(state, &[d_a, d_b], &[0]);
    let rb = linalg::partial_trace(state, &[d_a, d_b], &[1]);
    linalg::trace_norm_hermitian(&(ra - target_a)) + linalg::trace_norm_hermitian(&(rb - target_b))
}

#[derive(Debug, Clone)]
pub struct CorrelatingSearch {
    pub verdict: FeasibilityVerdict,
    /// Best unitary found, whether or not it certifies.
    pub unitary: CMat,
    pub residual: f64,
    /// Marginal residual reached by each start, in start order.
    pub per_start_residuals: Vec<f64>,
}

/// Looks for `U` with `Tr_B(UρU†) = target_A` and `Tr_A(UρU†) = target_B`.
///
/// The simplex minimises the squared Frobenius distance of the marginals,
/// which vanishes exactly where the trace-norm residual does; the verdict
/// is decided on the trace-norm residual. A failed search reports
/// [`FeasibilityStatus::Unknown`], never infeasibility.
pub fn search_correlating_unitary(
    initial: &DensityMatrix,
    target_a: &DensityMatrix,
    target_b: &DensityMatrix,
    config: &SearchConfig,
) -> Result<CorrelatingSearch> {
    config.validate()?;
    let (d_a, d_b) = (target_a.dim(), target_b.dim());
    let d = initial.dim();
    if d_a * d_b != d {
        return Err(Error::DimensionMismatch { expected: d_a * d_b, got: d });
    }
    let rho = initial.matrix();
    let (ta, tb) = (target_a.matrix(), target_b.matrix());
    let evolve = |x: &[f64]| linalg::conjugate(&linalg::unitary_from_params(d, x), rho);
    let objective = |x: &[f64]| {
        let state = evolve(x);
        let ra = linalg::partial_trace(&state, &[d_a, d_b], &[0]);
        let rb = linalg::partial_trace(&state, &[d_a, d_b], &[1]);
        linalg::frobenius_sq(&(ra - ta)) + linalg::frobenius_sq(&(rb - tb))
    };
    let n = linalg::generator_len(d);
    let result = optimize::multi_start(config, &local_options(config, 1e-30), starting_point(config, n), objective);

    let per_start_residuals: Vec<f64> =
        result.runs.iter().map(|r| marginal_residual(&evolve(&r.x), d_a, d_b, ta, tb)).collect();
    let mut best = 0;
    for (k, &r) in per_start_residuals.iter().enumerate() {
        if r < per_start_residuals[best] {
            best = k;
        }
    }
    let residual = per_start_residuals[best];
    let unitary = linalg::unitary_from_params(d, &result.runs[best].x);
    let verdict = if residual < CERTIFICATION_THRESHOLD {
        FeasibilityVerdict {
            status: FeasibilityStatus::FeasibleCertified,
            certificate: Some(Certificate::Unitary(unitary.clone())),
            violated_constraint: None,
            residual: Some(residual),
        }
    } else {
        FeasibilityVerdict::unknown(
            residual,
            format!("best marginal residual {residual:e} after {} starts is above {CERTIFICATION_THRESHOLD:e}", config.starts),
        )
    };
    Ok(CorrelatingSearch { verdict, unitary, residual, per_start_residuals })
}

#[derive(Debug, Clone)]
pub struct MaxCorrelation {
    pub unitary: CMat,
    pub final_state: BipartiteState,
    pub achieved_i: f64,
    /// `Tr(H(UρU† − ρ))` for `H = H_A + H_B`.
    pub used_w: f64,
    /// `β·W_cap` when the initial state is a thermal product at a common
    /// `β`; `None` otherwise.
    pub bound: Option<f64>,
    /// Whether `achieved_i ≤ bound + 1e-9`; `None` without a bound.
    pub within_bound: Option<bool>,
}

/// Maximises `I(A:B)` of `UρU†` subject to an energy cap, via the penalty
/// `−I + w·max(0, used_W − W_cap)`.
pub fn max_mutual_information_unitary(
    initial: &BipartiteState,
    h_a: &LocalHamiltonian,
    h_b: &LocalHamiltonian,
    w_cap: f64,
    config: &SearchConfig,
) -> Result<MaxCorrelation> {
    config.validate()?;
    if !(w_cap >= 0.0) || !w_cap.is_finite() {
        return Err(Error::InvalidParameter(format!("energy cap must be finite and non-negative, got {w_cap}")));
    }
    let (d_a, d_b) = initial.dims();
    if h_a.dim() != d_a || h_b.dim() != d_b {
        return Err(Error::DimensionMismatch { expected: d_a * d_b, got: h_a.dim() * h_b.dim() });
    }
    let joint = JointHamiltonian::noninteracting(h_a.clone(), h_b.clone());
    let rho = initial.state().matrix();
    let d = rho.nrows();
    let e0 = joint.expectation(rho);
    let s_ab = states::von_neumann_entropy(initial.state());
    let weight = config.penalty_weight;

    let evolve = |x: &[f64]| linalg::conjugate(&linalg::unitary_from_params(d, x), rho);
    let objective = |x: &[f64]| {
        let state = evolve(x);
        let ra = linalg::partial_trace(&state, &[d_a, d_b], &[0]);
        let rb = linalg::partial_trace(&state, &[d_a, d_b], &[1]);
        let info = states::entropy_of_spectrum(&linalg::eigvalsh(&ra)) + states::entropy_of_spectrum(&linalg::eigvalsh(&rb))
            - s_ab;
        let used = joint.expectation(&state) - e0;
        -info + weight * (used - w_cap).max(0.0)
    };
    let n = linalg::generator_len(d);
    let result = optimize::multi_start(config, &local_options(config, f64::NEG_INFINITY), starting_point(config, n), objective);

    let unitary = linalg::unitary_from_params(d, &result.x);
    let final_state = initial.evolve_unchecked(&unitary);
    let achieved_i = states::mutual_information(&final_state);
    let used_w = joint.expectation(final_state.state().matrix()) - e0;
    let bound = thermal_product_beta(initial, h_a, h_b).map(|beta| match beta {
        InverseTemperature::Infinite => f64::INFINITY,
        InverseTemperature::Finite(b) => b * w_cap,
    });
    let within_bound = bound.map(|b| achieved_i <= b + 1e-9);
    Ok(MaxCorrelation { unitary, final_state, achieved_i, used_w, bound, within_bound })
}

/// Common inverse temperature of an uncorrelated state with thermal
/// marginals, if it is one.
fn thermal_product_beta(s: &BipartiteState, h_a: &LocalHamiltonian, h_b: &LocalHamiltonian) -> Option<InverseTemperature> {
    if states::mutual_information(s) > 1e-10 {
        return None;
    }
    let fa = passivity::is_completely_passive(&s.marginal(states::Side::Left), h_a, THERMAL_FIT_TOL).ok()?;
    let fb = passivity::is_completely_passive(&s.marginal(states::Side::Right), h_b, THERMAL_FIT_TOL).ok()?;
    match (fa.beta?, fb.beta?) {
        (InverseTemperature::Infinite, InverseTemperature::Infinite) => Some(InverseTemperature::Infinite),
        (InverseTemperature::Finite(a), InverseTemperature::Finite(b)) if (a - b).abs() <= 1e-8 * a.max(b).max(1.0) => {
            Some(InverseTemperature::Finite(a.max(b)))
        }
        _ => None,
    }
}
