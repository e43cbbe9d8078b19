//! Heat exchange between two subsystems with thermal marginals.
//!
//! Local energy changes are read as heat. A general unitary need not
//! conserve the local energy sum, so every report carries the difference as
//! `energy_leak` and flow is only called anomalous when that leak is small
//! compared to the heat moved.

use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, Complex64};
use crate::optimize::{self, LocalOptions, SearchConfig};
use crate::passivity::{self, THERMAL_FIT_TOL};
use crate::states::{self, check_unitary, BipartiteState, Hamiltonian, InverseTemperature, LocalHamiltonian, Side};

/// Leak tolerance used by [`heat_exchange_report`].
pub const DEFAULT_LEAK_FRACTION: f64 = 0.01;

/// Heat below this magnitude counts as no flow.
const FLOW_FLOOR: f64 = 1e-12;

/// Initial states with less mutual information than this are treated as
/// uncorrelated by [`find_anomalous_unitary`].
pub const CORRELATION_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowDirection {
    /// Heat leaves the hotter side, or nothing moves.
    Normal,
    /// Heat leaves the colder side and enters the hotter one.
    Anomalous,
    /// The marginals share a temperature.
    NotApplicable,
}

impl FlowDirection {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Normal => "normal",
            Self::Anomalous => "anomalous",
            Self::NotApplicable => "not_applicable",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatExchangeReport {
    pub dq_a: f64,
    pub dq_b: f64,
    pub ds_a: f64,
    pub ds_b: f64,
    pub di: f64,
    /// Fitted inverse temperatures of the initial marginals.
    pub beta_a: InverseTemperature,
    pub beta_b: InverseTemperature,
    /// `β_A dQ_A + β_B dQ_B`.
    pub clausius_lhs: f64,
    /// `dQ_A + dQ_B`, work injected by a non-conserving unitary.
    pub energy_leak: f64,
    pub flow: FlowDirection,
}

impl HeatExchangeReport {
    /// `clausius_lhs ≥ dI − tol`.
    pub fn satisfies_clausius(&self, tol: f64) -> bool {
        self.clausius_lhs >= self.di - tol
    }

    /// The side with the larger fitted temperature, if they differ.
    pub fn hotter_side(&self) -> Option<Side> {
        let (a, b) = (self.beta_a.value(), self.beta_b.value());
        if a == b {
            None
        } else if a < b {
            Some(Side::Left)
        } else {
            Some(Side::Right)
        }
    }

    /// Heat received by the hotter side; 0 at equal temperatures.
    pub fn heat_into_hotter(&self) -> f64 {
        match self.hotter_side() {
            Some(Side::Left) => self.dq_a,
            Some(Side::Right) => self.dq_b,
            None => 0.0,
        }
    }

    /// Classifies the flow with a custom leak tolerance.
    pub fn classify(&self, leak_fraction: f64) -> FlowDirection {
        let (hot, cold) = match self.hotter_side() {
            None => return FlowDirection::NotApplicable,
            Some(Side::Left) => (self.dq_a, self.dq_b),
            Some(Side::Right) => (self.dq_b, self.dq_a),
        };
        let moved = hot.abs().max(cold.abs());
        if hot > FLOW_FLOOR && cold < -FLOW_FLOOR && self.energy_leak.abs() <= leak_fraction * moved {
            FlowDirection::Anomalous
        } else {
            FlowDirection::Normal
        }
    }
}

fn weighted(beta: InverseTemperature, dq: f64) -> f64 {
    match beta {
        InverseTemperature::Finite(b) => b * dq,
        InverseTemperature::Infinite if dq.abs() <= FLOW_FLOOR => 0.0,
        InverseTemperature::Infinite => dq.signum() * f64::INFINITY,
    }
}

fn fit_marginal(s: &BipartiteState, h: &LocalHamiltonian, side: Side) -> Result<InverseTemperature> {
    let marginal = s.marginal(side);
    let fit = passivity::is_completely_passive(&marginal, h, THERMAL_FIT_TOL)?;
    fit.beta.ok_or(Error::NonThermalMarginal { side: side.name(), residual: fit.residual })
}

fn check_dims(s: &BipartiteState, h_a: &LocalHamiltonian, h_b: &LocalHamiltonian) -> Result<()> {
    let (d_a, d_b) = s.dims();
    if h_a.dim() != d_a {
        return Err(Error::DimensionMismatch { expected: d_a, got: h_a.dim() });
    }
    if h_b.dim() != d_b {
        return Err(Error::DimensionMismatch { expected: d_b, got: h_b.dim() });
    }
    Ok(())
}

/// Bookkeeping that does not depend on the unitary.
struct Exchange<'a> {
    initial: &'a BipartiteState,
    h_a: &'a LocalHamiltonian,
    h_b: &'a LocalHamiltonian,
    beta_a: InverseTemperature,
    beta_b: InverseTemperature,
    e_a: f64,
    e_b: f64,
    s_a: f64,
    s_b: f64,
    info: f64,
}

impl<'a> Exchange<'a> {
    fn new(initial: &'a BipartiteState, h_a: &'a LocalHamiltonian, h_b: &'a LocalHamiltonian) -> Result<Self> {
        check_dims(initial, h_a, h_b)?;
        let beta_a = fit_marginal(initial, h_a, Side::Left)?;
        let beta_b = fit_marginal(initial, h_b, Side::Right)?;
        let (ra, rb) = (initial.marginal(Side::Left), initial.marginal(Side::Right));
        Ok(Self {
            initial,
            h_a,
            h_b,
            beta_a,
            beta_b,
            e_a: h_a.expectation(ra.matrix()),
            e_b: h_b.expectation(rb.matrix()),
            s_a: states::von_neumann_entropy(&ra),
            s_b: states::von_neumann_entropy(&rb),
            info: states::mutual_information(initial),
        })
    }

    /// Energy changes only; cheap enough for the search objective.
    fn heat(&self, u: &CMat) -> (f64, f64) {
        let (d_a, d_b) = self.initial.dims();
        let rho = linalg::conjugate(u, self.initial.state().matrix());
        let ra = linalg::partial_trace(&rho, &[d_a, d_b], &[0]);
        let rb = linalg::partial_trace(&rho, &[d_a, d_b], &[1]);
        (self.h_a.expectation(&ra) - self.e_a, self.h_b.expectation(&rb) - self.e_b)
    }

    fn report(&self, u: &CMat, leak_fraction: f64) -> HeatExchangeReport {
        let fin = self.initial.evolve_unchecked(u);
        let (ra, rb) = (fin.marginal(Side::Left), fin.marginal(Side::Right));
        let dq_a = self.h_a.expectation(ra.matrix()) - self.e_a;
        let dq_b = self.h_b.expectation(rb.matrix()) - self.e_b;
        let mut report = HeatExchangeReport {
            dq_a,
            dq_b,
            ds_a: states::von_neumann_entropy(&ra) - self.s_a,
            ds_b: states::von_neumann_entropy(&rb) - self.s_b,
            di: states::mutual_information(&fin) - self.info,
            beta_a: self.beta_a,
            beta_b: self.beta_b,
            clausius_lhs: weighted(self.beta_a, dq_a) + weighted(self.beta_b, dq_b),
            energy_leak: dq_a + dq_b,
            flow: FlowDirection::NotApplicable,
        };
        report.flow = report.classify(leak_fraction);
        report
    }
}

/// Heat, entropy and correlation changes of `initial` under `u`.
///
/// The initial marginals must be thermal (fit tolerance 1e-8); their fitted
/// inverse temperatures weight the Clausius sum.
pub fn heat_exchange_report(
    initial: &BipartiteState,
    u: &CMat,
    h_a: &LocalHamiltonian,
    h_b: &LocalHamiltonian,
) -> Result<HeatExchangeReport> {
    let ex = Exchange::new(initial, h_a, h_b)?;
    check_unitary(u, initial.state().dim())?;
    Ok(ex.report(u, DEFAULT_LEAK_FRACTION))
}

#[derive(Debug, Clone)]
pub struct AnomalousFlow {
    pub unitary: CMat,
    pub report: HeatExchangeReport,
}

/// Searches for a unitary that moves heat from the colder marginal into the
/// hotter one while consuming correlations.
///
/// Returns `Ok(None)` when the budget is exhausted without success, which is
/// not a proof that no such unitary exists, and immediately for initial
/// states with `I ≤ 1e-6`, where the Clausius inequality rules the effect
/// out.
pub fn find_anomalous_unitary(
    initial: &BipartiteState,
    h_a: &LocalHamiltonian,
    h_b: &LocalHamiltonian,
    config: &SearchConfig,
) -> Result<Option<AnomalousFlow>> {
    config.validate()?;
    let ex = Exchange::new(initial, h_a, h_b)?;
    let hot = match (ex.beta_a.value(), ex.beta_b.value()) {
        (a, b) if a == b => {
            return Err(Error::InvalidParameter("marginals share a temperature, heat flow direction is undefined".into()))
        }
        (a, b) if a < b => Side::Left,
        _ => Side::Right,
    };
    if ex.info <= CORRELATION_FLOOR {
        return Ok(None);
    }

    let d = initial.state().dim();
    // aim for half the tolerated leak so the winner classifies cleanly
    let margin = 0.5 * config.leak_fraction;
    let weight = config.penalty_weight;
    let objective = |x: &[f64]| {
        let (dq_a, dq_b) = ex.heat(&linalg::unitary_from_params(d, x));
        let (into_hot, out_of_cold) = match hot {
            Side::Left => (dq_a, -dq_b),
            Side::Right => (dq_b, -dq_a),
        };
        let leak = ((dq_a + dq_b).abs() - margin * into_hot.abs()).max(0.0);
        -into_hot + weight * (leak + (-out_of_cold).max(0.0))
    };
    let init = |start: usize, rng: &mut ChaCha8Rng| {
        use rand::Rng;
        let n = linalg::generator_len(d);
        if start == 0 {
            vec![0.0; n]
        } else {
            (0..n).map(|_| rng.random_range(-config.init_scale..=config.init_scale)).collect()
        }
    };
    let local = LocalOptions { max_iterations: config.max_iterations, step: 0.25 * config.init_scale, ..Default::default() };
    let result = optimize::multi_start(config, &local, init, objective);
    let unitary = linalg::unitary_from_params(d, &result.x);
    let report = ex.report(&unitary, config.leak_fraction);
    Ok((report.flow == FlowDirection::Anomalous && report.di < 0.0).then_some(AnomalousFlow { unitary, report }))
}

/// Basis indices of `|0,1⟩` and `|1,0⟩`.
pub fn exchange_pair(d_a: usize, d_b: usize) -> Result<(usize, usize)> {
    if d_a < 2 || d_b < 2 {
        return Err(Error::InvalidParameter(format!("exchange needs two levels on each side, got {d_a}x{d_b}")));
    }
    Ok((1, d_b))
}

/// Largest `α ≥ 0` keeping `ρ + α(|i⟩⟨j| + |j⟩⟨i|)` positive semidefinite,
/// located by bisection on the smallest eigenvalue.
pub fn max_coherence(rho: &CMat, i: usize, j: usize) -> f64 {
    let min_eig = |alpha: f64| {
        let mut m = rho.clone();
        m[(i, j)] += Complex64::new(alpha, 0.0);
        m[(j, i)] += Complex64::new(alpha, 0.0);
        linalg::eigvalsh(&m)[0]
    };
    // 2x2 principal minor caps the search interval
    let mut hi = (rho[(i, i)].re * rho[(j, j)].re).max(0.0).sqrt() + rho[(i, j)].norm();
    let mut lo = 0.0;
    if min_eig(lo) < -states::EIGEN_FLOOR {
        return 0.0;
    }
    if min_eig(hi) >= 0.0 {
        return hi;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if min_eig(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-16 * hi.max(1e-300) {
            break;
        }
    }
    lo
}

/// `τ_A(β_A) ⊗ τ_B(β_B) + α(|01⟩⟨10| + |10⟩⟨01|)` with `α` the given fraction
/// of its positivity maximum. The coherence leaves both marginals thermal.
pub fn exchange_correlated_state(
    h_a: &LocalHamiltonian,
    h_b: &LocalHamiltonian,
    beta_a: InverseTemperature,
    beta_b: InverseTemperature,
    fraction: f64,
) -> Result<BipartiteState> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::InvalidParameter(format!("coherence fraction must lie in [0, 1], got {fraction}")));
    }
    let (i, j) = exchange_pair(h_a.dim(), h_b.dim())?;
    let product = states::thermal_state(h_a, beta_a).tensor(&states::thermal_state(h_b, beta_b));
    let mut m = product.into_matrix();
    let alpha = fraction * max_coherence(&m, i, j);
    m[(i, j)] += Complex64::new(alpha, 0.0);
    m[(j, i)] += Complex64::new(alpha, 0.0);
    BipartiteState::new(states::DensityMatrix::new(m)?, h_a.dim(), h_b.dim())
}

/// Rotation by `theta` in the `{|01⟩, |10⟩}` block.
pub fn exchange_rotation(d_a: usize, d_b: usize, theta: f64) -> Result<CMat> {
    let (i, j) = exchange_pair(d_a, d_b)?;
    Ok(linalg::givens(d_a * d_b, i, j, theta))
}

/// Scans `steps + 1` exchange angles evenly over `[0, π]` and returns the
/// anomalous one with the most heat into the hotter side.
pub fn best_exchange_angle(
    initial: &BipartiteState,
    h_a: &LocalHamiltonian,
    h_b: &LocalHamiltonian,
    steps: usize,
) -> Result<Option<(f64, HeatExchangeReport)>> {
    let ex = Exchange::new(initial, h_a, h_b)?;
    let (d_a, d_b) = initial.dims();
    let steps = steps.max(1);
    let mut best: Option<(f64, HeatExchangeReport)> = None;
    for k in 0..=steps {
        let theta = std::f64::consts::PI * k as f64 / steps as f64;
        let report = ex.report(&exchange_rotation(d_a, d_b, theta)?, DEFAULT_LEAK_FRACTION);
        if report.flow != FlowDirection::Anomalous || report.di >= 0.0 {
            continue;
        }
        if best.as_ref().is_none_or(|(_, b)| report.heat_into_hotter() > b.heat_into_hotter()) {
            best = Some((theta, report));
        }
    }
    Ok(best)
}
