use std::path::Path;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Deserialize;

use qcorr::feasibility::{self, xstate, FeasibilityStatus};
use qcorr::linalg::{CMat, Complex64};
use qcorr::passivity::{self, PASSIVITY_TOL, THERMAL_FIT_TOL};
use qcorr::protocol::{self, ProtocolReport};
use qcorr::states::{self, Hamiltonian};
use qcorr::{heatflow, sampling, BipartiteState, DensityMatrix, InverseTemperature, JointHamiltonian, LocalHamiltonian};
use qcorr::{SearchConfig, Side};

use crate::output::render;
use crate::records::*;
use crate::{
    Cli, CliError, CliResult, Command, DecomposeArgs, EntropyArgs, ErgotropyArgs, FeasibilityArgs, HeatFlowArgs,
    MutualInfoArgs, PairArgs, ProtocolArgs, SearchArgs, StateArgs, SweepArgs, ThermalArgs, WorkScale, XStateArgs,
};

/// Largest grid `sweep` accepts.
pub const MAX_SWEEP_CELLS: usize = 1_000_000;

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

pub fn dispatch(cli: &Cli) -> CliResult<String> {
    let (f, seed) = (cli.format, cli.seed);
    match &cli.command {
        Command::Thermal(a) => render(f, "thermal", seed, thermal(a)?, vec![]),
        Command::Entropy(a) => render(f, "entropy", seed, entropy(a)?, vec![]),
        Command::MutualInfo(a) => render(f, "mutual-info", seed, mutual_info(a)?, vec![]),
        Command::Ergotropy(a) => render(f, "ergotropy", seed, ergotropy(a)?, vec![]),
        Command::HeatFlow(a) => render(f, "heat-flow", seed, heat_flow(a, seed)?, vec![]),
        Command::Decompose(a) => render(f, "decompose", seed, decompose(a, seed)?, vec![]),
        Command::Protocol(a) => render(f, "protocol", seed, protocol_cmd(a, seed)?, vec![]),
        Command::Feasibility(a) => {
            let (record, warnings) = feasibility_cmd(a, seed)?;
            render(f, "feasibility", seed, record, warnings)
        }
        Command::Xstate(a) => {
            let (record, warnings) = xstate_cmd(a)?;
            render(f, "xstate", seed, record, warnings)
        }
        Command::Sweep(a) => render(f, "sweep", seed, sweep(a, seed)?, vec![]),
    }
}

fn hamiltonian(levels: &[f64]) -> CliResult<LocalHamiltonian> {
    Ok(LocalHamiltonian::new(levels.to_vec())?)
}

fn pair(p: &PairArgs) -> CliResult<(LocalHamiltonian, LocalHamiltonian)> {
    Ok((hamiltonian(&p.levels_a)?, hamiltonian(&p.levels_b)?))
}

fn inverse_temperature(beta: f64) -> CliResult<InverseTemperature> {
    Ok(InverseTemperature::new(beta)?)
}

fn ambient(beta: f64) -> CliResult<f64> {
    if beta > 0.0 && beta.is_finite() {
        Ok(beta)
    } else {
        Err(invalid(format!("--beta must be positive and finite, got {beta}")))
    }
}

fn search_config(b: &SearchArgs, seed: u64) -> CliResult<SearchConfig> {
    let config = SearchConfig { starts: b.starts, max_iterations: b.iterations, seed, ..Default::default() };
    config.validate()?;
    Ok(config)
}

#[derive(Deserialize)]
struct MatrixFile {
    re: Vec<Vec<f64>>,
    #[serde(default)]
    im: Option<Vec<Vec<f64>>>,
}

fn read_matrix(path: &Path) -> CliResult<DensityMatrix> {
    let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
    let file: MatrixFile = serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    let n = file.re.len();
    let im = file.im.unwrap_or_else(|| vec![vec![0.0; n]; n]);
    if im.len() != n || file.re.iter().chain(&im).any(|row| row.len() != n) {
        return Err(invalid(format!("{}: re and im must both be {n}x{n}", path.display())));
    }
    let m = CMat::from_fn(n, n, |i, j| Complex64::new(file.re[i][j], im[i][j]));
    Ok(DensityMatrix::new(m)?)
}

fn load_state(s: &StateArgs) -> CliResult<DensityMatrix> {
    match (&s.populations, &s.matrix_file) {
        (Some(p), _) => Ok(DensityMatrix::from_populations(p)?),
        (None, Some(path)) => read_matrix(path),
        (None, None) => Err(invalid("a state is required: pass --populations or --matrix-file")),
    }
}

fn thermal(a: &ThermalArgs) -> CliResult<ThermalRecord> {
    let h = hamiltonian(&a.levels)?;
    let beta = inverse_temperature(a.beta)?;
    let tau = states::thermal_state(&h, beta);
    let free_energy = match beta {
        InverseTemperature::Finite(b) if b > 0.0 => Some(Real(states::free_energy(&tau, &h, 1.0 / b)?)),
        _ => None,
    };
    Ok(ThermalRecord {
        levels: reals(&a.levels),
        beta: Real(a.beta),
        populations: reals(&tau.populations()),
        partition_function: states::partition_function(&h, beta).ok().map(Real),
        energy: Real(h.expectation(tau.matrix())),
        entropy: Real(states::von_neumann_entropy(&tau)),
        free_energy,
    })
}

fn entropy(a: &EntropyArgs) -> CliResult<EntropyRecord> {
    let rho = load_state(&a.state)?;
    let mut record = EntropyRecord {
        dim: rho.dim(),
        eigenvalues: reals(&rho.eigenvalues()),
        entropy: Real(states::von_neumann_entropy(&rho)),
        relative_entropy: None,
        free_energy_gap: None,
    };
    if let (Some(levels), Some(b)) = (&a.levels, a.beta) {
        let h = hamiltonian(levels)?;
        let beta = inverse_temperature(b)?;
        let tau = states::thermal_state(&h, beta);
        record.relative_entropy = Some(Real(states::relative_entropy(&rho, &tau)?.value()));
        if let InverseTemperature::Finite(b) = beta {
            if b > 0.0 {
                let t = 1.0 / b;
                record.free_energy_gap =
                    Some(Real(b * (states::free_energy(&rho, &h, t)? - states::free_energy(&tau, &h, t)?)));
            }
        }
    }
    Ok(record)
}

fn mutual_info(a: &MutualInfoArgs) -> CliResult<MutualInfoRecord> {
    let [d_a, d_b] = a.dims[..] else {
        return Err(invalid("--dims takes exactly two values d_A,d_B"));
    };
    let s = BipartiteState::new(load_state(&a.state)?, d_a, d_b)?;
    let cond = states::conditional_entropy(&s);
    Ok(MutualInfoRecord {
        d_a,
        d_b,
        s_a: Real(states::von_neumann_entropy(&s.marginal(Side::Left))),
        s_b: Real(states::von_neumann_entropy(&s.marginal(Side::Right))),
        s_ab: Real(states::von_neumann_entropy(s.state())),
        mutual_information: Real(states::mutual_information(&s)),
        conditional_entropy: Real(cond.value),
        entangled: cond.entangled,
    })
}

fn ergotropy(a: &ErgotropyArgs) -> CliResult<ErgotropyRecord> {
    let h = hamiltonian(&a.levels)?;
    let rho = load_state(&a.state)?;
    let e = passivity::ergotropy(&rho, &h)?;
    let energy = states::internal_energy(&rho, &h)?;
    let fit = passivity::is_completely_passive(&rho, &h, THERMAL_FIT_TOL)?;
    Ok(ErgotropyRecord {
        value: Real(e.value),
        energy: Real(energy),
        passive_energy: Real(h.expectation(e.passive_state.matrix())),
        passive_populations: reals(&e.passive_state.populations()),
        optimal_permutation: e.optimal_permutation.clone(),
        passive: passivity::is_passive(&rho, &h, PASSIVITY_TOL)?,
        completely_passive: fit.thermal,
        fitted_beta: fit.beta.map(|b| Real(b.value())),
        fit_residual: Real(fit.residual),
    })
}

fn heat_record(r: &heatflow::HeatExchangeReport) -> HeatReportRecord {
    HeatReportRecord {
        dq_a: Real(r.dq_a),
        dq_b: Real(r.dq_b),
        ds_a: Real(r.ds_a),
        ds_b: Real(r.ds_b),
        di: Real(r.di),
        beta_a: Real(r.beta_a.value()),
        beta_b: Real(r.beta_b.value()),
        clausius_lhs: Real(r.clausius_lhs),
        energy_leak: Real(r.energy_leak),
        flow: r.flow.as_str().to_string(),
    }
}

fn heat_flow(a: &HeatFlowArgs, seed: u64) -> CliResult<HeatFlowRecord> {
    let (h_a, h_b) = pair(&a.pair)?;
    let (beta_a, beta_b) = (inverse_temperature(a.beta_a)?, inverse_temperature(a.beta_b)?);
    let s = heatflow::exchange_correlated_state(&h_a, &h_b, beta_a, beta_b, a.coherence)?;
    let (i, j) = heatflow::exchange_pair(h_a.dim(), h_b.dim())?;
    let best = heatflow::best_exchange_angle(&s, &h_a, &h_b, a.angle_steps)?;
    let search = if a.search {
        let config = search_config(&a.budget, seed)?;
        heatflow::find_anomalous_unitary(&s, &h_a, &h_b, &config)?.map(|found| heat_record(&found.report))
    } else {
        None
    };
    Ok(HeatFlowRecord {
        beta_a: Real(a.beta_a),
        beta_b: Real(a.beta_b),
        coherence_fraction: Real(a.coherence),
        coherence: Real(s.state().matrix()[(i, j)].re),
        initial_mutual_information: Real(states::mutual_information(&s)),
        angle: best.as_ref().map(|(theta, _)| Real(*theta)),
        grid: best.as_ref().map(|(_, r)| heat_record(r)),
        search,
    })
}

fn decompose(a: &DecomposeArgs, seed: u64) -> CliResult<Rows<DecompositionRow>> {
    let (h_a, h_b) = pair(&a.pair)?;
    let h_r = hamiltonian(&a.levels_r)?;
    let beta = ambient(a.beta)?;
    let b = InverseTemperature::Finite(beta);
    let initial = states::thermal_state(&h_a, b)
        .tensor(&states::thermal_state(&h_b, b))
        .tensor(&states::thermal_state(&h_r, b));
    let dims = [h_a.dim(), h_b.dim(), h_r.dim()];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(a.samples);
    for sample in 0..a.samples {
        let u = sampling::random_unitary(initial.dim(), &mut rng);
        let fin = initial.evolve(&u)?;
        let d = protocol::work_decomposition(beta, &fin, dims, &h_a, &h_b, &h_r)?;
        rows.push(DecompositionRow {
            sample,
            total_beta_w: Real(d.total_beta_w),
            rel_entropy_r: Real(d.rel_entropy_r.value()),
            rel_entropy_a: Real(d.rel_entropy_a),
            rel_entropy_b: Real(d.rel_entropy_b),
            i_sr: Real(d.i_sr),
            i_ab: Real(d.i_ab),
            identity_residual: Real(d.identity_residual()),
            bound_respected: d.i_ab <= d.total_beta_w + 1e-9,
        });
    }
    Ok(Rows { rows })
}

/// `S(τ_S(β))` for the pair.
fn threshold(h_a: &LocalHamiltonian, h_b: &LocalHamiltonian, beta: f64) -> f64 {
    let joint = JointHamiltonian::noninteracting(h_a.clone(), h_b.clone());
    states::von_neumann_entropy(&states::thermal_state(&joint, InverseTemperature::Finite(beta)))
}

pub fn protocol_record(r: &ProtocolReport) -> ProtocolRecord {
    ProtocolRecord {
        beta: Real(r.beta),
        w_budget: Real(r.w_budget),
        beta_i: Real(r.beta_i.value()),
        w_i: Real(r.w_i),
        w_ii: Real(r.w_ii),
        achieved_i: Real(r.achieved_i),
        bound_i: Real(r.bound_i),
        threshold: Real(r.threshold),
        regime: r.regime.as_str().to_string(),
        saturation: Real(r.saturation),
        feasibility: r.feasibility.status.as_str().to_string(),
        residual: r.feasibility.residual.map(Real),
        violated_constraint: r.feasibility.violated_constraint.clone(),
    }
}

fn protocol_cmd(a: &ProtocolArgs, seed: u64) -> CliResult<ProtocolRecord> {
    let (h_a, h_b) = pair(&a.pair)?;
    let beta = ambient(a.beta)?;
    let work = match (a.work, a.work_fraction) {
        (Some(w), _) => w,
        (None, Some(f)) => f * threshold(&h_a, &h_b, beta) / beta,
        (None, None) => return Err(invalid("pass --work or --work-fraction")),
    };
    let config = search_config(&a.budget, seed)?;
    Ok(protocol_record(&protocol::run_two_step_protocol(&h_a, &h_b, beta, work, &config)?))
}

fn gap(h: &LocalHamiltonian) -> Option<f64> {
    match h.levels() {
        [g, e] => Some(e - g),
        _ => None,
    }
}

fn feasibility_cmd(a: &FeasibilityArgs, seed: u64) -> CliResult<(FeasibilityRecord, Vec<String>)> {
    let (h_a, h_b) = pair(&a.pair)?;
    let beta = ambient(a.beta)?;
    let beta_i = inverse_temperature(a.beta_i)?;
    let check = feasibility::subadditivity_feasible(&h_a, &h_b, InverseTemperature::Finite(beta), beta_i)?;
    let mut warnings = Vec::new();

    let xstate = match (gap(&h_a), gap(&h_b)) {
        (Some(wa), Some(wb)) => {
            let r = xstate::XStateProblem::from_gaps(wa, wb, beta, a.beta_i)?;
            warnings.extend(r.warnings.iter().cloned());
            Some(xstate_record(&xstate::xstate_feasibility(&r.problem)))
        }
        _ => None,
    };
    let search = if a.no_search {
        None
    } else {
        let config = search_config(&a.budget, seed)?;
        let ambient_b = InverseTemperature::Finite(beta);
        let initial = states::thermal_state(&h_a, beta_i).tensor(&states::thermal_state(&h_b, beta_i));
        let out = feasibility::search_correlating_unitary(
            &initial,
            &states::thermal_state(&h_a, ambient_b),
            &states::thermal_state(&h_b, ambient_b),
            &config,
        )?;
        Some(SearchRecord {
            status: out.verdict.status.as_str().to_string(),
            residual: Real(out.residual),
            per_start_residuals: reals(&out.per_start_residuals),
        })
    };

    let certified = FeasibilityStatus::FeasibleCertified.as_str();
    let status = if !check.passes {
        FeasibilityStatus::InfeasibleCertified
    } else if search.as_ref().is_some_and(|s| s.status == certified)
        || xstate.as_ref().is_some_and(|x| x.status == certified)
    {
        FeasibilityStatus::FeasibleCertified
    } else if xstate.as_ref().is_some_and(|x| x.status == FeasibilityStatus::InfeasibleWithinAnsatz.as_str()) {
        FeasibilityStatus::InfeasibleWithinAnsatz
    } else {
        FeasibilityStatus::Unknown
    };
    let record = FeasibilityRecord {
        beta: Real(beta),
        beta_i: Real(a.beta_i),
        status: status.as_str().to_string(),
        subadditivity: SubadditivityRecord {
            passes: check.passes,
            lhs: Real(check.lhs),
            rhs: Real(check.rhs),
            margin: Real(check.margin),
        },
        xstate,
        search,
    };
    Ok((record, warnings))
}

fn ratio(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `p/q`, an integer, or a decimal; decimals are rationalised within
/// 1e-12 and reported in `warnings`.
pub fn parse_rational(name: &str, s: &str, warnings: &mut Vec<String>) -> CliResult<BigRational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| invalid(format!("{name}: bad numerator in {s:?}")))?;
        let q: BigInt = q.trim().parse().map_err(|_| invalid(format!("{name}: bad denominator in {s:?}")))?;
        if q == BigInt::from(0) {
            return Err(invalid(format!("{name}: zero denominator")));
        }
        return Ok(BigRational::new(p, q));
    }
    if let Ok(n) = s.parse::<BigInt>() {
        return Ok(BigRational::from_integer(n));
    }
    let x: f64 = s.parse().map_err(|_| invalid(format!("{name}: expected p/q or a number, got {s:?}")))?;
    if !x.is_finite() || x < 0.0 {
        return Err(invalid(format!("{name}: expected a finite non-negative number, got {s:?}")));
    }
    let q = xstate::rationalize(x, 1e-12);
    warnings.push(format!("{name} = {s} read as {}", ratio(&q)));
    Ok(q)
}

pub fn xstate_record(an: &xstate::XStateAnalysis) -> XStateRecord {
    let mut denominator = BigInt::from(1);
    for r in an.candidates.iter().map(|c| &c.rho00).chain([&an.interval.0, &an.interval.1]) {
        denominator = denominator.lcm(r.denom());
    }
    let over = |r: &BigRational| (r.numer() * (&denominator / r.denom())).to_string();
    let certificate = an.certificate().map(|c| CertificateRecord {
        ordering: c.ordering.to_string(),
        rho00: ratio(&c.rho00),
        d1_sq: ratio(&c.d1_sq),
        d2_sq: ratio(&c.d2_sq),
    });
    XStateRecord {
        a_i: ratio(&an.problem.a_i),
        b_i: ratio(&an.problem.b_i),
        a: ratio(&an.problem.a),
        b: ratio(&an.problem.b),
        diagonal: an.diagonal.iter().map(ratio).collect(),
        candidates: an
            .candidates
            .iter()
            .map(|c| CandidateRecord {
                ordering: c.ordering.to_string(),
                rho00: ratio(&c.rho00),
                d1_sq: ratio(&c.d1_sq),
                d2_sq: ratio(&c.d2_sq),
                in_interval: c.in_interval,
                feasible: c.feasible,
            })
            .collect(),
        interval: vec![ratio(&an.interval.0), ratio(&an.interval.1)],
        candidate_numerators: an.candidates.iter().map(|c| over(&c.rho00)).collect(),
        interval_numerators: vec![over(&an.interval.0), over(&an.interval.1)],
        common_denominator: denominator.to_string(),
        status: an.verdict.status.as_str().to_string(),
        certificate,
        violated_constraint: an.verdict.violated_constraint.clone(),
    }
}

fn xstate_cmd(a: &XStateArgs) -> CliResult<(XStateRecord, Vec<String>)> {
    let mut warnings = Vec::new();
    let a_i = parse_rational("aI", &a.a_i, &mut warnings)?;
    let b_i = parse_rational("bI", &a.b_i, &mut warnings)?;
    let ta = parse_rational("a", &a.a, &mut warnings)?;
    let tb = parse_rational("b", &a.b, &mut warnings)?;
    let p = xstate::XStateProblem::new(a_i, b_i, ta, tb)?;
    Ok((xstate_record(&xstate::xstate_feasibility(&p)), warnings))
}

/// One sweep axis.
#[derive(Debug, Clone, PartialEq)]
pub enum Axis {
    List(Vec<f64>),
    Range { start: f64, stop: f64, count: usize },
}

impl Axis {
    /// `x`, `x1,x2,...` or `start:stop:count`.
    pub fn parse(name: &str, s: &str) -> CliResult<Axis> {
        let num = |t: &str| -> CliResult<f64> {
            let v: f64 = t.trim().parse().map_err(|_| invalid(format!("--{name}: bad number {t:?}")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(invalid(format!("--{name}: values must be finite")))
            }
        };
        let parts: Vec<&str> = s.split(':').collect();
        match parts[..] {
            [one] => Ok(Axis::List(one.split(',').map(num).collect::<CliResult<_>>()?)),
            [start, stop, count] => {
                let count: usize =
                    count.trim().parse().map_err(|_| invalid(format!("--{name}: bad count {count:?}")))?;
                if count == 0 {
                    return Err(invalid(format!("--{name}: count must be positive")));
                }
                Ok(Axis::Range { start: num(start)?, stop: num(stop)?, count })
            }
            _ => Err(invalid(format!("--{name}: expected x, x1,x2,.. or start:stop:count"))),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Axis::List(v) => v.len(),
            Axis::Range { count, .. } => *count,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn value(&self, k: usize) -> f64 {
        match self {
            Axis::List(v) => v[k],
            Axis::Range { start, count: 1, .. } => *start,
            Axis::Range { start, stop, count } => start + (stop - start) * k as f64 / (*count - 1) as f64,
        }
    }
}

fn sweep(a: &SweepArgs, seed: u64) -> CliResult<Rows<ProtocolRecord>> {
    let (h_a, h_b) = pair(&a.pair)?;
    let betas = Axis::parse("beta", &a.beta)?;
    let works = Axis::parse("work", &a.work)?;
    let cells = betas
        .len()
        .checked_mul(works.len())
        .filter(|&n| n <= MAX_SWEEP_CELLS)
        .ok_or_else(|| invalid(format!("grid of {} x {} cells exceeds {MAX_SWEEP_CELLS}", betas.len(), works.len())))?;
    for k in 0..betas.len() {
        ambient(betas.value(k))?;
    }
    let config = search_config(&a.budget, seed)?;
    let rows = (0..cells)
        .into_par_iter()
        .map(|cell| {
            let beta = betas.value(cell / works.len());
            let w = works.value(cell % works.len());
            let budget = match a.work_scale {
                WorkScale::Absolute => w,
                WorkScale::Threshold => w * threshold(&h_a, &h_b, beta) / beta,
            };
            Ok(protocol_record(&protocol::run_two_step_protocol(&h_a, &h_b, beta, budget, &config)?))
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(Rows { rows })
}
