//! Acceptance suite: one check per published criterion, each printing a
//! PASS/FAIL line. Run with `--nocapture` to see the lines.

use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qcorr::feasibility::{self, xstate, FeasibilityStatus};
use qcorr::protocol::{self, Regime};
use qcorr::sampling::{random_density_matrix, random_levels, random_pure_state, random_unitary};
use qcorr::states::{self, Hamiltonian};
use qcorr::{heatflow, passivity, BipartiteState, InverseTemperature, JointHamiltonian, LocalHamiltonian, SearchConfig, Side};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    check(elapsed < limit, format!("took {elapsed:?}, limit {limit:?}"))
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn fin(b: f64) -> InverseTemperature {
    InverseTemperature::Finite(b)
}

fn equal_qubit_threshold(beta: f64) -> f64 {
    let h = LocalHamiltonian::qubit(1.0).unwrap();
    let joint = JointHamiltonian::noninteracting(h.clone(), h);
    states::von_neumann_entropy(&states::thermal_state(&joint, fin(beta)))
}

fn counterexample_regression() -> Outcome {
    let start = Instant::now();
    let p = xstate::XStateProblem::new(q(64, 65), q(4, 5), q(8, 9), q(2, 3)).map_err(|e| e.to_string())?;
    let an = xstate::xstate_feasibility(&p);
    let elapsed = start.elapsed();

    let mut diagonal = an.diagonal.to_vec();
    diagonal.sort();
    check(diagonal == vec![q(1, 325), q(4, 325), q(64, 325), q(256, 325)], "initial diagonal")?;
    let mut got: Vec<BigRational> = an.candidates.iter().map(|c| c.rho00.clone()).collect();
    got.sort();
    let mut want: Vec<BigRational> = [4505, 3965, 2237, 1670, 2210, 3938].iter().map(|&n| q(n, 5850)).collect();
    want.sort();
    check(got == want, format!("candidates {got:?}"))?;
    check(an.interval == (q(3250, 5850), q(3900, 5850)), "admissible interval")?;
    check(an.verdict.status == FeasibilityStatus::InfeasibleWithinAnsatz, "verdict")?;
    within(elapsed, Duration::from_millis(100))?;
    Ok(format!("six exact candidates, none in [5/9, 2/3], {elapsed:?}"))
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..=p.len() {
            let mut next = p.clone();
            next.insert(k, n - 1);
            out.push(next);
        }
    }
    out
}

fn ergotropy_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for d in 2..=6 {
        let perms = permutations(d);
        for _ in 0..200 {
            let h = LocalHamiltonian::new(random_levels(d, 3.0, &mut rng)).unwrap();
            let rho = random_density_matrix(d, &mut rng);
            let value = passivity::ergotropy(&rho, &h).map_err(|e| e.to_string())?.value;
            let spectrum = rho.eigenvalues();
            let energy = h.expectation(rho.matrix());
            let best = perms
                .iter()
                .map(|p| energy - p.iter().zip(&spectrum).map(|(&k, r)| r * h.levels()[k]).sum::<f64>())
                .fold(f64::NEG_INFINITY, f64::max);
            worst = worst.max((value - best).abs());
        }
    }
    let elapsed = start.elapsed();
    check(worst <= 1e-9, format!("max deviation {worst:e}"))?;
    within(elapsed, Duration::from_secs(30))?;
    Ok(format!("1000 pairs, max deviation {worst:e}, {elapsed:?}"))
}

fn decomposition_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let trivial = LocalHamiltonian::new(vec![0.0]).unwrap();
    let (mut worst, mut trials) = (0.0f64, 0);
    for (d_a, d_b) in [(2, 2), (2, 3)] {
        for beta in [0.3, 1.0, 2.5] {
            for _ in 0..100 {
                let h_a = LocalHamiltonian::new(random_levels(d_a, 2.0, &mut rng)).unwrap();
                let h_b = LocalHamiltonian::new(random_levels(d_b, 2.0, &mut rng)).unwrap();
                let initial = states::thermal_state(&h_a, fin(beta)).tensor(&states::thermal_state(&h_b, fin(beta)));
                let fin_state = initial.evolve(&random_unitary(d_a * d_b, &mut rng)).unwrap();
                let joint = JointHamiltonian::noninteracting(h_a.clone(), h_b.clone());
                let beta_w = beta * protocol::work_cost_out_of_equilibrium(&fin_state, &joint, beta).unwrap();
                let dec = protocol::work_decomposition(beta, &fin_state, [d_a, d_b, 1], &h_a, &h_b, &trivial)
                    .map_err(|e| e.to_string())?;
                let terms = dec.rel_entropy_a + dec.rel_entropy_b + dec.i_ab;
                worst = worst.max((beta_w - terms).abs());
                check(dec.i_ab <= beta_w + 1e-9, format!("I = {} exceeds beta W = {beta_w}", dec.i_ab))?;
                trials += 1;
            }
        }
    }
    check(worst <= 1e-8, format!("max identity residual {worst:e}"))?;
    Ok(format!("{trials} unitaries, max residual {worst:e}, bound held throughout"))
}

fn protocol_saturation() -> Outcome {
    let start = Instant::now();
    let h = LocalHamiltonian::qubit(1.0).unwrap();
    let w = 0.5 * equal_qubit_threshold(1.0);
    let r = protocol::run_two_step_protocol(&h, &h, 1.0, w, &SearchConfig::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let ratio = r.achieved_i / r.bound_i;
    check(ratio >= 0.99, format!("saturation {ratio}"))?;
    within(elapsed, Duration::from_secs(60))?;
    Ok(format!("I/(beta W) = {ratio:.12}, beta_I = {}, {elapsed:?}", r.beta_i.value()))
}

fn high_energy_strictness() -> Outcome {
    let h = LocalHamiltonian::qubit(1.0).unwrap();
    let w = 2.0 * equal_qubit_threshold(1.0);
    let r = protocol::run_two_step_protocol(&h, &h, 1.0, w, &SearchConfig::default()).map_err(|e| e.to_string())?;
    check(r.regime == Regime::HighEnergy, "regime flag")?;
    check(r.achieved_i < r.bound_i - 1e-3, format!("I = {} vs beta W = {}", r.achieved_i, r.bound_i))?;
    Ok(format!("high_energy, I = {:.6} < beta W - 1e-3 = {:.6}", r.achieved_i, r.bound_i - 1e-3))
}

fn anomalous_heat_flow() -> Outcome {
    let start = Instant::now();
    let h = LocalHamiltonian::qubit(1.0).unwrap();
    let s = heatflow::exchange_correlated_state(&h, &h, fin(0.5), fin(2.0), 0.9).map_err(|e| e.to_string())?;
    let (theta, r) = heatflow::best_exchange_angle(&s, &h, &h, 1000)
        .map_err(|e| e.to_string())?
        .ok_or("no anomalous angle on the grid")?;
    let elapsed = start.elapsed();
    // A is the hot side
    check(r.dq_a > 0.0 && r.dq_b < 0.0, format!("dQ_A = {}, dQ_B = {}", r.dq_a, r.dq_b))?;
    check(r.di < 0.0, format!("dI = {}", r.di))?;
    check(r.clausius_lhs >= r.di - 1e-9, "Clausius inequality")?;
    within(elapsed, Duration::from_secs(5))?;
    Ok(format!("theta = {theta:.4}, heat into hot side {:.6}, dI = {:.6}, {elapsed:?}", r.dq_a, r.di))
}

fn pure_state_marginal_symmetry() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let (d_a, d_b) = (rng.random_range(1..=4), rng.random_range(1..=4));
        let s = BipartiteState::new(random_pure_state(d_a * d_b, &mut rng), d_a, d_b).unwrap();
        let mut ea = s.marginal(Side::Left).eigenvalues();
        let mut eb = s.marginal(Side::Right).eigenvalues();
        ea.reverse();
        eb.reverse();
        for k in 0..ea.len().max(eb.len()) {
            let (x, y) = (ea.get(k).copied().unwrap_or(0.0), eb.get(k).copied().unwrap_or(0.0));
            worst = worst.max((x - y).abs());
        }
    }
    check(worst <= 1e-10, format!("max spectral deviation {worst:e}"))?;
    Ok(format!("500 states, max deviation {worst:e}"))
}

fn subadditivity_certification() -> Outcome {
    let (h_a, h_b) = (LocalHamiltonian::qubit(1.0).unwrap(), LocalHamiltonian::qubit(50.0).unwrap());
    let c = feasibility::subadditivity_feasible(&h_a, &h_b, fin(1.0), fin(2.0)).map_err(|e| e.to_string())?;
    check(!c.passes, "subadditivity unexpectedly passes")?;
    let initial = states::thermal_state(&h_a, fin(2.0)).tensor(&states::thermal_state(&h_b, fin(2.0)));
    let config = SearchConfig { starts: 50, ..Default::default() };
    let out = feasibility::search_correlating_unitary(
        &initial,
        &states::thermal_state(&h_a, fin(1.0)),
        &states::thermal_state(&h_b, fin(1.0)),
        &config,
    )
    .map_err(|e| e.to_string())?;
    let best = out.per_start_residuals.iter().copied().fold(f64::INFINITY, f64::min);
    check(out.per_start_residuals.len() == 50, "start count")?;
    check(best >= 1e-4, format!("a start reached residual {best:e}"))?;
    Ok(format!("FAILS with margin {:.4}, best residual over 50 starts {best:.4}", c.margin))
}

fn free_energy_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for k in 0..200 {
        let d = 2 + k % 4;
        let h = LocalHamiltonian::new(random_levels(d, 2.0, &mut rng)).unwrap();
        let beta = rng.random_range(0.1..4.0);
        let sigma = random_density_matrix(d, &mut rng);
        let tau = states::thermal_state(&h, fin(beta));
        let rel = states::relative_entropy(&sigma, &tau).map_err(|e| e.to_string())?.value();
        let t = 1.0 / beta;
        let gap = beta * (states::free_energy(&sigma, &h, t).unwrap() - states::free_energy(&tau, &h, t).unwrap());
        worst = worst.max((rel - gap).abs());
    }
    check(worst <= 1e-9, format!("max deviation {worst:e}"))?;
    Ok(format!("200 states, max deviation {worst:e}"))
}

fn sweep_output(threads: usize) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_qcorr"))
        .args(["sweep", "--levels-a", "0,1", "--levels-b", "0,1", "--beta", "0.5:2:10", "--work", "0:1.5:10"])
        .args(["--starts", "3", "--iterations", "150", "--seed", "17", "--format", "csv"])
        .args(["--threads", &threads.to_string()])
        .output()
        .map_err(|e| e.to_string())?;
    check(out.status.success(), String::from_utf8_lossy(&out.stderr).into_owned())?;
    Ok(out.stdout)
}

fn cli_determinism() -> Outcome {
    let first = sweep_output(1)?;
    let second = sweep_output(1)?;
    let parallel = sweep_output(4)?;
    check(first == second, "two single-thread runs differ")?;
    check(first == parallel, "1-thread and 4-thread runs differ")?;
    let lines = first.iter().filter(|&&b| b == b'\n').count();
    check(lines == 101, format!("expected header + 100 rows, got {lines} lines"))?;
    Ok(format!("10x10 grid, {} bytes identical across runs and thread counts", first.len()))
}

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("counterexample regression", counterexample_regression),
        ("ergotropy oracle equivalence", ergotropy_oracle),
        ("decomposition identity", decomposition_identity),
        ("protocol saturation", protocol_saturation),
        ("high-energy strictness", high_energy_strictness),
        ("anomalous heat flow", anomalous_heat_flow),
        ("pure-state marginal symmetry", pure_state_marginal_symmetry),
        ("subadditivity certification", subadditivity_certification),
        ("free-energy identity", free_energy_identity),
        ("CLI determinism", cli_determinism),
    ];
    let mut failed = Vec::new();
    for (k, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", k + 1),
            Err(why) => {
                println!("FAIL {:>2} {name}: {why}", k + 1);
                failed.push(k + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
