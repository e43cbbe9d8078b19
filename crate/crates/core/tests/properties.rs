use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qcorr::feasibility::{self, xstate, FeasibilityStatus};
use qcorr::linalg::{self, CMat, Complex64};
use qcorr::passivity;
use qcorr::protocol;
use qcorr::sampling::{random_density_matrix, random_levels, random_pure_state, random_unitary};
use qcorr::states::{self, Hamiltonian};
use qcorr::{heatflow, BipartiteState, DensityMatrix, InverseTemperature, LocalHamiltonian, Side};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn hamiltonian(d: usize, r: &mut ChaCha8Rng) -> LocalHamiltonian {
    LocalHamiltonian::new(random_levels(d, 2.0, r)).unwrap()
}

fn fin(b: f64) -> InverseTemperature {
    InverseTemperature::Finite(b)
}

fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in all_permutations(n - 1) {
        for k in 0..=p.len() {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn relative_entropy_is_non_negative(seed in any::<u64>(), d in 2usize..6) {
        let mut r = rng(seed);
        let sigma = random_density_matrix(d, &mut r);
        let rho = random_density_matrix(d, &mut r);
        let v = states::relative_entropy(&sigma, &rho).unwrap().value();
        prop_assert!(v >= 0.0);
        let own = states::relative_entropy(&sigma, &sigma).unwrap().value();
        prop_assert!(own < 1e-9);
    }

    #[test]
    fn entropy_bounds_for_bipartite_states(seed in any::<u64>(), d_a in 1usize..4, d_b in 1usize..4) {
        let mut r = rng(seed);
        let s = BipartiteState::new(random_density_matrix(d_a * d_b, &mut r), d_a, d_b).unwrap();
        let s_ab = states::von_neumann_entropy(s.state());
        let s_a = states::von_neumann_entropy(&s.marginal(Side::Left));
        let s_b = states::von_neumann_entropy(&s.marginal(Side::Right));
        prop_assert!(s_ab <= s_a + s_b + 1e-10);
        prop_assert!((s_a - s_b).abs() <= s_ab + 1e-10);
        prop_assert!(s_ab <= ((d_a * d_b) as f64).ln() + 1e-12);
        prop_assert!(states::mutual_information(&s) >= 0.0);
    }

    #[test]
    fn entropy_is_unitarily_invariant(seed in any::<u64>(), d in 1usize..7) {
        let mut r = rng(seed);
        let rho = random_density_matrix(d, &mut r);
        let moved = rho.evolve(&random_unitary(d, &mut r)).unwrap();
        prop_assert!((states::von_neumann_entropy(&rho) - states::von_neumann_entropy(&moved)).abs() < 1e-10);
    }

    #[test]
    fn thermal_state_minimises_free_energy(seed in any::<u64>(), d in 2usize..6, beta in 0.05f64..5.0) {
        let mut r = rng(seed);
        let h = hamiltonian(d, &mut r);
        let sigma = random_density_matrix(d, &mut r);
        let tau = states::thermal_state(&h, fin(beta));
        let t = 1.0 / beta;
        let f_sigma = states::free_energy(&sigma, &h, t).unwrap();
        let f_tau = states::free_energy(&tau, &h, t).unwrap();
        prop_assert!(f_sigma >= f_tau - 1e-12);
        // and the gap is T times the divergence
        let d_rel = states::relative_entropy(&sigma, &tau).unwrap().value();
        prop_assert!((d_rel - beta * (f_sigma - f_tau)).abs() < 1e-9);
    }

    #[test]
    fn thermal_free_energy_is_minus_t_log_z(seed in any::<u64>(), d in 1usize..6, beta in 0.05f64..5.0) {
        let mut r = rng(seed);
        let h = hamiltonian(d, &mut r);
        let tau = states::thermal_state(&h, fin(beta));
        let z: f64 = h.levels().iter().map(|e| (-beta * e).exp()).sum();
        let f = states::free_energy(&tau, &h, 1.0 / beta).unwrap();
        prop_assert!((f + z.ln() / beta).abs() < 1e-10);
    }

    #[test]
    fn pure_states_have_equal_marginal_spectra(seed in any::<u64>(), d_a in 1usize..5, d_b in 1usize..5) {
        let mut r = rng(seed);
        let s = BipartiteState::new(random_pure_state(d_a * d_b, &mut r), d_a, d_b).unwrap();
        let mut ea = s.marginal(Side::Left).eigenvalues();
        let mut eb = s.marginal(Side::Right).eigenvalues();
        // the larger side carries extra zeros
        ea.reverse();
        eb.reverse();
        for k in 0..ea.len().max(eb.len()) {
            let x = ea.get(k).copied().unwrap_or(0.0);
            let y = eb.get(k).copied().unwrap_or(0.0);
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn ergotropy_matches_permutation_search(seed in any::<u64>(), d in 2usize..6) {
        let mut r = rng(seed);
        let h = hamiltonian(d, &mut r);
        let rho = random_density_matrix(d, &mut r);
        let got = passivity::ergotropy(&rho, &h).unwrap().value;
        let spectrum = rho.eigenvalues();
        let energy = h.expectation(rho.matrix());
        let best = all_permutations(d)
            .iter()
            .map(|p| energy - p.iter().zip(&spectrum).map(|(&k, q)| q * h.levels()[k]).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max);
        prop_assert!((got - best).abs() < 1e-9);
        prop_assert!(got >= -1e-12);
    }

    #[test]
    fn passive_state_of_ergotropy_is_passive(seed in any::<u64>(), d in 2usize..6) {
        let mut r = rng(seed);
        let h = hamiltonian(d, &mut r);
        let rho = random_density_matrix(d, &mut r);
        let e = passivity::ergotropy(&rho, &h).unwrap();
        prop_assert!(passivity::is_passive(&e.passive_state, &h, 1e-10).unwrap());
        let again = passivity::ergotropy(&e.passive_state, &h).unwrap();
        prop_assert!(again.value.abs() < 1e-10);
    }

    #[test]
    fn thermal_states_are_completely_passive(seed in any::<u64>(), d in 2usize..6, beta in 0.0f64..4.0) {
        let mut r = rng(seed);
        let h = hamiltonian(d, &mut r);
        let fit = passivity::is_completely_passive(&states::thermal_state(&h, fin(beta)), &h, 1e-8).unwrap();
        prop_assert!(fit.thermal);
        prop_assert!((fit.beta.unwrap().value() - beta).abs() < 1e-6);
    }

    #[test]
    fn decomposition_identity_on_orbit(seed in any::<u64>(), dims in prop::sample::select(vec![(2usize, 2usize), (2, 3), (3, 3)]), beta in 0.2f64..3.0) {
        let mut r = rng(seed);
        let (d_a, d_b) = dims;
        let (h_a, h_b) = (hamiltonian(d_a, &mut r), hamiltonian(d_b, &mut r));
        let trivial = LocalHamiltonian::new(vec![0.0]).unwrap();
        let initial = states::thermal_state(&h_a, fin(beta)).tensor(&states::thermal_state(&h_b, fin(beta)));
        let fin_state = initial.evolve(&random_unitary(d_a * d_b, &mut r)).unwrap();
        let dec = protocol::work_decomposition(beta, &fin_state, [d_a, d_b, 1], &h_a, &h_b, &trivial).unwrap();
        let joint = qcorr::JointHamiltonian::noninteracting(h_a.clone(), h_b.clone());
        let w = protocol::work_cost_out_of_equilibrium(&fin_state, &joint, beta).unwrap();
        prop_assert!((beta * w - dec.sum_of_terms()).abs() < 1e-8);
        prop_assert!(dec.i_ab <= protocol::correlation_bound(w, beta) + 1e-9);
        for term in [dec.rel_entropy_a, dec.rel_entropy_b, dec.i_sr, dec.i_ab, dec.rel_entropy_r.value()] {
            prop_assert!(term >= -1e-10);
        }
    }

    #[test]
    fn parametrised_unitaries_preserve_spectra(seed in any::<u64>(), d in 1usize..6) {
        let mut r = rng(seed);
        let rho = random_density_matrix(d, &mut r);
        let params: Vec<f64> = (0..linalg::generator_len(d)).map(|_| r.random_range(-3.2..3.2)).collect();
        let u = linalg::unitary_from_params(d, &params);
        prop_assert!(linalg::unitarity_defect(&u) < 1e-12);
        let moved = rho.evolve(&u).unwrap();
        for (x, y) in rho.eigenvalues().iter().zip(moved.eigenvalues()) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn xstate_eigenvalue_closed_forms(seed in any::<u64>()) {
        let mut r = rng(seed);
        // marginals a, b and a positive X-state inside them
        let a: f64 = r.random_range(0.5..1.0);
        let b: f64 = r.random_range(0.5..1.0);
        let lo = (a + b - 1.0).max(0.0);
        let rho00 = r.random_range(lo..=a.min(b));
        let (rho01, rho10, rho11) = (a - rho00, b - rho00, 1.0 + rho00 - a - b);
        let d1 = Complex64::from_polar(r.random_range(0.0..=1.0) * (rho01 * rho10).sqrt(), r.random_range(0.0..6.3));
        let d2 = Complex64::from_polar(r.random_range(0.0..=1.0) * (rho00 * rho11).sqrt(), r.random_range(0.0..6.3));
        let mut m = linalg::diag(&[rho00, rho01, rho10, rho11]);
        m[(1, 2)] = d1;
        m[(2, 1)] = d1.conj();
        m[(0, 3)] = d2;
        m[(3, 0)] = d2.conj();
        let c = (1.0 - a - b) / 2.0;
        let outer = (c * c + d2.norm_sqr()).sqrt();
        let inner = (((a - b) / 2.0).powi(2) + d1.norm_sqr()).sqrt();
        let mut closed = vec![
            rho00 + c + outer,
            (a + b) / 2.0 - rho00 + inner,
            (a + b) / 2.0 - rho00 - inner,
            rho00 + c - outer,
        ];
        closed.sort_by(f64::total_cmp);
        for (x, y) in closed.iter().zip(linalg::eigvalsh(&m)) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn xstate_certificates_are_sound(ai in 0u32..=40, bi in 0u32..=40, a in 0u32..=40, b in 0u32..=40) {
        use num_traits::ToPrimitive;
        // splittings on a 1/80 grid in [1/2, 1], sorted so that cooling holds
        let q = |k: u32| xstate::Rational::new((40 + k).into(), 80.into());
        let (a_i, a) = (q(ai.max(a)), q(ai.min(a)));
        let (b_i, b) = (q(bi.max(b)), q(bi.min(b)));
        let p = xstate::XStateProblem::new(a_i, b_i, a, b).unwrap();
        let analysis = xstate::xstate_feasibility(&p);
        prop_assert_eq!(analysis.candidates.len(), 6);
        prop_assert_eq!(&xstate::xstate_feasibility(&p), &analysis);
        if let Some(cert) = analysis.certificate() {
            prop_assert!(xstate::verify_certificate(&p, cert));
            // float reconstruction with real coherences
            let f = |x: &xstate::Rational| x.to_f64().unwrap();
            let (a, b, r00) = (f(&p.a), f(&p.b), f(&cert.rho00));
            let mut m = linalg::diag(&[r00, a - r00, b - r00, 1.0 + r00 - a - b]);
            m[(1, 2)] = Complex64::new(f(&cert.d1_sq).sqrt(), 0.0);
            m[(2, 1)] = m[(1, 2)];
            m[(0, 3)] = Complex64::new(f(&cert.d2_sq).sqrt(), 0.0);
            m[(3, 0)] = m[(0, 3)];
            let mut expected: Vec<f64> = analysis.diagonal.iter().map(f).collect();
            expected.sort_by(f64::total_cmp);
            for (x, y) in expected.iter().zip(linalg::eigvalsh(&m)) {
                prop_assert!((x - y).abs() < 1e-10);
            }
        } else {
            prop_assert_eq!(analysis.verdict.status, FeasibilityStatus::InfeasibleWithinAnsatz);
        }
    }

    #[test]
    fn clausius_inequality_with_thermal_marginals(seed in any::<u64>(), bh in 0.1f64..1.5, bc in 1.5f64..4.0, frac in 0.0f64..1.0) {
        let mut r = rng(seed);
        let h = LocalHamiltonian::qubit(1.0).unwrap();
        let s = heatflow::exchange_correlated_state(&h, &h, fin(bh), fin(bc), frac).unwrap();
        let u = random_unitary(4, &mut r);
        let rep = heatflow::heat_exchange_report(&s, &u, &h, &h).unwrap();
        prop_assert!(rep.satisfies_clausius(1e-9));
        prop_assert!((rep.di - rep.ds_a - rep.ds_b).abs() < 1e-9);
        let fin_state = s.evolve(&u).unwrap();
        prop_assert!((states::von_neumann_entropy(fin_state.state()) - states::von_neumann_entropy(s.state())).abs() < 1e-9);
    }

    #[test]
    fn products_never_flow_cold_to_hot(seed in any::<u64>(), bh in 0.1f64..1.0, bc in 1.0f64..4.0) {
        let mut r = rng(seed);
        let (h_a, h_b) = (hamiltonian(2, &mut r), hamiltonian(3, &mut r));
        let s = BipartiteState::product(&states::thermal_state(&h_a, fin(bh)), &states::thermal_state(&h_b, fin(bc)));
        let u = random_unitary(6, &mut r);
        let rep = heatflow::heat_exchange_report(&s, &u, &h_a, &h_b).unwrap();
        prop_assert!(rep.satisfies_clausius(1e-9));
        // for conserving moves only; a leaky unitary may add work anywhere
        if rep.energy_leak.abs() < 1e-9 {
            prop_assert!(rep.dq_a <= 1e-9);
        }
        prop_assert!(rep.flow != heatflow::FlowDirection::Anomalous || rep.energy_leak.abs() > 0.0);
    }
}

#[test]
fn random_unitaries_on_thermal_products_respect_the_bound() {
    let mut r = rng(2024);
    for trial in 0..1000 {
        let (d_a, d_b) = if trial % 2 == 0 { (2, 2) } else { (2, 3) };
        let (h_a, h_b) = (hamiltonian(d_a, &mut r), hamiltonian(d_b, &mut r));
        let beta = r.random_range(0.1..3.0);
        let initial = BipartiteState::product(&states::thermal_state(&h_a, fin(beta)), &states::thermal_state(&h_b, fin(beta)));
        let fin_state = initial.evolve(&random_unitary(d_a * d_b, &mut r)).unwrap();
        let joint = qcorr::JointHamiltonian::noninteracting(h_a, h_b);
        let w = protocol::work_cost_out_of_equilibrium(fin_state.state(), &joint, beta).unwrap();
        assert!(states::mutual_information(&fin_state) <= protocol::correlation_bound(w, beta) + 1e-9);
    }
}

#[test]
fn energy_conserving_exchanges_from_products_flow_normally() {
    // equal gaps: rotations in the {|01⟩,|10⟩} block conserve energy exactly
    let h = LocalHamiltonian::qubit(1.0).unwrap();
    let s = BipartiteState::product(&states::thermal_state(&h, fin(0.4)), &states::thermal_state(&h, fin(2.5)));
    for k in 0..=200 {
        let u = heatflow::exchange_rotation(2, 2, std::f64::consts::PI * k as f64 / 200.0).unwrap();
        let rep = heatflow::heat_exchange_report(&s, &u, &h, &h).unwrap();
        assert!(rep.dq_a <= 1e-12, "hot side gained {} at step {k}", rep.dq_a);
        assert_ne!(rep.flow, heatflow::FlowDirection::Anomalous);
    }
}

#[test]
fn pure_bithermal_state_supports_anomalous_flow() {
    let h_a = LocalHamiltonian::qubit(1.0).unwrap();
    let h_b = LocalHamiltonian::qubit(2.0).unwrap();
    // μ_A E^A = μ_B E^B with μ_A = 2, μ_B = 1
    let s = states::pure_bithermal_state(&h_a, &h_b, 0.6, 2.0, 1.0).unwrap();
    let config = qcorr::SearchConfig { starts: 8, ..Default::default() };
    let found = heatflow::find_anomalous_unitary(&s, &h_a, &h_b, &config).unwrap().expect("anomalous unitary");
    let rep = &found.report;
    assert_eq!(rep.flow, heatflow::FlowDirection::Anomalous);
    assert!((rep.ds_a - rep.ds_b).abs() < 1e-9);
    assert!(rep.ds_a < 0.0);
    assert!(rep.satisfies_clausius(1e-9));
    assert_eq!(rep.hotter_side(), Some(Side::Right));
}

#[test]
fn failing_subadditivity_blocks_the_search() {
    let config = qcorr::SearchConfig { starts: 6, max_iterations: 600, ..Default::default() };
    for (gap_b, ratio) in [(20.0, 2.0), (50.0, 2.0), (50.0, 3.0)] {
        let (h_a, h_b) = (LocalHamiltonian::qubit(1.0).unwrap(), LocalHamiltonian::qubit(gap_b).unwrap());
        let check = feasibility::subadditivity_feasible(&h_a, &h_b, fin(1.0), fin(ratio)).unwrap();
        assert!(!check.passes);
        let initial = BipartiteState::product(&states::thermal_state(&h_a, fin(ratio)), &states::thermal_state(&h_b, fin(ratio)));
        let out = feasibility::search_correlating_unitary(
            initial.state(),
            &states::thermal_state(&h_a, fin(1.0)),
            &states::thermal_state(&h_b, fin(1.0)),
            &config,
        )
        .unwrap();
        assert!(out.residual >= 1e-4);
        assert_eq!(out.verdict.status, FeasibilityStatus::Unknown);
    }
}

#[test]
fn equal_gap_search_agrees_with_exact_analysis() {
    let h = LocalHamiltonian::qubit(1.0).unwrap();
    let exact = xstate::XStateProblem::from_gaps(1.0, 1.0, 1.0, 2.0).unwrap();
    let analysis = xstate::xstate_feasibility(&exact.problem);
    assert_eq!(analysis.verdict.status, FeasibilityStatus::FeasibleCertified);
    let initial = states::thermal_state(&h, fin(2.0)).tensor(&states::thermal_state(&h, fin(2.0)));
    let tau = states::thermal_state(&h, fin(1.0));
    let config = qcorr::SearchConfig { starts: 6, ..Default::default() };
    let out = feasibility::search_correlating_unitary(&initial, &tau, &tau, &config).unwrap();
    assert_eq!(out.verdict.status, FeasibilityStatus::FeasibleCertified);
}

#[test]
fn counterexample_search_stays_away_from_zero() {
    let w = std::f64::consts::LN_2.sqrt();
    let (h_a, h_b) = (LocalHamiltonian::qubit(3.0 * w).unwrap(), LocalHamiltonian::qubit(w).unwrap());
    let cooled = BipartiteState::product(&states::thermal_state(&h_a, fin(2.0 * w)), &states::thermal_state(&h_b, fin(2.0 * w)));
    let config = qcorr::SearchConfig { starts: 8, max_iterations: 1500, ..Default::default() };
    let out = feasibility::search_correlating_unitary(
        cooled.state(),
        &states::thermal_state(&h_a, fin(w)),
        &states::thermal_state(&h_b, fin(w)),
        &config,
    )
    .unwrap();
    assert_eq!(out.per_start_residuals.len(), 8);
    assert_eq!(out.verdict.status, FeasibilityStatus::Unknown);
    assert!(out.residual > 1e-6, "residual {}", out.residual);
}

#[test]
fn ground_state_correlations_have_bithermal_form() {
    // from |00⟩ the output is pure, so its marginals share a spectrum and
    // the energy used is the excited weight on both sides
    let h = LocalHamiltonian::qubit(1.0).unwrap();
    let ground = BipartiteState::product(
        &states::thermal_state(&h, InverseTemperature::Infinite),
        &states::thermal_state(&h, InverseTemperature::Infinite),
    );
    let config = qcorr::SearchConfig { starts: 6, ..Default::default() };
    let cap = 0.3;
    let out = feasibility::max_mutual_information_unitary(&ground, &h, &h, cap, &config).unwrap();
    let (ra, rb) = (out.final_state.marginal(Side::Left), out.final_state.marginal(Side::Right));
    let (ea, eb) = (ra.eigenvalues(), rb.eigenvalues());
    assert!((ea[0] - eb[0]).abs() < 1e-9);
    // at the optimum the marginals are diagonal and each holds half the energy
    assert!(ra.matrix()[(0, 1)].norm() < 1e-4, "coherence {}", ra.matrix()[(0, 1)].norm());
    assert!((out.used_w - cap).abs() < 1e-4);
    let lambda_sq = ea[0];
    assert!((out.used_w - 2.0 * lambda_sq).abs() < 1e-4);
    assert!((out.achieved_i - 2.0 * states::entropy_of_spectrum(&ea)).abs() < 1e-9);
}

#[test]
fn protocol_budget_is_conserved_and_bounded() {
    let h = LocalHamiltonian::qubit(1.0).unwrap();
    let joint = qcorr::JointHamiltonian::noninteracting(h.clone(), h.clone());
    let threshold = states::von_neumann_entropy(&states::thermal_state(&joint, fin(1.0)));
    let config = qcorr::SearchConfig { starts: 4, max_iterations: 1500, ..Default::default() };
    let mut last = -1.0;
    for frac in [0.0, 0.25, 0.5, 0.9, 1.5] {
        let rep = protocol::run_two_step_protocol(&h, &h, 1.0, frac * threshold, &config).unwrap();
        assert!((rep.w_i + rep.w_ii - rep.w_budget).abs() < 1e-9);
        assert!(rep.achieved_i <= rep.bound_i + 1e-9, "{} > {}", rep.achieved_i, rep.bound_i);
        assert!(rep.achieved_i >= last - 1e-9);
        last = rep.achieved_i;
    }
}

#[test]
fn regime_flips_at_the_threshold() {
    let h = LocalHamiltonian::qubit(1.0).unwrap();
    let joint = qcorr::JointHamiltonian::noninteracting(h.clone(), h.clone());
    let threshold = states::von_neumann_entropy(&states::thermal_state(&joint, fin(1.0)));
    let config = qcorr::SearchConfig { starts: 1, max_iterations: 50, ..Default::default() };
    let below = protocol::run_two_step_protocol(&h, &h, 1.0, threshold - 1e-9, &config).unwrap();
    let above = protocol::run_two_step_protocol(&h, &h, 1.0, threshold + 1e-9, &config).unwrap();
    assert_eq!(below.regime, protocol::Regime::LowEnergy);
    assert_eq!(above.regime, protocol::Regime::HighEnergy);
}

#[test]
fn density_matrix_validation() {
    let mut m = CMat::identity(2, 2).scale(0.5);
    assert!(DensityMatrix::new(m.clone()).is_ok());
    m[(0, 1)] = Complex64::new(0.1, 0.0);
    assert!(DensityMatrix::new(m).is_err());
    let neg = linalg::diag(&[1.0 + 5e-11, -5e-11]);
    assert_eq!(DensityMatrix::new(neg).unwrap().eigenvalues()[0], 0.0);
}
