//! Cross-module invariants, including the heavier randomized ones.

use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

use plsim::chsh::{lhv_exhaustive, quantum_chsh_sampled, ChshSettings};
use plsim::entanglement::{
    apparatus_chain_with, correlator, joint_measure_same_basis, rewrite_in_basis, singlet,
    AngleBasis,
};
use plsim::locality::{audit, cross_site_isolated, inject_fault};
use plsim::parallel_lives::{
    match_bubbles, output_weight, pr_success_probability, run_experiment, Agent, AgentWorld,
};
use plsim::qcore::{
    density_equal, density_of, is_pure_by_peres, measurement_branches, outcome_probabilities,
    partial_trace, purify, DensityMatrix, Mixture, PureState,
};
use plsim::{seeded_rng, SeededRng, TOL_ALGEBRA, TOL_EIGEN};

fn random_state<R: Rng>(rng: &mut R, dims: Vec<usize>) -> PureState {
    let n: usize = dims.iter().product();
    loop {
        let amps: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        if let Ok(s) = PureState::from_unnormalized(dims.clone(), amps) {
            return s;
        }
    }
}

fn random_mixture<R: Rng>(rng: &mut R, dims: Vec<usize>, k: usize) -> Mixture {
    let weights: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = weights.iter().sum();
    Mixture::new(
        weights
            .into_iter()
            .map(|w| (random_state(rng, dims.clone()), w / total))
            .collect(),
    )
    .expect("normalized by construction")
}

// ---------------------------------------------------------------- qcore --

#[test]
fn purification_round_trip_200_random_mixtures() {
    let mut rng = seeded_rng(0xA11CE);
    for trial in 0..200 {
        let d = 1 + (trial % 4);
        let k = 1 + (trial % 5);
        let m = random_mixture(&mut rng, vec![d], k);
        let purified = purify(&m).unwrap();
        let reduced = partial_trace(&purified.density(), &[0]).unwrap();
        let direct = density_of(&m);
        // The purification's left register is the flattened system, so
        // compare raw matrices over the same total dimension.
        let diff = (reduced.matrix() - direct.matrix())
            .iter()
            .map(|x| x.norm())
            .fold(0.0, f64::max);
        assert!(
            diff <= TOL_ALGEBRA,
            "trial {trial}: round-trip error {diff}"
        );
    }
}

#[test]
fn maximally_mixed_is_uniform_in_every_basis() {
    // ⟨b|ρ|b⟩ = ½ for the maximally mixed qubit and any analyzer vector.
    let rho = DensityMatrix::maximally_mixed(vec![2]).unwrap();
    let mut rng = seeded_rng(99);
    for _ in 0..50 {
        let theta = (rng.random::<f64>() - 0.5) * 20.0;
        let basis = AngleBasis::new(theta).unwrap().measurement_basis();
        for b in basis.vectors() {
            let a = b.amplitudes();
            let mut p = Complex64::ZERO;
            for i in 0..2 {
                for j in 0..2 {
                    p += a[i].conj() * rho.matrix()[(i, j)] * a[j];
                }
            }
            assert!((p.re - 0.5).abs() <= TOL_ALGEBRA && p.im.abs() <= TOL_ALGEBRA);
        }
    }
}

proptest! {
    #[test]
    fn mixture_density_always_satisfies_density_invariants(
        seed in any::<u64>(),
        d in 1usize..=4,
        k in 1usize..=5,
    ) {
        let mut rng = seeded_rng(seed);
        let m = random_mixture(&mut rng, vec![d], k);
        let rho = density_of(&m);
        // Hermitian, unit trace, PSD; DensityMatrix::new re-validates, so
        // round-tripping the raw matrix through the constructor must work.
        prop_assert!((rho.trace() - 1.0).abs() <= TOL_ALGEBRA);
        prop_assert!(DensityMatrix::new(rho.dims().to_vec(), rho.matrix().clone()).is_ok());
        prop_assert!(rho.eigenvalues().iter().all(|&e| e >= -TOL_ALGEBRA));
    }

    #[test]
    fn born_probabilities_are_complete(seed in any::<u64>(), theta in -7.0f64..7.0) {
        let mut rng = seeded_rng(seed);
        let state = random_state(&mut rng, vec![2, 2]);
        let basis = AngleBasis::new(theta).unwrap().measurement_basis();
        for subsystem in [0, 1] {
            let probs = outcome_probabilities(&state, subsystem, &basis).unwrap();
            let total: f64 = probs.iter().sum();
            prop_assert!((total - 1.0).abs() <= TOL_ALGEBRA);
            prop_assert!(probs.iter().all(|&p| (-TOL_ALGEBRA..=1.0 + TOL_ALGEBRA).contains(&p)));
        }
    }

    #[test]
    fn peres_purity_agrees_with_rank_one_check(seed in any::<u64>(), k in 1usize..=4) {
        let mut rng = seeded_rng(seed);
        // Half the time, a genuinely pure ensemble: one state repeated.
        let m = if k == 1 || seed % 2 == 0 {
            let s = random_state(&mut rng, vec![3]);
            Mixture::new(vec![(s.clone(), 0.5), (s, 0.5)]).unwrap()
        } else {
            random_mixture(&mut rng, vec![3], k)
        };
        let eigs = density_of(&m).eigenvalues();
        let rank_one = eigs[0] >= 1.0 - TOL_EIGEN;
        prop_assert_eq!(is_pure_by_peres(&m), rank_one);
    }

    #[test]
    fn tensor_norm_is_multiplicative(seed in any::<u64>()) {
        let mut rng = seeded_rng(seed);
        let a = random_state(&mut rng, vec![2]);
        let b = random_state(&mut rng, vec![3]);
        let t = plsim::qcore::tensor(&a, &b);
        prop_assert!((t.norm() - 1.0).abs() <= 1e-12);
        prop_assert_eq!(t.dims(), &[2, 3][..]);
    }
}

// --------------------------------------------------------- entanglement --

#[test]
fn basis_invariance_50_random_angles() {
    let mut rng = seeded_rng(50);
    let reference = singlet();
    for _ in 0..50 {
        let theta = (rng.random::<f64>() - 0.5) * 4.0 * std::f64::consts::PI;
        let rewritten = rewrite_in_basis(&AngleBasis::new(theta).unwrap());
        assert!(
            rewritten.approx_eq_up_to_phase(&reference, TOL_ALGEBRA),
            "θ = {theta}"
        );
    }
}

#[test]
fn perfect_anticorrelation_50_angles_10k_trials() {
    let mut angle_rng = seeded_rng(123);
    let mut rng = seeded_rng(456);
    for _ in 0..50 {
        let theta = (angle_rng.random::<f64>() - 0.5) * 10.0;
        let basis = AngleBasis::new(theta).unwrap();
        for _ in 0..10_000 {
            let (l, r) = joint_measure_same_basis(&basis, &mut rng);
            assert_ne!(l, r, "equal outcomes at θ = {theta}");
        }
    }
}

#[test]
fn no_signalling_left_basis_choice_never_moves_right_density() {
    // Whatever basis is measured (and forgotten) on the left, the right
    // particle's average reduced state stays maximally mixed.
    let state = singlet();
    let half_i = DensityMatrix::maximally_mixed(vec![2]).unwrap();
    let mut rng = seeded_rng(31);
    for _ in 0..25 {
        let theta = (rng.random::<f64>() - 0.5) * 12.0;
        let basis = AngleBasis::new(theta).unwrap().measurement_basis();
        let branches = measurement_branches(&state, 0, &basis).unwrap();
        let mut averaged = nalgebra::DMatrix::<Complex64>::zeros(2, 2);
        for (p, post) in branches {
            let post = post.expect("singlet branches have probability ½ each");
            let reduced = partial_trace(&post.density(), &[1]).unwrap();
            averaged += reduced.matrix() * Complex64::new(p, 0.0);
        }
        let avg = DensityMatrix::new(vec![2], averaged).unwrap();
        assert!(
            density_equal(&avg, &half_i, TOL_ALGEBRA).unwrap(),
            "θ = {theta}"
        );
    }
}

#[test]
fn correlators_stay_bounded_and_marginals_stay_uniform() {
    let mut rng = seeded_rng(8);
    for _ in 0..40 {
        let ta = AngleBasis::new((rng.random::<f64>() - 0.5) * 9.0).unwrap();
        let tb = AngleBasis::new((rng.random::<f64>() - 0.5) * 9.0).unwrap();
        assert!(correlator(&ta, &tb).value.abs() <= 1.0 + 1e-12);
    }
    // Sampled marginals: (½, ½) within 3σ over 10⁴ trials.
    let basis = AngleBasis::new(0.9).unwrap();
    let n = 10_000;
    let mut left_ones = 0u32;
    let mut right_ones = 0u32;
    let mut rng = seeded_rng(9);
    for _ in 0..n {
        let (l, r) = joint_measure_same_basis(&basis, &mut rng);
        left_ones += u32::from(l == 1);
        right_ones += u32::from(r == 1);
    }
    let sigma = 0.5 / (n as f64).sqrt();
    for ones in [left_ones, right_ones] {
        let frac = f64::from(ones) / n as f64;
        assert!((frac - 0.5).abs() <= 3.0 * sigma, "marginal {frac}");
    }
}

#[test]
fn apparatus_chain_holds_for_random_analyzers() {
    let mut rng = seeded_rng(77);
    for _ in 0..10 {
        let theta = (rng.random::<f64>() - 0.5) * 6.0;
        let report = apparatus_chain_with(&AngleBasis::new(theta).unwrap());
        assert!(report.passed, "θ = {theta}: {:#?}", report.checks);
    }
}

// ------------------------------------------------------- parallel lives --

#[test]
fn matching_totality_exhaustive_up_to_six_rounds() {
    // Every input assignment (x, y) ∈ {0,1}ⁿ × {0,1}ⁿ for n ≤ 6: the
    // matching is a bijection and every pair satisfies the predicate on
    // every round.
    for n in 1..=6usize {
        for xa in 0u32..(1 << n) {
            for yb in 0u32..(1 << n) {
                let mut alice = AgentWorld::fresh(Agent::Alice);
                let mut bob = AgentWorld::fresh(Agent::Bob);
                for r in 0..n {
                    alice.press_button(((xa >> r) & 1) as u8).unwrap();
                    bob.press_button(((yb >> r) & 1) as u8).unwrap();
                }
                let pairs = match_bubbles(&alice, &bob).unwrap();
                assert_eq!(pairs.len(), 1 << n);
                let mut seen_a = vec![false; 1 << n];
                let mut seen_b = vec![false; 1 << n];
                for p in &pairs {
                    assert!(!seen_a[p.alice_index] && !seen_b[p.bob_index]);
                    seen_a[p.alice_index] = true;
                    seen_b[p.bob_index] = true;
                    let a = &alice.bubbles()[p.alice_index].transcript;
                    let b = &bob.bubbles()[p.bob_index].transcript;
                    for (ra, rb) in a.rounds().iter().zip(b.rounds()) {
                        assert_eq!(ra.output ^ rb.output, ra.input & rb.input);
                    }
                }
            }
        }
    }
}

#[test]
fn honest_logs_pass_audit_and_stay_cross_site_isolated() {
    for seed in 0..100 {
        let mut rng = seeded_rng(seed);
        let n = 1 + (seed as usize % 6);
        let record = run_experiment(n, &mut rng).unwrap();
        let report = audit(&record.events, record.signal_speed).unwrap();
        assert!(report.passed, "seed {seed}: {:?}", report.violations);
        assert!(report.violations.is_empty());
        assert!(cross_site_isolated(&record.events).unwrap());
        assert_eq!(pr_success_probability(&record).unwrap(), 1.0);
    }
}

#[test]
fn fault_injection_is_fully_detected() {
    let mut rng = seeded_rng(2024);
    let record = run_experiment(3, &mut rng).unwrap();
    let mut applied = 0;
    for variant in 0..20 {
        let (name, mutated) =
            inject_fault(&record.events, variant).expect("log is large enough for all variants");
        let report = audit(&mutated, record.signal_speed).unwrap();
        assert!(!report.passed, "fault {name} went undetected");
        assert!(!report.violations.is_empty());
        applied += 1;
    }
    assert_eq!(applied, 20);
}

#[test]
fn marginals_stay_exactly_half_across_runs() {
    for seed in [3u64, 14, 159] {
        let mut rng = seeded_rng(seed);
        let record = run_experiment(5, &mut rng).unwrap();
        for round in 0..5 {
            for (bubbles, bit) in [
                (&record.alice_bubbles, 0u8),
                (&record.alice_bubbles, 1),
                (&record.bob_bubbles, 0),
                (&record.bob_bubbles, 1),
            ] {
                assert_eq!(output_weight(bubbles, round, bit), 0.5);
            }
        }
    }
}

// ----------------------------------------------------------------- chsh --

#[test]
fn shared_randomness_cannot_beat_deterministic_strategies() {
    // Convexity in numbers: a uniform mixture of all 16 strategies scores
    // the average, and every mixture is bounded by the deterministic max.
    let summary = lhv_exhaustive();
    let avg_s: f64 =
        summary.evaluations.iter().map(|e| e.1).sum::<f64>() / summary.evaluations.len() as f64;
    assert!(avg_s <= summary.max_s);
    assert_eq!(summary.evaluations.len(), 16);
}

#[test]
fn sampled_quantum_correlators_match_analytic_at_1e5_samples() {
    let basis = |t: f64| AngleBasis::new(t).unwrap();
    let settings = ChshSettings {
        a: basis(0.0),
        a_prime: basis(-3.0 * std::f64::consts::PI / 4.0),
        b: basis(-3.0 * std::f64::consts::PI / 8.0),
        b_prime: basis(3.0 * std::f64::consts::PI / 8.0),
    };
    let mut rng: SeededRng = seeded_rng(31337);
    let sampled = quantum_chsh_sampled(&settings, 100_000, &mut rng).unwrap();
    let analytic = plsim::chsh::quantum_chsh(&settings);
    for (s_term, a_term) in sampled.per_term.iter().zip(&analytic.per_term) {
        assert!(
            (s_term.value - a_term.value).abs() <= 4.0 * s_term.std_err.max(1e-4),
            "sampled {} vs analytic {} (σ = {})",
            s_term.value,
            a_term.value,
            s_term.std_err
        );
    }
}
