//! Acceptance suite: one test per release criterion, each at its stated
//! tolerance and runtime budget. Run with
//! `cargo test -p plsim-cli --test acceptance -- --nocapture` to see the
//! per-criterion pass lines.

use std::process::Command;
use std::time::{Duration, Instant};

use plsim::chsh::{lhv_exhaustive, quantum_optimize};
use plsim::entanglement::{
    apparatus_chain, joint_measure_mixture, joint_measure_same_basis, outcome_sign,
    rewrite_in_basis, singlet, AngleBasis,
};
use plsim::locality::{audit, inject_fault};
use plsim::parallel_lives::{
    match_bubbles, pr_success_probability, run_experiment, Agent, AgentWorld, ExperimentRecord,
};
use plsim::qcore::{
    bell_mixture, classical_pair_mixture, classical_two_bit_mixture, coin_mixture, density_equal,
    density_of, hadamard_coin_mixture, max_abs_diff, partial_trace, purify, trine_mixture,
    DensityMatrix, Mixture, PureState,
};
use plsim::{seeded_rng, TOL_ALGEBRA};

const SQRT_8: f64 = 2.828_427_124_746_190_3;
const TSIRELSON_SUCCESS: f64 = 0.853_553_390_593_273_7;

fn finish(name: &str, started: Instant, budget: Duration) {
    let elapsed = started.elapsed();
    println!("{name}: PASS in {elapsed:?} (budget {budget:?})");
    assert!(
        elapsed < budget,
        "{name} exceeded its runtime budget: {elapsed:?} >= {budget:?}"
    );
}

#[test]
fn criterion_01_mixture_equivalence() {
    let started = Instant::now();
    let coin = density_of(&coin_mixture());
    let hadamard = density_of(&hadamard_coin_mixture());
    let trine = density_of(&trine_mixture());
    for (name, a, b) in [
        ("coin/hadamard", &coin, &hadamard),
        ("coin/trine", &coin, &trine),
        ("hadamard/trine", &hadamard, &trine),
    ] {
        assert!(
            density_equal(a, b, 1e-10).unwrap(),
            "{name} differ by {}",
            max_abs_diff(a, b).unwrap()
        );
    }
    let bell = density_of(&bell_mixture());
    let classical = density_of(&classical_two_bit_mixture());
    let quarter_identity = DensityMatrix::maximally_mixed(vec![2, 2]).unwrap();
    assert!(density_equal(&bell, &classical, 1e-10).unwrap());
    assert!(density_equal(&bell, &quarter_identity, 1e-10).unwrap());
    finish(
        "criterion 01 mixture equivalence",
        started,
        Duration::from_secs(1),
    );
}

#[test]
fn criterion_02_purification_round_trip() {
    let started = Instant::now();
    let mut rng = seeded_rng(0x9u64);
    for trial in 0..200u32 {
        use rand::Rng;
        let d = 1 + (trial as usize % 4);
        let k = 1 + (trial as usize % 5);
        let states: Vec<PureState> = (0..k)
            .map(|_| loop {
                let amps: Vec<_> = (0..d)
                    .map(|_| {
                        num_complex::Complex64::new(
                            rng.random::<f64>() - 0.5,
                            rng.random::<f64>() - 0.5,
                        )
                    })
                    .collect();
                if let Ok(s) = PureState::from_unnormalized(vec![d], amps) {
                    break s;
                }
            })
            .collect();
        let weights: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 1e-3).collect();
        let total: f64 = weights.iter().sum();
        let m = Mixture::new(
            states
                .into_iter()
                .zip(weights)
                .map(|(s, w)| (s, w / total))
                .collect(),
        )
        .unwrap();

        let purified = purify(&m).unwrap();
        let reduced = partial_trace(&purified.density(), &[0]).unwrap();
        let direct = density_of(&m);
        let err = (reduced.matrix() - direct.matrix())
            .iter()
            .map(|x| x.norm())
            .fold(0.0, f64::max);
        assert!(err <= 1e-10, "trial {trial}: round-trip error {err}");
    }
    finish(
        "criterion 02 purification round-trip",
        started,
        Duration::from_secs(5),
    );
}

#[test]
fn criterion_03_singlet_basis_invariance() {
    let started = Instant::now();
    let mut rng = seeded_rng(3);
    let reference = singlet();
    for _ in 0..50 {
        use rand::Rng;
        let theta = (rng.random::<f64>() - 0.5) * 4.0 * std::f64::consts::PI;
        let rewritten = rewrite_in_basis(&AngleBasis::new(theta).unwrap());
        assert!(
            rewritten.approx_eq_up_to_phase(&reference, 1e-10),
            "θ = {theta}"
        );
    }
    finish(
        "criterion 03 basis invariance",
        started,
        Duration::from_secs(1),
    );
}

#[test]
fn criterion_04_perfect_anticorrelation_and_classical_contrast() {
    let started = Instant::now();
    let mut angle_rng = seeded_rng(4);
    let mut rng = seeded_rng(44);
    for _ in 0..50 {
        let basis = AngleBasis::random(&mut angle_rng);
        for _ in 0..10_000 {
            let (l, r) = joint_measure_same_basis(&basis, &mut rng);
            assert_ne!(l, r, "equal outcomes at θ = {}", basis.theta());
        }
    }
    // Classical anticorrelated pairs lose the correlation at θ = π/4:
    // equal outcomes in 50% ± 2% of trials.
    let ensemble = classical_pair_mixture();
    let basis = AngleBasis::new(std::f64::consts::FRAC_PI_4).unwrap();
    let n = 10_000u32;
    let mut equal = 0u32;
    for _ in 0..n {
        let (l, r) = joint_measure_mixture(&ensemble, &basis, &mut rng).unwrap();
        equal += u32::from(l == r);
    }
    let frac = f64::from(equal) / f64::from(n);
    assert!((frac - 0.5).abs() <= 0.02, "contrast fraction {frac}");
    finish(
        "criterion 04 perfect anticorrelation",
        started,
        Duration::from_secs(10),
    );
}

#[test]
fn criterion_05_apparatus_chain() {
    let started = Instant::now();
    let report = apparatus_chain();
    assert!(report.passed, "chain checks: {:#?}", report.checks);
    for required in [
        "stage1_left_detector_unreacted",
        "stage1_right_detector_unreacted",
        "stage2_right_detector_unreacted",
        "detector_pair_matches_complementary_mixture",
    ] {
        let check = report
            .checks
            .iter()
            .find(|c| c.name == required)
            .unwrap_or_else(|| panic!("missing check {required}"));
        assert!(check.pass);
        assert!(check.tolerance <= TOL_ALGEBRA);
    }
    finish(
        "criterion 05 apparatus chain",
        started,
        Duration::from_secs(1),
    );
}

#[test]
fn criterion_06_lhv_bounds() {
    let started = Instant::now();
    let summary = lhv_exhaustive();
    assert_eq!(summary.evaluations.len(), 16);
    assert_eq!(summary.max_s, 2.0);
    assert_eq!(summary.min_s, -2.0);
    assert_eq!(summary.max_success, 0.75);
    finish("criterion 06 LHV bounds", started, Duration::from_secs(1));
}

#[test]
fn criterion_07_tsirelson_values() {
    let started = Instant::now();
    let optimum = quantum_optimize();
    assert!(
        (optimum.s_max - SQRT_8).abs() <= 1e-6,
        "S_max = {}",
        optimum.s_max
    );
    assert!(
        (optimum.success - TSIRELSON_SUCCESS).abs() <= 1e-6,
        "success = {}",
        optimum.success
    );
    finish(
        "criterion 07 Tsirelson values",
        started,
        Duration::from_secs(60),
    );
}

fn thousand_experiments() -> Vec<ExperimentRecord> {
    (0..1000u64)
        .map(|seed| {
            let mut rng = seeded_rng(seed);
            let rounds = 1 + (seed as usize % 6);
            run_experiment(rounds, &mut rng).unwrap()
        })
        .collect()
}

#[test]
fn criterion_08_parallel_lives_pr_box() {
    let started = Instant::now();
    // 10³ seeded experiments with 1..=6 rounds: the predicate holds in
    // every matched pair, so the success probability is exactly 1 and the
    // pooled CHSH combination exactly 4.
    let mut correlator_weights = [[0.0f64; 2]; 2];
    let mut correlator_products = [[0.0f64; 2]; 2];
    for record in thousand_experiments() {
        assert_eq!(pr_success_probability(&record).unwrap(), 1.0);
        for r in record.matched_rounds() {
            assert_eq!(r.alice_output ^ r.bob_output, r.x & r.y);
            let (x, y) = (r.x as usize, r.y as usize);
            correlator_weights[x][y] += r.weight;
            correlator_products[x][y] +=
                r.weight * outcome_sign(r.alice_output) * outcome_sign(r.bob_output);
        }
    }
    let e = |x: usize, y: usize| correlator_products[x][y] / correlator_weights[x][y];
    let s = e(0, 0) + e(0, 1) + e(1, 0) - e(1, 1);
    assert_eq!(s, 4.0);

    // Matching is a verified bijection for every input assignment
    // (x, y) ∈ {0,1}ⁿ × {0,1}ⁿ, exhaustively for n ≤ 6.
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
    finish(
        "criterion 08 parallel-lives PR box",
        started,
        Duration::from_secs(30),
    );
}

#[test]
fn criterion_09_locality_audit() {
    let started = Instant::now();
    let records = thousand_experiments();
    for record in &records {
        let report = audit(&record.events, record.signal_speed).unwrap();
        assert!(report.passed);
        assert!(report.violations.is_empty());
    }
    // Twenty deterministic fault injections, each detected with at least
    // one named violation.
    let host = &records[0];
    let mut detected = 0;
    for variant in 0..20 {
        let (name, mutated) =
            inject_fault(&host.events, variant).expect("experiment log hosts all fault variants");
        let report = audit(&mutated, host.signal_speed).unwrap();
        assert!(!report.passed, "fault {name} went undetected");
        assert!(!report.violations.is_empty());
        detected += 1;
    }
    assert_eq!(detected, 20);
    finish(
        "criterion 09 locality audit",
        started,
        Duration::from_secs(10),
    );
}

#[test]
fn criterion_10_byte_identical_reports() {
    let started = Instant::now();
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_plsim"))
            .args(["all", "--seed", "42", "--format", "json"])
            .output()
            .expect("binary runs")
    };
    let first = run();
    let second = run();
    assert!(first.status.success(), "first run failed: {first:?}");
    assert!(second.status.success());
    assert!(!first.stdout.is_empty());
    assert_eq!(first.stdout, second.stdout, "reports differ between runs");
    // The text rendering is deterministic too.
    let text = |_: ()| {
        Command::new(env!("CARGO_BIN_EXE_plsim"))
            .args(["all", "--seed", "42"])
            .output()
            .expect("binary runs")
    };
    assert_eq!(text(()).stdout, text(()).stdout);
    finish(
        "criterion 10 determinism",
        started,
        Duration::from_secs(120),
    );
}
