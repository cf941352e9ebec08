//! Singlet-state phenomenology: basis-invariant anticorrelation, two-party
//! correlators, and the measurement-as-entanglement chain.

mod chain;

pub use chain::{apparatus_chain, apparatus_chain_with, ApparatusFlag, ChainReport, ChainStage};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::qcore::{measure, outcome_probabilities, tensor, MeasurementBasis, Mixture, PureState};
use crate::{Error, Result, TOL_BASIS};

/// An analyzer angle θ, standing for the orthonormal single-qubit pair
/// |ψ⟩ = cosθ|0⟩ + sinθ|1⟩ and |φ⟩ = −sinθ|0⟩ + cosθ|1⟩.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleBasis {
    theta: f64,
}

impl AngleBasis {
    /// Builds an analyzer basis, checking that the implied pair really is
    /// orthonormal (it is by construction; the check guards against
    /// non-finite angles and catches regressions at [`TOL_BASIS`]).
    pub fn new(theta: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::InvalidBasis(format!("non-finite angle {theta}")));
        }
        let b = AngleBasis { theta };
        let (psi, phi) = b.vectors();
        let cross = psi.inner(&phi).expect("same dims").norm();
        let n_psi = (psi.norm() - 1.0).abs();
        let n_phi = (phi.norm() - 1.0).abs();
        if cross > TOL_BASIS || n_psi > TOL_BASIS || n_phi > TOL_BASIS {
            return Err(Error::InvalidBasis(format!(
                "angle {theta} produced a non-orthonormal pair"
            )));
        }
        Ok(b)
    }

    /// The analyzer angle in radians.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// A uniformly random analyzer angle over [0, π); analyzers are
    /// π-periodic up to outcome relabelling, so this covers them all.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let theta = rng.random::<f64>() * std::f64::consts::PI;
        AngleBasis::new(theta).expect("finite by construction")
    }

    /// The orthonormal pair (|ψ⟩, |φ⟩) this angle stands for.
    pub fn vectors(&self) -> (PureState, PureState) {
        let (s, c) = self.theta.sin_cos();
        let psi = PureState::qubit(c, s).expect("orthonormal by construction");
        let phi = PureState::qubit(-s, c).expect("orthonormal by construction");
        (psi, phi)
    }

    /// This angle as a complete measurement basis, outcome 0 ↦ |ψ⟩.
    pub fn measurement_basis(&self) -> MeasurementBasis {
        let (psi, phi) = self.vectors();
        MeasurementBasis::new(vec![psi, phi]).expect("orthonormal by construction")
    }
}

/// The singlet state (|01⟩ − |10⟩)/√2 on two qubits.
pub fn singlet() -> PureState {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    PureState::new(
        vec![2, 2],
        vec![
            Complex64::ZERO,
            Complex64::new(r, 0.0),
            Complex64::new(-r, 0.0),
            Complex64::ZERO,
        ],
    )
    .expect("valid")
}

/// The singlet written in an arbitrary analyzer basis,
/// (|ψ⟩|φ⟩ − |φ⟩|ψ⟩)/√2, expanded through explicit tensor products.
///
/// For every angle this is the same vector as [`singlet`]; that identity is
/// what makes the anticorrelation basis-independent, and it is asserted by
/// tests rather than assumed here.
pub fn rewrite_in_basis(basis: &AngleBasis) -> PureState {
    let (psi, phi) = basis.vectors();
    let a = tensor(&psi, &phi);
    let b = tensor(&phi, &psi);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let amplitudes = a
        .amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| (x - y) * r)
        .collect();
    PureState::new(vec![2, 2], amplitudes).expect("difference of product states is normalized")
}

/// Measures both halves of a singlet in the same analyzer basis,
/// sequentially: the left particle first by the Born rule, then the right
/// particle on the collapsed state. Returns the two outcome bits.
///
/// The final statistics do not depend on which side goes first; that is
/// asserted in tests.
pub fn joint_measure_same_basis<R: Rng + ?Sized>(basis: &AngleBasis, rng: &mut R) -> (u8, u8) {
    let mb = basis.measurement_basis();
    let state = singlet();
    let left = measure(&state, 0, &mb, rng).expect("valid measurement");
    let right = measure(&left.post_state, 1, &mb, rng).expect("valid measurement");
    (left.outcome_index as u8, right.outcome_index as u8)
}

/// Same protocol run on an explicit two-qubit ensemble instead of the
/// singlet: a member state is drawn with its ensemble probability, then
/// both subsystems are measured in the given basis.
pub fn joint_measure_mixture<R: Rng + ?Sized>(
    m: &Mixture,
    basis: &AngleBasis,
    rng: &mut R,
) -> Result<(u8, u8)> {
    if m.dims() != [2, 2] {
        return Err(Error::DimensionMismatch(format!(
            "joint measurement needs a two-qubit ensemble, got dims {:?}",
            m.dims()
        )));
    }
    let draw: f64 = rng.random();
    let mut acc = 0.0;
    let mut picked = m.entries().len() - 1;
    for (i, (_, p)) in m.entries().iter().enumerate() {
        acc += p;
        if draw < acc {
            picked = i;
            break;
        }
    }
    let state = &m.entries()[picked].0;
    let mb = basis.measurement_basis();
    let left = measure(state, 0, &mb, rng)?;
    let right = measure(&left.post_state, 1, &mb, rng)?;
    Ok((left.outcome_index as u8, right.outcome_index as u8))
}

/// How a correlator value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelatorMethod {
    Analytic,
    Sampled,
}

/// A two-party correlator E with its provenance. Outcomes are mapped to
/// signs by the convention 0 ↦ +1, 1 ↦ −1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorEstimate {
    pub value: f64,
    pub method: CorrelatorMethod,
    pub n_samples: u64,
    pub std_err: f64,
}

/// Sign convention for outcome bits: 0 ↦ +1, 1 ↦ −1.
pub fn outcome_sign(bit: u8) -> f64 {
    if bit == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Analytic singlet correlator for analyzer angles (θa, θb):
/// E = Σ_{jk} sign(j)·sign(k)·P(j,k) with P(j,k) the Born probability of
/// joint outcome (j,k), enumerated directly from the state. For the
/// singlet this comes out as −cos(2(θa−θb)); tests confirm that identity
/// against this enumeration rather than assuming it.
pub fn correlator(theta_a: &AngleBasis, theta_b: &AngleBasis) -> CorrelatorEstimate {
    let mut value = 0.0;
    for (j, k, p) in joint_outcome_probabilities(theta_a, theta_b) {
        value += outcome_sign(j) * outcome_sign(k) * p;
    }
    CorrelatorEstimate {
        value,
        method: CorrelatorMethod::Analytic,
        n_samples: 0,
        std_err: 0.0,
    }
}

/// Born probabilities of the four joint outcomes (j, k) when the left
/// analyzer sits at θa and the right at θb, enumerated by sequential
/// measurement: P(j,k) = P(j) · P(k | left collapsed on j).
pub fn joint_outcome_probabilities(
    theta_a: &AngleBasis,
    theta_b: &AngleBasis,
) -> Vec<(u8, u8, f64)> {
    let state = singlet();
    let ba = theta_a.measurement_basis();
    let bb = theta_b.measurement_basis();
    let mut out = Vec::with_capacity(4);
    let branches = crate::qcore::measurement_branches(&state, 0, &ba).expect("valid measurement");
    for (j, (p_left, post)) in branches.into_iter().enumerate() {
        match post {
            Some(post) => {
                let probs = outcome_probabilities(&post, 1, &bb).expect("valid measurement");
                for (k, p_right) in probs.into_iter().enumerate() {
                    out.push((j as u8, k as u8, p_left * p_right));
                }
            }
            None => {
                for k in 0..2 {
                    out.push((j as u8, k, 0.0));
                }
            }
        }
    }
    out
}

/// Monte-Carlo estimate of the same correlator from `n` seeded joint
/// measurements with independent analyzer angles per side. The standard
/// error is √((1 − E²)/n) for ±1-valued products.
pub fn correlator_sampled<R: Rng + ?Sized>(
    theta_a: &AngleBasis,
    theta_b: &AngleBasis,
    n: u64,
    rng: &mut R,
) -> Result<CorrelatorEstimate> {
    if n == 0 {
        return Err(Error::InsufficientSamples(
            "sampled correlator needs at least one trial".into(),
        ));
    }
    let state = singlet();
    let ba = theta_a.measurement_basis();
    let bb = theta_b.measurement_basis();
    let mut sum = 0.0;
    for _ in 0..n {
        let left = measure(&state, 0, &ba, rng)?;
        let right = measure(&left.post_state, 1, &bb, rng)?;
        sum += outcome_sign(left.outcome_index as u8) * outcome_sign(right.outcome_index as u8);
    }
    let value = sum / n as f64;
    let std_err = ((1.0 - value * value).max(0.0) / n as f64).sqrt();
    Ok(CorrelatorEstimate {
        value,
        method: CorrelatorMethod::Sampled,
        n_samples: n,
        std_err,
    })
}
