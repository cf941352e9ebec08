//! Dense complex-vector quantum core.
//!
//! Pure states over arbitrary subsystem dimension lists, probabilistic
//! mixtures, density matrices, seeded Born-rule measurement, tensor
//! products, partial trace and purification. Everything is validated at
//! construction; all operations are pure functions except [`measure`],
//! which mutates only its supplied RNG.

mod density;
mod index;
mod measure;
mod mixture;
mod state;

pub use density::{
    density_equal, density_of, is_pure_by_peres, max_abs_diff, partial_trace, DensityMatrix,
};
pub use measure::{
    measure, measurement_branches, outcome_probabilities, MeasurementBasis, MeasurementRecord,
};
pub use mixture::{
    bell_mixture, classical_pair_mixture, classical_two_bit_mixture, coin_mixture,
    hadamard_coin_mixture, purify, trine_mixture, Mixture,
};
pub use state::{
    bell_states, hadamard_minus, hadamard_plus, ket0, ket1, tensor, Amplitude, PureState,
};
