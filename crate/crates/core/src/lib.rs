//! Nonstabilizerness of quantum walks on XX and XXZ spin chains.
//!
//! A single flipped spin (or a pair of adjacent flips) on a polarized chain
//! is evolved exactly, and the stabilizer Rényi entropy `M2` of the state is
//! tracked through the full Pauli spectrum, closed-form coefficient sums,
//! and the infinite-chain Bessel solution. At large anisotropy the pair
//! binds into a doublon whose effective walk is modeled separately.
//!
//! Modules:
//! * [`model`]: chain parameters, sector bases, Hamiltonians.
//! * [`dynamics`]: exact propagation and local magnetization.
//! * [`magic`]: Pauli spectrum and `M2` estimators.
//! * [`doublon`]: effective doublon walk.
//! * [`stats`]: spacing ratios, cumulative averages, front and growth fits.
//! * [`experiment`]: pipelines combining the above.

pub mod doublon;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod magic;
pub mod model;
pub mod stats;

#[cfg(test)]
mod proptests;

pub use doublon::{doublon_magic_series, doublon_params, shift_fit, DoublonParams, ShiftFit};
pub use dynamics::{
    bessel_j_array, evolve, magnetization_profile, single_particle_amplitudes, BesselWalk,
    Propagator, WalkState,
};
pub use error::{Error, Result};
pub use magic::{
    m2_asymptotic, m2_bessel, m2_bruteforce, m2_coeff, m2_from_spectrum, pauli_spectrum_full,
    Estimator, FilteredSpectrum, MagicSeries, PauliSpectrum,
};
pub use model::{
    build_full_hamiltonian, build_sector_hamiltonian, initial_state, ChainSpec, HamiltonianMatrix,
    SectorBasis, SectorKind, Space,
};
pub use stats::{
    cumulative_average, light_cone_front, log_growth_fit, poisson_reference, spacing_ratios,
    FrontFit, LogFit, SpacingStats,
};

pub use num_complex::Complex64;
