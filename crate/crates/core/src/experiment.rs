//! End-to-end pipelines shared by the command line and the acceptance suite.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{evolve, magnetization_profile, Propagator, WalkState};
use crate::error::{Error, Result};
use crate::magic::{
    m2_asymptotic, m2_bessel, m2_coeff, m2_from_spectrum, pauli_spectrum_full, Estimator,
    MagicSeries, SpectrumCounts, ZERO_THRESHOLD,
};
use crate::model::{build_sector_hamiltonian, initial_state, ChainSpec, HamiltonianMatrix, SectorBasis, Space};
use crate::stats::{pool_ratios, spacing_ratios, PooledRatios};

/// Sector Hamiltonian, its propagator and the localized initial state.
pub struct SectorWalk {
    pub spec: ChainSpec,
    pub basis: SectorBasis,
    pub hamiltonian: HamiltonianMatrix,
    pub propagator: Propagator,
    pub initial: WalkState,
}

impl SectorWalk {
    /// Walk in the one- or two-magnon sector selected by `spec.particles`.
    pub fn new(spec: &ChainSpec) -> Result<Self> {
        let basis = SectorBasis::for_particles(spec.particles, spec.sites)?;
        Self::in_basis(spec, basis)
    }

    pub fn in_basis(spec: &ChainSpec, basis: SectorBasis) -> Result<Self> {
        spec.validate()?;
        let hamiltonian = build_sector_hamiltonian(spec, &basis)?;
        let propagator = Propagator::with_reflection(&hamiltonian);
        let initial = initial_state(spec, Space::Sector(basis))?;
        Ok(Self {
            spec: *spec,
            basis,
            hamiltonian,
            propagator,
            initial,
        })
    }

    pub fn state_at(&self, t: f64) -> Result<WalkState> {
        evolve(&self.propagator, &self.initial, t)
    }

    pub fn states_at(&self, times: &[f64]) -> Result<Vec<WalkState>> {
        times.par_iter().map(|&t| self.state_at(t)).collect()
    }
}

/// Exact `M2` from the full Pauli spectrum of the sector-evolved state.
pub fn exact_magic_series(spec: &ChainSpec, times: &[f64]) -> Result<MagicSeries> {
    let walk = SectorWalk::new(spec)?;
    let values = times
        .par_iter()
        .map(|&t| {
            let state = walk.state_at(t)?;
            Ok(m2_from_spectrum(&pauli_spectrum_full(&state)?))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(MagicSeries::new(times.to_vec(), values, Estimator::Spectrum).with_spec(*spec))
}

/// Route used for the single-particle magic curve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SingleParticleMethod {
    /// Infinite-chain Bessel sum over `l_sum + 1` sites.
    Bessel,
    /// Sector exact diagonalization and the coefficient formula.
    Ed,
    /// Large-time closed form.
    Asymptotic,
    /// Full Pauli spectrum of the sector-evolved state.
    Spectrum,
}

impl SingleParticleMethod {
    pub fn estimator(self) -> Estimator {
        match self {
            SingleParticleMethod::Bessel => Estimator::Bessel,
            SingleParticleMethod::Ed => Estimator::Coeff,
            SingleParticleMethod::Asymptotic => Estimator::Asymptotic,
            SingleParticleMethod::Spectrum => Estimator::Spectrum,
        }
    }
}

/// Single-walker `M2` on `times`. The asymptotic route skips times with
/// `vt <= 1`, where it is undefined.
pub fn single_particle_series(
    spec: &ChainSpec,
    times: &[f64],
    method: SingleParticleMethod,
    l_sum: usize,
) -> Result<MagicSeries> {
    let spec = spec.with_particles(1);
    let v = spec.coupling;
    let (times, values) = match method {
        SingleParticleMethod::Bessel => {
            let values = times
                .par_iter()
                .map(|&t| m2_bessel(t, v, l_sum))
                .collect::<Result<Vec<_>>>()?;
            (times.to_vec(), values)
        }
        SingleParticleMethod::Asymptotic => {
            let kept: Vec<f64> = times.iter().copied().filter(|t| v * t > 1.0).collect();
            if kept.is_empty() {
                return Err(Error::Domain("asymptotic M2 needs some time with vt > 1".into()));
            }
            let values = kept
                .iter()
                .map(|&t| m2_asymptotic(t, v))
                .collect::<Result<Vec<_>>>()?;
            (kept, values)
        }
        SingleParticleMethod::Ed => {
            let walk = SectorWalk::new(&spec)?;
            let values = times
                .par_iter()
                .map(|&t| m2_coeff(&walk.state_at(t)?.amplitudes))
                .collect::<Result<Vec<_>>>()?;
            (times.to_vec(), values)
        }
        SingleParticleMethod::Spectrum => return exact_magic_series(&spec, times),
    };
    Ok(MagicSeries::new(times, values, method.estimator()).with_spec(spec))
}

/// `<Z_j>(t)` for every requested time.
pub fn magnetization_series(spec: &ChainSpec, times: &[f64]) -> Result<Vec<Vec<f64>>> {
    let walk = SectorWalk::new(spec)?;
    times
        .par_iter()
        .map(|&t| walk.state_at(t).map(|s| magnetization_profile(&s)))
        .collect()
}

/// Spacing-ratio statistics of one spectrum snapshot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotSummary {
    pub time: f64,
    pub nonzero: usize,
    pub distinct: usize,
    pub mean_ratio: f64,
    pub m2: f64,
    pub purity_sum: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliStatistics {
    pub snapshots: Vec<SnapshotSummary>,
    pub pooled: PooledRatios,
}

/// Pools the nonzero-spectrum spacing ratios of the walk at `times`.
pub fn pauli_ratio_statistics(spec: &ChainSpec, times: &[f64], bins: usize) -> Result<PauliStatistics> {
    let walk = SectorWalk::new(spec)?;
    let per_snapshot = times
        .par_iter()
        .map(|&t| {
            let spectrum = pauli_spectrum_full(&walk.state_at(t)?)?;
            let filtered = spectrum.filtered(ZERO_THRESHOLD);
            let stats = spacing_ratios(&filtered.values())?;
            let summary = SnapshotSummary {
                time: t,
                nonzero: filtered.entries.len(),
                distinct: stats.values.len(),
                mean_ratio: stats.mean_ratio,
                m2: m2_from_spectrum(&spectrum),
                purity_sum: spectrum.purity_sum(),
            };
            Ok((summary, stats))
        })
        .collect::<Result<Vec<_>>>()?;
    let pooled = pool_ratios(per_snapshot.iter().map(|(_, s)| s), bins)?;
    Ok(PauliStatistics {
        snapshots: per_snapshot.into_iter().map(|(s, _)| s).collect(),
        pooled,
    })
}

/// Value counts of the initial-state Pauli spectrum.
pub fn initial_spectrum_counts(spec: &ChainSpec) -> Result<SpectrumCounts> {
    let state = initial_state(spec, Space::full(spec.sites)?)?;
    Ok(pauli_spectrum_full(&state)?.counts(1e-12))
}
