//! Exact time evolution of walk states and local observables.

mod bessel;
mod propagator;

pub use bessel::{bessel_j_array, start_order};
pub use propagator::Propagator;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{FlippedSites, HamiltonianMatrix, Space, MAX_FULL_SITES};

/// Tail mass `Σ_{|k| > L/2 - 2} J_k(vt)^2` above which the infinite-chain
/// Bessel amplitudes no longer describe the open chain.
///
/// Edge reflections change amplitudes by roughly `sqrt(tail) / 10`, so this
/// keeps the Bessel and exact amplitudes within `1e-8` while the flag is clear.
pub const BOUNDARY_TAIL_LIMIT: f64 = 1e-15;

/// Amplitudes of a walk state in a sector or in the full space.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkState {
    pub space: Space,
    pub amplitudes: Vec<Complex64>,
    pub time: f64,
}

impl WalkState {
    pub fn basis_vector(space: Space, index: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); space.dim()];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Self {
            space,
            amplitudes,
            time: 0.0,
        }
    }

    pub fn sites(&self) -> usize {
        self.space.sites()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Full-space bit mask and amplitude of every nonzero component.
    pub fn components(&self) -> Vec<(usize, Complex64)> {
        let mask = |i: usize| match self.space {
            Space::Full { .. } => i,
            Space::Sector(b) => b.flipped_sites(i).mask(),
        };
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm_sqr() != 0.0)
            .map(|(i, a)| (mask(i), *a))
            .collect()
    }

    /// Embeds a sector state into the full `2^L` space.
    pub fn to_full(&self) -> Result<WalkState> {
        let space = Space::full(self.sites())?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); space.dim()];
        for (mask, a) in self.components() {
            amplitudes[mask] = a;
        }
        Ok(WalkState {
            space,
            amplitudes,
            time: self.time,
        })
    }
}

/// Single-particle walk from the Bessel closed form.
#[derive(Clone, Debug)]
pub struct BesselWalk {
    pub state: WalkState,
    /// `Σ_{|k| > L/2 - 2} J_k(vt)^2`.
    pub tail_mass: f64,
}

impl BesselWalk {
    /// True when the state may already feel the chain edges.
    pub fn boundary_flag(&self) -> bool {
        self.tail_mass > BOUNDARY_TAIL_LIMIT
    }
}

/// Infinite-chain amplitudes `ψ_k = i^{|k|} J_{|k|}(v t)` around the center
/// of an `L`-site chain, `k` the offset from site `L/2`.
///
/// These solve `i dψ/dt = H ψ` for the hop `-v/2` of the XX chain.
pub fn single_particle_amplitudes(t: f64, sites: usize, velocity: f64) -> Result<BesselWalk> {
    if !(t >= 0.0) || !velocity.is_finite() || velocity < 0.0 {
        return Err(Error::Domain(format!(
            "need t >= 0 and velocity >= 0, got t = {t}, v = {velocity}"
        )));
    }
    let basis = crate::model::SectorBasis::single_magnon(sites)?;
    let z = velocity * t;
    let c = sites / 2;
    let reach = c.max(sites - 1 - c);
    let j = bessel_j_array(reach.max(start_order(z)), z)?;
    let amplitudes = (0..sites)
        .map(|site| {
            let k = site.abs_diff(c);
            let phase = match k % 4 {
                0 => Complex64::new(1.0, 0.0),
                1 => Complex64::new(0.0, 1.0),
                2 => Complex64::new(-1.0, 0.0),
                _ => Complex64::new(0.0, -1.0),
            };
            phase * j[k]
        })
        .collect();
    let edge = (sites / 2).saturating_sub(2);
    let tail_mass = 2.0 * j.iter().skip(edge + 1).map(|x| x * x).sum::<f64>();
    Ok(BesselWalk {
        state: WalkState {
            space: Space::Sector(basis),
            amplitudes,
            time: t,
        },
        tail_mass,
    })
}

/// Evolves `psi0` by `t`: `V e^{-iEt} V^T psi0`.
pub fn evolve(prop: &Propagator, psi0: &WalkState, t: f64) -> Result<WalkState> {
    if prop.space() != psi0.space {
        return Err(Error::InvalidBasis(format!(
            "state lives in {:?}, propagator in {:?}",
            psi0.space,
            prop.space()
        )));
    }
    if t == 0.0 {
        return Ok(psi0.clone());
    }
    Ok(WalkState {
        space: psi0.space,
        amplitudes: prop.apply(&psi0.amplitudes, t)?,
        time: psi0.time + t,
    })
}

/// `<ψ|H|ψ>`.
pub fn energy(h: &HamiltonianMatrix, state: &WalkState) -> Result<f64> {
    if h.space() != state.space {
        return Err(Error::InvalidBasis("state and Hamiltonian spaces differ".into()));
    }
    let hpsi = h.apply(&state.amplitudes);
    Ok(state
        .amplitudes
        .iter()
        .zip(&hpsi)
        .map(|(a, b)| (a.conj() * b).re)
        .sum())
}

/// `<Z_j>` for every site; an unflipped site contributes `+1`.
pub fn magnetization_profile(state: &WalkState) -> Vec<f64> {
    let l = state.sites();
    let mut flipped = vec![0.0; l];
    match state.space {
        Space::Full { .. } => {
            debug_assert!(l <= MAX_FULL_SITES);
            for (mask, a) in state.amplitudes.iter().enumerate() {
                let p = a.norm_sqr();
                if p == 0.0 {
                    continue;
                }
                for (j, f) in flipped.iter_mut().enumerate() {
                    if mask >> j & 1 == 1 {
                        *f += p;
                    }
                }
            }
        }
        Space::Sector(basis) => {
            for (i, a) in state.amplitudes.iter().enumerate() {
                let p = a.norm_sqr();
                match basis.flipped_sites(i) {
                    FlippedSites::One(j) => flipped[j] += p,
                    FlippedSites::Two(j, k) => {
                        flipped[j] += p;
                        flipped[k] += p;
                    }
                }
            }
        }
    }
    flipped.into_iter().map(|n| 1.0 - 2.0 * n).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        build_full_hamiltonian, build_sector_hamiltonian, initial_state, ChainSpec, SectorBasis,
    };

    fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn bessel_amplitudes_at_unit_time() {
        let walk = single_particle_amplitudes(1.0, 8, 1.0).unwrap();
        let a = walk.state.amplitudes[5];
        assert!(a.re.abs() < 1e-16);
        assert!((a.im - 0.440_050_585_7).abs() < 1e-10);
        for k in 1..4 {
            assert_eq!(
                walk.state.amplitudes[4 + k].norm(),
                walk.state.amplitudes[4 - k].norm()
            );
        }
        let start = single_particle_amplitudes(0.0, 8, 1.0).unwrap();
        assert_eq!(start.state.amplitudes[4], Complex64::new(1.0, 0.0));
        assert_eq!(start.tail_mass, 0.0);
    }

    #[test]
    fn evolve_at_zero_time_is_identity() {
        let spec = ChainSpec::xxz(7, 0.5);
        let basis = SectorBasis::two_magnon(7).unwrap();
        let h = build_sector_hamiltonian(&spec, &basis).unwrap();
        let prop = Propagator::with_reflection(&h);
        let psi0 = initial_state(&spec, Space::Sector(basis)).unwrap();
        let psi = evolve(&prop, &psi0, 0.0).unwrap();
        assert!(max_diff(&psi.amplitudes, &psi0.amplitudes) < 1e-13);
    }

    #[test]
    fn bessel_matches_sector_ed() {
        let spec = ChainSpec::xx(200);
        let basis = SectorBasis::single_magnon(200).unwrap();
        let h = build_sector_hamiltonian(&spec, &basis).unwrap();
        let prop = Propagator::new(&h);
        let psi0 = initial_state(&spec, Space::Sector(basis)).unwrap();
        let psi = evolve(&prop, &psi0, 40.0).unwrap();
        let walk = single_particle_amplitudes(40.0, 200, 1.0).unwrap();
        assert!(!walk.boundary_flag());
        assert!(max_diff(&psi.amplitudes, &walk.state.amplitudes) < 1e-8);
    }

    #[test]
    fn reflection_blocks_agree_with_single_block() {
        let spec = ChainSpec::xxz(9, 1.3).with_nnn(0.4);
        let basis = SectorBasis::two_magnon(9).unwrap();
        let h = build_sector_hamiltonian(&spec, &basis).unwrap();
        let plain = Propagator::new(&h);
        let split = Propagator::with_reflection(&h);
        assert_eq!(split.block_dims().iter().sum::<usize>(), basis.dim());
        assert_eq!(split.block_dims().len(), 2);
        // An asymmetric start populates both blocks.
        let mut psi0 = WalkState::basis_vector(Space::Sector(basis), 3);
        psi0.amplitudes[10] = Complex64::new(0.0, 1.0);
        psi0.amplitudes.iter_mut().for_each(|a| *a /= 2f64.sqrt());
        for t in [0.3, 2.0, 17.5] {
            let a = evolve(&plain, &psi0, t).unwrap();
            let b = evolve(&split, &psi0, t).unwrap();
            assert!(max_diff(&a.amplitudes, &b.amplitudes) < 1e-12);
        }
        let ea = plain.eigenvalues().unwrap();
        let eb = split.eigenvalues().unwrap();
        assert!(ea.iter().zip(&eb).all(|(x, y)| (x - y).abs() < 1e-12));
    }

    #[test]
    fn decomposition_is_orthogonal_and_reconstructs() {
        let spec = ChainSpec::xxz(12, 2.0);
        let basis = SectorBasis::two_magnon(12).unwrap();
        let h = build_sector_hamiltonian(&spec, &basis).unwrap();
        for prop in [Propagator::new(&h), Propagator::with_reflection(&h)] {
            let (ortho, recon) = prop.decomposition_error(&h).unwrap();
            assert!(ortho < 1e-10, "{ortho}");
            assert!(recon < 1e-8, "{recon}");
        }
    }

    #[test]
    fn unitarity_energy_and_time_reversal() {
        let spec = ChainSpec::xxz(10, 0.8).with_nnn(0.3);
        let basis = SectorBasis::two_magnon(10).unwrap();
        let h = build_sector_hamiltonian(&spec, &basis).unwrap();
        let prop = Propagator::with_reflection(&h);
        let mut psi0 = initial_state(&spec, Space::Sector(basis)).unwrap();
        // Break the mirror symmetry so both blocks take part.
        psi0.amplitudes[0] = Complex64::new(0.6, 0.0);
        psi0.amplitudes[basis.index_of(crate::model::BasisState::Pair(4, 5)).unwrap()] =
            Complex64::new(0.0, 0.8);
        let e0 = energy(&h, &psi0).unwrap();
        for t in [0.1, 3.7, 55.0, 1e3, 1e5] {
            let psi = evolve(&prop, &psi0, t).unwrap();
            assert!((psi.norm_sqr() - 1.0).abs() < 1e-10, "t={t}");
            assert!((energy(&h, &psi).unwrap() - e0).abs() < 1e-8, "t={t}");
            let back = evolve(&prop, &psi, -t).unwrap();
            assert!(max_diff(&back.amplitudes, &psi0.amplitudes) < 1e-9, "t={t}");
        }
    }

    #[test]
    fn magnetization_of_initial_pair() {
        let spec = ChainSpec::xxz(8, 1.0);
        let psi = initial_state(&spec, Space::Sector(SectorBasis::two_magnon(8).unwrap())).unwrap();
        assert_eq!(
            magnetization_profile(&psi),
            vec![1.0, 1.0, 1.0, -1.0, -1.0, 1.0, 1.0, 1.0]
        );
    }

    #[test]
    fn sector_magnetization_matches_full_space() {
        let spec = ChainSpec::xxz(6, 0.5);
        let basis = SectorBasis::two_magnon(6).unwrap();
        let hs = build_sector_hamiltonian(&spec, &basis).unwrap();
        let hf = build_full_hamiltonian(&spec).unwrap();
        let sector = evolve(
            &Propagator::new(&hs),
            &initial_state(&spec, Space::Sector(basis)).unwrap(),
            1.0,
        )
        .unwrap();
        let full = evolve(
            &Propagator::new(&hf),
            &initial_state(&spec, Space::full(6).unwrap()).unwrap(),
            1.0,
        )
        .unwrap();
        let zs = magnetization_profile(&sector);
        let zf = magnetization_profile(&full);
        for (a, b) in zs.iter().zip(&zf) {
            assert!((a - b).abs() < 1e-10);
        }
        let flips: f64 = zs.iter().map(|z| (1.0 - z) / 2.0).sum();
        assert!((flips - 2.0).abs() < 1e-10);
        assert!(max_diff(&sector.to_full().unwrap().amplitudes, &full.amplitudes) < 1e-10);
    }

    #[test]
    fn evolve_rejects_foreign_state() {
        let spec = ChainSpec::xx(6);
        let h = build_sector_hamiltonian(&spec, &SectorBasis::single_magnon(6).unwrap()).unwrap();
        let prop = Propagator::new(&h);
        let psi = initial_state(&spec, Space::full(6).unwrap()).unwrap();
        assert!(matches!(evolve(&prop, &psi, 1.0), Err(Error::InvalidBasis(_))));
    }
}
