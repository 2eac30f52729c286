//! Effective dynamics of a bound pair of adjacent flips at large anisotropy.
//!
//! A doublon hops between the `L - 1` bonds of the chain with
//! `J_eff = J / (2Δ)`, so it spreads like a single walker with velocity
//! `J_eff` and its magic follows the single-particle formulas.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{evolve, Propagator};
use crate::error::{Error, Result};
use crate::magic::{m2_coeff, Estimator, MagicSeries};
use crate::model::{build_doublon_hamiltonian_with_field, build_sector_hamiltonian, initial_state};
use crate::model::{ChainSpec, HamiltonianMatrix, SectorBasis, Space};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoublonParams {
    /// Effective hopping `J / (2Δ)`.
    pub j_eff: f64,
    /// Effective field `(ΔJ + J_eff) / 2`.
    pub h_eff: f64,
    /// Light-cone velocity of the doublon, equal to `j_eff`.
    pub v_doublon: f64,
}

pub fn doublon_params(coupling: f64, anisotropy: f64) -> Result<DoublonParams> {
    if !(anisotropy > 0.0) || !anisotropy.is_finite() {
        return Err(Error::Domain(format!(
            "doublon parameters need delta > 0, got {anisotropy}"
        )));
    }
    let j_eff = coupling / (2.0 * anisotropy);
    Ok(DoublonParams {
        j_eff,
        h_eff: (anisotropy * coupling + j_eff) / 2.0,
        v_doublon: j_eff,
    })
}

/// Time after which the doublon front reaches the end of the bond chain.
pub fn pre_boundary_time(spec: &ChainSpec) -> Result<f64> {
    let p = doublon_params(spec.coupling, spec.anisotropy)?;
    Ok((spec.sites as f64 - 1.0) / (2.0 * p.v_doublon))
}

/// Last third of `[0, pre_boundary_time]`.
pub fn default_late_window(spec: &ChainSpec) -> Result<(f64, f64)> {
    let end = pre_boundary_time(spec)?;
    Ok((2.0 * end / 3.0, end))
}

fn series_for(spec: &ChainSpec, h: &HamiltonianMatrix, times: &[f64]) -> Result<MagicSeries> {
    let basis = SectorBasis::doublon(spec.sites)?;
    let psi0 = initial_state(spec, Space::Sector(basis))?;
    let prop = Propagator::with_reflection(h);
    let values = times
        .par_iter()
        .map(|&t| evolve(&prop, &psi0, t).and_then(|psi| m2_coeff(&psi.amplitudes)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(MagicSeries::new(times.to_vec(), values, Estimator::Coeff).with_spec(*spec))
}

/// Magic of the doublon amplitudes on the `L - 1` bond chain, computed with
/// the single-particle coefficient formula.
pub fn doublon_magic_series(spec: &ChainSpec, times: &[f64]) -> Result<MagicSeries> {
    let basis = SectorBasis::doublon(spec.sites)?;
    let h = build_sector_hamiltonian(spec, &basis)?;
    series_for(spec, &h, times)
}

/// Same as [`doublon_magic_series`] but keeping the effective field term.
pub fn doublon_magic_series_with_field(spec: &ChainSpec, times: &[f64]) -> Result<MagicSeries> {
    let h = build_doublon_hamiltonian_with_field(spec)?;
    series_for(spec, &h, times)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftFit {
    /// Mean of `total - doublon` over the window.
    pub shift: f64,
    /// `max |total - doublon - shift|` over the window.
    pub residual: f64,
    pub window: (f64, f64),
    pub samples: usize,
}

/// Constant offset between the total and doublon magic over a time window.
pub fn shift_fit(total: &MagicSeries, doublon: &MagicSeries, window: (f64, f64)) -> Result<ShiftFit> {
    let (lo, hi) = window;
    let mut diffs = Vec::new();
    for (t, m) in total.window(lo, hi) {
        let Some(i) = doublon.times.iter().position(|&s| (s - t).abs() <= 1e-9 * t.abs().max(1.0)) else {
            return Err(Error::Grid(format!("doublon series has no sample at t = {t}")));
        };
        diffs.push(m - doublon.values[i]);
    }
    if diffs.is_empty() {
        return Err(Error::EmptyWindow(lo, hi));
    }
    let shift = diffs.iter().sum::<f64>() / diffs.len() as f64;
    let residual = diffs.iter().map(|d| (d - shift).abs()).fold(0.0, f64::max);
    Ok(ShiftFit {
        shift,
        residual,
        window,
        samples: diffs.len(),
    })
}
