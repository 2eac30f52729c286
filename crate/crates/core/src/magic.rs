//! Stabilizer Rényi entropy `M2` by several independent routes.
//!
//! * [`pauli_spectrum_full`] + [`m2_from_spectrum`]: any state, `L <= 12`.
//! * [`m2_coeff`]: closed form for single-excitation amplitudes, `O(L)`.
//! * [`m2_bruteforce`]: literal four-index contraction, `O(L^4)`, the oracle
//!   for [`m2_coeff`].
//! * [`m2_bessel`] and [`m2_asymptotic`]: infinite-chain walk.
//!
//! `M2 = -log2(2^{-L} Σ_P c_P^4)`, which vanishes on stabilizer states.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{bessel_j_array, start_order, WalkState};
use crate::error::{Error, Result};
use crate::model::ChainSpec;

/// Largest chain for the full Pauli spectrum (a `4^L` complex buffer).
pub const MAX_SPECTRUM_SITES: usize = 12;
/// Largest chain for the quartic brute-force contraction.
pub const MAX_BRUTEFORCE_SITES: usize = 24;
/// Coefficients with `|c_P|` at or below this are treated as zero.
pub const ZERO_THRESHOLD: f64 = 1e-10;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// All `4^L` Pauli expectation values `c_P = <ψ|P|ψ>`.
///
/// The string index is base 4, little-endian in the site (site 0 is the
/// least significant digit), with `I = 0, X = 1, Y = 2, Z = 3`.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSpectrum {
    sites: usize,
    coefficients: Vec<f64>,
}

/// Nonzero part of a [`PauliSpectrum`]: `(string index, c_P)` pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct FilteredSpectrum {
    pub sites: usize,
    pub entries: Vec<(u64, f64)>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectrumCounts {
    pub plus_one: usize,
    pub minus_one: usize,
    pub zero: usize,
    pub other: usize,
}

impl PauliSpectrum {
    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn coefficient(&self, string: &str) -> Option<f64> {
        pauli_index(string).map(|i| self.coefficients[i as usize])
    }

    /// `Σ_P c_P^2`, equal to `2^L` for a pure state.
    pub fn purity_sum(&self) -> f64 {
        self.coefficients.iter().map(|c| c * c).sum()
    }

    pub fn filtered(&self, threshold: f64) -> FilteredSpectrum {
        FilteredSpectrum {
            sites: self.sites,
            entries: self
                .coefficients
                .iter()
                .enumerate()
                .filter(|(_, c)| c.abs() > threshold)
                .map(|(i, c)| (i as u64, *c))
                .collect(),
        }
    }

    /// Classifies coefficients as `+1`, `-1`, `0` or anything else.
    pub fn counts(&self, tol: f64) -> SpectrumCounts {
        let mut counts = SpectrumCounts::default();
        for &c in &self.coefficients {
            if (c - 1.0).abs() <= tol {
                counts.plus_one += 1;
            } else if (c + 1.0).abs() <= tol {
                counts.minus_one += 1;
            } else if c.abs() <= tol {
                counts.zero += 1;
            } else {
                counts.other += 1;
            }
        }
        counts
    }
}

impl FilteredSpectrum {
    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|(_, c)| *c).collect()
    }

    /// One `index coefficient` line per entry, coefficients with 17
    /// significant digits.
    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# sites {}", self.sites)?;
        let mut line = String::new();
        for (index, c) in &self.entries {
            line.clear();
            let _ = write!(line, "{index} {c:.16e}");
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(input: R) -> Result<Self> {
        let mut sites = None;
        let mut entries = Vec::new();
        for (n, line) in input.lines().enumerate() {
            let line = line.map_err(|e| Error::InsufficientData(e.to_string()))?;
            let line = line.trim();
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(s) = rest.trim().strip_prefix("sites") {
                    sites = s.trim().parse().ok();
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let bad = || Error::InsufficientData(format!("malformed spectrum line {}", n + 1));
            let mut cols = line.split_whitespace();
            let index = cols.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            let value = cols.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            entries.push((index, value));
        }
        Ok(Self {
            sites: sites.unwrap_or(0),
            entries,
        })
    }
}

/// Base-4 index of a Pauli string written site 0 first, e.g. `"ZI"`.
pub fn pauli_index(string: &str) -> Option<u64> {
    string.chars().rev().try_fold(0u64, |acc, ch| {
        let digit = match ch {
            'I' => 0,
            'X' => 1,
            'Y' => 2,
            'Z' => 3,
            _ => return None,
        };
        Some(acc * 4 + digit)
    })
}

pub fn pauli_label(mut index: u64, sites: usize) -> String {
    (0..sites)
        .map(|_| {
            let ch = ['I', 'X', 'Y', 'Z'][(index % 4) as usize];
            index /= 4;
            ch
        })
        .collect()
}

/// Spreads bit `j` of `x` to bit `2j`.
fn spread_bits(x: usize) -> usize {
    let mut out = 0;
    let mut rest = x;
    let mut j = 0;
    while rest != 0 {
        out |= (rest & 1) << (2 * j);
        rest >>= 1;
        j += 1;
    }
    out
}

/// Every Pauli expectation value of a pure state.
///
/// Builds `ρ = |ψ><ψ|` with site `j` occupying the base-4 digit
/// `2 a_j + b_j` of `|a><b|`, then maps each digit in place from
/// `(ρ00, ρ01, ρ10, ρ11)` to `(Tr ρ, Tr Xρ, Tr Yρ, Tr Zρ)`. Cost `O(L 4^L)`.
pub fn pauli_spectrum_full(state: &WalkState) -> Result<PauliSpectrum> {
    let l = state.sites();
    if l > MAX_SPECTRUM_SITES {
        return Err(Error::ResourceLimit(format!(
            "full Pauli spectrum is limited to L <= {MAX_SPECTRUM_SITES}, got {l}"
        )));
    }
    let n = 1usize << (2 * l);
    let mut rho = vec![Complex64::new(0.0, 0.0); n];
    let comps: Vec<(usize, Complex64)> = state
        .components()
        .into_iter()
        .map(|(mask, a)| (spread_bits(mask), a))
        .collect();
    for &(ka, a) in &comps {
        for &(kb, b) in &comps {
            rho[(ka << 1) | kb] = a * b.conj();
        }
    }
    let i = Complex64::new(0.0, 1.0);
    let mut stride = 1;
    for _ in 0..l {
        for block in (0..n).step_by(4 * stride) {
            for o in block..block + stride {
                let r00 = rho[o];
                let r01 = rho[o + stride];
                let r10 = rho[o + 2 * stride];
                let r11 = rho[o + 3 * stride];
                rho[o] = r00 + r11;
                rho[o + stride] = r01 + r10;
                rho[o + 2 * stride] = i * (r01 - r10);
                rho[o + 3 * stride] = r00 - r11;
            }
        }
        stride *= 4;
    }
    let worst_imag = rho.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    if worst_imag > ZERO_THRESHOLD {
        return Err(Error::Numerical(format!(
            "Pauli coefficient with imaginary part {worst_imag:e}"
        )));
    }
    Ok(PauliSpectrum {
        sites: l,
        coefficients: rho.into_iter().map(|c| c.re).collect(),
    })
}

pub fn m2_from_spectrum(spectrum: &PauliSpectrum) -> f64 {
    let s4: f64 = spectrum.coefficients.iter().map(|c| (c * c) * (c * c)).sum();
    -(s4 / (1u64 << spectrum.sites) as f64).log2()
}

fn check_normalized(psi: &[Complex64]) -> Result<()> {
    let norm: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
    if (norm - 1.0).abs() > 1e-6 {
        return Err(Error::Normalization(norm));
    }
    Ok(())
}

/// `M2` of a single-excitation state `Σ_j ψ_j |j>`:
/// `2^{-M2} = Σ_j [-6|ψ_j|^8 + Σ_k (6|ψ_j|^4|ψ_k|^4 + ψ_j^4 ψ_k^{*4})]`.
pub fn m2_coeff(psi: &[Complex64]) -> Result<f64> {
    check_normalized(psi)?;
    let mut s4 = 0.0;
    let mut s8 = 0.0;
    let mut q = Complex64::new(0.0, 0.0);
    for a in psi {
        let p2 = a.norm_sqr();
        s4 += p2 * p2;
        s8 += p2 * p2 * p2 * p2;
        let a2 = a * a;
        q += a2 * a2;
    }
    Ok(-(-6.0 * s8 + 6.0 * s4 * s4 + q.norm_sqr()).log2())
}

/// `M2` of a single-excitation state by the explicit sum over four site
/// indices of `ψ_j ψ_k ψ_l ψ*_m ψ_[jkl] ψ*_[jkm] ψ*_[jlm] ψ*_[klm]`.
pub fn m2_bruteforce(psi: &[Complex64]) -> Result<f64> {
    let l = psi.len();
    if l > MAX_BRUTEFORCE_SITES {
        return Err(Error::ResourceLimit(format!(
            "brute-force M2 is limited to L <= {MAX_BRUTEFORCE_SITES}, got {l}"
        )));
    }
    check_normalized(psi)?;
    let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    let bracket = |j: usize, k: usize, m: usize| -> Complex64 {
        psi[j] * delta(k, m) + psi[k] * delta(j, m) + psi[m] * delta(j, k)
            - psi[j] * (2.0 * delta(j, k) * delta(j, m))
    };
    let mut total = Complex64::new(0.0, 0.0);
    for j in 0..l {
        for k in 0..l {
            for m3 in 0..l {
                let head = psi[j] * psi[k] * psi[m3] * bracket(j, k, m3);
                if head == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for m4 in 0..l {
                    total += head
                        * psi[m4].conj()
                        * bracket(j, k, m4).conj()
                        * bracket(j, m3, m4).conj()
                        * bracket(k, m3, m4).conj();
                }
            }
        }
    }
    if total.im.abs() > 1e-10 {
        return Err(Error::Numerical(format!(
            "brute-force sum has imaginary part {:e}",
            total.im
        )));
    }
    Ok(-total.re.log2())
}

/// `M2 = -log2 Σ_{j,k} (7 - 6 δ_jk) J_j(vt)^4 J_k(vt)^4` over
/// `j, k ∈ [-L_sum/2, L_sum/2]`.
pub fn m2_bessel(t: f64, velocity: f64, l_sum: usize) -> Result<f64> {
    if !(t >= 0.0) || !(velocity >= 0.0) {
        return Err(Error::Domain(format!("need t >= 0 and v >= 0, got t = {t}, v = {velocity}")));
    }
    let z = velocity * t;
    let half = l_sum / 2;
    let j = bessel_j_array(half.max(start_order(z)), z)?;
    let tail = 2.0 * j.iter().skip(half + 1).map(|x| x * x).sum::<f64>();
    if tail >= 1e-12 {
        return Err(Error::Truncation { tail, limit: 1e-12 });
    }
    let mut s4 = 0.0;
    let mut s8 = 0.0;
    for (k, &v) in j.iter().take(half + 1).enumerate() {
        let weight = if k == 0 { 1.0 } else { 2.0 };
        let v4 = (v * v) * (v * v);
        s4 += weight * v4;
        s8 += weight * v4 * v4;
    }
    Ok(-(7.0 * s4 * s4 - 6.0 * s8).log2())
}

/// Large-`vt` form
/// `M2 ≈ -log2[7 / (π^4 (vt)^2) (ln(vt) + 5 ln 2 + γ)^2]`.
pub fn m2_asymptotic(t: f64, velocity: f64) -> Result<f64> {
    let z = velocity * t;
    if !(z > 1.0) {
        return Err(Error::Domain(format!("asymptotic M2 needs vt > 1, got {z}")));
    }
    let log_term = z.ln() + 5.0 * std::f64::consts::LN_2 + EULER_GAMMA;
    let pi4 = std::f64::consts::PI.powi(4);
    Ok(-(7.0 / (pi4 * z * z) * log_term * log_term).log2())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    Spectrum,
    Coeff,
    Bessel,
    Asymptotic,
}

impl Estimator {
    pub fn name(&self) -> &'static str {
        match self {
            Estimator::Spectrum => "spectrum",
            Estimator::Coeff => "coeff",
            Estimator::Bessel => "bessel",
            Estimator::Asymptotic => "asymptotic",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeriesKind {
    Instantaneous,
    /// `<M2(t)>_c = (1/t) ∫_0^t M2`.
    Cumulative,
}

/// `M2` on a time grid, in bits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MagicSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub estimator: Estimator,
    pub kind: SeriesKind,
    pub spec: Option<ChainSpec>,
}

impl MagicSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>, estimator: Estimator) -> Self {
        assert_eq!(times.len(), values.len(), "one value per time");
        Self {
            times,
            values,
            estimator,
            kind: SeriesKind::Instantaneous,
            spec: None,
        }
    }

    pub fn with_spec(mut self, spec: ChainSpec) -> Self {
        self.spec = Some(spec);
        self
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `(t, M2)` pairs with `t` inside `[lo, hi]`.
    pub fn window(&self, lo: f64, hi: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times
            .iter()
            .zip(&self.values)
            .filter(move |(t, _)| **t >= lo && **t <= hi)
            .map(|(t, v)| (*t, *v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{SectorBasis, Space};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn full_state(amplitudes: Vec<Complex64>) -> WalkState {
        let sites = amplitudes.len().trailing_zeros() as usize;
        WalkState {
            space: Space::full(sites).unwrap(),
            amplitudes,
            time: 0.0,
        }
    }

    fn single_particle(psi: &[Complex64]) -> WalkState {
        WalkState {
            space: Space::Sector(SectorBasis::single_magnon(psi.len()).unwrap()),
            amplitudes: psi.to_vec(),
            time: 0.0,
        }
    }

    #[test]
    fn plus_state_spectrum() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let spec = pauli_spectrum_full(&full_state(vec![c(s, 0.0), c(s, 0.0)])).unwrap();
        let want = [1.0, 1.0, 0.0, 0.0];
        for (got, want) in spec.coefficients().iter().zip(want) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn t_state_magic() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let phase = Complex64::from_polar(s, std::f64::consts::FRAC_PI_4);
        let spec = pauli_spectrum_full(&full_state(vec![c(s, 0.0), phase])).unwrap();
        let want = [1.0, s, s, 0.0];
        for (got, want) in spec.coefficients().iter().zip(want) {
            assert!((got - want).abs() < 1e-15);
        }
        // c^4 sum = 1 + 1/4 + 1/4 = 3/2, normalized by 2.
        let m2 = m2_from_spectrum(&spec);
        assert!((m2 + (0.75f64).log2()).abs() < 1e-14);
        assert!((m2 - 0.415_037_499_278_843_8).abs() < 1e-12);
    }

    #[test]
    fn flipped_site_spectrum() {
        // |10>: site 0 flipped, bit 0 of the basis index.
        let mut amps = vec![c(0.0, 0.0); 4];
        amps[0b01] = c(1.0, 0.0);
        let spec = pauli_spectrum_full(&full_state(amps)).unwrap();
        assert_eq!(spec.coefficient("II"), Some(1.0));
        assert_eq!(spec.coefficient("IZ"), Some(1.0));
        assert_eq!(spec.coefficient("ZI"), Some(-1.0));
        assert_eq!(spec.coefficient("ZZ"), Some(-1.0));
        let counts = spec.counts(1e-12);
        assert_eq!(
            counts,
            SpectrumCounts { plus_one: 2, minus_one: 2, zero: 12, other: 0 }
        );
        assert_eq!(m2_from_spectrum(&spec), 0.0);
    }

    #[test]
    fn pauli_labels_round_trip() {
        for i in 0..256u64 {
            assert_eq!(pauli_index(&pauli_label(i, 4)), Some(i));
        }
        assert_eq!(pauli_index("ZI"), Some(3));
        assert_eq!(pauli_index("IZ"), Some(12));
        assert_eq!(pauli_index("IQ"), None);
    }

    #[test]
    fn delta_state_has_no_magic() {
        let mut psi = vec![c(0.0, 0.0); 9];
        psi[4] = c(1.0, 0.0);
        assert_eq!(m2_coeff(&psi).unwrap(), 0.0);
        assert_eq!(m2_bruteforce(&psi).unwrap(), 0.0);
        let spec = pauli_spectrum_full(&single_particle(&psi)).unwrap();
        assert!(m2_from_spectrum(&spec).abs() < 1e-12);
    }

    #[test]
    fn two_site_real_state() {
        let psi = [c(3f64.sqrt() / 2.0, 0.0), c(0.5, 0.0)];
        let expected = -(0.8125f64).log2();
        assert!((expected - 0.299_560_281_858_908_7).abs() < 1e-12);
        assert!((m2_coeff(&psi).unwrap() - expected).abs() < 1e-14);
        assert!((m2_bruteforce(&psi).unwrap() - expected).abs() < 1e-14);
        let spec = pauli_spectrum_full(&single_particle(&psi)).unwrap();
        assert!((m2_from_spectrum(&spec) - expected).abs() < 1e-12);
    }

    #[test]
    fn coefficient_filter_and_text_round_trip() {
        let psi = [c(0.6, 0.0), c(0.0, 0.8), c(0.0, 0.0), c(0.0, 0.0)];
        let spec = pauli_spectrum_full(&single_particle(&psi)).unwrap();
        let filtered = spec.filtered(ZERO_THRESHOLD);
        assert!(filtered.entries.iter().all(|(_, v)| v.abs() > ZERO_THRESHOLD));
        let mut buf = Vec::new();
        filtered.write_text(&mut buf).unwrap();
        let back = FilteredSpectrum::read_text(buf.as_slice()).unwrap();
        assert_eq!(back, filtered);
    }

    #[test]
    fn resource_guards() {
        let psi = vec![c(0.0, 0.0); 25];
        assert!(matches!(m2_bruteforce(&psi), Err(Error::ResourceLimit(_))));
        let state = WalkState::basis_vector(
            Space::Sector(SectorBasis::single_magnon(13).unwrap()),
            6,
        );
        assert!(matches!(pauli_spectrum_full(&state), Err(Error::ResourceLimit(_))));
        assert!(matches!(
            m2_coeff(&[c(0.5, 0.0), c(0.5, 0.0)]),
            Err(Error::Normalization(_))
        ));
    }

    #[test]
    fn bessel_small_time_is_quadratic() {
        assert_eq!(m2_bessel(0.0, 1.0, 600).unwrap(), 0.0);
        let ratios: Vec<f64> = [0.02, 0.01, 0.005]
            .iter()
            .map(|&z| m2_bessel(z, 1.0, 600).unwrap() / (z * z))
            .collect();
        let drift_a = (ratios[0] - ratios[1]).abs();
        let drift_b = (ratios[1] - ratios[2]).abs();
        assert!(drift_b < drift_a);
        assert!(drift_a / ratios[1] < 1e-3);
    }

    #[test]
    fn bessel_truncation_is_reported() {
        assert!(matches!(m2_bessel(100.0, 1.0, 100), Err(Error::Truncation { .. })));
    }

    #[test]
    fn asymptotic_value_and_domain() {
        let z: f64 = 100.0;
        let log_term = z.ln() + 5.0 * 2f64.ln() + 0.577_215_664_9;
        let direct = -(7.0 / (std::f64::consts::PI.powi(4) * z * z) * log_term * log_term).log2();
        assert!((m2_asymptotic(100.0, 1.0).unwrap() - direct).abs() < 1e-9);
        assert!((direct - 10.86).abs() < 0.005);
        assert!(matches!(m2_asymptotic(1.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(m2_asymptotic(0.5, 1.5), Err(Error::Domain(_))));
    }

    #[test]
    fn asymptotic_grows_like_two_log2() {
        // Successive octave increments drift toward 2 bits.
        let increments: Vec<f64> = [10.0, 100.0, 1000.0, 10000.0]
            .iter()
            .map(|&z: &f64| m2_asymptotic(2.0 * z, 1.0).unwrap() - m2_asymptotic(z, 1.0).unwrap())
            .collect();
        for w in increments.windows(2) {
            assert!((w[1] - 2.0).abs() < (w[0] - 2.0).abs());
        }
    }
}
