//! Property tests spanning several modules.

use proptest::prelude::*;

use crate::experiment::{magnetization_series, SectorWalk};
use crate::magic::SeriesKind;
use crate::stats::FRONT_THRESHOLD;
use crate::*;

fn normalized(parts: &[(f64, f64)]) -> Option<Vec<Complex64>> {
    let v: Vec<Complex64> = parts.iter().map(|&(re, im)| Complex64::new(re, im)).collect();
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    (norm > 1e-3).then(|| v.into_iter().map(|a| a / norm).collect())
}

fn amplitudes() -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2..9).prop_filter_map("zero vector", |p| normalized(&p))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coeff_formula_matches_bruteforce(psi in amplitudes()) {
        let a = m2_coeff(&psi).unwrap();
        let b = m2_bruteforce(&psi).unwrap();
        prop_assert!((a - b).abs() < 1e-10, "{a} vs {b}");
    }

    #[test]
    fn coeff_formula_matches_spectrum(psi in amplitudes()) {
        let basis = SectorBasis::single_magnon(psi.len()).unwrap();
        let state = WalkState { space: Space::Sector(basis), amplitudes: psi.clone(), time: 0.0 };
        let spectrum = pauli_spectrum_full(&state).unwrap();
        let l = psi.len() as f64;
        prop_assert!((spectrum.purity_sum() / l.exp2() - 1.0).abs() < 1e-8);
        prop_assert!((m2_coeff(&psi).unwrap() - m2_from_spectrum(&spectrum)).abs() < 1e-8);
    }

    #[test]
    fn magic_ignores_permutations_and_phases(psi in amplitudes(), shift in 0usize..8, phase in 0.0f64..6.3) {
        let base = m2_coeff(&psi).unwrap();
        let mut rotated = psi.clone();
        rotated.rotate_left(shift % psi.len());
        let global = Complex64::from_polar(1.0, phase);
        let moved: Vec<Complex64> = rotated.iter().map(|a| a * global).collect();
        prop_assert!((m2_coeff(&moved).unwrap() - base).abs() < 1e-10);
        prop_assert!(base >= -1e-12);
    }

    #[test]
    fn spacing_ratios_are_affine_invariant(
        values in prop::collection::vec(-10.0f64..10.0, 5..60),
        scale in 0.1f64..20.0,
        offset in -50.0f64..50.0,
    ) {
        let Ok(a) = spacing_ratios(&values) else { return Ok(()) };
        let mapped: Vec<f64> = values.iter().map(|v| scale * v + offset).collect();
        let b = spacing_ratios(&mapped).unwrap();
        // Merging at a fixed tolerance can differ only for near-ties.
        prop_assume!(a.ratios.len() == b.ratios.len());
        for (x, y) in a.ratios.iter().zip(&b.ratios) {
            prop_assert!((x - y).abs() < 1e-9);
        }
        prop_assert!((a.histogram.mass() - 1.0).abs() < 1e-12);
        let mean = a.ratios.iter().sum::<f64>() / a.ratios.len() as f64;
        prop_assert!((a.mean_ratio - mean).abs() < 1e-12);
    }

    #[test]
    fn cumulative_average_is_bounded(values in prop::collection::vec(0.0f64..5.0, 2..40)) {
        let times: Vec<f64> = (0..values.len()).map(|i| i as f64 * 0.5).collect();
        let series = MagicSeries::new(times, values.clone(), Estimator::Coeff);
        let avg = cumulative_average(&series).unwrap();
        prop_assert_eq!(avg.kind, SeriesKind::Cumulative);
        let mut running = 0.0f64;
        for (a, v) in avg.values.iter().zip(&values) {
            running = running.max(*v);
            prop_assert!(*a >= 0.0 && *a <= running + 1e-12);
        }
    }
}

#[test]
fn bessel_agrees_with_ed_while_flag_is_clear() {
    for sites in [40usize, 200] {
        let spec = ChainSpec::xx(sites).with_particles(1);
        let walk = SectorWalk::new(&spec).unwrap();
        let mut saw_flag = false;
        for i in 0..=240 {
            let t = i as f64 * sites as f64 / 400.0;
            let bessel = single_particle_amplitudes(t, sites, 1.0).unwrap();
            if bessel.boundary_flag() {
                saw_flag = true;
                continue;
            }
            let ed = walk.state_at(t).unwrap();
            let diff = ed
                .amplitudes
                .iter()
                .zip(&bessel.state.amplitudes)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(diff < 1e-8, "L={sites} t={t}: {diff:e} with tail {:e}", bessel.tail_mass);
        }
        assert!(saw_flag, "grid should reach the edges for L={sites}");
    }
}

#[test]
fn single_particle_front_respects_lieb_robinson() {
    let spec = ChainSpec::xx(120).with_particles(1);
    let times: Vec<f64> = (0..=50).map(|i| i as f64).collect();
    let profiles = magnetization_series(&spec, &times).unwrap();
    for window in [(2.0, 50.0), (10.0, 30.0), (20.0, 50.0)] {
        let fit = light_cone_front(&times, &profiles, FRONT_THRESHOLD, window).unwrap();
        assert!(fit.velocity <= 1.1 * spec.coupling, "{window:?}: {}", fit.velocity);
    }
}

#[test]
fn doublon_monotone_in_delta() {
    let values: Vec<f64> = [2.0, 4.0, 8.0]
        .iter()
        .map(|&d| doublon_magic_series(&ChainSpec::xxz(128, d), &[16.0]).unwrap().values[0])
        .collect();
    assert!(values[0] > values[1] && values[1] > values[2], "{values:?}");
}
