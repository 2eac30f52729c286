//! Integer-order Bessel functions of the first kind by Miller's algorithm.

use crate::error::{Error, Result};

const RESCALE_ABOVE: f64 = 1e250;
const RESCALE_BY: f64 = 1e-250;

/// Starting order of the downward recurrence for argument `z`.
pub fn start_order(z: f64) -> usize {
    (z + 12.0 * z.cbrt() + 40.0).ceil() as usize
}

/// `J_0(z), ..., J_order_max(z)` for real `z >= 0`.
///
/// Runs the three-term recurrence downward from [`start_order`] (or from
/// above `order_max` if that is larger) and normalizes with
/// `J_0 + 2 Σ J_{2k} = 1`.
pub fn bessel_j_array(order_max: usize, z: f64) -> Result<Vec<f64>> {
    if !z.is_finite() || z < 0.0 {
        return Err(Error::Domain(format!("Bessel argument must be finite and >= 0, got {z}")));
    }
    let mut out = vec![0.0; order_max + 1];
    if z == 0.0 {
        out[0] = 1.0;
        return Ok(out);
    }
    let start = start_order(z).max(order_max + 1);
    let mut above = 0.0; // J_{k+1}
    let mut current = 1.0; // J_k, unnormalized
    let mut norm = if start.is_multiple_of(2) { 2.0 } else { 0.0 };
    for k in (1..=start).rev() {
        let below = 2.0 * k as f64 / z * current - above;
        above = current;
        current = below;
        let order = k - 1;
        if order <= order_max {
            out[order] = current;
        }
        if order > 0 && order % 2 == 0 {
            norm += 2.0 * current;
        }
        if current.abs() > RESCALE_ABOVE {
            current *= RESCALE_BY;
            above *= RESCALE_BY;
            norm *= RESCALE_BY;
            for v in out.iter_mut().skip(order) {
                *v *= RESCALE_BY;
            }
        }
    }
    norm += current;
    for v in &mut out {
        *v /= norm;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Power series, adequate for small arguments.
    fn series(n: usize, z: f64) -> f64 {
        let half = z / 2.0;
        let mut term = half.powi(n as i32) / (1..=n).map(|k| k as f64).product::<f64>();
        let mut sum = 0.0;
        for m in 0..200 {
            sum += term;
            let m = m as f64;
            term *= -half * half / ((m + 1.0) * (m + 1.0 + n as f64));
            if term.abs() < 1e-300 {
                break;
            }
        }
        sum
    }

    /// Trapezoidal rule on Bessel's integral; spectrally accurate because the
    /// integrand is smooth and periodic.
    fn integral(n: usize, z: f64) -> f64 {
        let pts = 4096;
        let h = std::f64::consts::PI / pts as f64;
        let f = |tau: f64| (n as f64 * tau - z * tau.sin()).cos();
        let mut s = 0.5 * (f(0.0) + f(std::f64::consts::PI));
        for i in 1..pts {
            s += f(i as f64 * h);
        }
        s * h / std::f64::consts::PI
    }

    #[test]
    fn zero_argument() {
        let j = bessel_j_array(5, 0.0).unwrap();
        assert_eq!(j, vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn j1_of_one() {
        let j = bessel_j_array(3, 1.0).unwrap();
        let oracle = series(1, 1.0);
        assert!((oracle - 0.440_050_585_7).abs() < 1e-10);
        assert!((j[1] - oracle).abs() < 1e-15);
    }

    #[test]
    fn matches_power_series_at_small_argument() {
        for &z in &[0.01, 0.3, 1.0, 2.5, 5.0] {
            let j = bessel_j_array(30, z).unwrap();
            for (n, &v) in j.iter().enumerate() {
                let o = series(n, z);
                if o.abs() > 1e-2 {
                    assert!(((v - o) / o).abs() < 1e-12, "z={z} n={n}: {v} vs {o}");
                } else {
                    assert!((v - o).abs() < 1e-14, "z={z} n={n}: {v} vs {o}");
                }
            }
        }
    }

    #[test]
    fn matches_integral_representation() {
        for &z in &[7.3, 20.0, 80.0, 150.0, 300.0] {
            let j = bessel_j_array(400, z).unwrap();
            for n in (0..400).step_by(7) {
                let o = integral(n, z);
                let err = (j[n] - o).abs();
                if o.abs() > 1e-2 {
                    assert!(err / o.abs() < 1e-12, "z={z} n={n}: {} vs {o}", j[n]);
                } else {
                    assert!(err < 1e-14, "z={z} n={n}: {} vs {o}", j[n]);
                }
            }
        }
    }

    #[test]
    fn normalization_identity() {
        for &z in &[0.5, 3.0, 17.0, 64.0, 111.1, 200.0] {
            let j = bessel_j_array(start_order(z), z).unwrap();
            let s = j[0] * j[0] + 2.0 * j[1..].iter().map(|x| x * x).sum::<f64>();
            assert!((s - 1.0).abs() < 1e-12, "z={z}: {s}");
        }
    }

    #[test]
    fn far_orders_underflow_gracefully() {
        let j = bessel_j_array(2000, 1.0).unwrap();
        assert!(j.iter().all(|v| v.is_finite()));
        assert!(j[100].abs() < 1e-100);
    }

    #[test]
    fn negative_argument_rejected() {
        assert!(matches!(bessel_j_array(3, -1.0), Err(Error::Domain(_))));
        assert!(matches!(bessel_j_array(3, f64::NAN), Err(Error::Domain(_))));
    }
}
