//! Spacing-ratio statistics, cumulative averages and front/growth fits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::magic::{MagicSeries, SeriesKind};

/// `<r̃>` of a Poisson spectrum, `2 ln 2 - 1`.
pub const POISSON_MEAN_RATIO: f64 = 0.386_294_361_119_890_6;
/// Sorted values closer than this are merged before taking spacings.
pub const MERGE_TOLERANCE: f64 = 1e-12;
pub const DEFAULT_BINS: usize = 25;
/// Deviation of `<Z_j>` from `+1` that marks the outer light cone.
pub const FRONT_THRESHOLD: f64 = 0.01;
/// Deviation marking the bright (doublon) front.
pub const BRIGHT_FRONT_THRESHOLD: f64 = 0.2;
/// Snapshots per long-time spectrum sample.
pub const LONG_TIME_SNAPSHOTS: usize = 8;

/// Density-normalized histogram on `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub densities: Vec<f64>,
}

impl Histogram {
    pub fn unit_interval(samples: &[f64], bins: usize) -> Self {
        assert!(bins > 0, "histogram needs at least one bin");
        let width = 1.0 / bins as f64;
        let mut counts = vec![0usize; bins];
        for &x in samples {
            let bin = ((x / width) as usize).min(bins - 1);
            counts[bin] += 1;
        }
        let total = samples.len().max(1) as f64;
        Self {
            edges: (0..=bins).map(|i| i as f64 * width).collect(),
            densities: counts.iter().map(|&c| c as f64 / (total * width)).collect(),
        }
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn mass(&self) -> f64 {
        self.edges
            .windows(2)
            .zip(&self.densities)
            .map(|(w, d)| (w[1] - w[0]) * d)
            .sum()
    }

    /// `max_i |density_i - P(center_i)|` against the Poisson ratio density.
    pub fn sup_distance_to_poisson(&self) -> f64 {
        self.centers()
            .iter()
            .zip(&self.densities)
            .map(|(&c, &d)| (d - poisson_density(c)).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpacingStats {
    /// Sorted distinct values `c_n`.
    pub values: Vec<f64>,
    /// `s_n = c_{n+1} - c_n`.
    pub spacings: Vec<f64>,
    /// `r̃_n = min(s_n, s_{n-1}) / max(s_n, s_{n-1})`.
    pub ratios: Vec<f64>,
    pub histogram: Histogram,
    pub mean_ratio: f64,
}

impl SpacingStats {
    pub fn sample_count(&self) -> usize {
        self.ratios.len()
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sorts, merges near-duplicates and computes consecutive spacing ratios.
pub fn spacing_ratios(values: &[f64]) -> Result<SpacingStats> {
    let mut sorted: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    sorted.sort_by(f64::total_cmp);
    let mut distinct: Vec<f64> = Vec::with_capacity(sorted.len());
    for v in sorted {
        match distinct.last() {
            Some(&last) if v - last < MERGE_TOLERANCE => {}
            _ => distinct.push(v),
        }
    }
    if distinct.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "need at least 3 distinct values, got {}",
            distinct.len()
        )));
    }
    let spacings: Vec<f64> = distinct.windows(2).map(|w| w[1] - w[0]).collect();
    let ratios: Vec<f64> = spacings
        .windows(2)
        .map(|w| w[0].min(w[1]) / w[0].max(w[1]))
        .collect();
    let histogram = Histogram::unit_interval(&ratios, DEFAULT_BINS);
    Ok(SpacingStats {
        mean_ratio: mean(&ratios),
        values: distinct,
        spacings,
        ratios,
        histogram,
    })
}

/// Pooled ratios of several spectra (e.g. snapshots at different times).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PooledRatios {
    pub ratios: Vec<f64>,
    pub histogram: Histogram,
    pub mean_ratio: f64,
}

pub fn pool_ratios<'a>(stats: impl IntoIterator<Item = &'a SpacingStats>, bins: usize) -> Result<PooledRatios> {
    let ratios: Vec<f64> = stats.into_iter().flat_map(|s| s.ratios.iter().copied()).collect();
    if ratios.is_empty() {
        return Err(Error::InsufficientData("no ratios to pool".into()));
    }
    Ok(PooledRatios {
        histogram: Histogram::unit_interval(&ratios, bins),
        mean_ratio: mean(&ratios),
        ratios,
    })
}

fn poisson_density(r: f64) -> f64 {
    2.0 / ((1.0 + r) * (1.0 + r))
}

/// Ratio density of uncorrelated levels, `P(r̃) = 2 / (1 + r̃)^2` on `[0, 1]`.
pub fn poisson_reference(rtilde: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&rtilde) {
        return Err(Error::Domain(format!("r̃ must lie in [0, 1], got {rtilde}")));
    }
    Ok(poisson_density(rtilde))
}

/// `S` snapshot times uniformly spaced in `[100 L, 200 L] / J`.
pub fn long_time_snapshots(sites: usize, coupling: f64, count: usize) -> Vec<f64> {
    let lo = 100.0 * sites as f64 / coupling;
    let hi = 200.0 * sites as f64 / coupling;
    if count == 1 {
        return vec![lo];
    }
    (0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
        .collect()
}

/// `<M2(t)>_c = (1/t) ∫_0^t M2(t') dt'` by the trapezoidal rule.
pub fn cumulative_average(series: &MagicSeries) -> Result<MagicSeries> {
    let times = &series.times;
    if times.first() != Some(&0.0) {
        return Err(Error::Grid("cumulative average needs a grid starting at t = 0".into()));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Grid("time grid must be strictly increasing".into()));
    }
    let mut out = Vec::with_capacity(times.len());
    out.push(series.values[0]);
    let mut integral = 0.0;
    for i in 1..times.len() {
        integral += 0.5 * (times[i] - times[i - 1]) * (series.values[i] + series.values[i - 1]);
        out.push(integral / times[i]);
    }
    Ok(MagicSeries {
        times: times.clone(),
        values: out,
        estimator: series.estimator,
        kind: SeriesKind::Cumulative,
        spec: series.spec,
    })
}

/// Least-squares line `y = slope x + intercept`, plus the RMS residual.
fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let rms = (xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    (slope, intercept, rms)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogFit {
    /// Bits gained per doubling of `t`.
    pub slope: f64,
    pub intercept: f64,
    /// RMS deviation from the fitted line.
    pub residual: f64,
}

/// Fits `M2 = a log2(t) + b` over `window`.
pub fn log_growth_fit(series: &MagicSeries, window: (f64, f64)) -> Result<LogFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = series
        .window(window.0, window.1)
        .filter(|(t, _)| *t > 0.0)
        .map(|(t, m)| (t.log2(), m))
        .unzip();
    if xs.len() < 2 {
        return Err(Error::EmptyWindow(window.0, window.1));
    }
    let (slope, intercept, residual) = linear_fit(&xs, &ys);
    Ok(LogFit {
        slope,
        intercept,
        residual,
    })
}

/// Light-cone front positions and the fitted spreading velocity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrontFit {
    pub times: Vec<f64>,
    /// Leftmost site deviating from the background, per time.
    pub left: Vec<usize>,
    /// Rightmost site deviating from the background, per time.
    pub right: Vec<usize>,
    pub threshold: f64,
    /// Slope of the half-width `(right - left) / 2` over the fit window.
    pub velocity: f64,
    pub right_velocity: f64,
    pub left_velocity: f64,
    /// RMS residual of the half-width fit.
    pub residual: f64,
}

/// Locates the outermost sites with `|<Z_j> - 1| > threshold` at every time
/// and fits their spreading speed over `window`.
pub fn light_cone_front(
    times: &[f64],
    profiles: &[Vec<f64>],
    threshold: f64,
    window: (f64, f64),
) -> Result<FrontFit> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::Domain(format!("front threshold must be in (0, 1), got {threshold}")));
    }
    assert_eq!(times.len(), profiles.len(), "one profile per time");
    let mut left = Vec::with_capacity(times.len());
    let mut right = Vec::with_capacity(times.len());
    for (&t, profile) in times.iter().zip(profiles) {
        let active = |z: &f64| (z - 1.0).abs() > threshold;
        let (Some(l), Some(r)) = (profile.iter().position(active), profile.iter().rposition(active)) else {
            return Err(Error::NoFront { time: t, threshold });
        };
        left.push(l);
        right.push(r);
    }
    let in_window: Vec<usize> = (0..times.len())
        .filter(|&i| times[i] >= window.0 && times[i] <= window.1)
        .collect();
    if in_window.len() < 2 {
        return Err(Error::EmptyWindow(window.0, window.1));
    }
    let ts: Vec<f64> = in_window.iter().map(|&i| times[i]).collect();
    let fit = |pos: &dyn Fn(usize) -> f64| {
        let ys: Vec<f64> = in_window.iter().map(|&i| pos(i)).collect();
        linear_fit(&ts, &ys)
    };
    let (velocity, _, residual) = fit(&|i| (right[i] as f64 - left[i] as f64) / 2.0);
    let (right_velocity, _, _) = fit(&|i| right[i] as f64);
    let (left_slope, _, _) = fit(&|i| left[i] as f64);
    Ok(FrontFit {
        times: times.to_vec(),
        left,
        right,
        threshold,
        velocity: velocity.max(0.0),
        right_velocity,
        left_velocity: -left_slope,
        residual,
    })
}
