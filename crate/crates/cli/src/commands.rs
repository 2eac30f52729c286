use std::path::PathBuf;

use magicwalk::doublon::{default_late_window, doublon_params};
use magicwalk::experiment::{
    exact_magic_series, initial_spectrum_counts, magnetization_series, pauli_ratio_statistics,
    single_particle_series, SingleParticleMethod,
};
use magicwalk::magic::SpectrumCounts;
use magicwalk::stats::{
    long_time_snapshots, poisson_reference, BRIGHT_FRONT_THRESHOLD, FRONT_THRESHOLD, LONG_TIME_SNAPSHOTS,
    POISSON_MEAN_RATIO,
};
use magicwalk::{
    cumulative_average, doublon_magic_series, light_cone_front, log_growth_fit, shift_fit, FrontFit, MagicSeries,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{CommandKind, RunConfig};
use crate::error::{CliError, Result};
use crate::output::{write_json, Cell, Csv};

/// Contents of `run.json`.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: &'static str,
    pub version: &'static str,
    pub config: RunConfig,
    /// Arguments that repeat this run.
    pub command_line: Vec<String>,
    pub outputs: Vec<String>,
    pub results: Value,
}

struct Outputs {
    dir: PathBuf,
    written: Vec<String>,
}

impl Outputs {
    fn new(dir: PathBuf) -> Result<Self> {
        std::fs::create_dir_all(&dir).map_err(|source| CliError::Io {
            path: dir.clone(),
            source,
        })?;
        Ok(Self { dir, written: Vec::new() })
    }

    fn csv(&mut self, name: &str, csv: &Csv) -> Result<()> {
        csv.write(&self.dir, name)?;
        self.written.push(name.to_owned());
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        write_json(&self.dir, name, value)?;
        self.written.push(name.to_owned());
        Ok(())
    }
}

pub fn run(config: &RunConfig) -> Result<Manifest> {
    let mut out = Outputs::new(config.out.clone())?;
    let results = match config.command {
        CommandKind::SpMagic => sp_magic(config, &mut out)?,
        CommandKind::Magnetization => magnetization(config, &mut out)?,
        CommandKind::TwoMagic => two_magic(config, &mut out)?,
        CommandKind::PauliStats => pauli_stats(config, &mut out)?,
    };
    let mut manifest = Manifest {
        command: config.command.name(),
        version: env!("CARGO_PKG_VERSION"),
        config: config.clone(),
        command_line: config.command_line(),
        outputs: out.written.clone(),
        results,
    };
    manifest.outputs.push("run.json".to_owned());
    out.json("run.json", &manifest)?;
    Ok(manifest)
}

fn magic_csv(series: &MagicSeries, method: &str) -> Csv {
    let mut csv = Csv::new(&["time", "m2", "method"]);
    for (&t, &m) in series.times.iter().zip(&series.values) {
        csv.row(&[Cell::Num(t), Cell::Num(m), Cell::Text(method)]);
    }
    csv
}

fn sp_magic(config: &RunConfig, out: &mut Outputs) -> Result<Value> {
    let method = match config.method.as_str() {
        "bessel" => SingleParticleMethod::Bessel,
        "ed" => SingleParticleMethod::Ed,
        "asymptotic" => SingleParticleMethod::Asymptotic,
        _ => SingleParticleMethod::Spectrum,
    };
    let series = single_particle_series(&config.chain(), &config.times(), method, config.lsum)?;
    out.csv("m2.csv", &magic_csv(&series, &config.method))?;
    Ok(json!({
        "rows": series.len(),
        "final_m2": series.values.last(),
    }))
}

/// Front fit restricted to the leading times where some site still
/// deviates by more than `threshold`.
struct PrefixFront {
    fit: Option<FrontFit>,
    visible_until: Option<f64>,
}

fn front_over_prefix(times: &[f64], profiles: &[Vec<f64>], threshold: f64, window: (f64, f64)) -> PrefixFront {
    let visible = profiles
        .iter()
        .take_while(|p| p.iter().any(|z| (z - 1.0).abs() > threshold))
        .count();
    PrefixFront {
        fit: light_cone_front(&times[..visible], &profiles[..visible], threshold, window).ok(),
        visible_until: visible.checked_sub(1).map(|i| times[i]),
    }
}

fn front_summary(fit: &Option<FrontFit>, window: (f64, f64)) -> Value {
    match fit {
        Some(f) => json!({
            "threshold": f.threshold,
            "window": [window.0, window.1],
            "velocity": f.velocity,
            "left_velocity": f.left_velocity,
            "right_velocity": f.right_velocity,
            "residual": f.residual,
        }),
        None => Value::Null,
    }
}

fn magnetization(config: &RunConfig, out: &mut Outputs) -> Result<Value> {
    let spec = config.chain();
    let times = config.times();
    let profiles = magnetization_series(&spec, &times)?;

    let mut z = Csv::new(&["time", "site", "z"]);
    for (&t, profile) in times.iter().zip(&profiles) {
        for (site, &value) in profile.iter().enumerate() {
            z.row(&[Cell::Num(t), Cell::Int(site), Cell::Num(value)]);
        }
    }
    out.csv("zprofile.csv", &z)?;

    let j = config.coupling;
    // Until the fast front comes within a few sites of the nearer edge.
    let edge_time = (spec.center().min(spec.sites - 1 - spec.center()) as f64 - 4.0).max(0.0) / j;
    let fast_window = (5.0 / j, edge_time.min(config.tmax));
    let fast = light_cone_front(&times, &profiles, FRONT_THRESHOLD, (0.0, config.tmax))?;
    let fast_fit = light_cone_front(&times, &profiles, FRONT_THRESHOLD, fast_window).ok();
    let bright_window = (10.0 / j, config.tmax);
    let bright = front_over_prefix(&times, &profiles, BRIGHT_FRONT_THRESHOLD, bright_window);

    let mut front = Csv::new(&["time", "left", "right"]);
    for ((&t, &l), &r) in fast.times.iter().zip(&fast.left).zip(&fast.right) {
        front.row(&[Cell::Num(t), Cell::Int(l), Cell::Int(r)]);
    }
    out.csv("front.csv", &front)?;
    Ok(json!({
        "fast_front": front_summary(&fast_fit, fast_window),
        "bright_front": front_summary(&bright.fit, bright_window),
        "bright_visible_until": bright.visible_until,
        "doublon_velocity": (config.particles == 2 && config.delta > 0.0)
            .then(|| doublon_params(j, config.delta).map(|p| p.v_doublon).ok())
            .flatten(),
    }))
}

fn two_magic(config: &RunConfig, out: &mut Outputs) -> Result<Value> {
    let spec = config.chain();
    if spec.particles != 2 {
        return Err(CliError::Config("two-magic needs --particles 2".into()));
    }
    let times = config.times();
    // Falls back to the last third of the grid when it ends before the
    // late pre-boundary window starts.
    let late = default_late_window(&spec)?;
    let window = if late.0 < config.tmax {
        (late.0, late.1.min(config.tmax))
    } else {
        (2.0 * config.tmax / 3.0, config.tmax)
    };
    let total = exact_magic_series(&spec, &times)?;
    let doublon = doublon_magic_series(&spec, &times)?;
    let fit = shift_fit(&total, &doublon, window)?;
    let cumulative = cumulative_average(&total)?;

    out.csv("m2.csv", &magic_csv(&total, "spectrum"))?;
    out.csv("m2_doublon.csv", &magic_csv(&doublon, "doublon"))?;
    out.json("shift.json", &fit)?;
    let mut csv = Csv::new(&["time", "m2_cumulative"]);
    for (&t, &m) in cumulative.times.iter().zip(&cumulative.values) {
        csv.row(&[Cell::Num(t), Cell::Num(m)]);
    }
    out.csv("m2_cumulative.csv", &csv)?;

    // Growth before the fast walker reaches the edges at t J ~ L / 2.
    let growth_window = (0.5 / config.coupling, (spec.sites as f64 / (2.0 * config.coupling)).min(config.tmax));
    let growth = log_growth_fit(&cumulative, growth_window).ok();
    Ok(json!({
        "doublon": doublon_params(config.coupling, config.delta)?,
        "shift": fit,
        "cumulative_log_fit": growth.map(|g| json!({
            "window": [growth_window.0, growth_window.1],
            "slope": g.slope,
            "intercept": g.intercept,
            "residual": g.residual,
        })),
    }))
}

fn counts_json(c: &SpectrumCounts) -> Value {
    json!({ "plus_one": c.plus_one, "minus_one": c.minus_one, "zero": c.zero, "other": c.other })
}

fn pauli_stats(config: &RunConfig, out: &mut Outputs) -> Result<Value> {
    let spec = config.chain();
    if config.t0_diagnostic {
        let counts = initial_spectrum_counts(&spec)?;
        let summary = json!({ "snapshot_times": [0.0], "counts": counts_json(&counts) });
        out.json("summary.json", &summary)?;
        return Ok(summary);
    }
    let times = long_time_snapshots(spec.sites, spec.coupling, LONG_TIME_SNAPSHOTS);
    let stats = pauli_ratio_statistics(&spec, &times, config.bins)?;

    let mut ratios = Csv::new(&["ratio"]);
    for &r in &stats.pooled.ratios {
        ratios.row(&[Cell::Num(r)]);
    }
    out.csv("ratios.csv", &ratios)?;

    let hist = &stats.pooled.histogram;
    let mut csv = Csv::new(&["center", "density", "poisson"]);
    for (&c, &d) in hist.centers().iter().zip(&hist.densities) {
        csv.row(&[Cell::Num(c), Cell::Num(d), Cell::Num(poisson_reference(c)?)]);
    }
    out.csv("hist.csv", &csv)?;

    let summary = json!({
        "mean_ratio": stats.pooled.mean_ratio,
        "poisson_mean_ratio": POISSON_MEAN_RATIO,
        "samples": stats.pooled.ratios.len(),
        "sup_distance": hist.sup_distance_to_poisson(),
        "snapshot_times": times,
        "snapshots": stats.snapshots,
    });
    out.json("summary.json", &summary)?;
    Ok(json!({
        "mean_ratio": stats.pooled.mean_ratio,
        "samples": stats.pooled.ratios.len(),
        "sup_distance": hist.sup_distance_to_poisson(),
    }))
}
