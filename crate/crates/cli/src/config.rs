//! Command-line arguments, config files and the resolved run configuration.
//!
//! Every setting is taken from the first source that provides it: a flag
//! (or its `MAGICWALK_*` environment variable), then the `--config` TOML
//! file, then the per-command default.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use magicwalk::doublon::pre_boundary_time;
use magicwalk::magic::MAX_SPECTRUM_SITES;
use magicwalk::stats::DEFAULT_BINS;
use magicwalk::ChainSpec;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "magicwalk", version, about = "Magic spreading in quantum walks on spin chains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Single-particle M2 curve (m2.csv).
    SpMagic(RunArgs),
    /// Local magnetization and light-cone fronts (zprofile.csv, front.csv).
    Magnetization(RunArgs),
    /// Two-particle M2, doublon model and cumulative average.
    TwoMagic(RunArgs),
    /// Spacing-ratio statistics of the long-time Pauli spectrum.
    PauliStats(RunArgs),
}

impl Command {
    pub fn kind(&self) -> CommandKind {
        match self {
            Command::SpMagic(_) => CommandKind::SpMagic,
            Command::Magnetization(_) => CommandKind::Magnetization,
            Command::TwoMagic(_) => CommandKind::TwoMagic,
            Command::PauliStats(_) => CommandKind::PauliStats,
        }
    }

    pub fn args(&self) -> &RunArgs {
        match self {
            Command::SpMagic(a) | Command::Magnetization(a) | Command::TwoMagic(a) | Command::PauliStats(a) => a,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    SpMagic,
    Magnetization,
    TwoMagic,
    PauliStats,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::SpMagic => "sp-magic",
            CommandKind::Magnetization => "magnetization",
            CommandKind::TwoMagic => "two-magic",
            CommandKind::PauliStats => "pauli-stats",
        }
    }

    fn methods(self) -> &'static [&'static str] {
        match self {
            CommandKind::SpMagic => &["bessel", "ed", "asymptotic", "spectrum"],
            CommandKind::Magnetization => &["ed"],
            CommandKind::TwoMagic | CommandKind::PauliStats => &["spectrum"],
        }
    }
}

#[derive(Clone, Debug, Default, Args)]
pub struct RunArgs {
    /// Number of sites.
    #[arg(long = "L", env = "MAGICWALK_L")]
    pub sites: Option<usize>,
    /// Nearest-neighbor coupling.
    #[arg(long = "J", env = "MAGICWALK_J")]
    pub coupling: Option<f64>,
    /// ZZ anisotropy.
    #[arg(long, env = "MAGICWALK_DELTA")]
    pub delta: Option<f64>,
    /// Next-nearest-neighbor hopping.
    #[arg(long, env = "MAGICWALK_JPRIME")]
    pub jprime: Option<f64>,
    /// Flipped spins in the initial state (1 or 2).
    #[arg(long, env = "MAGICWALK_PARTICLES")]
    pub particles: Option<usize>,
    /// Last time of the grid.
    #[arg(long, env = "MAGICWALK_TMAX")]
    pub tmax: Option<f64>,
    /// Time step of the grid.
    #[arg(long, env = "MAGICWALK_DT")]
    pub dt: Option<f64>,
    /// Estimator: bessel, ed, asymptotic or spectrum.
    #[arg(long, env = "MAGICWALK_METHOD")]
    pub method: Option<String>,
    /// Output directory.
    #[arg(long, env = "MAGICWALK_OUT")]
    pub out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, env = "MAGICWALK_THREADS")]
    pub threads: Option<usize>,
    /// TOML file with default values for any of these settings.
    #[arg(long, env = "MAGICWALK_CONFIG")]
    pub config: Option<PathBuf>,
    /// Sites in the infinite-chain Bessel sum.
    #[arg(long, env = "MAGICWALK_LSUM")]
    pub lsum: Option<usize>,
    /// Hamiltonian family for pauli-stats: xxz or nnn.
    #[arg(long, env = "MAGICWALK_MODEL")]
    pub model: Option<String>,
    /// Histogram bins on [0, 1].
    #[arg(long, env = "MAGICWALK_BINS")]
    pub bins: Option<usize>,
    /// Recorded in the manifest; no command draws random numbers.
    #[arg(long, env = "MAGICWALK_SEED")]
    pub seed: Option<u64>,
    /// pauli-stats: count the t = 0 spectrum instead of long-time snapshots.
    #[arg(long = "t0-diagnostic", env = "MAGICWALK_T0_DIAGNOSTIC")]
    pub t0_diagnostic: bool,
}

/// Values read from a `--config` file. Keys match the long flag names.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(rename = "L")]
    pub sites: Option<usize>,
    #[serde(rename = "J")]
    pub coupling: Option<f64>,
    pub delta: Option<f64>,
    pub jprime: Option<f64>,
    pub particles: Option<usize>,
    pub tmax: Option<f64>,
    pub dt: Option<f64>,
    pub method: Option<String>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub lsum: Option<usize>,
    pub model: Option<String>,
    pub bins: Option<usize>,
    pub seed: Option<u64>,
    #[serde(rename = "t0-diagnostic")]
    pub t0_diagnostic: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::ConfigFile {
            path: path.to_owned(),
            message: e.to_string(),
        })?;
        toml::from_str(&text).map_err(|e| CliError::ConfigFile {
            path: path.to_owned(),
            message: e.to_string(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Xxz,
    Nnn,
}

/// Fully resolved settings of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: CommandKind,
    #[serde(rename = "L")]
    pub sites: usize,
    #[serde(rename = "J")]
    pub coupling: f64,
    pub delta: f64,
    pub jprime: f64,
    pub particles: usize,
    pub tmax: f64,
    pub dt: f64,
    pub method: String,
    pub out: PathBuf,
    pub threads: Option<usize>,
    pub lsum: usize,
    pub model: Model,
    pub bins: usize,
    pub seed: u64,
    #[serde(rename = "t0-diagnostic")]
    pub t0_diagnostic: bool,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl RunConfig {
    pub fn resolve(kind: CommandKind, args: &RunArgs) -> Result<Self> {
        let file = match &args.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let sites = args.sites.or(file.sites).unwrap_or(match kind {
            CommandKind::SpMagic => 100,
            CommandKind::Magnetization => 128,
            CommandKind::TwoMagic | CommandKind::PauliStats => 10,
        });
        let coupling = args.coupling.or(file.coupling).unwrap_or(1.0);
        let delta = args.delta.or(file.delta).unwrap_or(match kind {
            CommandKind::SpMagic => 0.0,
            CommandKind::TwoMagic => 8.0,
            CommandKind::Magnetization | CommandKind::PauliStats => 0.5,
        });
        let model = match args.model.clone().or(file.model).as_deref() {
            None | Some("xxz") => Model::Xxz,
            Some("nnn") => Model::Nnn,
            Some(other) => return Err(invalid(format!("model must be xxz or nnn, got {other:?}"))),
        };
        let jprime = args.jprime.or(file.jprime).unwrap_or(match model {
            Model::Xxz => 0.0,
            Model::Nnn => 0.5 * coupling,
        });
        let particles = args.particles.or(file.particles).unwrap_or(match kind {
            CommandKind::SpMagic => 1,
            _ => 2,
        });
        let method = args
            .method
            .clone()
            .or(file.method)
            .unwrap_or_else(|| kind.methods()[0].to_owned());
        let dt = args.dt.or(file.dt).unwrap_or(match kind {
            CommandKind::Magnetization => 1.0,
            _ => 0.5,
        } / coupling);
        let tmax = match args.tmax.or(file.tmax) {
            Some(t) => t,
            None => match kind {
                CommandKind::SpMagic => 100.0 / coupling,
                CommandKind::Magnetization => 60.0 / coupling,
                // Whole pre-boundary interval of the doublon.
                CommandKind::TwoMagic => pre_boundary_time(&ChainSpec::xxz(sites, delta).with_coupling(coupling))
                    .unwrap_or(sites as f64 / (2.0 * coupling)),
                CommandKind::PauliStats => dt,
            },
        };
        let config = Self {
            command: kind,
            sites,
            coupling,
            delta,
            jprime,
            particles,
            tmax,
            dt,
            method,
            out: args
                .out
                .clone()
                .or(file.out)
                .unwrap_or_else(|| PathBuf::from("out").join(kind.name())),
            threads: args.threads.or(file.threads),
            lsum: args.lsum.or(file.lsum).unwrap_or(600),
            model,
            bins: args.bins.or(file.bins).unwrap_or(DEFAULT_BINS),
            seed: args.seed.or(file.seed).unwrap_or(0),
            t0_diagnostic: args.t0_diagnostic || file.t0_diagnostic.unwrap_or(false),
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        if !(self.coupling.is_finite() && self.coupling > 0.0) {
            return Err(invalid(format!("J must be positive, got {}", self.coupling)));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(invalid(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.tmax.is_finite() && self.tmax >= self.dt) {
            return Err(invalid(format!("tmax must be >= dt, got tmax = {}, dt = {}", self.tmax, self.dt)));
        }
        if !self.command.methods().contains(&self.method.as_str()) {
            return Err(invalid(format!(
                "{} supports --method {}, got {:?}",
                self.command.name(),
                self.command.methods().join(" | "),
                self.method
            )));
        }
        if self.model == Model::Xxz && self.jprime != 0.0 {
            return Err(invalid("jprime needs --model nnn"));
        }
        if self.command == CommandKind::SpMagic && self.particles != 1 {
            return Err(invalid("sp-magic runs a single particle"));
        }
        if self.threads == Some(0) {
            return Err(invalid("threads must be >= 1"));
        }
        if self.bins == 0 {
            return Err(invalid("bins must be >= 1"));
        }
        self.chain().validate_run()?;
        let needs_spectrum = matches!(self.command, CommandKind::TwoMagic | CommandKind::PauliStats)
            || self.method == "spectrum";
        if needs_spectrum && self.sites > MAX_SPECTRUM_SITES {
            return Err(magicwalk::Error::ResourceLimit(format!(
                "the full Pauli spectrum needs L <= {MAX_SPECTRUM_SITES}, got {}",
                self.sites
            ))
            .into());
        }
        Ok(())
    }

    pub fn chain(&self) -> ChainSpec {
        ChainSpec::xxz(self.sites, self.delta)
            .with_coupling(self.coupling)
            .with_nnn(self.jprime)
            .with_particles(self.particles)
    }

    /// Grid `0, dt, 2 dt, ...` up to `tmax`.
    pub fn times(&self) -> Vec<f64> {
        let steps = (self.tmax / self.dt + 1e-9).floor() as usize;
        (0..=steps).map(|i| i as f64 * self.dt).collect()
    }

    /// Command line that reproduces this run.
    pub fn command_line(&self) -> Vec<String> {
        let mut args = vec!["magicwalk".to_owned(), self.command.name().to_owned()];
        let mut push = |flag: &str, value: String| {
            args.push(format!("--{flag}"));
            args.push(value);
        };
        push("L", self.sites.to_string());
        push("J", self.coupling.to_string());
        push("delta", self.delta.to_string());
        push("jprime", self.jprime.to_string());
        push("particles", self.particles.to_string());
        push("tmax", self.tmax.to_string());
        push("dt", self.dt.to_string());
        push("method", self.method.clone());
        push("out", self.out.display().to_string());
        if let Some(t) = self.threads {
            push("threads", t.to_string());
        }
        push("lsum", self.lsum.to_string());
        push(
            "model",
            match self.model {
                Model::Xxz => "xxz",
                Model::Nnn => "nnn",
            }
            .to_owned(),
        );
        push("bins", self.bins.to_string());
        push("seed", self.seed.to_string());
        if self.t0_diagnostic {
            args.push("--t0-diagnostic".to_owned());
        }
        args
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve(kind: CommandKind, args: RunArgs) -> Result<RunConfig> {
        RunConfig::resolve(kind, &args)
    }

    #[test]
    fn defaults_per_command() {
        let c = resolve(CommandKind::TwoMagic, RunArgs::default()).unwrap();
        assert_eq!((c.sites, c.delta, c.particles), (10, 8.0, 2));
        assert_eq!(c.tmax, 72.0);
        assert_eq!(c.times().len(), 145);
        let c = resolve(CommandKind::SpMagic, RunArgs::default()).unwrap();
        assert_eq!((c.method.as_str(), c.lsum, c.particles), ("bessel", 600, 1));
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "L = 8\ndelta = 2.0\ndt = 0.25\n").unwrap();
        let args = RunArgs {
            config: Some(path),
            delta: Some(1.5),
            ..RunArgs::default()
        };
        let c = resolve(CommandKind::TwoMagic, args).unwrap();
        assert_eq!((c.sites, c.delta, c.dt), (8, 1.5, 0.25));
    }

    #[test]
    fn rejects_bad_settings() {
        let bad = [
            RunArgs { dt: Some(0.0), ..RunArgs::default() },
            RunArgs { dt: Some(1.0), tmax: Some(0.5), ..RunArgs::default() },
            RunArgs { method: Some("mps".into()), ..RunArgs::default() },
            RunArgs { sites: Some(3), ..RunArgs::default() },
            RunArgs { jprime: Some(0.5), ..RunArgs::default() },
        ];
        for args in bad {
            let err = resolve(CommandKind::SpMagic, args).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{err}");
        }
        let err = resolve(CommandKind::PauliStats, RunArgs { sites: Some(13), ..RunArgs::default() }).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn unknown_file_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.toml");
        std::fs::write(&path, "sites = 8\n").unwrap();
        let args = RunArgs { config: Some(path), ..RunArgs::default() };
        assert!(matches!(resolve(CommandKind::SpMagic, args), Err(CliError::ConfigFile { .. })));
    }

    #[test]
    fn command_line_round_trips() {
        let c = resolve(CommandKind::PauliStats, RunArgs { model: Some("nnn".into()), ..RunArgs::default() }).unwrap();
        let line = c.command_line();
        let cli = Cli::try_parse_from(&line).unwrap();
        let again = RunConfig::resolve(cli.command.kind(), cli.command.args()).unwrap();
        assert_eq!(again, c);
    }
}
