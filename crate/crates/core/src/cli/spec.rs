// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};

use clap::{Args, Parser};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::adversary::AttackStrategy;
use crate::analysis::{parse_rational, MAX_ENUMERATION_ROUNDS};
use crate::error::{AnalysisError, ConfigError};
use crate::protocol::ProtocolVariant;
use crate::sim::{LeaderSequence, SimConfig};

use super::CliError;

const DEFAULT_N: u32 = 16;
const DEFAULT_F: u32 = 5;
const DEFAULT_ROUNDS: u64 = 100_000;
const DEFAULT_EXACT_ROUNDS: u64 = 16;
const DEFAULT_RUNS: u32 = 10;
const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(name = "hotstuff-perf", version, about = "Round-level performance of HotStuff-family protocols under attack")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Subcommand)]
pub enum Command {
    /// Monte Carlo runs, aggregated per metric.
    Simulate(RunArgs),
    /// Closed-form limits only; no simulation.
    Theory(RunArgs),
    /// Simulation joined with the closed forms.
    Compare(RunArgs),
    /// Exact finite-horizon expectations (enumeration or window DP).
    Exact(RunArgs),
    /// One compare block per f value.
    Sweep(RunArgs),
}

impl Command {
    pub fn kind(&self) -> Subcommand {
        match self {
            Command::Simulate(_) => Subcommand::Simulate,
            Command::Theory(_) => Subcommand::Theory,
            Command::Compare(_) => Subcommand::Compare,
            Command::Exact(_) => Subcommand::Exact,
            Command::Sweep(_) => Subcommand::Sweep,
        }
    }

    pub fn args(&self) -> &RunArgs {
        match self {
            Command::Simulate(a) | Command::Theory(a) | Command::Compare(a) | Command::Exact(a) | Command::Sweep(a) => a,
        }
    }
}

/// Flags shared by every subcommand. The same keys (kebab-case) are
/// accepted in a TOML file passed with `--config`; flags win.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RunArgs {
    /// TOML file with default values for any of these flags.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub f: Option<u32>,
    /// Adversarial leader probability, e.g. `1/3`; replaces f / n.
    #[arg(long, conflicts_with = "beta")]
    pub alpha: Option<String>,
    /// Honest leader probability, e.g. `2/3`.
    #[arg(long)]
    pub beta: Option<String>,
    /// hotstuff, librabft or broadcast-qc.
    #[arg(long)]
    pub variant: Option<String>,
    /// none, silent, forking or delay (resolved per variant).
    #[arg(long)]
    pub attack: Option<String>,
    #[arg(long)]
    pub rounds: Option<u64>,
    #[arg(long)]
    pub runs: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Allow n < 3f + 1 and other out-of-model settings.
    #[arg(long)]
    #[serde(default)]
    pub unsafe_override: bool,
    /// Leader sequence (one H or A per line); bypasses the PRNG.
    #[arg(long)]
    pub leader_file: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    pub format: Option<String>,
    /// Per-round trace CSV of the first run (simulate only).
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Comma-separated f values for sweep.
    #[arg(long, value_delimiter = ',')]
    #[serde(default)]
    pub f_values: Vec<u32>,
    /// enum or dp (exact only).
    #[arg(long)]
    pub mode: Option<String>,
}

impl RunArgs {
    /// Fills every unset flag from `file`.
    fn merged_with(self, file: RunArgs) -> RunArgs {
        let (has_alpha, has_beta) = (self.alpha.is_some(), self.beta.is_some());
        RunArgs {
            config: self.config,
            n: self.n.or(file.n),
            f: self.f.or(file.f),
            alpha: self.alpha.or(if has_beta { None } else { file.alpha }),
            beta: self.beta.or(if has_alpha { None } else { file.beta }),
            variant: self.variant.or(file.variant),
            attack: self.attack.or(file.attack),
            rounds: self.rounds.or(file.rounds),
            runs: self.runs.or(file.runs),
            seed: self.seed.or(file.seed),
            unsafe_override: self.unsafe_override || file.unsafe_override,
            leader_file: self.leader_file.or(file.leader_file),
            output: self.output.or(file.output),
            format: self.format.or(file.format),
            trace: self.trace.or(file.trace),
            f_values: if self.f_values.is_empty() { file.f_values } else { self.f_values },
            mode: self.mode.or(file.mode),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Subcommand {
    Simulate,
    Theory,
    Compare,
    Exact,
    Sweep,
}

impl Subcommand {
    pub fn as_str(self) -> &'static str {
        match self {
            Subcommand::Simulate => "simulate",
            Subcommand::Theory => "theory",
            Subcommand::Compare => "compare",
            Subcommand::Exact => "exact",
            Subcommand::Sweep => "sweep",
        }
    }

    fn simulates(self) -> bool {
        matches!(self, Subcommand::Simulate | Subcommand::Compare | Subcommand::Sweep)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExactMode {
    /// All 2^m leader sequences through the engine.
    Enum,
    /// Window dynamic program.
    Dp,
}

impl ExactMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ExactMode::Enum => "enum",
            ExactMode::Dp => "dp",
        }
    }
}

/// Attack as requested: a concrete strategy or "the delay attack for
/// whichever variant is being run".
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttackChoice {
    Strategy(AttackStrategy),
    Delay,
}

impl AttackChoice {
    pub fn resolve(self, variant: ProtocolVariant) -> AttackStrategy {
        match self {
            AttackChoice::Strategy(s) => s,
            AttackChoice::Delay => AttackStrategy::delay_for(variant),
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            AttackChoice::Strategy(s) => s.as_str(),
            AttackChoice::Delay => "delay",
        }
    }

    fn parse(s: &str) -> Result<Self, CliError> {
        if s.eq_ignore_ascii_case("delay") {
            return Ok(AttackChoice::Delay);
        }
        s.parse().map(AttackChoice::Strategy).map_err(|e: String| CliError::Config(ConfigError::Invalid(e)))
    }
}

impl Serialize for AttackChoice {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

fn ser_variant<S: serde::Serializer>(v: &Option<ProtocolVariant>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.serialize_str(v.as_str()),
        None => s.serialize_none(),
    }
}

/// Fully resolved experiment, echoed into every JSON report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSpec {
    pub subcommand: Subcommand,
    pub n: u32,
    pub f: u32,
    /// Exact rational text of β when given as `--alpha` / `--beta`.
    pub beta: Option<String>,
    /// `None` means every variant (theory only).
    #[serde(serialize_with = "ser_variant")]
    pub variant: Option<ProtocolVariant>,
    /// `None` means every analyzable strategy (theory only).
    pub attack: Option<AttackChoice>,
    pub rounds: u64,
    pub runs: u32,
    pub seed: u64,
    pub unsafe_override: bool,
    pub leader_file: Option<PathBuf>,
    pub f_values: Vec<u32>,
    pub mode: ExactMode,
    pub format: OutputFormat,
    pub output: Option<PathBuf>,
    pub trace: Option<PathBuf>,
}

impl ExperimentSpec {
    /// β as an exact rational: the override if present, else (n - f) / n.
    pub fn beta_exact(&self) -> BigRational {
        self.beta_for_f(self.f)
    }

    pub fn beta_for_f(&self, f: u32) -> BigRational {
        match &self.beta {
            Some(b) => parse_rational(b).expect("validated at parse time"),
            None => BigRational::new((self.n as i64 - f as i64).into(), (self.n as i64).into()),
        }
    }

    pub fn variants(&self) -> Vec<ProtocolVariant> {
        match self.variant {
            Some(v) => vec![v],
            None => ProtocolVariant::ALL.to_vec(),
        }
    }

    /// Strategies to evaluate for `variant`; all analyzable ones when no
    /// attack was requested.
    pub fn strategies(&self, variant: ProtocolVariant) -> Vec<AttackStrategy> {
        match self.attack {
            Some(a) => vec![a.resolve(variant)],
            None => vec![AttackStrategy::None, AttackStrategy::Forking, AttackStrategy::delay_for(variant)],
        }
    }

    /// Simulation config for one (variant, f) point.
    pub fn sim_config(&self, variant: ProtocolVariant, f: u32) -> SimConfig {
        let strategy = self.attack.unwrap_or(AttackChoice::Strategy(AttackStrategy::Forking)).resolve(variant);
        let mut cfg = SimConfig::new(self.n, f, variant, strategy)
            .with_rounds(self.rounds)
            .with_runs(self.runs)
            .with_seed(self.seed);
        cfg.unsafe_override = self.unsafe_override;
        if self.beta.is_some() {
            cfg.alpha = Some(1.0 - crate::analysis::Scalar::to_f64(&self.beta_for_f(f)));
        }
        cfg
    }

    pub fn leaders(&self) -> Result<Option<LeaderSequence>, ConfigError> {
        self.leader_file.as_deref().map(LeaderSequence::read).transpose()
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Config(ConfigError::Invalid(msg.into()))
}

fn read_file_config(path: &Path) -> Result<RunArgs, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| invalid(format!("config {}: {e}", path.display())))
}

/// Merges flags over the optional config file, applies defaults and
/// validates the result.
pub fn parse_config(cli: Cli) -> Result<ExperimentSpec, CliError> {
    let kind = cli.command.kind();
    let mut args = cli.command.args().clone();
    if let Some(path) = args.config.clone() {
        args = args.merged_with(read_file_config(&path)?);
    }

    let beta = match (&args.alpha, &args.beta) {
        (Some(a), _) => {
            let a = parse_rational(a).ok_or_else(|| invalid(format!("cannot parse alpha `{a}`")))?;
            Some(BigRational::one() - a)
        }
        (None, Some(b)) => Some(parse_rational(b).ok_or_else(|| invalid(format!("cannot parse beta `{b}`")))?),
        (None, None) => None,
    };
    if let Some(b) = &beta {
        let upper_ok = if args.unsafe_override || kind == Subcommand::Theory || kind == Subcommand::Exact {
            *b <= BigRational::one()
        } else {
            *b <= BigRational::one() && *b > BigRational::zero()
        };
        if !(*b > BigRational::zero() && upper_ok) {
            return Err(CliError::Analysis(AnalysisError::BetaOutOfRange(b.to_string())));
        }
    }

    let variant = args
        .variant
        .as_deref()
        .map(|v| v.parse::<ProtocolVariant>().map_err(invalid))
        .transpose()?;
    let attack = args.attack.as_deref().map(AttackChoice::parse).transpose()?;
    let variant = match kind {
        Subcommand::Theory => variant,
        _ => Some(variant.unwrap_or(ProtocolVariant::HotStuffPipelined)),
    };
    let attack = match kind {
        Subcommand::Theory => attack,
        _ => Some(attack.unwrap_or(AttackChoice::Strategy(AttackStrategy::Forking))),
    };

    let format = match args.format.as_deref().map(str::to_ascii_lowercase).as_deref() {
        None | Some("csv") => OutputFormat::Csv,
        Some("json") => OutputFormat::Json,
        Some(other) => return Err(invalid(format!("unknown format `{other}` (expected csv or json)"))),
    };
    let default_rounds = if kind == Subcommand::Exact { DEFAULT_EXACT_ROUNDS } else { DEFAULT_ROUNDS };
    let mut rounds = args.rounds.unwrap_or(default_rounds);
    let mode = match args.mode.as_deref().map(str::to_ascii_lowercase).as_deref() {
        Some("enum") => ExactMode::Enum,
        Some("dp") => ExactMode::Dp,
        None if rounds <= MAX_ENUMERATION_ROUNDS => ExactMode::Enum,
        None => ExactMode::Dp,
        Some(other) => return Err(invalid(format!("unknown exact mode `{other}` (expected enum or dp)"))),
    };

    let mut runs = args.runs.unwrap_or(DEFAULT_RUNS);
    if let Some(path) = &args.leader_file {
        if !matches!(kind, Subcommand::Simulate | Subcommand::Compare) {
            return Err(invalid("--leader-file only applies to simulate and compare"));
        }
        let leaders = LeaderSequence::read(path)?;
        rounds = leaders.len() as u64;
        runs = 1;
    }
    if args.trace.is_some() && kind != Subcommand::Simulate {
        return Err(invalid("--trace only applies to simulate"));
    }

    let n = args.n.unwrap_or(DEFAULT_N);
    let f = args.f.unwrap_or(if args.n.is_some() { 0 } else { DEFAULT_F });
    let mut f_values = args.f_values.clone();
    if kind == Subcommand::Sweep {
        if beta.is_some() {
            return Err(invalid("sweep derives alpha from f / n; drop --alpha / --beta"));
        }
        if f_values.is_empty() {
            f_values = (0..=n.saturating_sub(1) / 3).collect();
        }
        f_values.sort_unstable();
        f_values.dedup();
    } else if !f_values.is_empty() {
        return Err(invalid("--f-values only applies to sweep"));
    }

    let spec = ExperimentSpec {
        subcommand: kind,
        n,
        f,
        beta: beta.as_ref().map(|b| b.to_string()),
        variant,
        attack,
        rounds,
        runs,
        seed: args.seed.unwrap_or(DEFAULT_SEED),
        unsafe_override: args.unsafe_override,
        leader_file: args.leader_file,
        f_values,
        mode,
        format,
        output: args.output,
        trace: args.trace,
    };
    validate(&spec)?;
    Ok(spec)
}

fn validate(spec: &ExperimentSpec) -> Result<(), CliError> {
    if spec.n == 0 {
        return Err(ConfigError::ZeroNodes.into());
    }
    if spec.beta.is_none() {
        if spec.f > spec.n {
            return Err(ConfigError::TooManyFaulty { n: spec.n, f: spec.f }.into());
        }
        if spec.f == spec.n && !matches!(spec.subcommand, Subcommand::Sweep) {
            return Err(ConfigError::AlphaOutOfRange(1.0).into());
        }
    }
    match spec.subcommand {
        Subcommand::Simulate | Subcommand::Compare => {
            let variant = spec.variant.expect("defaulted");
            spec.sim_config(variant, spec.f).validate()?;
        }
        Subcommand::Sweep => {
            let variant = spec.variant.expect("defaulted");
            for &f in &spec.f_values {
                spec.sim_config(variant, f).validate()?;
            }
        }
        Subcommand::Theory => {
            if !spec.unsafe_override && spec.beta.is_none() && (spec.n as u64) < 3 * spec.f as u64 + 1 {
                return Err(ConfigError::ResilienceBound { n: spec.n, f: spec.f }.into());
            }
            for v in spec.variants() {
                for s in spec.strategies(v) {
                    s.check_variant(v)?;
                }
            }
        }
        Subcommand::Exact => {
            if !spec.unsafe_override && spec.beta.is_none() && (spec.n as u64) < 3 * spec.f as u64 + 1 {
                return Err(ConfigError::ResilienceBound { n: spec.n, f: spec.f }.into());
            }
            let variant = spec.variant.expect("defaulted");
            spec.attack.expect("defaulted").resolve(variant).check_variant(variant)?;
            if spec.rounds == 0 {
                return Err(ConfigError::TooFewRounds(0).into());
            }
            if spec.mode == ExactMode::Enum && spec.rounds > MAX_ENUMERATION_ROUNDS {
                return Err(CliError::Analysis(AnalysisError::HorizonTooLarge {
                    m: spec.rounds,
                    max: MAX_ENUMERATION_ROUNDS,
                }));
            }
        }
    }
    debug_assert!(spec.subcommand.simulates() || spec.trace.is_none());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<ExperimentSpec, CliError> {
        let cli = Cli::try_parse_from(std::iter::once("hotstuff-perf").chain(args.iter().copied()))
            .map_err(|e| CliError::Usage(e.to_string()))?;
        parse_config(cli)
    }

    #[test]
    fn reference_invocation() {
        let spec = parse(&[
            "simulate", "--n", "16", "--f", "5", "--variant", "hotstuff", "--attack", "forking", "--rounds", "100000",
            "--runs", "10", "--seed", "42",
        ])
        .unwrap();
        assert_eq!(spec.n, 16);
        assert_eq!(spec.f, 5);
        assert_eq!(spec.variant, Some(ProtocolVariant::HotStuffPipelined));
        assert_eq!(spec.attack, Some(AttackChoice::Strategy(AttackStrategy::Forking)));
        assert_eq!((spec.rounds, spec.runs, spec.seed), (100_000, 10, 42));
        assert_eq!(spec.beta_exact(), BigRational::new(11.into(), 16.into()));
    }

    #[test]
    fn resilience_violation_is_a_config_error() {
        let err = parse(&["simulate", "--n", "16", "--f", "6"]).unwrap_err();
        assert!(matches!(err, CliError::Config(ConfigError::ResilienceBound { n: 16, f: 6 })));
        assert_eq!(err.exit_code(), 2);
        assert!(parse(&["simulate", "--n", "16", "--f", "6", "--unsafe-override"]).is_ok());
    }

    #[test]
    fn delay_resolves_per_variant() {
        let spec = parse(&["compare", "--variant", "librabft", "--attack", "delay"]).unwrap();
        let cfg = spec.sim_config(ProtocolVariant::LibraBft, spec.f);
        assert_eq!(cfg.strategy, AttackStrategy::DelayLibra);
        let err = parse(&["compare", "--variant", "librabft", "--attack", "delay-hotstuff"]).unwrap_err();
        assert!(matches!(err, CliError::Config(ConfigError::StrategyVariantMismatch { .. })));
    }

    #[test]
    fn alpha_flag_is_exact() {
        let spec = parse(&["theory", "--alpha", "1/3"]).unwrap();
        assert_eq!(spec.beta_exact(), BigRational::new(2.into(), 3.into()));
        assert!(parse(&["theory", "--alpha", "one third"]).is_err());
    }

    #[test]
    fn leader_file_sets_horizon() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.txt");
        LeaderSequence::from_bits(vec![true; 37]).write(&path).unwrap();
        let spec = parse(&["simulate", "--leader-file", path.to_str().unwrap(), "--runs", "5"]).unwrap();
        assert_eq!(spec.rounds, 37);
        assert_eq!(spec.runs, 1);
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("exp.toml");
        std::fs::write(&path, "n = 16\nf = 4\nvariant = \"librabft\"\nrounds = 500\nruns = 3\n").unwrap();
        let spec = parse(&["simulate", "--config", path.to_str().unwrap(), "--f", "2"]).unwrap();
        assert_eq!((spec.n, spec.f, spec.rounds, spec.runs), (16, 2, 500, 3));
        assert_eq!(spec.variant, Some(ProtocolVariant::LibraBft));

        std::fs::write(&path, "bogus = 1\n").unwrap();
        assert!(parse(&["simulate", "--config", path.to_str().unwrap()]).is_err());
    }

    #[test]
    fn sweep_grid() {
        let spec = parse(&["sweep", "--n", "16"]).unwrap();
        assert_eq!(spec.f_values, vec![0, 1, 2, 3, 4, 5]);
        assert!(parse(&["sweep", "--n", "16", "--f-values", "0,6"]).is_err());
        assert!(parse(&["sweep", "--n", "16", "--f-values", "0,6", "--unsafe-override"]).is_ok());
    }

    #[test]
    fn exact_horizon_limit() {
        assert_eq!(parse(&["exact", "--rounds", "16"]).unwrap().mode, ExactMode::Enum);
        assert_eq!(parse(&["exact", "--rounds", "200"]).unwrap().mode, ExactMode::Dp);
        assert!(parse(&["exact", "--rounds", "30", "--mode", "enum"]).is_err());
    }
}
