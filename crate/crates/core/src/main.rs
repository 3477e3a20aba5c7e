//! Command-line front end: run a campaign, write records.
//!
//! Exit codes: 0 success, 2 configuration problems (also clap's own code for
//! malformed flags), 3 campaign failure (more than 10% of trials died),
//! 1 anything else.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hybeam::campaign::{run_campaign, CampaignKind};
use hybeam::results::{write_records, OutputFormat};
use hybeam::scenario::{ScenarioConfig, Variant};
use hybeam::{Error, Result};

#[derive(Parser)]
#[command(
    name = "hybeam",
    version,
    about = "Link-level simulator for multiuser mmWave MIMO-OFDM with hybrid precoding"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-user rate and SINR plus sum rate per trial.
    Rate(RateArgs),
    /// Rate records plus outage probability and epsilon-rate aggregates.
    Outage(OutageArgs),
    /// Coded or uncoded bit-error-rate measurement over full frames.
    Ber(BerArgs),
    /// Energy efficiency versus number of served users.
    Energy(EnergyArgs),
}

#[derive(Args)]
struct Common {
    /// Scenario: preset name (mmwave, sub6, mode1..mode4) or a TOML file.
    #[arg(long, default_value = "mmwave")]
    scenario: String,

    /// SNR sweep in dB: a single value or LO:STEP:HI (inclusive).
    #[arg(long, allow_hyphen_values = true)]
    snr: Option<String>,

    /// Monte-Carlo trials per SNR point.
    #[arg(long)]
    trials: Option<usize>,

    /// Master seed; every record stays reproducible from it.
    #[arg(long)]
    seed: Option<u64>,

    /// Precoder: v1-mrt, v1-zf, v1-mmse, v2-rate, v2-sinr, or exhaustive.
    #[arg(long)]
    variant: Option<String>,

    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,

    /// Worker threads; defaults to one per core.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct RateArgs {
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct OutageArgs {
    #[command(flatten)]
    common: Common,

    /// Target rates (bits/s/Hz) for outage probability; repeatable.
    #[arg(long = "target", default_values_t = vec![1.0, 2.0, 4.0])]
    targets: Vec<f64>,

    /// Outage levels for the epsilon-rate; repeatable.
    #[arg(long = "epsilon", default_values_t = vec![0.1])]
    epsilons: Vec<f64>,
}

#[derive(Args)]
struct BerArgs {
    #[command(flatten)]
    common: Common,

    /// Override the scenario's receiver speed (km/h).
    #[arg(long)]
    velocity: Option<f64>,

    /// Frames simulated per channel draw.
    #[arg(long, default_value_t = 1)]
    frames: usize,

    /// Send raw QPSK instead of LDPC-coded frames.
    #[arg(long)]
    uncoded: bool,
}

#[derive(Args)]
struct EnergyArgs {
    #[command(flatten)]
    common: Common,

    /// Sweep served users 1..=N; defaults to the scenario's RF chain count.
    #[arg(long)]
    users: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> OutputFormat {
        match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        }
    }
}

/// Parse `--snr`: one value, or an inclusive LO:STEP:HI grid.
fn parse_snr(text: &str) -> Result<Vec<f64>> {
    let bad = |msg: &str| Error::Config(format!("--snr '{text}': {msg}"));
    let num = |s: &str| -> Result<f64> {
        s.trim().parse::<f64>().map_err(|_| bad(&format!("'{s}' is not a number")))
    };
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [single] => Ok(vec![num(single)?]),
        [lo, step, hi] => {
            let (lo, step, hi) = (num(lo)?, num(step)?, num(hi)?);
            if !(step > 0.0) {
                return Err(bad("step must be positive"));
            }
            if hi < lo {
                return Err(bad("upper bound is below the lower bound"));
            }
            let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
            Ok((0..count).map(|i| lo + step * i as f64).collect())
        }
        _ => Err(bad("expected VALUE or LO:STEP:HI")),
    }
}

/// Load the scenario and apply the shared command-line overrides.
fn configure(common: &Common) -> Result<ScenarioConfig> {
    let mut cfg = ScenarioConfig::load(&common.scenario)?;
    if let Some(text) = &common.snr {
        cfg.snr_db_sweep = parse_snr(text)?;
    }
    if let Some(trials) = common.trials {
        cfg.trials = trials;
    }
    if let Some(seed) = common.seed {
        cfg.master_seed = seed;
    }
    if let Some(name) = &common.variant {
        cfg.variant = Variant::from_name(name).ok_or_else(|| {
            Error::Config(format!(
                "--variant '{name}': expected one of v1-mrt, v1-zf, v1-mmse, \
                 v2-rate, v2-sinr, exhaustive"
            ))
        })?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    let (common, cfg, kind) = match &cli.command {
        Command::Rate(args) => (&args.common, configure(&args.common)?, CampaignKind::Rate),
        Command::Outage(args) => (
            &args.common,
            configure(&args.common)?,
            CampaignKind::Outage { targets: args.targets.clone(), epsilons: args.epsilons.clone() },
        ),
        Command::Ber(args) => {
            let mut cfg = configure(&args.common)?;
            if let Some(v) = args.velocity {
                cfg.velocity_kmh = v;
                cfg.validate()?;
            }
            (
                &args.common,
                cfg,
                CampaignKind::Ber { frames_per_trial: args.frames, coded: !args.uncoded },
            )
        }
        Command::Energy(args) => {
            let cfg = configure(&args.common)?;
            let max_users = args.users.unwrap_or(cfg.n_rf);
            if max_users == 0 {
                return Err(Error::Config("--users must be positive (got 0)".into()));
            }
            (
                &args.common,
                cfg,
                CampaignKind::Energy { user_counts: (1..=max_users).collect() },
            )
        }
    };

    let records = run_campaign(&cfg, &kind, common.workers)?;
    write_records(&records, common.out.as_deref(), common.format.into())?;
    match &common.out {
        Some(path) => eprintln!("wrote {} records to {}", records.len(), path.display()),
        None => eprintln!("wrote {} records to stdout", records.len()),
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code() as i32);
    }
}
