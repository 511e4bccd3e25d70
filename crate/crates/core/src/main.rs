use clap::{Args, Parser, Subcommand};
use sqss::adversary::TimingMode;
use sqss::harness::{
    parse_config, parse_targets, report_csv, report_json, run_experiment, selftest, verify_state,
    AttackSpec, CheckLine, ExperimentSpec, HarnessError, OutputSpec, ReportFormat,
};
use sqss::protocol::{ProtocolVariant, SessionConfig};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

#[derive(Parser)]
#[command(
    name = "sqss",
    version,
    about = "Semi-quantum secret sharing simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo experiment and compare it with the analytic rates.
    Run(Box<RunArgs>),
    /// Check the shared state and the measurement bases.
    VerifyState,
    /// State checks plus a short statistical run of every attack.
    Selftest,
}

#[derive(Args)]
struct RunArgs {
    /// Flat `key = value` file with the same keys as the long flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// randomization | measure-resend
    #[arg(long)]
    variant: Option<String>,
    /// honest | dishonest-bob | eve-bell | eve-cnot | eve-delay
    #[arg(long)]
    attack: Option<String>,
    /// Attacked positions for dishonest-bob and eve-bell.
    #[arg(long)]
    positions: Option<usize>,
    /// Triplets per session.
    #[arg(long)]
    triplets: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    /// Base seed; trial i uses seed + i.
    #[arg(long)]
    seed: Option<u64>,
    /// compliant | broken
    #[arg(long)]
    timing: Option<String>,
    /// Parties whose qubits eve-cnot copies: bob | charlie | both
    #[arg(long)]
    targets: Option<String>,
    /// Abort threshold on the check error rates.
    #[arg(long)]
    threshold: Option<f64>,
    /// Report path; the report goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// json | csv
    #[arg(long)]
    format: Option<String>,
    /// Write the public transcript and round records of trial 0 as JSON lines.
    #[arg(long)]
    transcript: Option<PathBuf>,
}

const CONFIG_KEYS: [&str; 12] = [
    "variant",
    "attack",
    "positions",
    "triplets",
    "trials",
    "seed",
    "timing",
    "targets",
    "threshold",
    "out",
    "format",
    "transcript",
];

struct Resolver {
    file: BTreeMap<String, String>,
}

impl Resolver {
    fn get<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, HarnessError>
    where
        T::Err: std::fmt::Display,
    {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.file.get(key) {
            Some(raw) => raw
                .parse()
                .map_err(|e| HarnessError::Config(format!("{key} = {raw}: {e}"))),
            None => Ok(default),
        }
    }

    fn path(&self, flag: Option<PathBuf>, key: &str) -> Option<PathBuf> {
        flag.or_else(|| self.file.get(key).map(PathBuf::from))
    }
}

fn parse_format(s: &str) -> Result<ReportFormat, HarnessError> {
    match s {
        "json" => Ok(ReportFormat::Json),
        "csv" => Ok(ReportFormat::Csv),
        other => Err(HarnessError::InvalidParameter(format!(
            "unknown format {other:?}"
        ))),
    }
}

fn build_spec(args: RunArgs) -> Result<(ExperimentSpec, ReportFormat), HarnessError> {
    let file = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
                path: path.clone(),
                source,
            })?;
            parse_config(&text)?
        }
        None => BTreeMap::new(),
    };
    if let Some(key) = file.keys().find(|k| !CONFIG_KEYS.contains(&k.as_str())) {
        return Err(HarnessError::Config(format!("unknown key {key:?}")));
    }
    let r = Resolver { file };
    let variant: ProtocolVariant = r
        .get::<String>(args.variant, "variant", "randomization".into())?
        .parse()?;
    let timing: TimingMode = r
        .get::<String>(args.timing, "timing", "compliant".into())?
        .parse()?;
    let targets = parse_targets(&r.get::<String>(args.targets, "targets", "both".into())?)?;
    let attack = AttackSpec::from_label(
        &r.get::<String>(args.attack, "attack", "honest".into())?,
        r.get(args.positions, "positions", 1)?,
        targets,
        timing,
    )?;
    let format = parse_format(&r.get::<String>(args.format, "format", "json".into())?)?;
    let session = SessionConfig {
        variant,
        n_triplets: r.get(args.triplets, "triplets", 64)?,
        error_threshold: r.get(args.threshold, "threshold", 0.0)?,
        announce_receipt_before_disclosure: timing == TimingMode::Compliant,
        seed: r.get(args.seed, "seed", 0)?,
        ..SessionConfig::default()
    };
    let mut spec = ExperimentSpec::new(session, attack, r.get(args.trials, "trials", 100)?);
    spec.output = r
        .path(args.out, "out")
        .map(|path| OutputSpec { path, format });
    spec.transcript = r.path(args.transcript, "transcript");
    Ok((spec, format))
}

fn run(args: RunArgs) -> Result<bool, HarnessError> {
    let (spec, format) = build_spec(args)?;
    let report = run_experiment(&spec)?;
    if spec.output.is_none() {
        let bytes = match format {
            ReportFormat::Json => report_json(&report).into_bytes(),
            ReportFormat::Csv => report_csv(&report),
        };
        // A closed stdout is not worth a failure exit.
        let _ = std::io::stdout().write_all(&bytes);
    }
    for c in &report.comparisons {
        eprintln!("{c}");
    }
    Ok(report.pass)
}

fn print_checks(lines: &[CheckLine]) -> bool {
    for line in lines {
        println!("{line}");
    }
    lines.iter().all(|l| l.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => run(*args),
        Command::VerifyState => Ok(print_checks(&verify_state())),
        Command::Selftest => selftest().map(|lines| print_checks(&lines)),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
