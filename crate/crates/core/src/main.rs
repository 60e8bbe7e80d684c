use std::fs;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qmeasure::scenarios::{
    cmd_check, cmd_figure, cmd_qfi, cmd_sweep, CheckTarget, CommandOutput, Figure, RunConfig,
};
use qmeasure::{Error, Result};

/// Quantum Fisher information of measurement-encoded qubit parameters.
///
/// Exit status: 0 when the tested claim held, 2 when it was violated, 1 on
/// any execution error.
#[derive(Parser, Debug)]
#[command(name = "qmeasure", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Regenerate figure data (1a, 1b or 2) as CSV and test its claim.
    Figure {
        which: String,
        #[command(flatten)]
        common: Common,
    },
    /// Run a case check: I, II, III, IV, theorem2-audit or commutation.
    Check {
        target: String,
        #[command(flatten)]
        common: Common,
    },
    /// Print QFI, QFIM or error values for one point at full precision.
    Qfi {
        #[command(flatten)]
        common: Common,
        /// alpha-est, beta-est, theta-beta-est, or a case I-IV.
        #[arg(long)]
        family: Option<String>,
        /// Probe as r,phi1,phi2 (default |+>).
        #[arg(long, allow_hyphen_values = true)]
        probe: Option<String>,
        /// or, of, branch1, branch2 or forgotten.
        #[arg(long)]
        mode: Option<String>,
        /// Minimize the or/of error over probes.
        #[arg(long)]
        optimize: bool,
    },
    /// Sweep a single-parameter scenario and write CSV.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// alpha-est, beta-est or theta-beta-est.
        #[arg(long)]
        family: Option<String>,
    },
}

#[derive(Args, Debug, Default)]
struct Common {
    /// Comma-separated alpha values.
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<String>,
    /// Points on the swept axis.
    #[arg(long)]
    grid: Option<String>,
    /// Fixed margin kept from both ends of the swept axis.
    #[arg(long)]
    margin: Option<String>,
    #[arg(long)]
    relative_margin: Option<String>,
    /// Optimizer budget RxPxQ[:ITER].
    #[arg(long)]
    budget: Option<String>,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Number of random instances for checks.
    #[arg(long)]
    instances: Option<String>,
    /// key=value configuration file; flags override it.
    #[arg(long)]
    config: Option<String>,
}

fn flags_config(common: &Common, extra: &[(&str, Option<String>)]) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    let pairs = [
        ("alpha", &common.alpha),
        ("beta", &common.beta),
        ("theta", &common.theta),
        ("grid", &common.grid),
        ("margin", &common.margin),
        ("relative_margin", &common.relative_margin),
        ("budget", &common.budget),
        ("out", &common.out),
        ("seed", &common.seed),
        ("instances", &common.instances),
    ];
    for (k, v) in pairs {
        if let Some(v) = v {
            cfg.set(k, v)?;
        }
    }
    for (k, v) in extra {
        if let Some(v) = v {
            cfg.set(k, v)?;
        }
    }
    Ok(cfg)
}

fn load(common: &Common, extra: &[(&str, Option<String>)]) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Io(format!("cannot read config {path}: {e}")))?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::default(),
    };
    cfg.merge(&flags_config(common, extra)?);
    Ok(cfg)
}

fn emit(text: &str, cfg: &RunConfig) -> Result<()> {
    match &cfg.out {
        Some(path) => {
            fs::write(path, text).map_err(|e| Error::Io(format!("cannot write {path}: {e}")))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn finish(out: CommandOutput, cfg: &RunConfig) -> Result<ExitCode> {
    emit(&out.text, cfg)?;
    eprintln!("{}", out.summary);
    Ok(match out.claim {
        Some(false) => ExitCode::from(2),
        _ => ExitCode::SUCCESS,
    })
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Figure { which, common } => {
            let cfg = load(&common, &[])?;
            let fig: Figure = which.parse()?;
            finish(cmd_figure(fig, &cfg)?, &cfg)
        }
        Command::Check { target, common } => {
            let cfg = load(&common, &[])?;
            let target: CheckTarget = target.parse()?;
            finish(cmd_check(target, &cfg)?, &cfg)
        }
        Command::Sweep { common, family } => {
            let cfg = load(&common, &[("family", family)])?;
            finish(cmd_sweep(&cfg)?, &cfg)
        }
        Command::Qfi {
            common,
            family,
            probe,
            mode,
            optimize,
        } => {
            let cfg = load(
                &common,
                &[
                    ("family", family),
                    ("probe", probe),
                    ("mode", mode),
                    ("optimize", optimize.then(|| "true".to_string())),
                ],
            )?;
            let mut line = cmd_qfi(&cfg)?;
            line.push('\n');
            emit(&line, &cfg)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    // clap's own usage-error status is 2, which is reserved for violated claims
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
