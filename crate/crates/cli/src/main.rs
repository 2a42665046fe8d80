// Copyright 2026 The crprecis Authors. Licensed under Apache-2.0.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use crprecis::Hierarchy;
use crprecis_cli::{
    adversarial_stream, reconstruction_report, run_query, CliError, Command, ErrorReport, Inputs,
    Options, StreamFile,
};

/// Build CR-precis sketches over stream files and check every answer
/// against the exact frequencies.
#[derive(Parser)]
#[command(name = "crprecis", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Args)]
struct Flags {
    /// Stream file: header `N <size> MODEL <strict|general>`, then `<item> <delta>` lines.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Second stream file for inner products.
    #[arg(long, global = true)]
    input2: Option<PathBuf>,
    /// Table height: every table size is a prime >= k.
    #[arg(long, global = true)]
    k: Option<u64>,
    /// Number of tables.
    #[arg(long, global = true)]
    t: Option<usize>,
    /// Accuracy parameter; used when --k/--t are not given.
    #[arg(long, global = true)]
    s: Option<u64>,
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    #[arg(long, global = true)]
    phi: Option<f64>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Edge file, one `child parent` pair per line; leaves are item numbers.
    #[arg(long, global = true)]
    hierarchy: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a sketch and check that every table holds the stream mass.
    Build,
    /// Point queries; defaults to every item with nonzero frequency.
    Point { items: Vec<u64> },
    /// Range sums over inclusive `l r` pairs; defaults to the whole domain.
    Range { bounds: Vec<u64> },
    /// Suffix-sum quantiles for --phi within --epsilon (default phi/4).
    Quantiles,
    /// Items with frequency at least m/s.
    Frequent,
    /// Hierarchical heavy hitters over --hierarchy (default: binary tree).
    Hhh,
    /// Inner product of --input and --input2.
    Inner,
    /// Entropy within factor alpha/(1-epsilon).
    Entropy,
    /// Emit the leveled instance for --s and --seed as a stream file.
    Adversarial {
        #[arg(long, default_value_t = 1 << 16)]
        n: u64,
        /// Report whether reconstruction recovers every level instead.
        #[arg(long)]
        check: bool,
    },
    /// Run every applicable query with default parameters; hierarchical
    /// heavy hitters only with --hierarchy.
    VerifyAll,
}

fn load(flags: &Flags) -> Result<Inputs, CliError> {
    let path = flags.input.as_ref().ok_or_else(|| CliError::Usage("missing --input".into()))?;
    let (file, oracle) = StreamFile::ingest(path)?;
    let second = flags.input2.as_deref().map(StreamFile::ingest).transpose()?;
    let hierarchy = match &flags.hierarchy {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
            Some(Hierarchy::parse(&text, file.n)?)
        }
        None => None,
    };
    Ok(Inputs { file, oracle, second, hierarchy })
}

fn run(cli: Cli) -> Result<ErrorReport, CliError> {
    let f = &cli.flags;
    let opts = Options { k: f.k, t: f.t, s: f.s, epsilon: f.epsilon, phi: f.phi, alpha: f.alpha };
    let command = match cli.command {
        Cmd::Adversarial { n, check } => {
            let s = f.s.ok_or_else(|| CliError::Usage("missing --s".into()))? as usize;
            if check {
                let report = reconstruction_report(s, n, f.seed)?;
                print!("{}", report.render());
                return Ok(report);
            }
            let (file, comments) = adversarial_stream(s, n, f.seed)?;
            print!("{}", file.render(&comments));
            return Ok(ErrorReport::default());
        }
        Cmd::Build => Command::Build,
        Cmd::Point { items } => Command::Point(items),
        Cmd::Range { bounds } => {
            if bounds.len() % 2 != 0 {
                return Err(CliError::Usage("range bounds come in `l r` pairs".into()));
            }
            Command::Range(bounds.chunks(2).map(|p| (p[0], p[1])).collect())
        }
        Cmd::Quantiles => Command::Quantiles,
        Cmd::Frequent => Command::Frequent,
        Cmd::Hhh => Command::Hhh,
        Cmd::Inner => Command::Inner,
        Cmd::Entropy => Command::Entropy,
        Cmd::VerifyAll => Command::VerifyAll,
    };
    let report = run_query(&command, &load(f)?, &opts)?;
    print!("{}", report.render());
    Ok(report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let adversarial_emit = matches!(cli.command, Cmd::Adversarial { check: false, .. });
    match run(cli) {
        Ok(report) => {
            if adversarial_emit || report.all_ok() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
