mod commands;
mod spec;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ctxrsa::diagnostic::ProbeConfig;
use ctxrsa::grammar::DEFAULT_ENUMERATION_LIMIT;
use ctxrsa::{Error, ErrorKind, Result, Role};

use crate::commands::{NormalityArgs, ProbeArgs, SynthArgs};
use crate::spec::Overrides;

#[derive(Parser)]
#[command(name = "ctxrsa", version, about = "Representational similarity analysis over contextual embeddings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a role-annotated corpus from a template grammar.
    Generate {
        /// Grammar JSON file, or `builtin:<name>`.
        #[arg(long)]
        grammar: PathBuf,
        /// Sentences to draw before duplicate removal.
        #[arg(long, default_value_t = 2000)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Enumerate every sentence instead of sampling.
        #[arg(long)]
        exhaustive: bool,
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_LIMIT)]
        limit: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an RSA experiment described by a TOML spec.
    Run {
        #[arg(long)]
        spec: PathBuf,
        /// Overrides `rsa.seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides `rsa.n` (sentences per sample).
        #[arg(long)]
        n: Option<usize>,
        /// Overrides `rsa.m` (number of samples).
        #[arg(long)]
        m: Option<usize>,
        /// Overrides the spec's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Shapiro-Wilk normality tests over stored embeddings.
    Normality {
        #[arg(long)]
        dataset: PathBuf,
        /// Check the dataset against this corpus first.
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Comma-separated roles; all stored roles by default.
        #[arg(long, value_delimiter = ',')]
        roles: Vec<Role>,
        /// Also test a random subsample of this many components.
        #[arg(long)]
        subsample: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Logistic-regression probes predicting a role's word from another token's vector.
    Probe {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        lexicon: PathBuf,
        #[arg(long)]
        lexicon_dim: Option<usize>,
        /// Role whose contextual vector is the probe input.
        #[arg(long)]
        target: Role,
        /// Comma-separated roles, one probe each.
        #[arg(long, value_delimiter = ',', required = true)]
        positive: Vec<Role>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Inverse L2 regularization strength.
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Normal Q-Q data for one embedding.
    Qq {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        sentence: u32,
        #[arg(long)]
        role: Role,
        /// Directory for CSV and SVG output; CSV goes to stdout otherwise.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a synthetic dataset and lexicon for a corpus.
    Synth {
        #[arg(long)]
        corpus: PathBuf,
        /// EMB1 output path.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        lexicon_out: Option<PathBuf>,
        #[arg(long, default_value_t = 300)]
        lexicon_dim: usize,
        /// Independent Gaussian records, e.g. `verb:768,sentence:768`.
        #[arg(long, value_delimiter = ',', value_parser = parse_role_dim)]
        roles: Vec<(Role, u32)>,
        /// `source:target`: target records are the source word's lexicon vector plus noise.
        #[arg(long, value_parser = parse_role_pair)]
        planted: Option<(Role, Role)>,
        #[arg(long, default_value_t = 0.5)]
        epsilon: f32,
        #[arg(long, default_value_t = 300)]
        noise_dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn parse_role_dim(s: &str) -> std::result::Result<(Role, u32), String> {
    let (r, d) = s.split_once(':').ok_or_else(|| format!("expected role:dim, got {s:?}"))?;
    let role = r.parse::<Role>().map_err(|e| e.to_string())?;
    let dim = d.parse::<u32>().map_err(|e| format!("bad dimension {d:?}: {e}"))?;
    Ok((role, dim))
}

fn parse_role_pair(s: &str) -> std::result::Result<(Role, Role), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected source:target, got {s:?}"))?;
    Ok((a.parse().map_err(|e: Error| e.to_string())?, b.parse().map_err(|e: Error| e.to_string())?))
}

/// Returns the output directory that should receive the run log, if any.
fn dispatch(command: Command) -> Result<Option<PathBuf>> {
    match command {
        Command::Generate { grammar, count, seed, exhaustive, limit, out } => {
            commands::generate(&grammar, count, seed, exhaustive, limit, &out)?;
            Ok(None)
        }
        Command::Run { spec, seed, n, m, out } => commands::run(&spec, Overrides { n, m, seed }, out).map(Some),
        Command::Normality { dataset, corpus, roles, subsample, seed, alpha, out } => {
            commands::normality(NormalityArgs { dataset, corpus, roles, subsample, seed, alpha, out })
        }
        Command::Probe { corpus, dataset, lexicon, lexicon_dim, target, positive, seed, c, out } => {
            let config = ProbeConfig { split_seed: seed, c, ..Default::default() };
            commands::probe(ProbeArgs { corpus, dataset, lexicon, lexicon_dim, target, positives: positive, config, out })
        }
        Command::Qq { dataset, sentence, role, out } => commands::qq(&dataset, sentence, role, out),
        Command::Synth { corpus, out, lexicon_out, lexicon_dim, roles, planted, epsilon, noise_dim, seed } => {
            commands::synth(SynthArgs { corpus, out, lexicon_out, lexicon_dim, roles, planted, epsilon, noise_dim, seed })?;
            Ok(None)
        }
    }
}

/// Timestamps stay out of the results so reruns are byte-identical.
fn write_log(dir: &std::path::Path, started: chrono::DateTime<chrono::Utc>) {
    let args: Vec<String> = std::env::args().collect();
    let log = format!(
        "ctxrsa {}\ncommand: {}\nstarted: {}\nfinished: {}\n",
        env!("CARGO_PKG_VERSION"),
        args.join(" "),
        started.to_rfc3339(),
        chrono::Utc::now().to_rfc3339()
    );
    if let Err(e) = std::fs::write(dir.join("run.log"), log) {
        eprintln!("warning: could not write run.log: {e}");
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let started = chrono::Utc::now();
    match dispatch(cli.command) {
        Ok(dir) => {
            if let Some(dir) = dir {
                write_log(&dir, started);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.kind() {
                ErrorKind::Config => 1,
                ErrorKind::Integrity => 2,
                ErrorKind::Numeric => 3,
            })
        }
    }
}
