//! `netvar`: variability of bootstrapped network structures.
//!
//! ```text
//! netvar moments|stats|test|mc|classify [--samples F | --cov F --m N] ...
//! ```
//!
//! Reports go to stdout as a table or as JSON (`--format json`); the exit
//! status is 0 exactly when the report carries no errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use netvar::{Estimator, Method, RankPolicy, StatKind};
use netvar_cli::commands;

#[derive(Parser)]
#[command(name = "netvar", version, about = "Variability of bootstrapped network structures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Edge probabilities, covariance, eigenvalues and bound diagnostics.
    Moments {
        #[command(flatten)]
        common: Common,
        /// Also write the estimated covariance as CSV.
        #[arg(long, value_name = "FILE")]
        cov_out: Option<PathBuf>,
    },
    /// Total, generalized and frobenius variability.
    Stats {
        #[command(flatten)]
        common: Common,
    },
    /// Asymptotic tests against the maximum-entropy covariance.
    Test {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "tt,tg1,tg2,tn", value_parser = parse_method)]
        methods: Vec<Method>,
        /// Headline the corrected significance values.
        #[arg(long)]
        adjusted: bool,
    },
    /// Monte Carlo significance under the maximum-entropy null.
    Mc {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "vart,varg,varn", value_parser = parse_mc_stat)]
        mc_stat: Vec<StatKind>,
        #[arg(long, default_value_t = 100_000)]
        replicates: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Entropy class and structure frequencies of a sample set.
    Classify {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Clone)]
struct Common {
    /// Sample-set text file.
    #[arg(long, value_name = "FILE", required_unless_present = "cov", conflicts_with = "cov")]
    samples: Option<PathBuf>,
    /// Covariance matrix as CSV.
    #[arg(long, value_name = "FILE")]
    cov: Option<PathBuf>,
    /// Sample size behind a covariance CSV.
    #[arg(long, requires = "cov")]
    m: Option<usize>,
    /// Read edge lines as arcs and collapse them to undirected edges.
    #[arg(long, requires = "samples")]
    directed: bool,
    #[arg(long, value_enum, default_value_t = PolicyArg::Reduce)]
    rank_policy: PolicyArg,
    #[arg(long, value_enum, default_value_t = EstimatorArg::Plugin)]
    estimator: EstimatorArg,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Continue with a covariance that violates the Bernoulli bounds.
    #[arg(long)]
    force: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Strict,
    Reduce,
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorArg {
    Plugin,
    Unbiased,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

fn parse_method(s: &str) -> Result<Method, String> {
    Method::from_code(s).ok_or_else(|| format!("unknown method `{s}` (expected tt, tg1, tg2 or tn)"))
}

fn parse_mc_stat(s: &str) -> Result<StatKind, String> {
    match s {
        "vart" => Ok(StatKind::Total),
        "varg" => Ok(StatKind::Generalized),
        "varn" => Ok(StatKind::Frobenius),
        _ => Err(format!("unknown statistic `{s}` (expected vart, varg or varn)")),
    }
}

impl Common {
    fn options(&self) -> commands::Options {
        commands::Options {
            samples: self.samples.clone(),
            cov: self.cov.clone(),
            m: self.m,
            directed: self.directed,
            rank_policy: match self.rank_policy {
                PolicyArg::Strict => RankPolicy::Strict,
                PolicyArg::Reduce => RankPolicy::Reduce,
            },
            estimator: match self.estimator {
                EstimatorArg::Plugin => Estimator::Plugin,
                EstimatorArg::Unbiased => Estimator::Unbiased,
            },
            force: self.force,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, result) = match &cli.command {
        Command::Moments { common, cov_out } => (common, commands::moments(&common.options(), cov_out.as_deref())),
        Command::Stats { common } => (common, commands::stats(&common.options())),
        Command::Test { common, methods, adjusted } => {
            (common, commands::test(&common.options(), methods, *adjusted))
        }
        Command::Mc { common, mc_stat, replicates, seed } => {
            (common, commands::mc(&common.options(), mc_stat, *replicates, *seed))
        }
        Command::Classify { common } => (common, commands::classify(&common.options())),
    };
    match result {
        Ok(report) => {
            match common.format {
                Format::Json => print!("{}", report.to_json()),
                Format::Table => print!("{}", report.to_table()),
            }
            if report.errors.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("netvar: {e:#}");
            ExitCode::FAILURE
        }
    }
}
