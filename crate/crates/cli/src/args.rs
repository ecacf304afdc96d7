use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use fluency_core::corpus::CategoryCoding;
use fluency_core::eval::SwitchSignal;
use fluency_core::fit::ModelFamily;

use crate::error::CliError;

/// Category fluency models: build networks, generate runs, score them against humans.
#[derive(Debug, Parser)]
#[command(name = "fluency", version)]
pub struct Cli {
    /// Plain-text `key = value` defaults; command-line flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,

    /// Log more (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a semantic network snapshot from vectors or association norms.
    BuildNetwork(BuildNetworkArgs),
    /// Estimate category transition probabilities from human runs.
    Transitions(TransitionsArgs),
    /// Generate fluency runs from a network or external distributions.
    Generate(GenerateArgs),
    /// Score generations against human runs.
    Evaluate(EvaluateArgs),
    /// Model signal aligned on category switches in human runs.
    SwitchProfile(SwitchProfileArgs),
    /// Fit cue weights by maximum likelihood on human runs.
    Fit(FitArgs),
    /// Per-step exemplar and category table of generated runs.
    ExportPaths(ExportPathsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Coding {
    Chained,
    FirstListed,
}

impl From<Coding> for CategoryCoding {
    fn from(c: Coding) -> Self {
        match c {
            Coding::Chained => CategoryCoding::Chained,
            Coding::FirstListed => CategoryCoding::FirstListed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Search {
    Greedy,
    Beam,
    Sample,
    Walk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Signal {
    ProbRatio,
    Entropy,
}

impl From<Signal> for SwitchSignal {
    fn from(s: Signal) -> Self {
        match s {
            Signal::ProbRatio => SwitchSignal::ProbRatio,
            Signal::Entropy => SwitchSignal::Entropy,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    LocalGlobal,
    LocalGlobalSubcat,
}

impl From<Family> for ModelFamily {
    fn from(f: Family) -> Self {
        match f {
            Family::LocalGlobal => ModelFamily::LocalGlobal,
            Family::LocalGlobalSubcat => ModelFamily::LocalGlobalSubcat,
        }
    }
}

/// Source of the global cue.
#[derive(Debug, Args)]
#[group(multiple = false)]
pub struct GlobalSource {
    /// Exemplar frequency table (`exemplar,count`).
    #[arg(long, value_name = "CSV")]
    pub frequencies: Option<PathBuf>,
    /// Use exemplar occurrence counts in the human runs.
    #[arg(long)]
    pub gold: bool,
}

#[derive(Debug, Args)]
pub struct BuildNetworkArgs {
    /// Word vectors, one `token v1 .. vD` per line.
    #[arg(
        long,
        value_name = "TXT",
        conflicts_with = "norms",
        required_unless_present = "norms"
    )]
    pub embeddings: Option<PathBuf>,
    /// Free-association norms (`cue,target[,strength]`).
    #[arg(long, value_name = "CSV")]
    pub norms: Option<PathBuf>,
    /// Human runs; their exemplars become the network nodes.
    #[arg(long, value_name = "FILE")]
    pub runs: PathBuf,
    /// Edges with similarity below this are pruned.
    #[arg(long, default_value_t = 0.05)]
    pub epsilon: f64,
    #[command(flatten)]
    pub global: GlobalSource,
    #[arg(short, long, value_name = "JSON")]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct TransitionsArgs {
    #[arg(long, value_name = "FILE")]
    pub runs: PathBuf,
    #[arg(long, value_name = "CSV")]
    pub scheme: PathBuf,
    #[arg(long, value_enum, default_value_t = Coding::Chained)]
    pub coding: Coding,
    /// Only list transitions above this probability.
    #[arg(long, default_value_t = 0.0)]
    pub threshold: f64,
    #[arg(short, long, value_name = "CSV")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Network snapshot from `build-network`.
    #[arg(
        long,
        value_name = "JSON",
        conflicts_with = "external",
        required_unless_present = "external"
    )]
    pub network: Option<PathBuf>,
    /// External next-exemplar distributions (JSONL).
    #[arg(long, value_name = "JSONL")]
    pub external: Option<PathBuf>,
    /// Cue exponents `l,g,c` (or `l,g`).
    #[arg(long, value_name = "L,G,C")]
    pub betas: Option<String>,
    /// Category scheme; required when beta_subcat > 0.
    #[arg(long, value_name = "CSV")]
    pub scheme: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Coding::Chained)]
    pub coding: Coding,
    /// Replace the network's global cue, or reweight external distributions.
    #[command(flatten)]
    pub global: GlobalSource,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Human runs: length distribution, gold frequencies and subcategory transitions.
    #[arg(long, value_name = "FILE")]
    pub runs: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Search::Greedy)]
    pub search: Search,
    /// Number of generations.
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Fixed length for every generation (default: drawn from the human runs).
    #[arg(long)]
    pub length: Option<usize>,
    /// Sampling temperature; `inf` samples uniformly. Only with `--search sample`.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Only with `--search beam`.
    #[arg(long)]
    pub beam_width: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Let an exemplar be produced more than once.
    #[arg(long)]
    pub allow_repeats: bool,
    /// Output runs (`.csv` or `.jsonl`); CSV on stdout when omitted.
    #[arg(short, long, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long, value_name = "FILE")]
    pub gens: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub refs: PathBuf,
    #[arg(long, value_name = "CSV")]
    pub scheme: PathBuf,
    #[arg(long, value_enum, default_value_t = Coding::Chained)]
    pub coding: Coding,
    /// Score each generation without the reference of the same participant.
    #[arg(long)]
    pub leave_one_out: bool,
    #[arg(short, long, value_name = "JSON")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SwitchProfileArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Human runs to align on.
    #[arg(long, value_name = "FILE")]
    pub runs: PathBuf,
    #[arg(long, value_enum, default_value_t = Signal::ProbRatio)]
    pub signal: Signal,
    /// Offsets reported on each side of a switch.
    #[arg(long, default_value_t = 2)]
    pub window: usize,
    #[arg(long)]
    pub allow_repeats: bool,
    #[arg(short, long, value_name = "CSV")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long, value_name = "JSON")]
    pub network: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub runs: PathBuf,
    /// Required for `local-global-subcat`.
    #[arg(long, value_name = "CSV")]
    pub scheme: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Family::LocalGlobal)]
    pub family: Family,
    #[arg(long, value_enum, default_value_t = Coding::Chained)]
    pub coding: Coding,
    /// Comma-separated beta values tried per dimension.
    #[arg(long, value_name = "LIST", default_value = "0,0.25,0.5,1,2,4,8")]
    pub grid: String,
    /// Skip the half-step refinement pass.
    #[arg(long)]
    pub no_refine: bool,
    /// Also report held-out log-likelihood from k-fold cross-validation.
    #[arg(long, value_name = "K")]
    pub folds: Option<usize>,
    #[command(flatten)]
    pub global: GlobalSource,
    #[arg(long)]
    pub allow_repeats: bool,
    #[arg(short, long, value_name = "JSON")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExportPathsArgs {
    #[arg(long, value_name = "FILE")]
    pub gens: PathBuf,
    #[arg(long, value_name = "CSV")]
    pub scheme: PathBuf,
    #[arg(long, value_enum, default_value_t = Coding::Chained)]
    pub coding: Coding,
    #[arg(short, long, value_name = "CSV")]
    pub output: Option<PathBuf>,
}

/// Reads `key = value` lines; `#` starts a comment.
pub fn read_config(path: &PathBuf) -> Result<Vec<(String, String)>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::usage(format!(
                "{}:{}: expected key = value",
                path.display(),
                i + 1
            ))
        })?;
        let key = key.trim().replace('_', "-");
        if key.is_empty() || key == "config" {
            return Err(CliError::usage(format!(
                "{}:{}: invalid key",
                path.display(),
                i + 1
            )));
        }
        out.push((key, value.trim().to_owned()));
    }
    Ok(out)
}

fn config_path(argv: &[OsString]) -> Option<PathBuf> {
    let mut it = argv.iter().skip(1);
    while let Some(arg) = it.next() {
        let s = arg.to_string_lossy();
        if s == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(p));
        }
    }
    None
}

/// Splices config entries in front of the user's own arguments so that
/// flags given on the command line win.
pub fn merge_config(argv: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let names: Vec<String> = Cli::command()
        .get_subcommands()
        .map(|c| c.get_name().to_owned())
        .collect();
    let Some(at) = argv
        .iter()
        .position(|a| names.iter().any(|n| a == n.as_str()))
    else {
        return Ok(argv);
    };
    let mut injected = Vec::new();
    for (key, value) in read_config(&path)? {
        match value.as_str() {
            "true" => injected.push(OsString::from(format!("--{key}"))),
            "false" => {}
            _ => {
                injected.push(OsString::from(format!("--{key}")));
                injected.push(OsString::from(value));
            }
        }
    }
    let mut merged = argv[..=at].to_vec();
    merged.extend(injected);
    merged.extend_from_slice(&argv[at + 1..]);
    Ok(merged)
}

/// Parses with repeated flags allowed; the last occurrence wins.
pub fn parse(argv: Vec<OsString>) -> Result<Cli, clap::Error> {
    let cmd = Cli::command()
        .args_override_self(true)
        .mut_subcommands(|s| s.args_override_self(true));
    let matches = cmd.try_get_matches_from(argv)?;
    Cli::from_arg_matches(&matches)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn os(args: &[&str]) -> Vec<OsString> {
        args.iter().map(OsString::from).collect()
    }

    #[test]
    fn definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn flags_override_config() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(
            file,
            "# defaults\nseed = 5\nsearch = sample\ntau = 0.9\nallow_repeats = true\nn = 3"
        )
        .unwrap();
        let argv = os(&[
            "fluency",
            "generate",
            "--network",
            "n.json",
            "--seed",
            "9",
            "--config",
        ]);
        let mut argv = argv;
        argv.push(file.path().into());
        let cli = parse(merge_config(argv).unwrap()).unwrap();
        let Command::Generate(g) = cli.command else {
            panic!()
        };
        assert_eq!(g.seed, 9);
        assert_eq!(g.search, Search::Sample);
        assert_eq!(g.tau, Some(0.9));
        assert!(g.allow_repeats);
        assert_eq!(g.n, 3);
    }

    #[test]
    fn exclusive_sources_rejected() {
        let argv = os(&[
            "fluency",
            "build-network",
            "--embeddings",
            "v",
            "--norms",
            "n",
            "--runs",
            "r",
            "-o",
            "x",
        ]);
        assert!(parse(argv).is_err());
        let argv = os(&["fluency", "generate", "--network", "a", "--external", "b"]);
        assert!(parse(argv).is_err());
        let argv = os(&[
            "fluency",
            "build-network",
            "--embeddings",
            "v",
            "--runs",
            "r",
            "--gold",
            "--frequencies",
            "f",
            "-o",
            "x",
        ]);
        assert!(parse(argv).is_err());
    }
}
