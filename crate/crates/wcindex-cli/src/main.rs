//! Command-line frontend for the wildcard/gap text index: build and
//! persist an index over a text file, query it, check its answers
//! against a reference scan, and inspect its stored parameters.
//!
//! Occurrences go to standard output, one per line (`start` for
//! wildcard-only patterns, `start end` otherwise, ascending); summaries,
//! counters, and errors go to the diagnostic stream. Exit codes: 0 ok,
//! 1 usage or parse errors (and verify divergences), 2 gap-budget
//! violations, 3 refusals (construction guard, oracle cap, malformed
//! index files), 4 I/O failures.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use wcindex::index::QueryStats;
use wcindex::{
    build_index_guarded, load_index_from, oracle_match, save_index_to, Error, GapPattern,
    IndexVariant, IndexedText, OccurrenceSet, TextHandle,
};

#[derive(Parser)]
#[command(
    name = "wcindex",
    version,
    about = "Index a text for patterns with wildcards and variable-length gaps",
    after_help = "Patterns are literal bytes with `*` for exactly one arbitrary symbol and\n\
                  `*{a,b}` for a gap of a to b symbols; escape a literal *, { or } with `\\`."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an index over a text file and write it to disk.
    Build(BuildArgs),
    /// Load an index and print every occurrence of a pattern.
    Query(QueryArgs),
    /// Compare an index's answer for a pattern against a reference scan.
    Verify(VerifyArgs),
    /// Print the parameters and structure counters of a stored index.
    Stats(StatsArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VariantName {
    /// Plain suffix tree.
    Simple,
    /// Suffix tree with top/bottom decomposition and LCP navigation.
    ArtLinear,
    /// Layered wildcard tree with branching bound beta.
    Tradeoff,
    /// Windowed wildcard tree plus art-linear fallback.
    LinearTime,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Layout {
    /// `key=value`, one pair per line.
    Lines,
    /// Aligned two-column table.
    Tabular,
}

#[derive(Args)]
struct BuildArgs {
    /// Text file to index (one trailing newline, if any, is ignored).
    text: PathBuf,
    /// Destination index file.
    index: PathBuf,
    /// Index structure to build.
    #[arg(long, value_enum, default_value_t = VariantName::Simple)]
    variant: VariantName,
    /// Branching bound in [1, sigma) (tradeoff).
    #[arg(long)]
    beta: Option<usize>,
    /// Wildcard budget: mandatory gap symbols per query (tradeoff, linear-time).
    #[arg(long)]
    k: Option<usize>,
    /// Optional-slack budget; defaults to k (tradeoff, linear-time).
    #[arg(long)]
    opt: Option<usize>,
    /// Top-part leaf threshold override (art-linear, linear-time fallback).
    #[arg(long)]
    chi: Option<usize>,
    /// Window-length override (linear-time).
    #[arg(long)]
    g: Option<usize>,
    /// Refuse constructions that would store more than this many strings.
    #[arg(long)]
    guard: Option<u64>,
    /// Summary layout on the diagnostic stream.
    #[arg(long, value_enum, default_value_t = Layout::Lines)]
    format: Layout,
}

#[derive(Args)]
struct QueryArgs {
    /// Index file produced by `build`.
    index: PathBuf,
    /// Pattern, e.g. "b*{0,4}cc*{3,5}d".
    pattern: String,
    /// Print the query's counters to the diagnostic stream.
    #[arg(long)]
    stats: bool,
    /// Counter layout.
    #[arg(long, value_enum, default_value_t = Layout::Lines)]
    format: Layout,
}

#[derive(Args)]
struct VerifyArgs {
    /// Index file produced by `build`.
    index: PathBuf,
    /// Pattern to check.
    pattern: String,
}

#[derive(Args)]
struct StatsArgs {
    /// Index file produced by `build`.
    index: PathBuf,
    /// Output layout.
    #[arg(long, value_enum, default_value_t = Layout::Lines)]
    format: Layout,
}

/// Everything a subcommand can fail with, mapped onto the exit codes.
enum Failure {
    /// Flag combinations the index modules cannot accept.
    Usage(String),
    /// `verify` found the index and the scanner disagreeing.
    Divergence(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure::Lib(e)
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(msg) => write!(f, "{msg}"),
            Failure::Divergence(msg) => write!(f, "divergence at {msg}"),
            Failure::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) | Failure::Divergence(_) => 1,
            Failure::Lib(e) => match e {
                Error::Budget { .. } => 2,
                Error::Guard { .. }
                | Error::OracleCap { .. }
                | Error::SpecialWindow { .. }
                | Error::Format(_) => 3,
                Error::Io(_) => 4,
                _ => 1,
            },
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let ok = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = e.print();
            return if ok { ExitCode::SUCCESS } else { ExitCode::from(1) };
        }
    };
    let result = match cli.command {
        Command::Build(a) => cmd_build(a),
        Command::Query(a) => cmd_query(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Stats(a) => cmd_stats(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}

/// Maps the flag set onto an index variant, refusing flags the chosen
/// variant does not consume so typos cannot silently build the wrong
/// structure.
fn resolve_variant(a: &BuildArgs) -> Result<IndexVariant, Failure> {
    let reject = |flag: &str, set: bool| {
        if set {
            Err(Failure::Usage(format!(
                "--{flag} does not apply to --variant {}",
                variant_name(a.variant)
            )))
        } else {
            Ok(())
        }
    };
    let require = |flag: &str, v: Option<usize>| {
        v.ok_or_else(|| {
            Failure::Usage(format!(
                "--variant {} requires --{flag}",
                variant_name(a.variant)
            ))
        })
    };
    match a.variant {
        VariantName::Simple => {
            reject("beta", a.beta.is_some())?;
            reject("k", a.k.is_some())?;
            reject("opt", a.opt.is_some())?;
            reject("chi", a.chi.is_some())?;
            reject("g", a.g.is_some())?;
            Ok(IndexVariant::Simple)
        }
        VariantName::ArtLinear => {
            reject("beta", a.beta.is_some())?;
            reject("k", a.k.is_some())?;
            reject("opt", a.opt.is_some())?;
            reject("g", a.g.is_some())?;
            Ok(IndexVariant::ArtLinear { chi: a.chi })
        }
        VariantName::Tradeoff => {
            reject("chi", a.chi.is_some())?;
            reject("g", a.g.is_some())?;
            Ok(IndexVariant::Tradeoff {
                beta: require("beta", a.beta)?,
                k: require("k", a.k)?,
                opt: a.opt,
            })
        }
        VariantName::LinearTime => {
            reject("beta", a.beta.is_some())?;
            Ok(IndexVariant::LinearTime {
                k: require("k", a.k)?,
                opt: a.opt,
                g: a.g,
                chi: a.chi,
            })
        }
    }
}

fn variant_name(v: VariantName) -> &'static str {
    match v {
        VariantName::Simple => "simple",
        VariantName::ArtLinear => "art-linear",
        VariantName::Tradeoff => "tradeoff",
        VariantName::LinearTime => "linear-time",
    }
}

fn read_text(path: &Path) -> Result<TextHandle, Failure> {
    let mut bytes = fs::read(path).map_err(Error::Io)?;
    if bytes.last() == Some(&b'\n') {
        bytes.pop();
        if bytes.last() == Some(&b'\r') {
            bytes.pop();
        }
    }
    if bytes.is_empty() {
        return Err(Failure::Usage(format!(
            "text file {} is empty",
            path.display()
        )));
    }
    Ok(Arc::new(IndexedText::from_bytes(&bytes)))
}

fn cmd_build(a: BuildArgs) -> Result<(), Failure> {
    let variant = resolve_variant(&a)?;
    let text = read_text(&a.text)?;
    let idx = build_index_guarded(&text, variant, a.guard)?;
    save_index_to(&idx, &a.index)?;
    emit_pairs(&idx.stats_pairs(), a.format, &mut std::io::stderr().lock());
    Ok(())
}

fn cmd_query(a: QueryArgs) -> Result<(), Failure> {
    let idx = load_index_from(&a.index)?;
    let p = GapPattern::parse(&a.pattern)?;
    let (set, stats) = idx.query(&p)?;
    print_occurrences(&set);
    if a.stats {
        emit_pairs(&stats_pairs(&stats), a.format, &mut std::io::stderr().lock());
    }
    Ok(())
}

fn cmd_verify(a: VerifyArgs) -> Result<(), Failure> {
    let idx = load_index_from(&a.index)?;
    let p = GapPattern::parse(&a.pattern)?;
    let (set, _) = idx.query(&p)?;
    let want = oracle_match(idx.text(), &p)?;
    let (got_lines, want_lines) = match &set {
        OccurrenceSet::Starts(v) => (
            v.iter().map(usize::to_string).collect::<Vec<_>>(),
            want.starts.iter().map(usize::to_string).collect::<Vec<_>>(),
        ),
        OccurrenceSet::Spans(v) => (
            v.iter().map(|o| format!("{} {}", o.start, o.end)).collect(),
            want.spans.iter().map(|o| format!("{} {}", o.start, o.end)).collect(),
        ),
    };
    match first_divergence(&got_lines, &want_lines) {
        None => {
            eprintln!("ok: {} occurrences agree", got_lines.len());
            Ok(())
        }
        Some(d) => Err(Failure::Divergence(d)),
    }
}

fn cmd_stats(a: StatsArgs) -> Result<(), Failure> {
    let idx = load_index_from(&a.index)?;
    emit_pairs(&idx.stats_pairs(), a.format, &mut std::io::stdout().lock());
    Ok(())
}

fn print_occurrences(set: &OccurrenceSet) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    match set {
        OccurrenceSet::Starts(v) => {
            for s in v {
                let _ = writeln!(out, "{s}");
            }
        }
        OccurrenceSet::Spans(v) => {
            for o in v {
                let _ = writeln!(out, "{} {}", o.start, o.end);
            }
        }
    }
}

/// First entry where the index's sorted answer differs from the
/// scanner's, described for the operator.
fn first_divergence(got: &[String], want: &[String]) -> Option<String> {
    for i in 0..got.len().max(want.len()) {
        match (got.get(i), want.get(i)) {
            (Some(g), Some(w)) if g == w => continue,
            (Some(g), Some(w)) => {
                return Some(format!("entry {i}: index reports {g}, scanner reports {w}"))
            }
            (Some(g), None) => {
                return Some(format!("entry {i}: index reports extra occurrence {g}"))
            }
            (None, Some(w)) => {
                return Some(format!("entry {i}: index misses occurrence {w}"))
            }
            (None, None) => unreachable!(),
        }
    }
    None
}

fn stats_pairs(s: &QueryStats) -> Vec<(&'static str, String)> {
    let starts = s
        .subpattern_starts
        .iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(",");
    vec![
        ("lcp_queries", s.lcp_queries.to_string()),
        ("branch_events", s.branch_events.to_string()),
        ("active_location_peak", s.active_location_peak.to_string()),
        ("heavy_hops_total", s.heavy_hops_total.to_string()),
        ("predecessor_uses", s.predecessor_uses.to_string()),
        ("fallback_comparisons", s.fallback_comparisons.to_string()),
        ("dedup_removed", s.dedup_removed.to_string()),
        ("routed_to", s.routed_to.to_string()),
        ("subpattern_starts", starts),
    ]
}

fn emit_pairs(pairs: &[(&'static str, String)], layout: Layout, out: &mut dyn std::io::Write) {
    match layout {
        Layout::Lines => {
            for (k, v) in pairs {
                let _ = writeln!(out, "{k}={v}");
            }
        }
        Layout::Tabular => {
            let width = pairs.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
            for (k, v) in pairs {
                let _ = writeln!(out, "{k:width$}  {v}");
            }
        }
    }
}
