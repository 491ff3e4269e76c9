//! Argument handling and rendering for the `freefold` binary.
//!
//! [`run`] takes the full argument vector and returns the exit code with the
//! text destined for stdout and stderr, so the binary is a thin wrapper and
//! tests can drive the CLI in-process.
//!
//! Exit codes: 0 success (or a true answer), 1 domain error, 2 usage or parse
//! error, 3 a computed false answer.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use freefold::construct::DEFAULT_ATTEMPT_CAP;
use freefold::decide::{self, Flags};
use freefold::{
    ascending_hnn_betti, conjugates_meet_trivially, construct_malnormal, intersection,
    is_malnormal, one_relator_betti, parse_word, parse_word_list, pullback, select_free_subset,
    verify_certificate, AvoidanceProblem, BettiReport, Certificate, ConstructError, GraphError,
    Hierarchy, HierarchyError, StallingsGraph, Subgroup, Word, WordError,
};
use serde_json::{json, Value};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Parser)]
#[command(name = "freefold", version, about = "Subgroups of free groups via Stallings graphs")]
struct Cli {
    /// Rank of the ambient free group.
    #[arg(long, global = true, default_value_t = 2)]
    rank: usize,
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
    /// Graphviz output for graph-valued commands.
    #[arg(long, global = true)]
    dot: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fold the wedge of the generators (no pruning).
    Fold { gens: String },
    /// Core graph of the subgroup.
    Core { gens: String },
    /// Rank of the subgroup.
    Rank { gens: String },
    /// Free basis read off a spanning tree.
    Basis { gens: String },
    /// Whether a word lies in the subgroup.
    Member { gens: String, word: String },
    /// Index in the free group, or "infinite".
    Index { gens: String },
    /// Basis of the intersection of two subgroups.
    Intersect { h: String, k: String },
    /// Components of the fiber product of two core graphs.
    Pullback { h: String, k: String },
    /// Whether the subgroup is malnormal.
    Malnormal { gens: String },
    /// Whether H meets every conjugate of K trivially.
    Separated { h: String, k: String },
    /// Build a certified malnormal subgroup avoiding conjugates of the given subgroups.
    Construct(ConstructArgs),
    /// Recheck a certificate file.
    Verify { file: PathBuf },
    /// Greedy maximal freely independent subset of the words.
    Freiheit { gens: String },
    /// Hierarchy calculator.
    Hierarchy {
        #[command(subcommand)]
        op: HierarchyOp,
    },
    /// L²-Betti numbers of a one-relator group.
    OneRelator { generators: u64 },
    /// L²-Betti numbers of an ascending HNN extension of F(A, B) along F(A).
    AscendingHnn { a: u64, b: u64 },
    /// Decide virtual free-by-cyclicity from hypotheses.
    Decide(DecideArgs),
    /// Whether Bourdon building lattices are virtually free-by-cyclic.
    Bourdon { p: u64, q: u64 },
}

#[derive(Args)]
struct ConstructArgs {
    /// Rank of the subgroup to build.
    #[arg(short = 'n', long = "target-rank")]
    n: usize,
    /// Subgroup to avoid, as a comma-separated generator list; repeatable.
    #[arg(long)]
    avoid: Vec<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Attempt cap for the randomized search.
    #[arg(long)]
    budget: Option<usize>,
    /// Recheck the certificate from its generators before printing.
    #[arg(long)]
    verify: bool,
}

#[derive(Subcommand)]
enum HierarchyOp {
    /// Betti report of a hierarchy given inline or as a file.
    Betti { source: String },
    /// Euler characteristic of a hierarchy given inline or as a file.
    Chi { source: String },
}

#[derive(Args)]
struct DecideArgs {
    #[arg(long)]
    hyperbolic: bool,
    /// Virtually compact special.
    #[arg(long)]
    vcs: bool,
    /// Rational cohomological dimension at most 2.
    #[arg(long)]
    cd2: bool,
    /// Second L²-Betti number vanishes.
    #[arg(long)]
    b2zero: bool,
    /// Rational cohomological dimension known to exceed 2.
    #[arg(long = "cd-exceeds-2")]
    cd_exceeds_2: bool,
    /// Use a named hypothesis set instead of flags.
    #[arg(long)]
    preset: Option<String>,
}

struct Failure {
    code: i32,
    name: String,
    message: String,
}

impl Failure {
    fn usage(name: &str, message: impl ToString) -> Failure {
        Failure {
            code: 2,
            name: name.to_string(),
            message: message.to_string(),
        }
    }

    fn domain(name: &str, message: impl ToString) -> Failure {
        Failure {
            code: 1,
            name: name.to_string(),
            message: message.to_string(),
        }
    }
}

impl From<WordError> for Failure {
    fn from(e: WordError) -> Failure {
        match e {
            WordError::PreconditionViolated(_) => Failure::domain(e.name(), &e),
            _ => Failure::usage(e.name(), &e),
        }
    }
}

impl From<GraphError> for Failure {
    fn from(e: GraphError) -> Failure {
        match e {
            GraphError::Word(w) => w.into(),
            GraphError::Parse { .. } => Failure::usage(e.name(), &e),
            _ => Failure::domain(e.name(), &e),
        }
    }
}

impl From<ConstructError> for Failure {
    fn from(e: ConstructError) -> Failure {
        match e {
            ConstructError::Word(w) => w.into(),
            ConstructError::MalformedCertificate(_) => Failure::usage(e.name(), &e),
            _ => Failure::domain(e.name(), &e),
        }
    }
}

impl From<HierarchyError> for Failure {
    fn from(e: HierarchyError) -> Failure {
        match e {
            HierarchyError::Syntax { .. } | HierarchyError::NegativeRank { .. } => {
                Failure::usage(e.name(), &e)
            }
            _ => Failure::domain(e.name(), &e),
        }
    }
}

impl From<decide::DecideError> for Failure {
    fn from(e: decide::DecideError) -> Failure {
        Failure::domain(e.name(), &e)
    }
}

/// Printed text plus exit code of a successful command.
struct Report {
    text: String,
    code: i32,
}

impl Report {
    fn ok(text: impl Into<String>) -> Report {
        Report {
            text: text.into(),
            code: 0,
        }
    }

    fn answer(value: bool, text: impl Into<String>) -> Report {
        Report {
            text: text.into(),
            code: if value { 0 } else { 3 },
        }
    }
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    code: 2,
                    stdout: String::new(),
                    stderr: format!("error[UsageError]: {}", text.trim_start_matches("error: ")),
                }
            } else {
                Outcome {
                    code: 0,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    match dispatch(&cli) {
        Ok(report) => {
            let mut stdout = report.text;
            if !stdout.ends_with('\n') {
                stdout.push('\n');
            }
            Outcome {
                code: report.code,
                stdout,
                stderr: String::new(),
            }
        }
        Err(f) => Outcome {
            code: f.code,
            stdout: String::new(),
            stderr: format!("error[{}]: {}\n", f.name, f.message),
        },
    }
}

fn ambient(rank: usize) -> Result<u8, Failure> {
    parse_word("", rank)?;
    Ok(rank as u8)
}

fn subgroup(text: &str, rank: usize) -> Result<Subgroup, Failure> {
    let r = ambient(rank)?;
    Ok(Subgroup::from_generators(&parse_word_list(text, rank)?, r))
}

fn words_json(words: &[Word]) -> Value {
    Value::Array(words.iter().map(|w| Value::String(w.to_string())).collect())
}

fn list(words: &[Word]) -> String {
    if words.is_empty() {
        "1".to_string()
    } else {
        words.iter().map(Word::to_string).collect::<Vec<_>>().join(",")
    }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json value serializes")
}

fn graph_output(cli: &Cli, graph: &StallingsGraph) -> Report {
    if cli.dot {
        return Report::ok(graph.to_dot());
    }
    if cli.json {
        let edges: Vec<Value> = graph
            .edges()
            .iter()
            .map(|e| json!([e.source, e.target, e.label as usize + 1]))
            .collect();
        return Report::ok(pretty(&json!({
            "vertices": graph.vertex_count(),
            "base": graph.base(),
            "edges": edges,
        })));
    }
    Report::ok(graph.to_text())
}

fn boolean(cli: &Cli, value: bool) -> Report {
    let text = if cli.json {
        pretty(&json!({ "result": value }))
    } else {
        value.to_string()
    };
    Report::answer(value, text)
}

fn read_source(source: &str) -> Result<String, Failure> {
    let path = Path::new(source);
    if path.is_file() {
        std::fs::read_to_string(path).map_err(|e| Failure::usage("IoError", e))
    } else {
        Ok(source.to_string())
    }
}

fn betti_output(cli: &Cli, report: &BettiReport) -> Report {
    if cli.json {
        Report::ok(report.to_json())
    } else {
        Report::ok(report.to_string())
    }
}

fn dispatch(cli: &Cli) -> Result<Report, Failure> {
    let rank = cli.rank;
    match &cli.command {
        Command::Fold { gens } => {
            let r = ambient(rank)?;
            let words = parse_word_list(gens, rank)?;
            Ok(graph_output(cli, &StallingsGraph::wedge(&words, r).fold()))
        }
        Command::Core { gens } => Ok(graph_output(cli, subgroup(gens, rank)?.graph())),
        Command::Rank { gens } => {
            let n = subgroup(gens, rank)?.rank();
            Ok(Report::ok(if cli.json {
                pretty(&json!({ "rank": n }))
            } else {
                n.to_string()
            }))
        }
        Command::Basis { gens } | Command::Freiheit { gens } => {
            let words = match &cli.command {
                Command::Basis { .. } => subgroup(gens, rank)?.basis(),
                _ => select_free_subset(&parse_word_list(gens, rank)?, ambient(rank)?),
            };
            Ok(Report::ok(if cli.json {
                pretty(&words_json(&words))
            } else {
                list(&words)
            }))
        }
        Command::Member { gens, word } => {
            let h = subgroup(gens, rank)?;
            let w = parse_word(word, rank)?;
            Ok(boolean(cli, h.contains(&w)))
        }
        Command::Index { gens } => {
            let index = subgroup(gens, rank)?.index();
            Ok(Report::ok(if cli.json {
                pretty(&json!({ "index": index.to_string() }))
            } else {
                index.to_string()
            }))
        }
        Command::Intersect { h, k } => {
            let i = intersection(&subgroup(h, rank)?, &subgroup(k, rank)?)?;
            let basis = i.basis();
            Ok(Report::ok(if cli.json {
                pretty(&json!({ "rank": i.rank(), "basis": words_json(&basis) }))
            } else {
                list(&basis)
            }))
        }
        Command::Pullback { h, k } => {
            let components = pullback(&subgroup(h, rank)?, &subgroup(k, rank)?)?;
            if cli.json {
                let items: Vec<Value> = components
                    .iter()
                    .map(|c| {
                        json!({
                            "based": c.based,
                            "non_contractible": c.non_contractible,
                            "vertices": c.vertex_count,
                            "edges": c.edge_count,
                            "conjugator": c.conjugator().to_string(),
                            "basis": words_json(&c.subgroup.basis()),
                        })
                    })
                    .collect();
                return Ok(Report::ok(pretty(&Value::Array(items))));
            }
            let mut text = String::new();
            for (i, c) in components.iter().enumerate() {
                writeln!(
                    text,
                    "component {i}: {} vertices {} edges {} {} conjugator {} basis {}",
                    if c.based { "based" } else { "unbased" },
                    c.vertex_count,
                    c.edge_count,
                    if c.non_contractible { "non-contractible" } else { "tree" },
                    c.conjugator(),
                    list(&c.subgroup.basis()),
                )
                .expect("write to string");
            }
            Ok(Report::ok(text))
        }
        Command::Malnormal { gens } => Ok(boolean(cli, is_malnormal(&subgroup(gens, rank)?))),
        Command::Separated { h, k } => {
            let value = conjugates_meet_trivially(&subgroup(h, rank)?, &subgroup(k, rank)?)?;
            Ok(boolean(cli, value))
        }
        Command::Construct(args) => {
            let r = ambient(rank)?;
            let avoid = args
                .avoid
                .iter()
                .map(|a| subgroup(a, rank))
                .collect::<Result<Vec<_>, _>>()?;
            let mut problem = AvoidanceProblem::new(r, args.n, avoid, args.seed);
            problem.attempt_cap = args.budget.unwrap_or(DEFAULT_ATTEMPT_CAP);
            let mut cert = construct_malnormal(&problem)?;
            if args.verify {
                cert = verify_certificate(&cert, &problem.avoid);
                if !cert.all_checks_pass() {
                    let failed: Vec<&str> = cert
                        .checks
                        .iter()
                        .filter(|(_, ok)| !**ok)
                        .map(|(name, _)| name.as_str())
                        .collect();
                    return Err(Failure::domain("CheckFailed", failed.join(", ")));
                }
            }
            Ok(Report::ok(cert.to_json()))
        }
        Command::Verify { file } => {
            let text = std::fs::read_to_string(file).map_err(|e| Failure::usage("IoError", e))?;
            let cert = Certificate::from_json(&text)?;
            let checked = verify_certificate(&cert, &cert.avoid_subgroups());
            let ok = checked.all_checks_pass();
            Ok(Report::answer(ok, checked.to_json()))
        }
        Command::Hierarchy { op } => match op {
            HierarchyOp::Betti { source } => {
                let h = Hierarchy::parse(&read_source(source)?)?;
                Ok(betti_output(cli, &h.betti()?))
            }
            HierarchyOp::Chi { source } => {
                let h = Hierarchy::parse(&read_source(source)?)?;
                let chi = h.euler_char();
                Ok(Report::ok(if cli.json {
                    pretty(&json!({ "euler_char": chi.to_string() }))
                } else {
                    chi.to_string()
                }))
            }
        },
        Command::OneRelator { generators } => Ok(betti_output(cli, &one_relator_betti(*generators)?)),
        Command::AscendingHnn { a, b } => Ok(betti_output(cli, &ascending_hnn_betti(*a, *b)?)),
        Command::Decide(args) => {
            let flags = match &args.preset {
                Some(name) => decide::preset(name)?,
                None => Flags::new(
                    args.hyperbolic,
                    args.vcs,
                    args.cd2,
                    args.b2zero,
                    args.cd_exceeds_2,
                ),
            };
            let decision = decide::decide_vfbc(flags)?;
            if cli.json {
                return Ok(Report::ok(pretty(&json!({
                    "verdict": decision.verdict.to_string(),
                    "reasons": decision.reasons,
                }))));
            }
            let mut text = format!("{}\n", decision.verdict);
            for reason in &decision.reasons {
                writeln!(text, "  {reason}").expect("write to string");
            }
            Ok(Report::ok(text))
        }
        Command::Bourdon { p, q } => Ok(boolean(cli, decide::bourdon_vfbc(*p, *q)?)),
    }
}
