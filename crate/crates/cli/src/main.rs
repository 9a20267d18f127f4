use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use cfgame_core::analysis::{AnalysisError, SearchMode};
use cfgame_core::online::OnlineError;
use cfgame_core::synthesis::SynthesisError;

mod commands;

#[derive(Parser, Debug)]
#[command(name = "cfgame", version, about = "Context-free rewriting games on strings")]
struct Cli {
    /// Seed for randomized generators.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Candidate budget for exhaustive searches.
    #[arg(long, global = true)]
    budget: Option<u64>,
    /// Print nothing on success; rely on the exit status.
    #[arg(long, global = true)]
    quiet: bool,
    /// Print only the JSON details, without the verdict line.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check that a game file loads.
    Validate { file: PathBuf },
    /// Report the structural classes of a game.
    Classify { file: PathBuf },
    /// Rewrite a game into an equivalent one.
    Transform {
        file: PathBuf,
        /// Append an end symbol to every replacement word.
        #[arg(long)]
        prefix_free: bool,
        #[arg(long, default_value = "$")]
        end_symbol: String,
        /// Write the result here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Play a strategy against Romeo on a word.
    Play(PlayArgs),
    /// Decide whether a strategy wins on a word.
    IsWinning { game: PathBuf, strategy: PathBuf, word: String },
    /// Search for a strongly regular strategy winning on a word.
    ExistsWinning {
        game: PathBuf,
        word: String,
        /// Defaults to guided when every replacement language is finite.
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        /// Write the strategy found here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the winning sets of two strategies.
    Compare { game: PathBuf, a: PathBuf, b: PathBuf },
    /// Build the automaton of words a strategy does not win on.
    LosingNfa {
        game: PathBuf,
        strategy: PathBuf,
        #[command(flatten)]
        export: ExportTargets,
    },
    /// Synthesize a weakly dominant strategy of a prefix-free game.
    Synthesize {
        game: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Largest target automaton accepted.
        #[arg(long, default_value_t = cfgame_core::synthesis::DEFAULT_CAP)]
        cap: usize,
    },
    /// Prune an online NFA instance to a deterministic strategy.
    OnlinePrune {
        nfa: PathBuf,
        #[command(flatten)]
        export: ExportTargets,
        /// Compare against literal and full-language pruning up to this length.
        #[arg(long)]
        diagnose_bounded: Option<usize>,
    },
    /// Write generated instances.
    #[command(subcommand)]
    Generate(Generate),
    /// Export the target of a game, or a strategy, as DOT or JSON.
    Export {
        game: PathBuf,
        #[arg(long)]
        strategy: Option<PathBuf>,
        #[command(flatten)]
        export: ExportTargets,
    },
}

#[derive(Args, Debug)]
struct PlayArgs {
    game: PathBuf,
    #[arg(long)]
    strategy: PathBuf,
    #[arg(long, conflicts_with = "interactive")]
    word: Option<String>,
    /// Ask for Romeo's replies on standard input.
    #[arg(long)]
    interactive: bool,
    /// Romeo's replies in order, comma separated; shortlex-least replies afterwards.
    #[arg(long, conflicts_with = "interactive")]
    replies: Option<String>,
    #[arg(long, default_value_t = cfgame_core::play::DEFAULT_STEP_LIMIT)]
    step_limit: usize,
}

#[derive(Args, Debug, Default)]
struct ExportTargets {
    #[arg(long)]
    dot: Option<PathBuf>,
    #[arg(long = "json-out")]
    json_out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Generate {
    /// Game and word from a 3CNF formula.
    #[command(name = "3sat")]
    Sat {
        /// Clauses as `l,l,l;l,l,l` with signed variable numbers.
        #[arg(long)]
        clauses: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Game and two strategies from an NFA over {0, 1}.
    Universality {
        #[arg(long)]
        nfa: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// A random game with finite replacement languages.
    Random {
        /// Parameters as a JSON object; missing fields take defaults.
        #[arg(long, default_value = "{}")]
        params: String,
        /// Also write this many random strategies.
        #[arg(long, default_value_t = 0)]
        strategies: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// A built-in fixture with its strategies.
    Fixture {
        name: String,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Mode {
    Exhaustive,
    Incremental,
    Guided,
}

impl From<Mode> for SearchMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Exhaustive => SearchMode::Exhaustive,
            Mode::Incremental => SearchMode::Incremental,
            Mode::Guided => SearchMode::Guided,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Yes,
    No,
    Exceeded,
}

/// Result of a command: a verdict line and machine-readable details.
#[derive(Debug)]
pub struct Report {
    pub status: Status,
    pub verdict: String,
    pub details: Value,
}

impl Report {
    pub fn new(status: Status, verdict: impl Into<String>, details: Value) -> Self {
        Self { status, verdict: verdict.into(), details }
    }

    pub fn yes(verdict: impl Into<String>, details: Value) -> Self {
        Self::new(Status::Yes, verdict, details)
    }

    pub fn decide(affirmative: bool, verdict: impl Into<String>, details: Value) -> Self {
        Self::new(if affirmative { Status::Yes } else { Status::No }, verdict, details)
    }
}

/// Invalid combination of arguments.
#[derive(Debug)]
pub struct Usage(pub String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn error_kind(e: &anyhow::Error) -> (&'static str, u8) {
    for cause in e.chain() {
        if cause.is::<Usage>() {
            return ("usage", 2);
        }
        if let Some(AnalysisError::BudgetExceeded { .. }) = cause.downcast_ref() {
            return ("budget", 3);
        }
        if let Some(OnlineError::BudgetExceeded { .. }) = cause.downcast_ref() {
            return ("budget", 3);
        }
        if let Some(SynthesisError::TooManyStates { .. }) = cause.downcast_ref() {
            return ("scope", 3);
        }
    }
    ("input", 2)
}

fn error_object(kind: &str, code: u8, message: &str) -> String {
    json!({ "error": { "kind": kind, "exit": code, "message": message } }).to_string()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            eprint!("{e}");
            eprintln!("{}", error_object("usage", 2, e.kind().to_string().as_str()));
            return ExitCode::from(2);
        }
    };
    let ctx = commands::Context { seed: cli.seed, budget: cli.budget, quiet: cli.quiet };
    match commands::run(&ctx, cli.command) {
        Ok(report) => {
            if !cli.quiet {
                if !cli.json {
                    println!("{}", report.verdict);
                }
                println!("{}", report.details);
            }
            ExitCode::from(match report.status {
                Status::Yes => 0,
                Status::No => 1,
                Status::Exceeded => 3,
            })
        }
        Err(e) => {
            let (kind, code) = error_kind(&e);
            let mut message = format!("{e:#}");
            if let Some(SynthesisError::NotPrefixFree) = e.downcast_ref() {
                message.push_str(": `cfgame transform --prefix-free --end-symbol $ <game>`");
            }
            if code == 3 {
                message.push_str("; raise --budget or narrow the input");
            }
            eprintln!("{}", error_object(kind, code, &message));
            ExitCode::from(code)
        }
    }
}
