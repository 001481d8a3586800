use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use normspec_cli::bench::{self, Suite};
use normspec_cli::emit::{self, EmitConfig, SearchOptions};
use normspec_cli::run::{self, Mode, RunConfig};
use normspec_cli::{parse_files, repl, serve, EngineOptions, EXIT_FAILED, EXIT_PARSE};

#[derive(Parser)]
#[command(name = "normspec", version, about = "Run, test, serve and translate normative specifications")]
struct Cli {
    #[command(subcommand)]
    mode: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum EmptyAggregate {
    /// Max over nothing is -infinity, Min over nothing is infinity.
    Sentinel,
    Error,
}

#[derive(Args)]
struct Common {
    /// Iteration cap for each fixpoint computation.
    #[arg(long, value_name = "N")]
    max_fixpoint_iters: Option<usize>,
    /// Largest number of ground atoms handed to the stable-model oracle.
    /// NORMSPEC_ATOM_CAP takes precedence when set.
    #[arg(long, value_name = "N")]
    atom_cap: Option<usize>,
    /// Accept non-stratified rule cycles whose stable model is unique.
    #[arg(long)]
    oracle_fallback: bool,
    #[arg(long, value_enum, default_value = "sentinel")]
    empty_aggregate: EmptyAggregate,
    /// Machine-readable output.
    #[arg(long)]
    json: bool,
    /// Write output here instead of stdout.
    #[arg(short = 'o', value_name = "FILE")]
    output: Option<PathBuf>,
}

impl Common {
    fn engine(&self) -> Result<EngineOptions, String> {
        let atom_cap = match std::env::var("NORMSPEC_ATOM_CAP") {
            Ok(v) => Some(v.parse().map_err(|_| format!("NORMSPEC_ATOM_CAP is not a number: {v}"))?),
            Err(_) => self.atom_cap,
        };
        Ok(EngineOptions {
            max_fixpoint_iters: self.max_fixpoint_iters,
            atom_cap,
            oracle_fallback: self.oracle_fallback,
            empty_aggregate_error: matches!(self.empty_aggregate, EmptyAggregate::Error),
        })
    }

    fn writer(&self) -> io::Result<Box<dyn Write>> {
        Ok(match &self.output {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(io::stdout().lock()),
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Execute files, printing query results and violations.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Execute files, reporting only failing Boolean queries.
    Test {
        #[command(flatten)]
        common: Common,
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Interactive session, optionally preloaded with files.
    Repl {
        #[command(flatten)]
        common: Common,
        files: Vec<PathBuf>,
    },
    /// JSON-lines service on stdin and stdout.
    Serve {
        #[command(flatten)]
        common: Common,
    },
    /// Translate to clingo-dialect ASP.
    EmitAsp {
        #[command(flatten)]
        common: Common,
        /// Also emit a scenario-search program rooted at the file's statements.
        #[arg(long)]
        search: bool,
        /// Act or event type to choose from at each step (repeatable).
        #[arg(long, value_name = "TYPE")]
        breadth: Vec<String>,
        #[arg(long, default_value_t = 10)]
        depth: usize,
        /// File with clingo rules defining `counterexample`.
        #[arg(long, value_name = "FILE")]
        criterion: Option<PathBuf>,
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Time a performance suite.
    Bench {
        #[command(flatten)]
        common: Common,
        #[arg(value_parser = |s: &str| s.parse::<Suite>())]
        suite: Suite,
        /// Comma-separated sizes; defaults depend on the suite.
        #[arg(long, value_delimiter = ',')]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 10)]
        runs: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_FAILED as u8)
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32, Box<dyn std::error::Error>> {
    let mut err = io::stderr();
    let code = match cli.mode {
        Command::Run { common, files } => run_mode(Mode::Run, common, files, &mut err)?,
        Command::Test { common, files } => run_mode(Mode::Test, common, files, &mut err)?,
        Command::Repl { common, files } => {
            let preload = match parse_files(&files) {
                Ok(ps) => ps,
                Err(e) => {
                    writeln!(err, "parse error: {e}")?;
                    return Ok(EXIT_PARSE);
                }
            };
            let stdin = io::stdin();
            repl::run(common.engine()?, &preload, &mut stdin.lock(), &mut common.writer()?, true)?;
            0
        }
        Command::Serve { common } => {
            let stdin = io::stdin();
            serve::run(common.engine()?, &mut stdin.lock(), &mut common.writer()?)?;
            0
        }
        Command::EmitAsp { common, search, breadth, depth, criterion, files } => {
            let cfg = EmitConfig {
                inputs: files,
                engine: common.engine()?,
                search: search.then_some(SearchOptions { breadth, depth, criterion }),
            };
            emit::emit(&cfg, &mut common.writer()?, &mut err)?
        }
        Command::Bench { common, suite, sizes, runs } => {
            let sizes = if sizes.is_empty() { suite.default_sizes() } else { sizes };
            let rows = bench::bench(suite, &sizes, runs, common.engine()?)?;
            let text = if common.json { bench::csv(&rows) } else { bench::table(&rows) };
            common.writer()?.write_all(text.as_bytes())?;
            0
        }
    };
    Ok(code)
}

fn run_mode(mode: Mode, common: Common, files: Vec<PathBuf>, err: &mut dyn Write) -> Result<i32, Box<dyn std::error::Error>> {
    let cfg = RunConfig { mode, inputs: files, engine: common.engine()?, json: common.json };
    let mut out = common.writer()?;
    let code = run::run_file(&cfg, &mut out, err)?;
    out.flush()?;
    Ok(code)
}
