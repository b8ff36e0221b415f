use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use lra::analyzer::{
    analyze_file, expectation, random_state, run_corpus, simulate, AnalysisConfig, Expectation, SimOutcome,
};
use lra::lang::{build_cfa, parse};
use lra::recurrence::GuardStrategy;
use lra::smt::SolverConfig;

#[derive(Parser)]
#[command(name = "lra", version, about = "Invariant generation by linear recurrence analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the assertions of a program.
    Analyze {
        file: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// Analyze every `.imp` file of a directory against its `// expect:` annotation.
    Corpus {
        dir: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// Run a program on a random initial state.
    Simulate {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
    },
}

#[derive(Args)]
struct Opts {
    #[arg(long, default_value = "hull")]
    guard: GuardStrategy,
    #[arg(long)]
    no_inequations: bool,
    #[arg(long)]
    no_stratified: bool,
    #[arg(long)]
    max_stratum: Option<usize>,
    /// Per-query solver timeout.
    #[arg(long)]
    timeout_ms: Option<u64>,
    /// Solver command; defaults to $LRA_SOLVER, then `z3`.
    #[arg(long)]
    solver: Option<String>,
    #[arg(long)]
    dump_recurrences: bool,
    /// Write the JSON report here.
    #[arg(long)]
    json: Option<PathBuf>,
}

impl Opts {
    fn config(&self) -> AnalysisConfig {
        let mut cfg = AnalysisConfig::default();
        cfg.iteration.guard = self.guard;
        cfg.iteration.inequations = !self.no_inequations;
        cfg.iteration.stratified = !self.no_stratified;
        cfg.iteration.max_stratum = self.max_stratum;
        let mut solver = SolverConfig::default();
        if let Some(s) = &self.solver {
            solver.command = s.clone();
        }
        if let Some(t) = self.timeout_ms {
            solver.timeout_ms = t;
        }
        cfg.solver = solver;
        cfg.dump_recurrences = self.dump_recurrences;
        cfg
    }
}

const UNSOUND: u8 = 2;
const USAGE: u8 = 3;

fn write_json<T: serde::Serialize>(path: &PathBuf, value: &T) -> Result<(), String> {
    let text = serde_json::to_string_pretty(value).map_err(|e| e.to_string())?;
    std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

fn run(cli: Cli) -> Result<u8, String> {
    match cli.command {
        Command::Analyze { file, opts } => {
            let report = analyze_file(&file, &opts.config()).map_err(|e| format!("{}: {e}", file.display()))?;
            print!("{}", report.render());
            if let Some(out) = &opts.json {
                write_json(out, &report)?;
            }
            let source = std::fs::read_to_string(&file).map_err(|e| e.to_string())?;
            if expectation(&source) == Some(Expectation::Unsafe) && report.all_proved() {
                eprintln!("{}: expected unsafe but every assertion was proved", file.display());
                return Ok(UNSOUND);
            }
            Ok(0)
        }
        Command::Corpus { dir, opts } => {
            let summary = run_corpus(&dir, &opts.config()).map_err(|e| format!("{}: {e}", dir.display()))?;
            print!("{}", summary.table());
            if let Some(out) = &opts.json {
                write_json(out, &summary)?;
            }
            Ok(summary.exit_code() as u8)
        }
        Command::Simulate { file, seed, steps } => {
            let source = std::fs::read_to_string(&file).map_err(|e| format!("{}: {e}", file.display()))?;
            let cfa = build_cfa(&parse(&source).map_err(|e| format!("{}: {e}", file.display()))?);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let init = random_state(&cfa, &mut rng, 20);
            let run = simulate(&cfa, init, &mut rng, steps, 20);
            let show = |env: &lra::lang::Env| {
                env.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" ")
            };
            println!("initial  {}", show(&run.init));
            println!("final    {}", show(run.final_state()));
            println!("steps    {}", run.states.len() - 1);
            let outcome = match &run.outcome {
                SimOutcome::Terminated => "terminated".to_string(),
                SimOutcome::AssertViolation { line } => format!("assertion at line {line} violated"),
                SimOutcome::Blocked => "blocked".to_string(),
                SimOutcome::StepLimit => "step limit reached".to_string(),
                SimOutcome::Error(e) => format!("runtime error: {e}"),
            };
            println!("outcome  {outcome}");
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(USAGE)
        }
    }
}
