//! End-to-end driver: parse, build the CFA, summarize paths to each
//! assertion and check it; plus a concrete simulator and a corpus runner.

mod corpus;
mod simulate;

use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::formula::{bool_to_formula, Formula, Var};
use crate::lang::{build_cfa, parse, Cfa, ParseError};
use crate::linearize::lin;
use crate::pathexpr::{path_expression, Evaluator};
use crate::recurrence::{IterationConfig, Lra, StarSummary};
use crate::smt::{SatResult, SolverConfig, SolverError, SolverSession};

pub use corpus::{expectation, run_corpus, CorpusEntry, CorpusSummary, Expectation, ProgramVerdict};
pub use simulate::{random_state, simulate, SimOutcome, SimRun};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AnalysisConfig {
    pub iteration: IterationConfig,
    pub solver: SolverConfig,
    /// Budget for the direct non-linear check of an assertion, before
    /// falling back to linearization.
    pub nonlinear_timeout_ms: u64,
    pub dump_recurrences: bool,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            iteration: IterationConfig::default(),
            solver: SolverConfig::default(),
            nonlinear_timeout_ms: 2_000,
            dump_recurrences: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Proved,
    NotProved,
}

#[derive(Clone, Debug, Serialize)]
pub struct AssertionResult {
    pub line: usize,
    pub verdict: Verdict,
    pub time_ms: u64,
    /// How the verdict was reached, or why the check gave up.
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct LoopReport {
    pub header_line: Option<usize>,
    pub recurrences: Vec<String>,
    pub closed_forms: Vec<String>,
    pub guard: String,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Phases {
    pub parse_ms: u64,
    pub paths_ms: u64,
    pub summarize_ms: u64,
    pub check_ms: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalysisReport {
    pub file: String,
    pub config: AnalysisConfig,
    pub assertions: Vec<AssertionResult>,
    pub loops: Vec<LoopReport>,
    pub phases: Phases,
    pub solver_queries: u64,
}

impl AnalysisReport {
    pub fn all_proved(&self) -> bool {
        self.assertions.iter().all(|a| a.verdict == Verdict::Proved)
    }

    /// Human-readable summary.
    pub fn render(&self) -> String {
        let mut s = format!("{}\n", self.file);
        for a in &self.assertions {
            let v = match a.verdict {
                Verdict::Proved => "proved",
                Verdict::NotProved => "not proved",
            };
            s.push_str(&format!("  assert at line {}: {} ({} ms, {})\n", a.line, v, a.time_ms, a.detail));
        }
        if self.config.dump_recurrences {
            for l in &self.loops {
                let at = l.header_line.map_or("?".to_string(), |n| n.to_string());
                s.push_str(&format!("  loop at line {at}\n"));
                for r in &l.recurrences {
                    s.push_str(&format!("    recurrence  {r}\n"));
                }
                for c in &l.closed_forms {
                    s.push_str(&format!("    closed form {c}\n"));
                }
                s.push_str(&format!("    guard       {}\n", l.guard));
                for n in &l.notes {
                    s.push_str(&format!("    note        {n}\n"));
                }
            }
        }
        s
    }
}

#[derive(Debug, Error)]
pub enum AnalyzeError {
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("{0}")]
    Solver(#[from] SolverError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

fn millis(t: Instant) -> u64 {
    t.elapsed().as_millis() as u64
}

fn loop_report(cfa: &Cfa, s: &StarSummary) -> LoopReport {
    LoopReport {
        header_line: s.header.and_then(|h| cfa.loop_headers.get(&h).copied()),
        recurrences: s.recurrences.iter().filter(|r| !r.is_stable()).map(|r| r.to_string()).collect(),
        closed_forms: s
            .recurrences
            .iter()
            .zip(&s.closed_forms)
            .filter(|(r, _)| !r.is_stable())
            .map(|(_, c)| c.to_string())
            .collect(),
        guard: s.guard.to_string(),
        notes: s.notes.clone(),
    }
}

/// Decides `phi ⊨ goal`: a direct check (with a short budget when
/// non-linear), then a linearized one.
pub fn check_entailment(
    session: &mut SolverSession,
    phi: &Formula,
    goal: &Formula,
    nonlinear_timeout_ms: u64,
) -> Result<(Verdict, String), SolverError> {
    let query = Formula::and(vec![phi.clone(), goal.negate()]);
    if query.is_linear() {
        return Ok(match session.check_sat(&query) {
            Ok(SatResult::Unsat) => (Verdict::Proved, "linear".into()),
            Ok(SatResult::Sat) => (Verdict::NotProved, "counterexample".into()),
            Ok(SatResult::Unknown) => (Verdict::NotProved, "unknown".into()),
            Err(e @ (SolverError::Spawn(..) | SolverError::Protocol(_))) => return Err(e),
            Err(e) => (Verdict::NotProved, e.to_string()),
        });
    }
    let saved = session.timeout_ms();
    session.set_timeout(nonlinear_timeout_ms.min(saved))?;
    let direct = session.check_sat(&query);
    session.set_timeout(saved)?;
    match direct {
        Ok(SatResult::Unsat) => return Ok((Verdict::Proved, "non-linear".into())),
        Ok(_) | Err(SolverError::Timeout) | Err(SolverError::Unknown(_)) | Err(SolverError::Crash(_)) => {}
        Err(e) => return Err(e),
    }
    let l = match lin(session, &query) {
        Ok(l) => l,
        Err(e @ (SolverError::Spawn(..) | SolverError::Protocol(_))) => return Err(e),
        Err(e) => return Ok((Verdict::NotProved, format!("linearization: {e}"))),
    };
    Ok(match session.check_sat(&l.formula) {
        Ok(SatResult::Unsat) => (Verdict::Proved, "linearized".into()),
        Ok(SatResult::Sat) => (Verdict::NotProved, "linearized counterexample".into()),
        Ok(SatResult::Unknown) => (Verdict::NotProved, "unknown".into()),
        Err(e @ (SolverError::Spawn(..) | SolverError::Protocol(_))) => return Err(e),
        Err(e) => (Verdict::NotProved, e.to_string()),
    })
}

/// Everything computed for one program: the CFA, the summary reaching each
/// assertion, and the loop summaries.
pub struct Analysis {
    pub cfa: Cfa,
    pub report: AnalysisReport,
    /// Path summary per assertion vertex, in assertion order.
    pub paths: Vec<(usize, Formula)>,
    pub summaries: Vec<StarSummary>,
}

/// Analyzes `source`, named `file` in the report.
pub fn analyze_detailed(file: &str, source: &str, cfg: &AnalysisConfig) -> Result<Analysis, AnalyzeError> {
    let mut phases = Phases::default();
    let t = Instant::now();
    let program = parse(source)?;
    let cfa = build_cfa(&program);
    phases.parse_ms = millis(t);

    let mut session = SolverSession::new(cfg.solver.clone())?;
    let mut lra = Lra::new(&mut session, cfa.vars.clone(), cfg.iteration.clone());
    let mut evaluator = Evaluator::new();
    let mut pending = Vec::new();
    for (&v, point) in &cfa.assert_points {
        let t = Instant::now();
        let pe = path_expression(&cfa, v);
        phases.paths_ms += millis(t);
        let t = Instant::now();
        let phi = match pe {
            Ok(pe) => Some(evaluator.eval(&pe, &cfa, &mut lra)?),
            Err(_) => None,
        };
        let spent = millis(t);
        phases.summarize_ms += spent;
        pending.push((point.line, point.cond.clone(), phi, spent));
    }
    let summaries = std::mem::take(&mut lra.summaries);
    drop(lra);

    let mut assertions = Vec::new();
    let mut paths = Vec::new();
    for (line, cond, phi, spent) in pending {
        let t = Instant::now();
        let goal = bool_to_formula(&cond, &|n: &str| Var::new(n).post());
        let (verdict, detail) = match &phi {
            None => (Verdict::Proved, "unreachable".to_string()),
            Some(phi) => check_entailment(&mut session, phi.formula(), &goal, cfg.nonlinear_timeout_ms)?,
        };
        let check = millis(t);
        phases.check_ms += check;
        assertions.push(AssertionResult {
            line,
            verdict,
            time_ms: spent + check,
            detail,
        });
        paths.push((line, phi.map(|p| p.into_formula()).unwrap_or(Formula::False)));
    }

    let mut loops: Vec<LoopReport> = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for s in &summaries {
        if seen.insert(s.header) {
            loops.push(loop_report(&cfa, s));
        }
    }
    let report = AnalysisReport {
        file: file.to_string(),
        config: cfg.clone(),
        assertions,
        loops,
        phases,
        solver_queries: session.queries(),
    };
    Ok(Analysis {
        cfa,
        report,
        paths,
        summaries,
    })
}

pub fn analyze(file: &str, source: &str, cfg: &AnalysisConfig) -> Result<AnalysisReport, AnalyzeError> {
    Ok(analyze_detailed(file, source, cfg)?.report)
}

pub fn analyze_file(path: &Path, cfg: &AnalysisConfig) -> Result<AnalysisReport, AnalyzeError> {
    let source = std::fs::read_to_string(path)?;
    analyze(&path.display().to_string(), &source, cfg)
}
