use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::{analyze, AnalysisConfig, AnalysisReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Expectation {
    Safe,
    Unsafe,
}

/// The `// expect: safe|unsafe` annotation of a program, if any.
pub fn expectation(source: &str) -> Option<Expectation> {
    source.lines().find_map(|l| {
        let rest = l.trim().strip_prefix("//")?.trim().strip_prefix("expect:")?;
        match rest.trim() {
            "safe" => Some(Expectation::Safe),
            "unsafe" => Some(Expectation::Unsafe),
            _ => None,
        }
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProgramVerdict {
    /// Every assertion proved.
    Proved,
    NotProved,
    Error(String),
}

#[derive(Clone, Debug, Serialize)]
pub struct CorpusEntry {
    pub file: String,
    pub expect: Option<Expectation>,
    pub verdict: ProgramVerdict,
    pub time_ms: u64,
    #[serde(skip)]
    pub report: Option<AnalysisReport>,
}

impl CorpusEntry {
    /// An unsafe program whose assertions were all proved.
    pub fn is_unsound(&self) -> bool {
        self.expect == Some(Expectation::Unsafe) && self.verdict == ProgramVerdict::Proved
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CorpusSummary {
    pub entries: Vec<CorpusEntry>,
}

impl CorpusSummary {
    fn count(&self, e: Expectation, proved: bool) -> usize {
        self.entries
            .iter()
            .filter(|x| x.expect == Some(e) && (!proved || x.verdict == ProgramVerdict::Proved))
            .count()
    }

    pub fn safe_total(&self) -> usize {
        self.count(Expectation::Safe, false)
    }

    pub fn safe_proved(&self) -> usize {
        self.count(Expectation::Safe, true)
    }

    pub fn unsafe_total(&self) -> usize {
        self.count(Expectation::Unsafe, false)
    }

    pub fn unsafe_proved(&self) -> usize {
        self.count(Expectation::Unsafe, true)
    }

    pub fn unsound(&self) -> Vec<&CorpusEntry> {
        self.entries.iter().filter(|e| e.is_unsound()).collect()
    }

    /// Safe programs that were not proved.
    pub fn precision_misses(&self) -> Vec<&CorpusEntry> {
        self.entries
            .iter()
            .filter(|e| e.expect == Some(Expectation::Safe) && e.verdict != ProgramVerdict::Proved)
            .collect()
    }

    pub fn mean_ms(&self) -> f64 {
        if self.entries.is_empty() {
            return 0.0;
        }
        self.entries.iter().map(|e| e.time_ms as f64).sum::<f64>() / self.entries.len() as f64
    }

    pub fn median_ms(&self) -> u64 {
        let mut ts: Vec<u64> = self.entries.iter().map(|e| e.time_ms).collect();
        ts.sort_unstable();
        match ts.len() {
            0 => 0,
            n if n % 2 == 1 => ts[n / 2],
            n => (ts[n / 2 - 1] + ts[n / 2]) / 2,
        }
    }

    /// 0 when no unsafe program was proved, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.unsound().is_empty() {
            0
        } else {
            2
        }
    }

    pub fn table(&self) -> String {
        let width = self.entries.iter().map(|e| e.file.len()).max().unwrap_or(4).max(4);
        let mut s = format!("{:<width$}  {:<7}  {:<11}  {:>8}\n", "file", "expect", "verdict", "ms");
        for e in &self.entries {
            let expect = match e.expect {
                Some(Expectation::Safe) => "safe",
                Some(Expectation::Unsafe) => "unsafe",
                None => "-",
            };
            let verdict = match &e.verdict {
                ProgramVerdict::Proved => "proved".to_string(),
                ProgramVerdict::NotProved => "not proved".to_string(),
                ProgramVerdict::Error(m) => format!("error: {m}"),
            };
            let flag = if e.is_unsound() { "  UNSOUND" } else { "" };
            s.push_str(&format!("{:<width$}  {:<7}  {:<11}  {:>8}{flag}\n", e.file, expect, verdict, e.time_ms));
        }
        s.push_str(&format!(
            "safe proved {}/{}, unsafe proved {}/{}, mean {:.0} ms, median {} ms\n",
            self.safe_proved(),
            self.safe_total(),
            self.unsafe_proved(),
            self.unsafe_total(),
            self.mean_ms(),
            self.median_ms()
        ));
        s
    }
}

fn program_files(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "imp"))
        .collect();
    files.sort();
    Ok(files)
}

/// Analyzes every `.imp` file of `dir` in parallel.
pub fn run_corpus(dir: &Path, cfg: &AnalysisConfig) -> std::io::Result<CorpusSummary> {
    let files = program_files(dir)?;
    let entries = files
        .par_iter()
        .map(|path| {
            let name = path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned());
            let t = Instant::now();
            let (expect, verdict, report) = match std::fs::read_to_string(path) {
                Err(e) => (None, ProgramVerdict::Error(e.to_string()), None),
                Ok(src) => {
                    let expect = expectation(&src);
                    match analyze(&name, &src, cfg) {
                        Ok(r) => {
                            let v = if r.all_proved() { ProgramVerdict::Proved } else { ProgramVerdict::NotProved };
                            (expect, v, Some(r))
                        }
                        Err(e) => (expect, ProgramVerdict::Error(e.to_string()), None),
                    }
                }
            };
            CorpusEntry {
                file: name,
                expect,
                verdict,
                time_ms: t.elapsed().as_millis() as u64,
                report,
            }
        })
        .collect();
    Ok(CorpusSummary { entries })
}
