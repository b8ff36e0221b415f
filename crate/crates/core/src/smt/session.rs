use std::collections::BTreeSet;
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::sexp::{parse_one, Parsed, Sexp};
use super::{Interval, Model, SatResult, SolverConfig, SolverError};
use crate::formula::{Formula, Symbol, Term};
use crate::Rational;

/// Extra wall-clock allowance on top of the solver's own timeout before the
/// process is considered hung.
const GRACE: Duration = Duration::from_secs(5);
const OPTIMIZE_PROBES: usize = 40;

/// A running solver process spoken to over SMT-LIB2 text.
///
/// All symbols are declared as `Int`. Declarations are global, so they survive
/// `pop`; [`SolverSession::reset`] clears everything.
pub struct SolverSession {
    config: SolverConfig,
    child: Child,
    stdin: ChildStdin,
    rx: Receiver<String>,
    buf: String,
    declared: BTreeSet<String>,
    depth: usize,
    timeout_ms: u64,
    queries: u64,
    last_reason: String,
    /// Bumped whenever the process is restarted and its state lost.
    generation: u64,
}

impl SolverSession {
    pub fn new(config: SolverConfig) -> Result<Self, SolverError> {
        let (child, stdin, rx) = Self::spawn(&config)?;
        let timeout_ms = config.timeout_ms;
        let mut s = SolverSession {
            config,
            child,
            stdin,
            rx,
            buf: String::new(),
            declared: BTreeSet::new(),
            depth: 0,
            timeout_ms,
            queries: 0,
            last_reason: String::new(),
            generation: 0,
        };
        s.init()?;
        Ok(s)
    }

    fn spawn(config: &SolverConfig) -> Result<(Child, ChildStdin, Receiver<String>), SolverError> {
        let mut words = config.command.split_whitespace();
        let program = words
            .next()
            .ok_or_else(|| SolverError::Spawn(config.command.clone(), "empty command".into()))?;
        let mut args: Vec<&str> = words.collect();
        if args.is_empty() {
            args = vec!["-in", "-smt2"];
        }
        let mut child = Command::new(program)
            .args(&args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| SolverError::Spawn(config.command.clone(), e.to_string()))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let Ok(mut line) = line else { break };
                line.push('\n');
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok((child, stdin, rx))
    }

    fn init(&mut self) -> Result<(), SolverError> {
        self.send_raw("(set-option :print-success true)")?;
        self.expect_success()?;
        self.ok("(set-option :global-declarations true)")?;
        self.ok("(set-option :produce-models true)")?;
        self.ok(&format!("(set-option :timeout {})", self.timeout_ms))
    }

    /// Kills a hung or dead process and starts a fresh one.
    fn respawn(&mut self) -> Result<(), SolverError> {
        let _ = self.child.kill();
        let _ = self.child.wait();
        let (child, stdin, rx) = Self::spawn(&self.config)?;
        self.child = child;
        self.stdin = stdin;
        self.rx = rx;
        self.buf.clear();
        self.declared.clear();
        self.depth = 0;
        self.generation += 1;
        self.init()
    }

    fn send_raw(&mut self, cmd: &str) -> Result<(), SolverError> {
        writeln!(self.stdin, "{cmd}")
            .and_then(|_| self.stdin.flush())
            .map_err(|e| SolverError::Crash(e.to_string()))
    }

    fn read_response(&mut self) -> Result<Sexp, SolverError> {
        let deadline = Instant::now() + Duration::from_millis(self.timeout_ms) + GRACE;
        loop {
            match parse_one(&self.buf) {
                Parsed::Done(e, n) => {
                    self.buf.drain(..n);
                    return Ok(e);
                }
                Parsed::Malformed(m) => {
                    self.buf.clear();
                    return Err(SolverError::Protocol(m));
                }
                Parsed::Incomplete => {}
            }
            let left = deadline.saturating_duration_since(Instant::now());
            match self.rx.recv_timeout(left) {
                Ok(line) => self.buf.push_str(&line),
                Err(RecvTimeoutError::Timeout) => {
                    self.respawn()?;
                    return Err(SolverError::Timeout);
                }
                Err(RecvTimeoutError::Disconnected) => {
                    let status = self.child.try_wait().ok().flatten();
                    self.respawn()?;
                    return Err(SolverError::Crash(format!("solver exited ({status:?})")));
                }
            }
        }
    }

    fn command(&mut self, cmd: &str) -> Result<Sexp, SolverError> {
        self.send_raw(cmd)?;
        let r = self.read_response()?;
        if let Some([Sexp::Atom(head), rest @ ..]) = r.as_list() {
            if head == "error" {
                let msg = rest.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ");
                return Err(SolverError::Protocol(format!("{msg} (in {cmd})")));
            }
        }
        Ok(r)
    }

    fn expect_success(&mut self) -> Result<(), SolverError> {
        match self.read_response()? {
            Sexp::Atom(a) if a == "success" => Ok(()),
            other => Err(SolverError::Protocol(format!("expected success, got {other}"))),
        }
    }

    fn ok(&mut self, cmd: &str) -> Result<(), SolverError> {
        match self.command(cmd)? {
            Sexp::Atom(a) if a == "success" => Ok(()),
            other => Err(SolverError::Protocol(format!("expected success, got {other}"))),
        }
    }

    pub fn timeout_ms(&self) -> u64 {
        self.timeout_ms
    }

    /// Per-query timeout in milliseconds.
    pub fn set_timeout(&mut self, ms: u64) -> Result<(), SolverError> {
        self.timeout_ms = ms;
        self.ok(&format!("(set-option :timeout {ms})"))
    }

    /// Number of `check-sat` calls issued so far.
    pub fn queries(&self) -> u64 {
        self.queries
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Drops all assertions and declarations.
    pub fn reset(&mut self) -> Result<(), SolverError> {
        self.ok("(reset)")?;
        self.declared.clear();
        self.depth = 0;
        self.init()
    }

    pub fn push(&mut self) -> Result<(), SolverError> {
        self.ok("(push 1)")?;
        self.depth += 1;
        Ok(())
    }

    pub fn pop(&mut self) -> Result<(), SolverError> {
        assert!(self.depth > 0, "pop without matching push");
        self.ok("(pop 1)")?;
        self.depth -= 1;
        Ok(())
    }

    pub fn declare(&mut self, s: &Symbol) -> Result<(), SolverError> {
        let name = s.smt_name();
        if self.declared.contains(&name) {
            return Ok(());
        }
        self.ok(&format!("(declare-const {name} Int)"))?;
        self.declared.insert(name);
        Ok(())
    }

    /// Declares an uninterpreted function `Int^arity -> Int`.
    pub fn declare_fun(&mut self, name: &str, arity: usize) -> Result<(), SolverError> {
        let key = format!("|{name}|");
        if self.declared.contains(&key) {
            return Ok(());
        }
        let dom = vec!["Int"; arity].join(" ");
        self.ok(&format!("(declare-fun {key} ({dom}) Int)"))?;
        self.declared.insert(key);
        Ok(())
    }

    pub fn assert(&mut self, f: &Formula) -> Result<(), SolverError> {
        for s in f.symbols() {
            self.declare(&s)?;
        }
        self.ok(&format!("(assert {})", f.to_smt()))
    }

    /// Asserts SMT-LIB text verbatim; its symbols must already be declared.
    pub fn assert_raw(&mut self, text: &str) -> Result<(), SolverError> {
        self.ok(&format!("(assert {text})"))
    }

    pub fn check(&mut self) -> Result<SatResult, SolverError> {
        self.queries += 1;
        match self.command("(check-sat)")? {
            Sexp::Atom(a) if a == "sat" => Ok(SatResult::Sat),
            Sexp::Atom(a) if a == "unsat" => Ok(SatResult::Unsat),
            Sexp::Atom(a) if a == "unknown" => {
                self.last_reason = match self.command("(get-info :reason-unknown)") {
                    Ok(r) => r.to_string(),
                    Err(_) => "unknown".into(),
                };
                Ok(SatResult::Unknown)
            }
            other => Err(SolverError::Protocol(format!("unexpected check-sat reply {other}"))),
        }
    }

    /// Error describing the last `unknown` answer.
    pub fn unknown_error(&self) -> SolverError {
        if self.last_reason.contains("timeout") || self.last_reason.contains("canceled") {
            SolverError::Timeout
        } else {
            SolverError::Unknown(self.last_reason.clone())
        }
    }

    /// Values of SMT-LIB terms in the current model.
    pub fn values(&mut self, terms: &[String]) -> Result<Vec<Rational>, SolverError> {
        if terms.is_empty() {
            return Ok(Vec::new());
        }
        let reply = self.command(&format!("(get-value ({}))", terms.join(" ")))?;
        let pairs = reply
            .as_list()
            .ok_or_else(|| SolverError::Protocol(format!("bad get-value reply {reply}")))?;
        if pairs.len() != terms.len() {
            return Err(SolverError::Protocol(format!("bad get-value reply {reply}")));
        }
        pairs
            .iter()
            .map(|p| match p.as_list() {
                Some([_, v]) => parse_value(v),
                _ => Err(SolverError::Protocol(format!("bad get-value pair {p}"))),
            })
            .collect()
    }

    /// Model restricted to `syms` after a `sat` answer.
    pub fn model_for<'a, I>(&mut self, syms: I) -> Result<Model, SolverError>
    where
        I: IntoIterator<Item = &'a Symbol>,
    {
        let syms: Vec<Symbol> = syms.into_iter().cloned().collect();
        for s in &syms {
            self.declare(s)?;
        }
        let names: Vec<String> = syms.iter().map(|s| s.smt_name()).collect();
        let vals = self.values(&names)?;
        Ok(Model::new(syms.into_iter().zip(vals).collect()))
    }

    /// One-shot satisfiability of `f` on a fresh assertion stack.
    pub fn check_sat(&mut self, f: &Formula) -> Result<SatResult, SolverError> {
        self.reset()?;
        self.assert(f)?;
        self.check()
    }

    /// A model of `f` over all of its symbols, or `None` if `f` is unsat.
    pub fn get_model(&mut self, f: &Formula) -> Result<Option<Model>, SolverError> {
        match self.check_sat(f)? {
            SatResult::Unsat => Ok(None),
            SatResult::Unknown => Err(self.unknown_error()),
            SatResult::Sat => {
                let m = self.model_for(&f.symbols())?;
                if let Ok(false) = m.eval_formula(f) {
                    return Err(SolverError::Protocol(format!("model {m} does not satisfy query")));
                }
                Ok(Some(m))
            }
        }
    }

    /// `phi ⊨ psi`, i.e. `phi ∧ ¬psi` is unsat. An inconclusive answer is an error.
    pub fn entails(&mut self, phi: &Formula, psi: &Formula) -> Result<bool, SolverError> {
        let q = Formula::and(vec![phi.clone(), psi.negate()]);
        match self.check_sat(&q)? {
            SatResult::Unsat => Ok(true),
            SatResult::Sat => Ok(false),
            SatResult::Unknown => Err(self.unknown_error()),
        }
    }

    /// Certified bounds of the linear term `t` over the models of `phi`, or
    /// `None` if `phi` is unsat.
    ///
    /// Each side is found by probing `t > b` for growing `b` until a probe is
    /// unsat, then bisecting between the best witness and the certified bound.
    /// A side with no certificate within the probe budget is unbounded.
    pub fn optimize_bounds(&mut self, phi: &Formula, t: &Term) -> Result<Option<Interval>, SolverError> {
        assert!(t.is_linear(), "optimize_bounds needs a linear term");
        let l = Rational::from_integer(t.denominator_lcm());
        let scaled = t.scale(&l);
        self.reset()?;
        self.assert(phi)?;
        match self.check()? {
            SatResult::Unsat => return Ok(None),
            SatResult::Unknown => return Ok(Some(Interval::top())),
            SatResult::Sat => {}
        }
        if let Some(c) = t.as_constant() {
            return Ok(Some(Interval::point(c.clone())));
        }
        for s in scaled.symbols() {
            self.declare(&s)?;
        }
        let start = self.values(&[scaled.to_smt()])?[0].to_integer();
        let generation = self.generation;
        let hi = self.side(&scaled, start.clone())?;
        if self.generation != generation {
            self.assert(phi)?;
            if self.check()? != SatResult::Sat {
                return Ok(Some(Interval { lo: None, hi: hi.map(|b| Rational::from_integer(b) / &l) }));
            }
        }
        let lo = self.side(&-scaled.clone(), -start)?.map(|b| -b);
        let unscale = |b: BigInt| Rational::from_integer(b) / &l;
        Ok(Some(Interval {
            lo: lo.map(unscale),
            hi: hi.map(unscale),
        }))
    }

    fn side(&mut self, u: &Term, start: BigInt) -> Result<Option<BigInt>, SolverError> {
        match self.supremum(u, start) {
            Err(SolverError::Timeout) => Ok(None),
            r => r,
        }
    }

    /// Is `u > b` satisfiable under the current assertions? `Some(Some(v))`
    /// gives a witness value, `Some(None)` means unsat.
    fn probe(&mut self, u: &Term, b: &BigInt) -> Result<Option<Option<BigInt>>, SolverError> {
        self.push()?;
        let bound = Term::constant(Rational::from_integer(b.clone()));
        let r = (|| {
            self.assert(&Formula::lt(bound, u.clone()))?;
            Ok(match self.check()? {
                SatResult::Unsat => Some(None),
                SatResult::Unknown => None,
                SatResult::Sat => Some(Some(self.values(&[u.to_smt()])?[0].to_integer())),
            })
        })();
        // a timeout restarts the process, which drops the stack with it
        let v = r?;
        self.pop()?;
        Ok(v)
    }

    fn supremum(&mut self, u: &Term, mut witness: BigInt) -> Result<Option<BigInt>, SolverError> {
        let mut budget = OPTIMIZE_PROBES;
        let mut step = BigInt::one();
        let mut bound = witness.clone();
        let mut cert = loop {
            if budget == 0 {
                return Ok(None);
            }
            budget -= 1;
            match self.probe(u, &bound)? {
                None => return Ok(None),
                Some(None) => break bound,
                Some(Some(w)) => {
                    witness = w;
                    bound = &witness + &step;
                    step *= 2;
                }
            }
        };
        while witness < cert && budget > 0 {
            budget -= 1;
            let mid = (&witness + &cert).div_floor(&BigInt::from(2));
            match self.probe(u, &mid)? {
                None => break,
                Some(None) => cert = mid,
                Some(Some(w)) => witness = w,
            }
        }
        Ok(Some(cert))
    }
}

impl Drop for SolverSession {
    fn drop(&mut self) {
        let _ = writeln!(self.stdin, "(exit)");
        let _ = self.stdin.flush();
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

fn parse_value(v: &Sexp) -> Result<Rational, SolverError> {
    let bad = || SolverError::Protocol(format!("unsupported value {v}"));
    match v {
        Sexp::Atom(a) => {
            if let Some((int, frac)) = a.split_once('.') {
                let digits = format!("{int}{frac}");
                let n: BigInt = digits.parse().map_err(|_| bad())?;
                let d = num_traits::pow(BigInt::from(10), frac.len());
                Ok(Rational::new(n, d))
            } else {
                a.parse::<BigInt>().map(Rational::from_integer).map_err(|_| bad())
            }
        }
        Sexp::List(items) => match items.as_slice() {
            [Sexp::Atom(op), x] if op == "-" => Ok(-parse_value(x)?),
            [Sexp::Atom(op), x, y] if op == "/" => {
                let d = parse_value(y)?;
                if d.is_zero() {
                    return Err(bad());
                }
                Ok(parse_value(x)? / d)
            }
            _ => Err(bad()),
        },
        Sexp::Str(_) => Err(bad()),
    }
}
