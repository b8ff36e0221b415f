use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

/// A program variable name.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(Arc<str>);

impl Var {
    pub fn new(name: &str) -> Self {
        Var(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    pub fn pre(&self) -> Symbol {
        Symbol::Pre(self.clone())
    }

    pub fn post(&self) -> Symbol {
        Symbol::Post(self.clone())
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Var {
    fn from(s: &str) -> Self {
        Var::new(s)
    }
}

/// Free symbol of a transition formula.
///
/// `Pre(x)` is the value of `x` before the transition, `Post(x)` the value
/// after it. `Aux` symbols are fresh, implicitly existentially quantified
/// temporaries (composition intermediates, loop counters, linearization
/// temporaries, difference variables, ...).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    Pre(Var),
    Post(Var),
    Aux { id: u64, hint: Arc<str> },
}

static NEXT_FRESH: AtomicU64 = AtomicU64::new(1);

impl Symbol {
    /// A symbol distinct from every symbol created before.
    pub fn fresh(hint: &str) -> Symbol {
        let id = NEXT_FRESH.fetch_add(1, Ordering::Relaxed);
        Symbol::Aux {
            id,
            hint: Arc::from(hint),
        }
    }

    pub fn is_aux(&self) -> bool {
        matches!(self, Symbol::Aux { .. })
    }

    pub fn is_pre(&self) -> bool {
        matches!(self, Symbol::Pre(_))
    }

    pub fn is_post(&self) -> bool {
        matches!(self, Symbol::Post(_))
    }

    pub fn var(&self) -> Option<&Var> {
        match self {
            Symbol::Pre(v) | Symbol::Post(v) => Some(v),
            Symbol::Aux { .. } => None,
        }
    }

    /// Name used on the solver wire. Always a quoted SMT-LIB symbol.
    pub fn smt_name(&self) -> String {
        format!("|{}|", self)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Pre(v) => write!(f, "{}", v),
            Symbol::Post(v) => write!(f, "{}'", v),
            Symbol::Aux { id, hint } => write!(f, "{}#{}", hint, id),
        }
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
