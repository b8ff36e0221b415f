//! Minimal s-expression reader for solver responses.

use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sexp {
    Atom(String),
    Str(String),
    List(Vec<Sexp>),
}

impl Sexp {
    pub fn as_atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(a) => Some(a),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(l) => Some(l),
            _ => None,
        }
    }
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexp::Atom(a) => write!(f, "{a}"),
            Sexp::Str(s) => write!(f, "\"{}\"", s.replace('"', "\"\"")),
            Sexp::List(items) => {
                write!(f, "(")?;
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{it}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Outcome of trying to read one expression from a buffer.
#[derive(Debug, PartialEq, Eq)]
pub enum Parsed {
    /// A complete expression and the number of bytes consumed.
    Done(Sexp, usize),
    Incomplete,
    Malformed(String),
}

/// Reads the first complete expression in `src`.
pub fn parse_one(src: &str) -> Parsed {
    let bytes = src.as_bytes();
    let mut stack: Vec<Vec<Sexp>> = Vec::new();
    let mut i = 0;
    loop {
        while i < bytes.len() && bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        if i >= bytes.len() {
            return Parsed::Incomplete;
        }
        let item = match bytes[i] {
            b'(' => {
                stack.push(Vec::new());
                i += 1;
                continue;
            }
            b')' => {
                let Some(items) = stack.pop() else {
                    return Parsed::Malformed("unbalanced `)`".into());
                };
                i += 1;
                Sexp::List(items)
            }
            b'"' => {
                let mut s = String::new();
                let mut j = i + 1;
                loop {
                    match bytes.get(j) {
                        None => return Parsed::Incomplete,
                        Some(b'"') if bytes.get(j + 1) == Some(&b'"') => {
                            s.push('"');
                            j += 2;
                        }
                        Some(b'"') => break,
                        Some(_) => {
                            let ch = src[j..].chars().next().unwrap();
                            s.push(ch);
                            j += ch.len_utf8();
                        }
                    }
                }
                i = j + 1;
                Sexp::Str(s)
            }
            b'|' => match src[i + 1..].find('|') {
                None => return Parsed::Incomplete,
                Some(end) => {
                    let atom = src[i..i + end + 2].to_string();
                    i += end + 2;
                    Sexp::Atom(atom)
                }
            },
            _ => {
                let start = i;
                while i < bytes.len()
                    && !bytes[i].is_ascii_whitespace()
                    && !matches!(bytes[i], b'(' | b')' | b'"' | b'|')
                {
                    i += 1;
                }
                Sexp::Atom(src[start..i].to_string())
            }
        };
        match stack.last_mut() {
            Some(top) => top.push(item),
            None => return Parsed::Done(item, i),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(s: &str) -> Sexp {
        match parse_one(s) {
            Parsed::Done(e, _) => e,
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn atoms_lists_and_quoted_symbols() {
        assert_eq!(one("sat\n"), Sexp::Atom("sat".into()));
        let v = one("((|x'| (- 3))\n (|k#2| 0))");
        assert_eq!(v.to_string(), "((|x'| (- 3)) (|k#2| 0))");
        assert_eq!(one("|a b|"), Sexp::Atom("|a b|".into()));
    }

    #[test]
    fn strings_with_doubled_quotes() {
        assert_eq!(one("(error \"say \"\"hi\"\"\")"), Sexp::List(vec![
            Sexp::Atom("error".into()),
            Sexp::Str("say \"hi\"".into())
        ]));
    }

    #[test]
    fn incomplete_and_malformed() {
        assert_eq!(parse_one("((a b)"), Parsed::Incomplete);
        assert_eq!(parse_one("  "), Parsed::Incomplete);
        assert_eq!(parse_one("\"abc"), Parsed::Incomplete);
        assert!(matches!(parse_one(")"), Parsed::Malformed(_)));
    }

    #[test]
    fn reports_consumed_length() {
        assert_eq!(parse_one("sat\nunsat"), Parsed::Done(Sexp::Atom("sat".into()), 3));
    }
}
