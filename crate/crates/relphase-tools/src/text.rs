//! Line-oriented circuit text format.
//!
//! ```text
//! qubits 3 cbits 1
//! g h 2
//! cg 0 1 cz 0 1
//! measz 2 0
//! alloc 2 clean
//! release 2 zero
//! ```
//!
//! Blank lines and lines starting with `#` are skipped on input. Output is
//! produced by [`Circuit::to_text`], so `render(parse(s)) == s` for any `s`
//! that `render` produced.

use std::fmt;

use relphase::circuit::{AncillaKind, Event, Gate, GateKind, Release, Role};
use relphase::Circuit;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ParseError {}

pub fn render(c: &Circuit) -> String {
    c.to_text()
}

struct Cursor<'a> {
    line: usize,
    words: std::str::SplitWhitespace<'a>,
}

impl<'a> Cursor<'a> {
    fn err(&self, message: impl Into<String>) -> ParseError {
        ParseError { line: self.line, message: message.into() }
    }

    fn word(&mut self, what: &str) -> Result<&'a str, ParseError> {
        self.words.next().ok_or_else(|| self.err(format!("expected {}", what)))
    }

    fn num(&mut self, what: &str) -> Result<usize, ParseError> {
        let w = self.word(what)?;
        w.parse().map_err(|_| self.err(format!("{} must be a non-negative integer, got '{}'", what, w)))
    }

    fn rest(&mut self) -> Result<Vec<usize>, ParseError> {
        let mut out = Vec::new();
        while let Some(w) = self.words.next() {
            out.push(w.parse().map_err(|_| self.err(format!("bad qubit '{}'", w)))?);
        }
        Ok(out)
    }

    fn done(&mut self) -> Result<(), ParseError> {
        match self.words.next() {
            None => Ok(()),
            Some(w) => Err(self.err(format!("unexpected '{}'", w))),
        }
    }
}

fn gate(cur: &mut Cursor, condition: Option<(usize, bool)>) -> Result<Event, ParseError> {
    let name = cur.word("gate name")?;
    let qubits = cur.rest()?;
    let kind = GateKind::from_name(name, qubits.len()).ok_or_else(|| cur.err(format!("unknown gate '{}'", name)))?;
    if qubits.len() != kind.arity() {
        return Err(cur.err(format!("{} takes {} qubits, got {}", name, kind.arity(), qubits.len())));
    }
    Ok(Event::Gate(Gate { kind, qubits, condition }))
}

fn event(cur: &mut Cursor, head: &str) -> Result<Event, ParseError> {
    let e = match head {
        "g" => return gate(cur, None),
        "cg" => {
            let bit = cur.num("classical bit")?;
            let val = match cur.word("condition value")? {
                "0" => false,
                "1" => true,
                v => return Err(cur.err(format!("condition value must be 0 or 1, got '{}'", v))),
            };
            return gate(cur, Some((bit, val)));
        }
        "measz" => Event::MeasureZ { qubit: cur.num("qubit")?, bit: cur.num("classical bit")? },
        "alloc" => {
            let qubit = cur.num("qubit")?;
            let kind = match cur.word("ancilla kind")? {
                "clean" => AncillaKind::Clean,
                "dirty" => AncillaKind::Dirty,
                k => return Err(cur.err(format!("ancilla kind must be clean or dirty, got '{}'", k))),
            };
            Event::Alloc { qubit, kind }
        }
        "release" => {
            let qubit = cur.num("qubit")?;
            let expect = match cur.word("release promise")? {
                "zero" => Release::Zero,
                "unchanged" => Release::Unchanged,
                "measured" => Release::Measured,
                r => return Err(cur.err(format!("release promise must be zero, unchanged or measured, got '{}'", r))),
            };
            Event::Release { qubit, expect }
        }
        other => return Err(cur.err(format!("unknown event '{}'", other))),
    };
    cur.done()?;
    Ok(e)
}

/// Parse a circuit. A qubit whose first event is an `alloc` gets the
/// matching ancilla role; every other qubit is an input.
pub fn parse(text: &str) -> Result<Circuit, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (line, header) = lines.next().ok_or(ParseError { line: 1, message: "empty circuit".into() })?;
    let mut cur = Cursor { line, words: header.split_whitespace() };
    if cur.word("header")? != "qubits" {
        return Err(cur.err("header must be 'qubits <n> cbits <m>'"));
    }
    let n = cur.num("qubit count")?;
    if cur.word("'cbits'")? != "cbits" {
        return Err(cur.err("header must be 'qubits <n> cbits <m>'"));
    }
    let m = cur.num("cbit count")?;
    cur.done()?;

    let mut c = Circuit::new(n, m);
    let mut seen = vec![false; n];
    for (line, l) in lines {
        let mut cur = Cursor { line, words: l.split_whitespace() };
        let head = cur.word("event")?;
        let e = event(&mut cur, head)?;
        let touched: Vec<usize> = match &e {
            Event::Gate(g) => g.qubits.clone(),
            Event::MeasureZ { qubit, .. } | Event::Alloc { qubit, .. } | Event::Release { qubit, .. } => vec![*qubit],
        };
        if let Some(&q) = touched.iter().find(|&&q| q >= n) {
            return Err(cur.err(format!("qubit {} out of range for {} qubits", q, n)));
        }
        if let Event::Alloc { qubit, kind } = &e {
            if !seen[*qubit] {
                c.io_spec[*qubit] = match kind {
                    AncillaKind::Clean => Role::Clean,
                    AncillaKind::Dirty => Role::Dirty,
                };
            }
        }
        for q in touched {
            seen[q] = true;
        }
        c.events.push(e);
    }
    c.validate().map_err(|e| ParseError { line: 0, message: e.to_string() })?;
    Ok(c)
}
