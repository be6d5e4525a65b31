//! Circuit intermediate representation.
//!
//! Qubit 0 is the most significant bit of a basis index, matching the
//! top-wire-first reading of circuit diagrams.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Gate kinds. Multiply-controlled `Lambda*` kinds are verification targets
/// only and have no expansion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateKind {
    X,
    Z,
    H,
    S,
    Sdg,
    T,
    Tdg,
    CX,
    CZ,
    Toffoli,
    CCiX,
    CCiXdg,
    CS,
    CSdg,
    CCiZ,
    CCmiZ,
    LambdaX(usize),
    LambdaZ(usize),
    LambdaiX(usize),
}

impl GateKind {
    pub fn arity(self) -> usize {
        use GateKind::*;
        match self {
            X | Z | H | S | Sdg | T | Tdg => 1,
            CX | CZ | CS | CSdg => 2,
            Toffoli | CCiX | CCiXdg | CCiZ | CCmiZ => 3,
            LambdaX(k) | LambdaZ(k) | LambdaiX(k) => k + 1,
        }
    }

    pub fn is_primitive(self) -> bool {
        use GateKind::*;
        matches!(self, X | Z | H | S | Sdg | T | Tdg | CX | CZ)
    }

    pub fn is_target_only(self) -> bool {
        matches!(self, GateKind::LambdaX(_) | GateKind::LambdaZ(_) | GateKind::LambdaiX(_))
    }

    /// T/Tdg gates in the fixed expansion of this kind.
    pub fn t_cost(self) -> u64 {
        use GateKind::*;
        match self {
            T | Tdg => 1,
            Toffoli => 7,
            CCiX | CCiXdg | CCiZ | CCmiZ => 4,
            CS | CSdg => 3,
            _ => 0,
        }
    }

    /// The adjoint kind, absent for `LambdaiX` whose adjoint has no name here.
    pub fn dagger(self) -> Option<GateKind> {
        use GateKind::*;
        Some(match self {
            S => Sdg,
            Sdg => S,
            T => Tdg,
            Tdg => T,
            CCiX => CCiXdg,
            CCiXdg => CCiX,
            CS => CSdg,
            CSdg => CS,
            CCiZ => CCmiZ,
            CCmiZ => CCiZ,
            LambdaiX(_) => return None,
            other => other,
        })
    }

    /// Gates that act diagonally on every wire they touch.
    pub fn is_diagonal(self) -> bool {
        use GateKind::*;
        matches!(self, Z | S | Sdg | T | Tdg | CZ | CS | CSdg | CCiZ | CCmiZ | LambdaZ(_))
    }

    pub fn name(self) -> String {
        use GateKind::*;
        match self {
            X => "x".into(),
            Z => "z".into(),
            H => "h".into(),
            S => "s".into(),
            Sdg => "sdg".into(),
            T => "t".into(),
            Tdg => "tdg".into(),
            CX => "cx".into(),
            CZ => "cz".into(),
            Toffoli => "toffoli".into(),
            CCiX => "ccix".into(),
            CCiXdg => "ccixdg".into(),
            CS => "cs".into(),
            CSdg => "csdg".into(),
            CCiZ => "cciz".into(),
            CCmiZ => "ccmiz".into(),
            LambdaX(_) => "lambdax".into(),
            LambdaZ(_) => "lambdaz".into(),
            LambdaiX(_) => "lambdaix".into(),
        }
    }

    /// Inverse of [`GateKind::name`]; `lambda*` kinds take their control
    /// count from the number of wires.
    pub fn from_name(name: &str, wires: usize) -> Option<GateKind> {
        use GateKind::*;
        let k = wires.checked_sub(1);
        Some(match name {
            "x" => X,
            "z" => Z,
            "h" => H,
            "s" => S,
            "sdg" => Sdg,
            "t" => T,
            "tdg" => Tdg,
            "cx" => CX,
            "cz" => CZ,
            "toffoli" => Toffoli,
            "ccix" => CCiX,
            "ccixdg" => CCiXdg,
            "cs" => CS,
            "csdg" => CSdg,
            "cciz" => CCiZ,
            "ccmiz" => CCmiZ,
            "lambdax" => LambdaX(k?),
            "lambdaz" => LambdaZ(k?),
            "lambdaix" => LambdaiX(k?),
            _ => return None,
        })
    }
}

/// A gate application, optionally conditioned on one classical bit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    pub condition: Option<(usize, bool)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AncillaKind {
    Clean,
    Dirty,
}

/// Promised state of a qubit when it is released.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Release {
    Zero,
    Unchanged,
    Measured,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Event {
    Gate(Gate),
    MeasureZ { qubit: usize, bit: usize },
    Alloc { qubit: usize, kind: AncillaKind },
    Release { qubit: usize, expect: Release },
}

/// Per-qubit role in a circuit's interface.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    Input,
    Target,
    Clean,
    Dirty,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CircuitError {
    TargetOnlyMacro(GateKind),
    NonInvertible,
    QubitOutOfRange(usize),
    RepeatedQubit(usize),
    Arity { kind: GateKind, got: usize },
    BadMapping(String),
    SizeMismatch,
    Invariant(String),
}

impl fmt::Display for CircuitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CircuitError::TargetOnlyMacro(k) => write!(f, "target-only macro: {}", k.name()),
            CircuitError::NonInvertible => write!(f, "non-invertible: circuit measures or branches"),
            CircuitError::QubitOutOfRange(q) => write!(f, "qubit {} out of range", q),
            CircuitError::RepeatedQubit(q) => write!(f, "qubit {} repeated in one gate", q),
            CircuitError::Arity { kind, got } => {
                write!(f, "{} expects {} wires, got {}", kind.name(), kind.arity(), got)
            }
            CircuitError::BadMapping(m) => write!(f, "bad qubit mapping: {}", m),
            CircuitError::SizeMismatch => write!(f, "register sizes differ"),
            CircuitError::Invariant(m) => write!(f, "{}", m),
        }
    }
}

/// T-count of a circuit, split by classical outcome.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct TCount {
    /// T/Tdg gates carrying no condition.
    pub unconditional: u64,
    /// Total T count under each full assignment of the classical bits.
    /// Empty when the circuit has no classical bits.
    pub per_outcome: BTreeMap<Vec<bool>, u64>,
}

impl TCount {
    /// Distinct totals over outcomes, or the unconditional count alone.
    pub fn values(&self) -> BTreeSet<u64> {
        if self.per_outcome.is_empty() {
            BTreeSet::from([self.unconditional])
        } else {
            self.per_outcome.values().copied().collect()
        }
    }

    pub fn min(&self) -> u64 {
        *self.values().iter().next().unwrap_or(&0)
    }

    pub fn max(&self) -> u64 {
        *self.values().iter().next_back().unwrap_or(&0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    pub n_qubits: usize,
    pub n_cbits: usize,
    pub events: Vec<Event>,
    pub io_spec: Vec<Role>,
}

impl Circuit {
    pub fn new(n_qubits: usize, n_cbits: usize) -> Self {
        Circuit { n_qubits, n_cbits, events: Vec::new(), io_spec: vec![Role::Input; n_qubits] }
    }

    pub fn gate_count(&self) -> usize {
        self.events.iter().filter(|e| matches!(e, Event::Gate(_))).count()
    }

    pub fn has_measurement(&self) -> bool {
        self.events.iter().any(|e| matches!(e, Event::MeasureZ { .. }))
    }

    pub fn qubits_with(&self, role: Role) -> Vec<usize> {
        (0..self.n_qubits).filter(|&q| self.io_spec[q] == role).collect()
    }

    pub fn push(&mut self, e: Event) -> &mut Self {
        self.events.push(e);
        self
    }

    pub fn add(&mut self, kind: GateKind, qubits: &[usize]) -> &mut Self {
        self.push(Event::Gate(Gate { kind, qubits: qubits.to_vec(), condition: None }))
    }

    pub fn add_if(&mut self, bit: usize, val: bool, kind: GateKind, qubits: &[usize]) -> &mut Self {
        self.push(Event::Gate(Gate { kind, qubits: qubits.to_vec(), condition: Some((bit, val)) }))
    }

    pub fn x(&mut self, q: usize) -> &mut Self {
        self.add(GateKind::X, &[q])
    }
    pub fn z(&mut self, q: usize) -> &mut Self {
        self.add(GateKind::Z, &[q])
    }
    pub fn h(&mut self, q: usize) -> &mut Self {
        self.add(GateKind::H, &[q])
    }
    pub fn s(&mut self, q: usize) -> &mut Self {
        self.add(GateKind::S, &[q])
    }
    pub fn sdg(&mut self, q: usize) -> &mut Self {
        self.add(GateKind::Sdg, &[q])
    }
    pub fn t(&mut self, q: usize) -> &mut Self {
        self.add(GateKind::T, &[q])
    }
    pub fn tdg(&mut self, q: usize) -> &mut Self {
        self.add(GateKind::Tdg, &[q])
    }
    pub fn cx(&mut self, c: usize, t: usize) -> &mut Self {
        self.add(GateKind::CX, &[c, t])
    }
    pub fn cz(&mut self, a: usize, b: usize) -> &mut Self {
        self.add(GateKind::CZ, &[a, b])
    }
    pub fn toffoli(&mut self, c1: usize, c2: usize, t: usize) -> &mut Self {
        self.add(GateKind::Toffoli, &[c1, c2, t])
    }
    pub fn ccix(&mut self, c1: usize, c2: usize, t: usize) -> &mut Self {
        self.add(GateKind::CCiX, &[c1, c2, t])
    }
    pub fn ccixdg(&mut self, c1: usize, c2: usize, t: usize) -> &mut Self {
        self.add(GateKind::CCiXdg, &[c1, c2, t])
    }
    pub fn cciz(&mut self, a: usize, b: usize, c: usize) -> &mut Self {
        self.add(GateKind::CCiZ, &[a, b, c])
    }
    pub fn ccmiz(&mut self, a: usize, b: usize, c: usize) -> &mut Self {
        self.add(GateKind::CCmiZ, &[a, b, c])
    }
    pub fn measz(&mut self, qubit: usize, bit: usize) -> &mut Self {
        self.push(Event::MeasureZ { qubit, bit })
    }
    pub fn alloc(&mut self, qubit: usize, kind: AncillaKind) -> &mut Self {
        self.push(Event::Alloc { qubit, kind })
    }
    pub fn release(&mut self, qubit: usize, expect: Release) -> &mut Self {
        self.push(Event::Release { qubit, expect })
    }

    /// Mark a qubit's role; ancilla roles also emit the matching `Alloc`.
    pub fn declare(&mut self, qubit: usize, role: Role) -> &mut Self {
        self.io_spec[qubit] = role;
        match role {
            Role::Clean => self.alloc(qubit, AncillaKind::Clean),
            Role::Dirty => self.alloc(qubit, AncillaKind::Dirty),
            _ => self,
        }
    }

    /// Append another circuit's events acting on the same wires.
    pub fn append(&mut self, other: &Circuit) -> &mut Self {
        self.events.extend(other.events.iter().cloned());
        self
    }

    /// Append `other` with every gate conditioned on `bit == val`.
    ///
    /// Panics if `other` contains measurements or conditioned gates.
    pub fn append_if(&mut self, bit: usize, val: bool, other: &Circuit) -> &mut Self {
        for e in &other.events {
            match e {
                Event::Gate(g) => {
                    assert!(g.condition.is_none(), "nested classical condition");
                    let mut g = g.clone();
                    g.condition = Some((bit, val));
                    self.events.push(Event::Gate(g));
                }
                _ => panic!("only gates can be classically conditioned"),
            }
        }
        self
    }

    /// Check the structural invariants of every event.
    pub fn validate(&self) -> Result<(), CircuitError> {
        let n = self.n_qubits;
        let mut released = vec![false; n];
        let mut measured = vec![false; n];
        let mut written = vec![false; self.n_cbits];
        let use_qubit = |q: usize, released: &[bool]| -> Result<(), CircuitError> {
            if q >= n {
                return Err(CircuitError::QubitOutOfRange(q));
            }
            if released[q] {
                return Err(CircuitError::Invariant(alloc::format!("qubit {} used after release", q)));
            }
            Ok(())
        };
        for e in &self.events {
            match e {
                Event::Gate(g) => {
                    if g.qubits.len() != g.kind.arity() {
                        return Err(CircuitError::Arity { kind: g.kind, got: g.qubits.len() });
                    }
                    let mut seen = BTreeSet::new();
                    for &q in &g.qubits {
                        use_qubit(q, &released)?;
                        if !seen.insert(q) {
                            return Err(CircuitError::RepeatedQubit(q));
                        }
                    }
                    if let Some((b, _)) = g.condition {
                        if b >= self.n_cbits || !written[b] {
                            return Err(CircuitError::Invariant(alloc::format!(
                                "classical bit {} read before it is written",
                                b
                            )));
                        }
                    }
                }
                Event::MeasureZ { qubit, bit } => {
                    use_qubit(*qubit, &released)?;
                    if measured[*qubit] {
                        return Err(CircuitError::Invariant(alloc::format!(
                            "qubit {} measured twice in one allocation",
                            qubit
                        )));
                    }
                    if *bit >= self.n_cbits {
                        return Err(CircuitError::Invariant(alloc::format!("classical bit {} out of range", bit)));
                    }
                    measured[*qubit] = true;
                    written[*bit] = true;
                }
                Event::Alloc { qubit, .. } => {
                    if *qubit >= n {
                        return Err(CircuitError::QubitOutOfRange(*qubit));
                    }
                    released[*qubit] = false;
                    measured[*qubit] = false;
                }
                Event::Release { qubit, .. } => {
                    use_qubit(*qubit, &released)?;
                    released[*qubit] = true;
                }
            }
        }
        Ok(())
    }

    /// Count T/Tdg gates; macros contribute the count of their expansion.
    pub fn t_count(&self) -> TCount {
        let mut unconditional = 0;
        let mut conditioned: Vec<(usize, bool, u64)> = Vec::new();
        for e in &self.events {
            if let Event::Gate(g) = e {
                let c = g.kind.t_cost();
                match g.condition {
                    None => unconditional += c,
                    Some((b, v)) if c > 0 => conditioned.push((b, v, c)),
                    Some(_) => {}
                }
            }
        }
        let mut per_outcome = BTreeMap::new();
        if self.n_cbits > 0 && self.n_cbits <= 16 {
            for mask in 0u32..(1 << self.n_cbits) {
                let bits: Vec<bool> = (0..self.n_cbits).map(|i| mask >> i & 1 == 1).collect();
                let extra: u64 = conditioned.iter().filter(|(b, v, _)| bits[*b] == *v).map(|t| t.2).sum();
                per_outcome.insert(bits, unconditional + extra);
            }
        }
        TCount { unconditional, per_outcome }
    }

    /// Reverse the circuit and take the adjoint of every gate.
    ///
    /// Allocation and release swap places, so `inverse` is an involution.
    pub fn inverse(&self) -> Result<Circuit, CircuitError> {
        let mut events = Vec::with_capacity(self.events.len());
        for e in self.events.iter().rev() {
            events.push(match e {
                Event::Gate(g) => {
                    if g.condition.is_some() {
                        return Err(CircuitError::NonInvertible);
                    }
                    let kind = g.kind.dagger().ok_or(CircuitError::NonInvertible)?;
                    Event::Gate(Gate { kind, qubits: g.qubits.clone(), condition: None })
                }
                Event::MeasureZ { .. } => return Err(CircuitError::NonInvertible),
                Event::Alloc { qubit, kind } => Event::Release {
                    qubit: *qubit,
                    expect: match kind {
                        AncillaKind::Clean => Release::Zero,
                        AncillaKind::Dirty => Release::Unchanged,
                    },
                },
                Event::Release { qubit, expect } => Event::Alloc {
                    qubit: *qubit,
                    kind: match expect {
                        Release::Zero => AncillaKind::Clean,
                        Release::Unchanged => AncillaKind::Dirty,
                        Release::Measured => return Err(CircuitError::NonInvertible),
                    },
                },
            });
        }
        Ok(Circuit { n_qubits: self.n_qubits, n_cbits: self.n_cbits, events, io_spec: self.io_spec.clone() })
    }

    /// Relabel qubit `q` as `mapping[q]` inside a register of `total` qubits.
    pub fn embed(&self, mapping: &[usize], total: usize) -> Result<Circuit, CircuitError> {
        if mapping.len() != self.n_qubits {
            return Err(CircuitError::BadMapping("mapping length differs from qubit count".into()));
        }
        let mut seen = BTreeSet::new();
        for &m in mapping {
            if m >= total {
                return Err(CircuitError::BadMapping(alloc::format!("image {} outside {} qubits", m, total)));
            }
            if !seen.insert(m) {
                return Err(CircuitError::BadMapping(alloc::format!("collision on qubit {}", m)));
            }
        }
        let map = |q: usize| mapping[q];
        let events = self
            .events
            .iter()
            .map(|e| match e {
                Event::Gate(g) => Event::Gate(Gate {
                    kind: g.kind,
                    qubits: g.qubits.iter().map(|&q| map(q)).collect(),
                    condition: g.condition,
                }),
                Event::MeasureZ { qubit, bit } => Event::MeasureZ { qubit: map(*qubit), bit: *bit },
                Event::Alloc { qubit, kind } => Event::Alloc { qubit: map(*qubit), kind: *kind },
                Event::Release { qubit, expect } => Event::Release { qubit: map(*qubit), expect: *expect },
            })
            .collect();
        let mut io_spec = vec![Role::Input; total];
        for (q, &m) in mapping.iter().enumerate() {
            io_spec[m] = self.io_spec[q];
        }
        Ok(Circuit { n_qubits: total, n_cbits: self.n_cbits, events, io_spec })
    }

    /// `a` followed by `b` on the same qubit register; classical bits are
    /// shared by index.
    pub fn compose(a: &Circuit, b: &Circuit) -> Result<Circuit, CircuitError> {
        if a.n_qubits != b.n_qubits {
            return Err(CircuitError::SizeMismatch);
        }
        let mut out = a.clone();
        out.n_cbits = a.n_cbits.max(b.n_cbits);
        out.events.extend(b.events.iter().cloned());
        Ok(out)
    }

    /// Replace every macro by its fixed Clifford+T expansion.
    pub fn expand_macros(&self) -> Result<Circuit, CircuitError> {
        let mut out = Circuit { events: Vec::new(), ..self.clone() };
        for e in &self.events {
            match e {
                Event::Gate(g) if !g.kind.is_primitive() => {
                    for (kind, qs) in expansion(g.kind, &g.qubits)? {
                        out.events.push(Event::Gate(Gate { kind, qubits: qs, condition: g.condition }));
                    }
                }
                other => out.events.push(other.clone()),
            }
        }
        Ok(out)
    }

    /// Render in the line-oriented text format.
    pub fn to_text(&self) -> String {
        let mut s = alloc::format!("qubits {} cbits {}\n", self.n_qubits, self.n_cbits);
        for e in &self.events {
            s.push_str(&event_line(e));
            s.push('\n');
        }
        s
    }
}

fn join_qubits(qs: &[usize]) -> String {
    qs.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(" ")
}

/// One line of the text format for an event.
pub fn event_line(e: &Event) -> String {
    match e {
        Event::Gate(g) => match g.condition {
            None => alloc::format!("g {} {}", g.kind.name(), join_qubits(&g.qubits)),
            Some((b, v)) => {
                alloc::format!("cg {} {} {} {}", b, v as u8, g.kind.name(), join_qubits(&g.qubits))
            }
        },
        Event::MeasureZ { qubit, bit } => alloc::format!("measz {} {}", qubit, bit),
        Event::Alloc { qubit, kind } => alloc::format!(
            "alloc {} {}",
            qubit,
            match kind {
                AncillaKind::Clean => "clean",
                AncillaKind::Dirty => "dirty",
            }
        ),
        Event::Release { qubit, expect } => alloc::format!(
            "release {} {}",
            qubit,
            match expect {
                Release::Zero => "zero",
                Release::Unchanged => "unchanged",
                Release::Measured => "measured",
            }
        ),
    }
}

fn expansion(kind: GateKind, q: &[usize]) -> Result<Vec<(GateKind, Vec<usize>)>, CircuitError> {
    use GateKind::*;
    if kind.is_target_only() {
        return Err(CircuitError::TargetOnlyMacro(kind));
    }
    if q.len() != kind.arity() {
        return Err(CircuitError::Arity { kind, got: q.len() });
    }
    let one = |k: GateKind, a: usize| (k, vec![a]);
    let two = |k: GateKind, a: usize, b: usize| (k, vec![a, b]);
    // i^{ab} (-1)^{abc} on wires a, b, c.
    let cciz = |a: usize, b: usize, c: usize| {
        vec![
            one(Tdg, c),
            two(CX, b, c),
            one(T, c),
            two(CX, a, c),
            one(Tdg, c),
            two(CX, b, c),
            one(T, c),
            two(CX, a, c),
        ]
    };
    let ccmiz = |a: usize, b: usize, c: usize| {
        vec![
            two(CX, a, c),
            one(Tdg, c),
            two(CX, b, c),
            one(T, c),
            two(CX, a, c),
            one(Tdg, c),
            two(CX, b, c),
            one(T, c),
        ]
    };
    let framed = |t: usize, mut body: Vec<(GateKind, Vec<usize>)>| {
        body.insert(0, one(H, t));
        body.push(one(H, t));
        body
    };
    Ok(match kind {
        Toffoli => {
            let (a, b, t) = (q[0], q[1], q[2]);
            vec![
                one(H, t),
                two(CX, b, t),
                one(Tdg, t),
                two(CX, a, t),
                one(T, t),
                two(CX, b, t),
                one(Tdg, t),
                two(CX, a, t),
                one(T, b),
                one(T, t),
                one(H, t),
                two(CX, a, b),
                one(T, a),
                one(Tdg, b),
                two(CX, a, b),
            ]
        }
        CCiX => framed(q[2], cciz(q[0], q[1], q[2])),
        CCiXdg => framed(q[2], ccmiz(q[0], q[1], q[2])),
        CCiZ => cciz(q[0], q[1], q[2]),
        CCmiZ => ccmiz(q[0], q[1], q[2]),
        CS => vec![one(T, q[0]), one(T, q[1]), two(CX, q[0], q[1]), one(Tdg, q[1]), two(CX, q[0], q[1])],
        CSdg => vec![one(Tdg, q[0]), one(Tdg, q[1]), two(CX, q[0], q[1]), one(T, q[1]), two(CX, q[0], q[1])],
        prim => vec![(prim, q.to_vec())],
    })
}
