//! Exact sparse state-vector simulation with eager measurement branching.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::circuit::{Circuit, Event, Gate, GateKind, Release, Role};
use crate::ring::RingScalar;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SimError {
    UnwrittenBit(usize),
    ReleaseZeroViolated(usize),
    CleanAllocViolated(usize),
    EntangledRelease(usize),
    MeasurementPresent,
    Unsupported(String),
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::UnwrittenBit(b) => write!(f, "condition on unwritten classical bit {}", b),
            SimError::ReleaseZeroViolated(q) => write!(f, "release zero violated on qubit {}", q),
            SimError::CleanAllocViolated(q) => write!(f, "clean allocation of qubit {} found it nonzero", q),
            SimError::EntangledRelease(q) => write!(f, "entangled release of qubit {}", q),
            SimError::MeasurementPresent => write!(f, "circuit measures; use kraus_of"),
            SimError::Unsupported(m) => write!(f, "{}", m),
        }
    }
}

/// A sparse, possibly sub-normalized state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct State {
    pub n_qubits: usize,
    pub amps: BTreeMap<usize, RingScalar>,
}

impl State {
    pub fn basis(n_qubits: usize, index: usize) -> Self {
        State { n_qubits, amps: BTreeMap::from([(index, RingScalar::one())]) }
    }

    fn mask(&self, q: usize) -> usize {
        1 << (self.n_qubits - 1 - q)
    }

    /// `sum conj(a) a` over all amplitudes.
    pub fn norm_sq(&self) -> RingScalar {
        self.amps.values().fold(RingScalar::zero(), |acc, a| acc + a.norm_sq())
    }

    fn map_basis(&mut self, f: impl Fn(usize) -> (usize, u8)) {
        let old = core::mem::take(&mut self.amps);
        for (idx, amp) in old {
            let (j, p) = f(idx);
            let amp = if p == 0 { amp } else { amp.mul_omega(p as i64) };
            self.amps.insert(j, amp);
        }
    }

    fn hadamard(&mut self, q: usize) {
        let m = self.mask(q);
        let old = core::mem::take(&mut self.amps);
        let mut out: BTreeMap<usize, RingScalar> = BTreeMap::new();
        for (idx, amp) in old {
            let a = amp.div_sqrt2();
            let neg = -&a;
            let lo = idx & !m;
            let hi = idx | m;
            let hi_amp = if idx & m != 0 { neg } else { a.clone() };
            for (j, v) in [(lo, a), (hi, hi_amp)] {
                match out.get_mut(&j) {
                    Some(cur) => *cur = &*cur + &v,
                    None => {
                        out.insert(j, v);
                    }
                }
            }
        }
        out.retain(|_, v| !v.is_zero());
        self.amps = out;
    }

    /// Apply one gate, ignoring its classical condition.
    pub fn apply(&mut self, kind: GateKind, qubits: &[usize]) {
        if kind == GateKind::H {
            self.hadamard(qubits[0]);
            return;
        }
        let masks: Vec<usize> = qubits.iter().map(|&q| self.mask(q)).collect();
        self.map_basis(|idx| basis_action(kind, &masks, idx));
    }

    fn branch_on(self, q: usize) -> (State, State) {
        let m = self.mask(q);
        let n = self.n_qubits;
        let (one, zero): (BTreeMap<_, _>, BTreeMap<_, _>) = self.amps.into_iter().partition(|(i, _)| i & m != 0);
        (State { n_qubits: n, amps: zero }, State { n_qubits: n, amps: one })
    }

    fn supports_one(&self, q: usize) -> bool {
        let m = self.mask(q);
        self.amps.keys().any(|i| i & m != 0)
    }
}

/// Image index and omega exponent of a non-Hadamard gate on a basis state.
fn basis_action(kind: GateKind, m: &[usize], idx: usize) -> (usize, u8) {
    use GateKind::*;
    let on = |i: usize| idx & m[i] != 0;
    let all_controls = |n: usize| (0..n).all(on);
    let last = m.len() - 1;
    match kind {
        X => (idx ^ m[0], 0),
        Z => (idx, if on(0) { 4 } else { 0 }),
        S => (idx, if on(0) { 2 } else { 0 }),
        Sdg => (idx, if on(0) { 6 } else { 0 }),
        T => (idx, if on(0) { 1 } else { 0 }),
        Tdg => (idx, if on(0) { 7 } else { 0 }),
        CX | Toffoli | LambdaX(_) => (if all_controls(last) { idx ^ m[last] } else { idx }, 0),
        CZ | LambdaZ(_) => (idx, if all_controls(m.len()) { 4 } else { 0 }),
        CS => (idx, if all_controls(2) { 2 } else { 0 }),
        CSdg => (idx, if all_controls(2) { 6 } else { 0 }),
        CCiX | LambdaiX(_) => {
            if all_controls(last) {
                (idx ^ m[last], 2)
            } else {
                (idx, 0)
            }
        }
        CCiXdg => {
            if all_controls(2) {
                (idx ^ m[2], 6)
            } else {
                (idx, 0)
            }
        }
        CCiZ | CCmiZ => {
            if all_controls(2) {
                let s = if kind == CCiZ { 2 } else { 6 };
                (idx, (s + if on(2) { 4 } else { 0 }) % 8)
            } else {
                (idx, 0)
            }
        }
        H => unreachable!("hadamard is not a basis map"),
    }
}

/// Classical outcome of a branch: one entry per classical bit, unwritten
/// bits reading as `false`.
pub type Outcome = Vec<bool>;

/// Simulate all measurement branches from a basis input.
pub fn run(c: &Circuit, input: usize) -> Result<Vec<(Outcome, State)>, SimError> {
    simulate(c, input, true)
}

fn simulate(c: &Circuit, input: usize, strict: bool) -> Result<Vec<(Outcome, State)>, SimError> {
    let mut branches: Vec<(Vec<Option<bool>>, State)> = vec![(vec![None; c.n_cbits], State::basis(c.n_qubits, input))];
    for e in &c.events {
        match e {
            Event::Gate(Gate { kind, qubits, condition }) => {
                for (bits, st) in branches.iter_mut() {
                    if let Some((b, v)) = condition {
                        match bits.get(*b).copied().flatten() {
                            None => return Err(SimError::UnwrittenBit(*b)),
                            Some(x) if x != *v => continue,
                            Some(_) => {}
                        }
                    }
                    st.apply(*kind, qubits);
                }
            }
            Event::MeasureZ { qubit, bit } => {
                let mut next = Vec::with_capacity(branches.len() * 2);
                for (bits, st) in branches {
                    let (zero, one) = st.branch_on(*qubit);
                    for (val, s) in [(false, zero), (true, one)] {
                        if !s.amps.is_empty() {
                            let mut bits = bits.clone();
                            bits[*bit] = Some(val);
                            next.push((bits, s));
                        }
                    }
                }
                branches = next;
            }
            Event::Alloc { qubit, kind } => {
                if strict && *kind == crate::circuit::AncillaKind::Clean && branches.iter().any(|(_, s)| s.supports_one(*qubit)) {
                    return Err(SimError::CleanAllocViolated(*qubit));
                }
            }
            Event::Release { qubit, expect } => {
                if strict && *expect == Release::Zero && branches.iter().any(|(_, s)| s.supports_one(*qubit)) {
                    return Err(SimError::ReleaseZeroViolated(*qubit));
                }
            }
        }
    }
    Ok(branches.into_iter().map(|(bits, s)| (bits.into_iter().map(|b| b.unwrap_or(false)).collect(), s)).collect())
}

/// Column-sparse matrix over the ring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatrix {
    pub n_rows: usize,
    pub cols: Vec<BTreeMap<usize, RingScalar>>,
}

impl SparseMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        SparseMatrix { n_rows, cols: vec![BTreeMap::new(); n_cols] }
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix { n_rows: n, cols: (0..n).map(|i| BTreeMap::from([(i, RingScalar::one())])).collect() }
    }

    pub fn n_cols(&self) -> usize {
        self.cols.len()
    }

    pub fn get(&self, r: usize, c: usize) -> RingScalar {
        self.cols[c].get(&r).cloned().unwrap_or_default()
    }

    pub fn set(&mut self, r: usize, c: usize, v: RingScalar) {
        if v.is_zero() {
            self.cols[c].remove(&r);
        } else {
            self.cols[c].insert(r, v);
        }
    }

    pub fn dagger(&self) -> SparseMatrix {
        let mut out = SparseMatrix::zeros(self.n_cols(), self.n_rows);
        for (c, col) in self.cols.iter().enumerate() {
            for (&r, v) in col {
                out.cols[r].insert(c, v.conj());
            }
        }
        out
    }

    /// Matrix product `self * rhs`.
    pub fn mul(&self, rhs: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.n_cols(), rhs.n_rows, "dimension mismatch");
        let mut out = SparseMatrix::zeros(self.n_rows, rhs.n_cols());
        for (j, col) in rhs.cols.iter().enumerate() {
            let mut acc: BTreeMap<usize, RingScalar> = BTreeMap::new();
            for (&k, b) in col {
                for (&i, a) in &self.cols[k] {
                    let p = a * b;
                    let e = acc.entry(i).or_default();
                    *e = &*e + &p;
                }
            }
            acc.retain(|_, v| !v.is_zero());
            out.cols[j] = acc;
        }
        out
    }

    pub fn add(&self, rhs: &SparseMatrix) -> SparseMatrix {
        assert_eq!((self.n_rows, self.n_cols()), (rhs.n_rows, rhs.n_cols()), "dimension mismatch");
        let mut out = self.clone();
        for (j, col) in rhs.cols.iter().enumerate() {
            for (&i, v) in col {
                let s = out.get(i, j) + v;
                out.set(i, j, s);
            }
        }
        out
    }

    pub fn scale(&self, s: &RingScalar) -> SparseMatrix {
        let mut out = SparseMatrix::zeros(self.n_rows, self.n_cols());
        for (j, col) in self.cols.iter().enumerate() {
            for (&i, v) in col {
                out.set(i, j, v * s);
            }
        }
        out
    }

    pub fn is_identity(&self) -> bool {
        self.n_rows == self.n_cols() && *self == SparseMatrix::identity(self.n_rows)
    }

    /// Rows and columns as nested lists of ring-scalar strings.
    pub fn to_strings(&self) -> Vec<Vec<String>> {
        (0..self.n_rows)
            .map(|r| (0..self.n_cols()).map(|c| format!("{}", self.get(r, c))).collect())
            .collect()
    }
}

/// Full unitary of a measurement-free circuit. Alloc and release events are
/// ignored so every column is defined.
pub fn unitary_of(c: &Circuit) -> Result<SparseMatrix, SimError> {
    if c.has_measurement() {
        return Err(SimError::MeasurementPresent);
    }
    let dim = 1usize << c.n_qubits;
    let mut m = SparseMatrix::zeros(dim, dim);
    for x in 0..dim {
        let mut branches = simulate(c, x, false)?;
        let (_, st) = branches.pop().expect("one branch");
        m.cols[x] = st.amps;
    }
    Ok(m)
}

/// Basis inputs allowed by a circuit's interface: clean ancillas start at 0.
pub fn input_subspace(c: &Circuit) -> Vec<usize> {
    let n = c.n_qubits;
    let clean_mask = c.qubits_with(Role::Clean).iter().fold(0usize, |m, &q| m | 1 << (n - 1 - q));
    (0..1usize << n).filter(|x| x & clean_mask == 0).collect()
}

/// Kraus operators of a circuit on a chosen list of basis inputs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BranchMap {
    pub n_qubits: usize,
    /// Column `j` of every operator is the image of basis input `inputs[j]`.
    pub inputs: Vec<usize>,
    /// Qubits still live at the end, in order; rows index their basis.
    pub kept: Vec<usize>,
    pub kraus: BTreeMap<Outcome, SparseMatrix>,
}

impl BranchMap {
    /// `sum_o K_o^dagger K_o`.
    pub fn gram(&self) -> SparseMatrix {
        let d = self.inputs.len();
        self.kraus.values().fold(SparseMatrix::zeros(d, d), |acc, k| acc.add(&k.dagger().mul(k)))
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.gram().is_identity()
    }

    /// Index of basis input `x` projected onto the kept qubits.
    pub fn project(&self, x: usize) -> usize {
        compress(x, &self.kept, self.n_qubits)
    }
}

fn compress(idx: usize, kept: &[usize], n: usize) -> usize {
    kept.iter().fold(0, |acc, &q| acc << 1 | (idx >> (n - 1 - q) & 1))
}

/// Qubits whose last lifecycle event is a release, with the promise made.
fn final_releases(c: &Circuit) -> BTreeMap<usize, Release> {
    let mut out = BTreeMap::new();
    for e in &c.events {
        match e {
            Event::Release { qubit, expect } => {
                out.insert(*qubit, *expect);
            }
            Event::Alloc { qubit, .. } => {
                out.remove(qubit);
            }
            _ => {}
        }
    }
    out
}

/// Simulate every input of `inputs` and assemble per-outcome Kraus operators,
/// tracing out qubits released as zero or measured after checking they
/// factor. Dirty ancillas stay as rows: their value is checked unchanged.
pub fn kraus_of(c: &Circuit, inputs: &[usize]) -> Result<BranchMap, SimError> {
    let n = c.n_qubits;
    let released = final_releases(c);
    let kept: Vec<usize> = (0..n).filter(|q| !matches!(released.get(q), Some(Release::Zero | Release::Measured))).collect();
    let rows = 1usize << kept.len();
    let mut kraus: BTreeMap<Outcome, SparseMatrix> = BTreeMap::new();
    for (j, &x) in inputs.iter().enumerate() {
        for (outcome, st) in run(c, x)? {
            let mut fixed: BTreeMap<usize, bool> = BTreeMap::new();
            let mut col = BTreeMap::new();
            for (idx, amp) in st.amps {
                for (&q, &expect) in &released {
                    let v = idx >> (n - 1 - q) & 1 == 1;
                    let ok = match expect {
                        Release::Zero => !v,
                        Release::Unchanged => v == (x >> (n - 1 - q) & 1 == 1),
                        Release::Measured => *fixed.entry(q).or_insert(v) == v,
                    };
                    if !ok {
                        return Err(SimError::EntangledRelease(q));
                    }
                }
                col.insert(compress(idx, &kept, n), amp);
            }
            let k = kraus.entry(outcome).or_insert_with(|| SparseMatrix::zeros(rows, inputs.len()));
            k.cols[j] = col;
        }
    }
    Ok(BranchMap { n_qubits: n, inputs: inputs.to_vec(), kept, kraus })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChannelMode {
    /// Branch scalars must be `omega^j / sqrt2^m`.
    Exact,
    /// Any ring scalar per branch.
    PerBranchGlobalPhase,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChannelReport {
    pub holds: bool,
    pub scalars: BTreeMap<Outcome, RingScalar>,
    pub trace_preserving: bool,
    pub diagnostic: Option<String>,
}

fn is_dyadic_root(s: &RingScalar) -> bool {
    let mut x = s.clone();
    for _ in 0..s.k() {
        x = x * RingScalar::sqrt2();
    }
    x.as_omega_power().is_some()
}

/// Check that every Kraus operator on the circuit's input subspace is a
/// scalar multiple of `target` and that the scalars have unit total weight.
pub fn channel_equals(c: &Circuit, target: &SparseMatrix, mode: ChannelMode) -> Result<ChannelReport, SimError> {
    let inputs = input_subspace(c);
    let bm = kraus_of(c, &inputs)?;
    Ok(compare_branches(&bm, target, mode))
}

/// The comparison behind [`channel_equals`] on an already-built branch map.
pub fn compare_branches(bm: &BranchMap, target: &SparseMatrix, mode: ChannelMode) -> ChannelReport {
    let trace_preserving = bm.is_trace_preserving();
    let mut scalars = BTreeMap::new();
    let mut diagnostic = None;
    let fail = |msg: String| ChannelReport { holds: false, scalars: BTreeMap::new(), trace_preserving, diagnostic: Some(msg) };
    if (target.n_rows, target.n_cols()) != (1 << bm.kept.len(), bm.inputs.len()) {
        return fail(format!(
            "target is {}x{}, channel is {}x{}",
            target.n_rows,
            target.n_cols(),
            1usize << bm.kept.len(),
            bm.inputs.len()
        ));
    }
    let pivot = target.cols.iter().enumerate().find_map(|(j, col)| col.iter().next().map(|(&i, v)| (i, j, v.clone())));
    let Some((pi, pj, pv)) = pivot else {
        return fail("target is zero".into());
    };
    let Some(pinv) = pv.unit_inverse() else {
        return fail(format!("pivot entry {} is not invertible in the ring", pv));
    };
    let mut weight = RingScalar::zero();
    for (o, k) in &bm.kraus {
        let s = k.get(pi, pj) * &pinv;
        if *k != target.scale(&s) {
            let bad = (0..target.n_cols())
                .flat_map(|j| (0..target.n_rows).map(move |i| (i, j)))
                .find(|&(i, j)| k.get(i, j) != target.get(i, j) * &s);
            if let Some((i, j)) = bad {
                diagnostic = Some(format!(
                    "branch {:?}: entry ({}, {}) is {} but the scaled target has {}",
                    o,
                    i,
                    bm.inputs[j],
                    k.get(i, j),
                    target.get(i, j) * &s
                ));
            }
            return ChannelReport { holds: false, scalars, trace_preserving, diagnostic };
        }
        if mode == ChannelMode::Exact && !is_dyadic_root(&s) {
            diagnostic = Some(format!("branch {:?}: scalar {} is not a dyadic root of unity", o, s));
            return ChannelReport { holds: false, scalars, trace_preserving, diagnostic };
        }
        weight = weight + s.norm_sq();
        scalars.insert(o.clone(), s);
    }
    let holds = weight == RingScalar::one();
    if !holds {
        diagnostic = Some(format!("branch weights sum to {}", weight));
    }
    ChannelReport { holds, scalars, trace_preserving, diagnostic }
}
