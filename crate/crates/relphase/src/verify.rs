//! Semantic checks: generalized-permutation extraction, construction
//! obligations, safe oracle substitution, and the T-count ledger.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::circuit::{Circuit, CircuitError, Event, GateKind, Role};
use crate::constructions::{
    self as cons, ConstructionError, ConstructionSpec, DirtyVariant, InitVariant, PhaseRule, TerminateVariant,
};
use crate::boolfn::FkVariant;
use crate::ring::RingScalar;
use crate::sim::{compare_branches, input_subspace, kraus_of, unitary_of, BranchMap, ChannelMode, SimError, SparseMatrix};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VerifyError {
    Sim(SimError),
    Circuit(CircuitError),
    Construction(ConstructionError),
    Unsafe(String),
}

impl fmt::Display for VerifyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerifyError::Sim(e) => write!(f, "simulation: {}", e),
            VerifyError::Circuit(e) => write!(f, "circuit: {}", e),
            VerifyError::Construction(e) => write!(f, "{}", e),
            VerifyError::Unsafe(m) => write!(f, "unsafe substitution: {}", m),
        }
    }
}

impl From<SimError> for VerifyError {
    fn from(e: SimError) -> Self {
        VerifyError::Sim(e)
    }
}

impl From<CircuitError> for VerifyError {
    fn from(e: CircuitError) -> Self {
        VerifyError::Circuit(e)
    }
}

impl From<ConstructionError> for VerifyError {
    fn from(e: ConstructionError) -> Self {
        VerifyError::Construction(e)
    }
}

fn bit(x: usize, q: usize, n: usize) -> bool {
    x >> (n - 1 - q) & 1 == 1
}

/// `U = P D`: column `x` of `U` is `omega^phase[x]` at row `perm[x]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenPerm {
    pub n_qubits: usize,
    pub perm: Vec<usize>,
    pub phase: Vec<u8>,
}

impl GenPerm {
    pub fn to_matrix(&self) -> SparseMatrix {
        let d = self.perm.len();
        let mut m = SparseMatrix::zeros(d, d);
        for x in 0..d {
            m.set(self.perm[x], x, RingScalar::omega_pow(self.phase[x] as i64));
        }
        m
    }

    /// Qubits on which the phase actually depends.
    pub fn phase_support(&self) -> BTreeSet<usize> {
        let n = self.n_qubits;
        (0..n)
            .filter(|&q| (0..self.phase.len()).any(|x| self.phase[x] != self.phase[x ^ 1 << (n - 1 - q)]))
            .collect()
    }
}

/// Factor a unitary as permutation times diagonal, when it is one.
pub fn extract_genperm(u: &SparseMatrix) -> Option<GenPerm> {
    let d = u.n_cols();
    if u.n_rows != d || !d.is_power_of_two() {
        return None;
    }
    let mut perm = Vec::with_capacity(d);
    let mut phase = Vec::with_capacity(d);
    let mut hit = vec![false; d];
    for col in &u.cols {
        let mut nz = col.iter().filter(|(_, v)| !v.is_zero());
        let (&r, v) = nz.next()?;
        if nz.next().is_some() || hit[r] {
            return None;
        }
        hit[r] = true;
        perm.push(r);
        phase.push(v.as_omega_power()?);
    }
    Some(GenPerm { n_qubits: d.trailing_zeros() as usize, perm, phase })
}

pub fn phase_support(g: &GenPerm) -> BTreeSet<usize> {
    g.phase_support()
}

/// Outcome of checking one construction against its declared semantics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerificationReport {
    pub name: String,
    pub k: Option<usize>,
    pub m: Option<usize>,
    pub variant: Option<String>,
    pub semantics_ok: bool,
    pub diagnostic: Option<String>,
    pub trace_preserving: bool,
    pub measured_tcounts: BTreeSet<u64>,
    pub formula_tcounts: BTreeSet<u64>,
    pub formula_text: String,
    pub formula_asserted: bool,
    /// Relative phase of the checked map, as ω-exponents per input, when
    /// the circuit is a generalized permutation on its domain.
    pub phases: Option<BTreeMap<usize, u8>>,
    pub phase_support_found: Option<BTreeSet<usize>>,
    pub phase_support_declared: Option<BTreeSet<usize>>,
}

impl VerificationReport {
    pub fn tcount_ok(&self) -> bool {
        !self.formula_asserted || self.measured_tcounts == self.formula_tcounts
    }

    pub fn passed(&self) -> bool {
        self.semantics_ok && self.tcount_ok()
    }
}

/// Expand macros where possible; target-only macros stay and are simulated
/// natively.
pub fn lowered(c: &Circuit) -> Circuit {
    c.expand_macros().unwrap_or_else(|_| c.clone())
}

/// Unitary of the lowered circuit.
pub fn unitary(c: &Circuit) -> Result<SparseMatrix, VerifyError> {
    Ok(unitary_of(&lowered(c))?)
}

struct Analysis {
    ok: bool,
    diagnostic: Option<String>,
    phases: Option<BTreeMap<usize, u8>>,
    support: Option<BTreeSet<usize>>,
    trace_preserving: bool,
}

/// Check that every branch is a fixed generalized permutation realizing
/// `map`, up to a per-branch scalar, with unit total weight.
fn analyze(bm: &BranchMap, map: &[usize], rule: &PhaseRule, unit_scalar: bool) -> Analysis {
    let trace_preserving = bm.is_trace_preserving();
    let mut out = Analysis { ok: false, diagnostic: None, phases: None, support: None, trace_preserving };
    let branches: Vec<(&Vec<bool>, &SparseMatrix)> = bm.kraus.iter().collect();
    let Some(&(o0, k0)) = branches.first() else {
        out.diagnostic = Some("no branches".into());
        return out;
    };
    let mut entries: Vec<RingScalar> = Vec::with_capacity(bm.inputs.len());
    for (j, &x) in bm.inputs.iter().enumerate() {
        let want = bm.project(map[x]);
        let col = &k0.cols[j];
        if col.len() != 1 || !col.contains_key(&want) {
            out.diagnostic = Some(format!("branch {:?}, input {}: expected a single entry at row {}, found {:?}", o0, x, want, col.keys().collect::<Vec<_>>()));
            return out;
        }
        entries.push(col[&want].clone());
    }
    let Some(c0inv) = entries[0].unit_inverse() else {
        out.diagnostic = Some(format!("entry {} is not invertible", entries[0]));
        return out;
    };
    let mut phases = BTreeMap::new();
    for (j, &x) in bm.inputs.iter().enumerate() {
        match (&entries[j] * &c0inv).as_omega_power() {
            Some(p) => {
                phases.insert(x, p);
            }
            None => {
                out.diagnostic = Some(format!("input {}: amplitude ratio is not a phase", x));
                return out;
            }
        }
    }
    let mut weight = entries[0].norm_sq();
    for &(o, k) in &branches[1..] {
        let s = k.get(bm.project(map[bm.inputs[0]]), 0) * &c0inv;
        if *k != k0.scale(&s) {
            out.diagnostic = Some(format!("branch {:?} is not proportional to branch {:?}", o, o0));
            return out;
        }
        weight = weight + (&entries[0] * &s).norm_sq();
    }
    if weight != RingScalar::one() {
        out.diagnostic = Some(format!("branch weights sum to {}", weight));
        return out;
    }
    let x0 = bm.inputs[0];
    let (base, declared) = match rule {
        PhaseRule::Exact => (None, Some(BTreeSet::new())),
        PhaseRule::Relative { base, support } => (base.as_ref(), Some(support.clone())),
    };
    let residual: BTreeMap<usize, u8> = phases
        .iter()
        .map(|(&x, &p)| {
            let b = base.map_or(0, |b| (8 + b[x] as i16 - b[x0] as i16) as u8 % 8);
            (x, (p + 8 - b) % 8)
        })
        .collect();
    let n = bm.n_qubits;
    let support: BTreeSet<usize> = (0..n)
        .filter(|&q| residual.iter().any(|(&x, &p)| residual.get(&(x ^ 1 << (n - 1 - q))).is_some_and(|&p2| p2 != p)))
        .collect();
    out.phases = Some(phases);
    out.support = Some(support.clone());
    if let Some(d) = declared {
        if !support.is_subset(&d) {
            out.diagnostic = Some(format!("phase depends on {:?}, allowed {:?}", support, d));
            return out;
        }
    }
    if matches!(rule, PhaseRule::Exact) && unit_scalar && entries[0] != RingScalar::one() {
        out.diagnostic = Some(format!("global scalar {} where the exact unitary needs 1", entries[0]));
        return out;
    }
    if !trace_preserving {
        out.diagnostic = Some("sum of K^dagger K is not the identity".into());
        return out;
    }
    out.ok = true;
    out
}

/// The circuit a construction's obligation is checked on: prefix (if any)
/// then the generated circuit, with macros expanded.
pub fn checked_circuit(spec: &ConstructionSpec) -> Result<Circuit, VerifyError> {
    let c = match &spec.target.prefix {
        Some(p) => Circuit::compose(p, &spec.circuit)?,
        None => spec.circuit.clone(),
    };
    let c = lowered(&c);
    c.validate()?;
    Ok(c)
}

/// Simulate a construction and compare it with its declared semantics and
/// T-count formula.
pub fn check_construction(spec: &ConstructionSpec) -> Result<VerificationReport, VerifyError> {
    let c = checked_circuit(spec)?;
    let bm = kraus_of(&c, &input_subspace(&c))?;
    let unit_scalar = !c.has_measurement();
    let a = analyze(&bm, &spec.target.map, &spec.target.phase, unit_scalar);
    let declared = match &spec.target.phase {
        PhaseRule::Exact => BTreeSet::new(),
        PhaseRule::Relative { support, .. } => support.clone(),
    };
    Ok(VerificationReport {
        name: spec.name.clone(),
        k: spec.k,
        m: spec.m,
        variant: spec.variant.clone(),
        semantics_ok: a.ok,
        diagnostic: a.diagnostic,
        trace_preserving: a.trace_preserving,
        measured_tcounts: lowered(&spec.circuit).t_count().values(),
        formula_tcounts: spec.formula.values.clone(),
        formula_text: spec.formula.text.clone(),
        formula_asserted: spec.formula.asserted,
        phases: a.phases,
        phase_support_found: a.support,
        phase_support_declared: Some(declared),
    })
}

/// True when every gate touching `q` acts on it diagonally and nothing
/// measures, allocates or releases it. Sufficient for the middle to be
/// block diagonal in the basis of `q`.
pub fn safe_to_substitute(middle: &Circuit, q: &BTreeSet<usize>) -> bool {
    middle.events.iter().all(|e| match e {
        Event::Gate(g) => g.qubits.iter().enumerate().all(|(pos, w)| {
            if !q.contains(w) {
                return true;
            }
            let last = pos + 1 == g.qubits.len();
            g.kind.is_diagonal()
                || (!last
                    && matches!(
                        g.kind,
                        GateKind::CX
                            | GateKind::Toffoli
                            | GateKind::CCiX
                            | GateKind::CCiXdg
                            | GateKind::LambdaX(_)
                            | GateKind::LambdaiX(_)
                    ))
        }),
        Event::MeasureZ { qubit, .. } | Event::Alloc { qubit, .. } | Event::Release { qubit, .. } => !q.contains(qubit),
    })
}

/// Replace the single-gate oracle at event `first` and its adjoint at event
/// `last` by `repl` and its inverse, placed on the oracle gate's wires.
pub fn substitute_pair(c: &Circuit, first: usize, last: usize, repl: &ConstructionSpec) -> Result<Circuit, VerifyError> {
    let gate = |i: usize| match c.events.get(i) {
        Some(Event::Gate(g)) if g.condition.is_none() => Ok(g.clone()),
        _ => Err(VerifyError::Unsafe(format!("event {} is not an unconditioned gate", i))),
    };
    let (gf, gl) = (gate(first)?, gate(last)?);
    if first >= last || gf.qubits != gl.qubits || gf.kind.dagger() != Some(gl.kind) {
        return Err(VerifyError::Unsafe("marked events are not an oracle and its adjoint".into()));
    }
    let wires = gf.qubits.clone();
    if repl.circuit.n_qubits != wires.len() || repl.circuit.has_measurement() {
        return Err(VerifyError::Unsafe("replacement does not fit the oracle's wires".into()));
    }
    let mut single = Circuit::new(wires.len(), 0);
    single.add(gf.kind, &(0..wires.len()).collect::<Vec<_>>());
    let g = extract_genperm(&unitary(&single)?).ok_or_else(|| VerifyError::Unsafe("oracle is not a permutation".into()))?;
    if g.perm != repl.target.map {
        return Err(VerifyError::Unsafe("replacement computes a different function".into()));
    }
    let mut middle = Circuit::new(c.n_qubits, c.n_cbits);
    middle.events = c.events[first + 1..last].to_vec();
    let q: BTreeSet<usize> = wires.iter().copied().collect();
    if !safe_to_substitute(&middle, &q) {
        return Err(VerifyError::Unsafe("the middle acts non-diagonally on the oracle's wires".into()));
    }
    let gates_only = |x: &Circuit| -> Circuit {
        let mut y = x.clone();
        y.events.retain(|e| matches!(e, Event::Gate(_)));
        y
    };
    let fwd = gates_only(&repl.circuit).embed(&wires, c.n_qubits)?;
    let back = gates_only(&repl.circuit).inverse()?.embed(&wires, c.n_qubits)?;
    let mut out = Circuit { events: Vec::new(), ..c.clone() };
    out.events.extend_from_slice(&c.events[..first]);
    out.events.extend(fwd.events);
    out.events.extend_from_slice(&c.events[first + 1..last]);
    out.events.extend(back.events);
    out.events.extend_from_slice(&c.events[last + 1..]);
    Ok(out)
}

fn lambda_x_gate(n: usize, ctrls: &[usize], tgt: usize) -> Circuit {
    let mut c = Circuit::new(n, 0);
    let mut qs = ctrls.to_vec();
    qs.push(tgt);
    c.add(GateKind::LambdaX(ctrls.len()), &qs);
    c
}

fn restrict<'a>(u: &'a SparseMatrix, cols: &[usize]) -> Vec<&'a BTreeMap<usize, RingScalar>> {
    cols.iter().map(|&x| &u.cols[x]).collect()
}

fn xbullet_identity(k: usize) -> Result<bool, VerifyError> {
    let (xs, a, y, n) = ((0..k).collect::<Vec<_>>(), k, k + 1, k + 2);
    let lhs = cons::xbullet_frag(n, &xs, Some(a), y);
    let mut rhs = lambda_x_gate(n, &xs, y);
    rhs.append(&cons::xbullet_residual_frag(n, &xs, a));
    Ok(unitary(&lhs)? == unitary(&rhs)?)
}

fn xstar_identity(k: usize) -> Result<bool, VerifyError> {
    let (xs, a, n) = ((0..k).collect::<Vec<_>>(), k, k + 1);
    let mut lhs = cons::xstar_frag(n, &xs, a);
    lhs.sdg(a);
    let mut rhs = cons::xbullet_residual_frag(n, &xs[..k - 1], xs[k - 1]);
    rhs.append(&lambda_x_gate(n, &xs, a));
    let cols: Vec<usize> = (0..1usize << n).filter(|x| !bit(*x, a, n)).collect();
    let (ul, ur) = (unitary(&lhs)?, unitary(&rhs)?);
    Ok(restrict(&ul, &cols) == restrict(&ur, &cols))
}

fn terminate_identity(k: usize) -> Result<bool, VerifyError> {
    let (xs, a, n) = ((0..k).collect::<Vec<_>>(), k, k + 1);
    let mut c = Circuit::new(n, 2);
    c.declare(a, Role::Clean);
    c.append(&lambda_x_gate(n, &xs, a));
    let term = cons::kand_terminate_frag(n, &xs, a, TerminateVariant::Relative, 0, 1);
    c.events.extend(term.events);
    let c = lowered(&c);
    c.validate()?;
    let bm = kraus_of(&c, &input_subspace(&c))?;
    let residual = cons::xbullet_residual_frag(k, &xs[..k - 1], xs[k - 1]).inverse()?;
    let d = unitary(&residual)?;
    let mut target = SparseMatrix::zeros(1 << k, bm.inputs.len());
    for (j, &x) in bm.inputs.iter().enumerate() {
        target.cols[j] = d.cols[bm.project(x)].clone();
    }
    let r = compare_branches(&bm, &target, ChannelMode::Exact);
    Ok(r.holds && r.trace_preserving)
}

/// The three relative-phase identities, each at the two smallest `k` it
/// applies to. The termination identity is compared as a channel.
pub fn appendix_identities() -> Result<Vec<(String, bool)>, VerifyError> {
    let mut out = Vec::new();
    for k in [3, 4] {
        out.push((format!("xbullet residual k={}", k), xbullet_identity(k)?));
    }
    for k in [3, 4] {
        out.push((format!("xstar clean target k={}", k), xstar_identity(k)?));
    }
    for k in [4, 5] {
        out.push((format!("k-AND termination k={}", k), terminate_identity(k)?));
    }
    Ok(out)
}

/// One measured cell of the T-count table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LedgerRow {
    pub gate: String,
    pub ancilla: String,
    pub construction: String,
    pub variant: Option<String>,
    pub k: Option<usize>,
    pub m: Option<usize>,
    pub formula_text: String,
    pub formula: BTreeSet<u64>,
    pub measured: Option<BTreeSet<u64>>,
    pub validity: String,
    pub reference_only: bool,
}

impl LedgerRow {
    pub fn matches(&self) -> Option<bool> {
        self.measured.as_ref().map(|m| *m == self.formula)
    }
}

fn row(gate: &str, ancilla: &str, spec: &ConstructionSpec) -> LedgerRow {
    LedgerRow {
        gate: gate.to_string(),
        ancilla: ancilla.to_string(),
        construction: spec.name.clone(),
        variant: spec.variant.clone(),
        k: spec.k,
        m: spec.m,
        formula_text: spec.formula.text.clone(),
        formula: spec.formula.values.clone(),
        measured: Some(lowered(&spec.circuit).t_count().values()),
        validity: spec.validity.clone(),
        reference_only: false,
    }
}

fn reference(gate: &str, ancilla: &str, text: &str, validity: &str, k: usize, value: u64) -> LedgerRow {
    LedgerRow {
        gate: gate.to_string(),
        ancilla: ancilla.to_string(),
        construction: "prior art".to_string(),
        variant: None,
        k: Some(k),
        m: None,
        formula_text: text.to_string(),
        formula: BTreeSet::from([value]),
        measured: None,
        validity: validity.to_string(),
        reference_only: true,
    }
}

/// Every row of the T-count table at every valid `k <= k_max`, with the
/// count measured on the generated circuit.
pub fn table_ledger(k_max: usize) -> Result<Vec<LedgerRow>, VerifyError> {
    let mut rows = Vec::new();
    let f = cons::Oracle::toffoli(2, 0, 1);
    let g = cons::Oracle::cx(2, 1).padded(1);
    rows.push(row("U_{f.g}", "|00>", &cons::oracle_mult_clean(&f, &g)?));
    rows.push(row("U_{f.g}", "-", &cons::oracle_mult_matched(&f, &g)?));
    rows.push(row("U_{f.g}", "-", &cons::oracle_mult_unmatched(&f, &g)?));
    let ks = |lo: usize| lo..=k_max;
    for k in ks(6) {
        rows.push(reference("L_k(X)", "|z>", "16(k-1)", "k >= 6", k, 16 * (k as u64 - 1)));
    }
    for k in ks(2) {
        rows.push(row("L_k(X.)", "|z>", &cons::lambda_x_bullet_dirty(k)?));
    }
    for k in ks(4) {
        rows.push(row("L_k(X)", "|z>", &cons::lambda_x_dirty(k, DirtyVariant::Matched)?));
        rows.push(row("L_k(X)", "|z>", &cons::lambda_x_dirty(k, DirtyVariant::PhaseCleanup)?));
    }
    for k in ks(4) {
        rows.push(row("L_k(X)", "|0>", &cons::jones_lambda_x(k)?));
    }
    for k in ks(6) {
        rows.push(reference("L_k(iX)", "-", "16(k-2)+4", "k >= 6", k, 16 * (k as u64 - 2) + 4));
    }
    for k in ks(4) {
        rows.push(row("L_k(iX)", "-", &cons::cix(k)?));
    }
    for k in ks(5) {
        rows.push(row("L_k(X.)", "-", &cons::cxbullet(k)?));
    }
    for k in ks(3) {
        rows.push(row("L_k(X*)", "-", &cons::cxstar(k)?));
    }
    for k in ks(5) {
        for m in 1..=k - 3 {
            rows.push(row("L_k(X*)", "|0>^m", &cons::cxstar_with_ancillas(k, m)?));
        }
    }
    for k in ks(2) {
        rows.push(row("U_{f_k}", "|z>", &cons::fk_dirty(k, FkVariant::Plain)?));
    }
    for k in ks(2) {
        rows.push(row("U_{f_k}", "-", &cons::fk_circuit(k, FkVariant::Plain)?));
        rows.push(row("U_{f_k}", "-", &cons::fk_circuit(k, FkVariant::Maslov)?));
    }
    rows.push(row("3-AND", "|0>", &cons::and3_init()));
    rows.push(row("3-AND^", "-", &cons::and3_terminate()));
    for k in ks(4) {
        rows.push(row("k-AND", "|0>", &cons::kand_init(k, InitVariant::IX)?));
    }
    for k in ks(6) {
        rows.push(row("k-AND^", "-", &cons::kand_terminate(k, TerminateVariant::Exact)?));
    }
    for k in ks(3) {
        rows.push(row("k-AND", "|0>", &cons::kand_init(k, InitVariant::Star)?));
    }
    for k in ks(4) {
        rows.push(row("k-AND^", "-", &cons::kand_terminate(k, TerminateVariant::Relative)?));
    }
    Ok(rows)
}

type Choi = BTreeMap<(usize, usize), BTreeMap<(usize, usize), RingScalar>>;

fn choi(bm: &BranchMap) -> Choi {
    let mut out: Choi = BTreeMap::new();
    for k in bm.kraus.values() {
        for (i, ci) in k.cols.iter().enumerate() {
            for (j, cj) in k.cols.iter().enumerate() {
                let block = out.entry((i, j)).or_default();
                for (r, a) in ci {
                    for (s, b) in cj {
                        let v = a * &b.conj();
                        let e = block.entry((*r, *s)).or_default();
                        *e = &*e + &v;
                    }
                }
            }
        }
    }
    for block in out.values_mut() {
        block.retain(|_, v| !v.is_zero());
    }
    out.retain(|_, b| !b.is_empty());
    out
}

/// Exact equality of two circuits: as unitaries when neither measures,
/// otherwise as channels on the shared input subspace.
pub fn equivalent(a: &Circuit, b: &Circuit) -> Result<bool, VerifyError> {
    if a.n_qubits != b.n_qubits {
        return Err(VerifyError::Circuit(CircuitError::SizeMismatch));
    }
    let (la, lb) = (lowered(a), lowered(b));
    la.validate()?;
    lb.validate()?;
    if !la.has_measurement() && !lb.has_measurement() && la.io_spec == lb.io_spec {
        return Ok(unitary_of(&la)? == unitary_of(&lb)?);
    }
    let inputs = input_subspace(&la);
    if inputs != input_subspace(&lb) {
        return Ok(false);
    }
    let (ba, bb) = (kraus_of(&la, &inputs)?, kraus_of(&lb, &inputs)?);
    Ok(ba.kept == bb.kept && choi(&ba) == choi(&bb))
}
