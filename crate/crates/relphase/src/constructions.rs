//! Circuit generators, each paired with the semantics it claims and the
//! T-count its formula predicts.
//!
//! Wire layouts put controls first in order `x1..xk`, then ancillas, then the
//! target, unless a generator says otherwise.

use alloc::borrow::ToOwned;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::boolfn::{fk, BooleanFn, FkVariant};
use crate::circuit::{AncillaKind, Circuit, GateKind, Release, Role};
use crate::sim::{unitary_of, SparseMatrix};
use crate::ring::RingScalar;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConstructionError {
    OutOfRange(String),
    BadOracle(String),
    UnknownName(String),
    MissingParameter(&'static str),
    BadVariant(String),
}

impl fmt::Display for ConstructionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstructionError::OutOfRange(m) => write!(f, "parameter out of range: {}", m),
            ConstructionError::BadOracle(m) => write!(f, "bad oracle: {}", m),
            ConstructionError::UnknownName(n) => write!(f, "unknown construction '{}'", n),
            ConstructionError::MissingParameter(p) => write!(f, "missing parameter {}", p),
            ConstructionError::BadVariant(v) => write!(f, "unknown variant '{}'", v),
        }
    }
}

/// How the phase of a generalized permutation is constrained.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PhaseRule {
    /// No phase: the circuit is the permutation itself.
    Exact,
    /// The phase, after removing `base` (ω-exponents per basis index), may
    /// depend only on the qubits in `support`.
    Relative { base: Option<Vec<u8>>, support: BTreeSet<usize> },
}

impl PhaseRule {
    pub fn support(qs: impl IntoIterator<Item = usize>) -> Self {
        PhaseRule::Relative { base: None, support: qs.into_iter().collect() }
    }
}

/// The claimed meaning of a generated circuit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Target {
    /// Image of each basis index. Only inputs the circuit accepts are read,
    /// and bits of released qubits are ignored.
    pub map: Vec<usize>,
    pub phase: PhaseRule,
    /// Run first, to prepare what this circuit consumes.
    pub prefix: Option<Circuit>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Formula {
    pub text: String,
    /// Predicted T-count of each branch.
    pub values: BTreeSet<u64>,
    /// False for counts recorded but not claimed.
    pub asserted: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstructionSpec {
    pub name: String,
    pub k: Option<usize>,
    pub m: Option<usize>,
    pub variant: Option<String>,
    pub circuit: Circuit,
    pub target: Target,
    pub formula: Formula,
    pub validity: String,
}

fn formula(text: impl Into<String>, values: impl IntoIterator<Item = u64>) -> Formula {
    Formula { text: text.into(), values: values.into_iter().collect(), asserted: true }
}

fn need(ok: bool, what: impl Into<String>) -> Result<(), ConstructionError> {
    if ok {
        Ok(())
    } else {
        Err(ConstructionError::OutOfRange(what.into()))
    }
}

fn bit(x: usize, q: usize, n: usize) -> bool {
    x >> (n - 1 - q) & 1 == 1
}

fn flip(x: usize, q: usize, n: usize) -> usize {
    x ^ 1 << (n - 1 - q)
}

fn all_set(x: usize, qs: &[usize], n: usize) -> bool {
    qs.iter().all(|&q| bit(x, q, n))
}

fn build_map(n: usize, f: impl Fn(usize) -> usize) -> Vec<usize> {
    (0..1usize << n).map(f).collect()
}

fn lambda_x_map(n: usize, ctrls: &[usize], tgt: usize) -> Vec<usize> {
    build_map(n, |x| if all_set(x, ctrls, n) { flip(x, tgt, n) } else { x })
}

fn identity_map(n: usize) -> Vec<usize> {
    (0..1usize << n).collect()
}

fn range(a: usize, b: usize) -> Vec<usize> {
    (a..b).collect()
}

/// Evaluate `f` on the values of `wires` (wire `i` is variable `x_{i+1}`).
fn eval_on(f: &BooleanFn, x: usize, wires: &[usize], n: usize) -> bool {
    let mask = wires.iter().enumerate().fold(0u64, |m, (i, &w)| if bit(x, w, n) { m | 1 << i } else { m });
    f.eval_mask(mask)
}

fn perm_matrix(map: &[usize]) -> SparseMatrix {
    let mut m = SparseMatrix::zeros(map.len(), map.len());
    for (x, &y) in map.iter().enumerate() {
        m.set(y, x, RingScalar::one());
    }
    m
}

/// Relative-phase Z ladder: `(-1)^(tgt * prod(ctrls))` times a diagonal in
/// the controls and the dirty ancilla. Three or more controls need `anc`.
pub fn zrel_frag(n: usize, ctrls: &[usize], anc: Option<usize>, tgt: usize) -> Circuit {
    let mut c = Circuit::new(n, 0);
    push_zrel(&mut c, ctrls, anc, tgt);
    c
}

fn push_zrel(c: &mut Circuit, ctrls: &[usize], anc: Option<usize>, tgt: usize) {
    match ctrls {
        [] => {
            c.z(tgt);
        }
        [a] => {
            c.cz(*a, tgt);
        }
        [a, b] => {
            c.cciz(*a, *b, tgt);
        }
        [rest @ .., last] => {
            let anc = anc.expect("ladder with three or more controls needs an ancilla");
            c.ccix(*last, tgt, anc);
            push_zrel(c, rest, Some(*last), anc);
            c.ccixdg(*last, tgt, anc);
        }
    }
}

/// X with a relative phase in the controls and the dirty ancilla.
pub fn xbullet_frag(n: usize, ctrls: &[usize], anc: Option<usize>, tgt: usize) -> Circuit {
    let mut c = Circuit::new(n, 0);
    c.h(tgt);
    push_zrel(&mut c, ctrls, anc, tgt);
    c.h(tgt);
    c
}

/// X with a relative phase in the controls and the target, no ancilla.
pub fn xstar_frag(n: usize, ctrls: &[usize], tgt: usize) -> Circuit {
    let mut c = Circuit::new(n, 0);
    match ctrls {
        [] => {
            c.x(tgt);
        }
        [a] => {
            c.cx(*a, tgt);
        }
        [a, b] => {
            c.ccix(*a, *b, tgt);
        }
        [rest @ .., last] => {
            c.h(tgt).t(tgt).cx(*last, tgt).tdg(tgt).h(tgt);
            push_zrel(&mut c, rest, Some(*last), tgt);
            c.h(tgt).t(tgt).cx(*last, tgt).tdg(tgt).h(tgt);
        }
    }
    c
}

/// The diagonal `D` with `xbullet = Lambda(X) D`: a phase on the controls
/// and the dirty ancilla only.
pub fn xbullet_residual_frag(n: usize, ctrls: &[usize], anc: usize) -> Circuit {
    let mut c = Circuit::new(n, 0);
    match ctrls {
        [] | [_] => {}
        [a, b] => {
            c.add(GateKind::CS, &[*a, *b]);
        }
        [rest @ .., last] => push_zrel(&mut c, rest, Some(*last), anc),
    }
    c
}

fn inv(c: &Circuit) -> Circuit {
    c.inverse().expect("gate-only fragment")
}

/// Exact multiply-controlled Z using one dirty ancilla.
fn exact_z_frag(n: usize, ctrls: &[usize], dirty: usize, tgt: usize) -> Circuit {
    let m = ctrls.len();
    let mut c = zrel_frag(n, ctrls, Some(dirty), tgt);
    if m >= 3 {
        c.append(&inv(&zrel_frag(n, &ctrls[..m - 1], Some(ctrls[m - 1]), dirty)));
    }
    c
}

/// A circuit computing `y ^= f(x)` on `n + 1` wires with the target last.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Oracle {
    pub circuit: Circuit,
    pub func: BooleanFn,
}

impl Oracle {
    pub fn new(circuit: Circuit, func: BooleanFn) -> Result<Self, ConstructionError> {
        if circuit.n_qubits != func.n_vars + 1 {
            return Err(ConstructionError::BadOracle(format!(
                "{} wires for a function of {} variables",
                circuit.n_qubits, func.n_vars
            )));
        }
        if circuit.has_measurement() || circuit.inverse().is_err() {
            return Err(ConstructionError::BadOracle("oracle must be an invertible gate sequence".into()));
        }
        Ok(Oracle { circuit, func })
    }

    /// `y ^= x_i` on `n` inputs.
    pub fn cx(n: usize, i: usize) -> Oracle {
        let mut c = Circuit::new(n + 1, 0);
        c.cx(i, n);
        Oracle { circuit: c, func: BooleanFn::var(n, i) }
    }

    /// `y ^= x_i x_j` on `n` inputs.
    pub fn toffoli(n: usize, i: usize, j: usize) -> Oracle {
        let mut c = Circuit::new(n + 1, 0);
        c.toffoli(i, j, n);
        Oracle { circuit: c, func: BooleanFn::monomial(n, &[i, j]) }
    }

    /// `y ^= x_1 ... x_n` as a single gate.
    pub fn and_all(n: usize) -> Oracle {
        let mut c = Circuit::new(n + 1, 0);
        match n {
            1 => c.cx(0, 1),
            2 => c.toffoli(0, 1, 2),
            _ => c.add(GateKind::LambdaX(n), &range(0, n + 1)),
        };
        Oracle { circuit: c, func: BooleanFn::monomial(n, &range(0, n)) }
    }

    /// Add `pairs` cancelling T/T† pairs on the first input, raising the
    /// T-count by `2 * pairs` without changing the unitary.
    pub fn padded(mut self, pairs: usize) -> Oracle {
        for _ in 0..pairs {
            self.circuit.t(0).tdg(0);
        }
        self
    }

    pub fn n_inputs(&self) -> usize {
        self.func.n_vars
    }

    pub fn t_count(&self) -> u64 {
        self.circuit.t_count().unconditional
    }

    /// True when the oracle's unitary is exactly `|x, y> -> |x, y ^ f(x)>`.
    pub fn is_exact(&self) -> bool {
        let n = self.circuit.n_qubits;
        let all: Vec<usize> = range(0, n - 1);
        let map = build_map(n, |x| if eval_on(&self.func, x, &all, n) { flip(x, n - 1, n) } else { x });
        matches!(unitary_of(&self.circuit), Ok(u) if u == perm_matrix(&map))
    }

    fn placed(&self, inputs: &[usize], tgt: usize, total: usize) -> Circuit {
        let mut mapping = inputs.to_vec();
        mapping.push(tgt);
        let mut c = self.circuit.embed(&mapping, total).expect("oracle placement");
        c.io_spec = vec![Role::Input; total];
        c
    }
}

fn same_arity(f: &Oracle, g: &Oracle) -> Result<usize, ConstructionError> {
    if f.n_inputs() != g.n_inputs() {
        return Err(ConstructionError::BadOracle("oracles take different numbers of inputs".into()));
    }
    Ok(f.n_inputs())
}

struct Builder {
    name: &'static str,
    k: Option<usize>,
    m: Option<usize>,
    variant: Option<&'static str>,
    validity: &'static str,
}

impl Builder {
    fn new(name: &'static str, validity: &'static str) -> Self {
        Builder { name, k: None, m: None, variant: None, validity }
    }
    fn k(mut self, k: usize) -> Self {
        self.k = Some(k);
        self
    }
    fn m(mut self, m: usize) -> Self {
        self.m = Some(m);
        self
    }
    fn variant(mut self, v: &'static str) -> Self {
        self.variant = Some(v);
        self
    }
    fn done(self, circuit: Circuit, target: Target, formula: Formula) -> ConstructionSpec {
        ConstructionSpec {
            name: self.name.to_string(),
            k: self.k,
            m: self.m,
            variant: self.variant.map(|v| v.to_string()),
            circuit,
            target,
            formula,
            validity: self.validity.to_string(),
        }
    }
}

fn unitary_target(map: Vec<usize>, phase: PhaseRule) -> Target {
    Target { map, phase, prefix: None }
}

pub fn ccix() -> ConstructionSpec {
    let mut c = Circuit::new(3, 0);
    c.declare(2, Role::Target);
    c.ccix(0, 1, 2);
    Builder::new("ccix", "none").done(c, unitary_target(lambda_x_map(3, &[0, 1], 2), PhaseRule::support([0, 1])), formula("4", [4]))
}

pub fn ccix_dg() -> ConstructionSpec {
    let mut c = Circuit::new(3, 0);
    c.declare(2, Role::Target);
    c.ccixdg(0, 1, 2);
    Builder::new("ccix_dg", "none").done(c, unitary_target(lambda_x_map(3, &[0, 1], 2), PhaseRule::support([0, 1])), formula("4", [4]))
}

fn maslov_body(c: &mut Circuit, x: [usize; 3], y: usize) {
    let [a, b, d] = x;
    c.h(y).t(y).cx(d, y).tdg(y).h(y);
    c.cx(a, y).t(y).cx(b, y).tdg(y).cx(a, y).t(y).cx(b, y).tdg(y);
    c.h(y).t(y).cx(d, y).tdg(y).h(y);
}

/// The 8-T relative-phase Toffoli with three controls.
pub fn maslov_toffoli4() -> ConstructionSpec {
    let mut c = Circuit::new(4, 0);
    c.declare(3, Role::Target);
    maslov_body(&mut c, [0, 1, 2], 3);
    let t = unitary_target(lambda_x_map(4, &[0, 1, 2], 3), PhaseRule::support(0..4));
    Builder::new("maslov_toffoli4", "none").done(c, t, formula("8", [8]))
}

/// The iX skeleton around two multiply-controlled X implementations; the
/// first `inner_a.n_inputs()` controls feed `inner_a`, the rest `inner_b`.
pub fn giles_selinger_skeleton(k: usize, inner_a: &Oracle, inner_b: &Oracle) -> Result<ConstructionSpec, ConstructionError> {
    let (na, nb) = (inner_a.n_inputs(), inner_b.n_inputs());
    need(na >= 1 && nb >= 1, "both control groups must be nonempty")?;
    need(na + nb == k, format!("groups of {} and {} do not make k = {}", na, nb, k))?;
    let n = k + 1;
    let (ga, gb) = (range(0, na), range(na, k));
    let a = inner_a.placed(&ga, k, n);
    let b = inner_b.placed(&gb, k, n);
    let mut c = Circuit::new(n, 0);
    c.declare(k, Role::Target);
    c.h(k).tdg(k).append(&b).t(k).append(&a).tdg(k).append(&inv(&b)).t(k).append(&inv(&a)).h(k);
    let map = build_map(n, |x| {
        if eval_on(&inner_a.func, x, &ga, n) && eval_on(&inner_b.func, x, &gb, n) {
            flip(x, k, n)
        } else {
            x
        }
    });
    let cost = 2 * inner_a.t_count() + 2 * inner_b.t_count() + 4;
    Ok(Builder::new("giles_selinger_skeleton", "k >= 2")
        .k(k)
        .done(c, unitary_target(map, PhaseRule::support(0..k)), formula("2τ(A) + 2τ(B) + 4", [cost])))
}

/// Toffoli with a clean ancilla uncomputed by measurement.
pub fn jones_toffoli() -> ConstructionSpec {
    let mut c = Circuit::new(4, 1);
    c.declare(2, Role::Target).declare(3, Role::Clean);
    c.ccix(0, 1, 3).sdg(3).cx(3, 2).h(3).measz(3, 0);
    c.add_if(0, true, GateKind::CZ, &[0, 1]);
    c.release(3, Release::Measured);
    let t = Target { map: lambda_x_map(4, &[0, 1], 2), phase: PhaseRule::Exact, prefix: None };
    Builder::new("jones_toffoli", "none").done(c, t, formula("4", [4]))
}

pub fn gidney_and_init() -> ConstructionSpec {
    let mut c = Circuit::new(3, 0);
    c.declare(2, Role::Clean);
    c.ccix(0, 1, 2).sdg(2);
    Builder::new("gidney_and_init", "none").done(c, unitary_target(lambda_x_map(3, &[0, 1], 2), PhaseRule::Exact), formula("4", [4]))
}

pub fn gidney_and_terminate() -> ConstructionSpec {
    let mut c = Circuit::new(3, 1);
    c.h(2).measz(2, 0);
    c.add_if(0, true, GateKind::CZ, &[0, 1]);
    c.release(2, Release::Measured);
    let t = Target { map: identity_map(3), phase: PhaseRule::Exact, prefix: Some(gidney_and_init().circuit) };
    Builder::new("gidney_and_terminate", "none").done(c, t, formula("0", [0]))
}

fn oracle_map(f: &BooleanFn, inputs: &[usize], tgt: usize, n: usize) -> Vec<usize> {
    build_map(n, |x| if eval_on(f, x, inputs, n) { flip(x, tgt, n) } else { x })
}

/// Compute into a clean ancilla, copy, uncompute.
pub fn bennett(f: &Oracle) -> ConstructionSpec {
    let k = f.n_inputs();
    let (a, y, n) = (k, k + 1, k + 2);
    let xs = range(0, k);
    let fa = f.placed(&xs, a, n);
    let mut c = Circuit::new(n, 0);
    c.declare(a, Role::Clean).declare(y, Role::Target);
    c.append(&fa).cx(a, y).append(&inv(&fa)).release(a, Release::Zero);
    let t = unitary_target(oracle_map(&f.func, &xs, y, n), PhaseRule::Exact);
    Builder::new("bennett", "none").done(c, t, formula("2τ(U_f)", [2 * f.t_count()]))
}

/// Bennett's trick with a dirty ancilla: copy, compute, copy, uncompute.
pub fn bennett_dirty(f: &Oracle) -> ConstructionSpec {
    let k = f.n_inputs();
    let (a, y, n) = (k, k + 1, k + 2);
    let xs = range(0, k);
    let fa = f.placed(&xs, a, n);
    let mut c = Circuit::new(n, 0);
    c.declare(a, Role::Dirty).declare(y, Role::Target);
    c.cx(a, y).append(&fa).cx(a, y).append(&inv(&fa)).release(a, Release::Unchanged);
    let t = unitary_target(oracle_map(&f.func, &xs, y, n), PhaseRule::Exact);
    Builder::new("bennett_dirty", "none").done(c, t, formula("2τ(U_f)", [2 * f.t_count()]))
}

/// A single compute between two copies with the ancilla in the X basis.
pub fn phase_bennett(f: &Oracle) -> ConstructionSpec {
    let k = f.n_inputs();
    let (a, y, n) = (k, k + 1, k + 2);
    let xs = range(0, k);
    let mut c = Circuit::new(n, 0);
    c.declare(a, Role::Clean).declare(y, Role::Target);
    c.h(a).cx(a, y).append(&f.placed(&xs, a, n)).cx(a, y).h(a).release(a, Release::Zero);
    let t = unitary_target(oracle_map(&f.func, &xs, y, n), PhaseRule::Exact);
    Builder::new("phase_bennett", "none").done(c, t, formula("τ(U_f)", [f.t_count()]))
}

/// Four-control Toffoli with two dirty ancillas whose phase is left behind.
pub fn relative_tof4_dirty() -> ConstructionSpec {
    let (a, b, y, n) = (4, 5, 6, 7);
    let mut c = Circuit::new(n, 0);
    c.declare(a, Role::Dirty).declare(b, Role::Dirty).declare(y, Role::Target);
    c.h(a).h(b);
    c.toffoli(3, b, y).toffoli(2, a, b).toffoli(0, 1, a).toffoli(2, a, b).toffoli(3, b, y);
    c.h(a).h(b);
    c.release(a, Release::Unchanged).release(b, Release::Unchanged);
    let t = unitary_target(lambda_x_map(n, &[0, 1, 2, 3], y), PhaseRule::support([0, 1, 2, a, b]));
    let mut fm = formula("35 with five Toffolis as drawn", [35]);
    fm.asserted = false;
    Builder::new("relative_tof4_dirty", "none").done(c, t, fm)
}

fn product_map(f: &Oracle, g: &Oracle, xs: &[usize], y: usize, n: usize) -> Vec<usize> {
    oracle_map(&f.func.multiply(&g.func), xs, y, n)
}

/// `y ^= f(x) g(x)` with two clean ancillas.
pub fn oracle_mult_clean(f: &Oracle, g: &Oracle) -> Result<ConstructionSpec, ConstructionError> {
    let k = same_arity(f, g)?;
    let (a1, a2, y, n) = (k, k + 1, k + 2, k + 3);
    let xs = range(0, k);
    let fa = f.placed(&xs, a1, n);
    let mut c = Circuit::new(n, 0);
    c.declare(a1, Role::Clean).declare(a2, Role::Clean).declare(y, Role::Target);
    c.append(&fa);
    c.h(y).ccix(a1, y, a2).h(y);
    c.h(a2).append(&g.placed(&xs, a2, n)).h(a2);
    c.h(y).ccixdg(a1, y, a2).h(y);
    c.append(&inv(&fa));
    c.release(a1, Release::Zero).release(a2, Release::Zero);
    let cost = 2 * f.t_count() + g.t_count() + 8;
    let t = unitary_target(product_map(f, g, &xs, y, n), PhaseRule::Exact);
    Ok(Builder::new("oracle_mult_clean", "none").done(c, t, formula("2τ(U_f) + τ(U_g) + 8", [cost])))
}

fn alternating(f: &Oracle, g: &Oracle, matched: bool) -> Result<(Circuit, usize), ConstructionError> {
    let k = same_arity(f, g)?;
    let (y, n) = (k, k + 1);
    let xs = range(0, k);
    let (fy, gy) = (f.placed(&xs, y, n), g.placed(&xs, y, n));
    let mut c = Circuit::new(n, 0);
    c.declare(y, Role::Target);
    c.h(y).t(y).append(&fy).tdg(y).append(&gy).t(y).append(&fy).tdg(y);
    if matched {
        c.append(&gy);
    }
    c.h(y);
    Ok((c, k))
}

/// Product oracle without ancillas; the phase stays in the controls.
pub fn oracle_mult_matched(f: &Oracle, g: &Oracle) -> Result<ConstructionSpec, ConstructionError> {
    let (c, k) = alternating(f, g, true)?;
    let cost = 2 * f.t_count() + 2 * g.t_count() + 4;
    let t = unitary_target(product_map(f, g, &range(0, k), k, k + 1), PhaseRule::support(0..k));
    Ok(Builder::new("oracle_mult_matched", "none").done(c, t, formula("2τ(U_f) + 2τ(U_g) + 4", [cost])))
}

/// Product oracle with one fewer `g`; the phase reaches the target.
pub fn oracle_mult_unmatched(f: &Oracle, g: &Oracle) -> Result<ConstructionSpec, ConstructionError> {
    let (c, k) = alternating(f, g, false)?;
    let cost = 2 * f.t_count() + g.t_count() + 4;
    let t = unitary_target(product_map(f, g, &range(0, k), k, k + 1), PhaseRule::support(0..=k));
    Ok(Builder::new("oracle_mult_unmatched", "none").done(c, t, formula("2τ(U_f) + τ(U_g) + 4", [cost])))
}

fn dirty_layout(k: usize) -> (Vec<usize>, usize, usize, usize) {
    (range(0, k), k, k + 1, k + 2)
}

fn dirty_circuit(k: usize) -> (Circuit, Vec<usize>, usize, usize, usize) {
    let (xs, a, y, n) = dirty_layout(k);
    let mut c = Circuit::new(n, 0);
    c.declare(a, Role::Dirty).declare(y, Role::Target);
    (c, xs, a, y, n)
}

pub fn lambda_x_bullet_dirty(k: usize) -> Result<ConstructionSpec, ConstructionError> {
    need(k >= 2, "lambda_x_bullet_dirty needs k >= 2")?;
    let (mut c, xs, a, y, n) = dirty_circuit(k);
    c.append(&xbullet_frag(n, &xs, Some(a), y)).release(a, Release::Unchanged);
    let mut support: BTreeSet<usize> = xs.iter().copied().collect();
    support.insert(a);
    let t = unitary_target(lambda_x_map(n, &xs, y), PhaseRule::Relative { base: None, support });
    let v = 8 * (k as u64 - 2) + 4;
    Ok(Builder::new("lambda_x_bullet_dirty", "k >= 2").k(k).done(c, t, formula("8(k-2)+4", [v])))
}

pub fn lambda_z_relative(k: usize) -> Result<ConstructionSpec, ConstructionError> {
    need(k >= 2, "lambda_z_relative needs k >= 2")?;
    let (mut c, xs, a, y, n) = dirty_circuit(k);
    c.append(&zrel_frag(n, &xs, Some(a), y)).release(a, Release::Unchanged);
    let base = (0..1usize << n).map(|x| if bit(x, y, n) && all_set(x, &xs, n) { 4 } else { 0 }).collect();
    let mut support: BTreeSet<usize> = xs.iter().copied().collect();
    support.insert(a);
    let t = unitary_target(identity_map(n), PhaseRule::Relative { base: Some(base), support });
    let v = 8 * (k as u64 - 2) + 4;
    Ok(Builder::new("lambda_z_relative", "k >= 2").k(k).done(c, t, formula("8(k-2)+4", [v])))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DirtyVariant {
    Matched,
    PhaseCleanup,
}

/// Exact multiply-controlled X with one dirty ancilla.
pub fn lambda_x_dirty(k: usize, variant: DirtyVariant) -> Result<ConstructionSpec, ConstructionError> {
    need(k >= 4, "lambda_x_dirty needs k >= 4")?;
    let (mut c, xs, a, y, n) = dirty_circuit(k);
    let xk = xs[k - 1];
    let head = &xs[..k - 1];
    match variant {
        DirtyVariant::Matched => {
            let mut g1 = Circuit::new(n, 0);
            g1.h(a).h(y).ccix(xk, y, a).h(y).h(a);
            let xb = xbullet_frag(n, head, Some(xk), a);
            c.append(&g1).append(&xb).append(&inv(&g1)).append(&inv(&xb));
        }
        DirtyVariant::PhaseCleanup => {
            c.append(&xbullet_frag(n, &xs, Some(a), y));
            c.append(&inv(&zrel_frag(n, head, Some(xk), a)));
        }
    }
    c.release(a, Release::Unchanged);
    let t = unitary_target(lambda_x_map(n, &xs, y), PhaseRule::Exact);
    let name = match variant {
        DirtyVariant::Matched => "matched",
        DirtyVariant::PhaseCleanup => "phase_cleanup",
    };
    let v = 16 * (k as u64 - 2);
    Ok(Builder::new("lambda_x_dirty", "k >= 4").k(k).variant(name).done(c, t, formula("16(k-2)", [v])))
}

fn split(k: usize) -> (Vec<usize>, Vec<usize>) {
    (range(0, k / 2), range(k / 2, k))
}

fn cix_frag(n: usize, xs: &[usize], y: usize) -> Circuit {
    let (ga, gb) = xs.split_at(xs.len() / 2);
    let xa = xbullet_frag(n, ga, Some(gb[gb.len() - 1]), y);
    let xb = xbullet_frag(n, gb, Some(ga[ga.len() - 1]), y);
    let mut c = Circuit::new(n, 0);
    c.h(y).tdg(y).append(&xb).t(y).append(&xa).tdg(y).append(&inv(&xb)).t(y).append(&inv(&xa)).h(y);
    c
}

/// Multiply-controlled iX with the phase confined to the controls.
pub fn cix(k: usize) -> Result<ConstructionSpec, ConstructionError> {
    need(k >= 4, "cix needs k >= 4")?;
    let (xs, y, n) = (range(0, k), k, k + 1);
    let mut c = Circuit::new(n, 0);
    c.declare(y, Role::Target);
    c.append(&cix_frag(n, &xs, y));
    let t = unitary_target(lambda_x_map(n, &xs, y), PhaseRule::support(0..k));
    let v = 16 * (k as u64 - 3) + 4;
    Ok(Builder::new("cix", "k >= 4").k(k).done(c, t, formula("16(k-3)+4", [v])))
}

/// Multiply-controlled X with phase in the controls and target, no ancilla.
pub fn cxstar(k: usize) -> Result<ConstructionSpec, ConstructionError> {
    need(k >= 3, "cxstar needs k >= 3")?;
    let (xs, y, n) = (range(0, k), k, k + 1);
    let mut c = Circuit::new(n, 0);
    c.declare(y, Role::Target);
    c.append(&xstar_frag(n, &xs, y));
    let t = unitary_target(lambda_x_map(n, &xs, y), PhaseRule::support(0..=k));
    let v = 8 * (k as u64 - 2);
    Ok(Builder::new("cxstar", "k >= 3").k(k).done(c, t, formula("8(k-2)", [v])))
}

/// `cxstar` after folding the first `m + 1` controls into a chain of
/// temporary ANDs on `m` clean ancillas, uncomputed by measurement.
pub fn cxstar_with_ancillas(k: usize, m: usize) -> Result<ConstructionSpec, ConstructionError> {
    need(m >= 1, "cxstar_with_ancillas needs m >= 1")?;
    need(k >= m + 3, "cxstar_with_ancillas needs m <= k-3")?;
    let (xs, y) = (range(0, k), k);
    let anc: Vec<usize> = range(k + 1, k + 1 + m);
    let n = k + 1 + m;
    let mut c = Circuit::new(n, m);
    c.declare(y, Role::Target);
    for &a in &anc {
        c.declare(a, Role::Clean);
    }
    let mut pairs = Vec::with_capacity(m);
    let mut prev = xs[0];
    for (j, &a) in anc.iter().enumerate() {
        let other = xs[j + 1];
        c.ccix(prev, other, a).sdg(a);
        pairs.push((prev, other));
        prev = a;
    }
    let mut rest = vec![prev];
    rest.extend_from_slice(&xs[m + 1..]);
    c.append(&xstar_frag(n, &rest, y));
    for (j, &a) in anc.iter().enumerate().rev() {
        let (p, q) = pairs[j];
        c.h(a).measz(a, j);
        c.add_if(j, true, GateKind::CZ, &[p, q]);
        c.release(a, Release::Measured);
    }
    let t = Target { map: lambda_x_map(n, &xs, y), phase: PhaseRule::support(0..=k), prefix: None };
    let v = 4 * m as u64 + 8 * (k - m - 2) as u64;
    Ok(Builder::new("cxstar_with_ancillas", "1 <= m <= k-3").k(k).m(m).done(c, t, formula("4m+8(k-m-2)", [v])))
}

/// Multiply-controlled X with phase in the controls only, no ancilla.
pub fn cxbullet(k: usize) -> Result<ConstructionSpec, ConstructionError> {
    need(k >= 5, "cxbullet needs k >= 5")?;
    let (xs, y, n) = (range(0, k), k, k + 1);
    let (ga, gb) = split(k);
    let xa = xstar_frag(n, &ga, y);
    let xb = xstar_frag(n, &gb, y);
    let mut c = Circuit::new(n, 0);
    c.declare(y, Role::Target);
    c.h(y).tdg(y).append(&xb).t(y).append(&xa).tdg(y).append(&inv(&xb)).t(y).append(&inv(&xa)).h(y);
    let t = unitary_target(lambda_x_map(n, &xs, y), PhaseRule::support(0..k));
    let v = 16 * (k as u64 - 4) + 4;
    Ok(Builder::new("cxbullet", "k >= 5").k(k).done(c, t, formula("16(k-4)+4", [v])))
}

fn push_fk(c: &mut Circuit, vars: &[usize], y: usize, variant: FkVariant) {
    match (vars, variant) {
        ([v], _) => {
            c.cx(*v, y);
        }
        ([a, b], FkVariant::Maslov) => {
            c.h(y).cx(*a, y).t(y).cx(*b, y).tdg(y).cx(*a, y).t(y).cx(*b, y).tdg(y).h(y);
        }
        ([first, rest @ ..], _) => {
            c.h(y).t(y).cx(*first, y).tdg(y);
            push_fk(c, rest, y, variant);
            c.t(y).cx(*first, y).tdg(y).h(y);
        }
        ([], _) => unreachable!("fk needs at least one variable"),
    }
}

fn fk_frag(n: usize, xs: &[usize], y: usize, variant: FkVariant) -> Circuit {
    let mut c = Circuit::new(n, 0);
    push_fk(&mut c, xs, y, variant);
    c
}

fn variant_name(v: FkVariant) -> &'static str {
    match v {
        FkVariant::Plain => "plain",
        FkVariant::Maslov => "maslov",
    }
}

/// Oracle for `f_k` by nested unmatched multiplications, phase in controls
/// and target.
pub fn fk_circuit(k: usize, variant: FkVariant) -> Result<ConstructionSpec, ConstructionError> {
    need(k >= 2, "fk_circuit needs k >= 2")?;
    let (xs, y, n) = (range(0, k), k, k + 1);
    let mut c = Circuit::new(n, 0);
    c.declare(y, Role::Target);
    c.append(&fk_frag(n, &xs, y, variant));
    let t = unitary_target(oracle_map(&fk(k, variant), &xs, y, n), PhaseRule::support(0..=k));
    let v = 4 * (k as u64 - 1);
    Ok(Builder::new("fk_circuit", "k >= 2").k(k).variant(variant_name(variant)).done(c, t, formula("4(k-1)", [v])))
}

/// Exact `f_k` oracle using one dirty ancilla as the inner target.
pub fn fk_dirty(k: usize, variant: FkVariant) -> Result<ConstructionSpec, ConstructionError> {
    need(k >= 2, "fk_dirty needs k >= 2")?;
    let (mut c, xs, a, y, n) = dirty_circuit(k);
    let f = fk_frag(n, &xs, a, variant);
    c.cx(a, y).append(&f).cx(a, y).append(&inv(&f)).release(a, Release::Unchanged);
    let t = unitary_target(oracle_map(&fk(k, variant), &xs, y, n), PhaseRule::Exact);
    let v = 8 * (k as u64 - 1);
    Ok(Builder::new("fk_dirty", "k >= 2").k(k).variant(variant_name(variant)).done(c, t, formula("8(k-1)", [v])))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitVariant {
    IX,
    Star,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TerminateVariant {
    Exact,
    Relative,
}

fn kand_init_frag(n: usize, xs: &[usize], a: usize, variant: InitVariant) -> Circuit {
    let mut c = match variant {
        InitVariant::IX => cix_frag(n, xs, a),
        InitVariant::Star => xstar_frag(n, xs, a),
    };
    c.sdg(a);
    c
}

/// Temporary k-AND of the controls into a clean ancilla.
pub fn kand_init(k: usize, variant: InitVariant) -> Result<ConstructionSpec, ConstructionError> {
    let (xs, a, n) = (range(0, k), k, k + 1);
    let mut c = Circuit::new(n, 0);
    c.declare(a, Role::Clean);
    let b = match variant {
        InitVariant::IX => {
            need(k >= 4, "kand_init iX needs k >= 4")?;
            let v = 16 * (k as u64 - 3) + 4;
            c.append(&kand_init_frag(n, &xs, a, variant));
            let t = unitary_target(lambda_x_map(n, &xs, a), PhaseRule::Exact);
            return Ok(Builder::new("kand_init", "k >= 4").k(k).variant("ix").done(c, t, formula("16(k-3)+4", [v])));
        }
        InitVariant::Star => {
            need(k >= 3, "kand_init star needs k >= 3")?;
            Builder::new("kand_init", "k >= 3").k(k).variant("star")
        }
    };
    c.append(&kand_init_frag(n, &xs, a, variant));
    let t = unitary_target(lambda_x_map(n, &xs, a), PhaseRule::support(0..k));
    Ok(b.done(c, t, formula("8(k-2)", [8 * (k as u64 - 2)])))
}

/// Terminate a k-AND held in `a`. Uses classical bits `b0` and `b1`.
pub fn kand_terminate_frag(n: usize, xs: &[usize], a: usize, variant: TerminateVariant, b0: usize, b1: usize) -> Circuit {
    let k = xs.len();
    let (xj, xk) = (xs[k - 2], xs[k - 1]);
    let low = &xs[..k - 2];
    let mut c = Circuit::new(n, b1.max(b0) + 1);
    c.h(a).measz(a, b0);
    c.add_if(b0, true, GateKind::X, &[a]);
    c.release(a, Release::Zero).alloc(a, AncillaKind::Clean);
    let mut and = Circuit::new(n, 0);
    and.ccix(xj, xk, a).sdg(a);
    c.append_if(b0, true, &and);
    match variant {
        TerminateVariant::Exact => {
            c.append_if(b0, true, &exact_z_frag(n, low, xj, a));
        }
        TerminateVariant::Relative => {
            c.cx(xk, a);
            c.append(&inv(&zrel_frag(n, low, Some(xj), a)));
            c.cx(xk, a);
        }
    }
    c.add_if(b0, true, GateKind::H, &[a]);
    c.measz(a, b1);
    c.add_if(b1, true, GateKind::CZ, &[xj, xk]);
    c.release(a, Release::Measured);
    c
}

/// Measurement-assisted termination of a k-AND; the prefix is the matching
/// initialization.
pub fn kand_terminate(k: usize, variant: TerminateVariant) -> Result<ConstructionSpec, ConstructionError> {
    let (xs, a, n) = (range(0, k), k, k + 1);
    let (init, b, fm) = match variant {
        TerminateVariant::Exact => {
            need(k >= 6, "kand_terminate exact needs k >= 6")?;
            let v = 16 * (k as u64 - 4) + 4;
            (
                kand_init(k, InitVariant::IX)?,
                Builder::new("kand_terminate", "k >= 6").k(k).variant("exact"),
                formula("0 or 16(k-4)+4", [0, v]),
            )
        }
        TerminateVariant::Relative => {
            need(k >= 4, "kand_terminate relative needs k >= 4")?;
            let v = 8 * (k as u64 - 4);
            (
                kand_init(k, InitVariant::Star)?,
                Builder::new("kand_terminate", "k >= 4").k(k).variant("relative"),
                formula("8(k-4) or 8(k-4)+4", [v, v + 4]),
            )
        }
    };
    let c = kand_terminate_frag(n, &xs, a, variant, 0, 1);
    let t = Target { map: identity_map(n), phase: PhaseRule::Exact, prefix: Some(init.circuit) };
    Ok(b.done(c, t, fm))
}

/// The three-control relative Toffoli used as a 3-AND initializer.
pub fn and3_init() -> ConstructionSpec {
    let mut c = Circuit::new(4, 0);
    c.declare(3, Role::Clean);
    maslov_body(&mut c, [0, 1, 2], 3);
    c.sdg(3);
    let t = unitary_target(lambda_x_map(4, &[0, 1, 2], 3), PhaseRule::support([0, 1, 2]));
    Builder::new("and3_init", "none").done(c, t, formula("8", [8]))
}

/// Termination of `and3_init` with a controlled-S† or a controlled(-iZ)
/// correction depending on the outcome.
pub fn and3_terminate() -> ConstructionSpec {
    let mut c = Circuit::new(4, 1);
    c.h(3).measz(3, 0);
    c.add_if(0, false, GateKind::CSdg, &[0, 1]);
    c.add_if(0, true, GateKind::CCmiZ, &[0, 1, 2]);
    c.release(3, Release::Measured);
    let t = Target { map: identity_map(4), phase: PhaseRule::Exact, prefix: Some(and3_init().circuit) };
    Builder::new("and3_terminate", "none").done(c, t, formula("3 or 4", [3, 4]))
}

/// Multiply-controlled X through a relative k-AND on a clean ancilla.
pub fn jones_lambda_x(k: usize) -> Result<ConstructionSpec, ConstructionError> {
    need(k >= 4, "jones_lambda_x needs k >= 4")?;
    let (xs, y, a, n) = (range(0, k), k, k + 1, k + 2);
    let mut c = Circuit::new(n, 2);
    c.declare(y, Role::Target).declare(a, Role::Clean);
    c.append(&kand_init_frag(n, &xs, a, InitVariant::Star));
    c.cx(a, y);
    let term = kand_terminate_frag(n, &xs, a, TerminateVariant::Relative, 0, 1);
    c.events.extend(term.events);
    let t = Target { map: lambda_x_map(n, &xs, y), phase: PhaseRule::Exact, prefix: None };
    let v = 16 * (k as u64 - 3);
    Ok(Builder::new("jones_lambda_x", "k >= 4").k(k).done(c, t, formula("16(k-3) or 16(k-3)+4", [v, v + 4])))
}

/// Parameters accepted by [`build`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Params {
    pub k: Option<usize>,
    pub m: Option<usize>,
    pub variant: Option<String>,
}

/// Every constructible name with the parameters it reads.
pub const REGISTRY: &[(&str, &str)] = &[
    ("ccix", ""),
    ("ccix_dg", ""),
    ("maslov_toffoli4", ""),
    ("giles_selinger_skeleton", "k"),
    ("jones_toffoli", ""),
    ("gidney_and_init", ""),
    ("gidney_and_terminate", ""),
    ("bennett", ""),
    ("bennett_dirty", ""),
    ("phase_bennett", ""),
    ("relative_tof4_dirty", ""),
    ("oracle_mult_clean", ""),
    ("oracle_mult_matched", ""),
    ("oracle_mult_unmatched", ""),
    ("lambda_x_bullet_dirty", "k"),
    ("lambda_x_dirty", "k, variant matched|phase_cleanup"),
    ("lambda_z_relative", "k"),
    ("cix", "k"),
    ("cxstar", "k"),
    ("cxstar_with_ancillas", "k, m"),
    ("cxbullet", "k"),
    ("fk_circuit", "k, variant plain|maslov"),
    ("fk_dirty", "k, variant plain|maslov"),
    ("kand_init", "k, variant ix|star"),
    ("kand_terminate", "k, variant exact|relative"),
    ("and3_init", ""),
    ("and3_terminate", ""),
    ("jones_lambda_x", "k"),
];

fn want_k(p: &Params) -> Result<usize, ConstructionError> {
    p.k.ok_or(ConstructionError::MissingParameter("k"))
}

fn pick<T: Copy>(p: &Params, default: &str, options: &[(&str, T)]) -> Result<T, ConstructionError> {
    let v = p.variant.as_deref().unwrap_or(default);
    options
        .iter()
        .find(|(name, _)| name.eq_ignore_ascii_case(v))
        .map(|(_, t)| *t)
        .ok_or_else(|| ConstructionError::BadVariant(v.to_owned()))
}

/// Build a construction by name. Higher-order generators receive small
/// exact oracles: `x1` and `x2` for the multiplications, `x1 x2` for the
/// Bennett variants, and one gate per control group for the skeleton.
pub fn build(name: &str, p: &Params) -> Result<ConstructionSpec, ConstructionError> {
    let fk_variants = [("plain", FkVariant::Plain), ("maslov", FkVariant::Maslov)];
    let takes_variant = REGISTRY.iter().any(|(n, params)| *n == name && params.contains("variant"));
    if let (Some(v), false) = (&p.variant, takes_variant) {
        if REGISTRY.iter().any(|(n, _)| *n == name) {
            return Err(ConstructionError::BadVariant(format!("{} (construction has no variants)", v)));
        }
    }
    Ok(match name {
        "ccix" => ccix(),
        "ccix_dg" => ccix_dg(),
        "maslov_toffoli4" => maslov_toffoli4(),
        "giles_selinger_skeleton" => {
            let k = want_k(p)?;
            need(k >= 2, "giles_selinger_skeleton needs k >= 2")?;
            giles_selinger_skeleton(k, &Oracle::and_all(k / 2), &Oracle::and_all(k - k / 2))?
        }
        "jones_toffoli" => jones_toffoli(),
        "gidney_and_init" => gidney_and_init(),
        "gidney_and_terminate" => gidney_and_terminate(),
        "bennett" => bennett(&Oracle::toffoli(2, 0, 1)),
        "bennett_dirty" => bennett_dirty(&Oracle::toffoli(2, 0, 1)),
        "phase_bennett" => phase_bennett(&Oracle::toffoli(2, 0, 1)),
        "relative_tof4_dirty" => relative_tof4_dirty(),
        "oracle_mult_clean" => oracle_mult_clean(&Oracle::cx(2, 0), &Oracle::cx(2, 1))?,
        "oracle_mult_matched" => oracle_mult_matched(&Oracle::cx(2, 0), &Oracle::cx(2, 1))?,
        "oracle_mult_unmatched" => oracle_mult_unmatched(&Oracle::cx(2, 0), &Oracle::cx(2, 1))?,
        "lambda_x_bullet_dirty" => lambda_x_bullet_dirty(want_k(p)?)?,
        "lambda_x_dirty" => lambda_x_dirty(
            want_k(p)?,
            pick(p, "matched", &[("matched", DirtyVariant::Matched), ("phase_cleanup", DirtyVariant::PhaseCleanup)])?,
        )?,
        "lambda_z_relative" => lambda_z_relative(want_k(p)?)?,
        "cix" => cix(want_k(p)?)?,
        "cxstar" => cxstar(want_k(p)?)?,
        "cxstar_with_ancillas" => {
            cxstar_with_ancillas(want_k(p)?, p.m.ok_or(ConstructionError::MissingParameter("m"))?)?
        }
        "cxbullet" => cxbullet(want_k(p)?)?,
        "fk_circuit" => fk_circuit(want_k(p)?, pick(p, "plain", &fk_variants)?)?,
        "fk_dirty" => fk_dirty(want_k(p)?, pick(p, "plain", &fk_variants)?)?,
        "kand_init" => kand_init(want_k(p)?, pick(p, "ix", &[("ix", InitVariant::IX), ("star", InitVariant::Star)])?)?,
        "kand_terminate" => kand_terminate(
            want_k(p)?,
            pick(p, "relative", &[("exact", TerminateVariant::Exact), ("relative", TerminateVariant::Relative)])?,
        )?,
        "and3_init" => and3_init(),
        "and3_terminate" => and3_terminate(),
        "jones_lambda_x" => jones_lambda_x(want_k(p)?)?,
        other => return Err(ConstructionError::UnknownName(other.to_owned())),
    })
}
