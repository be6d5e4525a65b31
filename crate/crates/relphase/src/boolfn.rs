//! Boolean functions in algebraic normal form and phase polynomials over
//! parities with Z8 coefficients.
//!
//! Variables are stored as bitmasks: bit `i` of a monomial or parity mask is
//! variable `x_{i+1}`. Truth tables index inputs with `x_1` as the most
//! significant bit, the same convention as circuit basis indices.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BoolFnError {
    LengthMismatch { expected: usize, got: usize },
    Inexpressible { monomial: u64, coeff: u8 },
    Parse(String),
}

impl fmt::Display for BoolFnError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoolFnError::LengthMismatch { expected, got } => {
                write!(f, "input has {} bits, function has {} variables", got, expected)
            }
            BoolFnError::Inexpressible { monomial, coeff } => write!(
                f,
                "inexpressible at this weight: coefficient {} on a degree-{} monomial",
                coeff,
                monomial.count_ones()
            ),
            BoolFnError::Parse(s) => write!(f, "malformed ANF: {}", s),
        }
    }
}

/// Value of the input bit for variable `i` inside truth-table index `x`.
fn bit_of(x: usize, i: usize, n: usize) -> bool {
    x >> (n - 1 - i) & 1 == 1
}

/// Variable mask of the set bits of truth-table index `x`.
fn mask_of_index(x: usize, n: usize) -> u64 {
    (0..n).filter(|&i| bit_of(x, i, n)).fold(0, |m, i| m | 1 << i)
}

/// A Boolean function as an XOR of monomials.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BooleanFn {
    pub n_vars: usize,
    /// The empty mask is the constant 1.
    pub monomials: BTreeSet<u64>,
}

impl BooleanFn {
    pub fn zero(n_vars: usize) -> Self {
        BooleanFn { n_vars, monomials: BTreeSet::new() }
    }

    pub fn one(n_vars: usize) -> Self {
        BooleanFn { n_vars, monomials: BTreeSet::from([0]) }
    }

    /// The variable `x_{i+1}`.
    pub fn var(n_vars: usize, i: usize) -> Self {
        assert!(i < n_vars, "variable index out of range");
        BooleanFn { n_vars, monomials: BTreeSet::from([1u64 << i]) }
    }

    /// The product of the listed variables (zero-based).
    pub fn monomial(n_vars: usize, vars: &[usize]) -> Self {
        let m = vars.iter().fold(0u64, |m, &i| {
            assert!(i < n_vars, "variable index out of range");
            m | 1 << i
        });
        BooleanFn { n_vars, monomials: BTreeSet::from([m]) }
    }

    pub fn degree(&self) -> usize {
        self.monomials.iter().map(|m| m.count_ones() as usize).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn eval(&self, x: &[bool]) -> Result<bool, BoolFnError> {
        if x.len() != self.n_vars {
            return Err(BoolFnError::LengthMismatch { expected: self.n_vars, got: x.len() });
        }
        let xm = x.iter().enumerate().filter(|(_, &b)| b).fold(0u64, |m, (i, _)| m | 1 << i);
        Ok(self.eval_mask(xm))
    }

    /// Evaluate at the input whose true variables are the bits of `xm`.
    pub fn eval_mask(&self, xm: u64) -> bool {
        self.monomials.iter().filter(|&&m| m & xm == m).count() % 2 == 1
    }

    pub fn truth_table(&self) -> Vec<bool> {
        let n = self.n_vars;
        (0..1usize << n).map(|x| self.eval_mask(mask_of_index(x, n))).collect()
    }

    /// Recover the ANF of a truth table by the binary Moebius transform.
    pub fn from_truth_table(n_vars: usize, table: &[bool]) -> Self {
        assert_eq!(table.len(), 1 << n_vars, "truth table size");
        let mut by_mask = vec![false; 1 << n_vars];
        for (x, &v) in table.iter().enumerate() {
            by_mask[mask_of_index(x, n_vars) as usize] = v;
        }
        for i in 0..n_vars {
            for m in 0..by_mask.len() {
                if m >> i & 1 == 1 {
                    by_mask[m] ^= by_mask[m ^ 1 << i];
                }
            }
        }
        let monomials = (0..by_mask.len()).filter(|&m| by_mask[m]).map(|m| m as u64).collect();
        BooleanFn { n_vars, monomials }
    }

    pub fn xor(&self, other: &BooleanFn) -> BooleanFn {
        assert_eq!(self.n_vars, other.n_vars, "variable count");
        let monomials = self.monomials.symmetric_difference(&other.monomials).copied().collect();
        BooleanFn { n_vars: self.n_vars, monomials }
    }

    /// Pointwise product: monomials multiply by union, pairs cancel over F2.
    pub fn multiply(&self, other: &BooleanFn) -> BooleanFn {
        assert_eq!(self.n_vars, other.n_vars, "variable count");
        let mut out = BTreeSet::new();
        for a in &self.monomials {
            for b in &other.monomials {
                let m = a | b;
                if !out.remove(&m) {
                    out.insert(m);
                }
            }
        }
        BooleanFn { n_vars: self.n_vars, monomials: out }
    }

    /// Rename variable `i` to `perm[i]`.
    pub fn relabel(&self, perm: &[usize]) -> BooleanFn {
        assert_eq!(perm.len(), self.n_vars, "permutation size");
        let mut out = BooleanFn::zero(self.n_vars);
        for &m in &self.monomials {
            let image = (0..self.n_vars).filter(|&i| m >> i & 1 == 1).fold(0u64, |a, i| a | 1 << perm[i]);
            out = out.xor(&BooleanFn { n_vars: self.n_vars, monomials: BTreeSet::from([image]) });
        }
        out
    }

    /// The same function viewed over a larger variable set.
    pub fn widen(&self, n_vars: usize) -> BooleanFn {
        assert!(n_vars >= self.n_vars, "cannot narrow");
        BooleanFn { n_vars, monomials: self.monomials.clone() }
    }

    /// Integer multilinear coefficients of `f` viewed as a 0/1-valued
    /// function, reduced mod 8 and keyed by monomial mask.
    fn integer_coefficients_mod8(&self) -> BTreeMap<u64, u8> {
        let n = self.n_vars;
        let mut a = vec![0i64; 1 << n];
        for m in 0..a.len() {
            a[m] = self.eval_mask(m as u64) as i64;
        }
        for i in 0..n {
            for m in 0..a.len() {
                if m >> i & 1 == 1 {
                    a[m] = (a[m] - a[m ^ 1 << i]).rem_euclid(8);
                }
            }
        }
        a.iter().enumerate().filter(|(_, &c)| c != 0).map(|(m, &c)| (m as u64, c as u8)).collect()
    }
}

impl fmt::Display for BooleanFn {
    /// `x1*x2 + x3`; `1` is the constant monomial and `0` the zero function.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.monomials.is_empty() {
            return write!(f, "0");
        }
        let mut ms: Vec<u64> = self.monomials.iter().copied().collect();
        ms.sort_by_key(|m| (core::cmp::Reverse(m.count_ones()), core::cmp::Reverse(m.reverse_bits())));
        let terms: Vec<String> = ms
            .iter()
            .map(|&m| {
                if m == 0 {
                    return "1".to_string();
                }
                (0..64)
                    .filter(|i| m >> i & 1 == 1)
                    .map(|i| alloc::format!("x{}", i + 1))
                    .collect::<Vec<_>>()
                    .join("*")
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

impl BooleanFn {
    /// Parse the `x1*x2 + x3` form over `n_vars` variables.
    pub fn parse(text: &str, n_vars: usize) -> Result<BooleanFn, BoolFnError> {
        let bad = || BoolFnError::Parse(text.into());
        let mut f = BooleanFn::zero(n_vars);
        let text = text.trim();
        if text == "0" {
            return Ok(f);
        }
        for term in text.split('+') {
            let term = term.trim();
            let mut m = 0u64;
            if term != "1" {
                for factor in term.split('*') {
                    let idx: usize = factor.trim().strip_prefix('x').ok_or_else(bad)?.parse().map_err(|_| bad())?;
                    if idx == 0 || idx > n_vars {
                        return Err(bad());
                    }
                    m |= 1 << (idx - 1);
                }
            }
            f = f.xor(&BooleanFn { n_vars, monomials: BTreeSet::from([m]) });
        }
        Ok(f)
    }
}

impl FromStr for BooleanFn {
    type Err = BoolFnError;

    /// Parses with the variable count set by the highest index present.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let n = s
            .split(|c: char| !c.is_ascii_alphanumeric())
            .filter_map(|t| t.strip_prefix('x').and_then(|d| d.parse::<usize>().ok()))
            .max()
            .unwrap_or(0);
        BooleanFn::parse(s, n)
    }
}

/// `omega^{sum_S c_S * parity_S(x)}` with coefficients in Z8.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PhasePoly {
    pub n_vars: usize,
    pub coeffs: BTreeMap<u64, u8>,
}

impl PhasePoly {
    pub fn new(n_vars: usize) -> Self {
        PhasePoly { n_vars, coeffs: BTreeMap::new() }
    }

    /// Build from `(parity variables, coefficient)` pairs; coefficients are
    /// reduced mod 8 and may be negative.
    pub fn from_terms(n_vars: usize, terms: &[(&[usize], i64)]) -> Self {
        let mut p = PhasePoly::new(n_vars);
        for (vars, c) in terms {
            let m = vars.iter().fold(0u64, |m, &i| m | 1 << i);
            p.add_term(m, *c);
        }
        p
    }

    pub fn add_term(&mut self, parity: u64, c: i64) {
        assert!(parity != 0, "empty parity");
        let cur = self.coeffs.get(&parity).copied().unwrap_or(0) as i64;
        let v = (cur + c).rem_euclid(8) as u8;
        if v == 0 {
            self.coeffs.remove(&parity);
        } else {
            self.coeffs.insert(parity, v);
        }
    }

    pub fn eval_phase(&self, x: &[bool]) -> Result<u8, BoolFnError> {
        if x.len() != self.n_vars {
            return Err(BoolFnError::LengthMismatch { expected: self.n_vars, got: x.len() });
        }
        let xm = x.iter().enumerate().filter(|(_, &b)| b).fold(0u64, |m, (i, _)| m | 1 << i);
        Ok(self.eval_mask(xm))
    }

    pub fn eval_mask(&self, xm: u64) -> u8 {
        self.coeffs
            .iter()
            .filter(|(&s, _)| (s & xm).count_ones() % 2 == 1)
            .fold(0u8, |acc, (_, &c)| (acc + c) % 8)
    }

    pub fn add(&self, other: &PhasePoly) -> PhasePoly {
        let mut out = self.clone();
        for (&s, &c) in &other.coeffs {
            out.add_term(s, c as i64);
        }
        out
    }

    /// Split into the parities that contain `target` and the rest.
    pub fn truncate_to_target(&self, target: usize) -> (PhasePoly, PhasePoly) {
        let mut kept = PhasePoly::new(self.n_vars);
        let mut dropped = PhasePoly::new(self.n_vars);
        for (&s, &c) in &self.coeffs {
            if s >> target & 1 == 1 {
                kept.coeffs.insert(s, c);
            } else {
                dropped.coeffs.insert(s, c);
            }
        }
        (kept, dropped)
    }

    /// Parity-polynomial form of a pointwise Z8 phase table, if one exists.
    pub fn from_phase_table(n_vars: usize, table: &[u8]) -> Result<PhasePoly, BoolFnError> {
        assert_eq!(table.len(), 1 << n_vars, "phase table size");
        let mut a = vec![0i64; 1 << n_vars];
        for (x, &v) in table.iter().enumerate() {
            a[mask_of_index(x, n_vars) as usize] = v as i64;
        }
        for i in 0..n_vars {
            for m in 0..a.len() {
                if m >> i & 1 == 1 {
                    a[m] = (a[m] - a[m ^ 1 << i]).rem_euclid(8);
                }
            }
        }
        let mut p = PhasePoly::new(n_vars);
        for (m, &c) in a.iter().enumerate() {
            if m != 0 && c != 0 {
                expand_monomial(&mut p, m as u64, c as u8)?;
            }
        }
        Ok(p)
    }
}

/// Add `c * prod_{i in m} x_i` as parities using
/// `2^{d-1} x_1...x_d = sum_{S nonempty} (-1)^{|S|+1} parity_S`.
fn expand_monomial(p: &mut PhasePoly, m: u64, c: u8) -> Result<(), BoolFnError> {
    let d = m.count_ones();
    if d > 3 || c as u32 % (1 << (d - 1)) != 0 {
        return Err(BoolFnError::Inexpressible { monomial: m, coeff: c });
    }
    let scale = (c >> (d - 1)) as i64;
    let mut s = m;
    while s != 0 {
        let sign = if s.count_ones() % 2 == 1 { 1 } else { -1 };
        p.add_term(s, sign * scale);
        s = (s - 1) & m;
    }
    Ok(())
}

/// Phase polynomial of `w * f(x)` mod 8 over parities.
pub fn fourier(f: &BooleanFn, w: u8) -> Result<PhasePoly, BoolFnError> {
    let w = (w % 8) as i64;
    let mut p = PhasePoly::new(f.n_vars);
    for (m, a) in f.integer_coefficients_mod8() {
        let c = (w * a as i64).rem_euclid(8) as u8;
        if c == 0 {
            continue;
        }
        if m == 0 {
            // A constant offset is a global phase with no parity to carry it.
            return Err(BoolFnError::Inexpressible { monomial: 0, coeff: c });
        }
        expand_monomial(&mut p, m, c)?;
    }
    Ok(p)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FkVariant {
    Plain,
    Maslov,
}

/// The family grown by repeated unmatched multiplication.
///
/// The recurrence `f_k = x_k f_{k-1} + f_{k-2}` is applied with the newest
/// variable on the top wire, so variable `x_1` is the one introduced last.
/// This is the numbering under which `f_4 = x1 x2 x3 x4 + x1 x4 + x3 x4`.
pub fn fk(k: usize, variant: FkVariant) -> BooleanFn {
    let reversed: Vec<usize> = (0..k).rev().collect();
    fk_bottom_up(k, variant).relabel(&reversed)
}

/// The recurrence read literally, with `x_k` the newest variable.
pub fn fk_bottom_up(k: usize, variant: FkVariant) -> BooleanFn {
    let mut fs: Vec<BooleanFn> = Vec::with_capacity(k + 1);
    for j in 0..=k {
        let f = match (j, variant) {
            (0, _) => BooleanFn::zero(k),
            (1, _) => BooleanFn::var(k, 0),
            (2, FkVariant::Maslov) => BooleanFn::monomial(k, &[0, 1]),
            (3, FkVariant::Maslov) => BooleanFn::monomial(k, &[0, 1, 2]),
            _ => BooleanFn::var(k, j - 1).multiply(&fs[j - 1]).xor(&fs[j - 2]),
        };
        fs.push(f);
    }
    fs.pop().unwrap_or_else(|| BooleanFn::zero(k))
}
