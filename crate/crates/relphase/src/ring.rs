//! Exact arithmetic in Z[omega, 1/sqrt2], omega = exp(i pi / 4).
//!
//! Every amplitude produced by a Clifford+T circuit on a basis input lives in
//! this ring. A value is stored as `(a + b w + c w^2 + d w^3) / sqrt2^k` and
//! kept in canonical form, so structural equality is value equality.

use alloc::string::String;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};
use core::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// An element `(a + b w + c w^2 + d w^3) / sqrt2^k` of Z[omega, 1/sqrt2].
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RingScalar {
    coeffs: [BigInt; 4],
    k: u32,
}

/// Multiply a numerator by omega: shifts coefficients with w^4 = -1.
fn times_omega(n: [BigInt; 4]) -> [BigInt; 4] {
    let [a, b, c, d] = n;
    [-d, a, b, c]
}

/// Multiply a numerator by sqrt2 = w - w^3.
fn times_sqrt2(n: &[BigInt; 4]) -> [BigInt; 4] {
    let [a, b, c, d] = n;
    [b - d, a + c, b + d, c - a]
}

impl RingScalar {
    /// Build `(a + b w + c w^2 + d w^3) / sqrt2^k` and canonicalize it.
    pub fn new(a: BigInt, b: BigInt, c: BigInt, d: BigInt, k: u32) -> Self {
        let mut x = RingScalar { coeffs: [a, b, c, d], k };
        x.canonicalize();
        x
    }

    /// Convenience constructor from machine integers.
    pub fn from_ints(a: i64, b: i64, c: i64, d: i64, k: u32) -> Self {
        Self::new(a.into(), b.into(), c.into(), d.into(), k)
    }

    pub fn zero() -> Self {
        Self::from_ints(0, 0, 0, 0, 0)
    }

    pub fn one() -> Self {
        Self::from_ints(1, 0, 0, 0, 0)
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_ints(n, 0, 0, 0, 0)
    }

    /// `omega^j` for any integer `j` (taken mod 8).
    pub fn omega_pow(j: i64) -> Self {
        let j = j.rem_euclid(8) as usize;
        let mut c = [0i64; 4];
        c[j % 4] = if j < 4 { 1 } else { -1 };
        Self::from_ints(c[0], c[1], c[2], c[3], 0)
    }

    pub fn sqrt2() -> Self {
        Self::from_ints(0, 1, 0, -1, 0)
    }

    pub fn inv_sqrt2() -> Self {
        Self::from_ints(1, 0, 0, 0, 1)
    }

    pub fn coeffs(&self) -> &[BigInt; 4] {
        &self.coeffs
    }

    /// The exponent of the sqrt2 denominator.
    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// Reduce to the least denominator exponent. Idempotent.
    pub fn canonicalize(&mut self) {
        if self.is_zero() {
            self.k = 0;
            return;
        }
        while self.k > 0 {
            let [a, b, c, d] = &self.coeffs;
            let s_ac = a + c;
            let s_bd = b + d;
            if !(s_ac.is_even() && s_bd.is_even()) {
                break;
            }
            let two = BigInt::from(2);
            // (w - w^3) x / 2 is x / sqrt2 with integer coefficients.
            self.coeffs = [
                (b - d) / &two,
                s_ac / &two,
                s_bd / &two,
                (c - a) / &two,
            ];
            self.k -= 1;
        }
    }

    /// Numerator rewritten over the denominator `sqrt2^k`, `k >= self.k`.
    fn numerator_at(&self, k: u32) -> [BigInt; 4] {
        let mut n = self.coeffs.clone();
        for _ in self.k..k {
            n = times_sqrt2(&n);
        }
        n
    }

    /// Complex conjugate: `conj(w) = w^7 = -w^3`.
    pub fn conj(&self) -> Self {
        let [a, b, c, d] = &self.coeffs;
        RingScalar { coeffs: [a.clone(), -d, -c, -b], k: self.k }
    }

    /// `|x|^2` as a ring element (always real).
    pub fn norm_sq(&self) -> Self {
        self.conj() * self
    }

    /// Multiply by `omega^j` without a general product.
    pub fn mul_omega(&self, j: i64) -> Self {
        let mut n = self.coeffs.clone();
        for _ in 0..j.rem_euclid(8) {
            n = times_omega(n);
        }
        RingScalar { coeffs: n, k: self.k }
    }

    /// Divide by sqrt2.
    pub fn div_sqrt2(&self) -> Self {
        let mut x = RingScalar { coeffs: self.coeffs.clone(), k: self.k + 1 };
        x.canonicalize();
        x
    }

    /// Returns `j` when the value is exactly `omega^j`.
    pub fn as_omega_power(&self) -> Option<u8> {
        if self.k != 0 {
            return None;
        }
        let mut found = None;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if found.is_some() || !c.abs().is_one() {
                return None;
            }
            found = Some(if c.is_positive() { i as u8 } else { i as u8 + 4 });
        }
        found
    }

    /// True when the value lies on the real axis.
    /// `1 / self` when `|self|^2` is a signed power of sqrt2, which covers
    /// every entry of a Clifford+T unitary.
    pub fn unit_inverse(&self) -> Option<RingScalar> {
        let n = self.norm_sq();
        let [a, b, c, d] = n.coeffs();
        if !(b.is_zero() && c.is_zero() && d.is_zero() && a.abs().is_one()) {
            return None;
        }
        let mut inv = self.conj();
        for _ in 0..n.k() {
            inv = inv * RingScalar::sqrt2();
        }
        Some(if a.is_negative() { -inv } else { inv })
    }

    pub fn is_real(&self) -> bool {
        let [_, b, c, d] = &self.coeffs;
        c.is_zero() && (b + d).is_zero()
    }

    /// Embedding into double-precision complex numbers as `(re, im)`.
    pub fn to_complex(&self) -> (f64, f64) {
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let f = |x: &BigInt| x.to_f64().unwrap_or(f64::NAN);
        let [a, b, c, d] = &self.coeffs;
        let (fa, fb, fc, fd) = (f(a), f(b), f(c), f(d));
        let mut re = fa + (fb - fd) * h;
        let mut im = fc + (fb + fd) * h;
        for _ in 0..self.k {
            re *= h;
            im *= h;
        }
        (re, im)
    }
}

impl Default for RingScalar {
    fn default() -> Self {
        Self::zero()
    }
}

impl Add<&RingScalar> for &RingScalar {
    type Output = RingScalar;
    fn add(self, rhs: &RingScalar) -> RingScalar {
        let k = self.k.max(rhs.k);
        let x = self.numerator_at(k);
        let y = rhs.numerator_at(k);
        let [a, b, c, d] = x;
        let [e, f, g, h] = y;
        RingScalar::new(a + e, b + f, c + g, d + h, k)
    }
}

impl Neg for &RingScalar {
    type Output = RingScalar;
    fn neg(self) -> RingScalar {
        let [a, b, c, d] = &self.coeffs;
        RingScalar { coeffs: [-a, -b, -c, -d], k: self.k }
    }
}

impl Sub<&RingScalar> for &RingScalar {
    type Output = RingScalar;
    fn sub(self, rhs: &RingScalar) -> RingScalar {
        self + &(-rhs)
    }
}

impl Mul<&RingScalar> for &RingScalar {
    type Output = RingScalar;
    fn mul(self, rhs: &RingScalar) -> RingScalar {
        let x = &self.coeffs;
        let y = &rhs.coeffs;
        let mut out: [BigInt; 4] = Default::default();
        for i in 0..4 {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..4 {
                let p = &x[i] * &y[j];
                let e = i + j;
                if e < 4 {
                    out[e] += p;
                } else {
                    out[e - 4] -= p;
                }
            }
        }
        let [a, b, c, d] = out;
        RingScalar::new(a, b, c, d, self.k + rhs.k)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<RingScalar> for RingScalar {
            type Output = RingScalar;
            fn $m(self, rhs: RingScalar) -> RingScalar {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&RingScalar> for RingScalar {
            type Output = RingScalar;
            fn $m(self, rhs: &RingScalar) -> RingScalar {
                (&self).$m(rhs)
            }
        }
        impl $tr<RingScalar> for &RingScalar {
            type Output = RingScalar;
            fn $m(self, rhs: RingScalar) -> RingScalar {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for RingScalar {
    type Output = RingScalar;
    fn neg(self) -> RingScalar {
        -&self
    }
}

impl fmt::Display for RingScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = &self.coeffs;
        write!(f, "({},{},{},{})/rt2^{}", a, b, c, d, self.k)
    }
}

impl fmt::Debug for RingScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Failure to parse the `(a,b,c,d)/rt2^k` text form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseRingError(pub String);

impl fmt::Display for ParseRingError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "malformed ring scalar: {}", self.0)
    }
}

impl FromStr for RingScalar {
    type Err = ParseRingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ParseRingError(s.into());
        let s = s.trim();
        let (num, den) = s.split_once("/rt2^").ok_or_else(bad)?;
        let inner = num.strip_prefix('(').and_then(|t| t.strip_suffix(')')).ok_or_else(bad)?;
        let mut parts = inner.split(',').map(|p| p.trim().parse::<BigInt>());
        let mut next = || parts.next().ok_or_else(bad)?.map_err(|_| bad());
        let (a, b, c, d) = (next()?, next()?, next()?, next()?);
        if parts.next().is_some() {
            return Err(bad());
        }
        let k = den.trim().parse::<u32>().map_err(|_| bad())?;
        Ok(RingScalar::new(a, b, c, d, k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn close(x: &RingScalar, re: f64, im: f64) -> bool {
        let (r, i) = x.to_complex();
        (r - re).abs() < 1e-12 && (i - im).abs() < 1e-12
    }

    #[test]
    fn omega_plus_omega_cubed_is_i_sqrt2() {
        let s = RingScalar::omega_pow(1) + RingScalar::omega_pow(3);
        assert_eq!(s, RingScalar::from_ints(0, 1, 0, 1, 0));
        assert!(close(&s, 0.0, core::f64::consts::SQRT_2));
    }

    #[test]
    fn halves_sum_to_sqrt2() {
        let h = RingScalar::inv_sqrt2();
        let s = &h + &h;
        assert_eq!(s, RingScalar::from_ints(0, 1, 0, -1, 0));
        assert!(close(&s, core::f64::consts::SQRT_2, 0.0));
    }

    #[test]
    fn products_of_roots() {
        let w = RingScalar::omega_pow(1);
        assert_eq!(&w * &RingScalar::omega_pow(7), RingScalar::one());
        assert_eq!(&w * &RingScalar::omega_pow(3), RingScalar::from_int(-1));
        let half = RingScalar::inv_sqrt2() * RingScalar::inv_sqrt2();
        assert_eq!(half, RingScalar::from_ints(1, 0, 0, 0, 2));
        assert!(close(&half, 0.5, 0.0));
    }

    #[test]
    fn omega_power_detection() {
        assert_eq!(RingScalar::one().as_omega_power(), Some(0));
        assert_eq!(RingScalar::from_ints(0, 0, 1, 0, 0).as_omega_power(), Some(2));
        assert_eq!(RingScalar::inv_sqrt2().as_omega_power(), None);
        for j in 0..8 {
            assert_eq!(RingScalar::omega_pow(j).as_omega_power(), Some(j as u8));
        }
    }

    #[test]
    fn text_round_trip() {
        let x = RingScalar::from_ints(3, -1, 0, 2, 3);
        let s = x.to_string();
        assert_eq!(s, "(3,-1,0,2)/rt2^3");
        assert_eq!(s.parse::<RingScalar>().unwrap(), x);
        assert!("(1,2,3)/rt2^0".parse::<RingScalar>().is_err());
    }

    #[test]
    fn conj_of_omega() {
        assert_eq!(RingScalar::omega_pow(1).conj(), RingScalar::omega_pow(7));
        assert!(RingScalar::from_ints(2, 3, -1, 5, 1).norm_sq().is_real());
    }
}
