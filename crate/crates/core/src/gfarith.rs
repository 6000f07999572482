//! Arithmetic in GF(p^e) for odd p.
//!
//! An element is an integer code in `[0, q)`. Its base-p digits, least
//! significant first, are the coefficients of a polynomial over F_p reduced
//! modulo the context's defining polynomial. Codes `0..p` are therefore the
//! prime subfield, with `0` and `1` the additive and multiplicative
//! identities in every field.
//!
//! Addition and multiplication are table driven. Tables are quadratic in q,
//! which is why contexts refuse orders above an enumeration cap.

use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest field order accepted by [`FieldCtx::new`].
pub const DEFAULT_MAX_ORDER: u32 = 1024;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("characteristic {0} is even; only odd primes are supported")]
    EvenCharacteristic(u32),
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("{0} is not a power of an odd prime")]
    NotPrimePower(u64),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("field order {p}^{e} exceeds the enumeration cap of {cap}")]
    TooLarge { p: u32, e: u32, cap: u32 },
    #[error("no built-in modulus for q = {0}; supply one explicitly")]
    NoBuiltinModulus(u64),
    #[error("modulus must list {expected} coefficients (monic, degree e), got {got}")]
    ModulusLength { expected: usize, got: usize },
    #[error("modulus is not monic")]
    NotMonic,
    #[error("modulus coefficient {coeff} is not reduced mod {p}")]
    CoefficientRange { coeff: u32, p: u32 },
    #[error("modulus is reducible over F_{p}")]
    Reducible { p: u32 },
    #[error("inverse of zero")]
    ZeroInverse,
    #[error("element code {code} is not in a field of order {q}")]
    ForeignElement { code: u32, q: u32 },
}

/// An element of GF(p^e), stored as its integer code.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct FieldElement(u32);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    /// Wraps a raw code without range checking. Use [`FieldCtx::element`]
    /// for untrusted input.
    #[inline]
    pub const fn from_code(code: u32) -> Self {
        FieldElement(code)
    }

    #[inline]
    pub const fn code(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Binary and unary operations exposed through [`FieldCtx::apply`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Sub,
    Mul,
    Inv,
    Neg,
    Pow(u64),
}

/// Defining polynomials for the small non-prime orders.
/// Coefficients are listed constant term first; all are monic.
const BUILTIN_MODULI: &[(u32, u32, &[u32])] = &[
    (3, 2, &[1, 0, 1]),    // x^2 + 1
    (3, 3, &[1, 2, 0, 1]), // x^3 + 2x + 1
    (5, 2, &[2, 0, 1]),    // x^2 + 2
    (7, 2, &[1, 0, 1]),    // x^2 + 1
    (3, 4, &[2, 0, 0, 2, 1]), // x^4 + 2x^3 + 2
];

/// Immutable arithmetic context for GF(p^e).
#[derive(Clone)]
pub struct FieldCtx {
    p: u32,
    e: u32,
    q: u32,
    modulus: Vec<u32>,
    add: Vec<u32>,
    mul: Vec<u32>,
    neg: Vec<u32>,
    inv: Vec<u32>,
    trace: Vec<u32>,
    roots: Vec<Complex64>,
}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldCtx")
            .field("p", &self.p)
            .field("e", &self.e)
            .field("modulus", &self.modulus)
            .finish()
    }
}

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.e == other.e && self.modulus == other.modulus
    }
}

impl Eq for FieldCtx {}

impl fmt::Display for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.e == 1 {
            write!(f, "GF({})", self.p)
        } else {
            write!(f, "GF({}^{}) mod {}", self.p, self.e, poly_to_string(&self.modulus))
        }
    }
}

fn poly_to_string(coeffs: &[u32]) -> String {
    let mut terms = Vec::new();
    for (i, &c) in coeffs.iter().enumerate().rev() {
        if c == 0 {
            continue;
        }
        let coef = if c == 1 && i > 0 { String::new() } else { c.to_string() };
        terms.push(match i {
            0 => coef,
            1 => format!("{coef}x"),
            _ => format!("{coef}x^{i}"),
        });
    }
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Splits `q` into `(p, e)` with `q = p^e` and `p` an odd prime.
pub fn prime_power(q: u64) -> Result<(u32, u32), FieldError> {
    if q < 3 {
        return Err(FieldError::NotPrimePower(q));
    }
    let mut p = 2u64;
    while p * p <= q && !q.is_multiple_of(p) {
        p += 1;
    }
    if !q.is_multiple_of(p) {
        p = q;
    }
    let mut rest = q;
    let mut e = 0u32;
    while rest.is_multiple_of(p) {
        rest /= p;
        e += 1;
    }
    if rest != 1 || p == 2 || p > u32::MAX as u64 {
        return Err(FieldError::NotPrimePower(q));
    }
    Ok((p as u32, e))
}

// Polynomials over F_p, constant term first, no trailing zeros except for zero itself.

fn poly_trim(a: &mut Vec<u32>) {
    while a.len() > 1 && *a.last().unwrap() == 0 {
        a.pop();
    }
}

fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    poly_trim(&mut r);
    let dm = m.len() - 1;
    let lead_inv = mod_inverse(m[dm], p);
    while r.len() > dm && !(r.len() == 1 && r[0] == 0) {
        let shift = r.len() - 1 - dm;
        let factor = (r[r.len() - 1] as u64 * lead_inv as u64 % p as u64) as u32;
        for (i, &c) in m.iter().enumerate() {
            let idx = shift + i;
            let sub = (factor as u64 * c as u64 % p as u64) as u32;
            r[idx] = (r[idx] + p - sub) % p;
        }
        poly_trim(&mut r);
    }
    r
}

fn mod_inverse(a: u32, p: u32) -> u32 {
    mod_pow(a, p - 2, p)
}

fn mod_pow(base: u32, mut exp: u32, p: u32) -> u32 {
    let mut acc = 1u64;
    let mut b = base as u64 % p as u64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % p as u64;
        }
        b = b * b % p as u64;
        exp >>= 1;
    }
    acc as u32
}

/// Trial division by every monic polynomial of degree `1..=deg/2`.
fn is_irreducible(m: &[u32], p: u32) -> bool {
    let deg = m.len() - 1;
    for fdeg in 1..=deg / 2 {
        let count = (p as u64).pow(fdeg as u32);
        for idx in 0..count {
            let mut g = Vec::with_capacity(fdeg + 1);
            let mut rest = idx;
            for _ in 0..fdeg {
                g.push((rest % p as u64) as u32);
                rest /= p as u64;
            }
            g.push(1);
            let r = poly_rem(m, &g, p);
            if r.len() == 1 && r[0] == 0 {
                return false;
            }
        }
    }
    true
}

impl FieldCtx {
    /// Builds GF(p^e). Without an explicit modulus, prime fields use `x` and
    /// the orders 9, 25, 27, 49, 81 use a built-in table.
    pub fn new(p: u32, e: u32, modulus: Option<&[u32]>) -> Result<Self, FieldError> {
        Self::with_cap(p, e, modulus, DEFAULT_MAX_ORDER)
    }

    pub fn with_cap(
        p: u32,
        e: u32,
        modulus: Option<&[u32]>,
        cap: u32,
    ) -> Result<Self, FieldError> {
        if p.is_multiple_of(2) {
            return Err(FieldError::EvenCharacteristic(p));
        }
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if e == 0 {
            return Err(FieldError::ZeroDegree);
        }
        let q = (p as u64)
            .checked_pow(e)
            .filter(|&q| q <= cap as u64)
            .ok_or(FieldError::TooLarge { p, e, cap })? as u32;

        let modulus: Vec<u32> = match modulus {
            Some(m) => m.to_vec(),
            None if e == 1 => vec![0, 1],
            None => BUILTIN_MODULI
                .iter()
                .find(|(bp, be, _)| *bp == p && *be == e)
                .map(|(_, _, m)| m.to_vec())
                .ok_or(FieldError::NoBuiltinModulus(q as u64))?,
        };
        if modulus.len() != e as usize + 1 {
            return Err(FieldError::ModulusLength {
                expected: e as usize + 1,
                got: modulus.len(),
            });
        }
        if let Some(&coeff) = modulus.iter().find(|&&c| c >= p) {
            return Err(FieldError::CoefficientRange { coeff, p });
        }
        if modulus[e as usize] != 1 {
            return Err(FieldError::NotMonic);
        }
        if !is_irreducible(&modulus, p) {
            return Err(FieldError::Reducible { p });
        }

        let mut ctx = FieldCtx {
            p,
            e,
            q,
            modulus,
            add: Vec::new(),
            mul: Vec::new(),
            neg: Vec::new(),
            inv: Vec::new(),
            trace: Vec::new(),
            roots: (0..p)
                .map(|t| Complex64::from_polar(1.0, TAU * t as f64 / p as f64))
                .collect(),
        };
        ctx.build_tables();
        Ok(ctx)
    }

    /// Field of order `q`, splitting it into `p^e` and using the built-in
    /// modulus unless one is given.
    pub fn of_order(q: u64, modulus: Option<&[u32]>) -> Result<Self, FieldError> {
        let (p, e) = prime_power(q)?;
        Self::new(p, e, modulus)
    }

    fn digits(&self, code: u32) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.e as usize);
        let mut rest = code;
        for _ in 0..self.e {
            out.push(rest % self.p);
            rest /= self.p;
        }
        out
    }

    fn undigits(&self, digits: &[u32]) -> u32 {
        digits.iter().rev().fold(0, |acc, &c| acc * self.p + c)
    }

    fn build_tables(&mut self) {
        let q = self.q as usize;
        let p = self.p;
        let e = self.e as usize;
        let digits: Vec<Vec<u32>> = (0..self.q).map(|c| self.digits(c)).collect();

        self.add = vec![0; q * q];
        self.mul = vec![0; q * q];
        let mut prod = vec![0u32; 2 * e];
        for a in 0..q {
            for b in a..q {
                let sum: Vec<u32> = digits[a]
                    .iter()
                    .zip(&digits[b])
                    .map(|(x, y)| (x + y) % p)
                    .collect();
                let s = self.undigits(&sum);
                self.add[a * q + b] = s;
                self.add[b * q + a] = s;

                prod.iter_mut().for_each(|c| *c = 0);
                for (i, &x) in digits[a].iter().enumerate() {
                    for (j, &y) in digits[b].iter().enumerate() {
                        prod[i + j] = ((prod[i + j] as u64 + x as u64 * y as u64) % p as u64) as u32;
                    }
                }
                let mut r = poly_rem(&prod, &self.modulus, p);
                r.resize(e, 0);
                let m = self.undigits(&r);
                self.mul[a * q + b] = m;
                self.mul[b * q + a] = m;
            }
        }

        self.neg = (0..q)
            .map(|a| (0..q).find(|&b| self.add[a * q + b] == 0).unwrap() as u32)
            .collect();
        self.inv = (0..q)
            .map(|a| {
                if a == 0 {
                    0
                } else {
                    (1..q).find(|&b| self.mul[a * q + b] == 1).unwrap() as u32
                }
            })
            .collect();
        self.trace = (0..self.q)
            .map(|a| {
                let mut acc = 0u32;
                let mut conj = a;
                for _ in 0..self.e {
                    acc = self.add[acc as usize * q + conj as usize];
                    conj = self.pow(FieldElement(conj), p as u64).0;
                }
                acc
            })
            .collect();
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.p
    }

    #[inline]
    pub fn e(&self) -> u32 {
        self.e
    }

    #[inline]
    pub fn q(&self) -> u32 {
        self.q
    }

    /// Modulus coefficients, constant term first.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn modulus_string(&self) -> String {
        poly_to_string(&self.modulus)
    }

    /// Validates a code against this field.
    pub fn element(&self, code: u32) -> Result<FieldElement, FieldError> {
        if code < self.q {
            Ok(FieldElement(code))
        } else {
            Err(FieldError::ForeignElement { code, q: self.q })
        }
    }

    /// The image of an integer in the prime subfield.
    pub fn from_int(&self, n: i64) -> FieldElement {
        FieldElement(n.rem_euclid(self.p as i64) as u32)
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElement> {
        (0..self.q).map(FieldElement)
    }

    #[inline]
    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        FieldElement(self.add[(a.0 * self.q + b.0) as usize])
    }

    #[inline]
    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn neg(&self, a: FieldElement) -> FieldElement {
        FieldElement(self.neg[a.0 as usize])
    }

    #[inline]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        FieldElement(self.mul[(a.0 * self.q + b.0) as usize])
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement, FieldError> {
        if a.is_zero() {
            Err(FieldError::ZeroInverse)
        } else {
            Ok(FieldElement(self.inv[a.0 as usize]))
        }
    }

    pub fn pow(&self, a: FieldElement, mut exp: u64) -> FieldElement {
        let mut acc = FieldElement::ONE;
        let mut base = a;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Checked entry point: operands are validated against the context, and
    /// `b` is ignored by the unary operations.
    pub fn apply(
        &self,
        op: FieldOp,
        a: FieldElement,
        b: FieldElement,
    ) -> Result<FieldElement, FieldError> {
        self.element(a.0)?;
        self.element(b.0)?;
        Ok(match op {
            FieldOp::Add => self.add(a, b),
            FieldOp::Sub => self.sub(a, b),
            FieldOp::Mul => self.mul(a, b),
            FieldOp::Neg => self.neg(a),
            FieldOp::Inv => self.inv(a)?,
            FieldOp::Pow(n) => self.pow(a, n),
        })
    }

    /// Absolute trace to the prime subfield; the result has code `< p`.
    #[inline]
    pub fn trace(&self, a: FieldElement) -> FieldElement {
        FieldElement(self.trace[a.0 as usize])
    }

    /// The canonical additive character `exp(2 pi i Tr(a) / p)`.
    #[inline]
    pub fn character(&self, a: FieldElement) -> Complex64 {
        self.roots[self.trace[a.0 as usize] as usize]
    }

    pub fn is_square(&self, a: FieldElement) -> bool {
        a.is_zero() || self.pow(a, (self.q as u64 - 1) / 2) == FieldElement::ONE
    }
}
