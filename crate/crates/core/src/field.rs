//! Arithmetic in a prime field GF(p).
//!
//! Elements are kept as canonical representatives in `[0, p)`. The raw
//! `u64` helpers on [`PrimeField`] are what the linear algebra in
//! [`crate::mds`] runs on; [`FieldElement`] is the checked, modulus-carrying
//! value handed across module boundaries.

use std::fmt;

use crate::error::{Error, Result};

/// Default modulus, the Fermat prime 2^16 + 1.
pub const DEFAULT_MODULUS: u64 = 65537;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(Self { p })
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    /// Wraps `value` reduced modulo p.
    pub fn element(&self, value: u64) -> FieldElement {
        FieldElement {
            value: value % self.p,
            modulus: self.p,
        }
    }

    /// Wraps `value`, rejecting non-canonical input.
    pub fn canonical(&self, value: u64) -> Result<FieldElement> {
        if value >= self.p {
            return Err(Error::Malformed(format!(
                "value {value} is not below the modulus {}",
                self.p
            )));
        }
        Ok(self.element(value))
    }

    pub fn zero(&self) -> FieldElement {
        self.element(0)
    }

    pub fn one(&self) -> FieldElement {
        self.element(1)
    }

    pub fn contains(&self, x: FieldElement) -> bool {
        x.modulus == self.p
    }

    pub(crate) fn add(&self, a: u64, b: u64) -> u64 {
        ((a as u128 + b as u128) % self.p as u128) as u64
    }

    pub(crate) fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            self.p - (b - a)
        }
    }

    pub(crate) fn mul(&self, a: u64, b: u64) -> u64 {
        mul_mod(a, b, self.p)
    }

    pub(crate) fn pow(&self, base: u64, exp: u64) -> u64 {
        pow_mod(base, exp, self.p)
    }

    pub(crate) fn inv(&self, a: u64) -> Result<u64> {
        if a.is_multiple_of(self.p) {
            return Err(Error::ZeroInverse);
        }
        // Fermat: a^(p-2) = a^-1 for prime p.
        Ok(self.pow(a, self.p - 2))
    }
}

impl fmt::Display for PrimeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

/// An element of GF(p), tagged with its modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElement {
    value: u64,
    modulus: u64,
}

#[allow(clippy::should_implement_trait)]
impl FieldElement {
    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn field(&self) -> PrimeField {
        PrimeField { p: self.modulus }
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    pub fn arith(self, rhs: FieldElement, op: ArithOp) -> Result<FieldElement> {
        if self.modulus != rhs.modulus {
            return Err(Error::IncompatibleModuli {
                left: self.modulus,
                right: rhs.modulus,
            });
        }
        let f = self.field();
        let value = match op {
            ArithOp::Add => f.add(self.value, rhs.value),
            ArithOp::Sub => f.sub(self.value, rhs.value),
            ArithOp::Mul => f.mul(self.value, rhs.value),
        };
        Ok(FieldElement {
            value,
            modulus: self.modulus,
        })
    }

    pub fn add(self, rhs: FieldElement) -> Result<FieldElement> {
        self.arith(rhs, ArithOp::Add)
    }

    pub fn sub(self, rhs: FieldElement) -> Result<FieldElement> {
        self.arith(rhs, ArithOp::Sub)
    }

    pub fn mul(self, rhs: FieldElement) -> Result<FieldElement> {
        self.arith(rhs, ArithOp::Mul)
    }

    pub fn inv(self) -> Result<FieldElement> {
        let value = self.field().inv(self.value)?;
        Ok(FieldElement {
            value,
            modulus: self.modulus,
        })
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin; the first twelve prime bases cover all of u64.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &b in &BASES {
        if n.is_multiple_of(b) {
            return n == b;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}
