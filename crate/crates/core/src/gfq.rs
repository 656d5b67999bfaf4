//! Arithmetic in the residue field `k`, which is `F_p` in the symplectic
//! case and `F_{p^2}` in the unitary case.
//!
//! Elements are coordinate pairs `c0 + c1·x` over `F_p`, where `x` is a root
//! of a fixed monic irreducible quadratic. The involution `†` is the
//! Frobenius `a ↦ a^p`, trivial on `F_p`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported characteristic. Products of two residues stay well
/// inside `u64`.
pub const MAX_PRIME: u32 = 1 << 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Flavor {
    Symplectic,
    Unitary,
}

impl Flavor {
    pub fn short_name(self) -> &'static str {
        match self {
            Flavor::Symplectic => "sym",
            Flavor::Unitary => "uni",
        }
    }
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl std::str::FromStr for Flavor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sym" | "symplectic" => Ok(Flavor::Symplectic),
            "uni" | "unitary" => Ok(Flavor::Unitary),
            other => Err(Error::InvalidParameter(format!(
                "unknown flavor {other:?} (expected sym or uni)"
            ))),
        }
    }
}

/// The exponent `ε`, kept exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Epsilon {
    One,
    Half,
}

impl Epsilon {
    pub fn numer_denom(self) -> (u32, u32) {
        match self {
            Epsilon::One => (1, 1),
            Epsilon::Half => (1, 2),
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Epsilon::One => 1.0,
            Epsilon::Half => 0.5,
        }
    }
}

impl fmt::Display for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Epsilon::One => f.write_str("1"),
            Epsilon::Half => f.write_str("1/2"),
        }
    }
}

/// Monic quadratic `x^2 + a·x + b` over `F_p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuadraticModulus {
    pub a: u32,
    pub b: u32,
}

impl QuadraticModulus {
    pub fn has_root(&self, p: u32) -> bool {
        let p = p as u64;
        (0..p).any(|t| (t * t + self.a as u64 * t + self.b as u64).is_multiple_of(p))
    }
}

impl fmt::Display for QuadraticModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("x^2")?;
        match self.a {
            0 => {}
            1 => f.write_str("+x")?,
            a => write!(f, "+{a}x")?,
        }
        if self.b != 0 {
            write!(f, "+{}", self.b)?;
        }
        Ok(())
    }
}

/// An element `c0 + c1·x` of `k`. In the symplectic flavor `c1` is always 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct FqElem {
    pub c0: u32,
    pub c1: u32,
}

impl FqElem {
    pub const ZERO: FqElem = FqElem { c0: 0, c1: 0 };
    pub const ONE: FqElem = FqElem { c0: 1, c1: 0 };

    pub const fn new(c0: u32, c1: u32) -> Self {
        FqElem { c0, c1 }
    }

    pub fn is_zero(self) -> bool {
        self.c0 == 0 && self.c1 == 0
    }
}

/// Parameters of the residue field `k = F_q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldParams {
    p: u32,
    flavor: Flavor,
    modulus: Option<QuadraticModulus>,
    // x^p, i.e. the image of the generator under Frobenius.
    frob_x: FqElem,
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Chooses the canonical modulus: `x^2+x+1` for `p = 2`, otherwise `x^2 - n`
/// with `n` the least quadratic non-residue.
fn canonical_modulus(p: u32) -> QuadraticModulus {
    if p == 2 {
        return QuadraticModulus { a: 1, b: 1 };
    }
    let p64 = p as u64;
    let n = (2..p64)
        .find(|&n| (0..p64).all(|t| t * t % p64 != n))
        .expect("an odd prime has a quadratic non-residue");
    QuadraticModulus {
        a: 0,
        b: (p64 - n) as u32,
    }
}

impl FieldParams {
    pub fn new(p: u64, flavor: Flavor) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if p > MAX_PRIME as u64 {
            return Err(Error::PrimeOutOfRange(p));
        }
        let p = p as u32;
        let mut field = FieldParams {
            p,
            flavor,
            modulus: None,
            frob_x: FqElem::ZERO,
        };
        if flavor == Flavor::Unitary {
            let modulus = canonical_modulus(p);
            debug_assert!(!modulus.has_root(p));
            field.modulus = Some(modulus);
            field.frob_x = field.pow(FqElem::new(0, 1), p as u64);
        }
        Ok(field)
    }

    pub fn symplectic(p: u64) -> Result<Self> {
        Self::new(p, Flavor::Symplectic)
    }

    pub fn unitary(p: u64) -> Result<Self> {
        Self::new(p, Flavor::Unitary)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    /// Extension degree of `k` over `F_p`.
    pub fn degree(&self) -> u32 {
        match self.flavor {
            Flavor::Symplectic => 1,
            Flavor::Unitary => 2,
        }
    }

    pub fn q(&self) -> u64 {
        (self.p as u64).pow(self.degree())
    }

    pub fn epsilon(&self) -> Epsilon {
        match self.flavor {
            Flavor::Symplectic => Epsilon::One,
            Flavor::Unitary => Epsilon::Half,
        }
    }

    pub fn modulus(&self) -> Option<QuadraticModulus> {
        self.modulus
    }

    /// `q^e` as a float for integer `e` (possibly negative).
    pub fn q_pow(&self, e: i32) -> f64 {
        (self.q() as f64).powi(e)
    }

    /// `q^(e + ε)`. Since `q^ε = p` in both flavors this is `p · q^e`.
    pub fn q_pow_plus_eps(&self, e: i32) -> f64 {
        self.p as f64 * self.q_pow(e)
    }

    /// `q^(1-ε)`: `1` in the symplectic case, `p` in the unitary case.
    pub fn q_one_minus_eps(&self) -> f64 {
        self.q() as f64 / self.p as f64
    }

    pub fn elem(&self, c0: u64, c1: u64) -> FqElem {
        let p = self.p as u64;
        let c1 = if self.flavor == Flavor::Unitary {
            c1 % p
        } else {
            0
        };
        FqElem::new((c0 % p) as u32, c1 as u32)
    }

    pub fn from_int(&self, n: i64) -> FqElem {
        FqElem::new(n.rem_euclid(self.p as i64) as u32, 0)
    }

    /// The generator `x` of `F_{p^2}`; `None` in the symplectic flavor.
    pub fn generator(&self) -> Option<FqElem> {
        self.modulus.map(|_| FqElem::new(0, 1))
    }

    pub fn contains(&self, a: FqElem) -> bool {
        a.c0 < self.p && a.c1 < self.p && (self.flavor == Flavor::Unitary || a.c1 == 0)
    }

    /// Position of `a` in the canonical enumeration `c0 + p·c1`.
    pub fn index_of(&self, a: FqElem) -> u64 {
        a.c0 as u64 + self.p as u64 * a.c1 as u64
    }

    pub fn elem_at(&self, index: u64) -> FqElem {
        let p = self.p as u64;
        FqElem::new((index % p) as u32, (index / p) as u32)
    }

    /// All `q` elements in canonical order.
    pub fn elements(&self) -> impl Iterator<Item = FqElem> + '_ {
        (0..self.q()).map(|i| self.elem_at(i))
    }

    pub fn add(&self, a: FqElem, b: FqElem) -> FqElem {
        let p = self.p;
        FqElem::new((a.c0 + b.c0) % p, (a.c1 + b.c1) % p)
    }

    pub fn neg(&self, a: FqElem) -> FqElem {
        let p = self.p;
        FqElem::new((p - a.c0) % p, (p - a.c1) % p)
    }

    pub fn sub(&self, a: FqElem, b: FqElem) -> FqElem {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: FqElem, b: FqElem) -> FqElem {
        let p = self.p as u64;
        let (a0, a1, b0, b1) = (a.c0 as u64, a.c1 as u64, b.c0 as u64, b.c1 as u64);
        let Some(m) = self.modulus else {
            return FqElem::new((a0 * b0 % p) as u32, 0);
        };
        // x^2 = -a·x - b
        let hi = a1 * b1 % p;
        let c0 = (a0 * b0 + (p - m.b as u64) * hi) % p;
        let c1 = (a0 * b1 + a1 * b0 + (p - m.a as u64) * hi) % p;
        FqElem::new(c0 as u32, c1 as u32)
    }

    pub fn pow(&self, mut base: FqElem, mut exp: u64) -> FqElem {
        let mut acc = FqElem::ONE;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: FqElem) -> Result<FqElem> {
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(self.pow(a, self.q() - 2))
    }

    pub fn div(&self, a: FqElem, b: FqElem) -> Result<FqElem> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// The involution `†`: Frobenius on `F_{p^2}`, identity on `F_p`.
    pub fn conj(&self, a: FqElem) -> FqElem {
        if self.modulus.is_none() || a.c1 == 0 {
            return a;
        }
        let scaled = self.mul(FqElem::new(a.c1, 0), self.frob_x);
        self.add(FqElem::new(a.c0, 0), scaled)
    }

    /// `a + a†`, which lies in `F_p`.
    pub fn trace(&self, a: FqElem) -> FqElem {
        self.add(a, self.conj(a))
    }

    pub fn format_elem(&self, a: FqElem) -> String {
        if self.modulus.is_none() || a.c1 == 0 {
            return a.c0.to_string();
        }
        let lin = if a.c1 == 1 {
            "x".to_string()
        } else {
            format!("{}x", a.c1)
        };
        if a.c0 == 0 {
            lin
        } else {
            format!("{}+{lin}", a.c0)
        }
    }
}
