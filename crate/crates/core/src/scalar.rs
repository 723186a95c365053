//! Coefficient rings.
//!
//! Everything algebraic in this crate is generic over [`Coefficient`]; the two
//! rings that occur are the integers (arbitrary precision, [`Integer`]) and the
//! prime fields [`Fp<P>`]. Exact linear algebra additionally needs
//! [`EuclideanRing`].

use std::fmt;
use std::hash::Hash;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer as _;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Arbitrary-precision integers.
pub type Integer = BigInt;

/// Which ground ring a computation runs over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RingKind {
    Integers,
    ModP(u32),
}

impl RingKind {
    pub fn characteristic(self) -> u32 {
        match self {
            RingKind::Integers => 0,
            RingKind::ModP(p) => p,
        }
    }
}

impl fmt::Display for RingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RingKind::Integers => write!(f, "z"),
            RingKind::ModP(p) => write!(f, "zp:{p}"),
        }
    }
}

impl FromStr for RingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "z" {
            return Ok(RingKind::Integers);
        }
        let Some(p) = s.strip_prefix("zp:") else {
            return Err(Error::Parse(format!("ring must be `z` or `zp:<prime>`, got `{s}`")));
        };
        let p: u32 = p
            .parse()
            .map_err(|_| Error::Parse(format!("bad modulus in `{s}`")))?;
        if !is_prime(p as u64) {
            return Err(Error::Argument(format!("{p} is not prime")));
        }
        Ok(RingKind::ModP(p))
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// A commutative coefficient ring with identity.
pub trait Coefficient:
    Clone
    + Eq
    + Hash
    + fmt::Debug
    + fmt::Display
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    fn kind() -> RingKind;

    fn from_i64(v: i64) -> Self;

    fn from_integer(v: &Integer) -> Self;

    /// Canonical integer representative (`0..p` for prime fields).
    fn to_integer(&self) -> Integer;

    fn characteristic() -> u32 {
        Self::kind().characteristic()
    }

    fn add_assign_ref(&mut self, other: &Self) {
        *self = self.clone() + other.clone();
    }

    fn mul_ref(&self, other: &Self) -> Self {
        self.clone() * other.clone()
    }
}

/// Rings with a division algorithm, as needed by Smith normal form.
pub trait EuclideanRing: Coefficient {
    /// `(q, r)` with `self = q * d + r` and `r` smaller than `d`.
    fn div_rem_euclid(&self, d: &Self) -> (Self, Self);

    /// Size used for pivot selection; zero only for zero.
    fn magnitude(&self) -> u64;

    fn is_unit(&self) -> bool;

    /// Canonical associate (absolute value over the integers, `1` in a field).
    fn normalized(&self) -> Self;

    /// Unit `u` with `u * self == self.normalized()`.
    fn normalizing_unit(&self) -> Self;

    /// `true` iff `d` divides `self`.
    fn divisible_by(&self, d: &Self) -> bool {
        if d.is_zero() {
            return self.is_zero();
        }
        self.div_rem_euclid(d).1.is_zero()
    }
}

impl Coefficient for BigInt {
    fn kind() -> RingKind {
        RingKind::Integers
    }

    fn from_i64(v: i64) -> Self {
        BigInt::from(v)
    }

    fn from_integer(v: &Integer) -> Self {
        v.clone()
    }

    fn to_integer(&self) -> Integer {
        self.clone()
    }

    fn add_assign_ref(&mut self, other: &Self) {
        *self += other;
    }

    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
}

impl EuclideanRing for BigInt {
    fn div_rem_euclid(&self, d: &Self) -> (Self, Self) {
        let (mut q, mut r) = self.div_mod_floor(d);
        // nearest remainder: |r| <= |d| / 2
        let twice: BigInt = &r * 2;
        if twice.abs() > d.abs() {
            r -= d;
            q += 1;
        }
        (q, r)
    }

    fn magnitude(&self) -> u64 {
        self.abs().to_u64().unwrap_or(u64::MAX)
    }

    fn is_unit(&self) -> bool {
        self.abs().is_one()
    }

    fn normalized(&self) -> Self {
        self.abs()
    }

    fn normalizing_unit(&self) -> Self {
        if self.is_negative() {
            -BigInt::one()
        } else {
            BigInt::one()
        }
    }
}

/// The prime field `Z/P`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Fp<const P: u32>(u32);

impl<const P: u32> Fp<P> {
    pub const ZERO: Self = Fp(0);
    pub const ONE: Self = Fp(1 % P);

    pub fn new(v: i64) -> Self {
        Fp(v.rem_euclid(P as i64) as u32)
    }

    pub fn value(self) -> u32 {
        self.0
    }

    pub fn pow(self, mut e: u64) -> Self {
        let mut base = self.0 as u64;
        let mut acc = 1u64 % P as u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % P as u64;
            }
            base = base * base % P as u64;
            e >>= 1;
        }
        Fp(acc as u32)
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(self) -> Option<Self> {
        if self.0 == 0 {
            None
        } else {
            Some(self.pow(P as u64 - 2))
        }
    }
}

impl<const P: u32> fmt::Display for Fp<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl<const P: u32> Add for Fp<P> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Fp(((self.0 as u64 + o.0 as u64) % P as u64) as u32)
    }
}

impl<const P: u32> Sub for Fp<P> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Fp(((self.0 as u64 + P as u64 - o.0 as u64) % P as u64) as u32)
    }
}

impl<const P: u32> Mul for Fp<P> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Fp((self.0 as u64 * o.0 as u64 % P as u64) as u32)
    }
}

impl<const P: u32> Neg for Fp<P> {
    type Output = Self;
    fn neg(self) -> Self {
        Fp((P - self.0) % P)
    }
}

impl<const P: u32> Zero for Fp<P> {
    fn zero() -> Self {
        Fp(0)
    }
    fn is_zero(&self) -> bool {
        self.0 == 0
    }
}

impl<const P: u32> One for Fp<P> {
    fn one() -> Self {
        Fp(1 % P)
    }
}

impl<const P: u32> Coefficient for Fp<P> {
    fn kind() -> RingKind {
        RingKind::ModP(P)
    }

    fn from_i64(v: i64) -> Self {
        Fp::new(v)
    }

    fn from_integer(v: &Integer) -> Self {
        let r = v.mod_floor(&BigInt::from(P));
        Fp(r.to_u32().expect("reduced residue fits"))
    }

    fn to_integer(&self) -> Integer {
        BigInt::from(self.0)
    }
}

impl<const P: u32> EuclideanRing for Fp<P> {
    fn div_rem_euclid(&self, d: &Self) -> (Self, Self) {
        let inv = d.inv().expect("division by zero in Z/p");
        (*self * inv, Fp(0))
    }

    fn magnitude(&self) -> u64 {
        u64::from(self.0 != 0)
    }

    fn is_unit(&self) -> bool {
        self.0 != 0
    }

    fn normalized(&self) -> Self {
        if self.0 == 0 {
            *self
        } else {
            Fp(1)
        }
    }

    fn normalizing_unit(&self) -> Self {
        self.inv().unwrap_or(Fp(1))
    }
}

pub type F2 = Fp<2>;
pub type F3 = Fp<3>;
pub type F5 = Fp<5>;
pub type F7 = Fp<7>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_kind_parses() {
        assert_eq!("z".parse::<RingKind>().unwrap(), RingKind::Integers);
        assert_eq!("zp:3".parse::<RingKind>().unwrap(), RingKind::ModP(3));
        assert!(matches!("zp:1".parse::<RingKind>(), Err(Error::Argument(_))));
        assert!(matches!("zp:9".parse::<RingKind>(), Err(Error::Argument(_))));
        assert!("q".parse::<RingKind>().is_err());
        assert_eq!(RingKind::ModP(5).to_string(), "zp:5");
    }

    #[test]
    fn field_arithmetic() {
        let a = F7::new(3);
        assert_eq!(a * a.inv().unwrap(), F7::one());
        assert_eq!(-a + a, F7::zero());
        assert_eq!(F7::new(-1).value(), 6);
        assert_eq!(F2::from_integer(&BigInt::from(-3)), F2::one());
    }

    #[test]
    fn nearest_remainder() {
        let (q, r) = BigInt::from(7).div_rem_euclid(&BigInt::from(4));
        assert_eq!((q, r), (BigInt::from(2), BigInt::from(-1)));
        let (q, r) = BigInt::from(-7).div_rem_euclid(&BigInt::from(-4));
        assert_eq!(q * BigInt::from(-4) + &r, BigInt::from(-7));
        assert!(r.abs() <= BigInt::from(2));
    }
}
