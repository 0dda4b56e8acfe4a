//! Exact scalar fields: big rationals and prime fields.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Which exact field a representation lives over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum FieldKind {
    #[serde(rename = "Q")]
    Rational,
    #[serde(rename = "Fp")]
    Prime { p: u64 },
}

impl FieldKind {
    pub fn characteristic(&self) -> u64 {
        match self {
            FieldKind::Rational => 0,
            FieldKind::Prime { p } => *p,
        }
    }
}

impl fmt::Display for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldKind::Rational => write!(f, "Q"),
            FieldKind::Prime { p } => write!(f, "F_{p}"),
        }
    }
}

/// An exact field scalar.
///
/// The arithmetic comes from `num-traits`; the extra methods cover what a
/// runtime-chosen prime needs (constructing constants and sampling).
pub trait Field:
    Clone
    + PartialEq
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_int(x: i64, kind: FieldKind) -> Self;

    /// Reduction of a rational; `None` if the denominator vanishes.
    fn from_rational(q: &BigRational, kind: FieldKind) -> Option<Self>;

    /// A random scalar. Over a prime field this is uniform; over the
    /// rationals it is a small integer, so that reductions mod small primes
    /// stay meaningful.
    fn sample<R: Rng + ?Sized>(rng: &mut R, kind: FieldKind) -> Self;

    /// Rescale a vector by a nonzero scalar to a canonical integral form
    /// (primitive integer vector over the rationals; unchanged otherwise).
    fn normalize_vector(v: &mut [Self]);

    /// Integer value, if the scalar is one (rationals with denominator 1,
    /// prime field elements as their canonical residue).
    fn to_bigint(&self) -> Option<BigInt>;

    fn kind_of(&self) -> Option<FieldKind>;

    fn parse(s: &str, kind: FieldKind) -> Option<Self> {
        parse_rational(s).and_then(|q| Self::from_rational(&q, kind))
    }
}

pub type Rational = BigRational;

pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let a: BigInt = a.trim().parse().ok()?;
        let b: BigInt = b.trim().parse().ok()?;
        if b.is_zero() {
            return None;
        }
        Some(BigRational::new(a, b))
    } else {
        Some(BigRational::from_integer(s.parse().ok()?))
    }
}

const SAMPLE_BOUND: i64 = 1000;

impl Field for BigRational {
    fn from_int(x: i64, _kind: FieldKind) -> Self {
        BigRational::from_integer(BigInt::from(x))
    }

    fn from_rational(q: &BigRational, _kind: FieldKind) -> Option<Self> {
        Some(q.clone())
    }

    fn sample<R: Rng + ?Sized>(rng: &mut R, _kind: FieldKind) -> Self {
        BigRational::from_integer(BigInt::from(rng.gen_range(-SAMPLE_BOUND..=SAMPLE_BOUND)))
    }

    fn normalize_vector(v: &mut [Self]) {
        let mut den = BigInt::one();
        for x in v.iter() {
            den = den.lcm(x.denom());
        }
        let mut g = BigInt::zero();
        for x in v.iter() {
            let n = x.numer() * (&den / x.denom());
            g = g.gcd(&n);
        }
        if g.is_zero() {
            return;
        }
        for x in v.iter_mut() {
            let n = x.numer() * (&den / x.denom());
            *x = BigRational::from_integer(n / &g);
        }
    }

    fn to_bigint(&self) -> Option<BigInt> {
        if self.is_integer() {
            Some(self.to_integer())
        } else {
            None
        }
    }

    fn kind_of(&self) -> Option<FieldKind> {
        Some(FieldKind::Rational)
    }
}

/// Element of a prime field with the modulus carried at runtime.
///
/// Constants built through `Zero`/`One` carry no modulus (`p == 0`) and hold
/// a signed integer; they adopt the modulus of the first bound operand they
/// meet. Moduli must be below 2^32.
#[derive(Clone, Copy)]
pub struct Fp {
    v: u64,
    p: u64,
}

impl Fp {
    pub fn new(v: i64, p: u64) -> Self {
        assert!(p >= 2 && p < (1u64 << 32), "modulus out of range");
        Fp { v: v.rem_euclid(p as i64) as u64, p }
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    /// Canonical residue in `0..p` (for unbound constants, the signed value
    /// reinterpreted).
    pub fn value(&self) -> u64 {
        self.v
    }

    fn signed(&self) -> i64 {
        self.v as i64
    }

    fn bind(self, p: u64) -> Fp {
        if self.p == p {
            self
        } else {
            debug_assert!(self.p == 0, "mixed moduli {} and {}", self.p, p);
            Fp::new(self.signed(), p)
        }
    }

    fn common(a: Fp, b: Fp) -> (Fp, Fp, u64) {
        let p = if a.p != 0 { a.p } else { b.p };
        if p == 0 {
            (a, b, 0)
        } else {
            (a.bind(p), b.bind(p), p)
        }
    }

    fn unbound(x: i64) -> Fp {
        Fp { v: x as u64, p: 0 }
    }

    pub fn pow(self, mut e: u64) -> Fp {
        let mut base = self;
        let mut acc = Fp::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    pub fn inverse(self) -> Fp {
        assert!(self.p != 0, "inverse of an unbound constant");
        assert!(self.v != 0, "division by zero in F_{}", self.p);
        let (g, x, _) = ext_gcd(self.v as i64, self.p as i64);
        debug_assert_eq!(g, 1);
        Fp::new(x, self.p)
    }
}

fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = ext_gcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}

impl PartialEq for Fp {
    fn eq(&self, other: &Self) -> bool {
        let (a, b, _) = Fp::common(*self, *other);
        a.v == b.v
    }
}

impl Eq for Fp {}

impl std::hash::Hash for Fp {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.v.hash(state);
    }
}

impl fmt::Debug for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.p == 0 {
            write!(f, "{}", self.signed())
        } else {
            write!(f, "{} mod {}", self.v, self.p)
        }
    }
}

impl fmt::Display for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.p == 0 {
            write!(f, "{}", self.signed())
        } else {
            write!(f, "{}", self.v)
        }
    }
}

impl Add for Fp {
    type Output = Fp;
    fn add(self, rhs: Fp) -> Fp {
        let (a, b, p) = Fp::common(self, rhs);
        if p == 0 {
            return Fp::unbound(a.signed() + b.signed());
        }
        let s = a.v + b.v;
        Fp { v: if s >= p { s - p } else { s }, p }
    }
}

impl Sub for Fp {
    type Output = Fp;
    fn sub(self, rhs: Fp) -> Fp {
        let (a, b, p) = Fp::common(self, rhs);
        if p == 0 {
            return Fp::unbound(a.signed() - b.signed());
        }
        Fp { v: if a.v >= b.v { a.v - b.v } else { a.v + p - b.v }, p }
    }
}

impl Mul for Fp {
    type Output = Fp;
    fn mul(self, rhs: Fp) -> Fp {
        let (a, b, p) = Fp::common(self, rhs);
        if p == 0 {
            return Fp::unbound(a.signed() * b.signed());
        }
        Fp { v: a.v * b.v % p, p }
    }
}

impl Div for Fp {
    type Output = Fp;
    fn div(self, rhs: Fp) -> Fp {
        let (a, b, p) = Fp::common(self, rhs);
        if p == 0 {
            let (x, y) = (a.signed(), b.signed());
            assert!(y != 0 && x % y == 0, "inexact division of unbound constants");
            return Fp::unbound(x / y);
        }
        a * b.inverse()
    }
}

impl Neg for Fp {
    type Output = Fp;
    fn neg(self) -> Fp {
        if self.p == 0 {
            Fp::unbound(-self.signed())
        } else if self.v == 0 {
            self
        } else {
            Fp { v: self.p - self.v, p: self.p }
        }
    }
}

impl Zero for Fp {
    fn zero() -> Self {
        Fp::unbound(0)
    }
    fn is_zero(&self) -> bool {
        self.v == 0
    }
}

impl One for Fp {
    fn one() -> Self {
        Fp::unbound(1)
    }
}

impl Field for Fp {
    fn from_int(x: i64, kind: FieldKind) -> Self {
        match kind {
            FieldKind::Prime { p } => Fp::new(x, p),
            FieldKind::Rational => panic!("Fp scalar requested over Q"),
        }
    }

    fn from_rational(q: &BigRational, kind: FieldKind) -> Option<Self> {
        let p = match kind {
            FieldKind::Prime { p } => p,
            FieldKind::Rational => panic!("Fp scalar requested over Q"),
        };
        let pb = BigInt::from(p);
        let n = q.numer().mod_floor(&pb).to_i64()?;
        let d = q.denom().mod_floor(&pb).to_i64()?;
        if d == 0 {
            return None;
        }
        Some(Fp::new(n, p) / Fp::new(d, p))
    }

    fn sample<R: Rng + ?Sized>(rng: &mut R, kind: FieldKind) -> Self {
        match kind {
            FieldKind::Prime { p } => Fp { v: rng.gen_range(0..p), p },
            FieldKind::Rational => panic!("Fp scalar requested over Q"),
        }
    }

    fn normalize_vector(_v: &mut [Self]) {}

    fn to_bigint(&self) -> Option<BigInt> {
        Some(if self.p == 0 { BigInt::from(self.signed()) } else { BigInt::from(self.v) })
    }

    fn kind_of(&self) -> Option<FieldKind> {
        if self.p == 0 {
            None
        } else {
            Some(FieldKind::Prime { p: self.p })
        }
    }
}

/// Render a rational the way module files store it ("3/2", "-4").
pub fn rational_to_string(q: &BigRational) -> String {
    if q.is_integer() {
        q.to_integer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn is_probable_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unbound_constants_adopt_modulus() {
        let a = Fp::new(5, 7);
        assert_eq!(a + Fp::one(), Fp::new(6, 7));
        assert_eq!(Fp::zero() - a, Fp::new(2, 7));
        assert_eq!(-Fp::one() * a, Fp::new(2, 7));
        assert_eq!(Fp::one() / a * a, Fp::new(1, 7));
        assert!(Fp::zero() == Fp::new(0, 7));
    }

    #[test]
    fn inverse_in_large_field() {
        let p = 2147483647;
        let a = Fp::new(123456789, p);
        assert_eq!(a * a.inverse(), Fp::new(1, p));
    }

    #[test]
    fn rational_reduction() {
        let q = parse_rational("3/2").unwrap();
        let x = Fp::from_rational(&q, FieldKind::Prime { p: 7 }).unwrap();
        assert_eq!(x * Fp::new(2, 7), Fp::new(3, 7));
        let half = parse_rational("1/7").unwrap();
        assert!(Fp::from_rational(&half, FieldKind::Prime { p: 7 }).is_none());
    }

    #[test]
    fn normalize_clears_denominators() {
        let mut v = vec![parse_rational("1/2").unwrap(), parse_rational("-3/4").unwrap()];
        BigRational::normalize_vector(&mut v);
        assert_eq!(v, vec![parse_rational("2").unwrap(), parse_rational("-3").unwrap()]);
    }
}
