use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::{rat, Rat};
use crate::{Error, Result};

/// Whether `d` is a squarefree integer other than 0 and 1.
pub fn is_squarefree(d: i64) -> bool {
    if d == 0 || d == 1 {
        return false;
    }
    let mut n = d.unsigned_abs();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return false;
            }
        }
        p += 1;
    }
    true
}

/// An element `a + b*sqrt(d)` of a quadratic field, or a rational number.
///
/// Rational elements always carry `d = 0` and `b = 0`, so they combine with
/// elements of any field. Two irrational elements combine only when their
/// `d` agree.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadRat {
    d: i64,
    a: Rat,
    b: Rat,
}

impl QuadRat {
    pub fn new(d: i64, a: Rat, b: Rat) -> Result<Self> {
        if b.is_zero() {
            return Ok(Self::rational(a));
        }
        if !is_squarefree(d) {
            return Err(Error::BadDiscriminant(d));
        }
        Ok(QuadRat { d, a, b })
    }

    pub fn rational(a: Rat) -> Self {
        QuadRat { d: 0, a, b: Rat::zero() }
    }

    pub fn from_int(n: i64) -> Self {
        Self::rational(rat(n))
    }

    pub fn zero() -> Self {
        Self::from_int(0)
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    /// `sqrt(d)`.
    pub fn sqrt(d: i64) -> Result<Self> {
        Self::new(d, Rat::zero(), Rat::one())
    }

    /// `w_d = (1 + sqrt(d))/2`, a root of `x^2 - x - (d-1)/4`.
    pub fn w(d: i64) -> Result<Self> {
        Self::from_w(d, Rat::zero(), Rat::one())
    }

    /// `u + v*w_d`.
    pub fn from_w(d: i64, u: Rat, v: Rat) -> Result<Self> {
        let half = Rat::new(BigInt::one(), BigInt::from(2));
        let b = &v * &half;
        Self::new(d, u + b.clone(), b)
    }

    /// Coordinates `(u, v)` with `self = u + v*w_d`.
    pub fn to_w(&self) -> (Rat, Rat) {
        (&self.a - &self.b, &self.b * rat(2))
    }

    pub fn d(&self) -> i64 {
        self.d
    }

    /// Rational part `a`.
    pub fn a(&self) -> &Rat {
        &self.a
    }

    /// Coefficient `b` of `sqrt(d)`.
    pub fn b(&self) -> &Rat {
        &self.b
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn as_rational(&self) -> Option<&Rat> {
        self.is_rational().then_some(&self.a)
    }

    fn field(&self, other: &Self) -> Result<i64> {
        match (self.d, other.d) {
            (0, e) | (e, 0) => Ok(e),
            (e, f) if e == f => Ok(e),
            (e, f) => Err(Error::FieldMismatch(e, f)),
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        let d = self.field(other)?;
        Self::new(d, &self.a + &other.a, &self.b + &other.b)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        let d = self.field(other)?;
        Self::new(d, &self.a - &other.a, &self.b - &other.b)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        let d = self.field(other)?;
        let a = &self.a * &other.a + &self.b * &other.b * rat(d);
        let b = &self.a * &other.b + &self.b * &other.a;
        Self::new(d, a, b)
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        self.field(other)?;
        self.checked_mul(&other.inv()?)
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let n = self.norm();
        let c = self.conjugate();
        Self::new(self.d, c.a / &n, c.b / n)
    }

    pub fn scale(&self, q: &Rat) -> Self {
        Self::new(self.d, &self.a * q, &self.b * q).expect("same field")
    }

    /// Image under the nontrivial automorphism `sqrt(d) -> -sqrt(d)`.
    pub fn conjugate(&self) -> Self {
        QuadRat { d: self.d, a: self.a.clone(), b: -&self.b }
    }

    pub fn norm(&self) -> Rat {
        &self.a * &self.a - &self.b * &self.b * rat(self.d)
    }

    pub fn trace(&self) -> Rat {
        &self.a * rat(2)
    }

    /// Membership in the ring of integers `Z[w_d]` (d = 1 mod 4) or `Z[sqrt d]`.
    pub fn is_algebraic_integer(&self) -> bool {
        if self.is_rational() {
            return self.a.is_integer();
        }
        if self.d.rem_euclid(4) == 1 {
            let a2 = &self.a * rat(2);
            let b2 = &self.b * rat(2);
            a2.is_integer() && b2.is_integer() && ((a2.numer() - b2.numer()) % BigInt::from(2)).is_zero()
        } else {
            self.a.is_integer() && self.b.is_integer()
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Whether `|x| <= bound` for both real embeddings of a real-field
    /// element, with `bound^2 = bound_sq` a nonnegative rational.
    pub fn embeddings_bounded(&self, bound_sq: &Rat) -> bool {
        if self.d < 0 {
            return &self.norm() <= bound_sq;
        }
        if self.is_rational() {
            return &(&self.a * &self.a) <= bound_sq;
        }
        // |a| + |b|sqrt(d) <= B  <=>  max embedding bounded
        let aa = self.a.abs();
        let bb = self.b.abs();
        // (|a| + |b| sqrt d)^2 = a^2 + b^2 d + 2|a||b| sqrt d <= B^2
        let lhs = &aa * &aa + &bb * &bb * rat(self.d);
        if &lhs > bound_sq {
            return false;
        }
        let rest = bound_sq - lhs;
        let cross = rat(2) * aa * bb;
        // cross * sqrt(d) <= rest
        &cross * &cross * rat(self.d) <= &rest * &rest
    }
}

impl fmt::Display for QuadRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", self.a);
        }
        let sq = format!("sqrt({})", self.d);
        let b = if self.b.is_one() {
            sq
        } else if (-&self.b).is_one() {
            format!("-{sq}")
        } else {
            format!("{}*{sq}", self.b)
        };
        if self.a.is_zero() {
            write!(f, "{b}")
        } else if b.starts_with('-') {
            write!(f, "{} - {}", self.a, &b[1..])
        } else {
            write!(f, "{} + {}", self.a, b)
        }
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $checked:ident) => {
        impl $tr<&QuadRat> for &QuadRat {
            type Output = QuadRat;
            /// Panics when the operands live in different quadratic fields.
            fn $m(self, rhs: &QuadRat) -> QuadRat {
                self.$checked(rhs).unwrap_or_else(|e| panic!("{e}"))
            }
        }
        impl $tr<QuadRat> for QuadRat {
            type Output = QuadRat;
            fn $m(self, rhs: QuadRat) -> QuadRat {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&QuadRat> for QuadRat {
            type Output = QuadRat;
            fn $m(self, rhs: &QuadRat) -> QuadRat {
                (&self).$m(rhs)
            }
        }
    };
}

binop!(Add, add, checked_add);
binop!(Sub, sub, checked_sub);
binop!(Mul, mul, checked_mul);
binop!(Div, div, checked_div);

impl Neg for &QuadRat {
    type Output = QuadRat;
    fn neg(self) -> QuadRat {
        QuadRat { d: self.d, a: -&self.a, b: -&self.b }
    }
}

impl Neg for QuadRat {
    type Output = QuadRat;
    fn neg(self) -> QuadRat {
        -&self
    }
}

impl From<Rat> for QuadRat {
    fn from(q: Rat) -> Self {
        QuadRat::rational(q)
    }
}

impl From<i64> for QuadRat {
    fn from(n: i64) -> Self {
        QuadRat::from_int(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat_frac;

    #[test]
    fn conjugate_of_w() {
        let w = QuadRat::w(5).unwrap();
        assert_eq!(w.conjugate(), QuadRat::one() - &w);
        assert_eq!(w.trace(), rat(1));
        // w^2 = w + (d-1)/4
        assert_eq!(&w * &w, &w + &QuadRat::from_int(1));
    }

    #[test]
    fn norm_example() {
        let w = QuadRat::w(-3).unwrap();
        let e = -w - QuadRat::one();
        assert_eq!(e.norm(), rat(3));
    }

    #[test]
    fn integrality() {
        let half = rat_frac(1, 2);
        assert!(QuadRat::new(5, half.clone(), half.clone()).unwrap().is_algebraic_integer());
        assert!(!QuadRat::new(2, half.clone(), half.clone()).unwrap().is_algebraic_integer());
        assert!(!QuadRat::new(5, half.clone(), rat(1)).unwrap().is_algebraic_integer());
        assert!(!QuadRat::rational(half).is_algebraic_integer());
    }

    #[test]
    fn field_mismatch_is_an_error() {
        let a = QuadRat::sqrt(2).unwrap();
        let b = QuadRat::sqrt(3).unwrap();
        assert_eq!(a.checked_add(&b), Err(Error::FieldMismatch(2, 3)));
        assert!(a.checked_add(&QuadRat::from_int(4)).is_ok());
    }

    #[test]
    fn cancellation_gives_rational_tag() {
        let a = QuadRat::sqrt(7).unwrap();
        let z = &a - &a;
        assert_eq!(z, QuadRat::zero());
        assert_eq!(z.d(), 0);
    }

    #[test]
    fn division() {
        let a = QuadRat::new(-3, rat(1), rat(2)).unwrap();
        let b = QuadRat::new(-3, rat(-1), rat(1)).unwrap();
        assert_eq!(&(&a / &b) * &b, a);
        assert_eq!(a.checked_div(&QuadRat::zero()), Err(Error::DivisionByZero));
    }

    #[test]
    fn bad_discriminant() {
        assert_eq!(QuadRat::sqrt(12), Err(Error::BadDiscriminant(12)));
        assert_eq!(QuadRat::sqrt(1), Err(Error::BadDiscriminant(1)));
    }

    #[test]
    fn embedding_bound() {
        // 1 + sqrt 2 ~ 2.414
        let a = QuadRat::new(2, rat(1), rat(1)).unwrap();
        assert!(a.embeddings_bounded(&rat(6)));
        assert!(!a.embeddings_bounded(&rat(5)));
        let b = QuadRat::new(2, rat(-1), rat(1)).unwrap();
        assert!(!b.embeddings_bounded(&rat(5)));
    }

    #[test]
    fn display() {
        let a = QuadRat::new(-3, rat_frac(1, 2), rat_frac(-1, 2)).unwrap();
        assert_eq!(a.to_string(), "1/2 - 1/2*sqrt(-3)");
        assert_eq!(QuadRat::sqrt(3).unwrap().to_string(), "sqrt(3)");
    }
}
