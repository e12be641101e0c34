//! Dense univariate polynomials over the rationals.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::modp::{self, rational_reconstruct};
use super::{common_denominator, rat, Rat};

/// Polynomial with rational coefficients, constant term first, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QPoly(Vec<Rat>);

impl QPoly {
    pub fn new(mut c: Vec<Rat>) -> Self {
        while c.last().is_some_and(Zero::is_zero) {
            c.pop();
        }
        QPoly(c)
    }

    pub fn from_ints(c: &[i64]) -> Self {
        Self::new(c.iter().map(|&n| rat(n)).collect())
    }

    pub fn from_bigints(c: &[BigInt]) -> Self {
        Self::new(c.iter().map(|n| Rat::from_integer(n.clone())).collect())
    }

    pub fn zero() -> Self {
        QPoly(Vec::new())
    }

    pub fn one() -> Self {
        Self::constant(Rat::one())
    }

    pub fn constant(c: Rat) -> Self {
        Self::new(vec![c])
    }

    /// The polynomial `x`.
    pub fn x() -> Self {
        Self::from_ints(&[0, 1])
    }

    /// `x - r`.
    pub fn linear_root(r: &Rat) -> Self {
        Self::new(vec![-r, Rat::one()])
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.0
    }

    pub fn coeff(&self, i: usize) -> Rat {
        self.0.get(i).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn deg(&self) -> i64 {
        self.0.len() as i64 - 1
    }

    pub fn lc(&self) -> Rat {
        self.0.last().cloned().unwrap_or_else(Rat::zero)
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.0.len().max(o.0.len());
        Self::new((0..n).map(|i| self.coeff(i) + o.coeff(i)).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        let n = self.0.len().max(o.0.len());
        Self::new((0..n).map(|i| self.coeff(i) - o.coeff(i)).collect())
    }

    pub fn neg(&self) -> Self {
        QPoly(self.0.iter().map(|c| -c).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let mut c = vec![Rat::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.0.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Self::new(c)
    }

    pub fn scale(&self, q: &Rat) -> Self {
        Self::new(self.0.iter().map(|c| c * q).collect())
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Self::one(), |acc, _| acc.mul(self))
    }

    pub fn eval(&self, x: &Rat) -> Rat {
        self.0.iter().rev().fold(Rat::zero(), |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(self.0.iter().enumerate().skip(1).map(|(i, c)| c * rat(i as i64)).collect())
    }

    /// `self(g(x))`.
    pub fn compose(&self, g: &Self) -> Self {
        self.0.iter().rev().fold(Self::zero(), |acc, c| acc.mul(g).add(&Self::constant(c.clone())))
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn divrem(&self, o: &Self) -> (Self, Self) {
        assert!(!o.is_zero(), "polynomial division by zero");
        let mut r = self.0.clone();
        let dq = o.0.len() - 1;
        if r.len() < o.0.len() {
            return (Self::zero(), self.clone());
        }
        let lc_inv = o.lc().recip();
        let mut q = vec![Rat::zero(); r.len() - dq];
        for i in (0..q.len()).rev() {
            let c = &r[i + dq] * &lc_inv;
            if !c.is_zero() {
                for (j, b) in o.0.iter().enumerate() {
                    r[i + j] -= &c * b;
                }
            }
            q[i] = c;
        }
        r.truncate(dq);
        (Self::new(q), Self::new(r))
    }

    pub fn rem(&self, o: &Self) -> Self {
        self.divrem(o).1
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        self.scale(&self.lc().recip())
    }

    /// Monic greatest common divisor (zero when both are zero).
    pub fn gcd(&self, o: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = std::mem::replace(&mut b, r.primitive_rat());
        }
        a.monic()
    }

    /// Scalar multiple with coprime integer coefficients and positive leading
    /// coefficient; keeps intermediate swell down in remainder sequences.
    pub fn primitive_rat(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let z = self.to_integer_coeffs();
        let g = z.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
        let sign = if z.last().unwrap().is_negative() { -BigInt::one() } else { BigInt::one() };
        Self::new(z.iter().map(|c| Rat::from_integer(c / &g * &sign)).collect())
    }

    /// Coefficients times their common denominator.
    pub fn to_integer_coeffs(&self) -> Vec<BigInt> {
        let den = common_denominator(&self.0);
        self.0.iter().map(|c| (c * Rat::from_integer(den.clone())).to_integer()).collect()
    }

    /// Product of the distinct irreducible factors (monic).
    pub fn squarefree_part(&self) -> Self {
        if self.degree().unwrap_or(0) == 0 {
            return self.monic();
        }
        let g = self.gcd(&self.derivative());
        self.divrem(&g).0.monic()
    }

    /// Resultant via the Euclidean remainder sequence.
    pub fn resultant(&self, o: &Self) -> Rat {
        if self.is_zero() || o.is_zero() {
            return Rat::zero();
        }
        let (mut a, mut b) = (self.clone(), o.clone());
        let mut acc = Rat::one();
        loop {
            let (da, db) = (a.deg(), b.deg());
            if db == 0 {
                return acc * b.lc().pow(da as i32);
            }
            let r = a.rem(&b);
            if r.is_zero() {
                return Rat::zero();
            }
            let dr = r.deg();
            // res(a, b) = (-1)^(da db) lc(b)^(da - dr) res(b, r)
            if (da * db) % 2 == 1 {
                acc = -acc;
            }
            acc *= b.lc().pow((da - dr) as i32);
            a = b;
            b = r;
        }
    }

    /// Discriminant `(-1)^(n(n-1)/2) res(f, f') / lc(f)` of the actual degree.
    pub fn discriminant(&self) -> Rat {
        let n = self.deg();
        if n < 1 {
            return Rat::zero();
        }
        let r = self.resultant(&self.derivative()) / self.lc();
        if (n * (n - 1) / 2) % 2 == 1 {
            -r
        } else {
            r
        }
    }

    /// All rational roots, without multiplicity, in increasing order.
    pub fn rational_roots(&self) -> Vec<Rat> {
        if self.is_zero() {
            return Vec::new();
        }
        let mut f = self.squarefree_part();
        let mut roots = Vec::new();
        if f.coeff(0).is_zero() {
            roots.push(Rat::zero());
            f = f.divrem(&Self::x()).0;
        }
        if f.deg() >= 1 {
            roots.extend(padic_rational_roots(&f));
        }
        roots.sort();
        roots
    }
}

/// Rational roots of a squarefree polynomial with nonzero constant term:
/// roots modulo a good prime, Hensel lifting and rational reconstruction,
/// each candidate confirmed by exact evaluation.
fn padic_rational_roots(f: &QPoly) -> Vec<Rat> {
    let z = f.primitive_rat().to_integer_coeffs();
    let lc = z.last().unwrap().abs();
    let c0 = z[0].abs();
    // a root r/s in lowest terms has |r| <= |c0| and |s| <= |lc|
    let h = if lc > c0 { lc } else { c0 };
    let needed = BigInt::from(2) * &h * &h + BigInt::one();
    let fz = QPoly::from_bigints(&z);
    let dz = fz.derivative().to_integer_coeffs();
    let p = good_prime(&z, &dz);
    let roots_mod_p: Vec<u64> = (0..p).filter(|&x| eval_mod(&z, x, p) == 0).collect();
    let mut out = Vec::new();
    for r0 in roots_mod_p {
        let mut m = BigInt::from(p);
        let mut r = BigInt::from(r0);
        while m <= needed {
            // Newton step modulo m^2
            let m2 = &m * &m;
            let fv = eval_big(&z, &r).mod_floor(&m2);
            let dv = eval_big(&dz, &r).mod_floor(&m2);
            let di = modp::inv_bigint(&dv, &m2).expect("simple root at a good prime");
            r = (&r - fv * di).mod_floor(&m2);
            m = m2;
        }
        if let Some(q) = rational_reconstruct(&r, &m) {
            if f.eval(&q).is_zero() {
                out.push(q);
            }
        }
    }
    out
}

fn good_prime(z: &[BigInt], dz: &[BigInt]) -> u64 {
    let lc = z.last().unwrap();
    for p in modp::primes_up_to(10_000).into_iter().skip(1) {
        if modp::from_bigint(lc, p) == 0 {
            continue;
        }
        let a: Vec<u64> = z.iter().map(|c| modp::from_bigint(c, p)).collect();
        let b: Vec<u64> = dz.iter().map(|c| modp::from_bigint(c, p)).collect();
        if gcd_mod_degree(&a, &b, p) == 0 {
            return p;
        }
    }
    panic!("no good prime below 10000 for a squarefree polynomial");
}

fn eval_mod(z: &[BigInt], x: u64, p: u64) -> u64 {
    z.iter().rev().fold(0, |acc, c| modp::add(modp::mul(acc, x, p), modp::from_bigint(c, p), p))
}

fn eval_big(z: &[BigInt], x: &BigInt) -> BigInt {
    z.iter().rev().fold(BigInt::zero(), |acc, c| acc * x + c)
}

fn trim_mod(v: &mut Vec<u64>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

/// Degree of the gcd of two polynomials over `F_p` (`usize::MAX` if both vanish).
pub(crate) fn gcd_mod_degree(a: &[u64], b: &[u64], p: u64) -> usize {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    trim_mod(&mut a);
    trim_mod(&mut b);
    while !b.is_empty() {
        let inv = modp::inv(*b.last().unwrap(), p).unwrap();
        while a.len() >= b.len() {
            let c = modp::mul(*a.last().unwrap(), inv, p);
            let shift = a.len() - b.len();
            for (j, &bj) in b.iter().enumerate() {
                a[shift + j] = modp::sub(a[shift + j], modp::mul(c, bj, p), p);
            }
            trim_mod(&mut a);
            if a.is_empty() {
                break;
            }
        }
        std::mem::swap(&mut a, &mut b);
    }
    if a.is_empty() {
        usize::MAX
    } else {
        a.len() - 1
    }
}

impl fmt::Display for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_poly(f, &self.0, "x")
    }
}

/// Writes `c_n*x^n + ... + c_0` with the given variable name.
pub(crate) fn write_poly(f: &mut fmt::Formatter<'_>, c: &[Rat], var: &str) -> fmt::Result {
    let mut first = true;
    for (i, a) in c.iter().enumerate().rev() {
        if a.is_zero() {
            continue;
        }
        let neg = a.is_negative();
        let abs = a.abs();
        if first {
            if neg {
                write!(f, "-")?;
            }
        } else {
            write!(f, "{}", if neg { " - " } else { " + " })?;
        }
        first = false;
        let mon = match i {
            0 => String::new(),
            1 => var.to_string(),
            _ => format!("{var}^{i}"),
        };
        if i == 0 {
            write!(f, "{abs}")?;
        } else if abs.is_one() {
            write!(f, "{mon}")?;
        } else {
            write!(f, "{abs}*{mon}")?;
        }
    }
    if first {
        write!(f, "0")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat_frac;

    #[test]
    fn gcd_and_division() {
        let a = QPoly::from_ints(&[-1, 0, 1]); // x^2 - 1
        let b = QPoly::from_ints(&[1, 2, 1]); // (x+1)^2
        assert_eq!(a.gcd(&b), QPoly::from_ints(&[1, 1]));
        let (q, r) = b.divrem(&QPoly::from_ints(&[1, 1]));
        assert_eq!(q, QPoly::from_ints(&[1, 1]));
        assert!(r.is_zero());
    }

    #[test]
    fn resultant_and_discriminant() {
        // disc(x^2 + bx + c) = b^2 - 4c
        let f = QPoly::from_ints(&[3, 5, 1]);
        assert_eq!(f.discriminant(), rat(13));
        // res(x - 2, x^2 + 1) = 5
        assert_eq!(QPoly::from_ints(&[-2, 1]).resultant(&QPoly::from_ints(&[1, 0, 1])), rat(5));
        // disc(x^3 - x) = 4
        assert_eq!(QPoly::from_ints(&[0, -1, 0, 1]).discriminant(), rat(4));
    }

    #[test]
    fn rational_roots_found() {
        // (2x - 3)(x + 5)(x^2 + 1)(7x + 1)
        let f = QPoly::from_ints(&[-3, 2])
            .mul(&QPoly::from_ints(&[5, 1]))
            .mul(&QPoly::from_ints(&[1, 0, 1]))
            .mul(&QPoly::from_ints(&[1, 7]));
        assert_eq!(f.rational_roots(), vec![rat(-5), rat_frac(-1, 7), rat_frac(3, 2)]);
        assert!(QPoly::from_ints(&[2, 0, 1]).rational_roots().is_empty());
        let g = QPoly::from_ints(&[0, 0, 1, 1]);
        assert_eq!(g.rational_roots(), vec![rat(-1), rat(0)]);
    }

    #[test]
    fn display() {
        assert_eq!(QPoly::from_ints(&[-27, 0, 0, -26, 0, 0, 1]).to_string(), "x^6 - 26*x^3 - 27");
    }
}
