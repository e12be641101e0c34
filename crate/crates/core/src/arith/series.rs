use std::fmt;

use super::{rat, QuadRat, Rat};
use crate::{Error, Result};

/// A Laurent series in `q` known to a finite precision:
/// `sum_{n = val}^{prec - 1} coeffs[n - val] q^n + O(q^prec)`.
///
/// The coefficient at `val` is nonzero unless the series is zero to its
/// precision, in which case `coeffs` is empty and `val == prec`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncSeries {
    val: i64,
    coeffs: Vec<QuadRat>,
    prec: i64,
}

impl TruncSeries {
    /// Series with the given coefficients starting at `q^val`; the precision
    /// is `val + coeffs.len()`.
    pub fn new(val: i64, coeffs: Vec<QuadRat>) -> Self {
        let prec = val + coeffs.len() as i64;
        Self::normalized(val, coeffs, prec)
    }

    /// Like [`TruncSeries::new`] with an explicit precision; coefficients
    /// past the precision are dropped, missing ones are zero.
    pub fn with_prec(val: i64, mut coeffs: Vec<QuadRat>, prec: i64) -> Self {
        let len = (prec - val).max(0) as usize;
        coeffs.resize(len, QuadRat::zero());
        Self::normalized(val, coeffs, prec)
    }

    pub fn from_rationals(val: i64, coeffs: Vec<Rat>) -> Self {
        Self::new(val, coeffs.into_iter().map(QuadRat::rational).collect())
    }

    pub fn zero(prec: i64) -> Self {
        TruncSeries { val: prec, coeffs: Vec::new(), prec }
    }

    /// `c q^n + O(q^prec)`.
    pub fn monomial(c: QuadRat, n: i64, prec: i64) -> Self {
        Self::with_prec(n, vec![c], prec)
    }

    fn normalized(val: i64, coeffs: Vec<QuadRat>, prec: i64) -> Self {
        match coeffs.iter().position(|c| !c.is_zero()) {
            None => Self::zero(prec),
            Some(k) => TruncSeries { val: val + k as i64, coeffs: coeffs[k..].to_vec(), prec },
        }
    }

    /// Exponent of the leading term (equals `prec` for the zero series).
    pub fn val(&self) -> i64 {
        self.val
    }

    pub fn prec(&self) -> i64 {
        self.prec
    }

    /// Number of known coefficients from the leading term on.
    pub fn relative_prec(&self) -> i64 {
        self.prec - self.val
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading(&self) -> Option<&QuadRat> {
        self.coeffs.first()
    }

    /// Coefficient of `q^n`, or `None` past the precision.
    pub fn coeff(&self, n: i64) -> Option<QuadRat> {
        if n >= self.prec {
            None
        } else if n < self.val {
            Some(QuadRat::zero())
        } else {
            Some(self.coeffs[(n - self.val) as usize].clone())
        }
    }

    fn coeff_ref(&self, n: i64) -> Option<&QuadRat> {
        if n < self.val || n >= self.prec {
            None
        } else {
            Some(&self.coeffs[(n - self.val) as usize])
        }
    }

    /// Coefficients as `(exponent, value)` pairs, zeros included.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &QuadRat)> {
        self.coeffs.iter().enumerate().map(move |(i, c)| (self.val + i as i64, c))
    }

    pub fn truncate(&self, prec: i64) -> Self {
        let p = prec.min(self.prec);
        let mut c = self.coeffs.clone();
        c.truncate((p - self.val).max(0) as usize);
        Self::normalized(self.val.min(p), c, p)
    }

    fn combine(&self, other: &Self, f: impl Fn(&QuadRat, &QuadRat) -> Result<QuadRat>) -> Result<Self> {
        let prec = self.prec.min(other.prec);
        let val = self.val.min(other.val).min(prec);
        let zero = QuadRat::zero();
        let mut out = Vec::with_capacity((prec - val) as usize);
        for n in val..prec {
            let a = self.coeff_ref(n).unwrap_or(&zero);
            let b = other.coeff_ref(n).unwrap_or(&zero);
            out.push(f(a, b)?);
        }
        Ok(Self::normalized(val, out, prec))
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.combine(other, QuadRat::checked_add)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, QuadRat::checked_sub)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.checked_add(other).unwrap_or_else(|e| panic!("{e}"))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.checked_sub(other).unwrap_or_else(|e| panic!("{e}"))
    }

    pub fn neg(&self) -> Self {
        TruncSeries { val: self.val, coeffs: self.coeffs.iter().map(|c| -c).collect(), prec: self.prec }
    }

    pub fn scale(&self, c: &QuadRat) -> Self {
        Self::normalized(self.val, self.coeffs.iter().map(|x| x * c).collect(), self.prec)
    }

    /// Product; valuations add and the relative precision is the smaller
    /// of the two.
    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        let val = self.val + other.val;
        let rel = self.relative_prec().min(other.relative_prec());
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero(val + rel));
        }
        let mut out = Vec::with_capacity(rel as usize);
        for k in 0..rel as usize {
            let mut s = QuadRat::zero();
            for i in 0..=k {
                let (a, b) = (&self.coeffs[i], &other.coeffs[k - i]);
                if !a.is_zero() && !b.is_zero() {
                    s = s.checked_add(&a.checked_mul(b)?)?;
                }
            }
            out.push(s);
        }
        Ok(Self::normalized(val, out, val + rel))
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.checked_mul(other).unwrap_or_else(|e| panic!("{e}"))
    }

    /// Quotient; fails when `other` is zero to its precision.
    pub fn div(&self, other: &Self) -> Result<Self> {
        let lead = other.leading().ok_or(Error::DivisionByZero)?;
        let inv = lead.inv()?;
        let val = self.val - other.val;
        let rel = self.relative_prec().min(other.relative_prec());
        if self.is_zero() {
            return Ok(Self::zero(val + rel));
        }
        let mut q: Vec<QuadRat> = Vec::with_capacity(rel as usize);
        for k in 0..rel as usize {
            let mut s = self.coeffs[k].clone();
            for j in 1..=k {
                let b = &other.coeffs[j];
                if !b.is_zero() && !q[k - j].is_zero() {
                    s = s.checked_sub(&q[k - j].checked_mul(b)?)?;
                }
            }
            q.push(s.checked_mul(&inv)?);
        }
        Ok(Self::normalized(val, q, val + rel))
    }

    /// `q d/dq`: multiplies the coefficient of `q^n` by `n`.
    pub fn q_derivative(&self) -> Self {
        let c = self.terms().map(|(n, c)| c.scale(&rat(n))).collect();
        Self::normalized(self.val, c, self.prec)
    }

    /// Multiplication by `q^k`.
    pub fn shift(&self, k: i64) -> Self {
        TruncSeries { val: self.val + k, coeffs: self.coeffs.clone(), prec: self.prec + k }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::with_prec(0, vec![QuadRat::one()], self.relative_prec());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Image of every coefficient under `sqrt(d) -> -sqrt(d)`.
    pub fn conjugate(&self) -> Self {
        TruncSeries { val: self.val, coeffs: self.coeffs.iter().map(QuadRat::conjugate).collect(), prec: self.prec }
    }
}

impl fmt::Display for TruncSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (n, c) in self.terms() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match n {
                0 => write!(f, "({c})")?,
                1 => write!(f, "({c})*q")?,
                _ => write!(f, "({c})*q^{n}")?,
            }
        }
        if !first {
            write!(f, " + ")?;
        }
        write!(f, "O(q^{})", self.prec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(val: i64, c: &[i64]) -> TruncSeries {
        TruncSeries::new(val, c.iter().map(|&n| QuadRat::from_int(n)).collect())
    }

    #[test]
    fn division_by_q() {
        let a = s(1, &[1, 1, 0, 0]);
        let b = s(1, &[1, 0, 0, 0]);
        assert_eq!(a.div(&b).unwrap(), s(0, &[1, 1, 0, 0]));
    }

    #[test]
    fn derivative_of_laurent() {
        let a = s(-1, &[1, 0, 0, 3]);
        assert_eq!(a.q_derivative(), s(-1, &[-1, 0, 0, 6]));
    }

    #[test]
    fn product_shifts_valuation() {
        let a = s(-2, &[1, 1, 0]);
        let b = s(3, &[1, 0, 0]);
        let p = a.mul(&b);
        assert_eq!(p, s(1, &[1, 1, 0]));
        assert_eq!(p.prec(), 4);
    }

    #[test]
    fn precision_min_rule() {
        let a = s(0, &[1, 2, 3, 4, 5]);
        let b = s(0, &[1, 1]);
        assert_eq!(a.add(&b).prec(), 2);
        assert_eq!(a.mul(&b).prec(), 2);
        assert_eq!(a.div(&b).unwrap().prec(), 2);
    }

    #[test]
    fn zero_division_is_an_error() {
        let a = s(0, &[1, 2]);
        assert_eq!(a.div(&TruncSeries::zero(5)), Err(Error::DivisionByZero));
    }

    #[test]
    fn cancellation_raises_valuation() {
        let a = s(0, &[1, 2, 3]);
        let b = s(0, &[1, 2, 4]);
        let d = a.sub(&b);
        assert_eq!(d.val(), 2);
        assert_eq!(d.coeff(2), Some(QuadRat::from_int(-1)));
        assert_eq!(d.coeff(3), None);
    }
}
