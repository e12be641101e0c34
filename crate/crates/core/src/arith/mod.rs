//! Exact arithmetic: rationals, quadratic fields, truncated q-series,
//! univariate polynomials over the rationals and small modular helpers.

pub mod linalg;
pub mod modp;
pub mod poly;
mod quad;
mod series;

pub use poly::QPoly;
pub use quad::{is_squarefree, QuadRat};
pub use series::TruncSeries;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Arbitrary precision rational number.
pub type Rat = BigRational;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat_frac(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Exact square root of a nonnegative rational, when it is a square.
pub fn rat_sqrt(q: &Rat) -> Option<Rat> {
    if q.is_negative() {
        return None;
    }
    let n = q.numer().sqrt();
    let d = q.denom().sqrt();
    if &(&n * &n) == q.numer() && &(&d * &d) == q.denom() {
        Some(Rat::new(n, d))
    } else {
        None
    }
}

pub fn is_rat_square(q: &Rat) -> bool {
    rat_sqrt(q).is_some()
}

/// Whether `q` lies in `d * (Q^*)^2` or is zero.
pub fn is_d_times_square(q: &Rat, d: i64) -> bool {
    if q.is_zero() {
        return true;
    }
    is_rat_square(&(q / rat(d)))
}

/// Smallest common denominator of a list of rationals.
pub fn common_denominator<'a>(qs: impl IntoIterator<Item = &'a Rat>) -> BigInt {
    qs.into_iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()))
}

/// `q` as an `i64` when it is an integer that fits.
pub fn rat_to_i64(q: &Rat) -> Option<i64> {
    if !q.is_integer() {
        return None;
    }
    i64::try_from(q.numer()).ok()
}

/// Outcome of an exact linear solve.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LinearSolution {
    Unique(Vec<Rat>),
    /// Index of the first equation contradicting the earlier ones.
    Inconsistent(usize),
    Underdetermined,
}

/// Solves `rows[i] . x = rhs[i]` by incremental Gauss-Jordan elimination,
/// processing equations in order.
pub fn solve_linear(n: usize, rows: &[Vec<Rat>], rhs: &[Rat]) -> LinearSolution {
    let mut basis: Vec<(usize, Vec<Rat>, Rat)> = Vec::new();
    for (i, (row, r)) in rows.iter().zip(rhs).enumerate() {
        let mut row = row.clone();
        let mut r = r.clone();
        for (piv, brow, br) in &basis {
            if !row[*piv].is_zero() {
                let f = row[*piv].clone();
                for (a, b) in row.iter_mut().zip(brow) {
                    *a -= &f * b;
                }
                r -= &f * br;
            }
        }
        match row.iter().position(|a| !a.is_zero()) {
            None => {
                if !r.is_zero() {
                    return LinearSolution::Inconsistent(i);
                }
            }
            Some(piv) => {
                let inv = row[piv].recip();
                for a in row.iter_mut() {
                    *a *= &inv;
                }
                r *= &inv;
                for (_, brow, br) in basis.iter_mut() {
                    if !brow[piv].is_zero() {
                        let f = brow[piv].clone();
                        for (a, b) in brow.iter_mut().zip(&row) {
                            *a -= &f * b;
                        }
                        *br -= &f * &r;
                    }
                }
                basis.push((piv, row, r));
            }
        }
    }
    if basis.len() < n {
        return LinearSolution::Underdetermined;
    }
    let mut x = vec![Rat::zero(); n];
    for (piv, _, r) in basis {
        x[piv] = r;
    }
    LinearSolution::Unique(x)
}
