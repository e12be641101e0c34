//! Determinants, resultants and interpolation over the integers and rationals.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{QPoly, Rat};

/// Determinant by fraction-free (Bareiss) elimination.
pub fn det_bigint(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                None => return BigInt::zero(),
                Some(i) => {
                    m.swap(k, i);
                    sign = -sign;
                }
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
                m[i][j] = v;
            }
        }
        prev = m[k][k].clone();
    }
    sign * &m[n - 1][n - 1]
}

/// Determinant of a rational matrix.
pub fn det_rat(m: &[Vec<Rat>]) -> Rat {
    let den = super::common_denominator(m.iter().flatten());
    let scaled: Vec<Vec<BigInt>> = m
        .iter()
        .map(|row| row.iter().map(|q| (q * Rat::from_integer(den.clone())).to_integer()).collect())
        .collect();
    let d = det_bigint(scaled);
    Rat::new(d, num_traits::pow(den, m.len()))
}

/// Sylvester matrix of `f` (degree `m`) and `g` (degree `n`), coefficients
/// given constant term first; the stated degrees are used formally.
pub fn sylvester<T: Clone + Zero>(f: &[T], m: usize, g: &[T], n: usize) -> Vec<Vec<T>> {
    let size = m + n;
    let mut out = vec![vec![T::zero(); size]; size];
    let coeff = |c: &[T], i: usize| c.get(i).cloned().unwrap_or_else(T::zero);
    for r in 0..n {
        for i in 0..=m {
            out[r][r + i] = coeff(f, m - i);
        }
    }
    for r in 0..m {
        for i in 0..=n {
            out[n + r][r + i] = coeff(g, n - i);
        }
    }
    out
}

/// Resultant of integer polynomials with formal degrees.
pub fn resultant_bigint(f: &[BigInt], m: usize, g: &[BigInt], n: usize) -> BigInt {
    if m + n == 0 {
        return BigInt::one();
    }
    det_bigint(sylvester(f, m, g, n))
}

/// The polynomial through the points `(x_i, y_i)` (distinct `x_i`).
pub fn interpolate(points: &[(Rat, Rat)]) -> QPoly {
    let n = points.len();
    // divided differences
    let mut coef: Vec<Rat> = points.iter().map(|(_, y)| y.clone()).collect();
    for j in 1..n {
        for i in (j..n).rev() {
            coef[i] = (&coef[i] - &coef[i - 1]) / (&points[i].0 - &points[i - j].0);
        }
    }
    let mut p = QPoly::zero();
    for i in (0..n).rev() {
        p = p.mul(&QPoly::new(vec![-points[i].0.clone(), Rat::one()])).add(&QPoly::constant(coef[i].clone()));
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    fn bi(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn small_determinants() {
        let m = vec![bi(&[2, 0, 1]), bi(&[1, 3, 2]), bi(&[1, 1, 2])];
        assert_eq!(det_bigint(m), BigInt::from(6));
        let z = vec![bi(&[0, 1]), bi(&[1, 0])];
        assert_eq!(det_bigint(z), BigInt::from(-1));
    }

    #[test]
    fn resultant_matches_euclid() {
        let f = QPoly::from_ints(&[-2, 0, 1]);
        let g = QPoly::from_ints(&[1, 3, 0, 1]);
        let r = resultant_bigint(&bi(&[-2, 0, 1]), 2, &bi(&[1, 3, 0, 1]), 3);
        assert_eq!(Rat::from_integer(r), f.resultant(&g));
    }

    #[test]
    fn interpolation_recovers_cubic() {
        let p = QPoly::from_ints(&[3, -1, 0, 2]);
        let pts: Vec<(Rat, Rat)> = (0..4).map(|i| (rat(i), p.eval(&rat(i)))).collect();
        assert_eq!(interpolate(&pts), p);
    }
}
