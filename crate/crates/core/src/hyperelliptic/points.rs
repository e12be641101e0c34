use crate::arith::modp;
use crate::{Error, Result};

use super::GenusTwoCurve;

/// The field `F_{p^2} = F_p[t]/(t^2 - r)` for the least non-residue `r`.
#[derive(Clone, Copy, Debug)]
pub struct Fp2 {
    pub p: u64,
    pub r: u64,
}

impl Fp2 {
    pub fn new(p: u64) -> Self {
        let r = (2..p).find(|&r| modp::legendre(r, p) == -1).expect("odd prime");
        Fp2 { p, r }
    }

    pub fn add(&self, x: (u64, u64), y: (u64, u64)) -> (u64, u64) {
        (modp::add(x.0, y.0, self.p), modp::add(x.1, y.1, self.p))
    }

    pub fn mul(&self, x: (u64, u64), y: (u64, u64)) -> (u64, u64) {
        let p = self.p;
        let a = modp::add(modp::mul(x.0, y.0, p), modp::mul(modp::mul(x.1, y.1, p), self.r, p), p);
        let b = modp::add(modp::mul(x.0, y.1, p), modp::mul(x.1, y.0, p), p);
        (a, b)
    }

    pub fn norm(&self, x: (u64, u64)) -> u64 {
        let p = self.p;
        modp::sub(modp::mul(x.0, x.0, p), modp::mul(modp::mul(x.1, x.1, p), self.r, p), p)
    }

    /// Quadratic character: 0, 1 or -1. A unit is a square exactly when its
    /// norm is a square in `F_p`.
    pub fn chi(&self, x: (u64, u64)) -> i64 {
        if x == (0, 0) {
            0
        } else {
            i64::from(modp::legendre(self.norm(x), self.p))
        }
    }

    /// Horner evaluation of a polynomial with `F_p` coefficients.
    pub fn eval(&self, c: &[u64; 7], x: (u64, u64)) -> (u64, u64) {
        let mut acc = (0, 0);
        for &a in c.iter().rev() {
            acc = self.add(self.mul(acc, x), (a, 0));
        }
        acc
    }

    pub fn elements(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        (0..self.p).flat_map(move |a| (0..self.p).map(move |b| (a, b)))
    }
}

fn check(curve: &GenusTwoCurve, p: u64, k: u32) -> Result<()> {
    if !curve.has_good_reduction(p) {
        return Err(Error::BadReduction(p));
    }
    if k != 1 && k != 2 {
        return Err(Error::Invalid(format!("point counts over F_p^{k} are not supported")));
    }
    Ok(())
}

fn eval_fp(c: &[u64; 7], x: u64, p: u64) -> u64 {
    c.iter().rev().fold(0, |acc, &a| modp::add(modp::mul(acc, x, p), a, p))
}

/// Points at infinity of the smooth model: one when the reduction has
/// degree 5, otherwise `1 + chi(leading coefficient)`.
fn points_at_infinity(lc: u64, p: u64, k: u32) -> u64 {
    if lc == 0 {
        1
    } else if k == 2 {
        2
    } else {
        (1 + modp::legendre(lc, p)) as u64
    }
}

/// `#C(F_{p^k})` for `k` in `{1, 2}` by summing the quadratic character.
pub fn count_points(curve: &GenusTwoCurve, p: u64, k: u32) -> Result<u64> {
    check(curve, p, k)?;
    let c = curve.coeffs_mod(p);
    let inf = points_at_infinity(c[6], p, k);
    let affine: i64 = if k == 1 {
        (0..p).map(|x| 1 + i64::from(modp::legendre(eval_fp(&c, x, p), p))).sum()
    } else {
        let f = Fp2::new(p);
        f.elements().map(|x| 1 + f.chi(f.eval(&c, x))).sum()
    };
    Ok(affine as u64 + inf)
}

/// `#C(F_{p^k})` by tabulating `y^2` over the field and looking up `P(x)`.
pub fn count_points_scan(curve: &GenusTwoCurve, p: u64, k: u32) -> Result<u64> {
    check(curve, p, k)?;
    let c = curve.coeffs_mod(p);
    let inf = if c[6] == 0 {
        1
    } else if k == 1 {
        (0..p).filter(|&y| modp::mul(y, y, p) == c[6]).count() as u64
    } else {
        let f = Fp2::new(p);
        f.elements().filter(|&y| f.mul(y, y) == (c[6], 0)).count() as u64
    };
    let affine = if k == 1 {
        let mut hist = vec![0u64; p as usize];
        for y in 0..p {
            hist[modp::mul(y, y, p) as usize] += 1;
        }
        (0..p).map(|x| hist[eval_fp(&c, x, p) as usize]).sum::<u64>()
    } else {
        let f = Fp2::new(p);
        let idx = |v: (u64, u64)| (v.0 * p + v.1) as usize;
        let mut hist = vec![0u64; (p * p) as usize];
        for y in f.elements() {
            hist[idx(f.mul(y, y))] += 1;
        }
        f.elements().map(|x| hist[idx(f.eval(&c, x))]).sum::<u64>()
    };
    Ok(affine + inf)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c63_counts() {
        let c = GenusTwoCurve::from_ints(&[-27, 0, 0, -26, 0, 0, 1]).unwrap();
        assert_eq!(count_points(&c, 5, 1).unwrap(), 6);
        assert_eq!(count_points(&c, 5, 2).unwrap(), 22);
        assert_eq!(count_points_scan(&c, 5, 2).unwrap(), 22);
        assert_eq!(count_points(&c, 3, 1), Err(Error::BadReduction(3)));
    }

    #[test]
    fn quintic_over_f3() {
        let c = GenusTwoCurve::from_ints(&[0, -1, 0, 0, 0, 1]).unwrap();
        assert_eq!(count_points(&c, 3, 1).unwrap(), 4);
        assert_eq!(count_points_scan(&c, 3, 1).unwrap(), 4);
    }
}
