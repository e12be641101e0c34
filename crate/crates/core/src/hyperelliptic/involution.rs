//! Nonhyperelliptic involutions `x -> (a x + b)/(c x - a)` of `y^2 = P(x)`.
//!
//! Writing `s = a^2 + bc`, the map lifts to an involution of the curve iff
//! `F(aX + bZ, cX - aZ) = s^3 F(X, Z)` for the binary sextic `F`; it is
//! defined over Q iff `(a : b : c)` is rational and `s` is a rational square.
//! The system is solved on the charts `c = 0, a = 1` and `c = 1`. On the
//! second chart `b` is eliminated by resultants, leaving a squarefree `m(a)`,
//! and the remaining equations are solved in `u = s` over `Q[a]/(m)`,
//! splitting `m` whenever a zero divisor turns up.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::arith::linalg::{interpolate, resultant_bigint};
use crate::arith::{is_rat_square, rat, QPoly, Rat};

use super::{act, GenusTwoCurve};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Involution {
    pub a: Rat,
    pub b: Rat,
    pub c: Rat,
}

impl Involution {
    pub fn s(&self) -> Rat {
        &self.a * &self.a + &self.b * &self.c
    }

    pub fn matrix(&self) -> [[Rat; 2]; 2] {
        [[self.a.clone(), self.b.clone()], [self.c.clone(), -self.a.clone()]]
    }

    /// Exact check of `F(aX + bZ, cX - aZ) = s^3 F`.
    pub fn preserves(&self, curve: &GenusTwoCurve) -> bool {
        let s = self.s();
        if s.is_zero() {
            return false;
        }
        let f = curve.form();
        act(&f, &self.matrix()) == f.scale(&s.pow(3))
    }

    pub fn is_rational(&self) -> bool {
        is_rat_square(&self.s())
    }
}

impl fmt::Display for Involution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x -> ({}*x + {})/({}*x - {})", self.a, self.b, self.c, self.a)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExtraInvolution {
    None,
    OverQ(Involution),
    /// Only irrational involutions; `field_degree` is the degree of a field
    /// over which one of them is defined (not necessarily the smallest).
    OverQbar { field_degree: usize },
}

impl ExtraInvolution {
    pub fn exists(&self) -> bool {
        !matches!(self, ExtraInvolution::None)
    }

    pub fn over_q(&self) -> Option<&Involution> {
        match self {
            ExtraInvolution::OverQ(i) => Some(i),
            _ => None,
        }
    }
}

/// Polynomial in two variables `(a, b)`, stored by powers of `b`.
type Biv = Vec<QPoly>;

fn biv_trim(mut x: Biv) -> Biv {
    while x.last().is_some_and(QPoly::is_zero) {
        x.pop();
    }
    x
}

fn biv_add(x: &Biv, y: &Biv) -> Biv {
    let n = x.len().max(y.len());
    let zero = QPoly::zero();
    biv_trim((0..n).map(|i| x.get(i).unwrap_or(&zero).add(y.get(i).unwrap_or(&zero))).collect())
}

fn biv_mul(x: &Biv, y: &Biv) -> Biv {
    if x.is_empty() || y.is_empty() {
        return Vec::new();
    }
    let mut out = vec![QPoly::zero(); x.len() + y.len() - 1];
    for (i, p) in x.iter().enumerate() {
        for (j, q) in y.iter().enumerate() {
            out[i + j] = out[i + j].add(&p.mul(q));
        }
    }
    biv_trim(out)
}

fn biv_scale(x: &Biv, q: &Rat) -> Biv {
    biv_trim(x.iter().map(|p| p.scale(q)).collect())
}

fn biv_pow(x: &Biv, e: usize) -> Biv {
    (0..e).fold(vec![QPoly::one()], |acc, _| biv_mul(&acc, x))
}

/// `x(a, b)` with `b` replaced by `u - a^2`, as a polynomial in `(a, u)`.
fn shift_b(x: &Biv) -> Biv {
    let step = vec![QPoly::from_ints(&[0, 0, -1]), QPoly::one()];
    x.iter().rev().fold(Vec::new(), |acc, e| biv_add(&biv_mul(&acc, &step), &vec![e.clone()]))
}

/// Coefficients of `F(l1, l2) - s^3 F` for linear forms given as
/// `(coefficient of X, coefficient of Z)`.
fn equations(f: &[Rat], l1: (&Biv, &Biv), l2: (&Biv, &Biv), s: &Biv) -> Vec<Biv> {
    let lin = |l: (&Biv, &Biv)| vec![l.1.clone(), l.0.clone()];
    let form_mul = |x: &Vec<Biv>, y: &Vec<Biv>| {
        let mut out = vec![Vec::new(); x.len() + y.len() - 1];
        for (i, p) in x.iter().enumerate() {
            for (j, q) in y.iter().enumerate() {
                out[i + j] = biv_add(&out[i + j], &biv_mul(p, q));
            }
        }
        out
    };
    let form_pow = |x: &Vec<Biv>, e: usize| (0..e).fold(vec![vec![QPoly::one()]], |acc, _| form_mul(&acc, x));
    let (m1, m2) = (lin(l1), lin(l2));
    let mut g = vec![Vec::new(); 7];
    for (i, c) in f.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let t = form_mul(&form_pow(&m1, i), &form_pow(&m2, 6 - i));
        for (k, e) in t.iter().enumerate() {
            g[k] = biv_add(&g[k], &biv_scale(e, c));
        }
    }
    let s3 = biv_pow(s, 3);
    g.iter().zip(f).map(|(gk, c)| biv_add(gk, &biv_scale(&s3, &-c.clone()))).collect()
}

fn combine(eqs: &[Biv], w: &[i64]) -> Biv {
    eqs.iter().zip(w).fold(Vec::new(), |acc, (e, &k)| biv_add(&acc, &biv_scale(e, &rat(k))))
}

/// `Res_b(x, y)` as a polynomial in `a`; both have total degree at most 6,
/// so the result has degree at most 36.
fn resultant_in_b(x: &Biv, y: &Biv) -> QPoly {
    let (m, n) = (x.len().saturating_sub(1), y.len().saturating_sub(1));
    let at = |p: &Biv, a: &Rat| -> Vec<BigInt> { p.iter().map(|c| c.eval(a).to_integer()).collect() };
    let points: Vec<(Rat, Rat)> = (0..=36)
        .map(|k| {
            let a = rat(k);
            let r = resultant_bigint(&at(x, &a), m, &at(y, &a), n);
            (a, Rat::from_integer(r))
        })
        .collect();
    interpolate(&points)
}

/// `Q[a]/(m)` for squarefree `m`. Operations fail with a proper factor of
/// `m` when they meet a zero divisor.
struct Quotient<'a> {
    m: &'a QPoly,
}

type Split<T> = std::result::Result<T, QPoly>;

fn xgcd(x: &QPoly, y: &QPoly) -> (QPoly, QPoly) {
    // returns (g, s) with g = s x mod y
    let (mut r0, mut r1) = (x.clone(), y.clone());
    let (mut s0, mut s1) = (QPoly::one(), QPoly::zero());
    while !r1.is_zero() {
        let (q, r) = r0.divrem(&r1);
        let s = s0.sub(&q.mul(&s1));
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s);
    }
    (r0, s0)
}

impl Quotient<'_> {
    fn reduce(&self, x: &QPoly) -> QPoly {
        x.rem(self.m)
    }

    fn inverse(&self, x: &QPoly) -> Split<QPoly> {
        let (g, s) = xgcd(&self.reduce(x), self.m);
        if g.deg() == 0 {
            Ok(self.reduce(&s.scale(&g.lc().recip())))
        } else {
            Err(g.monic())
        }
    }

    fn trim(&self, mut p: Vec<QPoly>) -> Vec<QPoly> {
        for c in p.iter_mut() {
            *c = self.reduce(c);
        }
        while p.last().is_some_and(QPoly::is_zero) {
            p.pop();
        }
        p
    }

    fn rem(&self, x: &[QPoly], y: &[QPoly]) -> Split<Vec<QPoly>> {
        let inv = self.inverse(y.last().expect("nonzero divisor"))?;
        let mut r = x.to_vec();
        while r.len() >= y.len() {
            let q = self.reduce(&r.last().unwrap().mul(&inv));
            let shift = r.len() - y.len();
            for (i, c) in y.iter().enumerate() {
                r[shift + i] = self.reduce(&r[shift + i].sub(&q.mul(c)));
            }
            r.pop();
            r = self.trim(r);
        }
        Ok(r)
    }

    fn gcd(&self, polys: &[Vec<QPoly>]) -> Split<Vec<QPoly>> {
        let mut g: Vec<QPoly> = Vec::new();
        for p in polys {
            let mut x = self.trim(p.clone());
            let mut y = g;
            if x.len() < y.len() {
                std::mem::swap(&mut x, &mut y);
            }
            while !y.is_empty() {
                let r = self.rem(&x, &y)?;
                x = std::mem::replace(&mut y, r);
            }
            g = x;
        }
        if let Some(lc) = g.last() {
            let inv = self.inverse(lc)?;
            g = self.trim(g.iter().map(|c| c.mul(&inv)).collect());
        }
        Ok(g)
    }

    /// Degree in `u` of the common solutions with `u != 0`.
    fn nonzero_solutions(&self, polys: &[Vec<QPoly>]) -> Split<usize> {
        let mut h = self.gcd(polys)?;
        while h.len() > 1 {
            if h[0].is_zero() {
                h.remove(0);
            } else {
                self.inverse(&h[0])?;
                break;
            }
        }
        Ok(h.len().saturating_sub(1))
    }
}

fn univariate(b: &Biv, a: &Rat) -> QPoly {
    QPoly::new(b.iter().map(|c| c.eval(a)).collect())
}

fn common_gcd(polys: impl IntoIterator<Item = QPoly>) -> QPoly {
    polys.into_iter().fold(QPoly::zero(), |g, p| g.gcd(&p))
}

/// Searches for a nonhyperelliptic involution, preferring one defined over Q.
pub fn has_extra_involution(curve: &GenusTwoCurve) -> ExtraInvolution {
    let f = curve.form().c;
    let konst = |q: Rat| vec![QPoly::constant(q)];
    let a_var = vec![QPoly::x()];
    let b_var = vec![QPoly::zero(), QPoly::one()];
    let mut degrees: Vec<usize> = Vec::new();

    // chart c = 0, a = 1: x -> -x - b, s = 1; the variable is b
    let eqs0 = equations(&f, (&konst(rat(1)), &b_var), (&Vec::new(), &konst(rat(-1))), &konst(rat(1)));
    let g0 = common_gcd(eqs0.iter().map(|e| univariate(e, &Rat::zero())));
    if let Some(b) = g0.rational_roots().into_iter().next() {
        return ExtraInvolution::OverQ(Involution { a: Rat::one(), b, c: Rat::zero() });
    }
    if g0.deg() >= 1 {
        degrees.push(g0.deg() as usize);
    }

    // chart c = 1
    let s = vec![QPoly::from_ints(&[0, 0, 1]), QPoly::one()];
    let eqs = equations(&f, (&a_var, &b_var), (&konst(rat(1)), &vec![QPoly::from_ints(&[0, -1])]), &s);
    let weights = [[1, 3, 7, 2, 5, 11, 4], [2, -1, 3, -5, 1, 4, -3], [-4, 5, 1, 6, -2, 1, 9]];
    let l: Vec<Biv> = weights.iter().map(|w| combine(&eqs, w)).collect();
    let mut g = resultant_in_b(&l[0], &l[1]).gcd(&resultant_in_b(&l[0], &l[2]));
    if g.is_zero() {
        for i in 0..7 {
            for j in i + 1..7 {
                if !eqs[i].is_empty() && !eqs[j].is_empty() {
                    g = g.gcd(&resultant_in_b(&eqs[i], &eqs[j]));
                }
            }
        }
    }
    assert!(!g.is_zero(), "infinitely many automorphisms on a squarefree sextic");
    let m = g.squarefree_part();
    let in_u: Vec<Biv> = eqs.iter().map(shift_b).collect();

    for alpha in m.rational_roots() {
        let h = common_gcd(in_u.iter().map(|e| univariate(e, &alpha)));
        for u in h.rational_roots() {
            if u.is_zero() {
                continue;
            }
            let inv = Involution { b: &u - &alpha * &alpha, a: alpha.clone(), c: Rat::one() };
            if is_rat_square(&u) {
                return ExtraInvolution::OverQ(inv);
            }
            degrees.push(2);
        }
    }

    let mut work = vec![m];
    while let Some(m) = work.pop() {
        if m.deg() < 1 {
            continue;
        }
        let q = Quotient { m: &m };
        match q.nonzero_solutions(&in_u) {
            Ok(0) => {}
            Ok(k) => degrees.push(m.deg() as usize * k),
            Err(factor) => {
                let (rest, _) = m.divrem(&factor);
                work.push(factor);
                work.push(rest);
            }
        }
    }
    match degrees.into_iter().min() {
        Some(field_degree) => ExtraInvolution::OverQbar { field_degree },
        None => ExtraInvolution::None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperelliptic::clebsch_r;

    #[test]
    fn x6_minus_1() {
        let c = GenusTwoCurve::from_ints(&[-1, 0, 0, 0, 0, 0, 1]).unwrap();
        let r = has_extra_involution(&c);
        let inv = r.over_q().expect("rational involution");
        assert!(inv.preserves(&c));
        assert!(inv.is_rational());
    }

    #[test]
    fn c63_needs_sqrt_minus_3() {
        let c = GenusTwoCurve::from_ints(&[-27, 0, 0, -26, 0, 0, 1]).unwrap();
        let inv = Involution { a: rat(0), b: rat(-3), c: rat(1) };
        assert!(inv.preserves(&c));
        assert!(!inv.is_rational());
        assert_eq!(has_extra_involution(&c), ExtraInvolution::OverQbar { field_degree: 2 });
    }

    #[test]
    fn order_four_lift_is_not_an_involution() {
        let c = GenusTwoCurve::from_ints(&[-1, 0, 0, 0, 0, 0, 1]).unwrap();
        assert!(!Involution { a: rat(0), b: rat(1), c: rat(1) }.preserves(&c));
        assert!(Involution { a: rat(0), b: rat(-1), c: rat(1) }.preserves(&c));
    }

    #[test]
    fn generic_curve_has_none() {
        let c = GenusTwoCurve::from_ints(&[1, 0, 0, 1, 2, 0, 1]).unwrap();
        assert_eq!(has_extra_involution(&c), ExtraInvolution::None);
        assert!(!clebsch_r(&c).is_zero());
    }

    #[test]
    fn quintic_swapped_by_reciprocal() {
        // x^5 + x is fixed by x -> 1/x with s = 1
        let c = GenusTwoCurve::from_ints(&[0, 1, 0, 0, 0, 1]).unwrap();
        let inv = has_extra_involution(&c).over_q().cloned().expect("rational involution");
        assert!(inv.preserves(&c));
        assert!(clebsch_r(&c).is_zero());
    }
}
