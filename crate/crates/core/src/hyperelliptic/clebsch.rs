use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::arith::linalg::det_rat;
use crate::arith::{rat, Rat};

use super::GenusTwoCurve;

/// A binary form `sum c[i] X^i Z^(deg - i)` with rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinForm {
    pub deg: usize,
    pub c: Vec<Rat>,
}

fn falling(n: usize, k: usize) -> i64 {
    (0..k).map(|j| (n - j) as i64).product()
}

fn factorial(n: usize) -> Rat {
    rat((1..=n as i64).product())
}

fn binomial(n: usize, k: usize) -> i64 {
    falling(n, k) / falling(k, k)
}

impl BinForm {
    pub fn new(deg: usize, mut c: Vec<Rat>) -> Self {
        c.resize(deg + 1, Rat::zero());
        BinForm { deg, c }
    }

    pub fn linear(x: Rat, z: Rat) -> Self {
        BinForm { deg: 1, c: vec![z, x] }
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(Zero::is_zero)
    }

    /// `d^(a+b) / dX^a dZ^b`.
    pub fn derivative(&self, a: usize, b: usize) -> BinForm {
        if a + b > self.deg {
            return BinForm::new(0, vec![]);
        }
        let deg = self.deg - a - b;
        let mut c = vec![Rat::zero(); deg + 1];
        for (i, v) in self.c.iter().enumerate() {
            if v.is_zero() || i < a || self.deg - i < b {
                continue;
            }
            c[i - a] += v * rat(falling(i, a) * falling(self.deg - i, b));
        }
        BinForm { deg, c }
    }

    pub fn mul(&self, o: &BinForm) -> BinForm {
        let mut c = vec![Rat::zero(); self.deg + o.deg + 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                if !b.is_zero() {
                    c[i + j] += a * b;
                }
            }
        }
        BinForm { deg: self.deg + o.deg, c }
    }

    pub fn add(&self, o: &BinForm) -> BinForm {
        assert_eq!(self.deg, o.deg);
        BinForm { deg: self.deg, c: self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect() }
    }

    pub fn scale(&self, q: &Rat) -> BinForm {
        BinForm { deg: self.deg, c: self.c.iter().map(|a| a * q).collect() }
    }

    pub fn pow(&self, e: usize) -> BinForm {
        let mut acc = BinForm { deg: 0, c: vec![Rat::one()] };
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }
}

/// The `k`-th transvectant `(f, g)_k`, normalized by `(m-k)!(n-k)!/(m! n!)`.
pub fn transvectant(f: &BinForm, g: &BinForm, k: usize) -> BinForm {
    let (m, n) = (f.deg, g.deg);
    assert!(k <= m && k <= n, "transvectant order exceeds a degree");
    let mut acc = BinForm::new(m + n - 2 * k, vec![]);
    for i in 0..=k {
        let term = f.derivative(k - i, i).mul(&g.derivative(i, k - i));
        let s = rat(binomial(k, i) * if i % 2 == 0 { 1 } else { -1 });
        acc = acc.add(&term.scale(&s));
    }
    acc.scale(&(factorial(m - k) * factorial(n - k) / (factorial(m) * factorial(n))))
}

/// `F(aX + bZ, cX + dZ)` for `m = [[a, b], [c, d]]`.
pub fn act(f: &BinForm, m: &[[Rat; 2]; 2]) -> BinForm {
    let l1 = BinForm::linear(m[0][0].clone(), m[0][1].clone());
    let l2 = BinForm::linear(m[1][0].clone(), m[1][1].clone());
    let mut acc = BinForm::new(f.deg, vec![]);
    for (i, c) in f.c.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        acc = acc.add(&l1.pow(i).mul(&l2.pow(f.deg - i)).scale(c));
    }
    acc
}

/// Clebsch invariants `A, B, C, D` (degrees 2, 4, 6, 10) of a binary sextic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClebschInvariants {
    pub a: Rat,
    pub b: Rat,
    pub c: Rat,
    pub d: Rat,
}

impl ClebschInvariants {
    pub fn as_array(&self) -> [Rat; 4] {
        [self.a.clone(), self.b.clone(), self.c.clone(), self.d.clone()]
    }
}

struct Covariants {
    i: BinForm,
    delta: BinForm,
    y1: BinForm,
    y2: BinForm,
    y3: BinForm,
}

fn covariants(f: &BinForm) -> Covariants {
    let i = transvectant(f, f, 4);
    let delta = transvectant(&i, &i, 2);
    let y1 = transvectant(f, &i, 4);
    let y2 = transvectant(&i, &y1, 2);
    let y3 = transvectant(&i, &y2, 2);
    Covariants { i, delta, y1, y2, y3 }
}

fn sextic(curve_or_form: &BinForm) -> &BinForm {
    assert_eq!(curve_or_form.deg, 6, "Clebsch invariants are defined for sextics");
    curve_or_form
}

pub fn clebsch_of_form(f: &BinForm) -> ClebschInvariants {
    let f = sextic(f);
    let cv = covariants(f);
    ClebschInvariants {
        a: transvectant(f, f, 6).c[0].clone(),
        b: transvectant(&cv.i, &cv.i, 4).c[0].clone(),
        c: transvectant(&cv.i, &cv.delta, 4).c[0].clone(),
        d: transvectant(&cv.y3, &cv.y1, 2).c[0].clone(),
    }
}

pub fn clebsch_invariants(curve: &GenusTwoCurve) -> ClebschInvariants {
    clebsch_of_form(&curve.form())
}

/// Determinant of the quadratic covariants `y1, y2, y3`: an invariant of
/// degree 15 vanishing exactly on sextics with a nonhyperelliptic involution.
pub fn clebsch_r_of_form(f: &BinForm) -> Rat {
    let cv = covariants(sextic(f));
    det_rat(&[cv.y1.c.clone(), cv.y2.c.clone(), cv.y3.c.clone()])
}

pub fn clebsch_r(curve: &GenusTwoCurve) -> Rat {
    clebsch_r_of_form(&curve.form())
}

const WEIGHTS: [i64; 4] = [1, 2, 3, 5];

fn rat_pow(q: &Rat, e: i64) -> Rat {
    if e >= 0 {
        q.pow(e as i32)
    } else {
        q.recip().pow((-e) as i32)
    }
}

/// Whether `J_k = lambda^(w_k) I_k` for some nonzero algebraic `lambda`
/// with weights `(1, 2, 3, 5)`.
pub fn same_weighted_class(i: &ClebschInvariants, j: &ClebschInvariants) -> bool {
    let (iv, jv) = (i.as_array(), j.as_array());
    let mut support = Vec::new();
    for k in 0..4 {
        match (iv[k].is_zero(), jv[k].is_zero()) {
            (true, true) => {}
            (false, false) => support.push(k),
            _ => return false,
        }
    }
    if support.is_empty() {
        return true;
    }
    let ratios: Vec<Rat> = support.iter().map(|&k| &jv[k] / &iv[k]).collect();
    // sum u_k w_k = g, then lambda^g = prod r_k^(u_k) and r_k = (lambda^g)^(w_k/g)
    let mut g = 0i64;
    let mut u = vec![0i64; support.len()];
    for (n, &k) in support.iter().enumerate() {
        let e = BigInt::from(g).extended_gcd(&BigInt::from(WEIGHTS[k]));
        let (x, y): (i64, i64) = (e.x.try_into().unwrap(), e.y.try_into().unwrap());
        for v in u.iter_mut().take(n) {
            *v *= x;
        }
        u[n] = y;
        g = e.gcd.try_into().unwrap();
    }
    let lam_g = support.iter().zip(&u).fold(Rat::one(), |acc, (&k, &e)| acc * rat_pow(&(&jv[k] / &iv[k]), e));
    support.iter().zip(&ratios).all(|(&k, r)| rat_pow(&lam_g, WEIGHTS[k] / g) == *r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(a: i64, b: i64, c: i64, d: i64) -> [[Rat; 2]; 2] {
        [[rat(a), rat(b)], [rat(c), rat(d)]]
    }

    #[test]
    fn invariance_law() {
        let c = GenusTwoCurve::from_ints(&[1, 2, 1, 2, 6, 4, 1]).unwrap();
        let f = c.form();
        let mat = m(2, 1, -1, 3);
        let det = rat(7);
        let g = act(&f, &mat);
        let (i, j) = (clebsch_of_form(&f), clebsch_of_form(&g));
        assert_eq!(j.a, &i.a * det.pow(6));
        assert_eq!(j.b, &i.b * det.pow(12));
        assert_eq!(j.c, &i.c * det.pow(18));
        assert_eq!(j.d, &i.d * det.pow(30));
        assert!(same_weighted_class(&i, &j));
    }

    #[test]
    fn scaling_keeps_the_class() {
        let c = GenusTwoCurve::from_ints(&[-27, 0, 0, -26, 0, 0, 1]).unwrap();
        let f = c.form();
        let g = f.scale(&rat(9));
        assert!(same_weighted_class(&clebsch_of_form(&f), &clebsch_of_form(&g)));
    }

    #[test]
    fn sign_of_the_odd_relation_matters() {
        let i = ClebschInvariants { a: rat(0), b: rat(1), c: rat(1), d: rat(1) };
        let j = ClebschInvariants { a: rat(0), b: rat(1), c: rat(1), d: rat(-1) };
        assert!(!same_weighted_class(&i, &j));
        let k = ClebschInvariants { a: rat(0), b: rat(4), c: rat(8), d: rat(32) };
        assert!(same_weighted_class(&i, &k));
    }

    #[test]
    fn x6_minus_1_symmetric() {
        let c = GenusTwoCurve::from_ints(&[-1, 0, 0, 0, 0, 0, 1]).unwrap();
        let f = c.form();
        let g = act(&f, &m(-1, 0, 0, 1));
        assert_eq!(clebsch_of_form(&f), clebsch_of_form(&g));
        assert!(clebsch_r(&c).is_zero());
    }

    #[test]
    fn c13_and_c16_differ() {
        let c13 = GenusTwoCurve::from_ints(&[1, 2, 1, 2, 6, 4, 1]).unwrap();
        let c16 = GenusTwoCurve::from_ints(&[1, -2, -1, 0, -1, 2, 1]).unwrap();
        assert!(!same_weighted_class(&clebsch_invariants(&c13), &clebsch_invariants(&c16)));
    }
}
